//! Cross-session comparison of thermal maps and accumulated-heat bookkeeping.

mod delta;
mod icp;
mod maturity;
mod series;

pub use crate::cloud::{ThermalPoint, ThermalPointCloud};
pub use delta::{compare_maps, temperature_delta, DeltaReport, MATCH_RADIUS};
pub use icp::{icp_align, IcpConfig, IcpResult};
pub use maturity::{accumulate_maturity, rate_alert, MaturityRecord, RateViolation, DEFAULT_DATUM_C};
pub use series::{track_series, SeriesReport};
