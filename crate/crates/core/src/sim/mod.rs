//! Synthetic sites and sensor simulation with exact ground truth.

pub mod presets;
pub mod raycast;
pub mod session;
pub mod site;
pub mod trajectory;

pub use raycast::{beam_layout, cast_ray, raycast_scan, render_thermal, Hit};
pub use session::{simulate_session, simulate_session_with_rig, SensorRig};
pub use site::{SiteModel, Surface, TemperatureField, Wall};
pub use trajectory::TrajectorySpec;

use crate::error::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct NoiseSpec {
    /// m
    pub range_sigma: f64,
    pub range_dropout_prob: f64,
    /// RMS roll and pitch of the platform, rad.
    pub gravity_tilt_sigma: f64,
    /// m/s²
    pub accel_noise_sigma: f64,
    /// °C
    pub thermal_noise_sigma: f64,
    /// 0 leaves the image untouched, 1 replaces it with ambient.
    pub haze_attenuation: f64,
}

impl NoiseSpec {
    pub const fn zero() -> Self {
        NoiseSpec {
            range_sigma: 0.0,
            range_dropout_prob: 0.0,
            gravity_tilt_sigma: 0.0,
            accel_noise_sigma: 0.0,
            thermal_noise_sigma: 0.0,
            haze_attenuation: 0.0,
        }
    }

    pub fn validate(&self) -> Result<()> {
        let fields = [
            ("range_sigma", self.range_sigma),
            ("range_dropout_prob", self.range_dropout_prob),
            ("gravity_tilt_sigma", self.gravity_tilt_sigma),
            ("accel_noise_sigma", self.accel_noise_sigma),
            ("thermal_noise_sigma", self.thermal_noise_sigma),
            ("haze_attenuation", self.haze_attenuation),
        ];
        for (name, v) in fields {
            if !(v.is_finite() && v >= 0.0) {
                return Err(Error::InvalidArgument(format!("{name} must be non-negative, got {v}")));
            }
        }
        for (name, v) in [fields[1], fields[5]] {
            if v > 1.0 {
                return Err(Error::InvalidArgument(format!("{name} must be at most 1, got {v}")));
            }
        }
        Ok(())
    }
}

impl Default for NoiseSpec {
    fn default() -> Self {
        NoiseSpec::zero()
    }
}
