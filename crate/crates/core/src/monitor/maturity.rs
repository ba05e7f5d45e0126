use crate::error::{Error, Result};
use crate::geometry::Vec3;

/// Datum below which hydration is taken not to progress, °C.
pub const DEFAULT_DATUM_C: f64 = -10.0;

/// Temperature–time factor history of one measurement point (Nurse–Saul).
#[derive(Debug, Clone, PartialEq)]
pub struct MaturityRecord {
    pub position: Vec3,
    /// `(time h, temperature °C)`, strictly increasing in time.
    pub samples: Vec<(f64, f64)>,
    /// Accumulated °C·h above the datum.
    pub maturity: f64,
    pub datum_temperature: f64,
}

impl MaturityRecord {
    pub fn new(position: Vec3, datum_temperature: f64) -> Self {
        MaturityRecord {
            position,
            samples: Vec::new(),
            maturity: 0.0,
            datum_temperature,
        }
    }
}

/// Appends a sample and adds `max(0, T̄ − T_datum)·Δt`, with `T̄` the mean of the
/// previous and new temperatures.
pub fn accumulate_maturity(record: &MaturityRecord, sample: (f64, f64)) -> Result<MaturityRecord> {
    let (t, temp) = sample;
    if !(t.is_finite() && temp.is_finite()) {
        return Err(Error::InvalidArgument(format!("non-finite maturity sample ({t}, {temp})")));
    }
    let mut out = record.clone();
    if let Some(&(t_prev, temp_prev)) = record.samples.last() {
        if !(t > t_prev) {
            return Err(Error::NonMonotonicTime(format!(
                "maturity sample at {t} h does not follow {t_prev} h"
            )));
        }
        let mean = 0.5 * (temp_prev + temp);
        out.maturity += (mean - record.datum_temperature).max(0.0) * (t - t_prev);
    }
    out.samples.push(sample);
    Ok(out)
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct RateViolation {
    pub start_h: f64,
    pub end_h: f64,
    /// Signed rate over the interval, °C/h.
    pub rate: f64,
}

/// Consecutive-sample intervals whose temperature rate strictly exceeds `max_rate`.
pub fn rate_alert(record: &MaturityRecord, max_rate: f64) -> Vec<RateViolation> {
    record
        .samples
        .windows(2)
        .filter_map(|w| {
            let (t0, v0) = w[0];
            let (t1, v1) = w[1];
            let rate = (v1 - v0) / (t1 - t0);
            (rate.abs() > max_rate).then_some(RateViolation {
                start_h: t0,
                end_h: t1,
                rate,
            })
        })
        .collect()
}
