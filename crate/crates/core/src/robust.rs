use crate::error::{Error, Result};

/// Huber loss: quadratic inside `±delta`, linear outside, C¹ at the knot.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct HuberLoss {
    delta: f64,
}

impl HuberLoss {
    /// Default knot for geometric residuals, in meters.
    pub const GEOMETRIC_DELTA: f64 = 0.1;
    /// Default knot for thermal residuals, in °C.
    pub const THERMAL_DELTA: f64 = 2.0;

    pub fn new(delta: f64) -> Result<Self> {
        if !(delta.is_finite() && delta > 0.0) {
            return Err(Error::InvalidArgument(format!(
                "huber delta must be positive and finite, got {delta}"
            )));
        }
        Ok(HuberLoss { delta })
    }

    pub fn geometric() -> Self {
        HuberLoss {
            delta: Self::GEOMETRIC_DELTA,
        }
    }

    pub fn thermal() -> Self {
        HuberLoss {
            delta: Self::THERMAL_DELTA,
        }
    }

    pub fn delta(&self) -> f64 {
        self.delta
    }

    /// Returns `(ρ(r), ρ'(r))`.
    pub fn eval(&self, r: f64) -> (f64, f64) {
        let a = r.abs();
        if a <= self.delta {
            (0.5 * r * r, r)
        } else {
            (self.delta * (a - 0.5 * self.delta), self.delta * r.signum())
        }
    }

    pub fn value(&self, r: f64) -> f64 {
        self.eval(r).0
    }

    /// IRLS weight `ρ'(n)/n` for a residual block of norm `n ≥ 0`.
    pub fn weight(&self, norm: f64) -> f64 {
        if norm <= self.delta {
            1.0
        } else {
            self.delta / norm
        }
    }
}
