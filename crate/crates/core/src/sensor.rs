//! Raw sensor records: range scans, gravity samples, thermal frames and the
//! pinhole intrinsics of the thermal camera.

use crate::error::{Error, Result};
use crate::geometry::Vec3;

/// Nanoseconds since session start.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Default)]
pub struct Timestamp(pub u64);

impl Timestamp {
    pub fn from_secs(s: f64) -> Self {
        Timestamp((s * 1e9).round().max(0.0) as u64)
    }

    pub fn nanos(self) -> u64 {
        self.0
    }

    pub fn secs(self) -> f64 {
        self.0 as f64 * 1e-9
    }

    pub fn abs_diff(self, other: Timestamp) -> u64 {
        self.0.abs_diff(other.0)
    }
}

/// One polar scan. Missing returns are stored as NaN.
#[derive(Debug, Clone, PartialEq)]
pub struct Scan2D {
    pub stamp: Timestamp,
    pub angle_min: f64,
    pub angle_increment: f64,
    pub range_max: f64,
    pub ranges: Vec<f64>,
}

impl Scan2D {
    /// Validates the scan and maps `+inf` returns to NaN.
    pub fn new(
        stamp: Timestamp,
        angle_min: f64,
        angle_increment: f64,
        range_max: f64,
        mut ranges: Vec<f64>,
    ) -> Result<Self> {
        if ranges.len() < 2 {
            return Err(Error::InvalidArgument(format!(
                "scan at {} has {} ranges, need at least 2",
                stamp.0,
                ranges.len()
            )));
        }
        if !(angle_increment.is_finite() && angle_increment > 0.0) || !angle_min.is_finite() {
            return Err(Error::InvalidArgument(format!(
                "scan at {}: bad angle parameters min={angle_min} inc={angle_increment}",
                stamp.0
            )));
        }
        if !(range_max.is_finite() && range_max > 0.0) {
            return Err(Error::InvalidArgument(format!(
                "scan at {}: bad range_max {range_max}",
                stamp.0
            )));
        }
        for r in ranges.iter_mut() {
            if *r == f64::INFINITY {
                *r = f64::NAN;
            } else if !r.is_nan() && !(*r > 0.0 && *r <= range_max) {
                return Err(Error::InvalidArgument(format!(
                    "scan at {}: range {r} outside (0, {range_max}]",
                    stamp.0
                )));
            }
        }
        Ok(Scan2D {
            stamp,
            angle_min,
            angle_increment,
            range_max,
            ranges,
        })
    }

    pub fn beam_angle(&self, i: usize) -> f64 {
        self.angle_min + i as f64 * self.angle_increment
    }

    pub fn finite_count(&self) -> usize {
        self.ranges.iter().filter(|r| r.is_finite()).count()
    }

    /// Returns `(beam index, point in the scan plane)` for every finite return.
    pub fn points(&self) -> impl Iterator<Item = (usize, Vec3)> + '_ {
        self.ranges.iter().enumerate().filter_map(|(i, &r)| {
            if r.is_finite() {
                let (s, c) = self.beam_angle(i).sin_cos();
                Some((i, Vec3::new(r * c, r * s, 0.0)))
            } else {
                None
            }
        })
    }
}

/// Unit direction of gravity in the sensor frame.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct GravityVector {
    pub stamp: Timestamp,
    pub direction: Vec3,
}

impl GravityVector {
    pub fn new(stamp: Timestamp, direction: Vec3) -> Result<Self> {
        let n = direction.norm();
        if !(n.is_finite() && n > 0.0) {
            return Err(Error::InvalidArgument(format!(
                "gravity direction at {} has norm {n}",
                stamp.0
            )));
        }
        Ok(GravityVector {
            stamp,
            direction: direction / n,
        })
    }

    pub fn down(stamp: Timestamp) -> Self {
        GravityVector {
            stamp,
            direction: Vec3::new(0.0, 0.0, -1.0),
        }
    }
}

/// Raw accelerometer reading (specific force, m/s²).
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ImuSample {
    pub stamp: Timestamp,
    pub accel: Vec3,
}

/// Exponential moving average over accelerometer samples. A resting
/// accelerometer reads the reaction to gravity, so the gravity direction is
/// the negated, normalized average.
#[derive(Debug, Clone)]
pub struct GravityFilter {
    alpha: f64,
    state: Option<Vec3>,
}

impl GravityFilter {
    pub const DEFAULT_ALPHA: f64 = 0.05;

    pub fn new(alpha: f64) -> Result<Self> {
        if !(alpha > 0.0 && alpha <= 1.0) {
            return Err(Error::InvalidArgument(format!(
                "filter alpha must lie in (0, 1], got {alpha}"
            )));
        }
        Ok(GravityFilter { alpha, state: None })
    }

    pub fn update(&mut self, sample: &ImuSample) -> Result<GravityVector> {
        let next = match self.state {
            None => sample.accel,
            Some(prev) => prev + self.alpha * (sample.accel - prev),
        };
        self.state = Some(next);
        GravityVector::new(sample.stamp, -next)
    }

    pub fn run(alpha: f64, samples: &[ImuSample]) -> Result<Vec<GravityVector>> {
        let mut f = GravityFilter::new(alpha)?;
        samples.iter().map(|s| f.update(s)).collect()
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct CameraIntrinsics {
    pub fx: f64,
    pub fy: f64,
    pub cx: f64,
    pub cy: f64,
    pub width: u32,
    pub height: u32,
}

impl CameraIntrinsics {
    pub fn new(fx: f64, fy: f64, cx: f64, cy: f64, width: u32, height: u32) -> Result<Self> {
        let ok = fx.is_finite()
            && fy.is_finite()
            && fx > 0.0
            && fy > 0.0
            && cx >= 0.0
            && cx < width as f64
            && cy >= 0.0
            && cy < height as f64;
        if !ok {
            return Err(Error::InvalidArgument(format!(
                "invalid intrinsics fx={fx} fy={fy} cx={cx} cy={cy} size={width}x{height}"
            )));
        }
        Ok(CameraIntrinsics {
            fx,
            fy,
            cx,
            cy,
            width,
            height,
        })
    }

    /// Pinhole projection with division by depth. `None` for points at or behind the camera.
    pub fn project(&self, p: &Vec3) -> Option<(f64, f64)> {
        if !(p.z > 0.0) {
            return None;
        }
        Some((self.fx * p.x / p.z + self.cx, self.fy * p.y / p.z + self.cy))
    }

    pub fn in_bounds(&self, u: f64, v: f64) -> bool {
        u >= 0.0 && v >= 0.0 && u < self.width as f64 && v < self.height as f64
    }

    /// Unnormalized camera-frame ray through pixel coordinates `(u, v)`.
    pub fn ray(&self, u: f64, v: f64) -> Vec3 {
        Vec3::new((u - self.cx) / self.fx, (v - self.cy) / self.fy, 1.0)
    }
}

/// Plausible radiometric range enforced on ingest, °C (exclusive).
pub const TEMPERATURE_RANGE: (f64, f64) = (-40.0, 300.0);

/// Radiometric frame in °C. Pixel centers sit at integer coordinates.
#[derive(Debug, Clone, PartialEq)]
pub struct ThermalImage {
    pub stamp: Timestamp,
    pub width: u32,
    pub height: u32,
    temperatures: Vec<f64>,
}

impl ThermalImage {
    pub fn new(stamp: Timestamp, width: u32, height: u32, temperatures: Vec<f64>) -> Result<Self> {
        if width == 0 || height == 0 || temperatures.len() != (width as usize) * (height as usize) {
            return Err(Error::InvalidArgument(format!(
                "thermal frame {}x{} with {} pixels",
                width,
                height,
                temperatures.len()
            )));
        }
        if let Some(bad) = temperatures
            .iter()
            .find(|t| !(t.is_finite() && **t > TEMPERATURE_RANGE.0 && **t < TEMPERATURE_RANGE.1))
        {
            return Err(Error::InvalidArgument(format!(
                "thermal frame at {}: temperature {bad} outside plausible range",
                stamp.0
            )));
        }
        Ok(ThermalImage {
            stamp,
            width,
            height,
            temperatures,
        })
    }

    pub fn temperatures(&self) -> &[f64] {
        &self.temperatures
    }

    pub fn at(&self, col: u32, row: u32) -> f64 {
        self.temperatures[row as usize * self.width as usize + col as usize]
    }

    pub fn sample_nearest(&self, u: f64, v: f64) -> Option<f64> {
        if !(u >= 0.0 && v >= 0.0 && u < self.width as f64 && v < self.height as f64) {
            return None;
        }
        let col = (u.round() as u32).min(self.width - 1);
        let row = (v.round() as u32).min(self.height - 1);
        Some(self.at(col, row))
    }

    /// Bilinear sample; the last row/column is clamped at the border.
    pub fn sample_bilinear(&self, u: f64, v: f64) -> Option<f64> {
        if !(u >= 0.0 && v >= 0.0 && u < self.width as f64 && v < self.height as f64) {
            return None;
        }
        let c0 = u.floor() as u32;
        let r0 = v.floor() as u32;
        let c1 = (c0 + 1).min(self.width - 1);
        let r1 = (r0 + 1).min(self.height - 1);
        let fu = u - c0 as f64;
        let fv = v - r0 as f64;
        // a + (b - a) f reproduces equal corners exactly.
        let lerp = |a: f64, b: f64, f: f64| a + (b - a) * f;
        let top = lerp(self.at(c0, r0), self.at(c1, r0), fu);
        let bottom = lerp(self.at(c0, r1), self.at(c1, r1), fu);
        Some(lerp(top, bottom, fv))
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn scan_normalizes_infinity() {
        let s = Scan2D::new(Timestamp(0), 0.0, 0.1, 10.0, vec![1.0, f64::INFINITY, f64::NAN]).unwrap();
        assert!(s.ranges[1].is_nan());
        assert_eq!(s.finite_count(), 1);
    }

    #[test]
    fn scan_rejects_invalid() {
        assert!(Scan2D::new(Timestamp(0), 0.0, 0.1, 10.0, vec![1.0]).is_err());
        assert!(Scan2D::new(Timestamp(0), 0.0, 0.0, 10.0, vec![1.0, 2.0]).is_err());
        assert!(Scan2D::new(Timestamp(0), 0.0, 0.1, 10.0, vec![1.0, 11.0]).is_err());
        assert!(Scan2D::new(Timestamp(0), 0.0, 0.1, 10.0, vec![1.0, 0.0]).is_err());
        assert!(Scan2D::new(Timestamp(0), 0.0, 0.1, 10.0, vec![1.0, f64::NEG_INFINITY]).is_err());
    }

    #[test]
    fn gravity_filter_static_input() {
        let samples: Vec<_> = (0..20)
            .map(|i| ImuSample {
                stamp: Timestamp(i * 10_000_000),
                accel: Vec3::new(0.0, 0.0, 9.81),
            })
            .collect();
        let g = GravityFilter::run(0.05, &samples).unwrap();
        assert!(g.iter().all(|g| g.direction == Vec3::new(0.0, 0.0, -1.0)));
    }

    #[test]
    fn gravity_filter_smooths_step() {
        let mut f = GravityFilter::new(0.5).unwrap();
        f.update(&ImuSample { stamp: Timestamp(0), accel: Vec3::new(0.0, 0.0, 10.0) }).unwrap();
        let g = f
            .update(&ImuSample { stamp: Timestamp(1), accel: Vec3::new(10.0, 0.0, 10.0) })
            .unwrap();
        let expected = -Vec3::new(5.0, 0.0, 10.0).normalize();
        assert!((g.direction - expected).norm() < 1e-15);
    }

    #[test]
    fn intrinsics_validation() {
        assert!(CameraIntrinsics::new(500.0, 500.0, 320.0, 240.0, 640, 480).is_ok());
        assert!(CameraIntrinsics::new(0.0, 500.0, 320.0, 240.0, 640, 480).is_err());
        assert!(CameraIntrinsics::new(500.0, 500.0, 640.0, 240.0, 640, 480).is_err());
    }

    #[test]
    fn thermal_ingest_checks_range() {
        assert!(ThermalImage::new(Timestamp(0), 2, 1, vec![20.0, 300.0]).is_err());
        assert!(ThermalImage::new(Timestamp(0), 2, 1, vec![20.0, f64::NAN]).is_err());
        assert!(ThermalImage::new(Timestamp(0), 2, 2, vec![20.0, 21.0]).is_err());
    }

    #[test]
    fn bilinear_sampling() {
        let img = ThermalImage::new(Timestamp(0), 2, 2, vec![10.0, 20.0, 30.0, 40.0]).unwrap();
        assert_eq!(img.sample_bilinear(0.0, 0.0), Some(10.0));
        assert_eq!(img.sample_bilinear(0.5, 0.0), Some(15.0));
        assert_eq!(img.sample_bilinear(0.5, 0.5), Some(25.0));
        assert_eq!(img.sample_bilinear(1.5, 1.5), Some(40.0));
        assert_eq!(img.sample_bilinear(2.0, 0.0), None);
        assert_eq!(img.sample_bilinear(-0.1, 0.0), None);
        assert_eq!(img.sample_nearest(0.6, 0.4), Some(20.0));
    }
}
