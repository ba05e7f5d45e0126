//! In-memory form of a recorded (or simulated) session.

use crate::error::{Error, Result};
use crate::geometry::{PlanarPose, RigidTransform3, Vec3};
use crate::sensor::{CameraIntrinsics, ImuSample, Scan2D, ThermalImage, Timestamp};
use crate::thermal::ExtrusionConfig;

/// Camera and mounting calibration of one session.
#[derive(Debug, Clone, PartialEq)]
pub struct Calibration {
    pub intrinsics: CameraIntrinsics,
    /// Maps scanner-frame points into the camera frame.
    pub cam_extrinsic: RigidTransform3,
    pub sensor_height: f64,
    pub floor_height: f64,
    pub vertical_step: f64,
    /// `temperature_C = raw · thermal_scale + thermal_offset`.
    pub thermal_scale: f64,
    pub thermal_offset: f64,
}

impl Calibration {
    pub const DEFAULT_THERMAL_SCALE: f64 = 0.01;
    pub const DEFAULT_THERMAL_OFFSET: f64 = -100.0;

    pub fn extrusion(&self) -> Result<ExtrusionConfig> {
        ExtrusionConfig::new(self.sensor_height, self.floor_height, self.vertical_step)
    }

    pub fn raw_to_celsius(&self, raw: u16) -> f64 {
        raw as f64 * self.thermal_scale + self.thermal_offset
    }

    /// Nearest raw code for a temperature, saturating at the 16-bit range.
    pub fn celsius_to_raw(&self, celsius: f64) -> u16 {
        ((celsius - self.thermal_offset) / self.thermal_scale)
            .round()
            .clamp(0.0, u16::MAX as f64) as u16
    }
}

/// Undecoded 16-bit radiometric frame, row-major.
#[derive(Debug, Clone, PartialEq)]
pub struct RawThermalFrame {
    pub stamp: Timestamp,
    pub width: u32,
    pub height: u32,
    pub pixels: Vec<u16>,
}

impl RawThermalFrame {
    pub fn to_celsius(&self, calib: &Calibration) -> Result<ThermalImage> {
        let t = self.pixels.iter().map(|&r| calib.raw_to_celsius(r)).collect();
        ThermalImage::new(self.stamp, self.width, self.height, t)
    }
}

/// Temperature sample on a true wall surface, written next to simulated sessions.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct WallSample {
    pub wall_id: usize,
    pub position: Vec3,
    pub temperature: f64,
}

#[derive(Debug, Clone, PartialEq, Default)]
pub struct GroundTruth {
    /// World-frame robot pose at every scan.
    pub trajectory: Vec<(Timestamp, PlanarPose)>,
    pub wall_samples: Vec<WallSample>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct SessionDataset {
    pub scans: Vec<Scan2D>,
    pub imu: Vec<ImuSample>,
    pub thermal: Vec<RawThermalFrame>,
    pub calib: Calibration,
    pub ground_truth: Option<GroundTruth>,
}

impl SessionDataset {
    pub fn thermal_images(&self) -> Result<Vec<ThermalImage>> {
        self.thermal
            .iter()
            .map(|f| {
                if f.width != self.calib.intrinsics.width || f.height != self.calib.intrinsics.height {
                    return Err(Error::InvalidArgument(format!(
                        "thermal frame at {} is {}x{}, calibration says {}x{}",
                        f.stamp.0,
                        f.width,
                        f.height,
                        self.calib.intrinsics.width,
                        self.calib.intrinsics.height
                    )));
                }
                f.to_celsius(&self.calib)
            })
            .collect()
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn radiometric_conversion() {
        let calib = Calibration {
            intrinsics: CameraIntrinsics::new(100.0, 100.0, 80.0, 60.0, 160, 120).unwrap(),
            cam_extrinsic: RigidTransform3::identity(),
            sensor_height: 0.5,
            floor_height: 3.0,
            vertical_step: 0.1,
            thermal_scale: 0.01,
            thermal_offset: -100.0,
        };
        assert!((calib.raw_to_celsius(13000) - 30.0).abs() < 1e-12);
        assert_eq!(calib.celsius_to_raw(30.0), 13000);
        assert_eq!(calib.celsius_to_raw(-500.0), 0);
    }
}
