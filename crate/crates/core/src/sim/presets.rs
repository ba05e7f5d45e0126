//! Bundled sites, trajectories and the default sensor rig.

use std::f64::consts::TAU;

use nalgebra::Matrix3;

use super::session::SensorRig;
use super::site::{SiteModel, TemperatureField, Wall};
use super::trajectory::TrajectorySpec;
use crate::dataset::Calibration;
use crate::error::{Error, Result};
use crate::geometry::{RigidTransform3, Vec2, Vec3};
use crate::sensor::CameraIntrinsics;

pub const AMBIENT_C: f64 = 12.0;
pub const CEILING_M: f64 = 3.0;

fn walls(height: f64, segments: &[((f64, f64), (f64, f64))]) -> Result<Vec<Wall>> {
    segments
        .iter()
        .map(|&(a, b)| Wall::new(Vec2::new(a.0, a.1), Vec2::new(b.0, b.1), height))
        .collect()
}

/// Closed `w × h` room with a corner at the origin.
pub fn rectangle_room(w: f64, h: f64, height: f64, field: TemperatureField) -> Result<SiteModel> {
    let walls = walls(height, &[((0.0, 0.0), (w, 0.0)), ((w, 0.0), (w, h)), ((w, h), (0.0, h)), ((0.0, h), (0.0, 0.0))])?;
    SiteModel::new(walls, field, height, AMBIENT_C)
}

/// South-facing walls (low y) warm, north-facing cool, slightly warmer higher up.
pub fn two_room_field() -> TemperatureField {
    TemperatureField::SunExposure {
        shade: 16.0,
        sun: 28.0,
        direction: Vec2::new(0.0, -1.0),
        lo: -4.5,
        hi: 0.5,
        vertical_gradient: 0.8,
    }
}

/// Room A spans [0, 6] × [0, 4]; room B spans [6, 11] × [−0.5, 4.5]. They share
/// a partition at x = 6 with a doorway for y in [1.2, 2.8].
pub fn two_room() -> Result<SiteModel> {
    let w = walls(
        CEILING_M,
        &[
            ((0.0, 0.0), (6.0, 0.0)),
            ((0.0, 4.0), (0.0, 0.0)),
            ((6.0, 4.0), (0.0, 4.0)),
            ((6.0, -0.5), (6.0, 1.2)),
            ((6.0, 2.8), (6.0, 4.5)),
            ((6.0, -0.5), (11.0, -0.5)),
            ((11.0, -0.5), (11.0, 4.5)),
            ((11.0, 4.5), (6.0, 4.5)),
        ],
    )?;
    SiteModel::new(w, two_room_field(), CEILING_M, AMBIENT_C)
}

/// 6 × 4 m single room with the two-room temperature field.
pub fn square_room() -> Result<SiteModel> {
    rectangle_room(6.0, 4.0, CEILING_M, two_room_field())
}

pub fn site_by_name(name: &str) -> Result<SiteModel> {
    match name {
        "two_room" => two_room(),
        "square_room" => square_room(),
        _ => Err(Error::InvalidArgument(format!(
            "unknown site preset `{name}` (expected two_room or square_room)"
        ))),
    }
}

/// Loop through both rooms and back, closing at the start.
pub fn two_room_loop() -> TrajectorySpec {
    let p = |x, y| Vec2::new(x, y);
    TrajectorySpec {
        waypoints: vec![
            p(1.5, 1.2),
            p(4.5, 1.2),
            p(4.5, 1.8),
            p(9.0, 1.8),
            p(9.0, 2.4),
            p(1.5, 2.4),
            p(1.5, 1.2),
        ],
        speed: 0.3,
        turn_rate: TrajectorySpec::DEFAULT_TURN_RATE,
        hold_s: 0.0,
        scan_rate: 10.0,
        imu_rate: 100.0,
        thermal_rate: 10.0,
    }
}

/// 360° scanner 0.5 m above the floor and a 160 × 120 thermal camera looking
/// forward, 5 cm ahead of and 15 cm above the scanner.
pub fn default_rig() -> SensorRig {
    // Scanner axes (x forward, y left, z up) to camera axes (z forward, x right, y down).
    let r = Matrix3::new(0.0, -1.0, 0.0, 0.0, 0.0, -1.0, 1.0, 0.0, 0.0);
    let offset = Vec3::new(0.05, 0.0, 0.15);
    SensorRig {
        beam_count: 360,
        fov: TAU,
        r_max: 12.0,
        sensor_height: 0.5,
        vertical_step: 0.1,
        intrinsics: CameraIntrinsics::new(110.0, 110.0, 79.5, 59.5, 160, 120).expect("valid intrinsics"),
        cam_extrinsic: RigidTransform3::new(r, -(r * offset)),
        thermal_scale: 0.01,
        thermal_offset: -100.0,
    }
}

/// Calibration the default rig reports for a site with the given ceiling.
pub fn default_rig_calibration(floor_height: f64) -> Calibration {
    let rig = default_rig();
    Calibration {
        intrinsics: rig.intrinsics,
        cam_extrinsic: rig.cam_extrinsic,
        sensor_height: rig.sensor_height,
        floor_height,
        vertical_step: rig.vertical_step,
        thermal_scale: rig.thermal_scale,
        thermal_offset: rig.thermal_offset,
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn presets_are_valid() {
        let site = two_room().unwrap();
        let traj = two_room_loop();
        traj.validate().unwrap();
        for w in &traj.waypoints {
            assert!(site.clearance(w) > 0.3);
        }
        assert!(default_rig().cam_extrinsic.is_valid(1e-12));
        let cam_origin = default_rig().cam_extrinsic.inverse().translation;
        assert!((cam_origin - Vec3::new(0.05, 0.0, 0.15)).norm() < 1e-15);
        assert!(site_by_name("nope").is_err());
    }
}
