use std::thread;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, Normal};

use super::raycast::{degrade, raycast_scan, render_clean};
use super::site::{SiteModel, WALL_SAMPLE_SPACING};
use super::trajectory::TrajectorySpec;
use super::{presets, NoiseSpec};
use crate::dataset::{Calibration, GroundTruth, RawThermalFrame, SessionDataset, WallSample};
use crate::error::{Error, Result};
use crate::geometry::{RigidTransform3, Vec3};
use crate::sensor::{CameraIntrinsics, ImuSample, Timestamp};

pub const STANDARD_GRAVITY: f64 = 9.80665;

/// Minimum distance between a waypoint and any wall.
const WAYPOINT_CLEARANCE: f64 = 0.05;

#[derive(Debug, Clone, PartialEq)]
pub struct SensorRig {
    pub beam_count: usize,
    pub fov: f64,
    pub r_max: f64,
    /// Scanner height above the floor, m.
    pub sensor_height: f64,
    pub vertical_step: f64,
    pub intrinsics: CameraIntrinsics,
    /// Scanner frame → camera frame.
    pub cam_extrinsic: RigidTransform3,
    pub thermal_scale: f64,
    pub thermal_offset: f64,
}

impl Default for SensorRig {
    fn default() -> Self {
        presets::default_rig()
    }
}

// Independent streams of one seeded generator, one per noise source.
const STREAM_TILT: u64 = 1;
const STREAM_IMU: u64 = 2;
const STREAM_LIDAR: u64 = 3;
const STREAM_THERMAL: u64 = 4;

fn stream(seed: u64, id: u64) -> ChaCha8Rng {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(id);
    rng
}

/// Smooth roll/pitch wobble: three sinusoids per axis with RMS `sigma`.
struct TiltProcess {
    terms: [[(f64, f64, f64); 3]; 2],
}

impl TiltProcess {
    fn new(sigma: f64, rng: &mut ChaCha8Rng) -> Self {
        let amp = sigma * (2.0f64 / 3.0).sqrt();
        let mut terms = [[(0.0, 0.0, 0.0); 3]; 2];
        for axis in terms.iter_mut() {
            for t in axis.iter_mut() {
                let freq = rng.random_range(0.02..0.2);
                let phase = rng.random_range(0.0..std::f64::consts::TAU);
                *t = (amp, freq, phase);
            }
        }
        TiltProcess { terms }
    }

    fn at(&self, t: f64) -> (f64, f64) {
        let eval = |axis: &[(f64, f64, f64); 3]| {
            axis.iter()
                .map(|(a, f, p)| a * (std::f64::consts::TAU * f * t + p).sin())
                .sum::<f64>()
        };
        (eval(&self.terms[0]), eval(&self.terms[1]))
    }
}

fn check_placement(site: &SiteModel, traj: &TrajectorySpec) -> Result<()> {
    for (k, w) in traj.waypoints.iter().enumerate() {
        let (wall, d) = site.nearest_wall(w);
        if d < WAYPOINT_CLEARANCE {
            return Err(Error::SensorPlacement(format!(
                "waypoint {k} at ({}, {}) is inside wall {wall}",
                w.x, w.y
            )));
        }
    }
    for (k, seg) in traj.waypoints.windows(2).enumerate() {
        if let Some(wall) = site.walls.iter().position(|w| w.crosses(&seg[0], &seg[1])) {
            return Err(Error::SensorPlacement(format!(
                "path from waypoint {k} to {} passes through wall {wall}",
                k + 1
            )));
        }
    }
    Ok(())
}

pub fn simulate_session(site: &SiteModel, traj: &TrajectorySpec, noise: &NoiseSpec, seed: u64) -> Result<SessionDataset> {
    simulate_session_with_rig(site, traj, noise, &SensorRig::default(), seed)
}

/// Drives `rig` along `traj` through `site`. The output is a pure function of
/// the arguments.
pub fn simulate_session_with_rig(
    site: &SiteModel,
    traj: &TrajectorySpec,
    noise: &NoiseSpec,
    rig: &SensorRig,
    seed: u64,
) -> Result<SessionDataset> {
    traj.validate()?;
    noise.validate()?;
    check_placement(site, traj)?;
    let calib = Calibration {
        intrinsics: rig.intrinsics,
        cam_extrinsic: rig.cam_extrinsic,
        sensor_height: rig.sensor_height,
        floor_height: site.floor_height,
        vertical_step: rig.vertical_step,
        thermal_scale: rig.thermal_scale,
        thermal_offset: rig.thermal_offset,
    };
    calib.extrusion()?;

    let tilt = TiltProcess::new(noise.gravity_tilt_sigma, &mut stream(seed, STREAM_TILT));
    let sensor_pose = |t: Timestamp| {
        let p = traj.pose_at(t.secs());
        let (roll, pitch) = tilt.at(t.secs());
        RigidTransform3::new(
            RigidTransform3::rot_z(p.theta_z) * RigidTransform3::rot_y(pitch) * RigidTransform3::rot_x(roll),
            Vec3::new(p.x, p.y, rig.sensor_height),
        )
    };

    let mut rng = stream(seed, STREAM_IMU);
    let accel_noise = (noise.accel_noise_sigma > 0.0).then(|| Normal::new(0.0, noise.accel_noise_sigma).unwrap());
    let imu = traj
        .sample_times(traj.imu_rate)
        .into_iter()
        .map(|t| {
            let mut accel = sensor_pose(t).rotation.transpose() * Vec3::new(0.0, 0.0, STANDARD_GRAVITY);
            if let Some(n) = &accel_noise {
                accel += Vec3::new(n.sample(&mut rng), n.sample(&mut rng), n.sample(&mut rng));
            }
            ImuSample { stamp: t, accel }
        })
        .collect();

    let mut rng = stream(seed, STREAM_LIDAR);
    let range_noise = (noise.range_sigma > 0.0).then(|| Normal::new(0.0, noise.range_sigma).unwrap());
    let scan_times = traj.sample_times(traj.scan_rate);
    let mut scans = Vec::with_capacity(scan_times.len());
    for &t in &scan_times {
        let mut scan = raycast_scan(site, &sensor_pose(t), t, rig.beam_count, rig.fov, rig.r_max)?;
        for r in scan.ranges.iter_mut().filter(|r| r.is_finite()) {
            if noise.range_dropout_prob > 0.0 && rng.random_bool(noise.range_dropout_prob) {
                *r = f64::NAN;
                continue;
            }
            if let Some(n) = &range_noise {
                *r += n.sample(&mut rng);
                if !(*r > 0.0 && *r <= rig.r_max) {
                    *r = f64::NAN;
                }
            }
        }
        scans.push(scan);
    }

    let frame_times = traj.sample_times(traj.thermal_rate);
    let poses: Vec<RigidTransform3> = frame_times
        .iter()
        .map(|&t| rig.cam_extrinsic.compose(&sensor_pose(t).inverse()))
        .collect();
    let mut images = render_parallel(site, &poses, &rig.intrinsics);
    let mut rng = stream(seed, STREAM_THERMAL);
    let mut thermal = Vec::with_capacity(images.len());
    for (t, img) in frame_times.iter().zip(images.iter_mut()) {
        degrade(site, img, noise, &mut rng);
        thermal.push(RawThermalFrame {
            stamp: *t,
            width: rig.intrinsics.width,
            height: rig.intrinsics.height,
            pixels: img.iter().map(|&c| calib.celsius_to_raw(c)).collect(),
        });
    }

    let ground_truth = GroundTruth {
        trajectory: scan_times.iter().map(|&t| (t, traj.pose_at(t.secs()))).collect(),
        wall_samples: site
            .wall_samples(WALL_SAMPLE_SPACING)
            .into_iter()
            .map(|(wall_id, position, temperature)| WallSample {
                wall_id,
                position,
                temperature,
            })
            .collect(),
    };

    Ok(SessionDataset {
        scans,
        imu,
        thermal,
        calib,
        ground_truth: Some(ground_truth),
    })
}

fn render_parallel(site: &SiteModel, poses: &[RigidTransform3], k: &CameraIntrinsics) -> Vec<Vec<f64>> {
    let workers = thread::available_parallelism().map_or(1, |n| n.get()).min(poses.len().max(1));
    let chunk = poses.len().div_ceil(workers.max(1)).max(1);
    thread::scope(|s| {
        let handles: Vec<_> = poses
            .chunks(chunk)
            .map(|part| s.spawn(move || part.iter().map(|p| render_clean(site, p, k)).collect::<Vec<_>>()))
            .collect();
        handles
            .into_iter()
            .flat_map(|h| h.join().expect("render worker panicked"))
            .collect()
    })
}
