use std::f64::consts::{PI, TAU};

use rand::Rng;
use rand_distr::{Distribution, Normal};

use super::site::{SiteModel, Surface};
use super::NoiseSpec;
use crate::error::{Error, Result};
use crate::geometry::{RigidTransform3, Vec3};
use crate::sensor::{CameraIntrinsics, Scan2D, ThermalImage, Timestamp};

/// A sensor closer than this to a wall counts as standing on it.
const MIN_CLEARANCE: f64 = 1e-6;
const MIN_HIT_DISTANCE: f64 = 1e-12;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Hit {
    pub distance: f64,
    pub point: Vec3,
    pub surface: Surface,
}

/// Nearest intersection of the ray `origin + t·dir` (t > 0) with the site.
/// Walls are vertical rectangles over their segment from z = 0 to their
/// height; the floor and ceiling slabs are only tested when `include_slabs`.
/// `distance` is measured along the normalized direction.
pub fn cast_ray(site: &SiteModel, origin: &Vec3, dir: &Vec3, include_slabs: bool) -> Option<Hit> {
    let d = dir.normalize();
    let mut best: Option<(f64, Surface)> = None;
    let mut offer = |t: f64, s: Surface| {
        if t > MIN_HIT_DISTANCE && best.is_none_or(|(bt, _)| t < bt) {
            best = Some((t, s));
        }
    };
    for (id, w) in site.walls.iter().enumerate() {
        let e = w.b - w.a;
        let denom = d.x * e.y - d.y * e.x;
        if denom.abs() < 1e-15 {
            continue;
        }
        let wx = w.a.x - origin.x;
        let wy = w.a.y - origin.y;
        let t = (wx * e.y - wy * e.x) / denom;
        let s = (wx * d.y - wy * d.x) / denom;
        if !(0.0..=1.0).contains(&s) {
            continue;
        }
        let z = origin.z + t * d.z;
        if (0.0..=w.height).contains(&z) {
            offer(t, Surface::Wall(id));
        }
    }
    if include_slabs {
        if d.z < 0.0 {
            offer(-origin.z / d.z, Surface::Floor);
        } else if d.z > 0.0 {
            offer((site.floor_height - origin.z) / d.z, Surface::Ceiling);
        }
    }
    best.map(|(t, surface)| Hit {
        distance: t,
        point: origin + d * t,
        surface,
    })
}

/// Beam angles for `beam_count` beams over `fov`. A full circle starts at −π
/// without repeating the last beam; narrower fans are centered on +x.
pub fn beam_layout(beam_count: usize, fov: f64) -> Result<(f64, f64)> {
    if beam_count < 2 || !(fov > 0.0 && fov <= TAU + 1e-12) {
        return Err(Error::InvalidArgument(format!(
            "need at least 2 beams over a field of view in (0, 2π], got {beam_count} over {fov}"
        )));
    }
    if fov >= TAU - 1e-12 {
        Ok((-PI, TAU / beam_count as f64))
    } else {
        Ok((-fov / 2.0, fov / (beam_count - 1) as f64))
    }
}

/// Noise-free scan from a sensor at `sensor_pose` (sensor → world).
pub fn raycast_scan(
    site: &SiteModel,
    sensor_pose: &RigidTransform3,
    stamp: Timestamp,
    beam_count: usize,
    fov: f64,
    r_max: f64,
) -> Result<Scan2D> {
    if !(r_max.is_finite() && r_max > 0.0) {
        return Err(Error::InvalidArgument(format!("r_max must be positive, got {r_max}")));
    }
    let origin = sensor_pose.translation;
    let (wall, dist) = site.nearest_wall(&origin.xy());
    if dist < MIN_CLEARANCE {
        return Err(Error::SensorPlacement(format!(
            "sensor at ({}, {}) lies on wall {wall}",
            origin.x, origin.y
        )));
    }
    let (angle_min, inc) = beam_layout(beam_count, fov)?;
    let ranges = (0..beam_count)
        .map(|i| {
            let a = angle_min + inc * i as f64;
            let dir = sensor_pose.rotation * Vec3::new(a.cos(), a.sin(), 0.0);
            match cast_ray(site, &origin, &dir, false) {
                Some(h) if h.distance <= r_max => h.distance,
                _ => f64::NAN,
            }
        })
        .collect();
    Scan2D::new(stamp, angle_min, inc, r_max, ranges)
}

/// Noise-free per-pixel temperatures seen from `camera_pose` (world → camera).
pub fn render_clean(site: &SiteModel, camera_pose: &RigidTransform3, k: &CameraIntrinsics) -> Vec<f64> {
    let cam_to_world = camera_pose.inverse();
    let origin = cam_to_world.translation;
    let mut out = Vec::with_capacity(k.width as usize * k.height as usize);
    for row in 0..k.height {
        for col in 0..k.width {
            let dir = cam_to_world.rotation * k.ray(col as f64, row as f64);
            out.push(match cast_ray(site, &origin, &dir, true) {
                Some(h) => site.temperature(&h.point),
                None => site.ambient,
            });
        }
    }
    out
}

/// Blends toward ambient by the haze factor and adds Gaussian pixel noise.
pub fn degrade<R: Rng + ?Sized>(site: &SiteModel, clean: &mut [f64], noise: &NoiseSpec, rng: &mut R) {
    let h = noise.haze_attenuation;
    let gauss = (noise.thermal_noise_sigma > 0.0).then(|| Normal::new(0.0, noise.thermal_noise_sigma).unwrap());
    for t in clean.iter_mut() {
        *t = (1.0 - h) * *t + h * site.ambient;
        if let Some(g) = &gauss {
            *t += g.sample(rng);
        }
    }
}

pub fn render_thermal<R: Rng + ?Sized>(
    site: &SiteModel,
    camera_pose: &RigidTransform3,
    k: &CameraIntrinsics,
    noise: &NoiseSpec,
    stamp: Timestamp,
    rng: &mut R,
) -> Result<ThermalImage> {
    noise.validate()?;
    let mut t = render_clean(site, camera_pose, k);
    degrade(site, &mut t, noise, rng);
    ThermalImage::new(stamp, k.width, k.height, t)
}
