//! Ground-truth scoring shared by the integration tests.
#![allow(dead_code)]

use std::collections::BTreeMap;
use std::path::Path;

use thermal_slam::geometry::{planar_to_rigid3, Vec2};
use thermal_slam::sim::{NoiseSpec, SiteModel};
use thermal_slam::{PlanarPose, ThermalPointCloud, Vec3};

/// Noise of the noisy end-to-end run: 1 cm range, 1° tilt, 0.5 °C thermal.
pub fn noisy_spec() -> NoiseSpec {
    NoiseSpec {
        range_sigma: 0.01,
        gravity_tilt_sigma: 1f64.to_radians(),
        thermal_noise_sigma: 0.5,
        ..NoiseSpec::zero()
    }
}

#[derive(Debug, Clone, Default)]
pub struct MapScore {
    pub points: usize,
    /// RMS plan-view distance to the nearest true wall, m.
    pub wall_rms: f64,
    pub temperature_points: usize,
    pub temperature_max_error: f64,
    pub temperature_mean_error: f64,
    /// Temperature-set points whose error exceeds the tolerance passed in.
    pub temperature_outliers: usize,
    /// Of those, how many lie on the lowest extrusion level.
    pub outliers_on_floor_level: usize,
}

/// Foot of `p` on the nearest wall, keeping its height.
pub fn wall_foot(site: &SiteModel, p: &Vec3) -> (usize, Vec3, f64) {
    let xy = Vec2::new(p.x, p.y);
    let (id, dist) = site.nearest_wall(&xy);
    let w = &site.walls[id];
    let e = w.b - w.a;
    let s = ((xy - w.a).dot(&e) / e.norm_squared()).clamp(0.0, 1.0);
    let foot = w.a + e * s;
    (id, Vec3::new(foot.x, foot.y, p.z), dist)
}

/// Scores a map whose frame is the robot frame at `first_pose` (world frame).
pub fn score_map(site: &SiteModel, map: &ThermalPointCloud, first_pose: &PlanarPose, tolerance: f64) -> MapScore {
    let world = planar_to_rigid3(first_pose, 0.0);
    let mut s = MapScore {
        points: map.len(),
        ..Default::default()
    };
    let mut sq = 0.0;
    let mut err_sum = 0.0;
    for p in &map.points {
        let w = world.apply(&p.position);
        let (_, foot, dist) = wall_foot(site, &w);
        sq += dist * dist;
        if let Some(t) = p.temperature {
            let e = (t - site.temperature(&foot)).abs();
            s.temperature_points += 1;
            err_sum += e;
            s.temperature_max_error = s.temperature_max_error.max(e);
            if e > tolerance {
                s.temperature_outliers += 1;
                if p.position.z.abs() < 1e-6 {
                    s.outliers_on_floor_level += 1;
                }
            }
        }
    }
    s.wall_rms = (sq / s.points.max(1) as f64).sqrt();
    s.temperature_mean_error = err_sum / s.temperature_points.max(1) as f64;
    s
}

/// Every file under `root`, keyed by relative path.
pub fn read_tree(root: &Path) -> BTreeMap<String, Vec<u8>> {
    fn walk(base: &Path, dir: &Path, out: &mut BTreeMap<String, Vec<u8>>) {
        let mut entries: Vec<_> = std::fs::read_dir(dir).expect("readable dir").map(|e| e.unwrap().path()).collect();
        entries.sort();
        for p in entries {
            if p.is_dir() {
                walk(base, &p, out);
            } else {
                let rel = p.strip_prefix(base).unwrap().display().to_string();
                out.insert(rel, std::fs::read(&p).unwrap());
            }
        }
    }
    let mut out = BTreeMap::new();
    walk(root, root, &mut out);
    out
}

/// `None` when both trees hold the same files with the same bytes.
pub fn tree_difference(a: &Path, b: &Path) -> Option<String> {
    let (ta, tb) = (read_tree(a), read_tree(b));
    if ta.keys().ne(tb.keys()) {
        return Some(format!("file sets differ: {:?} vs {:?}", ta.keys().collect::<Vec<_>>(), tb.keys().collect::<Vec<_>>()));
    }
    ta.iter()
        .find(|(k, v)| tb[*k] != **v)
        .map(|(k, _)| format!("{k} differs"))
}
