use std::collections::BTreeMap;

use crate::cloud::{ThermalPoint, ThermalPointCloud};
use crate::error::{Error, Result};
use crate::geometry::{planar_to_rigid3, PlanarPose, Vec3};
use crate::thermal::{ExtrusionConfig, WallCloud};

/// Transforms every node cloud into the world frame (floor at z = 0) and
/// concatenates them in node order. With `voxel_size`, the result is thinned
/// to one point per occupied voxel.
pub fn accumulate_map(
    clouds: &[WallCloud],
    poses: &[PlanarPose],
    cfg: &ExtrusionConfig,
    voxel_size: Option<f64>,
) -> Result<ThermalPointCloud> {
    if clouds.len() != poses.len() {
        return Err(Error::LengthMismatch {
            what: "clouds vs poses",
            left: clouds.len(),
            right: poses.len(),
        });
    }
    let total = clouds.iter().map(WallCloud::len).sum();
    let mut points = Vec::with_capacity(total);
    for (cloud, pose) in clouds.iter().zip(poses) {
        let t = planar_to_rigid3(pose, cfg.sensor_height);
        points.extend(cloud.points.iter().map(|p| ThermalPoint {
            position: t.apply(&p.position),
            temperature: p.temperature(),
        }));
    }
    let cloud = ThermalPointCloud::new(points);
    match voxel_size {
        Some(size) => voxel_thin(&cloud, size),
        None => Ok(cloud),
    }
}

/// One point per voxel: mean position, and mean of the temperatures that are set.
/// Output is ordered by voxel key.
pub fn voxel_thin(cloud: &ThermalPointCloud, size: f64) -> Result<ThermalPointCloud> {
    if !(size > 0.0 && size.is_finite()) {
        return Err(Error::InvalidArgument(format!("voxel size must be positive, got {size}")));
    }
    #[derive(Default)]
    struct Acc {
        sum: Vec3,
        count: usize,
        t_sum: f64,
        t_count: usize,
    }
    let mut voxels: BTreeMap<(i64, i64, i64), Acc> = BTreeMap::new();
    for p in &cloud.points {
        let key = (
            (p.position.x / size).floor() as i64,
            (p.position.y / size).floor() as i64,
            (p.position.z / size).floor() as i64,
        );
        let acc = voxels.entry(key).or_default();
        acc.sum += p.position;
        acc.count += 1;
        if let Some(t) = p.temperature {
            acc.t_sum += t;
            acc.t_count += 1;
        }
    }
    let points = voxels
        .into_values()
        .map(|a| ThermalPoint {
            position: a.sum / a.count as f64,
            temperature: (a.t_count > 0).then(|| a.t_sum / a.t_count as f64),
        })
        .collect();
    Ok(ThermalPointCloud {
        points,
        session_stamp: cloud.session_stamp,
    })
}
