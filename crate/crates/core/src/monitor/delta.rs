use crate::cloud::ThermalPointCloud;
use crate::error::Result;
use crate::geometry::{RigidTransform3, Vec3};
use crate::monitor::{icp_align, IcpConfig};
use crate::spatial::KdTree;

/// Default correspondence radius between sessions (m).
pub const MATCH_RADIUS: f64 = 0.05;

#[derive(Debug, Clone, PartialEq)]
pub struct DeltaReport {
    pub matched_pairs: usize,
    /// Mean of `per_point` temperature differences (moving − reference), °C.
    pub mean_dt: f64,
    pub per_point: Vec<(Vec3, f64)>,
    pub alignment: RigidTransform3,
    pub rms_nn_distance: f64,
    /// Set when no reference point found a partner.
    pub empty_warning: bool,
}

/// Per-reference-point temperature change against the nearest aligned moving
/// point within `radius`. Points without a temperature are ignored.
pub fn temperature_delta(
    reference: &ThermalPointCloud,
    aligned_moving: &ThermalPointCloud,
    radius: f64,
) -> DeltaReport {
    let reference = reference.temperature_set();
    let moving = aligned_moving.temperature_set();
    let mut per_point = Vec::new();
    let mut sum_sq = 0.0;
    if !moving.is_empty() {
        let tree = KdTree::new(moving.positions());
        let r2 = radius * radius;
        for p in &reference.points {
            let q = p.position;
            let nn = tree.nearest(&[q.x, q.y, q.z]).expect("non-empty");
            if nn.dist_sq <= r2 {
                let t_mov = moving.points[nn.index].temperature.expect("filtered");
                let t_ref = p.temperature.expect("filtered");
                per_point.push((q, t_mov - t_ref));
                sum_sq += nn.dist_sq;
            }
        }
    }
    let n = per_point.len();
    DeltaReport {
        matched_pairs: n,
        mean_dt: if n == 0 {
            0.0
        } else {
            per_point.iter().map(|(_, d)| d).sum::<f64>() / n as f64
        },
        per_point,
        alignment: RigidTransform3::identity(),
        rms_nn_distance: if n == 0 { 0.0 } else { (sum_sq / n as f64).sqrt() },
        empty_warning: n == 0,
    }
}

/// Aligns `moving` onto `reference` with ICP and reports per-point deltas.
pub fn compare_maps(
    reference: &ThermalPointCloud,
    moving: &ThermalPointCloud,
    initial: &RigidTransform3,
    icp: &IcpConfig,
    radius: f64,
) -> Result<DeltaReport> {
    let reference = reference.temperature_set();
    let moving = moving.temperature_set();
    let alignment = icp_align(&reference, &moving, initial, icp)?;
    let aligned = moving.transformed(&alignment.transform);
    let mut report = temperature_delta(&reference, &aligned, radius);
    report.alignment = alignment.transform;
    report.rms_nn_distance = alignment.rms;
    Ok(report)
}
