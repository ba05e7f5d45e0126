use crate::cloud::ThermalPointCloud;
use crate::error::{Error, Result};
use nalgebra::Matrix2;

use crate::geometry::{RigidTransform3, Vec2, Vec3};
use crate::spatial::KdTree;

#[derive(Debug, Clone)]
pub struct IcpConfig {
    pub max_iterations: usize,
    /// Alignment is rejected when the final RMS distance exceeds this (m).
    pub max_rms: f64,
    pub min_points: usize,
    /// Stop once an increment moves less than this (m and rad).
    pub tolerance: f64,
    /// Nearest neighbors further than this do not pull; they count at this
    /// distance in the RMS (m).
    pub max_correspondence_distance: f64,
    /// The first iterations pair each point with its foot on the local wall
    /// line, fitted over this many reference neighbors, so that clouds slide
    /// along walls instead of snapping to individual samples. Below 3 the
    /// stage is skipped.
    pub line_neighbors: usize,
}

impl Default for IcpConfig {
    fn default() -> Self {
        IcpConfig {
            max_iterations: 300,
            max_rms: 0.2,
            min_points: 100,
            tolerance: 1e-12,
            max_correspondence_distance: 2.0,
            line_neighbors: 10,
        }
    }
}

#[derive(Debug, Clone)]
pub struct IcpResult {
    /// Maps moving-cloud coordinates into the reference frame.
    pub transform: RigidTransform3,
    /// Final RMS nearest-neighbor distance, each distance capped at the
    /// correspondence limit (m).
    pub rms: f64,
    /// RMS after each accepted iteration; non-increasing.
    pub history: Vec<f64>,
    pub iterations: usize,
}

/// Closed-form x, y, z, yaw alignment of paired points (moving → reference).
fn solve_increment(moving: &[Vec3], reference: &[Vec3]) -> RigidTransform3 {
    let n = moving.len() as f64;
    let cm = moving.iter().fold(Vec3::zeros(), |a, p| a + p) / n;
    let cr = reference.iter().fold(Vec3::zeros(), |a, p| a + p) / n;
    let (mut dot, mut cross) = (0.0, 0.0);
    for (m, r) in moving.iter().zip(reference) {
        let a = m - cm;
        let b = r - cr;
        dot += a.x * b.x + a.y * b.y;
        cross += a.x * b.y - a.y * b.x;
    }
    let theta = cross.atan2(dot);
    let rot = RigidTransform3::rot_z(theta);
    RigidTransform3::new(rot, cr - rot * cm)
}

struct Pairing {
    rms: f64,
    moving: Vec<Vec3>,
    reference: Vec<Vec3>,
}

/// Horizontal wall direction at each reference point, `None` where the
/// neighborhood is not line-like.
fn wall_directions(tree: &KdTree<3>, k: usize) -> Vec<Option<Vec2>> {
    (0..tree.len())
        .map(|i| {
            let nn = tree.k_nearest(tree.point(i), k);
            let n = nn.len() as f64;
            let mean = nn.iter().fold(Vec2::zeros(), |a, m| {
                let p = tree.point(m.index);
                a + Vec2::new(p[0], p[1])
            }) / n;
            let mut cov = Matrix2::zeros();
            for m in &nn {
                let p = tree.point(m.index);
                let d = Vec2::new(p[0], p[1]) - mean;
                cov += d * d.transpose();
            }
            let eig = cov.symmetric_eigen();
            let (major, minor) = if eig.eigenvalues[0] >= eig.eigenvalues[1] { (0, 1) } else { (1, 0) };
            let (hi, lo) = (eig.eigenvalues[major], eig.eigenvalues[minor]);
            (hi > 1e-12 && lo < 0.01 * hi).then(|| eig.eigenvectors.column(major).into_owned())
        })
        .collect()
}

fn pair_points(
    tree: &KdTree<3>,
    src: &[Vec3],
    transform: &RigidTransform3,
    gate_sq: f64,
    lines: Option<&[Option<Vec2>]>,
) -> Pairing {
    let mut sum_sq = 0.0;
    let mut moving = Vec::with_capacity(src.len());
    let mut reference = Vec::with_capacity(src.len());
    for p in src {
        let q = transform.apply(p);
        let nn = tree.nearest(&[q.x, q.y, q.z]).expect("non-empty");
        if nn.dist_sq > gate_sq {
            sum_sq += gate_sq;
            continue;
        }
        sum_sq += nn.dist_sq;
        let r = tree.point(nn.index);
        let mut target = Vec3::new(r[0], r[1], r[2]);
        if let Some(Some(dir)) = lines.map(|l| l[nn.index]) {
            let along = dir.dot(&Vec2::new(q.x - r[0], q.y - r[1]));
            target.x += along * dir.x;
            target.y += along * dir.y;
        }
        moving.push(q);
        reference.push(target);
    }
    Pairing {
        rms: (sum_sq / src.len() as f64).sqrt(),
        moving,
        reference,
    }
}

/// Point-to-point ICP restricted to translation and rotation about z.
///
/// A step that would raise the RMS by more than rounding is undone, so the history never increases.
pub fn icp_align(
    reference: &ThermalPointCloud,
    moving: &ThermalPointCloud,
    initial: &RigidTransform3,
    cfg: &IcpConfig,
) -> Result<IcpResult> {
    if reference.len() < cfg.min_points || moving.len() < cfg.min_points {
        return Err(Error::InvalidArgument(format!(
            "icp needs at least {} points per cloud (got {} and {})",
            cfg.min_points,
            reference.len(),
            moving.len()
        )));
    }
    let tree = KdTree::new(reference.positions());
    let src: Vec<Vec3> = moving.points.iter().map(|p| p.position).collect();
    let gate_sq = cfg.max_correspondence_distance.powi(2);

    let mut transform = *initial;
    let mut previous = transform;
    let lines = (cfg.line_neighbors >= 3).then(|| wall_directions(&tree, cfg.line_neighbors));
    let mut smoothed = lines.is_some();
    let mut history: Vec<f64> = Vec::new();
    let mut iterations = 0;
    loop {
        let pairing = pair_points(&tree, &src, &transform, gate_sq, lines.as_deref().filter(|_| smoothed));
        if history.last().is_some_and(|&last| pairing.rms > last + 1e-12) {
            transform = previous;
            if smoothed {
                smoothed = false;
                continue;
            }
            break;
        }
        history.push(pairing.rms);
        if iterations >= cfg.max_iterations || pairing.moving.len() < 3 {
            break;
        }
        iterations += 1;
        let inc = solve_increment(&pairing.moving, &pairing.reference);
        previous = transform;
        transform = inc.compose(&transform);
        if inc.translation.norm() < cfg.tolerance && inc.yaw().abs() < cfg.tolerance {
            if smoothed {
                smoothed = false;
            } else {
                break;
            }
        }
    }
    let rms = *history.last().expect("at least one evaluation");
    if !(rms <= cfg.max_rms) {
        return Err(Error::AlignmentFailed {
            rms,
            limit: cfg.max_rms,
        });
    }
    Ok(IcpResult {
        transform,
        rms,
        history,
        iterations,
    })
}
