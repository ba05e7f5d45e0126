//! Robust point-to-line ICP between two projected scans.
//!
//! Each outer iteration re-associates every moving point with its nearest
//! reference point and takes one Levenberg–Marquardt step on the robust cost.
//! A step is kept only if the freshly re-associated cost does not increase,
//! so the cost sequence over accepted iterations is monotone.

use nalgebra::{Matrix2x3, Matrix3, Vector3};

use crate::geometry::{PlanarPose, Vec2};
use crate::robust::HuberLoss;
use crate::scan::gravity::ProjectedScan;
use crate::spatial::KdTree;

#[derive(Debug, Clone)]
pub struct MatcherConfig {
    pub max_iterations: usize,
    /// Correspondences further apart than this are rejected (m).
    pub distance_gate: f64,
    /// Maximum angle between reference and moving normals (rad).
    pub normal_angle_gate: f64,
    pub loss: HuberLoss,
    pub min_inliers: usize,
    /// Convergence threshold on the norm of the pose update.
    pub update_tolerance: f64,
    /// Half-width of the index window used to fit local lines.
    pub normal_half_window: usize,
    /// Consecutive points further apart than
    /// `normal_max_gap + normal_gap_ratio · range` break a line window.
    pub normal_max_gap: f64,
    pub normal_gap_ratio: f64,
    /// Largest accepted ratio of minor to major eigenvalue of a line fit.
    pub normal_max_flatness: f64,
    pub initial_damping: f64,
}

impl Default for MatcherConfig {
    fn default() -> Self {
        MatcherConfig {
            max_iterations: 50,
            distance_gate: 0.5,
            normal_angle_gate: 45f64.to_radians(),
            loss: HuberLoss::geometric(),
            min_inliers: 20,
            update_tolerance: 1e-6,
            normal_half_window: 2,
            normal_max_gap: 0.1,
            normal_gap_ratio: 0.1,
            normal_max_flatness: 0.1,
            initial_damping: 1e-4,
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct MatchResult {
    /// Pose of the moving scan in the reference frame.
    pub relative_pose: PlanarPose,
    /// Robust cost at the returned pose; unmatched points contribute the gate cost.
    pub final_cost: f64,
    /// RMS residual over inlier correspondences (m).
    pub rms_residual: f64,
    pub inlier_count: usize,
    pub iterations: usize,
    pub converged: bool,
}

/// Unit normals from a line fit over neighboring points in beam order. A point
/// tries a centered, a left and a right window and keeps the flattest one, so
/// points at a corner pick up the normal of one of the two walls.
pub fn estimate_normals(scan: &ProjectedScan, cfg: &MatcherConfig) -> Vec<Option<Vec2>> {
    let n = scan.len();
    let k = cfg.normal_half_window.max(1);
    let pts = &scan.points_xy;
    // contiguous[i]: points i and i+1 belong to the same surface run.
    let contiguous: Vec<bool> = (0..n.saturating_sub(1))
        .map(|i| {
            let range = pts[i].norm().min(pts[i + 1].norm());
            (pts[i + 1] - pts[i]).norm() <= cfg.normal_max_gap + cfg.normal_gap_ratio * range
        })
        .collect();
    let run_ok = |lo: usize, hi: usize| (lo..hi).all(|i| contiguous[i]);

    (0..n)
        .map(|i| {
            let mut best: Option<(f64, Vec2)> = None;
            let windows = [
                (i.checked_sub(k), i + k),
                (i.checked_sub(2 * k), i),
                (Some(i), i + 2 * k),
            ];
            for (lo, hi) in windows {
                let Some(lo) = lo else { continue };
                if hi >= n || !run_ok(lo, hi) {
                    continue;
                }
                if let Some((flat, normal)) = fit_line(&pts[lo..=hi]) {
                    if flat <= cfg.normal_max_flatness && best.is_none_or(|(b, _)| flat < b) {
                        best = Some((flat, normal));
                    }
                }
            }
            best.map(|(_, nrm)| nrm)
        })
        .collect()
}

/// Returns `(λ_min / λ_max, normal)` of the scatter of `pts`.
fn fit_line(pts: &[Vec2]) -> Option<(f64, Vec2)> {
    let m = pts.len() as f64;
    let mean = pts.iter().fold(Vec2::zeros(), |a, p| a + p) / m;
    let (mut a, mut b, mut c) = (0.0, 0.0, 0.0);
    for p in pts {
        let d = p - mean;
        a += d.x * d.x;
        b += d.x * d.y;
        c += d.y * d.y;
    }
    let half_tr = 0.5 * (a + c);
    let disc = (0.25 * (a - c) * (a - c) + b * b).sqrt();
    let major = half_tr + disc;
    let minor = (half_tr - disc).max(0.0);
    if !(major > 0.0) {
        return None;
    }
    let phi = 0.5 * (2.0 * b).atan2(a - c);
    Some((minor / major, Vec2::new(-phi.sin(), phi.cos())))
}

#[derive(Debug, Clone, Copy)]
enum Residual {
    Line { value: f64, jac: Vector3<f64> },
    Point { value: Vec2, jac: Matrix2x3<f64> },
}

impl Residual {
    fn norm(&self) -> f64 {
        match self {
            Residual::Line { value, .. } => value.abs(),
            Residual::Point { value, .. } => value.norm(),
        }
    }
}

struct Evaluation {
    cost: f64,
    residuals: Vec<Residual>,
}

struct Problem<'a> {
    reference: &'a ProjectedScan,
    moving: &'a ProjectedScan,
    ref_normals: Vec<Option<Vec2>>,
    mov_normals: Vec<Option<Vec2>>,
    tree: KdTree<2>,
    cfg: &'a MatcherConfig,
    outlier_cost: f64,
    min_cos: f64,
}

impl<'a> Problem<'a> {
    fn new(reference: &'a ProjectedScan, moving: &'a ProjectedScan, cfg: &'a MatcherConfig) -> Self {
        let tree = KdTree::new(reference.points_xy.iter().map(|p| [p.x, p.y]).collect());
        Problem {
            ref_normals: estimate_normals(reference, cfg),
            mov_normals: estimate_normals(moving, cfg),
            reference,
            moving,
            tree,
            cfg,
            outlier_cost: cfg.loss.value(cfg.distance_gate),
            min_cos: cfg.normal_angle_gate.cos(),
        }
    }

    fn evaluate(&self, pose: &PlanarPose) -> Evaluation {
        let rot = pose.rotation();
        let t = pose.translation();
        let gate_sq = self.cfg.distance_gate * self.cfg.distance_gate;
        let mut cost = 0.0;
        let mut residuals = Vec::with_capacity(self.moving.len());
        for (k, p) in self.moving.points_xy.iter().enumerate() {
            let rp = rot * p;
            let q_mov = rp + t;
            let nn = self
                .tree
                .nearest(&[q_mov.x, q_mov.y])
                .expect("reference scan is non-empty");
            if nn.dist_sq > gate_sq {
                cost += self.outlier_cost;
                continue;
            }
            let q = self.reference.points_xy[nn.index];
            // d(R p)/dθ
            let drp = Vec2::new(-rp.y, rp.x);
            let residual = match (self.ref_normals[nn.index], self.mov_normals[k]) {
                (Some(n_ref), Some(n_mov)) => {
                    if (n_ref.dot(&(rot * n_mov))).abs() < self.min_cos {
                        cost += self.outlier_cost;
                        continue;
                    }
                    Residual::Line {
                        value: n_ref.dot(&(q_mov - q)),
                        jac: Vector3::new(n_ref.x, n_ref.y, n_ref.dot(&drp)),
                    }
                }
                _ => Residual::Point {
                    value: q_mov - q,
                    jac: Matrix2x3::new(1.0, 0.0, drp.x, 0.0, 1.0, drp.y),
                },
            };
            cost += self.cfg.loss.value(residual.norm());
            residuals.push(residual);
        }
        Evaluation { cost, residuals }
    }

    fn normal_equations(&self, eval: &Evaluation) -> (Matrix3<f64>, Vector3<f64>) {
        let mut h = Matrix3::zeros();
        let mut g = Vector3::zeros();
        for r in &eval.residuals {
            let w = self.cfg.loss.weight(r.norm());
            match r {
                Residual::Line { value, jac } => {
                    h += w * jac * jac.transpose();
                    g += w * jac * *value;
                }
                Residual::Point { value, jac } => {
                    h += w * jac.transpose() * jac;
                    g += w * jac.transpose() * value;
                }
            }
        }
        (h, g)
    }
}

fn rms(residuals: &[Residual]) -> f64 {
    if residuals.is_empty() {
        return f64::INFINITY;
    }
    let s: f64 = residuals.iter().map(|r| r.norm().powi(2)).sum();
    (s / residuals.len() as f64).sqrt()
}

/// Estimates the pose of `moving` in the frame of `reference`.
pub fn match_scans(
    reference: &ProjectedScan,
    moving: &ProjectedScan,
    initial_guess: &PlanarPose,
    cfg: &MatcherConfig,
) -> MatchResult {
    let not_converged = |pose: PlanarPose| MatchResult {
        relative_pose: pose,
        final_cost: f64::INFINITY,
        rms_residual: f64::INFINITY,
        inlier_count: 0,
        iterations: 0,
        converged: false,
    };
    if reference.is_empty() || moving.is_empty() || !initial_guess.is_finite() {
        return not_converged(*initial_guess);
    }

    let problem = Problem::new(reference, moving, cfg);
    let mut pose = *initial_guess;
    let mut eval = problem.evaluate(&pose);
    let mut lambda = cfg.initial_damping;
    let mut converged = false;
    let mut decreased = false;
    let mut iterations = 0;

    'outer: for _ in 0..cfg.max_iterations {
        iterations += 1;
        let (h, g) = problem.normal_equations(&eval);
        loop {
            let mut damped = h;
            for d in 0..3 {
                damped[(d, d)] += lambda * h[(d, d)] + 1e-12;
            }
            let Some(step) = damped.cholesky().map(|c| c.solve(&(-g))) else {
                break 'outer;
            };
            let step_norm = step.norm();
            if !step_norm.is_finite() {
                break 'outer;
            }
            let candidate = PlanarPose::new(pose.x + step.x, pose.y + step.y, pose.theta_z + step.z);
            let cand_eval = problem.evaluate(&candidate);
            if cand_eval.cost <= eval.cost {
                if cand_eval.cost < eval.cost {
                    decreased = true;
                }
                pose = candidate;
                eval = cand_eval;
                lambda = (lambda / 10.0).max(1e-12);
                if step_norm < cfg.update_tolerance {
                    converged = true;
                    break 'outer;
                }
                continue 'outer;
            }
            lambda *= 10.0;
            if step_norm < cfg.update_tolerance || lambda > 1e12 {
                // No descent available at this resolution: stationary point.
                converged = true;
                break 'outer;
            }
        }
    }
    if !converged && iterations >= cfg.max_iterations && decreased {
        converged = true;
    }

    let inlier_count = eval.residuals.len();
    MatchResult {
        relative_pose: pose,
        final_cost: eval.cost,
        rms_residual: rms(&eval.residuals),
        inlier_count,
        iterations,
        converged: converged && inlier_count >= cfg.min_inliers,
    }
}

/// Robust cost of `moving` against `reference` at a fixed pose.
pub fn matching_cost(
    reference: &ProjectedScan,
    moving: &ProjectedScan,
    pose: &PlanarPose,
    cfg: &MatcherConfig,
) -> f64 {
    Problem::new(reference, moving, cfg).evaluate(pose).cost
}
