use std::collections::BTreeMap;

use nalgebra::{DMatrix, DVector, Matrix3, Vector3};

use crate::error::Result;
use crate::geometry::PlanarPose;
use crate::graph::residuals::{point_pair_residual, relative_pose_residual, thermal_residual};
use crate::graph::{select_point_pairs, EdgeKind, PairConfig, PoseGraph, SolverWeights};
use crate::robust::HuberLoss;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct RobustLosses {
    /// Applied to relative-pose and point-pair blocks.
    pub geometric: HuberLoss,
    /// Applied to temperature-difference blocks.
    pub thermal: HuberLoss,
}

impl Default for RobustLosses {
    fn default() -> Self {
        RobustLosses {
            geometric: HuberLoss::geometric(),
            thermal: HuberLoss::thermal(),
        }
    }
}

#[derive(Debug, Clone)]
pub struct SolverOptions {
    pub max_iterations: usize,
    /// Stop once an accepted step lowers the objective by less than this fraction.
    pub relative_tolerance: f64,
    pub initial_damping: f64,
}

impl Default for SolverOptions {
    fn default() -> Self {
        SolverOptions {
            max_iterations: 100,
            relative_tolerance: 1e-8,
            initial_damping: 1e-4,
        }
    }
}

#[derive(Debug, Clone)]
pub struct OptimizeReport {
    pub graph: PoseGraph,
    pub initial_cost: f64,
    pub final_cost: f64,
    pub iterations: usize,
    pub converged: bool,
}

/// Resolved edge with positional node indices, so the inner loops never touch the id map.
struct Block<'a> {
    a: usize,
    b: usize,
    edge: &'a crate::graph::GraphEdge,
}

fn blocks<'a>(graph: &'a PoseGraph, index: &BTreeMap<usize, usize>) -> Vec<Block<'a>> {
    graph
        .edges
        .iter()
        .map(|edge| Block {
            a: index[&edge.from_id],
            b: index[&edge.to_id],
            edge,
        })
        .collect()
}

/// Robust weights of a whitened relative-pose residual. Translation and
/// rotation are separate blocks, each judged by its unwhitened magnitude
/// (m and rad) so the loss knot keeps its units.
fn pose_block_weights(r: &Vector3<f64>, weights: &SolverWeights, loss: &HuberLoss) -> Vector3<f64> {
    let wt = loss.weight(unwhiten(r.xy().norm(), weights.translation_weight));
    let wr = loss.weight(unwhiten(r.z.abs(), weights.rotation_weight));
    Vector3::new(wt, wt, wr)
}

fn pose_block_cost(r: &Vector3<f64>, weights: &SolverWeights, loss: &HuberLoss) -> f64 {
    let part = |n: f64, w: f64| if w > 0.0 { w * loss.value(unwhiten(n, w)) } else { 0.0 };
    part(r.xy().norm(), weights.translation_weight) + part(r.z.abs(), weights.rotation_weight)
}

fn unwhiten(n: f64, w: f64) -> f64 {
    if w > 0.0 {
        n / w.sqrt()
    } else {
        0.0
    }
}

fn cost_of(
    graph: &PoseGraph,
    blocks: &[Block<'_>],
    poses: &[PlanarPose],
    weights: &SolverWeights,
    losses: &RobustLosses,
) -> f64 {
    let mut cost = 0.0;
    for blk in blocks {
        let (xi, xj) = (&poses[blk.a], &poses[blk.b]);
        let (r, _, _) = relative_pose_residual(xi, xj, &blk.edge.measured, weights);
        cost += pose_block_cost(&r, weights, &losses.geometric);
        let (ci, cj) = (&graph.nodes[blk.a].cloud, &graph.nodes[blk.b].cloud);
        for &(i, j) in &blk.edge.point_pairs {
            let (pi, pj) = (&ci.points[i], &cj.points[j]);
            let (r, _, _) = point_pair_residual(xi, xj, &pi.position, &pj.position);
            cost += losses.geometric.value(r.norm());
            if let (Some(ti), Some(tj)) = (pi.temperature(), pj.temperature()) {
                let (rt, _, _) = thermal_residual(ti, tj, weights);
                cost += losses.thermal.value(rt);
            }
        }
    }
    cost
}

/// Total robust objective of the graph at its current poses.
pub fn objective(graph: &PoseGraph, weights: &SolverWeights, losses: &RobustLosses) -> Result<f64> {
    let index = graph.validate()?;
    let blocks = blocks(graph, &index);
    Ok(cost_of(graph, &blocks, &graph.poses(), weights, losses))
}

/// Gauss–Newton system over the free nodes (every node but the anchor), with
/// iteratively reweighted robust blocks.
fn normal_equations(
    graph: &PoseGraph,
    blocks: &[Block<'_>],
    poses: &[PlanarPose],
    weights: &SolverWeights,
    losses: &RobustLosses,
) -> (DMatrix<f64>, DVector<f64>) {
    let n = 3 * (poses.len() - 1);
    let mut h = DMatrix::zeros(n, n);
    let mut g = DVector::zeros(n);

    let mut add = |a: usize, b: usize, w: Vector3<f64>, r: &Vector3<f64>, ja: &Matrix3<f64>, jb: &Matrix3<f64>| {
        let parts = [(a, ja), (b, jb)];
        let wm = Matrix3::from_diagonal(&w);
        for &(p, jp) in &parts {
            if p == 0 {
                continue;
            }
            let op = 3 * (p - 1);
            let grad = jp.transpose() * w.component_mul(r);
            for k in 0..3 {
                g[op + k] += grad[k];
            }
            for &(q, jq) in &parts {
                if q == 0 {
                    continue;
                }
                let oq = 3 * (q - 1);
                let block = jp.transpose() * wm * jq;
                for r_ in 0..3 {
                    for c in 0..3 {
                        h[(op + r_, oq + c)] += block[(r_, c)];
                    }
                }
            }
        }
    };

    for blk in blocks {
        let (xi, xj) = (&poses[blk.a], &poses[blk.b]);
        let (r, ji, jj) = relative_pose_residual(xi, xj, &blk.edge.measured, weights);
        add(blk.a, blk.b, pose_block_weights(&r, weights, &losses.geometric), &r, &ji, &jj);
        let (ci, cj) = (&graph.nodes[blk.a].cloud, &graph.nodes[blk.b].cloud);
        for &(i, j) in &blk.edge.point_pairs {
            let (r, ji, jj) = point_pair_residual(xi, xj, &ci.points[i].position, &cj.points[j].position);
            add(blk.a, blk.b, Vector3::repeat(losses.geometric.weight(r.norm())), &r, &ji, &jj);
            // Thermal blocks have zero Jacobians and add nothing here.
        }
    }
    (h, g)
}

fn apply_step(poses: &[PlanarPose], step: &DVector<f64>) -> Vec<PlanarPose> {
    poses
        .iter()
        .enumerate()
        .map(|(k, p)| {
            if k == 0 {
                *p
            } else {
                let o = 3 * (k - 1);
                PlanarPose::new(p.x + step[o], p.y + step[o + 1], p.theta_z + step[o + 2])
            }
        })
        .collect()
}

/// Levenberg–Marquardt over all node poses except the anchor. Returns the best
/// iterate; `converged` is false when the iteration budget ran out first.
pub fn optimize(
    graph: &PoseGraph,
    weights: &SolverWeights,
    losses: &RobustLosses,
    options: &SolverOptions,
) -> Result<OptimizeReport> {
    let index = graph.validate()?;
    let blks = blocks(graph, &index);
    let mut poses = graph.poses();
    let initial_cost = cost_of(graph, &blks, &poses, weights, losses);
    let mut cost = initial_cost;
    let mut lambda = options.initial_damping;
    let mut converged = poses.len() == 1;
    let mut iterations = 0;

    while !converged && iterations < options.max_iterations {
        iterations += 1;
        let (h, g) = normal_equations(graph, &blks, &poses, weights, losses);
        let mut accepted = false;
        while lambda <= 1e12 {
            let mut damped = h.clone();
            for d in 0..damped.nrows() {
                damped[(d, d)] += lambda * h[(d, d)] + 1e-12;
            }
            let Some(chol) = damped.cholesky() else {
                lambda *= 10.0;
                continue;
            };
            let step = chol.solve(&(-&g));
            let candidate = apply_step(&poses, &step);
            let cand_cost = cost_of(graph, &blks, &candidate, weights, losses);
            if cand_cost <= cost {
                let decrease = cost - cand_cost;
                poses = candidate;
                lambda = (lambda / 10.0).max(1e-15);
                accepted = true;
                if decrease <= options.relative_tolerance * cost.max(f64::MIN_POSITIVE) {
                    converged = true;
                }
                cost = cand_cost;
                break;
            }
            lambda *= 10.0;
        }
        if !accepted {
            // No descent direction left at any damping: stationary point.
            converged = true;
        }
    }

    let mut out = graph.clone();
    for (node, pose) in out.nodes.iter_mut().zip(&poses).skip(1) {
        node.pose = *pose;
    }
    Ok(OptimizeReport {
        graph: out,
        initial_cost,
        final_cost: cost,
        iterations,
        converged,
    })
}

/// Alternates point-pair selection on loop-closure edges with optimization,
/// since the pairing depends on the current poses.
pub fn refine(
    graph: &PoseGraph,
    weights: &SolverWeights,
    losses: &RobustLosses,
    options: &SolverOptions,
    pairs: &PairConfig,
    rounds: usize,
) -> Result<OptimizeReport> {
    let index = graph.validate()?;
    let mut current = graph.clone();
    let mut report = None;
    for _ in 0..rounds.max(1) {
        for e in current.edges.iter_mut() {
            if e.kind != EdgeKind::LoopClosure {
                continue;
            }
            let (a, b) = (&current.nodes[index[&e.from_id]], &current.nodes[index[&e.to_id]]);
            e.point_pairs = select_point_pairs((&a.pose, &a.cloud), (&b.pose, &b.cloud), pairs);
        }
        let r = optimize(&current, weights, losses, options)?;
        let initial = report.as_ref().map_or(r.initial_cost, |p: &OptimizeReport| p.initial_cost);
        current = r.graph.clone();
        report = Some(OptimizeReport { initial_cost: initial, ..r });
    }
    Ok(report.expect("at least one round"))
}
