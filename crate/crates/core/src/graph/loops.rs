use crate::geometry::PlanarPose;
use crate::graph::{EdgeKind, GraphEdge};
use crate::scan::{match_scans, MatcherConfig, ProjectedScan};

#[derive(Debug, Clone)]
pub struct LoopConfig {
    /// Candidate pairs must be closer than this in the current estimate (m).
    pub max_distance: f64,
    /// Candidate pairs must be more than this many nodes apart.
    pub min_index_gap: usize,
    /// Largest accepted inlier RMS residual of the match (m).
    pub max_rms: f64,
    /// Smallest accepted fraction of moving points that found a correspondence.
    pub min_inlier_fraction: f64,
}

impl Default for LoopConfig {
    fn default() -> Self {
        LoopConfig {
            max_distance: 2.0,
            min_index_gap: 10,
            max_rms: 0.05,
            min_inlier_fraction: 0.5,
        }
    }
}

#[derive(Debug, Clone, Copy)]
pub struct LoopCandidate<'a> {
    pub id: usize,
    pub pose: PlanarPose,
    pub scan: &'a ProjectedScan,
}

#[derive(Debug, Clone, Default)]
pub struct LoopDetection {
    pub edges: Vec<GraphEdge>,
    /// Pairs that passed the proximity test.
    pub candidates: usize,
    /// Candidates whose match failed to converge or exceeded the gate.
    pub rejected: usize,
}

/// Matches every sufficiently separated, nearby node pair and keeps the
/// matches that pass the gate as loop-closure edges, in `(i, j)` order.
pub fn detect_loop_closures(
    nodes: &[LoopCandidate<'_>],
    cfg: &LoopConfig,
    matcher: &MatcherConfig,
) -> LoopDetection {
    let mut out = LoopDetection::default();
    for i in 0..nodes.len() {
        for j in (i + cfg.min_index_gap + 1)..nodes.len() {
            let (a, b) = (&nodes[i], &nodes[j]);
            let guess = a.pose.between(&b.pose);
            if guess.translation().norm() >= cfg.max_distance {
                continue;
            }
            out.candidates += 1;
            let m = match_scans(a.scan, b.scan, &guess, matcher);
            let fraction = m.inlier_count as f64 / b.scan.len().max(1) as f64;
            if m.converged && m.rms_residual <= cfg.max_rms && fraction >= cfg.min_inlier_fraction {
                out.edges.push(GraphEdge {
                    from_id: a.id,
                    to_id: b.id,
                    measured: m.relative_pose,
                    kind: EdgeKind::LoopClosure,
                    point_pairs: Vec::new(),
                });
            } else {
                out.rejected += 1;
            }
        }
    }
    out
}
