//! Planar pose graph with relative-pose edges and thermal point-pair terms on
//! loop closures, refined by Levenberg–Marquardt.

mod loops;
mod pairs;
pub mod residuals;
mod solver;

pub use loops::{detect_loop_closures, LoopCandidate, LoopConfig, LoopDetection};
pub use pairs::{select_point_pairs, PairConfig};
pub use solver::{objective, optimize, refine, OptimizeReport, RobustLosses, SolverOptions};

use std::collections::{BTreeMap, VecDeque};

use crate::error::{Error, Result};
use crate::geometry::PlanarPose;
use crate::thermal::WallCloud;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SolverWeights {
    pub translation_weight: f64,
    pub rotation_weight: f64,
    pub thermal_weight: f64,
}

impl Default for SolverWeights {
    fn default() -> Self {
        SolverWeights {
            translation_weight: 5.0,
            rotation_weight: 400.0,
            thermal_weight: 1.0,
        }
    }
}

impl SolverWeights {
    pub fn new(translation_weight: f64, rotation_weight: f64, thermal_weight: f64) -> Result<Self> {
        if [translation_weight, rotation_weight, thermal_weight]
            .iter()
            .any(|w| !(w.is_finite() && *w >= 0.0))
        {
            return Err(Error::InvalidArgument("solver weights must be finite and non-negative".into()));
        }
        Ok(SolverWeights {
            translation_weight,
            rotation_weight,
            thermal_weight,
        })
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum EdgeKind {
    Odometry,
    LoopClosure,
}

#[derive(Debug, Clone, PartialEq)]
pub struct GraphEdge {
    pub from_id: usize,
    pub to_id: usize,
    /// Pose of `to_id` expressed in the frame of `from_id`.
    pub measured: PlanarPose,
    pub kind: EdgeKind,
    /// `(index into from cloud, index into to cloud)`.
    pub point_pairs: Vec<(usize, usize)>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct GraphNode {
    pub id: usize,
    pub pose: PlanarPose,
    pub cloud: WallCloud,
}

/// The first node is the gauge anchor and never moves.
#[derive(Debug, Clone, PartialEq, Default)]
pub struct PoseGraph {
    pub nodes: Vec<GraphNode>,
    pub edges: Vec<GraphEdge>,
}

impl PoseGraph {
    pub fn poses(&self) -> Vec<PlanarPose> {
        self.nodes.iter().map(|n| n.pose).collect()
    }

    /// Map from node id to position in `nodes`.
    pub(crate) fn index(&self) -> Result<BTreeMap<usize, usize>> {
        let mut map = BTreeMap::new();
        for (k, n) in self.nodes.iter().enumerate() {
            if map.insert(n.id, k).is_some() {
                return Err(Error::InvalidGraph(format!("duplicate node id {}", n.id)));
            }
        }
        Ok(map)
    }

    /// Checks edge references, pair indices and connectivity from the anchor.
    pub fn validate(&self) -> Result<BTreeMap<usize, usize>> {
        if self.nodes.is_empty() {
            return Err(Error::InvalidGraph("graph has no nodes".into()));
        }
        let index = self.index()?;
        let mut adjacency = vec![Vec::new(); self.nodes.len()];
        for e in &self.edges {
            if e.from_id == e.to_id {
                return Err(Error::InvalidGraph(format!("self edge on node {}", e.from_id)));
            }
            let (Some(&a), Some(&b)) = (index.get(&e.from_id), index.get(&e.to_id)) else {
                return Err(Error::InvalidGraph(format!(
                    "edge {} -> {} references a missing node",
                    e.from_id, e.to_id
                )));
            };
            let (na, nb) = (self.nodes[a].cloud.len(), self.nodes[b].cloud.len());
            if let Some(&(i, j)) = e.point_pairs.iter().find(|&&(i, j)| i >= na || j >= nb) {
                return Err(Error::InvalidGraph(format!(
                    "edge {} -> {} has out-of-range pair ({i}, {j})",
                    e.from_id, e.to_id
                )));
            }
            if !e.measured.is_finite() {
                return Err(Error::InvalidGraph(format!(
                    "edge {} -> {} has a non-finite measurement",
                    e.from_id, e.to_id
                )));
            }
            adjacency[a].push(b);
            adjacency[b].push(a);
        }
        let mut seen = vec![false; self.nodes.len()];
        let mut queue = VecDeque::from([0usize]);
        seen[0] = true;
        while let Some(k) = queue.pop_front() {
            for &m in &adjacency[k] {
                if !seen[m] {
                    seen[m] = true;
                    queue.push_back(m);
                }
            }
        }
        if let Some(k) = seen.iter().position(|s| !s) {
            return Err(Error::DisconnectedGraph(self.nodes[k].id));
        }
        Ok(index)
    }
}
