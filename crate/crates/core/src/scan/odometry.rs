use crate::geometry::PlanarPose;
use crate::scan::gravity::ProjectedScan;
use crate::scan::matcher::{match_scans, MatchResult, MatcherConfig};

#[derive(Debug, Clone)]
pub struct OdometryChain {
    /// `(node id, pose in the frame of scan 0)`.
    pub poses: Vec<(usize, PlanarPose)>,
    /// `relative[k]` is the pose of scan `k + 1` in the frame of scan `k`.
    pub relative: Vec<PlanarPose>,
    pub matches: Vec<MatchResult>,
    /// Indices `k` of pairs `(k, k + 1)` whose match failed and fell back to the
    /// previous relative motion.
    pub fallbacks: Vec<usize>,
}

impl OdometryChain {
    pub fn pose_list(&self) -> Vec<PlanarPose> {
        self.poses.iter().map(|(_, p)| *p).collect()
    }
}

/// Chains consecutive scan matches into a trajectory anchored at scan 0.
///
/// Each match is seeded with the previous relative motion. A failed match
/// repeats that motion (constant velocity) and is recorded in `fallbacks`.
pub fn build_odometry_chain(scans: &[ProjectedScan], cfg: &MatcherConfig) -> OdometryChain {
    let mut chain = OdometryChain {
        poses: Vec::with_capacity(scans.len()),
        relative: Vec::new(),
        matches: Vec::new(),
        fallbacks: Vec::new(),
    };
    if scans.is_empty() {
        return chain;
    }
    chain.poses.push((0, PlanarPose::identity()));
    let mut last_motion = PlanarPose::identity();
    for k in 1..scans.len() {
        let result = match_scans(&scans[k - 1], &scans[k], &last_motion, cfg);
        let motion = if result.converged {
            result.relative_pose
        } else {
            chain.fallbacks.push(k - 1);
            last_motion
        };
        let prev = chain.poses[k - 1].1;
        chain.poses.push((k, prev.compose(&motion)));
        chain.relative.push(motion);
        chain.matches.push(result);
        last_motion = motion;
    }
    chain
}
