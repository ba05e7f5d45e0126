use crate::geometry::{planar_to_rigid3, PlanarPose};
use crate::spatial::KdTree;
use crate::thermal::WallCloud;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PairConfig {
    /// Mutual neighbors further apart than this are ignored (m).
    pub max_distance: f64,
    /// Upper bound on returned pairs; larger sets are subsampled uniformly.
    pub max_pairs: usize,
}

impl Default for PairConfig {
    fn default() -> Self {
        PairConfig {
            max_distance: 0.3,
            max_pairs: 500,
        }
    }
}

fn world_points(pose: &PlanarPose, cloud: &WallCloud) -> (Vec<usize>, Vec<[f64; 3]>) {
    let t = planar_to_rigid3(pose, 0.0);
    cloud
        .points
        .iter()
        .enumerate()
        .filter(|(_, p)| p.observation.is_some())
        .map(|(k, p)| {
            let w = t.apply(&p.position);
            (k, [w.x, w.y, w.z])
        })
        .unzip()
}

/// Mutual nearest neighbors between two temperature-set node clouds in the
/// world frame, within `max_distance`, ordered by the first index and capped
/// at `max_pairs` by taking evenly spaced entries.
pub fn select_point_pairs(
    node_i: (&PlanarPose, &WallCloud),
    node_j: (&PlanarPose, &WallCloud),
    cfg: &PairConfig,
) -> Vec<(usize, usize)> {
    let (idx_i, pts_i) = world_points(node_i.0, node_i.1);
    let (idx_j, pts_j) = world_points(node_j.0, node_j.1);
    if pts_i.is_empty() || pts_j.is_empty() {
        return Vec::new();
    }
    let tree_i = KdTree::new(pts_i.clone());
    let tree_j = KdTree::new(pts_j.clone());
    let max_sq = cfg.max_distance * cfg.max_distance;

    let mut pairs = Vec::new();
    for (a, p) in pts_i.iter().enumerate() {
        let nj = tree_j.nearest(p).expect("non-empty");
        if nj.dist_sq > max_sq {
            continue;
        }
        let back = tree_i.nearest(&pts_j[nj.index]).expect("non-empty");
        if back.index == a {
            pairs.push((idx_i[a], idx_j[nj.index]));
        }
    }
    if pairs.len() > cfg.max_pairs {
        let n = pairs.len();
        pairs = (0..cfg.max_pairs).map(|k| pairs[k * n / cfg.max_pairs]).collect();
    }
    pairs
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::geometry::Vec3;
    use crate::thermal::{Observation, WallPoint};

    fn cloud(n: usize) -> WallCloud {
        WallCloud {
            node_id: 0,
            points: (0..n)
                .map(|k| WallPoint {
                    position: Vec3::new(1.0 + 0.03 * k as f64, 0.5 * (k % 3) as f64, 0.1 * (k % 7) as f64),
                    observation: Some(Observation { temperature: 20.0, distance: 1.0 }),
                })
                .collect(),
        }
    }

    #[test]
    fn co_located_clouds_pair_with_themselves() {
        let c = cloud(200);
        let p = PlanarPose::new(0.5, -0.2, 0.3);
        let pairs = select_point_pairs((&p, &c), (&p, &c), &PairConfig::default());
        assert_eq!(pairs, (0..200).map(|k| (k, k)).collect::<Vec<_>>());
    }

    #[test]
    fn distant_clouds_have_no_pairs() {
        let c = cloud(50);
        let pairs = select_point_pairs(
            (&PlanarPose::identity(), &c),
            (&PlanarPose::new(10.0, 0.0, 0.0), &c),
            &PairConfig::default(),
        );
        assert!(pairs.is_empty());
    }

    #[test]
    fn unset_points_are_skipped_and_cap_applies() {
        let mut c = cloud(1500);
        c.points[0].observation = None;
        let p = PlanarPose::identity();
        let pairs = select_point_pairs((&p, &c), (&p, &c), &PairConfig::default());
        assert_eq!(pairs.len(), 500);
        assert!(pairs.iter().all(|&(i, j)| i == j && i != 0));
        assert!(pairs.windows(2).all(|w| w[0].0 < w[1].0));
    }
}
