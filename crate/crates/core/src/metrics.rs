//! Trajectory error against ground truth.

use crate::error::{Error, Result};
use crate::geometry::{PlanarPose, Vec2};
use crate::sensor::Timestamp;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Alignment {
    /// Express both trajectories relative to their first pose.
    FirstPose,
    /// Best rigid 2D fit of the estimate onto the truth (least squares over positions).
    Rigid,
}

/// Pairs poses with identical stamps, in estimate order.
fn paired(
    estimate: &[(Timestamp, PlanarPose)],
    truth: &[(Timestamp, PlanarPose)],
) -> Result<Vec<(PlanarPose, PlanarPose)>> {
    let mut out = Vec::with_capacity(estimate.len());
    for (t, p) in estimate {
        let k = truth.partition_point(|(s, _)| s < t);
        match truth.get(k) {
            Some((s, q)) if s == t => out.push((*p, *q)),
            _ => {
                return Err(Error::InvalidArgument(format!(
                    "no ground-truth pose at stamp {}",
                    t.0
                )))
            }
        }
    }
    if out.is_empty() {
        return Err(Error::InvalidArgument("empty trajectory".into()));
    }
    Ok(out)
}

/// Rigid transform `T` minimizing Σ‖T·a_k − b_k‖².
pub fn fit_rigid_2d(a: &[Vec2], b: &[Vec2]) -> PlanarPose {
    let n = a.len().max(1) as f64;
    let ca = a.iter().sum::<Vec2>() / n;
    let cb = b.iter().sum::<Vec2>() / n;
    let (mut sxx, mut sxy) = (0.0, 0.0);
    for (p, q) in a.iter().zip(b) {
        let (p, q) = (p - ca, q - cb);
        sxx += p.dot(&q);
        sxy += p.x * q.y - p.y * q.x;
    }
    let theta = sxy.atan2(sxx);
    let r = crate::geometry::rot2(theta);
    let t = cb - r * ca;
    PlanarPose::new(t.x, t.y, theta)
}

/// RMS position error after alignment.
pub fn absolute_trajectory_error(
    estimate: &[(Timestamp, PlanarPose)],
    truth: &[(Timestamp, PlanarPose)],
    alignment: Alignment,
) -> Result<f64> {
    let pairs = paired(estimate, truth)?;
    let errors: Vec<f64> = match alignment {
        Alignment::FirstPose => {
            let (e0, t0) = (pairs[0].0.inverse(), pairs[0].1.inverse());
            pairs
                .iter()
                .map(|(e, t)| (e0.compose(e).translation() - t0.compose(t).translation()).norm())
                .collect()
        }
        Alignment::Rigid => {
            let a: Vec<Vec2> = pairs.iter().map(|(e, _)| e.translation()).collect();
            let b: Vec<Vec2> = pairs.iter().map(|(_, t)| t.translation()).collect();
            let fit = fit_rigid_2d(&a, &b);
            a.iter().zip(&b).map(|(p, q)| (fit.transform_point(p) - q).norm()).collect()
        }
    };
    Ok((errors.iter().map(|e| e * e).sum::<f64>() / errors.len() as f64).sqrt())
}

#[cfg(test)]
mod tests {
    use super::*;

    fn traj(poses: &[PlanarPose]) -> Vec<(Timestamp, PlanarPose)> {
        poses.iter().enumerate().map(|(k, p)| (Timestamp(k as u64), *p)).collect()
    }

    #[test]
    fn rigidly_moved_trajectory_has_zero_error() {
        let truth: Vec<_> = (0..20).map(|k| PlanarPose::new(k as f64 * 0.3, (k as f64).sin(), 0.1 * k as f64)).collect();
        let g = PlanarPose::new(2.0, -1.0, 0.7);
        let moved: Vec<_> = truth.iter().map(|p| g.compose(p)).collect();
        for a in [Alignment::FirstPose, Alignment::Rigid] {
            assert!(absolute_trajectory_error(&traj(&moved), &traj(&truth), a).unwrap() < 1e-12);
        }
    }

    #[test]
    fn constant_offset_error() {
        let truth: Vec<_> = (0..10).map(|k| PlanarPose::new(k as f64, 0.0, 0.0)).collect();
        let mut est = truth.clone();
        est[9].y = 1.0;
        let e = absolute_trajectory_error(&traj(&est), &traj(&truth), Alignment::FirstPose).unwrap();
        assert!((e - (0.1f64).sqrt()).abs() < 1e-12);
        assert!(absolute_trajectory_error(&traj(&est), &traj(&truth), Alignment::Rigid).unwrap() < e);
    }

    #[test]
    fn missing_stamp_is_an_error() {
        let a = traj(&[PlanarPose::identity()]);
        let b = vec![(Timestamp(5), PlanarPose::identity())];
        assert!(absolute_trajectory_error(&a, &b, Alignment::Rigid).is_err());
    }
}
