use crate::cloud::ThermalPointCloud;
use crate::error::{Error, Result};
use crate::geometry::RigidTransform3;
use crate::monitor::{accumulate_maturity, icp_align, IcpConfig, MaturityRecord};
use crate::spatial::KdTree;

#[derive(Debug, Clone)]
pub struct SeriesReport {
    /// One record per temperature-set point of the first map that found a
    /// partner in every later map.
    pub records: Vec<MaturityRecord>,
    /// Alignment of each map onto the first (identity for the first).
    pub alignments: Vec<RigidTransform3>,
    pub icp_rms: Vec<f64>,
    /// Temperature-set points of the first map.
    pub candidates: usize,
}

/// Tracks the points of the first map through a time-ordered series of maps.
/// `maps` holds `(time h, cloud)` pairs with strictly increasing times.
pub fn track_series(
    maps: &[(f64, ThermalPointCloud)],
    datum: f64,
    icp: &IcpConfig,
    radius: f64,
) -> Result<SeriesReport> {
    let Some((t0, first)) = maps.first() else {
        return Err(Error::InvalidArgument("maturity series is empty".into()));
    };
    if !datum.is_finite() || !(radius > 0.0) {
        return Err(Error::InvalidArgument(format!("invalid datum {datum} or radius {radius}")));
    }
    let reference = first.temperature_set();
    let mut temps: Vec<Option<Vec<(f64, f64)>>> = reference
        .points
        .iter()
        .map(|p| Some(vec![(*t0, p.temperature.expect("filtered"))]))
        .collect();
    let mut alignments = vec![RigidTransform3::identity()];
    let mut icp_rms = vec![0.0];
    let r2 = radius * radius;
    for (t, cloud) in &maps[1..] {
        let moving = cloud.temperature_set();
        let a = icp_align(&reference, &moving, &RigidTransform3::identity(), icp)?;
        let aligned = moving.transformed(&a.transform);
        let tree = KdTree::new(aligned.positions());
        for (p, track) in reference.points.iter().zip(temps.iter_mut()) {
            let q = p.position;
            let nn = tree.nearest(&[q.x, q.y, q.z]).expect("non-empty");
            match track {
                Some(s) if nn.dist_sq <= r2 => s.push((*t, aligned.points[nn.index].temperature.expect("filtered"))),
                _ => *track = None,
            }
        }
        alignments.push(a.transform);
        icp_rms.push(a.rms);
    }
    let mut records = Vec::new();
    for (p, track) in reference.points.iter().zip(temps) {
        if let Some(samples) = track {
            let mut r = MaturityRecord::new(p.position, datum);
            for s in samples {
                r = accumulate_maturity(&r, s)?;
            }
            records.push(r);
        }
    }
    Ok(SeriesReport {
        records,
        alignments,
        icp_rms,
        candidates: reference.len(),
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::cloud::ThermalPoint;
    use crate::geometry::Vec3;

    fn wall(offset_t: f64) -> ThermalPointCloud {
        let mut pts = Vec::new();
        for (a, b) in [((0.0, 0.0), (4.0, 0.0)), ((4.0, 0.0), (4.0, 3.0)), ((4.0, 3.0), (1.0, 3.0))] {
            for i in 0..=200 {
                let s = i as f64 / 200.0;
                for k in 0..3 {
                    pts.push(ThermalPoint {
                        position: Vec3::new(a.0 + s * (b.0 - a.0), a.1 + s * (b.1 - a.1), k as f64),
                        temperature: Some(10.0 + offset_t),
                    });
                }
            }
        }
        ThermalPointCloud::new(pts)
    }

    #[test]
    fn constant_temperature_series() {
        let maps = vec![(0.0, wall(0.0)), (5.0, wall(0.0)), (10.0, wall(0.0))];
        let r = track_series(&maps, -10.0, &IcpConfig::default(), 0.05).unwrap();
        assert_eq!(r.records.len(), r.candidates);
        assert!(r.records.iter().all(|m| (m.maturity - 200.0).abs() < 1e-9));
        assert_eq!(r.alignments.len(), 3);
    }

    #[test]
    fn displaced_session_is_realigned() {
        let moved = wall(10.0).transformed(&RigidTransform3::from_xyz_yaw(0.1, -0.05, 0.0, 0.02));
        let maps = vec![(0.0, wall(0.0)), (2.0, moved)];
        let r = track_series(&maps, -10.0, &IcpConfig::default(), 0.05).unwrap();
        assert_eq!(r.records.len(), r.candidates);
        // mean of 10 and 20, above −10, for 2 h
        assert!(r.records.iter().all(|m| (m.maturity - 50.0).abs() < 1e-6));
    }

    #[test]
    fn empty_series_rejected() {
        assert!(track_series(&[], -10.0, &IcpConfig::default(), 0.05).is_err());
    }
}
