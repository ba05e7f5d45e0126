use crate::error::{Error, Result};
use crate::geometry::Vec3;
use crate::scan::ProjectedScan;
use crate::thermal::{WallCloud, WallPoint};

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ExtrusionConfig {
    /// Scanner height above the floor (m).
    pub sensor_height: f64,
    /// Wall top above the floor (m).
    pub floor_height: f64,
    pub vertical_step: f64,
}

impl ExtrusionConfig {
    pub const DEFAULT_STEP: f64 = 0.1;

    pub fn new(sensor_height: f64, floor_height: f64, vertical_step: f64) -> Result<Self> {
        let ok = sensor_height > 0.0
            && sensor_height < floor_height
            && vertical_step > 0.0
            && vertical_step <= floor_height
            && floor_height.is_finite();
        if !ok {
            return Err(Error::InvalidArgument(format!(
                "extrusion config requires 0 < sensor_height < floor_height and 0 < step <= floor_height \
                 (got {sensor_height}, {floor_height}, {vertical_step})"
            )));
        }
        Ok(ExtrusionConfig {
            sensor_height,
            floor_height,
            vertical_step,
        })
    }

    /// `floor(floor_height / step) + 1`, tolerant of representation error in the ratio.
    pub fn level_count(&self) -> usize {
        (self.floor_height / self.vertical_step + 1e-9).floor() as usize + 1
    }

    /// Heights in the robot frame, from the floor upwards.
    pub fn levels(&self) -> Vec<f64> {
        (0..self.level_count())
            .map(|k| -self.sensor_height + k as f64 * self.vertical_step)
            .collect()
    }
}

/// Replicates every planar point along the vertical between floor and wall top.
pub fn extrude_walls(scan: &ProjectedScan, node_id: usize, cfg: &ExtrusionConfig) -> WallCloud {
    let levels = cfg.levels();
    let mut points = Vec::with_capacity(scan.len() * levels.len());
    for p in &scan.points_xy {
        for &z in &levels {
            points.push(WallPoint {
                position: Vec3::new(p.x, p.y, z),
                observation: None,
            });
        }
    }
    WallCloud { node_id, points }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::geometry::Vec2;
    use crate::sensor::Timestamp;

    #[test]
    fn level_formula() {
        let cfg = ExtrusionConfig::new(0.5, 3.0, 0.1).unwrap();
        assert_eq!(cfg.level_count(), 31);
        let levels = cfg.levels();
        assert_eq!(levels[0], -0.5);
        assert!((levels[30] - 2.5).abs() < 1e-12);
    }

    #[test]
    fn single_point_extrusion() {
        let cfg = ExtrusionConfig::new(0.5, 3.0, 0.1).unwrap();
        let scan = ProjectedScan::new(Timestamp(0), vec![Vec2::new(1.25, -0.75)]);
        let cloud = extrude_walls(&scan, 3, &cfg);
        assert_eq!(cloud.node_id, 3);
        assert_eq!(cloud.len(), cfg.level_count());
        assert!(cloud.points.iter().all(|p| p.position.x == 1.25 && p.position.y == -0.75));
        assert!(cloud.points.iter().all(|p| p.observation.is_none()));
        assert!((cloud.points.last().unwrap().position.z - 2.5).abs() < 1e-12);
    }

    #[test]
    fn step_equal_to_floor_height() {
        let cfg = ExtrusionConfig::new(0.5, 3.0, 3.0).unwrap();
        let scan = ProjectedScan::new(Timestamp(0), vec![Vec2::new(1.0, 0.0)]);
        let zs: Vec<f64> = extrude_walls(&scan, 0, &cfg).points.iter().map(|p| p.position.z).collect();
        assert_eq!(zs, vec![-0.5, 2.5]);
    }

    #[test]
    fn empty_scan_gives_empty_cloud() {
        let cfg = ExtrusionConfig::new(0.5, 3.0, 0.1).unwrap();
        let scan = ProjectedScan::new(Timestamp(0), vec![]);
        assert!(extrude_walls(&scan, 0, &cfg).is_empty());
    }

    #[test]
    fn config_validation() {
        assert!(ExtrusionConfig::new(3.0, 3.0, 0.1).is_err());
        assert!(ExtrusionConfig::new(0.5, 3.0, 0.0).is_err());
        assert!(ExtrusionConfig::new(0.5, 3.0, 3.5).is_err());
        assert!(ExtrusionConfig::new(0.0, 3.0, 0.1).is_err());
    }
}
