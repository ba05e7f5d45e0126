//! Vertical wall extrusion and thermal colorization of per-node wall clouds.

mod accumulate;
mod extrude;
mod projection;

pub use accumulate::{accumulate_map, voxel_thin};
pub use extrude::{extrude_walls, ExtrusionConfig};
pub use projection::{project_to_thermal, Sampling};

use crate::geometry::Vec3;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Observation {
    pub temperature: f64,
    /// Point-to-camera distance of the frame that produced `temperature` (m).
    pub distance: f64,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct WallPoint {
    /// Robot frame: origin at the scanner, z up, floor at `-sensor_height`.
    pub position: Vec3,
    pub observation: Option<Observation>,
}

impl WallPoint {
    pub fn temperature(&self) -> Option<f64> {
        self.observation.map(|o| o.temperature)
    }
}

#[derive(Debug, Clone, PartialEq, Default)]
pub struct WallCloud {
    pub node_id: usize,
    pub points: Vec<WallPoint>,
}

impl WallCloud {
    pub fn len(&self) -> usize {
        self.points.len()
    }

    pub fn is_empty(&self) -> bool {
        self.points.is_empty()
    }

    pub fn temperature_set_count(&self) -> usize {
        self.points.iter().filter(|p| p.observation.is_some()).count()
    }
}
