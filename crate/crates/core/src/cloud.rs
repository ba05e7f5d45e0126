use crate::geometry::{RigidTransform3, Vec3};

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ThermalPoint {
    pub position: Vec3,
    /// °C, carried in the intensity channel. `None` for points no frame observed.
    pub temperature: Option<f64>,
}

/// World-frame wall cloud with temperature as intensity.
#[derive(Debug, Clone, PartialEq, Default)]
pub struct ThermalPointCloud {
    pub points: Vec<ThermalPoint>,
    /// Wall-clock capture time, seconds since the Unix epoch.
    pub session_stamp: Option<f64>,
}

impl ThermalPointCloud {
    pub fn new(points: Vec<ThermalPoint>) -> Self {
        ThermalPointCloud {
            points,
            session_stamp: None,
        }
    }

    pub fn len(&self) -> usize {
        self.points.len()
    }

    pub fn is_empty(&self) -> bool {
        self.points.is_empty()
    }

    /// Keeps only points with a finite temperature.
    pub fn temperature_set(&self) -> ThermalPointCloud {
        ThermalPointCloud {
            points: self
                .points
                .iter()
                .filter(|p| p.temperature.is_some_and(f64::is_finite))
                .copied()
                .collect(),
            session_stamp: self.session_stamp,
        }
    }

    pub fn transformed(&self, t: &RigidTransform3) -> ThermalPointCloud {
        ThermalPointCloud {
            points: self
                .points
                .iter()
                .map(|p| ThermalPoint {
                    position: t.apply(&p.position),
                    temperature: p.temperature,
                })
                .collect(),
            session_stamp: self.session_stamp,
        }
    }

    pub fn positions(&self) -> Vec<[f64; 3]> {
        self.points
            .iter()
            .map(|p| [p.position.x, p.position.y, p.position.z])
            .collect()
    }
}
