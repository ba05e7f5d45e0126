//! 2.5D thermal wall mapping for indoor construction sites.
//!
//! Planar range scans are projected onto the horizontal plane using the IMU
//! gravity estimate, chained by point-to-line scan matching, extruded into
//! vertical walls and colored from radiometric thermal frames. A pose graph
//! with thermal point pairs on loop closures refines the trajectory. The
//! [`monitor`] module compares maps across sessions and tracks concrete
//! maturity; [`sim`] generates sessions with exact ground truth.

pub mod cloud;
pub mod dataset;
pub mod error;
pub mod geometry;
pub mod graph;
pub mod io;
pub mod metrics;
pub mod monitor;
pub mod pipeline;
pub mod robust;
pub mod scan;
pub mod sensor;
pub mod sim;
pub mod spatial;
pub mod thermal;

pub use cloud::{ThermalPoint, ThermalPointCloud};
pub use dataset::{Calibration, GroundTruth, RawThermalFrame, SessionDataset};
pub use error::{Error, Result};
pub use geometry::{PlanarPose, RigidTransform3, Vec2, Vec3};
pub use graph::{PoseGraph, SolverWeights};
pub use pipeline::{build_map, MapOutput, PipelineConfig};
pub use robust::HuberLoss;
pub use sensor::{CameraIntrinsics, GravityVector, ImuSample, Scan2D, ThermalImage, Timestamp};
pub use thermal::{WallCloud, WallPoint};
