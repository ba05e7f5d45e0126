//! Scan front-end: gravity association, projection onto the horizontal plane,
//! and scan-to-scan matching into an odometry chain.

pub mod gravity;
mod matcher;
pub mod odometry;

pub use gravity::{
    associate_gravity, associate_gravity_within, gravity_at, gravity_project, leveling_rotation,
    plane_coordinates, project_point,
    GravityAssociation, ProjectedScan,
};
pub use matcher::{estimate_normals, match_scans, matching_cost, MatchResult, MatcherConfig};
pub use odometry::{build_odometry_chain, OdometryChain};
