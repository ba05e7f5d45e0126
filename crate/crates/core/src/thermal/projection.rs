use crate::error::{Error, Result};
use crate::geometry::RigidTransform3;
use crate::sensor::{CameraIntrinsics, ThermalImage};
use crate::thermal::{Observation, WallCloud};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum Sampling {
    #[default]
    Bilinear,
    Nearest,
}

/// Colors wall points from one thermal frame.
///
/// `camera_pose` maps cloud coordinates into the camera frame (z forward). A
/// point is colored when it lies in front of the camera and projects inside
/// the image; a previously colored point is only overwritten by a frame that
/// sees it from closer.
pub fn project_to_thermal(
    cloud: &WallCloud,
    camera_pose: &RigidTransform3,
    intrinsics: &CameraIntrinsics,
    image: &ThermalImage,
    sampling: Sampling,
) -> Result<WallCloud> {
    if image.width != intrinsics.width || image.height != intrinsics.height {
        return Err(Error::InvalidArgument(format!(
            "thermal frame is {}x{} but intrinsics describe {}x{}",
            image.width, image.height, intrinsics.width, intrinsics.height
        )));
    }
    let mut out = cloud.clone();
    for point in out.points.iter_mut() {
        let pc = camera_pose.apply(&point.position);
        let Some((u, v)) = intrinsics.project(&pc) else {
            continue;
        };
        let sample = match sampling {
            Sampling::Bilinear => image.sample_bilinear(u, v),
            Sampling::Nearest => image.sample_nearest(u, v),
        };
        let Some(temperature) = sample else { continue };
        let distance = pc.norm();
        if point.observation.is_none_or(|o| distance < o.distance) {
            point.observation = Some(Observation {
                temperature,
                distance,
            });
        }
    }
    Ok(out)
}
