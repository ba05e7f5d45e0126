//! Planar poses, rigid 3D transforms and the small amount of algebra between them.
//!
//! Frames are right-handed and z-up; gravity points roughly along −z. A
//! [`PlanarPose`] is the pose of a child frame expressed in a parent frame, so
//! `a.compose(&b)` chains "b in a's frame" onto `a`.

use std::f64::consts::PI;

use nalgebra::{Matrix2, Matrix3, Vector2, Vector3};

pub type Vec3 = Vector3<f64>;
pub type Vec2 = Vector2<f64>;

/// Wraps an angle into (−π, π]. Angles already in range are returned untouched.
pub fn normalize_angle(theta: f64) -> f64 {
    if theta > -PI && theta <= PI {
        return theta;
    }
    let wrapped = (theta + PI).rem_euclid(2.0 * PI) - PI;
    if wrapped <= -PI {
        wrapped + 2.0 * PI
    } else {
        wrapped
    }
}

pub fn rot2(theta: f64) -> Matrix2<f64> {
    let (s, c) = theta.sin_cos();
    Matrix2::new(c, -s, s, c)
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PlanarPose {
    pub x: f64,
    pub y: f64,
    pub theta_z: f64,
}

impl Default for PlanarPose {
    fn default() -> Self {
        Self::identity()
    }
}

impl PlanarPose {
    pub fn new(x: f64, y: f64, theta_z: f64) -> Self {
        PlanarPose {
            x,
            y,
            theta_z: normalize_angle(theta_z),
        }
    }

    pub const fn identity() -> Self {
        PlanarPose {
            x: 0.0,
            y: 0.0,
            theta_z: 0.0,
        }
    }

    pub fn translation(&self) -> Vec2 {
        Vec2::new(self.x, self.y)
    }

    pub fn rotation(&self) -> Matrix2<f64> {
        rot2(self.theta_z)
    }

    /// `self ∘ other`.
    pub fn compose(&self, other: &PlanarPose) -> PlanarPose {
        let (s, c) = self.theta_z.sin_cos();
        PlanarPose::new(
            self.x + c * other.x - s * other.y,
            self.y + s * other.x + c * other.y,
            self.theta_z + other.theta_z,
        )
    }

    pub fn inverse(&self) -> PlanarPose {
        let (s, c) = self.theta_z.sin_cos();
        PlanarPose::new(
            -(c * self.x + s * self.y),
            s * self.x - c * self.y,
            -self.theta_z,
        )
    }

    /// Pose of `other` expressed in the frame of `self`: `self⁻¹ ∘ other`.
    pub fn between(&self, other: &PlanarPose) -> PlanarPose {
        self.inverse().compose(other)
    }

    pub fn transform_point(&self, p: &Vec2) -> Vec2 {
        let (s, c) = self.theta_z.sin_cos();
        Vec2::new(
            self.x + c * p.x - s * p.y,
            self.y + s * p.x + c * p.y,
        )
    }

    pub fn is_finite(&self) -> bool {
        self.x.is_finite() && self.y.is_finite() && self.theta_z.is_finite()
    }

    /// Linear interpolation of translation and shortest-arc interpolation of heading.
    pub fn interpolate(&self, other: &PlanarPose, t: f64) -> PlanarPose {
        let dtheta = normalize_angle(other.theta_z - self.theta_z);
        PlanarPose::new(
            self.x + t * (other.x - self.x),
            self.y + t * (other.y - self.y),
            self.theta_z + t * dtheta,
        )
    }
}

/// A rigid transform `p ↦ rotation·p + translation`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct RigidTransform3 {
    pub rotation: Matrix3<f64>,
    pub translation: Vec3,
}

impl Default for RigidTransform3 {
    fn default() -> Self {
        Self::identity()
    }
}

impl RigidTransform3 {
    pub fn identity() -> Self {
        RigidTransform3 {
            rotation: Matrix3::identity(),
            translation: Vec3::zeros(),
        }
    }

    pub fn new(rotation: Matrix3<f64>, translation: Vec3) -> Self {
        RigidTransform3 {
            rotation,
            translation,
        }
    }

    pub fn from_translation(translation: Vec3) -> Self {
        RigidTransform3 {
            rotation: Matrix3::identity(),
            translation,
        }
    }

    pub fn rot_z(theta: f64) -> Matrix3<f64> {
        let (s, c) = theta.sin_cos();
        Matrix3::new(c, -s, 0.0, s, c, 0.0, 0.0, 0.0, 1.0)
    }

    pub fn rot_x(angle: f64) -> Matrix3<f64> {
        let (s, c) = angle.sin_cos();
        Matrix3::new(1.0, 0.0, 0.0, 0.0, c, -s, 0.0, s, c)
    }

    pub fn rot_y(angle: f64) -> Matrix3<f64> {
        let (s, c) = angle.sin_cos();
        Matrix3::new(c, 0.0, s, 0.0, 1.0, 0.0, -s, 0.0, c)
    }

    /// Rotation about z by `theta` combined with a translation.
    pub fn from_xyz_yaw(x: f64, y: f64, z: f64, theta: f64) -> Self {
        RigidTransform3 {
            rotation: Self::rot_z(theta),
            translation: Vec3::new(x, y, z),
        }
    }

    /// Builds a transform from 12 row-major values `r00 r01 r02 tx r10 … r22 tz`.
    pub fn from_row_major_12(v: &[f64; 12]) -> Self {
        RigidTransform3 {
            rotation: Matrix3::new(v[0], v[1], v[2], v[4], v[5], v[6], v[8], v[9], v[10]),
            translation: Vec3::new(v[3], v[7], v[11]),
        }
    }

    pub fn to_row_major_12(&self) -> [f64; 12] {
        let r = &self.rotation;
        let t = &self.translation;
        [
            r[(0, 0)],
            r[(0, 1)],
            r[(0, 2)],
            t.x,
            r[(1, 0)],
            r[(1, 1)],
            r[(1, 2)],
            t.y,
            r[(2, 0)],
            r[(2, 1)],
            r[(2, 2)],
            t.z,
        ]
    }

    pub fn apply(&self, p: &Vec3) -> Vec3 {
        self.rotation * p + self.translation
    }

    pub fn compose(&self, other: &RigidTransform3) -> RigidTransform3 {
        RigidTransform3 {
            rotation: self.rotation * other.rotation,
            translation: self.rotation * other.translation + self.translation,
        }
    }

    pub fn inverse(&self) -> RigidTransform3 {
        let rt = self.rotation.transpose();
        RigidTransform3 {
            rotation: rt,
            translation: -(rt * self.translation),
        }
    }

    /// Orthonormality and handedness check at the given tolerance.
    pub fn is_valid(&self, tol: f64) -> bool {
        let r = &self.rotation;
        let err = (r * r.transpose() - Matrix3::identity()).abs().max();
        err <= tol
            && (r.determinant() - 1.0).abs() <= tol
            && self.translation.iter().all(|v| v.is_finite())
    }

    /// Heading about world z and the planar translation; height is discarded.
    pub fn to_planar(&self) -> PlanarPose {
        let theta = self.rotation[(1, 0)].atan2(self.rotation[(0, 0)]);
        PlanarPose::new(self.translation.x, self.translation.y, theta)
    }

    /// Yaw angle, valid for transforms that only rotate about z.
    pub fn yaw(&self) -> f64 {
        self.rotation[(1, 0)].atan2(self.rotation[(0, 0)])
    }
}

/// Lifts a planar pose to 3D: rotation about world z, translation `(x, y, z)`.
pub fn planar_to_rigid3(p: &PlanarPose, z: f64) -> RigidTransform3 {
    RigidTransform3::from_xyz_yaw(p.x, p.y, z, p.theta_z)
}
