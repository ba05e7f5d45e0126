//! Residual blocks and their analytic Jacobians with respect to the planar
//! node states `(x, y, θ)`.

use nalgebra::{Matrix3, Vector3};

use crate::geometry::{normalize_angle, PlanarPose, Vec3};
use crate::graph::SolverWeights;

pub type Jacobian = Matrix3<f64>;

/// Whitened relative-pose error `(√w_t Δx, √w_t Δy, √w_r Δθ)` of
/// `(X_i⁻¹ X_j)⁻¹ ∘ Z`, plus its Jacobians with respect to `X_i` and `X_j`.
pub fn relative_pose_residual(
    xi: &PlanarPose,
    xj: &PlanarPose,
    measured: &PlanarPose,
    weights: &SolverWeights,
) -> (Vector3<f64>, Jacobian, Jacobian) {
    let (si, ci) = xi.theta_z.sin_cos();
    let (sj, cj) = xj.theta_z.sin_cos();
    // d = t_i + R_i t_z - t_j, expressed in frame j.
    let dx = xi.x + ci * measured.x - si * measured.y - xj.x;
    let dy = xi.y + si * measured.x + ci * measured.y - xj.y;
    let ex = cj * dx + sj * dy;
    let ey = -sj * dx + cj * dy;
    let eth = normalize_angle(xi.theta_z + measured.theta_z - xj.theta_z);

    // d/dθ_i of R_i t_z
    let rx = -si * measured.x - ci * measured.y;
    let ry = ci * measured.x - si * measured.y;

    let st = weights.translation_weight.sqrt();
    let sr = weights.rotation_weight.sqrt();

    let r = Vector3::new(st * ex, st * ey, sr * eth);
    let ji = Matrix3::new(
        st * cj,
        st * sj,
        st * (cj * rx + sj * ry),
        -st * sj,
        st * cj,
        st * (-sj * rx + cj * ry),
        0.0,
        0.0,
        sr,
    );
    let jj = Matrix3::new(
        -st * cj,
        -st * sj,
        st * ey,
        st * sj,
        -st * cj,
        -st * ex,
        0.0,
        0.0,
        -sr,
    );
    (r, ji, jj)
}

/// World-frame difference of a point pair: `(R_i p_i + t_i) − (R_j p_j + t_j)`.
/// Its norm equals `‖p_i − T_ij p_j‖` for `T_ij = X_i⁻¹ X_j`.
pub fn point_pair_residual(
    xi: &PlanarPose,
    xj: &PlanarPose,
    pi: &Vec3,
    pj: &Vec3,
) -> (Vector3<f64>, Jacobian, Jacobian) {
    let (si, ci) = xi.theta_z.sin_cos();
    let (sj, cj) = xj.theta_z.sin_cos();
    let wi = (ci * pi.x - si * pi.y, si * pi.x + ci * pi.y);
    let wj = (cj * pj.x - sj * pj.y, sj * pj.x + cj * pj.y);
    let r = Vector3::new(
        wi.0 + xi.x - wj.0 - xj.x,
        wi.1 + xi.y - wj.1 - xj.y,
        pi.z - pj.z,
    );
    let ji = Matrix3::new(1.0, 0.0, -wi.1, 0.0, 1.0, wi.0, 0.0, 0.0, 0.0);
    let jj = Matrix3::new(-1.0, 0.0, wj.1, 0.0, -1.0, -wj.0, 0.0, 0.0, 0.0);
    (r, ji, jj)
}

/// Whitened temperature difference `√w_T (T_i − T_j)`. Independent of the poses,
/// so both Jacobians are zero.
pub fn thermal_residual(ti: f64, tj: f64, weights: &SolverWeights) -> (f64, Vector3<f64>, Vector3<f64>) {
    (
        weights.thermal_weight.sqrt() * (ti - tj),
        Vector3::zeros(),
        Vector3::zeros(),
    )
}
