//! Rigid-transform algebra, the Euler pose parametrization and the
//! Denavit-Hartenberg elementary transform.
//!
//! Units are millimetres and radians throughout.

use std::ops::Mul;

use nalgebra::{Matrix3, Matrix4, Vector3};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Absolute tolerance on `‖rᵀr − I‖` accepted by [`Transform::new`].
pub const ORTHONORMAL_TOL: f64 = 1e-10;

/// Below this value of `T32² + T33²` the Euler extraction is at gimbal lock.
pub const GIMBAL_LOCK_TOL: f64 = 1e-12;

/// Homogeneous rigid transform, stored as rotation plus translation.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Transform {
    r: Matrix3<f64>,
    p: Vector3<f64>,
}

impl Transform {
    /// Builds a transform, rejecting rotations that are not proper and
    /// orthonormal to [`ORTHONORMAL_TOL`]. No re-orthonormalization is done.
    pub fn new(r: Matrix3<f64>, p: Vector3<f64>) -> Result<Self> {
        let t = Self { r, p };
        let err = t.orthonormality_error();
        if !(err < ORTHONORMAL_TOL) || r.determinant() < 0.0 {
            return Err(Error::InvalidParameter(format!(
                "rotation is not orthonormal (error {err:e}, det {:.3})",
                r.determinant()
            )));
        }
        Ok(t)
    }

    pub(crate) fn from_parts(r: Matrix3<f64>, p: Vector3<f64>) -> Self {
        Self { r, p }
    }

    pub fn identity() -> Self {
        Self::from_parts(Matrix3::identity(), Vector3::zeros())
    }

    pub fn from_translation(p: Vector3<f64>) -> Self {
        Self::from_parts(Matrix3::identity(), p)
    }

    pub fn rot_x(angle: f64) -> Self {
        let (s, c) = angle.sin_cos();
        Self::from_parts(Matrix3::new(1.0, 0.0, 0.0, 0.0, c, -s, 0.0, s, c), Vector3::zeros())
    }

    pub fn rot_y(angle: f64) -> Self {
        let (s, c) = angle.sin_cos();
        Self::from_parts(Matrix3::new(c, 0.0, s, 0.0, 1.0, 0.0, -s, 0.0, c), Vector3::zeros())
    }

    pub fn rot_z(angle: f64) -> Self {
        let (s, c) = angle.sin_cos();
        Self::from_parts(Matrix3::new(c, -s, 0.0, s, c, 0.0, 0.0, 0.0, 1.0), Vector3::zeros())
    }

    pub fn trans_x(d: f64) -> Self {
        Self::from_translation(Vector3::new(d, 0.0, 0.0))
    }

    pub fn trans_y(d: f64) -> Self {
        Self::from_translation(Vector3::new(0.0, d, 0.0))
    }

    pub fn trans_z(d: f64) -> Self {
        Self::from_translation(Vector3::new(0.0, 0.0, d))
    }

    pub fn rotation(&self) -> &Matrix3<f64> {
        &self.r
    }

    pub fn translation(&self) -> &Vector3<f64> {
        &self.p
    }

    /// Entry of the 4×4 homogeneous matrix, 1-based like the usual `T_{i,j}`.
    pub fn entry(&self, row: usize, col: usize) -> f64 {
        self.to_matrix()[(row - 1, col - 1)]
    }

    pub fn to_matrix(&self) -> Matrix4<f64> {
        let mut m = Matrix4::identity();
        m.fixed_view_mut::<3, 3>(0, 0).copy_from(&self.r);
        m.fixed_view_mut::<3, 1>(0, 3).copy_from(&self.p);
        m
    }

    pub fn inverse(&self) -> Self {
        let rt = self.r.transpose();
        Self::from_parts(rt, -(rt * self.p))
    }

    pub fn transform_point(&self, x: &Vector3<f64>) -> Vector3<f64> {
        self.r * x + self.p
    }

    /// Frobenius norm of `rᵀr − I`.
    pub fn orthonormality_error(&self) -> f64 {
        (self.r.transpose() * self.r - Matrix3::identity()).norm()
    }

    /// Largest absolute entry difference between two transforms.
    pub fn max_abs_diff(&self, other: &Transform) -> f64 {
        (self.to_matrix() - other.to_matrix()).amax()
    }
}

impl Mul for Transform {
    type Output = Transform;

    fn mul(self, rhs: Transform) -> Transform {
        Transform::from_parts(self.r * rhs.r, self.r * rhs.p + self.p)
    }
}

impl Mul<&Transform> for &Transform {
    type Output = Transform;

    fn mul(self, rhs: &Transform) -> Transform {
        *self * *rhs
    }
}

/// Coupler pose: ZYX Euler angles and the position of the coupler centre.
#[derive(Debug, Clone, Copy, PartialEq, Default, Serialize, Deserialize)]
pub struct Pose {
    pub alpha_x: f64,
    pub alpha_y: f64,
    pub alpha_z: f64,
    pub x_e: f64,
    pub y_e: f64,
    pub z_e: f64,
}

impl Pose {
    pub fn position(&self) -> Vector3<f64> {
        Vector3::new(self.x_e, self.y_e, self.z_e)
    }

    pub fn min_pose(&self) -> MinPose {
        MinPose::new(self.alpha_y, self.alpha_z)
    }
}

/// Minimum parametrization of the 2-DoF parallel mechanism:
/// ulnar/radial deviation `alpha_y` and flexion/extension `alpha_z`.
#[derive(Debug, Clone, Copy, PartialEq, Default, Serialize, Deserialize)]
pub struct MinPose {
    pub alpha_y: f64,
    pub alpha_z: f64,
}

impl MinPose {
    pub const NEUTRAL: MinPose = MinPose { alpha_y: 0.0, alpha_z: 0.0 };

    pub const fn new(alpha_y: f64, alpha_z: f64) -> Self {
        Self { alpha_y, alpha_z }
    }

    pub fn norm(&self) -> f64 {
        self.alpha_y.hypot(self.alpha_z)
    }

    pub fn distance(&self, other: &MinPose) -> f64 {
        (self.alpha_y - other.alpha_y).hypot(self.alpha_z - other.alpha_z)
    }

    pub fn within(&self, bound: f64) -> bool {
        self.alpha_y.abs() <= bound && self.alpha_z.abs() <= bound
    }
}

/// `T_Rz(q) · T_Tz(d) · T_Rx(alpha) · T_Tx(a)`.
pub fn dh_transform(q: f64, d: f64, a: f64, alpha: f64) -> Transform {
    let (sq, cq) = q.sin_cos();
    let (sa, ca) = alpha.sin_cos();
    Transform::from_parts(
        Matrix3::new(cq, -sq * ca, sq * sa, sq, cq * ca, -cq * sa, 0.0, sa, ca),
        Vector3::new(a * cq, a * sq, d),
    )
}

/// Homogeneous matrix of a pose: translation, then `Rz(α_z) Ry(α_y) Rx(α_x)`.
pub fn pose_to_transform(x: &Pose) -> Transform {
    let (sx, cx) = x.alpha_x.sin_cos();
    let (sy, cy) = x.alpha_y.sin_cos();
    let (sz, cz) = x.alpha_z.sin_cos();
    let r = Matrix3::new(
        cz * cy,
        cz * sx * sy - sz * cx,
        cz * sy * cx + sz * sx,
        sz * cy,
        sz * sx * sy + cz * cx,
        sz * sy * cx - cz * sx,
        -sy,
        sx * cy,
        cx * cy,
    );
    Transform::from_parts(r, x.position())
}

/// Extracts the pose from a transform on the `|α_y| < π/2` branch.
pub fn transform_to_pose(t: &Transform) -> Result<Pose> {
    let r = t.rotation();
    let (t31, t32, t33) = (r[(2, 0)], r[(2, 1)], r[(2, 2)]);
    let lock = t32 * t32 + t33 * t33;
    if lock < GIMBAL_LOCK_TOL {
        return Err(Error::GimbalLock(lock));
    }
    let p = t.translation();
    Ok(Pose {
        alpha_x: t32.atan2(t33),
        alpha_y: (-t31).atan2(lock.sqrt()),
        alpha_z: r[(1, 0)].atan2(r[(0, 0)]),
        x_e: p.x,
        y_e: p.y,
        z_e: p.z,
    })
}

pub fn skew(v: &Vector3<f64>) -> Matrix3<f64> {
    Matrix3::new(0.0, -v.z, v.y, v.z, 0.0, -v.x, -v.y, v.x, 0.0)
}

/// Wraps an angle to `(-π, π]`.
pub fn wrap_angle(a: f64) -> f64 {
    use std::f64::consts::{PI, TAU};
    let w = (a + PI).rem_euclid(TAU) - PI;
    if w <= -PI {
        w + TAU
    } else {
        w
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use std::f64::consts::{FRAC_PI_2, FRAC_PI_4, PI};

    fn close(a: &Transform, b: &Transform, tol: f64) -> bool {
        a.max_abs_diff(b) <= tol
    }

    #[test]
    fn dh_zero_is_identity() {
        assert!(close(&dh_transform(0.0, 0.0, 0.0, 0.0), &Transform::identity(), 0.0));
    }

    #[test]
    fn dh_quarter_turn_maps_x_to_y() {
        let t = dh_transform(FRAC_PI_2, 0.0, 0.0, 0.0);
        let x = t.rotation() * Vector3::x();
        assert!((x - Vector3::y()).norm() < 1e-15);
    }

    #[test]
    fn dh_matches_factor_product() {
        // independent per-factor composition
        let expected = Transform::rot_z(0.3)
            * Transform::trans_z(49.0)
            * Transform::rot_x(-FRAC_PI_4)
            * Transform::trans_x(0.0);
        let t = dh_transform(0.3, 49.0, 0.0, -FRAC_PI_4);
        assert!(close(&t, &expected, 1e-13));

        let expected = Transform::rot_z(-1.1)
            * Transform::trans_z(3.0)
            * Transform::rot_x(0.7)
            * Transform::trans_x(12.5);
        assert!(close(&dh_transform(-1.1, 3.0, 12.5, 0.7), &expected, 1e-13));
    }

    #[test]
    fn zero_pose_is_identity() {
        assert!(close(&pose_to_transform(&Pose::default()), &Transform::identity(), 0.0));
    }

    #[test]
    fn single_z_angle_pose() {
        let t = pose_to_transform(&Pose { alpha_z: FRAC_PI_2, ..Pose::default() });
        let r = t.rotation();
        // c_z = 0, s_z = 1 in the first column and second column
        assert!((r[(0, 0)]).abs() < 1e-15 && (r[(1, 0)] - 1.0).abs() < 1e-15);
        assert!((r[(0, 1)] + 1.0).abs() < 1e-15 && (r[(1, 1)]).abs() < 1e-15);
        assert!((r[(2, 2)] - 1.0).abs() < 1e-15);
    }

    #[test]
    fn pose_matches_factor_product() {
        let x = Pose { alpha_x: 0.4, alpha_y: -0.8, alpha_z: 2.1, x_e: 3.0, y_e: -7.0, z_e: 11.0 };
        let expected = Transform::trans_z(x.z_e)
            * Transform::trans_y(x.y_e)
            * Transform::trans_x(x.x_e)
            * Transform::rot_z(x.alpha_z)
            * Transform::rot_y(x.alpha_y)
            * Transform::rot_x(x.alpha_x);
        assert!(close(&pose_to_transform(&x), &expected, 1e-14));
    }

    #[test]
    fn identity_extracts_zero_pose() {
        let p = transform_to_pose(&Transform::identity()).unwrap();
        assert_eq!(p, Pose::default());
    }

    #[test]
    fn gimbal_lock_is_reported() {
        let t = Transform::rot_y(FRAC_PI_2);
        assert!(matches!(transform_to_pose(&t), Err(Error::GimbalLock(_))));
    }

    #[test]
    fn new_rejects_non_orthonormal() {
        let mut r = Matrix3::identity();
        r[(0, 1)] = 1e-6;
        assert!(Transform::new(r, Vector3::zeros()).is_err());
        let flip = Matrix3::from_diagonal(&Vector3::new(1.0, 1.0, -1.0));
        assert!(Transform::new(flip, Vector3::zeros()).is_err());
        assert!(Transform::new(*Transform::rot_z(0.2).rotation(), Vector3::zeros()).is_ok());
    }

    #[test]
    fn inverse_composes_to_identity() {
        let t = dh_transform(0.3, 4.0, 2.0, -1.2) * Transform::trans_y(5.0);
        assert!(close(&(t * t.inverse()), &Transform::identity(), 1e-13));
    }

    #[test]
    fn wrap_angle_range() {
        assert!((wrap_angle(3.0 * PI) - PI).abs() < 1e-12);
        assert!((wrap_angle(-PI) - PI).abs() < 1e-12);
        assert!((wrap_angle(0.5) - 0.5).abs() < 1e-15);
    }
}
