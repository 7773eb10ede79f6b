//! Kinematics of a single leg of the parallel mechanism.
//!
//! Each leg is a chain of four revolute joints. The base-to-leg rotation
//! `η` distributes the three legs at 120° around the wrist axis `x_b`.
//! Rows of the chain, `(q, d, a, α)` per link:
//!
//! | link    | q    | d   | a | α       |
//! |---------|------|-----|---|---------|
//! | b → 0   | 0    | 0   | 0 | η       |
//! | 0 → 1   | q1   | 0   | 0 | π/2     |
//! | 1 → 2   | q2   | d   | 0 | −α      |
//! | 2 → 3   | q3   | −d  | 0 | π/2     |
//! | 3 → e   | q4   | 0   | 0 | π − η   |

use std::f64::consts::{FRAC_PI_2, FRAC_PI_4, PI};

use nalgebra::{Matrix3, Vector3};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::geometry::{dh_transform, MinPose, Pose, Transform};

/// Characteristic link length, mm.
pub const LINK_LENGTH: f64 = 49.0;
/// Angular deviation of the middle links, rad.
pub const LINK_TWIST: f64 = FRAC_PI_4;

/// Acos arguments in `(1, 1 + ACOS_CLAMP]` are treated as roundoff.
const ACOS_CLAMP: f64 = 1e-9;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum Leg {
    A,
    B,
    C,
}

impl Leg {
    pub const ALL: [Leg; 3] = [Leg::A, Leg::B, Leg::C];

    pub fn eta(self) -> f64 {
        match self {
            Leg::A => 0.0,
            Leg::B => 2.0 * PI / 3.0,
            Leg::C => 4.0 * PI / 3.0,
        }
    }

    pub fn index(self) -> usize {
        self as usize
    }
}

/// Geometry of one leg.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct LegParams {
    pub d: f64,
    pub alpha: f64,
    pub eta: f64,
}

impl LegParams {
    pub fn new(d: f64, alpha: f64, eta: f64) -> Result<Self> {
        if !(d > 0.0) || !(alpha > 0.0 && alpha < FRAC_PI_2) {
            return Err(Error::InvalidParameter(format!(
                "leg needs d > 0 and 0 < alpha < pi/2 (d = {d}, alpha = {alpha})"
            )));
        }
        Ok(Self { d, alpha, eta })
    }

    pub fn for_leg(leg: Leg) -> Self {
        Self { d: LINK_LENGTH, alpha: LINK_TWIST, eta: leg.eta() }
    }

    /// Distance between the base centre and the coupler centre.
    pub fn coupler_distance(&self) -> f64 {
        self.d * (2.0 * (1.0 - self.alpha.cos())).sqrt()
    }
}

/// Distance between base and coupler centres for the nominal geometry.
pub fn coupler_distance() -> f64 {
    LegParams::for_leg(Leg::A).coupler_distance()
}

#[derive(Debug, Clone, Copy, PartialEq, Default, Serialize, Deserialize)]
pub struct LegJointState {
    pub q1: f64,
    pub q2: f64,
    pub q3: f64,
    pub q4: f64,
}

impl LegJointState {
    /// Completes a state from the two independent joints using the mounting
    /// constraints `q3 = q2 + π`, `q4 = −q1`.
    pub fn from_independent(q1: f64, q2: f64) -> Self {
        Self { q1, q2, q3: q2 + PI, q4: -q1 }
    }

    pub fn as_array(&self) -> [f64; 4] {
        [self.q1, self.q2, self.q3, self.q4]
    }

    pub fn from_array(q: [f64; 4]) -> Self {
        Self { q1: q[0], q2: q[1], q3: q[2], q4: q[3] }
    }

    /// Largest violation of the mounting constraints.
    pub fn constraint_violation(&self) -> f64 {
        (self.q3 - self.q2 - PI).abs().max((self.q4 + self.q1).abs())
    }
}

/// Frames `T_b^0, T_b^1, T_b^2, T_b^3, T_b^e` of a leg.
pub fn leg_frames(q: &LegJointState, leg: &LegParams) -> [Transform; 5] {
    let rows = [
        (q.q1, 0.0, FRAC_PI_2),
        (q.q2, leg.d, -leg.alpha),
        (q.q3, -leg.d, FRAC_PI_2),
        (q.q4, 0.0, PI - leg.eta),
    ];
    let mut frames = [Transform::identity(); 5];
    frames[0] = dh_transform(0.0, 0.0, 0.0, leg.eta);
    for (i, (qi, di, ai)) in rows.into_iter().enumerate() {
        frames[i + 1] = frames[i] * dh_transform(qi, di, 0.0, ai);
    }
    frames
}

/// Coupler frame from the joint angles of one leg.
pub fn leg_fk(q: &LegJointState, leg: &LegParams) -> Transform {
    leg_frames(q, leg)[4]
}

/// Closed-form inverse kinematics from the coupler centre position.
///
/// Uses the `q2 ≤ 0` assembly branch. `q1` is recovered with both its sine
/// and cosine numerators so that the full angle range is resolved.
pub fn leg_ik_from_position(p: &Vector3<f64>, leg: &LegParams) -> Result<LegJointState> {
    let (sa, ca) = leg.alpha.sin_cos();
    let (se, ce) = leg.eta.sin_cos();
    let arg = (p.y * se - p.z * ce) / (leg.d * sa);
    let arg = if arg.abs() <= 1.0 {
        arg
    } else if arg.abs() <= 1.0 + ACOS_CLAMP {
        arg.signum()
    } else {
        return Err(Error::OutOfWorkspace(format!(
            "acos argument {arg} outside [-1, 1] for leg at eta = {:.4}",
            leg.eta
        )));
    };
    let q2 = -arg.acos();
    let s2 = q2.sin();
    let w = p.y * ce + p.z * se;
    let q1 = (p.x * (1.0 - ca) + w * sa * s2).atan2(sa * s2 * p.x - (1.0 - ca) * w);
    Ok(LegJointState::from_independent(q1, q2))
}

/// Inverse kinematics of one leg for a posture given in minimum parametrization.
pub fn leg_ik(u: &MinPose, leg: &LegParams) -> Result<LegJointState> {
    let pose = coupler_pose_from_minpose(u)?;
    leg_ik_from_position(&pose.position(), leg)
}

/// Rotation of the coupler for a posture. The mechanism keeps the coupler
/// rotation axis orthogonal to `x_b`, which fixes `α_x`.
pub fn coupler_rotation(u: &MinPose) -> Matrix3<f64> {
    let pose = Pose {
        alpha_x: constrained_alpha_x(u),
        alpha_y: u.alpha_y,
        alpha_z: u.alpha_z,
        ..Pose::default()
    };
    *crate::geometry::pose_to_transform(&pose).rotation()
}

/// `α_x` implied by `(α_y, α_z)`.
pub fn constrained_alpha_x(u: &MinPose) -> f64 {
    (u.alpha_z.sin() * u.alpha_y.sin()).atan2(u.alpha_y.cos() + u.alpha_z.cos())
}

/// Full coupler pose for a posture.
///
/// The coupler centre lies on the sphere of radius `L` along the bisector of
/// `x̂_b` and the rotated coupler axis `R x̂_b`, the same point the double
/// universal-joint chain reaches with paired tilt angles.
pub fn coupler_pose_from_minpose(u: &MinPose) -> Result<Pose> {
    if !(u.alpha_y.cos() + u.alpha_z.cos() > 0.0) {
        return Err(Error::OutOfWorkspace(format!(
            "posture ({}, {}) folds the coupler past the base plane",
            u.alpha_y, u.alpha_z
        )));
    }
    let alpha_x = constrained_alpha_x(u);
    let r = coupler_rotation(u);
    let bisector = Vector3::x() + r.column(0);
    let n = bisector.norm();
    if n < 1e-9 {
        return Err(Error::OutOfWorkspace("coupler axis reversed".into()));
    }
    let p = bisector * (coupler_distance() / n);
    Ok(Pose { alpha_x, alpha_y: u.alpha_y, alpha_z: u.alpha_z, x_e: p.x, y_e: p.y, z_e: p.z })
}
