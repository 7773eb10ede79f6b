//! Forward kinematics of the parallel mechanism from the sensed first joints.
//!
//! Only `q1` of each leg carries an encoder. Legs A and B fix the posture in
//! closed form; leg C is redundant and serves as a consistency check.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::geometry::{transform_to_pose, wrap_angle, MinPose, Pose};
use crate::leg::{leg_fk, leg_ik, Leg, LegJointState, LegParams};

/// Slack on the discriminant before a pair of readings is declared impossible.
pub const DISCRIMINANT_TOL: f64 = 1e-12;

/// Readings of the three first-joint encoders.
#[derive(Debug, Clone, Copy, PartialEq, Default, Serialize, Deserialize)]
pub struct SensedJoints {
    pub q_a1: f64,
    pub q_b1: f64,
    pub q_c1: f64,
}

impl SensedJoints {
    pub fn new(q_a1: f64, q_b1: f64, q_c1: f64) -> Self {
        Self { q_a1: wrap_angle(q_a1), q_b1: wrap_angle(q_b1), q_c1: wrap_angle(q_c1) }
    }

    pub fn as_array(&self) -> [f64; 3] {
        [self.q_a1, self.q_b1, self.q_c1]
    }
}

/// Joint state of all three legs together with the coupler pose.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct MechanismState {
    pub legs: [LegJointState; 3],
    pub pose: Pose,
}

impl MechanismState {
    /// Solves the inverse kinematics of every leg for a posture.
    pub fn from_minpose(u: &MinPose) -> Result<Self> {
        let pose = crate::leg::coupler_pose_from_minpose(u)?;
        let mut legs = [LegJointState::default(); 3];
        for leg in Leg::ALL {
            legs[leg.index()] = leg_ik(u, &LegParams::for_leg(leg))?;
        }
        Ok(Self { legs, pose })
    }

    pub fn first_joints(&self) -> [f64; 3] {
        [self.legs[0].q1, self.legs[1].q1, self.legs[2].q1]
    }

    pub fn sensed(&self) -> SensedJoints {
        SensedJoints::new(self.legs[0].q1, self.legs[1].q1, self.legs[2].q1)
    }

    /// Largest disagreement between the legs' coupler frames.
    pub fn leg_disagreement(&self) -> f64 {
        let t: Vec<_> =
            Leg::ALL.iter().map(|&l| leg_fk(&self.legs[l.index()], &LegParams::for_leg(l))).collect();
        t[0].max_abs_diff(&t[1]).max(t[0].max_abs_diff(&t[2]))
    }
}

/// Coefficients `(A, B, C)` of `A sin q_B2 + B cos q_B2 = C`, obtained by
/// equating the coupler positions of legs A and B.
fn qb2_coefficients(q_a1: f64, q_b1: f64) -> (f64, f64, f64) {
    let leg = LegParams::for_leg(Leg::B);
    let (sa, ca) = leg.alpha.sin_cos();
    let (se, ce) = leg.eta.sin_cos();
    let (sa1, ca1) = q_a1.sin_cos();
    let (sb1, cb1) = q_b1.sin_cos();
    let t5 = ce * ca1 * sb1 - cb1 * sa1;
    let a = -sa * t5;
    let b = -sa * ca1 * se;
    let c = (1.0 - ca) * (1.0 - sa1 * sb1 - ce * ca1 * cb1);
    (a, b, c)
}

/// `A² + B² − C²`; negative when no `q_B2` matches the two readings.
pub fn qb2_discriminant(q_a1: f64, q_b1: f64) -> f64 {
    let (a, b, c) = qb2_coefficients(q_a1, q_b1);
    a * a + b * b - c * c
}

/// Second joint of leg B from the first joints of legs A and B.
pub fn solve_qb2(q_a1: f64, q_b1: f64) -> Result<f64> {
    let (a, b, c) = qb2_coefficients(q_a1, q_b1);
    let h = a * a + b * b - c * c;
    if h < -DISCRIMINANT_TOL {
        return Err(Error::InconsistentEncoders(h));
    }
    let r = h.max(0.0).sqrt();
    Ok((a * c - b * r).atan2(b * c + a * r))
}

/// Coupler pose from the encoder readings, using the leg pair (A, B).
pub fn posture_from_encoders(s: &SensedJoints) -> Result<Pose> {
    let q_b2 = solve_qb2(s.q_a1, s.q_b1)?;
    let q = LegJointState::from_independent(s.q_b1, q_b2);
    transform_to_pose(&leg_fk(&q, &LegParams::for_leg(Leg::B)))
}

/// Difference between the sensed `q_C1` and the value implied by `pose`.
pub fn leg_c_residual(s: &SensedJoints, pose: &Pose) -> Result<f64> {
    let q = crate::leg::leg_ik_from_position(&pose.position(), &LegParams::for_leg(Leg::C))?;
    Ok(wrap_angle(q.q1 - s.q_c1))
}

/// Full mechanism state from the encoders, with the leg-C residual.
pub fn reconstruct(s: &SensedJoints) -> Result<(MechanismState, f64)> {
    let pose = posture_from_encoders(s)?;
    let mut legs = [LegJointState::default(); 3];
    for leg in Leg::ALL {
        legs[leg.index()] =
            crate::leg::leg_ik_from_position(&pose.position(), &LegParams::for_leg(leg))?;
    }
    let residual = wrap_angle(legs[2].q1 - s.q_c1);
    Ok((MechanismState { legs, pose }, residual))
}

#[cfg(test)]
mod tests {
    use super::*;

    fn encoders(u: MinPose) -> (MechanismState, SensedJoints) {
        let m = MechanismState::from_minpose(&u).unwrap();
        (m, m.sensed())
    }

    #[test]
    fn neutral_qb2_matches_ik() {
        let (m, s) = encoders(MinPose::NEUTRAL);
        assert!((s.q_a1 - s.q_b1).abs() < 1e-15);
        let q = solve_qb2(s.q_a1, s.q_b1).unwrap();
        assert!((q - m.legs[1].q2).abs() < 1e-12);
    }

    #[test]
    fn neutral_encoders_give_neutral_posture() {
        let (_, s) = encoders(MinPose::NEUTRAL);
        let p = posture_from_encoders(&s).unwrap();
        assert!(p.alpha_y.abs() < 1e-12 && p.alpha_z.abs() < 1e-12);
    }

    #[test]
    fn recovers_posture_and_leg_c() {
        let (_, s) = encoders(MinPose::new(0.3, -0.5));
        let (m, res) = reconstruct(&s).unwrap();
        assert!((m.pose.alpha_y - 0.3).abs() < 1e-9);
        assert!((m.pose.alpha_z + 0.5).abs() < 1e-9);
        assert!(res.abs() < 1e-9);
        assert!(m.leg_disagreement() < 1e-9);
    }

    #[test]
    fn impossible_pair_is_rejected() {
        // Scan first-joint pairs for one whose discriminant is clearly negative.
        let mut found = None;
        'outer: for i in 0..64 {
            for j in 0..64 {
                let a = -3.1 + 6.2 * i as f64 / 63.0;
                let b = -3.1 + 6.2 * j as f64 / 63.0;
                if qb2_discriminant(a, b) < -1e-3 {
                    found = Some((a, b));
                    break 'outer;
                }
            }
        }
        let (a, b) = found.expect("no inconsistent pair in scan");
        assert!(matches!(solve_qb2(a, b), Err(Error::InconsistentEncoders(_))));
    }
}
