//! Pronation/supination chain: two universal joints in series joined by a
//! rigid link of length `L`.
//!
//! The chain shares its end frame with the parallel mechanism, so its four
//! angles follow from the coupler transform. Because the mechanism keeps
//! the tilts pairwise equal (`β3 = β2`, `β4 = β1`), the hand rotates with
//! the PS motor at constant velocity.

use std::f64::consts::FRAC_PI_2;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::geometry::{dh_transform, transform_to_pose, Pose, Transform};
use crate::leg::coupler_distance;

/// Accepted deviation of `‖p‖` from `L` in [`uj_ik`], mm.
pub const LINK_TOL: f64 = 1e-6;

/// Relative distance from the chain axis below which `β1` is tie-broken.
const AXIS_TOL: f64 = 1e-12;

#[derive(Debug, Clone, Copy, PartialEq, Default, Serialize, Deserialize)]
pub struct UjAngles {
    pub beta1: f64,
    pub beta2: f64,
    pub beta3: f64,
    pub beta4: f64,
}

impl UjAngles {
    pub fn from_array(b: [f64; 4]) -> Self {
        Self { beta1: b[0], beta2: b[1], beta3: b[2], beta4: b[3] }
    }

    pub fn as_array(&self) -> [f64; 4] {
        [self.beta1, self.beta2, self.beta3, self.beta4]
    }

    /// Deviation from the constant-velocity pairing.
    pub fn pairing_error(&self) -> f64 {
        (self.beta3 - self.beta2).abs().max((self.beta4 - self.beta1).abs())
    }
}

/// Affine-in-preload scaling of the measured UJ angles,
/// `β̂_i = (a_i δ_ref + b_i) β_i`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct UjCorrection {
    pub a: [f64; 4],
    pub b: [f64; 4],
}

impl Default for UjCorrection {
    fn default() -> Self {
        Self::IDENTITY
    }
}

impl UjCorrection {
    pub const IDENTITY: UjCorrection = UjCorrection { a: [0.0; 4], b: [1.0; 4] };

    /// Values identified on the physical prototype.
    pub const PROTOTYPE: UjCorrection = UjCorrection {
        a: [-4.2e-4, -2.5e-2, -0.55, -0.39],
        b: [0.94, 0.94, 0.73, 0.73],
    };

    pub fn new(a: [f64; 4], b: [f64; 4]) -> Result<Self> {
        if let Some(bad) = b.iter().find(|&&x| !(x > 0.0 && x <= 1.5)) {
            return Err(Error::InvalidParameter(format!("UJ scale factor {bad} outside (0, 1.5]")));
        }
        if a.iter().any(|x| !x.is_finite()) {
            return Err(Error::InvalidParameter("UJ slope must be finite".into()));
        }
        Ok(Self { a, b })
    }

    pub fn scale(&self, delta_ref: f64) -> [f64; 4] {
        std::array::from_fn(|i| self.a[i] * delta_ref + self.b[i])
    }
}

/// Angle of the PS motor, equal to the hand rotation about the coupler axis.
#[derive(Debug, Clone, Copy, PartialEq, Default, Serialize, Deserialize)]
pub struct PsState {
    pub theta_ps: f64,
}

fn first_uj(beta1: f64, beta2: f64) -> Transform {
    dh_transform(beta1, 0.0, 0.0, -FRAC_PI_2) * dh_transform(beta2, 0.0, coupler_distance(), 0.0)
}

/// Coupler frame reached by the UJ chain.
pub fn uj_chain_fk(beta: &UjAngles) -> Transform {
    first_uj(beta.beta1, beta.beta2)
        * dh_transform(beta.beta3, 0.0, 0.0, FRAC_PI_2)
        * dh_transform(beta.beta4, 0.0, 0.0, 0.0)
}

/// UJ angles that reach `t`.
///
/// The first UJ is fixed by the coupler position alone. On the chain axis
/// (`x = y = 0`, up to roundoff) `β1` is undefined and is set to zero.
pub fn uj_ik(t: &Transform) -> Result<UjAngles> {
    let p = t.translation();
    let l = coupler_distance();
    if (p.norm() - l).abs() > LINK_TOL {
        return Err(Error::DegenerateAxis(format!(
            "coupler centre at {:.6} mm from the base, the link is {l:.6} mm",
            p.norm()
        )));
    }
    let planar = p.x.hypot(p.y);
    let beta1 = if planar <= AXIS_TOL * l { 0.0 } else { p.y.atan2(p.x) };
    let beta2 = (-p.z).atan2(planar);
    let t2e = first_uj(beta1, beta2).inverse() * *t;
    let beta3 = t2e.entry(1, 3).atan2(-t2e.entry(2, 3));
    let beta4 = t2e.entry(3, 1).atan2(t2e.entry(3, 2));
    Ok(UjAngles { beta1, beta2, beta3, beta4 })
}

/// Hand frame: the coupler frame turned by the PS motor about its x axis.
pub fn hand_pose(pm_pose: &Transform, ps: &PsState) -> Transform {
    *pm_pose * Transform::rot_x(ps.theta_ps)
}

pub fn correct_uj_angles(beta: &UjAngles, delta_ref: f64, c: &UjCorrection) -> UjAngles {
    let s = c.scale(delta_ref);
    let b = beta.as_array();
    UjAngles::from_array(std::array::from_fn(|i| s[i] * b[i]))
}

/// Posture estimated from the measured UJ angles after correction.
pub fn corrected_posture(beta: &UjAngles, delta_ref: f64, c: &UjCorrection) -> Result<Pose> {
    transform_to_pose(&uj_chain_fk(&correct_uj_angles(beta, delta_ref, c)))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::geometry::MinPose;
    use crate::leg::{coupler_pose_from_minpose, leg_fk, leg_ik, Leg, LegParams};

    fn pm_transform(u: MinPose) -> Transform {
        let leg = LegParams::for_leg(Leg::A);
        leg_fk(&leg_ik(&u, &leg).unwrap(), &leg)
    }

    #[test]
    fn zero_angles_translate_along_axis() {
        let t = uj_chain_fk(&UjAngles::default());
        assert!((t.translation().x - 37.5).abs() < 5e-3);
        assert!((t.translation().x - coupler_distance()).abs() < 1e-12);
        assert!(t.translation().y.abs() < 1e-15 && t.translation().z.abs() < 1e-15);
        assert!(t.max_abs_diff(&Transform::trans_x(coupler_distance())) < 1e-14);
    }

    #[test]
    fn pm_poses_have_paired_tilts() {
        let t = pm_transform(MinPose::new(0.4, -0.7));
        let b = uj_ik(&t).unwrap();
        assert!(b.pairing_error() < 1e-9);
        assert!(uj_chain_fk(&b).max_abs_diff(&t) < 1e-12);
    }

    #[test]
    fn on_axis_tie_break() {
        let t = uj_chain_fk(&UjAngles::from_array([0.0, -FRAC_PI_2, -FRAC_PI_2, 0.0]));
        assert!(t.translation().x.abs() < 1e-12 && t.translation().y.abs() < 1e-12);
        let b = uj_ik(&t).unwrap();
        assert_eq!(b.beta1, 0.0);
        assert!((b.beta2 + FRAC_PI_2).abs() < 1e-12);
        assert!((b.beta3 - b.beta2).abs() < 1e-12);
        assert!(b.beta4.abs() < 1e-12);
    }

    #[test]
    fn off_sphere_is_rejected() {
        assert!(uj_ik(&Transform::trans_x(30.0)).is_err());
    }

    #[test]
    fn hand_pose_cases() {
        let t = pm_transform(MinPose::new(0.2, 0.1));
        assert_eq!(hand_pose(&t, &PsState { theta_ps: 0.0 }).max_abs_diff(&t), 0.0);
        let h = hand_pose(&t, &PsState { theta_ps: std::f64::consts::PI });
        assert_eq!(h.translation(), t.translation());
        let (hr, tr) = (h.rotation(), t.rotation());
        assert!((hr.column(0) - tr.column(0)).norm() < 1e-15);
        assert!((hr.column(1) + tr.column(1)).norm() < 1e-15);
        assert!((hr.column(2) + tr.column(2)).norm() < 1e-15);
    }

    #[test]
    fn correction_values() {
        let beta = UjAngles::from_array([0.1, -0.2, 0.3, -0.4]);
        assert_eq!(correct_uj_angles(&beta, 0.3, &UjCorrection::IDENTITY), beta);
        let c = correct_uj_angles(&beta, 0.0, &UjCorrection::PROTOTYPE);
        assert_eq!(c.as_array(), [0.94 * 0.1, 0.94 * -0.2, 0.73 * 0.3, 0.73 * -0.4]);
        let c = correct_uj_angles(&beta, 0.5, &UjCorrection::PROTOTYPE);
        // 0.73 − 0.55·0.5 = 0.455
        assert!((c.beta3 - 0.455 * 0.3).abs() < 1e-15);
    }

    #[test]
    fn correction_validation() {
        assert!(UjCorrection::new([0.0; 4], [1.0; 4]).is_ok());
        assert!(UjCorrection::new([0.0; 4], [1.0, 1.0, 0.0, 1.0]).is_err());
    }

    #[test]
    fn identity_correction_reconstructs_pm_pose() {
        let u = MinPose::new(-0.3, 0.25);
        let b = uj_ik(&pm_transform(u)).unwrap();
        let p = corrected_posture(&b, 0.4, &UjCorrection::IDENTITY).unwrap();
        let expect = coupler_pose_from_minpose(&u).unwrap();
        assert!((p.alpha_y - u.alpha_y).abs() < 1e-12);
        assert!((p.alpha_x - expect.alpha_x).abs() < 1e-12);
    }
}
