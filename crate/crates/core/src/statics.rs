//! Static equilibrium of the parallel mechanism.
//!
//! Each leg meets the coupler at a revolute coupling joint located at `P`,
//! `r_e` along the last joint axis. The joint transmits a force and the two
//! moment components orthogonal to its axis, collected per leg in the
//! 5-vector `w̃_i`. With the stacked matrices
//!
//! * `J = blockdiag(J_iᵀ)` (12×18) mapping coupling wrenches to joint torques,
//! * `G = [G_A G_B G_C]` (6×18) moving coupling wrenches to the coupler centre,
//! * `H = blockdiag(H_i)` (15×18) selecting the transmitted components,
//! * `T_a`, `T_ā` splitting joint torques into actuated (`q1` of each leg)
//!   and passive ones,
//!
//! equilibrium reads `τ_A = T_a J Hᵀ w̃`, `0 = T_ā J Hᵀ w̃`, `G Hᵀ w̃ = −w_ext`.
//! The 12×18 shape of `J` follows from the three transposed 6×4 blocks.
//!
//! Wrenches are `(f; m)` in the base frame, moments about the coupler centre.
//! `τ_A` is the torque the actuators must apply, so with coupler twist `ξ`
//! the virtual work `τ_A · δq_A + w_ext · ξ` vanishes.

use nalgebra::{DMatrix, DVector, Matrix6x4, Vector3, Vector6};

use crate::error::{Error, Result};
use crate::geometry::{skew, MinPose};
use crate::leg::{leg_frames, Leg, LegJointState, LegParams};
use crate::linalg::{null_space, pinv, rank, svd, RANK_TOL};
use crate::parallel::MechanismState;

/// Coupler radius: distance of each coupling point along the last joint axis, mm.
pub const COUPLER_RADIUS: f64 = 22.5;
/// Maximum continuous actuator torque, N·mm.
pub const TAU_LIM: f64 = 1351.0;
/// Leg frames further apart than this are not one mechanism, mm.
pub const LEG_CONSISTENCY_TOL: f64 = 1e-6;
/// Equilibrium residual accepted before a posture is declared singular.
pub const BALANCE_TOL: f64 = 1e-8;

#[derive(Debug, Clone, PartialEq)]
pub struct LegJacobian {
    pub eta: f64,
    /// Columns `[k × (P − O); k]` for the four joint axes.
    pub j: Matrix6x4<f64>,
    pub coupling_point: Vector3<f64>,
    /// Axis of the coupling joint (last joint of the leg).
    pub coupling_axis: Vector3<f64>,
    pub coupler_origin: Vector3<f64>,
}

pub fn leg_jacobian(q: &LegJointState, leg: &LegParams) -> LegJacobian {
    let frames = leg_frames(q, leg);
    let p = frames[3].transform_point(&Vector3::new(0.0, 0.0, COUPLER_RADIUS));
    let mut j = Matrix6x4::zeros();
    for i in 0..4 {
        let k = frames[i].rotation().column(2).into_owned();
        let o = frames[i].translation();
        j.fixed_view_mut::<3, 1>(0, i).copy_from(&k.cross(&(p - o)));
        j.fixed_view_mut::<3, 1>(3, i).copy_from(&k);
    }
    LegJacobian {
        eta: leg.eta,
        j,
        coupling_point: p,
        coupling_axis: frames[3].rotation().column(2).into_owned(),
        coupler_origin: *frames[4].translation(),
    }
}

/// Wrench-component selection of a revolute coupling joint with axis `n`.
pub fn constraint_basis(n: &Vector3<f64>) -> DMatrix<f64> {
    let mut h = DMatrix::zeros(5, 6);
    for i in 0..3 {
        h[(i, i)] = 1.0;
    }
    h[(3, 3)] = -n.y;
    h[(3, 4)] = n.x;
    h[(4, 3)] = -n.z;
    h[(4, 5)] = n.x;
    h
}

/// Transport of a wrench applied at `point` to `origin`.
pub fn grasp_block(point: &Vector3<f64>, origin: &Vector3<f64>) -> DMatrix<f64> {
    let mut g = DMatrix::identity(6, 6);
    g.view_mut((3, 0), (3, 3)).copy_from(&skew(&(point - origin)));
    g
}

/// Wrench at `origin` of a force applied at `point`.
pub fn point_force_wrench(force: &Vector3<f64>, point: &Vector3<f64>, origin: &Vector3<f64>) -> Vector6<f64> {
    let m = (point - origin).cross(force);
    Vector6::new(force.x, force.y, force.z, m.x, m.y, m.z)
}

#[derive(Debug, Clone, PartialEq)]
pub struct StaticsMatrices {
    pub j_full: DMatrix<f64>,
    pub g: DMatrix<f64>,
    pub h: DMatrix<f64>,
    pub t_a: DMatrix<f64>,
    pub t_abar: DMatrix<f64>,
    pub jacobians: Vec<LegJacobian>,
}

impl StaticsMatrices {
    /// `G Hᵀ`, 6×15.
    pub fn gh(&self) -> DMatrix<f64> {
        &self.g * self.h.transpose()
    }

    /// `J Hᵀ`, 12×15: joint torques produced by the coupling wrenches.
    pub fn jh(&self) -> DMatrix<f64> {
        &self.j_full * self.h.transpose()
    }
}

pub fn assemble_statics(qs: &[LegJointState; 3]) -> Result<StaticsMatrices> {
    let jacobians: Vec<LegJacobian> =
        Leg::ALL.iter().map(|&l| leg_jacobian(&qs[l.index()], &LegParams::for_leg(l))).collect();
    let spread = (1..3)
        .map(|i| (jacobians[i].coupler_origin - jacobians[0].coupler_origin).norm())
        .fold(0.0, f64::max);
    if spread > LEG_CONSISTENCY_TOL {
        return Err(Error::InconsistentLegs(spread));
    }
    let origin = jacobians[0].coupler_origin;
    let mut j_full = DMatrix::zeros(12, 18);
    let mut g = DMatrix::zeros(6, 18);
    let mut h = DMatrix::zeros(15, 18);
    for (i, lj) in jacobians.iter().enumerate() {
        j_full.view_mut((4 * i, 6 * i), (4, 6)).copy_from(&lj.j.transpose());
        g.view_mut((0, 6 * i), (6, 6)).copy_from(&grasp_block(&lj.coupling_point, &origin));
        h.view_mut((5 * i, 6 * i), (5, 6)).copy_from(&constraint_basis(&lj.coupling_axis));
    }
    let mut t_a = DMatrix::zeros(3, 12);
    let mut t_abar = DMatrix::zeros(9, 12);
    let mut r = 0;
    for c in 0..12 {
        if c % 4 == 0 {
            t_a[(c / 4, c)] = 1.0;
        } else {
            t_abar[(r, c)] = 1.0;
            r += 1;
        }
    }
    Ok(StaticsMatrices { j_full, g, h, t_a, t_abar, jacobians })
}

/// Statics of the mechanism at a posture.
pub fn statics_at(u: &MinPose) -> Result<StaticsMatrices> {
    assemble_statics(&MechanismState::from_minpose(u)?.legs)
}

#[derive(Debug, Clone, PartialEq)]
pub struct EquilibriumSolution {
    pub tau_a: Vector3<f64>,
    pub w_tilde: DVector<f64>,
    pub n0: Vector3<f64>,
    pub lambda: f64,
}

impl EquilibriumSolution {
    /// Actuators above [`TAU_LIM`].
    pub fn saturated(&self) -> [bool; 3] {
        saturation(&self.tau_a)
    }
}

pub fn saturation(tau: &Vector3<f64>) -> [bool; 3] {
    std::array::from_fn(|i| tau[i].abs() > TAU_LIM)
}

/// Factorized equilibrium problem at one posture.
///
/// The particular solution is made orthogonal to `N0` in actuator space,
/// so `λ = N0 · τ_A` for every returned solution.
#[derive(Debug, Clone)]
pub struct StaticsSolver {
    m: StaticsMatrices,
    jh: DMatrix<f64>,
    gh_pinv: DMatrix<f64>,
    p_null: DMatrix<f64>,
    passive: DMatrix<f64>,
    passive_pinv: DMatrix<f64>,
    /// Coupling wrenches with zero net effect whose actuator image is `N0`.
    w_internal: DVector<f64>,
    n0: Vector3<f64>,
}

impl StaticsSolver {
    pub fn new(m: StaticsMatrices) -> Result<Self> {
        let gh = m.gh();
        let jh = m.jh();
        let p_null = null_space(&gh, RANK_TOL);
        if p_null.ncols() != 9 {
            return Err(Error::DegenerateNullspace(p_null.ncols()));
        }
        // passive balance restricted to the self-equilibrated family
        let passive = &m.t_abar * &jh * &p_null;
        let z = null_space(&passive, RANK_TOL);
        let image = &m.t_a * &jh * &p_null * &z;
        if z.ncols() == 0 || rank(&image, RANK_TOL) != 1 {
            let dim = if z.ncols() == 0 { 0 } else { rank(&image, RANK_TOL) };
            return Err(Error::DegenerateNullspace(dim));
        }
        let v_t = svd(image.clone()).v_t.expect("V requested");
        let v0: DVector<f64> = v_t.row(0).transpose();
        let t = &image * &v0;
        let s0 = t.norm();
        let mut n0 = Vector3::new(t[0], t[1], t[2]) / s0;
        let mut coeff = v0 / s0;
        if n0[0] < 0.0 {
            n0 = -n0;
            coeff = -coeff;
        }
        let w_internal = &p_null * (&z * coeff);
        let passive_pinv = pinv(&passive, RANK_TOL);
        Ok(Self {
            gh_pinv: pinv(&gh, RANK_TOL),
            m,
            jh,
            p_null,
            passive,
            passive_pinv,
            w_internal,
            n0,
        })
    }

    pub fn matrices(&self) -> &StaticsMatrices {
        &self.m
    }

    pub fn n0(&self) -> Vector3<f64> {
        self.n0
    }

    /// Basis of the nullspace of `G Hᵀ`, 15×9.
    pub fn self_equilibrated_basis(&self) -> &DMatrix<f64> {
        &self.p_null
    }

    pub fn actuated_torques(&self, w_tilde: &DVector<f64>) -> Vector3<f64> {
        let t = &self.m.t_a * &self.jh * w_tilde;
        Vector3::new(t[0], t[1], t[2])
    }

    pub fn passive_torques(&self, w_tilde: &DVector<f64>) -> DVector<f64> {
        &self.m.t_abar * &self.jh * w_tilde
    }

    /// Net wrench the legs exert on the coupler.
    pub fn coupler_wrench(&self, w_tilde: &DVector<f64>) -> Vector6<f64> {
        let w = self.m.gh() * w_tilde;
        Vector6::from_iterator(w.iter().cloned())
    }

    pub fn solve(&self, w_ext: &Vector6<f64>, lambda: f64) -> Result<EquilibriumSolution> {
        let w = DVector::from_column_slice(w_ext.as_slice());
        let particular = -(&self.gh_pinv * &w);
        let rhs = -(&self.m.t_abar * &self.jh * &particular);
        let coords = &self.passive_pinv * &rhs;
        let mut w_tilde = particular + &self.p_null * coords;

        let residual = self.passive_torques(&w_tilde).norm().max((self.coupler_wrench(&w_tilde) + w_ext).norm());
        if residual > BALANCE_TOL * (1.0 + w_ext.norm()) {
            return Err(Error::SingularPosture(residual));
        }
        let drift = self.n0.dot(&self.actuated_torques(&w_tilde));
        w_tilde += &self.w_internal * (lambda - drift);
        Ok(EquilibriumSolution {
            tau_a: self.actuated_torques(&w_tilde),
            w_tilde,
            n0: self.n0,
            lambda,
        })
    }

    /// Actuated torques that balance `w_ext`, split into the part orthogonal
    /// to `N0` and the internal-force coordinate of `tau`.
    pub fn balance_residual(&self, tau: &Vector3<f64>, w_ext: &Vector6<f64>) -> Result<Vector3<f64>> {
        let lambda = self.n0.dot(tau);
        Ok(tau - self.solve(w_ext, lambda)?.tau_a)
    }

    /// `T_ā J Hᵀ P`, the passive balance over self-equilibrated wrenches.
    pub fn passive_map(&self) -> &DMatrix<f64> {
        &self.passive
    }
}

pub fn internal_torque_basis(m: &StaticsMatrices) -> Result<Vector3<f64>> {
    Ok(StaticsSolver::new(m.clone())?.n0)
}

pub fn solve_equilibrium(m: &StaticsMatrices, w_ext: &Vector6<f64>, lambda: f64) -> Result<EquilibriumSolution> {
    StaticsSolver::new(m.clone())?.solve(w_ext, lambda)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::leg::leg_ik;
    use nalgebra::Rotation3;

    fn neutral_q(leg: Leg) -> LegJointState {
        leg_ik(&MinPose::NEUTRAL, &LegParams::for_leg(leg)).unwrap()
    }

    #[test]
    fn jacobian_matches_finite_differences() {
        let u = MinPose::new(0.3, -0.2);
        for leg in Leg::ALL {
            let params = LegParams::for_leg(leg);
            let q = leg_ik(&u, &params).unwrap();
            let lj = leg_jacobian(&q, &params);
            let h = 1e-6;
            for i in 0..4 {
                let mut qp = q.as_array();
                let mut qm = q.as_array();
                qp[i] += h;
                qm[i] -= h;
                // P sits on the joint-4 axis, so it moves with the coupler frame
                let fp = leg_frames(&LegJointState::from_array(qp), &params)[4];
                let fm = leg_frames(&LegJointState::from_array(qm), &params)[4];
                let local = leg_frames(&q, &params)[4].inverse().transform_point(&lj.coupling_point);
                let v = (fp.transform_point(&local) - fm.transform_point(&local)) / (2.0 * h);
                assert!((v - lj.j.fixed_view::<3, 1>(0, i)).norm() < 1e-4);
                let rp = fp.rotation() * fm.rotation().transpose();
                let w = Rotation3::from_matrix_unchecked(rp).scaled_axis() / (2.0 * h);
                assert!((w - lj.j.fixed_view::<3, 1>(3, i)).norm() < 1e-4);
            }
            // coupling point lies r_e along the joint-4 axis
            let o3 = leg_frames(&q, &params)[3].translation().clone_owned();
            assert!(((lj.coupling_point - o3).norm() - COUPLER_RADIUS).abs() < 1e-12);
        }
    }

    #[test]
    fn neutral_jacobians_are_rotated_copies() {
        let rot = Rotation3::from_axis_angle(&Vector3::x_axis(), 2.0 * std::f64::consts::PI / 3.0);
        let ja = leg_jacobian(&neutral_q(Leg::A), &LegParams::for_leg(Leg::A));
        let jb = leg_jacobian(&neutral_q(Leg::B), &LegParams::for_leg(Leg::B));
        for i in 0..4 {
            let a_lin = rot * ja.j.fixed_view::<3, 1>(0, i).into_owned();
            let a_ang = rot * ja.j.fixed_view::<3, 1>(3, i).into_owned();
            assert!((a_lin - jb.j.fixed_view::<3, 1>(0, i)).norm() < 1e-12);
            assert!((a_ang - jb.j.fixed_view::<3, 1>(3, i)).norm() < 1e-12);
        }
    }

    #[test]
    fn constraint_basis_pattern() {
        let n = Vector3::new(0.6, 0.0, 0.8);
        let h = constraint_basis(&n);
        assert_eq!(h.row(3).iter().cloned().collect::<Vec<_>>(), vec![0.0, 0.0, 0.0, -0.0, 0.6, 0.0]);
        assert_eq!(h.row(4).iter().cloned().collect::<Vec<_>>(), vec![0.0, 0.0, 0.0, -0.8, 0.0, 0.6]);
        // no moment about the joint axis is transmitted
        assert!((h.view((3, 3), (2, 3)) * n).norm() < 1e-15);
    }

    #[test]
    fn zero_lever_grasp_is_identity() {
        let p = Vector3::new(1.0, 2.0, 3.0);
        assert_eq!(grasp_block(&p, &p), DMatrix::identity(6, 6));
    }

    #[test]
    fn neutral_basis_is_symmetric() {
        let n0 = internal_torque_basis(&statics_at(&MinPose::NEUTRAL).unwrap()).unwrap();
        let expect = Vector3::repeat(1.0 / 3f64.sqrt());
        assert!((n0 - expect).norm() < 1e-9);
    }

    #[test]
    fn homogeneous_and_basis_cases() {
        let s = StaticsSolver::new(statics_at(&MinPose::new(0.3, 0.1)).unwrap()).unwrap();
        let zero = s.solve(&Vector6::zeros(), 0.0).unwrap();
        assert!(zero.tau_a.norm() < 1e-12);
        let one = s.solve(&Vector6::zeros(), 1.0).unwrap();
        assert!((one.tau_a - s.n0()).norm() < 1e-9);
        assert!(s.coupler_wrench(&one.w_tilde).norm() < 1e-8);
        assert!(s.passive_torques(&one.w_tilde).norm() < 1e-8);
    }

    #[test]
    fn axial_force_at_neutral_is_singular() {
        let s = StaticsSolver::new(statics_at(&MinPose::NEUTRAL).unwrap()).unwrap();
        let w = Vector6::new(1.0, 0.0, 0.0, 0.0, 0.0, 0.0);
        assert!(matches!(s.solve(&w, 0.0), Err(Error::SingularPosture(_))));
    }

    #[test]
    fn inconsistent_legs_are_rejected() {
        let mut qs = MechanismState::from_minpose(&MinPose::new(0.2, 0.2)).unwrap().legs;
        qs[1].q1 += 0.1;
        assert!(matches!(assemble_statics(&qs), Err(Error::InconsistentLegs(_))));
    }
}
