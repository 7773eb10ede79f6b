//! Worked examples with fixed expected values.

use std::f64::consts::{FRAC_PI_2, PI};

use nalgebra::{DMatrix, DVector, Vector3, Vector6};
use vswrist::analysis::*;
use vswrist::geometry::{dh_transform, pose_to_transform, transform_to_pose};
use vswrist::leg::*;
use vswrist::parallel::*;
use vswrist::plant::*;
use vswrist::ps::*;
use vswrist::statics::*;
use vswrist::transmission::*;
use vswrist::{Error, MinPose, Pose, Transform};

const L: f64 = 37.50298;

#[test]
fn dh_single_factor_and_composition() {
    assert!(dh_transform(0.0, 0.0, 0.0, 0.0).max_abs_diff(&Transform::identity()) < 1e-15);
    let r = dh_transform(FRAC_PI_2, 0.0, 0.0, 0.0);
    assert!((r.transform_point(&Vector3::x()) - Vector3::y()).norm() < 1e-15);
    let t = dh_transform(0.3, 49.0, 0.0, -PI / 4.0);
    let hand = Transform::rot_z(0.3) * Transform::trans_z(49.0) * Transform::rot_x(-PI / 4.0) * Transform::trans_x(0.0);
    assert!(t.max_abs_diff(&hand) < 1e-14);
}

#[test]
fn euler_pose_examples() {
    assert!(pose_to_transform(&Pose::default()).max_abs_diff(&Transform::identity()) < 1e-15);
    let t = pose_to_transform(&Pose { alpha_z: FRAC_PI_2, ..Pose::default() });
    assert!((t.entry(1, 2) + 1.0).abs() < 1e-15 && (t.entry(2, 1) - 1.0).abs() < 1e-15);
    let back = transform_to_pose(&Transform::identity()).unwrap();
    assert_eq!(back, Pose::default());
    let lock = Transform::rot_y(FRAC_PI_2);
    assert!(matches!(transform_to_pose(&lock), Err(Error::GimbalLock(_))));
}

#[test]
fn coupler_distance_value() {
    assert!((coupler_distance() - L).abs() < 1e-5);
    let p = coupler_pose_from_minpose(&MinPose::NEUTRAL).unwrap();
    assert!((p.position() - Vector3::new(coupler_distance(), 0.0, 0.0)).norm() < 1e-12);
}

#[test]
fn neutral_leg_state() {
    for leg in Leg::ALL {
        let q = leg_ik(&MinPose::NEUTRAL, &LegParams::for_leg(leg)).unwrap();
        assert!((q.q1 - 7.0 * PI / 8.0).abs() < 1e-12);
        assert!((q.q2 + FRAC_PI_2).abs() < 1e-12);
        assert!(q.constraint_violation() < 1e-15);
    }
}

#[test]
fn leg_round_trip_at_02_04() {
    let u = MinPose::new(0.2, 0.4);
    for leg in Leg::ALL {
        let p = LegParams::for_leg(leg);
        let pose = transform_to_pose(&leg_fk(&leg_ik(&u, &p).unwrap(), &p)).unwrap();
        assert!((pose.alpha_y - 0.2).abs() < 1e-12 && (pose.alpha_z - 0.4).abs() < 1e-12);
    }
}

#[test]
fn encoders_recover_posture() {
    let u = MinPose::new(0.3, -0.5);
    let s = MechanismState::from_minpose(&u).unwrap().sensed();
    let p = posture_from_encoders(&s).unwrap();
    assert!((p.alpha_y - 0.3).abs() < 1e-9 && (p.alpha_z + 0.5).abs() < 1e-9);
    assert!(leg_c_residual(&s, &p).unwrap() < 1e-9);
    let n = posture_from_encoders(&MechanismState::from_minpose(&MinPose::NEUTRAL).unwrap().sensed()).unwrap();
    assert!(n.alpha_y.abs() < 1e-12 && n.alpha_z.abs() < 1e-12);
    let grid = (0..40).map(|i| -3.1 + 6.2 * i as f64 / 39.0);
    let bad = grid
        .clone()
        .flat_map(|a| grid.clone().map(move |b| (a, b)))
        .find(|&(a, b)| qb2_discriminant(a, b) < -1e-3)
        .unwrap();
    assert!(matches!(solve_qb2(bad.0, bad.1), Err(Error::InconsistentEncoders(_))));
}

#[test]
fn uj_examples() {
    let t = uj_chain_fk(&UjAngles::from_array([0.0; 4]));
    assert!(t.max_abs_diff(&Transform::trans_x(coupler_distance())) < 1e-14);
    let b = [0.1, -0.2, 0.3, 0.4];
    let c = correct_uj_angles(&UjAngles::from_array(b), 0.0, &UjCorrection::PROTOTYPE).as_array();
    let want = [0.94 * 0.1, 0.94 * -0.2, 0.73 * 0.3, 0.73 * 0.4];
    for i in 0..4 {
        assert!((c[i] - want[i]).abs() < 1e-15);
    }
    let c = correct_uj_angles(&UjAngles::from_array(b), 0.5, &UjCorrection::PROTOTYPE).as_array();
    assert!((c[2] - (0.73 - 0.275) * 0.3).abs() < 1e-15);
    let pm = leg_fk(&leg_ik(&MinPose::new(0.2, 0.1), &LegParams::for_leg(Leg::A)).unwrap(), &LegParams::for_leg(Leg::A));
    let flipped = hand_pose(&pm, &PsState { theta_ps: PI });
    assert!((flipped.translation() - pm.translation()).norm() < 1e-12);
}

#[test]
fn statics_at_neutral() {
    let s = StaticsSolver::new(statics_at(&MinPose::NEUTRAL).unwrap()).unwrap();
    let n0 = s.n0();
    let third = 1.0 / 3f64.sqrt();
    assert!((n0 - Vector3::repeat(third)).norm() < 1e-9);
    let zero = s.solve(&Vector6::zeros(), 0.0).unwrap();
    assert!(zero.tau_a.norm() < 1e-12);
    let one = s.solve(&Vector6::zeros(), 1.0).unwrap();
    assert!((one.tau_a - n0).norm() < 1e-9);
    assert!(s.coupler_wrench(&one.w_tilde).norm() < 1e-8);
    let axial = Vector6::new(5.0, 0.0, 0.0, 0.0, 0.0, 0.0);
    assert!(matches!(s.solve(&axial, 0.0), Err(Error::SingularPosture(_))));
}

#[test]
fn statics_matches_stacked_least_squares() {
    let u = MinPose::new(0.35, -0.2);
    let m = statics_at(&u).unwrap();
    let s = StaticsSolver::new(m.clone()).unwrap();
    let w = Vector6::new(1.5, -2.0, 0.7, 30.0, -12.0, 8.0);
    let lambda = 40.0;
    let got = s.solve(&w, lambda).unwrap();

    let jh = m.jh();
    let ta = &m.t_a * &jh;
    let n0 = DMatrix::from_row_slice(1, 3, s.n0().as_slice());
    let mut a = DMatrix::zeros(16, 15);
    a.view_mut((0, 0), (6, 15)).copy_from(&m.gh());
    a.view_mut((6, 0), (9, 15)).copy_from(&(&m.t_abar * &jh));
    a.view_mut((15, 0), (1, 15)).copy_from(&(n0 * &ta));
    let mut b = DVector::zeros(16);
    b.rows_mut(0, 6).copy_from(&(-DVector::from_column_slice(w.as_slice())));
    b[15] = lambda;
    let x = vswrist::linalg::svd(a).solve(&b, 1e-12).unwrap();
    let tau = &ta * x;
    for i in 0..3 {
        assert!((tau[i] - got.tau_a[i]).abs() < 1e-8, "{tau} vs {}", got.tau_a);
    }
}

#[test]
fn transmission_defaults() {
    let p = TransmissionParams::default();
    assert!((spring_length(0.0, &p) - p.d0).abs() < 1e-15);
    let quarter = ((p.l_n + p.d0).powi(2) + p.l_n.powi(2)).sqrt();
    assert!((spring_length(FRAC_PI_2, &p) - quarter).abs() < 1e-12);
    assert_eq!(output_torque(0.0, &p).unwrap(), 0.0);
    assert!((transmission_stiffness(0.0, &p).unwrap() - 1381.4).abs() < 0.1);
    assert!((transmission_stiffness(0.6, &p).unwrap() - 3498.7).abs() < 0.1);
    assert!((output_torque(0.6, &p).unwrap() + 1134.5).abs() < 0.1);
    assert!((solve_gamma(0.0, Side::Right, &p).unwrap() - DEFAULT_REST_GAMMA).abs() < 1e-9);
    assert!(output_torque(0.9, &p).is_err());
}

#[test]
fn controller_examples() {
    let mut c = ControllerConfig::default();
    c.comp_poly_y = [0.0, 0.0, 0.0, 0.0, 1.0];
    let v = stiffness_compensation(&MinPose::new(0.1, 0.0), 0.5, &c);
    assert!((v.alpha_y - 0.1625).abs() < 1e-15);
    let r = motor_reference(&MinPose::NEUTRAL, 0.3).unwrap();
    assert!(r.iter().all(|x| (x - 7.0 * PI / 8.0 - 0.3).abs() < 1e-12));
}

#[test]
fn load_shift_shrinks_with_preload() {
    let plant = Plant::default();
    let u = MinPose::new(0.4, 0.0);
    let mut last = f64::INFINITY;
    for d in [0.0, 0.2, 0.4, 0.6] {
        let theta = motor_reference(&u, d).unwrap();
        let free = plant.equilibrium(&theta, None, &u).unwrap();
        let loaded = plant.equilibrium(&theta, Some(&PointLoad::TEST_MASS), &u).unwrap();
        let shift = loaded.u.distance(&free.u);
        assert!(shift < last, "δ_ref {d}: {shift} after {last}");
        last = shift;
    }
}

#[test]
fn uj_fit_recovers_prototype() {
    let truth = UjCorrection::PROTOTYPE;
    let samples: Vec<_> = [0.0, 0.15, 0.3, 0.45, 0.6]
        .iter()
        .map(|&d| {
            let nominal = [0.2, -0.35, 0.4, 0.1];
            let k = truth.scale(d);
            (d, nominal, std::array::from_fn(|i| k[i] * nominal[i]))
        })
        .collect();
    let fit = fit_uj_correction(&samples).unwrap();
    for i in 0..4 {
        assert!((fit.correction.a[i] - truth.a[i]).abs() < 1e-9);
        assert!((fit.correction.b[i] - truth.b[i]).abs() < 1e-9);
    }
}
