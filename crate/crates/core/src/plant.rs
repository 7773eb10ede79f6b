//! Open-loop posture and stiffness controller driving a quasi-static plant.
//!
//! The motors are worm-geared and cannot be back-driven, so under any load
//! they hold their angle and the coupler settles where the stored elastic
//! energy plus the load potential is smallest. The plant therefore reduces
//! to a two-variable minimization over the posture `u` for given motor
//! angles. Inertia and damping are not modelled.

use std::io;

use nalgebra::{Vector2, Vector3, Vector6};
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, Normal};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::geometry::{pose_to_transform, MinPose};
use crate::leg::{coupler_pose_from_minpose, leg_ik, Leg, LegParams};
use crate::optim::{nelder_mead, newton_polish, SimplexOptions};
use crate::parallel::{reconstruct, SensedJoints};
use crate::statics::{point_force_wrench, statics_at, StaticsSolver, TAU_LIM};
use crate::transmission::{output_torque, stored_energy, transmission_stiffness, TransmissionParams};

/// Largest commanded preload, rad.
pub const MAX_PRELOAD: f64 = 0.6;
/// Default posture bound of the simulated workspace, rad per axis.
pub const WORKSPACE_BOUND: f64 = 1.3;
/// Gradient norm at which an equilibrium is accepted, N·mm/rad.
pub const EQUILIBRIUM_TOL: f64 = 1e-8;
/// Worst gradient norm still reported as an equilibrium.
const EQUILIBRIUM_ACCEPT: f64 = 1e-6;

/// Controller settings.
///
/// Compensation polynomials hold coefficients of increasing powers of
/// `δ_ref`, so `[c0, c1, c2, c3, c4]` evaluates `c0 + c1 δ + … + c4 δ⁴`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct ControllerConfig {
    pub k_p: f64,
    pub k_ps: f64,
    /// Preload applied when a scenario does not set its own, rad.
    pub delta_ref: f64,
    pub comp_poly_y: [f64; 5],
    pub comp_poly_z: [f64; 5],
    /// Time for a motor to cover 90 % of a step, s.
    pub rise_time: f64,
    /// Motor speed limit, rad/s.
    pub rate_limit: f64,
}

impl Default for ControllerConfig {
    fn default() -> Self {
        Self {
            k_p: 1.0,
            k_ps: 1.0,
            delta_ref: 0.0,
            comp_poly_y: [0.0; 5],
            comp_poly_z: [0.0; 5],
            rise_time: 0.15,
            rate_limit: 20.0,
        }
    }
}

impl ControllerConfig {
    pub fn validate(&self) -> Result<()> {
        if !(self.k_p > 0.0 && self.k_ps > 0.0) {
            return Err(Error::InvalidParameter("controller gains must be positive".into()));
        }
        check_preload(self.delta_ref)?;
        if !(self.rise_time > 0.0 && self.rate_limit > 0.0) {
            return Err(Error::InvalidParameter("rise time and rate limit must be positive".into()));
        }
        if self.comp_poly_y.iter().chain(&self.comp_poly_z).any(|c| !c.is_finite()) {
            return Err(Error::InvalidParameter("compensation coefficients must be finite".into()));
        }
        Ok(())
    }

    pub fn motor_model(&self) -> MotorModel {
        MotorModel::from_rise_time(self.rise_time, self.rate_limit)
    }
}

fn check_preload(delta_ref: f64) -> Result<()> {
    if !(0.0..=MAX_PRELOAD).contains(&delta_ref) {
        return Err(Error::OutOfRange { value: delta_ref, limit: MAX_PRELOAD });
    }
    Ok(())
}

/// `c0 + c1 x + … + c4 x⁴`.
pub fn eval_poly(c: &[f64; 5], x: f64) -> f64 {
    c.iter().rev().fold(0.0, |acc, &ci| acc * x + ci)
}

/// Shifts the posture reference to cancel the drift a preload would cause.
pub fn stiffness_compensation(u_ref: &MinPose, delta_ref: f64, c: &ControllerConfig) -> MinPose {
    MinPose::new(
        u_ref.alpha_y + eval_poly(&c.comp_poly_y, delta_ref),
        u_ref.alpha_z + eval_poly(&c.comp_poly_z, delta_ref),
    )
}

/// Motor angles that hold posture `u_ref` with every spring preloaded by
/// `delta_ref`: first-joint angles plus the same offset on each motor.
pub fn motor_reference(u_ref: &MinPose, delta_ref: f64) -> Result<[f64; 3]> {
    let mut theta = [0.0; 3];
    for leg in Leg::ALL {
        theta[leg.index()] = leg_ik(u_ref, &LegParams::for_leg(leg))?.q1 + delta_ref;
    }
    Ok(theta)
}

/// Proportional motor command, an increment on the measured angles.
pub fn command_law(theta_ref: &[f64; 3], theta_meas: &[f64; 3], k_p: f64) -> [f64; 3] {
    std::array::from_fn(|i| k_p * (theta_ref[i] - theta_meas[i]))
}

pub fn ps_command_law(reference: f64, measured: f64, k_ps: f64) -> f64 {
    k_ps * (reference - measured)
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct MotorState {
    pub theta: [f64; 3],
    pub theta_ps: f64,
    /// Worm gears: external loads never move the shaft.
    pub non_backdrivable: bool,
}

impl MotorState {
    pub fn new(theta: [f64; 3], theta_ps: f64) -> Self {
        Self { theta, theta_ps, non_backdrivable: true }
    }
}

/// Position-controlled motor seen from outside: first-order lag towards the
/// setpoint, limited in speed.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct MotorModel {
    pub time_constant: f64,
    pub rate_limit: f64,
}

impl MotorModel {
    /// Lag whose step response reaches 90 % after `rise_time`.
    pub fn from_rise_time(rise_time: f64, rate_limit: f64) -> Self {
        Self { time_constant: rise_time / std::f64::consts::LN_10, rate_limit }
    }

    pub fn step(&self, current: f64, setpoint: f64, dt: f64) -> f64 {
        let change = (setpoint - current) * (1.0 - (-dt / self.time_constant).exp());
        let cap = self.rate_limit * dt;
        current + change.clamp(-cap, cap)
    }
}

/// Mass hung from the coupler at `offset` mm along its axis.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct PointLoad {
    /// kg
    pub mass: f64,
    /// mm
    pub offset: f64,
}

impl PointLoad {
    pub const TEST_MASS: PointLoad = PointLoad { mass: 0.64, offset: 78.2 };
}

/// Physical plant: transmission of each leg and environment.
///
/// `k_scale` and `rest_offsets` describe manufacturing spread between the
/// three units; a rest offset moves the zero-torque deflection of a leg.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct Plant {
    pub transmission: TransmissionParams,
    pub k_scale: [f64; 3],
    pub rest_offsets: [f64; 3],
    /// Gravitational acceleration in the base frame, m/s². The default hangs
    /// the wrist with the coupler pointing down.
    pub gravity: [f64; 3],
    pub workspace_bound: f64,
}

impl Default for Plant {
    fn default() -> Self {
        Self {
            transmission: TransmissionParams::default(),
            k_scale: [1.0; 3],
            rest_offsets: [0.0; 3],
            gravity: [9.81, 0.0, 0.0],
            workspace_bound: WORKSPACE_BOUND,
        }
    }
}

/// Solved equilibrium.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Equilibrium {
    pub u: MinPose,
    /// `q1 − θ` per leg.
    pub deltas: [f64; 3],
    /// Elastic torque on each first joint, N·mm.
    pub torques: [f64; 3],
    pub energy: f64,
    pub grad_norm: f64,
    pub saturated: [bool; 3],
    /// Load wrench at the coupler centre.
    pub w_ext: Vector6<f64>,
    /// Mismatch between elastic torques and the torques statics requires for
    /// `w_ext`; `None` at statically singular postures.
    pub statics_residual: Option<f64>,
}

impl Plant {
    pub fn validate(&self) -> Result<()> {
        self.transmission.validate()?;
        if self.k_scale.iter().any(|&k| !(k > 0.0)) {
            return Err(Error::InvalidParameter("k_scale entries must be positive".into()));
        }
        if !(self.workspace_bound > 0.0) {
            return Err(Error::InvalidParameter("workspace bound must be positive".into()));
        }
        Ok(())
    }

    fn leg_transmission(&self, i: usize) -> TransmissionParams {
        TransmissionParams { k: self.transmission.k * self.k_scale[i], ..self.transmission }
    }

    /// Energy, torque and stiffness of leg `i` at deflection `delta`. The
    /// energy is measured from the unit's rest deflection.
    pub fn leg_state(&self, i: usize, delta: f64) -> Result<(f64, f64, f64)> {
        let (d, p) = (delta - self.rest_offsets[i], self.leg_transmission(i));
        Ok((stored_energy(d, &p)?, output_torque(d, &p)?, transmission_stiffness(d, &p)?))
    }

    fn leg_energy(&self, i: usize, delta: f64) -> Result<f64> {
        stored_energy(delta - self.rest_offsets[i], &self.leg_transmission(i))
    }

    fn leg_torque(&self, i: usize, delta: f64) -> Result<f64> {
        output_torque(delta - self.rest_offsets[i], &self.leg_transmission(i))
    }

    fn first_joints(u: &MinPose) -> Result<[f64; 3]> {
        let mut q = [0.0; 3];
        for leg in Leg::ALL {
            q[leg.index()] = leg_ik(u, &LegParams::for_leg(leg))?.q1;
        }
        Ok(q)
    }

    /// Load application point and coupler centre, mm.
    fn load_geometry(u: &MinPose, load: &PointLoad) -> Result<(Vector3<f64>, Vector3<f64>)> {
        let t = pose_to_transform(&coupler_pose_from_minpose(u)?);
        Ok((t.transform_point(&Vector3::new(load.offset, 0.0, 0.0)), *t.translation()))
    }

    fn load_force(&self, load: &PointLoad) -> Vector3<f64> {
        Vector3::from(self.gravity) * load.mass
    }

    fn in_workspace(&self, u: &MinPose) -> bool {
        u.within(self.workspace_bound)
    }

    /// Total potential: elastic energy of all springs plus the load's,
    /// zero with every unit at rest and the load at the base origin.
    pub fn energy(&self, u: &MinPose, theta: &[f64; 3], load: Option<&PointLoad>) -> Result<f64> {
        let q = Self::first_joints(u)?;
        let mut e = 0.0;
        for i in 0..3 {
            e += self.leg_energy(i, q[i] - theta[i])?;
        }
        if let Some(l) = load {
            let (p, _) = Self::load_geometry(u, l)?;
            e -= self.load_force(l).dot(&p);
        }
        Ok(e)
    }

    /// Analytic gradient of [`Plant::energy`]. Geometric derivatives come
    /// from a five-point stencil on the closed-form kinematics.
    pub fn gradient(&self, u: &MinPose, theta: &[f64; 3], load: Option<&PointLoad>) -> Result<Vector2<f64>> {
        let q = Self::first_joints(u)?;
        let mut torques = [0.0; 3];
        for i in 0..3 {
            torques[i] = self.leg_torque(i, q[i] - theta[i])?;
        }
        let force = load.map(|l| self.load_force(l));
        let mut g = Vector2::zeros();
        for j in 0..2 {
            let dq = stencil(u, j, |v| Self::first_joints(v).map(|q| Vector3::from(q)))?;
            g[j] = -(0..3).map(|i| torques[i] * dq[i]).sum::<f64>();
            if let (Some(l), Some(f)) = (load, force) {
                let dp = stencil(u, j, |v| Self::load_geometry(v, l).map(|(p, _)| p))?;
                g[j] -= f.dot(&dp);
            }
        }
        Ok(g)
    }

    /// Generalized force the load exerts on the posture coordinates,
    /// `Fᵀ ∂p/∂u`. At a loaded equilibrium the springs supply exactly this.
    pub fn generalized_load(&self, u: &MinPose, load: &PointLoad) -> Result<Vector2<f64>> {
        let f = self.load_force(load);
        let mut w = Vector2::zeros();
        for j in 0..2 {
            w[j] = f.dot(&stencil(u, j, |v| Self::load_geometry(v, load).map(|(p, _)| p))?);
        }
        Ok(w)
    }

    /// Equilibrium posture for fixed motor angles, searched from `guess`.
    pub fn equilibrium(&self, theta: &[f64; 3], load: Option<&PointLoad>, guess: &MinPose) -> Result<Equilibrium> {
        let grad = |x: &Vector2<f64>| self.gradient(&MinPose::new(x[0], x[1]), theta, load).ok();
        let start = Vector2::new(guess.alpha_y, guess.alpha_z);
        let mut r = newton_polish(grad, start, EQUILIBRIUM_TOL, 1e-5, 40);
        let mut start = start;
        if !r.converged {
            if let Some(seed) = encoder_seed(theta) {
                start = Vector2::new(seed.alpha_y, seed.alpha_z);
                r = newton_polish(grad, start, EQUILIBRIUM_TOL, 1e-5, 40);
            }
        }
        if !r.converged || (r.x - start).norm() > 0.5 {
            let energy = |x: &Vector2<f64>| {
                let u = MinPose::new(x[0], x[1]);
                if !self.in_workspace(&u) {
                    return f64::INFINITY;
                }
                self.energy(&u, theta, load).unwrap_or(f64::INFINITY)
            };
            let opts = SimplexOptions { initial_step: 0.05, x_tol: 1e-7, max_evals: 4000 };
            let s = nelder_mead(energy, start, &opts);
            r = newton_polish(grad, s.x, EQUILIBRIUM_TOL, 1e-5, 40);
        }
        let u = MinPose::new(r.x[0], r.x[1]);
        if !self.in_workspace(&u) {
            return Err(Error::NoEquilibrium(format!(
                "posture ({:.4}, {:.4}) leaves the workspace bound {}",
                u.alpha_y, u.alpha_z, self.workspace_bound
            )));
        }
        if !(r.grad_norm < EQUILIBRIUM_ACCEPT) {
            return Err(Error::NoEquilibrium(format!(
                "minimizer stopped with energy gradient {:e}",
                r.grad_norm
            )));
        }
        self.state_at(&u, theta, load, r.grad_norm)
    }

    fn state_at(&self, u: &MinPose, theta: &[f64; 3], load: Option<&PointLoad>, grad_norm: f64) -> Result<Equilibrium> {
        let q = Self::first_joints(u)?;
        let mut deltas = [0.0; 3];
        let mut torques = [0.0; 3];
        let mut energy = 0.0;
        for i in 0..3 {
            deltas[i] = q[i] - theta[i];
            let (e, t, _) = self.leg_state(i, deltas[i])?;
            energy += e;
            torques[i] = t;
        }
        let w_ext = match load {
            Some(l) => {
                let (p, o) = Self::load_geometry(u, l)?;
                energy -= self.load_force(l).dot(&p);
                point_force_wrench(&self.load_force(l), &p, &o)
            }
            None => Vector6::zeros(),
        };
        let tau = Vector3::from(torques);
        let statics_residual = statics_at(u)
            .and_then(StaticsSolver::new)
            .and_then(|s| s.balance_residual(&tau, &w_ext))
            .map(|r| r.norm())
            .ok();
        Ok(Equilibrium {
            u: *u,
            deltas,
            torques,
            energy,
            grad_norm,
            saturated: std::array::from_fn(|i| torques[i].abs() > TAU_LIM),
            w_ext,
            statics_residual,
        })
    }

    /// Stiffness in posture coordinates at an equilibrium: Hessian of the
    /// total potential, by central differences of the gradient.
    pub fn posture_stiffness(&self, eq: &Equilibrium, theta: &[f64; 3], load: Option<&PointLoad>) -> Result<nalgebra::Matrix2<f64>> {
        let h = 1e-5;
        let mut k = nalgebra::Matrix2::zeros();
        for j in 0..2 {
            let mut up = eq.u;
            let mut um = eq.u;
            if j == 0 {
                up.alpha_y += h;
                um.alpha_y -= h;
            } else {
                up.alpha_z += h;
                um.alpha_z -= h;
            }
            let col = (self.gradient(&up, theta, load)? - self.gradient(&um, theta, load)?) / (2.0 * h);
            k.set_column(j, &col);
        }
        Ok((k + k.transpose()) * 0.5)
    }
}

/// Posture the motors would hold if every spring carried the same
/// deflection: the reconstruction of `θ − c` for the offset `c` that makes
/// the redundant leg agree best.
fn encoder_seed(theta: &[f64; 3]) -> Option<MinPose> {
    let residual = |c: f64| {
        let s = SensedJoints::new(theta[0] - c, theta[1] - c, theta[2] - c);
        reconstruct(&s).ok().map(|(m, r)| (m.pose.min_pose(), r.abs()))
    };
    (-28..=28)
        .filter_map(|i| residual(0.025 * i as f64))
        .min_by(|a, b| a.1.total_cmp(&b.1))
        .map(|(u, _)| u)
}

/// Derivative of `f` along posture axis `axis` by a five-point stencil.
fn stencil<F: Fn(&MinPose) -> Result<Vector3<f64>>>(u: &MinPose, axis: usize, f: F) -> Result<Vector3<f64>> {
    const H: f64 = 1e-4;
    let at = |s: f64| {
        let mut v = *u;
        if axis == 0 {
            v.alpha_y += s;
        } else {
            v.alpha_z += s;
        }
        f(&v)
    };
    Ok((at(-2.0 * H)? - at(2.0 * H)? + (at(H)? - at(-H)?) * 8.0) / (12.0 * H))
}

/// Equilibrium posture for the given motor state, searched from neutral.
pub fn equilibrium_posture(motors: &MotorState, load: Option<&PointLoad>, plant: &Plant) -> Result<MinPose> {
    Ok(plant.equilibrium(&motors.theta, load, &MinPose::NEUTRAL)?.u)
}

/// Command that makes the unloaded plant settle exactly on `target` for a
/// given preload, found by fixed-point iteration on the posture error.
pub fn equalize_reference(
    plant: &Plant,
    target: &MinPose,
    delta_ref: f64,
    cfg: &ControllerConfig,
    guess: &MinPose,
) -> Result<MinPose> {
    let mut cmd = *guess;
    for _ in 0..30 {
        let theta = motor_reference(&stiffness_compensation(&cmd, delta_ref, cfg), delta_ref)?;
        let eq = plant.equilibrium(&theta, None, target)?;
        let err = MinPose::new(target.alpha_y - eq.u.alpha_y, target.alpha_z - eq.u.alpha_z);
        if err.norm() < 1e-12 {
            return Ok(cmd);
        }
        cmd = MinPose::new(cmd.alpha_y + err.alpha_y, cmd.alpha_z + err.alpha_z);
    }
    Err(Error::NoConvergence(30))
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum ScenarioKind {
    Step,
    Sine,
    Circle,
    Helix,
}

/// Experiment description. Step holds `α_y = amplitude` from `t = 0` after
/// starting at neutral; sine moves `α_y`; circle traces radius `amplitude`
/// in `(α_y, α_z)`; helix grows the radius linearly up to `amplitude`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Scenario {
    pub kind: ScenarioKind,
    pub amplitude: f64,
    #[serde(default = "default_period")]
    pub period: f64,
    pub duration: f64,
    #[serde(default = "default_dt")]
    pub dt: f64,
    #[serde(default)]
    pub delta_ref: f64,
    #[serde(default)]
    pub load: Option<PointLoad>,
    /// Standard deviation of simulated posture-measurement noise, rad.
    #[serde(default)]
    pub noise_std: f64,
    #[serde(default)]
    pub seed: u64,
}

fn default_period() -> f64 {
    4.0
}

fn default_dt() -> f64 {
    0.005
}

impl Scenario {
    pub fn validate(&self) -> Result<()> {
        if !(self.dt > 0.0) || !(self.duration >= self.dt) {
            return Err(Error::InvalidParameter(format!(
                "need dt > 0 and duration >= dt (dt = {}, duration = {})",
                self.dt, self.duration
            )));
        }
        if !(self.period > 0.0) || !self.amplitude.is_finite() {
            return Err(Error::InvalidParameter("period must be positive and amplitude finite".into()));
        }
        check_preload(self.delta_ref)?;
        if let Some(l) = self.load {
            if !(l.mass >= 0.0) || !l.offset.is_finite() {
                return Err(Error::InvalidParameter("load mass must be non-negative".into()));
            }
        }
        if !(self.noise_std >= 0.0) {
            return Err(Error::InvalidParameter("noise_std must be non-negative".into()));
        }
        Ok(())
    }

    pub fn steps(&self) -> usize {
        (self.duration / self.dt).round() as usize
    }

    pub fn reference(&self, t: f64) -> MinPose {
        let a = self.amplitude;
        let w = std::f64::consts::TAU / self.period;
        match self.kind {
            ScenarioKind::Step => MinPose::new(a, 0.0),
            ScenarioKind::Sine => MinPose::new(a * (w * t).sin(), 0.0),
            ScenarioKind::Circle => MinPose::new(a * (w * t).cos(), a * (w * t).sin()),
            ScenarioKind::Helix => {
                let r = a * t / self.duration;
                MinPose::new(r * (w * t).cos(), r * (w * t).sin())
            }
        }
    }

    /// Posture the motors hold before the run starts.
    pub fn initial_reference(&self) -> MinPose {
        match self.kind {
            ScenarioKind::Step => MinPose::NEUTRAL,
            _ => self.reference(0.0),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct LogSample {
    pub t: f64,
    pub u_ref: MinPose,
    pub u: MinPose,
    pub theta: [f64; 3],
    pub delta: [f64; 3],
    pub tau: [f64; 3],
    pub saturated: bool,
}

#[derive(Debug, Clone, PartialEq, Default)]
pub struct TrajectoryLog {
    pub samples: Vec<LogSample>,
    /// Load wrench at every sample; not part of the CSV.
    pub w_ext: Vec<Vector6<f64>>,
    /// Largest statics residual over the run, N·mm.
    pub max_statics_residual: f64,
}

pub const LOG_HEADER: [&str; 15] = [
    "t_s",
    "alpha_y_ref_rad",
    "alpha_z_ref_rad",
    "alpha_y_rad",
    "alpha_z_rad",
    "thetaA_rad",
    "thetaB_rad",
    "thetaC_rad",
    "deltaA_rad",
    "deltaB_rad",
    "deltaC_rad",
    "tauA_Nmm",
    "tauB_Nmm",
    "tauC_Nmm",
    "sat_flag",
];

impl TrajectoryLog {
    pub fn write_csv<W: io::Write>(&self, w: W) -> csv::Result<()> {
        let mut out = csv::Writer::from_writer(w);
        out.write_record(LOG_HEADER)?;
        for s in &self.samples {
            let mut row: Vec<String> = [s.t, s.u_ref.alpha_y, s.u_ref.alpha_z, s.u.alpha_y, s.u.alpha_z]
                .iter()
                .chain(&s.theta)
                .chain(&s.delta)
                .chain(&s.tau)
                .map(|v| v.to_string())
                .collect();
            row.push(u8::from(s.saturated).to_string());
            out.write_record(&row)?;
        }
        out.flush()?;
        Ok(())
    }

    pub fn read_csv<R: io::Read>(r: R) -> std::result::Result<Self, String> {
        let mut rd = csv::Reader::from_reader(r);
        let header = rd.headers().map_err(|e| e.to_string())?.clone();
        if header.iter().ne(LOG_HEADER.iter().copied()) {
            return Err(format!("unexpected log header: {}", header.iter().collect::<Vec<_>>().join(",")));
        }
        let mut samples = Vec::new();
        for (line, rec) in rd.records().enumerate() {
            let rec = rec.map_err(|e| e.to_string())?;
            let v: Vec<f64> = rec
                .iter()
                .map(|f| f.parse::<f64>())
                .collect::<std::result::Result<_, _>>()
                .map_err(|e| format!("row {}: {e}", line + 1))?;
            if v.len() != LOG_HEADER.len() {
                return Err(format!("row {}: expected {} fields", line + 1, LOG_HEADER.len()));
            }
            samples.push(LogSample {
                t: v[0],
                u_ref: MinPose::new(v[1], v[2]),
                u: MinPose::new(v[3], v[4]),
                theta: [v[5], v[6], v[7]],
                delta: [v[8], v[9], v[10]],
                tau: [v[11], v[12], v[13]],
                saturated: v[14] != 0.0,
            });
        }
        Ok(Self { samples, ..Default::default() })
    }

    /// Time at which motor `leg` first covers 90 % of its total travel,
    /// linearly interpolated between samples.
    pub fn motor_rise_time(&self, leg: usize) -> Option<f64> {
        let first = self.samples.first()?.theta[leg];
        let last = self.samples.last()?.theta[leg];
        let target = first + 0.9 * (last - first);
        let above = |v: f64| (v - target) * (last - first).signum() >= 0.0;
        self.samples.windows(2).find_map(|w| {
            let (a, b) = (w[0].theta[leg], w[1].theta[leg]);
            if !above(a) && above(b) {
                Some(w[0].t + (w[1].t - w[0].t) * (target - a) / (b - a))
            } else {
                None
            }
        })
    }
}

/// Scenario runner over a plant.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Simulator {
    pub plant: Plant,
    /// Replace each reference by the command whose unloaded equilibrium is
    /// the reference itself.
    pub equalize: bool,
}

impl Default for Simulator {
    fn default() -> Self {
        Self { plant: Plant::default(), equalize: false }
    }
}

/// One row of a recorded reference stream, as replayed by
/// [`Simulator::replay`].
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ReferenceSample {
    pub t: f64,
    pub delta_ref: f64,
    pub alpha_y_ref: f64,
    pub alpha_z_ref: f64,
}

pub const REPLAY_HEADER: [&str; 4] = ["t", "delta_ref", "alpha_y_ref", "alpha_z_ref"];

impl ReferenceSample {
    pub fn u_ref(&self) -> MinPose {
        MinPose::new(self.alpha_y_ref, self.alpha_z_ref)
    }

    pub fn read_csv<R: io::Read>(r: R) -> std::result::Result<Vec<Self>, String> {
        let mut rd = csv::Reader::from_reader(r);
        let header = rd.headers().map_err(|e| e.to_string())?.clone();
        if header.iter().ne(REPLAY_HEADER.iter().copied()) {
            return Err(format!("expected header {}", REPLAY_HEADER.join(",")));
        }
        rd.deserialize().map(|row| row.map_err(|e| e.to_string())).collect()
    }
}

/// Reference point of a run: time, posture, preload and the interval
/// until the next point.
struct StreamPoint {
    t: f64,
    u_ref: MinPose,
    delta_ref: f64,
    dt: f64,
}

struct Stream {
    initial: MinPose,
    points: Vec<StreamPoint>,
    load: Option<PointLoad>,
    noise_std: f64,
    seed: u64,
}

impl Simulator {
    pub fn run(&self, s: &Scenario, cfg: &ControllerConfig) -> Result<TrajectoryLog> {
        s.validate()?;
        let points = (0..=s.steps())
            .map(|k| {
                let t = k as f64 * s.dt;
                StreamPoint { t, u_ref: s.reference(t), delta_ref: s.delta_ref, dt: s.dt }
            })
            .collect();
        let stream = Stream { initial: s.initial_reference(), points, load: s.load, noise_std: s.noise_std, seed: s.seed };
        self.run_stream(&stream, cfg)
    }

    /// Drives the plant through a recorded stream of references and
    /// preloads. Times must increase strictly; the first row also sets the
    /// posture held before the run.
    pub fn replay(&self, refs: &[ReferenceSample], load: Option<PointLoad>, cfg: &ControllerConfig) -> Result<TrajectoryLog> {
        let first = refs.first().ok_or_else(|| Error::InvalidParameter("empty reference stream".into()))?;
        for (i, r) in refs.iter().enumerate() {
            check_preload(r.delta_ref)?;
            if !r.t.is_finite() || !r.alpha_y_ref.is_finite() || !r.alpha_z_ref.is_finite() {
                return Err(Error::InvalidParameter(format!("row {}: non-finite value", i + 1)));
            }
            if i > 0 && !(r.t > refs[i - 1].t) {
                return Err(Error::InvalidParameter(format!("row {}: time does not increase", i + 1)));
            }
        }
        let points = refs
            .iter()
            .enumerate()
            .map(|(i, r)| StreamPoint {
                t: r.t,
                u_ref: r.u_ref(),
                delta_ref: r.delta_ref,
                dt: refs.get(i + 1).map_or(0.0, |n| n.t - r.t),
            })
            .collect();
        let stream = Stream { initial: first.u_ref(), points, load, noise_std: 0.0, seed: 0 };
        self.run_stream(&stream, cfg)
    }

    fn run_stream(&self, s: &Stream, cfg: &ControllerConfig) -> Result<TrajectoryLog> {
        cfg.validate()?;
        self.plant.validate()?;
        let motor = cfg.motor_model();
        let load = s.load.as_ref();
        let mut rng = ChaCha8Rng::seed_from_u64(s.seed);
        let noise = Normal::new(0.0, s.noise_std).map_err(|e| Error::InvalidParameter(e.to_string()))?;

        let first_delta = s.points.first().map_or(0.0, |p| p.delta_ref);
        let mut cmd_guess = s.initial;
        let command = |u_ref: &MinPose, delta_ref: f64, guess: &mut MinPose| -> Result<[f64; 3]> {
            let u_cmd = if self.equalize {
                let c = equalize_reference(&self.plant, u_ref, delta_ref, cfg, guess)?;
                *guess = c;
                c
            } else {
                *u_ref
            };
            motor_reference(&stiffness_compensation(&u_cmd, delta_ref, cfg), delta_ref)
        };

        let mut motors = MotorState::new(command(&s.initial, first_delta, &mut cmd_guess)?, 0.0);
        let mut u_prev = s.initial;
        let mut log = TrajectoryLog::default();
        for (k, p) in s.points.iter().enumerate() {
            let at = |e: Error| Error::AtStep { step: k, source: Box::new(e) };
            let eq = self.plant.equilibrium(&motors.theta, load, &u_prev).map_err(at)?;
            u_prev = eq.u;
            if let Some(r) = eq.statics_residual {
                log.max_statics_residual = log.max_statics_residual.max(r);
            }
            let measured = if s.noise_std > 0.0 {
                MinPose::new(eq.u.alpha_y + noise.sample(&mut rng), eq.u.alpha_z + noise.sample(&mut rng))
            } else {
                eq.u
            };
            log.samples.push(LogSample {
                t: p.t,
                u_ref: p.u_ref,
                u: measured,
                theta: motors.theta,
                delta: eq.deltas,
                tau: eq.torques,
                saturated: eq.saturated.iter().any(|&b| b),
            });
            log.w_ext.push(eq.w_ext);

            // command for the next interval
            let theta_ref = command(&p.u_ref, p.delta_ref, &mut cmd_guess).map_err(at)?;
            let inc = command_law(&theta_ref, &motors.theta, cfg.k_p);
            for i in 0..3 {
                motors.theta[i] = motor.step(motors.theta[i], motors.theta[i] + inc[i], p.dt);
            }
            let ps_inc = ps_command_law(0.0, motors.theta_ps, cfg.k_ps);
            motors.theta_ps = motor.step(motors.theta_ps, motors.theta_ps + ps_inc, p.dt);
        }
        Ok(log)
    }
}

/// Runs a scenario on the nominal plant.
pub fn run_scenario(s: &Scenario, cfg: &ControllerConfig) -> Result<TrajectoryLog> {
    Simulator::default().run(s, cfg)
}
