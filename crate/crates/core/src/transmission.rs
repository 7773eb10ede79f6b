//! Antagonistic nonlinear elastic transmission between a motor and the
//! first joint of a leg.
//!
//! A lever rotated by `γ` stretches a linear spring through a nonlinear
//! linkage. The lever carries the mobile pulley that routes the tendon from
//! the motor pulley to the joint pulley, so tendon-length conservation ties
//! `γ` to the deflection `δ = q1 − θ_m`. Two such branches act against each
//! other; the left one is the exact mirror of the right one, `γ_l(δ) = γ_r(−δ)`.
//!
//! The geometry of the prototype is not published. [`TransmissionParams::default`]
//! is a consistent set with a stiffening characteristic that keeps the output
//! torque below the actuator limit at `|δ| = 0.6`.

use std::f64::consts::PI;
use std::num::NonZeroUsize;
use std::sync::LazyLock;

use gauss_quad::GaussLegendre;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::root::find_root;

/// Target accuracy of the lever-angle solve, rad.
pub const GAMMA_TOL: f64 = 1e-12;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct TransmissionParams {
    /// Spring rate, N/mm.
    pub k: f64,
    /// Spring free length, mm.
    pub l0: f64,
    /// Spring length at `γ = 0`, mm.
    pub d0: f64,
    /// Horizontal lever arm, mm.
    pub l_n: f64,
    /// Oblique lever arm carrying the mobile pulley, mm.
    pub b: f64,
    /// Angle between the oblique and the horizontal arm, rad.
    pub alpha0: f64,
    /// Motor and joint pulley radius, mm.
    pub r_p: f64,
    /// Mobile pulley radius, mm.
    pub r_g: f64,
    /// Tendon length, mm.
    pub l_t: f64,
    /// Angular offset of the tendon attachment on the joint pulley, rad.
    pub joint_offset: f64,
    pub o_m: [f64; 2],
    pub o_t: [f64; 2],
    pub o_p: [f64; 2],
    /// Lever travel on which `δ(γ)` is solved; must be monotone there.
    pub gamma_bracket: [f64; 2],
    /// Largest accepted `|δ|`, rad.
    pub max_deflection: f64,
}

/// Lever angle at rest used by the default parameter set.
pub const DEFAULT_REST_GAMMA: f64 = 0.58;

impl Default for TransmissionParams {
    fn default() -> Self {
        let mut p = Self {
            k: 8.5,
            l0: 20.0,
            d0: 17.0,
            l_n: 24.0,
            b: 18.0,
            alpha0: 70.56_f64.to_radians(),
            r_p: 9.3,
            r_g: 4.8,
            l_t: 0.0,
            joint_offset: 157.5_f64.to_radians(),
            o_m: [-26.6, -16.6],
            o_t: [0.0, 0.0],
            o_p: [-18.3, 21.1],
            gamma_bracket: [0.15, 1.05],
            max_deflection: 0.7,
        };
        p.l_t = p.tendon_length_for_rest(DEFAULT_REST_GAMMA).expect("default geometry is valid");
        p
    }
}

impl TransmissionParams {
    /// Tendon length that puts the rest state (`δ = 0`) at lever angle `gamma`.
    pub fn tendon_length_for_rest(&self, gamma: f64) -> Result<f64> {
        let w = self.winding(Jet::var(gamma))?;
        Ok(-(w.without_tendon.v))
    }

    /// Copy with `L_t` chosen so that the rest state sits at `gamma`.
    pub fn with_rest_gamma(mut self, gamma: f64) -> Result<Self> {
        self.l_t = self.tendon_length_for_rest(gamma)?;
        Ok(self)
    }

    pub fn validate(&self) -> Result<()> {
        let positive = [
            ("k", self.k),
            ("l0", self.l0),
            ("d0", self.d0),
            ("l_n", self.l_n),
            ("b", self.b),
            ("r_p", self.r_p),
            ("r_g", self.r_g),
            ("l_t", self.l_t),
            ("max_deflection", self.max_deflection),
        ];
        for (name, v) in positive {
            if !(v > 0.0) || !v.is_finite() {
                return Err(Error::InvalidParameter(format!("{name} must be positive, got {v}")));
            }
        }
        if self.r_p <= self.r_g {
            return Err(Error::InvalidParameter(format!(
                "joint pulley radius {} must exceed mobile pulley radius {}",
                self.r_p, self.r_g
            )));
        }
        let [lo, hi] = self.gamma_bracket;
        if !(lo < hi) {
            return Err(Error::InvalidParameter("empty lever bracket".into()));
        }
        // tendons cannot push: the spring must stay stretched
        let shortest = spring_length(lo, self);
        if shortest < self.l0 {
            return Err(Error::GeometryViolation(format!(
                "spring length {shortest:.4} mm below free length {} mm at gamma = {lo}",
                self.l0
            )));
        }
        const SAMPLES: usize = 64;
        let mut prev = f64::NEG_INFINITY;
        for i in 0..=SAMPLES {
            let g = lo + (hi - lo) * i as f64 / SAMPLES as f64;
            let j = self.delta_jet(g)?;
            if !(j.d > 0.0) || j.v <= prev {
                return Err(Error::GeometryViolation(format!(
                    "deflection is not monotone in the lever angle near gamma = {g:.4}"
                )));
            }
            prev = j.v;
        }
        Ok(())
    }

    /// Deflection of the right branch and its first two derivatives in `γ`.
    fn delta_jet(&self, gamma: f64) -> Result<Jet> {
        let w = self.winding(Jet::var(gamma))?;
        Ok((w.without_tendon + self.l_t) * (1.0 / self.r_p))
    }

    fn winding(&self, gamma: Jet) -> Result<Winding> {
        let dr = self.r_p - self.r_g;
        let arm_angle = gamma + self.alpha0;
        let arm = [arm_angle.cos() * self.b, arm_angle.sin() * self.b];
        let side = |centre: [f64; 2], name: &str| -> Result<(Jet, Jet)> {
            let vx = arm[0] + (self.o_t[0] - centre[0]);
            let vy = arm[1] + (self.o_t[1] - centre[1]);
            let n2 = vx * vx + vy * vy;
            let tangent2 = n2 - dr * dr;
            if !(tangent2.v > 0.0) {
                return Err(Error::GeometryViolation(format!(
                    "mobile pulley inside the {name} pulley clearance at gamma = {}",
                    gamma.v
                )));
            }
            let n = n2.sqrt();
            let seg = tangent2.sqrt();
            let beta = (seg / n).asin() - (vx / n).acos();
            Ok((seg, beta))
        };
        let (bc, beta_l) = side(self.o_m, "motor")?;
        let (de, beta_u) = side(self.o_p, "joint")?;
        let without_tendon = (beta_l.abs() + beta_u) * dr - bc - de - self.r_p * (PI + self.joint_offset);
        Ok(Winding { bc, de, beta_l, beta_u, without_tendon })
    }
}

/// Winding geometry of one branch at a lever angle.
struct Winding {
    bc: Jet,
    de: Jet,
    beta_l: Jet,
    beta_u: Jet,
    /// `R_p δ − L_t`, the congruence with the tendon length left out.
    without_tendon: Jet,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Side {
    Right,
    Left,
}

impl Side {
    fn sign(self) -> f64 {
        match self {
            Side::Right => 1.0,
            Side::Left => -1.0,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct BranchState {
    pub gamma: f64,
    pub delta: f64,
    pub side: Side,
}

/// Spring length at lever angle `gamma`, mm.
pub fn spring_length(gamma: f64, p: &TransmissionParams) -> f64 {
    spring_length_jet(Jet::constant(gamma), p).v
}

fn spring_length_jet(gamma: Jet, p: &TransmissionParams) -> Jet {
    let x = gamma.sin() * p.l_n + p.d0;
    let y = (gamma.cos() * -1.0 + 1.0) * p.l_n;
    (x * x + y * y).sqrt()
}

/// Elastic energy of one spring, N·mm.
pub fn spring_energy(gamma: f64, p: &TransmissionParams) -> f64 {
    spring_energy_jet(Jet::constant(gamma), p).v
}

fn spring_energy_jet(gamma: Jet, p: &TransmissionParams) -> Jet {
    let stretch = spring_length_jet(gamma, p) - p.l0;
    stretch * stretch * (0.5 * p.k)
}

/// Deflection at which the given branch sits at lever angle `gamma`.
pub fn congruence_delta(gamma: f64, side: Side, p: &TransmissionParams) -> Result<f64> {
    Ok(side.sign() * p.delta_jet(gamma)?.v)
}

/// `∂δ/∂γ` of a branch, analytic.
pub fn congruence_slope(gamma: f64, side: Side, p: &TransmissionParams) -> Result<f64> {
    Ok(side.sign() * p.delta_jet(gamma)?.d)
}

/// Total tendon length of a branch, summed over its five segments: motor
/// pulley winding, free span BC, mobile pulley winding, free span DE and
/// joint pulley winding.
pub fn tendon_length(gamma: f64, q1: f64, theta_m: f64, p: &TransmissionParams) -> Result<f64> {
    let w = p.winding(Jet::constant(gamma))?;
    let beta_m = PI - theta_m - w.beta_l.v.abs();
    let beta_g = w.beta_l.v.abs() + w.beta_u.v;
    let beta_p = q1 + p.joint_offset - w.beta_u.v;
    Ok(p.r_p * beta_m + w.bc.v + p.r_g * beta_g + w.de.v + p.r_p * beta_p)
}

/// Tendon length of a solved branch state, taking `θ_m = 0`.
pub fn branch_tendon_length(s: &BranchState, p: &TransmissionParams) -> Result<f64> {
    tendon_length(s.gamma, s.side.sign() * s.delta, 0.0, p)
}

fn check_range(delta: f64, p: &TransmissionParams) -> Result<()> {
    if delta.abs() > p.max_deflection || !delta.is_finite() {
        return Err(Error::OutOfRange { value: delta, limit: p.max_deflection });
    }
    Ok(())
}

/// Lever angle of a branch at deflection `delta`.
pub fn solve_gamma(delta: f64, side: Side, p: &TransmissionParams) -> Result<f64> {
    check_range(delta, p)?;
    let target = side.sign() * delta;
    let [lo, hi] = p.gamma_bracket;
    let residual = |g: f64| p.delta_jet(g).map(|j| j.v - target).unwrap_or(f64::NAN);
    let gamma = find_root(residual, lo, hi, GAMMA_TOL).map_err(|e| match e {
        Error::InvalidParameter(_) => Error::OutOfRange {
            value: delta,
            limit: congruence_delta(if target > 0.0 { hi } else { lo }, Side::Right, p)
                .map(f64::abs)
                .unwrap_or(0.0),
        },
        other => other,
    })?;
    // one Newton step removes the bracketing noise in the last bits
    let j = p.delta_jet(gamma)?;
    let polished = gamma - (j.v - target) / j.d;
    Ok(if (polished - gamma).abs() < 1e-10 { polished } else { gamma })
}

pub fn branch_state(delta: f64, side: Side, p: &TransmissionParams) -> Result<BranchState> {
    Ok(BranchState { gamma: solve_gamma(delta, side, p)?, delta, side })
}

/// Torque of the right branch on the joint and its derivative in `δ`.
fn right_branch(delta: f64, p: &TransmissionParams) -> Result<(f64, f64)> {
    let gamma = solve_gamma(delta, Side::Right, p)?;
    let dj = p.delta_jet(gamma)?;
    let uj = spring_energy_jet(Jet::var(gamma), p);
    let tau = -uj.d / dj.d;
    let dtau_dgamma = -(uj.dd * dj.d - uj.d * dj.dd) / (dj.d * dj.d);
    Ok((tau, dtau_dgamma / dj.d))
}

/// Total elastic energy of both springs at deflection `delta`, N·mm.
pub fn transmission_energy(delta: f64, p: &TransmissionParams) -> Result<f64> {
    let gr = solve_gamma(delta, Side::Right, p)?;
    let gl = solve_gamma(delta, Side::Left, p)?;
    Ok(spring_energy(gr, p) + spring_energy(gl, p))
}

/// Quadrature nodes for [`stored_energy`]; the torque is analytic over the
/// range, so this order already reaches roundoff.
static QUADRATURE: LazyLock<GaussLegendre> = LazyLock::new(|| GaussLegendre::new(NonZeroUsize::new(12).unwrap()));

/// Energy stored by deflecting from `δ = 0` to `delta`, `−∫τ dδ`, N·mm.
///
/// Equals `transmission_energy(delta) − transmission_energy(0)` but is
/// smooth down to roundoff. The branch sum is not: each pre-tensioned
/// spring is so sensitive to its lever angle that one ulp of `γ` shows up
/// as ~1e-12 N·mm of jitter, which swamps finite differences of the total.
pub fn stored_energy(delta: f64, p: &TransmissionParams) -> Result<f64> {
    check_range(delta, p)?;
    let mut err = None;
    let w = QUADRATURE.integrate(0.0, delta, |x| {
        output_torque(x, p).unwrap_or_else(|e| {
            err.get_or_insert(e);
            0.0
        })
    });
    match err {
        Some(e) => Err(e),
        None => Ok(-w),
    }
}

/// Net torque the transmission exerts on the joint, `−∂U/∂δ`, N·mm.
pub fn output_torque(delta: f64, p: &TransmissionParams) -> Result<f64> {
    check_range(delta, p)?;
    let (tr, _) = right_branch(delta, p)?;
    let (tl, _) = right_branch(-delta, p)?;
    Ok(tr - tl)
}

/// `K = −∂τ/∂δ`, N·mm/rad.
pub fn transmission_stiffness(delta: f64, p: &TransmissionParams) -> Result<f64> {
    check_range(delta, p)?;
    let (_, kr) = right_branch(delta, p)?;
    let (_, kl) = right_branch(-delta, p)?;
    Ok(-(kr + kl))
}

/// Energy, torque and stiffness in one pass.
pub fn transmission_state(delta: f64, p: &TransmissionParams) -> Result<(f64, f64, f64)> {
    check_range(delta, p)?;
    let gr = solve_gamma(delta, Side::Right, p)?;
    let gl = solve_gamma(-delta, Side::Right, p)?;
    let (tr, kr) = right_branch(delta, p)?;
    let (tl, kl) = right_branch(-delta, p)?;
    Ok((spring_energy(gr, p) + spring_energy(gl, p), tr - tl, -(kr + kl)))
}

/// Value with first and second derivative with respect to one variable.
#[derive(Debug, Clone, Copy, PartialEq)]
struct Jet {
    v: f64,
    d: f64,
    dd: f64,
}

impl Jet {
    fn var(x: f64) -> Self {
        Self { v: x, d: 1.0, dd: 0.0 }
    }

    fn constant(x: f64) -> Self {
        Self { v: x, d: 0.0, dd: 0.0 }
    }

    /// `g(self)` given `g`, `g'` and `g''` at `self.v`.
    fn chain(self, g: f64, g1: f64, g2: f64) -> Self {
        Self { v: g, d: g1 * self.d, dd: g2 * self.d * self.d + g1 * self.dd }
    }

    fn sin(self) -> Self {
        let (s, c) = self.v.sin_cos();
        self.chain(s, c, -s)
    }

    fn cos(self) -> Self {
        let (s, c) = self.v.sin_cos();
        self.chain(c, -s, -c)
    }

    fn sqrt(self) -> Self {
        let r = self.v.sqrt();
        self.chain(r, 0.5 / r, -0.25 / (r * self.v))
    }

    fn asin(self) -> Self {
        let w = 1.0 - self.v * self.v;
        self.chain(self.v.asin(), 1.0 / w.sqrt(), self.v / (w * w.sqrt()))
    }

    fn acos(self) -> Self {
        let w = 1.0 - self.v * self.v;
        self.chain(self.v.acos(), -1.0 / w.sqrt(), -self.v / (w * w.sqrt()))
    }

    fn abs(self) -> Self {
        if self.v < 0.0 {
            self * -1.0
        } else {
            self
        }
    }
}

impl std::ops::Add for Jet {
    type Output = Jet;
    fn add(self, o: Jet) -> Jet {
        Jet { v: self.v + o.v, d: self.d + o.d, dd: self.dd + o.dd }
    }
}

impl std::ops::Sub for Jet {
    type Output = Jet;
    fn sub(self, o: Jet) -> Jet {
        Jet { v: self.v - o.v, d: self.d - o.d, dd: self.dd - o.dd }
    }
}

impl std::ops::Mul for Jet {
    type Output = Jet;
    fn mul(self, o: Jet) -> Jet {
        Jet {
            v: self.v * o.v,
            d: self.d * o.v + self.v * o.d,
            dd: self.dd * o.v + 2.0 * self.d * o.d + self.v * o.dd,
        }
    }
}

impl std::ops::Div for Jet {
    type Output = Jet;
    fn div(self, o: Jet) -> Jet {
        let inv = o.chain(1.0 / o.v, -1.0 / (o.v * o.v), 2.0 / (o.v * o.v * o.v));
        self * inv
    }
}

impl std::ops::Add<f64> for Jet {
    type Output = Jet;
    fn add(self, c: f64) -> Jet {
        Jet { v: self.v + c, ..self }
    }
}

impl std::ops::Sub<f64> for Jet {
    type Output = Jet;
    fn sub(self, c: f64) -> Jet {
        Jet { v: self.v - c, ..self }
    }
}

impl std::ops::Mul<f64> for Jet {
    type Output = Jet;
    fn mul(self, c: f64) -> Jet {
        Jet { v: self.v * c, d: self.d * c, dd: self.dd * c }
    }
}
