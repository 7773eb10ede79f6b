//! Calibration fits, stiffness identification, compliance ellipses and
//! motion-capture registration.

use std::collections::BTreeMap;
use std::f64::consts::PI;
use std::io;

use nalgebra::{DMatrix, DVector, Matrix2, Matrix3, Matrix3x2, Vector2, Vector3};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::geometry::{MinPose, Transform};
use crate::leg::coupler_distance;
use crate::linalg::svd;
use crate::plant::{motor_reference, stiffness_compensation, ControllerConfig, Plant, PointLoad, TrajectoryLog};
use crate::ps::UjCorrection;
use crate::transmission::TransmissionParams;

/// Smallest relative singular value accepted in the fits below.
const FIT_RANK_TOL: f64 = 1e-12;

/// Rigid transform taking reference marker coordinates onto observations.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct RigidFit {
    pub transform: Transform,
    /// RMS distance between transformed references and observations, mm.
    pub rms: f64,
}

fn centered(points: &[Vector3<f64>]) -> (Vector3<f64>, DMatrix<f64>) {
    let c = points.iter().sum::<Vector3<f64>>() / points.len() as f64;
    let mut m = DMatrix::zeros(3, points.len());
    for (i, p) in points.iter().enumerate() {
        m.set_column(i, &(p - c));
    }
    (c, m)
}

fn check_spread(m: &DMatrix<f64>, what: &str) -> Result<()> {
    let s = svd(m.clone()).singular_values;
    let mut s: Vec<f64> = s.iter().copied().collect();
    s.sort_by(|a, b| b.total_cmp(a));
    if !(s[0] > 0.0) || s[1] <= 1e-9 * s[0] {
        return Err(Error::DegenerateMarkerSet(format!("{what} markers are coincident or collinear")));
    }
    Ok(())
}

/// Least-squares rigid registration `obs ≈ R·ref + p` (Kabsch).
pub fn fit_frame_from_markers(reference: &[Vector3<f64>], observed: &[Vector3<f64>]) -> Result<RigidFit> {
    if reference.len() != observed.len() {
        return Err(Error::DegenerateMarkerSet(format!(
            "{} reference markers but {} observations",
            reference.len(),
            observed.len()
        )));
    }
    if reference.len() < 3 {
        return Err(Error::DegenerateMarkerSet(format!("{} markers, need at least 3", reference.len())));
    }
    let (cr, mr) = centered(reference);
    let (co, mo) = centered(observed);
    check_spread(&mr, "reference")?;
    check_spread(&mo, "observed")?;
    let h: Matrix3<f64> = (&mr * mo.transpose()).fixed_view::<3, 3>(0, 0).into_owned();
    let svd = h.svd(true, true);
    let u = svd.u.expect("U requested");
    let v = svd.v_t.expect("V requested").transpose();
    let d = (v * u.transpose()).determinant().signum();
    let r = v * Matrix3::from_diagonal(&Vector3::new(1.0, 1.0, d)) * u.transpose();
    let p = co - r * cr;
    let transform = Transform::new(r, p)?;
    let sq: f64 = reference
        .iter()
        .zip(observed)
        .map(|(a, b)| (transform.transform_point(a) - b).norm_squared())
        .sum();
    Ok(RigidFit { transform, rms: (sq / reference.len() as f64).sqrt() })
}

/// One row of a long-form motion-capture export.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MocapRecord {
    pub t_s: f64,
    pub marker_id: String,
    pub x_mm: f64,
    pub y_mm: f64,
    pub z_mm: f64,
}

impl MocapRecord {
    pub fn position(&self) -> Vector3<f64> {
        Vector3::new(self.x_mm, self.y_mm, self.z_mm)
    }
}

pub fn read_mocap_csv<R: io::Read>(r: R) -> std::result::Result<Vec<MocapRecord>, String> {
    csv::Reader::from_reader(r)
        .deserialize()
        .enumerate()
        .map(|(i, rec)| rec.map_err(|e| format!("mocap row {}: {e}", i + 1)))
        .collect()
}

/// Marker layout of each rigid body in its own frame, mm, keyed by body
/// name and then marker id.
#[derive(Debug, Clone, PartialEq, Default, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct BodyMap {
    pub bodies: BTreeMap<String, BTreeMap<String, [f64; 3]>>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct BodyFrame {
    pub t: f64,
    pub body: String,
    pub fit: RigidFit,
}

/// Registers every body of `map` in every capture frame. Records sharing a
/// timestamp form one frame; markers not listed in the map are ignored.
pub fn register_bodies(records: &[MocapRecord], map: &BodyMap) -> Result<Vec<BodyFrame>> {
    let mut frames: Vec<(f64, Vec<&MocapRecord>)> = Vec::new();
    for r in records {
        match frames.iter_mut().find(|(t, _)| *t == r.t_s) {
            Some((_, v)) => v.push(r),
            None => frames.push((r.t_s, vec![r])),
        }
    }
    let mut out = Vec::new();
    for (t, recs) in &frames {
        for (body, layout) in &map.bodies {
            let (reference, observed): (Vec<_>, Vec<_>) = recs
                .iter()
                .filter_map(|r| layout.get(&r.marker_id).map(|p| (Vector3::from(*p), r.position())))
                .unzip();
            let fit = fit_frame_from_markers(&reference, &observed).map_err(|e| match e {
                Error::DegenerateMarkerSet(m) => Error::DegenerateMarkerSet(format!("body {body} at t = {t}: {m}")),
                other => other,
            })?;
            out.push(BodyFrame { t: *t, body: body.clone(), fit });
        }
    }
    Ok(out)
}

fn distinct_count(xs: impl Iterator<Item = f64>) -> usize {
    let mut v: Vec<f64> = xs.collect();
    v.sort_by(f64::total_cmp);
    v.dedup();
    v.len()
}

/// Least-squares solution of `a x ≈ b`, or `RankDeficient`.
fn lstsq(a: &DMatrix<f64>, b: &DVector<f64>) -> Result<DVector<f64>> {
    let svd = svd(a.clone());
    let s = &svd.singular_values;
    let smax = s.max();
    if s.iter().any(|&x| !(x > FIT_RANK_TOL * smax)) {
        return Err(Error::RankDeficient("design matrix is rank deficient".into()));
    }
    svd.solve(b, 0.0).map_err(|e| Error::RankDeficient(e.into()))
}

fn rms(sq_sum: f64, n: usize) -> f64 {
    if n == 0 {
        0.0
    } else {
        (sq_sum / n as f64).sqrt()
    }
}

/// Quartic compensation polynomials with the residual of their fit.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct CompensationFit {
    pub comp_poly_y: [f64; 5],
    pub comp_poly_z: [f64; 5],
    /// RMS of the drift left unexplained by the quartic, rad.
    pub residual: f64,
}

/// Default degree of the compensation polynomials.
pub const COMPENSATION_DEGREE: usize = 4;

/// Fits degree-4 polynomials to drift samples `(δ_ref, drift_y, drift_z)`
/// and negates them, so adding the result to the reference cancels the
/// drift.
pub fn fit_compensation_polys(samples: &[(f64, f64, f64)]) -> Result<CompensationFit> {
    fit_compensation_polys_degree(samples, COMPENSATION_DEGREE)
}

/// As [`fit_compensation_polys`] with an explicit degree of at most 4;
/// unused high-order coefficients are zero.
pub fn fit_compensation_polys_degree(samples: &[(f64, f64, f64)], degree: usize) -> Result<CompensationFit> {
    if degree > COMPENSATION_DEGREE {
        return Err(Error::InvalidParameter(format!("compensation degree {degree} exceeds {COMPENSATION_DEGREE}")));
    }
    let m = degree + 1;
    let n = distinct_count(samples.iter().map(|s| s.0));
    if n < m {
        return Err(Error::RankDeficient(format!("{n} distinct preload values, need {m} for degree {degree}")));
    }
    let a = DMatrix::from_fn(samples.len(), m, |i, j| samples[i].0.powi(j as i32));
    let y = DVector::from_iterator(samples.len(), samples.iter().map(|s| s.1));
    let z = DVector::from_iterator(samples.len(), samples.iter().map(|s| s.2));
    let cy = lstsq(&a, &y)?;
    let cz = lstsq(&a, &z)?;
    let sq = (&a * &cy - y).norm_squared() + (&a * &cz - z).norm_squared();
    Ok(CompensationFit {
        comp_poly_y: std::array::from_fn(|j| if j < m { -cy[j] } else { 0.0 }),
        comp_poly_z: std::array::from_fn(|j| if j < m { -cz[j] } else { 0.0 }),
        residual: rms(sq, 2 * samples.len()),
    })
}

/// Posture error of the unloaded plant commanded to `u` with preload
/// `delta_ref` under `cfg`'s compensation.
pub fn measure_drift(plant: &Plant, u: &MinPose, delta_ref: f64, cfg: &ControllerConfig) -> Result<MinPose> {
    let theta = motor_reference(&stiffness_compensation(u, delta_ref, cfg), delta_ref)?;
    let eq = plant.equilibrium(&theta, None, u)?;
    Ok(MinPose::new(eq.u.alpha_y - u.alpha_y, eq.u.alpha_z - u.alpha_z))
}

/// Calibrates compensation at posture `u` by repeated measure-and-fit
/// rounds, each adding its correction to the previous polynomials. The
/// residual is the RMS drift still measured at `deltas` afterwards.
pub fn calibrate_compensation(plant: &Plant, u: &MinPose, deltas: &[f64], rounds: usize) -> Result<CompensationFit> {
    calibrate_compensation_degree(plant, u, deltas, rounds, COMPENSATION_DEGREE)
}

/// [`calibrate_compensation`] with polynomials of a chosen degree.
pub fn calibrate_compensation_degree(
    plant: &Plant,
    u: &MinPose,
    deltas: &[f64],
    rounds: usize,
    degree: usize,
) -> Result<CompensationFit> {
    let mut cfg = ControllerConfig::default();
    let measure = |cfg: &ControllerConfig| -> Result<Vec<(f64, f64, f64)>> {
        deltas
            .iter()
            .map(|&d| measure_drift(plant, u, d, cfg).map(|e| (d, e.alpha_y, e.alpha_z)))
            .collect()
    };
    for _ in 0..rounds {
        let fit = fit_compensation_polys_degree(&measure(&cfg)?, degree)?;
        for j in 0..5 {
            cfg.comp_poly_y[j] += fit.comp_poly_y[j];
            cfg.comp_poly_z[j] += fit.comp_poly_z[j];
        }
    }
    let left = measure(&cfg)?;
    let sq: f64 = left.iter().map(|s| s.1 * s.1 + s.2 * s.2).sum();
    Ok(CompensationFit { comp_poly_y: cfg.comp_poly_y, comp_poly_z: cfg.comp_poly_z, residual: rms(sq, left.len()) })
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct UjFit {
    pub correction: UjCorrection,
    /// RMS angle error of the corrected readings, rad.
    pub residual: f64,
}

/// UJ angle magnitude below which a sample carries no scale information.
const UJ_MIN_ANGLE: f64 = 1e-9;

/// Per-angle least squares of `β̂_i / β_i = a_i δ_ref + b_i` over samples
/// `(δ_ref, β_nominal, β_measured)`.
pub fn fit_uj_correction(samples: &[(f64, [f64; 4], [f64; 4])]) -> Result<UjFit> {
    let mut a = [0.0; 4];
    let mut b = [0.0; 4];
    for i in 0..4 {
        let rows: Vec<(f64, f64)> = samples
            .iter()
            .filter(|s| s.1[i].abs() > UJ_MIN_ANGLE)
            .map(|s| (s.0, s.2[i] / s.1[i]))
            .collect();
        if distinct_count(rows.iter().map(|r| r.0)) < 2 {
            return Err(Error::RankDeficient(format!(
                "UJ angle {} needs nonzero readings at two or more preload values",
                i + 1
            )));
        }
        let m = DMatrix::from_fn(rows.len(), 2, |r, c| if c == 0 { rows[r].0 } else { 1.0 });
        let y = DVector::from_iterator(rows.len(), rows.iter().map(|r| r.1));
        let x = lstsq(&m, &y)?;
        a[i] = x[0];
        b[i] = x[1];
    }
    let correction = UjCorrection::new(a, b)?;
    let mut sq = 0.0;
    let mut n = 0;
    for (d, nominal, measured) in samples {
        let k = correction.scale(*d);
        for i in 0..4 {
            sq += (measured[i] - k[i] * nominal[i]).powi(2);
            n += 1;
        }
    }
    Ok(UjFit { correction, residual: rms(sq, n) })
}

/// Stiffness in posture coordinates identified from load/deflection pairs.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct StiffnessFit {
    /// N·mm/rad
    pub k_u: Matrix2<f64>,
    /// RMS of `Δu − K_u⁻¹ Δw`, rad; infinite when `K_u` is singular.
    pub residual: f64,
    /// RMS of `Δw − K_u Δu`, N·mm.
    pub residual_nmm: f64,
    /// `‖K − Kᵀ‖ / ‖K + Kᵀ‖`.
    pub asymmetry: f64,
}

impl StiffnessFit {
    pub fn magnitude(&self) -> f64 {
        stiffness_magnitude(&self.k_u)
    }
}

/// `√|det K|`, the geometric mean of the principal stiffnesses.
pub fn stiffness_magnitude(k: &Matrix2<f64>) -> f64 {
    k.determinant().abs().sqrt()
}

/// Least-squares `K_u` minimizing `‖ΔW − K_u ΔU‖_F`.
pub fn identify_stiffness(delta_w: &[Vector2<f64>], delta_u: &[Vector2<f64>]) -> Result<StiffnessFit> {
    if delta_w.len() != delta_u.len() {
        return Err(Error::InvalidParameter(format!(
            "{} load samples but {} posture samples",
            delta_w.len(),
            delta_u.len()
        )));
    }
    let uu: Matrix2<f64> = delta_u.iter().map(|d| d * d.transpose()).sum();
    let wu: Matrix2<f64> = delta_w.iter().zip(delta_u).map(|(w, d)| w * d.transpose()).sum();
    let ev = uu.symmetric_eigenvalues();
    if delta_u.len() < 2 || !(ev.min() > FIT_RANK_TOL * ev.max()) {
        return Err(Error::RankDeficient("posture deflections do not span both axes".into()));
    }
    let k_u = wu * uu.try_inverse().ok_or_else(|| Error::RankDeficient("singular normal matrix".into()))?;
    let n = delta_u.len();
    let sq_w: f64 = delta_w.iter().zip(delta_u).map(|(w, d)| (w - k_u * d).norm_squared()).sum();
    let residual = match k_u.try_inverse() {
        Some(c) => rms(delta_w.iter().zip(delta_u).map(|(w, d)| (d - c * w).norm_squared()).sum(), n),
        None => f64::INFINITY,
    };
    let sym = (k_u + k_u.transpose()).norm();
    let asymmetry = if sym > 0.0 { (k_u - k_u.transpose()).norm() / sym } else { 0.0 };
    Ok(StiffnessFit { k_u, residual, residual_nmm: rms(sq_w, n), asymmetry })
}

/// Pairs an unloaded and a loaded run of the same commands and identifies
/// `K_u` from the posture change against the load's generalized force.
pub fn identify_from_runs(plant: &Plant, unloaded: &TrajectoryLog, loaded: &TrajectoryLog, load: &PointLoad) -> Result<StiffnessFit> {
    if unloaded.samples.len() != loaded.samples.len() {
        return Err(Error::InvalidParameter("runs have different lengths".into()));
    }
    let mut dw = Vec::with_capacity(loaded.samples.len());
    let mut du = Vec::with_capacity(loaded.samples.len());
    for (a, b) in unloaded.samples.iter().zip(&loaded.samples) {
        if a.t != b.t {
            return Err(Error::InvalidParameter(format!("sample times differ: {} vs {}", a.t, b.t)));
        }
        dw.push(plant.generalized_load(&b.u, load)?);
        du.push(Vector2::new(b.u.alpha_y - a.u.alpha_y, b.u.alpha_z - a.u.alpha_z));
    }
    identify_stiffness(&dw, &du)
}

/// Mean distance of the logged postures from neutral.
pub fn mean_radius(log: &TrajectoryLog) -> f64 {
    if log.samples.is_empty() {
        return 0.0;
    }
    log.samples.iter().map(|s| s.u.norm()).sum::<f64>() / log.samples.len() as f64
}

/// Image of the unit load circle under the compliance `K_u⁻¹`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ComplianceEllipse {
    /// rad/(N·mm), descending
    pub semi_axes: [f64; 2],
    /// Columns are the axis directions, a proper rotation.
    pub axis_directions: Matrix2<f64>,
}

impl ComplianceEllipse {
    pub fn area(&self) -> f64 {
        PI * self.semi_axes[0] * self.semi_axes[1]
    }
}

fn check_invertible(k: &Matrix2<f64>) -> Result<Matrix2<f64>> {
    let scale = k.norm();
    if !k.iter().all(|x| x.is_finite()) || !(k.determinant().abs() > FIT_RANK_TOL * scale * scale) {
        return Err(Error::SingularStiffness);
    }
    k.try_inverse().ok_or(Error::SingularStiffness)
}

/// Flips `v` so that its largest component is positive.
fn canonical_sign<const N: usize>(v: nalgebra::SVector<f64, N>) -> nalgebra::SVector<f64, N> {
    let i = v.iamax();
    if v[i] < 0.0 {
        -v
    } else {
        v
    }
}

pub fn compliance_ellipse(k_u: &Matrix2<f64>) -> Result<ComplianceEllipse> {
    let c = check_invertible(k_u)?;
    let svd = c.svd(true, false);
    let u = svd.u.expect("U requested");
    let s = svd.singular_values;
    let (i, j) = if s[0] >= s[1] { (0, 1) } else { (1, 0) };
    let d0 = canonical_sign(u.column(i).into_owned());
    let d1 = Vector2::new(-d0[1], d0[0]);
    Ok(ComplianceEllipse { semi_axes: [s[i], s[j]], axis_directions: Matrix2::from_columns(&[d0, d1]) })
}

/// `∂p/∂u` of the coupler centre, mm/rad. The coupler sits on the bisector
/// of the base x axis and the rotated x axis `v = R x̂`, whose expression
/// does not involve the dependent angle `α_x`.
pub fn coupler_position_jacobian(u: &MinPose) -> Matrix3x2<f64> {
    let (sy, cy) = u.alpha_y.sin_cos();
    let (sz, cz) = u.alpha_z.sin_cos();
    let v = Vector3::new(cy * cz, cy * sz, -sy);
    let s = Vector3::x() + v;
    let n = s.norm();
    let b = s / n;
    let proj = (Matrix3::identity() - b * b.transpose()) * (coupler_distance() / n);
    let dv_dy = Vector3::new(-sy * cz, -sy * sz, -cy);
    let dv_dz = Vector3::new(-cy * sz, cy * cz, 0.0);
    Matrix3x2::from_columns(&[proj * dv_dy, proj * dv_dz])
}

/// Compliance ellipse of the coupler centre in base coordinates. The third
/// semi-axis is zero: the coupler cannot move off its sphere.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct CartesianCompliance {
    /// mm/(N·mm), descending
    pub semi_axes: [f64; 3],
    /// Columns are the axis directions, a proper rotation.
    pub directions: Matrix3<f64>,
}

pub fn cartesian_compliance(k_u: &Matrix2<f64>, u: &MinPose) -> Result<CartesianCompliance> {
    let c = check_invertible(k_u)?;
    let m = coupler_position_jacobian(u) * c;
    let svd = m.svd(true, false);
    let uu = svd.u.expect("U requested");
    let s = svd.singular_values;
    let (i, j) = if s[0] >= s[1] { (0, 1) } else { (1, 0) };
    let d0 = canonical_sign(uu.column(i).into_owned());
    let d1 = canonical_sign(uu.column(j).into_owned());
    let d2 = d0.cross(&d1);
    Ok(CartesianCompliance { semi_axes: [s[i], s[j], 0.0], directions: Matrix3::from_columns(&[d0, d1, d2]) })
}

pub const CALIBRATION_VERSION: u32 = 1;

/// Calibration results as stored on disk.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct CalibrationFile {
    pub version: u32,
    pub comp_poly_y: [f64; 5],
    pub comp_poly_z: [f64; 5],
    pub compensation_residual: f64,
    pub uj_correction: UjCorrection,
    pub uj_residual: f64,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub transmission: Option<TransmissionParams>,
}

impl Default for CalibrationFile {
    fn default() -> Self {
        Self {
            version: CALIBRATION_VERSION,
            comp_poly_y: [0.0; 5],
            comp_poly_z: [0.0; 5],
            compensation_residual: 0.0,
            uj_correction: UjCorrection::IDENTITY,
            uj_residual: 0.0,
            transmission: None,
        }
    }
}

impl CalibrationFile {
    pub fn new(comp: &CompensationFit, uj: &UjFit) -> Self {
        Self {
            comp_poly_y: comp.comp_poly_y,
            comp_poly_z: comp.comp_poly_z,
            compensation_residual: comp.residual,
            uj_correction: uj.correction,
            uj_residual: uj.residual,
            ..Self::default()
        }
    }

    pub fn validate(&self) -> Result<()> {
        if self.version != CALIBRATION_VERSION {
            return Err(Error::InvalidParameter(format!(
                "calibration version {} not supported (expected {CALIBRATION_VERSION})",
                self.version
            )));
        }
        if !(self.compensation_residual >= 0.0 && self.uj_residual >= 0.0) {
            return Err(Error::InvalidParameter("calibration residuals must be finite and non-negative".into()));
        }
        UjCorrection::new(self.uj_correction.a, self.uj_correction.b)?;
        if let Some(t) = &self.transmission {
            t.validate()?;
        }
        Ok(())
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("calibration serializes")
    }

    pub fn from_json(s: &str) -> std::result::Result<Self, serde_json::Error> {
        serde_json::from_str(s)
    }

    /// Copies the compensation polynomials into a controller configuration.
    pub fn apply(&self, cfg: &mut ControllerConfig) {
        cfg.comp_poly_y = self.comp_poly_y;
        cfg.comp_poly_z = self.comp_poly_z;
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::leg::coupler_pose_from_minpose;

    fn rot(a: f64) -> Matrix2<f64> {
        Matrix2::new(a.cos(), -a.sin(), a.sin(), a.cos())
    }

    #[test]
    fn registration_identity_and_known_transform() {
        let refs = vec![
            Vector3::new(0.0, 0.0, 0.0),
            Vector3::new(30.0, 0.0, 0.0),
            Vector3::new(0.0, 20.0, 0.0),
            Vector3::new(5.0, 5.0, 12.0),
        ];
        let f = fit_frame_from_markers(&refs, &refs).unwrap();
        assert!(f.transform.max_abs_diff(&Transform::identity()) < 1e-12);
        assert!(f.rms < 1e-12);

        let t = Transform::rot_z(0.4) * Transform::rot_x(-1.1) * Transform::from_translation(Vector3::new(3.0, -8.0, 100.0));
        let obs: Vec<_> = refs.iter().map(|p| t.transform_point(p)).collect();
        let f = fit_frame_from_markers(&refs, &obs).unwrap();
        assert!(f.transform.max_abs_diff(&t) < 1e-10);
    }

    #[test]
    fn registration_rejects_degenerate_sets() {
        let two = [Vector3::zeros(), Vector3::x()];
        assert!(matches!(fit_frame_from_markers(&two, &two), Err(Error::DegenerateMarkerSet(_))));
        let line = [Vector3::zeros(), Vector3::x(), Vector3::x() * 2.0];
        assert!(matches!(fit_frame_from_markers(&line, &line), Err(Error::DegenerateMarkerSet(_))));
    }

    #[test]
    fn quartic_drift_recovered() {
        let py = [0.001, -0.02, 0.05, 0.3, -0.4];
        let pz = [0.0, 0.01, 0.0, -0.07, 0.2];
        let samples: Vec<_> = (0..13)
            .map(|i| {
                let d = 0.05 * i as f64;
                (d, crate::plant::eval_poly(&py, d), crate::plant::eval_poly(&pz, d))
            })
            .collect();
        let fit = fit_compensation_polys(&samples).unwrap();
        for j in 0..5 {
            assert!((fit.comp_poly_y[j] + py[j]).abs() < 1e-9);
            assert!((fit.comp_poly_z[j] + pz[j]).abs() < 1e-9);
        }
        assert!(fit.residual < 1e-12);
    }

    #[test]
    fn compensation_needs_five_abscissae() {
        let s: Vec<_> = [0.0, 0.1, 0.2, 0.3, 0.3, 0.0].iter().map(|&d| (d, 0.0, 0.0)).collect();
        assert!(matches!(fit_compensation_polys(&s), Err(Error::RankDeficient(_))));
        let s: Vec<_> = (0..6).map(|i| (0.1 * i as f64, 0.0, 0.0)).collect();
        let fit = fit_compensation_polys(&s).unwrap();
        assert!(fit.comp_poly_y.iter().chain(&fit.comp_poly_z).all(|c| c.abs() < 1e-15));
    }

    #[test]
    fn uj_identity_fit() {
        let s: Vec<_> = [0.0, 0.3, 0.6]
            .iter()
            .map(|&d| (d, [0.1, -0.2, 0.3, 0.05], [0.1, -0.2, 0.3, 0.05]))
            .collect();
        let fit = fit_uj_correction(&s).unwrap();
        for i in 0..4 {
            assert!(fit.correction.a[i].abs() < 1e-12);
            assert!((fit.correction.b[i] - 1.0).abs() < 1e-12);
        }
        let one: Vec<_> = s.iter().take(1).cloned().collect();
        assert!(matches!(fit_uj_correction(&one), Err(Error::RankDeficient(_))));
    }

    #[test]
    fn stiffness_exact_and_collinear() {
        let k = Matrix2::new(300.0, 40.0, 40.0, 150.0);
        let du: Vec<_> = (0..10).map(|i| Vector2::new((i as f64).cos(), (1.7 * i as f64).sin()) * 0.1).collect();
        let dw: Vec<_> = du.iter().map(|d| k * d).collect();
        let fit = identify_stiffness(&dw, &du).unwrap();
        assert!((fit.k_u - k).norm() < 1e-9);
        assert!(fit.residual < 1e-12);
        let line = [Vector2::new(0.1, 0.2), Vector2::new(0.2, 0.4)];
        assert!(matches!(identify_stiffness(&line, &line), Err(Error::RankDeficient(_))));
    }

    #[test]
    fn ellipse_diagonal_and_rotated() {
        let e = compliance_ellipse(&Matrix2::new(100.0, 0.0, 0.0, 400.0)).unwrap();
        assert!((e.semi_axes[0] - 0.01).abs() < 1e-15 && (e.semi_axes[1] - 0.0025).abs() < 1e-15);
        assert!((e.axis_directions.column(0).x.abs() - 1.0).abs() < 1e-12);
        let k = Matrix2::new(100.0, 20.0, 20.0, 400.0);
        let r = rot(0.7);
        let a = compliance_ellipse(&k).unwrap();
        let b = compliance_ellipse(&(r * k * r.transpose())).unwrap();
        for i in 0..2 {
            assert!((a.semi_axes[i] - b.semi_axes[i]).abs() < 1e-15);
            let rotated = r * a.axis_directions.column(i);
            assert!((rotated.dot(&b.axis_directions.column(i)).abs() - 1.0).abs() < 1e-12);
        }
        assert!(matches!(compliance_ellipse(&Matrix2::new(1.0, 2.0, 2.0, 4.0)), Err(Error::SingularStiffness)));
    }

    #[test]
    fn position_jacobian_matches_differences() {
        let h = 1e-6;
        for u in [MinPose::NEUTRAL, MinPose::new(0.3, -0.5), MinPose::new(-0.8, 0.6)] {
            let p = |a: f64, b: f64| coupler_pose_from_minpose(&MinPose::new(a, b)).unwrap().position();
            let fd = Matrix3x2::from_columns(&[
                (p(u.alpha_y + h, u.alpha_z) - p(u.alpha_y - h, u.alpha_z)) / (2.0 * h),
                (p(u.alpha_y, u.alpha_z + h) - p(u.alpha_y, u.alpha_z - h)) / (2.0 * h),
            ]);
            assert!((coupler_position_jacobian(&u) - fd).norm() < 1e-6, "{u:?}");
        }
    }

    #[test]
    fn cartesian_compliance_is_flat() {
        let c = cartesian_compliance(&Matrix2::new(200.0, 0.0, 0.0, 100.0), &MinPose::new(0.2, 0.1)).unwrap();
        assert!(c.semi_axes[0] >= c.semi_axes[1] && c.semi_axes[1] > 0.0);
        let normal = coupler_pose_from_minpose(&MinPose::new(0.2, 0.1)).unwrap().position().normalize();
        assert!(c.directions.column(2).dot(&normal).abs() > 1.0 - 1e-9);
    }

    #[test]
    fn calibration_file_round_trip() {
        let mut f = CalibrationFile::default();
        f.comp_poly_y = [0.1, 1.0 / 3.0, -2e-17, 0.0, 7.0];
        f.uj_correction = UjCorrection::PROTOTYPE;
        f.transmission = Some(TransmissionParams::default());
        let back = CalibrationFile::from_json(&f.to_json()).unwrap();
        assert_eq!(back, f);
        back.validate().unwrap();
        f.version = 99;
        assert!(f.validate().is_err());
    }
}
