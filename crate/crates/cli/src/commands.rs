//! Subcommand bodies.

use std::path::{Path, PathBuf};

use clap::{ArgGroup, Args};
use nalgebra::{Matrix2, Vector2, Vector6};
use vswrist::analysis::{
    calibrate_compensation_degree, cartesian_compliance, compliance_ellipse, fit_compensation_polys_degree,
    fit_uj_correction, identify_from_runs, identify_stiffness, read_mocap_csv, register_bodies, BodyMap,
    CalibrationFile, StiffnessFit, UjFit,
};
use vswrist::geometry::transform_to_pose;
use vswrist::leg::{coupler_pose_from_minpose, leg_ik};
use vswrist::parallel::{reconstruct as reconstruct_encoders, SensedJoints};
use vswrist::plant::{ControllerConfig, Plant, PointLoad, ReferenceSample, Scenario, Simulator, TrajectoryLog};
use vswrist::ps::{corrected_posture, UjAngles, UjCorrection};
use vswrist::statics::{statics_at, StaticsSolver};
use vswrist::svg::{ellipse_plot, Figure};
use vswrist::transmission::{transmission_state, TransmissionParams};
use vswrist::{Leg, LegParams, MinPose, Pose};

use crate::io::{read_json, read_numeric_csv, read_text, write_output, CliError, CliResult, Table};
use crate::{ModelArgs, OutputArgs, PostureArgs};

pub const POSE_HEADER: [&str; 6] = ["alpha_x_rad", "alpha_y_rad", "alpha_z_rad", "x_mm", "y_mm", "z_mm"];
pub const ENCODER_HEADER: [&str; 3] = ["qA1_rad", "qB1_rad", "qC1_rad"];
pub const DRIFT_HEADER: [&str; 3] = ["delta_ref", "drift_y_rad", "drift_z_rad"];
pub const UJ_HEADER: [&str; 9] = [
    "delta_ref",
    "beta1_nom",
    "beta2_nom",
    "beta3_nom",
    "beta4_nom",
    "beta1_meas",
    "beta2_meas",
    "beta3_meas",
    "beta4_meas",
];
pub const IDENTIFY_INPUT_HEADER: [&str; 4] = ["dwy_Nmm", "dwz_Nmm", "duy_rad", "duz_rad"];
pub const IDENTIFY_HEADER: [&str; 8] = [
    "k_yy_Nmm_per_rad",
    "k_yz_Nmm_per_rad",
    "k_zy_Nmm_per_rad",
    "k_zz_Nmm_per_rad",
    "residual_rad",
    "residual_Nmm",
    "asymmetry",
    "magnitude_Nmm_per_rad",
];

pub const SCENARIO_HELP: &str = "Scenario JSON:
  {\"kind\": \"step\"|\"sine\"|\"circle\"|\"helix\", \"amplitude\": rad, \"period\": s (4),
   \"duration\": s, \"dt\": s (0.005), \"delta_ref\": rad (0), \"load\": {\"mass\": kg, \"offset\": mm} | null,
   \"noise_std\": rad (0), \"seed\": integer (0)}
The log CSV header is
  t_s,alpha_y_ref_rad,alpha_z_ref_rad,alpha_y_rad,alpha_z_rad,thetaA_rad,thetaB_rad,thetaC_rad,
  deltaA_rad,deltaB_rad,deltaC_rad,tauA_Nmm,tauB_Nmm,tauC_Nmm,sat_flag";

pub const REPLAY_HELP: &str = "Input CSV header: t,delta_ref,alpha_y_ref,alpha_z_ref
Times must increase strictly; the log has the same header as `simulate`.";

pub const RECONSTRUCT_HELP: &str = "Encoder CSV header: qA1_rad,qB1_rad,qC1_rad
Mocap CSV header: t_s,marker_id,x_mm,y_mm,z_mm
Body map JSON: {\"bodies\": {\"<body>\": {\"<marker_id>\": [x, y, z], ...}, ...}}";

pub const CALIBRATE_HELP: &str = "Drift CSV header: delta_ref,drift_y_rad,drift_z_rad
UJ CSV header: delta_ref,beta1_nom,beta2_nom,beta3_nom,beta4_nom,beta1_meas,beta2_meas,beta3_meas,beta4_meas
Without --drift the drift is measured on the simulated plant.";

pub const IDENTIFY_HELP: &str = "Input CSV header: dwy_Nmm,dwz_Nmm,duy_rad,duz_rad
Alternatively pass an unloaded and a loaded simulation log of the same commands.";

pub const ELLIPSE_HELP: &str = "Fit CSV header (as written by `identify`):
  k_yy_Nmm_per_rad,k_yz_Nmm_per_rad,k_zy_Nmm_per_rad,k_zz_Nmm_per_rad,residual_rad,residual_Nmm,asymmetry,magnitude_Nmm_per_rad";

const CALIBRATION_HINT: &str = "calibration JSON with fields version, comp_poly_y[5], comp_poly_z[5], \
compensation_residual, uj_correction {a[4], b[4]}, uj_residual and optional transmission";
const CONTROLLER_HINT: &str = "controller JSON with optional fields k_p, k_ps, delta_ref, comp_poly_y[5], \
comp_poly_z[5], rise_time, rate_limit";
const PLANT_HINT: &str = "plant JSON with optional fields transmission, k_scale[3], rest_offsets[3], gravity[3], \
workspace_bound";
const TRANSMISSION_HINT: &str = "transmission JSON with optional fields k, l0, d0, l_n, b, alpha0, r_p, r_g, l_t, \
joint_offset, o_m[2], o_t[2], o_p[2], gamma_bracket[2], max_deflection";

pub struct Context {
    pub config_dir: Option<PathBuf>,
}

impl Context {
    /// The explicit file, else `name` inside the configuration directory
    /// when it exists there.
    fn locate(&self, explicit: Option<&Path>, name: &str) -> Option<PathBuf> {
        if let Some(p) = explicit {
            return Some(p.to_path_buf());
        }
        let p = self.config_dir.as_ref()?.join(name);
        p.is_file().then_some(p)
    }

    fn calibration(&self, explicit: Option<&Path>) -> CliResult<Option<CalibrationFile>> {
        let Some(path) = self.locate(explicit, "calibration.json") else {
            return Ok(None);
        };
        let text = read_text(&path)?;
        let cal = CalibrationFile::from_json(&text)
            .map_err(|e| CliError::parse(format!("{}: {e}", path.display()), CALIBRATION_HINT))?;
        cal.validate()?;
        Ok(Some(cal))
    }

    fn plant(&self, explicit: Option<&Path>, cal: Option<&CalibrationFile>) -> CliResult<Plant> {
        let mut plant = match self.locate(explicit, "plant.json") {
            Some(p) => read_json(&p, PLANT_HINT)?,
            None => Plant::default(),
        };
        if let Some(t) = cal.and_then(|c| c.transmission) {
            plant.transmission = t;
        }
        plant.validate()?;
        Ok(plant)
    }

    fn model(&self, m: &ModelArgs) -> CliResult<(Simulator, ControllerConfig)> {
        let cal = self.calibration(m.calibration.as_deref())?;
        let mut cfg: ControllerConfig = match self.locate(m.controller.as_deref(), "controller.json") {
            Some(p) => read_json(&p, CONTROLLER_HINT)?,
            None => ControllerConfig::default(),
        };
        if let Some(c) = &cal {
            c.apply(&mut cfg);
        }
        cfg.validate()?;
        let plant = self.plant(m.plant.as_deref(), cal.as_ref())?;
        Ok((Simulator { plant, equalize: m.equalize }, cfg))
    }
}

fn minpose(p: &PostureArgs) -> MinPose {
    MinPose::new(p.alpha_y, p.alpha_z)
}

fn pose_row(p: &Pose) -> [f64; 6] {
    [p.alpha_x, p.alpha_y, p.alpha_z, p.x_e, p.y_e, p.z_e]
}

pub fn fk(p: &PostureArgs, out: Option<&Path>) -> CliResult<()> {
    let pose = coupler_pose_from_minpose(&minpose(p))?;
    let mut t = Table::new(&POSE_HEADER);
    t.numbers(&pose_row(&pose));
    write_output(out, &t.into_bytes())
}

pub fn ik(p: &PostureArgs, out: Option<&Path>) -> CliResult<()> {
    let u = minpose(p);
    let mut t = Table::new(&["leg", "q1_rad", "q2_rad", "q3_rad", "q4_rad"]);
    for leg in Leg::ALL {
        let q = leg_ik(&u, &LegParams::for_leg(leg))?.as_array();
        let mut row = vec![format!("{leg:?}")];
        row.extend(q.iter().map(|v| v.to_string()));
        t.row(row);
    }
    write_output(out, &t.into_bytes())
}

#[derive(Debug, Args)]
#[command(group(ArgGroup::new("source").required(true).args(["encoders", "input", "betas", "mocap"])))]
pub struct ReconstructArgs {
    /// First-joint encoder readings of legs A, B and C, rad.
    #[arg(long, value_parser = crate::floats::<3>, allow_hyphen_values = true)]
    encoders: Option<[f64; 3]>,
    /// CSV of encoder readings, one posture per row.
    #[arg(long, value_name = "FILE")]
    input: Option<PathBuf>,
    /// Measured UJ angles beta1..beta4, rad.
    #[arg(long, value_parser = crate::floats::<4>, allow_hyphen_values = true)]
    betas: Option<[f64; 4]>,
    /// Preload during the UJ measurement, rad.
    #[arg(long, default_value_t = 0.0)]
    delta_ref: f64,
    /// Calibration JSON supplying the UJ correction.
    #[arg(long, value_name = "FILE")]
    calibration: Option<PathBuf>,
    /// Long-form marker CSV.
    #[arg(long, value_name = "FILE", requires = "bodies")]
    mocap: Option<PathBuf>,
    /// Marker-to-body assignment JSON.
    #[arg(long, value_name = "FILE")]
    bodies: Option<PathBuf>,
    #[arg(long, value_name = "FILE")]
    out: Option<PathBuf>,
}

pub fn reconstruct(ctx: &Context, a: &ReconstructArgs) -> CliResult<()> {
    let bytes = if let Some(b) = &a.betas {
        let correction = ctx.calibration(a.calibration.as_deref())?.map_or(UjCorrection::IDENTITY, |c| c.uj_correction);
        let pose = corrected_posture(&UjAngles::from_array([b[0], b[1], b[2], b[3]]), a.delta_ref, &correction)?;
        let mut t = Table::new(&POSE_HEADER);
        t.numbers(&pose_row(&pose));
        t.into_bytes()
    } else if let (Some(m), Some(b)) = (&a.mocap, &a.bodies) {
        let records = read_mocap_csv(read_text(m)?.as_bytes())
            .map_err(|e| CliError::parse(format!("{}: {e}", m.display()), RECONSTRUCT_HELP))?;
        let map: BodyMap = read_json(b, RECONSTRUCT_HELP)?;
        let mut t = Table::new(&["t_s", "body", "alpha_x_rad", "alpha_y_rad", "alpha_z_rad", "x_mm", "y_mm", "z_mm", "rms_mm"]);
        for f in register_bodies(&records, &map)? {
            let pose = transform_to_pose(&f.fit.transform)?;
            let mut row = vec![f.t.to_string(), f.body.clone()];
            row.extend(pose_row(&pose).iter().chain([&f.fit.rms]).map(|v| v.to_string()));
            t.row(row);
        }
        t.into_bytes()
    } else {
        let readings: Vec<[f64; 3]> = match (&a.encoders, &a.input) {
            (Some(e), _) => vec![[e[0], e[1], e[2]]],
            (None, Some(p)) => read_numeric_csv(p, &ENCODER_HEADER, RECONSTRUCT_HELP)?
                .into_iter()
                .map(|r| [r[0], r[1], r[2]])
                .collect(),
            (None, None) => unreachable!("clap requires a source"),
        };
        let mut t = Table::new(&["alpha_y_rad", "alpha_z_rad", "legC_residual_rad"]);
        for r in readings {
            let (state, residual) = reconstruct_encoders(&SensedJoints::new(r[0], r[1], r[2]))?;
            t.numbers(&[state.pose.alpha_y, state.pose.alpha_z, residual]);
        }
        t.into_bytes()
    };
    write_output(a.out.as_deref(), &bytes)
}

pub fn statics(p: &PostureArgs, wrench: &[f64], lambda: f64, out: Option<&Path>) -> CliResult<()> {
    let solver = StaticsSolver::new(statics_at(&minpose(p))?)?;
    let w = Vector6::from_column_slice(wrench);
    let sol = solver.solve(&w, lambda)?;
    let sat = sol.saturated();
    let mut t = Table::new(&["leg", "tau_Nmm", "n0", "saturated"]);
    for leg in Leg::ALL {
        let i = leg.index();
        t.row([format!("{leg:?}"), sol.tau_a[i].to_string(), sol.n0[i].to_string(), u8::from(sat[i]).to_string()]);
    }
    write_output(out, &t.into_bytes())
}

pub fn transmission(
    ctx: &Context,
    params: Option<&Path>,
    from: f64,
    to: f64,
    steps: usize,
    output: &OutputArgs,
) -> CliResult<()> {
    let p: TransmissionParams = match params {
        Some(path) => read_json(path, TRANSMISSION_HINT)?,
        None => ctx.calibration(None)?.and_then(|c| c.transmission).unwrap_or_default(),
    };
    p.validate()?;
    let mut t = Table::new(&["delta_rad", "energy_Nmm", "torque_Nmm", "stiffness_Nmm_per_rad"]);
    let mut curve = Vec::with_capacity(steps + 1);
    for k in 0..=steps {
        let d = if steps == 0 { from } else { from + (to - from) * k as f64 / steps as f64 };
        let (e, tau, kk) = transmission_state(d, &p)?;
        t.numbers(&[d, e, tau, kk]);
        curve.push((d, tau));
    }
    write_output(output.out.as_deref(), &t.into_bytes())?;
    if let Some(svg) = &output.svg {
        let mut f = Figure::new("transmission", "delta (rad)", "torque (N mm)");
        f.free_aspect().polyline("torque", curve);
        write_output(Some(svg), f.render().as_bytes())?;
    }
    Ok(())
}

fn log_bytes(log: &TrajectoryLog) -> CliResult<Vec<u8>> {
    let mut buf = Vec::new();
    log.write_csv(&mut buf).map_err(|e| CliError::io(e.to_string()))?;
    Ok(buf)
}

fn log_plot(log: &TrajectoryLog) -> String {
    let mut f = Figure::new("posture", "alpha_y (rad)", "alpha_z (rad)");
    f.polyline("reference", log.samples.iter().map(|s| (s.u_ref.alpha_y, s.u_ref.alpha_z)).collect())
        .polyline("measured", log.samples.iter().map(|s| (s.u.alpha_y, s.u.alpha_z)).collect());
    f.render()
}

fn emit_log(log: &TrajectoryLog, output: &OutputArgs) -> CliResult<()> {
    write_output(output.out.as_deref(), &log_bytes(log)?)?;
    if let Some(svg) = &output.svg {
        write_output(Some(svg), log_plot(log).as_bytes())?;
    }
    Ok(())
}

pub fn simulate(ctx: &Context, scenario: &Path, model: &ModelArgs, output: &OutputArgs) -> CliResult<()> {
    let s: Scenario = read_json(scenario, SCENARIO_HELP)?;
    let (sim, cfg) = ctx.model(model)?;
    emit_log(&sim.run(&s, &cfg)?, output)
}

pub fn replay(
    ctx: &Context,
    input: &Path,
    load_mass: Option<f64>,
    load_offset: f64,
    model: &ModelArgs,
    output: &OutputArgs,
) -> CliResult<()> {
    let refs = ReferenceSample::read_csv(read_text(input)?.as_bytes())
        .map_err(|e| CliError::parse(format!("{}: {e}", input.display()), REPLAY_HELP))?;
    let (sim, cfg) = ctx.model(model)?;
    let load = load_mass.map(|mass| PointLoad { mass, offset: load_offset });
    emit_log(&sim.replay(&refs, load, &cfg)?, output)
}

#[derive(Debug, Args)]
pub struct CalibrateArgs {
    /// Calibration JSON to write.
    #[arg(long, value_name = "FILE")]
    out: Option<PathBuf>,
    /// Measured drift samples; without them the drift is simulated.
    #[arg(long, value_name = "FILE")]
    drift: Option<PathBuf>,
    /// UJ calibration samples.
    #[arg(long, value_name = "FILE")]
    uj: Option<PathBuf>,
    /// Plant JSON used when simulating the drift.
    #[arg(long, value_name = "FILE")]
    plant: Option<PathBuf>,
    /// Posture alpha_y,alpha_z at which the drift is simulated, rad.
    #[arg(long, value_parser = crate::floats::<2>, allow_hyphen_values = true, default_value = "0,0")]
    at: [f64; 2],
    /// Preload values at which the drift is simulated, rad.
    #[arg(long, value_delimiter = ',', default_values_t = [0.0, 0.1, 0.2, 0.3, 0.4, 0.5, 0.6])]
    deltas: Vec<f64>,
    /// Measure-and-fit rounds on the simulated plant.
    #[arg(long, default_value_t = 3)]
    rounds: usize,
    /// Override of the compensation polynomial degree (at most 4).
    #[arg(long, default_value_t = 4)]
    degree: usize,
    /// Transmission parameters stored in the file as overrides.
    #[arg(long, value_name = "FILE")]
    transmission: Option<PathBuf>,
}

pub fn calibrate(ctx: &Context, a: &CalibrateArgs) -> CliResult<()> {
    let transmission: Option<TransmissionParams> = match &a.transmission {
        Some(p) => Some(read_json(p, TRANSMISSION_HINT)?),
        None => None,
    };
    let comp = match &a.drift {
        Some(p) => {
            let rows = read_numeric_csv(p, &DRIFT_HEADER, CALIBRATE_HELP)?;
            let samples: Vec<_> = rows.iter().map(|r| (r[0], r[1], r[2])).collect();
            fit_compensation_polys_degree(&samples, a.degree)?
        }
        None => {
            let mut plant = ctx.plant(a.plant.as_deref(), None)?;
            if let Some(t) = transmission {
                plant.transmission = t;
            }
            let u = MinPose::new(a.at[0], a.at[1]);
            calibrate_compensation_degree(&plant, &u, &a.deltas, a.rounds, a.degree)?
        }
    };
    let uj = match &a.uj {
        Some(p) => {
            let rows = read_numeric_csv(p, &UJ_HEADER, CALIBRATE_HELP)?;
            let samples: Vec<_> =
                rows.iter().map(|r| (r[0], [r[1], r[2], r[3], r[4]], [r[5], r[6], r[7], r[8]])).collect();
            fit_uj_correction(&samples)?
        }
        None => UjFit { correction: UjCorrection::IDENTITY, residual: 0.0 },
    };
    let mut file = CalibrationFile::new(&comp, &uj);
    file.transmission = transmission;
    file.validate()?;
    let mut text = file.to_json();
    text.push('\n');
    write_output(a.out.as_deref(), text.as_bytes())
}

#[derive(Debug, Args)]
#[command(group(ArgGroup::new("source").required(true).args(["input", "unloaded"])))]
pub struct IdentifyArgs {
    /// Load and deflection pairs.
    #[arg(long, value_name = "FILE")]
    input: Option<PathBuf>,
    /// Unloaded simulation log.
    #[arg(long, value_name = "FILE", requires = "loaded")]
    unloaded: Option<PathBuf>,
    /// Loaded simulation log of the same commands.
    #[arg(long, value_name = "FILE")]
    loaded: Option<PathBuf>,
    /// Mass of the load in the loaded run, kg.
    #[arg(long, default_value_t = PointLoad::TEST_MASS.mass)]
    load_mass: f64,
    /// Offset of the load along the coupler axis, mm.
    #[arg(long, default_value_t = PointLoad::TEST_MASS.offset)]
    load_offset: f64,
    /// Plant JSON of the simulated runs.
    #[arg(long, value_name = "FILE")]
    plant: Option<PathBuf>,
    #[command(flatten)]
    output: OutputArgs,
}

fn read_log(path: &Path) -> CliResult<TrajectoryLog> {
    TrajectoryLog::read_csv(read_text(path)?.as_bytes())
        .map_err(|e| CliError::parse(format!("{}: {e}", path.display()), SCENARIO_HELP))
}

pub fn identify(ctx: &Context, a: &IdentifyArgs) -> CliResult<()> {
    let fit = match (&a.input, &a.unloaded, &a.loaded) {
        (Some(p), _, _) => {
            let rows = read_numeric_csv(p, &IDENTIFY_INPUT_HEADER, IDENTIFY_HELP)?;
            let dw: Vec<_> = rows.iter().map(|r| Vector2::new(r[0], r[1])).collect();
            let du: Vec<_> = rows.iter().map(|r| Vector2::new(r[2], r[3])).collect();
            identify_stiffness(&dw, &du)?
        }
        (None, Some(u), Some(l)) => {
            let plant = ctx.plant(a.plant.as_deref(), ctx.calibration(None)?.as_ref())?;
            let load = PointLoad { mass: a.load_mass, offset: a.load_offset };
            identify_from_runs(&plant, &read_log(u)?, &read_log(l)?, &load)?
        }
        _ => unreachable!("clap requires a source"),
    };
    let mut t = Table::new(&IDENTIFY_HEADER);
    t.numbers(&stiffness_row(&fit));
    write_output(a.output.out.as_deref(), &t.into_bytes())?;
    if let Some(svg) = &a.output.svg {
        write_output(Some(svg), ellipse_plot(&[("K_u", compliance_ellipse(&fit.k_u)?)]).as_bytes())?;
    }
    Ok(())
}

#[derive(Debug, Args)]
#[command(group(ArgGroup::new("source").required(true).multiple(true).args(["fits", "k"])))]
pub struct EllipseArgs {
    /// Identification result; one ellipse per file.
    #[arg(long = "fit", value_name = "FILE")]
    fits: Vec<PathBuf>,
    /// Stiffness matrix k_yy,k_yz,k_zy,k_zz in N·mm/rad.
    #[arg(long, value_parser = crate::floats::<4>, allow_hyphen_values = true)]
    k: Option<[f64; 4]>,
    /// Map compliance into Cartesian space at posture alpha_y,alpha_z.
    #[arg(long, value_parser = crate::floats::<2>, allow_hyphen_values = true)]
    at: Option<[f64; 2]>,
    #[command(flatten)]
    output: OutputArgs,
}

fn read_fit(path: &Path) -> CliResult<Matrix2<f64>> {
    let rows = read_numeric_csv(path, &IDENTIFY_HEADER, ELLIPSE_HELP)?;
    let r = rows.first().ok_or_else(|| CliError::parse(format!("{}: no rows", path.display()), ELLIPSE_HELP))?;
    Ok(Matrix2::new(r[0], r[1], r[2], r[3]))
}

pub fn ellipse(a: &EllipseArgs) -> CliResult<()> {
    let mut inputs: Vec<(String, Matrix2<f64>)> = Vec::new();
    for p in &a.fits {
        let label = p.file_stem().map_or_else(|| p.display().to_string(), |s| s.to_string_lossy().into_owned());
        inputs.push((label, read_fit(p)?));
    }
    if let Some(k) = &a.k {
        inputs.push(("k".into(), Matrix2::new(k[0], k[1], k[2], k[3])));
    }
    let bytes = if let Some(at) = &a.at {
        let u = MinPose::new(at[0], at[1]);
        let mut t = Table::new(&["label", "axis", "semi_axis_mm_per_Nmm", "dir_x", "dir_y", "dir_z"]);
        for (label, k) in &inputs {
            let c = cartesian_compliance(k, &u)?;
            for i in 0..3 {
                let d = c.directions.column(i);
                t.row([label.clone(), i.to_string(), c.semi_axes[i].to_string(), d.x.to_string(), d.y.to_string(), d.z.to_string()]);
            }
        }
        t.into_bytes()
    } else {
        let mut t = Table::new(&["label", "semi_major", "semi_minor", "major_dir_y", "major_dir_z", "area"]);
        for (label, k) in &inputs {
            let e = compliance_ellipse(k)?;
            let d = e.axis_directions.column(0);
            t.row([
                label.clone(),
                e.semi_axes[0].to_string(),
                e.semi_axes[1].to_string(),
                d.x.to_string(),
                d.y.to_string(),
                e.area().to_string(),
            ]);
        }
        t.into_bytes()
    };
    write_output(a.output.out.as_deref(), &bytes)?;
    if let Some(svg) = &a.output.svg {
        let ellipses = inputs
            .iter()
            .map(|(l, k)| compliance_ellipse(k).map(|e| (l.as_str(), e)))
            .collect::<vswrist::Result<Vec<_>>>()?;
        write_output(Some(svg), ellipse_plot(&ellipses).as_bytes())?;
    }
    Ok(())
}

fn stiffness_row(fit: &StiffnessFit) -> [f64; 8] {
    let k = fit.k_u;
    [k[(0, 0)], k[(0, 1)], k[(1, 0)], k[(1, 1)], fit.residual, fit.residual_nmm, fit.asymmetry, fit.magnitude()]
}
