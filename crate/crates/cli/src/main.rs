//! `vswrist` command-line front end.

mod commands;
mod io;

use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};

#[derive(Debug, Parser)]
#[command(name = "vswrist", version, about = "Kinematics, statics and stiffness tools for the variable-stiffness wrist")]
struct Cli {
    /// Directory searched for calibration.json, controller.json and
    /// plant.json when no explicit file is given.
    #[arg(long, global = true, env = "VSWRIST_CONFIG_DIR", value_name = "DIR")]
    config: Option<PathBuf>,

    #[command(subcommand)]
    command: Command,
}

/// Posture in the minimum parametrization, rad.
#[derive(Debug, Clone, Copy, Args)]
pub struct PostureArgs {
    #[arg(long, allow_hyphen_values = true)]
    pub alpha_y: f64,
    #[arg(long, allow_hyphen_values = true)]
    pub alpha_z: f64,
}

/// Where results go. Without `--out` the CSV is printed.
#[derive(Debug, Clone, Args)]
pub struct OutputArgs {
    #[arg(long, value_name = "FILE")]
    pub out: Option<PathBuf>,
    /// Also write an SVG plot.
    #[arg(long, value_name = "FILE")]
    pub svg: Option<PathBuf>,
}

/// Model and controller files used by the simulating subcommands.
#[derive(Debug, Clone, Args)]
pub struct ModelArgs {
    /// Calibration JSON; its polynomials enter the controller.
    #[arg(long, value_name = "FILE")]
    pub calibration: Option<PathBuf>,
    /// Controller configuration JSON.
    #[arg(long, value_name = "FILE")]
    pub controller: Option<PathBuf>,
    /// Plant description JSON.
    #[arg(long, value_name = "FILE")]
    pub plant: Option<PathBuf>,
    /// Command the posture whose unloaded equilibrium equals the reference.
    #[arg(long)]
    pub equalize: bool,
}

#[derive(Debug, Subcommand)]
enum Command {
    /// Coupler pose for a posture.
    Fk {
        #[command(flatten)]
        posture: PostureArgs,
        #[arg(long, value_name = "FILE")]
        out: Option<PathBuf>,
    },
    /// Joint angles of all legs for a posture.
    Ik {
        #[command(flatten)]
        posture: PostureArgs,
        #[arg(long, value_name = "FILE")]
        out: Option<PathBuf>,
    },
    /// Posture from encoder readings, UJ angles or motion-capture markers.
    #[command(after_help = commands::RECONSTRUCT_HELP)]
    Reconstruct(commands::ReconstructArgs),
    /// Actuated torques balancing an end-effector wrench.
    Statics {
        #[command(flatten)]
        posture: PostureArgs,
        /// fx,fy,fz,mx,my,mz at the coupler centre in N and N·mm.
        #[arg(long, value_parser = floats::<6>, allow_hyphen_values = true, default_value = "0,0,0,0,0,0")]
        wrench: [f64; 6],
        /// Internal-torque level along N0, N·mm.
        #[arg(long, default_value_t = 0.0, allow_hyphen_values = true)]
        lambda: f64,
        #[arg(long, value_name = "FILE")]
        out: Option<PathBuf>,
    },
    /// Torque and stiffness curves of one elastic unit.
    Transmission {
        /// Transmission parameter JSON.
        #[arg(long, value_name = "FILE")]
        params: Option<PathBuf>,
        #[arg(long, default_value_t = -0.6, allow_hyphen_values = true)]
        from: f64,
        #[arg(long, default_value_t = 0.6, allow_hyphen_values = true)]
        to: f64,
        #[arg(long, default_value_t = 25)]
        steps: usize,
        #[command(flatten)]
        output: OutputArgs,
    },
    /// Runs a scenario through the controller and the quasi-static plant.
    #[command(after_help = commands::SCENARIO_HELP)]
    Simulate {
        #[arg(long, value_name = "FILE")]
        scenario: PathBuf,
        #[command(flatten)]
        model: ModelArgs,
        #[command(flatten)]
        output: OutputArgs,
    },
    /// Fits compensation polynomials and the UJ correction.
    #[command(after_help = commands::CALIBRATE_HELP)]
    Calibrate(commands::CalibrateArgs),
    /// Least-squares posture stiffness from load and deflection pairs.
    #[command(after_help = commands::IDENTIFY_HELP)]
    Identify(commands::IdentifyArgs),
    /// Compliance ellipses of identified stiffness matrices.
    #[command(after_help = commands::ELLIPSE_HELP)]
    Ellipse(commands::EllipseArgs),
    /// Replays a recorded reference and preload stream.
    #[command(after_help = commands::REPLAY_HELP)]
    Replay {
        #[arg(long, value_name = "FILE")]
        input: PathBuf,
        /// Point mass hung from the coupler, kg.
        #[arg(long)]
        load_mass: Option<f64>,
        /// Distance of the mass along the coupler axis, mm.
        #[arg(long, default_value_t = vswrist::plant::PointLoad::TEST_MASS.offset)]
        load_offset: f64,
        #[command(flatten)]
        model: ModelArgs,
        #[command(flatten)]
        output: OutputArgs,
    },
}

/// Parses exactly `N` comma-separated numbers.
pub fn floats<const N: usize>(s: &str) -> Result<[f64; N], String> {
    let v = s.split(',').map(|x| x.trim().parse::<f64>().map_err(|e| format!("`{x}`: {e}"))).collect::<Result<Vec<_>, _>>()?;
    v.try_into().map_err(|v: Vec<f64>| format!("expected {N} comma-separated values, got {}", v.len()))
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let ctx = commands::Context { config_dir: cli.config };
    let result = match cli.command {
        Command::Fk { posture, out } => commands::fk(&posture, out.as_deref()),
        Command::Ik { posture, out } => commands::ik(&posture, out.as_deref()),
        Command::Reconstruct(a) => commands::reconstruct(&ctx, &a),
        Command::Statics { posture, wrench, lambda, out } => commands::statics(&posture, &wrench, lambda, out.as_deref()),
        Command::Transmission { params, from, to, steps, output } => {
            commands::transmission(&ctx, params.as_deref(), from, to, steps, &output)
        }
        Command::Simulate { scenario, model, output } => commands::simulate(&ctx, &scenario, &model, &output),
        Command::Calibrate(a) => commands::calibrate(&ctx, &a),
        Command::Identify(a) => commands::identify(&ctx, &a),
        Command::Ellipse(a) => commands::ellipse(&a),
        Command::Replay { input, load_mass, load_offset, model, output } => {
            commands::replay(&ctx, &input, load_mass, load_offset, &model, &output)
        }
    };
    match result {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(e.exit_code() as u8)
        }
    }
}
