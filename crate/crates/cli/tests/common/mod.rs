//! Helpers shared by the binary-level test targets.

#![allow(dead_code)]

use std::fs;
use std::path::PathBuf;
use std::process::{Command, Output};

pub fn manifest() -> PathBuf {
    PathBuf::from(env!("CARGO_MANIFEST_DIR"))
}

pub fn data(name: &str) -> String {
    manifest().join("tests/data").join(name).display().to_string()
}

pub fn vswrist(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_vswrist"))
        .args(args)
        .env_remove("VSWRIST_CONFIG_DIR")
        .output()
        .expect("binary runs")
}

pub fn ok(args: &[&str]) -> Vec<u8> {
    let out = vswrist(args);
    assert!(out.status.success(), "{args:?} failed: {}", String::from_utf8_lossy(&out.stderr));
    out.stdout
}

/// Compares against `tests/golden/<name>`, or rewrites the file when
/// `VSWRIST_BLESS` is set.
pub fn check_golden(name: &str, got: &[u8]) -> Result<(), String> {
    let path = manifest().join("tests/golden").join(name);
    if std::env::var_os("VSWRIST_BLESS").is_some() {
        fs::write(&path, got).map_err(|e| e.to_string())?;
        return Ok(());
    }
    let want = fs::read(&path).map_err(|e| format!("{}: {e} (set VSWRIST_BLESS=1 to create)", path.display()))?;
    if want == got {
        Ok(())
    } else {
        Err(format!(
            "{name} differs from golden file\n--- want\n{}\n--- got\n{}",
            String::from_utf8_lossy(&want),
            String::from_utf8_lossy(got)
        ))
    }
}

pub fn golden(name: &str, got: &[u8]) {
    if let Err(e) = check_golden(name, got) {
        panic!("{e}");
    }
}

/// One invocation per subcommand together with its golden file.
pub const GOLDEN_RUNS: &[(&str, &[&str])] = &[
    ("fk.csv", &["fk", "--alpha-y", "0.2", "--alpha-z", "0.4"]),
    ("ik.csv", &["ik", "--alpha-y", "-0.3", "--alpha-z", "0.25"]),
    ("reconstruct_encoders.csv", &["reconstruct", "--input", "@encoders.csv"]),
    ("reconstruct_betas.csv", &["reconstruct", "--betas", "0.1,-0.2,0.1,-0.2", "--delta-ref", "0.3"]),
    ("reconstruct_mocap.csv", &["reconstruct", "--mocap", "@mocap.csv", "--bodies", "@bodies.json"]),
    ("statics.csv", &["statics", "--alpha-y", "0.3", "--alpha-z", "0.1", "--wrench", "0,0,0,100,-40,0", "--lambda", "50"]),
    ("transmission.csv", &["transmission", "--steps", "12"]),
    ("simulate_circle.csv", &["simulate", "--scenario", "@circle.json"]),
    ("replay.csv", &["replay", "--input", "@replay.csv", "--load-mass", "0.64"]),
    ("calibrate_fit.json", &["calibrate", "--drift", "@drift.csv", "--uj", "@uj.csv"]),
    ("calibrate_quadratic.json", &["calibrate", "--drift", "@drift.csv", "--degree", "2"]),
    (
        "calibrate_simulated.json",
        &["calibrate", "--plant", "@asymmetric_plant.json", "--deltas", "0,0.15,0.3,0.45,0.6", "--rounds", "2"],
    ),
    ("identify.csv", &["identify", "--input", "@identify.csv"]),
    ("ellipse.csv", &["ellipse", "--fit", "@fit.csv", "--k", "2000,0,0,1500"]),
    ("ellipse_cartesian.csv", &["ellipse", "--fit", "@fit.csv", "--at", "0.1,-0.2"]),
];

/// Arguments with `@name` replaced by the path of a test data file.
pub fn resolve(args: &[&str]) -> Vec<String> {
    args.iter().map(|a| a.strip_prefix('@').map_or_else(|| a.to_string(), data)).collect()
}

pub fn run_golden(name: &str, args: &[&str]) -> Result<(), String> {
    let full = resolve(args);
    let refs: Vec<&str> = full.iter().map(String::as_str).collect();
    let out = vswrist(&refs);
    if !out.status.success() {
        return Err(format!("{args:?} exited with {:?}: {}", out.status.code(), String::from_utf8_lossy(&out.stderr)));
    }
    check_golden(name, &out.stdout)
}
