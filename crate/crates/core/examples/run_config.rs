//! Drives the command-line front end from code: writes a JSON run
//! configuration and runs `simulate` and `check` on it.

use nonholo::cli::{run, RunConfig};

fn main() -> nonholo::Result<()> {
    let dir = std::env::temp_dir().join("nonholo-run-config-example");
    std::fs::create_dir_all(&dir)?;
    let config = dir.join("veselova.json");
    std::fs::write(
        &config,
        r#"{
  "model": {"kind": "veselova", "ahat": [0.6, 0.75, 0.9], "k": [0.0, 0.0, 0.1]},
  "initial": {"omega": [0.7, -0.2, 0.4], "gamma": [0.0, 0.0, 2.0]},
  "integrator": {"horizon": 20.0, "samples": 201},
  "seed": 7
}"#,
    )?;
    let parsed = RunConfig::load(&config)?;
    println!("loaded model {:?}", parsed.model.kind());

    let out = dir.to_string_lossy().into_owned();
    let cfg = config.to_string_lossy().into_owned();
    let code = run(["nonholo", "simulate", "--config", &cfg, "--out-dir", &out]);
    println!("simulate exited with {code}; files in {out}");
    let code = run(["nonholo", "check", "conformal", "--model", "veselova", "-n", "100"]);
    println!("check exited with {code}");
    Ok(())
}
