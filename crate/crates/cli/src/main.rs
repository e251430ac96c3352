mod commands;
mod config;
mod output;

use std::process::ExitCode;

use clap::Parser;
use hotspots::Error;

use config::{resolve, Cli, Resolved};
use output::sha256_hex;

const EXIT_FAIL: u8 = 1;
const EXIT_INPUT: u8 = 2;
const EXIT_NUMERICAL: u8 = 3;

/// Hash of the resolved configuration; the output directory is left out so
/// the same run in two places hashes identically.
fn config_hash(r: &Resolved) -> String {
    let mut v = serde_json::to_value(r).expect("config serializes");
    if let Some(m) = v.as_object_mut() {
        m.remove("output_dir");
    }
    sha256_hex(v.to_string().as_bytes())
}

fn init_workers() -> Result<(), String> {
    let Ok(s) = std::env::var("HOTSPOTS_WORKERS") else {
        return Ok(());
    };
    let n: usize = s.trim().parse().map_err(|_| format!("HOTSPOTS_WORKERS must be a positive integer, got {s:?}"))?;
    if n == 0 {
        return Err("HOTSPOTS_WORKERS must be positive".into());
    }
    rayon::ThreadPoolBuilder::new().num_threads(n).build_global().map_err(|e| e.to_string())
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    if let Err(e) = init_workers() {
        eprintln!("error: {e}");
        return ExitCode::from(EXIT_INPUT);
    }
    let (command, common) = cli.command.split();
    let resolved = match resolve(command, common) {
        Ok(r) => r,
        Err(e) => {
            eprintln!("error: {e}");
            return ExitCode::from(EXIT_INPUT);
        }
    };
    let outcome = match commands::run(&resolved) {
        Ok(o) => o,
        Err(e) => {
            eprintln!("error: {e}");
            let code = match e {
                Error::NonConvergence { .. } => EXIT_NUMERICAL,
                _ => EXIT_INPUT,
            };
            return ExitCode::from(code);
        }
    };
    let code = if outcome.pass { 0 } else { EXIT_FAIL };
    let hash = config_hash(&resolved);
    if let Err(e) = outcome.artifacts.commit(&resolved.output_dir, command.as_str(), &hash, code as i32) {
        eprintln!("error: writing {}: {e}", resolved.output_dir.display());
        return ExitCode::from(EXIT_INPUT);
    }
    for name in outcome.artifacts.names() {
        println!("{}", resolved.output_dir.join(name).display());
    }
    println!("{}", resolved.output_dir.join("manifest.json").display());
    if code != 0 {
        eprintln!("verification failed");
    }
    ExitCode::from(code)
}
