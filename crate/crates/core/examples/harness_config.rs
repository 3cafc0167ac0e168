//! Drives the command-line harness from a JSON configuration, as the
//! `nclil` binary does.

use nclil::harness::{execute, CommandKind, RunConfig};

fn main() -> nclil::Result<()> {
    let dir = std::env::temp_dir().join("nclil-example");
    let mut cfg = RunConfig::new(CommandKind::VerifyExpineq);
    cfg.replicas = Some(4);
    cfg.output = dir.clone();
    let cfg = cfg.resolve()?;
    println!("{}", serde_json::to_string_pretty(&cfg)?);
    let code = execute(&cfg)?;
    println!("exit code {code}; artifacts in {}", dir.display());
    println!("{}", std::fs::read_to_string(dir.join("summary.json"))?);
    Ok(())
}
