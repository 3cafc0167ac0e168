//! Command-line front end: configuration, worker pool, artifacts and exit
//! codes (`0` all holds, `1` configuration or input error, `2` violation,
//! always with `reproducer.json`).

mod commands;
mod config;

use std::ffi::OsString;
use std::fs;
use std::path::{Path, PathBuf};

use clap::{Args, Parser};
use serde_json::json;

use crate::error::{Error, Result};
use crate::filtration::{AlgebraModel, ModelKind};
use crate::martingale::IncrementLaw;

pub use commands::Outcome;
pub use config::{CommandKind, RunConfig, SourceKind};

pub const EXIT_OK: i32 = 0;
pub const EXIT_CONFIG: i32 = 1;
pub const EXIT_VIOLATION: i32 = 2;

#[derive(Debug, Parser)]
#[command(name = "nclil", version, about = "Noncommutative martingale inequalities and LIL experiments")]
struct Cli {
    #[arg(value_enum)]
    command: CommandKind,
    #[command(flatten)]
    flags: Overrides,
}

/// Flags override the corresponding config fields.
#[derive(Debug, Default, Args)]
struct Overrides {
    /// JSON run configuration.
    #[arg(long)]
    config: Option<PathBuf>,
    #[arg(long)]
    seed: Option<u64>,
    #[arg(long)]
    replicas: Option<usize>,
    /// Output directory.
    #[arg(long)]
    out: Option<PathBuf>,
    /// Worker threads (default: available parallelism).
    #[arg(long)]
    threads: Option<usize>,
    #[arg(long, value_enum)]
    model: Option<ModelKindArg>,
    /// Site dimension.
    #[arg(long)]
    m: Option<usize>,
    /// Filtration depth.
    #[arg(long)]
    n: Option<usize>,
    #[arg(long, value_enum)]
    source: Option<SourceKind>,
    #[arg(long)]
    p: Option<f64>,
    #[arg(long)]
    samples: Option<usize>,
    #[arg(long)]
    grid_points: Option<usize>,
    #[arg(long)]
    paths: Option<usize>,
    #[arg(long)]
    horizon: Option<usize>,
    #[arg(long, value_enum)]
    law: Option<LawArg>,
    #[arg(long)]
    eta: Option<f64>,
    #[arg(long)]
    delta: Option<f64>,
    #[arg(long)]
    delta_prime: Option<f64>,
    #[arg(long)]
    eps: Option<f64>,
    #[arg(long)]
    eps_proj: Option<f64>,
    #[arg(long)]
    allow_pre_asymptotic: bool,
    #[arg(long)]
    size: Option<usize>,
    #[arg(long)]
    steps: Option<usize>,
}

#[derive(Clone, Copy, Debug, clap::ValueEnum)]
enum ModelKindArg {
    Tensor,
    Pinching,
    Diagonal,
}

#[derive(Clone, Copy, Debug, clap::ValueEnum)]
enum LawArg {
    Rademacher,
    Uniform,
}

impl Overrides {
    fn apply(&self, mut cfg: RunConfig) -> Result<RunConfig> {
        if self.model.is_some() || self.m.is_some() || self.n.is_some() {
            let kind = match self.model {
                Some(ModelKindArg::Tensor) => ModelKind::Tensor,
                Some(ModelKindArg::Pinching) => ModelKind::Pinching,
                Some(ModelKindArg::Diagonal) => ModelKind::Diagonal,
                None => cfg.model.kind(),
            };
            cfg.model = AlgebraModel::new(
                kind,
                self.m.unwrap_or(cfg.model.site_dim()),
                self.n.unwrap_or(cfg.model.depth()),
            )?;
        }
        macro_rules! set {
            ($($flag:ident => $field:expr),* $(,)?) => {
                $(if let Some(v) = self.$flag { $field = v.into(); })*
            };
        }
        set!(seed => cfg.seed, samples => cfg.samples, grid_points => cfg.grid_points, size => cfg.size,
             steps => cfg.steps, delta => cfg.lil.delta, delta_prime => cfg.lil.delta_prime,
             eps => cfg.lil.eps, eps_proj => cfg.lil.eps_proj);
        if let Some(v) = self.replicas {
            cfg.replicas = Some(v);
        }
        if let Some(v) = self.threads {
            cfg.threads = Some(v);
        }
        if let Some(v) = &self.out {
            cfg.output = v.clone();
        }
        if let Some(v) = self.source {
            cfg.source = Some(v);
        }
        if let Some(v) = self.p {
            cfg.p = Some(v);
        }
        if let Some(v) = self.paths {
            cfg.paths = Some(v);
        }
        if let Some(v) = self.horizon {
            cfg.horizon = Some(v);
        }
        if let Some(v) = self.law {
            cfg.law = match v {
                LawArg::Rademacher => IncrementLaw::Rademacher,
                LawArg::Uniform => IncrementLaw::Uniform,
            };
        }
        if let Some(v) = self.eta {
            cfg.lil.eta = crate::martingale::Eta::new(v)?;
        }
        cfg.allow_pre_asymptotic |= self.allow_pre_asymptotic;
        Ok(cfg)
    }
}

fn write_json(dir: &Path, name: &str, value: &impl serde::Serialize) -> Result<()> {
    fs::write(dir.join(name), serde_json::to_vec_pretty(value)?)?;
    Ok(())
}

/// Runs a resolved configuration and writes its artifacts; returns the
/// exit code.
pub fn execute(cfg: &RunConfig) -> Result<i32> {
    let dir = &cfg.output;
    fs::create_dir_all(dir)?;
    write_json(dir, "resolved-config.json", cfg)?;
    let mut pool = rayon::ThreadPoolBuilder::new();
    if let Some(t) = cfg.threads {
        pool = pool.num_threads(t);
    }
    let pool = pool
        .build()
        .map_err(|e| Error::Io(std::io::Error::other(e.to_string())))?;
    let outcome = pool.install(|| commands::run(cfg))?;
    write_json(dir, "summary.json", &outcome.summary)?;
    if !outcome.rows.is_empty() {
        crate::tail::write_rows(&outcome.rows, fs::File::create(dir.join("trials.csv"))?)?;
    }
    for (name, bytes) in &outcome.artifacts {
        fs::write(dir.join(name), bytes)?;
    }
    let violations = outcome.violations();
    if violations.is_empty() {
        return Ok(EXIT_OK);
    }
    write_json(
        dir,
        "reproducer.json",
        &json!({ "config": cfg, "violations": violations }),
    )?;
    Ok(EXIT_VIOLATION)
}

/// Parses `args` (including the program name) and runs; never panics on bad
/// input.
pub fn main_with_args<I, T>(args: I) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(c) => c,
        Err(e) => {
            let code = if e.use_stderr() { EXIT_CONFIG } else { EXIT_OK };
            let _ = e.print();
            return code;
        }
    };
    let resolved = (|| {
        let base = match &cli.flags.config {
            Some(path) => {
                let cfg = RunConfig::from_json_file(path)?;
                if cfg.command != cli.command {
                    return Err(Error::Parameter {
                        name: "command",
                        reason: format!("config is for {}, invoked {}", cfg.command.name(), cli.command.name()),
                    });
                }
                cfg
            }
            None => RunConfig::new(cli.command),
        };
        cli.flags.apply(base)?.resolve()
    })();
    let cfg = match resolved {
        Ok(c) => c,
        Err(e) => {
            eprintln!("nclil: configuration error: {e}");
            return EXIT_CONFIG;
        }
    };
    match execute(&cfg) {
        Ok(code) => {
            if code == EXIT_VIOLATION {
                eprintln!(
                    "nclil: {} found violations; reproducer in {}",
                    cfg.command.name(),
                    cfg.output.join("reproducer.json").display()
                );
            }
            code
        }
        Err(e) => {
            eprintln!("nclil: {e}");
            EXIT_CONFIG
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn p_below_four_is_config_error() {
        let dir = tempfile::tempdir().unwrap();
        let out = dir.path().to_str().unwrap();
        assert_eq!(main_with_args(["nclil", "verify-doob", "--p", "3", "--out", out]), EXIT_CONFIG);
        assert!(!dir.path().join("summary.json").exists());
    }

    #[test]
    fn convergence_gate_is_config_error() {
        let dir = tempfile::tempdir().unwrap();
        let out = dir.path().to_str().unwrap();
        let code = main_with_args(["nclil", "lil-run", "--eps", "0.5", "--out", out]);
        assert_eq!(code, EXIT_CONFIG);
    }

    #[test]
    fn unknown_flag_is_config_error() {
        assert_eq!(main_with_args(["nclil", "verify-ce", "--bogus", "1"]), EXIT_CONFIG);
        assert_eq!(main_with_args(["nclil", "no-such-command"]), EXIT_CONFIG);
    }

    #[test]
    fn defaults_resolve_per_command() {
        let lil = RunConfig::new(CommandKind::LilRun).resolve().unwrap();
        assert_eq!(lil.source, Some(SourceKind::Sampled));
        assert_eq!((lil.paths, lil.horizon, lil.replicas), (Some(4096), Some(1_000_000), Some(1)));
        let doob = RunConfig::new(CommandKind::VerifyDoob).resolve().unwrap();
        assert_eq!(doob.p, Some(4.0));
        let json = serde_json::to_string(&doob).unwrap();
        let back: RunConfig = serde_json::from_str(&json).unwrap();
        assert_eq!(back, doob);
        assert!(serde_json::from_str::<RunConfig>(r#"{"command":"verify-ce","bogus":1}"#).is_err());
    }
}
