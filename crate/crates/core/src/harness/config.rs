use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::filtration::AlgebraModel;
use crate::lil::{BaselineLaw, LilParameters};
use crate::martingale::{BoundSequence, Coupling, GeneratorSpec, IncrementLaw};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize, clap::ValueEnum)]
#[serde(rename_all = "kebab-case")]
pub enum CommandKind {
    VerifyCe,
    VerifyExpineq,
    VerifyDoob,
    VerifyDualdoob,
    VerifyChebyshev,
    VerifyScalarineq,
    LilRun,
    BaselineScalar,
    DemoSemicircular,
}

impl CommandKind {
    pub fn name(self) -> &'static str {
        match self {
            CommandKind::VerifyCe => "verify-ce",
            CommandKind::VerifyExpineq => "verify-expineq",
            CommandKind::VerifyDoob => "verify-doob",
            CommandKind::VerifyDualdoob => "verify-dualdoob",
            CommandKind::VerifyChebyshev => "verify-chebyshev",
            CommandKind::VerifyScalarineq => "verify-scalarineq",
            CommandKind::LilRun => "lil-run",
            CommandKind::BaselineScalar => "baseline-scalar",
            CommandKind::DemoSemicircular => "demo-semicircular",
        }
    }
}

/// Where martingales come from: dense model + generator, or streamed
/// classical paths.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize, clap::ValueEnum)]
#[serde(rename_all = "lowercase")]
pub enum SourceKind {
    Dense,
    Sampled,
}

/// One JSON document per run. Optional fields take command-specific
/// defaults at resolution; the resolved form has every field set.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RunConfig {
    pub command: CommandKind,
    #[serde(default = "default_model")]
    pub model: AlgebraModel,
    #[serde(default = "default_generator")]
    pub generator: GeneratorSpec,
    #[serde(default)]
    pub source: Option<SourceKind>,
    #[serde(default)]
    pub seed: u64,
    #[serde(default)]
    pub replicas: Option<usize>,
    /// Exponent for the Doob, dual Doob and Chebyshev verifiers.
    #[serde(default)]
    pub p: Option<f64>,
    #[serde(default = "default_eps_grid")]
    pub eps_grid: Vec<f64>,
    /// Points per λ or t grid.
    #[serde(default = "default_grid_points")]
    pub grid_points: usize,
    /// Samples per conditional-expectation run.
    #[serde(default = "default_samples")]
    pub samples: usize,
    #[serde(default)]
    pub paths: Option<usize>,
    #[serde(default)]
    pub horizon: Option<usize>,
    #[serde(default)]
    pub law: IncrementLaw,
    #[serde(default)]
    pub baseline_law: BaselineLaw,
    #[serde(default = "default_lil")]
    pub lil: LilParameters,
    #[serde(default)]
    pub allow_pre_asymptotic: bool,
    /// GUE matrix size and step count.
    #[serde(default = "default_size")]
    pub size: usize,
    #[serde(default = "default_steps")]
    pub steps: usize,
    #[serde(default = "default_output")]
    pub output: PathBuf,
    /// Worker threads; `None` = available parallelism.
    #[serde(default)]
    pub threads: Option<usize>,
}

fn default_model() -> AlgebraModel {
    AlgebraModel::tensor(2, 4).expect("16-dimensional model")
}

fn default_generator() -> GeneratorSpec {
    GeneratorSpec::new(BoundSequence::Constant(1.0), Coupling::Haar)
}

fn default_eps_grid() -> Vec<f64> {
    vec![0.1, 0.5, 1.0]
}

fn default_grid_points() -> usize {
    20
}

fn default_samples() -> usize {
    100
}

fn default_lil() -> LilParameters {
    LilParameters::new(1.5, 0.1, 0.1, 0.1).expect("gate exponent 1.1")
}

fn default_size() -> usize {
    200
}

fn default_steps() -> usize {
    10_000
}

fn default_output() -> PathBuf {
    PathBuf::from("nclil-out")
}

impl RunConfig {
    /// Defaults for `command` alone.
    pub fn new(command: CommandKind) -> Self {
        RunConfig {
            command,
            model: default_model(),
            generator: default_generator(),
            source: None,
            seed: 0,
            replicas: None,
            p: None,
            eps_grid: default_eps_grid(),
            grid_points: default_grid_points(),
            samples: default_samples(),
            paths: None,
            horizon: None,
            law: IncrementLaw::default(),
            baseline_law: BaselineLaw::default(),
            lil: default_lil(),
            allow_pre_asymptotic: false,
            size: default_size(),
            steps: default_steps(),
            output: default_output(),
            threads: None,
        }
    }

    pub fn from_json_file(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path)?;
        Ok(serde_json::from_str(&text)?)
    }

    /// Fills command defaults, then validates everything that can be
    /// checked before computing.
    pub fn resolve(mut self) -> Result<Self> {
        use CommandKind::*;
        let c = self.command;
        self.source.get_or_insert(if c == LilRun { SourceKind::Sampled } else { SourceKind::Dense });
        self.replicas.get_or_insert(match c {
            LilRun | BaselineScalar | DemoSemicircular | VerifyScalarineq => 1,
            _ => 20,
        });
        if let Some(p) = match c {
            VerifyDoob | VerifyChebyshev => Some(4.0),
            VerifyDualdoob => Some(1.5),
            _ => None,
        } {
            self.p.get_or_insert(p);
        }
        let sampled = self.source == Some(SourceKind::Sampled);
        match c {
            LilRun | BaselineScalar => {
                self.paths.get_or_insert(4096);
                self.horizon.get_or_insert(1_000_000);
            }
            VerifyExpineq if sampled => {
                self.paths.get_or_insert(1024);
                self.horizon.get_or_insert(10_000);
            }
            _ => {}
        }
        self.validate()?;
        Ok(self)
    }

    fn validate(&self) -> Result<()> {
        use CommandKind::*;
        if self.replicas == Some(0) {
            return Err(Error::param("replicas", "must be at least 1"));
        }
        if self.threads == Some(0) {
            return Err(Error::param("threads", "must be at least 1"));
        }
        if self.grid_points == 0 {
            return Err(Error::param("grid_points", "must be at least 1"));
        }
        if let Some(p) = self.p {
            let ok = match self.command {
                VerifyDoob => p >= 4.0,
                VerifyDualdoob => (1.0..=2.0).contains(&p),
                VerifyChebyshev => p >= 2.0 && p.is_finite(),
                _ => true,
            };
            if !ok {
                let need = match self.command {
                    VerifyDoob => "p >= 4 (asymmetric Doob range)",
                    VerifyDualdoob => "p in [1, 2]",
                    _ => "p in [2, inf)",
                };
                return Err(Error::param("p", format!("{p}: need {need}")));
            }
        }
        if self.command == VerifyExpineq && self.eps_grid.iter().any(|e| !(*e > 0.0 && *e <= 1.0)) {
            return Err(Error::param("eps_grid", "entries must lie in (0, 1]"));
        }
        if self.command == LilRun {
            self.lil.validate()?;
        }
        if self.command == DemoSemicircular && self.size < crate::lil::SEMICIRCLE_MIN_SIZE {
            return Err(Error::param("size", format!("{} < {}", self.size, crate::lil::SEMICIRCLE_MIN_SIZE)));
        }
        Ok(())
    }
}
