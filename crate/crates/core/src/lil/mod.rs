//! Numerical re-execution of the η-adic block argument behind the LIL upper
//! bound, plus the classical baseline and the semicircular counterexample.
//!
//! Per block `(k_n, k_{n+1}]` the engine measures two column tail
//! probabilities:
//!
//! * *direct*: `sup_m ||x_m / (s_m u_m)|| > β(1+δ')`, the event that matters;
//! * *rescaled*: `sup_m ||x_m / (s(k_{n+1}) u(k_{n+1}))|| > β(1+δ)`, the event
//!   the block bound controls. The reduction inequality makes the first
//!   event smaller than the second once `n > N_1`.
//!
//! The global projection is the intersection of the direct block
//! projections over the tail window; its deficit is at most the sum of the
//! block deficits.

mod baseline;
mod dense;
mod limsup;
mod sampled;
mod semicircle;

use std::io::Write;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::filtration::AlgebraModel;
use crate::operator::{Interval, Operator, Projection};
use crate::martingale::{Eta, GeneratorSpec, PathStats, SampledSpec, StoppingIndices};
use crate::tail::{block_tail_bound, BlockBound, BlockParams, RealizedBlock};

pub use baseline::{scalar_kolmogorov_baseline, BaselineConfig, BaselineLaw, BaselineReport};
pub use limsup::{empirical_au_limsup, quantile_cutoff, AuLimsup};
pub use semicircle::{MIN_SIZE as SEMICIRCLE_MIN_SIZE, semicircle_cdf, semicircular_demo, SemicircularConfig, SemicircularPoint, SemicircularReport};

fn default_eps_prime() -> f64 {
    0.05
}

fn default_beta() -> f64 {
    2.0
}

fn default_eps_proj() -> f64 {
    0.05
}

/// Parameters of the block argument.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct LilParameters {
    pub eta: Eta,
    pub delta: f64,
    pub delta_prime: f64,
    pub eps: f64,
    #[serde(default = "default_eps_prime")]
    pub eps_prime: f64,
    #[serde(default = "default_beta")]
    pub beta: f64,
    /// Target trace deficit of the global projection.
    #[serde(default = "default_eps_proj")]
    pub eps_proj: f64,
}

impl LilParameters {
    pub fn new(eta: f64, delta: f64, delta_prime: f64, eps: f64) -> Result<Self> {
        let p = LilParameters {
            eta: Eta::new(eta)?,
            delta,
            delta_prime,
            eps,
            eps_prime: default_eps_prime(),
            beta: default_beta(),
            eps_proj: default_eps_proj(),
        };
        p.validate()?;
        Ok(p)
    }

    pub fn block_params(&self) -> BlockParams {
        BlockParams {
            eta: self.eta,
            delta: self.delta,
            eps: self.eps,
            beta: self.beta,
        }
    }

    /// Domain checks and the series convergence gate `c' > 1`.
    pub fn validate(&self) -> Result<()> {
        self.block_params().validate()?;
        if !(self.delta_prime > 0.0) {
            return Err(Error::param("delta_prime", format!("{} <= 0", self.delta_prime)));
        }
        if !(self.eps_prime > 0.0 && self.eps_prime < 1.0) {
            return Err(Error::param("eps_prime", format!("{} outside (0, 1)", self.eps_prime)));
        }
        if !(self.eps_proj > 0.0 && self.eps_proj < 1.0) {
            return Err(Error::param("eps_proj", format!("{} outside (0, 1)", self.eps_proj)));
        }
        let c = self.block_params().exponent();
        if !(c > 1.0) {
            return Err(Error::ConvergenceGate(c));
        }
        Ok(())
    }

    /// `1 + δ' > η (1+δ) / (1 - ε')`, under which the direct threshold
    /// dominates the rescaled one. Reported, not enforced.
    pub fn reduction_relation_holds(&self) -> bool {
        1.0 + self.delta_prime > self.eta.get() * (1.0 + self.delta) / (1.0 - self.eps_prime)
    }

    /// `β (1 + δ')`
    pub fn direct_threshold(&self) -> f64 {
        self.beta * (1.0 + self.delta_prime)
    }

    /// `β (1 + δ)`
    pub fn rescaled_threshold(&self) -> f64 {
        self.beta * (1.0 + self.delta)
    }

    /// `(1 - ε')^2 η^{-2}`
    fn reduction_floor(&self) -> f64 {
        (1.0 - self.eps_prime).powi(2) / self.eta.squared()
    }
}

/// Where the martingale comes from.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum LilSource {
    /// Streamed classical paths; the seed field is replaced by the run seed.
    Sampled(SampledSpec),
    Dense {
        model: AlgebraModel,
        generator: GeneratorSpec,
    },
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct LilConfig {
    pub source: LilSource,
    pub params: LilParameters,
    pub seed: u64,
    /// Run even when no block satisfies the asymptotic gates; the report is
    /// then flagged `pre_asymptotic`.
    #[serde(default)]
    pub allow_pre_asymptotic: bool,
}

/// How block tail probabilities were evaluated.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum ProbcSemantics {
    /// Exact evaluation at every sample point (diagonal model).
    ExactSamplePoints,
    /// Cutoff of a certified column-norm dominator (an upper estimate).
    CertificateUpper,
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct BlockRecord {
    pub n: usize,
    pub k_n: usize,
    pub k_next: usize,
    /// `s(k_{n+1})^2`
    pub s2: f64,
    pub bound: BlockBound,
    /// Deficit for the direct family at `β(1+δ')`.
    pub probc_direct: f64,
    /// Deficit for the rescaled family at `β(1+δ)`.
    pub probc_rescaled: f64,
    /// `bound_exact` when the block is valid, else the closed form.
    pub reference_bound: f64,
    /// `3 sqrt(min(bound, 1) / dim)`, a rough sampling allowance.
    pub statistical_slack: f64,
    /// `probc_rescaled <= reference_bound + statistical_slack`; reported only.
    pub within_bound: bool,
    /// `s_m u_m >= (1-ε') η^{-1} s(k_{n+1}) u(k_{n+1})` on the whole block.
    pub reduction_holds: bool,
    /// `N_1` condition on this block.
    pub ratio_ok: bool,
    /// `N_2` conditions on this block.
    pub gate_ok: bool,
    /// Part of the post-`n_0` tail.
    pub gated: bool,
    pub in_window: bool,
    /// Partial sum of the final bound over gated blocks up to `n`.
    pub theory_partial_sum: f64,
    /// Partial sum of `probc_rescaled` over gated blocks up to `n`.
    pub empirical_partial_sum: f64,
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct TrailingSegment {
    pub start: usize,
    pub end: usize,
    pub probc_direct: f64,
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct Sensitivity {
    /// Window = every gated block.
    pub full_tail_deficit: f64,
    pub full_tail_limsup: f64,
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct BorelCantelli {
    /// Sum of the final bounds over gated blocks.
    pub series_sum: f64,
    /// `series_sum < ε_proj`, when the lemma's quantitative content applies.
    pub applies: bool,
    /// If it applies: full-tail deficit `<= series_sum` and limsup within the
    /// direct threshold.
    pub holds: bool,
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct TailReport {
    pub params: LilParameters,
    pub source: String,
    pub semantics: ProbcSemantics,
    pub horizon: usize,
    pub paths: usize,
    /// The path is identically zero: no blocks, `e = 1`.
    pub degenerate: bool,
    pub series_exponent: f64,
    pub reduction_relation_holds: bool,
    pub n1: Option<usize>,
    pub n2: Option<usize>,
    pub n0: Option<usize>,
    /// No block passed the gates; gated blocks fall back to `n >= 1`.
    pub pre_asymptotic: bool,
    pub blocks: Vec<BlockRecord>,
    /// Trailing incomplete block `(k_last, N]`.
    pub trailing: Option<TrailingSegment>,
    /// First time index of the window: the start of the first gated block
    /// ending in the last decade `(N/10, N]`.
    pub window_start: usize,
    pub window_blocks: Vec<usize>,
    pub theory_partial_sum: f64,
    pub empirical_partial_sum: f64,
    /// `max_{m in window} ||r_m e||`
    pub empirical_limsup: f64,
    /// `tau(1 - e)`
    pub deficit: f64,
    /// Smallest level `K` with deficit `< ε_proj` over the window.
    pub quantile_limsup: f64,
    pub sensitivity: Sensitivity,
    pub borel_cantelli: BorelCantelli,
    /// `(n, ||r_n e||)` on a logarithmic grid.
    pub plot: Vec<(usize, f64)>,
}

impl TailReport {
    /// Per-block CSV: `n, k_n, s2, bound_exact, bound_final, probc_s, partial_sum`
    /// plus the rescaled deficit and gating flags.
    pub fn write_block_csv<W: Write>(&self, w: W) -> Result<()> {
        let mut out = csv::Writer::from_writer(w);
        out.write_record([
            "n",
            "k_n",
            "s2",
            "bound_exact",
            "bound_final",
            "probc_s",
            "partial_sum",
            "probc_rescaled",
            "gated",
            "in_window",
        ])?;
        for b in &self.blocks {
            let exact = b.bound.realized.map(|r| r.bound_exact).unwrap_or(f64::NAN);
            out.write_record([
                b.n.to_string(),
                b.k_n.to_string(),
                b.s2.to_string(),
                exact.to_string(),
                b.bound.bound_final.to_string(),
                b.probc_direct.to_string(),
                b.theory_partial_sum.to_string(),
                b.probc_rescaled.to_string(),
                b.gated.to_string(),
                b.in_window.to_string(),
            ])?;
        }
        out.flush()?;
        Ok(())
    }

    /// Plot CSV `n, r_e_norm`.
    pub fn write_plot_csv<W: Write>(&self, w: W) -> Result<()> {
        let mut out = csv::Writer::from_writer(w);
        out.write_record(["n", "r_e_norm"])?;
        for (n, v) in &self.plot {
            out.write_record([n.to_string(), v.to_string()])?;
        }
        out.flush()?;
        Ok(())
    }
}

/// Runs the block pipeline on the configured source.
pub fn run_lil_experiment(config: &LilConfig) -> Result<TailReport> {
    config.params.validate()?;
    match &config.source {
        LilSource::Sampled(spec) => {
            let spec = SampledSpec {
                seed: config.seed,
                ..spec.clone()
            };
            sampled::run(&spec, config)
        }
        LilSource::Dense { model, generator } => dense::run(*model, generator, config),
    }
}

/// Block skeleton shared by the dense and sampled pipelines: gates, `n_0`,
/// theory bounds and the window.
struct Plan {
    blocks: Vec<BlockRecord>,
    n1: Option<usize>,
    n2: Option<usize>,
    n0: Option<usize>,
    pre_asymptotic: bool,
    /// Trailing incomplete block `(k_last, N]`, if nonempty.
    tail_start: Option<usize>,
}

/// First index `i` such that `ok[j]` holds for every `j >= i`, over blocks
/// `1..len`; `None` when the last block fails.
fn holds_from(ok: &[bool]) -> Option<usize> {
    let mut from = None;
    for i in (1..ok.len()).rev() {
        if ok[i] {
            from = Some(i);
        } else {
            break;
        }
    }
    from
}

fn plan(stats: &PathStats, stops: &StoppingIndices, params: &LilParameters, allow_pre: bool) -> Result<Plan> {
    let horizon = stats.horizon();
    let bp = params.block_params();
    let s2 = stats.s2();
    let u = stats.u();
    let scale_end = |k: usize| stats.scale(k);
    let mut blocks = Vec::new();
    let mut ratio_ok = vec![false];
    let mut gate_ok = vec![false];
    for (n, k_n, k_next) in stops.blocks().skip(1) {
        let empty = k_next <= k_n;
        let realized = RealizedBlock {
            s2_end: s2[k_next],
            alpha_end: stats.alpha(k_next),
        };
        let bound = block_tail_bound(n, &bp, (s2[k_next] > 0.0).then_some(realized))?;
        let ratio = if empty {
            true
        } else {
            let a = k_n + 1;
            s2[a] * u[a] * u[a] / (s2[k_next] * u[k_next] * u[k_next]) >= params.reduction_floor()
        };
        let gate = empty
            || bound
                .realized
                .and_then(|r| r.gate)
                .is_some_and(|g| g.alpha_ok && g.p_ok);
        let floor = (1.0 - params.eps_prime) / params.eta.get() * scale_end(k_next);
        let reduction_holds = (k_n + 1..=k_next).all(|m| stats.scale(m) >= floor);
        ratio_ok.push(ratio);
        gate_ok.push(gate);
        blocks.push(BlockRecord {
            n,
            k_n,
            k_next,
            s2: s2[k_next],
            bound,
            probc_direct: 0.0,
            probc_rescaled: 0.0,
            reference_bound: 0.0,
            statistical_slack: 0.0,
            within_bound: true,
            reduction_holds,
            ratio_ok: ratio,
            gate_ok: gate,
            gated: false,
            in_window: false,
            theory_partial_sum: 0.0,
            empirical_partial_sum: 0.0,
        });
    }
    let n1 = holds_from(&ratio_ok);
    let n2 = holds_from(&gate_ok);
    let n0 = n1.zip(n2).map(|(a, b)| a.max(b));
    let pre_asymptotic = n0.is_none();
    if pre_asymptotic && !allow_pre {
        return Err(Error::InsufficientHorizon(format!(
            "no complete block beyond n0 within horizon {horizon} ({} blocks; N1 = {n1:?}, N2 = {n2:?})",
            blocks.len()
        )));
    }
    let first = n0.unwrap_or(1);
    let decade_start = horizon / 10 + 1;
    let mut theory = 0.0;
    for b in blocks.iter_mut() {
        b.gated = b.n >= first;
        b.in_window = b.gated && b.k_next >= decade_start && b.k_next > b.k_n;
        if b.gated {
            theory += b.bound.bound_final;
        }
        b.theory_partial_sum = theory;
    }
    let k_last = *stops.k.last().expect("k_0 present");
    let tail_start = (k_last < horizon).then_some(k_last + 1);
    Ok(Plan {
        blocks,
        n1,
        n2,
        n0,
        pre_asymptotic,
        tail_start,
    })
}

/// Per-segment view of a pipeline. Segments `0..B` are the complete blocks
/// of the plan, segment `B` the trailing one.
trait Segments {
    fn dim(&self) -> usize;

    /// Cutoff projection of `sup_m ||r_m||` on the segment at `β(1+δ')`.
    fn direct(&self, seg: usize) -> &Projection;

    /// `max_{m in seg} ||r_m e||`
    fn sup_on(&self, seg: usize, e: &Projection) -> Result<f64>;

    /// `(n, ||r_n e||)` over the plot grid.
    fn plot(&self, e: &Projection) -> Result<Vec<(usize, f64)>>;

    /// Quantile witness `K` over the union of `segs`.
    fn quantile_limsup(&self, segs: &[usize], eps: f64) -> Result<f64>;
}

/// `e = 1_{[0, 1e-9]}(Σ (1 - e_b))`, the joint kernel of the complements.
fn intersect<S: Segments>(data: &S, segs: &[usize]) -> Result<Projection> {
    let dim = data.dim();
    if segs.is_empty() {
        return Ok(Projection::identity(dim));
    }
    let mut sum = Operator::zeros(dim);
    for s in segs {
        sum = sum.plus(data.direct(*s).complement().operator());
    }
    sum.spectral_projection(Interval::at_most(1e-9))
}

fn limsup_on<S: Segments>(data: &S, segs: &[usize], e: &Projection) -> Result<f64> {
    let mut k: f64 = 0.0;
    for s in segs {
        k = k.max(data.sup_on(*s, e)?);
    }
    Ok(k)
}

struct Meta {
    source: String,
    semantics: ProbcSemantics,
    horizon: usize,
    paths: usize,
}

/// Window, projections, limsup, sensitivity and the Borel–Cantelli check,
/// once the per-block deficits are filled in.
fn assemble<S: Segments>(mut plan: Plan, data: &S, params: &LilParameters, meta: Meta) -> Result<TailReport> {
    let dim = data.dim() as f64;
    let mut empirical = 0.0;
    for b in plan.blocks.iter_mut() {
        if b.gated {
            empirical += b.probc_rescaled;
        }
        b.empirical_partial_sum = empirical;
        b.reference_bound = match b.bound.realized {
            Some(r) if r.valid => r.bound_exact,
            _ => b.bound.bound_closed,
        };
        b.statistical_slack = 3.0 * (b.reference_bound.min(1.0) / dim).sqrt();
        b.within_bound = b.probc_rescaled <= b.reference_bound + b.statistical_slack;
    }
    let nblocks = plan.blocks.len();
    let trailing = plan.tail_start.map(|start| TrailingSegment {
        start,
        end: meta.horizon,
        probc_direct: data.direct(nblocks).deficit(),
    });
    let with_tail = |mut segs: Vec<usize>| {
        if trailing.is_some() {
            segs.push(nblocks);
        }
        segs
    };
    let window = with_tail((0..nblocks).filter(|i| plan.blocks[*i].in_window).collect());
    let full = with_tail((0..nblocks).filter(|i| plan.blocks[*i].gated).collect());
    if window.is_empty() {
        return Err(Error::InsufficientHorizon(format!(
            "empty tail window within horizon {}",
            meta.horizon
        )));
    }
    let window_start = window
        .iter()
        .map(|i| plan.blocks.get(*i).map_or(meta.horizon, |b| b.k_n + 1))
        .min()
        .expect("nonempty window");
    let e = intersect(data, &window)?;
    let empirical_limsup = limsup_on(data, &window, &e)?;
    let deficit = e.deficit();
    let quantile_limsup = data.quantile_limsup(&window, params.eps_proj)?;
    let e_full = intersect(data, &full)?;
    let sensitivity = Sensitivity {
        full_tail_deficit: e_full.deficit(),
        full_tail_limsup: limsup_on(data, &full, &e_full)?,
    };
    let series_sum = plan.blocks.last().map_or(0.0, |b| b.theory_partial_sum);
    let applies = series_sum < params.eps_proj;
    let borel_cantelli = BorelCantelli {
        series_sum,
        applies,
        holds: !applies
            || (sensitivity.full_tail_deficit <= series_sum
                && sensitivity.full_tail_limsup <= params.direct_threshold()),
    };
    let plot = data.plot(&e)?;
    Ok(TailReport {
        params: *params,
        source: meta.source,
        semantics: meta.semantics,
        horizon: meta.horizon,
        paths: meta.paths,
        degenerate: false,
        series_exponent: params.block_params().exponent(),
        reduction_relation_holds: params.reduction_relation_holds(),
        n1: plan.n1,
        n2: plan.n2,
        n0: plan.n0,
        pre_asymptotic: plan.pre_asymptotic,
        window_start,
        window_blocks: window.iter().filter(|i| **i < nblocks).map(|i| plan.blocks[*i].n).collect(),
        theory_partial_sum: series_sum,
        empirical_partial_sum: empirical,
        empirical_limsup,
        deficit,
        quantile_limsup,
        sensitivity,
        borel_cantelli,
        plot,
        trailing,
        blocks: std::mem::take(&mut plan.blocks),
    })
}

/// Report for an identically zero martingale: no blocks, `e = 1`.
fn degenerate_report(params: &LilParameters, meta: Meta) -> TailReport {
    TailReport {
        params: *params,
        source: meta.source,
        semantics: meta.semantics,
        horizon: meta.horizon,
        paths: meta.paths,
        degenerate: true,
        series_exponent: params.block_params().exponent(),
        reduction_relation_holds: params.reduction_relation_holds(),
        n1: None,
        n2: None,
        n0: None,
        pre_asymptotic: false,
        blocks: Vec::new(),
        trailing: None,
        window_start: meta.horizon / 10 + 1,
        window_blocks: Vec::new(),
        theory_partial_sum: 0.0,
        empirical_partial_sum: 0.0,
        empirical_limsup: 0.0,
        deficit: 0.0,
        quantile_limsup: 0.0,
        sensitivity: Sensitivity {
            full_tail_deficit: 0.0,
            full_tail_limsup: 0.0,
        },
        borel_cantelli: BorelCantelli {
            series_sum: 0.0,
            applies: true,
            holds: true,
        },
        plot: log_grid(meta.horizon, PLOT_PER_DECADE).into_iter().map(|n| (n, 0.0)).collect(),
    }
}

const PLOT_PER_DECADE: usize = 20;

/// Logarithmic grid of about `per_decade` points per decade on `1..=horizon`.
pub(crate) fn log_grid(horizon: usize, per_decade: usize) -> Vec<usize> {
    let mut grid = Vec::new();
    let steps = ((horizon as f64).log10() * per_decade as f64).ceil() as usize;
    for i in 0..=steps {
        let n = 10f64.powf(i as f64 / per_decade as f64).round() as usize;
        let n = n.clamp(1, horizon);
        if grid.last() != Some(&n) {
            grid.push(n);
        }
    }
    if grid.last() != Some(&horizon) {
        grid.push(horizon);
    }
    grid
}
