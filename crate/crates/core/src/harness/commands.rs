//! One function per subcommand. Replicas run on the ambient rayon pool and
//! are collected in replica order, so outputs do not depend on the thread
//! count.

use rand::Rng;
use rayon::prelude::*;
use serde_json::json;

use super::config::{CommandKind, RunConfig, SourceKind};
use crate::error::Result;
use crate::lil::{
    run_lil_experiment, scalar_kolmogorov_baseline, semicircular_demo, BaselineConfig, LilConfig, LilSource,
    SemicircularConfig,
};
use crate::martingale::{gen_martingale, BracketPath, DiagonalMartingale, SampledSpec};
use crate::operator::Operator;
use crate::rng::{self, replica_seed};
use crate::tail::{
    chebyshev_bound, column_maximal_norm_bounds, doob_consequence_check, dual_doob_check, exp_moment_sides,
    probc_upper, scalar_power_exp_bound, DoobStatus, ExpIneqParams, TrialRow, VerificationSummary,
};

/// Result of a subcommand before it is written out.
pub struct Outcome {
    pub summary: serde_json::Value,
    pub rows: Vec<TrialRow>,
    /// Extra `(file name, bytes)` artifacts.
    pub artifacts: Vec<(String, Vec<u8>)>,
}

impl Outcome {
    pub fn violations(&self) -> Vec<&TrialRow> {
        self.rows.iter().filter(|r| !r.holds).collect()
    }
}

fn replicas(cfg: &RunConfig) -> Vec<(usize, u64)> {
    let r = cfg.replicas.unwrap_or(1);
    (0..r).map(|i| (i, replica_seed(cfg.seed, i as u64))).collect()
}

fn row(trial: usize, model: &str, n: usize, params: String, lhs: f64, rhs: f64, holds: bool) -> TrialRow {
    TrialRow {
        trial,
        model: model.to_owned(),
        n,
        params,
        lhs,
        rhs,
        margin: rhs - lhs,
        holds,
    }
}

fn summarize(cfg: &RunConfig, rows: Vec<TrialRow>, extra: serde_json::Value) -> Outcome {
    let summary = VerificationSummary::from_rows(cfg.command.name(), &rows);
    Outcome {
        summary: json!({ "verification": summary, "details": extra }),
        rows,
        artifacts: Vec::new(),
    }
}

fn collect<T: Send>(items: Vec<Result<Vec<T>>>) -> Result<Vec<T>> {
    let mut out = Vec::new();
    for v in items {
        out.extend(v?);
    }
    Ok(out)
}

pub fn run(cfg: &RunConfig) -> Result<Outcome> {
    match cfg.command {
        CommandKind::VerifyCe => verify_ce(cfg),
        CommandKind::VerifyExpineq => verify_expineq(cfg),
        CommandKind::VerifyDoob => verify_doob(cfg),
        CommandKind::VerifyDualdoob => verify_dualdoob(cfg),
        CommandKind::VerifyChebyshev => verify_chebyshev(cfg),
        CommandKind::VerifyScalarineq => verify_scalarineq(cfg),
        CommandKind::LilRun => lil_run(cfg),
        CommandKind::BaselineScalar => baseline(cfg),
        CommandKind::DemoSemicircular => semicircular(cfg),
    }
}

fn model_label(cfg: &RunConfig) -> String {
    let m = cfg.model;
    format!("{:?}(m={},n={})", m.kind(), m.site_dim(), m.depth()).to_lowercase()
}

fn verify_ce(cfg: &RunConfig) -> Result<Outcome> {
    let label = model_label(cfg);
    let reports: Vec<Result<Vec<TrialRow>>> = replicas(cfg)
        .into_par_iter()
        .map(|(i, seed)| {
            let r = cfg.model.verify_ce_axioms(cfg.samples, seed)?;
            Ok(vec![row(
                i,
                &label,
                cfg.model.depth(),
                format!("samples={}", cfg.samples),
                r.worst,
                crate::filtration::CE_TOL,
                r.passes,
            )])
        })
        .collect();
    let rows = collect(reports)?;
    Ok(summarize(cfg, rows, json!({ "tolerance": crate::filtration::CE_TOL })))
}

fn sampled_spec(cfg: &RunConfig, seed: u64) -> SampledSpec {
    SampledSpec {
        law: cfg.law,
        ..SampledSpec::rademacher(cfg.paths.unwrap_or(1024), cfg.horizon.unwrap_or(10_000), seed)
    }
}

fn expineq_rows<P: BracketPath>(path: &P, trial: usize, cfg: &RunConfig) -> Result<Vec<TrialRow>> {
    let n = path.horizon();
    let label = path.label();
    let mut rows = Vec::new();
    for eps in &cfg.eps_grid {
        let probe = ExpIneqParams::tight(path, n, *eps, 0.0);
        let max = ExpIneqParams::lambda_max(probe.m, *eps);
        if !max.is_finite() {
            continue;
        }
        for j in 1..=cfg.grid_points {
            let lambda = max * j as f64 / cfg.grid_points as f64;
            let sides = exp_moment_sides(path, n, &ExpIneqParams { lambda, ..probe })?;
            rows.push(row(
                trial,
                &label,
                n,
                format!("eps={eps};lambda={lambda}"),
                sides.log_lhs,
                sides.log_rhs,
                sides.holds,
            ));
        }
    }
    Ok(rows)
}

fn verify_expineq(cfg: &RunConfig) -> Result<Outcome> {
    let per: Vec<Result<Vec<TrialRow>>> = replicas(cfg)
        .into_par_iter()
        .map(|(i, seed)| match cfg.source {
            Some(SourceKind::Sampled) => expineq_rows(&DiagonalMartingale::new(sampled_spec(cfg, seed))?, i, cfg),
            _ => expineq_rows(&gen_martingale(cfg.model, &cfg.generator, seed)?, i, cfg),
        })
        .collect();
    let rows = collect(per)?;
    Ok(summarize(cfg, rows, json!({ "sides": "log tau(exp(lambda x_n)) vs (1+eps) lambda^2 D^2" })))
}

fn verify_doob(cfg: &RunConfig) -> Result<Outcome> {
    let p = cfg.p.unwrap_or(4.0);
    let checks: Vec<Result<_>> = replicas(cfg)
        .into_par_iter()
        .map(|(i, seed)| {
            let path = gen_martingale(cfg.model, &cfg.generator, seed)?;
            let n = path.horizon();
            Ok((i, n, path.label(), doob_consequence_check(&path, 1.min(n), n, p)?))
        })
        .collect();
    let mut rows = Vec::new();
    let (mut holds, mut inconclusive, mut worst) = (0usize, 0usize, 0.0f64);
    for c in checks {
        let (i, n, label, check) = c?;
        match check.status {
            DoobStatus::Holds => holds += 1,
            DoobStatus::InconclusiveCertificate => inconclusive += 1,
            DoobStatus::Violation => {}
        }
        worst = worst.max(check.constant);
        rows.push(row(
            i,
            &label,
            n,
            format!("p={p};status={:?};gap={}", check.status, check.gap_ratio),
            check.upper,
            check.rhs,
            check.status != DoobStatus::Violation,
        ));
    }
    let runs = rows.len();
    Ok(summarize(
        cfg,
        rows,
        json!({
            "p": p,
            "holds": holds,
            "inconclusive": inconclusive,
            "holds_fraction": holds as f64 / runs as f64,
            "max_empirical_constant": worst,
            "constant_bound": 2f64.powf(2.0 / p),
        }),
    ))
}

fn verify_dualdoob(cfg: &RunConfig) -> Result<Outcome> {
    let p = cfg.p.unwrap_or(1.5);
    let label = model_label(cfg);
    let per: Vec<Result<Vec<TrialRow>>> = replicas(cfg)
        .into_par_iter()
        .map(|(i, seed)| {
            let mut rng = rng::stream(seed, 0, "dual-doob");
            let depth = cfg.model.depth();
            let terms = (0..=depth)
                .map(|_| {
                    let k = rng.random_range(0..=depth);
                    Ok((k, cfg.model.random_positive_element(depth, &mut rng)?))
                })
                .collect::<Result<Vec<(usize, Operator)>>>()?;
            let c = dual_doob_check(&cfg.model, &terms, p)?;
            Ok(vec![row(i, &label, depth, format!("p={p}"), c.lhs, c.rhs, c.holds)])
        })
        .collect();
    let rows = collect(per)?;
    Ok(summarize(cfg, rows, json!({ "p": p, "constant_bound": 2f64.powf(2.0 * (p - 1.0) / p) })))
}

fn verify_chebyshev(cfg: &RunConfig) -> Result<Outcome> {
    let p = cfg.p.unwrap_or(4.0);
    let per: Vec<Result<Vec<TrialRow>>> = replicas(cfg)
        .into_par_iter()
        .map(|(i, seed)| {
            let path = gen_martingale(cfg.model, &cfg.generator, seed)?;
            let n = path.horizon();
            let label = path.label();
            let family = &path.partials()[1.min(n)..=n];
            let bounds = column_maximal_norm_bounds(family, p)?;
            let top = bounds.certificate.norm_inf().max(f64::MIN_POSITIVE);
            let mut rows = Vec::new();
            let mut previous = f64::INFINITY;
            let mut monotone = true;
            for j in 1..=cfg.grid_points {
                let t = top * j as f64 / cfg.grid_points as f64;
                let c = chebyshev_bound(family, t, p, &bounds)?;
                monotone &= c.probc_s <= previous;
                previous = c.probc_s;
                let max_xe = probc_upper(family, t, &bounds.certificate)?.max_xe;
                rows.push(row(
                    i,
                    &label,
                    n,
                    format!("p={p};t={t};max_xe={max_xe}"),
                    c.probc_s,
                    c.cheb_rhs,
                    c.exact,
                ));
            }
            rows.push(row(i, &label, n, "monotone-in-t".into(), 0.0, 0.0, monotone));
            Ok(rows)
        })
        .collect();
    let rows = collect(per)?;
    Ok(summarize(cfg, rows, json!({ "p": p, "semantics": "probc_s <= (upper / t)^p, no tolerance" })))
}

fn verify_scalarineq(cfg: &RunConfig) -> Result<Outcome> {
    let mut rows = Vec::new();
    for i in 0..=400 {
        let u = -50.0 + 0.25 * i as f64;
        for j in 0..64 {
            let p = 1.0 + j as f64;
            let r = scalar_power_exp_bound(u, p)?;
            rows.push(row(rows.len(), "scalar", 0, format!("u={u};p={p}"), r.log_lhs, r.log_rhs, r.holds));
        }
    }
    Ok(summarize(cfg, rows, json!({ "grid": "u in [-50, 50] step 0.25, p in 1..=64" })))
}

fn lil_run(cfg: &RunConfig) -> Result<Outcome> {
    let source = match cfg.source {
        Some(SourceKind::Dense) => LilSource::Dense {
            model: cfg.model,
            generator: cfg.generator.clone(),
        },
        _ => LilSource::Sampled(sampled_spec(cfg, 0)),
    };
    let reports: Vec<Result<_>> = replicas(cfg)
        .into_par_iter()
        .map(|(i, seed)| {
            let lc = LilConfig {
                source: source.clone(),
                params: cfg.lil,
                seed,
                allow_pre_asymptotic: cfg.allow_pre_asymptotic,
            };
            Ok((i, seed, run_lil_experiment(&lc)?))
        })
        .collect();
    let mut rows = Vec::new();
    let mut artifacts = Vec::new();
    let mut summaries = Vec::new();
    let threshold = cfg.lil.direct_threshold();
    for r in reports {
        let (i, seed, report) = r?;
        rows.push(row(
            i,
            &report.source,
            report.horizon,
            format!("seed={seed};deficit={}", report.deficit),
            report.empirical_limsup,
            threshold,
            report.empirical_limsup <= threshold && report.borel_cantelli.holds,
        ));
        let mut blocks = Vec::new();
        report.write_block_csv(&mut blocks)?;
        artifacts.push((format!("blocks-{i}.csv"), blocks));
        let mut plot = Vec::new();
        report.write_plot_csv(&mut plot)?;
        artifacts.push((format!("plot-{i}.csv"), plot));
        summaries.push(json!({ "replica": i, "seed": seed, "report": report }));
    }
    let mut out = summarize(cfg, rows, json!(summaries));
    out.artifacts = artifacts;
    Ok(out)
}

fn baseline(cfg: &RunConfig) -> Result<Outcome> {
    let report = scalar_kolmogorov_baseline(&BaselineConfig {
        paths: cfg.paths.unwrap_or(4096),
        horizon: cfg.horizon.unwrap_or(1_000_000),
        seed: cfg.seed,
        law: cfg.baseline_law,
    })?;
    let mut w = csv::Writer::from_writer(Vec::new());
    w.write_record(["path", "statistic"])?;
    for (p, v) in report.per_path.iter().enumerate() {
        w.write_record([p.to_string(), v.to_string()])?;
    }
    let bytes = w.into_inner().map_err(|e| e.into_error())?;
    let mut summary = serde_json::to_value(&report)?;
    if let Some(obj) = summary.as_object_mut() {
        obj.remove("per_path");
    }
    Ok(Outcome {
        summary,
        rows: Vec::new(),
        artifacts: vec![("baseline.csv".into(), bytes)],
    })
}

fn semicircular(cfg: &RunConfig) -> Result<Outcome> {
    let report = semicircular_demo(&SemicircularConfig {
        size: cfg.size,
        steps: cfg.steps,
        seed: cfg.seed,
        per_decade: 10,
    })?;
    let mut w = csv::Writer::from_writer(Vec::new());
    w.write_record(["n", "norm", "statistic"])?;
    for p in &report.points {
        w.write_record([p.n.to_string(), p.norm.to_string(), p.statistic.to_string()])?;
    }
    let bytes = w.into_inner().map_err(|e| e.into_error())?;
    Ok(Outcome {
        summary: serde_json::to_value(&report)?,
        rows: Vec::new(),
        artifacts: vec![("semicircular.csv".into(), bytes)],
    })
}
