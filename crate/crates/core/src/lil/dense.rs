//! Dense pipeline: block deficits come from certified column dominators
//! (`p = 4`), so they are upper estimates of the column tail probabilities.

use super::{
    assemble, degenerate_report, empirical_au_limsup, log_grid, plan, LilConfig, Meta, ProbcSemantics, Segments,
    TailReport, PLOT_PER_DECADE,
};
use crate::error::Result;
use crate::filtration::AlgebraModel;
use crate::martingale::{all_stopping_indices, gen_martingale, BracketPath, GeneratorSpec};
use crate::operator::{Operator, Projection};
use crate::tail::{column_maximal_norm_bounds, probc_upper};

const DOMINATOR_P: f64 = 4.0;

struct DenseSegments {
    dim: usize,
    /// `r_n` for `n = 0..=N`.
    rs: Vec<Operator>,
    ranges: Vec<(usize, usize)>,
    direct: Vec<Projection>,
    grid: Vec<usize>,
}

fn norm_after(x: &Operator, e: &Projection) -> f64 {
    x.product(e.operator()).norm_inf()
}

impl Segments for DenseSegments {
    fn dim(&self) -> usize {
        self.dim
    }

    fn direct(&self, seg: usize) -> &Projection {
        &self.direct[seg]
    }

    fn sup_on(&self, seg: usize, e: &Projection) -> Result<f64> {
        let (a, b) = self.ranges[seg];
        Ok((a..=b).map(|m| norm_after(&self.rs[m], e)).fold(0.0, f64::max))
    }

    fn plot(&self, e: &Projection) -> Result<Vec<(usize, f64)>> {
        Ok(self.grid.iter().map(|n| (*n, norm_after(&self.rs[*n], e))).collect())
    }

    fn quantile_limsup(&self, segs: &[usize], eps: f64) -> Result<f64> {
        let family: Vec<Operator> = segs
            .iter()
            .flat_map(|s| {
                let (a, b) = self.ranges[*s];
                (a..=b).map(|m| self.rs[m].clone())
            })
            .collect();
        if family.is_empty() {
            return Ok(0.0);
        }
        Ok(empirical_au_limsup(&family, eps)?.k)
    }
}

/// Deficit and projection of the dominator cutoff for `family` at `t`.
fn block_cutoff(family: &[Operator], t: f64, dim: usize) -> Result<Projection> {
    if family.is_empty() {
        return Ok(Projection::identity(dim));
    }
    let bounds = column_maximal_norm_bounds(family, DOMINATOR_P)?;
    Ok(probc_upper(family, t, &bounds.certificate)?.e)
}

pub(super) fn run(model: AlgebraModel, generator: &GeneratorSpec, config: &LilConfig) -> Result<TailReport> {
    let params = &config.params;
    let path = gen_martingale(model, generator, config.seed)?;
    let stats = path.stats();
    let horizon = path.horizon();
    let dim = model.dim();
    let meta = Meta {
        source: path.label(),
        semantics: ProbcSemantics::CertificateUpper,
        horizon,
        paths: dim,
    };
    if stats.s2()[horizon] == 0.0 {
        return Ok(degenerate_report(params, meta));
    }
    let stops = all_stopping_indices(stats.s2(), params.eta);
    let mut plan = plan(stats, &stops, params, config.allow_pre_asymptotic)?;
    let mut ranges: Vec<(usize, usize)> = plan.blocks.iter().map(|b| (b.k_n + 1, b.k_next)).collect();
    if let Some(start) = plan.tail_start {
        ranges.push((start, horizon));
    }
    let rs: Vec<Operator> = (0..=horizon)
        .map(|n| {
            let s = stats.scale(n);
            if s > 0.0 {
                path.partial(n).scale(1.0 / s)
            } else {
                Operator::zeros(dim)
            }
        })
        .collect();
    let mut direct = Vec::with_capacity(ranges.len());
    for (a, b) in &ranges {
        let family: Vec<Operator> = (*a..=*b).map(|m| rs[m].clone()).collect();
        direct.push(block_cutoff(&family, params.direct_threshold(), dim)?);
    }
    for (i, b) in plan.blocks.iter_mut().enumerate() {
        b.probc_direct = direct[i].deficit();
        let scale = stats.scale(b.k_next);
        let family: Vec<Operator> = (b.k_n + 1..=b.k_next).map(|m| path.partial(m).scale(1.0 / scale)).collect();
        b.probc_rescaled = block_cutoff(&family, params.rescaled_threshold(), dim)?.deficit();
    }
    let data = DenseSegments {
        dim,
        rs,
        ranges,
        direct,
        grid: log_grid(horizon, PLOT_PER_DECADE),
    };
    assemble(plan, &data, params, meta)
}
