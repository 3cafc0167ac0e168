//! Streaming pipeline on the diagonal model: one sweep over the paths keeps,
//! per path and per segment, `max |r_m|` and `max |x_m|`, plus `|r_n|` on
//! the plot grid. Everything else is computed from those maxima.

use rayon::prelude::*;

use super::{
    assemble, degenerate_report, log_grid, plan, quantile_cutoff, LilConfig, Meta, ProbcSemantics, Segments,
    TailReport, PLOT_PER_DECADE,
};
use crate::error::Result;
use crate::martingale::{all_stopping_indices, BracketPath, DiagonalMartingale, SampledSpec};
use crate::operator::{Operator, Projection};

/// Maxima of one replica (a path, or an antithetic pair).
struct Sweep {
    seg_r: Vec<f64>,
    seg_x: Vec<f64>,
    grid_r: Vec<f64>,
}

struct SampledSegments {
    /// Replica index of each sample point.
    replica_of: Vec<usize>,
    sweeps: Vec<Sweep>,
    direct: Vec<Projection>,
    grid: Vec<usize>,
}

impl SampledSegments {
    fn points(&self) -> usize {
        self.replica_of.len()
    }

    fn kept<'a>(&'a self, e: &'a Projection) -> impl Iterator<Item = &'a Sweep> + 'a {
        let flags = e.operator().diagonal_values().expect("diagonal projection");
        (0..self.points())
            .filter(move |p| flags[*p] > 0.5)
            .map(move |p| &self.sweeps[self.replica_of[p]])
    }
}

impl Segments for SampledSegments {
    fn dim(&self) -> usize {
        self.points()
    }

    fn direct(&self, seg: usize) -> &Projection {
        &self.direct[seg]
    }

    fn sup_on(&self, seg: usize, e: &Projection) -> Result<f64> {
        Ok(self.kept(e).map(|s| s.seg_r[seg]).fold(0.0, f64::max))
    }

    fn plot(&self, e: &Projection) -> Result<Vec<(usize, f64)>> {
        Ok(self
            .grid
            .iter()
            .enumerate()
            .map(|(i, n)| (*n, self.kept(e).map(|s| s.grid_r[i]).fold(0.0, f64::max)))
            .collect())
    }

    fn quantile_limsup(&self, segs: &[usize], eps: f64) -> Result<f64> {
        let per_point: Vec<f64> = self
            .replica_of
            .iter()
            .map(|r| segs.iter().map(|s| self.sweeps[*r].seg_r[*s]).fold(0.0, f64::max))
            .collect();
        Ok(quantile_cutoff(&per_point, eps).0)
    }
}

fn sweep(m: &DiagonalMartingale, path: usize, ranges: &[(usize, usize)], inv_scale: &[f64], grid: &[usize]) -> Sweep {
    let mut seg_r = vec![0.0f64; ranges.len()];
    let mut seg_x = vec![0.0f64; ranges.len()];
    let mut grid_r = vec![0.0; grid.len()];
    let mut seg = 0;
    let mut gi = 0;
    for (i, x) in m.path(path).enumerate() {
        let n = i + 1;
        let a = x.abs();
        let r = a * inv_scale[n];
        while seg < ranges.len() && n > ranges[seg].1 {
            seg += 1;
        }
        if seg < ranges.len() && n >= ranges[seg].0 {
            seg_r[seg] = seg_r[seg].max(r);
            seg_x[seg] = seg_x[seg].max(a);
        }
        if gi < grid.len() && grid[gi] == n {
            grid_r[gi] = r;
            gi += 1;
        }
    }
    Sweep { seg_r, seg_x, grid_r }
}

fn indicator(points: impl Iterator<Item = bool>) -> Projection {
    Projection::from_trusted(Operator::diagonal(points.map(|keep| if keep { 1.0 } else { 0.0 }).collect()))
}

pub(super) fn run(spec: &SampledSpec, config: &LilConfig) -> Result<TailReport> {
    let params = &config.params;
    let m = DiagonalMartingale::new(spec.clone())?;
    let stats = m.stats();
    let horizon = m.horizon();
    let meta = Meta {
        source: m.label(),
        semantics: ProbcSemantics::ExactSamplePoints,
        horizon,
        paths: m.paths(),
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
    let inv_scale: Vec<f64> = (0..=horizon)
        .map(|n| {
            let s = stats.scale(n);
            if s > 0.0 {
                1.0 / s
            } else {
                0.0
            }
        })
        .collect();
    let grid = log_grid(horizon, PLOT_PER_DECADE);
    let antithetic = spec.antithetic;
    let replicas = if antithetic { m.paths() / 2 } else { m.paths() };
    // mirror paths share |x_n|, so one sweep per pair suffices
    let sweeps: Vec<Sweep> = (0..replicas)
        .into_par_iter()
        .map(|r| sweep(&m, if antithetic { 2 * r } else { r }, &ranges, &inv_scale, &grid))
        .collect();
    let replica_of: Vec<usize> = (0..m.paths()).map(|p| if antithetic { p / 2 } else { p }).collect();
    let thr_direct = params.direct_threshold();
    let thr_rescaled = params.rescaled_threshold();
    let direct: Vec<Projection> = (0..ranges.len())
        .map(|s| indicator(replica_of.iter().map(|r| sweeps[*r].seg_r[s] <= thr_direct)))
        .collect();
    for (i, b) in plan.blocks.iter_mut().enumerate() {
        b.probc_direct = direct[i].deficit();
        let scale = stats.scale(b.k_next);
        let above = replica_of
            .iter()
            .filter(|r| sweeps[**r].seg_x[i] > thr_rescaled * scale)
            .count();
        b.probc_rescaled = above as f64 / m.paths() as f64;
    }
    let data = SampledSegments {
        replica_of,
        sweeps,
        direct,
        grid,
    };
    assemble(plan, &data, params, meta)
}
