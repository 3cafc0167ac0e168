use serde::Serialize;

use crate::error::{Error, Result};
use crate::operator::{Interval, Operator, Projection};
use crate::tail::column_maximal_norm_bounds;

/// Almost-uniform limsup witness: `||r_m e|| <= k` for every `m` in the
/// window, with `tau(1 - e) = deficit < ε_proj`.
#[derive(Clone, Debug, Serialize)]
pub struct AuLimsup {
    pub k: f64,
    pub e: Projection,
    pub deficit: f64,
}

/// Cutoff level for a sample of per-point maxima: the `(j+1)`-th largest
/// value, `j` the largest count with `j / len < eps`. Returns the level and
/// the fraction of points strictly above it.
pub fn quantile_cutoff(values: &[f64], eps: f64) -> (f64, f64) {
    if values.is_empty() {
        return (0.0, 0.0);
    }
    let len = values.len();
    let mut sorted = values.to_vec();
    sorted.sort_by(|a, b| b.total_cmp(a));
    // largest j with j / len < eps
    let mut j = (eps * len as f64).ceil() as usize;
    while j > 0 && j as f64 / len as f64 >= eps {
        j -= 1;
    }
    let level = sorted[j.min(len - 1)];
    let above = values.iter().filter(|v| **v > level).count();
    (level, above as f64 / len as f64)
}

/// Builds `e` from a column dominator of the window family, cut at the
/// `ε_proj` quantile of its spectrum, and reports the realized
/// `max ||r_m e||` as `k`. On diagonal families the dominator is the
/// pointwise maximum, so `k` is the quantile-max over sample points.
pub fn empirical_au_limsup(rs: &[Operator], eps_proj: f64) -> Result<AuLimsup> {
    if rs.is_empty() {
        return Err(Error::EmptyFamily);
    }
    if !(eps_proj > 0.0 && eps_proj < 1.0) {
        return Err(Error::param("eps_proj", format!("{eps_proj} outside (0, 1)")));
    }
    let bounds = column_maximal_norm_bounds(rs, 4.0)?;
    let spectrum = bounds.certificate.eigenvalues()?;
    let (level, _) = quantile_cutoff(&spectrum, eps_proj);
    let e = bounds.certificate.spectral_projection(Interval::at_most(level))?;
    let k = rs
        .iter()
        .map(|r| r.product(e.operator()).norm_inf())
        .fold(0.0, f64::max);
    Ok(AuLimsup {
        k,
        deficit: e.deficit(),
        e,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn zero_family() {
        let z = Operator::zeros(5);
        let r = empirical_au_limsup(&[z.clone(), z], 0.05).unwrap();
        assert_eq!(r.k, 0.0);
        assert_eq!(r.deficit, 0.0);
    }

    #[test]
    fn single_diagonal_cutoff() {
        let r = empirical_au_limsup(&[Operator::diagonal(vec![3.0, 1.0])], 0.6).unwrap();
        assert_eq!(r.e.operator(), &Operator::diagonal(vec![0.0, 1.0]));
        assert_eq!(r.k, 1.0);
        assert_eq!(r.deficit, 0.5);
    }

    #[test]
    fn matches_brute_force_quantile() {
        let rows = [
            vec![0.3, -1.2, 2.5, 0.0, 0.9, -0.4, 1.1, 0.2, -3.0, 0.5],
            vec![0.1, 0.8, -0.5, 1.7, -0.2, 0.6, 0.0, 2.2, 0.4, -0.3],
        ];
        let rs: Vec<Operator> = rows.iter().map(|r| Operator::diagonal(r.clone())).collect();
        let per_point: Vec<f64> = (0..10).map(|i| rows[0][i].abs().max(rows[1][i].abs())).collect();
        for eps in [0.05, 0.15, 0.25, 0.5] {
            let got = empirical_au_limsup(&rs, eps).unwrap();
            // brute force: drop the largest ⌈10 eps⌉ - 1 points, keep the max of the rest
            let mut sorted = per_point.clone();
            sorted.sort_by(|a, b| b.total_cmp(a));
            let drop = (10.0 * eps).ceil() as usize - 1;
            assert_eq!(got.k, sorted[drop], "eps={eps}");
            assert!(got.deficit < eps);
        }
    }

    #[test]
    fn quantile_edges() {
        assert_eq!(quantile_cutoff(&[], 0.1), (0.0, 0.0));
        assert_eq!(quantile_cutoff(&[4.0, 1.0, 2.0, 3.0], 0.01), (4.0, 0.0));
        assert_eq!(quantile_cutoff(&[4.0, 1.0, 2.0, 3.0], 0.26), (3.0, 0.25));
        assert_eq!(quantile_cutoff(&[4.0, 1.0, 2.0, 3.0], 0.25), (4.0, 0.0));
    }
}
