//! Column maximal norm `||(x_i)||_{L_p(l_inf^c)}` and the Doob-type checks.
//!
//! The norm is used in factorization form: the infimum of `||b||_p` over
//! `x_i = y_i b` with contractions `y_i`, equivalently the infimum of
//! `||a||_{p/2}^{1/2}` over `a ⪰ x_i^* x_i` for all `i`. Any feasible `a`
//! gives a sound upper bound; `max_i ||x_i||_p` is a lower bound.

use serde::Serialize;

use crate::error::{Error, Result};
use crate::filtration::AlgebraModel;
use crate::martingale::MartingalePath;
use crate::operator::Operator;

/// Tolerance of the feasibility certificate `x_i^* x_i ⪯ b^2 + tol·1`.
pub const FEASIBILITY_TOL: f64 = 1e-8;
const MAX_ITER: usize = 500;
const REL_STOP: f64 = 1e-6;

#[derive(Clone, Debug, Serialize)]
pub struct ColumnNormBounds {
    pub p: f64,
    pub lower: f64,
    pub upper: f64,
    /// The dominator `|b| = a^{1/2}` that realizes `upper`.
    pub certificate: Operator,
    pub iterations: usize,
}

impl ColumnNormBounds {
    /// `lower / upper`; 1 means the certificate is provably optimal.
    pub fn gap_ratio(&self) -> f64 {
        if self.upper == 0.0 {
            1.0
        } else {
            self.lower / self.upper
        }
    }
}

/// `tau(a^{p/2})^{1/p}` for positive `a`.
fn objective(a: &Operator, p: f64) -> Result<f64> {
    let eig = a.eigenvalues()?;
    let q = p / 2.0;
    let scale = eig.iter().fold(0.0f64, |m, v| m.max(v.abs()));
    if scale == 0.0 {
        return Ok(0.0);
    }
    let mean = eig.iter().map(|v| (v.max(0.0) / scale).powf(q)).sum::<f64>() / eig.len() as f64;
    Ok(scale.sqrt() * mean.powf(1.0 / p))
}

fn positive_part(h: &Operator) -> Result<Operator> {
    h.apply_function(|v| v.max(0.0))
}

/// Sequential join: for each `q`, `a += (q - a)_+`. Each step keeps the
/// earlier constraints (`a` only grows) and enforces `a ⪰ q`.
fn join(mut a: Operator, qs: &[Operator]) -> Result<Operator> {
    for q in qs {
        a = a.plus(&positive_part(&q.minus(&a))?);
    }
    Ok(a)
}

fn same_dims(xs: &[Operator]) -> Result<usize> {
    let dim = xs.first().ok_or(Error::EmptyFamily)?.dim();
    if let Some(x) = xs.iter().find(|x| x.dim() != dim) {
        return Err(Error::DimensionMismatch {
            expected: dim,
            actual: x.dim(),
        });
    }
    Ok(dim)
}

/// Lower and certified upper bounds for the column maximal norm, `p >= 2`.
pub fn column_maximal_norm_bounds(xs: &[Operator], p: f64) -> Result<ColumnNormBounds> {
    let dim = same_dims(xs)?;
    if !(p >= 2.0) {
        return Err(Error::param("p", format!("{p} < 2")));
    }
    let mut lower = 0.0f64;
    for x in xs {
        lower = lower.max(x.lp_norm(p)?);
    }

    let (certificate, iterations) = if p.is_infinite() {
        let top = xs.iter().map(Operator::norm_inf).fold(0.0, f64::max);
        (Operator::scalar(dim, top), 0)
    } else if xs.iter().all(Operator::is_diagonal) {
        // commuting family: the entrywise maximum of |x_i| is the least dominator
        let mut top = vec![0.0f64; dim];
        for x in xs {
            for (t, v) in top.iter_mut().zip(x.diagonal_values().expect("diagonal")) {
                *t = t.max(v.abs());
            }
        }
        (Operator::diagonal(top), 0)
    } else {
        let qs: Vec<Operator> = xs.iter().map(Operator::gram).collect();
        refine(&qs, dim, p)?
    };

    let upper = certificate.lp_norm(p)?;
    Ok(ColumnNormBounds {
        p,
        // both sides are exact for singletons; rounding may put lower a few
        // ulps above upper
        lower: lower.min(upper),
        upper,
        certificate,
        iterations,
    })
}

/// Shrink-and-rejoin descent on `a ⪰ q_i`, returning `a^{1/2}`.
fn refine(qs: &[Operator], dim: usize, p: f64) -> Result<(Operator, usize)> {
    let zero = Operator::zeros(dim);
    let sum = qs.iter().fold(zero.clone(), |acc, q| acc.plus(q));
    let mut best = join(zero.clone(), qs)?;
    let mut f = objective(&best, p)?;
    let mut reversed: Vec<Operator> = qs.to_vec();
    reversed.reverse();
    for cand in [sum, join(zero, &reversed)?] {
        let fc = objective(&cand, p)?;
        if fc < f {
            best = cand;
            f = fc;
        }
    }
    let mut gamma = 0.5;
    let mut iterations = 0;
    while iterations < MAX_ITER && gamma > 1e-6 && f > 0.0 {
        iterations += 1;
        let cand = join(best.scale(1.0 - gamma), qs)?;
        let fc = objective(&cand, p)?;
        if fc < f {
            let rel = (f - fc) / f;
            best = cand;
            f = fc;
            if rel < REL_STOP {
                break;
            }
        } else {
            gamma *= 0.5;
        }
    }
    // certify: lift by the worst residual violation, if any
    let mut worst = 0.0f64;
    for q in qs {
        worst = worst.min(best.minus(q).min_eigenvalue()?);
    }
    if worst < 0.0 {
        best = best.shift(-worst);
    }
    Ok((best.apply_function(|v| v.max(0.0).sqrt())?, iterations))
}

/// Largest violation of `x_i^* x_i ⪯ b^2`, relative to `1 + ||b||^2`.
pub fn dominator_violation(xs: &[Operator], dominator: &Operator) -> Result<f64> {
    let b2 = dominator.square();
    let scale = 1.0 + b2.norm_inf();
    let mut worst = 0.0f64;
    for x in xs {
        let gap = match (b2.diagonal_values(), x.diagonal_values()) {
            (Some(b), Some(v)) => b
                .iter()
                .zip(v)
                .map(|(b, v)| b - v * v)
                .fold(f64::INFINITY, f64::min),
            _ => b2.minus(&x.gram()).min_eigenvalue()?,
        };
        worst = worst.max(-gap / scale);
    }
    Ok(worst)
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum DoobStatus {
    Holds,
    /// The certificate exceeds the bound but is not provably tight: the
    /// theorem constrains the infimum, not our upper estimate.
    InconclusiveCertificate,
    /// Certificate within 1% of optimal and still above the bound.
    Violation,
}

#[derive(Clone, Debug, Serialize)]
pub struct DoobCheck {
    pub p: f64,
    pub lower: f64,
    pub upper: f64,
    /// `2^{2/p} ||x_n||_p`
    pub rhs: f64,
    pub xn_norm: f64,
    /// `upper / ||x_n||_p`, the empirical constant.
    pub constant: f64,
    pub gap_ratio: f64,
    pub status: DoobStatus,
}

/// Certified-violation threshold on `lower / upper`.
pub const TIGHT_GAP: f64 = 0.99;

/// `||(x_i)_{m<=i<=n}||_{L_p(l_inf^c)} <= 2^{2/p} ||x_n||_p` for `p >= 4`.
pub fn doob_consequence_check(path: &MartingalePath, m: usize, n: usize, p: f64) -> Result<DoobCheck> {
    if m > n || n > path.horizon() {
        return Err(Error::param("range", format!("{m}..={n} outside 0..={}", path.horizon())));
    }
    doob_family_check(&path.partials()[m..=n], p)
}

/// Doob check on a family of partial sums whose last entry is `x_n`.
pub fn doob_family_check(family: &[Operator], p: f64) -> Result<DoobCheck> {
    if !(p >= 4.0) {
        return Err(Error::param("p", format!("{p} < 4: the asymmetric Doob bound needs p >= 4")));
    }
    let xn = family.last().ok_or(Error::EmptyFamily)?;
    let bounds = column_maximal_norm_bounds(family, p)?;
    let xn_norm = xn.lp_norm(p)?;
    let rhs = 2f64.powf(2.0 / p) * xn_norm;
    let status = if bounds.upper <= rhs + FEASIBILITY_TOL {
        DoobStatus::Holds
    } else if bounds.gap_ratio() >= TIGHT_GAP {
        DoobStatus::Violation
    } else {
        DoobStatus::InconclusiveCertificate
    };
    Ok(DoobCheck {
        p,
        lower: bounds.lower,
        upper: bounds.upper,
        rhs,
        xn_norm,
        constant: if xn_norm > 0.0 { bounds.upper / xn_norm } else { 0.0 },
        gap_ratio: bounds.gap_ratio(),
        status,
    })
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct DualDoobCheck {
    pub p: f64,
    /// `||sum_i E_{k_i}(a_i)||_p`
    pub lhs: f64,
    /// `2^{2(p-1)/p} ||sum_i a_i||_p`
    pub rhs: f64,
    pub constant: f64,
    pub holds: bool,
}

/// Dual Doob inequality for positive `a_i` paired with levels `k_i`.
pub fn dual_doob_check(model: &AlgebraModel, terms: &[(usize, Operator)], p: f64) -> Result<DualDoobCheck> {
    if !(1.0..=2.0).contains(&p) {
        return Err(Error::param("p", format!("{p} outside [1, 2]")));
    }
    if terms.is_empty() {
        return Err(Error::EmptyFamily);
    }
    let zero = Operator::zeros(model.dim());
    let mut conditioned = zero.clone();
    let mut total = zero;
    for (k, a) in terms {
        let low = a.min_eigenvalue()?;
        if low < -1e-10 * (1.0 + a.norm_inf()) {
            return Err(Error::NotPositive(low));
        }
        conditioned = conditioned.plus(&model.expect(a, *k)?);
        total = total.plus(a);
    }
    let constant = 2f64.powf(2.0 * (p - 1.0) / p);
    let lhs = conditioned.lp_norm(p)?;
    let rhs = constant * total.lp_norm(p)?;
    Ok(DualDoobCheck {
        p,
        lhs,
        rhs,
        constant,
        holds: lhs <= rhs + FEASIBILITY_TOL,
    })
}
