//! Tail inequalities: exponential moments, column maximal norms, Doob-type
//! bounds, constructive column tail probabilities and the block bounds of
//! the LIL pipeline.

mod column;
mod expineq;
mod probc;
mod report;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::martingale::{iterlog, Eta};

pub use column::{
    column_maximal_norm_bounds, dominator_violation, doob_consequence_check, doob_family_check,
    dual_doob_check, ColumnNormBounds, DoobCheck, DoobStatus, DualDoobCheck, FEASIBILITY_TOL, TIGHT_GAP,
};
pub use expineq::{exp_moment_sides, log_trace_exp, ExpIneqParams, ExpMomentSides, CENTERING_TOL};
pub use probc::{chebyshev_bound, probc_upper, ChebyshevCheck, ProbcResult};
pub use report::{write_rows, TrialRow, VerificationSummary};

/// Both sides of `|u|^p <= p^p e^{-p} (e^u + e^{-u})`.
#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct ScalarPowerExp {
    pub lhs: f64,
    pub rhs: f64,
    pub log_lhs: f64,
    pub log_rhs: f64,
    pub holds: bool,
}

/// Evaluated in log space; at `u = ±p` the two sides agree to within
/// `ln(1 + e^{-2p})`, so a relative tolerance of `1e-12` absorbs rounding.
pub fn scalar_power_exp_bound(u: f64, p: f64) -> Result<ScalarPowerExp> {
    if !(p >= 1.0 && p.is_finite()) {
        return Err(Error::param("p", format!("{p} outside [1, inf)")));
    }
    let a = u.abs();
    let log_lhs = p * a.ln();
    let log_rhs = p * p.ln() - p + a + (-2.0 * a).exp().ln_1p();
    Ok(ScalarPowerExp {
        lhs: log_lhs.exp(),
        rhs: log_rhs.exp(),
        log_lhs,
        log_rhs,
        holds: log_lhs <= log_rhs + 1e-12 * log_rhs.abs().max(1.0),
    })
}

/// `η, δ, ε, β` of the block bound.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct BlockParams {
    pub eta: Eta,
    pub delta: f64,
    pub eps: f64,
    #[serde(default = "default_beta")]
    pub beta: f64,
}

fn default_beta() -> f64 {
    2.0
}

impl BlockParams {
    pub fn new(eta: Eta, delta: f64, eps: f64) -> Result<Self> {
        let p = BlockParams {
            eta,
            delta,
            eps,
            beta: 2.0,
        };
        p.validate()?;
        Ok(p)
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.delta > 0.0) {
            return Err(Error::param("delta", format!("{} <= 0", self.delta)));
        }
        if !(self.eps > 0.0 && self.eps <= 1.0) {
            return Err(Error::param("eps", format!("{} outside (0, 1]", self.eps)));
        }
        if !(self.beta > 0.0) {
            return Err(Error::param("beta", format!("{} <= 0", self.beta)));
        }
        Ok(())
    }

    /// `c' = β^2 (1+δ)^2 / (4 (1+ε))`; the block series converges iff `c' > 1`.
    pub fn exponent(&self) -> f64 {
        let b = self.beta * (1.0 + self.delta);
        b * b / (4.0 * (1.0 + self.eps))
    }

    /// Largest `α(k_{n+1})` for which the exponential inequality applies:
    /// `2 √ε / (β (1+δ))`.
    pub fn alpha_gate(&self) -> f64 {
        2.0 * self.eps.sqrt() / (self.beta * (1.0 + self.delta))
    }

    /// `λ = β (1+δ) u^2 / (2 (1+ε))` for a given `u^2`.
    pub fn lambda(&self, u2: f64) -> f64 {
        self.beta * (1.0 + self.delta) * u2 / (2.0 * (1.0 + self.eps))
    }

    /// `[(2 ln η) n]^{-c'}`.
    pub fn bound_final(&self, n: usize) -> f64 {
        (-self.exponent() * self.eta.log_threshold(n).ln()).exp()
    }
}

/// Realized quantities at the end of block `n`.
#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct RealizedBlock {
    /// `s(k_{n+1})^2`
    pub s2_end: f64,
    /// `α(k_{n+1})`, when defined.
    pub alpha_end: Option<f64>,
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct BlockGate {
    pub alpha: f64,
    pub alpha_max: f64,
    pub alpha_ok: bool,
    /// `p = λ β (1+δ) >= 4`
    pub p_ok: bool,
}

/// Block bound with the realized bracket.
#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct RealizedBound {
    pub s2_end: f64,
    /// `u(k_{n+1})^2 = L(s(k_{n+1})^2)`
    pub u2: f64,
    pub lambda: f64,
    pub p: f64,
    /// `8 exp((1+ε) λ^2 / u^2 - β (1+δ) λ)`
    pub bound_exact: f64,
    /// The same without the prefactor 8, `exp(-c' u^2)`.
    pub bound_unscaled: f64,
    /// `(ln s(k_{n+1})^2)^{-c'}`
    pub bound_log: f64,
    /// `s(k_{n+1})^2 >= η^{2n}`, the premise of the comparisons below.
    pub valid: bool,
    /// `bound_exact <= bound_final (1 + 1e-10)`
    pub exact_le_final: bool,
    /// `bound_unscaled <= bound_log <= bound_final`, each with `1e-10` slack.
    pub unscaled_chain: bool,
    pub gate: Option<BlockGate>,
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct BlockBound {
    pub n: usize,
    pub exponent: f64,
    /// `L(η^{2n})`, the lower bound of `u(k_{n+1})^2`.
    pub u2_lower: f64,
    /// `λ` and `p` with `u^2` replaced by `u2_lower`.
    pub lambda_closed: f64,
    pub p_closed: f64,
    /// `8 exp(-c' u2_lower)`
    pub bound_closed: f64,
    /// `[(2 ln η) n]^{-c'}`
    pub bound_final: f64,
    pub realized: Option<RealizedBound>,
}

const REL: f64 = 1.0 + 1e-10;

/// Closed forms of the block bound for block `n >= 1`, plus the comparison
/// against the realized bracket when supplied.
pub fn block_tail_bound(n: usize, params: &BlockParams, realized: Option<RealizedBlock>) -> Result<BlockBound> {
    params.validate()?;
    if n == 0 {
        return Err(Error::param("n", "the block bound needs n >= 1"));
    }
    let c = params.exponent();
    let eta = params.eta;
    let beta_delta = params.beta * (1.0 + params.delta);
    let u2_lower = iterlog(eta.threshold(n))?;
    let lambda_closed = params.lambda(u2_lower);
    let bound_final = params.bound_final(n);
    let realized = match realized {
        None => None,
        Some(r) => {
            if !(r.s2_end > 0.0) {
                return Err(Error::param("s2_end", format!("{} <= 0", r.s2_end)));
            }
            let u2 = iterlog(r.s2_end)?;
            let lambda = params.lambda(u2);
            let p = lambda * beta_delta;
            let exponent = (1.0 + params.eps) * lambda * lambda / u2 - beta_delta * lambda;
            let bound_exact = 8.0 * exponent.exp();
            let bound_unscaled = exponent.exp();
            let bound_log = (-c * r.s2_end.ln().ln()).exp();
            let valid = r.s2_end >= eta.threshold(n);
            Some(RealizedBound {
                s2_end: r.s2_end,
                u2,
                lambda,
                p,
                bound_exact,
                bound_unscaled,
                bound_log,
                valid,
                exact_le_final: bound_exact <= bound_final * REL,
                unscaled_chain: bound_unscaled <= bound_log * REL && bound_log <= bound_final * REL,
                gate: r.alpha_end.map(|alpha| BlockGate {
                    alpha,
                    alpha_max: params.alpha_gate(),
                    alpha_ok: alpha <= params.alpha_gate(),
                    p_ok: p >= 4.0,
                }),
            })
        }
    };
    Ok(BlockBound {
        n,
        exponent: c,
        u2_lower,
        lambda_closed,
        p_closed: lambda_closed * beta_delta,
        bound_closed: 8.0 * (-c * u2_lower).exp(),
        bound_final,
        realized,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn worked_point() -> BlockParams {
        BlockParams::new(Eta::new(0.5f64.exp()).unwrap(), 3f64.sqrt() - 1.0, 0.5).unwrap()
    }

    #[test]
    fn worked_point_final_bound() {
        let p = worked_point();
        assert!((p.eta.log_threshold(1) - 1.0).abs() < 1e-15);
        assert!((p.exponent() - 2.0).abs() < 1e-15);
        let b = block_tail_bound(10, &p, None).unwrap();
        assert!((b.bound_final - 1e-2).abs() < 1e-12);
        // closed-form λ uses L(e^{10}) = ln 10
        assert!((b.u2_lower - 10f64.ln()).abs() < 1e-14);
    }

    #[test]
    fn beta_two_delta_eps_exponent() {
        for d in [0.1, 0.4, 0.9] {
            let p = BlockParams::new(Eta::new(1.5).unwrap(), d, d).unwrap();
            assert!((p.exponent() - (1.0 + d)).abs() < 1e-14);
        }
    }

    #[test]
    fn series_convergence_threshold() {
        let converging = BlockParams::new(Eta::new(1.5).unwrap(), 0.1, 0.1).unwrap();
        let diverging = BlockParams::new(Eta::new(1.5).unwrap(), 0.1, 0.3).unwrap();
        assert!(converging.exponent() > 1.0);
        assert!(diverging.exponent() < 1.0);
        let partial = |p: &BlockParams, n: usize| (1..=n).map(|k| p.bound_final(k)).sum::<f64>();
        // a p-series: the diverging one keeps growing by a constant factor per
        // decade, the converging one grows ever slower
        let g1 = partial(&diverging, 100_000) - partial(&diverging, 10_000);
        let g2 = partial(&converging, 100_000) - partial(&converging, 10_000);
        assert!(g1 > 2.0 && g2 < 2.5 && g2 < g1);
    }

    #[test]
    fn realized_bound_chain() {
        let p = BlockParams::new(Eta::new(1.5).unwrap(), 0.1, 0.1).unwrap();
        let n = 20;
        let s2 = p.eta.threshold(n + 1);
        let b = block_tail_bound(n, &p, Some(RealizedBlock { s2_end: s2, alpha_end: Some(0.05) })).unwrap();
        let r = b.realized.unwrap();
        assert!(r.valid);
        assert!(r.unscaled_chain);
        // with the prefactor 8 the comparison with the final bound cannot hold
        assert!(!r.exact_le_final);
        assert!((r.bound_unscaled - (-p.exponent() * r.u2).exp()).abs() < 1e-15);
        let g = r.gate.unwrap();
        assert!(g.alpha_ok);
        assert_eq!(g.p_ok, r.p >= 4.0);
    }

    #[test]
    fn scalar_inequality() {
        let z = scalar_power_exp_bound(0.0, 3.0).unwrap();
        assert_eq!(z.lhs, 0.0);
        assert!((z.rhs - 2.0 * (3f64 / std::f64::consts::E).powi(3)).abs() < 1e-12);
        for p in [1.0, 2.5, 10.0, 64.0] {
            assert!(scalar_power_exp_bound(p, p).unwrap().holds);
            assert!(scalar_power_exp_bound(-p, p).unwrap().holds);
        }
        let mut violations = 0;
        for i in 0..=400 {
            let u = -50.0 + 0.25 * i as f64;
            for j in 0..=63 {
                let p = 1.0 + j as f64;
                if !scalar_power_exp_bound(u, p).unwrap().holds {
                    violations += 1;
                }
            }
        }
        assert_eq!(violations, 0);
        assert!(scalar_power_exp_bound(1.0, 0.5).is_err());
    }

    #[test]
    fn rejects_domain_violations() {
        let eta = Eta::new(1.5).unwrap();
        assert!(BlockParams::new(eta, 0.0, 0.5).is_err());
        assert!(BlockParams::new(eta, 0.1, 1.5).is_err());
        assert!(block_tail_bound(0, &BlockParams::new(eta, 0.1, 0.1).unwrap(), None).is_err());
    }
}
