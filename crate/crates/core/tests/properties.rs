//! Cross-module invariants and values frozen from closed forms.

use proptest::prelude::*;

use nclil::filtration::{AlgebraModel, ModelKind};
use nclil::lil::{quantile_cutoff, semicircle_cdf};
use nclil::martingale::{
    gen_martingale, iterlog, BoundSequence, Coupling, DiagonalMartingale, Eta, GeneratorSpec, IncrementLaw,
    SampledSpec,
};
use nclil::random::{gaussian_matrix, random_hermitian};
use nclil::rng::stream;
use nclil::tail::{
    block_tail_bound, chebyshev_bound, column_maximal_norm_bounds, exp_moment_sides, probc_upper,
    scalar_power_exp_bound, BlockParams, ExpIneqParams,
};
use nclil::Operator;

fn model_strategy() -> impl Strategy<Value = AlgebraModel> {
    (0usize..3, 2usize..=4).prop_map(|(k, n)| {
        let kind = [ModelKind::Tensor, ModelKind::Pinching, ModelKind::Diagonal][k];
        AlgebraModel::new(kind, 2, n).unwrap()
    })
}

fn generator_strategy() -> impl Strategy<Value = GeneratorSpec> {
    (0.05f64..3.0, any::<bool>(), any::<bool>()).prop_map(|(c, growth, haar)| {
        let bounds = if growth { BoundSequence::Growth { c } } else { BoundSequence::Constant(c) };
        GeneratorSpec::new(bounds, if haar { Coupling::Haar } else { Coupling::None })
    })
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(32))]

    #[test]
    fn generated_paths_are_martingales(model in model_strategy(), spec in generator_strategy(), seed in any::<u64>()) {
        let path = gen_martingale(model, &spec, seed).unwrap();
        prop_assert!(path.martingale_residual().unwrap() <= 1e-9);
        let s2 = path.stats().s2();
        prop_assert!(s2.windows(2).all(|w| w[1] >= w[0]));
        prop_assert!(path.stats().u().iter().all(|u| *u >= 1.0));
    }

    #[test]
    fn exponential_inequality_on_random_paths(
        model in model_strategy(),
        spec in generator_strategy(),
        seed in any::<u64>(),
        eps in 0.05f64..=1.0,
        frac in 0.0f64..=1.0,
    ) {
        let path = gen_martingale(model, &spec, seed).unwrap();
        let n = path.horizon();
        let probe = ExpIneqParams::tight(&path, n, eps, 0.0);
        let lambda = frac * ExpIneqParams::lambda_max(probe.m, eps);
        let sides = exp_moment_sides(&path, n, &ExpIneqParams { lambda, ..probe }).unwrap();
        prop_assert!(sides.holds, "margin {}", sides.margin());
    }

    #[test]
    fn probc_is_monotone_and_chebyshev_exact(model in model_strategy(), seed in any::<u64>()) {
        let path = gen_martingale(model, &GeneratorSpec::new(BoundSequence::Constant(1.0), Coupling::Haar), seed).unwrap();
        let family = &path.partials()[1..];
        let bounds = column_maximal_norm_bounds(family, 4.0).unwrap();
        prop_assert!(bounds.lower <= bounds.upper * (1.0 + 1e-9));
        let top = bounds.certificate.norm_inf() * 1.1 + 1e-9;
        let mut last = f64::INFINITY;
        for j in 1..=10 {
            let t = top * j as f64 / 10.0;
            let r = probc_upper(family, t, &bounds.certificate).unwrap();
            prop_assert!(r.max_xe <= t * (1.0 + 1e-8) + 1e-12);
            prop_assert!(r.s <= last);
            last = r.s;
            prop_assert!(chebyshev_bound(family, t, 4.0, &bounds).unwrap().exact);
        }
        prop_assert_eq!(last, 0.0);
    }

    #[test]
    fn singular_numbers_are_unitarily_scaled_invariants(dim in 1usize..12, seed in any::<u64>(), c in -3.0f64..3.0) {
        let mut rng = stream(seed, 0, "prop-mu");
        let x = Operator::new(gaussian_matrix(dim, &mut rng)).unwrap();
        let mut prev = f64::INFINITY;
        for j in 0..20 {
            let t = 0.001 + 0.998 * j as f64 / 19.0;
            let mu = x.singular_number(t).unwrap();
            prop_assert!(mu <= prev + 1e-12);
            prev = mu;
            prop_assert!((x.adjoint().singular_number(t).unwrap() - mu).abs() <= 1e-9 * (1.0 + mu));
            prop_assert!((x.scale(c).singular_number(t).unwrap() - c.abs() * mu).abs() <= 1e-9 * (1.0 + mu));
        }
    }

    #[test]
    fn hermitian_functional_calculus_round_trips(dim in 1usize..16, seed in any::<u64>()) {
        let mut rng = stream(seed, 0, "prop-fc");
        let h = random_hermitian(dim, &mut rng);
        let back = h.eigh().unwrap().reconstruct();
        prop_assert!(back.dist(&h) <= 1e-10 * (1.0 + h.norm_inf()));
        let sq = h.apply_function(|v| v * v).unwrap();
        prop_assert!(sq.dist(&h.square()) <= 1e-9 * (1.0 + h.norm_inf().powi(2)));
    }

    #[test]
    fn quantile_cutoff_leaves_less_than_eps_above(values in proptest::collection::vec(0.0f64..10.0, 1..200), eps in 0.001f64..0.999) {
        let (level, frac) = quantile_cutoff(&values, eps);
        prop_assert!(frac < eps);
        let above = values.iter().filter(|v| **v > level).count();
        prop_assert_eq!(frac, above as f64 / values.len() as f64);
        prop_assert!(values.contains(&level));
    }

    #[test]
    fn scalar_power_exp_holds(u in -60.0f64..60.0, p in 1.0f64..64.0) {
        prop_assert!(scalar_power_exp_bound(u, p).unwrap().holds);
    }

    #[test]
    fn sampled_partials_are_diagonal_and_bounded(pairs in 1usize..32, horizon in 1usize..300, seed in any::<u64>(), uniform in any::<bool>()) {
        let law = if uniform { IncrementLaw::Uniform } else { IncrementLaw::Rademacher };
        let m = DiagonalMartingale::new(SampledSpec { law, ..SampledSpec::rademacher(2 * pairs, horizon, seed) }).unwrap();
        let x = m.partial(horizon).unwrap();
        prop_assert!(x.is_diagonal());
        prop_assert!(x.norm_inf() <= horizon as f64 * law.ess_sup() + 1e-9);
        prop_assert!(x.tau().abs() <= 1e-9 * (1.0 + horizon as f64), "antithetic pairs center the trace");
    }
}

#[test]
fn frozen_closed_forms() {
    // ln ln 10^6
    assert!((iterlog(1e6).unwrap() - 2.625791914476011).abs() < 1e-14);
    assert_eq!(iterlog(10.0).unwrap(), 1.0);
    // [(2 ln 1.5) 10]^{-1.1}
    let params = BlockParams::new(Eta::new(1.5).unwrap(), 0.1, 0.1).unwrap();
    let b = block_tail_bound(10, &params, None).unwrap();
    assert!((b.bound_final - 0.1000272130395083).abs() < 1e-15);
    // with the clamp inactive, 8 exp(-c' ln((2 ln η) n)) = 8 bound_final
    assert!((b.bound_closed - 8.0 * b.bound_final).abs() < 1e-13);
    // √ε / (M (1+ε)) at M = 1, ε = 1/2
    assert!((ExpIneqParams::lambda_max(1.0, 0.5) - 0.47140452079103173).abs() < 1e-16);
    // μ_t of diag(4,3,2,1): floor convention on the counting function
    let x = Operator::diagonal(vec![4.0, 3.0, 2.0, 1.0]);
    assert_eq!(x.singular_number(0.5).unwrap(), 2.0);
    assert_eq!(x.singular_number(0.49).unwrap(), 3.0);
    assert_eq!(x.singular_number(0.999).unwrap(), 1.0);
    // semicircle: symmetric, F(2) = 1
    assert!((semicircle_cdf(0.7) + semicircle_cdf(-0.7) - 1.0).abs() < 1e-15);
    assert_eq!(semicircle_cdf(2.0), 1.0);
}
