//! Dense martingales with Haar coupling and the η-adic stopping rule on a
//! streamed classical martingale.

use nclil::filtration::AlgebraModel;
use nclil::martingale::{
    all_stopping_indices, gen_martingale, growth_profile, BoundSequence, Coupling, DiagonalMartingale, Eta,
    GeneratorSpec, SampledSpec,
};

fn main() -> nclil::Result<()> {
    let model = AlgebraModel::tensor(2, 6)?;
    let spec = GeneratorSpec::new(BoundSequence::Growth { c: 0.5 }, Coupling::Haar);
    let path = gen_martingale(model, &spec, 3)?;
    println!("martingale residual {:.2e}", path.martingale_residual()?);
    println!("max ||[d_j, d_k]||  {:.4}", path.max_commutator());
    let stats = path.stats();
    for n in 1..=path.horizon() {
        println!("n={n}  s_n^2={:.4}  ||d_n||={:.4}  alpha_n={:?}", stats.s2()[n], stats.dnorm()[n], stats.alpha(n));
    }

    let sampled = DiagonalMartingale::new(SampledSpec::rademacher(64, 100_000, 1))?;
    let stops = all_stopping_indices(sampled.stats().s2(), Eta::new(1.5)?);
    println!("stopping indices k_n (eta = 1.5): {:?}", stops.k);
    let profile = growth_profile(sampled.stats(), None);
    println!("alpha_n decade slope {:?}", profile.decade_slope);
    Ok(())
}
