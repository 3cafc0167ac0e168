//! η-adic block pipeline on streamed Rademacher paths.
//!
//! `cargo run --release --example lil_run -- [paths] [horizon]`

use nclil::lil::{run_lil_experiment, LilConfig, LilParameters, LilSource};
use nclil::martingale::SampledSpec;

fn main() -> nclil::Result<()> {
    let mut args = std::env::args().skip(1).map(|a| a.parse::<usize>().expect("integer argument"));
    let paths = args.next().unwrap_or(1024);
    let horizon = args.next().unwrap_or(100_000);
    let config = LilConfig {
        source: LilSource::Sampled(SampledSpec::rademacher(paths, horizon, 0)),
        params: LilParameters::new(1.5, 0.1, 0.1, 0.1)?,
        seed: 2026,
        allow_pre_asymptotic: false,
    };
    let r = run_lil_experiment(&config)?;
    println!("N1={:?} N2={:?} n0={:?}", r.n1, r.n2, r.n0);
    println!(" n      k_n  k_n+1  probc(direct)  probc(rescaled)  bound_final");
    for b in r.blocks.iter().filter(|b| b.gated) {
        println!(
            "{:2} {:8} {:6} {:14.5} {:16.5} {:12.5}",
            b.n, b.k_n, b.k_next, b.probc_direct, b.probc_rescaled, b.bound.bound_final
        );
    }
    println!(
        "window from n={}: limsup ||r_m e|| = {:.4} (threshold {:.2}), deficit {:.4}, quantile K = {:.4}",
        r.window_start,
        r.empirical_limsup,
        config.params.direct_threshold(),
        r.deficit,
        r.quantile_limsup
    );
    println!("full tail: {:?}", r.sensitivity);
    Ok(())
}
