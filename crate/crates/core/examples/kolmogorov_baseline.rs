//! Classical LIL statistic max |S_n| / sqrt(n L(n)) over the last decade.
//!
//! `cargo run --release --example kolmogorov_baseline -- [paths] [horizon]`

use nclil::lil::{scalar_kolmogorov_baseline, BaselineConfig, BaselineLaw};

fn main() -> nclil::Result<()> {
    let mut args = std::env::args().skip(1).map(|a| a.parse::<usize>().expect("integer argument"));
    let paths = args.next().unwrap_or(1000);
    let horizon = args.next().unwrap_or(100_000);
    for law in [BaselineLaw::Rademacher, BaselineLaw::Alternating] {
        let r = scalar_kolmogorov_baseline(&BaselineConfig { paths, horizon, seed: 1, law })?;
        println!(
            "{law:?}: median {:.4}  q95 {:.4}  max {:.4}  P(>2) {:.4}  pre-asymptotic {}",
            r.median, r.q95, r.max, r.frac_above_2, r.pre_asymptotic
        );
    }
    println!("asymptote sqrt(2) = {:.4}", 2f64.sqrt());
    Ok(())
}
