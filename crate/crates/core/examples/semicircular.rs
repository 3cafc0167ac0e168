//! Sums of free-like GUE increments: ||Σ g_i|| / sqrt(n L(n)) decays.
//!
//! `cargo run --release --example semicircular -- [size] [steps]`

use nclil::lil::{semicircular_demo, SemicircularConfig};

fn main() -> nclil::Result<()> {
    let mut args = std::env::args().skip(1).map(|a| a.parse::<usize>().expect("integer argument"));
    let size = args.next().unwrap_or(100);
    let steps = args.next().unwrap_or(2000);
    let r = semicircular_demo(&SemicircularConfig { size, steps, seed: 0, per_decade: 5 })?;
    for p in &r.points {
        println!("n={:6}  ||sum||/sqrt(n) = {:.4}  statistic = {:.4}", p.n, p.norm / (p.n as f64).sqrt(), p.statistic);
    }
    println!("decreasing: {}  KS at n=100: {:?}", r.decreasing, r.ks_distance);
    Ok(())
}
