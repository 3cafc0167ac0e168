//! Spectral calculus on a small hermitian operator: eigenvalues, spectral
//! projections, L_p norms and generalized singular numbers.

use nclil::{Interval, Operator};

fn main() -> nclil::Result<()> {
    let x = Operator::from_real_rows(3, &[2.0, 1.0, 0.0, 1.0, 2.0, 0.0, 0.0, 0.0, -1.0])?;
    println!("eigenvalues      {:?}", x.eigenvalues()?);
    println!("tau(x)           {:.6}", x.tau());
    println!("||x||_inf        {:.6}", x.norm_inf());
    for p in [1.0, 2.0, 4.0] {
        println!("||x||_{p}         {:.6}", x.lp_norm(p)?);
    }
    let e = x.spectral_projection(Interval::above(1.5))?;
    println!("tau(1_(1.5,inf)) {:.6}", e.trace());
    for t in [0.1, 0.3, 0.5, 0.9] {
        println!("mu_{t}(x)          {:.6}", x.singular_number(t)?);
    }
    let ex = x.apply_function(f64::exp)?;
    println!("tau(exp x)       {:.6}", ex.tau());
    Ok(())
}
