//! Fractional differences of the square wave: the summation method depends
//! on the order and on whether the step is a rational multiple of 2π.

use std::f64::consts::TAU;

use fracsmooth::corpus::CorpusSpec;
use fracsmooth::fractional::{frac_difference, gbinom, TruncationPolicy};
use fracsmooth::quasinorm::{lp_norm, QuadratureSpec};

fn main() -> fracsmooth::Result<()> {
    let f = CorpusSpec::SignSin.build()?;
    let policy = TruncationPolicy::default();
    let q = QuadratureSpec::default();
    println!("binom(0.5, v): {:?}", (0..6).map(|v| gbinom(0.5, v)).collect::<Vec<_>>());
    for (alpha, delta) in [(1.0, 0.1), (2.0, 0.1), (1.5, TAU / 64.0), (2.5, 0.1)] {
        let d = frac_difference(&f, alpha, delta, &policy)?;
        let norm = lp_norm(&d.spec, 0.5, &q)?;
        println!(
            "alpha {alpha:<4} delta {delta:.5}: {:?}, {} terms, tail bound {:.1e}, |D f|_1/2 = {:.6e}",
            d.method, d.terms, d.tail_bound, norm.value
        );
    }
    Ok(())
}
