//! Weyl derivatives: exact on polynomials, spectral with a tail estimate on
//! functions that only carry a Fourier rule.

use fracsmooth::corpus::CorpusSpec;
use fracsmooth::fractional::{weyl, weyl_of_spec};
use fracsmooth::quasinorm::{lp_norm, QuadratureSpec};

fn main() -> fracsmooth::Result<()> {
    let q = QuadratureSpec::default();
    let t = CorpusSpec::Fejer { n: 6 }.build()?;
    let t = t.polynomial().expect("Fejér kernel is a polynomial").clone();
    let half = weyl(&weyl(&t, 0.5), 0.5);
    let one = weyl(&t, 1.0);
    let gap = (0..=6).map(|k| (half.coeff(k) - one.coeff(k)).norm()).fold(0.0, f64::max);
    println!("D^1/2 D^1/2 vs D^1 on the Fejer kernel: max coefficient gap {gap:.1e}");

    let k = CorpusSpec::Krotov { beta: 2.5, of: Box::new(fracsmooth::corpus::default_jumps()), cutoff: None }.build()?;
    for cutoff in [256, 1024, 4096] {
        let w = weyl_of_spec(&k, 0.5, cutoff, 4 * cutoff)?;
        let n = lp_norm(&w.spec, 0.5, &q)?.value;
        println!("Krotov beta=2.5, D^0.5 with cutoff {cutoff:>5}: |.|_1/2 = {n:.6}, tail {:.2e}, flagged {}", w.tail_estimate, w.flagged);
    }
    Ok(())
}
