//! Moduli of smoothness of the square wave against the closed form
//! ω_1(sign sin, h)_p = 2(h/π)^{1/p}, and a fractional-order curve.

use fracsmooth::corpus::{sign_sin_modulus, CorpusSpec};
use fracsmooth::quasinorm::QuadratureSpec;
use fracsmooth::smoothness::{dyadic_steps, modulus_curve, ModulusOptions};
use fracsmooth::verifier::fit_rate;

fn main() -> fracsmooth::Result<()> {
    let f = CorpusSpec::SignSin.build()?;
    let q = QuadratureSpec::default();
    let opts = ModulusOptions::default();
    let hs = dyadic_steps(3, 10);
    let (curve, flagged) = modulus_curve(&f, 1.0, 0.5, &hs, &q, &opts)?;
    println!("{:>10} {:>14} {:>14}", "h", "omega_1", "closed form");
    for &(h, w) in curve.entries() {
        println!("{h:>10.6} {w:>14.6e} {:>14.6e}", sign_sin_modulus(h, 0.5));
    }
    println!("slope {:.4}, flagged {flagged}", fit_rate(curve.entries())?.slope);

    let (frac, flagged) = modulus_curve(&f, 1.5, 0.5, &dyadic_steps(3, 5), &q, &opts)?;
    for &(h, w) in frac.entries() {
        println!("omega_1.5({h:.6}) = {w:.6e}");
    }
    println!("fractional curve flagged {flagged}");
    curve.write_csv(std::io::stdout())?;
    Ok(())
}
