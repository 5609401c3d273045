//! The realization functional R_α(f, δ)_p, the computable stand-in for the
//! K-functional when p < 1, compared with the modulus it is equivalent to.

use fracsmooth::best_approx::SolverOptions;
use fracsmooth::corpus::CorpusSpec;
use fracsmooth::quasinorm::QuadratureSpec;
use fracsmooth::smoothness::{modulus, realization, ModulusOptions};

fn main() -> fracsmooth::Result<()> {
    let f = CorpusSpec::FR { r: 1 }.build()?;
    let q = QuadratureSpec::default();
    let opts = SolverOptions { restarts: 3, ..SolverOptions::default() };
    for delta in [0.25, 0.125, 0.0625] {
        let r = realization(&f, 2.0, delta, 0.5, &opts, &q)?;
        let w = modulus(&f, 2.0, delta, 0.5, &q, &ModulusOptions::default())?.value;
        println!(
            "delta {delta:<7}: R = {:.4e} (|f - T| {:.3e}, delta^2 |T''| {:.3e}), omega_2 = {w:.4e}, ratio {:.3}",
            r.value,
            r.parts.0,
            r.parts.1,
            r.value / w
        );
    }
    Ok(())
}
