//! Best trigonometric approximation in L_{1/2}: the constant case shows the
//! nonconvexity (the minimizer is ±1, not the mean), then a table of E_n.

use fracsmooth::best_approx::{best_approx, best_approx_table, SolverOptions};
use fracsmooth::corpus::CorpusSpec;
use fracsmooth::quasinorm::QuadratureSpec;
use fracsmooth::verifier::fit_rate;

fn main() -> fracsmooth::Result<()> {
    let f = CorpusSpec::SignSin.build()?;
    let q = QuadratureSpec::default();
    let opts = SolverOptions { restarts: 3, ..SolverOptions::default() };
    let e0 = best_approx(&f, 0, 0.5, &opts, &q)?;
    println!("E_0 = {:.6} at c = {:.6} (the mean 0 would give 1.0)", e0.value, e0.polynomial.coeff(0).re);

    let (table, results) = best_approx_table(&f, 24, 0.5, &opts, &q)?;
    for (n, r) in results.iter().enumerate().filter(|(n, _)| n % 4 == 1 || *n == 24) {
        println!("n = {n:>2}: E_n = {:.6e} ({})", table.get(n), r.status.as_str());
    }
    let pts: Vec<(f64, f64)> = (5..=24).step_by(2).map(|n| (n as f64, table.get(n))).collect();
    println!("odd-n slope over [5, 23]: {:.3}", fit_rate(&pts)?.slope);
    Ok(())
}
