//! Bernstein-type ratios sup ‖T^{(α)}‖_p / ‖T‖_p over a candidate set, in the
//! three regimes of α relative to 1/p − 1.

use fracsmooth::best_approx::{bernstein_sup, SolverOptions};
use fracsmooth::smoothness::bernstein_rate;
use fracsmooth::verifier::fit_rate;

fn main() -> fracsmooth::Result<()> {
    let opts = SolverOptions::default();
    for alpha in [2.0, 1.0, 0.4] {
        let mut pts = Vec::new();
        for n in [4usize, 8, 16, 32] {
            let b = bernstein_sup(n, alpha, 0.5, &opts)?;
            println!("alpha {alpha}, n {n:>3}: sup {:.4e} ({}), rate {:.4e}", b.value, b.argmax, bernstein_rate(n, alpha, 0.5));
            pts.push((n as f64, b.value));
        }
        println!("alpha {alpha}: slope {:.3}\n", fit_rate(&pts)?.slope);
    }
    Ok(())
}
