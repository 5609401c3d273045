//! L_p quasi-norms of the standard corpus, and the p-triangle inequality
//! that replaces subadditivity below p = 1.

use fracsmooth::corpus::{standard_corpus, CorpusSpec};
use fracsmooth::quasinorm::{lp_distance, lp_norm, QuadratureSpec};

fn main() -> fracsmooth::Result<()> {
    let q = QuadratureSpec::default();
    println!("{:<14} {:>12} {:>12} {:>12}", "kind", "p=0.5", "p=0.75", "p=2");
    for spec in standard_corpus() {
        let f = spec.build()?;
        let v: Vec<String> = [0.5, 0.75, 2.0]
            .iter()
            .map(|&p| lp_norm(&f, p, &q).map(|e| format!("{:.6e}", e.value)))
            .collect::<fracsmooth::Result<_>>()?;
        println!("{:<14} {:>12} {:>12} {:>12}", spec.kind(), v[0], v[1], v[2]);
    }

    // ‖f − g‖^p ≤ ‖f‖^p + ‖g‖^p, while the plain triangle inequality fails
    let f = CorpusSpec::SignSin.build()?;
    let g = CorpusSpec::Fejer { n: 4 }.build()?;
    let p = 0.5;
    let d = lp_distance(&f, &g, p, &q)?.value;
    let (a, b) = (lp_norm(&f, p, &q)?.value, lp_norm(&g, p, &q)?.value);
    println!("\np = {p}: |f - g| = {d:.6}, |f| + |g| = {:.6}", a + b);
    println!("p-triangle: {:.6} <= {:.6}", d.powf(p), a.powf(p) + b.powf(p));
    Ok(())
}
