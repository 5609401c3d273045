//! The ramp functions φ_{n,1} against the triangle wave f_1 at p = 1/2: the
//! single-term direct estimate E_n(φ) ≤ C n^{-1}‖φ'‖_p fails by a factor
//! that grows with n.

use fracsmooth::corpus::CorpusSpec;
use fracsmooth::verifier::{sweep, Env, SweepConfig};

fn main() -> fracsmooth::Result<()> {
    let env = Env::default();
    let out = sweep(
        &SweepConfig {
            id: "SHARPNESS".into(),
            functions: vec![CorpusSpec::FR { r: 1 }],
            p: vec![0.5],
            r: vec![1],
            n: vec![4, 8, 16, 32],
            ..SweepConfig::default()
        },
        &env,
    )?;
    println!("{:>4} {:>12} {:>12} {:>14}", "n", "|f_1 - T|", "|T'|", "single-term");
    for r in &out.reports {
        println!(
            "{:>4} {:>12.4e} {:>12.4e} {:>14.4e}",
            r.case.params.n.unwrap(),
            r.lhs,
            r.rhs,
            r.extras["single_term_factor"]
        );
    }
    let g = &out.summary.groups[0];
    println!("slopes: |f_1 - T| {:.3}, |T'| {:.3}", g.slope.unwrap_or(f64::NAN), g.rhs_slope.unwrap_or(f64::NAN));
    Ok(())
}
