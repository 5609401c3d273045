//! Krotov primitives: integrating a jump function β − 1 times gives the
//! optimal decay ω_β(f, h)_p ≍ h^{β + 1/p − 1}.

use fracsmooth::corpus::{default_jumps, CorpusSpec};
use fracsmooth::verifier::{sweep, Env, SweepConfig};

fn main() -> fracsmooth::Result<()> {
    let env = Env::default();
    for (beta, p) in [(2.0, 0.5), (3.0, 0.5), (2.0, 0.75)] {
        let out = sweep(
            &SweepConfig {
                id: "KROTOV-SLOPE".into(),
                functions: vec![CorpusSpec::Krotov { beta, of: Box::new(default_jumps()), cutoff: None }],
                p: vec![p],
                beta: vec![beta],
                h: (3..=9).map(|j| 2f64.powi(-j)).collect(),
                ..SweepConfig::default()
            },
            &env,
        )?;
        let s = out.summary;
        println!(
            "beta {beta}, p {p}: slope {:.4}, target {:.4}, pass {:?}",
            s.slope.unwrap_or(f64::NAN),
            s.slope_target.unwrap_or(f64::NAN),
            s.pass
        );
    }
    Ok(())
}
