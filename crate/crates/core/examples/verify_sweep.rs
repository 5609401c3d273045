//! A theorem sweep end to end: JACKSON over two step functions, written as
//! the report CSV with the summary JSON on stderr.

use fracsmooth::corpus::{default_jumps, CorpusSpec};
use fracsmooth::verifier::{sweep, write_reports_csv, Env, SweepConfig};

fn main() -> fracsmooth::Result<()> {
    let env = Env::default();
    let cfg = SweepConfig {
        id: "JACKSON".into(),
        functions: vec![CorpusSpec::SignSin, default_jumps()],
        p: vec![0.5],
        beta: vec![1.0],
        n: vec![4, 8, 16],
        ..SweepConfig::default()
    };
    let out = sweep(&cfg, &env)?;
    write_reports_csv(&out.reports, std::io::stdout())?;
    eprintln!("{}", serde_json::to_string_pretty(&out.summary)?);
    Ok(())
}
