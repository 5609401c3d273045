//! Command-line front end.
//!
//! Every command prints a one-line summary on stdout and writes its artifact
//! (CSV or JSON) to `--out`; `--out -` sends the artifact to stdout as well.
//! Options come from an optional JSON config file, with flags taking
//! precedence. Exit codes: 0 success, 1 usage or I/O error, 2 when results
//! were written but carry numerical flags.

use std::collections::BTreeMap;
use std::ffi::OsString;
use std::fs::File;
use std::io::{BufWriter, Write};
use std::path::PathBuf;

use clap::{Args, CommandFactory, FromArgMatches, Parser, Subcommand, ValueEnum};
use serde::{Deserialize, Serialize};
use serde_json::Value;

use crate::best_approx::{best_approx, SolverStatus};
use crate::corpus::CorpusSpec;
use crate::error::{invalid, Error, Result};
use crate::fractional::{frac_difference, weyl_of_spec};
use crate::quasinorm::{lp_norm, QuadratureSpec};
use crate::smoothness::{fmt_f64, modulus, realization, ModulusOptions};
use crate::verifier::{self, read_columns, sweep, Env, SweepConfig, SweepOutcome, REGISTRY};

#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, ValueEnum, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Format {
    #[default]
    Csv,
    Json,
}

#[derive(Debug, Parser)]
#[command(name = "fracsmooth", version, about = "Fractional smoothness and best approximation in periodic L_p, 0 < p < 1")]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
    #[command(flatten)]
    pub opts: CommonArgs,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Subcommand)]
pub enum Command {
    /// L_p quasi-norm of a function for each --p
    Norm,
    /// Fractional difference of order --alpha and step --h, sampled
    Fracdiff,
    /// Weyl derivative of order --alpha, Fourier coefficients up to --n
    Weyl,
    /// Modulus of smoothness of order --alpha at each --h
    Modulus,
    /// Best approximation E_n(f)_p for each --n
    Bestapprox,
    /// Realization functional of order --alpha at delta = --h
    Realization,
    /// Evaluate one theorem id (--case) over the given parameters
    Verify,
    /// As verify, plus the JSON summary with bands, stability and slope fits
    Sweep,
    /// Fit a log-log slope to two columns of a CSV file
    Slope,
}

/// Numeric flags accept comma-separated lists, e.g. `--n 8,16,32`.
#[derive(Debug, Clone, Default, Args)]
pub struct CommonArgs {
    /// Function as a JSON record, e.g. '{"kind":"sign_sin"}'
    #[arg(long = "f", global = true)]
    pub function: Option<String>,
    #[arg(long, global = true)]
    pub p: Option<String>,
    #[arg(long, global = true)]
    pub alpha: Option<String>,
    #[arg(long, global = true)]
    pub beta: Option<String>,
    #[arg(long, global = true)]
    pub n: Option<String>,
    #[arg(long, global = true)]
    pub h: Option<String>,
    #[arg(long, global = true)]
    pub lambda: Option<String>,
    #[arg(long, global = true)]
    pub q: Option<String>,
    #[arg(long, global = true)]
    pub r: Option<String>,
    /// Theorem id for verify and sweep
    #[arg(long, global = true)]
    pub case: Option<String>,
    /// JSON config file; flags override its entries
    #[arg(long, global = true)]
    pub config: Option<PathBuf>,
    /// Artifact path, or '-' for stdout
    #[arg(long, global = true)]
    pub out: Option<PathBuf>,
    #[arg(long, global = true, value_enum)]
    pub format: Option<Format>,
    #[arg(long, global = true)]
    pub seed: Option<u64>,
    /// Worker threads
    #[arg(long, global = true)]
    pub jobs: Option<usize>,
    /// Solver grid and quadrature base size
    #[arg(long = "grid-size", global = true)]
    pub grid_size: Option<usize>,
    #[arg(long, global = true)]
    pub restarts: Option<usize>,
    /// Upper index of truncated sums over E_v
    #[arg(long, global = true)]
    pub horizon: Option<usize>,
    /// Sample count for emitted curves (fracdiff)
    #[arg(long, global = true)]
    pub samples: Option<usize>,
    /// CSV input for slope
    #[arg(long = "in", global = true)]
    pub input: Option<PathBuf>,
    #[arg(long, global = true)]
    pub x: Option<String>,
    #[arg(long, global = true)]
    pub y: Option<String>,
    /// Abscissa window for slope: two values, lo hi
    #[arg(long, global = true, num_args = 2, allow_negative_numbers = true)]
    pub window: Option<Vec<f64>>,
}

/// A parameter given as one number or a list.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(untagged)]
pub enum Values {
    One(f64),
    Many(Vec<f64>),
}

impl Values {
    fn to_vec(&self) -> Vec<f64> {
        match self {
            Values::One(v) => vec![*v],
            Values::Many(v) => v.clone(),
        }
    }
}

/// Structured run configuration. `quadrature`, `solver` and `modulus` are
/// partial overrides merged onto the defaults.
#[derive(Clone, Debug, Default, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct RunConfig {
    pub command: Option<String>,
    pub case: Option<String>,
    pub function: Option<CorpusSpec>,
    pub functions: Vec<CorpusSpec>,
    pub params: BTreeMap<String, Values>,
    pub quadrature: Option<Value>,
    pub solver: Option<Value>,
    pub modulus: Option<Value>,
    pub horizon: Option<usize>,
    pub seed: Option<u64>,
    pub out: Option<PathBuf>,
    pub format: Option<Format>,
    pub jobs: Option<usize>,
    pub samples: Option<usize>,
    #[serde(rename = "in")]
    pub input: Option<PathBuf>,
    pub x: Option<String>,
    pub y: Option<String>,
    pub window: Option<(f64, f64)>,
}

const PARAM_NAMES: [&str; 8] = ["p", "alpha", "beta", "n", "h", "lambda", "q", "r"];

fn usage(msg: impl Into<String>) -> Error {
    invalid(msg)
}

fn parse_list(name: &str, s: &str) -> Result<Values> {
    let vals: std::result::Result<Vec<f64>, _> = s.split(',').map(|t| t.trim().parse::<f64>()).collect();
    match vals {
        Ok(v) if v.len() == 1 => Ok(Values::One(v[0])),
        Ok(v) if !v.is_empty() => Ok(Values::Many(v)),
        _ => Err(usage(format!("--{name}: expected a number or comma-separated numbers, got {s:?}"))),
    }
}

fn merge(base: &mut Value, over: &Value) {
    match (base, over) {
        (Value::Object(b), Value::Object(o)) => {
            for (k, v) in o {
                merge(b.entry(k.clone()).or_insert(Value::Null), v);
            }
        }
        (b, o) => *b = o.clone(),
    }
}

fn overlay<T: Serialize + for<'de> Deserialize<'de>>(base: &T, over: Option<&Value>, what: &str) -> Result<T> {
    let Some(over) = over else {
        return serde_json::from_value(serde_json::to_value(base)?).map_err(Error::from);
    };
    if !over.is_object() {
        return Err(usage(format!("config entry {what:?} must be an object")));
    }
    let mut v = serde_json::to_value(base)?;
    merge(&mut v, over);
    serde_json::from_value(v).map_err(|e| usage(format!("config entry {what:?}: {e}")))
}

/// Config file merged with command-line overrides.
#[derive(Debug, Clone)]
pub struct Resolved {
    pub command: Command,
    pub config: RunConfig,
    pub env: Env,
    pub format: Format,
}

impl Resolved {
    fn list(&self, name: &str) -> Vec<f64> {
        self.config.params.get(name).map(Values::to_vec).unwrap_or_default()
    }

    fn one(&self, name: &str) -> Result<Option<f64>> {
        match self.list(name).as_slice() {
            [] => Ok(None),
            [v] => Ok(Some(*v)),
            _ => Err(usage(format!("--{name} takes a single value for this command"))),
        }
    }

    fn need_one(&self, name: &str) -> Result<f64> {
        self.one(name)?.ok_or_else(|| usage(format!("--{name} is required")))
    }

    fn need_list(&self, name: &str) -> Result<Vec<f64>> {
        let v = self.list(name);
        if v.is_empty() {
            Err(usage(format!("--{name} is required")))
        } else {
            Ok(v)
        }
    }

    fn function(&self) -> Result<CorpusSpec> {
        match (&self.config.function, self.config.functions.as_slice()) {
            (Some(f), _) => Ok(f.clone()),
            (None, [f]) => Ok(f.clone()),
            _ => Err(usage("--f is required (a JSON function record)")),
        }
    }
}

fn to_index(name: &str, v: f64) -> Result<usize> {
    if v >= 0.0 && v.fract() == 0.0 && v < 1e9 {
        Ok(v as usize)
    } else {
        Err(usage(format!("--{name} must be a nonnegative integer, got {v}")))
    }
}

/// Merges the config file and the flags.
pub fn resolve(cli: &Cli) -> Result<Resolved> {
    let o = &cli.opts;
    let mut cfg: RunConfig = match &o.config {
        Some(path) => {
            let text = std::fs::read_to_string(path)
                .map_err(|e| usage(format!("cannot read config {}: {e}", path.display())))?;
            serde_json::from_str(&text).map_err(|e| usage(format!("config {}: {e}", path.display())))?
        }
        None => RunConfig::default(),
    };
    if let Some(c) = &cfg.command {
        let name = format!("{:?}", cli.command).to_lowercase();
        if !c.eq_ignore_ascii_case(&name) {
            return Err(usage(format!("config is for command {c:?} but {name:?} was invoked")));
        }
    }
    for name in cfg.params.keys() {
        if !PARAM_NAMES.contains(&name.as_str()) {
            return Err(usage(format!(
                "unknown parameter {name:?} in config; known: {}",
                PARAM_NAMES.join(", ")
            )));
        }
    }
    if let Some(f) = &o.function {
        let spec: CorpusSpec = serde_json::from_str(f).map_err(|e| usage(format!("--f: {e}")))?;
        cfg.function = Some(spec);
        cfg.functions.clear();
    }
    let flags = [
        ("p", &o.p),
        ("alpha", &o.alpha),
        ("beta", &o.beta),
        ("n", &o.n),
        ("h", &o.h),
        ("lambda", &o.lambda),
        ("q", &o.q),
        ("r", &o.r),
    ];
    for (name, v) in flags {
        if let Some(s) = v {
            cfg.params.insert(name.to_string(), parse_list(name, s)?);
        }
    }
    macro_rules! over {
        ($field:ident) => {
            if o.$field.is_some() {
                cfg.$field = o.$field.clone();
            }
        };
    }
    over!(case);
    over!(seed);
    over!(out);
    over!(format);
    over!(jobs);
    over!(horizon);
    over!(samples);
    over!(input);
    over!(x);
    over!(y);
    if let Some(w) = &o.window {
        cfg.window = Some((w[0], w[1]));
    }

    let mut env = Env::default();
    env.quadrature = overlay(&QuadratureSpec::default(), cfg.quadrature.as_ref(), "quadrature")?;
    env.solver = overlay(&env.solver, cfg.solver.as_ref(), "solver")?;
    env.modulus = overlay(&ModulusOptions::default(), cfg.modulus.as_ref(), "modulus")?;
    if let Some(g) = o.grid_size {
        if !g.is_power_of_two() || g < 16 {
            return Err(usage(format!("--grid-size must be a power of two ≥ 16, got {g}")));
        }
        env.solver.grid = Some(g);
        env.quadrature.base_size = g;
    }
    if let Some(r) = o.restarts {
        env.solver.restarts = r;
    }
    if let Some(h) = cfg.horizon {
        env.horizon = h;
    }
    env.seed = cfg.seed.unwrap_or(0);
    env.solver.seed = env.seed;
    env.quadrature.validate()?;
    env.solver.validate()?;
    Ok(Resolved {
        command: cli.command,
        format: cfg.format.unwrap_or_default(),
        config: cfg,
        env,
    })
}

/// Help epilogue listing the registry.
pub fn registry_help() -> String {
    let mut s = String::from("Theorem ids for --case:\n");
    for t in REGISTRY {
        s.push_str(&format!("  {:<22}{}\n", t.id, t.summary));
    }
    s
}

fn build_command() -> clap::Command {
    let help = registry_help();
    Cli::command()
        .after_help(help.clone())
        .mut_subcommand("verify", |c| c.after_help(help.clone()))
        .mut_subcommand("sweep", |c| c.after_help(help.clone()))
}

/// Result of one command: the summary line, the artifact and whether
/// numerical flags were raised.
pub struct Outcome {
    pub summary: String,
    pub artifact: Vec<u8>,
    pub flagged: bool,
}

fn csv_bytes(header: &[&str], rows: &[Vec<String>]) -> Result<Vec<u8>> {
    let mut w = csv::Writer::from_writer(Vec::new());
    w.write_record(header)?;
    for r in rows {
        w.write_record(r)?;
    }
    w.into_inner().map_err(|e| usage(e.to_string()))
}

fn json_bytes<T: Serialize>(v: &T) -> Result<Vec<u8>> {
    let mut b = serde_json::to_vec_pretty(v)?;
    b.push(b'\n');
    Ok(b)
}

fn artifact<T: Serialize>(fmt: Format, header: &[&str], rows: &[Vec<String>], json: &T) -> Result<Vec<u8>> {
    match fmt {
        Format::Csv => csv_bytes(header, rows),
        Format::Json => json_bytes(json),
    }
}

fn cmd_norm(r: &Resolved) -> Result<Outcome> {
    let f = r.function()?.build()?;
    let mut rows = Vec::new();
    let mut recs = Vec::new();
    let mut flagged = false;
    let mut vals = Vec::new();
    for p in r.need_list("p")? {
        let e = lp_norm(&f, p, &r.env.quadrature)?;
        flagged |= !e.converged;
        vals.push(fmt_f64(e.value));
        rows.push(vec![
            fmt_f64(p),
            fmt_f64(e.value),
            fmt_f64(e.error_estimate),
            e.converged.to_string(),
            e.exact.to_string(),
        ]);
        recs.push(serde_json::json!({"p": p, "estimate": e}));
    }
    Ok(Outcome {
        summary: vals.join(" "),
        artifact: artifact(r.format, &["p", "norm", "error_estimate", "converged", "exact"], &rows, &recs)?,
        flagged,
    })
}

fn cmd_fracdiff(r: &Resolved) -> Result<Outcome> {
    let f = r.function()?.build()?;
    let alpha = r.need_one("alpha")?;
    let h = r.need_one("h")?;
    let d = frac_difference(&f, alpha, h, &r.env.modulus.policy)?;
    let m = r.config.samples.unwrap_or(512).max(1);
    let rows: Vec<Vec<String>> = (0..m)
        .map(|j| {
            let x = std::f64::consts::TAU * j as f64 / m as f64;
            let v = d.spec.eval(x);
            vec![fmt_f64(x), fmt_f64(v.re), fmt_f64(v.im)]
        })
        .collect();
    let mut summary = format!("method={:?} terms={} tail_bound={}", d.method, d.terms, fmt_f64(d.tail_bound));
    let mut flagged = d.capped;
    if let Some(p) = r.one("p")? {
        let e = lp_norm(&d.spec, p, &r.env.quadrature)?;
        flagged |= !e.converged;
        summary = format!("norm={} {summary}", fmt_f64(e.value));
    }
    let json = serde_json::json!({
        "method": d.method, "terms": d.terms, "tail_bound": d.tail_bound, "capped": d.capped,
        "samples": rows.iter().map(|r| [&r[0], &r[1], &r[2]]).collect::<Vec<_>>(),
    });
    Ok(Outcome {
        summary,
        artifact: artifact(r.format, &["x", "re", "im"], &rows, &json)?,
        flagged,
    })
}

fn cmd_weyl(r: &Resolved) -> Result<Outcome> {
    let spec = r.function()?;
    let f = spec.build()?;
    let alpha = r.need_one("alpha")?;
    let cutoff = match r.one("n")? {
        Some(n) => to_index("n", n)?,
        None => 64,
    };
    let w = weyl_of_spec(&f, alpha, cutoff, 4 * (2 * cutoff + 1).next_power_of_two())?;
    let t = w
        .spec
        .polynomial()
        .ok_or_else(|| invalid("Weyl result is not a polynomial"))?
        .clone();
    let k = t.degree() as i64;
    let rows: Vec<Vec<String>> = (-k..=k)
        .map(|j| {
            let c = t.coeff(j);
            vec![j.to_string(), fmt_f64(c.re), fmt_f64(c.im)]
        })
        .collect();
    let json = serde_json::json!({
        "alpha": alpha, "cutoff": cutoff, "tail_estimate": w.tail_estimate, "flagged": w.flagged,
        "coeffs": (-k..=k).map(|j| { let c = t.coeff(j); [c.re, c.im] }).collect::<Vec<_>>(),
    });
    Ok(Outcome {
        summary: format!("degree={} tail_estimate={}", t.degree(), fmt_f64(w.tail_estimate)),
        artifact: artifact(r.format, &["k", "re", "im"], &rows, &json)?,
        flagged: w.flagged,
    })
}

fn cmd_modulus(r: &Resolved) -> Result<Outcome> {
    let f = r.function()?.build()?;
    let alpha = match r.one("alpha")? {
        Some(a) => a,
        None => r.need_one("beta")?,
    };
    let p = r.need_one("p")?;
    let mut rows = Vec::new();
    let mut recs = Vec::new();
    let mut flagged = false;
    for h in r.need_list("h")? {
        let m = modulus(&f, alpha, h, p, &r.env.quadrature, &r.env.modulus)?;
        flagged |= m.flagged;
        rows.push(vec![fmt_f64(h), fmt_f64(m.value), fmt_f64(m.argmax), m.flagged.to_string()]);
        recs.push(serde_json::json!({"h": h, "modulus": m}));
    }
    let last = rows.last().map(|r| r[1].clone()).unwrap_or_default();
    Ok(Outcome {
        summary: format!("{} values, last={last}", rows.len()),
        artifact: artifact(r.format, &["h", "omega", "argmax", "flagged"], &rows, &recs)?,
        flagged,
    })
}

fn cmd_bestapprox(r: &Resolved) -> Result<Outcome> {
    let f = r.function()?.build()?;
    let p = r.need_one("p")?;
    let mut rows = Vec::new();
    let mut recs = Vec::new();
    let mut flagged = false;
    for n in r.need_list("n")? {
        let n = to_index("n", n)?;
        let b = best_approx(&f, n, p, &r.env.solver, &r.env.quadrature)?;
        let fl = b.status != SolverStatus::Converged || b.quadrature_flag;
        flagged |= fl;
        rows.push(vec![
            n.to_string(),
            fmt_f64(b.value),
            b.status.as_str().to_string(),
            b.restart.to_string(),
            b.quadrature_flag.to_string(),
        ]);
        let k = b.polynomial.degree() as i64;
        recs.push(serde_json::json!({
            "n": n, "value": b.value, "status": b.status.as_str(), "restart": b.restart,
            "quadrature_flag": b.quadrature_flag,
            "coeffs": (-k..=k).map(|j| { let c = b.polynomial.coeff(j); [c.re, c.im] }).collect::<Vec<_>>(),
        }));
    }
    let vals: Vec<&str> = rows.iter().map(|r| r[1].as_str()).collect();
    Ok(Outcome {
        summary: vals.join(" "),
        artifact: artifact(r.format, &["n", "e", "status", "restart", "quadrature_flag"], &rows, &recs)?,
        flagged,
    })
}

fn cmd_realization(r: &Resolved) -> Result<Outcome> {
    let f = r.function()?.build()?;
    let alpha = r.need_one("alpha")?;
    let p = r.need_one("p")?;
    let mut rows = Vec::new();
    let mut recs = Vec::new();
    let mut flagged = false;
    for d in r.need_list("h")? {
        let v = realization(&f, alpha, d, p, &r.env.solver, &r.env.quadrature)?;
        flagged |= v.status != SolverStatus::Converged;
        rows.push(vec![
            fmt_f64(d),
            fmt_f64(v.value),
            fmt_f64(v.parts.0),
            fmt_f64(v.parts.1),
            v.status.as_str().to_string(),
        ]);
        recs.push(serde_json::json!({
            "delta": d, "value": v.value, "approx_error": v.parts.0, "smoothness_term": v.parts.1,
            "status": v.status.as_str(),
        }));
    }
    let vals: Vec<&str> = rows.iter().map(|r| r[1].as_str()).collect();
    Ok(Outcome {
        summary: vals.join(" "),
        artifact: artifact(
            r.format,
            &["delta", "value", "approx_error", "smoothness_term", "status"],
            &rows,
            &recs,
        )?,
        flagged,
    })
}

/// The sweep grid described by the resolved configuration.
pub fn sweep_config(r: &Resolved) -> Result<SweepConfig> {
    let id = r.config.case.clone().ok_or_else(|| usage("--case <THEOREM-ID> is required"))?;
    let info = verifier::lookup(&id)?;
    let mut functions = r.config.functions.clone();
    if let Some(f) = &r.config.function {
        functions = vec![f.clone()];
    }
    let idx = |name: &str| -> Result<Vec<usize>> { r.list(name).into_iter().map(|v| to_index(name, v)).collect() };
    let rs = idx("r")?.into_iter().map(|v| v as u32).collect();
    Ok(SweepConfig {
        id: info.id.to_string(),
        functions,
        p: r.list("p"),
        alpha: r.list("alpha"),
        beta: r.list("beta"),
        n: idx("n")?,
        h: r.list("h"),
        lambda: r.list("lambda"),
        q: r.list("q"),
        r: rs,
    })
}

fn run_sweep(r: &Resolved) -> Result<SweepOutcome> {
    let cfg = sweep_config(r)?;
    let out = sweep(&cfg, &r.env)?;
    if out.reports.is_empty() {
        if let Some((_, e)) = out.errors.first() {
            return Err(usage(e.clone()));
        }
    }
    Ok(out)
}

fn sweep_flagged(out: &SweepOutcome) -> bool {
    !out.errors.is_empty() || out.reports.iter().any(|x| x.status != "ok")
}

fn report_artifact(r: &Resolved, out: &SweepOutcome, with_summary: bool) -> Result<Vec<u8>> {
    match r.format {
        Format::Csv => {
            let mut buf = Vec::new();
            verifier::write_reports_csv(&out.reports, &mut buf)?;
            Ok(buf)
        }
        Format::Json => {
            let errors: Vec<_> = out
                .errors
                .iter()
                .map(|(c, e)| serde_json::json!({"case": c, "error": e}))
                .collect();
            if with_summary {
                json_bytes(&serde_json::json!({"reports": out.reports, "summary": out.summary, "errors": errors}))
            } else {
                json_bytes(&serde_json::json!({"reports": out.reports, "errors": errors}))
            }
        }
    }
}

fn band(out: &SweepOutcome) -> String {
    let s = &out.summary;
    format!(
        "{}: {} cases, ratio band [{}, {}], stability {}, {} flagged, {} errors",
        s.id,
        out.reports.len(),
        fmt_f64(s.min_ratio),
        fmt_f64(s.max_ratio),
        fmt_f64(s.stability),
        s.flagged,
        out.errors.len()
    )
}

fn cmd_verify(r: &Resolved) -> Result<Outcome> {
    let out = run_sweep(r)?;
    Ok(Outcome {
        summary: band(&out),
        artifact: report_artifact(r, &out, false)?,
        flagged: sweep_flagged(&out),
    })
}

fn cmd_sweep(r: &Resolved) -> Result<Outcome> {
    let out = run_sweep(r)?;
    Ok(Outcome {
        summary: serde_json::to_string(&out.summary)?,
        artifact: report_artifact(r, &out, true)?,
        flagged: sweep_flagged(&out),
    })
}

fn cmd_slope(r: &Resolved) -> Result<Outcome> {
    let path = r.config.input.as_ref().ok_or_else(|| usage("--in <file.csv> is required"))?;
    let x = r.config.x.as_deref().ok_or_else(|| usage("--x <column> is required"))?;
    let y = r.config.y.as_deref().ok_or_else(|| usage("--y <column> is required"))?;
    let file = File::open(path).map_err(|e| usage(format!("cannot open {}: {e}", path.display())))?;
    let mut pts = read_columns(file, x, y)?;
    if let Some((lo, hi)) = r.config.window {
        pts.retain(|&(a, _)| a >= lo && a <= hi);
    }
    let fit = verifier::fit_rate(&pts)?;
    let line = serde_json::to_string(&fit)?;
    Ok(Outcome {
        artifact: format!("{line}\n").into_bytes(),
        summary: line,
        flagged: false,
    })
}

/// Runs a resolved command.
pub fn execute(r: &Resolved) -> Result<Outcome> {
    let go = || match r.command {
        Command::Norm => cmd_norm(r),
        Command::Fracdiff => cmd_fracdiff(r),
        Command::Weyl => cmd_weyl(r),
        Command::Modulus => cmd_modulus(r),
        Command::Bestapprox => cmd_bestapprox(r),
        Command::Realization => cmd_realization(r),
        Command::Verify => cmd_verify(r),
        Command::Sweep => cmd_sweep(r),
        Command::Slope => cmd_slope(r),
    };
    match r.config.jobs {
        Some(j) if j > 0 => rayon::ThreadPoolBuilder::new()
            .num_threads(j)
            .build()
            .map_err(|e| usage(e.to_string()))?
            .install(go),
        _ => go(),
    }
}

fn write_artifact(r: &Resolved, o: &Outcome, stdout: &mut dyn Write) -> Result<()> {
    match &r.config.out {
        Some(p) if p.as_os_str() == "-" => stdout.write_all(&o.artifact)?,
        Some(p) => {
            let mut w = BufWriter::new(File::create(p)?);
            w.write_all(&o.artifact)?;
            w.flush()?;
        }
        None => {}
    }
    Ok(())
}

/// Parses `args`, runs, and returns the exit code. Output goes to the given
/// writers so the whole front end can be driven in-process.
pub fn run<I, T>(args: I, stdout: &mut dyn Write, stderr: &mut dyn Write) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let matches = match build_command().try_get_matches_from(args) {
        Ok(m) => m,
        Err(e) => {
            let code = if e.use_stderr() { 1 } else { 0 };
            let text = e.render().to_string();
            if code == 0 {
                let _ = write!(stdout, "{text}");
            } else {
                let _ = write!(stderr, "{text}");
            }
            return code;
        }
    };
    let cli = match Cli::from_arg_matches(&matches) {
        Ok(c) => c,
        Err(e) => {
            let _ = write!(stderr, "{}", e.render());
            return 1;
        }
    };
    let resolved = match resolve(&cli) {
        Ok(r) => r,
        Err(e) => {
            let _ = writeln!(stderr, "error: {e}");
            return 1;
        }
    };
    let outcome = match execute(&resolved) {
        Ok(o) => o,
        Err(e) => {
            let _ = writeln!(stderr, "error: {e}");
            return 1;
        }
    };
    if let Err(e) = write_artifact(&resolved, &outcome, stdout) {
        let _ = writeln!(stderr, "error: {e}");
        return 1;
    }
    let _ = writeln!(stdout, "{}", outcome.summary);
    if outcome.flagged {
        let _ = writeln!(stderr, "warning: numerical flags present; see the flags/status columns");
        2
    } else {
        0
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn call(args: &[&str]) -> (i32, String, String) {
        let mut out = Vec::new();
        let mut err = Vec::new();
        let mut v = vec!["fracsmooth"];
        v.extend_from_slice(args);
        let code = run(v, &mut out, &mut err);
        (code, String::from_utf8(out).unwrap(), String::from_utf8(err).unwrap())
    }

    #[test]
    fn norm_of_square_wave() {
        let (code, out, _) = call(&["norm", "--f", r#"{"kind":"sign_sin"}"#, "--p", "0.5"]);
        assert_eq!(code, 0);
        assert_eq!(out.trim(), "1.0");
    }

    #[test]
    fn usage_errors_exit_one() {
        assert_eq!(call(&["norm", "--p", "0.5"]).0, 1);
        assert_eq!(call(&["bogus"]).0, 1);
        assert_eq!(call(&["norm", "--f", "{", "--p", "0.5"]).0, 1);
        let (code, _, err) = call(&["verify", "--case", "JACKSN", "--f", r#"{"kind":"sign_sin"}"#]);
        assert_eq!(code, 1);
        assert!(err.contains("JACKSON"), "{err}");
    }

    #[test]
    fn help_lists_registry() {
        let (code, out, _) = call(&["--help"]);
        assert_eq!(code, 0);
        for t in REGISTRY {
            assert!(out.contains(t.id), "{} missing", t.id);
        }
    }

    #[test]
    fn flags_override_config() {
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("c.json");
        std::fs::write(
            &path,
            r#"{"function":{"kind":"sign_sin"},"params":{"p":1.0},"solver":{"restarts":5},"quadrature":{"tol":1e-9}}"#,
        )
        .unwrap();
        let cli = Cli::try_parse_from(["x", "norm", "--config", path.to_str().unwrap(), "--p", "0.5"]).unwrap();
        let r = resolve(&cli).unwrap();
        assert_eq!(r.list("p"), vec![0.5]);
        assert_eq!(r.env.solver.restarts, 5);
        assert_eq!(r.env.quadrature.tol, 1e-9);
        assert_eq!(r.env.quadrature.base_size, QuadratureSpec::default().base_size);
        std::fs::write(&path, r#"{"params":{"zeta":1}}"#).unwrap();
        let cli = Cli::try_parse_from(["x", "norm", "--config", path.to_str().unwrap()]).unwrap();
        assert!(resolve(&cli).is_err());
    }
}
