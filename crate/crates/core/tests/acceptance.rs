//! Acceptance criteria 1 to 10. Each test writes one `criterion N: PASS|FAIL`
//! line to stderr (bypassing the test harness capture) before asserting.

use std::f64::consts::{PI, TAU};
use std::io::Write;
use std::time::Instant;

use num_complex::Complex64;

use fracsmooth::best_approx::{best_approx, constant_grid_search, SolverOptions};
use fracsmooth::corpus::CorpusSpec;
use fracsmooth::fractional::{frac_difference, weyl, TruncationPolicy};
use fracsmooth::periodic::{FunctionSpec, TrigPolynomial};
use fracsmooth::quasinorm::{lp_norm, QuadratureSpec};
use fracsmooth::smoothness::{modulus, ModulusOptions};
use fracsmooth::verifier::{fit_rate, sweep, Env, SweepConfig, SweepOutcome};

fn report(n: u32, pass: bool, detail: &str, started: Instant) {
    let line = format!(
        "criterion {n}: {} ({detail}; {:.1}s)\n",
        if pass { "PASS" } else { "FAIL" },
        started.elapsed().as_secs_f64()
    );
    let _ = std::io::stderr().write_all(line.as_bytes());
}

fn dyadic(lo: i32, hi: i32) -> Vec<f64> {
    (lo..=hi).map(|j| 2f64.powi(-j)).collect()
}

fn run(cfg: SweepConfig, env: &Env) -> SweepOutcome {
    let out = sweep(&cfg, env).expect("sweep");
    assert!(out.errors.is_empty(), "{}: {:?}", cfg.id, out.errors);
    out
}

#[test]
fn criterion_01_operator_identities() {
    let t0 = Instant::now();
    let alphas = [0.3, 0.5, 1.0, 1.7, 2.0];
    let mut worst_weyl = 0.0f64;
    // semigroup and inversion on a fixed polynomial
    let t = TrigPolynomial::from_fn(32, |k| Complex64::new(1.0 / (1.0 + (k * k) as f64), 0.1 * k as f64 / 33.0));
    for &a in &alphas {
        for &b in &alphas {
            let lhs = weyl(&weyl(&t, a), b);
            let rhs = weyl(&t, a + b);
            for k in -32..=32i64 {
                let scale = (k as f64).abs().powf(a + b).max(1.0);
                worst_weyl = worst_weyl.max((lhs.coeff(k) - rhs.coeff(k)).norm() / scale);
            }
        }
        let back = weyl(&weyl(&t, a), -a);
        for k in -32..=32i64 {
            let want = if k == 0 { Complex64::new(0.0, 0.0) } else { t.coeff(k) };
            worst_weyl = worst_weyl.max((back.coeff(k) - want).norm());
        }
    }

    // eigenrelation on exponentials, evaluated through the series (the
    // input is opaque, so no multiplier shortcut applies); steps are
    // rational multiples of 2π so the series sums exactly by residue classes
    let policy = TruncationPolicy::default();
    // steps δ = 2πm/P; the oracle reduces kδ modulo 2π in exact arithmetic
    let steps: [(i64, i64); 6] = [(1, 628), (1, 64), (1, 16), (1, 4), (1, 3), (1, 2)];
    let mut worst_eig = 0.0f64;
    let mut checked = 0;
    for k in -32..=32i64 {
        let e = FunctionSpec::from_fn(format!("e{k}"), move |x| Complex64::cis(k as f64 * x));
        for &a in &alphas {
            for &(m0, period) in &steps {
                for m in [m0, -m0] {
                    let d = TAU * m as f64 / period as f64;
                    let diff = frac_difference(&e, a, d, &policy).unwrap();
                    let theta = TAU * (k * m).rem_euclid(period) as f64 / period as f64;
                    let z = Complex64::new(1.0, 0.0) - Complex64::cis(-theta);
                    let sym = if theta == 0.0 { z } else { z.powf(a) };
                    for j in 0..7 {
                        let x = 0.37 + j as f64 * 0.9;
                        let want = sym * Complex64::cis(k as f64 * x);
                        worst_eig = worst_eig.max((diff.spec.eval(x) - want).norm());
                    }
                    checked += 1;
                }
            }
        }
    }
    let eig_ok = worst_eig <= policy.tail_tol + 1e-9;

    // constants are annihilated
    let q = QuadratureSpec::default();
    let mut worst_const = 0.0f64;
    let one = FunctionSpec::from_fn("one", |_| Complex64::new(1.0, 0.0));
    for &a in &alphas {
        for d in [TAU / 628.0, TAU / 16.0, 1.0] {
            if a < 1.0 && d == 1.0 {
                // incommensurate steps with slowly decaying weights hit the term cap
                continue;
            }
            let diff = frac_difference(&one, a, d, &policy).unwrap();
            for p in [0.5, 1.0] {
                worst_const = worst_const.max(lp_norm(&diff.spec, p, &q).unwrap().value);
            }
        }
    }
    let pass = worst_weyl <= 1e-9 && eig_ok && worst_const <= policy.tail_tol && t0.elapsed().as_secs_f64() < 10.0;
    report(
        1,
        pass,
        &format!("weyl {worst_weyl:.1e}, eigenrelation {worst_eig:.1e} over {checked} cases, constants {worst_const:.1e}"),
        t0,
    );
    assert!(pass);
}

#[test]
fn criterion_02_square_wave_modulus() {
    let t0 = Instant::now();
    let f = CorpusSpec::SignSin.build().unwrap();
    let q = QuadratureSpec::default();
    let opts = ModulusOptions::default();
    let hs = dyadic(3, 10);
    let mut pts = Vec::new();
    let mut worst = 0.0f64;
    for &h in &hs {
        let w = modulus(&f, 1.0, h, 0.5, &q, &opts).unwrap().value;
        let closed = 2.0 * (h / PI).powi(2);
        worst = worst.max((w / closed - 1.0).abs());
        pts.push((h, w));
    }
    let fit = fit_rate(&pts).unwrap();
    let pass = (fit.slope - 2.0).abs() <= 0.05 && worst <= 0.02 && t0.elapsed().as_secs_f64() < 30.0;
    report(
        2,
        pass,
        &format!("slope {:.4}, max relative deviation from 2(h/pi)^2 {worst:.1e}", fit.slope),
        t0,
    );
    assert!(pass);
}

#[test]
fn criterion_03_grunwald_pathology() {
    let t0 = Instant::now();
    let env = Env::default();
    let cfg = |p: f64| SweepConfig {
        id: "GRUNWALD-ZERO".into(),
        functions: vec![CorpusSpec::SignSin],
        p: vec![p],
        h: dyadic(3, 10),
        ..Default::default()
    };
    let half = run(cfg(0.5), &env);
    let lhs: Vec<(f64, f64)> = half.reports.iter().map(|r| (r.case.params.h.unwrap(), r.lhs)).collect();
    let slope = fit_rate(&lhs).unwrap().slope;
    let one = run(cfg(1.0), &env);
    let target = 2.0 / PI;
    let worst = one
        .reports
        .iter()
        .map(|r| (r.lhs / target - 1.0).abs())
        .fold(0.0, f64::max);
    let pass = (slope - 1.0).abs() <= 0.1 && worst <= 0.02 && t0.elapsed().as_secs_f64() < 30.0;
    report(
        3,
        pass,
        &format!("p = 1/2 slope {slope:.4}; p = 1 max deviation from 2/pi {worst:.1e}"),
        t0,
    );
    assert!(pass);
}

#[test]
fn criterion_04_square_wave_best_approximation_rate() {
    let t0 = Instant::now();
    let f = CorpusSpec::SignSin.build().unwrap();
    let q = QuadratureSpec::default();
    let opts = SolverOptions::default();
    let ns = [8usize, 12, 16, 24, 32, 48, 64];
    let pts: Vec<(f64, f64)> = ns
        .iter()
        .map(|&n| (n as f64, best_approx(&f, n, 0.5, &opts, &q).unwrap().value))
        .collect();
    let fit = fit_rate(&pts).unwrap();
    let local: Vec<String> = pts
        .windows(2)
        .map(|w| format!("{:.2}", (w[1].1 / w[0].1).ln() / (w[1].0 / w[0].0).ln()))
        .collect();
    let pass = (fit.slope + 2.0).abs() <= 0.2 && t0.elapsed().as_secs_f64() < 600.0;
    report(
        4,
        pass,
        &format!("slope {:.3} over n in [8, 64], local slopes {}", fit.slope, local.join(" ")),
        t0,
    );
    assert!(pass, "slope {} outside -2.0 +- 0.2", fit.slope);
}

#[test]
fn criterion_05_nonconvex_constant_approximation() {
    let t0 = Instant::now();
    let f = CorpusSpec::SignSin.build().unwrap();
    let q = QuadratureSpec::default();
    let r = best_approx(&f, 0, 0.5, &SolverOptions::default(), &q).unwrap();
    let c = r.polynomial.coeff(0);
    // the distance has square-root cusps at c = ±1, so the grid must contain them
    let (oracle, oracle_c) = constant_grid_search(&f, 0.5, -2.0, 2.0, 100_001, &q).unwrap();
    let pass = (r.value - 0.5).abs() <= 1e-3
        && (c.re.abs() - 1.0).abs() <= 1e-3
        && c.im.abs() <= 1e-3
        && (r.value - oracle).abs() <= 1e-3
        && (oracle_c.abs() - 1.0).abs() <= 1e-3
        && t0.elapsed().as_secs_f64() < 5.0;
    report(
        5,
        pass,
        &format!(
            "E_0 = {:.6} at c = {:.6}; grid oracle {:.6} at c = {:.6}",
            r.value, c.re, oracle, oracle_c
        ),
        t0,
    );
    assert!(pass);
}

#[test]
fn criterion_06_sharpness() {
    let t0 = Instant::now();
    let env = Env::default();
    let out = run(
        SweepConfig {
            id: "SHARPNESS".into(),
            functions: vec![CorpusSpec::FR { r: 1 }],
            p: vec![0.5],
            r: vec![1],
            n: vec![8, 16, 32, 64],
            ..Default::default()
        },
        &env,
    );
    let s = &out.summary;
    let lhs_slope = s.slope.unwrap_or(f64::NAN);
    let rhs_slope = s.groups.first().and_then(|g| g.rhs_slope).unwrap_or(f64::NAN);
    let factors: Vec<f64> = out.reports.iter().map(|r| r.extras["single_term_factor"]).collect();
    let growing = factors.windows(2).all(|w| w[1] > w[0]) && factors.last().unwrap() / factors[0] > 2.0;
    let pass = (lhs_slope + 1.0).abs() <= 0.3 && (rhs_slope + 1.0).abs() <= 0.3 && growing;
    report(
        6,
        pass,
        &format!(
            "|f_1 - T| slope {lhs_slope:.3}, |T'| slope {rhs_slope:.3}, single-term factors {}",
            factors.iter().map(|f| format!("{f:.3e}")).collect::<Vec<_>>().join(" ")
        ),
        t0,
    );
    assert!(pass);
}

#[test]
fn criterion_07_constant_band_stability() {
    let t0 = Instant::now();
    let env = Env::default();
    let steps = vec![CorpusSpec::SignSin, fracsmooth::corpus::default_jumps()];
    let primitives = vec![
        CorpusSpec::FR { r: 1 },
        CorpusSpec::Krotov { beta: 2.0, of: Box::new(steps[1].clone()), cutoff: None },
    ];
    let polys = vec![
        CorpusSpec::Dirichlet { n: 1 },
        CorpusSpec::Fejer { n: 1 },
        CorpusSpec::Jackson { n: 2 },
        CorpusSpec::RandomPoly { n: 1, seed: 7, real: true },
    ];
    let ns = vec![4, 8, 16, 32];
    let mut sweeps = Vec::new();
    for p in [0.5, 0.75] {
        let base = SweepConfig { p: vec![p], ..Default::default() };
        sweeps.push(SweepConfig {
            id: "TH-DIRECT".into(),
            functions: primitives.clone(),
            alpha: vec![1.0],
            n: ns.clone(),
            ..base.clone()
        });
        // the inverse bound only has the order of the modulus once beta exceeds the
        // smoothness of f, so it is run one order above it
        for (fs, beta, inverse_beta) in [(&steps, 1.0, 3.0), (&primitives, 2.0, 4.0)] {
            for (id, b) in [("JACKSON", beta), ("INVERSE-EB", inverse_beta)] {
                sweeps.push(SweepConfig {
                    id: id.into(),
                    functions: fs.clone(),
                    beta: vec![b],
                    n: ns.clone(),
                    ..base.clone()
                });
            }
            sweeps.push(SweepConfig {
                id: "MOD-LAMBDA".into(),
                functions: fs.clone(),
                beta: vec![beta],
                lambda: vec![2.0],
                h: dyadic(2, 7),
                ..base.clone()
            });
        }
        sweeps.push(SweepConfig {
            id: "TH-MOD-INVERSE".into(),
            functions: primitives.clone(),
            alpha: vec![1.0],
            beta: vec![1.0],
            h: dyadic(2, 6),
            ..base.clone()
        });
        sweeps.push(SweepConfig {
            id: "NIK-STECHKIN".into(),
            functions: polys.clone(),
            alpha: vec![1.0, 2.0],
            n: vec![4, 8, 16, 32, 64],
            ..base.clone()
        });
        // only the concentrated kernel is extremal; on the others the ratio decays
        sweeps.push(SweepConfig {
            id: "NIKOLSKII".into(),
            functions: vec![CorpusSpec::Jackson { n: 2 }],
            q: vec![1.0],
            n: vec![4, 8, 16, 32, 64],
            ..base.clone()
        });
    }
    let mut all_ok = true;
    let mut worst = (1.0f64, String::new());
    let mut horizon = 0;
    for cfg in sweeps {
        let s0 = Instant::now();
        let out = run(cfg.clone(), &env);
        let s = &out.summary;
        horizon += s.horizon_limited;
        let ok = s.stability <= 2.0 && s.horizon_limited == 0 && s.max_ratio.is_finite();
        all_ok &= ok;
        if s.stability > worst.0 {
            worst = (s.stability, format!("{} p={}", s.id, cfg.p[0]));
        }
        let _ = writeln!(
            std::io::stderr(),
            "  {:<15} p={:<5} band [{:.3e}, {:.3e}] stability {:.3} horizon-limited {} ({:.1}s)",
            s.id,
            cfg.p[0],
            s.min_ratio,
            s.max_ratio,
            s.stability,
            s.horizon_limited,
            s0.elapsed().as_secs_f64()
        );
        for g in s.groups.iter().filter(|g| g.stability > 2.0) {
            let _ = writeln!(std::io::stderr(), "    unstable group {} stability {:.3}", g.key, g.stability);
        }
    }
    let pass = all_ok && t0.elapsed().as_secs_f64() < 1800.0;
    report(
        7,
        pass,
        &format!("worst stability {:.3} ({}), horizon-limited cases {horizon}", worst.0, worst.1),
        t0,
    );
    assert!(pass);
}

#[test]
fn criterion_08_bernstein_regimes() {
    let t0 = Instant::now();
    let env = Env::default();
    let ns = vec![8, 16, 32, 64, 128];
    let mut lines = Vec::new();
    let mut pass = true;
    for alpha in [2.0, 1.5, 0.4] {
        let out = run(
            SweepConfig {
                id: "BERNSTEIN".into(),
                functions: vec![CorpusSpec::Dirichlet { n: 1 }],
                p: vec![0.5],
                alpha: vec![alpha],
                n: ns.clone(),
                ..Default::default()
            },
            &env,
        );
        let s = &out.summary;
        match s.pass {
            Some(ok) => {
                pass &= ok;
                lines.push(format!("alpha {alpha}: slope {:.3} vs {:.1}", s.slope.unwrap_or(f64::NAN), alpha));
            }
            None => {
                // below the threshold a mismatch is a finding only
                lines.push(format!(
                    "alpha {alpha}: candidate slope {:.3} vs expected 1.0{}",
                    s.slope.unwrap_or(f64::NAN),
                    s.finding.as_ref().map(|f| format!(" [finding: {f}]")).unwrap_or_default()
                ));
            }
        }
    }
    pass &= t0.elapsed().as_secs_f64() < 1200.0;
    report(8, pass, &lines.join("; "), t0);
    assert!(pass);
}

#[test]
fn criterion_09_krotov_primitive() {
    let t0 = Instant::now();
    let env = Env::default();
    let out = run(
        SweepConfig {
            id: "KROTOV-SLOPE".into(),
            functions: vec![CorpusSpec::Krotov {
                beta: 2.0,
                of: Box::new(fracsmooth::corpus::default_jumps()),
                cutoff: None,
            }],
            p: vec![0.5],
            beta: vec![2.0],
            h: dyadic(3, 10),
            ..Default::default()
        },
        &env,
    );
    let slope = out.summary.slope.unwrap_or(f64::NAN);
    let pass = out.summary.pass == Some(true) && (slope - 3.0).abs() <= 0.2 && t0.elapsed().as_secs_f64() < 600.0;
    report(9, pass, &format!("slope {slope:.4} vs 3.0"), t0);
    assert!(pass);
}

#[test]
fn criterion_10_determinism() {
    let t0 = Instant::now();
    let dir = tempfile::tempdir().unwrap();
    let runs: Vec<Vec<&str>> = vec![
        vec!["modulus", "--f", r#"{"kind":"sign_sin"}"#, "--alpha", "1", "--p", "0.5", "--h", "0.125,0.0625,0.03125,0.015625"],
        vec!["sweep", "--case", "GRUNWALD-ZERO", "--f", r#"{"kind":"sign_sin"}"#, "--p", "0.5", "--h", "0.125,0.0625,0.03125,0.015625"],
        vec!["sweep", "--case", "KROTOV-SLOPE", "--f", r#"{"kind":"krotov","beta":2}"#, "--p", "0.5", "--beta", "2", "--h", "0.125,0.0625,0.03125,0.015625"],
        vec!["bestapprox", "--f", r#"{"kind":"sign_sin"}"#, "--p", "0.5", "--n", "0,4,8", "--seed", "3"],
        vec!["verify", "--case", "JACKSON", "--f", r#"{"kind":"sign_sin"}"#, "--p", "0.5", "--beta", "1", "--n", "4,8", "--seed", "3"],
    ];
    let mut pass = true;
    for (i, args) in runs.iter().enumerate() {
        let mut bytes = Vec::new();
        for rep in 0..2 {
            let path = dir.path().join(format!("run{i}_{rep}.csv"));
            let mut full = vec!["fracsmooth"];
            full.extend(args.iter().copied());
            full.extend(["--out", path.to_str().unwrap()]);
            let code = fracsmooth::cli::run(full, &mut std::io::sink(), &mut std::io::sink());
            pass &= code == 0 || code == 2;
            bytes.push(std::fs::read(&path).unwrap());
        }
        pass &= !bytes[0].is_empty() && bytes[0] == bytes[1];
    }
    report(10, pass, &format!("{} commands repeated, artifacts compared byte for byte", runs.len()), t0);
    assert!(pass);
}
