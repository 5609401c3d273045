//! Moduli of smoothness, the realization functional, and the integral and
//! tail-sum functionals that appear on right-hand sides.

use std::io::Write;

use serde::{Deserialize, Serialize};

use crate::best_approx::{realization_search, SolverOptions, SolverStatus};
use crate::error::{invalid, Error, Result};
use crate::fractional::{as_natural, frac_difference, DiffMethod, TruncationPolicy};
use crate::periodic::{FunctionSpec, TrigPolynomial};
use crate::quasinorm::{check_p, lp_norm, QuadratureSpec};

/// `(h, ω(h))` pairs with `h` strictly increasing.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ModulusCurve {
    entries: Vec<(f64, f64)>,
}

impl ModulusCurve {
    pub fn new(mut entries: Vec<(f64, f64)>) -> Result<Self> {
        entries.sort_by(|a, b| a.0.total_cmp(&b.0));
        if entries.windows(2).any(|w| w[1].0 <= w[0].0) {
            return Err(invalid("modulus curve abscissae must be distinct"));
        }
        if entries.iter().any(|e| !(e.0 > 0.0) || e.1 < 0.0 || !e.1.is_finite()) {
            return Err(invalid("modulus curve needs h > 0 and finite nonnegative values"));
        }
        Ok(ModulusCurve { entries })
    }

    pub fn from_fn(hs: &[f64], f: impl Fn(f64) -> f64) -> Result<Self> {
        Self::new(hs.iter().map(|&h| (h, f(h))).collect())
    }

    pub fn entries(&self) -> &[(f64, f64)] {
        &self.entries
    }

    /// True when nondecreasing up to the multiplicative `slack`.
    pub fn is_monotone(&self, slack: f64) -> bool {
        self.entries.windows(2).all(|w| w[0].1 <= slack * w[1].1)
    }

    pub fn write_csv<W: Write>(&self, w: W) -> Result<()> {
        let mut wr = csv::Writer::from_writer(w);
        wr.write_record(["h", "value"])?;
        for &(h, v) in &self.entries {
            wr.write_record([fmt_f64(h), fmt_f64(v)])?;
        }
        wr.flush()?;
        Ok(())
    }
}

/// `E_0, …, E_{n_max}`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ETable {
    entries: Vec<f64>,
}

impl ETable {
    pub fn new(entries: Vec<f64>) -> Result<Self> {
        if entries.is_empty() {
            return Err(invalid("E table is empty"));
        }
        if entries.iter().any(|e| *e < 0.0 || !e.is_finite()) {
            return Err(invalid("E table entries must be finite and nonnegative"));
        }
        Ok(ETable { entries })
    }

    pub fn entries(&self) -> &[f64] {
        &self.entries
    }

    pub fn n_max(&self) -> usize {
        self.entries.len() - 1
    }

    pub fn get(&self, n: usize) -> f64 {
        self.entries[n]
    }

    pub fn is_monotone(&self, slack: f64) -> bool {
        self.entries.windows(2).all(|w| w[1] <= slack * w[0])
    }

    pub fn write_csv<W: Write>(&self, w: W) -> Result<()> {
        let mut wr = csv::Writer::from_writer(w);
        wr.write_record(["n", "value"])?;
        for (n, &v) in self.entries.iter().enumerate() {
            wr.write_record([n.to_string(), fmt_f64(v)])?;
        }
        wr.flush()?;
        Ok(())
    }
}

/// Shortest round-trip decimal form.
pub fn fmt_f64(v: f64) -> String {
    if v.is_infinite() {
        if v > 0.0 { "inf".into() } else { "-inf".into() }
    } else if v.is_nan() {
        "nan".into()
    } else {
        format!("{v:?}")
    }
}

/// True when `α ∈ ℕ ∪ (1/min(p,1) − 1, ∞)`.
pub fn order_admissible(alpha: f64, p: f64) -> bool {
    as_natural(alpha).is_some_and(|k| k > 0) || alpha > 1.0 / p.min(1.0) - 1.0
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct ModulusOptions {
    pub scan: usize,
    pub refine: usize,
    /// Fractional orders snap each step to the nearest `2πm/P` with
    /// `P ≤ snap_period`, so that the series sums exactly.
    pub snap_period: usize,
    pub policy: TruncationPolicy,
}

impl Default for ModulusOptions {
    fn default() -> Self {
        ModulusOptions {
            scan: 33,
            refine: 9,
            snap_period: 4096,
            policy: TruncationPolicy::default(),
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ModulusValue {
    pub value: f64,
    pub argmax: f64,
    /// Set when a difference was truncated with its cap hit or a quadrature
    /// did not converge.
    pub flagged: bool,
}

/// Best rational `m/P` approximation of `x` with `P ≤ max_den`.
fn best_rational(x: f64, max_den: usize) -> (i64, i64) {
    let sign = if x < 0.0 { -1 } else { 1 };
    let x = x.abs();
    let (mut h0, mut h1) = (0i64, 1i64);
    let (mut k0, mut k1) = (1i64, 0i64);
    let mut r = x;
    for _ in 0..64 {
        let a = r.floor() as i64;
        let (h2, k2) = (a * h1 + h0, a * k1 + k0);
        if k2 as usize > max_den {
            // best semiconvergent below the bound
            let t = (max_den as i64 - k0) / k1.max(1);
            let (hs, ks) = (t * h1 + h0, t * k1 + k0);
            if ks > 0 && (x - hs as f64 / ks as f64).abs() < (x - h1 as f64 / k1 as f64).abs() {
                return (sign * hs, ks);
            }
            return (sign * h1, k1);
        }
        h0 = h1;
        h1 = h2;
        k0 = k1;
        k1 = k2;
        let frac = r - a as f64;
        if frac < 1e-15 {
            break;
        }
        r = 1.0 / frac;
    }
    (sign * h1, k1.max(1))
}

/// `δ` moved to the nearest commensurate step `2πm/P`, `P ≤ max_den`.
pub fn snap_step(delta: f64, max_den: usize) -> f64 {
    let (m, p) = best_rational(delta / std::f64::consts::TAU, max_den);
    let s = std::f64::consts::TAU * m as f64 / p as f64;
    if s == 0.0 {
        delta
    } else {
        s
    }
}

fn difference_norm(
    f: &FunctionSpec,
    alpha: f64,
    delta: f64,
    p: f64,
    q: &QuadratureSpec,
    opts: &ModulusOptions,
) -> Result<(f64, bool)> {
    let d = frac_difference(f, alpha, delta, &opts.policy)?;
    let n = lp_norm(&d.spec, p, q)?;
    let flag = d.capped || (d.method == DiffMethod::Truncated && d.tail_bound > opts.policy.tail_tol) || !n.converged;
    Ok((n.value, flag))
}

/// `ω_α(f,h)_p ≈ max_{δ in scan grid} ‖Δ_δ^α f‖_p`.
pub fn modulus(
    f: &FunctionSpec,
    alpha: f64,
    h: f64,
    p: f64,
    q: &QuadratureSpec,
    opts: &ModulusOptions,
) -> Result<ModulusValue> {
    check_p(p)?;
    if !(h > 0.0) {
        return Err(invalid("modulus step h must be positive"));
    }
    if !order_admissible(alpha, p) {
        return Err(Error::Hypothesis {
            id: "modulus".into(),
            reason: format!("order {alpha} not in N ∪ (1/min(p,1) − 1, ∞) for p = {p}"),
        });
    }
    let integer = as_natural(alpha).is_some();
    let exact_any_step = integer || f.polynomial().is_some();
    let adjust = |d: f64| if exact_any_step { d } else { snap_step(d, opts.snap_period) };
    // integer orders: ‖Δ_{−δ}f‖ = ‖Δ_δ f‖ by translation, one side suffices
    let half = (opts.scan.max(3) - 1) / 2;
    let mut steps: Vec<f64> = (1..=half).map(|j| h * j as f64 / half as f64).collect();
    if !integer {
        let neg: Vec<f64> = steps.iter().map(|s| -s).collect();
        steps.extend(neg);
    }
    let mut best = (0.0f64, 0.0f64, false);
    let consider = |d: f64, best: &mut (f64, f64, bool)| -> Result<()> {
        let (v, fl) = difference_norm(f, alpha, adjust(d), p, q, opts)?;
        best.2 |= fl;
        if v > best.0 || (v == best.0 && d.abs() < best.1.abs()) {
            best.0 = v;
            best.1 = d;
        }
        Ok(())
    };
    for &d in &steps {
        consider(d, &mut best)?;
    }
    if best.0 > 0.0 && opts.refine > 0 {
        let spacing = h / half as f64;
        let center = best.1;
        for i in 0..opts.refine {
            let off = spacing * ((i as f64 + 1.0) / (opts.refine as f64 + 1.0) * 2.0 - 1.0);
            let d = center + off;
            if d.abs() <= h && d != 0.0 && d != center {
                consider(d, &mut best)?;
            }
        }
    }
    Ok(ModulusValue {
        value: best.0,
        argmax: best.1,
        flagged: best.2,
    })
}

pub fn modulus_curve(
    f: &FunctionSpec,
    alpha: f64,
    p: f64,
    hs: &[f64],
    q: &QuadratureSpec,
    opts: &ModulusOptions,
) -> Result<(ModulusCurve, bool)> {
    let mut entries = Vec::with_capacity(hs.len());
    let mut flagged = false;
    for &h in hs {
        let m = modulus(f, alpha, h, p, q, opts)?;
        flagged |= m.flagged;
        entries.push((h, m.value));
    }
    Ok((ModulusCurve::new(entries)?, flagged))
}

/// Dyadic steps `2^{−j}` for `j = lo..=hi`, increasing.
pub fn dyadic_steps(lo: u32, hi: u32) -> Vec<f64> {
    (lo..=hi).rev().map(|j| 0.5f64.powi(j as i32)).collect()
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct IntegralEstimate {
    pub value: f64,
    /// Contribution of the unresolved head `(0, t_min]` in the p-th power
    /// scale, already included in `value`.
    pub head: f64,
    pub divergent: bool,
}

/// `(∫_0^δ ω(t)^p t^{−w} dt)^{1/p}` from a sampled curve.
///
/// Between samples the integrand is interpolated as a power law; below the
/// first sample the local power law of the first two samples is extended.
pub fn weighted_modulus_integral(
    curve: &ModulusCurve,
    p: f64,
    weight_exponent: f64,
    delta: f64,
) -> Result<IntegralEstimate> {
    let w = weight_exponent;
    weighted_integral(curve, p, |t: f64| t.powf(-w), |_| -w, delta)
}

/// Same with a general positive weight `g(t)` and its local log-slope.
pub fn weighted_integral(
    curve: &ModulusCurve,
    p: f64,
    weight: impl Fn(f64) -> f64,
    weight_slope: impl Fn(f64) -> f64,
    delta: f64,
) -> Result<IntegralEstimate> {
    check_p(p)?;
    let pts: Vec<(f64, f64)> = curve.entries().iter().copied().filter(|e| e.0 <= delta * (1.0 + 1e-12)).collect();
    if pts.is_empty() {
        return Err(invalid("curve does not reach below the upper limit"));
    }
    if pts.iter().all(|e| e.1 == 0.0) {
        return Ok(IntegralEstimate { value: 0.0, head: 0.0, divergent: false });
    }
    let g = |t: f64, om: f64| om.powf(p) * weight(t);
    let mut acc = 0.0;
    for win in pts.windows(2) {
        let ((t0, o0), (t1, o1)) = (win[0], win[1]);
        acc += segment(t0, g(t0, o0), t1, g(t1, o1));
    }
    // head below the first sample
    let (t0, o0) = pts[0];
    let g0 = g(t0, o0);
    let mut divergent = false;
    let head = if o0 == 0.0 {
        0.0
    } else {
        let s = if pts.len() >= 2 && pts[1].1 > 0.0 {
            (pts[1].1 / o0).ln() / (pts[1].0 / t0).ln()
        } else {
            0.0
        };
        let gamma = p * s + weight_slope(t0);
        if gamma <= -1.0 + 1e-9 {
            divergent = true;
            f64::INFINITY
        } else {
            g0 * t0 / (gamma + 1.0)
        }
    };
    let total = acc + head;
    Ok(IntegralEstimate {
        value: if divergent { f64::INFINITY } else { total.powf(1.0 / p) },
        head,
        divergent,
    })
}

/// `∫_{t0}^{t1}` of the power law through `(t0,g0)`, `(t1,g1)`.
fn segment(t0: f64, g0: f64, t1: f64, g1: f64) -> f64 {
    if g0 <= 0.0 || g1 <= 0.0 {
        return 0.5 * (g0 + g1) * (t1 - t0);
    }
    let l = (t1 / t0).ln();
    let gamma = (g1 / g0).ln() / l;
    if (gamma + 1.0).abs() < 1e-12 {
        g0 * t0 * l
    } else {
        (g1 * t1 - g0 * t0) / (gamma + 1.0)
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct TailSum {
    pub value: f64,
    /// Last summand in the p-th power scale.
    pub last_term: f64,
    /// `last_term / Σ terms`; above 0.01 the sum is horizon-limited.
    pub indicator: f64,
    pub horizon_limited: bool,
}

/// `(Σ_{ν=n+1}^{n_max} ν^{e} E_ν^p)^{1/p}`.
pub fn tail_sum(table: &ETable, p: f64, exponent: f64, n: usize) -> Result<TailSum> {
    tail_sum_weighted(table, p, |nu| (nu as f64).powf(exponent), n)
}

/// `(Σ_{ν=n+1}^{n_max} g(ν) E_ν^p)^{1/p}`.
pub fn tail_sum_weighted(table: &ETable, p: f64, weight: impl Fn(usize) -> f64, n: usize) -> Result<TailSum> {
    check_p(p)?;
    if n >= table.n_max() {
        return Err(invalid(format!("tail start {n} must be below the table horizon {}", table.n_max())));
    }
    let mut sum = 0.0;
    let mut last = 0.0;
    for nu in n + 1..=table.n_max() {
        last = weight(nu) * table.get(nu).powf(p);
        sum += last;
    }
    let indicator = if sum > 0.0 { last / sum } else { 0.0 };
    Ok(TailSum {
        value: sum.powf(1.0 / p),
        last_term: last,
        indicator,
        horizon_limited: indicator > 0.01,
    })
}

/// Which of the three rate regimes applies: 0 for `α ∈ ℕ` or `α > 1/p − 1`, 1 at the threshold, 2 below it.
pub fn rate_branch_of(alpha: f64, p: f64) -> u8 {
    let t = 1.0 / p - 1.0;
    if as_natural(alpha).is_some() || alpha > t {
        0
    } else if alpha == t {
        1
    } else {
        2
    }
}

/// `σ_{α,p}(n)`.
pub fn sigma_rate(n: usize, alpha: f64, p: f64) -> f64 {
    let nf = n as f64;
    let t = 1.0 / p - 1.0;
    match rate_branch_of(alpha, p) {
        0 => nf.powf(alpha),
        1 => nf.powf(t) * (nf + 1.0).ln().powf(1.0 / p),
        _ => nf.powf(t),
    }
}

/// `ρ_{α,p}(n)`.
pub fn rho_rate(n: usize, alpha: f64, p: f64) -> f64 {
    let nf = n as f64;
    match rate_branch_of(alpha, p) {
        0 => 1.0,
        1 => (nf + 1.0).ln().powf(1.0 / p),
        _ => nf.powf(1.0 / p - 1.0 - alpha),
    }
}

/// The Bernstein-type rate: `n^α`, `n^{1/p−1} log^{1/p} n`, or `n^{1/p−1}`.
pub fn bernstein_rate(n: usize, alpha: f64, p: f64) -> f64 {
    let nf = n as f64;
    let t = 1.0 / p - 1.0;
    match rate_branch_of(alpha, p) {
        0 => nf.powf(alpha),
        1 => nf.powf(t) * nf.ln().powf(1.0 / p),
        _ => nf.powf(t),
    }
}

#[derive(Clone, Debug)]
pub struct RealizationResult {
    pub value: f64,
    pub minimizer: TrigPolynomial,
    /// `(‖f − T‖_p, δ^α ‖T^{(α)}‖_p)`.
    pub parts: (f64, f64),
    pub status: SolverStatus,
}

/// Upper bound on `R_α(f,δ)_p = inf_{T∈T_{[1/δ]}} (‖f−T‖_p + δ^α‖T^{(α)}‖_p)`.
pub fn realization(
    f: &FunctionSpec,
    alpha: f64,
    delta: f64,
    p: f64,
    opts: &SolverOptions,
    q: &QuadratureSpec,
) -> Result<RealizationResult> {
    check_p(p)?;
    if !(alpha > 0.0) {
        return Err(invalid("realization order must be positive"));
    }
    if !(delta > 0.0 && delta <= 1.0) {
        return Err(invalid("realization step must lie in (0, 1]"));
    }
    let (t, a, b, status) = realization_search(f, alpha, delta, p, opts, q)?;
    Ok(RealizationResult {
        value: a + b,
        minimizer: t,
        parts: (a, b),
        status,
    })
}
