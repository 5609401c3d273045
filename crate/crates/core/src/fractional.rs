//! Generalized binomials, fractional differences and the Weyl multiplier.

use std::f64::consts::{FRAC_PI_2, TAU};
use std::sync::Arc;

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::error::{invalid, Error, Result};
use crate::periodic::{analyze, fft_inverse, sample, wrap_angle, FunctionSpec, TrigPolynomial};
use crate::quasinorm::{lp_norm, QuadratureSpec};

/// `binom(α, ν)` by the product recurrence.
pub fn gbinom(alpha: f64, nu: usize) -> f64 {
    let mut b = 1.0;
    for j in 1..=nu {
        b *= (alpha - j as f64 + 1.0) / j as f64;
        if b == 0.0 {
            break;
        }
    }
    b
}

/// `(−1)^ν binom(α, ν)` for `ν = 0..=m`.
pub fn difference_weights(alpha: f64, m: usize) -> Vec<f64> {
    let mut out = Vec::with_capacity(m + 1);
    let mut b = 1.0;
    out.push(1.0);
    for nu in 1..=m {
        b *= -(alpha - nu as f64 + 1.0) / nu as f64;
        out.push(b);
    }
    out
}

/// Returns `Some(k)` when `alpha` is a nonnegative integer.
pub fn as_natural(alpha: f64) -> Option<usize> {
    if alpha >= 0.0 && alpha.fract() == 0.0 && alpha <= 1e6 {
        Some(alpha as usize)
    } else {
        None
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct TruncationPolicy {
    pub tail_tol: f64,
    pub max_terms: usize,
    /// Largest denominator `P` for which `δ = 2πm/P` is summed exactly by
    /// residue classes.
    pub max_period: usize,
}

impl Default for TruncationPolicy {
    fn default() -> Self {
        TruncationPolicy {
            tail_tol: 1e-8,
            max_terms: 2_000_000,
            max_period: 65_536,
        }
    }
}

impl TruncationPolicy {
    pub fn validate(&self) -> Result<()> {
        if self.max_terms < 2 {
            return Err(invalid("max_terms must be at least 2"));
        }
        if !(self.tail_tol > 0.0) {
            return Err(invalid("tail_tol must be positive"));
        }
        Ok(())
    }
}

/// Principal-branch symbol `(1 − e^{−iθ})^α`, zero at multiples of 2π.
pub fn difference_symbol(theta: f64, alpha: f64) -> Complex64 {
    let t = theta.rem_euclid(TAU);
    if t == 0.0 || t >= TAU || t.min(TAU - t) < 1e-300 {
        return Complex64::new(0.0, 0.0);
    }
    // 1 − e^{−it} = 2 sin(t/2) e^{i(π − t)/2}, argument in (−π/2, π/2)
    let modulus = (2.0 * (0.5 * t).sin()).powf(alpha);
    Complex64::from_polar(modulus, alpha * 0.5 * (std::f64::consts::PI - t))
}

/// `(ik)^α` with `k = 0 ↦ 0`.
pub fn weyl_multiplier(k: i64, alpha: f64) -> Complex64 {
    if k == 0 {
        return Complex64::new(0.0, 0.0);
    }
    let m = (k.unsigned_abs() as f64).powf(alpha);
    let s = k.signum() as f64;
    if alpha.fract() == 0.0 && alpha.abs() < 1e9 {
        // exact powers of ±i
        let r = (alpha as i64 * k.signum()).rem_euclid(4);
        let unit = match r {
            0 => Complex64::new(1.0, 0.0),
            1 => Complex64::new(0.0, 1.0),
            2 => Complex64::new(-1.0, 0.0),
            _ => Complex64::new(0.0, -1.0),
        };
        return unit * m;
    }
    Complex64::from_polar(m, alpha * FRAC_PI_2 * s)
}

/// Weyl derivative (`α > 0`) or integral (`α < 0`) of a polynomial.
pub fn weyl(t: &TrigPolynomial, alpha: f64) -> TrigPolynomial {
    t.map_coeffs(|k, c| c * weyl_multiplier(k, alpha))
}

/// How a difference was evaluated.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum DiffMethod {
    /// Integer order, finite sum.
    Finite,
    /// Polynomial input, exact Fourier multiplier.
    Multiplier,
    /// `δ/2π = m/P` rational, series summed exactly by residue classes.
    Commensurate { period: usize },
    /// Truncated series with mean correction.
    Truncated,
}

#[derive(Clone, Debug)]
pub struct FracDifference {
    pub spec: FunctionSpec,
    pub method: DiffMethod,
    pub terms: usize,
    /// Bound on `Σ_{ν>M} |binom(α,ν)|`; zero for exact methods.
    pub tail_bound: f64,
    /// Set when `max_terms` was hit before `tail_tol`.
    pub capped: bool,
}

/// `Δ_δ^α f(x) = Σ_ν binom(α,ν)(−1)^ν f(x − νδ)`.
pub fn frac_difference(
    f: &FunctionSpec,
    alpha: f64,
    delta: f64,
    policy: &TruncationPolicy,
) -> Result<FracDifference> {
    if !(alpha > 0.0) || !alpha.is_finite() {
        return Err(invalid(format!("difference order must be positive, got {alpha}")));
    }
    if delta == 0.0 || !delta.is_finite() {
        return Err(invalid("difference step must be nonzero and finite"));
    }
    policy.validate()?;
    let label = format!("D[{alpha},{delta}]{}", f.label());

    if let Some(t) = f.polynomial() {
        let out = t.map_coeffs(|k, c| c * difference_symbol(k as f64 * delta, alpha));
        return Ok(FracDifference {
            spec: FunctionSpec::from_polynomial(label, out),
            method: DiffMethod::Multiplier,
            terms: 0,
            tail_bound: 0.0,
            capped: false,
        });
    }

    if let Some(m) = as_natural(alpha) {
        let w = difference_weights(alpha, m);
        let terms: Vec<(f64, f64)> = w
            .iter()
            .enumerate()
            .map(|(nu, &c)| (c, nu as f64 * delta))
            .collect();
        return Ok(FracDifference {
            spec: shifted_sum(f, &terms, label),
            method: DiffMethod::Finite,
            terms: m + 1,
            tail_bound: 0.0,
            capped: false,
        });
    }

    if let Some(period) = commensurate_period(delta, policy.max_period) {
        let c = residue_weights(alpha, period);
        let terms: Vec<(f64, f64)> = c
            .iter()
            .enumerate()
            .map(|(r, &w)| (w, r as f64 * delta))
            .collect();
        return Ok(FracDifference {
            spec: shifted_sum(f, &terms, label),
            method: DiffMethod::Commensurate { period },
            terms: period,
            tail_bound: 0.0,
            capped: false,
        });
    }

    truncated_difference(f, alpha, delta, policy, label)
}

/// `Σ c_i f(x − s_i)` keeping piecewise structure when present.
fn shifted_sum(f: &FunctionSpec, terms: &[(f64, f64)], label: String) -> FunctionSpec {
    if let Some(pw) = f.piecewise() {
        return FunctionSpec::from_piecewise(label, pw.combine(terms));
    }
    let g = f.evaluator().clone();
    let t: Arc<Vec<(f64, f64)>> = Arc::new(terms.to_vec());
    let t2 = t.clone();
    let mut out = FunctionSpec::from_fn(label, move |x| {
        t.iter()
            .map(|&(c, s)| g(wrap_angle(x - s)) * c)
            .sum()
    });
    if let Some(rule) = f.fourier().cloned() {
        let t3 = t2.clone();
        out = out.with_fourier(Arc::new(move |k| {
            let sym: Complex64 = t3
                .iter()
                .map(|&(c, s)| Complex64::cis(-(k as f64) * s) * c)
                .sum();
            rule(k) * sym
        }));
    }
    out.with_breakpoints(shifted_breakpoints(f.breakpoints(), &t2, 8192))
        .with_real(f.is_real())
        .with_resolution(f.resolution())
}

fn shifted_breakpoints(bps: &[f64], terms: &[(f64, f64)], cap: usize) -> Vec<f64> {
    let mut out = Vec::new();
    'outer: for &(c, s) in terms {
        if c == 0.0 {
            continue;
        }
        for &b in bps {
            if out.len() >= cap {
                break 'outer;
            }
            out.push(b + s);
        }
    }
    out
}

/// Denominator `P` with `δ/2π = m/P` (lowest terms) when one exists below `max_period`.
pub fn commensurate_period(delta: f64, max_period: usize) -> Option<usize> {
    let x = (delta / TAU).rem_euclid(1.0);
    if x == 0.0 {
        return Some(1);
    }
    // continued-fraction convergents
    let (mut h0, mut h1) = (0i64, 1i64);
    let (mut k0, mut k1) = (1i64, 0i64);
    let mut r = x;
    for _ in 0..64 {
        let a = r.floor();
        let ai = a as i64;
        let (h2, k2) = (ai * h1 + h0, ai * k1 + k0);
        if k2 as usize > max_period {
            return None;
        }
        if (x - h2 as f64 / k2 as f64).abs() <= 8.0 * f64::EPSILON * x {
            return Some(k2 as usize);
        }
        let frac = r - a;
        if frac < 1e-300 {
            return None;
        }
        r = 1.0 / frac;
        h0 = h1;
        h1 = h2;
        k0 = k1;
        k1 = k2;
    }
    None
}

/// Class sums `C_r = Σ_{ν ≡ r (mod P)} (−1)^ν binom(α,ν)`.
///
/// From `Σ_ν (−1)^ν binom(α,ν) z^ν = (1 − z)^α` at the P-th roots of unity,
/// `C_r = (1/P) Σ_s (1 − e^{−2πis/P})^α e^{2πisr/P}`.
fn residue_weights(alpha: f64, period: usize) -> Vec<f64> {
    if period == 1 {
        return vec![0.0];
    }
    let mut buf: Vec<Complex64> = (0..period)
        .map(|s| difference_symbol(TAU * s as f64 / period as f64, alpha))
        .collect();
    fft_inverse(&mut buf);
    buf.iter().map(|c| c.re / period as f64).collect()
}

fn truncated_difference(
    f: &FunctionSpec,
    alpha: f64,
    delta: f64,
    policy: &TruncationPolicy,
    label: String,
) -> Result<FracDifference> {
    let mut w = vec![1.0];
    let mut partial = 1.0;
    let mut b = 1.0;
    let mut capped = true;
    for nu in 1..policy.max_terms {
        b *= -(alpha - nu as f64 + 1.0) / nu as f64;
        w.push(b);
        partial += b;
        // past ν > α all later weights share one sign, so the tail equals the partial sum
        if nu as f64 > alpha && partial.abs() <= policy.tail_tol {
            capped = false;
            break;
        }
    }
    let tail = partial.abs();
    let mean = f.mean();
    let g = f.evaluator().clone();
    let weights = Arc::new(w);
    let wv = weights.clone();
    // the omitted tail acts on f ≈ mean, so subtract mean·Σ_{ν≤M} w_ν
    let correction = mean * partial;
    let mut spec = FunctionSpec::from_fn(label, move |x| {
        let mut acc = Complex64::new(0.0, 0.0);
        for (nu, &c) in wv.iter().enumerate() {
            acc += g(wrap_angle(x - nu as f64 * delta)) * c;
        }
        acc - correction
    });
    if let Some(rule) = f.fourier().cloned() {
        spec = spec.with_fourier(Arc::new(move |k| {
            if k == 0 {
                Complex64::new(0.0, 0.0)
            } else {
                rule(k) * difference_symbol(k as f64 * delta, alpha)
            }
        }));
    }
    let terms: Vec<(f64, f64)> = weights
        .iter()
        .enumerate()
        .map(|(nu, &c)| (c, nu as f64 * delta))
        .collect();
    spec = spec
        .with_breakpoints(shifted_breakpoints(f.breakpoints(), &terms, 8192))
        .with_real(f.is_real())
        .with_resolution(f.resolution());
    Ok(FracDifference {
        spec,
        method: DiffMethod::Truncated,
        terms: weights.len(),
        tail_bound: tail,
        capped,
    })
}

#[derive(Clone, Debug)]
pub struct WeylResult {
    pub spec: FunctionSpec,
    /// `Σ_{K<|k|≤4K} |(ik)^α \hat f_k|`, a proxy for the discarded tail.
    pub tail_estimate: f64,
    pub flagged: bool,
}

/// Weyl operator applied to the degree-`K` projection of `f`.
pub fn weyl_of_spec(f: &FunctionSpec, alpha: f64, cutoff: usize, grid: usize) -> Result<WeylResult> {
    let label = format!("W[{alpha}]{}", f.label());
    if let Some(t) = f.polynomial() {
        let k = cutoff.max(t.degree());
        let out = weyl(&t.resized(k), alpha);
        return Ok(WeylResult {
            spec: FunctionSpec::from_polynomial(label, out),
            tail_estimate: 0.0,
            flagged: false,
        });
    }
    if let Some(rule) = f.fourier().cloned() {
        let t = TrigPolynomial::from_fn(cutoff, |k| rule(k) * weyl_multiplier(k, alpha));
        let kk = cutoff as i64;
        let tail: f64 = (kk + 1..=4 * kk.max(1))
            .map(|k| (rule(k) * weyl_multiplier(k, alpha)).norm() + (rule(-k) * weyl_multiplier(-k, alpha)).norm())
            .sum();
        let scale = t.l2_norm_sq().sqrt().max(1e-300);
        let r2 = rule.clone();
        let spec = FunctionSpec::from_polynomial(label, t)
            .with_fourier(Arc::new(move |k| r2(k) * weyl_multiplier(k, alpha)));
        return Ok(WeylResult {
            spec,
            tail_estimate: tail,
            flagged: tail > 1e-6 * scale.max(1.0),
        });
    }
    if alpha > 0.0 {
        return Err(Error::MissingFourierRule);
    }
    let t = analyze(&sample(f, grid)?, cutoff)?;
    Ok(WeylResult {
        spec: FunctionSpec::from_polynomial(label, weyl(&t, alpha)),
        tail_estimate: f64::NAN,
        flagged: false,
    })
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ResidualPoint {
    pub h: f64,
    pub residual: f64,
    pub flagged: bool,
}

/// `(h, ‖Δ_h^α f / h^α − g‖_p)` along a decreasing schedule.
pub fn grunwald_residual(
    f: &FunctionSpec,
    g: &FunctionSpec,
    alpha: f64,
    p: f64,
    h_schedule: &[f64],
    q: &QuadratureSpec,
    policy: &TruncationPolicy,
) -> Result<Vec<ResidualPoint>> {
    if !(alpha > 0.0) {
        return Err(invalid("Grünwald residual needs a positive order"));
    }
    if h_schedule.is_empty()
        || h_schedule.iter().any(|&h| !(h > 0.0))
        || h_schedule.windows(2).any(|w| w[1] >= w[0])
    {
        return Err(invalid("h schedule must be positive and strictly decreasing"));
    }
    let mut out = Vec::with_capacity(h_schedule.len());
    for &h in h_schedule {
        let d = frac_difference(f, alpha, h, policy)?;
        let scale = Complex64::new(h.powf(-alpha), 0.0);
        let r = d.spec.combine(scale, g, Complex64::new(-1.0, 0.0));
        let n = lp_norm(&r, p, q)?;
        out.push(ResidualPoint {
            h,
            residual: n.value,
            flagged: d.capped || !n.converged,
        });
    }
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::piecewise::Piecewise;
    use std::f64::consts::PI;

    fn cx(re: f64, im: f64) -> Complex64 {
        Complex64::new(re, im)
    }

    #[test]
    fn gbinom_examples() {
        for a in [0.3, -1.2, 2.0, 7.5] {
            assert_eq!(gbinom(a, 0), 1.0);
        }
        assert_eq!(gbinom(2.0, 3), 0.0);
        assert!((gbinom(0.5, 2) + 0.125).abs() < 1e-16);
        assert_eq!(gbinom(5.0, 2), 10.0);
    }

    #[test]
    fn gbinom_tail_is_bounded() {
        for a in [0.3, 0.5, 1.5] {
            let w = difference_weights(a, 100_000);
            let m = w
                .iter()
                .enumerate()
                .skip(1)
                .map(|(nu, b)| b.abs() * (nu as f64).powf(a + 1.0))
                .fold(0.0, f64::max);
            assert!(m < 5.0, "alpha = {a}: {m}");
            // the scaled tail settles at 1/|Γ(−α)|
            let late = w[100_000].abs() * 100_000f64.powf(a + 1.0);
            let mid = w[10_000].abs() * 10_000f64.powf(a + 1.0);
            assert!((late / mid - 1.0).abs() < 1e-3);
        }
    }

    #[test]
    fn weyl_examples() {
        let one = TrigPolynomial::new(vec![cx(3.0, 0.0)]).unwrap();
        assert_eq!(weyl(&one, 1.3).coeff(0), cx(0.0, 0.0));
        let sin = TrigPolynomial::new(vec![cx(0.0, 0.5), cx(0.0, 0.0), cx(0.0, -0.5)]).unwrap();
        let d = weyl(&sin, 1.0);
        assert!((d.coeff(1) - cx(0.5, 0.0)).norm() < 1e-16);
        assert!((d.coeff(-1) - cx(0.5, 0.0)).norm() < 1e-16);
        let cos = TrigPolynomial::new(vec![cx(0.5, 0.0), cx(0.0, 0.0), cx(0.5, 0.0)]).unwrap();
        let h = weyl(&cos, 0.5);
        for &x in &[0.0, 0.4, 2.0] {
            assert!((h.eval(x) - cx((x + PI / 4.0).cos(), 0.0)).norm() < 1e-15);
        }
    }

    #[test]
    fn difference_examples() {
        let pol = TruncationPolicy::default();
        let e1 = FunctionSpec::from_fn("e^ix", Complex64::cis);
        let d = frac_difference(&e1, 1.0, 0.4, &pol).unwrap();
        assert_eq!(d.terms, 2);
        for &x in &[0.1, 2.0] {
            assert!((d.spec.eval(x) - (Complex64::cis(x) - Complex64::cis(x - 0.4))).norm() < 1e-15);
        }
        let d = frac_difference(&e1, 0.5, PI, &pol).unwrap();
        assert_eq!(d.method, DiffMethod::Commensurate { period: 2 });
        for &x in &[0.1, 2.0, 5.0] {
            assert!((d.spec.eval(x) - Complex64::cis(x) * 2f64.sqrt()).norm() < 1e-14);
        }
        let one = FunctionSpec::constant(1.0);
        for (a, dl) in [(0.5, 0.37), (1.7, 1.0), (0.3, PI / 3.0)] {
            let d = frac_difference(&one, a, dl, &pol).unwrap();
            assert!(d.spec.eval(0.3).norm() <= pol.tail_tol);
        }
        assert!(frac_difference(&one, 0.0, 0.1, &pol).is_err());
        assert!(frac_difference(&one, 1.0, 0.0, &pol).is_err());
    }

    #[test]
    fn truncated_series_respects_tail() {
        let pol = TruncationPolicy::default();
        let e3 = FunctionSpec::from_fn("e^3ix", |x| Complex64::cis(3.0 * x));
        let delta = 0.1234567;
        assert!(commensurate_period(delta, pol.max_period).is_none());
        let d = frac_difference(&e3, 1.7, delta, &pol).unwrap();
        assert_eq!(d.method, DiffMethod::Truncated);
        assert!(!d.capped);
        let want = difference_symbol(3.0 * delta, 1.7) * Complex64::cis(3.0 * 0.8);
        assert!((d.spec.eval(0.8) - want).norm() <= d.tail_bound + 1e-12);
    }

    #[test]
    fn commensurate_detection() {
        assert_eq!(commensurate_period(PI, 100), Some(2));
        assert_eq!(commensurate_period(TAU / 628.0, 1000), Some(628));
        assert_eq!(commensurate_period(-TAU / 3.0, 100), Some(3));
        assert_eq!(commensurate_period(1.0, 1000), None);
    }

    #[test]
    fn piecewise_difference_stays_exact() {
        let s = Piecewise::steps(vec![0.0, PI, TAU], &[1.0, -1.0]).unwrap();
        let f = FunctionSpec::from_piecewise("sign sin", s);
        let d = frac_difference(&f, 1.0, 0.25, &TruncationPolicy::default()).unwrap();
        assert!(d.spec.piecewise().is_some());
        let d = frac_difference(&f, 0.5, TAU / 64.0, &TruncationPolicy::default()).unwrap();
        assert!(d.spec.piecewise().is_some());
        assert_eq!(d.method, DiffMethod::Commensurate { period: 64 });
    }

    #[test]
    fn grunwald_square_wave() {
        let s = Piecewise::steps(vec![0.0, PI, TAU], &[1.0, -1.0]).unwrap();
        let f = FunctionSpec::from_piecewise("sign sin", s);
        let zero = FunctionSpec::constant(0.0);
        let hs = [0.1, 0.05, 0.025];
        let q = QuadratureSpec::default();
        let pol = TruncationPolicy::default();
        let half = grunwald_residual(&f, &zero, 1.0, 0.5, &hs, &q, &pol).unwrap();
        for r in &half {
            assert!((r.residual - 2.0 * r.h / (PI * PI)).abs() < 1e-13);
        }
        let one = grunwald_residual(&f, &zero, 1.0, 1.0, &hs, &q, &pol).unwrap();
        for r in &one {
            assert!((r.residual - 2.0 / PI).abs() < 1e-13);
        }
    }
}
