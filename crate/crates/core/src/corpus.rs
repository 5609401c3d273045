//! Test functions with known analytic structure.
//!
//! [`CorpusSpec`] is the serializable description (the `"kind"`-tagged JSON
//! record accepted by the CLI); [`CorpusSpec::build`] turns it into a
//! [`FunctionSpec`] carrying exact Fourier rules, breakpoints and, where
//! possible, an exact piecewise representation.

use std::f64::consts::{PI, TAU};

use num_complex::Complex64;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, StandardNormal};
use serde::{Deserialize, Serialize};

use crate::error::{invalid, Error, Result};
use crate::fractional::{as_natural, weyl, weyl_of_spec};
use crate::periodic::{FunctionSpec, TrigPolynomial};
use crate::piecewise::Piecewise;
use crate::poly::{bernoulli, Poly};

/// One jump of a step function: the value increases by `d` when crossing `x`.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct Jump {
    pub x: f64,
    pub d: f64,
}

/// Serializable description of a corpus member.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum CorpusSpec {
    /// Coefficients `c_{-n}, …, c_n` as `[re, im]` pairs.
    TrigPoly { coeffs: Vec<[f64; 2]> },
    SignSin,
    /// `d0 + Σ_{x_k < x} d_k` on `[0, 2π)`.
    Jump {
        #[serde(default)]
        d0: f64,
        jumps: Vec<Jump>,
    },
    #[serde(rename = "f_r")]
    FR { r: u32 },
    /// `g_{n,r}(x/π)`, so that `phi_nr = π · g_nr`.
    GNr { n: usize, r: u32 },
    PhiNr { n: usize, r: u32 },
    /// `I_{β−1}` applied to a step function.
    Krotov {
        beta: f64,
        #[serde(default = "default_jump_box")]
        of: Box<CorpusSpec>,
        #[serde(default)]
        cutoff: Option<usize>,
    },
    /// Weyl fractional integral `I_α` of order `alpha > 0`.
    FracIntegral {
        alpha: f64,
        of: Box<CorpusSpec>,
        #[serde(default)]
        cutoff: Option<usize>,
    },
    Dirichlet { n: usize },
    Fejer { n: usize },
    /// Normalized square of the Fejér kernel of order `n/2`.
    Jackson { n: usize },
    RandomPoly {
        n: usize,
        #[serde(default)]
        seed: u64,
        #[serde(default = "yes")]
        real: bool,
    },
    /// `e^{ikx}`.
    Exp { k: i64 },
}

fn yes() -> bool {
    true
}

fn default_jump_box() -> Box<CorpusSpec> {
    Box::new(default_jumps())
}

/// Three jumps at dyadic positions whose sizes sum to zero.
pub fn default_jumps() -> CorpusSpec {
    CorpusSpec::Jump {
        d0: 0.0,
        jumps: vec![
            Jump { x: 0.5, d: 1.0 },
            Jump { x: 2.25, d: -0.75 },
            Jump { x: 4.125, d: -0.25 },
        ],
    }
}

/// Spectral cutoff used for fractional primitives when none is given.
pub fn default_cutoff(order: f64) -> usize {
    if order >= 0.5 {
        2048
    } else {
        8192
    }
}

const TAIL_TOL: f64 = 1e-6;

impl CorpusSpec {
    /// Short kind name, as used in report columns.
    pub fn kind(&self) -> &'static str {
        match self {
            CorpusSpec::TrigPoly { .. } => "trig_poly",
            CorpusSpec::SignSin => "sign_sin",
            CorpusSpec::Jump { .. } => "jump",
            CorpusSpec::FR { .. } => "f_r",
            CorpusSpec::GNr { .. } => "g_nr",
            CorpusSpec::PhiNr { .. } => "phi_nr",
            CorpusSpec::Krotov { .. } => "krotov",
            CorpusSpec::FracIntegral { .. } => "frac_integral",
            CorpusSpec::Dirichlet { .. } => "dirichlet",
            CorpusSpec::Fejer { .. } => "fejer",
            CorpusSpec::Jackson { .. } => "jackson",
            CorpusSpec::RandomPoly { .. } => "random_poly",
            CorpusSpec::Exp { .. } => "exp",
        }
    }

    /// The same family at degree or resolution `n`, for kinds that have one.
    pub fn with_degree(&self, n: usize) -> CorpusSpec {
        match self {
            CorpusSpec::Dirichlet { .. } => CorpusSpec::Dirichlet { n },
            CorpusSpec::Fejer { .. } => CorpusSpec::Fejer { n },
            CorpusSpec::Jackson { .. } => CorpusSpec::Jackson { n },
            CorpusSpec::RandomPoly { seed, real, .. } => CorpusSpec::RandomPoly { n, seed: *seed, real: *real },
            CorpusSpec::Exp { k } => CorpusSpec::Exp { k: if *k < 0 { -(n as i64) } else { n as i64 } },
            CorpusSpec::GNr { r, .. } => CorpusSpec::GNr { n, r: *r },
            CorpusSpec::PhiNr { r, .. } => CorpusSpec::PhiNr { n, r: *r },
            other => other.clone(),
        }
    }

    /// Compact JSON used as a stable label.
    pub fn label(&self) -> String {
        serde_json::to_string(self).unwrap_or_else(|_| self.kind().to_string())
    }

    pub fn build(&self) -> Result<FunctionSpec> {
        Ok(self.build_with_flags()?.0)
    }

    /// Builds the function and lists construction warnings (for example a
    /// spectral cutoff whose coefficient tail exceeds `1e-6`).
    pub fn build_with_flags(&self) -> Result<(FunctionSpec, Vec<String>)> {
        let label = self.label();
        let mut flags = Vec::new();
        let spec = match self {
            CorpusSpec::TrigPoly { coeffs } => {
                let c = coeffs.iter().map(|&[re, im]| Complex64::new(re, im)).collect();
                FunctionSpec::from_polynomial(label, TrigPolynomial::new(c)?)
            }
            CorpusSpec::SignSin => FunctionSpec::from_piecewise(label, sign_sin_piecewise()),
            CorpusSpec::Jump { d0, jumps } => {
                FunctionSpec::from_piecewise(label, jump_piecewise(*d0, jumps)?)
            }
            CorpusSpec::FR { r } => FunctionSpec::from_piecewise(label, f_r(*r)?),
            CorpusSpec::GNr { n, r } => FunctionSpec::from_piecewise(label, phi_nr(*n, *r)?.scaled(1.0 / PI)),
            CorpusSpec::PhiNr { n, r } => FunctionSpec::from_piecewise(label, phi_nr(*n, *r)?),
            CorpusSpec::Krotov { beta, of, cutoff } => {
                if !(*beta >= 1.0) || !beta.is_finite() {
                    return Err(invalid(format!("krotov: beta must be at least 1, got {beta}")));
                }
                let (base, f0) = of.build_with_flags()?;
                flags.extend(f0);
                if *beta == 1.0 {
                    base.with_label(label)
                } else {
                    integrate(&base, beta - 1.0, *cutoff, &mut flags)?.with_label(label)
                }
            }
            CorpusSpec::FracIntegral { alpha, of, cutoff } => {
                if !(*alpha > 0.0) || !alpha.is_finite() {
                    return Err(invalid(format!("frac_integral: alpha must be positive, got {alpha}")));
                }
                let (base, f0) = of.build_with_flags()?;
                flags.extend(f0);
                integrate(&base, *alpha, *cutoff, &mut flags)?.with_label(label)
            }
            CorpusSpec::Dirichlet { n } => {
                FunctionSpec::from_polynomial(label, TrigPolynomial::from_fn(*n, |_| Complex64::new(1.0, 0.0)))
            }
            CorpusSpec::Fejer { n } => FunctionSpec::from_polynomial(label, fejer(*n)),
            CorpusSpec::Jackson { n } => FunctionSpec::from_polynomial(label, jackson(*n)),
            CorpusSpec::RandomPoly { n, seed, real } => {
                FunctionSpec::from_polynomial(label, random_poly(*n, *seed, *real))
            }
            CorpusSpec::Exp { k } => {
                let n = k.unsigned_abs() as usize;
                let mut t = TrigPolynomial::zero(n);
                t.set_coeff(*k, Complex64::new(1.0, 0.0));
                FunctionSpec::from_polynomial(label, t)
            }
        };
        Ok((spec, flags))
    }

    /// Exact Weyl derivative `f^{(α)}` as a companion function, when it is an
    /// integrable function with a known representation.
    pub fn derivative(&self, alpha: f64) -> Result<FunctionSpec> {
        if !(alpha >= 0.0) || !alpha.is_finite() {
            return Err(invalid(format!("derivative order must be nonnegative, got {alpha}")));
        }
        let missing = || Error::MissingDerivative {
            function: self.kind().to_string(),
            alpha,
        };
        if alpha == 0.0 {
            return self.build();
        }
        let label = format!("D[{alpha}]{}", self.label());
        match self {
            CorpusSpec::TrigPoly { .. }
            | CorpusSpec::Dirichlet { .. }
            | CorpusSpec::Fejer { .. }
            | CorpusSpec::Jackson { .. }
            | CorpusSpec::RandomPoly { .. }
            | CorpusSpec::Exp { .. } => {
                let f = self.build()?;
                let t = f.polynomial().ok_or_else(missing)?;
                Ok(FunctionSpec::from_polynomial(label, weyl(t, alpha)))
            }
            // derivatives of step functions are measures, not functions
            CorpusSpec::SignSin | CorpusSpec::Jump { .. } => Err(missing()),
            CorpusSpec::FR { .. } | CorpusSpec::GNr { .. } | CorpusSpec::PhiNr { .. } => {
                let f = self.build()?;
                let pw = f.piecewise().ok_or_else(missing)?;
                match as_natural(alpha) {
                    Some(m) => {
                        let mut d = (**pw).clone();
                        for _ in 0..m {
                            let scale = d.pieces().iter().map(|p| p.eval(0.0).abs()).fold(1.0, f64::max);
                            if d.max_jump() > 1e-9 * scale {
                                return Err(missing());
                            }
                            d = d.derivative();
                        }
                        Ok(FunctionSpec::from_piecewise(label, d))
                    }
                    None => {
                        // fractional order of a continuous function with a step derivative
                        if pw.max_jump() > 1e-9 || alpha > 1.0 {
                            return Err(missing());
                        }
                        let w = weyl_of_spec(&f, alpha, default_cutoff(1.0 - alpha).max(4096), 8192)?;
                        Ok(w.spec.with_label(label))
                    }
                }
            }
            CorpusSpec::Krotov { beta, of, cutoff } => {
                derivative_of_integral(&label, beta - 1.0, of, *cutoff, alpha, missing)
            }
            CorpusSpec::FracIntegral { alpha: a, of, cutoff } => {
                derivative_of_integral(&label, *a, of, *cutoff, alpha, missing)
            }
        }
    }

    /// Closed-form `ω_1(f, h)_p` where one is known.
    pub fn closed_form_modulus(&self, alpha: f64, h: f64, p: f64) -> Option<f64> {
        if alpha != 1.0 || !(h > 0.0) || !(p > 0.0) {
            return None;
        }
        match self {
            CorpusSpec::SignSin if h <= PI => Some(sign_sin_modulus(h, p)),
            CorpusSpec::Jump { d0, jumps } => {
                let pw = jump_piecewise(*d0, jumps).ok()?;
                let (sizes, gap) = jump_sizes(&pw);
                if h > gap {
                    return None;
                }
                let s: f64 = sizes.iter().map(|d| d.abs().powf(p)).sum();
                Some((s * h / TAU).powf(1.0 / p))
            }
            _ => None,
        }
    }
}

fn derivative_of_integral(
    label: &str,
    order: f64,
    of: &CorpusSpec,
    cutoff: Option<usize>,
    alpha: f64,
    missing: impl Fn() -> Error,
) -> Result<FunctionSpec> {
    if order <= 0.0 {
        return of.derivative(alpha);
    }
    let rest = order - alpha;
    if rest.abs() < 1e-12 {
        // the Weyl derivative discards the mean
        let base = of.build()?;
        let mean = base.mean();
        if mean.im != 0.0 {
            return Err(missing());
        }
        return Ok(base.sub(&FunctionSpec::constant(mean.re)).with_label(label));
    }
    if rest > 0.0 {
        let g = CorpusSpec::FracIntegral {
            alpha: rest,
            of: Box::new(of.clone()),
            cutoff,
        };
        return Ok(g.build()?.with_label(label));
    }
    Ok(of.derivative(-rest)?.with_label(label))
}

/// `ω_1(sign sin, h)_p = 2 (h/π)^{1/p}` for `0 < h ≤ π`.
pub fn sign_sin_modulus(h: f64, p: f64) -> f64 {
    2.0 * (h.min(PI) / PI).powf(1.0 / p)
}

fn sign_sin_piecewise() -> Piecewise {
    Piecewise::steps(vec![0.0, PI, TAU], &[1.0, -1.0]).expect("valid knots")
}

fn jump_piecewise(d0: f64, jumps: &[Jump]) -> Result<Piecewise> {
    let mut js = jumps.to_vec();
    if js.iter().any(|j| !(0.0..TAU).contains(&j.x) || !j.d.is_finite()) {
        return Err(invalid("jump: positions must lie in [0, 2π) and sizes be finite"));
    }
    js.sort_by(|a, b| a.x.total_cmp(&b.x));
    if js.windows(2).any(|w| w[0].x == w[1].x) {
        return Err(invalid("jump: repeated jump position"));
    }
    let mut knots = vec![0.0];
    let mut values = Vec::new();
    let mut level = d0;
    for j in &js {
        if j.x == 0.0 {
            // x_k < x holds on the whole open period
            level += j.d;
            continue;
        }
        values.push(level);
        knots.push(j.x);
        level += j.d;
    }
    values.push(level);
    knots.push(TAU);
    Piecewise::steps(knots, &values)
}

/// Jump sizes `f(t+) − f(t−)` at every knot (wrap included, zeros dropped)
/// and the smallest gap between jump positions.
fn jump_sizes(pw: &Piecewise) -> (Vec<f64>, f64) {
    let (pos, sizes) = step_jumps(pw);
    let mut gap = TAU;
    for i in 0..pos.len() {
        let next = if i + 1 < pos.len() { pos[i + 1] } else { pos[0] + TAU };
        if pos.len() > 1 {
            gap = gap.min(next - pos[i]);
        }
    }
    (sizes, gap)
}

fn step_jumps(pw: &Piecewise) -> (Vec<f64>, Vec<f64>) {
    let knots = pw.knots();
    let pieces = pw.pieces();
    let m = pieces.len();
    let mut pos = Vec::new();
    let mut sizes = Vec::new();
    for i in 0..m {
        let prev = (i + m - 1) % m;
        let left = pieces[prev].eval(knots[prev + 1] - knots[prev]);
        let d = pieces[i].eval(0.0) - left;
        if d != 0.0 {
            pos.push(knots[i]);
            sizes.push(d);
        }
    }
    (pos, sizes)
}

fn f_r(r: u32) -> Result<Piecewise> {
    if r == 0 {
        return Err(invalid("f_r: r must be at least 1"));
    }
    let x = Poly(vec![0.0, 1.0]);
    let mirrored = Poly(vec![TAU, -1.0]);
    Piecewise::from_absolute(vec![0.0, PI, TAU], vec![x.pow(r), mirrored.pow(r)])
}

/// `φ_{n,r}(x) = π g_{n,r}(x/π)` with `n` ramps of width `n^{-(r+1)}` on
/// `[0, 1]` and the reflection `g(x) = 1 − g(x − 1)` on `(1, 2]`.
fn phi_nr(n: usize, r: u32) -> Result<Piecewise> {
    if n == 0 || r == 0 {
        return Err(invalid("phi_nr: n and r must be at least 1"));
    }
    let nf = n as f64;
    let width = nf.powi(-(r as i32 + 1));
    let x = Poly(vec![0.0, 1.0]);
    let xr1 = x.pow(r - 1);
    // pieces of g on [0, 1] in the variable y
    let mut knots_g = Vec::with_capacity(2 * n + 1);
    let mut pieces_g = Vec::with_capacity(2 * n);
    for k in 0..n {
        let a = k as f64 / nf;
        let b = (k + 1) as f64 / nf;
        let flat = xr1.scaled(k as f64 / nf);
        let mut ramp = flat.clone();
        ramp.add_scaled(&xr1.mul(&Poly(vec![(width - b) * nf, nf])), 1.0);
        knots_g.push(a);
        pieces_g.push(flat);
        knots_g.push(b - width);
        pieces_g.push(ramp);
    }
    let mut knots = Vec::with_capacity(4 * n + 1);
    let mut pieces = Vec::with_capacity(4 * n);
    // x = π y on [0, π)
    for (t, p) in knots_g.iter().zip(&pieces_g) {
        knots.push(PI * t);
        pieces.push(p.scale_arg(1.0 / PI).scaled(PI));
    }
    // φ(x) = π − φ(x − π) on [π, 2π)
    for (t, p) in knots_g.iter().zip(&pieces_g) {
        knots.push(PI + PI * t);
        let mut q = p.scale_arg(1.0 / PI).scaled(-PI).shift(-PI);
        q.add_scaled(&Poly::constant(PI), 1.0);
        pieces.push(q);
    }
    knots.push(TAU);
    // collapse zero-width ramps that can appear for large n
    let mut kk = vec![knots[0]];
    let mut pp = Vec::new();
    for i in 0..pieces.len() {
        if knots[i + 1] > *kk.last().unwrap() {
            pp.push(pieces[i].clone());
            kk.push(knots[i + 1]);
        }
    }
    *kk.last_mut().unwrap() = TAU;
    Piecewise::from_absolute(kk, pp)
}

fn fejer(n: usize) -> TrigPolynomial {
    TrigPolynomial::from_fn(n, |k| Complex64::new(1.0 - k.unsigned_abs() as f64 / (n + 1) as f64, 0.0))
}

fn jackson(n: usize) -> TrigPolynomial {
    let m = n / 2;
    let f = fejer(m);
    let mut t = TrigPolynomial::zero(2 * m);
    let mi = m as i64;
    for k in -2 * mi..=2 * mi {
        let mut s = Complex64::new(0.0, 0.0);
        for j in (k - mi).max(-mi)..=(k + mi).min(mi) {
            s += f.coeff(j) * f.coeff(k - j);
        }
        t.set_coeff(k, s);
    }
    let c0 = t.coeff(0);
    t.scale(Complex64::new(1.0, 0.0) / c0).resized(n)
}

fn random_poly(n: usize, seed: u64, real: bool) -> TrigPolynomial {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut draw = || -> f64 { StandardNormal.sample(&mut rng) };
    let mut t = TrigPolynomial::zero(n);
    if real {
        t.set_coeff(0, Complex64::new(draw(), 0.0));
        for k in 1..=n as i64 {
            let c = Complex64::new(draw(), draw()) * std::f64::consts::FRAC_1_SQRT_2;
            t.set_coeff(k, c);
            t.set_coeff(-k, c.conj());
        }
    } else {
        for k in -(n as i64)..=n as i64 {
            t.set_coeff(k, Complex64::new(draw(), draw()));
        }
    }
    t
}

/// Weyl integral `I_order` of `base`. Step functions of integer order use
/// the Bernoulli closed form; polynomials are exact; everything else is a
/// spectral truncation at the cutoff.
fn integrate(base: &FunctionSpec, order: f64, cutoff: Option<usize>, flags: &mut Vec<String>) -> Result<FunctionSpec> {
    if let (Some(pw), Some(m)) = (base.piecewise(), as_natural(order)) {
        if pw.max_degree() == 0 && m + 1 < 9 {
            let out = integrate_steps(pw, m, pw.fourier(0).re)?;
            return Ok(FunctionSpec::from_piecewise("I", out));
        }
    }
    if let Some(t) = base.polynomial() {
        let mut out = weyl(t, -order);
        out.set_coeff(0, t.coeff(0));
        return Ok(FunctionSpec::from_polynomial("I", out));
    }
    let k = cutoff.unwrap_or_else(|| default_cutoff(order));
    let grid = (4 * k + 4).next_power_of_two();
    let w = weyl_of_spec(base, -order, k, grid)?;
    // |f̂_k| ≤ C/|k| for bounded-variation input, so the coefficient tail is
    // bounded by the integral of k^{-1-order}
    let rule = base.fourier();
    let c = match rule {
        Some(r) => ((k as f64) * (r(k as i64).norm() + r(-(k as i64)).norm()) / 2.0).max(1e-300),
        None => 1.0,
    };
    let tail = 2.0 * c * (k as f64).powf(-order) / order;
    if tail > TAIL_TOL || w.flagged {
        flags.push(format!("spectral-tail:{tail:.3e}"));
    }
    let mean = base.mean();
    let mut t = w.spec.polynomial().map(|t| (**t).clone()).unwrap_or_else(|| TrigPolynomial::zero(k));
    t.set_coeff(0, mean);
    let r2 = rule.cloned();
    let mut spec = FunctionSpec::from_polynomial("I", t);
    if let Some(r) = r2 {
        spec = spec.with_fourier(std::sync::Arc::new(move |j| {
            if j == 0 {
                mean
            } else {
                r(j) * crate::fractional::weyl_multiplier(j, -order)
            }
        }));
    }
    Ok(spec)
}

/// `m`-fold periodic integral of a mean-adjusted step function with mean
/// `mean`, via `Σ_{k≠0} e^{iku}/(ik)^s = −(2π)^s/s! · B_s({u/2π})`.
fn integrate_steps(pw: &Piecewise, m: usize, mean: f64) -> Result<Piecewise> {
    if m == 0 {
        return Ok(pw.clone());
    }
    let (pos, sizes) = step_jumps(pw);
    let s = m + 1;
    let fact: f64 = (1..=s).map(|i| i as f64).product();
    let coef = TAU.powi(s as i32 - 1) / fact;
    let bs = bernoulli(s).scale_arg(1.0 / TAU);
    let mut knots = vec![0.0];
    knots.extend(pos.iter().copied().filter(|&x| x > 0.0));
    knots.push(TAU);
    let mut pieces = Vec::with_capacity(knots.len() - 1);
    for w in knots.windows(2) {
        let mut piece = Poly::constant(mean);
        for (&y, &d) in pos.iter().zip(&sizes) {
            // on [w0, w1) the fractional part of (x − y)/2π is (x − y + 2π·wrap)/2π
            let wrap = if w[1] <= y { TAU } else { 0.0 };
            piece.add_scaled(&bs.shift(wrap - y), -d * coef);
        }
        pieces.push(piece);
    }
    Piecewise::from_absolute(knots, pieces)
}

/// Named corpus used by sweeps and property tests.
pub fn standard_corpus() -> Vec<CorpusSpec> {
    vec![
        CorpusSpec::SignSin,
        default_jumps(),
        CorpusSpec::FR { r: 1 },
        CorpusSpec::PhiNr { n: 8, r: 1 },
        CorpusSpec::Krotov {
            beta: 2.0,
            of: default_jump_box(),
            cutoff: None,
        },
        CorpusSpec::Krotov {
            beta: 3.0,
            of: default_jump_box(),
            cutoff: None,
        },
        CorpusSpec::Dirichlet { n: 8 },
        CorpusSpec::Fejer { n: 8 },
        CorpusSpec::Jackson { n: 8 },
        CorpusSpec::RandomPoly {
            n: 8,
            seed: 7,
            real: true,
        },
        CorpusSpec::Exp { k: 3 },
    ]
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::periodic::{analyze, sample};
    use crate::quasinorm::{lp_norm, QuadratureRule, QuadratureSpec};

    fn c(re: f64, im: f64) -> Complex64 {
        Complex64::new(re, im)
    }

    #[test]
    fn sign_sin_basics() {
        let f = CorpusSpec::SignSin.build().unwrap();
        assert!((f.fourier_coeff(1).unwrap() - c(0.0, -2.0 / PI)).norm() < 1e-14);
        assert!(f.fourier_coeff(2).unwrap().norm() < 1e-14);
        for p in [0.5, 1.0, 2.0] {
            let v = lp_norm(&f, p, &QuadratureSpec::default()).unwrap().value;
            assert!((v - 1.0).abs() < 1e-12);
        }
        assert!((sign_sin_modulus(PI / 8.0, 0.5) - 1.0 / 32.0).abs() < 1e-15);
    }

    #[test]
    fn two_jump_configuration_is_sign_sin() {
        let j = CorpusSpec::Jump {
            d0: -1.0,
            jumps: vec![Jump { x: 0.0, d: 2.0 }, Jump { x: PI, d: -2.0 }],
        }
        .build()
        .unwrap();
        let s = CorpusSpec::SignSin.build().unwrap();
        for i in 0..50 {
            let x = 0.1 + 0.12 * i as f64;
            assert_eq!(j.eval(x), s.eval(x));
        }
    }

    #[test]
    fn no_jumps_is_constant_and_repeats_rejected() {
        let f = CorpusSpec::Jump { d0: 2.5, jumps: vec![] }.build().unwrap();
        assert_eq!(f.eval(1.0).re, 2.5);
        let bad = CorpusSpec::Jump {
            d0: 0.0,
            jumps: vec![Jump { x: 1.0, d: 1.0 }, Jump { x: 1.0, d: 2.0 }],
        };
        assert!(bad.build().is_err());
    }

    #[test]
    fn f1_values_and_phi_monotone() {
        let f = CorpusSpec::FR { r: 1 }.build().unwrap();
        assert!((f.eval(PI / 2.0).re - PI / 2.0).abs() < 1e-14);
        assert!((f.eval(1.5 * PI).re - PI / 2.0).abs() < 1e-14);
        let g = CorpusSpec::GNr { n: 8, r: 1 }.build().unwrap();
        let mut prev = -1.0;
        for i in 0..=2000 {
            let x = PI * i as f64 / 2000.0 * 0.9999;
            let v = g.eval(x).re;
            assert!(v >= prev - 1e-14);
            prev = v;
        }
        assert!(g.eval(0.0).re.abs() < 1e-14);
        assert!((g.eval(PI - 1e-9).re - 1.0).abs() < 1e-6);
    }

    #[test]
    fn phi_is_continuous_with_unit_total_rise() {
        for n in [1usize, 4, 9] {
            let f = CorpusSpec::PhiNr { n, r: 1 }.build().unwrap();
            let pw = f.piecewise().unwrap();
            assert!(pw.max_jump() < 1e-12, "n = {n}");
            let d = CorpusSpec::PhiNr { n, r: 1 }.derivative(1.0).unwrap();
            let vals: Vec<f64> = (0..4096).map(|j| d.eval((j as f64 + 0.5) * TAU / 4096.0).re).collect();
            assert!(vals.iter().all(|v| v.abs() < 1e-9 || (v.abs() - n as f64).abs() < 1e-9));
        }
    }

    #[test]
    fn kernels_have_expected_coefficients() {
        let d = CorpusSpec::Dirichlet { n: 8 }.build().unwrap();
        let f = CorpusSpec::Fejer { n: 8 }.build().unwrap();
        for k in -8..=8i64 {
            assert_eq!(d.fourier_coeff(k).unwrap(), c(1.0, 0.0));
            let want = 1.0 - k.abs() as f64 / 9.0;
            assert!((f.fourier_coeff(k).unwrap().re - want).abs() < 1e-15);
        }
        let j = CorpusSpec::Jackson { n: 8 }.build().unwrap();
        assert!((j.fourier_coeff(0).unwrap().re - 1.0).abs() < 1e-15);
        assert!(j.eval(0.3).im.abs() < 1e-12 && j.eval(1.0).re > 0.0);
    }

    #[test]
    fn random_poly_is_seeded() {
        let a = CorpusSpec::RandomPoly { n: 8, seed: 7, real: true }.build().unwrap();
        let b = CorpusSpec::RandomPoly { n: 8, seed: 7, real: true }.build().unwrap();
        let z = CorpusSpec::RandomPoly { n: 8, seed: 8, real: true }.build().unwrap();
        assert_eq!(a.polynomial().unwrap().coeffs(), b.polynomial().unwrap().coeffs());
        assert_ne!(a.polynomial().unwrap().coeffs(), z.polynomial().unwrap().coeffs());
        assert!(a.is_real());
    }

    #[test]
    fn krotov_beta_one_is_the_jump_function() {
        let k = CorpusSpec::Krotov { beta: 1.0, of: default_jump_box(), cutoff: None }.build().unwrap();
        let j = default_jumps().build().unwrap();
        for i in 0..40 {
            let x = 0.05 + 0.15 * i as f64;
            assert_eq!(k.eval(x), j.eval(x));
        }
    }

    #[test]
    fn bernoulli_primitive_matches_spectral_coefficients() {
        let base = CorpusSpec::SignSin;
        let k2 = CorpusSpec::Krotov { beta: 2.0, of: Box::new(base.clone()), cutoff: None }.build().unwrap();
        let k3 = CorpusSpec::Krotov { beta: 3.0, of: Box::new(base), cutoff: None }.build().unwrap();
        assert!(k2.piecewise().unwrap().max_jump() < 1e-12);
        for k in 1..=32i64 {
            let s = 2.0 / (PI * k as f64);
            let want2 = if k % 2 == 1 { s / (k as f64) * -1.0 } else { 0.0 };
            // (−2i/(πk)) / (ik) = −2/(πk²)
            assert!((k2.fourier_coeff(k).unwrap() - c(want2, 0.0)).norm() < 1e-12, "k = {k}");
            let want3 = if k % 2 == 1 { c(0.0, s / (k * k) as f64) } else { c(0.0, 0.0) };
            assert!((k3.fourier_coeff(k).unwrap() - want3).norm() < 1e-12, "k = {k}");
        }
        // triangular wave: continuous, piecewise linear, slope ±1
        let d = k2.piecewise().unwrap().derivative();
        assert!((d.eval(1.0) - 1.0).abs() < 1e-12 && (d.eval(4.0) + 1.0).abs() < 1e-12);
    }

    #[test]
    fn weyl_recovers_jump_from_primitive() {
        let prim = CorpusSpec::Krotov { beta: 2.0, of: Box::new(CorpusSpec::SignSin), cutoff: None }
            .build()
            .unwrap();
        let back = weyl_of_spec(&prim, 1.0, 32, 256).unwrap().spec;
        let s = CorpusSpec::SignSin.build().unwrap();
        for k in -32..=32i64 {
            if k == 0 {
                continue;
            }
            assert!((back.fourier_coeff(k).unwrap() - s.fourier_coeff(k).unwrap()).norm() < 1e-6);
        }
    }

    #[test]
    fn fractional_primitive_is_flagged_and_consistent() {
        let spec = CorpusSpec::Krotov { beta: 1.5, of: default_jump_box(), cutoff: Some(512) };
        let (f, flags) = spec.build_with_flags().unwrap();
        assert!(!flags.is_empty());
        let g = default_jumps().build().unwrap();
        for k in [1i64, -3, 7] {
            let want = g.fourier_coeff(k).unwrap() * crate::fractional::weyl_multiplier(k, -0.5);
            assert!((f.fourier_coeff(k).unwrap() - want).norm() < 1e-14);
        }
    }

    #[test]
    fn derivative_companions() {
        let f1 = CorpusSpec::FR { r: 1 }.derivative(1.0).unwrap();
        let s = CorpusSpec::SignSin.build().unwrap();
        for i in 0..30 {
            let x = 0.1 + 0.2 * i as f64;
            assert!((f1.eval(x) - s.eval(x)).norm() < 1e-12);
        }
        assert!(CorpusSpec::SignSin.derivative(1.0).is_err());
        assert!(CorpusSpec::FR { r: 2 }.derivative(2.0).is_err());
        let k = CorpusSpec::Krotov { beta: 3.0, of: default_jump_box(), cutoff: None };
        let d2 = k.derivative(2.0).unwrap();
        let g = default_jumps().build().unwrap();
        let mean = g.mean().re;
        for i in 0..30 {
            let x = 0.1 + 0.2 * i as f64;
            assert!((d2.eval(x).re - (g.eval(x).re - mean)).abs() < 1e-12);
        }
        let d1 = k.derivative(1.0).unwrap();
        let k2 = CorpusSpec::Krotov { beta: 2.0, of: default_jump_box(), cutoff: None }.build().unwrap();
        for kk in 1..10i64 {
            assert!((d1.fourier_coeff(kk).unwrap() - k2.fourier_coeff(kk).unwrap()).norm() < 1e-12);
        }
    }

    #[test]
    fn fourier_rules_match_analysis() {
        for spec in standard_corpus() {
            let f = spec.build().unwrap();
            let t = analyze(&sample(&f, 1 << 16).unwrap(), 8).unwrap();
            for k in -8..=8i64 {
                let want = f.fourier_coeff(k).unwrap();
                assert!((t.coeff(k) - want).norm() < 1e-3, "{} k = {k}", spec.kind());
            }
        }
    }

    #[test]
    fn exact_norms_match_grid_quadrature() {
        for spec in standard_corpus() {
            let f = spec.build().unwrap();
            for p in [0.5, 1.0, 2.0] {
                let exact = lp_norm(&f, p, &QuadratureSpec::default()).unwrap().value;
                let rule = QuadratureRule::midpoint(f.breakpoints(), 4096);
                let vals: Vec<Complex64> = rule.x.iter().map(|&x| f.eval(x)).collect();
                let grid = rule.lp(&vals, p);
                assert!((grid / exact - 1.0).abs() < 0.01, "{} p = {p}: {grid} vs {exact}", spec.kind());
            }
        }
    }

    #[test]
    fn jump_closed_form_modulus() {
        let spec = default_jumps();
        let v = spec.closed_form_modulus(1.0, 0.1, 0.5).unwrap();
        let want = ((1.0f64.sqrt() + 0.75f64.sqrt() + 0.25f64.sqrt()) * 0.1 / TAU).powi(2);
        assert!((v - want).abs() < 1e-15);
        assert!(spec.closed_form_modulus(1.0, 3.0, 0.5).is_none());
    }

    #[test]
    fn serde_schema() {
        let s: CorpusSpec = serde_json::from_str(r#"{"kind":"sign_sin"}"#).unwrap();
        assert_eq!(s, CorpusSpec::SignSin);
        let s: CorpusSpec = serde_json::from_str(r#"{"kind":"phi_nr","n":8,"r":1}"#).unwrap();
        assert_eq!(s, CorpusSpec::PhiNr { n: 8, r: 1 });
        let s: CorpusSpec = serde_json::from_str(r#"{"kind":"f_r","r":2}"#).unwrap();
        assert_eq!(s, CorpusSpec::FR { r: 2 });
        let s: CorpusSpec =
            serde_json::from_str(r#"{"kind":"frac_integral","alpha":0.5,"of":{"kind":"sign_sin"}}"#).unwrap();
        assert_eq!(s.kind(), "frac_integral");
        let s: CorpusSpec = serde_json::from_str(r#"{"kind":"krotov","beta":2}"#).unwrap();
        assert_eq!(s, CorpusSpec::Krotov { beta: 2.0, of: default_jump_box(), cutoff: None });
        let s: CorpusSpec = serde_json::from_str(r#"{"kind":"jump","jumps":[{"x":1.0,"d":0.5}]}"#).unwrap();
        assert_eq!(s.build().unwrap().eval(2.0).re, 0.5);
        let s: CorpusSpec = serde_json::from_str(r#"{"kind":"trig_poly","coeffs":[[0,0.5],[1,0],[0,-0.5]]}"#).unwrap();
        assert!((s.build().unwrap().eval(0.0).re - 1.0).abs() < 1e-15);
        let back: CorpusSpec = serde_json::from_str(&s.label()).unwrap();
        assert_eq!(back, s);
    }
}
