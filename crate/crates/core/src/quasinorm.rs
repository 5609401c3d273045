//! L_p quasi-norms on the torus for every `0 < p < ∞`.

use std::f64::consts::TAU;

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::error::{invalid, Error, Result};
use crate::periodic::{Exact, FunctionSpec, TrigPolynomial};
use crate::piecewise::tanh_sinh_est;

/// How the generic (structure-free) integrator treats a panel.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize, Default)]
#[serde(rename_all = "snake_case")]
pub enum PanelRule {
    /// Split each panel at sign changes of real integrands and apply
    /// tanh-sinh between them.
    #[default]
    Adaptive,
    /// Plain composite midpoint rule.
    Midpoint,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct QuadratureSpec {
    pub base_size: usize,
    pub split_at_breakpoints: bool,
    pub refinement_levels: usize,
    pub tol: f64,
    pub rule: PanelRule,
}

impl Default for QuadratureSpec {
    fn default() -> Self {
        QuadratureSpec {
            base_size: 4096,
            split_at_breakpoints: true,
            refinement_levels: 4,
            tol: 1e-7,
            rule: PanelRule::Adaptive,
        }
    }
}

impl QuadratureSpec {
    pub fn validate(&self) -> Result<()> {
        if self.base_size < 16 {
            return Err(invalid(format!(
                "quadrature base_size must be at least 16, got {}",
                self.base_size
            )));
        }
        if !(self.tol > 0.0) {
            return Err(invalid("quadrature tol must be positive"));
        }
        Ok(())
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct NormEstimate {
    pub value: f64,
    pub error_estimate: f64,
    pub converged: bool,
    /// True when a closed-form integrator produced the value.
    pub exact: bool,
}

impl NormEstimate {
    fn exact(value: f64) -> Self {
        NormEstimate {
            value,
            error_estimate: 0.0,
            converged: true,
            exact: true,
        }
    }
}

pub(crate) fn check_p(p: f64) -> Result<()> {
    if !(p > 0.0) || !p.is_finite() {
        return Err(Error::InvalidExponent(p));
    }
    Ok(())
}

/// `‖f‖_p = ((1/2π)∫|f|^p)^{1/p}`.
pub fn lp_norm(f: &FunctionSpec, p: f64, q: &QuadratureSpec) -> Result<NormEstimate> {
    check_p(p)?;
    q.validate()?;
    match f.exact() {
        Exact::Piecewise(pw) => return Ok(NormEstimate::exact(pw.lp_norm(p))),
        Exact::Polynomial(t) if p == 2.0 => {
            return Ok(NormEstimate::exact(t.l2_norm_sq().sqrt()));
        }
        Exact::Polynomial(t) if t.coeffs().iter().all(|c| c.norm() == 0.0) => {
            return Ok(NormEstimate::exact(0.0));
        }
        Exact::Polynomial(t) => {
            let est = polynomial_norm(t, p, q);
            if est.converged || q.rule == PanelRule::Midpoint {
                return Ok(est);
            }
            // zeros of T make |T|^p singular for p < 1; panels split there converge
            let g = f.clone().opaque();
            return adaptive_norm(&g, p, q, &[(0.0, TAU)]);
        }
        _ => {}
    }
    let segments = segments(f, q);
    match q.rule {
        PanelRule::Adaptive => adaptive_norm(f, p, q, &segments),
        PanelRule::Midpoint => midpoint_norm(f, p, q, &segments),
    }
}

/// `‖f − g‖_p`; the difference carries the union of both breakpoint lists.
pub fn lp_distance(
    f: &FunctionSpec,
    g: &FunctionSpec,
    p: f64,
    q: &QuadratureSpec,
) -> Result<NormEstimate> {
    lp_norm(&f.sub(g), p, q)
}

/// Integration intervals: the breakpoint partition (cyclic), or `[0, 2π]`.
fn segments(f: &FunctionSpec, q: &QuadratureSpec) -> Vec<(f64, f64)> {
    let bps = f.breakpoints();
    if !q.split_at_breakpoints || bps.is_empty() {
        return vec![(0.0, TAU)];
    }
    let mut out = Vec::with_capacity(bps.len());
    for (i, &b) in bps.iter().enumerate() {
        let next = if i + 1 < bps.len() {
            bps[i + 1]
        } else {
            bps[0] + TAU
        };
        if next > b {
            out.push((b, next));
        }
    }
    out
}

fn panel_counts(segments: &[(f64, f64)], total: usize) -> Vec<usize> {
    segments
        .iter()
        .map(|&(a, b)| (((b - a) / TAU * total as f64).round() as usize).max(1))
        .collect()
}

fn midpoint_pow_sum(f: &FunctionSpec, p: f64, segments: &[(f64, f64)], total: usize) -> f64 {
    let counts = panel_counts(segments, total);
    let mut acc = 0.0;
    for (&(a, b), &m) in segments.iter().zip(&counts) {
        let h = (b - a) / m as f64;
        let mut s = 0.0;
        for j in 0..m {
            s += f.eval(a + (j as f64 + 0.5) * h).norm().powf(p);
        }
        acc += s * h;
    }
    acc / TAU
}

fn finish(levels: &[f64], p: f64, tol: f64) -> NormEstimate {
    let last = *levels.last().unwrap();
    let value = last.max(0.0).powf(1.0 / p);
    let err = if levels.len() >= 2 {
        let prev = levels[levels.len() - 2].max(0.0).powf(1.0 / p);
        (value - prev).abs()
    } else {
        value
    };
    let err = err.max(1e-14 * value);
    NormEstimate {
        value,
        error_estimate: err,
        converged: err <= tol * value.max(1e-300) || value == 0.0,
        exact: false,
    }
}

fn midpoint_norm(
    f: &FunctionSpec,
    p: f64,
    q: &QuadratureSpec,
    segments: &[(f64, f64)],
) -> Result<NormEstimate> {
    let mut levels = Vec::new();
    let mut size = q.base_size;
    for _ in 0..=q.refinement_levels.max(1) {
        levels.push(midpoint_pow_sum(f, p, segments, size));
        let est = finish(&levels, p, q.tol);
        if levels.len() >= 2 && est.converged {
            return Ok(est);
        }
        size *= 2;
    }
    Ok(finish(&levels, p, q.tol))
}

/// `(1/2π)∫|f|^p` with panels split at sign changes of real integrands.
fn adaptive_pow_sum(f: &FunctionSpec, p: f64, segments: &[(f64, f64)], panels: usize) -> f64 {
    let counts = panel_counts(segments, panels);
    let real = f.is_real();
    let mut acc = 0.0;
    for (&(a, b), &m) in segments.iter().zip(&counts) {
        let h = (b - a) / m as f64;
        for j in 0..m {
            let lo = a + j as f64 * h;
            let hi = if j + 1 == m { b } else { lo + h };
            acc += panel_pow_integral(f, p, lo, hi, real);
        }
    }
    acc / TAU
}

fn panel_pow_integral(f: &FunctionSpec, p: f64, lo: f64, hi: f64, real: bool) -> f64 {
    let g = |x: f64| f.eval(x).norm().powf(p);
    if !real {
        return tanh_sinh_est(g, lo, hi, 6, 1e-13).0;
    }
    // interior sample points only; endpoint values may sit on a jump
    const K: usize = 8;
    let step = (hi - lo) / K as f64;
    let re = |x: f64| f.eval(x).re;
    let mut cuts = vec![lo];
    let mut x0 = lo + 0.5 * step;
    let mut f0 = re(x0);
    for i in 1..K {
        let x1 = lo + (i as f64 + 0.5) * step;
        let f1 = re(x1);
        if f0 * f1 < 0.0 {
            cuts.push(bisect(&re, x0, x1, f0));
        }
        x0 = x1;
        f0 = f1;
    }
    cuts.push(hi);
    cuts.windows(2)
        .map(|w| tanh_sinh_est(g, w[0], w[1], 6, 1e-13).0)
        .sum()
}

fn bisect(f: &impl Fn(f64) -> f64, mut lo: f64, mut hi: f64, mut flo: f64) -> f64 {
    for _ in 0..60 {
        let mid = 0.5 * (lo + hi);
        if mid <= lo || mid >= hi {
            break;
        }
        let fm = f(mid);
        if fm == 0.0 {
            return mid;
        }
        if (fm < 0.0) == (flo < 0.0) {
            lo = mid;
            flo = fm;
        } else {
            hi = mid;
        }
    }
    0.5 * (lo + hi)
}

fn adaptive_norm(
    f: &FunctionSpec,
    p: f64,
    q: &QuadratureSpec,
    segments: &[(f64, f64)],
) -> Result<NormEstimate> {
    // one tanh-sinh panel replaces roughly 64 midpoint panels
    let mut panels = (q.base_size / 64)
        .max(segments.len())
        .max(4)
        .max(4 * (f.resolution() + 1));
    let mut levels = Vec::new();
    for _ in 0..=q.refinement_levels.max(1) {
        levels.push(adaptive_pow_sum(f, p, segments, panels));
        let est = finish(&levels, p, q.tol);
        if levels.len() >= 2 && est.converged {
            return Ok(est);
        }
        panels *= 2;
    }
    Ok(finish(&levels, p, q.tol))
}

/// Midpoint rule on FFT-synthesized samples, doubled until stable.
fn polynomial_norm(t: &TrigPolynomial, p: f64, q: &QuadratureSpec) -> NormEstimate {
    let n = t.effective_degree(0.0);
    let mut size = q.base_size.max(16 * (2 * n + 1)).next_power_of_two();
    let mut levels = Vec::new();
    for _ in 0..=q.refinement_levels.max(1) {
        let vals = t.sample_uniform(size, 0.5);
        let s: f64 = vals.iter().map(|v| v.norm().powf(p)).sum::<f64>() / size as f64;
        levels.push(s);
        let est = finish(&levels, p, q.tol);
        if levels.len() >= 2 && est.converged {
            return est;
        }
        size *= 2;
    }
    finish(&levels, p, q.tol)
}

/// Normalized quadrature rule (weights sum to 1) on the torus.
#[derive(Clone, Debug, PartialEq)]
pub struct QuadratureRule {
    pub x: Vec<f64>,
    pub w: Vec<f64>,
}

impl QuadratureRule {
    /// Composite midpoint rule with about `size` nodes, panels aligned with
    /// `breakpoints` so no node sits on a jump.
    pub fn midpoint(breakpoints: &[f64], size: usize) -> QuadratureRule {
        let spec = QuadratureSpec::default();
        let f = FunctionSpec::constant(0.0).opaque().with_breakpoints(breakpoints.to_vec());
        let segs = segments(&f, &spec);
        let counts = panel_counts(&segs, size);
        let mut x = Vec::new();
        let mut w = Vec::new();
        for (&(a, b), &m) in segs.iter().zip(&counts) {
            let h = (b - a) / m as f64;
            for j in 0..m {
                x.push(a + (j as f64 + 0.5) * h);
                w.push(h / TAU);
            }
        }
        QuadratureRule { x, w }
    }

    pub fn len(&self) -> usize {
        self.x.len()
    }

    pub fn is_empty(&self) -> bool {
        self.x.is_empty()
    }

    /// `(Σ w_j |v_j|^p)^{1/p}` for values at the nodes.
    pub fn lp(&self, values: &[Complex64], p: f64) -> f64 {
        self.w
            .iter()
            .zip(values)
            .map(|(w, v)| w * v.norm().powf(p))
            .sum::<f64>()
            .powf(1.0 / p)
    }
}

/// Max of `|f|` over a uniform midpoint grid; a diagnostic, not an L_∞ norm.
pub fn sup_on_grid(f: &FunctionSpec, size: usize) -> f64 {
    f.sample_uniform(size, 0.5)
        .iter()
        .map(|v| v.norm())
        .fold(0.0, f64::max)
}
