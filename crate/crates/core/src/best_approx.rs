//! Best trigonometric approximation in L_p for `0 < p < ∞`.
//!
//! The solver minimizes the smoothed objective `Σ_j w_j (|r_j|² + ε²)^{p/2}`
//! on a uniform midpoint grid by iteratively reweighted least squares. Each
//! step is a Hermitian Toeplitz system assembled with FFTs.

use std::f64::consts::PI;

use nalgebra::{DMatrix, DVector};
use num_complex::Complex64;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, StandardNormal};
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{invalid, Result};
use crate::fractional::{weyl, weyl_multiplier};
use crate::periodic::{fft_forward, fft_inverse, FunctionSpec, TrigPolynomial};
use crate::quasinorm::{check_p, lp_distance, lp_norm, QuadratureSpec};
use crate::smoothness::ETable;

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct SolverOptions {
    /// Number of initializations, counting the partial sum and the
    /// de la Vallée Poussin mean.
    pub restarts: usize,
    /// Smoothing schedule; relative to the sup of `|f|` when `None`.
    pub eps_schedule: Option<Vec<f64>>,
    pub max_iters: usize,
    pub step_tol: f64,
    pub seed: u64,
    /// Solver grid size; defaults to `max(2048, 32(2n+1))` rounded up to a power of two.
    pub grid: Option<usize>,
}

impl Default for SolverOptions {
    fn default() -> Self {
        SolverOptions {
            restarts: 8,
            eps_schedule: None,
            max_iters: 50,
            step_tol: 1e-10,
            seed: 0,
            grid: None,
        }
    }
}

impl SolverOptions {
    pub fn validate(&self) -> Result<()> {
        if self.restarts == 0 {
            return Err(invalid("restarts must be positive"));
        }
        if let Some(s) = &self.eps_schedule {
            if s.is_empty() || s.iter().any(|&e| !(e > 0.0)) || s.windows(2).any(|w| w[1] >= w[0]) {
                return Err(invalid("eps_schedule must be strictly decreasing and positive"));
            }
        }
        if self.max_iters == 0 {
            return Err(invalid("max_iters must be positive"));
        }
        Ok(())
    }

    fn schedule(&self, scale: f64) -> Vec<f64> {
        match &self.eps_schedule {
            Some(s) => s.clone(),
            None => {
                let mut out = Vec::new();
                let mut e = 0.1 * scale;
                let floor = 1e-8 * scale;
                while e > floor * 1.000001 {
                    out.push(e);
                    e *= 0.1;
                }
                out.push(floor);
                out
            }
        }
    }

    fn grid_for(&self, degree: usize) -> usize {
        self.grid
            .unwrap_or_else(|| (32 * (2 * degree + 1)).max(2048))
            .max(4 * (2 * degree + 1))
            .next_power_of_two()
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum SolverStatus {
    Converged,
    IterationCap,
    Stagnated,
}

impl SolverStatus {
    pub fn as_str(&self) -> &'static str {
        match self {
            SolverStatus::Converged => "converged",
            SolverStatus::IterationCap => "iteration-cap",
            SolverStatus::Stagnated => "stagnated",
        }
    }
}

#[derive(Clone, Debug)]
pub struct BestApproxResult {
    pub value: f64,
    pub polynomial: TrigPolynomial,
    pub status: SolverStatus,
    /// Smoothed objective at the end of each ε stage, for the winning start.
    pub trace: Vec<f64>,
    /// Index of the winning initialization (0 = partial sum, 1 = mean,
    /// 2 = warm start when given, then random).
    pub restart: usize,
    /// True when the quadrature of the final distance did not converge.
    pub quadrature_flag: bool,
}

/// Samples of `f` and its coefficient data on the solver grid.
pub(crate) struct Grid {
    pub size: usize,
    pub values: Vec<Complex64>,
    pub real: bool,
    pub scale: f64,
}

impl Grid {
    pub fn new(f: &FunctionSpec, size: usize) -> Grid {
        let values = f.sample_uniform(size, 0.5);
        let scale = values.iter().map(|v| v.norm()).fold(0.0, f64::max);
        Grid {
            size,
            values,
            real: f.is_real(),
            scale,
        }
    }

    /// `(1/N) Σ_j v_j e^{−ikx_j}` for `|k| ≤ n` at midpoint nodes.
    fn analyze(&self, v: &[Complex64], degree: usize) -> TrigPolynomial {
        let mut buf = v.to_vec();
        fft_forward(&mut buf);
        let n = self.size;
        TrigPolynomial::from_fn(degree, |k| {
            buf[k.rem_euclid(n as i64) as usize] * Complex64::cis(-PI * k as f64 / n as f64)
                / n as f64
        })
    }
}

/// Penalty `λ Σ_j w_j |T^{(α)}(x_j)|^p` added to the objective.
#[derive(Clone, Copy, Debug)]
pub(crate) struct Penalty {
    pub alpha: f64,
    pub lambda: f64,
}

struct Solve {
    poly: TrigPolynomial,
    status: SolverStatus,
    trace: Vec<f64>,
}

fn smoothed(r: &[Complex64], p: f64, eps: f64) -> f64 {
    let e2 = eps * eps;
    r.iter().map(|v| (v.norm_sqr() + e2).powf(0.5 * p)).sum::<f64>() / r.len() as f64
}

fn residual(grid: &Grid, t: &TrigPolynomial) -> Vec<Complex64> {
    let tv = t.sample_uniform(grid.size, 0.5);
    grid.values.iter().zip(tv).map(|(f, t)| f - t).collect()
}

fn objective(
    grid: &Grid,
    t: &TrigPolynomial,
    p: f64,
    eps: f64,
    pen: Option<Penalty>,
) -> (f64, Vec<Complex64>, Option<Vec<Complex64>>) {
    let r = residual(grid, t);
    let mut obj = smoothed(&r, p, eps);
    let mut d = None;
    if let Some(pen) = pen {
        let dv = weyl(t, pen.alpha).sample_uniform(grid.size, 0.5);
        obj += pen.lambda * smoothed(&dv, p, eps);
        d = Some(dv);
    }
    (obj, r, d)
}

/// `m_d = (1/N) Σ_j u_j e^{idx_j}` for `d = 0..=2n`.
fn moments(u: &[f64], degree: usize) -> Vec<Complex64> {
    let n = u.len();
    let mut buf: Vec<Complex64> = u.iter().map(|&w| Complex64::new(w, 0.0)).collect();
    fft_inverse(&mut buf);
    (0..=2 * degree)
        .map(|d| buf[d % n] * Complex64::cis(PI * d as f64 / n as f64) / n as f64)
        .collect()
}

fn toeplitz(m: &[Complex64], degree: usize) -> DMatrix<Complex64> {
    let dim = 2 * degree + 1;
    DMatrix::from_fn(dim, dim, |a, b| {
        // entry (k, l) = (1/N) Σ u e^{i(l−k)x}
        if b >= a {
            m[b - a]
        } else {
            m[a - b].conj()
        }
    })
}

fn solve_hermitian(mut a: DMatrix<Complex64>, rhs: DVector<Complex64>) -> Option<DVector<Complex64>> {
    let dim = a.nrows();
    let tr: f64 = (0..dim).map(|i| a[(i, i)].re).sum::<f64>() / dim as f64;
    for i in 0..dim {
        a[(i, i)] += Complex64::new(1e-13 * tr, 0.0);
    }
    if let Some(ch) = a.clone().cholesky() {
        return Some(ch.solve(&rhs));
    }
    a.lu().solve(&rhs)
}

/// One weighted least-squares step from the current residuals.
fn wls_step(
    grid: &Grid,
    degree: usize,
    p: f64,
    eps: f64,
    r: &[Complex64],
    t: &TrigPolynomial,
    pen: Option<Penalty>,
    d: Option<&[Complex64]>,
) -> Option<TrigPolynomial> {
    let e2 = eps * eps;
    let ex = 0.5 * p - 1.0;
    let u: Vec<f64> = r.iter().map(|v| (v.norm_sqr() + e2).powf(ex)).collect();
    let m = moments(&u, degree);
    let mut a = toeplitz(&m, degree);
    // data values f_j = r_j + T(x_j)
    let tv = t.sample_uniform(grid.size, 0.5);
    let uf: Vec<Complex64> = r
        .iter()
        .zip(&tv)
        .zip(&u)
        .map(|((r, t), &w)| (r + t) * w)
        .collect();
    let b = grid.analyze(&uf, degree);
    if let (Some(pen), Some(dv)) = (pen, d) {
        let u2: Vec<f64> = dv.iter().map(|v| (v.norm_sqr() + e2).powf(ex)).collect();
        let m2 = moments(&u2, degree);
        let a2 = toeplitz(&m2, degree);
        let n = degree as i64;
        let mult: Vec<Complex64> = (-n..=n).map(|k| weyl_multiplier(k, pen.alpha)).collect();
        let dim = 2 * degree + 1;
        for i in 0..dim {
            for j in 0..dim {
                a[(i, j)] += pen.lambda * mult[i].conj() * a2[(i, j)] * mult[j];
            }
        }
    }
    let rhs = DVector::from_vec(b.coeffs().to_vec());
    let sol = solve_hermitian(a, rhs)?;
    let out = TrigPolynomial::new(sol.iter().copied().collect()).ok()?;
    Some(if grid.real { out.symmetrized() } else { out })
}

fn irls(
    grid: &Grid,
    init: &TrigPolynomial,
    p: f64,
    schedule: &[f64],
    opts: &SolverOptions,
    pen: Option<Penalty>,
) -> Solve {
    let degree = init.degree();
    let mut t = init.clone();
    let mut trace = Vec::with_capacity(schedule.len());
    let mut status = SolverStatus::Converged;
    for &eps in schedule {
        let (mut obj, mut r, mut d) = objective(grid, &t, p, eps, pen);
        status = SolverStatus::IterationCap;
        for _ in 0..opts.max_iters {
            let Some(cand) = wls_step(grid, degree, p, eps, &r, &t, pen, d.as_deref()) else {
                status = SolverStatus::Stagnated;
                break;
            };
            // monotone safeguard: halve the step until the objective does not increase
            let mut step = 1.0;
            let mut accepted = None;
            for _ in 0..30 {
                let trial = if step == 1.0 {
                    cand.clone()
                } else {
                    t.add(&cand.sub(&t).scale(Complex64::new(step, 0.0)))
                };
                let (o, r2, d2) = objective(grid, &trial, p, eps, pen);
                if o <= obj * (1.0 + 1e-12) {
                    accepted = Some((trial, o, r2, d2));
                    break;
                }
                step *= 0.5;
            }
            let Some((trial, o, r2, d2)) = accepted else {
                status = SolverStatus::Stagnated;
                break;
            };
            let gain = (obj - o) / obj.max(1e-300);
            t = trial;
            obj = o;
            r = r2;
            d = d2;
            if gain <= opts.step_tol {
                status = SolverStatus::Converged;
                break;
            }
        }
        trace.push(obj);
    }
    Solve {
        poly: t,
        status,
        trace,
    }
}

/// De la Vallée Poussin style mean: full weight up to `⌈n/2⌉`, linear taper to `n + 1`.
pub fn vallee_poussin(coeff: impl Fn(i64) -> Complex64, degree: usize) -> TrigPolynomial {
    let m = degree.div_ceil(2) as i64;
    let n = degree as i64;
    TrigPolynomial::from_fn(degree, |k| {
        let a = k.abs();
        let w = if a <= m {
            1.0
        } else {
            (n + 1 - a) as f64 / (n + 1 - m) as f64
        };
        coeff(k) * w
    })
}

fn coefficient_source(f: &FunctionSpec, grid: &Grid, degree: usize) -> TrigPolynomial {
    match f.fourier() {
        Some(rule) => TrigPolynomial::from_fn(degree, |k| rule(k)),
        None => grid.analyze(&grid.values, degree),
    }
}

fn perturb(t: &TrigPolynomial, scale: f64, real: bool, seed: u64, index: usize) -> TrigPolynomial {
    let mut rng = ChaCha8Rng::seed_from_u64(seed ^ (0x9E37_79B9_7F4A_7C15u64.wrapping_mul(index as u64 + 1)));
    let n = t.degree() as i64;
    let mut out = t.clone();
    for k in -n..=n {
        let g1: f64 = StandardNormal.sample(&mut rng);
        let g2: f64 = StandardNormal.sample(&mut rng);
        let amp = 0.5 * t.coeff(k).norm() + 0.05 * scale / (1.0 + k.abs() as f64);
        out.set_coeff(k, t.coeff(k) + Complex64::new(g1, g2) * amp);
    }
    if real {
        out.symmetrized()
    } else {
        out
    }
}

/// Initial candidates in a fixed order.
fn initializations(
    f: &FunctionSpec,
    grid: &Grid,
    degree: usize,
    opts: &SolverOptions,
    warm: Option<&TrigPolynomial>,
) -> Vec<TrigPolynomial> {
    let s = coefficient_source(f, grid, degree);
    let v = vallee_poussin(|k| s.coeff(k), degree);
    let mut out = vec![s.clone(), v.clone()];
    if let Some(w) = warm {
        out.push(w.resized(degree));
    }
    let base = out.len();
    let mut i = 0;
    while out.len() < opts.restarts.max(base) {
        let src = if i % 2 == 0 { &s } else { &v };
        out.push(perturb(src, grid.scale, grid.real, opts.seed, i));
        i += 1;
    }
    if opts.restarts < base {
        out.truncate(opts.restarts.max(1));
    }
    out
}

/// Upper bound on `E_n(f)_p` and the polynomial attaining it.
pub fn best_approx(
    f: &FunctionSpec,
    degree: usize,
    p: f64,
    opts: &SolverOptions,
    q: &QuadratureSpec,
) -> Result<BestApproxResult> {
    best_approx_warm(f, degree, p, opts, q, None)
}

pub fn best_approx_warm(
    f: &FunctionSpec,
    degree: usize,
    p: f64,
    opts: &SolverOptions,
    q: &QuadratureSpec,
    warm: Option<&TrigPolynomial>,
) -> Result<BestApproxResult> {
    check_p(p)?;
    opts.validate()?;
    q.validate()?;
    if let Some(t) = f.polynomial() {
        if t.effective_degree(0.0) <= degree {
            return Ok(BestApproxResult {
                value: 0.0,
                polynomial: t.resized(degree),
                status: SolverStatus::Converged,
                trace: Vec::new(),
                restart: 0,
                quadrature_flag: false,
            });
        }
    }
    let grid = Grid::new(f, opts.grid_for(degree));
    if grid.scale == 0.0 {
        return Ok(BestApproxResult {
            value: 0.0,
            polynomial: TrigPolynomial::zero(degree),
            status: SolverStatus::Converged,
            trace: Vec::new(),
            restart: 0,
            quadrature_flag: false,
        });
    }
    let schedule = opts.schedule(grid.scale);
    let inits = initializations(f, &grid, degree, opts, warm);
    let mut runs: Vec<(f64, usize, Solve)> = inits
        .par_iter()
        .enumerate()
        .map(|(i, init)| {
            let s = irls(&grid, init, p, &schedule, opts, None);
            let disc = smoothed(&residual(&grid, &s.poly), p, 0.0);
            (disc, i, s)
        })
        .collect();
    runs.sort_by(|a, b| a.0.total_cmp(&b.0).then(a.1.cmp(&b.1)));
    // ties within 1e-10 go to the lowest restart index
    let best_disc = runs[0].0;
    let pick = runs
        .iter()
        .filter(|r| r.0 <= best_disc * (1.0 + 1e-10) + 1e-300)
        .min_by_key(|r| r.1)
        .unwrap();
    let (_, idx, solve) = pick;
    let cand = FunctionSpec::from_polynomial("T", solve.poly.clone());
    let d = lp_distance(f, &cand, p, q)?;
    // the partial sum is always admissible
    let s = &inits[0];
    let ds = lp_distance(f, &FunctionSpec::from_polynomial("S", s.clone()), p, q)?;
    if ds.value < d.value {
        return Ok(BestApproxResult {
            value: ds.value,
            polynomial: s.clone(),
            status: solve.status,
            trace: solve.trace.clone(),
            restart: 0,
            quadrature_flag: !ds.converged,
        });
    }
    Ok(BestApproxResult {
        value: d.value,
        polynomial: solve.poly.clone(),
        status: solve.status,
        trace: solve.trace.clone(),
        restart: *idx,
        quadrature_flag: !d.converged,
    })
}

/// `E_0..E_{n_max}` with warm starts and running minima.
pub fn best_approx_table(
    f: &FunctionSpec,
    n_max: usize,
    p: f64,
    opts: &SolverOptions,
    q: &QuadratureSpec,
) -> Result<(ETable, Vec<BestApproxResult>)> {
    let mut values = Vec::with_capacity(n_max + 1);
    let mut results: Vec<BestApproxResult> = Vec::with_capacity(n_max + 1);
    let mut warm: Option<TrigPolynomial> = None;
    for n in 0..=n_max {
        let r = best_approx_warm(f, n, p, opts, q, warm.as_ref())?;
        let mut v = r.value;
        if let Some(&prev) = values.last() {
            if v > prev {
                v = prev;
            }
        }
        values.push(v);
        warm = Some(r.polynomial.clone());
        results.push(r);
    }
    Ok((ETable::new(values)?, results))
}

/// `‖f^{(α)} − T^{(α)}‖_p` with `f^{(α)}` supplied exactly.
pub fn simultaneous_deriv_error(
    f_alpha: &FunctionSpec,
    t: &TrigPolynomial,
    alpha: f64,
    p: f64,
    q: &QuadratureSpec,
) -> Result<f64> {
    let d = FunctionSpec::from_polynomial("T^(a)", weyl(t, alpha));
    Ok(lp_distance(f_alpha, &d, p, q)?.value)
}

#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct BernsteinResult {
    pub value: f64,
    /// Which candidate attained the maximum.
    pub argmax: String,
}

/// L_p quasi-norm of a polynomial on an FFT grid of `32(2n+1)` points.
fn grid_norm(t: &TrigPolynomial, p: f64, size: usize) -> f64 {
    let v = t.sample_uniform(size, 0.5);
    (v.iter().map(|z| z.norm().powf(p)).sum::<f64>() / size as f64).powf(1.0 / p)
}

/// Lower bound on `sup_{T∈T_n} ‖T^{(α)}‖_p / ‖T‖_p` from a candidate set.
pub fn bernstein_sup(degree: usize, alpha: f64, p: f64, search: &SolverOptions) -> Result<BernsteinResult> {
    check_p(p)?;
    if degree == 0 {
        return Err(invalid("Bernstein search needs n ≥ 1"));
    }
    let n = degree as i64;
    let size = (32 * (2 * degree + 1)).next_power_of_two();
    let ratio = |t: &TrigPolynomial| {
        let den = grid_norm(t, p, size);
        if den == 0.0 {
            0.0
        } else {
            grid_norm(&weyl(t, alpha), p, size) / den
        }
    };
    let one = Complex64::new(1.0, 0.0);
    let mut cands: Vec<(String, TrigPolynomial)> = vec![
        ("exp".into(), TrigPolynomial::from_fn(degree, |k| if k == n { one } else { Complex64::new(0.0, 0.0) })),
        ("dirichlet".into(), TrigPolynomial::from_fn(degree, |_| one)),
        ("fejer".into(), TrigPolynomial::from_fn(degree, |k| one * (1.0 - k.abs() as f64 / (n + 1) as f64))),
        // Dirichlet kernel shifted to frequencies 0..n, no symmetric cancellation
        ("one-sided".into(), TrigPolynomial::from_fn(degree, |k| if k >= 0 { one } else { Complex64::new(0.0, 0.0) })),
    ];
    let mut rng = ChaCha8Rng::seed_from_u64(search.seed);
    for i in 0..search.restarts {
        let t = TrigPolynomial::from_fn(degree, |_| {
            let a: f64 = StandardNormal.sample(&mut rng);
            let b: f64 = StandardNormal.sample(&mut rng);
            Complex64::new(a, b)
        });
        cands.push((format!("random{i}"), t));
    }
    let mut best = (f64::NEG_INFINITY, String::new());
    for (name, t) in cands {
        let (v, _) = coordinate_ascent(t, &ratio, search.max_iters.min(8));
        if v > best.0 {
            best = (v, name);
        }
    }
    Ok(BernsteinResult {
        value: best.0,
        argmax: best.1,
    })
}

/// Greedy coordinate ascent over coefficient magnitudes.
fn coordinate_ascent(
    mut t: TrigPolynomial,
    ratio: &impl Fn(&TrigPolynomial) -> f64,
    sweeps: usize,
) -> (f64, TrigPolynomial) {
    let mut best = ratio(&t);
    let n = t.degree() as i64;
    for _ in 0..sweeps {
        let mut improved = false;
        for k in -n..=n {
            for factor in [0.0, 0.5, 2.0] {
                let old = t.coeff(k);
                let new = if old.norm() == 0.0 && factor != 0.0 {
                    Complex64::new(0.1 * factor, 0.0)
                } else {
                    old * factor
                };
                t.set_coeff(k, new);
                let v = ratio(&t);
                if v > best * (1.0 + 1e-12) {
                    best = v;
                    improved = true;
                } else {
                    t.set_coeff(k, old);
                }
            }
        }
        if !improved {
            break;
        }
    }
    (best, t)
}

/// Penalized minimization for the realization functional. Returns the
/// polynomial and the two parts `(‖f − T‖_p, δ^α ‖T^{(α)}‖_p)`.
pub(crate) fn realization_search(
    f: &FunctionSpec,
    alpha: f64,
    delta: f64,
    p: f64,
    opts: &SolverOptions,
    q: &QuadratureSpec,
) -> Result<(TrigPolynomial, f64, f64, SolverStatus)> {
    let degree = (1.0 / delta).floor() as usize;
    let grid = Grid::new(f, opts.grid_for(degree));
    let da = delta.powf(alpha);
    let eval = |t: &TrigPolynomial| -> Result<(f64, f64)> {
        let dist = lp_distance(f, &FunctionSpec::from_polynomial("T", t.clone()), p, q)?.value;
        let der = lp_norm(&FunctionSpec::from_polynomial("T", weyl(t, alpha)), p, q)?.value;
        Ok((dist, da * der))
    };
    let mean = f.mean();
    let mut cands: Vec<(TrigPolynomial, SolverStatus)> = vec![(
        TrigPolynomial::from_fn(degree, |k| if k == 0 { mean } else { Complex64::new(0.0, 0.0) }),
        SolverStatus::Converged,
    )];
    if grid.scale > 0.0 {
        let schedule = opts.schedule(grid.scale);
        let s = coefficient_source(f, &grid, degree);
        cands.push((s.clone(), SolverStatus::Converged));
        // the p-th power penalty weight ties the two sums; a small sweep of λ
        // around δ^{αp} covers the scalarizations of the sum of quasi-norms
        let base = da.powf(p);
        let lambdas: Vec<f64> = [-2.0, -1.0, 0.0, 1.0, 2.0].iter().map(|e| base * 4f64.powf(*e)).collect();
        let solved: Vec<Solve> = lambdas
            .par_iter()
            .map(|&lambda| irls(&grid, &s, p, &schedule, opts, Some(Penalty { alpha, lambda })))
            .collect();
        for s in solved {
            cands.push((s.poly, s.status));
        }
    }
    let mut best: Option<(f64, TrigPolynomial, f64, f64, SolverStatus)> = None;
    for (t, st) in cands {
        let (a, b) = eval(&t)?;
        let v = a + b;
        if best.as_ref().map_or(true, |bst| v < bst.0) {
            best = Some((v, t, a, b, st));
        }
    }
    let (_, t, a, b, st) = best.unwrap();
    Ok((t, a, b, st))
}

/// `(1/2π)∫ |f − c|^p` minimized over a uniform grid of constants, a
/// brute-force check for `n = 0`.
pub fn constant_grid_search(f: &FunctionSpec, p: f64, lo: f64, hi: f64, points: usize, q: &QuadratureSpec) -> Result<(f64, f64)> {
    let mut best = (f64::INFINITY, lo);
    for i in 0..points {
        let c = lo + (hi - lo) * i as f64 / (points - 1).max(1) as f64;
        let d = lp_distance(f, &FunctionSpec::constant(c), p, q)?.value;
        if d < best.0 {
            best = (d, c);
        }
    }
    Ok(best)
}
