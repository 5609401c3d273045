//! 2π-periodic functions, trigonometric polynomials, sampling and discrete
//! Fourier analysis.

use std::cell::RefCell;
use std::f64::consts::TAU;
use std::fmt;
use std::sync::Arc;

use num_complex::Complex64;
use rustfft::FftPlanner;

use crate::error::{Error, Result};
use crate::piecewise::Piecewise;

pub type Evaluator = Arc<dyn Fn(f64) -> Complex64 + Send + Sync>;
pub type FourierRule = Arc<dyn Fn(i64) -> Complex64 + Send + Sync>;

thread_local! {
    static PLANNER: RefCell<FftPlanner<f64>> = RefCell::new(FftPlanner::new());
}

/// In-place forward DFT, `X_s = Σ_j x_j e^{-2πi js/N}` (unnormalized).
pub(crate) fn fft_forward(buf: &mut [Complex64]) {
    PLANNER.with(|p| p.borrow_mut().plan_fft_forward(buf.len()).process(buf));
}

/// In-place inverse DFT, `x_j = Σ_s X_s e^{2πi js/N}` (unnormalized).
pub(crate) fn fft_inverse(buf: &mut [Complex64]) {
    PLANNER.with(|p| p.borrow_mut().plan_fft_inverse(buf.len()).process(buf));
}

/// Reduces an angle to `[0, 2π)`.
pub fn wrap_angle(x: f64) -> f64 {
    let t = x.rem_euclid(TAU);
    if t >= TAU {
        0.0
    } else {
        t
    }
}

/// A trigonometric polynomial `Σ_{|k|≤n} c_k e^{ikx}`.
#[derive(Clone, Debug, PartialEq)]
pub struct TrigPolynomial {
    degree: usize,
    coeffs: Vec<Complex64>,
}

impl TrigPolynomial {
    /// Builds a polynomial from coefficients ordered `c_{-n}, …, c_n`.
    pub fn new(coeffs: Vec<Complex64>) -> Result<Self> {
        if coeffs.len() % 2 == 0 {
            return Err(crate::error::invalid(format!(
                "coefficient vector must have odd length 2n+1, got {}",
                coeffs.len()
            )));
        }
        Ok(TrigPolynomial {
            degree: (coeffs.len() - 1) / 2,
            coeffs,
        })
    }

    pub fn zero(degree: usize) -> Self {
        TrigPolynomial {
            degree,
            coeffs: vec![Complex64::new(0.0, 0.0); 2 * degree + 1],
        }
    }

    pub fn from_fn(degree: usize, mut f: impl FnMut(i64) -> Complex64) -> Self {
        let n = degree as i64;
        TrigPolynomial {
            degree,
            coeffs: (-n..=n).map(&mut f).collect(),
        }
    }

    pub fn degree(&self) -> usize {
        self.degree
    }

    /// Coefficients ordered `c_{-n}, …, c_n`.
    pub fn coeffs(&self) -> &[Complex64] {
        &self.coeffs
    }

    pub fn coeffs_mut(&mut self) -> &mut [Complex64] {
        &mut self.coeffs
    }

    pub fn coeff(&self, k: i64) -> Complex64 {
        let n = self.degree as i64;
        if k.abs() > n {
            Complex64::new(0.0, 0.0)
        } else {
            self.coeffs[(k + n) as usize]
        }
    }

    pub fn set_coeff(&mut self, k: i64, c: Complex64) {
        let n = self.degree as i64;
        assert!(k.abs() <= n, "frequency {k} outside degree {n}");
        self.coeffs[(k + n) as usize] = c;
    }

    pub fn eval(&self, x: f64) -> Complex64 {
        let n = self.degree as i64;
        let z = Complex64::cis(x);
        let zi = z.conj();
        let mut acc = self.coeff(0);
        let mut zp = z;
        let mut zm = zi;
        for k in 1..=n {
            acc += self.coeff(k) * zp + self.coeff(-k) * zm;
            if k % 64 == 0 {
                zp = Complex64::cis(x * (k + 1) as f64);
                zm = zp.conj();
            } else {
                zp *= z;
                zm *= zi;
            }
        }
        acc
    }

    /// Same polynomial viewed in `T_m`, `m ≥ n` padded with zeros, `m < n` truncated.
    pub fn resized(&self, m: usize) -> TrigPolynomial {
        TrigPolynomial::from_fn(m, |k| self.coeff(k))
    }

    pub fn map_coeffs(&self, mut f: impl FnMut(i64, Complex64) -> Complex64) -> TrigPolynomial {
        TrigPolynomial::from_fn(self.degree, |k| f(k, self.coeff(k)))
    }

    pub fn scale(&self, c: Complex64) -> TrigPolynomial {
        self.map_coeffs(|_, a| a * c)
    }

    pub fn add(&self, other: &TrigPolynomial) -> TrigPolynomial {
        let m = self.degree.max(other.degree);
        TrigPolynomial::from_fn(m, |k| self.coeff(k) + other.coeff(k))
    }

    pub fn sub(&self, other: &TrigPolynomial) -> TrigPolynomial {
        let m = self.degree.max(other.degree);
        TrigPolynomial::from_fn(m, |k| self.coeff(k) - other.coeff(k))
    }

    /// Smallest degree carrying a coefficient above `tol` in modulus.
    pub fn effective_degree(&self, tol: f64) -> usize {
        let n = self.degree as i64;
        (0..=n)
            .rev()
            .find(|&k| self.coeff(k).norm() > tol || self.coeff(-k).norm() > tol)
            .unwrap_or(0) as usize
    }

    /// True when `c_{-k} = conj(c_k)` within `tol`, i.e. the polynomial is real-valued.
    pub fn is_real(&self, tol: f64) -> bool {
        let n = self.degree as i64;
        (0..=n).all(|k| (self.coeff(-k) - self.coeff(k).conj()).norm() <= tol)
    }

    /// Replaces the coefficients by their conjugate-symmetric part.
    pub fn symmetrized(&self) -> TrigPolynomial {
        self.map_coeffs(|k, c| (c + self.coeff(-k).conj()) * 0.5)
    }

    /// `Σ |c_k|²`, equal to `‖T‖_2²` by Parseval.
    pub fn l2_norm_sq(&self) -> f64 {
        self.coeffs.iter().map(|c| c.norm_sqr()).sum()
    }

    /// Values at `x_j = 2π (j + offset) / N`, computed with one inverse FFT.
    /// Coefficients above the Nyquist band are folded, so the samples are exact.
    pub fn sample_uniform(&self, size: usize, offset: f64) -> Vec<Complex64> {
        let mut buf = vec![Complex64::new(0.0, 0.0); size];
        let n = self.degree as i64;
        let step = TAU / size as f64;
        for k in -n..=n {
            let bin = k.rem_euclid(size as i64) as usize;
            let phase = if offset == 0.0 {
                Complex64::new(1.0, 0.0)
            } else {
                Complex64::cis(k as f64 * offset * step)
            };
            buf[bin] += self.coeff(k) * phase;
        }
        fft_inverse(&mut buf);
        buf
    }
}

/// Exact structure attached to a [`FunctionSpec`], used by integrators and
/// difference operators in place of sampling.
#[derive(Clone)]
pub enum Exact {
    None,
    Piecewise(Arc<Piecewise>),
    Polynomial(Arc<TrigPolynomial>),
}

/// A 2π-periodic function: a pointwise evaluator, an optional exact Fourier
/// rule, and the angles where it may jump.
#[derive(Clone)]
pub struct FunctionSpec {
    label: String,
    evaluator: Evaluator,
    fourier: Option<FourierRule>,
    breakpoints: Vec<f64>,
    exact: Exact,
    real: bool,
    /// Highest trigonometric frequency known to be present in a smooth
    /// component; sizes quadrature panels.
    resolution: usize,
}

impl fmt::Debug for FunctionSpec {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("FunctionSpec")
            .field("label", &self.label)
            .field("breakpoints", &self.breakpoints.len())
            .field("fourier", &self.fourier.is_some())
            .field("real", &self.real)
            .finish()
    }
}

impl FunctionSpec {
    pub fn new(label: impl Into<String>, evaluator: Evaluator) -> Self {
        FunctionSpec {
            label: label.into(),
            evaluator,
            fourier: None,
            breakpoints: Vec::new(),
            exact: Exact::None,
            real: false,
            resolution: 0,
        }
    }

    pub fn from_fn(
        label: impl Into<String>,
        f: impl Fn(f64) -> Complex64 + Send + Sync + 'static,
    ) -> Self {
        Self::new(label, Arc::new(f))
    }

    pub fn from_polynomial(label: impl Into<String>, poly: TrigPolynomial) -> Self {
        let real = poly.is_real(1e-14);
        let resolution = poly.degree();
        let poly = Arc::new(poly);
        let (p1, p2) = (poly.clone(), poly.clone());
        FunctionSpec {
            label: label.into(),
            evaluator: Arc::new(move |x| p1.eval(x)),
            fourier: Some(Arc::new(move |k| p2.coeff(k))),
            breakpoints: Vec::new(),
            exact: Exact::Polynomial(poly),
            real,
            resolution,
        }
    }

    pub fn from_piecewise(label: impl Into<String>, pw: Piecewise) -> Self {
        let pw = Arc::new(pw);
        let (p1, p2) = (pw.clone(), pw.clone());
        FunctionSpec {
            label: label.into(),
            evaluator: Arc::new(move |x| Complex64::new(p1.eval(x), 0.0)),
            fourier: Some(Arc::new(move |k| p2.fourier(k))),
            breakpoints: pw.breakpoints(),
            exact: Exact::Piecewise(pw),
            real: true,
            resolution: 0,
        }
    }

    pub fn constant(c: f64) -> Self {
        Self::from_piecewise(format!("const({c})"), Piecewise::constant(c))
    }

    pub fn with_fourier(mut self, rule: FourierRule) -> Self {
        self.fourier = Some(rule);
        self
    }

    pub fn without_fourier(mut self) -> Self {
        self.fourier = None;
        self
    }

    pub fn with_breakpoints(mut self, mut bps: Vec<f64>) -> Self {
        for b in bps.iter_mut() {
            *b = wrap_angle(*b);
        }
        bps.sort_by(f64::total_cmp);
        bps.dedup();
        self.breakpoints = bps;
        self
    }

    pub fn with_real(mut self, real: bool) -> Self {
        self.real = real;
        self
    }

    pub fn with_label(mut self, label: impl Into<String>) -> Self {
        self.label = label.into();
        self
    }

    /// Drops the exact structure, forcing generic quadrature downstream.
    pub fn opaque(mut self) -> Self {
        self.exact = Exact::None;
        self
    }

    pub fn label(&self) -> &str {
        &self.label
    }

    pub fn eval(&self, x: f64) -> Complex64 {
        (self.evaluator)(wrap_angle(x))
    }

    pub fn evaluator(&self) -> &Evaluator {
        &self.evaluator
    }

    pub fn fourier(&self) -> Option<&FourierRule> {
        self.fourier.as_ref()
    }

    pub fn fourier_coeff(&self, k: i64) -> Option<Complex64> {
        self.fourier.as_ref().map(|r| r(k))
    }

    pub fn breakpoints(&self) -> &[f64] {
        &self.breakpoints
    }

    pub fn exact(&self) -> &Exact {
        &self.exact
    }

    pub fn piecewise(&self) -> Option<&Arc<Piecewise>> {
        match &self.exact {
            Exact::Piecewise(p) => Some(p),
            _ => None,
        }
    }

    pub fn polynomial(&self) -> Option<&Arc<TrigPolynomial>> {
        match &self.exact {
            Exact::Polynomial(p) => Some(p),
            _ => None,
        }
    }

    pub fn is_real(&self) -> bool {
        self.real
    }

    pub fn resolution(&self) -> usize {
        self.resolution
    }

    pub fn with_resolution(mut self, resolution: usize) -> Self {
        self.resolution = resolution;
        self
    }

    /// The mean `\hat f_0`, exact when a Fourier rule is present.
    pub fn mean(&self) -> Complex64 {
        if let Some(c) = self.fourier_coeff(0) {
            return c;
        }
        let n = 8192;
        let step = TAU / n as f64;
        (0..n)
            .map(|j| self.eval((j as f64 + 0.5) * step))
            .sum::<Complex64>()
            / n as f64
    }

    /// Values on the uniform grid `x_j = 2π (j + offset)/N`. Polynomials are
    /// synthesized by FFT, everything else is evaluated pointwise.
    pub fn sample_uniform(&self, size: usize, offset: f64) -> Vec<Complex64> {
        if let Some(p) = self.polynomial() {
            return p.sample_uniform(size, offset);
        }
        let step = TAU / size as f64;
        (0..size)
            .map(|j| self.eval((j as f64 + offset) * step))
            .collect()
    }

    pub fn scale(&self, c: Complex64) -> FunctionSpec {
        let label = format!("{}*{}", fmt_complex(c), self.label);
        match &self.exact {
            Exact::Piecewise(pw) if c.im == 0.0 => {
                return FunctionSpec::from_piecewise(label, pw.scaled(c.re));
            }
            Exact::Polynomial(p) => return FunctionSpec::from_polynomial(label, p.scale(c)),
            _ => {}
        }
        let f = self.evaluator.clone();
        let mut out = FunctionSpec::new(label, Arc::new(move |x| c * f(x)));
        if let Some(r) = self.fourier.clone() {
            out.fourier = Some(Arc::new(move |k| c * r(k)));
        }
        out.breakpoints = self.breakpoints.clone();
        out.real = self.real && c.im == 0.0;
        out.resolution = self.resolution;
        out
    }

    /// `a·self + b·other`, keeping exact structure when both sides share it.
    pub fn combine(&self, a: Complex64, other: &FunctionSpec, b: Complex64) -> FunctionSpec {
        let label = format!(
            "{}*{}+{}*{}",
            fmt_complex(a),
            self.label,
            fmt_complex(b),
            other.label
        );
        match (&self.exact, &other.exact) {
            (Exact::Piecewise(p), Exact::Piecewise(q)) if a.im == 0.0 && b.im == 0.0 => {
                return FunctionSpec::from_piecewise(label, p.linear_combination(a.re, q, b.re));
            }
            (Exact::Polynomial(p), Exact::Polynomial(q)) => {
                return FunctionSpec::from_polynomial(label, p.scale(a).add(&q.scale(b)));
            }
            _ => {}
        }
        let (f, g) = (self.evaluator.clone(), other.evaluator.clone());
        let mut out = FunctionSpec::new(label, Arc::new(move |x| a * f(x) + b * g(x)));
        if let (Some(r), Some(s)) = (self.fourier.clone(), other.fourier.clone()) {
            out.fourier = Some(Arc::new(move |k| a * r(k) + b * s(k)));
        }
        let mut bps = self.breakpoints.clone();
        bps.extend_from_slice(&other.breakpoints);
        out = out.with_breakpoints(bps);
        out.real = self.real && other.real && a.im == 0.0 && b.im == 0.0;
        out.resolution = self.resolution.max(other.resolution);
        out
    }

    pub fn sub(&self, other: &FunctionSpec) -> FunctionSpec {
        let one = Complex64::new(1.0, 0.0);
        self.combine(one, other, -one)
    }

    pub fn add(&self, other: &FunctionSpec) -> FunctionSpec {
        let one = Complex64::new(1.0, 0.0);
        self.combine(one, other, one)
    }

    /// `self − T` for a polynomial `T`.
    pub fn sub_poly(&self, t: &TrigPolynomial) -> FunctionSpec {
        self.sub(&FunctionSpec::from_polynomial("T", t.clone()))
    }
}

fn fmt_complex(c: Complex64) -> String {
    if c.im == 0.0 {
        format!("{}", c.re)
    } else {
        format!("({}{:+}i)", c.re, c.im)
    }
}

/// `N` complex samples at `x_j = 2πj/N`.
#[derive(Clone, Debug, PartialEq)]
pub struct SampleGrid {
    values: Vec<Complex64>,
}

impl SampleGrid {
    pub fn new(values: Vec<Complex64>) -> Result<Self> {
        check_grid_size(values.len())?;
        Ok(SampleGrid { values })
    }

    pub fn size(&self) -> usize {
        self.values.len()
    }

    pub fn values(&self) -> &[Complex64] {
        &self.values
    }

    pub fn node(&self, j: usize) -> f64 {
        TAU * j as f64 / self.values.len() as f64
    }

    /// `a·self + b·other` sample-wise.
    pub fn combine(&self, a: Complex64, other: &SampleGrid, b: Complex64) -> Result<SampleGrid> {
        if self.size() != other.size() {
            return Err(crate::error::invalid("grid sizes differ"));
        }
        Ok(SampleGrid {
            values: self
                .values
                .iter()
                .zip(&other.values)
                .map(|(&u, &v)| a * u + b * v)
                .collect(),
        })
    }
}

fn check_grid_size(n: usize) -> Result<()> {
    if n < 4 || !n.is_power_of_two() {
        return Err(Error::InvalidGridSize(n));
    }
    Ok(())
}

/// Samples `f` at `x_j = 2πj/N`, using the evaluator's own value at jumps.
pub fn sample(f: &FunctionSpec, size: usize) -> Result<SampleGrid> {
    check_grid_size(size)?;
    Ok(SampleGrid {
        values: f.sample_uniform(size, 0.0),
    })
}

/// Discrete Fourier coefficients `c_k = (1/N) Σ_j g_j e^{-ikx_j}` for `|k| ≤ n`.
pub fn analyze(grid: &SampleGrid, degree: usize) -> Result<TrigPolynomial> {
    let size = grid.size();
    if 2 * degree + 1 > size {
        return Err(Error::DegreeTooLarge {
            degree,
            needed: 2 * degree + 1,
            size,
        });
    }
    let mut buf = grid.values.clone();
    fft_forward(&mut buf);
    let inv = 1.0 / size as f64;
    Ok(TrigPolynomial::from_fn(degree, |k| {
        buf[k.rem_euclid(size as i64) as usize] * inv
    }))
}

/// The Fourier projection `S_n f`: exact coefficients when `f` carries a
/// Fourier rule, discrete coefficients from an `N`-point grid otherwise.
pub fn partial_sum(f: &FunctionSpec, degree: usize, size: usize) -> Result<TrigPolynomial> {
    check_grid_size(size)?;
    if 2 * degree + 1 > size {
        return Err(Error::DegreeTooLarge {
            degree,
            needed: 2 * degree + 1,
            size,
        });
    }
    if let Some(p) = f.polynomial() {
        return Ok(p.resized(degree));
    }
    if let Some(rule) = f.fourier() {
        return Ok(TrigPolynomial::from_fn(degree, |k| rule(k)));
    }
    analyze(&sample(f, size)?, degree)
}

#[cfg(test)]
mod tests {
    use super::*;
    use std::f64::consts::{FRAC_PI_2, PI};

    fn c(re: f64, im: f64) -> Complex64 {
        Complex64::new(re, im)
    }

    fn direct(t: &TrigPolynomial, x: f64) -> Complex64 {
        let n = t.degree() as i64;
        (-n..=n).map(|k| t.coeff(k) * Complex64::cis(k as f64 * x)).sum()
    }

    #[test]
    fn eval_examples() {
        let one = TrigPolynomial::new(vec![c(1.0, 0.0)]).unwrap();
        assert_eq!(one.eval(1.234), c(1.0, 0.0));
        let cos = TrigPolynomial::new(vec![c(0.5, 0.0), c(0.0, 0.0), c(0.5, 0.0)]).unwrap();
        assert!((cos.eval(0.0) - c(1.0, 0.0)).norm() < 1e-15);
        let sin = TrigPolynomial::new(vec![c(0.0, 0.5), c(0.0, 0.0), c(0.0, -0.5)]).unwrap();
        assert!((sin.eval(FRAC_PI_2) - c(1.0, 0.0)).norm() < 1e-15);
        assert!((sin.eval(FRAC_PI_2) - direct(&sin, FRAC_PI_2)).norm() < 1e-15);
    }

    #[test]
    fn eval_matches_direct_summation_at_high_degree() {
        let t = TrigPolynomial::from_fn(300, |k| c((k as f64).sin(), (k as f64 * 0.3).cos()));
        for &x in &[0.1, 1.0, 2.7, 6.0] {
            assert!((t.eval(x) - direct(&t, x)).norm() < 1e-12);
        }
    }

    #[test]
    fn even_length_rejected() {
        assert!(TrigPolynomial::new(vec![c(1.0, 0.0); 4]).is_err());
    }

    #[test]
    fn sample_examples() {
        let one = FunctionSpec::constant(1.0);
        assert!(sample(&one, 8).unwrap().values().iter().all(|&v| v == c(1.0, 0.0)));
        let sign_sin = FunctionSpec::from_fn("sign sin", |x| {
            let s = x.sin();
            // sin(π) is not exactly zero in floating point; snap the half-turn
            if x == 0.0 || (x - PI).abs() < 1e-12 {
                c(0.0, 0.0)
            } else {
                c(s.signum(), 0.0)
            }
        });
        let g = sample(&sign_sin, 4).unwrap();
        let want = [0.0, 1.0, 0.0, -1.0];
        for (v, w) in g.values().iter().zip(want) {
            assert_eq!(v.re, w);
        }
        let e = FunctionSpec::from_fn("e^ix", Complex64::cis);
        let g = sample(&e, 8).unwrap();
        for (j, v) in g.values().iter().enumerate() {
            assert!((v - Complex64::cis(TAU * j as f64 / 8.0)).norm() < 1e-15);
        }
        assert!(sample(&e, 6).is_err());
        assert!(sample(&e, 2).is_err());
    }

    #[test]
    fn analyze_recovers_cosine() {
        let cos = FunctionSpec::from_fn("cos", |x| c(x.cos(), 0.0));
        let t = analyze(&sample(&cos, 16).unwrap(), 2).unwrap();
        assert!((t.coeff(1) - c(0.5, 0.0)).norm() < 1e-14);
        assert!((t.coeff(-1) - c(0.5, 0.0)).norm() < 1e-14);
        assert!(t.coeff(0).norm() < 1e-14 && t.coeff(2).norm() < 1e-14);
        assert!(matches!(
            analyze(&sample(&cos, 4).unwrap(), 2),
            Err(Error::DegreeTooLarge { .. })
        ));
    }

    #[test]
    fn analyze_square_wave_first_harmonic() {
        let sq = FunctionSpec::from_fn("sign sin", |x| c(x.sin().signum(), 0.0));
        let t = analyze(&sample(&sq, 4096).unwrap(), 1).unwrap();
        // c_{±1} = ∓2i/π; the sign convention at the two jumps costs O(1/N)
        assert!((t.coeff(1) - c(0.0, -2.0 / PI)).norm() < 1e-3);
        assert!((t.coeff(-1) - c(0.0, 2.0 / PI)).norm() < 1e-3);
    }

    #[test]
    fn partial_sum_of_polynomial_is_exact() {
        let t = TrigPolynomial::from_fn(3, |k| c(k as f64, 1.0 / (1.0 + k.abs() as f64)));
        let f = FunctionSpec::from_polynomial("t", t.clone()).opaque().without_fourier();
        let s = partial_sum(&f, 3, 64).unwrap();
        for k in -3..=3 {
            assert!((s.coeff(k) - t.coeff(k)).norm() < 1e-12);
        }
        let zero = FunctionSpec::constant(0.0);
        let s = partial_sum(&zero, 4, 64).unwrap();
        assert!(s.coeffs().iter().all(|c| c.norm() == 0.0));
    }

    #[test]
    fn uniform_sampling_with_offset() {
        let t = TrigPolynomial::from_fn(5, |k| c(1.0 / (1 + k.abs()) as f64, k as f64 * 0.1));
        let s = t.sample_uniform(32, 0.5);
        for (j, v) in s.iter().enumerate() {
            let x = TAU * (j as f64 + 0.5) / 32.0;
            assert!((v - t.eval(x)).norm() < 1e-12);
        }
        // folded high frequencies still sample exactly
        let s = t.sample_uniform(8, 0.25);
        for (j, v) in s.iter().enumerate() {
            let x = TAU * (j as f64 + 0.25) / 8.0;
            assert!((v - t.eval(x)).norm() < 1e-12);
        }
    }
}
