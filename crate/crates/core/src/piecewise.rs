//! Real piecewise-polynomial functions on the torus with exact Fourier
//! coefficients, exact shifted combinations and |f|^p integrals.

use std::f64::consts::{FRAC_PI_2, TAU};

use num_complex::Complex64;

use crate::error::{invalid, Result};
use crate::periodic::wrap_angle;
use crate::poly::Poly;

/// Knots `0 = t_0 < … < t_m = 2π`; on `[t_i, t_{i+1})` the value is
/// `pieces[i](x − t_i)`.
#[derive(Clone, Debug, PartialEq)]
pub struct Piecewise {
    knots: Vec<f64>,
    pieces: Vec<Poly>,
}

const KNOT_TOL: f64 = 1e-12;

impl Piecewise {
    pub fn new(knots: Vec<f64>, pieces: Vec<Poly>) -> Result<Self> {
        if knots.len() != pieces.len() + 1 || pieces.is_empty() {
            return Err(invalid("piecewise: need one more knot than pieces"));
        }
        if knots[0] != 0.0 || (knots[knots.len() - 1] - TAU).abs() > 1e-12 {
            return Err(invalid("piecewise: knots must run from 0 to 2π"));
        }
        if knots.windows(2).any(|w| w[1] <= w[0]) {
            return Err(invalid("piecewise: knots must be strictly increasing"));
        }
        let mut knots = knots;
        *knots.last_mut().unwrap() = TAU;
        Ok(Piecewise { knots, pieces })
    }

    pub fn constant(c: f64) -> Self {
        Piecewise {
            knots: vec![0.0, TAU],
            pieces: vec![Poly::constant(c)],
        }
    }

    /// Step function with value `values[i]` on `[knots[i], knots[i+1])`.
    pub fn steps(knots: Vec<f64>, values: &[f64]) -> Result<Self> {
        Self::new(knots, values.iter().map(|&v| Poly::constant(v)).collect())
    }

    /// Builds from pieces given in the absolute variable `x` on each interval.
    pub fn from_absolute(knots: Vec<f64>, pieces: Vec<Poly>) -> Result<Self> {
        let local = pieces
            .iter()
            .zip(&knots)
            .map(|(p, &t)| p.shift(t))
            .collect();
        Self::new(knots, local)
    }

    pub fn knots(&self) -> &[f64] {
        &self.knots
    }

    pub fn pieces(&self) -> &[Poly] {
        &self.pieces
    }

    pub fn max_degree(&self) -> usize {
        self.pieces.iter().map(Poly::degree).max().unwrap_or(0)
    }

    /// Knot angles in `[0, 2π)`, used as quadrature breakpoints.
    pub fn breakpoints(&self) -> Vec<f64> {
        self.knots[..self.knots.len() - 1].to_vec()
    }

    fn locate(&self, y: f64) -> usize {
        let i = self.knots.partition_point(|&t| t <= y);
        i.saturating_sub(1).min(self.pieces.len() - 1)
    }

    pub fn eval(&self, x: f64) -> f64 {
        let y = wrap_angle(x);
        let i = self.locate(y);
        self.pieces[i].eval(y - self.knots[i])
    }

    pub fn scaled(&self, c: f64) -> Piecewise {
        Piecewise {
            knots: self.knots.clone(),
            pieces: self.pieces.iter().map(|p| p.scaled(c)).collect(),
        }
    }

    pub fn derivative(&self) -> Piecewise {
        Piecewise {
            knots: self.knots.clone(),
            pieces: self.pieces.iter().map(Poly::derivative).collect(),
        }
    }

    /// Largest jump `|f(t+) − f(t−)|` over all knots, including the wrap at 0.
    pub fn max_jump(&self) -> f64 {
        let m = self.pieces.len();
        (0..m)
            .map(|i| {
                let prev = (i + m - 1) % m;
                let left = self.pieces[prev].eval(self.knots[prev + 1] - self.knots[prev]);
                (self.pieces[i].eval(0.0) - left).abs()
            })
            .fold(0.0, f64::max)
    }

    /// `Σ_i c_i f(x − s_i)`, exactly, on the merged knot set.
    pub fn combine(&self, terms: &[(f64, f64)]) -> Piecewise {
        let mut cuts: Vec<f64> = vec![0.0, TAU];
        for &(_, s) in terms {
            for &t in &self.knots[..self.knots.len() - 1] {
                cuts.push(wrap_angle(t + s));
            }
        }
        merge_knots(&mut cuts);
        let mut pieces = Vec::with_capacity(cuts.len() - 1);
        for w in cuts.windows(2) {
            let (a, b) = (w[0], w[1]);
            let mid = 0.5 * (a + b);
            let mut acc = Poly::zero();
            for &(c, s) in terms {
                if c == 0.0 {
                    continue;
                }
                let y_mid = wrap_angle(mid - s);
                let i = self.locate(y_mid);
                // local coordinate of the left cut inside source piece i
                let u0 = y_mid - self.knots[i] - (mid - a);
                acc.add_scaled(&self.pieces[i].shift(u0), c);
            }
            pieces.push(acc);
        }
        Piecewise {
            knots: cuts,
            pieces,
        }
    }

    /// `a·self + b·other` on the union of both knot sets.
    pub fn linear_combination(&self, a: f64, other: &Piecewise, b: f64) -> Piecewise {
        let mut cuts: Vec<f64> = self.knots.iter().chain(&other.knots).copied().collect();
        merge_knots(&mut cuts);
        let pieces = cuts
            .windows(2)
            .map(|w| {
                let mid = 0.5 * (w[0] + w[1]);
                let i = self.locate(mid);
                let j = other.locate(mid);
                let mut acc = self.pieces[i].shift(w[0] - self.knots[i]).scaled(a);
                acc.add_scaled(&other.pieces[j].shift(w[0] - other.knots[j]), b);
                acc
            })
            .collect();
        Piecewise {
            knots: cuts,
            pieces,
        }
    }

    /// Exact Fourier coefficient `(1/2π)∫ f(x) e^{−ikx} dx`.
    pub fn fourier(&self, k: i64) -> Complex64 {
        let mut acc = Complex64::new(0.0, 0.0);
        if k == 0 {
            for (p, w) in self.pieces.iter().zip(self.knots.windows(2)) {
                acc += p.integral(w[1] - w[0]);
            }
            return acc / TAU;
        }
        let s = Complex64::new(0.0, -(k as f64));
        for (p, w) in self.pieces.iter().zip(self.knots.windows(2)) {
            let len = w[1] - w[0];
            // ∫_0^L P(u) e^{su} du = [e^{su} Σ_j (−1)^j P^{(j)}(u) / s^{j+1}]_0^L
            let mut d = p.clone();
            let mut sp = s;
            let mut at_end = Complex64::new(0.0, 0.0);
            let mut at_start = Complex64::new(0.0, 0.0);
            let mut sign = 1.0;
            loop {
                at_end += sign * d.eval(len) / sp;
                at_start += sign * d.eval(0.0) / sp;
                if d.degree() == 0 {
                    break;
                }
                d = d.derivative();
                sp *= s;
                sign = -sign;
            }
            let phase = Complex64::cis(-(k as f64) * w[0]);
            acc += phase * (Complex64::cis(-(k as f64) * len) * at_end - at_start);
        }
        acc / TAU
    }

    /// `(1/2π)∫ |f|^p`, with closed forms on constant and linear pieces and
    /// root-split tanh-sinh quadrature on higher-degree pieces.
    pub fn lp_pow_integral(&self, p: f64) -> f64 {
        let mut acc = 0.0;
        for (poly, w) in self.pieces.iter().zip(self.knots.windows(2)) {
            acc += piece_pow_integral(poly, w[1] - w[0], p);
        }
        acc / TAU
    }

    pub fn lp_norm(&self, p: f64) -> f64 {
        self.lp_pow_integral(p).powf(1.0 / p)
    }
}

fn merge_knots(cuts: &mut Vec<f64>) {
    cuts.sort_by(f64::total_cmp);
    let mut out: Vec<f64> = Vec::with_capacity(cuts.len());
    for &c in cuts.iter() {
        match out.last() {
            Some(&l) if c - l <= KNOT_TOL => {}
            _ => out.push(c),
        }
    }
    // the final knot is exactly 2π
    if let Some(l) = out.last_mut() {
        if TAU - *l <= KNOT_TOL {
            *l = TAU;
        }
    }
    if *out.last().unwrap() != TAU {
        out.push(TAU);
    }
    *cuts = out;
}

fn piece_pow_integral(poly: &Poly, len: f64, p: f64) -> f64 {
    match poly.degree() {
        0 => poly.0[0].abs().powf(p) * len,
        1 => {
            let (a, b) = (poly.0[0], poly.0[1]);
            linear_pow_integral(a, b, len, p)
        }
        _ => {
            let roots = real_roots(poly, len);
            let mut acc = 0.0;
            let mut left = 0.0;
            for r in roots.into_iter().chain(std::iter::once(len)) {
                if r > left {
                    acc += tanh_sinh(|u| poly.eval(u).abs().powf(p), left, r);
                }
                left = r;
            }
            acc
        }
    }
}

/// `∫_0^L |a + b u|^p du`.
fn linear_pow_integral(a: f64, b: f64, len: f64, p: f64) -> f64 {
    if b == 0.0 {
        return a.abs().powf(p) * len;
    }
    let v0 = a;
    let v1 = a + b * len;
    let q = p + 1.0;
    let g = |v: f64| v.abs().powf(q);
    let raw = if v0.signum() * v1.signum() < 0.0 {
        g(v0) + g(v1)
    } else {
        (g(v1) - g(v0)).abs()
    };
    raw / (q * b.abs())
}

/// Sign changes of `poly` inside `(0, len)`, located by bisection.
fn real_roots(poly: &Poly, len: f64) -> Vec<f64> {
    let samples = 16 * poly.degree() + 16;
    let mut roots = Vec::new();
    let mut x0 = 0.0;
    let mut f0 = poly.eval(0.0);
    for i in 1..=samples {
        let x1 = len * i as f64 / samples as f64;
        let f1 = poly.eval(x1);
        if f1 == 0.0 && i < samples {
            roots.push(x1);
        } else if f0 * f1 < 0.0 {
            let (mut lo, mut hi, mut flo) = (x0, x1, f0);
            for _ in 0..80 {
                let mid = 0.5 * (lo + hi);
                let fm = poly.eval(mid);
                if fm == 0.0 {
                    lo = mid;
                    hi = mid;
                    break;
                }
                if (fm < 0.0) == (flo < 0.0) {
                    lo = mid;
                    flo = fm;
                } else {
                    hi = mid;
                }
            }
            roots.push(0.5 * (lo + hi));
        }
        x0 = x1;
        f0 = f1;
    }
    roots
}

/// Tanh-sinh quadrature of `f` over `[a, b]`, tolerant to integrable
/// endpoint singularities.
pub(crate) fn tanh_sinh(f: impl Fn(f64) -> f64, a: f64, b: f64) -> f64 {
    tanh_sinh_est(f, a, b, 7, 1e-14).0
}

/// Tanh-sinh with at most `levels` halvings of the step; returns the value and
/// the change over the last halving.
pub(crate) fn tanh_sinh_est(
    f: impl Fn(f64) -> f64,
    a: f64,
    b: f64,
    levels: usize,
    rel_tol: f64,
) -> (f64, f64) {
    let half = 0.5 * (b - a);
    if half <= 0.0 {
        return (0.0, 0.0);
    }
    const T_MAX: f64 = 4.0;
    // contribution of the node pair at parameter t (t > 0), already weighted
    let pair = |t: f64| -> f64 {
        let u = FRAC_PI_2 * t.sinh();
        let ch = u.cosh();
        let w = FRAC_PI_2 * t.cosh() / (ch * ch);
        // 1 − tanh(u) without cancellation
        let comp = (-u).exp() / ch;
        let d = half * comp;
        if d > 0.0 && w > 0.0 {
            w * (f(b - d) + f(a + d))
        } else {
            0.0
        }
    };
    let mut h = 0.5;
    let mut sum = FRAC_PI_2 * f(a + half);
    let mut t = h;
    while t <= T_MAX {
        sum += pair(t);
        t += h;
    }
    let mut est = sum * h * half;
    let mut err = est.abs();
    for _ in 0..levels {
        h *= 0.5;
        let mut t = h;
        while t <= T_MAX {
            sum += pair(t);
            t += 2.0 * h;
        }
        let next = sum * h * half;
        err = (next - est).abs();
        est = next;
        if err <= rel_tol * est.abs().max(1e-300) {
            break;
        }
    }
    (est, err)
}
