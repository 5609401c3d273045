//! Dense real polynomials in ascending coefficient order, used for the pieces
//! of piecewise-polynomial corpus functions.

#[derive(Clone, Debug, PartialEq, Default)]
pub struct Poly(pub Vec<f64>);

impl Poly {
    pub fn constant(c: f64) -> Self {
        Poly(vec![c])
    }

    pub fn zero() -> Self {
        Poly(vec![0.0])
    }

    pub fn degree(&self) -> usize {
        let mut d = self.0.len().saturating_sub(1);
        while d > 0 && self.0[d] == 0.0 {
            d -= 1;
        }
        d
    }

    pub fn eval(&self, u: f64) -> f64 {
        self.0.iter().rev().fold(0.0, |acc, &c| acc * u + c)
    }

    pub fn derivative(&self) -> Poly {
        if self.0.len() <= 1 {
            return Poly::zero();
        }
        Poly(
            self.0
                .iter()
                .enumerate()
                .skip(1)
                .map(|(j, &c)| j as f64 * c)
                .collect(),
        )
    }

    /// Returns `Q(u) = P(u + s)`.
    pub fn shift(&self, s: f64) -> Poly {
        let mut c = self.0.clone();
        let n = c.len();
        // repeated synthetic division (Horner's Taylor shift)
        for i in 0..n {
            for j in (i..n - 1).rev() {
                c[j] += s * c[j + 1];
            }
        }
        Poly(c)
    }

    /// Returns `Q(u) = P(a * u)`.
    pub fn scale_arg(&self, a: f64) -> Poly {
        let mut pow = 1.0;
        Poly(
            self.0
                .iter()
                .map(|&c| {
                    let v = c * pow;
                    pow *= a;
                    v
                })
                .collect(),
        )
    }

    pub fn scaled(&self, k: f64) -> Poly {
        Poly(self.0.iter().map(|&c| c * k).collect())
    }

    pub fn add_scaled(&mut self, other: &Poly, k: f64) {
        if other.0.len() > self.0.len() {
            self.0.resize(other.0.len(), 0.0);
        }
        for (a, &b) in self.0.iter_mut().zip(&other.0) {
            *a += k * b;
        }
    }

    pub fn mul(&self, other: &Poly) -> Poly {
        let mut out = vec![0.0; self.0.len() + other.0.len() - 1];
        for (i, &a) in self.0.iter().enumerate() {
            for (j, &b) in other.0.iter().enumerate() {
                out[i + j] += a * b;
            }
        }
        Poly(out)
    }

    pub fn pow(&self, e: u32) -> Poly {
        let mut out = Poly::constant(1.0);
        for _ in 0..e {
            out = out.mul(self);
        }
        out
    }

    /// `∫_0^L P(u) du`.
    pub fn integral(&self, len: f64) -> f64 {
        let mut pow = len;
        let mut acc = 0.0;
        for (j, &c) in self.0.iter().enumerate() {
            acc += c * pow / (j + 1) as f64;
            pow *= len;
        }
        acc
    }

    pub fn is_zero(&self) -> bool {
        self.0.iter().all(|&c| c == 0.0)
    }
}

/// Bernoulli polynomial `B_m(t)` in ascending coefficients, for `m <= 8`.
pub fn bernoulli(m: usize) -> Poly {
    const NUMBERS: [f64; 9] = [
        1.0,
        -0.5,
        1.0 / 6.0,
        0.0,
        -1.0 / 30.0,
        0.0,
        1.0 / 42.0,
        0.0,
        -1.0 / 30.0,
    ];
    assert!(m < NUMBERS.len(), "Bernoulli polynomial order {m} unsupported");
    // B_m(t) = sum_k C(m,k) B_k t^{m-k}
    let mut c = vec![0.0; m + 1];
    let mut binom = 1.0;
    for (k, &bk) in NUMBERS.iter().enumerate().take(m + 1) {
        c[m - k] += binom * bk;
        binom = binom * (m - k) as f64 / (k + 1) as f64;
    }
    Poly(c)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn shift_matches_direct_evaluation() {
        let p = Poly(vec![1.0, -2.0, 0.5, 3.0]);
        let q = p.shift(0.7);
        for &u in &[-1.0, 0.0, 0.3, 2.5] {
            assert!((q.eval(u) - p.eval(u + 0.7)).abs() < 1e-12);
        }
    }

    #[test]
    fn bernoulli_low_orders() {
        let b1 = bernoulli(1);
        assert_eq!(b1.0, vec![-0.5, 1.0]);
        let b2 = bernoulli(2);
        assert!((b2.eval(0.5) - (0.25 - 0.5 + 1.0 / 6.0)).abs() < 1e-15);
        // periodicity of the continuous Bernoulli functions for m >= 2
        for m in 2..=6 {
            let b = bernoulli(m);
            assert!((b.eval(0.0) - b.eval(1.0)).abs() < 1e-13, "m = {m}");
        }
    }
}
