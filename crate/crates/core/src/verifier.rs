//! Theorem registry and inequality checks.
//!
//! Each registry id maps a [`TheoremCase`] (a corpus function plus numeric
//! parameters) to a left- and right-hand side assembled from best
//! approximations, moduli, tail sums and weighted integrals. Constant-type
//! inequalities are summarized as ratio bands; slope-type claims carry a
//! target exponent and a pass/fail verdict.

use std::collections::{BTreeMap, HashMap};
use std::io::{Read, Write};
use std::sync::{Arc, Mutex, OnceLock};

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::best_approx::{bernstein_sup, best_approx, SolverOptions};
use crate::corpus::CorpusSpec;
use crate::error::{invalid, Error, Result};
use crate::fractional::{as_natural, frac_difference, weyl};
use crate::periodic::{FunctionSpec, TrigPolynomial};
use crate::quasinorm::{lp_distance, lp_norm, QuadratureSpec};
use crate::smoothness::{
    bernstein_rate, fmt_f64, modulus, order_admissible, rate_branch_of, rho_rate, sigma_rate, weighted_integral,
    ETable, ModulusCurve, ModulusOptions,
};

/// Whether a claim is judged by a ratio band or by a fitted exponent.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum ClaimKind {
    Band,
    Slope,
}

/// The variable a sweep scales along.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Scale {
    N,
    H,
}

/// Registry entry. `lhs_upper`/`rhs_upper` record which sides are computed
/// from solver upper bounds (best approximations, realization values) as
/// opposed to exact or lower-bound quantities.
#[derive(Clone, Copy, Debug)]
pub struct TheoremInfo {
    pub id: &'static str,
    pub summary: &'static str,
    pub requires_derivative: bool,
    pub claim: ClaimKind,
    pub scale: Scale,
    pub lhs_upper: bool,
    pub rhs_upper: bool,
}

const fn info(
    id: &'static str,
    summary: &'static str,
    requires_derivative: bool,
    claim: ClaimKind,
    scale: Scale,
    lhs_upper: bool,
    rhs_upper: bool,
) -> TheoremInfo {
    TheoremInfo {
        id,
        summary,
        requires_derivative,
        claim,
        scale,
        lhs_upper,
        rhs_upper,
    }
}

use ClaimKind::{Band, Slope};
use Scale::{H, N};

pub const REGISTRY: &[TheoremInfo] = &[
    info("TH-DIRECT", "E_n(f) vs n^-a (E_n(f^(a)) + tail of E_v(f^(a)))", true, Band, N, true, true),
    info("TH-INVERSE", "|f^(a) - T_n^(a)| vs n^a E_n(f) + tail sum v^(ap-1) E_v^p", true, Band, N, true, true),
    info("TH-INVERSE-SIGMA", "as TH-INVERSE with the sigma rate", true, Band, N, true, true),
    info("TH-SIMUL", "|f^(a) - T_n^(a)| vs rho(n) (E_n(f^(a)) + tail)", true, Band, N, true, true),
    info("TH-MOD-DIRECT", "w_{b+a}(f,d) vs d^a (w_b(f^(a),d) + integral of w_r(f^(a),t))", true, Band, H, false, false),
    info("TH-MOD-INVERSE", "w_b(f^(a),d) vs integral of w_{b+a}(f,t)^p t^(-pa-1)", true, Band, H, false, false),
    info("TH-MOD-INVERSE-SIGMA", "w_b(f^(a),d) vs integral of w_{b+a}(f,t)^p sigma(1/t)^p / t", true, Band, H, false, false),
    info("JACKSON", "E_n(f) vs w_b(f,1/n)", false, Band, N, true, false),
    info("INVERSE-EB", "w_b(f,1/n) vs n^-b (sum (v+1)^(bp-1) E_v^p)^(1/p)", false, Band, N, false, true),
    info("TH-JACKSON-FRAC", "E_n(f) vs n^-(a+1/p-1) (integral of w_b(f^(a),t)^p t^(p-2))^(1/p)", true, Band, N, true, false),
    info("TH-MOD-FROM-E", "w_b(f^(a),1/n) vs head and tail sums of E_v(f)", true, Band, N, false, true),
    info("TH-MOD-FROM-E-SIGMA", "w_b(f^(a),1/n) vs sigma-weighted sums of E_v(f)", true, Band, N, false, true),
    info("MOD-LAMBDA", "w_b(f,ld) vs (1+l)^(b+1/p1-1) w_b(f,d)", false, Band, H, false, false),
    info("NIK-STECHKIN", "h^a |T^(a)| vs |D_h^a T| for 0 < h <= pi/n", false, Band, N, false, false),
    info("NIKOLSKII", "|T|_q vs n^(1/p-1/q) |T|_p", false, Band, N, false, false),
    info("BERNSTEIN", "sup |T^(a)|_p/|T|_p over candidates vs the rate", false, Slope, N, false, false),
    info("KROTOV-SLOPE", "w_b(f,h) vs h^(b+1/p-1)", false, Slope, H, false, false),
    info("SHARPNESS", "|f_r - T_{n,r}| vs |T_{n,r}^(r)| for the best approximant of phi_{n,r}", false, Slope, N, true, false),
    info("GRUNWALD-ZERO", "|D_h f / h| vs h^(1/p-1)", false, Slope, H, false, false),
    info("EQUIV-E", "n^a E_n(f) vs E_n(f^(a))", true, Band, N, true, true),
    info("EQUIV-MOD", "h^-a w_{a+b}(f,h) vs w_b(f^(a),h)", true, Band, H, false, false),
];

pub fn registry_ids() -> Vec<&'static str> {
    REGISTRY.iter().map(|t| t.id).collect()
}

/// Looks up an id; unknown ids list the closest registry entries.
pub fn lookup(id: &str) -> Result<&'static TheoremInfo> {
    if let Some(t) = REGISTRY.iter().find(|t| t.id.eq_ignore_ascii_case(id)) {
        return Ok(t);
    }
    let upper = id.to_ascii_uppercase();
    let mut scored: Vec<(f64, &str)> = REGISTRY
        .iter()
        .map(|t| (strsim::normalized_levenshtein(&upper, t.id), t.id))
        .collect();
    scored.sort_by(|a, b| b.0.total_cmp(&a.0).then(a.1.cmp(b.1)));
    let suggestions: Vec<&str> = scored.iter().take(3).map(|s| s.1).collect();
    Err(Error::UnknownTheorem {
        id: id.to_string(),
        suggestions: suggestions.join(", "),
    })
}

/// Numeric parameters of a case; which ones are used depends on the id.
#[derive(Clone, Debug, Default, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct CaseParams {
    pub p: f64,
    pub alpha: Option<f64>,
    pub beta: Option<f64>,
    pub n: Option<usize>,
    pub h: Option<f64>,
    pub lambda: Option<f64>,
    pub q: Option<f64>,
    pub r: Option<u32>,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct TheoremCase {
    pub id: String,
    pub function: CorpusSpec,
    pub params: CaseParams,
}

fn hyp(id: &str, reason: impl Into<String>) -> Error {
    Error::Hypothesis {
        id: id.to_string(),
        reason: reason.into(),
    }
}

impl TheoremCase {
    pub fn info(&self) -> Result<&'static TheoremInfo> {
        lookup(&self.id)
    }

    pub fn requires_derivative(&self) -> bool {
        self.info().map(|t| t.requires_derivative).unwrap_or(false)
    }

    fn need_f(&self, name: &str, v: Option<f64>) -> Result<f64> {
        match v {
            Some(x) if x.is_finite() => Ok(x),
            _ => Err(hyp(&self.id, format!("parameter {name} is required"))),
        }
    }

    fn n(&self) -> Result<usize> {
        match self.params.n {
            Some(n) if n >= 1 => Ok(n),
            _ => Err(hyp(&self.id, "parameter n ≥ 1 is required")),
        }
    }

    fn h(&self) -> Result<f64> {
        match self.params.h {
            Some(h) if h > 0.0 && h.is_finite() => Ok(h),
            _ => Err(hyp(&self.id, "parameter h > 0 is required")),
        }
    }

    fn alpha(&self) -> Result<f64> {
        let a = self.need_f("alpha", self.params.alpha)?;
        if a > 0.0 {
            Ok(a)
        } else {
            Err(hyp(&self.id, "alpha must be positive"))
        }
    }

    fn beta(&self) -> Result<f64> {
        self.need_f("beta", self.params.beta)
    }

    fn admissible(&self, name: &str, v: f64) -> Result<()> {
        if order_admissible(v, self.params.p) {
            Ok(())
        } else {
            Err(hyp(
                &self.id,
                format!("{name} = {v} is not in N ∪ (1/p − 1, ∞) for p = {}", self.params.p),
            ))
        }
    }

    /// Rejects parameter combinations outside the stated hypotheses.
    pub fn validate(&self) -> Result<()> {
        let info = self.info()?;
        let p = self.params.p;
        let id = info.id;
        if !(p > 0.0 && p < 1.0) {
            if !(id == "GRUNWALD-ZERO" && p > 0.0 && p.is_finite()) {
                return Err(hyp(id, format!("requires 0 < p < 1, got {p}")));
            }
        }
        match id {
            "TH-DIRECT" | "TH-INVERSE-SIGMA" | "TH-SIMUL" => {
                self.alpha()?;
                self.n()?;
            }
            "TH-INVERSE" => {
                let a = self.alpha()?;
                self.admissible("alpha", a)?;
                self.n()?;
            }
            "TH-MOD-DIRECT" | "TH-MOD-INVERSE-SIGMA" => {
                let (a, b) = (self.alpha()?, self.beta()?);
                self.admissible("beta", b)?;
                self.admissible("alpha + beta", a + b)?;
                if let Some(r) = self.params.r {
                    if r == 0 {
                        return Err(hyp(id, "r must be a positive integer"));
                    }
                }
                self.h()?;
            }
            "TH-MOD-INVERSE" | "EQUIV-MOD" => {
                let (a, b) = (self.alpha()?, self.beta()?);
                self.admissible("alpha", a)?;
                self.admissible("beta", b)?;
                self.h()?;
            }
            "JACKSON" | "INVERSE-EB" => {
                let b = self.beta()?;
                self.admissible("beta", b)?;
                self.n()?;
            }
            "TH-JACKSON-FRAC" | "TH-MOD-FROM-E-SIGMA" => {
                self.alpha()?;
                let b = self.beta()?;
                self.admissible("beta", b)?;
                self.n()?;
            }
            "TH-MOD-FROM-E" => {
                let (a, b) = (self.alpha()?, self.beta()?);
                self.admissible("alpha", a)?;
                self.admissible("beta", b)?;
                self.n()?;
            }
            "MOD-LAMBDA" => {
                let b = self.beta()?;
                self.admissible("beta", b)?;
                self.h()?;
                let l = self.need_f("lambda", self.params.lambda)?;
                if !(l > 0.0) {
                    return Err(hyp(id, "lambda must be positive"));
                }
            }
            "NIK-STECHKIN" => {
                self.alpha()?;
                let n = self.n()?;
                if let Some(h) = self.params.h {
                    if !(h > 0.0 && h <= std::f64::consts::PI / n as f64 * (1.0 + 1e-12)) {
                        return Err(hyp(id, format!("requires 0 < h ≤ π/n, got h = {h}, n = {n}")));
                    }
                }
            }
            "NIKOLSKII" => {
                self.n()?;
                let q = self.need_f("q", self.params.q)?;
                if !(q > p) {
                    return Err(hyp(id, "requires q > p"));
                }
            }
            "BERNSTEIN" => {
                self.alpha()?;
                self.n()?;
            }
            "KROTOV-SLOPE" => {
                let b = self.beta()?;
                self.admissible("beta", b)?;
                self.h()?;
            }
            "SHARPNESS" => {
                self.n()?;
                let r = self.params.r.or(self.params.alpha.and_then(as_natural).map(|k| k as u32));
                if !matches!(r, Some(r) if r >= 1) {
                    return Err(hyp(id, "requires a positive integer order r"));
                }
            }
            "GRUNWALD-ZERO" => {
                self.h()?;
                if let Some(a) = self.params.alpha {
                    if !(a > 0.0) {
                        return Err(hyp(id, "alpha must be positive"));
                    }
                }
            }
            "EQUIV-E" => {
                let a = self.alpha()?;
                self.admissible("alpha", a)?;
                self.n()?;
            }
            _ => {}
        }
        Ok(())
    }

    /// Sort key: lexicographic over id, function and parameters.
    fn sort_key(&self) -> (String, String, Vec<f64>) {
        let p = &self.params;
        let o = |v: Option<f64>| v.unwrap_or(f64::NEG_INFINITY);
        (
            self.id.clone(),
            self.function.label(),
            vec![
                p.p,
                o(p.alpha),
                o(p.beta),
                o(p.n.map(|n| n as f64)),
                o(p.h),
                o(p.lambda),
                o(p.q),
                o(p.r.map(f64::from)),
            ],
        )
    }

    /// Key of the case with the scale variable removed, used for grouping.
    fn group_key(&self, scale: Scale) -> String {
        let mut p = self.params.clone();
        match scale {
            Scale::N => {
                p.n = None;
                if self.id == "NIK-STECHKIN" {
                    p.h = None;
                }
            }
            Scale::H => p.h = None,
        }
        let f = match self.id.as_str() {
            "NIKOLSKII" | "NIK-STECHKIN" | "SHARPNESS" => self.function.with_degree(0).label(),
            _ => self.function.label(),
        };
        format!("{f}|{}", serde_json::to_string(&p).unwrap_or_default())
    }
}

/// One evaluated case.
#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct InequalityReport {
    pub case: TheoremCase,
    pub lhs: f64,
    pub rhs: f64,
    pub ratio: f64,
    pub status: String,
    pub flags: Vec<String>,
    pub seed: u64,
    /// Auxiliary quantities, e.g. the single-term failure factor of SHARPNESS.
    #[serde(default)]
    pub extras: BTreeMap<String, f64>,
}

/// `lhs/rhs` with `0/0 = 0` and `x/0 = ∞`.
pub fn ratio_of(lhs: f64, rhs: f64) -> f64 {
    if rhs == 0.0 {
        if lhs == 0.0 {
            0.0
        } else {
            f64::INFINITY
        }
    } else {
        lhs / rhs
    }
}

/// Least-squares line through `(log x, log y)`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct SlopeFit {
    pub slope: f64,
    pub intercept: f64,
    pub r2: f64,
    pub window: (f64, f64),
}

pub fn fit_rate(points: &[(f64, f64)]) -> Result<SlopeFit> {
    if points.len() < 4 {
        return Err(Error::TooFewPoints {
            needed: 4,
            got: points.len(),
        });
    }
    for &(x, y) in points {
        if !(x > 0.0 && y > 0.0) || !x.is_finite() || !y.is_finite() {
            return Err(Error::NonPositiveData { x, y });
        }
    }
    let m = points.len() as f64;
    let lx: Vec<f64> = points.iter().map(|p| p.0.ln()).collect();
    let ly: Vec<f64> = points.iter().map(|p| p.1.ln()).collect();
    let mx = lx.iter().sum::<f64>() / m;
    let my = ly.iter().sum::<f64>() / m;
    let sxx: f64 = lx.iter().map(|x| (x - mx).powi(2)).sum();
    let sxy: f64 = lx.iter().zip(&ly).map(|(x, y)| (x - mx) * (y - my)).sum();
    let syy: f64 = ly.iter().map(|y| (y - my).powi(2)).sum();
    if sxx == 0.0 {
        return Err(invalid("rate fit needs at least two distinct abscissae"));
    }
    let slope = sxy / sxx;
    let intercept = my - slope * mx;
    let sse: f64 = lx.iter().zip(&ly).map(|(x, y)| (y - intercept - slope * x).powi(2)).sum();
    let r2 = if syy <= 1e-300 { 1.0 } else { (1.0 - sse / syy).clamp(0.0, 1.0) };
    let lo = points.iter().map(|p| p.0).fold(f64::INFINITY, f64::min);
    let hi = points.iter().map(|p| p.0).fold(f64::NEG_INFINITY, f64::max);
    Ok(SlopeFit {
        slope,
        intercept,
        r2,
        window: (lo, hi),
    })
}

/// Solver and quadrature settings shared by all cases, plus a cache of best
/// approximations keyed by function, `p` and degree.
#[derive(Clone)]
pub struct Env {
    pub solver: SolverOptions,
    pub quadrature: QuadratureSpec,
    pub modulus: ModulusOptions,
    /// Upper summation index for infinite sums over `E_ν`.
    pub horizon: usize,
    /// Exactly solved degrees; beyond this the table uses geometric nodes.
    pub dense_upto: usize,
    /// Samples per halving of `t` in modulus curves for integrals.
    pub curve_density: usize,
    /// Halvings below the upper limit covered by modulus curves.
    pub curve_depth: usize,
    pub seed: u64,
    cache: Arc<SolveCache>,
}

type SolveSlot = Arc<OnceLock<std::result::Result<Solved, String>>>;

#[derive(Default)]
struct SolveCache {
    slots: Mutex<HashMap<(String, u64, usize), SolveSlot>>,
}

#[derive(Clone, Debug)]
struct Solved {
    value: f64,
    poly: TrigPolynomial,
    flags: Vec<String>,
}

impl Default for Env {
    fn default() -> Self {
        Env {
            solver: SolverOptions {
                restarts: 3,
                ..SolverOptions::default()
            },
            quadrature: QuadratureSpec::default(),
            modulus: ModulusOptions::default(),
            horizon: 128,
            dense_upto: 16,
            curve_density: 2,
            curve_depth: 10,
            seed: 0,
            cache: Arc::new(SolveCache::default()),
        }
    }
}

impl std::fmt::Debug for Env {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.debug_struct("Env")
            .field("solver", &self.solver)
            .field("horizon", &self.horizon)
            .field("seed", &self.seed)
            .finish()
    }
}

/// FNV-1a, used to derive per-case seeds that do not depend on scheduling.
fn mix(seed: u64, parts: &[&[u8]]) -> u64 {
    let mut h: u64 = 0xcbf2_9ce4_8422_2325 ^ seed.wrapping_mul(0x9e37_79b9_7f4a_7c15);
    for part in parts {
        for &b in *part {
            h ^= b as u64;
            h = h.wrapping_mul(0x0100_0000_01b3);
        }
        h ^= 0xff;
        h = h.wrapping_mul(0x0100_0000_01b3);
    }
    h
}

impl Env {
    pub fn new(solver: SolverOptions, quadrature: QuadratureSpec, seed: u64) -> Env {
        Env {
            solver,
            quadrature,
            seed,
            ..Env::default()
        }
    }

    /// Drops cached solves (for example after changing solver options).
    pub fn clear_cache(&mut self) {
        self.cache = Arc::new(SolveCache::default());
    }

    fn case_seed(&self, case: &TheoremCase) -> u64 {
        let key = serde_json::to_string(case).unwrap_or_default();
        mix(self.seed, &[key.as_bytes()])
    }

    /// Best approximation of `f` (labelled `key`) at degree `n`; cached and
    /// seeded from `(seed, key, p, n)` so results do not depend on order.
    fn solve(&self, f: &FunctionSpec, key: &str, p: f64, n: usize) -> Result<Solved> {
        if let Some(t) = f.polynomial() {
            if t.effective_degree(0.0) <= n {
                return Ok(Solved {
                    value: 0.0,
                    poly: t.resized(n),
                    flags: Vec::new(),
                });
            }
        }
        let slot = {
            let mut slots = self.cache.slots.lock().expect("cache lock");
            slots
                .entry((key.to_string(), p.to_bits(), n))
                .or_insert_with(|| Arc::new(OnceLock::new()))
                .clone()
        };
        let out = slot.get_or_init(|| {
            let mut opts = self.solver.clone();
            opts.seed = mix(self.seed, &[key.as_bytes(), &p.to_bits().to_le_bytes(), &n.to_le_bytes()]);
            best_approx(f, n, p, &opts, &self.quadrature)
                .map(|r| {
                    let mut flags = Vec::new();
                    if r.status != crate::best_approx::SolverStatus::Converged {
                        flags.push(format!("solver-{}", r.status.as_str()));
                    }
                    if r.quadrature_flag {
                        flags.push("quadrature".to_string());
                    }
                    Solved {
                        value: r.value,
                        poly: r.polynomial,
                        flags,
                    }
                })
                .map_err(|e| e.to_string())
        });
        out.clone().map_err(Error::InvalidParameter)
    }

    /// Degrees solved exactly for a table up to `upto`.
    fn table_nodes(&self, upto: usize) -> Vec<usize> {
        let dense = self.dense_upto.min(upto);
        let mut nodes: Vec<usize> = (0..=dense).collect();
        let mut x = dense as f64;
        while (x as usize) < upto {
            x = (x * 2f64.powf(0.25)).ceil();
            nodes.push((x as usize).min(upto));
        }
        nodes.dedup();
        nodes
    }

    /// `E_0..E_upto` for `f`. Entries between geometric nodes are
    /// interpolated log-linearly in `ν`; running minima enforce monotonicity.
    pub fn e_table(&self, f: &FunctionSpec, key: &str, p: f64, upto: usize) -> Result<(ETable, Vec<String>)> {
        let mut flags = Vec::new();
        if let Some(t) = f.polynomial() {
            // exact zeros from the degree on
            let d = t.effective_degree(0.0);
            let mut e = Vec::with_capacity(upto + 1);
            for n in 0..=upto {
                if n >= d {
                    e.push(0.0);
                } else {
                    let s = self.solve(f, key, p, n)?;
                    flags.extend(s.flags);
                    e.push(s.value);
                }
            }
            running_min(&mut e);
            return Ok((ETable::new(e)?, dedup(flags)));
        }
        let nodes = self.table_nodes(upto);
        let solved: Vec<Result<Solved>> = nodes.par_iter().map(|&n| self.solve(f, key, p, n)).collect();
        let mut vals = Vec::with_capacity(nodes.len());
        for s in solved {
            let s = s?;
            flags.extend(s.flags);
            vals.push(s.value);
        }
        running_min(&mut vals);
        let mut e = vec![0.0; upto + 1];
        for w in 0..nodes.len() {
            e[nodes[w]] = vals[w];
            if w + 1 < nodes.len() {
                let (a, b) = (nodes[w], nodes[w + 1]);
                let (ea, eb) = (vals[w], vals[w + 1]);
                for (nu, slot) in e.iter_mut().enumerate().take(b).skip(a + 1) {
                    *slot = if ea > 0.0 && eb > 0.0 && a > 0 {
                        let t = ((nu as f64).ln() - (a as f64).ln()) / ((b as f64).ln() - (a as f64).ln());
                        (ea.ln() * (1.0 - t) + eb.ln() * t).exp()
                    } else {
                        eb
                    };
                }
            }
        }
        if nodes.len() < upto + 1 {
            flags.push("interpolated-table".to_string());
        }
        Ok((ETable::new(e)?, dedup(flags)))
    }

    fn omega(&self, f: &FunctionSpec, alpha: f64, h: f64, p: f64, flags: &mut Vec<String>) -> Result<f64> {
        let m = modulus(f, alpha, h, p, &self.quadrature, &self.modulus)?;
        if m.flagged {
            flags.push("modulus".to_string());
        }
        Ok(m.value)
    }

    /// Modulus curve on `t = δ 2^{−j/density}` for the integral functionals.
    fn curve(&self, f: &FunctionSpec, alpha: f64, p: f64, delta: f64, flags: &mut Vec<String>) -> Result<ModulusCurve> {
        let m = self.curve_depth * self.curve_density;
        let ts: Vec<f64> = (0..=m)
            .rev()
            .map(|j| delta * 2f64.powf(-(j as f64) / self.curve_density as f64))
            .collect();
        let vals: Vec<Result<(f64, bool)>> = ts
            .par_iter()
            .map(|&t| modulus(f, alpha, t, p, &self.quadrature, &self.modulus).map(|v| (v.value, v.flagged)))
            .collect();
        let mut entries = Vec::with_capacity(ts.len());
        for (t, v) in ts.iter().zip(vals) {
            let (v, fl) = v?;
            if fl {
                flags.push("modulus".to_string());
            }
            entries.push((*t, v));
        }
        ModulusCurve::new(entries)
    }
}

fn running_min(v: &mut [f64]) {
    for i in 1..v.len() {
        if v[i] > v[i - 1] {
            v[i] = v[i - 1];
        }
    }
}

fn dedup(mut flags: Vec<String>) -> Vec<String> {
    flags.sort();
    flags.dedup();
    flags
}

fn tail(table: &ETable, p: f64, from: usize, weight: impl Fn(usize) -> f64, flags: &mut Vec<String>) -> f64 {
    let mut sum = 0.0;
    let mut last = 0.0;
    for nu in from + 1..=table.n_max() {
        last = weight(nu) * table.get(nu).powf(p);
        sum += last;
    }
    if sum > 0.0 && last / sum > 0.01 {
        flags.push("horizon-limited".to_string());
    }
    sum
}

fn head(table: &ETable, p: f64, upto: usize, weight: impl Fn(usize) -> f64) -> f64 {
    (0..=upto.min(table.n_max())).map(|nu| weight(nu) * table.get(nu).powf(p)).sum()
}

fn integral(
    curve: &ModulusCurve,
    p: f64,
    weight: impl Fn(f64) -> f64,
    weight_slope: impl Fn(f64) -> f64,
    delta: f64,
    flags: &mut Vec<String>,
) -> Result<f64> {
    let est = weighted_integral(curve, p, weight, weight_slope, delta)?;
    if est.divergent {
        flags.push("divergent".to_string());
    }
    Ok(est.value)
}

/// Continuous version of `σ_{α,p}` for the integral weight `σ(1/t)`.
fn sigma_cont(x: f64, alpha: f64, p: f64) -> f64 {
    let t = 1.0 / p - 1.0;
    match rate_branch_of(alpha, p) {
        0 => x.powf(alpha),
        1 => x.powf(t) * (x + 1.0).ln().powf(1.0 / p),
        _ => x.powf(t),
    }
}

/// Evaluates one case.
pub fn check_inequality(case: &TheoremCase, env: &Env) -> Result<InequalityReport> {
    case.validate()?;
    let info = case.info()?;
    let id = info.id;
    let prm = &case.params;
    let p = prm.p;
    let seed = env.case_seed(case);
    let mut flags: Vec<String> = Vec::new();
    let mut extras = BTreeMap::new();

    let family = matches!(id, "NIKOLSKII" | "NIK-STECHKIN");
    let fspec = if family {
        case.function.with_degree(case.n()?)
    } else {
        case.function.clone()
    };
    let key = fspec.label();
    let (f, build_flags) = fspec.build_with_flags()?;
    flags.extend(build_flags);
    let companion = |alpha: f64| -> Result<(FunctionSpec, String)> {
        let g = fspec.derivative(alpha)?;
        Ok((g, format!("D[{alpha}]{key}")))
    };
    let horizon = |n: usize| env.horizon.max(2 * n);

    let (lhs, rhs) = match id {
        "TH-DIRECT" => {
            let (a, n) = (case.alpha()?, case.n()?);
            let (g, gkey) = companion(a)?;
            let e = env.solve(&f, &key, p, n)?;
            flags.extend(e.flags);
            let (tg, fl) = env.e_table(&g, &gkey, p, horizon(n))?;
            flags.extend(fl);
            let t = tail(&tg, p, n, |nu| (nu as f64).powf(-p), &mut flags);
            let nf = n as f64;
            let rhs = nf.powf(-a) * (tg.get(n) + (nf.powf(p - 1.0) * t).powf(1.0 / p));
            (e.value, rhs)
        }
        "TH-INVERSE" | "TH-INVERSE-SIGMA" => {
            let (a, n) = (case.alpha()?, case.n()?);
            let (g, _) = companion(a)?;
            let (tf, fl) = env.e_table(&f, &key, p, horizon(n))?;
            flags.extend(fl);
            let tn = env.solve(&f, &key, p, n)?;
            let d = FunctionSpec::from_polynomial("T^(a)", weyl(&tn.poly, a));
            let lhs = lp_distance(&g, &d, p, &env.quadrature)?;
            if !lhs.converged {
                flags.push("quadrature".to_string());
            }
            let rhs = if id == "TH-INVERSE" {
                let t = tail(&tf, p, n, |nu| (nu as f64).powf(a * p - 1.0), &mut flags);
                (n as f64).powf(a) * tf.get(n) + t.powf(1.0 / p)
            } else {
                let t = tail(&tf, p, n, |nu| sigma_rate(nu, a, p).powf(p) / nu as f64, &mut flags);
                sigma_rate(n, a, p) * tf.get(n) + t.powf(1.0 / p)
            };
            (lhs.value, rhs)
        }
        "TH-SIMUL" => {
            let (a, n) = (case.alpha()?, case.n()?);
            let (g, gkey) = companion(a)?;
            let tn = env.solve(&f, &key, p, n)?;
            let d = FunctionSpec::from_polynomial("T^(a)", weyl(&tn.poly, a));
            let lhs = lp_distance(&g, &d, p, &env.quadrature)?.value;
            let (tg, fl) = env.e_table(&g, &gkey, p, horizon(n))?;
            flags.extend(fl);
            let t = tail(&tg, p, n, |nu| (nu as f64).powf(-p), &mut flags);
            let nf = n as f64;
            let rhs = rho_rate(n, a, p) * (tg.get(n) + (nf.powf(p - 1.0) * t).powf(1.0 / p));
            (lhs, rhs)
        }
        "TH-MOD-DIRECT" => {
            let (a, b, d) = (case.alpha()?, case.beta()?, case.h()?);
            let r = prm.r.unwrap_or(b.ceil().max(1.0) as u32) as f64;
            let (g, _) = companion(a)?;
            let lhs = env.omega(&f, b + a, d, p, &mut flags)?;
            let wb = env.omega(&g, b, d, p, &mut flags)?;
            let curve = env.curve(&g, r, p, d, &mut flags)?;
            let int = integral(&curve, p, |t| t.powf(p - 2.0), |_| p - 2.0, d, &mut flags)?;
            let rhs = d.powf(a) * (wb + d.powf((1.0 - p) / p) * int);
            (lhs, rhs)
        }
        "TH-MOD-INVERSE" | "TH-MOD-INVERSE-SIGMA" => {
            let (a, b, d) = (case.alpha()?, case.beta()?, case.h()?);
            let (g, _) = companion(a)?;
            let lhs = env.omega(&g, b, d, p, &mut flags)?;
            let curve = env.curve(&f, b + a, p, d, &mut flags)?;
            let rhs = if id == "TH-MOD-INVERSE" {
                let w = p * a + 1.0;
                integral(&curve, p, |t| t.powf(-w), |_| -w, d, &mut flags)?
            } else {
                // σ enters to the power p, matching the sums over E_ν
                let wt = |t: f64| sigma_cont(1.0 / t, a, p).powf(p) / t;
                let ws = |t: f64| {
                    let e = 1e-3;
                    (wt(t * (1.0 + e)).ln() - wt(t).ln()) / (1.0 + e).ln()
                };
                integral(&curve, p, wt, ws, d, &mut flags)?
            };
            (lhs, rhs)
        }
        "JACKSON" => {
            let (b, n) = (case.beta()?, case.n()?);
            let e = env.solve(&f, &key, p, n)?;
            flags.extend(e.flags);
            let rhs = env.omega(&f, b, 1.0 / n as f64, p, &mut flags)?;
            (e.value, rhs)
        }
        "INVERSE-EB" => {
            let (b, n) = (case.beta()?, case.n()?);
            let lhs = env.omega(&f, b, 1.0 / n as f64, p, &mut flags)?;
            let (tf, fl) = env.e_table(&f, &key, p, n)?;
            flags.extend(fl);
            let s = head(&tf, p, n, |nu| (nu as f64 + 1.0).powf(b * p - 1.0));
            (lhs, (n as f64).powf(-b) * s.powf(1.0 / p))
        }
        "TH-JACKSON-FRAC" => {
            let (a, b, n) = (case.alpha()?, case.beta()?, case.n()?);
            let (g, _) = companion(a)?;
            let e = env.solve(&f, &key, p, n)?;
            flags.extend(e.flags);
            let d = 1.0 / n as f64;
            let curve = env.curve(&g, b, p, d, &mut flags)?;
            let int = integral(&curve, p, |t| t.powf(p - 2.0), |_| p - 2.0, d, &mut flags)?;
            (e.value, (n as f64).powf(-(a + 1.0 / p - 1.0)) * int)
        }
        "TH-MOD-FROM-E" | "TH-MOD-FROM-E-SIGMA" => {
            let (a, b, n) = (case.alpha()?, case.beta()?, case.n()?);
            let (g, _) = companion(a)?;
            let lhs = env.omega(&g, b, 1.0 / n as f64, p, &mut flags)?;
            let (tf, fl) = env.e_table(&f, &key, p, horizon(n))?;
            flags.extend(fl);
            let nf = n as f64;
            let s = if id == "TH-MOD-FROM-E" {
                let h = head(&tf, p, n, |nu| (nu as f64 + 1.0).powf((a + b) * p - 1.0));
                let t = tail(&tf, p, n, |nu| (nu as f64).powf(a * p - 1.0), &mut flags);
                nf.powf(-b * p) * h + t
            } else {
                let h = head(&tf, p, n, |nu| {
                    sigma_rate(nu + 1, a, p).powf(p) * (nu as f64 + 1.0).powf(b * p - 1.0)
                });
                let t = tail(&tf, p, n, |nu| sigma_rate(nu, a, p).powf(p) / nu as f64, &mut flags);
                nf.powf(-b * p) * h + t
            };
            (lhs, s.powf(1.0 / p))
        }
        "MOD-LAMBDA" => {
            let (b, d) = (case.beta()?, case.h()?);
            let l = prm.lambda.unwrap_or(1.0);
            let lhs = env.omega(&f, b, l * d, p, &mut flags)?;
            let base = env.omega(&f, b, d, p, &mut flags)?;
            (lhs, (1.0 + l).powf(b + 1.0 / p.min(1.0) - 1.0) * base)
        }
        "NIK-STECHKIN" => {
            let (a, n) = (case.alpha()?, case.n()?);
            let t = polynomial_for(&f, &key, p, n, env, &mut flags)?;
            let h = prm.h.unwrap_or(std::f64::consts::PI / n as f64);
            let wt = FunctionSpec::from_polynomial("T^(a)", weyl(&t, a));
            let lhs = h.powf(a) * lp_norm(&wt, p, &env.quadrature)?.value;
            let tf = FunctionSpec::from_polynomial("T", t);
            let dd = frac_difference(&tf, a, h, &env.modulus.policy)?;
            (lhs, lp_norm(&dd.spec, p, &env.quadrature)?.value)
        }
        "NIKOLSKII" => {
            let n = case.n()?;
            let q = prm.q.unwrap_or(1.0);
            let t = polynomial_for(&f, &key, p, n, env, &mut flags)?;
            let tf = FunctionSpec::from_polynomial("T", t);
            let lhs = lp_norm(&tf, q, &env.quadrature)?.value;
            let rhs = (n as f64).powf(1.0 / p - 1.0 / q) * lp_norm(&tf, p, &env.quadrature)?.value;
            (lhs, rhs)
        }
        "BERNSTEIN" => {
            let (a, n) = (case.alpha()?, case.n()?);
            let mut opts = env.solver.clone();
            opts.seed = seed;
            let r = bernstein_sup(n, a, p, &opts)?;
            flags.push(format!("argmax={}", r.argmax));
            (r.value, bernstein_rate(n, a, p))
        }
        "KROTOV-SLOPE" => {
            let (b, h) = (case.beta()?, case.h()?);
            let lhs = env.omega(&f, b, h, p, &mut flags)?;
            (lhs, h.powf(b + 1.0 / p - 1.0))
        }
        "SHARPNESS" => {
            let n = case.n()?;
            let r = prm.r.or(prm.alpha.and_then(as_natural).map(|k| k as u32)).unwrap_or(1);
            let phi_spec = CorpusSpec::PhiNr { n, r };
            let phi = phi_spec.build()?;
            let fr = CorpusSpec::FR { r }.build()?;
            let s = env.solve(&phi, &phi_spec.label(), p, n)?;
            flags.extend(s.flags.iter().cloned());
            let tf = FunctionSpec::from_polynomial("T", s.poly.clone());
            let lhs = lp_distance(&fr, &tf, p, &env.quadrature)?;
            if !lhs.converged {
                flags.push("quadrature".to_string());
            }
            let dr = FunctionSpec::from_polynomial("T^(r)", weyl(&s.poly, r as f64));
            let rhs = lp_norm(&dr, p, &env.quadrature)?.value;
            // E_n(φ) / (n^{−r} ‖φ^{(r)}‖_p): the single-term bound's failure factor
            let dphi = phi_spec.derivative(r as f64)?;
            let dn = lp_norm(&dphi, p, &env.quadrature)?.value;
            extras.insert("e_n_phi".to_string(), s.value);
            extras.insert("phi_deriv_norm".to_string(), dn);
            extras.insert(
                "single_term_factor".to_string(),
                ratio_of(s.value, (n as f64).powf(-(r as f64)) * dn),
            );
            (lhs.value, rhs)
        }
        "GRUNWALD-ZERO" => {
            let h = case.h()?;
            let a = prm.alpha.unwrap_or(1.0);
            let d = frac_difference(&f, a, h, &env.modulus.policy)?;
            let v = lp_norm(&d.spec, p, &env.quadrature)?;
            if !v.converged {
                flags.push("quadrature".to_string());
            }
            (v.value / h.powf(a), h.powf(1.0 / p - 1.0))
        }
        "EQUIV-E" => {
            let (a, n) = (case.alpha()?, case.n()?);
            let (g, gkey) = companion(a)?;
            let e = env.solve(&f, &key, p, n)?;
            let eg = env.solve(&g, &gkey, p, n)?;
            flags.extend(e.flags);
            flags.extend(eg.flags);
            ((n as f64).powf(a) * e.value, eg.value)
        }
        "EQUIV-MOD" => {
            let (a, b, h) = (case.alpha()?, case.beta()?, case.h()?);
            let (g, _) = companion(a)?;
            let lhs = env.omega(&f, a + b, h, p, &mut flags)?;
            let rhs = env.omega(&g, b, h, p, &mut flags)?;
            (h.powf(-a) * lhs, rhs)
        }
        other => return Err(invalid(format!("no evaluator for {other}"))),
    };

    let ratio = ratio_of(lhs, rhs);
    if ratio.is_infinite() {
        flags.push("infinite-ratio".to_string());
    }
    let flags = dedup(flags);
    let status = if ratio.is_infinite() {
        "infinite"
    } else if flags.iter().any(|f| is_numerical_flag(f)) {
        "flagged"
    } else {
        "ok"
    };
    Ok(InequalityReport {
        case: case.clone(),
        lhs,
        rhs,
        ratio,
        status: status.to_string(),
        flags,
        seed,
        extras,
    })
}

/// Flags that signal a numerical limitation (as opposed to annotations such
/// as the Bernstein argmax or interpolated tables).
pub fn is_numerical_flag(flag: &str) -> bool {
    !(flag.starts_with("argmax=") || flag == "interpolated-table")
}

/// The polynomial a polynomial-inequality case works with: the function
/// itself when it is a trigonometric polynomial, otherwise its best
/// approximation of degree `n`.
fn polynomial_for(
    f: &FunctionSpec,
    key: &str,
    p: f64,
    n: usize,
    env: &Env,
    flags: &mut Vec<String>,
) -> Result<TrigPolynomial> {
    if let Some(t) = f.polynomial() {
        return Ok((**t).clone());
    }
    let s = env.solve(f, key, p, n)?;
    flags.extend(s.flags);
    Ok(s.poly)
}

/// A sweep request: one id over functions and a parameter grid.
#[derive(Clone, Debug, Default, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct SweepConfig {
    pub id: String,
    pub functions: Vec<CorpusSpec>,
    pub p: Vec<f64>,
    pub alpha: Vec<f64>,
    pub beta: Vec<f64>,
    pub n: Vec<usize>,
    pub h: Vec<f64>,
    pub lambda: Vec<f64>,
    pub q: Vec<f64>,
    pub r: Vec<u32>,
}

fn axis<T: Copy>(v: &[T]) -> Vec<Option<T>> {
    if v.is_empty() {
        vec![None]
    } else {
        v.iter().copied().map(Some).collect()
    }
}

impl SweepConfig {
    /// Cartesian product of the grid, one case per combination.
    pub fn cases(&self) -> Vec<TheoremCase> {
        let mut out = Vec::new();
        for f in &self.functions {
            for &p in &self.p {
                for a in axis(&self.alpha) {
                    for b in axis(&self.beta) {
                        for n in axis(&self.n) {
                            for h in axis(&self.h) {
                                for l in axis(&self.lambda) {
                                    for q in axis(&self.q) {
                                        for r in axis(&self.r) {
                                            out.push(TheoremCase {
                                                id: self.id.clone(),
                                                function: f.clone(),
                                                params: CaseParams {
                                                    p,
                                                    alpha: a,
                                                    beta: b,
                                                    n,
                                                    h,
                                                    lambda: l,
                                                    q,
                                                    r,
                                                },
                                            });
                                        }
                                    }
                                }
                            }
                        }
                    }
                }
            }
        }
        out
    }
}

/// Per-group statistics: one group per combination of everything but the
/// scale variable.
#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct GroupSummary {
    pub key: String,
    pub max_ratio: f64,
    pub min_ratio: f64,
    pub stability: f64,
    pub slope: Option<f64>,
    pub slope_r2: Option<f64>,
    pub rhs_slope: Option<f64>,
    pub window: Option<(f64, f64)>,
    pub points: usize,
}

#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct SweepSummary {
    pub id: String,
    pub max_ratio: f64,
    pub min_ratio: f64,
    /// Worst `max/min` of the ratio inside any one-decade window of the scale
    /// variable, over all groups.
    pub stability: f64,
    pub slope: Option<f64>,
    pub slope_r2: Option<f64>,
    pub window: Option<(f64, f64)>,
    pub slope_target: Option<f64>,
    pub slope_tolerance: Option<f64>,
    /// Verdict for slope-type claims; `None` for ratio bands and findings.
    pub pass: Option<bool>,
    pub finding: Option<String>,
    pub infinite: usize,
    pub flagged: usize,
    pub horizon_limited: usize,
    pub groups: Vec<GroupSummary>,
}

#[derive(Debug)]
pub struct SweepOutcome {
    pub reports: Vec<InequalityReport>,
    /// Cases that could not be evaluated, with the reason.
    pub errors: Vec<(TheoremCase, String)>,
    pub summary: SweepSummary,
}

fn scale_value(case: &TheoremCase, scale: Scale) -> Option<f64> {
    match scale {
        Scale::N => case.params.n.map(|n| n as f64),
        Scale::H => case.params.h,
    }
}

/// Worst max/min of positive finite ratios inside any window `[x, 10x]`.
pub fn decade_stability(points: &[(f64, f64)]) -> f64 {
    let mut pts: Vec<(f64, f64)> = points.iter().copied().filter(|p| p.1 > 0.0 && p.1.is_finite()).collect();
    pts.sort_by(|a, b| a.0.total_cmp(&b.0));
    let mut worst = 1.0f64;
    for i in 0..pts.len() {
        let (mut lo, mut hi) = (pts[i].1, pts[i].1);
        for q in &pts[i..] {
            if q.0 > pts[i].0 * 10.0 * (1.0 + 1e-12) {
                break;
            }
            lo = lo.min(q.1);
            hi = hi.max(q.1);
        }
        worst = worst.max(hi / lo);
    }
    worst
}

/// Target exponent and tolerance for slope-type ids; the boolean marks a
/// mismatch as a finding rather than a failure.
pub fn slope_target(case: &TheoremCase) -> Option<(f64, f64, bool)> {
    let p = case.params.p;
    match case.id.as_str() {
        "KROTOV-SLOPE" => case.params.beta.map(|b| (b + 1.0 / p - 1.0, 0.2, false)),
        "GRUNWALD-ZERO" => Some((1.0 / p - 1.0, 0.1, false)),
        "SHARPNESS" => {
            let r = case.params.r.map(f64::from).or(case.params.alpha).unwrap_or(1.0);
            Some((-r, 0.3, false))
        }
        "BERNSTEIN" => {
            let a = case.params.alpha?;
            if rate_branch_of(a, p) == 0 {
                Some((a, 0.1, false))
            } else {
                Some((1.0 / p - 1.0, 0.25, true))
            }
        }
        _ => None,
    }
}

/// Target for the right-hand side slope (SHARPNESS only).
pub fn rhs_slope_target(case: &TheoremCase) -> Option<(f64, f64)> {
    if case.id == "SHARPNESS" {
        Some((1.0 - 1.0 / case.params.p, 0.3))
    } else {
        None
    }
}

pub fn summarize(id: &str, reports: &[InequalityReport]) -> Result<SweepSummary> {
    let info = lookup(id)?;
    let mut groups: BTreeMap<String, Vec<&InequalityReport>> = BTreeMap::new();
    for r in reports {
        groups.entry(r.case.group_key(info.scale)).or_default().push(r);
    }
    let finite: Vec<f64> = reports.iter().map(|r| r.ratio).filter(|r| r.is_finite()).collect();
    let mut gs = Vec::new();
    for (key, rs) in &groups {
        let ratios: Vec<(f64, f64)> = rs
            .iter()
            .filter_map(|r| scale_value(&r.case, info.scale).map(|x| (x, r.ratio)))
            .collect();
        let fr: Vec<f64> = rs.iter().map(|r| r.ratio).filter(|r| r.is_finite()).collect();
        let lhs_pts: Vec<(f64, f64)> = rs
            .iter()
            .filter_map(|r| scale_value(&r.case, info.scale).map(|x| (x, r.lhs)))
            .collect();
        let rhs_pts: Vec<(f64, f64)> = rs
            .iter()
            .filter_map(|r| scale_value(&r.case, info.scale).map(|x| (x, r.rhs)))
            .collect();
        let fit = fit_rate(&lhs_pts).ok();
        let rfit = fit_rate(&rhs_pts).ok();
        gs.push(GroupSummary {
            key: key.clone(),
            max_ratio: fr.iter().copied().fold(f64::NEG_INFINITY, f64::max),
            min_ratio: fr.iter().copied().fold(f64::INFINITY, f64::min),
            stability: decade_stability(&ratios),
            slope: fit.as_ref().map(|f| f.slope),
            slope_r2: fit.as_ref().map(|f| f.r2),
            rhs_slope: rfit.map(|f| f.slope),
            window: fit.map(|f| f.window),
            points: rs.len(),
        });
    }
    let single = if gs.len() == 1 { gs.first() } else { None };
    let mut summary = SweepSummary {
        id: info.id.to_string(),
        max_ratio: finite.iter().copied().fold(f64::NEG_INFINITY, f64::max),
        min_ratio: finite.iter().copied().fold(f64::INFINITY, f64::min),
        stability: gs.iter().map(|g| g.stability).fold(1.0, f64::max),
        slope: single.and_then(|g| g.slope),
        slope_r2: single.and_then(|g| g.slope_r2),
        window: single.and_then(|g| g.window),
        slope_target: None,
        slope_tolerance: None,
        pass: None,
        finding: None,
        infinite: reports.iter().filter(|r| r.ratio.is_infinite()).count(),
        flagged: reports.iter().filter(|r| r.status != "ok").count(),
        horizon_limited: reports.iter().filter(|r| r.flags.iter().any(|f| f == "horizon-limited")).count(),
        groups: gs,
    };
    if info.claim == ClaimKind::Slope {
        if let Some(first) = reports.first() {
            if let Some((target, tol, finding)) = slope_target(&first.case) {
                summary.slope_target = Some(target);
                summary.slope_tolerance = Some(tol);
                let all_in = |f: &dyn Fn(&GroupSummary) -> Option<f64>, t: f64, tol: f64| {
                    !summary.groups.is_empty()
                        && summary.groups.iter().all(|g| f(g).is_some_and(|s| (s - t).abs() <= tol))
                };
                let mut ok = all_in(&|g| g.slope, target, tol);
                if let Some((rt, rtol)) = rhs_slope_target(&first.case) {
                    ok &= all_in(&|g| g.rhs_slope, rt, rtol);
                }
                if finding {
                    if !ok {
                        let got: Vec<String> =
                            summary.groups.iter().map(|g| g.slope.map(fmt_f64).unwrap_or("none".into())).collect();
                        summary.finding = Some(format!(
                            "candidate-set slope {} differs from the expected {} by more than {tol}",
                            got.join(","),
                            fmt_f64(target)
                        ));
                    }
                } else {
                    summary.pass = Some(ok);
                }
            }
        }
    }
    Ok(summary)
}

/// Runs every case of the grid (in parallel) and summarizes.
pub fn sweep(config: &SweepConfig, env: &Env) -> Result<SweepOutcome> {
    lookup(&config.id)?;
    if config.functions.is_empty() {
        return Err(Error::EmptySweep("no functions in the corpus filter".into()));
    }
    if config.p.is_empty() {
        return Err(Error::EmptySweep("no exponents p".into()));
    }
    let mut cases = config.cases();
    cases.sort_by(|a, b| {
        let (ka, kb) = (a.sort_key(), b.sort_key());
        ka.0.cmp(&kb.0)
            .then(ka.1.cmp(&kb.1))
            .then_with(|| ka.2.iter().zip(&kb.2).map(|(x, y)| x.total_cmp(y)).find(|o| o.is_ne()).unwrap_or(std::cmp::Ordering::Equal))
    });
    let results: Vec<Result<InequalityReport>> = cases.par_iter().map(|c| check_inequality(c, env)).collect();
    let mut reports = Vec::new();
    let mut errors = Vec::new();
    for (c, r) in cases.into_iter().zip(results) {
        match r {
            Ok(rep) => reports.push(rep),
            Err(e) => errors.push((c, e.to_string())),
        }
    }
    let summary = summarize(&config.id, &reports)?;
    Ok(SweepOutcome {
        reports,
        errors,
        summary,
    })
}

pub const CSV_COLUMNS: [&str; 13] = [
    "theorem_id",
    "function_kind",
    "p",
    "alpha",
    "beta",
    "n",
    "h",
    "lhs",
    "rhs",
    "ratio",
    "status",
    "flags",
    "seed",
];

fn opt(v: Option<f64>) -> String {
    v.map(fmt_f64).unwrap_or_default()
}

/// Writes reports in the fixed column order.
pub fn write_reports_csv<W: Write>(reports: &[InequalityReport], w: W) -> Result<()> {
    let mut wr = csv::Writer::from_writer(w);
    wr.write_record(CSV_COLUMNS)?;
    for r in reports {
        let c = &r.case.params;
        // SHARPNESS carries r in the alpha column
        let alpha = c.alpha.or(if r.case.id == "SHARPNESS" { c.r.map(f64::from) } else { None });
        wr.write_record([
            r.case.id.clone(),
            r.case.function.kind().to_string(),
            fmt_f64(c.p),
            opt(alpha),
            opt(c.beta),
            c.n.map(|n| n.to_string()).unwrap_or_default(),
            opt(c.h),
            fmt_f64(r.lhs),
            fmt_f64(r.rhs),
            fmt_f64(r.ratio),
            r.status.clone(),
            r.flags.join(";"),
            r.seed.to_string(),
        ])?;
    }
    wr.flush()?;
    Ok(())
}

/// Reads two numeric columns of any CSV with a header row. Empty cells and
/// non-finite values are skipped.
pub fn read_columns<R: Read>(r: R, x: &str, y: &str) -> Result<Vec<(f64, f64)>> {
    let mut rd = csv::Reader::from_reader(r);
    let headers = rd.headers()?.clone();
    let find = |name: &str| {
        headers
            .iter()
            .position(|h| h == name)
            .ok_or_else(|| invalid(format!("column {name:?} not found; have {}", headers.iter().collect::<Vec<_>>().join(","))))
    };
    let (ix, iy) = (find(x)?, find(y)?);
    let mut out = Vec::new();
    for rec in rd.records() {
        let rec = rec?;
        let (sx, sy) = (rec.get(ix).unwrap_or(""), rec.get(iy).unwrap_or(""));
        if let (Ok(a), Ok(b)) = (sx.parse::<f64>(), sy.parse::<f64>()) {
            if a.is_finite() && b.is_finite() {
                out.push((a, b));
            }
        }
    }
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    fn case(id: &str, f: CorpusSpec, params: CaseParams) -> TheoremCase {
        TheoremCase {
            id: id.into(),
            function: f,
            params,
        }
    }

    #[test]
    fn fit_rate_examples() {
        let sq: Vec<(f64, f64)> = (1..=6).map(|i| (i as f64, (i * i) as f64)).collect();
        let f = fit_rate(&sq).unwrap();
        assert!((f.slope - 2.0).abs() < 1e-12 && (f.r2 - 1.0).abs() < 1e-12);
        let c: Vec<(f64, f64)> = (1..=6).map(|i| (i as f64, 5.0)).collect();
        assert!(fit_rate(&c).unwrap().slope.abs() < 1e-12);
        let mut rng = ChaCha8Rng::seed_from_u64(1);
        let noisy: Vec<(f64, f64)> = (1..=40)
            .map(|i| {
                let x = i as f64;
                (x, x.powi(-2) * (1.0 + 0.05 * rng.gen_range(-1.0..1.0)))
            })
            .collect();
        assert!((fit_rate(&noisy).unwrap().slope + 2.0).abs() < 0.1);
        assert!(matches!(fit_rate(&sq[..3]), Err(Error::TooFewPoints { .. })));
        assert!(matches!(fit_rate(&[(1.0, 1.0), (2.0, 0.0), (3.0, 1.0), (4.0, 1.0)]), Err(Error::NonPositiveData { .. })));
    }

    #[test]
    fn unknown_ids_suggest_neighbours() {
        match lookup("TH-DIRCT") {
            Err(Error::UnknownTheorem { suggestions, .. }) => assert!(suggestions.starts_with("TH-DIRECT")),
            other => panic!("unexpected {other:?}"),
        }
        assert!(lookup("jackson").is_ok());
        assert_eq!(registry_ids().len(), 21);
    }

    #[test]
    fn hypothesis_gating() {
        let bad = case(
            "TH-INVERSE",
            CorpusSpec::SignSin,
            CaseParams { p: 0.5, alpha: Some(0.5), n: Some(4), ..Default::default() },
        );
        assert!(matches!(bad.validate(), Err(Error::Hypothesis { .. })));
        let ok = case(
            "TH-INVERSE",
            CorpusSpec::SignSin,
            CaseParams { p: 0.5, alpha: Some(1.5), n: Some(4), ..Default::default() },
        );
        assert!(ok.validate().is_ok());
        let bad = case(
            "TH-MOD-DIRECT",
            CorpusSpec::SignSin,
            CaseParams { p: 0.5, alpha: Some(0.2), beta: Some(0.5), h: Some(0.1), ..Default::default() },
        );
        assert!(bad.validate().is_err());
        let bad = case(
            "NIK-STECHKIN",
            CorpusSpec::Dirichlet { n: 8 },
            CaseParams { p: 0.5, alpha: Some(1.0), n: Some(8), h: Some(1.0), ..Default::default() },
        );
        assert!(bad.validate().is_err());
        let bad = case("JACKSON", CorpusSpec::SignSin, CaseParams { p: 1.5, beta: Some(1.0), n: Some(4), ..Default::default() });
        assert!(bad.validate().is_err());
    }

    #[test]
    fn direct_theorem_on_polynomials_is_zero_over_zero() {
        let t = CorpusSpec::Fejer { n: 3 };
        let c = case("TH-DIRECT", t, CaseParams { p: 0.5, alpha: Some(1.0), n: Some(4), ..Default::default() });
        let r = check_inequality(&c, &Env::default()).unwrap();
        assert_eq!((r.lhs, r.rhs, r.ratio), (0.0, 0.0, 0.0));
        assert_eq!(r.status, "ok", "{:?}", r.flags);
    }

    #[test]
    fn mod_lambda_constant_and_unit_lambda() {
        let env = Env::default();
        let c = case(
            "MOD-LAMBDA",
            CorpusSpec::Jump { d0: 2.0, jumps: vec![] },
            CaseParams { p: 0.5, beta: Some(1.0), h: Some(0.1), lambda: Some(2.0), ..Default::default() },
        );
        let r = check_inequality(&c, &env).unwrap();
        assert_eq!(r.ratio, 0.0);
        let c = case(
            "MOD-LAMBDA",
            CorpusSpec::SignSin,
            CaseParams { p: 0.5, beta: Some(1.0), h: Some(0.1), lambda: Some(1.0), ..Default::default() },
        );
        let r = check_inequality(&c, &env).unwrap();
        assert!(r.ratio <= 1.0 + 1e-12);
    }

    #[test]
    fn grunwald_zero_values() {
        let env = Env::default();
        for (p, want) in [(0.5, 2.0 * 0.01 / (std::f64::consts::PI * std::f64::consts::PI)), (1.0, 2.0 / std::f64::consts::PI)] {
            let c = case("GRUNWALD-ZERO", CorpusSpec::SignSin, CaseParams { p, h: Some(0.01), ..Default::default() });
            let r = check_inequality(&c, &env).unwrap();
            assert!((r.lhs / want - 1.0).abs() < 1e-9, "p = {p}: {} vs {want}", r.lhs);
        }
    }

    #[test]
    fn decade_stability_windows() {
        let pts = [(1.0, 1.0), (5.0, 1.5), (20.0, 3.0), (100.0, 3.0)];
        assert!((decade_stability(&pts) - 2.0).abs() < 1e-12);
        assert_eq!(decade_stability(&[(1.0, 0.0), (2.0, f64::INFINITY)]), 1.0);
    }

    #[test]
    fn sweep_rejects_empty_corpus_and_orders_cases() {
        let env = Env::default();
        let cfg = SweepConfig { id: "JACKSON".into(), p: vec![0.5], beta: vec![1.0], n: vec![2], ..Default::default() };
        assert!(matches!(sweep(&cfg, &env), Err(Error::EmptySweep(_))));
        let cfg = SweepConfig {
            id: "KROTOV-SLOPE".into(),
            functions: vec![CorpusSpec::SignSin],
            p: vec![0.5],
            beta: vec![1.0],
            h: vec![0.2, 0.05, 0.1, 0.025],
            ..Default::default()
        };
        let out = sweep(&cfg, &env).unwrap();
        let hs: Vec<f64> = out.reports.iter().map(|r| r.case.params.h.unwrap()).collect();
        assert_eq!(hs, vec![0.025, 0.05, 0.1, 0.2]);
        assert_eq!(out.summary.pass, Some(true));
        let mut buf = Vec::new();
        write_reports_csv(&out.reports, &mut buf).unwrap();
        let text = String::from_utf8(buf.clone()).unwrap();
        assert!(text.starts_with("theorem_id,function_kind,p,alpha,beta,n,h,lhs,rhs,ratio,status,flags,seed\n"));
        let pts = read_columns(&buf[..], "h", "lhs").unwrap();
        assert_eq!(pts.len(), 4);
        assert_eq!(pts[0].1, out.reports[0].lhs);
    }

    #[test]
    fn e_table_interpolates_between_nodes() {
        let env = Env { dense_upto: 4, ..Env::default() };
        assert_eq!(env.table_nodes(10), vec![0, 1, 2, 3, 4, 5, 6, 8, 10]);
        let f = CorpusSpec::SignSin.build().unwrap();
        let (t, flags) = env.e_table(&f, "s", 0.5, 10).unwrap();
        assert!(flags.contains(&"interpolated-table".to_string()));
        assert!(t.is_monotone(1.0));
        assert!(t.get(7) <= t.get(6) && t.get(7) >= t.get(8));
    }

    #[test]
    fn seeds_depend_on_case_not_schedule() {
        let env = Env::default();
        let c = case("JACKSON", CorpusSpec::SignSin, CaseParams { p: 0.5, beta: Some(1.0), n: Some(3), ..Default::default() });
        assert_eq!(env.case_seed(&c), env.case_seed(&c.clone()));
        let mut d = c.clone();
        d.params.n = Some(4);
        assert_ne!(env.case_seed(&c), env.case_seed(&d));
    }
}
