//! Gauss–Lobatto rules on `[-1, 1]` for Jacobi weights `(1-z)^a (1+z)^b`.
//!
//! The interior nodes of the (N+1)-point Lobatto rule for `(a, b)` are the
//! zeros of the degree-(N-1) orthogonal polynomial for `(a+1, b+1)`. They are
//! found by Newton's method with deflation, starting from Chebyshev points,
//! on the monic three-term recurrence. Interior weights are the Gauss
//! (Christoffel) weights of the `(a+1, b+1)` family divided by `1 - z²`; the
//! two endpoint weights have closed forms in gamma functions.

use std::collections::HashMap;
use std::sync::{Arc, OnceLock, RwLock};

use thiserror::Error;

use crate::specfun::{gamma, ln_gamma};

const NEWTON_MAX_ITERS: usize = 100;
const NEWTON_STEP_TOL: f64 = 1e-15;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum QuadratureError {
    #[error("Jacobi exponents must exceed -1, got a = {a}, b = {b}")]
    InvalidWeight { a: f64, b: f64 },
    #[error("a Lobatto rule needs N >= 1, got {0}")]
    InvalidDegree(usize),
    #[error("Newton iteration for node {index} of the degree-{degree} rule did not converge")]
    NoConvergence { index: usize, degree: usize },
}

/// Jacobi weight `(1-z)^a (1+z)^b` on `[-1, 1]`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct WeightSpec {
    a: f64,
    b: f64,
}

impl WeightSpec {
    pub fn new(a: f64, b: f64) -> Result<Self, QuadratureError> {
        if !(a > -1.0 && b > -1.0) || !a.is_finite() || !b.is_finite() {
            return Err(QuadratureError::InvalidWeight { a, b });
        }
        Ok(Self { a, b })
    }

    /// The unit weight.
    pub fn legendre() -> Self {
        Self { a: 0.0, b: 0.0 }
    }

    /// `(1-z)^(order-1)`, the weight that absorbs the kernel `(t-s)^(order-1)`.
    pub fn kernel(order: f64) -> Result<Self, QuadratureError> {
        Self::new(order - 1.0, 0.0)
    }

    pub fn a(&self) -> f64 {
        self.a
    }

    pub fn b(&self) -> f64 {
        self.b
    }

    /// ∫_{-1}^{1} (1-z)^a (1+z)^b dz.
    pub fn zeroth_moment(&self) -> f64 {
        let (a, b) = (self.a, self.b);
        2f64.powf(a + b + 1.0) * (ln_gamma(a + 1.0) + ln_gamma(b + 1.0) - ln_gamma(a + b + 2.0)).exp()
    }
}

/// Monic three-term recurrence coefficients `(a_k, b_k)` for the Jacobi weight:
/// `π_{k+1}(x) = (x - a_k) π_k(x) - b_k π_{k-1}(x)`, with `b_0` the zeroth moment.
pub fn jacobi_recurrence(w: WeightSpec, k: usize) -> (f64, f64) {
    let (a, b) = (w.a, w.b);
    let kf = k as f64;
    let s = 2.0 * kf + a + b;

    let ak = if k == 0 { (b - a) / (a + b + 2.0) } else { (b * b - a * a) / (s * (s + 2.0)) };

    let bk = match k {
        0 => w.zeroth_moment(),
        // (k+a+b)/(2k+a+b-1) cancels to 1 at k = 1
        1 => 4.0 * (1.0 + a) * (1.0 + b) / ((2.0 + a + b).powi(2) * (3.0 + a + b)),
        _ => 4.0 * kf * (kf + a) * (kf + b) * (kf + a + b) / (s * s * (s + 1.0) * (s - 1.0)),
    };
    (ak, bk)
}

/// Value and derivative of the monic degree-`n` polynomial, plus the value of
/// the degree-`n-1` one, given the recurrence coefficients.
fn monic_eval(rec: &[(f64, f64)], n: usize, x: f64) -> (f64, f64, f64) {
    let (mut p_prev, mut p) = (0.0, 1.0);
    let (mut dp_prev, mut dp) = (0.0, 0.0);
    for (k, &(ak, bk)) in rec.iter().enumerate().take(n) {
        let bk = if k == 0 { 0.0 } else { bk };
        let p_next = (x - ak) * p - bk * p_prev;
        let dp_next = p + (x - ak) * dp - bk * dp_prev;
        p_prev = p;
        p = p_next;
        dp_prev = dp;
        dp = dp_next;
    }
    (p, dp, p_prev)
}

/// Zeros of the monic degree-`n` polynomial, ascending.
fn polynomial_zeros(rec: &[(f64, f64)], n: usize) -> Result<Vec<f64>, QuadratureError> {
    let mut roots: Vec<f64> = Vec::with_capacity(n);
    for j in 0..n {
        let mut x = -((2 * j + 1) as f64 * std::f64::consts::PI / (2 * n) as f64).cos();
        let mut converged = false;
        for _ in 0..NEWTON_MAX_ITERS {
            let (p, dp, _) = monic_eval(rec, n, x);
            let deflate: f64 = roots.iter().map(|r| 1.0 / (x - r)).sum();
            let dx = p / (dp - p * deflate);
            x -= dx;
            if !x.is_finite() {
                break;
            }
            if dx.abs() <= NEWTON_STEP_TOL * x.abs().max(1.0) {
                converged = true;
                break;
            }
        }
        if !converged || !(x > -1.0 && x < 1.0) {
            return Err(QuadratureError::NoConvergence { index: j, degree: n });
        }
        roots.push(x);
    }
    roots.sort_by(|a, b| a.total_cmp(b));
    // one undeflated polish step per root
    for r in roots.iter_mut() {
        let (p, dp, _) = monic_eval(rec, n, *r);
        if dp != 0.0 {
            *r -= p / dp;
        }
    }
    Ok(roots)
}

fn gamma_ratio(num: [f64; 2], den: [f64; 2]) -> f64 {
    let direct = || -> Option<f64> {
        let v = gamma(num[0]).ok()? * gamma(num[1]).ok()? / (gamma(den[0]).ok()? * gamma(den[1]).ok()?);
        v.is_finite().then_some(v)
    };
    direct().unwrap_or_else(|| (ln_gamma(num[0]) + ln_gamma(num[1]) - ln_gamma(den[0]) - ln_gamma(den[1])).exp())
}

/// An (N+1)-point Gauss–Lobatto rule; immutable once built.
#[derive(Debug, Clone, PartialEq)]
pub struct QuadratureRule {
    weight: WeightSpec,
    nodes: Vec<f64>,
    weights: Vec<f64>,
}

impl QuadratureRule {
    pub fn weight(&self) -> WeightSpec {
        self.weight
    }

    pub fn nodes(&self) -> &[f64] {
        &self.nodes
    }

    pub fn weights(&self) -> &[f64] {
        &self.weights
    }

    /// Degree N of the rule (it has N+1 nodes).
    pub fn degree(&self) -> usize {
        self.nodes.len() - 1
    }

    /// Σ_j w_j g(z_j).
    pub fn apply<F: Fn(f64) -> f64>(&self, g: F) -> f64 {
        self.nodes.iter().zip(&self.weights).map(|(&z, &w)| w * g(z)).sum()
    }

    /// Like [`apply`](Self::apply) for integrands that can fail.
    pub fn try_apply<E, F: FnMut(f64) -> Result<f64, E>>(&self, mut g: F) -> Result<f64, E> {
        let mut acc = 0.0;
        for (&z, &w) in self.nodes.iter().zip(&self.weights) {
            acc += w * g(z)?;
        }
        Ok(acc)
    }
}

/// Free-function form of [`QuadratureRule::apply`].
pub fn apply_rule<F: Fn(f64) -> f64>(r: &QuadratureRule, g: F) -> f64 {
    r.apply(g)
}

/// Builds the (N+1)-point Gauss–Lobatto rule for `w`.
pub fn gauss_lobatto(w: WeightSpec, n: usize) -> Result<QuadratureRule, QuadratureError> {
    if n < 1 {
        return Err(QuadratureError::InvalidDegree(n));
    }
    let (a, b) = (w.a, w.b);
    let nf = n as f64;
    let scale = 2f64.powf(a + b + 1.0);

    let w_left = scale
        * (b + 1.0)
        * gamma_ratio([nf, nf + a + 1.0], [nf + b + 1.0, nf + a + b + 2.0])
        * gamma_ratio([b + 1.0, b + 1.0], [1.0, 1.0]);
    let w_right = scale
        * (a + 1.0)
        * gamma_ratio([nf, nf + b + 1.0], [nf + a + 1.0, nf + a + b + 2.0])
        * gamma_ratio([a + 1.0, a + 1.0], [1.0, 1.0]);

    let mut nodes = Vec::with_capacity(n + 1);
    let mut weights = Vec::with_capacity(n + 1);
    nodes.push(-1.0);
    weights.push(w_left);

    let interior = n - 1;
    if interior > 0 {
        let shifted = WeightSpec { a: a + 1.0, b: b + 1.0 };
        let rec: Vec<(f64, f64)> = (0..interior).map(|k| jacobi_recurrence(shifted, k)).collect();
        let norm: f64 = rec.iter().map(|&(_, bk)| bk).product();
        for x in polynomial_zeros(&rec, interior)? {
            let (_, dp, p_lower) = monic_eval(&rec, interior, x);
            let gauss_weight = norm / (p_lower * dp);
            nodes.push(x);
            weights.push(gauss_weight / (1.0 - x * x));
        }
    }

    nodes.push(1.0);
    weights.push(w_right);
    Ok(QuadratureRule { weight: w, nodes, weights })
}

type CacheKey = (u64, u64, usize);

fn cache() -> &'static RwLock<HashMap<CacheKey, Arc<QuadratureRule>>> {
    static CACHE: OnceLock<RwLock<HashMap<CacheKey, Arc<QuadratureRule>>>> = OnceLock::new();
    CACHE.get_or_init(|| RwLock::new(HashMap::new()))
}

/// [`gauss_lobatto`] memoized per `(a, b, N)`; safe to call from any thread.
pub fn cached_gauss_lobatto(w: WeightSpec, n: usize) -> Result<Arc<QuadratureRule>, QuadratureError> {
    let key = (w.a.to_bits(), w.b.to_bits(), n);
    if let Some(rule) = cache().read().expect("quadrature cache poisoned").get(&key) {
        return Ok(Arc::clone(rule));
    }
    let rule = Arc::new(gauss_lobatto(w, n)?);
    let mut guard = cache().write().expect("quadrature cache poisoned");
    Ok(Arc::clone(guard.entry(key).or_insert(rule)))
}
