use std::fmt;
use std::str::FromStr;
use std::sync::Arc;

use thiserror::Error;

use crate::quadrature::QuadratureError;
use crate::specfun::{rgamma, SpecFunError};

pub type Rhs = Arc<dyn Fn(f64, f64) -> f64 + Send + Sync>;
pub type ExactFn = Arc<dyn Fn(f64) -> f64 + Send + Sync>;

/// Magnitude beyond which a step is reported as a blow-up.
pub const BLOW_UP_THRESHOLD: f64 = 1e12;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum SolverError {
    #[error("invalid problem: {0}")]
    InvalidProblem(String),
    #[error("invalid solver configuration: {0}")]
    InvalidConfig(String),
    #[error("solution blew up at step {step} (t = {t}): u = {value:e}")]
    BlowUp { step: usize, t: f64, value: f64 },
    #[error("interpolation needs {needed} known nodes but only {available} are available")]
    InsufficientHistory { needed: usize, available: usize },
    #[error("Riemann-Liouville forcing is singular at t = {0}")]
    SingularForcing(f64),
    #[error("exact start requested but the problem has no exact solution")]
    MissingExact,
    #[error(transparent)]
    Quadrature(#[from] QuadratureError),
    #[error(transparent)]
    SpecFun(#[from] SpecFunError),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum DerivativeKind {
    Caputo,
    RiemannLiouville,
}

impl FromStr for DerivativeKind {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s.to_ascii_lowercase().as_str() {
            "caputo" => Ok(Self::Caputo),
            "rl" | "riemann-liouville" => Ok(Self::RiemannLiouville),
            other => Err(format!("unknown derivative kind '{other}' (expected caputo or rl)")),
        }
    }
}

impl fmt::Display for DerivativeKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Self::Caputo => "caputo",
            Self::RiemannLiouville => "rl",
        })
    }
}

/// A tempered fractional initial value problem `D^{α,λ} u = f(t, u)` on `[a, b]`.
///
/// `init[k]` is `d^k(e^{λt}u)/dt^k` at `a` for the Caputo form and the
/// fractional initial value `D^{α-k-1}(e^{λt}u)` at `a` for the
/// Riemann–Liouville form.
#[derive(Clone)]
pub struct Problem {
    kind: DerivativeKind,
    alpha: f64,
    lambda: f64,
    a: f64,
    b: f64,
    init: Vec<f64>,
    rhs: Rhs,
    exact: Option<ExactFn>,
}

impl fmt::Debug for Problem {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("Problem")
            .field("kind", &self.kind)
            .field("alpha", &self.alpha)
            .field("lambda", &self.lambda)
            .field("a", &self.a)
            .field("b", &self.b)
            .field("init", &self.init)
            .field("exact", &self.exact.is_some())
            .finish()
    }
}

impl Problem {
    /// Validates `0 < α ≤ 2`, `λ ≥ 0`, `b > a` and `init.len() == ⌈α⌉`.
    pub fn new(
        kind: DerivativeKind,
        alpha: f64,
        lambda: f64,
        a: f64,
        b: f64,
        init: Vec<f64>,
        rhs: Rhs,
    ) -> Result<Self, SolverError> {
        let bad = |msg: String| Err(SolverError::InvalidProblem(msg));
        if !(alpha > 0.0 && alpha <= 2.0) {
            return bad(format!("alpha must lie in (0, 2], got {alpha}"));
        }
        if !(lambda >= 0.0) || !lambda.is_finite() {
            return bad(format!("lambda must be finite and non-negative, got {lambda}"));
        }
        if !a.is_finite() || !b.is_finite() || !(b > a) {
            return bad(format!("need a < b, got a = {a}, b = {b}"));
        }
        let n = alpha.ceil() as usize;
        if init.len() != n {
            return bad(format!("alpha = {alpha} needs {n} initial values, got {}", init.len()));
        }
        if init.iter().any(|c| !c.is_finite()) {
            return bad("initial values must be finite".into());
        }
        Ok(Self { kind, alpha, lambda, a, b, init, rhs, exact: None })
    }

    pub fn with_exact(mut self, exact: ExactFn) -> Self {
        self.exact = Some(exact);
        self
    }

    pub fn with_interval(mut self, a: f64, b: f64) -> Result<Self, SolverError> {
        if !a.is_finite() || !b.is_finite() || !(b > a) {
            return Err(SolverError::InvalidProblem(format!("need a < b, got a = {a}, b = {b}")));
        }
        self.a = a;
        self.b = b;
        Ok(self)
    }

    pub fn kind(&self) -> DerivativeKind {
        self.kind
    }

    pub fn alpha(&self) -> f64 {
        self.alpha
    }

    pub fn lambda(&self) -> f64 {
        self.lambda
    }

    pub fn a(&self) -> f64 {
        self.a
    }

    pub fn b(&self) -> f64 {
        self.b
    }

    pub fn init(&self) -> &[f64] {
        &self.init
    }

    /// n = ⌈α⌉.
    pub fn n(&self) -> usize {
        self.init.len()
    }

    pub fn rhs(&self, t: f64, u: f64) -> f64 {
        (self.rhs)(t, u)
    }

    pub fn exact(&self) -> Option<&ExactFn> {
        self.exact.as_ref()
    }

    /// Σ a_k(t) without the e^{-λt} factor, i.e. the forcing of the
    /// equation for v = e^{λt}u.
    pub(crate) fn untempered_forcing(&self, t: f64) -> Result<f64, SolverError> {
        let dt = t - self.a;
        let mut acc = 0.0;
        match self.kind {
            DerivativeKind::Caputo => {
                let mut factor = 1.0;
                for (k, c) in self.init.iter().enumerate() {
                    if k > 0 {
                        factor *= dt / k as f64;
                    }
                    acc += c * factor;
                }
            }
            DerivativeKind::RiemannLiouville => {
                for (k, g) in self.init.iter().enumerate() {
                    if *g == 0.0 {
                        continue;
                    }
                    let e = self.alpha - k as f64 - 1.0;
                    if dt <= 0.0 && e < 0.0 {
                        return Err(SolverError::SingularForcing(t));
                    }
                    let power = if e == 0.0 { 1.0 } else { dt.powf(e) };
                    acc += g * power * rgamma(self.alpha - k as f64);
                }
            }
        }
        Ok(acc)
    }

    /// Whether the forcing is unbounded at `a`: an RL term g_k (t-a)^{α-k-1}
    /// with g_k ≠ 0 and α < k + 1.
    pub(crate) fn singular_at_start(&self) -> bool {
        self.kind == DerivativeKind::RiemannLiouville
            && self.init.iter().enumerate().any(|(k, g)| *g != 0.0 && self.alpha < (k + 1) as f64)
    }
}

/// The forcing term `e^{-λt} Σ a_k(t)` of the Volterra form of the problem.
pub fn volterra_forcing(p: &Problem, t: f64) -> Result<f64, SolverError> {
    if t < p.a {
        return Err(SolverError::InvalidProblem(format!("forcing requested at t = {t} before a = {}", p.a)));
    }
    Ok((-p.lambda * t).exp() * p.untempered_forcing(t)?)
}

/// How the first `N_I` grid values are obtained.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum StartMode {
    /// Fractional Adams predictor-corrector on a refined subgrid.
    Adams,
    /// Exact solution values; requires `Problem::with_exact`.
    Exact,
}

#[derive(Debug, Clone, PartialEq)]
pub struct SolverConfig {
    /// Number of steps M; τ = (b - a)/M.
    pub steps: usize,
    /// Quadrature degree N (the rule has N + 1 nodes).
    pub quad_degree: usize,
    /// Interpolation stencil size N_I, the target order.
    pub interp_points: usize,
    /// Substeps per coarse step in the Adams starting procedure.
    pub start_refine: usize,
    /// Optional split point T0 on the grid.
    pub split_t0: Option<f64>,
    /// Ñ: the unit-weight rule on `[a, T0]` has Ñ + 1 nodes.
    pub ntilde: usize,
    pub corrector_iters: usize,
    pub start: StartMode,
}

impl SolverConfig {
    pub fn new(steps: usize, interp_points: usize) -> Self {
        Self {
            steps,
            quad_degree: 20,
            interp_points,
            start_refine: 64,
            split_t0: None,
            ntilde: 40,
            corrector_iters: 1,
            start: StartMode::Adams,
        }
    }

    pub fn tau(&self, p: &Problem) -> f64 {
        (p.b - p.a) / self.steps as f64
    }

    /// t_j, with t_M = b exactly.
    pub fn time(&self, p: &Problem, j: usize) -> f64 {
        if j == self.steps {
            p.b
        } else {
            p.a + (p.b - p.a) * (j as f64 / self.steps as f64)
        }
    }

    /// Index of T0 on the grid, if a split is configured.
    pub(crate) fn split_index(&self, p: &Problem) -> Result<Option<usize>, SolverError> {
        let Some(t0) = self.split_t0 else { return Ok(None) };
        if !(t0 > p.a && t0 < p.b) {
            return Err(SolverError::InvalidConfig(format!("split point {t0} must lie inside ({}, {})", p.a, p.b)));
        }
        let pos = (t0 - p.a) / self.tau(p);
        let k0 = pos.round();
        if (pos - k0).abs() > 1e-9 * pos.max(1.0) {
            return Err(SolverError::InvalidConfig(format!(
                "split point {t0} is not on the grid of step {}",
                self.tau(p)
            )));
        }
        Ok(Some(k0 as usize))
    }

    pub(crate) fn validate(&self, p: &Problem) -> Result<(), SolverError> {
        let bad = |msg: String| Err(SolverError::InvalidConfig(msg));
        if self.interp_points < 2 {
            return bad(format!("need at least 2 interpolation points, got {}", self.interp_points));
        }
        if self.steps < self.interp_points {
            return bad(format!("steps M = {} must be at least N_I = {}", self.steps, self.interp_points));
        }
        if self.quad_degree < self.interp_points {
            return bad(format!(
                "quadrature degree N = {} must be at least N_I = {}",
                self.quad_degree, self.interp_points
            ));
        }
        if self.start_refine == 0 || self.corrector_iters == 0 {
            return bad("start_refine and corrector_iters must be at least 1".into());
        }
        if let Some(k0) = self.split_index(p)? {
            if self.ntilde < 1 {
                return bad("ntilde must be at least 1".into());
            }
            if k0 + self.interp_points - 1 > self.steps {
                return bad("split point leaves too few steps for the starting procedure".into());
            }
        }
        if self.start == StartMode::Exact && p.exact.is_none() {
            return Err(SolverError::MissingExact);
        }
        Ok(())
    }
}

/// Grid values of a solve.
#[derive(Debug, Clone)]
pub struct SolutionTrace {
    pub times: Vec<f64>,
    pub values: Vec<f64>,
    /// `rhs_values[j] = f(times[j], values[j])` as evaluated by the solver.
    pub rhs_values: Vec<f64>,
    pub problem: Problem,
    pub config: SolverConfig,
}

impl SolutionTrace {
    pub fn tau(&self) -> f64 {
        self.config.tau(&self.problem)
    }

    pub fn len(&self) -> usize {
        self.values.len()
    }

    pub fn is_empty(&self) -> bool {
        self.values.is_empty()
    }

    /// Pointwise `|u_j - u(t_j)|` for j ≥ 1, if the exact solution is known.
    pub fn errors(&self) -> Option<Vec<f64>> {
        let exact = self.problem.exact()?;
        Some(self.times.iter().zip(&self.values).skip(1).map(|(&t, &u)| (u - exact(t)).abs()).collect())
    }

    /// Maximum error over t_1..t_M.
    pub fn max_error(&self) -> Option<f64> {
        self.errors().map(|e| e.into_iter().fold(0.0, f64::max))
    }
}

pub(crate) fn check_finite(step: usize, t: f64, value: f64) -> Result<f64, SolverError> {
    if !value.is_finite() || value.abs() > BLOW_UP_THRESHOLD {
        return Err(SolverError::BlowUp { step, t, value });
    }
    Ok(value)
}
