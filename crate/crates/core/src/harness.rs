//! Convergence studies: step-halving sweeps, error/order tables and CSV output.

use std::fmt::Write as _;
use std::sync::Arc;
use std::time::Instant;

use rayon::prelude::*;
use serde::Deserialize;
use thiserror::Error;

use crate::expr::{parse, Bindings, Expr, Var};
use crate::solver::{
    example2_problem, example3_problem, solve, DerivativeKind, ExactFn, Problem, SolutionTrace, SolverConfig, StartMode,
};

#[derive(Debug, Clone, PartialEq, Error)]
pub enum ConfigError {
    #[error("{0}")]
    Invalid(String),
    #[error("malformed report: {0}")]
    Report(String),
}

fn invalid<T>(msg: impl Into<String>) -> Result<T, crate::Error> {
    Err(ConfigError::Invalid(msg.into()).into())
}

/// Built-in problems with known solutions.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Builtin {
    Example2,
    /// `D u = -μu`; `relax` is an alias.
    Example3,
}

impl Builtin {
    pub fn lookup(name: &str) -> Option<Self> {
        match name {
            "example2" => Some(Self::Example2),
            "example3" | "relax" => Some(Self::Example3),
            _ => None,
        }
    }

    pub fn problem(self, alpha: f64, lambda: f64, mu: f64, b: f64) -> Result<Problem, crate::Error> {
        Ok(match self {
            Self::Example2 => example2_problem(alpha, lambda, b)?,
            Self::Example3 => example3_problem(alpha, lambda, mu, b)?,
        })
    }
}

/// `builtin:NAME` or a bare builtin name.
fn builtin_name(src: &str) -> Option<Builtin> {
    let name = src.trim();
    Builtin::lookup(name.strip_prefix("builtin:").unwrap_or(name))
}

/// Compiles `f(t, u)` with `alpha` and `lambda` fixed. Evaluation errors
/// (e.g. a pole of gamma) yield NaN, which the solver reports as a blow-up.
pub fn compile_rhs(e: Expr, alpha: f64, lambda: f64) -> crate::solver::Rhs {
    let base = Bindings::new().with(Var::Alpha, alpha).with(Var::Lambda, lambda);
    Arc::new(move |t, u| e.eval(&base.with(Var::T, t).with(Var::U, u)).unwrap_or(f64::NAN))
}

/// Compiles an exact solution `u(t)`; it may not mention `u`.
pub fn compile_exact(e: Expr, alpha: f64, lambda: f64) -> Result<ExactFn, crate::Error> {
    if e.uses(Var::U) {
        return invalid("the exact solution may depend on t, alpha and lambda only");
    }
    let base = Bindings::new().with(Var::Alpha, alpha).with(Var::Lambda, lambda);
    Ok(Arc::new(move |t| e.eval(&base.with(Var::T, t)).unwrap_or(f64::NAN)))
}

/// Everything needed to build one problem, from either the CLI or a sweep file.
#[derive(Debug, Clone, PartialEq)]
pub struct ProblemDef {
    pub kind: DerivativeKind,
    pub rhs: String,
    pub init: Option<Vec<f64>>,
    pub exact: Option<String>,
    pub mu: f64,
    pub a: f64,
    pub b: f64,
}

impl ProblemDef {
    pub fn build(&self, alpha: f64, lambda: f64) -> Result<Problem, crate::Error> {
        let mut p = match builtin_name(&self.rhs) {
            Some(builtin) => {
                if self.kind != DerivativeKind::Caputo {
                    return invalid("built-in problems are Caputo problems");
                }
                if self.a != 0.0 {
                    return invalid("built-in problems start at a = 0");
                }
                let p = builtin.problem(alpha, lambda, self.mu, self.b)?;
                if let Some(init) = &self.init {
                    if init.as_slice() != p.init() {
                        return invalid(format!(
                            "built-in problem fixes its initial data to {:?}; drop --init or match it",
                            p.init()
                        ));
                    }
                }
                p
            }
            None => {
                let rhs = compile_rhs(parse(&self.rhs)?, alpha, lambda);
                let n = alpha.ceil() as usize;
                let init = self.init.clone().unwrap_or_else(|| vec![0.0; n]);
                Problem::new(self.kind, alpha, lambda, self.a, self.b, init, rhs)?
            }
        };
        if let Some(src) = &self.exact {
            let exact = match builtin_name(src) {
                Some(b) => {
                    let reference = b.problem(alpha, lambda, self.mu, self.b)?;
                    reference.exact().cloned().expect("built-in problems carry exact solutions")
                }
                None => compile_exact(parse(src)?, alpha, lambda)?,
            };
            p = p.with_exact(exact);
        }
        Ok(p)
    }
}

/// A step-halving study, read from a flat JSON document.
#[derive(Debug, Clone, PartialEq, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct Sweep {
    /// Built-in name (`example2`, `example3`, `relax`, optionally prefixed
    /// with `builtin:`) or an expression for f(t, u).
    pub problem: String,
    pub kind: String,
    pub init: Option<Vec<f64>>,
    pub exact: Option<String>,
    pub mu: f64,
    pub alpha: Vec<f64>,
    pub lambda: Vec<f64>,
    /// Strictly decreasing step sizes.
    pub tau: Vec<f64>,
    pub a: f64,
    pub b: f64,
    #[serde(rename = "N")]
    pub quad_degree: usize,
    #[serde(rename = "NI")]
    pub interp_points: usize,
    pub split_t0: Option<f64>,
    pub ntilde: usize,
    pub start_refine: usize,
    /// `adams` or `exact`.
    pub start: String,
    pub corrector_iters: usize,
    /// Fill the `wall_ms` column; off by default so reports are reproducible.
    pub timing: bool,
    pub out: Option<String>,
}

impl Default for Sweep {
    fn default() -> Self {
        let base = SolverConfig::new(1, 2);
        Self {
            problem: "builtin:example2".into(),
            kind: "caputo".into(),
            init: None,
            exact: None,
            mu: 1.0,
            alpha: vec![0.5],
            lambda: vec![0.0],
            tau: halving(0.1, 5),
            a: 0.0,
            b: 1.0,
            quad_degree: base.quad_degree,
            interp_points: 6,
            split_t0: None,
            ntilde: base.ntilde,
            start_refine: base.start_refine,
            start: "adams".into(),
            corrector_iters: base.corrector_iters,
            timing: false,
            out: None,
        }
    }
}

/// `first, first/2, ...` (`count` values).
pub fn halving(first: f64, count: usize) -> Vec<f64> {
    (0..count).map(|i| first / f64::from(1u32 << i)).collect()
}

impl Sweep {
    pub fn from_json(text: &str) -> Result<Self, crate::Error> {
        serde_json::from_str(text).map_err(|e| ConfigError::Invalid(format!("sweep config: {e}")).into())
    }

    pub fn definition(&self) -> Result<ProblemDef, crate::Error> {
        Ok(ProblemDef {
            kind: self.kind.parse().map_err(ConfigError::Invalid)?,
            rhs: self.problem.clone(),
            init: self.init.clone(),
            exact: self.exact.clone(),
            mu: self.mu,
            a: self.a,
            b: self.b,
        })
    }

    pub fn start_mode(&self) -> Result<StartMode, crate::Error> {
        match self.start.as_str() {
            "adams" => Ok(StartMode::Adams),
            "exact" => Ok(StartMode::Exact),
            other => invalid(format!("unknown start mode '{other}' (expected adams or exact)")),
        }
    }

    /// M = (b - a)/τ, which must be an integer.
    pub fn steps_for(&self, tau: f64) -> Result<usize, crate::Error> {
        let m = (self.b - self.a) / tau;
        let rounded = m.round();
        if !(tau > 0.0) || rounded < 1.0 || (m - rounded).abs() > 1e-9 * m.max(1.0) {
            return invalid(format!("tau = {tau} does not divide [{}, {}] into whole steps", self.a, self.b));
        }
        Ok(rounded as usize)
    }

    pub fn config_for(&self, tau: f64) -> Result<SolverConfig, crate::Error> {
        Ok(SolverConfig {
            steps: self.steps_for(tau)?,
            quad_degree: self.quad_degree,
            interp_points: self.interp_points,
            start_refine: self.start_refine,
            split_t0: self.split_t0,
            ntilde: self.ntilde,
            corrector_iters: self.corrector_iters,
            start: self.start_mode()?,
        })
    }

    pub fn validate(&self) -> Result<(), crate::Error> {
        if self.alpha.is_empty() || self.lambda.is_empty() || self.tau.is_empty() {
            return invalid("alpha, lambda and tau lists must be non-empty");
        }
        if self.tau.windows(2).any(|w| !(w[1] < w[0])) {
            return invalid("tau list must be strictly decreasing");
        }
        for &tau in &self.tau {
            self.steps_for(tau)?;
        }
        self.definition()?;
        self.start_mode()?;
        Ok(())
    }
}

/// One (alpha, lambda, tau) solve.
#[derive(Debug, Clone, PartialEq)]
pub struct ReportRow {
    pub alpha: f64,
    pub lambda: f64,
    pub tau: f64,
    pub max_error: Option<f64>,
    pub order: Option<f64>,
    pub wall_ms: Option<f64>,
    /// Why the solve produced no error value.
    pub failure: Option<String>,
}

#[derive(Debug, Clone)]
pub struct ConvergenceReport {
    pub sweep: Sweep,
    pub rows: Vec<ReportRow>,
}

/// log₂(e[i-1]/e[i]) for consecutive entries; `None` when either error is
/// missing, non-positive or non-finite.
pub fn estimate_order(errors: &[Option<f64>]) -> Vec<Option<f64>> {
    errors
        .windows(2)
        .map(|w| match (w[0], w[1]) {
            (Some(x), Some(y)) if x > 0.0 && y > 0.0 && x.is_finite() && y.is_finite() => Some((x / y).log2()),
            _ => None,
        })
        .collect()
}

/// Max error over t_1..t_M against a finer solve whose grid contains the
/// coarse one.
fn error_against(trace: &SolutionTrace, reference: &SolutionTrace) -> Result<f64, String> {
    let ratio = trace.tau() / reference.tau();
    let k = ratio.round() as usize;
    if k == 0 || (ratio - k as f64).abs() > 1e-9 * ratio {
        return Err(format!("reference step does not divide tau = {}", trace.tau()));
    }
    Ok((1..trace.values.len()).map(|j| (trace.values[j] - reference.values[j * k]).abs()).fold(0.0, f64::max))
}

/// Runs every (alpha, lambda, tau) solve, in parallel. Rows are ordered by
/// alpha, then lambda (ascending), then tau (decreasing).
/// A failed solve is recorded in its row and the sweep continues.
pub fn run_sweep(s: &Sweep) -> Result<ConvergenceReport, crate::Error> {
    s.validate()?;
    let def = s.definition()?;
    let mut pairs: Vec<(f64, f64)> = s.alpha.iter().flat_map(|&a| s.lambda.iter().map(move |&l| (a, l))).collect();
    pairs.sort_by(|x, y| x.0.total_cmp(&y.0).then(x.1.total_cmp(&y.1)));
    pairs.dedup();

    let problems = pairs.iter().map(|&(a, l)| def.build(a, l)).collect::<Result<Vec<_>, _>>()?;
    let min_tau = s.tau.iter().copied().fold(f64::INFINITY, f64::min);
    let references: Vec<Option<Result<SolutionTrace, String>>> = problems
        .par_iter()
        .map(|p| {
            if p.exact().is_some() {
                return None;
            }
            let cfg = SolverConfig { start: StartMode::Adams, ..s.config_for(min_tau / 4.0).ok()? };
            Some(solve(p, &cfg).map_err(|e| format!("reference solve failed: {e}")))
        })
        .collect();

    let jobs: Vec<(usize, f64)> = (0..pairs.len()).flat_map(|i| s.tau.iter().map(move |&t| (i, t))).collect();
    let rows: Vec<ReportRow> = jobs
        .par_iter()
        .map(|&(i, tau)| {
            let (alpha, lambda) = pairs[i];
            let started = Instant::now();
            let outcome = s.config_for(tau).map_err(|e| e.to_string()).and_then(|cfg| {
                let trace = solve(&problems[i], &cfg).map_err(|e| e.to_string())?;
                match (&references[i], trace.max_error()) {
                    (_, Some(e)) => Ok(e),
                    (Some(Ok(reference)), None) => error_against(&trace, reference),
                    (Some(Err(msg)), None) => Err(msg.clone()),
                    (None, None) => Err("no exact or reference solution".into()),
                }
            });
            let wall_ms = s.timing.then(|| started.elapsed().as_secs_f64() * 1e3);
            let (max_error, failure) = match outcome {
                Ok(e) => (Some(e), None),
                Err(msg) => (None, Some(msg)),
            };
            ReportRow { alpha, lambda, tau, max_error, order: None, wall_ms, failure }
        })
        .collect();

    let mut rows = rows;
    for group in rows.chunks_mut(s.tau.len()) {
        let errors: Vec<Option<f64>> = group.iter().map(|r| r.max_error).collect();
        for (row, order) in group.iter_mut().skip(1).zip(estimate_order(&errors)) {
            row.order = order;
        }
    }
    Ok(ConvergenceReport { sweep: s.clone(), rows })
}

pub const REPORT_HEADER: &str = "alpha,lambda,tau,max_error,order,wall_ms";

fn opt(x: Option<f64>, f: impl Fn(f64) -> String) -> String {
    x.map(f).unwrap_or_default()
}

impl ConvergenceReport {
    /// CSV with header `alpha,lambda,tau,max_error,order,wall_ms`; missing
    /// values are empty fields.
    pub fn to_csv(&self) -> String {
        let mut out = String::from(REPORT_HEADER);
        out.push('\n');
        for r in &self.rows {
            let _ = writeln!(
                out,
                "{},{},{},{},{},{}",
                r.alpha,
                r.lambda,
                r.tau,
                opt(r.max_error, |e| format!("{e:.6e}")),
                opt(r.order, |o| format!("{o:.4}")),
                opt(r.wall_ms, |w| format!("{w:.3}")),
            );
        }
        out
    }

    /// Rows for one (alpha, lambda) pair.
    pub fn column(&self, alpha: f64, lambda: f64) -> Vec<&ReportRow> {
        self.rows.iter().filter(|r| r.alpha == alpha && r.lambda == lambda).collect()
    }

    pub fn failures(&self) -> impl Iterator<Item = &ReportRow> {
        self.rows.iter().filter(|r| r.failure.is_some())
    }
}

/// Parses a report CSV and checks that every order entry recomputes from the
/// error column of its (alpha, lambda) group.
pub fn read_report_csv(text: &str) -> Result<Vec<ReportRow>, crate::Error> {
    let bad = |msg: String| -> crate::Error { ConfigError::Report(msg).into() };
    let mut lines = text.lines();
    if lines.next() != Some(REPORT_HEADER) {
        return Err(bad("missing or unexpected header".into()));
    }
    let field = |s: &str, line: usize| -> Result<Option<f64>, crate::Error> {
        if s.is_empty() {
            return Ok(None);
        }
        s.parse().map(Some).map_err(|_| bad(format!("line {line}: bad number '{s}'")))
    };
    let mut rows: Vec<ReportRow> = Vec::new();
    for (i, line) in lines.enumerate() {
        let cols: Vec<&str> = line.split(',').collect();
        if cols.len() != 6 {
            return Err(bad(format!("line {}: expected 6 fields", i + 2)));
        }
        let req = |s: &str| field(s, i + 2)?.ok_or_else(|| bad(format!("line {}: empty key field", i + 2)));
        rows.push(ReportRow {
            alpha: req(cols[0])?,
            lambda: req(cols[1])?,
            tau: req(cols[2])?,
            max_error: field(cols[3], i + 2)?,
            order: field(cols[4], i + 2)?,
            wall_ms: field(cols[5], i + 2)?,
            failure: None,
        });
    }
    for (k, pair) in rows.windows(2).enumerate() {
        let (prev, row) = (&pair[0], &pair[1]);
        let same_group = prev.alpha == row.alpha && prev.lambda == row.lambda;
        let expected = if same_group { estimate_order(&[prev.max_error, row.max_error])[0] } else { None };
        let consistent = match (expected, row.order) {
            // errors carry 7 significant digits, orders 4 decimals
            (Some(e), Some(o)) => (e - o).abs() <= 1e-4,
            (None, None) => true,
            _ => false,
        };
        if !consistent {
            return Err(bad(format!("line {}: order does not match the error column", k + 3)));
        }
    }
    Ok(rows)
}

/// The canned sweeps behind `tables --which 1..5`.
pub fn table_sweep(which: u8) -> Option<Sweep> {
    let ex2 = |alpha: f64, ni: usize| Sweep {
        problem: "builtin:example2".into(),
        alpha: vec![alpha],
        lambda: vec![0.0, 2.0, 6.0],
        tau: halving(0.1, 5),
        b: 1.0,
        interp_points: ni,
        ..Sweep::default()
    };
    let ex3 = |lambda: f64| Sweep {
        problem: "builtin:example3".into(),
        mu: 1.0,
        alpha: vec![0.2, 0.9, 1.8],
        lambda: vec![lambda],
        tau: halving(0.05, 4),
        b: 1.1,
        interp_points: 2,
        split_t0: Some(0.1),
        ntilde: 40,
        ..Sweep::default()
    };
    Some(match which {
        1 => ex2(0.5, 7),
        2 => ex2(1.0, 6),
        3 => ex2(1.5, 6),
        4 => ex3(5.0),
        5 => ex3(10.0),
        _ => return None,
    })
}

/// Published maximum errors for the canned tables, as
/// `(alpha, lambda, errors for decreasing tau)`.
pub fn published_errors(which: u8) -> Option<Vec<(f64, f64, Vec<f64>)>> {
    Some(match which {
        1 => vec![
            (0.5, 0.0, vec![1.5207e-4, 4.6202e-7, 1.6877e-9, 8.1135e-12, 3.5305e-14]),
            (0.5, 2.0, vec![2.3516e-5, 1.4040e-7, 6.3106e-10, 2.5491e-12, 1.2794e-14]),
            (0.5, 6.0, vec![1.4300e-6, 3.3507e-8, 2.7846e-10, 1.4371e-12, 7.0913e-15]),
        ],
        2 => vec![
            (1.0, 0.0, vec![8.1108e-5, 7.8788e-7, 1.2817e-8, 2.2418e-10, 3.6193e-12]),
            (1.0, 2.0, vec![1.2528e-5, 1.5673e-7, 2.1909e-9, 3.4124e-11, 5.3461e-13]),
            (1.0, 6.0, vec![1.1365e-6, 2.3299e-8, 3.2657e-10, 4.4768e-12, 6.7955e-14]),
        ],
        3 => vec![
            (1.5, 0.0, vec![6.6386e-5, 9.2847e-7, 1.5767e-8, 2.3505e-10, 3.8498e-12]),
            (1.5, 2.0, vec![9.6009e-6, 1.4297e-7, 2.1338e-9, 3.5138e-11, 5.3434e-13]),
            (1.5, 6.0, vec![8.5068e-7, 1.9943e-8, 3.0437e-10, 3.8203e-12, 6.7433e-14]),
        ],
        4 => vec![
            (0.2, 5.0, vec![5.4805e-4, 1.8749e-4, 5.0838e-5, 1.3492e-5]),
            (0.9, 5.0, vec![1.9043e-5, 4.3478e-6, 1.0851e-6, 3.1549e-7]),
            (1.8, 5.0, vec![2.1461e-6, 5.6685e-7, 1.5416e-7, 4.0386e-8]),
        ],
        5 => vec![
            (0.2, 10.0, vec![2.0162e-4, 8.8563e-5, 2.7211e-5, 7.4508e-6]),
            (0.9, 10.0, vec![7.0054e-6, 1.6897e-6, 4.1757e-7, 1.1169e-7]),
            (1.8, 10.0, vec![4.0825e-7, 1.0286e-7, 2.7730e-8, 7.3208e-9]),
        ],
        _ => return None,
    })
}

/// `t,u[,u_exact,abs_error]` rows for a trace.
pub fn trace_csv(trace: &SolutionTrace) -> String {
    let exact = trace.problem.exact();
    let mut out = String::from(if exact.is_some() { "t,u,u_exact,abs_error\n" } else { "t,u\n" });
    for (&t, &u) in trace.times.iter().zip(&trace.values) {
        match exact {
            Some(f) => {
                let x = f(t);
                let _ = writeln!(out, "{t:e},{u:e},{x:e},{:e}", (u - x).abs());
            }
            None => {
                let _ = writeln!(out, "{t:e},{u:e}");
            }
        }
    }
    out
}
