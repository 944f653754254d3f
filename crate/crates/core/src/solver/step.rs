use crate::quadrature::{cached_gauss_lobatto, gauss_lobatto, QuadratureRule, WeightSpec};
use crate::specfun::gamma;

use super::interp::UniformInterp;
use super::problem::{check_finite, volterra_forcing, Problem, SolutionTrace, SolverConfig, SolverError, StartMode};
use super::start::{start_block, start_time, SINGULAR_OFFSET};

/// Memory of `[a, T0]` in the split scheme: a unit-weight Lobatto rule with
/// the kernel evaluated inside the sum.
struct SplitHistory {
    nodes: Vec<f64>,
    weights: Vec<f64>,
    fvals: Vec<f64>,
}

impl SplitHistory {
    fn eval(&self, alpha: f64, lambda: f64, gamma_alpha: f64, t: f64) -> f64 {
        let mut acc = 0.0;
        for ((s, w), f) in self.nodes.iter().zip(&self.weights).zip(&self.fvals) {
            let d = t - s;
            acc += w * (-lambda * d).exp() * d.powf(alpha - 1.0) * f;
        }
        acc / gamma_alpha
    }
}

struct Stepper<'a> {
    p: &'a Problem,
    rule: &'a QuadratureRule,
    interp: UniformInterp,
    gamma_alpha: f64,
    tau: f64,
    corrector_iters: usize,
    /// Grid index of the left end of the Jacobi-rule interval.
    base: usize,
    origin: f64,
    history: Option<SplitHistory>,
}

impl<'a> Stepper<'a> {
    fn new(p: &'a Problem, cfg: &SolverConfig, rule: &'a QuadratureRule) -> Result<Self, SolverError> {
        Ok(Self {
            p,
            rule,
            interp: UniformInterp::new(cfg.interp_points),
            gamma_alpha: gamma(p.alpha())?,
            tau: cfg.tau(p),
            corrector_iters: cfg.corrector_iters,
            base: 0,
            origin: p.a(),
            history: None,
        })
    }

    /// u_{n+1} and f(t_{n+1}, u_{n+1}) from `f[0..=n]`.
    fn step(&self, n: usize, t_next: f64, f: &[f64]) -> Result<(f64, f64), SolverError> {
        let points = self.interp.points();
        let available = n + 1 - self.base;
        if available < points {
            return Err(SolverError::InsufficientHistory { needed: points, available });
        }
        let (alpha, lambda) = (self.p.alpha(), self.p.lambda());
        let h = t_next - self.origin;
        let span = (n + 1 - self.base) as f64;
        let mut forcing = volterra_forcing(self.p, t_next)?;
        if let Some(hist) = &self.history {
            forcing += hist.eval(alpha, lambda, self.gamma_alpha, t_next);
        }
        let scale = (0.5 * h).powf(alpha) / self.gamma_alpha;
        let z = self.rule.nodes();
        let w = self.rule.weights();
        let last = z.len() - 1;
        let factor = |j: usize| w[j] * (0.5 * h * lambda * (z[j] - 1.0)).exp();
        let pos = |j: usize| self.base as f64 + 0.5 * span * (1.0 + z[j]);

        // The interpolated quantity is g = e^{λt} f, rescaled by e^{-λs} at
        // the target so that nothing overflows.
        let interp_g = |j: usize, hi: usize, value: &dyn Fn(usize) -> f64| {
            let x = pos(j);
            self.interp.eval(x, self.base, hi, |i| value(i) * (lambda * self.tau * (i as f64 - x)).exp())
        };

        let history = |i: usize| f[i];
        let predicted: f64 = (0..=last).map(|j| factor(j) * interp_g(j, n, &history)).sum();
        let mut u = forcing + scale * predicted;

        for _ in 0..self.corrector_iters {
            let fp = self.p.rhs(t_next, u);
            let value = |i: usize| if i == n + 1 { fp } else { f[i] };
            let interior: f64 = (0..last).map(|j| factor(j) * interp_g(j, n + 1, &value)).sum();
            u = forcing + scale * (interior + factor(last) * fp);
        }
        let u = check_finite(n + 1, t_next, u)?;
        Ok((u, self.p.rhs(t_next, u)))
    }
}

/// One predictor-corrector step: u_{n+1} from a trace holding t_0..t_n.
pub fn jpc_step(
    p: &Problem,
    cfg: &SolverConfig,
    trace: &SolutionTrace,
    rule: &QuadratureRule,
) -> Result<f64, SolverError> {
    if trace.is_empty() {
        return Err(SolverError::InsufficientHistory { needed: cfg.interp_points, available: 0 });
    }
    let n = trace.len() - 1;
    let stepper = Stepper::new(p, cfg, rule)?;
    let (u, _) = stepper.step(n, cfg.time(p, n + 1), &trace.rhs_values)?;
    Ok(u)
}

fn kernel_rule(p: &Problem, cfg: &SolverConfig) -> Result<std::sync::Arc<QuadratureRule>, SolverError> {
    Ok(cached_gauss_lobatto(WeightSpec::kernel(p.alpha())?, cfg.quad_degree)?)
}

fn finish(
    p: &Problem,
    cfg: &SolverConfig,
    stepper: &Stepper<'_>,
    mut values: Vec<f64>,
    mut fvals: Vec<f64>,
) -> Result<SolutionTrace, SolverError> {
    for n in values.len() - 1..cfg.steps {
        let (u, f) = stepper.step(n, cfg.time(p, n + 1), &fvals)?;
        values.push(u);
        fvals.push(f);
    }
    Ok(SolutionTrace {
        times: (0..=cfg.steps).map(|j| cfg.time(p, j)).collect(),
        values,
        rhs_values: fvals,
        problem: p.clone(),
        config: cfg.clone(),
    })
}

fn start_rhs(p: &Problem, cfg: &SolverConfig, values: &[f64]) -> Vec<f64> {
    values.iter().enumerate().map(|(j, &u)| p.rhs(start_time(p, cfg, j), u)).collect()
}

/// Solves the problem on the uniform grid; dispatches to [`solve_split`]
/// when `cfg.split_t0` is set.
pub fn solve(p: &Problem, cfg: &SolverConfig) -> Result<SolutionTrace, SolverError> {
    cfg.validate(p)?;
    if cfg.split_t0.is_some() {
        return solve_split(p, cfg);
    }
    let rule = kernel_rule(p, cfg)?;
    let stepper = Stepper::new(p, cfg, &rule)?;
    let (values, _) = start_block(p, cfg, cfg.interp_points)?;
    let fvals = start_rhs(p, cfg, &values);
    finish(p, cfg, &stepper, values, fvals)
}

/// Split scheme: the memory of `[a, T0]` is integrated with a fixed
/// unit-weight Lobatto rule, and the Jacobi rule covers `[T0, t]`.
///
/// The starting procedure supplies every grid value up to
/// `T0 + (N_I - 1)τ` together with u at the Lobatto nodes of `[a, T0]`.
pub fn solve_split(p: &Problem, cfg: &SolverConfig) -> Result<SolutionTrace, SolverError> {
    cfg.validate(p)?;
    let k0 = cfg.split_index(p)?.ok_or_else(|| SolverError::InvalidConfig("solve_split needs split_t0".into()))?;
    let t0 = cfg.time(p, k0);
    let rule = kernel_rule(p, cfg)?;
    let (values, adams) = start_block(p, cfg, k0 + cfg.interp_points)?;
    let fvals = start_rhs(p, cfg, &values);

    let unit = gauss_lobatto(WeightSpec::legendre(), cfg.ntilde)?;
    let half = 0.5 * (t0 - p.a());
    let mut nodes = Vec::with_capacity(unit.nodes().len());
    let mut hist_f = Vec::with_capacity(unit.nodes().len());
    for (j, z) in unit.nodes().iter().enumerate() {
        let mut s = p.a() + half * (1.0 + z);
        if j == 0 && p.singular_at_start() {
            s = p.a() + SINGULAR_OFFSET * cfg.tau(p);
        }
        let u = match (&adams, cfg.start) {
            (Some(trace), StartMode::Adams) => trace.u_at(p, s)?,
            _ => p.exact().ok_or(SolverError::MissingExact)?(s),
        };
        nodes.push(s);
        hist_f.push(p.rhs(s, u));
    }
    let history = SplitHistory { nodes, weights: unit.weights().iter().map(|w| w * half).collect(), fvals: hist_f };

    let mut stepper = Stepper::new(p, cfg, &rule)?;
    stepper.base = k0;
    stepper.origin = t0;
    stepper.history = Some(history);
    finish(p, cfg, &stepper, values, fvals)
}
