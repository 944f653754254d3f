//! Fractional Adams predictor-corrector (product trapezoid) on a fine grid,
//! applied to v = e^{λt}u:
//!
//! ```text
//! v(t) = Σ a_k(t) + 1/Γ(α) ∫_a^t (t-s)^{α-1} G(s, v(s)) ds,   G(s, v) = e^{λs} f(s, e^{-λs} v)
//! ```

use crate::specfun::gamma;

use super::problem::{check_finite, Problem, SolverConfig, SolverError, StartMode};

/// Offset (in coarse steps) at which a singular RL forcing is sampled
/// instead of `a`.
pub(crate) const SINGULAR_OFFSET: f64 = 1e-8;

pub(crate) struct AdamsTrace {
    a: f64,
    h: f64,
    alpha: f64,
    lambda: f64,
    gamma_alpha: f64,
    v: Vec<f64>,
    g: Vec<f64>,
}

fn g_eval(p: &Problem, s: f64, v: f64) -> f64 {
    let e = (p.lambda() * s).exp();
    e * p.rhs(s, v / e)
}

impl AdamsTrace {
    /// Runs `steps` fine steps of size `h` from `a`.
    pub fn run(p: &Problem, h: f64, steps: usize, coarse_tau: f64) -> Result<Self, SolverError> {
        let alpha = p.alpha();
        let a = p.a();
        let ga1 = gamma(alpha + 1.0)?;
        let ga2 = gamma(alpha + 2.0)?;
        let ha = h.powf(alpha);
        let pred_w: Vec<f64> = (0..=steps).map(|i| predictor_weight(alpha, i)).collect();
        let corr_w: Vec<f64> = (0..steps).map(|i| corrector_weight(alpha, i)).collect();

        let t_first = if p.singular_at_start() { a + SINGULAR_OFFSET * coarse_tau } else { a };
        let mut v = Vec::with_capacity(steps + 1);
        let mut g = Vec::with_capacity(steps + 1);
        let v0 = p.untempered_forcing(t_first)?;
        v.push(v0);
        g.push(g_eval(p, t_first, v0));

        for k in 0..steps {
            let t = a + (k + 1) as f64 * h;
            let phi = p.untempered_forcing(t)?;
            let mut pred = 0.0;
            for j in 0..=k {
                pred += pred_w[k - j] * g[j];
            }
            let vp = phi + ha / ga1 * pred;

            let mut corr = first_corrector_weight(alpha, k) * g[0];
            for j in 1..=k {
                corr += corr_w[k - j] * g[j];
            }
            let vk = phi + ha / ga2 * (g_eval(p, t, vp) + corr);
            check_finite(k + 1, t, vk * (-p.lambda() * t).exp())?;
            v.push(vk);
            g.push(g_eval(p, t, vk));
        }
        Ok(Self { a, h, alpha, lambda: p.lambda(), gamma_alpha: gamma(alpha)?, v, g })
    }

    /// u at fine index k.
    pub fn u_at_index(&self, k: usize) -> f64 {
        let t = self.a + k as f64 * self.h;
        (-self.lambda * t).exp() * self.v[k]
    }

    /// u at an arbitrary point of the fine grid's range, from the Volterra
    /// formula with G replaced by its piecewise-linear interpolant.
    pub fn u_at(&self, p: &Problem, s: f64) -> Result<f64, SolverError> {
        let pos = (s - self.a) / self.h;
        let nearest = pos.round();
        if (pos - nearest).abs() < 1e-12 && (nearest as usize) < self.v.len() {
            return Ok(self.u_at_index(nearest as usize));
        }
        let last = self.v.len() - 1;
        let k = (pos.floor() as usize).min(last - 1);
        let alpha = self.alpha;
        let mut acc = 0.0;
        // full segments [r_i, r_{i+1}], i < k, then the partial one [r_k, s]
        for i in 0..=k {
            let p0 = self.a + i as f64 * self.h;
            let (q, gq) = if i < k {
                (p0 + self.h, self.g[i + 1])
            } else {
                let frac = (s - p0) / self.h;
                (s, self.g[i] + frac * (self.g[i + 1] - self.g[i]))
            };
            let big = s - p0;
            let small = (s - q).max(0.0);
            let m0 = (big.powf(alpha) - small.powf(alpha)) / alpha;
            let m1 = big * m0 - (big.powf(alpha + 1.0) - small.powf(alpha + 1.0)) / (alpha + 1.0);
            let slope = (gq - self.g[i]) / (q - p0);
            acc += self.g[i] * m0 + slope * m1;
        }
        let v = p.untempered_forcing(s)? + acc / self.gamma_alpha;
        Ok((-self.lambda * s).exp() * v)
    }
}

/// Below this index the weights are evaluated directly; above it the
/// differences of powers cancel and are summed as binomial series instead.
const SERIES_FROM: usize = 8;

/// Σ_{j ≥ from, step} C(p, j) x^j for |x| ≤ 1/SERIES_FROM.
fn binomial_tail(p: f64, x: f64, from: usize, step: usize) -> f64 {
    let mut coeff = 1.0;
    for j in 0..from {
        coeff *= (p - j as f64) / (j + 1) as f64;
    }
    let mut term = coeff * x.powi(from as i32);
    let mut j = from;
    let mut sum = 0.0;
    while term != 0.0 {
        sum += term;
        if term.abs() < 1e-18 * sum.abs() {
            break;
        }
        for _ in 0..step {
            term *= (p - j as f64) / (j + 1) as f64 * x;
            j += 1;
        }
    }
    sum
}

/// (i+1)^α - i^α.
fn predictor_weight(alpha: f64, i: usize) -> f64 {
    let m = (i + 1) as f64;
    -m.powf(alpha) * (alpha * (-1.0 / m).ln_1p()).exp_m1()
}

/// (i+2)^{α+1} - 2(i+1)^{α+1} + i^{α+1}.
fn corrector_weight(alpha: f64, i: usize) -> f64 {
    let p = alpha + 1.0;
    let m = (i + 1) as f64;
    if i < SERIES_FROM {
        return (m + 1.0).powf(p) - 2.0 * m.powf(p) + (m - 1.0).powf(p);
    }
    2.0 * m.powf(p) * binomial_tail(p, 1.0 / m, 2, 2)
}

/// k^{α+1} - (k-α)(k+1)^α, the weight of the initial node after k steps.
fn first_corrector_weight(alpha: f64, k: usize) -> f64 {
    let kf = k as f64;
    if k < SERIES_FROM {
        return kf.powf(alpha + 1.0) - (kf - alpha) * (kf + 1.0).powf(alpha);
    }
    // with q = (1 + 1/k)^α - 1: k^{α+1} [(α/k - q) + αq/k]
    let x = 1.0 / kf;
    let q = (alpha * x.ln_1p()).exp_m1();
    kf.powf(alpha + 1.0) * (-binomial_tail(alpha, x, 2, 1) + alpha * q * x)
}

/// u at `t_0..t_{count-1}`, either from the Adams scheme or the exact solution.
pub(crate) fn start_block(
    p: &Problem,
    cfg: &SolverConfig,
    count: usize,
) -> Result<(Vec<f64>, Option<AdamsTrace>), SolverError> {
    match cfg.start {
        StartMode::Exact => {
            let exact = p.exact().ok_or(SolverError::MissingExact)?;
            let values = (0..count).map(|j| exact(start_time(p, cfg, j))).collect();
            Ok((values, None))
        }
        StartMode::Adams => {
            let r = cfg.start_refine;
            let tau = cfg.tau(p);
            let trace = AdamsTrace::run(p, tau / r as f64, (count - 1) * r, tau)?;
            let values = (0..count).map(|j| trace.u_at_index(j * r)).collect();
            Ok((values, Some(trace)))
        }
    }
}

/// Time at which node j is evaluated; a singular RL start is shifted off `a`.
pub(crate) fn start_time(p: &Problem, cfg: &SolverConfig, j: usize) -> f64 {
    if j == 0 && p.singular_at_start() {
        p.a() + SINGULAR_OFFSET * cfg.tau(p)
    } else {
        cfg.time(p, j)
    }
}

/// `(t_j, u_j)` for j = 0..N_I-1.
pub fn starting_values(p: &Problem, cfg: &SolverConfig) -> Result<Vec<(f64, f64)>, SolverError> {
    if cfg.start_refine == 0 || cfg.interp_points == 0 {
        return Err(SolverError::InvalidConfig("start_refine and interp_points must be positive".into()));
    }
    let count = cfg.interp_points.min(cfg.steps + 1);
    let (values, _) = start_block(p, cfg, count)?;
    Ok(values.into_iter().enumerate().map(|(j, u)| (cfg.time(p, j), u)).collect())
}
