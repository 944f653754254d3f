//! Lagrange interpolation of stored right-hand-side values on the uniform grid.

use super::problem::{SolutionTrace, SolverError};

/// Barycentric interpolation on `points` consecutive uniform nodes.
#[derive(Debug, Clone)]
pub(crate) struct UniformInterp {
    weights: Vec<f64>,
}

impl UniformInterp {
    pub fn new(points: usize) -> Self {
        // w_k = (-1)^k C(m, k)
        let m = points - 1;
        let mut weights = Vec::with_capacity(points);
        let mut c = 1.0;
        for k in 0..=m {
            weights.push(if k % 2 == 0 { c } else { -c });
            c = c * (m - k) as f64 / (k + 1) as f64;
        }
        Self { weights }
    }

    pub fn points(&self) -> usize {
        self.weights.len()
    }

    /// Interpolant at fractional grid position `pos`, using nodes from the
    /// known index range `lo..=hi`. Requires `hi - lo + 1 >= points`.
    pub fn eval<F: Fn(usize) -> f64>(&self, pos: f64, lo: usize, hi: usize, value: F) -> f64 {
        let start = stencil_start(pos, self.points(), lo, hi);
        let x = pos - start as f64;
        let (mut num, mut den) = (0.0, 0.0);
        for (k, w) in self.weights.iter().enumerate() {
            let d = x - k as f64;
            if d == 0.0 {
                return value(start + k);
            }
            let c = w / d;
            num += c * value(start + k);
            den += c;
        }
        num / den
    }
}

/// First index of the `points`-node window centred on `pos`, clamped to
/// `lo..=hi`; ties go to the earlier window.
pub(crate) fn stencil_start(pos: f64, points: usize, lo: usize, hi: usize) -> usize {
    let m = (points - 1) as f64;
    let ideal = (pos - 0.5 * m - 0.5).ceil();
    let max_start = (hi + 1 - points) as f64;
    ideal.clamp(lo as f64, max_start) as usize
}

/// Degree-(N_I - 1) interpolant of the trace's rhs values at `s`.
///
/// `extra` appends a value at the next grid node `t_{n+1}`, as in the
/// corrector stage.
pub fn interpolate_f(
    trace: &SolutionTrace,
    s: f64,
    points: usize,
    extra: Option<(f64, f64)>,
) -> Result<f64, SolverError> {
    let known = trace.rhs_values.len() + usize::from(extra.is_some());
    if points < 1 || known < points {
        return Err(SolverError::InsufficientHistory { needed: points, available: known });
    }
    let tau = trace.tau();
    let t0 = trace.times[0];
    if let Some((te, _)) = extra {
        let expected = t0 + trace.rhs_values.len() as f64 * tau;
        if (te - expected).abs() > 1e-9 * tau {
            return Err(SolverError::InvalidConfig(format!("extra node {te} is not the next grid node {expected}")));
        }
    }
    let pos = (s - t0) / tau;
    let hi = known - 1;
    if pos < -1e-9 || pos > hi as f64 + 1e-9 {
        return Err(SolverError::InvalidConfig(format!("interpolation point {s} outside the known range")));
    }
    let f = &trace.rhs_values;
    let value = |i: usize| if i < f.len() { f[i] } else { extra.map_or(f64::NAN, |e| e.1) };
    Ok(UniformInterp::new(points).eval(pos, 0, hi, value))
}
