//! The two benchmark problems with known solutions.

use std::sync::Arc;

use crate::specfun::{gamma, mittag_leffler, MlParams, SpecFunError};

use super::problem::{DerivativeKind, Problem, SolverError};

/// `e^{-λt}(t^8 + 9/4 t^α)`.
pub fn exact_example2(alpha: f64, lambda: f64, t: f64) -> f64 {
    (-lambda * t).exp() * (t.powi(8) + 2.25 * t.powf(alpha))
}

/// `e^{-λt} E_{α,1}(-μ t^α)`.
pub fn exact_example3(alpha: f64, lambda: f64, mu: f64, t: f64) -> Result<f64, SpecFunError> {
    let ml = mittag_leffler(MlParams::new(alpha, 1.0)?, -mu * t.powf(alpha))?;
    Ok((-lambda * t).exp() * ml)
}

/// Caputo problem on `[0, b]` with zero initial data and the forcing chosen
/// so that [`exact_example2`] is the solution.
pub fn example2_problem(alpha: f64, lambda: f64, b: f64) -> Result<Problem, SolverError> {
    let c1 = gamma(9.0)? / gamma(9.0 - alpha)?;
    let c2 = 2.25 * gamma(alpha + 1.0)?;
    let rhs = Arc::new(move |t: f64, u: f64| {
        (-lambda * t).exp() * (c1 * t.powf(8.0 - alpha) + t.powi(8) + 2.25 * t.powf(alpha) + c2) - u
    });
    let init = vec![0.0; alpha.ceil() as usize];
    Ok(Problem::new(DerivativeKind::Caputo, alpha, lambda, 0.0, b, init, rhs)?
        .with_exact(Arc::new(move |t| exact_example2(alpha, lambda, t))))
}

/// Caputo relaxation `D^{α,λ} u = -μ u` on `[0, b]` with `e^{λt}u = 1`
/// (and zero slope when α > 1) at the origin.
pub fn example3_problem(alpha: f64, lambda: f64, mu: f64, b: f64) -> Result<Problem, SolverError> {
    if !(mu > 0.0) {
        return Err(SolverError::InvalidProblem(format!("mu must be positive, got {mu}")));
    }
    MlParams::new(alpha, 1.0)?;
    let mut init = vec![0.0; alpha.ceil() as usize];
    init[0] = 1.0;
    let rhs = Arc::new(move |_t: f64, u: f64| -mu * u);
    Ok(Problem::new(DerivativeKind::Caputo, alpha, lambda, 0.0, b, init, rhs)?
        .with_exact(Arc::new(move |t| exact_example3(alpha, lambda, mu, t).unwrap_or(f64::NAN))))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn example2_closed_form() {
        assert_eq!(exact_example2(0.5, 2.0, 0.0), 0.0);
        assert_eq!(exact_example2(0.3, 0.0, 1.0), 3.25);
        assert!((exact_example2(0.5, 2.0, 1.0) - 3.25 * (-2.0f64).exp()).abs() < 1e-16);
    }

    #[test]
    fn example3_closed_form() {
        assert_eq!(exact_example3(0.9, 5.0, 1.0, 0.0).unwrap(), 1.0);
        assert!((exact_example3(1.0, 0.0, 1.0, 1.0).unwrap() - (-1.0f64).exp()).abs() < 1e-15);
        // mpmath, tests/oracles/oracle_values.py
        let cases = [
            (0.9, 5.0, 1.0, 0.002_533_912_920_516_176_738_9),
            (0.2, 5.0, 1.1, 0.001_905_555_970_806_331_926_1),
            (1.8, 10.0, 0.55, 0.003_290_543_702_955_113_841_1),
        ];
        for (alpha, lambda, t, want) in cases {
            let got = exact_example3(alpha, lambda, 1.0, t).unwrap();
            assert!((got - want).abs() < 1e-15, "{alpha}: {got}");
        }
    }

    #[test]
    fn problems_satisfy_their_data() {
        let p = example2_problem(1.5, 2.0, 1.0).unwrap();
        assert_eq!(p.init(), &[0.0, 0.0]);
        let q = example3_problem(0.9, 5.0, 1.0, 1.1).unwrap();
        assert_eq!(q.init(), &[1.0]);
        assert_eq!(q.rhs(0.3, 2.0), -2.0);
        assert!(example3_problem(0.9, 5.0, 0.0, 1.1).is_err());
    }
}
