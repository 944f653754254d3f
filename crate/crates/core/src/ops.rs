//! Tempered fractional integrals and derivatives of sampled functions.
//!
//! Every operator reduces to the tempered integral
//!
//! ```text
//! I^{σ,λ} w(t) = 1/Γ(σ) ∫_a^t e^{-λ(t-s)} (t-s)^{σ-1} w(s) ds
//! ```
//!
//! evaluated with the Lobatto rule for the weight `(1-z)^{σ-1}` after the map
//! `s = a + (t-a)(1+z)/2`. The Caputo derivative is `I^{n-α,λ}` applied to
//! `(d/dt + λ)^n u`, and the Riemann–Liouville derivative adds the
//! closed-form initial-data correction to the Caputo value.

use std::sync::Arc;

use thiserror::Error;

use crate::quadrature::{cached_gauss_lobatto, QuadratureError, WeightSpec};
use crate::specfun::{gamma, rgamma, SpecFunError};

/// Step of the central-difference fallback for missing derivatives.
pub const NUMERIC_DIFF_STEP: f64 = 1e-5;

pub type ScalarFn = Arc<dyn Fn(f64) -> f64 + Send + Sync>;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum OpsError {
    #[error("evaluation point t = {t} must lie strictly after the lower terminal a = {a}")]
    BeforeTerminal { t: f64, a: f64 },
    #[error("invalid order {order}: {reason}")]
    InvalidOrder { order: f64, reason: &'static str },
    #[error("tempering rate must be finite and non-negative, got {0}")]
    InvalidLambda(f64),
    #[error("quadrature degree must be at least 2, got {0}")]
    InvalidDegree(usize),
    #[error("derivative of order {0} was not supplied and numerical differentiation is disabled")]
    MissingDerivative(usize),
    #[error("Laplace variable out of range: s + lambda = {0} must be positive")]
    LaplaceDomain(f64),
    #[error("expected {expected} initial values, got {got}")]
    InitLength { expected: usize, got: usize },
    #[error(transparent)]
    SpecFun(#[from] SpecFunError),
    #[error(transparent)]
    Quadrature(#[from] QuadratureError),
}

/// Order, tempering rate and lower terminal of an operator.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct TemperedParams {
    order: f64,
    lambda: f64,
    a: f64,
}

impl TemperedParams {
    /// Parameters of the integral `I^{σ,λ}` with σ > 0.
    pub fn integral(sigma: f64, lambda: f64, a: f64) -> Result<Self, OpsError> {
        if !(sigma > 0.0) || !sigma.is_finite() {
            return Err(OpsError::InvalidOrder { order: sigma, reason: "integral order must be positive" });
        }
        Self::checked(sigma, lambda, a)
    }

    /// Parameters of a derivative of non-integer order α > 0.
    pub fn derivative(alpha: f64, lambda: f64, a: f64) -> Result<Self, OpsError> {
        if !(alpha > 0.0) || !alpha.is_finite() || alpha == alpha.floor() {
            return Err(OpsError::InvalidOrder {
                order: alpha,
                reason: "derivative order must be positive and non-integer",
            });
        }
        Self::checked(alpha, lambda, a)
    }

    fn checked(order: f64, lambda: f64, a: f64) -> Result<Self, OpsError> {
        if !(lambda >= 0.0) || !lambda.is_finite() {
            return Err(OpsError::InvalidLambda(lambda));
        }
        Ok(Self { order, lambda, a })
    }

    pub fn order(&self) -> f64 {
        self.order
    }

    pub fn lambda(&self) -> f64 {
        self.lambda
    }

    pub fn a(&self) -> f64 {
        self.a
    }

    /// n = ⌈order⌉.
    pub fn n(&self) -> usize {
        self.order.ceil() as usize
    }
}

/// A function together with (optionally) its first few derivatives.
#[derive(Clone)]
pub struct SampledFunction {
    u: ScalarFn,
    derivs: Vec<ScalarFn>,
    numeric: bool,
}

impl std::fmt::Debug for SampledFunction {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.debug_struct("SampledFunction").field("derivs", &self.derivs.len()).field("numeric", &self.numeric).finish()
    }
}

impl SampledFunction {
    /// Function without analytic derivatives; derivatives fall back to
    /// central differences.
    pub fn new<F: Fn(f64) -> f64 + Send + Sync + 'static>(u: F) -> Self {
        Self { u: Arc::new(u), derivs: Vec::new(), numeric: true }
    }

    /// `derivs[k-1]` is the k-th derivative.
    pub fn with_derivs(u: ScalarFn, derivs: Vec<ScalarFn>) -> Self {
        Self { u, derivs, numeric: true }
    }

    pub fn numeric_fallback(mut self, enabled: bool) -> Self {
        self.numeric = enabled;
        self
    }

    pub fn value(&self, t: f64) -> f64 {
        (self.u)(t)
    }

    /// k-th derivative at t (k = 0 is the function itself).
    ///
    /// Central differences with step [`NUMERIC_DIFF_STEP`] stand in for
    /// missing derivatives up to second order; expect ~1e-7 accuracy there.
    pub fn derivative(&self, k: usize, t: f64) -> Result<f64, OpsError> {
        if k == 0 {
            return Ok(self.value(t));
        }
        if let Some(d) = self.derivs.get(k - 1) {
            return Ok(d(t));
        }
        if !self.numeric || k > 2 {
            return Err(OpsError::MissingDerivative(k));
        }
        let h = NUMERIC_DIFF_STEP;
        let (up, um) = (self.value(t + h), self.value(t - h));
        Ok(match k {
            1 => (up - um) / (2.0 * h),
            _ => (up - 2.0 * self.value(t) + um) / (h * h),
        })
    }

    fn has_analytic(&self, k: usize) -> bool {
        k == 0 || self.derivs.len() >= k
    }

    /// (d/dt + λ)^n u at t, expanded by the Leibniz rule.
    fn tempered_nth(&self, n: usize, lambda: f64, t: f64) -> Result<f64, OpsError> {
        let mut acc = 0.0;
        let mut binom = 1.0;
        for k in 0..=n {
            acc += binom * lambda.powi((n - k) as i32) * self.derivative(k, t)?;
            binom = binom * (n - k) as f64 / (k + 1) as f64;
        }
        Ok(acc)
    }
}

fn check_point(p: &TemperedParams, t: f64, degree: usize) -> Result<(), OpsError> {
    if !(t > p.a) {
        return Err(OpsError::BeforeTerminal { t, a: p.a });
    }
    if degree < 2 {
        return Err(OpsError::InvalidDegree(degree));
    }
    Ok(())
}

/// I^{σ,λ} applied to `w` at `t` with an (N+1)-point rule.
fn integrate_tempered<F>(sigma: f64, lambda: f64, a: f64, t: f64, degree: usize, w: F) -> Result<f64, OpsError>
where
    F: FnMut(f64) -> Result<f64, OpsError>,
{
    let mut w = w;
    let rule = cached_gauss_lobatto(WeightSpec::kernel(sigma)?, degree)?;
    let half = 0.5 * (t - a);
    let sum = rule.try_apply(|z| {
        let s = a + half * (1.0 + z);
        Ok::<_, OpsError>((-lambda * half * (1.0 - z)).exp() * w(s)?)
    })?;
    Ok(half.powf(sigma) * sum / gamma(sigma)?)
}

/// Tempered fractional integral `I^{σ,λ} u(t)` with an (N+1)-point rule.
pub fn tempered_integral(p: &TemperedParams, f: &SampledFunction, t: f64, degree: usize) -> Result<f64, OpsError> {
    check_point(p, t, degree)?;
    integrate_tempered(p.order, p.lambda, p.a, t, degree, |s| Ok(f.value(s)))
}

/// Caputo tempered derivative of order α at t.
pub fn caputo_tempered_derivative(
    p: &TemperedParams,
    f: &SampledFunction,
    t: f64,
    degree: usize,
) -> Result<f64, OpsError> {
    check_point(p, t, degree)?;
    let n = p.n();
    let sigma = n as f64 - p.order;
    integrate_tempered(sigma, p.lambda, p.a, t, degree, |s| f.tempered_nth(n, p.lambda, s))
}

/// Σ_{k<n} e^{-λt} (t-a)^{k-α} / Γ(k-α+1) · d^k(e^{λt}u)/dt^k |_{t=a}.
pub fn initial_data_correction(p: &TemperedParams, f: &SampledFunction, t: f64) -> Result<f64, OpsError> {
    let (alpha, lambda, a) = (p.order, p.lambda, p.a);
    let mut total = 0.0;
    for k in 0..p.n() {
        // d^k (e^{λt} u) at a, divided by e^{λa}
        let vk = f.tempered_nth(k, lambda, a)?;
        total += (-lambda * (t - a)).exp() * (t - a).powf(k as f64 - alpha) * rgamma(k as f64 - alpha + 1.0) * vk;
    }
    Ok(total)
}

/// Riemann–Liouville tempered derivative, computed as the Caputo value plus
/// [`initial_data_correction`]. Needs e^{λt}u to be n times absolutely
/// continuous near `a`.
pub fn rl_tempered_derivative(p: &TemperedParams, f: &SampledFunction, t: f64, degree: usize) -> Result<f64, OpsError> {
    let caputo = caputo_tempered_derivative(p, f, t, degree)?;
    Ok(caputo + initial_data_correction(p, f, t)?)
}

/// The variant RL derivative that subtracts the large-time limit:
/// `D - λ^α u` for 0 < α < 1 and `D - αλ^{α-1} u' - λ^α u` for 1 < α < 2.
///
/// The 1 < α < 2 branch needs the analytic first derivative.
pub fn variant_rl_derivative(p: &TemperedParams, f: &SampledFunction, t: f64, degree: usize) -> Result<f64, OpsError> {
    let (alpha, lambda) = (p.order, p.lambda);
    if alpha > 2.0 {
        return Err(OpsError::InvalidOrder { order: alpha, reason: "variant derivative needs 0 < alpha < 2" });
    }
    if alpha > 1.0 && !f.has_analytic(1) {
        return Err(OpsError::MissingDerivative(1));
    }
    let rl = rl_tempered_derivative(p, f, t, degree)?;
    let mut out = rl - lambda.powf(alpha) * f.value(t);
    if alpha > 1.0 {
        out -= alpha * lambda.powf(alpha - 1.0) * f.derivative(1, t)?;
    }
    Ok(out)
}

/// Exact `D^{α,λ}[e^{-λt} t^μ] = Γ(μ+1)/Γ(μ-α+1) e^{-λt} t^{μ-α}` on `a = 0`.
///
/// Returns NaN unless μ > -1 and t > 0; zero when μ-α+1 is a pole of Γ.
pub fn tempered_power_rule(alpha: f64, lambda: f64, mu: f64, t: f64) -> f64 {
    if !(mu > -1.0) || !(t > 0.0) {
        return f64::NAN;
    }
    let coeff = match gamma(mu + 1.0) {
        Ok(g) => g * rgamma(mu - alpha + 1.0),
        Err(_) => return f64::NAN,
    };
    coeff * (-lambda * t).exp() * t.powf(mu - alpha)
}

fn shifted(lambda: f64, s: f64) -> Result<f64, OpsError> {
    let sl = s + lambda;
    if !(sl > 0.0) {
        return Err(OpsError::LaplaceDomain(sl));
    }
    Ok(sl)
}

/// Laplace multiplier `(λ+s)^{-σ}` of the tempered integral.
pub fn laplace_symbol_integral(sigma: f64, lambda: f64, s: f64) -> Result<f64, OpsError> {
    Ok(shifted(lambda, s)?.powf(-sigma))
}

/// Transform of a derivative split as `multiplier · ũ(s) - subtraction`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct LaplaceSymbol {
    pub multiplier: f64,
    pub subtraction: f64,
}

impl LaplaceSymbol {
    /// The transform of the derivative given the transform `u_hat` of u.
    pub fn apply(&self, u_hat: f64) -> f64 {
        self.multiplier * u_hat - self.subtraction
    }
}

fn check_init(alpha: f64, init: &[f64]) -> Result<(), OpsError> {
    let n = alpha.ceil() as usize;
    if init.len() != n {
        return Err(OpsError::InitLength { expected: n, got: init.len() });
    }
    Ok(())
}

/// Caputo tempered derivative: `(s+λ)^α ũ - Σ_k (s+λ)^{α-k-1} init[k]`,
/// with `init[k] = d^k(e^{λt}u)/dt^k` at 0.
pub fn laplace_symbol_caputo(alpha: f64, lambda: f64, s: f64, init: &[f64]) -> Result<LaplaceSymbol, OpsError> {
    check_init(alpha, init)?;
    let sl = shifted(lambda, s)?;
    let subtraction = init.iter().enumerate().map(|(k, c)| sl.powf(alpha - k as f64 - 1.0) * c).sum();
    Ok(LaplaceSymbol { multiplier: sl.powf(alpha), subtraction })
}

/// Riemann–Liouville tempered derivative: `(s+λ)^α ũ - Σ_k (s+λ)^k init[k]`,
/// with `init[k] = D^{α-k-1}(e^{λt}u)` at 0.
pub fn laplace_symbol_rl(alpha: f64, lambda: f64, s: f64, init: &[f64]) -> Result<LaplaceSymbol, OpsError> {
    check_init(alpha, init)?;
    let sl = shifted(lambda, s)?;
    let subtraction = init.iter().enumerate().map(|(k, g)| sl.powi(k as i32) * g).sum();
    Ok(LaplaceSymbol { multiplier: sl.powf(alpha), subtraction })
}

/// Variant RL derivative for 0 < α < 1:
/// `((λ+s)^α - λ^α) ũ - I^{1-α}(e^{λt}u)|_0`.
pub fn laplace_symbol_variant(alpha: f64, lambda: f64, s: f64, init: f64) -> Result<LaplaceSymbol, OpsError> {
    if !(alpha > 0.0 && alpha < 1.0) {
        return Err(OpsError::InvalidOrder { order: alpha, reason: "only the 0 < alpha < 1 branch is supported" });
    }
    let sl = shifted(lambda, s)?;
    Ok(LaplaceSymbol { multiplier: sl.powf(alpha) - lambda.powf(alpha), subtraction: init })
}

#[cfg(test)]
mod tests {
    use super::*;

    const N: usize = 20;

    fn sf<F: Fn(f64) -> f64 + Send + Sync + 'static>(u: F) -> SampledFunction {
        SampledFunction::new(u)
    }

    #[test]
    fn params_validation() {
        assert!(TemperedParams::integral(0.0, 1.0, 0.0).is_err());
        assert!(TemperedParams::integral(0.5, -1.0, 0.0).is_err());
        assert!(TemperedParams::derivative(1.0, 0.0, 0.0).is_err());
        assert_eq!(TemperedParams::derivative(1.6, 0.0, 0.0).unwrap().n(), 2);
        assert_eq!(TemperedParams::derivative(0.3, 0.0, 0.0).unwrap().n(), 1);
    }

    #[test]
    fn integral_of_zero_and_one() {
        for &(sigma, lambda, t) in &[(0.3, 0.0, 1.0), (1.2, 4.0, 0.5), (0.5, 2.0, 3.0)] {
            let p = TemperedParams::integral(sigma, lambda, 0.0).unwrap();
            assert_eq!(tempered_integral(&p, &sf(|_| 0.0), t, N).unwrap(), 0.0);
        }
        let p = TemperedParams::integral(1.0, 0.0, 0.0).unwrap();
        assert!((tempered_integral(&p, &sf(|_| 1.0), 2.0, N).unwrap() - 2.0).abs() < 1e-14);
    }

    #[test]
    fn integral_power_case() {
        // e^{λs}u = s², closed form Γ(3)/Γ(3.5) e^{-2}; mpmath 0.081445074227820967692
        let p = TemperedParams::integral(0.5, 2.0, 0.0).unwrap();
        let got = tempered_integral(&p, &sf(|s| (-2.0 * s).exp() * s * s), 1.0, N).unwrap();
        assert!((got - 0.081_445_074_227_820_967_692).abs() < 1e-14);
    }

    #[test]
    fn integral_against_adaptive_quadrature() {
        // mpmath adaptive quadrature, tests/oracles/oracle_values.py
        let p = TemperedParams::integral(0.7, 1.5, 0.0).unwrap();
        let got = tempered_integral(&p, &sf(f64::sin), 0.8, N).unwrap();
        assert!((got - 0.312_406_508_957_441_148_97).abs() < 1e-13);
    }

    #[test]
    fn domain_errors() {
        let p = TemperedParams::integral(0.5, 0.0, 1.0).unwrap();
        assert!(matches!(tempered_integral(&p, &sf(|_| 1.0), 1.0, N), Err(OpsError::BeforeTerminal { .. })));
        assert!(matches!(tempered_integral(&p, &sf(|_| 1.0), 2.0, 1), Err(OpsError::InvalidDegree(1))));
        let d = TemperedParams::derivative(0.5, 1.0, 0.0).unwrap();
        let no_derivs = sf(f64::sin).numeric_fallback(false);
        assert_eq!(caputo_tempered_derivative(&d, &no_derivs, 1.0, N), Err(OpsError::MissingDerivative(1)));
    }

    #[test]
    fn caputo_of_constant() {
        for &alpha in &[0.2, 0.5, 0.9] {
            let p = TemperedParams::derivative(alpha, 0.0, 0.0).unwrap();
            let got = caputo_tempered_derivative(&p, &sf(|_| 3.0), 0.7, N).unwrap();
            assert!(got.abs() < 1e-9, "alpha {alpha}: {got}");
        }
        // with tempering it no longer vanishes but tends to zero at the terminal
        let p = TemperedParams::derivative(0.5, 1.0, 0.0).unwrap();
        let c = SampledFunction::with_derivs(Arc::new(|_| 2.0), vec![Arc::new(|_| 0.0)]);
        let near = caputo_tempered_derivative(&p, &c, 1e-10, N).unwrap();
        let far = caputo_tempered_derivative(&p, &c, 1.0, N).unwrap();
        assert!(far > 0.1 && near.abs() < 1e-4);
    }

    #[test]
    fn caputo_power_case() {
        let (alpha, lambda) = (0.5, 2.0);
        let u: ScalarFn = Arc::new(move |t: f64| (-lambda * t).exp() * t.powi(8));
        let du: ScalarFn = Arc::new(move |t: f64| (-lambda * t).exp() * (8.0 * t.powi(7) - lambda * t.powi(8)));
        let f = SampledFunction::with_derivs(u, vec![du]);
        let p = TemperedParams::derivative(alpha, lambda, 0.0).unwrap();
        let want = 40320.0 / gamma(8.5).unwrap() * (-2.0f64).exp();
        let caputo = caputo_tempered_derivative(&p, &f, 1.0, N).unwrap();
        let rl = rl_tempered_derivative(&p, &f, 1.0, N).unwrap();
        assert!((caputo - want).abs() < 1e-12 * want);
        assert!((rl - want).abs() < 1e-12 * want);
        assert!((tempered_power_rule(alpha, lambda, 8.0, 1.0) - want).abs() < 1e-14 * want);
    }

    #[test]
    fn caputo_against_adaptive_quadrature() {
        let p = TemperedParams::derivative(0.3, 1.0, 0.0).unwrap();
        let f = SampledFunction::with_derivs(Arc::new(f64::cos), vec![Arc::new(|t: f64| -t.sin())]);
        let got = caputo_tempered_derivative(&p, &f, 0.9, N).unwrap();
        assert!((got - 0.184_639_210_445_109_460_3).abs() < 1e-12);
        // central differences lose about seven digits
        let numeric = caputo_tempered_derivative(&p, &sf(f64::cos), 0.9, N).unwrap();
        assert!((numeric - got).abs() < 1e-8);
    }

    #[test]
    fn rl_of_constant() {
        let p = TemperedParams::derivative(0.5, 0.0, 0.0).unwrap();
        let got = rl_tempered_derivative(&p, &sf(|_| 2.0), 0.6, N).unwrap();
        let want = 2.0 * 0.6f64.powf(-0.5) / gamma(0.5).unwrap();
        assert!((got - want).abs() < 1e-13);
    }

    #[test]
    fn rl_of_decaying_exponential() {
        // e^{λt}u ≡ 1
        let p = TemperedParams::derivative(0.3, 1.0, 0.0).unwrap();
        let f = SampledFunction::with_derivs(Arc::new(|t: f64| (-t).exp()), vec![Arc::new(|t: f64| -(-t).exp())]);
        let got = rl_tempered_derivative(&p, &f, 0.5, N).unwrap();
        let want = (-0.5f64).exp() * 0.5f64.powf(-0.3) / gamma(0.7).unwrap();
        assert!((got - want).abs() < 1e-13);
    }

    #[test]
    fn variant_derivative_cases() {
        let p0 = TemperedParams::derivative(0.4, 0.0, 0.0).unwrap();
        let f = sf(|t: f64| 1.0 + t * t);
        let a = variant_rl_derivative(&p0, &f, 0.8, N).unwrap();
        let b = rl_tempered_derivative(&p0, &f, 0.8, N).unwrap();
        assert_eq!(a, b);

        let p = TemperedParams::derivative(0.5, 1.0, 0.0).unwrap();
        let one = SampledFunction::with_derivs(Arc::new(|_| 1.0), vec![Arc::new(|_| 0.0)]);
        assert!(variant_rl_derivative(&p, &one, 30.0, 40).unwrap().abs() < 1e-6);
        assert_eq!(variant_rl_derivative(&p, &sf(|_| 0.0), 2.0, N).unwrap(), 0.0);

        let p15 = TemperedParams::derivative(1.5, 1.0, 0.0).unwrap();
        assert_eq!(variant_rl_derivative(&p15, &sf(|t| t), 1.0, N), Err(OpsError::MissingDerivative(1)));
    }

    #[test]
    fn power_rule_values() {
        let g15 = 0.886_226_925_452_758_0;
        assert!((tempered_power_rule(0.5, 0.0, 0.5, 1.0) - g15).abs() < 1e-15);
        let alpha: f64 = 0.7;
        let want = gamma(alpha + 1.0).unwrap() * (-3.0f64).exp();
        assert!((tempered_power_rule(alpha, 3.0, alpha, 1.0) - want).abs() < 1e-15);
        // μ-α+1 = 0 hits a pole of Γ: the derivative vanishes
        assert_eq!(tempered_power_rule(1.5, 0.0, 0.5, 2.0), 0.0);
        assert!(tempered_power_rule(0.5, 0.0, -1.0, 1.0).is_nan());
    }

    #[test]
    fn laplace_symbols() {
        assert_eq!(laplace_symbol_integral(1.0, 0.0, 2.0).unwrap(), 0.5);
        assert_eq!(laplace_symbol_integral(0.5, 2.0, 2.0).unwrap(), 0.5);
        assert!((laplace_symbol_integral(0.3, 1.0, 1.5).unwrap() - 2.5f64.powf(-0.3)).abs() < 1e-16);
        assert!(matches!(laplace_symbol_integral(0.3, 1.0, -1.0), Err(OpsError::LaplaceDomain(_))));

        let c = laplace_symbol_caputo(0.5, 0.0, 1.0, &[1.0]).unwrap();
        assert_eq!(c.subtraction, 1.0);
        assert_eq!(laplace_symbol_caputo(1.5, 2.0, 1.0, &[0.0, 0.0]).unwrap().subtraction, 0.0);
        assert!(matches!(
            laplace_symbol_caputo(1.5, 2.0, 1.0, &[0.0]),
            Err(OpsError::InitLength { expected: 2, got: 1 })
        ));

        // relaxation equation: (s+λ)^α ũ - (s+λ)^{α-1} = -μ ũ
        let (alpha, lambda, mu, s) = (0.9, 5.0, 1.0, 0.7);
        let sym = laplace_symbol_caputo(alpha, lambda, s, &[1.0]).unwrap();
        let u_hat = sym.subtraction / (sym.multiplier + mu);
        let sl: f64 = s + lambda;
        let want = sl.powf(alpha - 1.0) / (sl.powf(alpha) + mu);
        assert!((u_hat - want).abs() < 1e-15);
        assert!((sym.apply(u_hat) + mu * u_hat).abs() < 1e-15);

        let rl = laplace_symbol_rl(1.5, 1.0, 1.0, &[2.0, 3.0]).unwrap();
        assert!((rl.subtraction - (2.0 + 2.0 * 3.0)).abs() < 1e-15);
        let v = laplace_symbol_variant(0.5, 1.0, 3.0, 0.0).unwrap();
        assert!((v.multiplier - 1.0).abs() < 1e-15);
        assert!(laplace_symbol_variant(1.5, 1.0, 3.0, 0.0).is_err());
    }
}
