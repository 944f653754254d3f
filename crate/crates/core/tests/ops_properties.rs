//! Identities satisfied by the tempered operators.

mod common;

use std::sync::Arc;

use common::{gauss_legendre_composite, graded_integral};
use proptest::prelude::*;
use tfode::ops::{
    caputo_tempered_derivative, initial_data_correction, laplace_symbol_integral, rl_tempered_derivative,
    tempered_integral, tempered_power_rule, SampledFunction, ScalarFn, TemperedParams,
};
use tfode::specfun::gamma;

fn integral(sigma: f64, lambda: f64, f: &SampledFunction, t: f64, n: usize) -> f64 {
    if t <= 0.0 {
        return 0.0;
    }
    let p = TemperedParams::integral(sigma, lambda, 0.0).unwrap();
    tempered_integral(&p, f, t, n).unwrap()
}

#[test]
fn semigroup_of_integrals() {
    let sin = SampledFunction::new(f64::sin);
    for &lambda in &[0.0, 2.0] {
        for &(s1, s2) in &[(0.3, 0.4), (0.5, 0.5)] {
            let inner_src = sin.clone();
            let inner = SampledFunction::new(move |s| integral(s2, lambda, &inner_src, s, 40));
            for &t in &[0.3, 0.7, 1.0] {
                let nested = integral(s1, lambda, &inner, t, 40);
                let direct = integral(s1 + s2, lambda, &sin, t, 40);
                assert!((nested - direct).abs() <= 1e-8, "lambda {lambda}, ({s1},{s2}), t {t}: {nested} vs {direct}");
            }
        }
    }
}

/// w = I^{α,λ} u for u = t³, with derivatives from (D+λ)^k w = I^{α,λ}[(D+λ)^k u].
fn integrated_cubic(alpha: f64, lambda: f64) -> SampledFunction {
    let u = SampledFunction::new(|t: f64| t.powi(3));
    let du = SampledFunction::new(move |t: f64| 3.0 * t * t + lambda * t.powi(3));
    let ddu = SampledFunction::new(move |t: f64| 6.0 * t + 6.0 * lambda * t * t + lambda * lambda * t.powi(3));
    let w: ScalarFn = Arc::new(move |t| integral(alpha, lambda, &u, t, 40));
    let (w0, w1) = (w.clone(), w.clone());
    let dw: ScalarFn = Arc::new(move |t| integral(alpha, lambda, &du, t, 40) - lambda * w0(t));
    let dw2 = dw.clone();
    let ddw: ScalarFn =
        Arc::new(move |t| integral(alpha, lambda, &ddu, t, 40) - 2.0 * lambda * dw2(t) - lambda * lambda * w1(t));
    SampledFunction::with_derivs(w, vec![dw, ddw]).numeric_fallback(false)
}

#[test]
fn derivative_inverts_integral() {
    for &alpha in &[0.5, 1.5] {
        for &lambda in &[0.0, 2.0] {
            let w = integrated_cubic(alpha, lambda);
            let p = TemperedParams::derivative(alpha, lambda, 0.0).unwrap();
            for &t in &[0.25, 0.6, 1.0] {
                let c = caputo_tempered_derivative(&p, &w, t, 40).unwrap();
                let r = rl_tempered_derivative(&p, &w, t, 40).unwrap();
                let want = t.powi(3);
                assert!((c - want).abs() <= 1e-7, "caputo alpha {alpha} lambda {lambda} t {t}: {c}");
                assert!((r - want).abs() <= 1e-7, "rl alpha {alpha} lambda {lambda} t {t}: {r}");
            }
        }
    }
}

fn tempered_quadratic(lambda: f64) -> SampledFunction {
    let u: ScalarFn = Arc::new(move |t: f64| (-lambda * t).exp() * (1.0 + t + t * t));
    let du: ScalarFn = Arc::new(move |t: f64| (-lambda * t).exp() * (1.0 + 2.0 * t - lambda * (1.0 + t + t * t)));
    let ddu: ScalarFn = Arc::new(move |t: f64| {
        let p = 1.0 + t + t * t;
        let dp = 1.0 + 2.0 * t;
        (-lambda * t).exp() * (2.0 - 2.0 * lambda * dp + lambda * lambda * p)
    });
    SampledFunction::with_derivs(u, vec![du, ddu])
}

#[test]
fn rl_minus_caputo_is_initial_data_correction() {
    for &lambda in &[0.0, 1.0, 3.0] {
        let f = tempered_quadratic(lambda);
        for &alpha in &[0.4, 1.6] {
            let p = TemperedParams::derivative(alpha, lambda, 0.0).unwrap();
            for &t in &[0.2, 0.5, 1.0] {
                let rl = rl_tempered_derivative(&p, &f, t, 20).unwrap();
                let caputo = caputo_tempered_derivative(&p, &f, t, 20).unwrap();
                // e^{λt}u = 1 + t + t², so d^k(e^{λt}u) at 0 is 1 for k = 0, 1
                let closed: f64 = (0..p.n())
                    .map(|k| (-lambda * t).exp() * t.powf(k as f64 - alpha) / gamma(k as f64 - alpha + 1.0).unwrap())
                    .sum();
                assert!((rl - caputo - closed).abs() <= 1e-9, "alpha {alpha} lambda {lambda} t {t}");
                assert!((initial_data_correction(&p, &f, t).unwrap() - closed).abs() <= 1e-12);

                // Caputo of e^{-λt}p(t) is e^{-λt} times the classical Caputo of p
                let classical = if alpha < 1.0 {
                    t.powf(1.0 - alpha) / gamma(2.0 - alpha).unwrap()
                        + 2.0 * t.powf(2.0 - alpha) / gamma(3.0 - alpha).unwrap()
                } else {
                    2.0 * t.powf(2.0 - alpha) / gamma(3.0 - alpha).unwrap()
                };
                let want = (-lambda * t).exp() * classical;
                assert!((caputo - want).abs() <= 1e-12 * (1.0 + want.abs()), "{caputo} vs {want}");
            }
        }
    }
}

#[test]
fn power_rule_matches_quadrature() {
    let (alpha, lambda) = (0.5, 2.0);
    let u: ScalarFn = Arc::new(move |t: f64| (-lambda * t).exp() * t.powi(8));
    let du: ScalarFn = Arc::new(move |t: f64| (-lambda * t).exp() * (8.0 * t.powi(7) - lambda * t.powi(8)));
    let f = SampledFunction::with_derivs(u, vec![du]);
    let p = TemperedParams::derivative(alpha, lambda, 0.0).unwrap();
    for i in 1..=20 {
        let t = i as f64 / 20.0;
        let got = caputo_tempered_derivative(&p, &f, t, 20).unwrap();
        let want = tempered_power_rule(alpha, lambda, 8.0, t);
        assert!((got - want).abs() <= 1e-8, "t {t}: {got} vs {want}");
    }
}

#[test]
fn integral_bound_for_unit_function() {
    let one = SampledFunction::new(|_| 1.0);
    for &sigma in &[0.2, 0.5, 0.9, 1.5, 1.8] {
        let bound = 1.0 / gamma(sigma + 1.0).unwrap();
        for &lambda in &[0.0, 1.0, 5.0] {
            for i in 1..=10 {
                let t = i as f64 / 10.0;
                let v = integral(sigma, lambda, &one, t, 20);
                assert!(v.abs() <= bound * (1.0 + 1e-14), "sigma {sigma} lambda {lambda} t {t}: {v}");
            }
        }
    }
}

#[test]
fn laplace_transform_of_integral() {
    let (sigma, lambda, s) = (0.5, 1.0, 2.0);
    let u = SampledFunction::new(|t: f64| (-t).exp());
    let integrand = |t: f64| (-s * t).exp() * integral(sigma, lambda, &u, t, 20);
    let head = graded_integral(integrand, 0.0, 0.5, 30);
    let tail = gauss_legendre_composite(integrand, 0.5, 40.0, 79);
    let want = laplace_symbol_integral(sigma, lambda, s).unwrap() / (s + 1.0);
    assert!((head + tail - want).abs() <= 1e-6, "{} vs {want}", head + tail);
}

#[test]
fn substantial_derivative_form_agrees() {
    let h = 1e-4;
    for &lambda in &[0.5, 2.0] {
        let f = tempered_quadratic(lambda);
        for &alpha in &[0.4, 1.6] {
            let p = TemperedParams::derivative(alpha, lambda, 0.0).unwrap();
            let n = p.n();
            let sigma = n as f64 - alpha;
            let i = |t: f64| integral(sigma, lambda, &f, t, 30);
            for &t in &[0.4, 0.8] {
                let (ip, i0, im) = (i(t + h), i(t), i(t - h));
                let d1 = (ip - im) / (2.0 * h);
                let outer = if n == 1 {
                    d1 + lambda * i0
                } else {
                    (ip - 2.0 * i0 + im) / (h * h) + 2.0 * lambda * d1 + lambda * lambda * i0
                };
                let rl = rl_tempered_derivative(&p, &f, t, 20).unwrap();
                assert!((outer - rl).abs() <= 1e-4, "alpha {alpha} lambda {lambda} t {t}: {outer} vs {rl}");
            }
        }
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn operators_are_linear(
        c1 in -3.0f64..3.0,
        c2 in -3.0f64..3.0,
        alpha in 0.05f64..1.95,
        lambda in 0.0f64..6.0,
        t in 0.05f64..2.0,
    ) {
        prop_assume!((alpha - 1.0).abs() > 1e-3);
        let u = tempered_quadratic(lambda);
        let v = SampledFunction::with_derivs(
            Arc::new(f64::sin),
            vec![Arc::new(f64::cos), Arc::new(|t: f64| -t.sin())],
        );
        let (uu, vv) = (u.clone(), v.clone());
        let (uu1, vv1) = (u.clone(), v.clone());
        let (uu2, vv2) = (u.clone(), v.clone());
        let combo = SampledFunction::with_derivs(
            Arc::new(move |t| c1 * uu.value(t) + c2 * vv.value(t)),
            vec![
                Arc::new(move |t| c1 * uu1.derivative(1, t).unwrap() + c2 * vv1.derivative(1, t).unwrap()),
                Arc::new(move |t| c1 * uu2.derivative(2, t).unwrap() + c2 * vv2.derivative(2, t).unwrap()),
            ],
        );
        let pi = TemperedParams::integral(alpha, lambda, 0.0).unwrap();
        let pd = TemperedParams::derivative(alpha, lambda, 0.0).unwrap();
        type Op = fn(&TemperedParams, &SampledFunction, f64, usize) -> Result<f64, tfode::ops::OpsError>;
        let ops: [(&TemperedParams, Op); 3] = [
            (&pi, tempered_integral),
            (&pd, caputo_tempered_derivative),
            (&pd, rl_tempered_derivative),
        ];
        for (p, op) in ops {
            let lhs = op(p, &combo, t, 20).unwrap();
            let rhs = c1 * op(p, &u, t, 20).unwrap() + c2 * op(p, &v, t, 20).unwrap();
            prop_assert!((lhs - rhs).abs() <= 1e-11 * (1.0 + rhs.abs()), "{} vs {}", lhs, rhs);
        }
    }
}
