use std::f64::consts::PI;

use fichera::guides::curve::log_spaced;
use fichera::guides::{LambdaCurve, LambdaSample};
use fichera::sturm::{bargmann_bound, find_lstar, mu_sample, solve_sturm, SturmProblem};
use proptest::prelude::*;

const PI2: f64 = PI * PI;
const LAMBDA_INF: f64 = 0.9291205 * PI2;

/// Monotone stand-in for the guide curve with the right endpoints.
fn model_curve() -> LambdaCurve {
    model_curve_with_rate(3.0)
}

/// Stand-in approaching the threshold like `exp(-rate x3)`; the computed guide curve has rate 1.6728.
fn model_curve_with_rate(rate: f64) -> LambdaCurve {
    let samples = log_spaced(1e-3, 10.0, 40)
        .into_iter()
        .map(|x3| LambdaSample {
            x3,
            lambda: LAMBDA_INF - (LAMBDA_INF - 0.5 * PI2) * (-rate * x3).exp(),
            degree: 0,
            mesh_id: "model".into(),
        })
        .collect();
    LambdaCurve::from_samples(samples)
        .unwrap()
        .with_threshold(LAMBDA_INF)
}

#[test]
fn mu_is_continuous_at_zero() {
    let curve = model_curve();
    let t = SturmProblem::new(0.0, &curve);
    let left = solve_sturm(&t.at(-1e-7)).unwrap().mu;
    let mid = solve_sturm(&t.at(0.0)).unwrap().mu;
    let right = solve_sturm(&t.at(1e-7)).unwrap().mu;
    assert!((left - mid).abs() < 1e-5 && (right - mid).abs() < 1e-5);
}

#[test]
fn far_truncation_and_degree_are_immaterial() {
    let curve = model_curve_with_rate(1.6728);
    for l in [-0.6, -0.2, 0.4, 0.9] {
        let base = SturmProblem::new(l, &curve);
        let mu = solve_sturm(&base).unwrap().mu;
        let far = solve_sturm(&SturmProblem {
            r_trunc: 80.0,
            ..base.at(l)
        })
        .unwrap()
        .mu;
        let deg = solve_sturm(&SturmProblem {
            degree: 14,
            ..base.at(l)
        })
        .unwrap()
        .mu;
        assert!((far - mu).abs() < 1e-8 * mu, "L={l}: truncation");
        assert!((deg - mu).abs() < 1e-8 * mu, "L={l}: degree");
    }
}

#[test]
fn derivative_identity_matches_differences() {
    let curve = model_curve();
    let t = SturmProblem::new(0.0, &curve);
    let h = 1e-4;
    for l in [-0.4, 0.3] {
        let d = mu_sample(&t.at(l)).unwrap().derivative();
        let fd = (solve_sturm(&t.at(l + h)).unwrap().mu - solve_sturm(&t.at(l - h)).unwrap().mu)
            / (2.0 * h);
        assert!((d - fd).abs() < 1e-3 * fd.abs(), "L={l}: {d} vs {fd}");
    }
}

#[test]
fn crossing_lies_in_the_negative_window() {
    let curve = model_curve();
    let s = find_lstar(&SturmProblem::new(0.0, &curve), 1e-5).unwrap();
    assert!(s.l_star > -0.9 && s.l_star < 0.0);
    assert!(s.mu_star > 0.5 * PI2 && s.mu_star < LAMBDA_INF);
    assert!((s.mu_star - curve.eval(s.l_star).unwrap()).abs() < 1e-2);
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(16))]

    #[test]
    fn mu_lies_between_potential_extremes(l in -0.9f64..2.0) {
        let curve = model_curve();
        let t = SturmProblem::new(l, &curve);
        let mu = solve_sturm(&t).unwrap().mu;
        let lo = if l < 0.0 { 0.5 * PI2 } else { curve.eval(l).unwrap() };
        let hi = curve.eval(l.min(0.0)).unwrap().max(curve.eval(t.r_trunc).unwrap());
        prop_assert!(mu >= lo - 1e-9 && mu <= hi + 1e-9);
    }

    #[test]
    fn bargmann_bound_decreases_to_one(omega in 0.2f64..2.0, l in 0.0f64..5.0, l0 in -0.5f64..0.0) {
        let a = bargmann_bound(omega, l, l0).unwrap();
        let b = bargmann_bound(omega, l + 1.0, l0).unwrap();
        prop_assert!(a > 1.0 && b > 1.0 && b < a);
    }
}
