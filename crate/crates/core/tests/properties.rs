use degrobin::coefficients::{check_pointwise_inequality, CoefficientFamily};
use degrobin::grid::{ball_volume, RadialGridFunction};
use degrobin::norms::{combined_holder, lp_norm, marcinkiewicz_quasinorm};
use degrobin::radial_oracle::{solve_boundary_value, RadialExampleSpec};
use degrobin::regimes::{classify, Regime};
use proptest::prelude::*;

/// Adaptive Simpson on `[a, b]`.
fn simpson(f: &dyn Fn(f64) -> f64, a: f64, b: f64, tol: f64) -> f64 {
    fn rule(f: &dyn Fn(f64) -> f64, a: f64, b: f64) -> f64 {
        (b - a) / 6.0 * (f(a) + 4.0 * f(0.5 * (a + b)) + f(b))
    }
    fn go(f: &dyn Fn(f64) -> f64, a: f64, b: f64, whole: f64, tol: f64, depth: u32) -> f64 {
        let m = 0.5 * (a + b);
        let (l, r) = (rule(f, a, m), rule(f, m, b));
        if depth == 0 || (l + r - whole).abs() <= 15.0 * tol {
            l + r + (l + r - whole) / 15.0
        } else {
            go(f, a, m, l, 0.5 * tol, depth - 1) + go(f, m, b, r, 0.5 * tol, depth - 1)
        }
    }
    go(f, a, b, rule(f, a, b), tol, 40)
}

fn theta() -> impl Strategy<Value = f64> {
    (1u32..=1000).prop_map(|k| k as f64 / 1000.0)
}

fn profile_grid(coeffs: &[f64], m: usize) -> RadialGridFunction {
    let nodes: Vec<f64> = (0..=m).map(|i| i as f64 / m as f64).collect();
    RadialGridFunction::from_fn(nodes, 3, |r| {
        coeffs
            .iter()
            .enumerate()
            .map(|(k, c)| c * (k as f64 * 3.0 * r).cos())
            .sum()
    })
    .unwrap()
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(256))]

    #[test]
    fn primitive_round_trip(th in theta(), t in 0.0f64..1e6) {
        let f = CoefficientFamily::new(th).unwrap();
        let back = f.primitive_inv(f.primitive(t).unwrap()).unwrap();
        prop_assert!((back - t).abs() <= 1e-10 * t.max(1.0), "{back} vs {t}");
    }

    #[test]
    fn primitive_matches_quadrature(th in theta(), t in 0.0f64..100.0) {
        let f = CoefficientFamily::new(th).unwrap();
        let quad = simpson(&|s: f64| (1.0 + s).powf(-th), 0.0, t, 1e-12);
        let closed = f.primitive(t).unwrap();
        prop_assert!((quad - closed).abs() <= 1e-9 * closed.max(1.0), "{quad} vs {closed}");
    }

    #[test]
    fn coefficient_monotonicity(th in theta(), s in 0.0f64..1e4, ds in 1e-3f64..10.0) {
        let f = CoefficientFamily::new(th).unwrap();
        prop_assert!(f.b(s + ds).unwrap() < f.b(s).unwrap());
        prop_assert!(f.primitive(s + ds).unwrap() > f.primitive(s).unwrap());
        let v = f.primitive(s).unwrap();
        prop_assert!(f.boundary_nonlinearity(v + ds).unwrap() >= f.boundary_nonlinearity(v).unwrap());
        prop_assert!(f.boundary_nonlinearity(v).unwrap() <= f.sup_f());
    }

    #[test]
    fn gamma_ratio_above_infimum(th in theta(), t in 1e-6f64..1e12) {
        let f = CoefficientFamily::new(th).unwrap();
        prop_assert!(f.gamma_ratio(t).unwrap() >= 1.0 - th - 1e-12);
        prop_assert!(f.gamma_ratio(t).unwrap() <= 1.0 + 1e-12);
    }

    #[test]
    fn pointwise_inequality(p in 1.000001f64..10.0, th in theta(), t in 0.0f64..1e6) {
        let c = check_pointwise_inequality(p, th, t).unwrap();
        prop_assert!(c.holds, "{c:?}");
    }

    #[test]
    fn regime_thresholds_ordered(n in 3u32..=10, th in theta(), x in 0.0f64..1.0) {
        let q = 1.0 + x * n as f64;
        let r = classify(n, th, q).unwrap();
        prop_assert!(r.q_lower_nonenergy <= r.q_lower_energy + 1e-12);
        prop_assert!(r.q_lower_energy <= r.q_bounded + 1e-12);
        // monotone in q
        let r2 = classify(n, th, q + 0.1).unwrap();
        prop_assert!(r2.regime >= r.regime);
        if r.regime == Regime::Energy {
            if let (Some(p), Some(qss)) = (r.p_test, r.q_double_star) {
                let nn = n as f64;
                let two_star = 2.0 * nn / (nn - 2.0);
                let lhs = p * q / (q - 1.0);
                let rhs = (p + 1.0 - th) * two_star / 2.0;
                prop_assert!((lhs - rhs).abs() <= 1e-9 * rhs.abs().max(1.0));
                prop_assert!((rhs - qss * (1.0 - th)).abs() <= 1e-9 * rhs.abs().max(1.0));
            }
        }
    }

    #[test]
    fn oracle_monotone_in_amplitude(th in 0.05f64..0.99, gamma in 0.0f64..1.9, a in 0.01f64..50.0) {
        let spec = |amplitude| RadialExampleSpec { dim: 3, radius: 1.0, beta: 1.0, theta: th, amplitude, gamma };
        let lo = solve_boundary_value(&spec(a)).unwrap();
        let hi = solve_boundary_value(&spec(a * 1.5)).unwrap();
        prop_assert!(lo.exists && hi.exists);
        prop_assert!(hi.v_boundary > lo.v_boundary);
        prop_assert!(hi.v_center().unwrap() > lo.v_center().unwrap());
    }

    #[test]
    fn combined_holder_inequality(
        c1 in prop::collection::vec(-5.0f64..5.0, 4),
        c2 in prop::collection::vec(-5.0f64..5.0, 4),
        p in 1.1f64..6.0,
        lambda in 0.0f64..10.0,
    ) {
        let (f1, f2) = (profile_grid(&c1, 200), profile_grid(&c2, 200));
        let (lhs, rhs) = combined_holder(&f1, &f2, lambda, p).unwrap();
        prop_assert!(lhs <= rhs * (1.0 + 1e-12) + 1e-300);
    }

    #[test]
    fn weak_norm_below_strong_and_lp_nesting(
        c in prop::collection::vec(-5.0f64..5.0, 4),
        a in 1.0f64..3.0,
        extra in 0.1f64..3.0,
    ) {
        let g = profile_grid(&c, 400);
        let b = a + extra;
        let vol = ball_volume(3, 1.0);
        let (na, nb) = (lp_norm(&g, a).unwrap(), lp_norm(&g, b).unwrap());
        prop_assert!(na <= nb * vol.powf(1.0 / a - 1.0 / b) * (1.0 + 1e-9) + 1e-300);
        if a > 1.0 {
            let weak = marcinkiewicz_quasinorm(&g, a).unwrap().quasinorm;
            prop_assert!(weak <= na * (1.0 + 1e-6) + 1e-300, "{weak} vs {na}");
        }
    }
}

#[test]
fn norm_quadrature_second_order() {
    let at = |m: usize| {
        let nodes: Vec<f64> = (0..=m).map(|i| i as f64 / m as f64).collect();
        let g = RadialGridFunction::from_fn(nodes, 3, |r| (2.0 * r).cos() + r).unwrap();
        lp_norm(&g, 2.0).unwrap()
    };
    let (a, b, c) = (at(50), at(100), at(200));
    let ratio = (a - b) / (b - c);
    assert!((ratio - 4.0).abs() < 0.2, "{ratio}");
}
