use std::f64::consts::PI;

use degrobin::fd_solver::{picard_solve, poisson_weak_residual, ProblemSpec};
use degrobin::grid::RadialGridFunction;
use degrobin::norms::{trace_report, w1s_norm};
use degrobin::radial_oracle::{solve_boundary_value, RadialExampleSpec};

fn spec(theta: f64, amplitude: f64, gamma: f64, m: usize) -> ProblemSpec {
    let mut s = ProblemSpec::power(3, 1.0, 1.0, theta, amplitude, gamma);
    s.mesh.intervals = m;
    s
}

/// `u = e^{v} - 1` with `v = ln 2 + (1 - r)/2`: the theta = 1, gamma = 1, A = 1 profile.
fn exact_log_case(r: f64) -> f64 {
    (2f64.ln() + 0.5 * (1.0 - r)).exp() - 1.0
}

#[test]
fn singular_source_converges_on_graded_mesh() {
    let errs: Vec<f64> = [64, 128, 256, 512]
        .iter()
        .map(|&m| {
            let rep = picard_solve(&spec(1.0, 1.0, 1.0, m)).unwrap();
            let u = &rep.solution;
            u.nodes()
                .iter()
                .zip(u.values())
                .map(|(&r, &v)| (v - exact_log_case(r)).abs())
                .fold(0.0, f64::max)
        })
        .collect();
    for w in errs.windows(2) {
        let order = (w[0] / w[1]).log2();
        assert!(order >= 1.0, "order {order} from {errs:?}");
    }
}

#[test]
fn truncation_inactive_levels_agree() {
    // max u ~ 2.3, so every level above it gives the same discrete problem
    let mut a = spec(1.0, 1.0, 1.0, 512);
    a.truncation = 50.0;
    let mut b = a.clone();
    b.truncation = 100.0;
    let (ra, rb) = (picard_solve(&a).unwrap(), picard_solve(&b).unwrap());
    assert!(!ra.truncation_active && !rb.truncation_active);
    assert_eq!(ra.solution.values(), rb.solution.values());
}

#[test]
fn truncation_active_below_solution() {
    let mut s = spec(1.0, 2.0, 1.0, 256);
    s.truncation = 10.0;
    let r10 = picard_solve(&s).unwrap();
    s.truncation = 20.0;
    let r20 = picard_solve(&s).unwrap();
    assert!(r10.truncation_active && r20.truncation_active);
    assert!(r20.max_abs() > r10.max_abs());
}

#[test]
fn change_of_variable_residual_decays() {
    let res: Vec<f64> = [64, 128, 256]
        .iter()
        .map(|&m| {
            let s = spec(0.5, 1.0, 0.0, m);
            let rep = picard_solve(&s).unwrap();
            poisson_weak_residual(&s, &rep.v_equiv).unwrap()
        })
        .collect();
    assert!(res[1] < res[0] && res[2] < res[1], "{res:?}");
    assert!(res[2] < 1e-2, "{res:?}");
}

#[test]
fn w1s_norm_stable_under_refinement() {
    // gamma = 2.3 puts f in L^q only for q < 3/2.3, inside the non-energy window
    let norms: Vec<f64> = [256, 512, 1024]
        .iter()
        .map(|&m| {
            let rep = picard_solve(&spec(0.5, 1.0, 2.3, m)).unwrap();
            w1s_norm(&rep.solution, 1.8).unwrap()
        })
        .collect();
    assert!(norms.iter().all(|n| n.is_finite() && *n > 0.0));
    let spread = (norms[2] - norms[1]).abs() / norms[2];
    assert!(spread < 0.05, "{norms:?}");
    let zero = picard_solve(&spec(0.5, 0.0, 2.3, 64)).unwrap();
    assert_eq!(w1s_norm(&zero.solution, 1.8).unwrap(), 0.0);
}

#[test]
fn trace_of_oracle_profile() {
    let ex = RadialExampleSpec {
        dim: 3,
        radius: 1.0,
        beta: 1.0,
        theta: 1.0,
        amplitude: 1.0,
        gamma: 1.0,
    };
    let form = solve_boundary_value(&ex).unwrap();
    let family = ex.family();
    let nodes: Vec<f64> = (0..=100).map(|i| i as f64 / 100.0).collect();
    let g = RadialGridFunction::from_fn(nodes, 3, |r| form.u(&family, r).unwrap()).unwrap();
    let rep = trace_report(&g, &[2.0]).unwrap();
    assert!((rep.trace_value - 1.0).abs() < 1e-9);
    assert!((rep.trace_lp[0].1 - (4.0 * PI).sqrt()).abs() < 1e-8);
}
