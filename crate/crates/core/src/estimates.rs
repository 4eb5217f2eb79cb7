//! Sweeps that check the a priori estimates numerically.
//!
//! Every check here is a boundedness or slope check: the estimates involve
//! constants that are never made explicit, so nothing is compared against a
//! fixed bound. Each harness returns one row per sweep member.

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::fd_solver::{picard_solve, ProblemSpec};
use crate::grid::RadialGridFunction;
use crate::norms::{h1_norm, lp_norm, w1s_norm, weighted_gradient_l2};
use crate::radial_oracle::{solve_boundary_value, RadialExampleSpec};
use crate::regimes::{classify, Regime};
use crate::source::Source;

/// Exponent used by the bounded-regime harness: `f = A r^{-gamma}` lies in
/// `L^q` for every `q < N/gamma`, so take the midpoint of `(N/2, N/gamma)`.
pub fn bounded_regime_exponent(dim: u32, gamma: f64) -> f64 {
    let n = dim as f64;
    if gamma == 0.0 {
        n
    } else {
        0.5 * (0.5 * n + n / gamma)
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct LinftyRow {
    pub theta: f64,
    pub gamma: f64,
    pub amplitude: f64,
    pub q: f64,
    pub f_lq: f64,
    /// `B(max u) = v(0)`; `None` when no bounded solution exists.
    pub b_of_max: Option<f64>,
    pub max_u: Option<f64>,
    pub note: Option<String>,
}

/// `B(max u)` from the oracle next to `||f||_{L^q}`, `q > N/2`.
pub fn estimate_harness_linfty(specs: &[RadialExampleSpec]) -> Result<Vec<LinftyRow>> {
    specs
        .par_iter()
        .map(|spec| {
            spec.validate()?;
            let q = bounded_regime_exponent(spec.dim, spec.gamma);
            let report = classify(spec.dim, spec.theta, q)?;
            if report.regime != Regime::Bounded {
                return Err(Error::RegimeMismatch(format!(
                    "q = {q} is not in the bounded regime for N = {}",
                    spec.dim
                )));
            }
            let f_lq = power_source(spec).lq_norm(spec.dim, spec.radius, q);
            let form = solve_boundary_value(spec)?;
            let (b_of_max, max_u, note) = if form.exists {
                let v0 = form.v_center()?;
                (Some(v0), Some(form.u(&spec.family(), 0.0)?), None)
            } else {
                (
                    None,
                    None,
                    Some(format!(
                        "skipped: boundary load {} >= sup F, no bounded radial solution",
                        form.load
                    )),
                )
            };
            Ok(LinftyRow {
                theta: spec.theta,
                gamma: spec.gamma,
                amplitude: spec.amplitude,
                q,
                f_lq,
                b_of_max,
                max_u,
                note,
            })
        })
        .collect()
}

/// True when the reported `B(max u)` values are finite and nondecreasing in the
/// amplitude (skipped rows are ignored).
pub fn linfty_monotone(rows: &[LinftyRow]) -> bool {
    let mut pts: Vec<(f64, f64)> = rows
        .iter()
        .filter_map(|r| r.b_of_max.map(|b| (r.amplitude, b)))
        .collect();
    pts.sort_by(|a, b| a.0.total_cmp(&b.0));
    pts.iter().all(|p| p.1.is_finite()) && pts.windows(2).all(|w| w[1].1 >= w[0].1)
}

/// Where the solution profile for a sweep member comes from.
#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum SolutionRoute {
    /// Closed form sampled on the spec's mesh (power sources with `gamma < 2`).
    #[default]
    Oracle,
    /// Nonlinear solve.
    Solver,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct EnergyRow {
    pub amplitude: f64,
    pub f_lq: f64,
    /// `||u||_{L^{q**(1-theta)}}`.
    pub u_norm: f64,
    /// `||u||^{1-theta} / ||f||_{L^q}`; `None` for a zero source.
    pub ratio: Option<f64>,
    pub h1: f64,
    /// `int |grad u|^2 (1+|u|)^{p-1-theta}` with the test exponent `p`.
    pub gradient_l2_weighted: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct W1sRow {
    pub amplitude: f64,
    pub f_lq: f64,
    pub s: f64,
    pub w1s: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct W1sTable {
    pub rows: Vec<W1sRow>,
    /// Least-squares slope of `log ||u||_{W^{1,s}}` against `log A` over positive rows.
    pub slope: Option<f64>,
}

fn power_source(spec: &RadialExampleSpec) -> Source {
    Source::Power {
        amplitude: spec.amplitude,
        gamma: spec.gamma,
    }
}

fn with_amplitude(base: &ProblemSpec, amplitude: f64) -> Result<ProblemSpec> {
    let gamma = match base.source {
        Source::Power { gamma, .. } => gamma,
        Source::Tabulated { .. } => {
            return Err(Error::InvalidSpec(
                "amplitude sweeps need a power source".into(),
            ))
        }
    };
    let mut spec = base.clone();
    spec.source = Source::Power { amplitude, gamma };
    Ok(spec)
}

fn example_of(spec: &ProblemSpec) -> Result<RadialExampleSpec> {
    match spec.source {
        Source::Power { amplitude, gamma } => Ok(RadialExampleSpec {
            dim: spec.dim,
            radius: spec.radius,
            beta: spec.beta,
            theta: spec.theta,
            amplitude,
            gamma,
        }),
        Source::Tabulated { .. } => Err(Error::InvalidSpec(
            "the oracle only covers power sources".into(),
        )),
    }
}

/// Solution profile for one sweep member.
pub fn solution_profile(spec: &ProblemSpec, route: SolutionRoute) -> Result<RadialGridFunction> {
    match route {
        SolutionRoute::Solver => Ok(picard_solve(spec)?.solution),
        SolutionRoute::Oracle => {
            let ex = example_of(spec)?;
            ex.validate()?;
            let form = solve_boundary_value(&ex)?;
            if !form.exists {
                return Err(Error::Nonexistence(format!(
                    "boundary load {} >= sup F = {}",
                    form.load,
                    ex.family().sup_f()
                )));
            }
            let family = ex.family();
            let nodes = spec.nodes()?;
            let values = nodes
                .iter()
                .map(|&r| form.u(&family, r))
                .collect::<Result<Vec<_>>>()?;
            RadialGridFunction::new(nodes, values, spec.dim)
        }
    }
}

fn require_regime(spec: &ProblemSpec, q: f64, want: Regime) -> Result<crate::RegimeReport<f64>> {
    let report = classify(spec.dim, spec.theta, q)?;
    if report.regime != want {
        return Err(Error::RegimeMismatch(format!(
            "q = {q} with N = {}, theta = {} classifies as {}, expected {want}",
            spec.dim, spec.theta, report.regime
        )));
    }
    if spec.source.lq_norm(spec.dim, spec.radius, q).is_infinite() {
        return Err(Error::RegimeMismatch(format!(
            "the source is not in L^{q}"
        )));
    }
    Ok(report)
}

/// `||u||^{1-theta}_{L^{q**(1-theta)}} / ||f||_{L^q}` over an amplitude sweep,
/// `q` in the energy window.
pub fn estimate_harness_energy(
    base: &ProblemSpec,
    q: f64,
    amplitudes: &[f64],
    route: SolutionRoute,
) -> Result<Vec<EnergyRow>> {
    let probe = with_amplitude(base, 1.0)?;
    let report = require_regime(&probe, q, Regime::Energy)?;
    let (Some(qss), Some(p_test)) = (report.q_double_star, report.p_test) else {
        return Err(Error::RegimeMismatch(format!(
            "q = {q} sits on the edge of the energy window, exponents undefined"
        )));
    };
    let theta = base.theta;
    let exponent = qss * (1.0 - theta);
    amplitudes
        .par_iter()
        .map(|&a| {
            let spec = with_amplitude(base, a)?;
            let u = solution_profile(&spec, route)?;
            let f_lq = spec.source.lq_norm(spec.dim, spec.radius, q);
            let u_norm = lp_norm(&u, exponent)?;
            let ratio = (f_lq > 0.0).then(|| u_norm.powf(1.0 - theta) / f_lq);
            Ok(EnergyRow {
                amplitude: a,
                f_lq,
                u_norm,
                ratio,
                h1: h1_norm(&u),
                gradient_l2_weighted: weighted_gradient_l2(&u, p_test - 1.0 - theta),
            })
        })
        .collect()
}

/// Least-squares slope of `log y` against `log x` over the strictly positive pairs.
pub fn log_log_slope(points: &[(f64, f64)]) -> Option<f64> {
    let pts: Vec<(f64, f64)> = points
        .iter()
        .filter(|(x, y)| *x > 0.0 && *y > 0.0 && x.is_finite() && y.is_finite())
        .map(|(x, y)| (x.ln(), y.ln()))
        .collect();
    if pts.len() < 2 {
        return None;
    }
    let n = pts.len() as f64;
    let mx = pts.iter().map(|p| p.0).sum::<f64>() / n;
    let my = pts.iter().map(|p| p.1).sum::<f64>() / n;
    let sxx: f64 = pts.iter().map(|p| (p.0 - mx).powi(2)).sum();
    if sxx == 0.0 {
        return None;
    }
    let sxy: f64 = pts.iter().map(|p| (p.0 - mx) * (p.1 - my)).sum();
    Some(sxy / sxx)
}

/// `||u||_{W^{1,s}}` from the solver over an amplitude sweep, `q` in the
/// non-energy window.
pub fn estimate_harness_w1s(base: &ProblemSpec, q: f64, amplitudes: &[f64]) -> Result<W1sTable> {
    let probe = with_amplitude(base, 1.0)?;
    let report = require_regime(&probe, q, Regime::NonEnergy)?;
    let s = report
        .s
        .ok_or_else(|| Error::RegimeMismatch("gradient exponent undefined".into()))?;
    let rows = amplitudes
        .par_iter()
        .map(|&a| {
            let spec = with_amplitude(base, a)?;
            let u = solution_profile(&spec, SolutionRoute::Solver)?;
            Ok(W1sRow {
                amplitude: a,
                f_lq: spec.source.lq_norm(spec.dim, spec.radius, q),
                s,
                w1s: w1s_norm(&u, s)?,
            })
        })
        .collect::<Result<Vec<_>>>()?;
    let slope = log_log_slope(&rows.iter().map(|r| (r.amplitude, r.w1s)).collect::<Vec<_>>());
    Ok(W1sTable { rows, slope })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::fd_solver::MeshSpec;

    fn example(theta: f64, amplitude: f64) -> RadialExampleSpec {
        RadialExampleSpec {
            dim: 3,
            radius: 1.0,
            beta: 1.0,
            theta,
            amplitude,
            gamma: 1.0,
        }
    }

    #[test]
    fn linfty_increasing_and_zero() {
        let specs: Vec<_> = [0.0, 1.0, 10.0, 100.0].iter().map(|&a| example(0.5, a)).collect();
        let rows = estimate_harness_linfty(&specs).unwrap();
        assert_eq!(rows[0].b_of_max, Some(0.0));
        assert!(rows.iter().all(|r| r.b_of_max.unwrap().is_finite() && r.f_lq.is_finite()));
        assert!(linfty_monotone(&rows));
        assert!(rows[3].b_of_max.unwrap() > rows[2].b_of_max.unwrap());
    }

    #[test]
    fn linfty_skips_nonexistence() {
        let rows = estimate_harness_linfty(&[example(1.0, 2.0), example(1.0, 1.0)]).unwrap();
        assert!(rows[0].b_of_max.is_none());
        assert!(rows[0].note.as_deref().unwrap().contains("skipped"));
        assert!((rows[1].b_of_max.unwrap() - (2f64.ln() + 0.5)).abs() < 1e-9);
    }

    fn energy_base() -> ProblemSpec {
        let mut spec = ProblemSpec::power(3, 1.0, 1.0, 0.5, 1.0, 1.2);
        spec.mesh = MeshSpec {
            intervals: 1024,
            grading: None,
        };
        spec
    }

    #[test]
    fn energy_ratio_bounded_on_oracle() {
        let amps = [0.0, 1.0, 10.0, 100.0, 1e3, 1e4];
        let rows = estimate_harness_energy(&energy_base(), 1.4, &amps, SolutionRoute::Oracle).unwrap();
        assert!(rows[0].ratio.is_none());
        let first = rows[1].ratio.unwrap();
        let last = rows[5].ratio.unwrap();
        assert!(last / first <= 10.0, "{first} {last}");
        assert!(rows.iter().all(|r| r.h1.is_finite()));
    }

    #[test]
    fn energy_rejects_wrong_window() {
        let err = estimate_harness_energy(&energy_base(), 2.0, &[1.0], SolutionRoute::Oracle);
        assert!(matches!(err, Err(Error::RegimeMismatch(_))));
        let mut unit = energy_base();
        unit.theta = 1.0;
        assert!(estimate_harness_energy(&unit, 1.4, &[1.0], SolutionRoute::Oracle).is_err());
    }

    #[test]
    fn slope_of_power_law() {
        let pts: Vec<_> = [1.0, 2.0, 4.0].iter().map(|&x: &f64| (x, 3.0 * x.powf(1.5))).collect();
        assert!((log_log_slope(&pts).unwrap() - 1.5).abs() < 1e-12);
        assert_eq!(log_log_slope(&[(1.0, 0.0)]), None);
    }

    #[test]
    fn w1s_finite_in_nonenergy_window() {
        let mut base = ProblemSpec::power(3, 1.0, 1.0, 0.5, 1.0, 2.3);
        base.mesh.intervals = 512;
        let table = estimate_harness_w1s(&base, 1.3, &[0.0, 1.0, 10.0]).unwrap();
        assert_eq!(table.rows[0].w1s, 0.0);
        assert!((table.rows[0].s - 1.8).abs() < 1e-12);
        assert!(table.rows.iter().all(|r| r.w1s.is_finite()));
        assert!(table.slope.is_some());
        assert!(matches!(
            estimate_harness_w1s(&base, 1.4, &[1.0]),
            Err(Error::RegimeMismatch(_))
        ));
    }
}
