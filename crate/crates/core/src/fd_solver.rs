//! Radial solver for `-div(b(|u|) grad u) = f` in `B_R`, `du/dnu + beta u = 0` on the sphere.
//!
//! The nonlinear problem is replaced by its truncated approximation: the
//! coefficient is evaluated at `T_n(u)`, so it never drops below
//! `b(n) = (1+n)^{-theta}` and every linearised system is uniformly elliptic.
//! The source is truncated to `T_n(f)` as well when requested (by default only
//! for data outside the bounded regime, `gamma >= 2`).
//!
//! Each linear problem is discretised with continuous piecewise linears on the
//! radial mesh: the radial weight `r^{N-1}` is integrated exactly per cell, the
//! coefficient is taken at the cell midpoint from the averaged frozen values,
//! and the load uses exact hat moments of the source. This is the weak form,
//! so the flux `r^{N-1} b u'` vanishes at the origin without any special row
//! and the Robin condition enters as `beta b(|T_n u(R)|) R^{N-1} u(R)`.
//!
//! The fixed point is found by damped Picard iteration starting from `u = 0`.

use std::fmt;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::coefficients::CoefficientFamily;
use crate::error::{Error, Result};
use crate::grid::{graded_mesh, power_integral, sphere_area, RadialGridFunction};
use crate::source::Source;
use crate::tridiag::Tridiagonal;

pub const DEFAULT_DAMPING: f64 = 0.7;
pub const DEFAULT_TOLERANCE: f64 = 1e-10;
pub const DEFAULT_MAX_ITERATIONS: usize = 100_000;
pub const DEFAULT_INTERVALS: usize = 4096;
pub const DEFAULT_TRUNCATION: f64 = 1e3;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct MeshSpec {
    /// Number of cells `M`; nodes are `r_i = R (i/M)^g`, `i = 0..=M`.
    pub intervals: usize,
    /// Grading exponent `g`; `None` picks 2 for sources with `gamma >= 1` and 1 otherwise.
    pub grading: Option<f64>,
}

impl Default for MeshSpec {
    fn default() -> Self {
        Self {
            intervals: DEFAULT_INTERVALS,
            grading: None,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct IterationSpec {
    pub max_iterations: usize,
    pub damping: f64,
    /// Bound on the relative max-norm update.
    pub tolerance: f64,
}

impl Default for IterationSpec {
    fn default() -> Self {
        Self {
            max_iterations: DEFAULT_MAX_ITERATIONS,
            damping: DEFAULT_DAMPING,
            tolerance: DEFAULT_TOLERANCE,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ProblemSpec {
    pub dim: u32,
    pub radius: f64,
    pub beta: f64,
    /// Degeneracy exponent in `(0, 1]`; `0` selects the constant coefficient `b = 1`.
    pub theta: f64,
    pub source: Source,
    #[serde(default)]
    pub mesh: MeshSpec,
    /// Truncation level `n`.
    #[serde(default = "default_truncation")]
    pub truncation: f64,
    /// Replace `f` by `T_n(f)`; `None` truncates only power sources with `gamma >= 2`.
    #[serde(default)]
    pub truncate_source: Option<bool>,
    #[serde(default)]
    pub iteration: IterationSpec,
}

fn default_truncation() -> f64 {
    DEFAULT_TRUNCATION
}

impl ProblemSpec {
    /// Power-law source with default mesh and iteration settings.
    pub fn power(dim: u32, radius: f64, beta: f64, theta: f64, amplitude: f64, gamma: f64) -> Self {
        Self {
            dim,
            radius,
            beta,
            theta,
            source: Source::Power { amplitude, gamma },
            mesh: MeshSpec::default(),
            truncation: DEFAULT_TRUNCATION,
            truncate_source: None,
            iteration: IterationSpec::default(),
        }
    }

    pub fn validate(&self) -> Result<()> {
        let bad = |msg: String| Err(Error::InvalidSpec(msg));
        if self.dim < 3 {
            return bad(format!("dim must be >= 3, got {}", self.dim));
        }
        if !(self.radius > 0.0 && self.radius.is_finite()) {
            return bad(format!("radius must be positive, got {}", self.radius));
        }
        if !(self.beta > 0.0 && self.beta.is_finite()) {
            return bad(format!("beta must be positive, got {}", self.beta));
        }
        if !(self.theta >= 0.0 && self.theta <= 1.0) {
            return bad(format!("theta must lie in [0, 1], got {}", self.theta));
        }
        if self.mesh.intervals < 16 {
            return bad(format!("mesh needs M >= 16, got {}", self.mesh.intervals));
        }
        if !(self.truncation > 0.0) || self.truncation.is_nan() {
            return bad(format!("truncation level must be > 0, got {}", self.truncation));
        }
        let it = &self.iteration;
        if !(it.damping > 0.0 && it.damping <= 1.0) {
            return bad(format!("damping must lie in (0, 1], got {}", it.damping));
        }
        if !(it.tolerance > 0.0) {
            return bad(format!("tolerance must be > 0, got {}", it.tolerance));
        }
        if it.max_iterations == 0 {
            return bad("max_iterations must be positive".into());
        }
        self.source.validate(self.dim)
    }

    pub fn family(&self) -> CoefficientFamily {
        if self.theta == 0.0 {
            CoefficientFamily::unit()
        } else {
            CoefficientFamily::new(self.theta).expect("validated theta")
        }
    }

    pub fn grading(&self) -> f64 {
        self.mesh.grading.unwrap_or(match self.source {
            Source::Power { gamma, .. } if gamma >= 1.0 => 2.0,
            _ => 1.0,
        })
    }

    pub fn source_truncation_level(&self) -> Option<f64> {
        let on = self.truncate_source.unwrap_or(match self.source {
            Source::Power { gamma, .. } => gamma >= 2.0,
            Source::Tabulated { .. } => false,
        });
        on.then_some(self.truncation)
    }

    pub fn nodes(&self) -> Result<Vec<f64>> {
        graded_mesh(self.radius, self.mesh.intervals, self.grading())
    }
}

/// Mesh-dependent pieces of the weak form that do not change between Picard steps.
#[derive(Debug, Clone)]
pub struct Discretization {
    pub dim: u32,
    pub nodes: Vec<f64>,
    /// `int_cell r^{N-1} dr / h^2`: stiffness of a cell for unit coefficient.
    cell_stiffness: Vec<f64>,
    /// `int f_n phi_i r^{N-1} dr`.
    pub load: Vec<f64>,
    /// `beta R^{N-1}`.
    robin_weight: f64,
    family: CoefficientFamily,
    truncation: f64,
}

impl Discretization {
    pub fn new(spec: &ProblemSpec) -> Result<Self> {
        spec.validate()?;
        let nodes = spec.nodes()?;
        let a = spec.dim as f64 - 1.0;
        let level = spec.source_truncation_level();
        let mut load = vec![0.0; nodes.len()];
        let cell_stiffness = nodes
            .windows(2)
            .enumerate()
            .map(|(i, c)| {
                let (l, r) = spec.source.hat_load(spec.dim, c[0], c[1], level);
                load[i] += l;
                load[i + 1] += r;
                let h = c[1] - c[0];
                power_integral(a, c[0], c[1]) / (h * h)
            })
            .collect();
        Ok(Self {
            dim: spec.dim,
            robin_weight: spec.beta * spec.radius.powf(a),
            nodes,
            cell_stiffness,
            load,
            family: spec.family(),
            truncation: spec.truncation,
        })
    }

    fn coefficient(&self, u: f64) -> f64 {
        self.family.b_unchecked(u.abs().min(self.truncation))
    }

    /// Cell coefficients `b((T_n|u_i| + T_n|u_{i+1}|)/2)`.
    fn cell_coefficients(&self, u: &[f64]) -> Vec<f64> {
        let n = self.truncation;
        u.windows(2)
            .map(|w| {
                let mid = 0.5 * (w[0].abs().min(n) + w[1].abs().min(n));
                self.family.b_unchecked(mid)
            })
            .collect()
    }

    /// Stiffness matrix (including the Robin row) with the coefficient frozen at `u`.
    pub fn matrix(&self, u: &[f64]) -> Tridiagonal {
        let n = self.nodes.len();
        assert_eq!(u.len(), n);
        let mut diag = vec![0.0; n];
        let mut off = vec![0.0; n - 1];
        for (j, (k, b)) in self
            .cell_stiffness
            .iter()
            .zip(self.cell_coefficients(u))
            .enumerate()
        {
            let kb = k * b;
            diag[j] += kb;
            diag[j + 1] += kb;
            off[j] = -kb;
        }
        diag[n - 1] += self.robin_weight * self.coefficient(u[n - 1]);
        Tridiagonal {
            lower: off.clone(),
            diag,
            upper: off,
        }
    }

    /// `||phi_i'||` in `L^2(B_R)`.
    fn test_gradient_norms(&self) -> Vec<f64> {
        let omega = sphere_area(self.dim);
        let n = self.nodes.len();
        (0..n)
            .map(|i| {
                let mut s = 0.0;
                if i > 0 {
                    s += self.cell_stiffness[i - 1];
                }
                if i + 1 < n {
                    s += self.cell_stiffness[i];
                }
                (omega * s).sqrt()
            })
            .collect()
    }

    /// Max over hat functions of `|residual_i| / ||phi_i'||`, divided by the
    /// same functional of the load (0 when both vanish).
    fn normalized_residual(&self, residual: &[f64]) -> f64 {
        let omega = sphere_area(self.dim);
        let norms = self.test_gradient_norms();
        let scaled_max = |v: &[f64]| {
            v.iter()
                .zip(&norms)
                .fold(0.0_f64, |m, (r, g)| m.max(omega * r.abs() / g))
        };
        let res = scaled_max(residual);
        let load = scaled_max(&self.load);
        if res == 0.0 {
            0.0
        } else if load == 0.0 {
            res
        } else {
            res / load
        }
    }
}

/// The system the frozen-coefficient step solves: matrix and right-hand side.
#[derive(Debug, Clone)]
pub struct LinearSystem {
    pub matrix: Tridiagonal,
    pub rhs: Vec<f64>,
}

impl LinearSystem {
    pub fn solve(&self) -> Result<Vec<f64>> {
        self.matrix.solve(&self.rhs)
    }
}

pub fn assemble_linear_system(spec: &ProblemSpec, u_frozen: &RadialGridFunction) -> Result<LinearSystem> {
    let disc = Discretization::new(spec)?;
    if u_frozen.nodes() != disc.nodes.as_slice() {
        return Err(Error::Domain("frozen iterate must live on the problem mesh".into()));
    }
    Ok(LinearSystem {
        matrix: disc.matrix(u_frozen.values()),
        rhs: disc.load.clone(),
    })
}

/// One Picard step as recorded in the history.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct IterationRecord {
    pub update_norm: f64,
    pub max_abs: f64,
}

#[derive(Debug, Clone, Serialize)]
pub struct SolveReport {
    pub solution: RadialGridFunction,
    /// `B(|u|) sign(u)` nodewise.
    pub v_equiv: RadialGridFunction,
    pub picard_iterations: usize,
    pub final_update_norm: f64,
    pub converged: bool,
    /// `max |u| >= n`: the coefficient was cut somewhere.
    pub truncation_active: bool,
    pub weak_residual: f64,
    /// Normalised residual of the last linear solve against its own frozen
    /// system: the round-off floor (about `eps M^2`) any residual can reach.
    pub linear_residual: f64,
    pub truncation: f64,
    pub history: Vec<IterationRecord>,
}

impl SolveReport {
    pub fn max_abs(&self) -> f64 {
        self.solution.max_abs()
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub enum Divergence {
    /// Updates keep changing sign or size; try a smaller damping factor.
    Oscillation,
    /// `max |u|` kept increasing; typical when no bounded solution exists.
    MonotoneGrowth,
}

#[derive(Debug, Clone)]
pub struct NonConvergence {
    pub kind: Divergence,
    pub report: SolveReport,
}

impl fmt::Display for NonConvergence {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let hint = match self.kind {
            Divergence::Oscillation => "oscillating updates; try a smaller damping factor",
            Divergence::MonotoneGrowth => {
                "max |u| grows monotonically; the data may admit no bounded solution"
            }
        };
        write!(
            f,
            "Picard iteration did not converge in {} steps (last update {:.3e}): {hint}",
            self.report.picard_iterations, self.report.final_update_norm
        )
    }
}

fn odd_primitive(family: &CoefficientFamily, u: f64) -> f64 {
    family.primitive_unchecked(u.abs()).copysign(u)
}

pub fn picard_solve(spec: &ProblemSpec) -> Result<SolveReport> {
    let disc = Discretization::new(spec)?;
    let it = spec.iteration;
    let n = disc.nodes.len();
    let mut u = vec![0.0; n];
    let mut history = Vec::new();
    let mut converged = false;
    let mut update_norm = f64::INFINITY;
    let mut linear_residual = 0.0;
    for _ in 0..it.max_iterations {
        let w = disc.matrix(&u).solve(&disc.load)?;
        let mut diff = 0.0_f64;
        let mut size = 0.0_f64;
        let next: Vec<f64> = u
            .iter()
            .zip(&w)
            .map(|(old, new)| {
                let x = (1.0 - it.damping) * old + it.damping * new;
                diff = diff.max((x - old).abs());
                size = size.max(x.abs());
                x
            })
            .collect();
        update_norm = if diff == 0.0 { 0.0 } else { diff / size };
        history.push(IterationRecord {
            update_norm,
            max_abs: size,
        });
        if update_norm <= it.tolerance {
            converged = true;
            linear_residual = disc.normalized_residual(&residual_vector(&disc, &u, &w));
            // report the last undamped solve: it is the one consistent with its own system
            u = w;
            break;
        }
        u = next;
    }
    let solution = RadialGridFunction::new(disc.nodes.clone(), u, spec.dim)?;
    let family = spec.family();
    let v_equiv = solution.map(|x| odd_primitive(&family, x))?;
    let weak = disc.normalized_residual(&residual_vector(&disc, solution.values(), solution.values()));
    let report = SolveReport {
        truncation_active: solution.max_abs() >= spec.truncation,
        v_equiv,
        picard_iterations: history.len(),
        final_update_norm: update_norm,
        converged,
        weak_residual: weak,
        linear_residual,
        truncation: spec.truncation,
        history,
        solution,
    };
    if converged {
        Ok(report)
    } else {
        let kind = diagnose(&report.history);
        Err(Error::NonConvergence(Box::new(NonConvergence { kind, report })))
    }
}

fn diagnose(history: &[IterationRecord]) -> Divergence {
    let window = (history.len() / 5).max(2).min(history.len());
    let tail = &history[history.len() - window..];
    if tail.windows(2).all(|w| w[1].max_abs > w[0].max_abs) {
        Divergence::MonotoneGrowth
    } else {
        Divergence::Oscillation
    }
}

/// `K(u) u - load`, evaluated as differences of cell fluxes so that the
/// large diagonal entries never cancel against their neighbours.
/// The coefficient is evaluated at `frozen`, the differences at `u`.
fn residual_vector(disc: &Discretization, frozen: &[f64], u: &[f64]) -> Vec<f64> {
    let n = u.len();
    let mut r: Vec<f64> = disc.load.iter().map(|f| -f).collect();
    for (j, (k, b)) in disc
        .cell_stiffness
        .iter()
        .zip(disc.cell_coefficients(frozen))
        .enumerate()
    {
        let flux = k * b * (u[j] - u[j + 1]);
        r[j] += flux;
        r[j + 1] -= flux;
    }
    r[n - 1] += disc.robin_weight * disc.coefficient(frozen[n - 1]) * u[n - 1];
    r
}

/// Normalised residual of the weak formulation on the hat-function basis,
/// with the coefficient evaluated at `solution` itself.
pub fn weak_residual(spec: &ProblemSpec, solution: &RadialGridFunction) -> Result<f64> {
    let disc = Discretization::new(spec)?;
    if solution.nodes() != disc.nodes.as_slice() {
        return Err(Error::Domain("solution must live on the problem mesh".into()));
    }
    let u = solution.values();
    Ok(disc.normalized_residual(&residual_vector(&disc, u, u)))
}

/// Residual of the weak formulation measured in the discrete dual energy norm,
/// `sqrt(r . K^{-1} r) / sqrt(l . K^{-1} l)` with `K` the stiffness matrix frozen
/// at `solution` and `l` the load. Unlike [`weak_residual`], which is a max over
/// single hat functions and so dominated by the one-sided end rows, this
/// follows the global discretisation error.
pub fn dual_weak_residual(spec: &ProblemSpec, solution: &RadialGridFunction) -> Result<f64> {
    let disc = Discretization::new(spec)?;
    if solution.nodes() != disc.nodes.as_slice() {
        return Err(Error::Domain("solution must live on the problem mesh".into()));
    }
    let u = solution.values();
    let matrix = disc.matrix(u);
    let energy = |v: &[f64]| -> Result<f64> {
        let z = matrix.solve(v)?;
        Ok(v.iter().zip(&z).map(|(a, b)| a * b).sum::<f64>().max(0.0).sqrt())
    };
    let res = energy(&residual_vector(&disc, u, u))?;
    let load = energy(&disc.load)?;
    Ok(if res == 0.0 {
        0.0
    } else if load == 0.0 {
        res
    } else {
        res / load
    })
}

/// Residual of `-Laplace v = f`, `v' + beta F(v) = 0` for the transformed
/// field `v = B(u)`, normalised like [`weak_residual`].
pub fn poisson_weak_residual(spec: &ProblemSpec, v: &RadialGridFunction) -> Result<f64> {
    let disc = Discretization::new(spec)?;
    if v.nodes() != disc.nodes.as_slice() {
        return Err(Error::Domain("field must live on the problem mesh".into()));
    }
    let vals = v.values();
    let n = vals.len();
    let laplace = Discretization {
        family: CoefficientFamily::unit(),
        robin_weight: 0.0,
        ..disc.clone()
    };
    let mut r = laplace.matrix(vals).mul_vec(vals);
    let vr = vals[n - 1];
    r[n - 1] += disc.robin_weight * disc.family.boundary_unchecked(vr.abs()).copysign(vr);
    for (ri, f) in r.iter_mut().zip(&disc.load) {
        *ri -= f;
    }
    Ok(disc.normalized_residual(&r))
}

/// Solves the same problem at each truncation level (concurrently); reports come back in level order.
pub fn truncation_sweep(spec: &ProblemSpec, levels: &[f64]) -> Result<Vec<SolveReport>> {
    if levels.windows(2).any(|w| !(w[1] > w[0])) {
        return Err(Error::InvalidSpec("truncation levels must be increasing".into()));
    }
    levels
        .par_iter()
        .map(|&n| {
            let s = ProblemSpec {
                truncation: n,
                ..spec.clone()
            };
            picard_solve(&s)
        })
        .collect()
}

/// Nodal radial flux density `-b(|u|) u'` (centred differences inside, one-sided at `R`, zero at the axis).
pub fn radial_flux(spec: &ProblemSpec, u: &RadialGridFunction) -> Vec<f64> {
    let family = spec.family();
    let r = u.nodes();
    let v = u.values();
    let n = r.len();
    (0..n)
        .map(|i| {
            let du = if i == 0 {
                if r[0] == 0.0 {
                    return 0.0;
                }
                (v[1] - v[0]) / (r[1] - r[0])
            } else if i + 1 == n {
                (v[i] - v[i - 1]) / (r[i] - r[i - 1])
            } else {
                (v[i + 1] - v[i - 1]) / (r[i + 1] - r[i - 1])
            };
            -family.b_unchecked(v[i].abs().min(spec.truncation)) * du
        })
        .collect()
}
