//! Closed-form radial solutions on the ball `B_R` for `f = A |x|^{-gamma}`.
//!
//! With `v = B(u)` the interior operator becomes the Laplacian and the Robin
//! condition turns into `v'(R) + beta F(v(R)) = 0`. The radial solution is
//!
//! ```text
//! v(r) = v(R) + A/(N-gamma) * (R^{2-gamma} - r^{2-gamma}) / (2-gamma)
//! ```
//!
//! and `v(R)` solves `F(v(R)) = A R^{1-gamma} / (beta (N-gamma))`.
//!
//! The boundary load carries the factor `1/beta`. It comes from
//! `v'(R) = -A R^{1-gamma}/(N-gamma)` inserted into the Robin line; for
//! `beta = 1` it is the familiar `A R^{1-gamma}/(N-gamma)`. Reading the load
//! without `beta` is equivalent to absorbing `beta` into `F`.
//!
//! When `theta = 1`, `F` is bounded by 1 and there is no bounded radial
//! solution as soon as the load reaches 1.

use serde::{Deserialize, Serialize};

use crate::coefficients::CoefficientFamily;
use crate::error::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct RadialExampleSpec {
    pub dim: u32,
    pub radius: f64,
    pub beta: f64,
    pub theta: f64,
    pub amplitude: f64,
    pub gamma: f64,
}

impl RadialExampleSpec {
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
        if !(self.theta > 0.0 && self.theta <= 1.0) {
            return bad(format!("theta must lie in (0, 1], got {}", self.theta));
        }
        if !(self.amplitude >= 0.0 && self.amplitude.is_finite()) {
            return bad(format!("amplitude must be >= 0, got {}", self.amplitude));
        }
        if !(self.gamma >= 0.0 && self.gamma < 2.0) {
            return bad(format!(
                "closed form needs 0 <= gamma < 2, got {}",
                self.gamma
            ));
        }
        Ok(())
    }

    pub fn family(&self) -> CoefficientFamily {
        CoefficientFamily::new(self.theta).expect("validated theta")
    }

    /// `A / (N - gamma)`.
    fn profile_coefficient(&self) -> f64 {
        self.amplitude / (self.dim as f64 - self.gamma)
    }
}

/// Value `F(v(R))` must take: `A R^{1-gamma} / (beta (N - gamma))`.
pub fn boundary_load(spec: &RadialExampleSpec) -> Result<f64> {
    spec.validate()?;
    Ok(spec.profile_coefficient() * spec.radius.powf(1.0 - spec.gamma) / spec.beta)
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct RadialClosedForm {
    /// `v(R)`; meaningless when `exists` is false.
    pub v_boundary: f64,
    /// `A / (N - gamma)`.
    pub coefficient: f64,
    /// `2 - gamma`.
    pub exponent: f64,
    pub radius: f64,
    pub load: f64,
    pub exists: bool,
}

/// Absolute bisection tolerance on `v(R)`.
pub const BOUNDARY_TOL: f64 = 1e-12;

/// Finds `v(R)` with `F(v(R)) = load` by bisection on the increasing `F`.
pub fn solve_boundary_value(spec: &RadialExampleSpec) -> Result<RadialClosedForm> {
    let load = boundary_load(spec)?;
    let family = spec.family();
    let mut form = RadialClosedForm {
        v_boundary: 0.0,
        coefficient: spec.profile_coefficient(),
        exponent: 2.0 - spec.gamma,
        radius: spec.radius,
        load,
        exists: true,
    };
    if load == 0.0 {
        return Ok(form);
    }
    if load >= family.sup_f() {
        form.exists = false;
        form.v_boundary = f64::NAN;
        return Ok(form);
    }
    let f = |v: f64| family.boundary_unchecked(v);
    let mut hi = 1.0_f64;
    while f(hi) < load {
        hi *= 2.0;
        if !hi.is_finite() {
            return Err(Error::Nonexistence(format!(
                "could not bracket F(v) = {load}"
            )));
        }
    }
    let mut lo = 0.0_f64;
    while hi - lo > BOUNDARY_TOL {
        let mid = 0.5 * (lo + hi);
        if mid <= lo || mid >= hi {
            break;
        }
        if f(mid) < load {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    form.v_boundary = 0.5 * (lo + hi);
    Ok(form)
}

fn require_exists(form: &RadialClosedForm) -> Result<()> {
    if form.exists {
        Ok(())
    } else {
        Err(Error::Nonexistence(format!(
            "boundary load {} reaches sup F = 1",
            form.load
        )))
    }
}

fn check_radius(form: &RadialClosedForm, r: f64) -> Result<()> {
    if !(r >= 0.0 && r <= form.radius) {
        return Err(Error::Domain(format!(
            "r must lie in [0, {}], got {r}",
            form.radius
        )));
    }
    Ok(())
}

impl RadialClosedForm {
    pub fn v(&self, r: f64) -> Result<f64> {
        require_exists(self)?;
        check_radius(self, r)?;
        Ok(self.v_unchecked(r))
    }

    fn v_unchecked(&self, r: f64) -> f64 {
        let e = self.exponent;
        self.v_boundary + self.coefficient * (self.radius.powf(e) - r.powf(e)) / e
    }

    /// `v'(r) = -A/(N-gamma) r^{1-gamma}`; infinite at `r = 0` when `gamma > 1`.
    pub fn dv(&self, r: f64) -> Result<f64> {
        require_exists(self)?;
        check_radius(self, r)?;
        Ok(-self.coefficient * r.powf(self.exponent - 1.0))
    }

    pub fn u(&self, family: &CoefficientFamily, r: f64) -> Result<f64> {
        Ok(family.primitive_inv_unchecked(self.v(r)?))
    }

    pub fn v_center(&self) -> Result<f64> {
        self.v(0.0)
    }
}

/// Free functions mirroring the method forms, for callers that keep the spec around.
pub fn v_profile(form: &RadialClosedForm, r: f64) -> Result<f64> {
    form.v(r)
}

pub fn u_profile(form: &RadialClosedForm, spec: &RadialExampleSpec, r: f64) -> Result<f64> {
    form.u(&spec.family(), r)
}

/// Largest pointwise defects of the sampled closed form in the radial ODE
/// `-v'' - (N-1)/r v' = A r^{-gamma}` and its two boundary lines.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct OdeResidual {
    /// Max over interior nodes (three-point differences on the given grid).
    pub interior: f64,
    /// `|v'(0)|` by a one-sided second-order difference; `None` unless the grid
    /// starts at 0 and `gamma < 1` (for `gamma >= 1` the profile has a cusp there).
    pub axis: Option<f64>,
    /// `|v'(R) + beta F(v(R))|` by a one-sided second-order difference, when the grid ends at `R`.
    pub robin: Option<f64>,
}

impl OdeResidual {
    pub fn max(&self) -> f64 {
        self.interior
            .max(self.axis.unwrap_or(0.0))
            .max(self.robin.unwrap_or(0.0))
    }
}

fn one_sided_derivative(x: [f64; 3], y: [f64; 3]) -> f64 {
    // derivative at x[0] of the quadratic through the three points
    let (h1, h2) = (x[1] - x[0], x[2] - x[0]);
    let c1 = h2 / (h1 * (h2 - h1));
    let c2 = -h1 / (h2 * (h2 - h1));
    let c0 = -(c1 + c2);
    c0 * y[0] + c1 * y[1] + c2 * y[2]
}

pub fn ode_residual(
    form: &RadialClosedForm,
    spec: &RadialExampleSpec,
    grid: &[f64],
) -> Result<OdeResidual> {
    require_exists(form)?;
    if grid.len() < 3 {
        return Err(Error::Domain("residual grid needs at least 3 points".into()));
    }
    if grid.windows(2).any(|w| !(w[1] > w[0])) {
        return Err(Error::Domain("residual grid must be strictly increasing".into()));
    }
    for &r in [grid[0], grid[grid.len() - 1]].iter() {
        check_radius(form, r)?;
    }
    let v: Vec<f64> = grid.iter().map(|&r| form.v_unchecked(r)).collect();
    let n1 = spec.dim as f64 - 1.0;
    let mut interior = 0.0_f64;
    for i in 1..grid.len() - 1 {
        let (hm, hp) = (grid[i] - grid[i - 1], grid[i + 1] - grid[i]);
        let d2 = 2.0 * (hm * v[i + 1] - (hm + hp) * v[i] + hp * v[i - 1]) / (hm * hp * (hm + hp));
        let d1 = (hm * hm * v[i + 1] + (hp * hp - hm * hm) * v[i] - hp * hp * v[i - 1])
            / (hm * hp * (hm + hp));
        let r = grid[i];
        let res = -d2 - n1 / r * d1 - spec.amplitude * r.powf(-spec.gamma);
        interior = interior.max(res.abs());
    }
    let axis = (grid[0] == 0.0 && spec.gamma < 1.0)
        .then(|| one_sided_derivative([grid[0], grid[1], grid[2]], [v[0], v[1], v[2]]).abs());
    let last = grid.len() - 1;
    let robin = (grid[last] == form.radius).then(|| {
        let d = one_sided_derivative(
            [grid[last], grid[last - 1], grid[last - 2]],
            [v[last], v[last - 1], v[last - 2]],
        );
        (d + spec.beta * spec.family().boundary_unchecked(v[last])).abs()
    });
    Ok(OdeResidual {
        interior,
        axis,
        robin,
    })
}

/// Smallest amplitude without a bounded radial solution when `theta = 1`,
/// located by bisection on the existence flag. `None` for `theta < 1`
/// (a solution exists for every amplitude).
pub fn existence_threshold_amplitude(spec: &RadialExampleSpec, tol: f64) -> Result<Option<f64>> {
    spec.validate()?;
    if spec.theta < 1.0 {
        return Ok(None);
    }
    let exists = |a: f64| -> Result<bool> {
        let s = RadialExampleSpec {
            amplitude: a,
            ..*spec
        };
        Ok(solve_boundary_value(&s)?.exists)
    };
    let mut hi = 1.0_f64;
    while exists(hi)? {
        hi *= 2.0;
    }
    let mut lo = 0.0_f64;
    while hi - lo > tol {
        let mid = 0.5 * (lo + hi);
        if mid <= lo || mid >= hi {
            break;
        }
        if exists(mid)? {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    Ok(Some(hi))
}
