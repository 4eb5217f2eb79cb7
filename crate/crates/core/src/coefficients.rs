//! Degeneracy coefficient `b(s) = (1+s)^(-theta)` and the functions built from it.
//!
//! `B` is the primitive of `b` starting at 0, `B^{-1}` its inverse and
//! `F(v) = b(B^{-1}(v)) B^{-1}(v)` the boundary nonlinearity that appears after
//! the change of variable `v = B(u)`. All of them have closed forms for the
//! power family; they are written in terms of `expm1`/`ln_1p` so that the
//! `theta -> 1` (logarithmic) limit is reached without cancellation.

use serde::{Deserialize, Serialize};

use crate::error::{domain, Result};

/// Power-law degeneracy `b(s) = (1+s)^(-theta)`.
///
/// `theta` lives in `(0, 1]`. The value `theta = 0` (b identically one) is only
/// reachable through [`CoefficientFamily::unit`] and is used to check the
/// solver against the linear Robin-Poisson problem.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct CoefficientFamily {
    theta: f64,
}

impl CoefficientFamily {
    pub fn new(theta: f64) -> Result<Self> {
        if !(theta > 0.0 && theta <= 1.0) {
            return domain(format!("theta must lie in (0, 1], got {theta}"));
        }
        Ok(Self { theta })
    }

    /// The non-degenerate coefficient `b = 1`.
    pub fn unit() -> Self {
        Self { theta: 0.0 }
    }

    pub fn theta(&self) -> f64 {
        self.theta
    }

    /// `1 - theta`, the exponent of the primitive.
    fn alpha(&self) -> f64 {
        1.0 - self.theta
    }

    pub fn b(&self, s: f64) -> Result<f64> {
        if !(s >= 0.0) {
            return domain(format!("b is defined for s >= 0, got {s}"));
        }
        Ok(self.b_unchecked(s))
    }

    pub(crate) fn b_unchecked(&self, s: f64) -> f64 {
        if self.theta == 0.0 {
            1.0
        } else {
            (-self.theta * s.ln_1p()).exp()
        }
    }

    pub fn primitive(&self, t: f64) -> Result<f64> {
        if !(t >= 0.0) {
            return domain(format!("B is defined for t >= 0, got {t}"));
        }
        Ok(self.primitive_unchecked(t))
    }

    pub(crate) fn primitive_unchecked(&self, t: f64) -> f64 {
        let a = self.alpha();
        let l = t.ln_1p();
        if a == 0.0 {
            l
        } else {
            (a * l).exp_m1() / a
        }
    }

    pub fn primitive_inv(&self, v: f64) -> Result<f64> {
        if !(v >= 0.0) {
            return domain(format!("B^-1 is defined for v >= 0, got {v}"));
        }
        Ok(self.primitive_inv_unchecked(v))
    }

    pub(crate) fn primitive_inv_unchecked(&self, v: f64) -> f64 {
        let a = self.alpha();
        if a == 0.0 {
            v.exp_m1()
        } else {
            ((a * v).ln_1p() / a).exp_m1()
        }
    }

    pub fn boundary_nonlinearity(&self, v: f64) -> Result<f64> {
        if !(v >= 0.0) {
            return domain(format!("F is defined for v >= 0, got {v}"));
        }
        Ok(self.boundary_unchecked(v))
    }

    pub(crate) fn boundary_unchecked(&self, v: f64) -> f64 {
        if self.theta == 1.0 {
            // u/(1+u) with u = e^v - 1
            return -(-v).exp_m1();
        }
        let u = self.primitive_inv_unchecked(v);
        u * self.b_unchecked(u)
    }

    /// `sup_{v >= 0} F(v)`: finite (= 1) only when `theta = 1`.
    pub fn sup_f(&self) -> f64 {
        if self.theta == 1.0 {
            1.0
        } else {
            f64::INFINITY
        }
    }

    /// `t b(t) / B(t)`, extended by its limit 1 at `t = 0`.
    pub fn gamma_ratio(&self, t: f64) -> Result<f64> {
        if !(t >= 0.0) {
            return domain(format!("t must be >= 0, got {t}"));
        }
        if t == 0.0 {
            return Ok(1.0);
        }
        Ok(t * self.b_unchecked(t) / self.primitive_unchecked(t))
    }

    /// Smallest sampled value of `t b(t) / B(t)` over a log-spaced grid of
    /// `(0, t_max]`, including the `t -> 0` limit.
    ///
    /// For `theta < 1` this tends to `1 - theta` as `t_max` grows; for
    /// `theta = 1` it tends to 0, i.e. no positive constant works.
    pub fn gamma_condition_infimum(&self, t_max: f64, samples: usize) -> Result<f64> {
        if !(t_max > 0.0 && t_max.is_finite()) {
            return domain(format!("t_max must be positive and finite, got {t_max}"));
        }
        if samples < 100 {
            return domain(format!("need at least 100 samples, got {samples}"));
        }
        let lo = (t_max * 1e-12).ln();
        let hi = t_max.ln();
        let step = (hi - lo) / (samples - 1) as f64;
        let mut inf = 1.0_f64;
        for i in 0..samples {
            let t = if i + 1 == samples {
                t_max
            } else {
                (lo + step * i as f64).exp()
            };
            inf = inf.min(self.gamma_ratio(t)?);
        }
        Ok(inf)
    }
}

/// Both sides of `t (1+t)^(-theta) ((1+t)^p - 1) >= ((1+t)^((p+1-theta)/2) - 1)^2 / (p+1)`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct PointwiseCheck {
    pub lhs: f64,
    pub rhs: f64,
    pub holds: bool,
}

/// Slack granted to the pointwise inequality: `1e-12` absolute, scaled up with
/// the magnitude of the right-hand side so that rounding at large `t` is not
/// read as a violation.
pub const POINTWISE_SLACK: f64 = 1e-12;

pub fn check_pointwise_inequality(p: f64, theta: f64, t: f64) -> Result<PointwiseCheck> {
    if !(p > 1.0 && p.is_finite()) {
        return domain(format!("p must be > 1, got {p}"));
    }
    if !(theta > 0.0 && theta <= 1.0) {
        return domain(format!("theta must lie in (0, 1], got {theta}"));
    }
    if !(t >= 0.0 && t.is_finite()) {
        return domain(format!("t must be finite and >= 0, got {t}"));
    }
    let l = t.ln_1p();
    let lhs = t * (-theta * l).exp() * (p * l).exp_m1();
    let half = 0.5 * (p + 1.0 - theta);
    let rhs = (half * l).exp_m1().powi(2) / (p + 1.0);
    let holds = lhs >= rhs - POINTWISE_SLACK * rhs.max(1.0);
    Ok(PointwiseCheck { lhs, rhs, holds })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn fam(theta: f64) -> CoefficientFamily {
        CoefficientFamily::new(theta).unwrap()
    }

    #[test]
    fn b_values() {
        assert_eq!(fam(0.5).b(0.0).unwrap(), 1.0);
        assert!((fam(0.5).b(3.0).unwrap() - 0.5).abs() < 1e-15);
        assert!((fam(1.0).b(9.0).unwrap() - 0.1).abs() < 1e-15);
        assert!(fam(0.5).b(-1.0).is_err());
    }

    #[test]
    fn primitive_values() {
        assert_eq!(fam(0.5).primitive(0.0).unwrap(), 0.0);
        assert!((fam(0.5).primitive(3.0).unwrap() - 2.0).abs() < 1e-14);
        let e = std::f64::consts::E;
        assert!((fam(1.0).primitive(e - 1.0).unwrap() - 1.0).abs() < 1e-15);
        assert!(fam(1.0).primitive(-0.1).is_err());
    }

    #[test]
    fn inverse_values() {
        assert_eq!(fam(0.5).primitive_inv(0.0).unwrap(), 0.0);
        assert!((fam(0.5).primitive_inv(2.0).unwrap() - 3.0).abs() < 1e-14);
        assert!((fam(1.0).primitive_inv(2f64.ln()).unwrap() - 1.0).abs() < 1e-15);
        assert!(fam(0.5).primitive_inv(-2.0).is_err());
    }

    #[test]
    fn boundary_values() {
        assert!((fam(0.5).boundary_nonlinearity(2.0).unwrap() - 1.5).abs() < 1e-14);
        assert!((fam(1.0).boundary_nonlinearity(2f64.ln()).unwrap() - 0.5).abs() < 1e-15);
        for theta in [0.1, 0.5, 1.0] {
            assert_eq!(fam(theta).boundary_nonlinearity(0.0).unwrap(), 0.0);
        }
        assert_eq!(fam(1.0).sup_f(), 1.0);
        assert!(fam(0.99).sup_f().is_infinite());
        assert!(fam(1.0).boundary_nonlinearity(-1.0).is_err());
    }

    #[test]
    fn unit_family_is_identity() {
        let u = CoefficientFamily::unit();
        assert_eq!(u.b(7.0).unwrap(), 1.0);
        assert!((u.primitive(7.0).unwrap() - 7.0).abs() < 1e-13);
        assert!((u.primitive_inv(7.0).unwrap() - 7.0).abs() < 1e-13);
        assert!((u.boundary_nonlinearity(7.0).unwrap() - 7.0).abs() < 1e-13);
    }

    #[test]
    fn near_log_limit_is_continuous() {
        let t = 123.0;
        let a = fam(1.0 - 1e-12).primitive(t).unwrap();
        let b = fam(1.0).primitive(t).unwrap();
        assert!((a - b).abs() < 1e-9);
    }

    #[test]
    fn rejects_bad_theta() {
        assert!(CoefficientFamily::new(0.0).is_err());
        assert!(CoefficientFamily::new(1.5).is_err());
        assert!(CoefficientFamily::new(f64::NAN).is_err());
    }

    #[test]
    fn gamma_infimum_examples() {
        let g = fam(0.5).gamma_condition_infimum(1e8, 10_000).unwrap();
        assert!((g - 0.5).abs() < 1e-3, "{g}");
        let g = fam(1.0).gamma_condition_infimum(1e8, 10_000).unwrap();
        assert!(g <= 0.06, "{g}");
        let g = fam(0.9).gamma_condition_infimum(1e12, 10_000).unwrap();
        assert!((g - 0.1).abs() < 1e-2, "{g}");
        assert!(fam(0.5).gamma_condition_infimum(1e8, 10).is_err());
        assert!(fam(0.5).gamma_condition_infimum(-1.0, 1000).is_err());
    }

    #[test]
    fn gamma_ratio_limit_at_zero() {
        assert_eq!(fam(0.3).gamma_ratio(0.0).unwrap(), 1.0);
        assert!((fam(0.3).gamma_ratio(1e-12).unwrap() - 1.0).abs() < 1e-9);
    }

    #[test]
    fn pointwise_examples() {
        let c = check_pointwise_inequality(2.0, 0.5, 0.0).unwrap();
        assert_eq!((c.lhs, c.rhs, c.holds), (0.0, 0.0, true));
        let c = check_pointwise_inequality(2.0, 1.0, 1.0).unwrap();
        assert!((c.lhs - 1.5).abs() < 1e-14);
        assert!((c.rhs - 1.0 / 3.0).abs() < 1e-14);
        assert!(c.holds);
        assert!(check_pointwise_inequality(1.5, 0.3, 1e4).unwrap().holds);
        assert!(check_pointwise_inequality(1.0, 0.3, 1.0).is_err());
        assert!(check_pointwise_inequality(2.0, 0.0, 1.0).is_err());
        assert!(check_pointwise_inequality(2.0, 0.5, -1.0).is_err());
    }
}
