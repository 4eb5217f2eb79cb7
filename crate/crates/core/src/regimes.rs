//! Regularity regimes for the datum `f in L^q` and the exponents each regime produces.
//!
//! The classifier is generic over the scalar type so that thresholds can be
//! compared in exact rational arithmetic ([`BigRational`]) when the inputs are
//! given as decimals or fractions, and in `f64` otherwise.

use std::fmt;
use std::str::FromStr;

use num_bigint::BigInt;
use num_rational::BigRational;
use num_traits::{FromPrimitive, Num, ToPrimitive};
use serde::Serialize;

use crate::error::{domain, Result};

/// Scalar field the exponent calculus runs in.
pub trait ExponentField: Clone + PartialOrd + Num + FromPrimitive + fmt::Display {
    fn to_f64_lossy(&self) -> f64;
}

impl ExponentField for f64 {
    fn to_f64_lossy(&self) -> f64 {
        *self
    }
}

impl ExponentField for BigRational {
    fn to_f64_lossy(&self) -> f64 {
        self.to_f64().unwrap_or(f64::NAN)
    }
}

/// Ordered from weakest to strongest conclusion.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Serialize)]
pub enum Regime {
    /// Below every window covered by an existence theorem.
    BelowScope,
    /// Solutions in `W^{1,s}` with `s < 2`, tested against `W^{1,s'}`.
    NonEnergy,
    /// Solutions in `H^1 cap L^{q**(1-theta)}`.
    Energy,
    /// `q > N/2`: bounded solutions (needs the Gamma condition, i.e. `theta < 1`).
    Bounded,
}

impl fmt::Display for Regime {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let s = match self {
            Regime::BelowScope => "BelowScope",
            Regime::NonEnergy => "NonEnergy",
            Regime::Energy => "Energy",
            Regime::Bounded => "Bounded",
        };
        f.write_str(s)
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct RegimeReport<T> {
    pub dim: u32,
    pub theta: T,
    pub q: T,
    pub regime: Regime,
    /// `N/2`.
    pub q_bounded: T,
    /// `2N / (N + 2 - theta (N - 2))`.
    pub q_lower_energy: T,
    /// `(2N - N theta) / (N + 2 - N theta)`.
    pub q_lower_nonenergy: T,
    /// Whether `t b(t) >= Gamma B(t)` holds for some `Gamma > 0` (true iff `theta < 1`).
    /// Without it a `Bounded` classification gives no existence guarantee.
    pub gamma_condition: bool,
    /// `qN / (N - 2q)`.
    pub q_double_star: Option<T>,
    /// `q** (1 - theta)`.
    pub summability_exponent: Option<T>,
    /// `(2N - N theta) / (N - theta)`.
    pub s: Option<T>,
    /// `theta s / (2 - s)`.
    pub s_conj: Option<T>,
    /// `(1 - theta) N (q - 1) / (N - 2q)`.
    pub p_test: Option<T>,
    /// `p_test + 1 - theta`.
    pub trace_exponent: Option<T>,
}

impl<T: ExponentField> RegimeReport<T> {
    pub fn to_f64(&self) -> RegimeReport<f64> {
        self.map(|x| x.to_f64_lossy())
    }

    pub fn to_strings(&self) -> RegimeReport<String> {
        self.map(|x| x.to_string())
    }

    fn map<U>(&self, f: impl Fn(&T) -> U) -> RegimeReport<U> {
        RegimeReport {
            dim: self.dim,
            theta: f(&self.theta),
            q: f(&self.q),
            regime: self.regime,
            q_bounded: f(&self.q_bounded),
            q_lower_energy: f(&self.q_lower_energy),
            q_lower_nonenergy: f(&self.q_lower_nonenergy),
            gamma_condition: self.gamma_condition,
            q_double_star: self.q_double_star.as_ref().map(&f),
            summability_exponent: self.summability_exponent.as_ref().map(&f),
            s: self.s.as_ref().map(&f),
            s_conj: self.s_conj.as_ref().map(&f),
            p_test: self.p_test.as_ref().map(&f),
            trace_exponent: self.trace_exponent.as_ref().map(&f),
        }
    }
}

fn int<T: ExponentField>(n: u32) -> T {
    T::from_u32(n).expect("small integers are representable")
}

pub fn lower_energy_threshold<T: ExponentField>(dim: u32, theta: &T) -> T {
    let n: T = int(dim);
    int::<T>(2) * n.clone() / (n.clone() + int(2) - theta.clone() * (n - int(2)))
}

pub fn lower_nonenergy_threshold<T: ExponentField>(dim: u32, theta: &T) -> T {
    let n: T = int(dim);
    let nt = n.clone() * theta.clone();
    (int::<T>(2) * n.clone() - nt.clone()) / (n + int(2) - nt)
}

/// `s = (2N - N theta)/(N - theta)`.
pub fn nonenergy_gradient_exponent<T: ExponentField>(dim: u32, theta: &T) -> T {
    let n: T = int(dim);
    (int::<T>(2) * n.clone() - n.clone() * theta.clone()) / (n - theta.clone())
}

/// `p = (1 - theta) N (q - 1)/(N - 2q)`, the power in the test function
/// `(1+|u|)^p - 1` that makes `p q' = (p + 1 - theta) 2*/2`.
pub fn test_exponent<T: ExponentField>(dim: u32, theta: &T, q: &T) -> T {
    let n: T = int(dim);
    (T::one() - theta.clone()) * n.clone() * (q.clone() - T::one()) / (n - int::<T>(2) * q.clone())
}

pub fn double_star<T: ExponentField>(dim: u32, q: &T) -> T {
    let n: T = int(dim);
    q.clone() * n.clone() / (n - int::<T>(2) * q.clone())
}

/// Sobolev exponent `2* = 2N/(N-2)`.
pub fn sobolev_two_star<T: ExponentField>(dim: u32) -> T {
    let n: T = int(dim);
    int::<T>(2) * n.clone() / (n - int(2))
}

pub fn classify<T: ExponentField>(dim: u32, theta: T, q: T) -> Result<RegimeReport<T>> {
    if dim < 3 {
        return domain(format!("dimension must be at least 3, got {dim}"));
    }
    if !(theta > T::zero() && theta <= T::one()) {
        return domain(format!("theta must lie in (0, 1], got {theta}"));
    }
    if !(q > T::one()) {
        return domain(format!("q must exceed 1, got {q}"));
    }
    let q_bounded = int::<T>(dim) / int(2);
    let q_lower_energy = lower_energy_threshold(dim, &theta);
    let q_lower_nonenergy = lower_nonenergy_threshold(dim, &theta);
    let gamma_condition = theta < T::one();

    // q = N/2 is covered through L^{N/2} in L^{q'} for q' < N/2 whenever the
    // Energy window is non-empty; the exponents themselves blow up there.
    let regime = if q > q_bounded {
        Regime::Bounded
    } else if q >= q_lower_energy && q_lower_energy < q_bounded {
        Regime::Energy
    } else if q >= q_lower_nonenergy && q < q_lower_energy {
        Regime::NonEnergy
    } else {
        Regime::BelowScope
    };

    let mut report = RegimeReport {
        dim,
        theta: theta.clone(),
        q: q.clone(),
        regime,
        q_bounded: q_bounded.clone(),
        q_lower_energy,
        q_lower_nonenergy,
        gamma_condition,
        q_double_star: None,
        summability_exponent: None,
        s: None,
        s_conj: None,
        p_test: None,
        trace_exponent: None,
    };
    match regime {
        Regime::Energy if q < q_bounded => {
            let qss = double_star(dim, &q);
            let p = test_exponent(dim, &theta, &q);
            report.summability_exponent = Some(qss.clone() * (T::one() - theta.clone()));
            report.trace_exponent = Some(p.clone() + T::one() - theta.clone());
            report.q_double_star = Some(qss);
            report.p_test = Some(p);
        }
        Regime::NonEnergy => {
            let s = nonenergy_gradient_exponent(dim, &theta);
            report.q_double_star = Some(double_star(dim, &q));
            report.s_conj = Some(theta.clone() * s.clone() / (int::<T>(2) - s.clone()));
            report.s = Some(s);
        }
        _ => {}
    }
    Ok(report)
}

/// Summability of `f = A |x|^{-gamma}` on a ball: it belongs to `L^q` exactly
/// for `q < N/gamma` and to the Marcinkiewicz space of index `N/gamma`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct PowerSummability {
    pub marcinkiewicz_index: f64,
    /// Supremum (not attained) of the Lebesgue exponents.
    pub lebesgue_sup: f64,
}

pub fn power_source_summability(dim: u32, gamma: f64) -> Result<PowerSummability> {
    if !(gamma >= 0.0 && gamma < dim as f64) {
        return domain(format!("gamma must lie in [0, N) = [0, {dim}), got {gamma}"));
    }
    let idx = if gamma == 0.0 {
        f64::INFINITY
    } else {
        dim as f64 / gamma
    };
    Ok(PowerSummability {
        marcinkiewicz_index: idx,
        lebesgue_sup: idx,
    })
}

/// Parses `"9/7"`, `"-3"` or a plain decimal such as `"1.4"` into an exact rational.
///
/// Returns `None` for anything else (exponent notation, `inf`, ...), in which
/// case callers fall back to floating point.
pub fn parse_exact(text: &str) -> Option<BigRational> {
    let text = text.trim();
    if text.contains('/') {
        return BigRational::from_str(text).ok();
    }
    let (neg, body) = match text.strip_prefix('-') {
        Some(rest) => (true, rest),
        None => (false, text.strip_prefix('+').unwrap_or(text)),
    };
    let (int_part, frac_part) = body.split_once('.').unwrap_or((body, ""));
    if int_part.is_empty() && frac_part.is_empty() {
        return None;
    }
    if !int_part.chars().chain(frac_part.chars()).all(|c| c.is_ascii_digit()) {
        return None;
    }
    let digits = format!("{int_part}{frac_part}");
    let numer = BigInt::from_str(if digits.is_empty() { "0" } else { &digits }).ok()?;
    let denom = num_traits::pow(BigInt::from(10), frac_part.len());
    let r = BigRational::new(numer, denom);
    Some(if neg { -r } else { r })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn rat(s: &str) -> BigRational {
        parse_exact(s).unwrap()
    }

    #[test]
    fn parses_decimals_and_fractions() {
        assert_eq!(rat("0.5"), BigRational::new(1.into(), 2.into()));
        assert_eq!(rat("1.4"), BigRational::new(7.into(), 5.into()));
        assert_eq!(rat("9/7"), BigRational::new(9.into(), 7.into()));
        assert_eq!(rat("-2"), BigRational::from_integer((-2).into()));
        assert!(parse_exact("1e-3").is_none());
        assert!(parse_exact(".").is_none());
    }

    #[test]
    fn bounded_example() {
        let r = classify(3, 0.5, 2.0).unwrap();
        assert_eq!(r.regime, Regime::Bounded);
        assert!(r.q_double_star.is_none());
        assert!(r.gamma_condition);
        assert!(!classify(3, 1.0, 2.0).unwrap().gamma_condition);
    }

    #[test]
    fn energy_example_exact() {
        let r = classify(3, rat("0.5"), rat("1.4")).unwrap();
        assert_eq!(r.regime, Regime::Energy);
        assert_eq!(r.q_lower_energy, rat("4/3"));
        assert_eq!(r.q_lower_nonenergy, rat("9/7"));
        assert_eq!(r.q_bounded, rat("3/2"));
        assert_eq!(r.q_double_star, Some(rat("21")));
        assert_eq!(r.summability_exponent, Some(rat("10.5")));
        assert_eq!(r.p_test, Some(rat("3")));
        assert_eq!(r.trace_exponent, Some(rat("3.5")));
        assert!(r.s.is_none());
    }

    #[test]
    fn nonenergy_example_exact() {
        let r = classify(3, rat("0.5"), rat("1.3")).unwrap();
        assert_eq!(r.regime, Regime::NonEnergy);
        assert_eq!(r.s, Some(rat("1.8")));
        assert_eq!(r.s_conj, Some(rat("4.5")));
        assert!(r.p_test.is_none());
    }

    #[test]
    fn window_edges_follow_inequalities() {
        // lower thresholds belong to their windows
        assert_eq!(classify(3, rat("1/2"), rat("4/3")).unwrap().regime, Regime::Energy);
        assert_eq!(classify(3, rat("1/2"), rat("9/7")).unwrap().regime, Regime::NonEnergy);
        assert_eq!(
            classify(3, rat("1/2"), rat("9/7") - rat("1/1000000")).unwrap().regime,
            Regime::BelowScope
        );
        // q = N/2 is never Bounded
        let r = classify(3, rat("1/2"), rat("3/2")).unwrap();
        assert_eq!(r.regime, Regime::Energy);
        assert!(r.q_double_star.is_none());
        // theta = 1 empties both windows
        assert_eq!(classify(3, rat("1"), rat("3/2")).unwrap().regime, Regime::BelowScope);
        assert_eq!(classify(3, rat("1"), rat("1.49")).unwrap().regime, Regime::BelowScope);
    }

    #[test]
    fn rejects_out_of_domain() {
        assert!(classify(2, 0.5, 2.0).is_err());
        assert!(classify(3, 0.0, 2.0).is_err());
        assert!(classify(3, 1.1, 2.0).is_err());
        assert!(classify(3, 0.5, 1.0).is_err());
    }

    #[test]
    fn power_summability() {
        let s = power_source_summability(3, 1.0).unwrap();
        assert_eq!((s.marcinkiewicz_index, s.lebesgue_sup), (3.0, 3.0));
        let s = power_source_summability(3, 0.0).unwrap();
        assert!(s.marcinkiewicz_index.is_infinite() && s.lebesgue_sup.is_infinite());
        let s = power_source_summability(4, 1.6).unwrap();
        assert!((s.marcinkiewicz_index - 2.5).abs() < 1e-15);
        assert!(power_source_summability(3, 3.0).is_err());
        assert!(power_source_summability(3, -0.1).is_err());
    }
}
