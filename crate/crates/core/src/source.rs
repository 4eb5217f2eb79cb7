//! Radial source terms `f(r)` and their hat-function moments.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::grid::{power_integral, sphere_area};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum Source {
    /// `f = A |x|^{-gamma}`.
    Power { amplitude: f64, gamma: f64 },
    /// Samples `(r, f(r))`, linearly interpolated and held constant outside.
    Tabulated { samples: Vec<(f64, f64)> },
}

// 5-point Gauss-Legendre on [-1, 1]
const GL_X: [f64; 5] = [
    0.0,
    -0.538_469_310_105_683_1,
    0.538_469_310_105_683_1,
    -0.906_179_845_938_664,
    0.906_179_845_938_664,
];
const GL_W: [f64; 5] = [
    0.568_888_888_888_888_9,
    0.478_628_670_499_366_5,
    0.478_628_670_499_366_5,
    0.236_926_885_056_189_1,
    0.236_926_885_056_189_1,
];

impl Source {
    pub fn validate(&self, dim: u32) -> Result<()> {
        match self {
            Source::Power { amplitude, gamma } => {
                if !(amplitude.is_finite() && *amplitude >= 0.0) {
                    return Err(Error::InvalidSpec(format!(
                        "amplitude must be finite and >= 0, got {amplitude}"
                    )));
                }
                if !(*gamma >= 0.0 && *gamma < dim as f64) {
                    return Err(Error::InvalidSpec(format!(
                        "gamma must lie in [0, N), got {gamma}"
                    )));
                }
            }
            Source::Tabulated { samples } => {
                if samples.len() < 2 {
                    return Err(Error::InvalidSpec(
                        "tabulated source needs at least two samples".into(),
                    ));
                }
                if samples.windows(2).any(|w| !(w[1].0 > w[0].0))
                    || samples.iter().any(|(r, f)| !(r.is_finite() && f.is_finite()))
                {
                    return Err(Error::InvalidSpec(
                        "tabulated source radii must be finite and strictly increasing".into(),
                    ));
                }
            }
        }
        Ok(())
    }

    pub fn is_zero(&self) -> bool {
        match self {
            Source::Power { amplitude, .. } => *amplitude == 0.0,
            Source::Tabulated { samples } => samples.iter().all(|s| s.1 == 0.0),
        }
    }

    /// `f(r)` (before any truncation). Infinite at `r = 0` for singular power sources.
    pub fn value(&self, r: f64) -> f64 {
        match self {
            Source::Power { amplitude, gamma } => {
                if *amplitude == 0.0 {
                    0.0
                } else if *gamma == 0.0 {
                    *amplitude
                } else {
                    amplitude * r.powf(-gamma)
                }
            }
            Source::Tabulated { samples } => interpolate(samples, r),
        }
    }

    /// `T_n(f)(r)`.
    pub fn truncated_value(&self, r: f64, level: Option<f64>) -> f64 {
        let f = self.value(r);
        match level {
            Some(n) => f.clamp(-n, n),
            None => f,
        }
    }

    /// `(int_c^d f_n r^{N-1} (d-r)/h dr, int_c^d f_n r^{N-1} (r-c)/h dr)`:
    /// the load shared by the two nodes of the cell `[c, d]`.
    pub fn hat_load(&self, dim: u32, c: f64, d: f64, level: Option<f64>) -> (f64, f64) {
        let a = dim as f64 - 1.0;
        match self {
            Source::Power { amplitude, gamma } => {
                if *amplitude == 0.0 {
                    return (0.0, 0.0);
                }
                // below r_c the truncated source is the constant n
                let r_c = match level {
                    Some(n) if *gamma == 0.0 => {
                        if *amplitude > n {
                            f64::INFINITY
                        } else {
                            0.0
                        }
                    }
                    Some(n) if *amplitude > 0.0 => (amplitude / n).powf(1.0 / gamma),
                    _ => 0.0,
                };
                let split = r_c.clamp(c, d);
                let mut left = 0.0;
                let mut right = 0.0;
                if split > c {
                    let n = level.unwrap();
                    let (l, r) = piece_moments(a, n, c, split, c, d);
                    left += l;
                    right += r;
                }
                if split < d {
                    let (l, r) = piece_moments(a - gamma, *amplitude, split, d, c, d);
                    left += l;
                    right += r;
                }
                (left, right)
            }
            Source::Tabulated { .. } => {
                let h = d - c;
                let (mut left, mut right) = (0.0, 0.0);
                for (x, w) in GL_X.iter().zip(GL_W) {
                    let r = c + 0.5 * h * (1.0 + x);
                    let g = self.truncated_value(r, level) * r.powf(a) * 0.5 * w;
                    left += g * (d - r);
                    right += g * (r - c);
                }
                (left, right)
            }
        }
    }

    /// `int_c^d f_n r^{N-1} dr` on a cell.
    pub fn cell_integral(&self, dim: u32, c: f64, d: f64, level: Option<f64>) -> f64 {
        let (l, r) = self.hat_load(dim, c, d, level);
        l + r
    }

    /// `||f||_{L^q(B_R)}` in closed form for power sources (infinite when
    /// `q gamma >= N`); by fine quadrature for tabulated ones.
    pub fn lq_norm(&self, dim: u32, radius: f64, q: f64) -> f64 {
        let omega = sphere_area(dim);
        let n = dim as f64;
        match self {
            Source::Power { amplitude, gamma } => {
                if *amplitude == 0.0 {
                    return 0.0;
                }
                if q.is_infinite() {
                    return if *gamma == 0.0 { *amplitude } else { f64::INFINITY };
                }
                let e = n - q * gamma;
                if e <= 0.0 {
                    return f64::INFINITY;
                }
                amplitude * (omega * radius.powf(e) / e).powf(1.0 / q)
            }
            Source::Tabulated { .. } => {
                let cells = 4096;
                let mut acc = 0.0;
                for k in 0..cells {
                    let c = radius * k as f64 / cells as f64;
                    let d = radius * (k + 1) as f64 / cells as f64;
                    for (x, w) in GL_X.iter().zip(GL_W) {
                        let r = c + 0.5 * (d - c) * (1.0 + x);
                        acc += 0.5 * (d - c) * w * self.value(r).abs().powf(q) * r.powf(n - 1.0);
                    }
                }
                (omega * acc).powf(1.0 / q)
            }
        }
    }
}

/// Hat moments over the piece `[p, q]` of the cell `[c, d]` for the integrand `coef r^a`.
fn piece_moments(a: f64, coef: f64, p: f64, q: f64, c: f64, d: f64) -> (f64, f64) {
    let h = d - c;
    let m0 = power_integral(a, p, q);
    let m1 = power_integral(a + 1.0, p, q);
    (coef * (d * m0 - m1) / h, coef * (m1 - c * m0) / h)
}

fn interpolate(samples: &[(f64, f64)], r: f64) -> f64 {
    let first = samples[0];
    let last = samples[samples.len() - 1];
    if r <= first.0 {
        return first.1;
    }
    if r >= last.0 {
        return last.1;
    }
    let k = samples.partition_point(|s| s.0 <= r);
    let (r0, f0) = samples[k - 1];
    let (r1, f1) = samples[k];
    f0 + (f1 - f0) * (r - r0) / (r1 - r0)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn constant_source_moments() {
        let s = Source::Power {
            amplitude: 2.0,
            gamma: 0.0,
        };
        // int_0^1 2 r^2 (1-r) = 1/6, int_0^1 2 r^3 = 1/2
        let (l, r) = s.hat_load(3, 0.0, 1.0, None);
        assert!((l - 1.0 / 6.0).abs() < 1e-15 && (r - 0.5).abs() < 1e-15);
        assert_eq!(s.hat_load(3, 0.0, 1.0, Some(1.0)), (l / 2.0, r / 2.0));
    }

    #[test]
    fn truncated_power_moments_split_at_level() {
        let s = Source::Power {
            amplitude: 1.0,
            gamma: 1.0,
        };
        // T_4(1/r) = 4 on [0, 1/4]; check the cell integral against brute force
        let exact = s.cell_integral(3, 0.0, 0.5, Some(4.0));
        let m = 200_000;
        let brute: f64 = (0..m)
            .map(|k| {
                let r = 0.5 * (k as f64 + 0.5) / m as f64;
                s.truncated_value(r, Some(4.0)) * r * r * 0.5 / m as f64
            })
            .sum();
        assert!((exact - brute).abs() < 1e-9, "{exact} vs {brute}");
    }

    #[test]
    fn tabulated_matches_power_for_linear_profile() {
        let tab = Source::Tabulated {
            samples: vec![(0.0, 1.0), (1.0, 3.0)],
        };
        assert!((tab.value(0.5) - 2.0).abs() < 1e-15);
        assert_eq!(tab.value(2.0), 3.0);
        // int_0^1 (1 + 2r) r^2 dr = 1/3 + 1/2
        assert!((tab.cell_integral(3, 0.0, 1.0, None) - 5.0 / 6.0).abs() < 1e-13);
    }

    #[test]
    fn lq_norms() {
        let s = Source::Power {
            amplitude: 1.0,
            gamma: 1.0,
        };
        // ||1/|x|||_2^2 on B_1 in 3D = 4 pi
        let v = s.lq_norm(3, 1.0, 2.0);
        assert!((v * v - 4.0 * std::f64::consts::PI).abs() < 1e-12);
        assert!(s.lq_norm(3, 1.0, 3.0).is_infinite());
    }

    #[test]
    fn validation() {
        assert!(Source::Power { amplitude: -1.0, gamma: 0.0 }.validate(3).is_err());
        assert!(Source::Power { amplitude: 1.0, gamma: 3.0 }.validate(3).is_err());
        assert!(Source::Tabulated { samples: vec![(0.0, 1.0)] }.validate(3).is_err());
        assert!(Source::Tabulated { samples: vec![(0.5, 1.0), (0.2, 1.0)] }
            .validate(3)
            .is_err());
    }
}
