//! Thomas algorithm for tridiagonal systems.

use crate::error::{Error, Result};

/// `lower[i]` couples row `i+1` to column `i`, `upper[i]` row `i` to column `i+1`.
#[derive(Debug, Clone, PartialEq)]
pub struct Tridiagonal {
    pub lower: Vec<f64>,
    pub diag: Vec<f64>,
    pub upper: Vec<f64>,
}

impl Tridiagonal {
    pub fn len(&self) -> usize {
        self.diag.len()
    }

    pub fn is_empty(&self) -> bool {
        self.diag.is_empty()
    }

    pub fn mul_vec(&self, x: &[f64]) -> Vec<f64> {
        let n = self.len();
        (0..n)
            .map(|i| {
                let mut s = self.diag[i] * x[i];
                if i > 0 {
                    s += self.lower[i - 1] * x[i - 1];
                }
                if i + 1 < n {
                    s += self.upper[i] * x[i + 1];
                }
                s
            })
            .collect()
    }

    /// Solves `A x = rhs` without pivoting; fine for the diagonally dominant
    /// M-matrices produced by the assembly.
    pub fn solve(&self, rhs: &[f64]) -> Result<Vec<f64>> {
        let n = self.len();
        assert_eq!(rhs.len(), n);
        assert!(self.lower.len() + 1 == n && self.upper.len() + 1 == n);
        let mut c = vec![0.0; n];
        let mut x = vec![0.0; n];
        let mut denom = self.diag[0];
        for i in 0..n {
            if i > 0 {
                denom = self.diag[i] - self.lower[i - 1] * c[i - 1];
            }
            if denom == 0.0 || !denom.is_finite() {
                return Err(Error::Domain(format!("singular tridiagonal pivot at row {i}")));
            }
            if i + 1 < n {
                c[i] = self.upper[i] / denom;
            }
            let prev = if i > 0 { self.lower[i - 1] * x[i - 1] } else { 0.0 };
            x[i] = (rhs[i] - prev) / denom;
        }
        for i in (0..n - 1).rev() {
            x[i] -= c[i] * x[i + 1];
        }
        Ok(x)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn solves_small_system() {
        let a = Tridiagonal {
            lower: vec![-1.0, -1.0, -1.0],
            diag: vec![2.0, 2.0, 2.0, 2.0],
            upper: vec![-1.0, -1.0, -1.0],
        };
        let x = vec![1.0, -2.0, 3.0, 0.5];
        let b = a.mul_vec(&x);
        let y = a.solve(&b).unwrap();
        for (p, q) in x.iter().zip(&y) {
            assert!((p - q).abs() < 1e-14);
        }
    }

    #[test]
    fn singular_pivot() {
        let a = Tridiagonal {
            lower: vec![1.0],
            diag: vec![0.0, 1.0],
            upper: vec![1.0],
        };
        assert!(a.solve(&[1.0, 1.0]).is_err());
    }
}
