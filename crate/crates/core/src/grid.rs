//! Radial meshes, grid functions and the exact power-weight moments used by
//! both the solver and the norm computations.

use serde::Serialize;

use crate::error::{Error, Result};

/// Area of the unit sphere `S^{N-1}`, i.e. `2 pi^{N/2} / Gamma(N/2)`.
pub fn sphere_area(dim: u32) -> f64 {
    use std::f64::consts::PI;
    // |S^0| = 2, |S^1| = 2 pi, |S^{k+1}| = 2 pi / k |S^{k-1}|
    let (mut area, mut k) = if dim % 2 == 1 { (2.0, 1) } else { (2.0 * PI, 2) };
    while k < dim {
        area *= 2.0 * PI / k as f64;
        k += 2;
    }
    area
}

pub fn ball_volume(dim: u32, radius: f64) -> f64 {
    sphere_area(dim) * radius.powi(dim as i32) / dim as f64
}

/// `(d^k - c^k) / k` for `0 <= c <= d` and `k > 0`, without cancellation when `d - c << c`.
pub fn pow_diff(k: f64, c: f64, d: f64) -> f64 {
    if c <= 0.0 {
        return d.powf(k) / k;
    }
    c.powf(k) * (k * ((d - c) / c).ln_1p()).exp_m1() / k
}

/// `int_c^d r^a dr`.
pub fn power_integral(a: f64, c: f64, d: f64) -> f64 {
    pow_diff(a + 1.0, c, d)
}

/// Hat-function moments of `r^a` over the cell `[c, d]`:
/// `(int r^a (d-r)/h, int r^a (r-c)/h)`, the shares of the left and right node.
pub fn hat_moments(a: f64, c: f64, d: f64) -> (f64, f64) {
    let h = d - c;
    let m0 = pow_diff(a + 1.0, c, d);
    let m1 = pow_diff(a + 2.0, c, d);
    ((d * m0 - m1) / h, (m1 - c * m0) / h)
}

/// Nodes `r_i = R (i/M)^g`, `i = 0..=M`.
pub fn graded_mesh(radius: f64, intervals: usize, grading: f64) -> Result<Vec<f64>> {
    if intervals < 2 {
        return Err(Error::InvalidSpec(format!(
            "mesh needs at least 2 intervals, got {intervals}"
        )));
    }
    if !(grading >= 1.0 && grading.is_finite()) {
        return Err(Error::InvalidSpec(format!(
            "grading exponent must be >= 1, got {grading}"
        )));
    }
    let m = intervals as f64;
    let mut nodes: Vec<f64> = (0..=intervals)
        .map(|i| radius * (i as f64 / m).powf(grading))
        .collect();
    nodes[intervals] = radius;
    Ok(nodes)
}

/// Samples of a radial field on `[r_0, R]` in `N` dimensions.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct RadialGridFunction {
    nodes: Vec<f64>,
    values: Vec<f64>,
    dim: u32,
}

impl RadialGridFunction {
    pub fn new(nodes: Vec<f64>, values: Vec<f64>, dim: u32) -> Result<Self> {
        if nodes.len() < 2 || nodes.len() != values.len() {
            return Err(Error::Domain(format!(
                "need matching node/value arrays of length >= 2 (got {} and {})",
                nodes.len(),
                values.len()
            )));
        }
        if !(nodes[0] >= 0.0) || nodes.windows(2).any(|w| !(w[1] > w[0])) {
            return Err(Error::Domain(
                "nodes must be strictly increasing and start at r >= 0".into(),
            ));
        }
        if values.iter().any(|v| !v.is_finite()) {
            return Err(Error::Domain("grid values must be finite".into()));
        }
        if dim < 1 {
            return Err(Error::Domain("dimension must be positive".into()));
        }
        Ok(Self { nodes, values, dim })
    }

    pub fn from_fn(nodes: Vec<f64>, dim: u32, f: impl Fn(f64) -> f64) -> Result<Self> {
        let values = nodes.iter().map(|&r| f(r)).collect();
        Self::new(nodes, values, dim)
    }

    pub fn nodes(&self) -> &[f64] {
        &self.nodes
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }

    pub fn dim(&self) -> u32 {
        self.dim
    }

    pub fn radius(&self) -> f64 {
        *self.nodes.last().unwrap()
    }

    pub fn len(&self) -> usize {
        self.nodes.len()
    }

    pub fn is_empty(&self) -> bool {
        self.nodes.is_empty()
    }

    pub fn max_abs(&self) -> f64 {
        self.values.iter().fold(0.0, |m, v| m.max(v.abs()))
    }

    pub fn boundary_value(&self) -> f64 {
        *self.values.last().unwrap()
    }

    pub fn map(&self, f: impl Fn(f64) -> f64) -> Result<Self> {
        Self::new(
            self.nodes.clone(),
            self.values.iter().map(|&v| f(v)).collect(),
            self.dim,
        )
    }

    /// `omega_{N-1} int hat_i r^{N-1} dr`: the trapezoid rule with the radial
    /// weight integrated exactly against each hat function.
    pub fn nodal_weights(&self) -> Vec<f64> {
        let a = self.dim as f64 - 1.0;
        let omega = sphere_area(self.dim);
        let mut w = vec![0.0; self.nodes.len()];
        for (i, cell) in self.nodes.windows(2).enumerate() {
            let (left, right) = hat_moments(a, cell[0], cell[1]);
            w[i] += omega * left;
            w[i + 1] += omega * right;
        }
        w
    }

    /// `omega_{N-1} int_cell r^{N-1} dr` for each cell.
    pub fn cell_volumes(&self) -> Vec<f64> {
        let a = self.dim as f64 - 1.0;
        let omega = sphere_area(self.dim);
        self.nodes
            .windows(2)
            .map(|c| omega * power_integral(a, c[0], c[1]))
            .collect()
    }

    /// Difference quotients `(u_{i+1} - u_i)/h_i`, one per cell.
    pub fn cell_gradients(&self) -> Vec<f64> {
        self.nodes
            .windows(2)
            .zip(self.values.windows(2))
            .map(|(r, u)| (u[1] - u[0]) / (r[1] - r[0]))
            .collect()
    }
}
