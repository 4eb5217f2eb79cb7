//! Lebesgue, Sobolev, trace and Marcinkiewicz (weak-`L^p`) norms of radial grid functions.
//!
//! Integrals are over the sampled shell `[r_0, R]` of the `N`-ball, using the
//! nodal weights of [`RadialGridFunction::nodal_weights`] (trapezoid with the
//! `r^{N-1}` weight folded in). Gradients are the cell difference quotients,
//! the same ones the solver's weak form uses.

use serde::Serialize;

use crate::error::{domain, Result};
use crate::grid::{sphere_area, RadialGridFunction};

fn check_exponent(p: f64, min: f64) -> Result<()> {
    if !(p >= min && p.is_finite()) {
        return domain(format!("exponent must be >= {min} and finite, got {p}"));
    }
    Ok(())
}

/// `int |g|^p dx`.
pub fn lp_integral(g: &RadialGridFunction, p: f64) -> f64 {
    g.nodal_weights()
        .iter()
        .zip(g.values())
        .map(|(w, v)| w * v.abs().powf(p))
        .sum()
}

pub fn lp_norm(g: &RadialGridFunction, p: f64) -> Result<f64> {
    check_exponent(p, 1.0)?;
    Ok(lp_integral(g, p).powf(1.0 / p))
}

/// `int |grad g|^s dx`.
pub fn gradient_lp_integral(g: &RadialGridFunction, s: f64) -> f64 {
    g.cell_gradients()
        .iter()
        .zip(g.cell_volumes())
        .map(|(d, vol)| vol * d.abs().powf(s))
        .sum()
}

pub fn gradient_lp_norm(g: &RadialGridFunction, s: f64) -> Result<f64> {
    check_exponent(s, 1.0)?;
    Ok(gradient_lp_integral(g, s).powf(1.0 / s))
}

/// `int |grad u|^2 (1 + |u|)^exponent dx`, with `|u|` averaged over each cell.
pub fn weighted_gradient_l2(g: &RadialGridFunction, exponent: f64) -> f64 {
    let v = g.values();
    g.cell_gradients()
        .iter()
        .zip(g.cell_volumes())
        .enumerate()
        .map(|(j, (d, vol))| {
            let mid = 0.5 * (v[j].abs() + v[j + 1].abs());
            vol * d * d * (1.0 + mid).powf(exponent)
        })
        .sum()
}

/// `(||u||_s^s + ||grad u||_s^s)^{1/s}`.
pub fn w1s_norm(g: &RadialGridFunction, s: f64) -> Result<f64> {
    check_exponent(s, 1.0)?;
    Ok((lp_integral(g, s) + gradient_lp_integral(g, s)).powf(1.0 / s))
}

pub fn h1_norm(g: &RadialGridFunction) -> f64 {
    (lp_integral(g, 2.0) + gradient_lp_integral(g, 2.0)).sqrt()
}

/// `|dB_R|`.
pub fn sphere_measure(g: &RadialGridFunction) -> f64 {
    sphere_area(g.dim()) * g.radius().powi(g.dim() as i32 - 1)
}

/// `||u||_{L^p(dB_R)} = |dB_R|^{1/p} |u(R)|`: radial functions are constant on the sphere.
pub fn trace_lp(g: &RadialGridFunction, p: f64) -> Result<f64> {
    check_exponent(p, 1.0)?;
    Ok(sphere_measure(g).powf(1.0 / p) * g.boundary_value().abs())
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct TraceReport {
    pub trace_value: f64,
    /// `(p, ||u||_{L^p(dB_R)})`.
    pub trace_lp: Vec<(f64, f64)>,
}

pub fn trace_report(g: &RadialGridFunction, exponents: &[f64]) -> Result<TraceReport> {
    let trace_lp = exponents
        .iter()
        .map(|&p| Ok((p, trace_lp(g, p)?)))
        .collect::<Result<_>>()?;
    Ok(TraceReport {
        trace_value: g.boundary_value().abs(),
        trace_lp,
    })
}

/// The piecewise-linear interpolant of `|g|` split into pieces on which `g`
/// keeps one sign, so `|g|` is linear on each piece.
struct Levels {
    /// `(r0, r1, |g(r0)|, |g(r1)|)`.
    pieces: Vec<(f64, f64, f64, f64)>,
    dim: i32,
    omega_over_n: f64,
}

impl Levels {
    fn new(g: &RadialGridFunction) -> Self {
        let mut pieces = Vec::with_capacity(g.len());
        for (r, v) in g.nodes().windows(2).zip(g.values().windows(2)) {
            let (a, b) = (v[0], v[1]);
            if a * b < 0.0 {
                let rz = r[0] + a / (a - b) * (r[1] - r[0]);
                pieces.push((r[0], rz, a.abs(), 0.0));
                pieces.push((rz, r[1], 0.0, b.abs()));
            } else {
                pieces.push((r[0], r[1], a.abs(), b.abs()));
            }
        }
        Self {
            pieces,
            dim: g.dim() as i32,
            omega_over_n: sphere_area(g.dim()) / g.dim() as f64,
        }
    }

    /// `r1^N - r0^N` over the part of a piece where `|g| > t`.
    fn piece(&self, (r0, r1, a, b): (f64, f64, f64, f64), t: f64) -> f64 {
        let (lo, hi) = match (a > t, b > t) {
            (true, true) => (r0, r1),
            (false, false) => return 0.0,
            (true, false) => (r0, r0 + (a - t) / (a - b) * (r1 - r0)),
            (false, true) => (r0 + (t - a) / (b - a) * (r1 - r0), r1),
        };
        hi.powi(self.dim) - lo.powi(self.dim)
    }

    /// `|{|g| > t}|`.
    fn measure(&self, t: f64) -> f64 {
        self.omega_over_n * self.pieces.iter().map(|&pc| self.piece(pc, t)).sum::<f64>()
    }

    /// `measure` at ascending levels. Pieces lying entirely above `t` are
    /// counted through suffix sums; only pieces whose range straddles `t`
    /// are visited.
    fn measure_ascending(&self, ts: &[f64]) -> Vec<f64> {
        debug_assert!(ts.windows(2).all(|w| w[0] <= w[1]));
        let mut order: Vec<usize> = (0..self.pieces.len()).collect();
        let lo_of = |i: usize| self.pieces[i].2.min(self.pieces[i].3);
        let hi_of = |i: usize| self.pieces[i].2.max(self.pieces[i].3);
        order.sort_by(|&i, &j| lo_of(i).total_cmp(&lo_of(j)));
        // suffix[k]: full pieces order[k..], summed from the top so small
        // contributions are not swamped
        let mut suffix = vec![0.0; order.len() + 1];
        for k in (0..order.len()).rev() {
            let (r0, r1, _, _) = self.pieces[order[k]];
            suffix[k] = suffix[k + 1] + (r1.powi(self.dim) - r0.powi(self.dim));
        }
        let mut next = 0;
        let mut active: Vec<usize> = Vec::new();
        ts.iter()
            .map(|&t| {
                while next < order.len() && lo_of(order[next]) <= t {
                    active.push(order[next]);
                    next += 1;
                }
                active.retain(|&i| hi_of(i) > t);
                let partial: f64 = active.iter().map(|&i| self.piece(self.pieces[i], t)).sum();
                self.omega_over_n * (suffix[next] + partial)
            })
            .collect()
    }
}

/// `mu_g(t) = |{x : |g(x)| > t}|`, computed for the piecewise-linear
/// interpolant of the samples.
pub fn distribution_function(g: &RadialGridFunction, t: f64) -> Result<f64> {
    if !(t > 0.0) {
        return domain(format!("level must be positive, got {t}"));
    }
    Ok(Levels::new(g).measure(t))
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct WeakLpNorm {
    /// `sup_t t^p mu(t)`.
    pub sup: f64,
    /// `sup^{1/p}`.
    pub quasinorm: f64,
    pub argmax: f64,
}

/// `||g||_{p,infty} = (sup_{t > 0} t^p mu_g(t))^{1/p}`.
///
/// The supremum is taken over a log-spaced grid of levels, refined around the
/// best level, plus left limits at plateau values where `mu` jumps.
pub fn marcinkiewicz_quasinorm(g: &RadialGridFunction, p: f64) -> Result<WeakLpNorm> {
    if !(p > 1.0 && p.is_finite()) {
        return domain(format!("Marcinkiewicz index must exceed 1, got {p}"));
    }
    let top = g.max_abs();
    if top == 0.0 {
        return Ok(WeakLpNorm {
            sup: 0.0,
            quasinorm: 0.0,
            argmax: 0.0,
        });
    }
    let levels = Levels::new(g);
    let mut best = (0.0_f64, 0.0_f64);
    let consider = |best: &mut (f64, f64), ts: &mut Vec<f64>| {
        ts.sort_by(f64::total_cmp);
        for (t, mu) in ts.iter().zip(levels.measure_ascending(ts)) {
            let v = t.powf(p) * mu;
            if v > best.0 {
                *best = (v, *t);
            }
        }
    };
    const LEVELS: usize = 1024;
    let lo = (top * 1e-10).ln();
    let step = (top.ln() - lo) / LEVELS as f64;
    consider(&mut best, &mut (0..LEVELS).map(|i| (lo + step * i as f64).exp()).collect());
    let centre = best.1.ln();
    consider(
        &mut best,
        &mut (0..=LEVELS)
            .map(|i| (centre - step + 2.0 * step * i as f64 / LEVELS as f64).exp())
            .filter(|&t| t < top)
            .collect(),
    );
    // left limits at plateaus, where mu jumps
    consider(
        &mut best,
        &mut g
            .values()
            .windows(2)
            .filter(|w| w[0].abs() == w[1].abs() && w[0] != 0.0)
            .map(|w| w[0].abs() * (1.0 - 1e-12))
            .collect(),
    );
    let (sup, argmax) = best;
    Ok(WeakLpNorm {
        sup,
        quasinorm: sup.powf(1.0 / p),
        argmax,
    })
}

/// `p int_0^infty t^{p-1} mu_g(t) dt`, which equals `int |g|^p` by the layer-cake formula.
pub fn layer_cake_integral(g: &RadialGridFunction, p: f64) -> Result<f64> {
    check_exponent(p, 1.0)?;
    let top = g.max_abs();
    if top == 0.0 {
        return Ok(0.0);
    }
    // trapezoid in log t on [t0, top]; below t0 mu is at most the full volume
    const LEVELS: usize = 4096;
    let levels = Levels::new(g);
    let t0 = top * 1e-12;
    let lo = t0.ln();
    let step = (top.ln() - lo) / LEVELS as f64;
    let ts: Vec<f64> = (0..=LEVELS)
        .map(|i| (lo + step * i as f64).exp().min(top))
        .collect();
    let mus = levels.measure_ascending(&ts);
    let mut acc = 0.0;
    for (i, (t, mu)) in ts.iter().zip(&mus).enumerate() {
        let w = if i == 0 || i == LEVELS { 0.5 } else { 1.0 };
        acc += w * p * t.powf(p) * mu;
    }
    Ok(acc * step + t0.powf(p) * levels.measure(t0))
}

/// Both sides of the combined domain/boundary Holder inequality
/// `int |f1 f2| + lambda int_dB |g1 g2| <= [..]^{1/p} [..]^{1/p'}` with `g_i = f_i(R)`.
pub fn combined_holder(
    f1: &RadialGridFunction,
    f2: &RadialGridFunction,
    lambda: f64,
    p: f64,
) -> Result<(f64, f64)> {
    if f1.nodes() != f2.nodes() || f1.dim() != f2.dim() {
        return domain("Holder check needs both functions on the same grid");
    }
    if !(p > 1.0 && p.is_finite()) || !(lambda >= 0.0) {
        return domain(format!("need p > 1 and lambda >= 0, got p={p}, lambda={lambda}"));
    }
    let q = p / (p - 1.0);
    let w = f1.nodal_weights();
    let area = lambda * sphere_measure(f1);
    let (a, b) = (f1.values(), f2.values());
    let (ga, gb) = (f1.boundary_value().abs(), f2.boundary_value().abs());
    let lhs: f64 = w.iter().zip(a.iter().zip(b)).map(|(w, (x, y))| w * (x * y).abs()).sum::<f64>()
        + area * ga * gb;
    let na: f64 = lp_integral(f1, p) + area * ga.powf(p);
    let nb: f64 = lp_integral(f2, q) + area * gb.powf(q);
    Ok((lhs, na.powf(1.0 / p) * nb.powf(1.0 / q)))
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct NormReport {
    /// `(p, ||u||_p)`.
    pub lp: Vec<(f64, f64)>,
    /// `int |grad u|^2 (1 + |u|)^{weight_exponent}`.
    pub gradient_l2_weighted: f64,
    pub w1s: f64,
    pub h1: f64,
    pub trace_value: f64,
    pub trace_lp: f64,
    /// `(index, quasinorm)`.
    pub marcinkiewicz: Vec<(f64, f64)>,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct NormRequest {
    pub lp: Vec<f64>,
    pub weight_exponent: f64,
    pub sobolev_exponent: f64,
    pub trace_exponent: f64,
    pub marcinkiewicz: Vec<f64>,
}

pub fn norm_report(g: &RadialGridFunction, req: &NormRequest) -> Result<NormReport> {
    Ok(NormReport {
        lp: req
            .lp
            .iter()
            .map(|&p| Ok((p, lp_norm(g, p)?)))
            .collect::<Result<_>>()?,
        gradient_l2_weighted: weighted_gradient_l2(g, req.weight_exponent),
        w1s: w1s_norm(g, req.sobolev_exponent)?,
        h1: h1_norm(g),
        trace_value: g.boundary_value().abs(),
        trace_lp: trace_lp(g, req.trace_exponent)?,
        marcinkiewicz: req
            .marcinkiewicz
            .iter()
            .map(|&p| Ok((p, marcinkiewicz_quasinorm(g, p)?.quasinorm)))
            .collect::<Result<_>>()?,
    })
}
