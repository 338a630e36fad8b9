//! Logarithmic potential `U^f(x) = -∫ ln|x - y| f(y) dy` of a grid function.
//!
//! `f` is read as its piecewise-linear interpolant and `-ln|·|` is integrated exactly
//! against every hat function, so the quadrature is exact for piecewise-linear data.

use super::grid::{Grid, GridFunction};
use super::hilbert::hilbert_slice;
use super::toeplitz::ToeplitzOp;
use super::diff::{d1, fornberg_weights};
use crate::error::{Error, Result};

const SERIES_FROM: f64 = 24.0;

/// `∫_0^z ∫_0^y ln|s| ds dy`.
fn second_antiderivative(z: f64) -> f64 {
    if z == 0.0 {
        0.0
    } else {
        0.5 * z * z * z.abs().ln() - 0.75 * z * z
    }
}

/// `∫_{-1}^{1} (1 - |t|) ln|m - t| dt`.
fn hat_log_moment(m: f64) -> f64 {
    let a = m.abs();
    if a >= SERIES_FROM {
        let inv2 = 1.0 / (a * a);
        let mut term = 1.0;
        let mut s = a.ln();
        for j in 1..=8 {
            term *= inv2;
            let jf = j as f64;
            s -= term / (jf * (2.0 * jf + 1.0) * (2.0 * jf + 2.0));
        }
        s
    } else {
        second_antiderivative(a + 1.0) - 2.0 * second_antiderivative(a)
            + second_antiderivative(a - 1.0)
    }
}

/// `∫_{-1}^{0} (1 + t) ln|m - t| dt` for `m >= 0`.
fn half_hat_log_moment(m: f64) -> f64 {
    if m >= SERIES_FROM {
        // ln|m - t| = ln m - Σ (t/m)^k / k  and  ∫_{-1}^0 (1+t) t^k dt = (-1)^k / ((k+1)(k+2)).
        let mut s = 0.5 * m.ln();
        let mut p = 1.0;
        for k in 1..=16 {
            p *= -1.0 / m;
            let kf = k as f64;
            s -= p / (kf * (kf + 1.0) * (kf + 2.0));
        }
        s
    } else {
        let a1 = |u: f64| if u == 0.0 { 0.0 } else { u * u.abs().ln() - u };
        let a2 = |u: f64| {
            if u == 0.0 {
                0.0
            } else {
                0.5 * u * u * u.abs().ln() - 0.25 * u * u
            }
        };
        (m + 1.0) * (a1(m + 1.0) - a1(m)) - (a2(m + 1.0) - a2(m))
    }
}

/// Weight of a full hat centred `m` cells away.
fn full_weight(h: f64, m: i64) -> f64 {
    -h * h.ln() - h * hat_log_moment(m as f64)
}

/// Weight of the half hat lying outside an end node, `m >= 0` cells from the target.
fn outside_half_weight(h: f64, m: usize) -> f64 {
    -0.5 * h * h.ln() - h * half_hat_log_moment(m as f64)
}

fn op(grid: &Grid) -> &ToeplitzOp {
    let h = grid.spacing();
    grid.log_op.get_or_init(|| ToeplitzOp::new(grid.len(), |m| full_weight(h, m)))
}

/// Potential of a plain slice on `grid`.
pub fn log_potential_slice(grid: &Grid, v: &[f64]) -> Vec<f64> {
    let n = grid.len();
    let h = grid.spacing();
    let mut u = op(grid).apply(v);
    let (first, last) = (v[0], v[n - 1]);
    if first != 0.0 || last != 0.0 {
        for (i, ui) in u.iter_mut().enumerate() {
            *ui -= first * outside_half_weight(h, i) + last * outside_half_weight(h, n - 1 - i);
        }
    }
    u
}

/// Potential of a probability density; rejects negative values or non-positive mass.
pub fn log_potential_of_density(f: &GridFunction) -> Result<GridFunction> {
    let peak = f.max_abs();
    if f.values().iter().any(|&v| v < -1e-12 * peak) {
        return Err(Error::InvalidArgument("log potential of a signed density".into()));
    }
    let mass = f.integral();
    if !(mass > 0.0) {
        return Err(Error::InvalidArgument(format!("log potential of a density with mass {mass}")));
    }
    Ok(log_potential(f))
}

/// Toeplitz weight of the linear-element potential at offset `m`, or of the refined
/// variant when `refined`. Valid for sources at least four nodes from the grid ends.
pub fn log_kernel_weight(h: f64, m: i64, refined: bool) -> f64 {
    let base = full_weight(h, m);
    if !refined {
        return base;
    }
    let offsets: Vec<f64> = (-4..=4).map(|s| s as f64).collect();
    let stencil = &fornberg_weights(0.0, &offsets, 1)[1];
    let corr: f64 = (-4i64..=4)
        .zip(stencil)
        .map(|(s, c)| c * crate::grid_numerics::hilbert::lattice_kernel(m + s))
        .sum();
    base - h / 12.0 * corr
}

pub fn log_potential(f: &GridFunction) -> GridFunction {
    GridFunction::new(f.grid().clone(), log_potential_slice(f.grid(), f.values()))
}

/// Potential with the leading interpolation error of linear elements removed.
///
/// For smooth `f` the linear-element value differs from the exact potential by
/// `(h²/12)·H[f']` up to `O(h³)`, so subtracting it raises the order without changing
/// the exactness for affine data.
pub fn log_potential_refined_slice(grid: &Grid, v: &[f64]) -> Vec<f64> {
    let h = grid.spacing();
    let mut u = log_potential_slice(grid, v);
    let corr = hilbert_slice(grid, &d1(h, v));
    for (ui, c) in u.iter_mut().zip(corr) {
        *ui -= h * h / 12.0 * c;
    }
    u
}

pub fn log_potential_refined(f: &GridFunction) -> GridFunction {
    GridFunction::new(
        f.grid().clone(),
        log_potential_refined_slice(f.grid(), f.values()),
    )
}

/// Interaction `-E ln|d + a - b|` of two independent uniform variables on `[0, w]`.
/// Equals the hat-function weight with cell `w`.
pub fn box_pair_log_interaction(d: f64, w: f64) -> f64 {
    -w.ln() - hat_log_moment(d / w)
}
