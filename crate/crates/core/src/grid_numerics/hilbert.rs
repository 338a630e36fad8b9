//! Principal-value Hilbert transform `H[f](x) = PV ∫ f(t) / (t - x) dt`.
//!
//! The transform acts on the band-limited (sinc) interpolant of the samples, whose
//! kernel on the lattice is `-2/m` for odd offsets `m` and zero for even ones. Its
//! 4x-padded FFT multiplier tends to `iπ·sgn(ω)`. Using the lattice kernel rather than
//! the bare multiplier avoids the periodisation error of the latter, which decays only
//! like the inverse square of the padded length for inputs of nonzero mass.

use super::grid::{Grid, GridFunction};
use super::toeplitz::ToeplitzOp;

fn kernel(m: i64) -> f64 {
    if m % 2 == 0 {
        0.0
    } else {
        -2.0 / m as f64
    }
}

pub(crate) fn op(grid: &Grid) -> &ToeplitzOp {
    grid.hilbert_op.get_or_init(|| ToeplitzOp::new(grid.len(), kernel))
}

/// Message when `|v|` at either endpoint exceeds `1e-8·max|v|`: the truncated
/// transform then misses the outside mass.
pub fn endpoint_decay_warning(v: &[f64]) -> Option<String> {
    let peak = v.iter().fold(0.0f64, |m, x| m.max(x.abs()));
    let edge = v[0].abs().max(v[v.len() - 1].abs());
    (edge > 1e-8 * peak).then(|| format!("input does not decay at the grid ends ({edge:.2e} vs peak {peak:.2e})"))
}

pub fn hilbert_transform(f: &GridFunction) -> GridFunction {
    if let Some(w) = endpoint_decay_warning(f.values()) {
        log::warn!("hilbert transform: {w}");
    }
    GridFunction::new(f.grid().clone(), op(f.grid()).apply(f.values()))
}

/// Transform two functions on the same grid with one FFT pass.
pub fn hilbert_pair(a: &GridFunction, b: &GridFunction) -> (GridFunction, GridFunction) {
    let (x, y) = op(a.grid()).apply_pair(a.values(), Some(b.values()));
    (
        GridFunction::new(a.grid().clone(), x),
        GridFunction::new(a.grid().clone(), y),
    )
}

/// Transform of a plain slice on `grid`.
pub fn hilbert_slice(grid: &Grid, v: &[f64]) -> Vec<f64> {
    op(grid).apply(v)
}

/// Lattice kernel entry, exposed for dense assembly.
pub fn lattice_kernel(m: i64) -> f64 {
    kernel(m)
}
