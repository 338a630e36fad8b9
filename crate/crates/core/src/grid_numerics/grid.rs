use std::sync::{Arc, OnceLock};

use serde::{Deserialize, Serialize};

use super::toeplitz::ToeplitzOp;
use crate::error::{Error, Result};

/// Smallest admissible number of nodes. Derivative stencils need nine points.
pub const MIN_NODES: usize = 16;

/// Smallest node count accepted by [`build_grid`].
pub const MIN_POWER_OF_TWO_NODES: usize = 256;

/// Uniform symmetric grid on `[-half_width, half_width]` with cached convolution operators.
pub struct Grid {
    half_width: f64,
    nodes: Vec<f64>,
    spacing: f64,
    pub(crate) hilbert_op: OnceLock<ToeplitzOp>,
    pub(crate) log_op: OnceLock<ToeplitzOp>,
    pub(crate) half_norm_op: OnceLock<ToeplitzOp>,
}

/// Serializable description of a grid.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct GridSpec {
    pub half_width: f64,
    pub n_points: usize,
}

impl Grid {
    pub fn spec(&self) -> GridSpec {
        GridSpec {
            half_width: self.half_width,
            n_points: self.len(),
        }
    }
    pub fn len(&self) -> usize {
        self.nodes.len()
    }
    pub fn is_empty(&self) -> bool {
        self.nodes.is_empty()
    }
    pub fn half_width(&self) -> f64 {
        self.half_width
    }
    pub fn spacing(&self) -> f64 {
        self.spacing
    }
    pub fn nodes(&self) -> &[f64] {
        &self.nodes
    }
    pub fn x(&self, i: usize) -> f64 {
        self.nodes[i]
    }

    /// Trapezoid weight of node `i`.
    pub fn weight(&self, i: usize) -> f64 {
        if i == 0 || i + 1 == self.len() {
            0.5 * self.spacing
        } else {
            self.spacing
        }
    }

    pub fn weights(&self) -> Vec<f64> {
        (0..self.len()).map(|i| self.weight(i)).collect()
    }

    /// Index of the node closest to `x`, clamped to the grid.
    pub fn nearest(&self, x: f64) -> usize {
        let t = ((x + self.half_width) / self.spacing).round();
        t.clamp(0.0, (self.len() - 1) as f64) as usize
    }

    /// Sample a closure at every node.
    pub fn sample(self: &Arc<Self>, f: impl Fn(f64) -> f64) -> GridFunction {
        GridFunction::new(self.clone(), self.nodes.iter().map(|&x| f(x)).collect())
    }
}

impl std::fmt::Debug for Grid {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.debug_struct("Grid")
            .field("half_width", &self.half_width)
            .field("n_points", &self.len())
            .field("spacing", &self.spacing)
            .finish()
    }
}

impl PartialEq for Grid {
    fn eq(&self, other: &Self) -> bool {
        self.half_width == other.half_width && self.len() == other.len()
    }
}

/// Build a uniform grid of `n_points` nodes including both endpoints.
pub fn build_grid(half_width: f64, n_points: usize) -> Result<Arc<Grid>> {
    if n_points < MIN_POWER_OF_TWO_NODES || !n_points.is_power_of_two() {
        return Err(Error::InvalidResolution(format!(
            "n_points must be a power of two >= {MIN_POWER_OF_TWO_NODES}, got {n_points}"
        )));
    }
    build_uniform_grid(half_width, n_points)
}

/// Like [`build_grid`] but accepts any node count `>= MIN_NODES`; odd counts put a node at 0.
pub fn build_uniform_grid(half_width: f64, n_points: usize) -> Result<Arc<Grid>> {
    if n_points < MIN_NODES {
        return Err(Error::InvalidResolution(format!(
            "grid needs at least {MIN_NODES} nodes, got {n_points}"
        )));
    }
    if !(half_width.is_finite() && half_width > 0.0) {
        return Err(Error::InvalidResolution(format!(
            "half width must be positive and finite, got {half_width}"
        )));
    }
    let spacing = 2.0 * half_width / (n_points - 1) as f64;
    let nodes = (0..n_points)
        .map(|i| -half_width + i as f64 * spacing)
        .collect::<Vec<_>>();
    Ok(Arc::new(Grid {
        half_width,
        nodes,
        spacing,
        hilbert_op: OnceLock::new(),
        log_op: OnceLock::new(),
        half_norm_op: OnceLock::new(),
    }))
}

/// Values of a real function at the nodes of a shared grid.
#[derive(Clone)]
pub struct GridFunction {
    grid: Arc<Grid>,
    values: Vec<f64>,
}

impl std::fmt::Debug for GridFunction {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.debug_struct("GridFunction")
            .field("grid", &self.grid)
            .field("len", &self.values.len())
            .finish()
    }
}

impl GridFunction {
    pub fn new(grid: Arc<Grid>, values: Vec<f64>) -> Self {
        assert_eq!(grid.len(), values.len(), "values must match grid length");
        GridFunction { grid, values }
    }
    pub fn zeros(grid: Arc<Grid>) -> Self {
        let n = grid.len();
        GridFunction::new(grid, vec![0.0; n])
    }
    pub fn grid(&self) -> &Arc<Grid> {
        &self.grid
    }
    pub fn values(&self) -> &[f64] {
        &self.values
    }
    pub fn values_mut(&mut self) -> &mut [f64] {
        &mut self.values
    }
    pub fn into_values(self) -> Vec<f64> {
        self.values
    }
    pub fn len(&self) -> usize {
        self.values.len()
    }
    pub fn is_empty(&self) -> bool {
        self.values.is_empty()
    }
    pub fn map(&self, f: impl Fn(f64, f64) -> f64) -> GridFunction {
        let v = self
            .grid
            .nodes()
            .iter()
            .zip(&self.values)
            .map(|(&x, &y)| f(x, y))
            .collect();
        GridFunction::new(self.grid.clone(), v)
    }
    pub fn zip_map(&self, other: &GridFunction, f: impl Fn(f64, f64) -> f64) -> GridFunction {
        debug_assert!(Arc::ptr_eq(&self.grid, &other.grid) || *self.grid == *other.grid);
        let v = self
            .values
            .iter()
            .zip(&other.values)
            .map(|(&a, &b)| f(a, b))
            .collect();
        GridFunction::new(self.grid.clone(), v)
    }
    pub fn scale(&self, c: f64) -> GridFunction {
        self.map(|_, y| c * y)
    }
    pub fn add(&self, other: &GridFunction) -> GridFunction {
        self.zip_map(other, |a, b| a + b)
    }
    pub fn sub(&self, other: &GridFunction) -> GridFunction {
        self.zip_map(other, |a, b| a - b)
    }
    pub fn mul(&self, other: &GridFunction) -> GridFunction {
        self.zip_map(other, |a, b| a * b)
    }
    /// Trapezoid integral over the grid.
    pub fn integral(&self) -> f64 {
        integrate(self)
    }
    pub fn max_abs(&self) -> f64 {
        self.values.iter().fold(0.0, |m, v| m.max(v.abs()))
    }
    /// Discrete L² norm with trapezoid weights.
    pub fn l2_norm(&self) -> f64 {
        self.mul(self).integral().max(0.0).sqrt()
    }
    /// Linear interpolation; constant extension outside the grid.
    pub fn interpolate(&self, x: f64) -> f64 {
        let g = &self.grid;
        let t = (x + g.half_width()) / g.spacing();
        if t <= 0.0 {
            return self.values[0];
        }
        let last = self.len() - 1;
        if t >= last as f64 {
            return self.values[last];
        }
        let i = t.floor() as usize;
        let s = t - i as f64;
        (1.0 - s) * self.values[i] + s * self.values[i + 1]
    }
    /// Cubic (Catmull-Rom) interpolation; constant extension outside the grid.
    pub fn interpolate_cubic(&self, x: f64) -> f64 {
        let g = &self.grid;
        let n = self.len();
        let t = (x + g.half_width()) / g.spacing();
        if t <= 1.0 || t >= (n - 2) as f64 {
            return self.interpolate(x);
        }
        let i = t.floor() as usize;
        let s = t - i as f64;
        let (p0, p1, p2, p3) = (
            self.values[i - 1],
            self.values[i],
            self.values[i + 1],
            self.values[i + 2],
        );
        p1 + 0.5
            * s
            * (p2 - p0 + s * (2.0 * p0 - 5.0 * p1 + 4.0 * p2 - p3 + s * (3.0 * (p1 - p2) + p3 - p0)))
    }
}

/// Trapezoid rule on the grid. Spectrally accurate for smooth integrands that vanish
/// at both endpoints.
pub fn integrate(f: &GridFunction) -> f64 {
    let v = f.values();
    let n = v.len();
    let h = f.grid().spacing();
    let interior: f64 = v[1..n - 1].iter().sum();
    h * (interior + 0.5 * (v[0] + v[n - 1]))
}

/// Trapezoid integral of a plain slice sampled on `grid`.
pub fn integrate_slice(grid: &Grid, v: &[f64]) -> f64 {
    let n = v.len();
    let interior: f64 = v[1..n - 1].iter().sum();
    grid.spacing() * (interior + 0.5 * (v[0] + v[n - 1]))
}

/// Fourth-order integral of each cell `[x_i, x_{i+1}]` from cubic interpolation through
/// the four surrounding nodes; the first and last cells fall back to the trapezoid rule.
pub fn cell_integrals(h: f64, v: &[f64]) -> Vec<f64> {
    let n = v.len();
    let mut out = vec![0.0; n - 1];
    for i in 0..n - 1 {
        out[i] = if i >= 1 && i + 2 < n {
            h / 24.0 * (-v[i - 1] + 13.0 * v[i] + 13.0 * v[i + 1] - v[i + 2])
        } else {
            0.5 * h * (v[i] + v[i + 1])
        };
    }
    out
}
