//! Explicit inverse of `L` through `-L = (id - K)·A`: solve `(id - K) g = f̃` by a
//! Nyström system, then `L^{-1} f̃ = -A^{-1} g`.

use nalgebra::{DMatrix, DVector};

use super::operators::{apply_l, h_norm, mu_norm};
use crate::equilibrium::EquilibriumMeasure;
use crate::error::{Error, Result};
use crate::grid_numerics::{fornberg_weights, lattice_kernel, log_kernel_weight};
use crate::linalg::condition_estimate_1;

const CENTERING_TOLERANCE: f64 = 1e-8;
const CONDITION_LIMIT: f64 = 1e12;

/// Index of the `μ`-median node.
fn median_node(eq: &EquilibriumMeasure) -> usize {
    let w = eq.mu_weights();
    let total: f64 = w.iter().sum();
    let mut acc = 0.0;
    for (i, wi) in w.iter().enumerate() {
        acc += wi;
        if acc >= 0.5 * total {
            return i;
        }
    }
    w.len() / 2
}

/// `∫_{x_i}^{x_{i+1}} f ρ dx / ρ_ref` by the four-point rule, with every density value
/// taken relative to `exp(ref_log)` so nothing underflows.
fn scaled_cell(eq: &EquilibriumMeasure, f: &[f64], i: usize, ref_log: f64) -> f64 {
    let n = f.len();
    let h = eq.grid.spacing();
    let q = |j: usize| f[j] * (eq.log_density[j] - ref_log).exp();
    if i >= 1 && i + 2 < n {
        h / 24.0 * (-q(i - 1) + 13.0 * q(i) + 13.0 * q(i + 1) - q(i + 2))
    } else {
        0.5 * h * (q(i) + q(i + 1))
    }
}

/// `u'` with `(u'ρ)' = -f ρ`: the flux `∫_x^∞ fρ` right of the median and `-∫_{-∞}^x fρ`
/// left of it, each accumulated from its own tail so no cancellation occurs in the tails.
fn inverse_a_flux(eq: &EquilibriumMeasure, f: &[f64]) -> Vec<f64> {
    let n = f.len();
    let ld = &eq.log_density;
    let c = median_node(eq);
    let mut du = vec![0.0; n];
    let mut acc = 0.0;
    for i in (c..n - 1).rev() {
        acc = acc * (ld[i + 1] - ld[i]).exp() + scaled_cell(eq, f, i, ld[i]);
        du[i] = acc;
    }
    let mut acc = 0.0;
    for i in 1..c {
        acc = acc * (ld[i - 1] - ld[i]).exp() + scaled_cell(eq, f, i - 1, ld[i]);
        du[i] = -acc;
    }
    du
}

/// `A^{-1} f = -∫_x^∞ ds/ρ(s) ∫_s^∞ fρ dt + C` with `C` fixing zero `μ`-mean.
pub fn invert_a(eq: &EquilibriumMeasure, f: &[f64]) -> Result<Vec<f64>> {
    let mean = eq.mu_integral(f);
    let scale = mu_norm(eq, f).max(1.0);
    if mean.abs() > CENTERING_TOLERANCE * scale {
        return Err(Error::InvalidArgument(format!(
            "A is invertible only on centred functions; ∫f dμ = {mean:.3e}"
        )));
    }
    let du = inverse_a_flux(eq, f);
    let h = eq.grid.spacing();
    let n = f.len();
    let mut u = vec![0.0; n];
    for i in 0..n - 1 {
        let cell = if i >= 1 && i + 2 < n {
            h / 24.0 * (-du[i - 1] + 13.0 * du[i] + 13.0 * du[i + 1] - du[i + 2])
        } else {
            0.5 * h * (du[i] + du[i + 1])
        };
        u[i + 1] = u[i] + cell;
    }
    Ok(eq.center(&u))
}

/// Nyström image of `K[g](x) = ∫ k(x, y) g(y) dμ(y)`,
/// `k(x, y) = 2P ln|x - y| - 2P ∫ ln|z - y| dμ(z)`, on the nodes `lo..=hi` where
/// `ρ >= threshold · max ρ`.
#[derive(Debug, Clone)]
pub struct FredholmKernel {
    pub lo: usize,
    pub hi: usize,
    pub coupling: f64,
    /// Product-integration weights of `-ln|x_i - ·|` at offset `m`, index `m + n - 1`.
    weights_table: Vec<f64>,
    /// `∫ Ω(x, y_j) dμ(x)` for each source node.
    column_shift: Vec<f64>,
    /// `ρ_j` on the source nodes.
    density: Vec<f64>,
    n: usize,
}

impl FredholmKernel {
    pub fn size(&self) -> usize {
        self.hi - self.lo + 1
    }

    fn omega(&self, i: usize, j: usize) -> f64 {
        self.weights_table[i + self.n - 1 - j]
    }

    /// Operator weight of `g_j` in `(Kg)(x_i)`.
    pub fn entry(&self, i: usize, j: usize) -> f64 {
        let t = j - self.lo;
        -2.0 * self.coupling * (self.omega(i, j) - self.column_shift[t]) * self.density[t]
    }

    /// `K g` at every node for `g` given on the source nodes.
    pub fn apply(&self, g: &[f64]) -> Vec<f64> {
        (0..self.n)
            .map(|i| (self.lo..=self.hi).map(|j| self.entry(i, j) * g[j - self.lo]).sum())
            .collect()
    }

    /// `k(x_i, y_j)` up to the node-independent quadrature factor: the `μ`-integral of each
    /// column over `x` vanishes.
    pub fn column_mean(&self, eq: &EquilibriumMeasure, j: usize) -> f64 {
        let w = eq.mu_weights();
        (0..self.n).map(|i| w[i] * self.entry(i, j)).sum()
    }

    /// Dense block on the source nodes.
    pub fn matrix(&self) -> DMatrix<f64> {
        let m = self.size();
        DMatrix::from_fn(m, m, |a, b| self.entry(a + self.lo, b + self.lo))
    }
}

pub fn fredholm_kernel(eq: &EquilibriumMeasure, threshold: f64) -> FredholmKernel {
    let n = eq.len();
    let h = eq.grid.spacing();
    let offsets: Vec<f64> = (-4..=4).map(|s| s as f64).collect();
    let stencil = fornberg_weights(0.0, &offsets, 1)[1].clone();
    // Weights of the refined potential used by the solver; the correction needs the
    // source at least four nodes inside, which holds on the support.
    let weights_table: Vec<f64> = (-(n as i64 - 1)..=(n as i64 - 1))
        .map(|m| {
            let corr: f64 = (-4i64..=4).zip(&stencil).map(|(s, c)| c * lattice_kernel(m + s)).sum();
            log_kernel_weight(h, m, false) - h / 12.0 * corr
        })
        .collect();
    let peak = eq.log_density.iter().cloned().fold(f64::NEG_INFINITY, f64::max);
    let cut = peak + threshold.ln();
    let lo = eq.log_density.iter().position(|&l| l >= cut).unwrap_or(0).max(4);
    let hi = eq.log_density.iter().rposition(|&l| l >= cut).unwrap_or(n - 1).min(n - 5);
    let w = eq.mu_weights();
    let total: f64 = w.iter().sum();
    let column_shift = (lo..=hi)
        .map(|j| (0..n).map(|i| w[i] * weights_table[i + n - 1 - j]).sum::<f64>() / total)
        .collect();
    FredholmKernel {
        lo,
        hi,
        coupling: eq.coupling,
        weights_table,
        column_shift,
        density: eq.density[lo..=hi].to_vec(),
        n,
    }
}

/// Result of the Fredholm route.
#[derive(Debug, Clone)]
pub struct FredholmSolution {
    /// `L^{-1} f̃`, `μ`-centred.
    pub u: Vec<f64>,
    /// `(id - K)^{-1} f̃` at every node.
    pub g: Vec<f64>,
    /// `‖L[u] - f̃‖_H / ‖f̃‖_H`.
    pub residual: f64,
}

/// Factorised `(id - K)` for repeated solves.
pub struct FredholmSolver<'a> {
    eq: &'a EquilibriumMeasure,
    kernel: Option<FredholmKernel>,
    lu: Option<nalgebra::LU<f64, nalgebra::Dyn, nalgebra::Dyn>>,
    /// 1-norm condition estimate of `id - K` (1 when `K = 0`).
    pub condition: f64,
}

/// Source nodes kept in the Nyström system: density above `1e-18` of its peak.
pub const KERNEL_THRESHOLD: f64 = 1e-18;

impl<'a> FredholmSolver<'a> {
    pub fn new(eq: &'a EquilibriumMeasure) -> Result<Self> {
        if eq.coupling == 0.0 {
            return Ok(FredholmSolver { eq, kernel: None, lu: None, condition: 1.0 });
        }
        let kernel = fredholm_kernel(eq, KERNEL_THRESHOLD);
        let m = kernel.size();
        let system = DMatrix::identity(m, m) - kernel.matrix();
        let lu = system.clone().lu();
        let condition = condition_estimate_1(&system, &lu);
        if !(condition < CONDITION_LIMIT) {
            return Err(Error::Conditioning { what: "id - K".into(), condition });
        }
        Ok(FredholmSolver { eq, kernel: Some(kernel), lu: Some(lu), condition })
    }

    /// `L^{-1} f̃` without the residual check.
    pub fn solve_unchecked(&self, f: &[f64]) -> Result<FredholmSolution> {
        let eq = self.eq;
        let f_c = eq.center(f);
        let g = match (&self.kernel, &self.lu) {
            (Some(k), Some(lu)) => {
                let rhs = DVector::from_column_slice(&f_c[k.lo..=k.hi]);
                let g_src = lu
                    .solve(&rhs)
                    .ok_or(Error::Conditioning { what: "id - K".into(), condition: f64::INFINITY })?;
                let kg = k.apply(g_src.as_slice());
                let g: Vec<f64> = f_c.iter().zip(&kg).map(|(a, b)| a + b).collect();
                eq.center(&g)
            }
            _ => f_c,
        };
        let u: Vec<f64> = invert_a(eq, &g)?.iter().map(|v| -v).collect();
        Ok(FredholmSolution { u, g, residual: f64::NAN })
    }

    pub fn solve(&self, f: &[f64]) -> Result<FredholmSolution> {
        let sol = self.solve_unchecked(f)?;
        let f_c = self.eq.center(f);
        let lu = apply_l(self.eq, &sol.u);
        let r: Vec<f64> = lu.iter().zip(&f_c).map(|(a, b)| a - b).collect();
        let norm = h_norm(self.eq, &f_c);
        let residual = if norm > 0.0 { h_norm(self.eq, &r) / norm } else { h_norm(self.eq, &r) };
        Ok(FredholmSolution { residual, ..sol })
    }
}

/// One-shot Fredholm inverse of `L` on `f - ∫f dμ`.
pub fn invert_l_fredholm(eq: &EquilibriumMeasure, f: &[f64]) -> Result<(FredholmSolution, f64)> {
    let solver = FredholmSolver::new(eq)?;
    let cond = solver.condition;
    Ok((solver.solve(f)?, cond))
}
