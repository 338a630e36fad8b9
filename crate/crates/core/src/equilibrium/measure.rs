use std::sync::Arc;

use serde::{Deserialize, Serialize};

use super::Potential;
use crate::grid_numerics::{hilbert_slice, Grid, GridFunction};

/// Convergence record of the fixed-point solver.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SolverReport {
    pub iterations: usize,
    /// `sup |V + 2P U^ρ + ln ρ + λ|` over the effective support.
    pub residual: f64,
    /// Sup-change of `ln ρ` per iteration.
    pub history: Vec<f64>,
    pub restarts: usize,
    pub final_damping: f64,
}

/// Equilibrium density `ρ = exp(-V - 2P·U^ρ - λ)` on a grid, `λ = ln ∫ exp(-V - 2P·U^ρ)`.
#[derive(Debug, Clone)]
pub struct EquilibriumMeasure {
    pub potential: Potential,
    pub coupling: f64,
    pub grid: Arc<Grid>,
    /// `ln` of the normaliser, so that `ρ = exp(-V - 2P U - λ)`.
    pub lambda: f64,
    pub log_density: Vec<f64>,
    pub density: Vec<f64>,
    /// `U^ρ` at the nodes.
    pub log_potential: Vec<f64>,
    /// `H[ρ]`.
    pub hilbert: Vec<f64>,
    /// `H[ρ'] = H[ρ]'`.
    pub hilbert_d1: Vec<f64>,
    pub density_d1: Vec<f64>,
    pub density_d2: Vec<f64>,
    /// Node range `[lo, hi]` where `ρ >= support_threshold · max ρ`.
    pub support: (usize, usize),
    pub support_threshold: f64,
    pub report: SolverReport,
}

impl EquilibriumMeasure {
    /// Assemble a measure from a converged log density and its log potential,
    /// deriving `H[ρ]`, `ρ'`, `ρ''` from the integrated equilibrium relations.
    pub(crate) fn assemble(
        potential: Potential,
        coupling: f64,
        grid: Arc<Grid>,
        lambda: f64,
        log_density: Vec<f64>,
        log_potential: Vec<f64>,
        support_threshold: f64,
        report: SolverReport,
    ) -> Self {
        let xs = grid.nodes();
        let density: Vec<f64> = log_density.iter().map(|l| l.exp()).collect();
        let hilbert = hilbert_slice(&grid, &density);
        let p2 = 2.0 * coupling;
        let density_d1: Vec<f64> = (0..xs.len())
            .map(|i| -(potential.d1(xs[i]) + p2 * hilbert[i]) * density[i])
            .collect();
        let hilbert_d1 = hilbert_slice(&grid, &density_d1);
        let density_d2: Vec<f64> = (0..xs.len())
            .map(|i| {
                let (v1, v2, hr) = (potential.d1(xs[i]), potential.d2(xs[i]), hilbert[i]);
                (-p2 * hilbert_d1[i] - v2 + v1 * v1 + p2 * p2 * hr * hr + 2.0 * p2 * v1 * hr)
                    * density[i]
            })
            .collect();
        let max_log = log_density.iter().cloned().fold(f64::NEG_INFINITY, f64::max);
        let cut = max_log + support_threshold.ln();
        let lo = log_density.iter().position(|&l| l >= cut).unwrap_or(0);
        let hi = log_density.iter().rposition(|&l| l >= cut).unwrap_or(xs.len() - 1);
        EquilibriumMeasure {
            potential,
            coupling,
            grid,
            lambda,
            log_density,
            density,
            log_potential,
            hilbert,
            hilbert_d1,
            density_d1,
            density_d2,
            support: (lo, hi),
            support_threshold,
            report,
        }
    }

    pub fn len(&self) -> usize {
        self.grid.len()
    }
    pub fn is_empty(&self) -> bool {
        self.grid.is_empty()
    }
    pub fn density_fn(&self) -> GridFunction {
        GridFunction::new(self.grid.clone(), self.density.clone())
    }
    /// `(ln ρ)' = -(V' + 2P·H[ρ])`.
    pub fn log_density_d1(&self) -> Vec<f64> {
        let p2 = 2.0 * self.coupling;
        self.grid
            .nodes()
            .iter()
            .zip(&self.hilbert)
            .map(|(&x, &h)| -(self.potential.d1(x) + p2 * h))
            .collect()
    }
    /// `(ln ρ)'' = -(V'' + 2P·H[ρ]')`.
    pub fn log_density_d2(&self) -> Vec<f64> {
        let p2 = 2.0 * self.coupling;
        self.grid
            .nodes()
            .iter()
            .zip(&self.hilbert_d1)
            .map(|(&x, &h)| -(self.potential.d2(x) + p2 * h))
            .collect()
    }
    /// Quadrature weights of `μ`: trapezoid weight times density.
    pub fn mu_weights(&self) -> Vec<f64> {
        (0..self.len()).map(|i| self.grid.weight(i) * self.density[i]).collect()
    }
    /// `∫ f dμ` for nodal values `f`.
    pub fn mu_integral(&self, f: &[f64]) -> f64 {
        f.iter()
            .enumerate()
            .map(|(i, v)| self.grid.weight(i) * self.density[i] * v)
            .sum()
    }
    /// `f - ∫ f dμ`.
    pub fn center(&self, f: &[f64]) -> Vec<f64> {
        let m = self.mu_integral(f);
        f.iter().map(|v| v - m).collect()
    }
    pub fn in_support(&self, i: usize) -> bool {
        i >= self.support.0 && i <= self.support.1
    }
    pub fn mass(&self) -> f64 {
        self.mu_integral(&vec![1.0; self.len()])
    }
    /// `∫ x^k dμ`.
    pub fn moment(&self, k: i32) -> f64 {
        let xk: Vec<f64> = self.grid.nodes().iter().map(|x| x.powi(k)).collect();
        self.mu_integral(&xk)
    }
    /// `sup |V + 2P U^ρ + ln ρ + λ|` over the effective support.
    pub fn equilibrium_residual(&self) -> f64 {
        let xs = self.grid.nodes();
        (self.support.0..=self.support.1)
            .map(|i| {
                (self.potential.value(xs[i])
                    + 2.0 * self.coupling * self.log_potential[i]
                    + self.log_density[i]
                    + self.lambda)
                    .abs()
            })
            .fold(0.0, f64::max)
    }
}
