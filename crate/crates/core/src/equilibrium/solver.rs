//! Fixed-point solver for the equilibrium density.
//!
//! The iteration acts on the log potential `y ≈ U^ρ`: each step forms
//! `ρ(y) = exp(-V - 2P·y) / Z(y)` and maps `y` to `U^{ρ(y)}`. Plain damped Picard
//! converges only for damping below roughly `1/(1+P)` because the linearised map has
//! spectrum spreading to `-2P`; Anderson mixing on `y` removes that restriction.
//! When the sup-change of `ln ρ` grows by a large factor the history is dropped and the
//! damping is halved.

use std::collections::VecDeque;
use std::sync::Arc;

use nalgebra::{DMatrix, DVector};
use serde::{Deserialize, Serialize};

use super::measure::{EquilibriumMeasure, SolverReport};
use super::validate::validate_potential;
use super::Potential;
use crate::error::{Error, Result};
use crate::grid_numerics::{build_grid, log_potential_refined_slice, log_potential_slice, Grid};

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct EquilibriumOptions {
    /// Stop when the sup-change of `ln ρ` over the support drops below this.
    pub tol: f64,
    pub max_iter: usize,
    /// Mixing weight of the new iterate.
    pub damping: f64,
    /// Number of previous residuals kept by Anderson mixing; 0 gives damped Picard.
    pub anderson_depth: usize,
    /// Remove the leading linear-element error of the log potential.
    pub refined_quadrature: bool,
    /// Relative density level defining the effective support.
    pub support_threshold: f64,
    /// Skip the assumption probes.
    pub skip_validation: bool,
}

impl Default for EquilibriumOptions {
    fn default() -> Self {
        EquilibriumOptions {
            tol: 1e-10,
            max_iter: 3000,
            damping: 0.5,
            anderson_depth: 6,
            refined_quadrature: true,
            support_threshold: 1e-12,
            skip_validation: false,
        }
    }
}

const CONTINUATION_FROM: f64 = 8.0;

struct State {
    log_density: Vec<f64>,
    lambda: f64,
}

fn log_sum(grid: &Grid, a: &[f64]) -> f64 {
    let m = a.iter().cloned().fold(f64::NEG_INFINITY, f64::max);
    let s: f64 = a
        .iter()
        .enumerate()
        .map(|(i, v)| grid.weight(i) * (v - m).exp())
        .sum();
    m + s.ln()
}

fn density_of(grid: &Grid, vx: &[f64], coupling: f64, y: &[f64]) -> State {
    let a: Vec<f64> = vx.iter().zip(y).map(|(v, u)| -v - 2.0 * coupling * u).collect();
    let lambda = log_sum(grid, &a);
    State {
        log_density: a.iter().map(|v| v - lambda).collect(),
        lambda,
    }
}

fn potential_of(grid: &Grid, log_density: &[f64], refined: bool) -> Vec<f64> {
    let rho: Vec<f64> = log_density.iter().map(|l| l.exp()).collect();
    if refined {
        log_potential_refined_slice(grid, &rho)
    } else {
        log_potential_slice(grid, &rho)
    }
}

fn support_range(log_density: &[f64], threshold: f64) -> (usize, usize) {
    let m = log_density.iter().cloned().fold(f64::NEG_INFINITY, f64::max);
    let cut = m + threshold.ln();
    let lo = log_density.iter().position(|&l| l >= cut).unwrap_or(0);
    let hi = log_density
        .iter()
        .rposition(|&l| l >= cut)
        .unwrap_or(log_density.len() - 1);
    (lo, hi)
}

/// Solve for the equilibrium measure of `V` at coupling `P` on `grid`.
pub fn solve_equilibrium(
    potential: &Potential,
    coupling: f64,
    grid: &Arc<Grid>,
    opts: &EquilibriumOptions,
) -> Result<EquilibriumMeasure> {
    if !(coupling.is_finite() && coupling >= 0.0) {
        return Err(Error::InvalidArgument(format!(
            "coupling must be finite and nonnegative, got {coupling}"
        )));
    }
    if !opts.skip_validation {
        let report = validate_potential(potential, coupling, grid);
        if !report.passed() {
            let msg = report
                .hard_failures()
                .iter()
                .map(|c| format!("{}: {}", c.name, c.detail))
                .collect::<Vec<_>>()
                .join("; ");
            return Err(Error::AssumptionViolation(msg));
        }
    }
    let vx: Vec<f64> = grid.nodes().iter().map(|&x| potential.value(x)).collect();
    let n = grid.len();
    // Strong coupling: warm-start from the solution at half the coupling.
    let start = if coupling > CONTINUATION_FROM {
        let half = solve_equilibrium(
            potential,
            0.5 * coupling,
            grid,
            &EquilibriumOptions {
                skip_validation: true,
                tol: opts.tol.max(1e-6),
                ..*opts
            },
        )?;
        half.log_potential
    } else {
        let base = density_of(grid, &vx, coupling, &vec![0.0; n]);
        potential_of(grid, &base.log_density, opts.refined_quadrature)
    };
    let mut y = start;

    let mut history = Vec::new();
    let mut restarts = 0;
    // The linearised map has spectrum down to about -2P; keep the base step inside
    // the region where damped Picard still contracts.
    let mut damping = opts.damping.min(4.0 / (1.0 + 2.0 * coupling));
    let mut dx: VecDeque<Vec<f64>> = VecDeque::new();
    let mut dr: VecDeque<Vec<f64>> = VecDeque::new();
    let mut prev: Option<(Vec<f64>, Vec<f64>)> = None;
    let mut last_change = f64::INFINITY;

    for iter in 1..=opts.max_iter {
        let state = density_of(grid, &vx, coupling, &y);
        let g = potential_of(grid, &state.log_density, opts.refined_quadrature);
        let r: Vec<f64> = g.iter().zip(&y).map(|(a, b)| a - b).collect();
        let next = density_of(grid, &vx, coupling, &g);
        let (lo, hi) = support_range(&state.log_density, opts.support_threshold);
        let change = (lo..=hi)
            .map(|i| (next.log_density[i] - state.log_density[i]).abs())
            .fold(0.0, f64::max);
        history.push(change);
        if !change.is_finite() {
            return Err(Error::NonConvergence {
                what: "equilibrium iteration produced non-finite values".into(),
                iterations: iter,
                residual: change,
            });
        }
        if change < opts.tol || coupling == 0.0 {
            let residual = 2.0 * coupling * (lo..=hi).map(|i| r[i].abs()).fold(0.0, f64::max);
            let report = SolverReport {
                iterations: iter,
                residual,
                history,
                restarts,
                final_damping: damping,
            };
            return Ok(EquilibriumMeasure::assemble(
                potential.clone(),
                coupling,
                grid.clone(),
                state.lambda,
                state.log_density,
                g,
                opts.support_threshold,
                report,
            ));
        }
        if change > 20.0 * last_change {
            restarts += 1;
            damping = (damping * 0.5).max(1e-4);
            dx.clear();
            dr.clear();
            prev = None;
        }
        last_change = change;

        if let Some((py, pr)) = prev.take() {
            dx.push_back(y.iter().zip(&py).map(|(a, b)| a - b).collect());
            dr.push_back(r.iter().zip(&pr).map(|(a, b)| a - b).collect());
            while dx.len() > opts.anderson_depth {
                dx.pop_front();
                dr.pop_front();
            }
        }
        let mut step: Vec<f64> = r.iter().map(|v| damping * v).collect();
        if !dr.is_empty() {
            let m = dr.len();
            let mat = DMatrix::from_fn(n, m, |i, j| dr[j][i]);
            let rhs = DVector::from_column_slice(&r);
            let gamma = mat
                .clone()
                .svd(true, true)
                .solve(&rhs, 1e-12)
                .unwrap_or_else(|_| DVector::zeros(m));
            for j in 0..m {
                let gj = gamma[j];
                for i in 0..n {
                    step[i] -= gj * (dx[j][i] + damping * dr[j][i]);
                }
            }
        }
        prev = Some((y.clone(), r));
        for (yi, s) in y.iter_mut().zip(&step) {
            *yi += s;
        }
    }
    let last = history.last().cloned().unwrap_or(f64::NAN);
    Err(Error::NonConvergence {
        what: format!("equilibrium iteration for {} at P={coupling}", potential.name()),
        iterations: opts.max_iter,
        residual: last,
    })
}

/// Half width at which `exp(-V(±L) + 2P·ln(1 + L))` falls below `1e-14`.
pub fn tail_half_width(potential: &Potential, coupling: f64) -> f64 {
    let bound = (1e-14f64).ln();
    let mut l = 1.0;
    while l < 1e4 {
        let ok = [l, -l]
            .iter()
            .all(|&x| -potential.value(x) + 2.0 * coupling * (1.0 + l).ln() < bound);
        if ok {
            return l;
        }
        l += 0.25;
    }
    l
}

/// Choose the grid automatically: the half width from the tail rule, then double the
/// node count until `λ` moves by less than `1e-8`.
pub fn solve_equilibrium_auto(
    potential: &Potential,
    coupling: f64,
    opts: &EquilibriumOptions,
) -> Result<EquilibriumMeasure> {
    let l = tail_half_width(potential, coupling);
    let mut n = 512;
    let mut prev = solve_equilibrium(potential, coupling, &build_grid(l, n)?, opts)?;
    while n < 16384 {
        n *= 2;
        let next = solve_equilibrium(potential, coupling, &build_grid(l, n)?, opts)?;
        if (next.lambda - prev.lambda).abs() < 1e-8 {
            return Ok(next);
        }
        prev = next;
    }
    Err(Error::Resolution(format!(
        "normaliser not stable to 1e-8 at {n} nodes on [-{l}, {l}]"
    )))
}
