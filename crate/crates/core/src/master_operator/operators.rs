//! Pointwise actions of `A`, `W`, `Ξ`, `L` on nodal values, and the Schrödinger
//! potential conjugate to `A`.

use crate::equilibrium::EquilibriumMeasure;
use crate::grid_numerics::{d1, d2, hilbert_slice};
use crate::par::{map_indexed, Parallelism};

/// `w_V = ½[(ln ρ)'' + ½((ln ρ)')²]`, expanded in `V`, `H[ρ]`, `H[ρ']` so that no
/// logarithm of a tiny density is differentiated.
pub fn schrodinger_potential(eq: &EquilibriumMeasure) -> Vec<f64> {
    let p = eq.coupling;
    eq.grid
        .nodes()
        .iter()
        .enumerate()
        .map(|(i, &x)| {
            let (v1, v2) = (eq.potential.d1(x), eq.potential.d2(x));
            let (hr, hr1) = (eq.hilbert[i], eq.hilbert_d1[i]);
            0.5 * (0.5 * v1 * v1 - v2 + 2.0 * p * v1 * hr - 2.0 * p * hr1 + 2.0 * p * p * hr * hr)
        })
        .collect()
}

/// `A[u] = -(u'ρ)'/ρ = -(u'' + (ln ρ)' u')`.
pub fn apply_a(eq: &EquilibriumMeasure, u: &[f64]) -> Vec<f64> {
    let h = eq.grid.spacing();
    let (u1, u2) = (d1(h, u), d2(h, u));
    let g = eq.log_density_d1();
    (0..u.len()).map(|i| -(u2[i] + g[i] * u1[i])).collect()
}

/// `W[u] = -H[u'ρ] + ∫ H[u'ρ] dμ`; zero `μ`-mean by construction.
pub fn apply_w(eq: &EquilibriumMeasure, u: &[f64]) -> Vec<f64> {
    let u1 = d1(eq.grid.spacing(), u);
    let flux: Vec<f64> = u1.iter().zip(&eq.density).map(|(a, r)| a * r).collect();
    let hf = hilbert_slice(&eq.grid, &flux);
    let mean = eq.mu_integral(&hf);
    hf.iter().map(|v| mean - v).collect()
}

/// `∫ (u(x_i) - u(y)) / (x_i - y) dμ(y)` at every node, by the trapezoid rule with the
/// diagonal term replaced by its limit `u'(x_i)`. The integrand is smooth, so the rule
/// inherits the spectral accuracy of the trapezoid rule for decaying integrands.
pub fn difference_quotient_integral(eq: &EquilibriumMeasure, u: &[f64], u1: &[f64], mode: Parallelism) -> Vec<f64> {
    let xs = eq.grid.nodes();
    let w = eq.mu_weights();
    let (lo, hi) = quadrature_range(eq);
    map_indexed(mode, u.len(), |i| {
        let mut acc = 0.0;
        for j in lo..=hi {
            acc += if j == i {
                w[j] * u1[i]
            } else {
                w[j] * (u[i] - u[j]) / (xs[i] - xs[j])
            };
        }
        acc
    })
}

/// Nodes carrying `μ`-weight above `1e-300` relative to the peak; the rest are exact zeros
/// for every quadrature that follows.
pub fn quadrature_range(eq: &EquilibriumMeasure) -> (usize, usize) {
    let peak = eq.log_density.iter().cloned().fold(f64::NEG_INFINITY, f64::max);
    let cut = peak - 690.0;
    let lo = eq.log_density.iter().position(|&l| l >= cut).unwrap_or(0);
    let hi = eq.log_density.iter().rposition(|&l| l >= cut).unwrap_or(eq.len() - 1);
    (lo, hi)
}

/// `Ξ[u] = 2P ∫ (u(x)-u(y))/(x-y) dμ(y) + u' - V'u - 2P ∫ H[uρ] dμ`.
pub fn apply_xi(eq: &EquilibriumMeasure, u: &[f64]) -> Vec<f64> {
    apply_xi_with(eq, u, Parallelism::default())
}

pub fn apply_xi_with(eq: &EquilibriumMeasure, u: &[f64], mode: Parallelism) -> Vec<f64> {
    let h = eq.grid.spacing();
    let p2 = 2.0 * eq.coupling;
    let u1 = d1(h, u);
    let xs = eq.grid.nodes();
    let mut out: Vec<f64> = (0..u.len()).map(|i| u1[i] - eq.potential.d1(xs[i]) * u[i]).collect();
    if p2 != 0.0 {
        let dq = difference_quotient_integral(eq, u, &u1, mode);
        let weighted: Vec<f64> = u.iter().zip(&eq.density).map(|(a, r)| a * r).collect();
        let shift = p2 * eq.mu_integral(&hilbert_slice(&eq.grid, &weighted));
        for i in 0..u.len() {
            out[i] += p2 * dq[i] - shift;
        }
    }
    out
}

/// `L[u] = Ξ[u']`.
pub fn apply_l(eq: &EquilibriumMeasure, u: &[f64]) -> Vec<f64> {
    apply_xi(eq, &d1(eq.grid.spacing(), u))
}

/// `⟨u, v⟩_H = ∫ u'v' dμ`, the energy pairing of `A`.
pub fn h_inner(eq: &EquilibriumMeasure, u: &[f64], v: &[f64]) -> f64 {
    let h = eq.grid.spacing();
    let (u1, v1) = (d1(h, u), d1(h, v));
    let prod: Vec<f64> = u1.iter().zip(&v1).map(|(a, b)| a * b).collect();
    eq.mu_integral(&prod)
}

pub fn h_norm(eq: &EquilibriumMeasure, u: &[f64]) -> f64 {
    h_inner(eq, u, u).max(0.0).sqrt()
}

/// `‖u‖` in `L²(μ)`.
pub fn mu_norm(eq: &EquilibriumMeasure, u: &[f64]) -> f64 {
    let sq: Vec<f64> = u.iter().map(|a| a * a).collect();
    eq.mu_integral(&sq).max(0.0).sqrt()
}

/// `⟨u, v⟩` in `L²(μ)`.
pub fn mu_inner(eq: &EquilibriumMeasure, u: &[f64], v: &[f64]) -> f64 {
    let prod: Vec<f64> = u.iter().zip(v).map(|(a, b)| a * b).collect();
    eq.mu_integral(&prod)
}
