//! The master operator `Ξ`, its derivative form `L[u] = Ξ[u']`, the decomposition
//! `-L = A + 2P·W`, and two independent inverses of `L`: a Galerkin solve in the
//! eigenbasis of `A`, and the Fredholm route `-L = (id - K)·A`.

mod fredholm;
mod io;
mod operators;
mod spectral;
mod variance;

pub use fredholm::{
    fredholm_kernel, invert_a, invert_l_fredholm, FredholmKernel, FredholmSolution, FredholmSolver,
    KERNEL_THRESHOLD,
};
pub use io::{basis_from_json, basis_to_json, BASIS_SCHEMA_VERSION};
pub use operators::{
    apply_a, apply_l, apply_w, apply_xi, apply_xi_with, difference_quotient_integral, h_inner, h_norm,
    mu_inner, mu_norm, quadrature_range, schrodinger_potential,
};
pub use spectral::{
    assemble_operator, diagonalize_a, invert_l_spectral, invert_l_spectral_unchecked, OperatorAssembly,
    SpectralBasis, SpectralOptions, SpectralSolution,
};
pub use variance::{
    forward_variance_q, forward_variance_q_with, limiting_variance, limiting_variance_auto,
    regularity_spot_check, toda_current, variance_identity_check, IdentityCheck, TodaCurrent,
    VarianceResult, MODE_CONVERGENCE,
};

use crate::equilibrium::{solve_equilibrium, tail_half_width, EquilibriumMeasure, EquilibriumOptions, Potential};
use crate::error::{Error, Result};
use crate::grid_numerics::build_grid;

/// Largest node spacing for operator work; resolves a few hundred modes with the
/// eighth-order stencils. Steep potentials tighten it to `0.5/√λ_M`.
pub const OPERATOR_SPACING: f64 = 0.02;

/// Schrödinger potential on the probe grid, continued by its asymptote `V'²/4` outside.
fn extended_potential(probe: &EquilibriumMeasure, w: &[f64], x: f64) -> f64 {
    let half = probe.grid.half_width();
    if x.abs() <= half {
        w[probe.grid.nearest(x)]
    } else {
        probe.potential.d1(x).powi(2) / 4.0
    }
}

/// Half width of the classically allowed region at level `λ_M`, with `λ_M` estimated by
/// the Weyl count `(1/π) ∫ √(λ - w)₊ dx = M + ½`, plus a tunnelling margin.
/// Half width beyond the `M`-th classical turning point, and the Weyl estimate of `λ_M`.
fn operator_half_width(probe: &EquilibriumMeasure, n_modes: usize) -> (f64, f64) {
    let w = schrodinger_potential(probe);
    let turning = |level: f64, sign: f64| {
        let mut x = 0.0;
        while x < 1e4 && extended_potential(probe, &w, sign * x) < level {
            x += 0.05;
        }
        x
    };
    let count = |level: f64| {
        let (a, b) = (turning(level, -1.0), turning(level, 1.0));
        let steps = 4000;
        let dx = (a + b) / steps as f64;
        (0..steps)
            .map(|k| {
                let x = -a + (k as f64 + 0.5) * dx;
                (level - extended_potential(probe, &w, x)).max(0.0).sqrt() * dx
            })
            .sum::<f64>()
            / std::f64::consts::PI
    };
    let target = n_modes as f64 + 0.5;
    let (mut lo, mut hi) = (w.iter().cloned().fold(f64::INFINITY, f64::min), 1.0);
    while count(hi) < target && hi < 1e12 {
        hi *= 2.0;
    }
    for _ in 0..60 {
        let mid = 0.5 * (lo + hi);
        if count(mid) < target {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    (1.1 * turning(hi, -1.0).max(turning(hi, 1.0)) + 4.0, hi)
}

/// Equilibrium measure on a grid wide enough for the first `n_modes` eigenfunctions of
/// `A` to stay clear of the walls, together with its diagonalisation. A first solve gives
/// the top eigenvalue; the grid is then widened past the corresponding turning point of
/// `V'²/4`, and by 25% per attempt while the wall test of [`diagonalize_a`] fails.
pub fn solve_for_operator(
    potential: &Potential,
    coupling: f64,
    spectral: &SpectralOptions,
    eq_opts: &EquilibriumOptions,
) -> Result<(EquilibriumMeasure, SpectralBasis)> {
    let solve_on = |half_width: f64, spacing: f64| -> Result<EquilibriumMeasure> {
        let wanted = (2.0 * half_width / spacing).max(8.0 * spectral.n_modes as f64).max(1024.0);
        let n = (wanted as usize).next_power_of_two().min(1 << 15);
        solve_equilibrium(potential, coupling, &build_grid(half_width, n)?, eq_opts)
    };
    let mut half_width = (1.5 * tail_half_width(potential, coupling)).max(8.0);
    let probe = solve_on(half_width, OPERATOR_SPACING)?;
    let (needed, top_eigenvalue) = operator_half_width(&probe, spectral.n_modes);
    half_width = half_width.max(needed);
    let spacing = OPERATOR_SPACING.min(0.5 / top_eigenvalue.max(1.0).sqrt());
    let mut last_err = None;
    for _ in 0..6 {
        let eq = solve_on(half_width, spacing)?;
        match diagonalize_a(&eq, spectral) {
            Ok(basis) => return Ok((eq, basis)),
            Err(Error::Resolution(msg)) => {
                log::info!("operator grid ±{half_width:.2} with {} nodes rejected: {msg}", eq.len());
                last_err = Some(msg);
                half_width *= 1.25;
            }
            Err(e) => return Err(e),
        }
    }
    Err(Error::Resolution(last_err.unwrap_or_default()))
}
