//! Uniform grids, quadrature, and the singular integral operators of a log-gas:
//! Hilbert transform, logarithmic potential, ½-Sobolev pairing and log-energy distance.

mod diff;
mod grid;
mod hilbert;
mod logpot;
pub mod quadrature;
mod sobolev;
mod toeplitz;

pub use diff::{d1, d2, derivative, fornberg_weights, second_derivative};
pub use grid::{
    build_grid, build_uniform_grid, cell_integrals, integrate, integrate_slice, Grid, GridFunction, GridSpec,
    MIN_NODES, MIN_POWER_OF_TWO_NODES,
};
pub use hilbert::{endpoint_decay_warning, hilbert_pair, hilbert_slice, hilbert_transform, lattice_kernel};
pub use logpot::{
    box_pair_log_interaction, log_kernel_weight, log_potential, log_potential_of_density,
    log_potential_refined,
    log_potential_refined_slice, log_potential_slice,
};
pub use sobolev::{fourier_distance_d, half_inner, half_norm, half_norm_apply, LogEnergyDistance};
pub use toeplitz::ToeplitzOp;
