//! Numerical toolkit for one-dimensional log-gases in the high-temperature regime,
//! where the inverse temperature scales like `2P/N`.
//!
//! * [`grid_numerics`]: grids, Hilbert transform, log potential, Sobolev pairings.
//! * [`equilibrium`]: potentials, assumption checks and the equilibrium solver.
//! * [`master_operator`]: the operators `A`, `W`, `L`, `Ξ` and their inversion.
//! * [`ensemble_sim`]: Gibbs sampling, fluctuation statistics and edge behaviour.

// `!(x > 0.0)` is used on purpose: it also rejects NaN.
#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod equilibrium;
pub mod ensemble_sim;
pub mod error;
pub mod grid_numerics;
pub mod linalg;
pub mod master_operator;
pub mod par;
pub mod test_functions;

pub use error::{Error, Result};
pub use par::Parallelism;
