//! Equilibrium measures of the high-temperature log-gas: potentials, assumption
//! probes, the fixed-point solver, the Gaussian closed form and serialisation.

mod closed_form;
mod io;
mod measure;
mod potential;
mod solver;
mod validate;

pub use closed_form::{fourier_factor_sq, gaussian_closed_form_density};
pub use io::{measure_from_json, measure_to_json, MEASURE_SCHEMA_VERSION};
pub use measure::{EquilibriumMeasure, SolverReport};
pub use potential::Potential;
pub use solver::{solve_equilibrium, solve_equilibrium_auto, tail_half_width, EquilibriumOptions};
pub use validate::{finite_n_probe, poincare_epsilon, validate_potential, Check, ValidationReport};
