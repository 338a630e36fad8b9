//! Sampling the `N`-particle Gibbs measure at inverse temperature `2P/N` and testing
//! its predictions: Gaussian fluctuations with the limiting variance, decay of the
//! anisotropy term, concentration in the log-energy distance, and Gumbel extremes.
//!
//! Every sampler is seeded; independent draws or chains use distinct ChaCha streams of
//! the master seed, so results are bit-identical in sequential and parallel mode.

mod concentration;
mod config;
mod edge;
mod fluctuation;
mod io;
mod samplers;
mod stats;

pub use concentration::{
    concentration_curve, smoothed_distance, smoothed_empirical_density, ConcentrationRow, ConcentrationTable,
};
pub use config::{Configuration, EnsembleConfig, ExtremeBatch, SampleBatch, Sampler, SamplerDiagnostics};
pub use edge::{edge_scales, gumbel_test, EdgeScales, EdgeStats, MIN_EDGE_SAMPLES};
pub use fluctuation::{
    anisotropy_zeta, clt_test, equilibrium_mean, fluctuation, AnisotropyKernel, FluctuationStats, MIN_EFFECTIVE_SAMPLES,
};
pub use io::{
    batch_summary_json, decode_batch, encode_batch, read_batch, write_batch, write_concentration_csv, write_edge_csv,
    write_fluctuation_csv, BATCH_SCHEMA_VERSION,
};
pub use samplers::{
    gibbs_energy, sample, sample_independent, sample_independent_extremes, sample_metropolis, sample_tridiagonal,
    sample_tridiagonal_extremes, sample_tridiagonal_gaussian, tridiagonal_matrix, ACCEPTANCE_WINDOW,
};
pub use stats::{
    gumbel_cdf, integrated_autocorrelation_time, kolmogorov_p_value, kolmogorov_survival, ks_one_sample,
    ks_two_sample, moments, KsResult, MeasureCdf, Moments,
};
