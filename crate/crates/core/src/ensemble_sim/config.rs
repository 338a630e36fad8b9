use serde::{Deserialize, Serialize};

use crate::equilibrium::Potential;
use crate::error::{Error, Result};
use crate::par::Parallelism;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Sampler {
    Metropolis,
    TridiagonalGaussian,
}

/// Parameters of one sampling run of the Gibbs measure with inverse temperature `2P/N`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct EnsembleConfig {
    pub potential: Potential,
    /// `P`; the pair repulsion is `|x_i - x_j|^{2P/N}`.
    pub coupling: f64,
    pub n_particles: usize,
    pub sampler: Sampler,
    pub n_samples: usize,
    #[serde(default = "default_thinning")]
    pub sweeps_per_sample: usize,
    #[serde(default = "default_burn_in")]
    pub burn_in: usize,
    #[serde(default = "default_step_scale")]
    pub step_scale: f64,
    pub seed: u64,
    /// Independent Metropolis chains; samples are split evenly between them.
    #[serde(default = "default_chains")]
    pub chains: usize,
    #[serde(default, skip_serializing)]
    pub parallelism: Parallelism,
}

fn default_thinning() -> usize {
    5
}
fn default_burn_in() -> usize {
    200
}
fn default_step_scale() -> f64 {
    3.0
}
fn default_chains() -> usize {
    4
}

impl EnsembleConfig {
    /// Metropolis run with the default thinning, burn-in, step and chain count.
    pub fn metropolis(potential: Potential, coupling: f64, n_particles: usize, n_samples: usize, seed: u64) -> Self {
        EnsembleConfig {
            potential,
            coupling,
            n_particles,
            sampler: Sampler::Metropolis,
            n_samples,
            sweeps_per_sample: default_thinning(),
            burn_in: default_burn_in(),
            step_scale: default_step_scale(),
            seed,
            chains: default_chains(),
            parallelism: Parallelism::default(),
        }
    }

    pub fn tridiagonal(coupling: f64, n_particles: usize, n_samples: usize, seed: u64) -> Self {
        EnsembleConfig {
            sampler: Sampler::TridiagonalGaussian,
            ..Self::metropolis(Potential::Gaussian, coupling, n_particles, n_samples, seed)
        }
    }

    /// `β = 2P/N`.
    pub fn beta(&self) -> f64 {
        2.0 * self.coupling / self.n_particles as f64
    }

    pub fn validate(&self) -> Result<()> {
        let bad = |m: String| Err(Error::InvalidArgument(m));
        if self.n_particles < 2 {
            return bad(format!("need at least 2 particles, got {}", self.n_particles));
        }
        if self.n_samples < 1 {
            return bad("need at least one sample".into());
        }
        if !(self.coupling >= 0.0 && self.coupling.is_finite()) {
            return bad(format!("coupling must be finite and nonnegative, got {}", self.coupling));
        }
        if !(self.step_scale > 0.0 && self.step_scale.is_finite()) {
            return bad(format!("step_scale must be positive, got {}", self.step_scale));
        }
        if self.sampler == Sampler::Metropolis && (self.sweeps_per_sample == 0 || self.chains == 0) {
            return bad("sweeps_per_sample and chains must be positive".into());
        }
        if self.sampler == Sampler::TridiagonalGaussian {
            if self.potential != Potential::Gaussian {
                return bad("the tridiagonal sampler exists only for the Gaussian potential".into());
            }
            if self.coupling <= 0.0 {
                return bad("the tridiagonal sampler needs P > 0".into());
            }
        }
        Ok(())
    }
}

/// Particle positions, sorted ascending.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Configuration {
    positions: Vec<f64>,
}

impl Configuration {
    /// Sorts the input; positions must be finite.
    pub fn new(mut positions: Vec<f64>) -> Result<Self> {
        if positions.iter().any(|x| !x.is_finite()) {
            return Err(Error::InvalidArgument("configuration has non-finite positions".into()));
        }
        positions.sort_by(|a, b| a.total_cmp(b));
        Ok(Configuration { positions })
    }

    pub(crate) fn from_sorted(positions: Vec<f64>) -> Self {
        debug_assert!(positions.windows(2).all(|w| w[0] <= w[1]));
        Configuration { positions }
    }

    pub fn positions(&self) -> &[f64] {
        &self.positions
    }
    pub fn len(&self) -> usize {
        self.positions.len()
    }
    pub fn is_empty(&self) -> bool {
        self.positions.is_empty()
    }
    pub fn min(&self) -> f64 {
        self.positions[0]
    }
    pub fn max(&self) -> f64 {
        self.positions[self.positions.len() - 1]
    }
}

/// Sampler health figures. Not part of the statistical output.
#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
pub struct SamplerDiagnostics {
    /// Integrated autocorrelation time of `Σ x_i²` in units of stored samples, worst chain.
    pub autocorrelation_time: Option<f64>,
    pub warnings: Vec<String>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SampleBatch {
    pub configs: Vec<Configuration>,
    pub config: EnsembleConfig,
    /// Metropolis acceptance after burn-in.
    pub acceptance_rate: Option<f64>,
    pub diagnostics: SamplerDiagnostics,
}

impl SampleBatch {
    pub fn len(&self) -> usize {
        self.configs.len()
    }
    pub fn is_empty(&self) -> bool {
        self.configs.is_empty()
    }
    pub fn n_particles(&self) -> usize {
        self.config.n_particles
    }
    /// All positions of all samples in one vector.
    pub fn pooled(&self) -> Vec<f64> {
        self.configs.iter().flat_map(|c| c.positions().iter().copied()).collect()
    }
}

/// Only the extreme particles of each sample, for sizes where full spectra are too costly.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ExtremeBatch {
    pub n_particles: usize,
    pub coupling: f64,
    pub minima: Vec<f64>,
    pub maxima: Vec<f64>,
}

impl ExtremeBatch {
    pub fn len(&self) -> usize {
        self.maxima.len()
    }
    pub fn is_empty(&self) -> bool {
        self.maxima.is_empty()
    }
}

impl From<&SampleBatch> for ExtremeBatch {
    fn from(b: &SampleBatch) -> Self {
        ExtremeBatch {
            n_particles: b.n_particles(),
            coupling: b.config.coupling,
            minima: b.configs.iter().map(Configuration::min).collect(),
            maxima: b.configs.iter().map(Configuration::max).collect(),
        }
    }
}
