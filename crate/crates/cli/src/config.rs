//! TOML run configuration. Every section is optional; defaults describe the Gaussian
//! potential at `P = 1`.

use std::path::{Path, PathBuf};

use loggas::ensemble_sim::Sampler;
use loggas::equilibrium::{EquilibriumOptions, Potential};
use loggas::grid_numerics::MIN_POWER_OF_TWO_NODES;
use loggas::test_functions::TestFunction;
use serde::{Deserialize, Serialize};

use crate::error::CliError;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct RunConfig {
    pub potential: Potential,
    /// `P >= 0`.
    pub pressure: f64,
    pub grid: GridConfig,
    pub solver: SolverConfig,
    pub spectral: SpectralConfig,
    pub ensemble: EnsembleSection,
    pub test_function: FunctionSpec,
    pub edge: EdgeSection,
    pub concentration: ConcentrationSection,
    pub toda: TodaSection,
    pub output_dir: PathBuf,
}

impl Default for RunConfig {
    fn default() -> Self {
        RunConfig {
            potential: Potential::Gaussian,
            pressure: 1.0,
            grid: GridConfig::default(),
            solver: SolverConfig::default(),
            spectral: SpectralConfig::default(),
            ensemble: EnsembleSection::default(),
            test_function: FunctionSpec::default(),
            edge: EdgeSection::default(),
            concentration: ConcentrationSection::default(),
            toda: TodaSection::default(),
            output_dir: PathBuf::from("results"),
        }
    }
}

/// Unset fields fall back to the automatic tail-width rule and 2048 nodes.
#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct GridConfig {
    pub half_width: Option<f64>,
    pub n_points: Option<usize>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct SolverConfig {
    pub tol: f64,
    pub max_iter: usize,
    pub damping: f64,
}

impl Default for SolverConfig {
    fn default() -> Self {
        let d = EquilibriumOptions::default();
        SolverConfig { tol: d.tol, max_iter: d.max_iter, damping: d.damping }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct SpectralConfig {
    pub modes: usize,
}

impl Default for SpectralConfig {
    fn default() -> Self {
        SpectralConfig { modes: 64 }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum SamplerChoice {
    /// Tridiagonal when it is exact (Gaussian `V`, `P > 0`), Metropolis otherwise.
    Auto,
    Metropolis,
    Tridiagonal,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct EnsembleSection {
    pub sizes: Vec<usize>,
    pub sampler: SamplerChoice,
    pub samples: usize,
    pub seed: u64,
    pub sweeps_per_sample: Option<usize>,
    pub burn_in: Option<usize>,
    pub step_scale: Option<f64>,
    pub chains: Option<usize>,
}

impl Default for EnsembleSection {
    fn default() -> Self {
        EnsembleSection {
            sizes: vec![64, 128, 256],
            sampler: SamplerChoice::Auto,
            samples: 1000,
            seed: 1,
            sweeps_per_sample: None,
            burn_in: None,
            step_scale: None,
            chains: None,
        }
    }
}

/// Built-in test functions; omitted parameters take the listed defaults.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case", deny_unknown_fields)]
pub enum FunctionSpec {
    Tanh {
        #[serde(default = "one")]
        scale: f64,
        #[serde(default)]
        shift: f64,
    },
    GaussianBump {
        center: f64,
        width: f64,
        #[serde(default = "one")]
        amplitude: f64,
    },
    CosBump {
        freq: f64,
        width: f64,
    },
    TruncatedMonomial {
        power: u32,
        cutoff: f64,
    },
    CompactBump {
        center: f64,
        radius: f64,
    },
    Constant {
        value: f64,
    },
}

fn one() -> f64 {
    1.0
}

impl Default for FunctionSpec {
    fn default() -> Self {
        FunctionSpec::Tanh { scale: 1.0, shift: 0.0 }
    }
}

impl FunctionSpec {
    pub fn to_test_function(&self) -> TestFunction {
        match *self {
            FunctionSpec::Tanh { scale, shift } => TestFunction::Tanh { scale, shift },
            FunctionSpec::GaussianBump { center, width, amplitude } => {
                TestFunction::GaussianBump { center, width, amplitude }
            }
            FunctionSpec::CosBump { freq, width } => TestFunction::CosBump { freq, width },
            FunctionSpec::TruncatedMonomial { power, cutoff } => TestFunction::TruncatedMonomial { power, cutoff },
            FunctionSpec::CompactBump { center, radius } => TestFunction::CompactBump { center, radius },
            FunctionSpec::Constant { value } => TestFunction::Constant { value },
        }
    }

    fn positive_fields(&self) -> Vec<(&'static str, f64)> {
        match *self {
            FunctionSpec::Tanh { scale, .. } => vec![("scale", scale)],
            FunctionSpec::GaussianBump { width, .. } | FunctionSpec::CosBump { width, .. } => vec![("width", width)],
            FunctionSpec::TruncatedMonomial { cutoff, .. } => vec![("cutoff", cutoff)],
            FunctionSpec::CompactBump { radius, .. } => vec![("radius", radius)],
            FunctionSpec::Constant { .. } => vec![],
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct EdgeSection {
    pub sizes: Vec<usize>,
    pub samples: usize,
}

impl Default for EdgeSection {
    fn default() -> Self {
        EdgeSection { sizes: vec![1000, 10_000], samples: 2000 }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct ConcentrationSection {
    pub radii: Vec<f64>,
    /// Defaults to the grid spacing.
    pub smoothing_width: Option<f64>,
}

impl Default for ConcentrationSection {
    fn default() -> Self {
        ConcentrationSection { radii: (1..=30).map(|k| 0.01 * k as f64).collect(), smoothing_width: None }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct TodaSection {
    pub orders: Vec<u32>,
    pub cutoff: f64,
}

impl Default for TodaSection {
    fn default() -> Self {
        TodaSection { orders: vec![1, 2, 3, 4], cutoff: 6.0 }
    }
}

/// Command-line overrides applied on top of the file.
#[derive(Debug, Clone, Default)]
pub struct Overrides {
    pub seed: Option<u64>,
    pub modes: Option<usize>,
    pub tol: Option<f64>,
    pub out: Option<PathBuf>,
}

impl RunConfig {
    pub fn load(path: Option<&Path>, ov: &Overrides) -> Result<Self, CliError> {
        let mut cfg = match path {
            Some(p) => {
                let text = std::fs::read_to_string(p)
                    .map_err(|e| CliError::Config(format!("cannot read {}: {e}", p.display())))?;
                Self::parse(&text)?
            }
            None => RunConfig::default(),
        };
        if let Some(s) = ov.seed {
            cfg.ensemble.seed = s;
        }
        if let Some(m) = ov.modes {
            cfg.spectral.modes = m;
        }
        if let Some(t) = ov.tol {
            cfg.solver.tol = t;
        }
        if let Some(o) = &ov.out {
            cfg.output_dir = o.clone();
        }
        cfg.check()?;
        Ok(cfg)
    }

    pub fn parse(text: &str) -> Result<Self, CliError> {
        toml::from_str(text).map_err(|e| CliError::Config(format!("config: {e}")))
    }

    /// Range checks; the library repeats the ones it relies on.
    pub fn check(&self) -> Result<(), CliError> {
        let bad = |m: String| Err(CliError::Config(m));
        if !(self.pressure >= 0.0 && self.pressure.is_finite()) {
            return bad(format!("pressure must be finite and >= 0, got {}", self.pressure));
        }
        match &self.potential {
            Potential::EvenPolynomial { coeffs } if coeffs.is_empty() || coeffs.iter().any(|c| !c.is_finite()) => {
                return bad("even_polynomial needs a non-empty list of finite coefficients".into());
            }
            Potential::Cosh { amplitude, rate } if !(*amplitude > 0.0 && *rate > 0.0) => {
                return bad("cosh needs amplitude > 0 and rate > 0".into());
            }
            _ => {}
        }
        if let Some(h) = self.grid.half_width {
            if !(h > 0.0 && h.is_finite()) {
                return bad(format!("grid.half_width must be positive, got {h}"));
            }
        }
        if let Some(n) = self.grid.n_points {
            if n < MIN_POWER_OF_TWO_NODES || !n.is_power_of_two() {
                return bad(format!("grid.n_points must be a power of two >= {MIN_POWER_OF_TWO_NODES}, got {n}"));
            }
        }
        if !(self.solver.tol > 0.0) || self.solver.max_iter == 0 || !(self.solver.damping > 0.0 && self.solver.damping <= 1.0) {
            return bad("solver needs tol > 0, max_iter >= 1 and damping in (0, 1]".into());
        }
        if self.spectral.modes == 0 {
            return bad("spectral.modes must be >= 1".into());
        }
        let e = &self.ensemble;
        if e.sizes.is_empty() || e.sizes.iter().any(|&n| n < 2) || e.samples == 0 {
            return bad("ensemble needs sizes >= 2 and samples >= 1".into());
        }
        if e.sampler == SamplerChoice::Tridiagonal && (self.potential != Potential::Gaussian || self.pressure <= 0.0) {
            return bad("the tridiagonal sampler needs the gaussian potential and pressure > 0".into());
        }
        if self.edge.sizes.iter().any(|&n| n < 3) || self.edge.samples == 0 {
            return bad("edge needs sizes >= 3 and samples >= 1".into());
        }
        if self.concentration.radii.is_empty() || self.concentration.radii.iter().any(|r| !(*r > 0.0)) {
            return bad("concentration.radii must be positive".into());
        }
        if self.concentration.smoothing_width.is_some_and(|w| !(w > 0.0)) {
            return bad("concentration.smoothing_width must be positive".into());
        }
        if self.toda.orders.iter().any(|&k| k == 0) || !(self.toda.cutoff > 0.0) {
            return bad("toda needs orders >= 1 and cutoff > 0".into());
        }
        for (name, v) in self.test_function.positive_fields() {
            if !(v > 0.0 && v.is_finite()) {
                return bad(format!("test_function.{name} must be positive, got {v}"));
            }
        }
        Ok(())
    }

    pub fn sampler(&self) -> Sampler {
        match self.ensemble.sampler {
            SamplerChoice::Metropolis => Sampler::Metropolis,
            SamplerChoice::Tridiagonal => Sampler::TridiagonalGaussian,
            SamplerChoice::Auto if self.potential == Potential::Gaussian && self.pressure > 0.0 => {
                Sampler::TridiagonalGaussian
            }
            SamplerChoice::Auto => Sampler::Metropolis,
        }
    }

    pub fn equilibrium_options(&self) -> EquilibriumOptions {
        EquilibriumOptions {
            tol: self.solver.tol,
            max_iter: self.solver.max_iter,
            damping: self.solver.damping,
            ..EquilibriumOptions::default()
        }
    }
}
