//! Bounded smooth test functions for linear statistics.

use std::sync::Arc;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::grid_numerics::{Grid, GridFunction};

/// Anything that can be evaluated at particle positions.
pub trait ScalarField: Sync {
    fn eval(&self, x: f64) -> f64;

    /// Central difference with step `eps^{1/3}`-scaled, error about `1e-10` for
    /// functions with moderate third derivative.
    fn eval_d1(&self, x: f64) -> f64 {
        let h = 6e-6 * x.abs().max(1.0);
        (self.eval(x + h) - self.eval(x - h)) / (2.0 * h)
    }
}

impl ScalarField for GridFunction {
    fn eval(&self, x: f64) -> f64 {
        self.interpolate_cubic(x)
    }
}

impl<F: Fn(f64) -> f64 + Sync> ScalarField for F {
    fn eval(&self, x: f64) -> f64 {
        self(x)
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum TestFunction {
    Constant { value: f64 },
    /// `tanh((x - shift) / scale)`.
    Tanh { scale: f64, shift: f64 },
    /// `amplitude · exp(-(x - center)² / (2 width²))`.
    GaussianBump { center: f64, width: f64, amplitude: f64 },
    /// `cos(freq · x) · exp(-x² / (2 width²))`.
    CosBump { freq: f64, width: f64 },
    /// `x^power` tapered by `(tanh(x + cutoff) - tanh(x - cutoff)) / 2`.
    TruncatedMonomial { power: u32, cutoff: f64 },
    /// `exp(1 - 1 / (1 - r²))` for `r = (x - center) / radius` inside the support.
    CompactBump { center: f64, radius: f64 },
    Sum { terms: Vec<(f64, TestFunction)> },
}

impl TestFunction {
    pub fn tanh() -> Self {
        TestFunction::Tanh { scale: 1.0, shift: 0.0 }
    }

    pub fn value(&self, x: f64) -> f64 {
        match self {
            TestFunction::Constant { value } => *value,
            TestFunction::Tanh { scale, shift } => ((x - shift) / scale).tanh(),
            TestFunction::GaussianBump { center, width, amplitude } => {
                amplitude * (-(x - center).powi(2) / (2.0 * width * width)).exp()
            }
            TestFunction::CosBump { freq, width } => {
                (freq * x).cos() * (-x * x / (2.0 * width * width)).exp()
            }
            TestFunction::TruncatedMonomial { power, cutoff } => {
                x.powi(*power as i32) * 0.5 * ((x + cutoff).tanh() - (x - cutoff).tanh())
            }
            TestFunction::CompactBump { center, radius } => {
                let r = (x - center) / radius;
                if r.abs() < 1.0 {
                    (1.0 - 1.0 / (1.0 - r * r)).exp()
                } else {
                    0.0
                }
            }
            TestFunction::Sum { terms } => terms.iter().map(|(c, f)| c * f.value(x)).sum(),
        }
    }

    pub fn on_grid(&self, grid: &Arc<Grid>) -> GridFunction {
        grid.sample(|x| self.value(x))
    }

    /// Short label for reports.
    pub fn label(&self) -> String {
        match self {
            TestFunction::Constant { .. } => "constant".into(),
            TestFunction::Tanh { .. } => "tanh".into(),
            TestFunction::GaussianBump { .. } => "gaussian_bump".into(),
            TestFunction::CosBump { .. } => "cos_bump".into(),
            TestFunction::TruncatedMonomial { power, .. } => format!("x^{power}"),
            TestFunction::CompactBump { .. } => "compact_bump".into(),
            TestFunction::Sum { .. } => "sum".into(),
        }
    }
}

/// Deterministic suite of smooth bounded functions: each is a random combination of one
/// Gaussian bump, one tanh step and one cosine bump, with length scales at least 0.6.
pub fn random_smooth_suite(seed: u64, count: usize) -> Vec<TestFunction> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    (0..count)
        .map(|_| {
            let bump = TestFunction::GaussianBump {
                center: rng.gen_range(-1.5..1.5),
                width: rng.gen_range(0.6..1.5),
                amplitude: 1.0,
            };
            let step = TestFunction::Tanh { scale: rng.gen_range(0.6..1.5), shift: rng.gen_range(-1.0..1.0) };
            let wave = TestFunction::CosBump { freq: rng.gen_range(0.3..1.5), width: rng.gen_range(1.0..2.0) };
            TestFunction::Sum {
                terms: vec![
                    (rng.gen_range(-1.0..1.0), bump),
                    (rng.gen_range(-1.0..1.0), step),
                    (rng.gen_range(-1.0..1.0), wave),
                ],
            }
        })
        .collect()
}

impl ScalarField for TestFunction {
    fn eval(&self, x: f64) -> f64 {
        self.value(x)
    }
}
