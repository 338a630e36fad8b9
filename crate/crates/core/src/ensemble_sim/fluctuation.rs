//! Linear statistics `√N (∫f dμ̂_N - ∫f dμ)`, the anisotropy term `ζ_N` and the CLT test.

use serde::{Deserialize, Serialize};
use statrs::distribution::{ContinuousCDF, Normal};

use super::config::{Configuration, SampleBatch};
use super::stats::{integrated_autocorrelation_time, ks_one_sample, moments, KsResult};
use crate::equilibrium::EquilibriumMeasure;
use crate::error::{Error, Result};
use crate::par::{map_indexed, Parallelism};
use crate::test_functions::ScalarField;

/// Minimum effective sample count accepted by [`clt_test`].
pub const MIN_EFFECTIVE_SAMPLES: f64 = 100.0;

/// `∫ f dμ` by grid quadrature, normalised by the quadrature mass.
pub fn equilibrium_mean(f: &dyn ScalarField, eq: &EquilibriumMeasure) -> f64 {
    let values: Vec<f64> = eq.grid.nodes().iter().map(|&x| f.eval(x)).collect();
    eq.mu_integral(&values) / eq.mass()
}

fn fluctuation_about(sample: &Configuration, f: &dyn ScalarField, mean: f64) -> f64 {
    let n = sample.len() as f64;
    let avg = sample.positions().iter().map(|&x| f.eval(x)).sum::<f64>() / n;
    n.sqrt() * (avg - mean)
}

/// `√N (N^{-1} Σ f(x_i) - ∫ f dμ)`.
pub fn fluctuation(sample: &Configuration, f: &dyn ScalarField, eq: &EquilibriumMeasure) -> f64 {
    fluctuation_about(sample, f, equilibrium_mean(f, eq))
}

/// `(f(x) - f(y)) / (x - y)`, continued by `f'` on the diagonal.
fn difference_quotient(f: &dyn ScalarField, x: f64, fx: f64, y: f64, fy: f64) -> f64 {
    if (x - y).abs() < 1e-7 * x.abs().max(1.0) {
        f.eval_d1(0.5 * (x + y))
    } else {
        (fx - fy) / (x - y)
    }
}

/// Grid data of `ζ_N(f) = ∬ Δf d(μ̂ - μ)²` that does not depend on the sample.
pub struct AnisotropyKernel<'a> {
    f: &'a dyn ScalarField,
    nodes: Vec<f64>,
    weights: Vec<f64>,
    values: Vec<f64>,
    /// `∬ Δf dμ dμ`.
    double_mean: f64,
}

impl<'a> AnisotropyKernel<'a> {
    pub fn new(f: &'a dyn ScalarField, eq: &EquilibriumMeasure) -> Self {
        let (lo, hi) = eq.support;
        let w = eq.mu_weights();
        let total: f64 = w[lo..=hi].iter().sum();
        let nodes = eq.grid.nodes()[lo..=hi].to_vec();
        let weights: Vec<f64> = w[lo..=hi].iter().map(|v| v / total).collect();
        let values: Vec<f64> = nodes.iter().map(|&x| f.eval(x)).collect();
        let slopes: Vec<f64> = nodes.iter().map(|&x| f.eval_d1(x)).collect();
        let rows = map_indexed(Parallelism::default(), nodes.len(), |k| {
            let mut acc = weights[k] * slopes[k];
            for l in 0..nodes.len() {
                if l != k {
                    acc += weights[l] * (values[k] - values[l]) / (nodes[k] - nodes[l]);
                }
            }
            weights[k] * acc
        });
        AnisotropyKernel { f, double_mean: rows.iter().sum(), nodes, weights, values }
    }

    /// `N^{-2} ΣΣ Δf(x_i, x_j) - 2N^{-1} Σ ∫ Δf(x_i, y) dμ(y) + ∬ Δf dμdμ`.
    pub fn zeta(&self, sample: &Configuration) -> f64 {
        let xs = sample.positions();
        let n = xs.len() as f64;
        let fx: Vec<f64> = xs.iter().map(|&x| self.f.eval(x)).collect();
        let mut pairs = 0.0;
        let mut mixed = 0.0;
        for i in 0..xs.len() {
            pairs += self.f.eval_d1(xs[i]);
            for j in i + 1..xs.len() {
                pairs += 2.0 * difference_quotient(self.f, xs[i], fx[i], xs[j], fx[j]);
            }
            mixed += self
                .nodes
                .iter()
                .zip(&self.values)
                .zip(&self.weights)
                .map(|((&y, &fy), &w)| w * difference_quotient(self.f, xs[i], fx[i], y, fy))
                .sum::<f64>();
        }
        pairs / (n * n) - 2.0 * mixed / n + self.double_mean
    }
}

pub fn anisotropy_zeta(sample: &Configuration, f: &dyn ScalarField, eq: &EquilibriumMeasure) -> f64 {
    AnisotropyKernel::new(f, eq).zeta(sample)
}

/// Outcome of [`clt_test`].
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FluctuationStats {
    /// `√N·fluct_N(f)` per sample.
    pub values: Vec<f64>,
    pub mean: f64,
    pub mean_se: f64,
    pub variance: f64,
    pub variance_se: f64,
    pub target_sigma2: f64,
    pub autocorrelation_time: f64,
    pub effective_samples: f64,
    /// One-sample test against `Normal(0, target_sigma2)`.
    pub ks: KsResult,
    /// `|variance - target| ≤ max(5% target, 3 SE)`.
    pub variance_consistent: bool,
    /// `|mean| ≤ 3 SE`.
    pub centred: bool,
    /// All values vanish (constant `f`); reported as exact.
    pub degenerate: bool,
}

impl FluctuationStats {
    pub fn relative_variance_error(&self) -> f64 {
        (self.variance - self.target_sigma2).abs() / self.target_sigma2.abs().max(f64::MIN_POSITIVE)
    }
}

fn same_model(batch: &SampleBatch, eq: &EquilibriumMeasure) -> bool {
    batch.config.potential == eq.potential && (batch.config.coupling - eq.coupling).abs() <= 1e-12
}

/// Fluctuation statistics of `f` over the batch compared with `Normal(0, sigma2_target)`.
pub fn clt_test(
    batch: &SampleBatch,
    f: &dyn ScalarField,
    eq: &EquilibriumMeasure,
    sigma2_target: f64,
) -> Result<FluctuationStats> {
    if !same_model(batch, eq) {
        return Err(Error::InvalidArgument("batch and equilibrium measure have different (V, P)".into()));
    }
    if !(sigma2_target >= 0.0) {
        return Err(Error::InvalidArgument(format!("target variance must be >= 0, got {sigma2_target}")));
    }
    let mean = equilibrium_mean(f, eq);
    let mut values = map_indexed(Parallelism::default(), batch.len(), |s| fluctuation_about(&batch.configs[s], f, mean));
    // Chains are concatenated; the few boundary pairs barely bias the estimate.
    let tau = if batch.acceptance_rate.is_some() {
        integrated_autocorrelation_time(&values).unwrap_or(1.0)
    } else {
        1.0
    };
    let effective = values.len() as f64 / tau;
    if effective < MIN_EFFECTIVE_SAMPLES {
        return Err(Error::Sampling(format!(
            "insufficient data: {effective:.1} effective samples, need {MIN_EFFECTIVE_SAMPLES}"
        )));
    }
    let scale = values.iter().fold(0.0f64, |a, v| a.max(v.abs()));
    let fscale = batch.configs[0].positions().iter().fold(0.0f64, |a, &x| a.max(f.eval(x).abs()));
    if scale <= 1e-12 * fscale.max(1.0) {
        values.iter_mut().for_each(|v| *v = 0.0);
        let ks = KsResult { statistic: 0.0, p_value: 1.0, effective_size: effective };
        return Ok(FluctuationStats {
            values,
            mean: 0.0,
            mean_se: 0.0,
            variance: 0.0,
            variance_se: 0.0,
            target_sigma2: sigma2_target,
            autocorrelation_time: tau,
            effective_samples: effective,
            ks,
            variance_consistent: sigma2_target == 0.0,
            centred: true,
            degenerate: true,
        });
    }
    let m = moments(&values, tau);
    let ks = if sigma2_target > 0.0 {
        let normal = Normal::new(0.0, sigma2_target.sqrt()).expect("positive scale");
        let mut r = ks_one_sample(&values, |x| normal.cdf(x));
        r.p_value = super::stats::kolmogorov_p_value(r.statistic, effective);
        r.effective_size = effective;
        r
    } else {
        KsResult { statistic: 1.0, p_value: 0.0, effective_size: effective }
    };
    Ok(FluctuationStats {
        variance_consistent: (m.variance - sigma2_target).abs() <= (0.05 * sigma2_target).max(3.0 * m.variance_se),
        centred: m.mean.abs() <= 3.0 * m.mean_se,
        values,
        mean: m.mean,
        mean_se: m.mean_se,
        variance: m.variance,
        variance_se: m.variance_se,
        target_sigma2: sigma2_target,
        autocorrelation_time: tau,
        effective_samples: effective,
        ks,
        degenerate: false,
    })
}
