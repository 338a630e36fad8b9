//! Location and width of the extreme particles, and the Gumbel law of the rescaled extremes.

use serde::{Deserialize, Serialize};

use super::config::ExtremeBatch;
use super::stats::{gumbel_cdf, ks_one_sample, KsResult};
use crate::equilibrium::EquilibriumMeasure;
use crate::error::{Error, Result};

/// Fewest samples accepted by [`gumbel_test`].
pub const MIN_EDGE_SAMPLES: usize = 500;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct EdgeScales {
    pub n_particles: usize,
    pub e_plus: f64,
    /// `|V'(E⁺)|`.
    pub alpha_plus: f64,
    pub e_minus: f64,
    pub alpha_minus: f64,
    /// `V(E^±) / ln N`, which tends to 1.
    pub potential_ratio_plus: f64,
    pub potential_ratio_minus: f64,
}

/// `g(x) = -V(x) + 2P ln|x| - ln Z - ln|V'(x)|`: the log of `N ρ(x)/|V'(x)|` with the
/// tail form of `ρ`, so `g(E) = -ln N` puts one expected particle beyond `E`.
fn edge_function(eq: &EquilibriumMeasure, x: f64) -> f64 {
    let v = &eq.potential;
    -v.value(x) + 2.0 * eq.coupling * x.abs().ln() - eq.lambda - v.d1(x).abs().ln()
}

/// Outermost root of `g = -ln N` on the side `sign`, by a scan from the grid end and bisection.
fn edge_root(eq: &EquilibriumMeasure, n: usize, sign: f64) -> Result<f64> {
    let target = -(n as f64).ln();
    let half = eq.grid.half_width();
    let phi = |t: f64| edge_function(eq, sign * t) - target;
    if !(phi(half) < 0.0) {
        return Err(Error::Resolution(format!(
            "edge for N = {n} lies beyond the grid end {:.3}; widen the grid",
            sign * half
        )));
    }
    let step = 0.01 * half;
    let mut hi = half;
    let mut lo = half - step;
    while lo > 0.0 && !(phi(lo) >= 0.0) {
        hi = lo;
        lo -= step;
    }
    if lo <= 0.0 {
        return Err(Error::Resolution(format!("no edge root for N = {n} on the side {sign}")));
    }
    for _ in 0..200 {
        let mid = 0.5 * (lo + hi);
        if phi(mid) >= 0.0 {
            lo = mid;
        } else {
            hi = mid;
        }
        if hi - lo <= 4.0 * f64::EPSILON * hi {
            break;
        }
    }
    let root = 0.5 * (lo + hi);
    // |V'| must grow monotonically beyond the root for the Gumbel scaling to apply.
    let samples = 200;
    let slope = |t: f64| eq.potential.d1(sign * t).abs();
    let monotone = (0..samples).all(|k| {
        let a = root + (half - root) * k as f64 / samples as f64;
        let b = root + (half - root) * (k + 1) as f64 / samples as f64;
        slope(b) >= slope(a) && slope(a) > 0.0
    });
    if !monotone {
        return Err(Error::AssumptionViolation(format!("|V'| is not increasing beyond the edge {:.4}", sign * root)));
    }
    Ok(sign * root)
}

/// Solve `g(E) = -ln N` on each side; `α = |V'(E)|`.
pub fn edge_scales(eq: &EquilibriumMeasure, n: usize) -> Result<EdgeScales> {
    if n < 3 {
        return Err(Error::InvalidArgument(format!("edge scales need N >= 3, got {n}")));
    }
    let e_plus = edge_root(eq, n, 1.0)?;
    let e_minus = edge_root(eq, n, -1.0)?;
    let ln_n = (n as f64).ln();
    Ok(EdgeScales {
        n_particles: n,
        e_plus,
        alpha_plus: eq.potential.d1(e_plus).abs(),
        e_minus,
        alpha_minus: eq.potential.d1(e_minus).abs(),
        potential_ratio_plus: eq.potential.value(e_plus) / ln_n,
        potential_ratio_minus: eq.potential.value(e_minus) / ln_n,
    })
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EdgeStats {
    pub scales: EdgeScales,
    /// `α⁺ (max - E⁺)`.
    pub rescaled_max: Vec<f64>,
    /// `α⁻ (E⁻ - min)`.
    pub rescaled_min: Vec<f64>,
    pub ks_max: KsResult,
    pub ks_min: KsResult,
}

/// Kolmogorov-Smirnov distance of both rescaled extremes to the standard Gumbel law.
pub fn gumbel_test(batch: &ExtremeBatch, eq: &EquilibriumMeasure) -> Result<EdgeStats> {
    if batch.len() < MIN_EDGE_SAMPLES {
        return Err(Error::Sampling(format!(
            "insufficient data: {} samples, need {MIN_EDGE_SAMPLES}",
            batch.len()
        )));
    }
    if (batch.coupling - eq.coupling).abs() > 1e-12 {
        return Err(Error::InvalidArgument("batch and equilibrium measure have different P".into()));
    }
    let scales = edge_scales(eq, batch.n_particles)?;
    let rescaled_max: Vec<f64> = batch.maxima.iter().map(|m| scales.alpha_plus * (m - scales.e_plus)).collect();
    let rescaled_min: Vec<f64> = batch.minima.iter().map(|m| scales.alpha_minus * (scales.e_minus - m)).collect();
    Ok(EdgeStats {
        ks_max: ks_one_sample(&rescaled_max, gumbel_cdf),
        ks_min: ks_one_sample(&rescaled_min, gumbel_cdf),
        scales,
        rescaled_max,
        rescaled_min,
    })
}
