//! Empirical concentration of the smoothed empirical measure around `μ` in the
//! log-energy distance, against the bound `exp(-N r² Pπ²/2 + 5P ln N + K)`.

use serde::{Deserialize, Serialize};

use super::config::{Configuration, SampleBatch};
use crate::equilibrium::EquilibriumMeasure;
use crate::error::{Error, Result};
use crate::grid_numerics::{fourier_distance_d, GridFunction};
use crate::par::{map_indexed, Parallelism};

/// Box-smoothed empirical density on the grid of `eq`: particle `x` spreads mass `1/N`
/// uniformly over the nodes of `[x, x + width]`, at least its nearest node; the
/// trapezoid mass is exactly 1.
pub fn smoothed_empirical_density(sample: &Configuration, eq: &EquilibriumMeasure, width: f64) -> Result<GridFunction> {
    let g = &eq.grid;
    let (h, n) = (g.spacing(), g.len());
    let half = g.half_width();
    let mut v = vec![0.0; n];
    let share = 1.0 / sample.len() as f64;
    for &x in sample.positions() {
        if x.abs() >= half - width - h {
            return Err(Error::Resolution(format!("particle at {x:.3} is outside the grid ±{half:.3}")));
        }
        let first = ((x + half) / h).ceil() as usize;
        let last = ((x + width + half) / h).floor() as usize;
        let (first, last) = if last < first {
            let k = g.nearest(x + 0.5 * width);
            (k, k)
        } else {
            (first, last)
        };
        let count = (last - first + 1) as f64;
        for vk in &mut v[first..=last] {
            *vk += share / (count * h);
        }
    }
    Ok(GridFunction::new(g.clone(), v))
}

/// `D(μ̃_N, μ)/(√2·π)`, the bound on the Lipschitz-½ distance.
pub fn smoothed_distance(sample: &Configuration, eq: &EquilibriumMeasure, width: f64) -> Result<f64> {
    let emp = smoothed_empirical_density(sample, eq, width)?;
    let mass = emp.integral();
    let rho = GridFunction::new(eq.grid.clone(), eq.density.iter().map(|r| r * mass / eq.mass()).collect());
    Ok(fourier_distance_d(&emp, &rho)?.lipschitz_half_bound)
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ConcentrationRow {
    pub n_particles: usize,
    pub radius: f64,
    pub exceedances: usize,
    pub samples: usize,
    pub frequency: f64,
    /// `exp(-N r² Pπ²/2 + 5P ln N + K)` with the fitted `K`.
    pub bound: f64,
    pub bound_holds: bool,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ConcentrationTable {
    pub rows: Vec<ConcentrationRow>,
    /// Smallest `K` for which the bound holds at every radius of the largest `N`.
    pub fitted_k: f64,
    /// Least-squares slope of `ln frequency` against `N r²` over rows with exceedances.
    pub slope: f64,
    pub bound_holds_everywhere: bool,
    pub smoothing_width: f64,
    /// Distances per batch, for reporting.
    pub distances: Vec<Vec<f64>>,
}

fn exponent(n: usize, r: f64, p: f64) -> f64 {
    let nf = n as f64;
    -nf * r * r * p * std::f64::consts::PI.powi(2) / 2.0 + 5.0 * p * nf.ln()
}

pub fn concentration_curve(
    batches: &[SampleBatch],
    eq: &EquilibriumMeasure,
    radii: &[f64],
    smoothing_width: f64,
) -> Result<ConcentrationTable> {
    if batches.is_empty() || radii.is_empty() {
        return Err(Error::InvalidArgument("need at least one batch and one radius".into()));
    }
    if !(smoothing_width > 0.0) {
        return Err(Error::InvalidArgument("smoothing width must be positive".into()));
    }
    let p = eq.coupling;
    if batches.iter().any(|b| b.config.potential != eq.potential || (b.config.coupling - p).abs() > 1e-12) {
        return Err(Error::InvalidArgument("all batches must share (V, P) with the measure".into()));
    }
    let mut distances = Vec::with_capacity(batches.len());
    for b in batches {
        let d = map_indexed(Parallelism::default(), b.len(), |s| smoothed_distance(&b.configs[s], eq, smoothing_width));
        distances.push(d.into_iter().collect::<Result<Vec<f64>>>()?);
    }
    let mut rows = Vec::new();
    for (b, d) in batches.iter().zip(&distances) {
        for &r in radii {
            let exceedances = d.iter().filter(|&&x| x > r).count();
            rows.push(ConcentrationRow {
                n_particles: b.n_particles(),
                radius: r,
                exceedances,
                samples: d.len(),
                frequency: exceedances as f64 / d.len() as f64,
                bound: f64::NAN,
                bound_holds: false,
            });
        }
    }
    let largest = rows.iter().map(|r| r.n_particles).max().unwrap_or(0);
    let fitted_k = rows
        .iter()
        .filter(|r| r.n_particles == largest && r.exceedances > 0)
        .map(|r| r.frequency.ln() - exponent(r.n_particles, r.radius, p))
        .fold(f64::NEG_INFINITY, f64::max);
    for row in &mut rows {
        row.bound = (exponent(row.n_particles, row.radius, p) + fitted_k).exp();
        row.bound_holds = row.frequency <= row.bound * (1.0 + 1e-12);
    }
    let pts: Vec<(f64, f64)> = rows
        .iter()
        .filter(|r| r.exceedances > 0)
        .map(|r| (r.n_particles as f64 * r.radius * r.radius, r.frequency.ln()))
        .collect();
    let slope = if pts.len() >= 2 {
        let m = pts.len() as f64;
        let (sx, sy) = pts.iter().fold((0.0, 0.0), |a, p| (a.0 + p.0, a.1 + p.1));
        let (mx, my) = (sx / m, sy / m);
        let sxy: f64 = pts.iter().map(|p| (p.0 - mx) * (p.1 - my)).sum();
        let sxx: f64 = pts.iter().map(|p| (p.0 - mx).powi(2)).sum();
        if sxx > 0.0 { sxy / sxx } else { f64::NAN }
    } else {
        f64::NAN
    };
    Ok(ConcentrationTable {
        bound_holds_everywhere: rows.iter().all(|r| r.bound_holds),
        rows,
        fitted_k,
        slope,
        smoothing_width,
        distances,
    })
}
