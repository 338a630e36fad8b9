//! Kolmogorov-Smirnov tests, autocorrelation times and distribution functions on a grid.

use serde::{Deserialize, Serialize};

use crate::equilibrium::EquilibriumMeasure;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct KsResult {
    pub statistic: f64,
    /// Asymptotic Kolmogorov p-value.
    pub p_value: f64,
    /// Sample size entering the p-value (`nm/(n+m)` for two samples).
    pub effective_size: f64,
}

/// `P(K > λ)` for the Kolmogorov distribution.
pub fn kolmogorov_survival(lambda: f64) -> f64 {
    if lambda <= 0.0 {
        return 1.0;
    }
    if lambda < 1.18 {
        // Jacobi-transformed series, fast for small λ.
        let c = std::f64::consts::PI.powi(2) / (8.0 * lambda * lambda);
        let s: f64 = (1..=8).map(|k| (-((2 * k - 1) as f64).powi(2) * c).exp()).sum();
        (1.0 - (2.0 * std::f64::consts::PI).sqrt() / lambda * s).clamp(0.0, 1.0)
    } else {
        let s: f64 = (1..=100)
            .map(|k| {
                let sign = if k % 2 == 1 { 1.0 } else { -1.0 };
                sign * (-2.0 * (k * k) as f64 * lambda * lambda).exp()
            })
            .sum();
        (2.0 * s).clamp(0.0, 1.0)
    }
}

/// p-value with Stephens' finite-size correction `λ = (√n + 0.12 + 0.11/√n) D`.
pub fn kolmogorov_p_value(d: f64, n_eff: f64) -> f64 {
    let r = n_eff.sqrt();
    kolmogorov_survival((r + 0.12 + 0.11 / r) * d)
}

fn sorted(v: &[f64]) -> Vec<f64> {
    let mut s = v.to_vec();
    s.sort_by(|a, b| a.total_cmp(b));
    s
}

/// One-sample test of `data` against the continuous distribution function `cdf`.
pub fn ks_one_sample(data: &[f64], cdf: impl Fn(f64) -> f64) -> KsResult {
    let s = sorted(data);
    let n = s.len() as f64;
    let d = s
        .iter()
        .enumerate()
        .map(|(i, &x)| {
            let f = cdf(x);
            ((i + 1) as f64 / n - f).max(f - i as f64 / n)
        })
        .fold(0.0, f64::max);
    KsResult { statistic: d, p_value: kolmogorov_p_value(d, n), effective_size: n }
}

pub fn ks_two_sample(a: &[f64], b: &[f64]) -> KsResult {
    let (sa, sb) = (sorted(a), sorted(b));
    let (n, m) = (sa.len(), sb.len());
    let (mut i, mut j, mut d) = (0, 0, 0.0f64);
    while i < n && j < m {
        let x = sa[i].min(sb[j]);
        while i < n && sa[i] <= x {
            i += 1;
        }
        while j < m && sb[j] <= x {
            j += 1;
        }
        d = d.max((i as f64 / n as f64 - j as f64 / m as f64).abs());
    }
    let ne = (n * m) as f64 / (n + m) as f64;
    KsResult { statistic: d, p_value: kolmogorov_p_value(d, ne), effective_size: ne }
}

/// Standard Gumbel distribution function `exp(-e^{-t})`.
pub fn gumbel_cdf(t: f64) -> f64 {
    (-(-t).exp()).exp()
}

/// Integrated autocorrelation time `1 + 2 Σ ρ(t)` with Sokal's self-consistent window
/// `W ≥ 5 τ(W)`. `None` for series shorter than 20 or without variance.
pub fn integrated_autocorrelation_time(series: &[f64]) -> Option<f64> {
    let n = series.len();
    if n < 20 {
        return None;
    }
    let mean = series.iter().sum::<f64>() / n as f64;
    let dev: Vec<f64> = series.iter().map(|x| x - mean).collect();
    let c0 = dev.iter().map(|d| d * d).sum::<f64>() / n as f64;
    if c0 <= 0.0 {
        return None;
    }
    let mut tau = 1.0;
    for t in 1..n / 2 {
        let ct = dev[..n - t].iter().zip(&dev[t..]).map(|(a, b)| a * b).sum::<f64>() / n as f64;
        tau += 2.0 * ct / c0;
        if t as f64 >= 5.0 * tau {
            break;
        }
    }
    Some(tau.max(1.0))
}

/// Mean, variance and their standard errors; the variance error uses the fourth moment,
/// both are inflated by the autocorrelation time `tau`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Moments {
    pub mean: f64,
    pub mean_se: f64,
    pub variance: f64,
    pub variance_se: f64,
}

pub fn moments(values: &[f64], tau: f64) -> Moments {
    let n = values.len() as f64;
    let mean = values.iter().sum::<f64>() / n;
    let m2 = values.iter().map(|v| (v - mean).powi(2)).sum::<f64>() / n;
    let m4 = values.iter().map(|v| (v - mean).powi(4)).sum::<f64>() / n;
    let variance = m2 * n / (n - 1.0).max(1.0);
    let n_eff = n / tau.max(1.0);
    Moments {
        mean,
        mean_se: (variance / n_eff).sqrt(),
        variance,
        variance_se: ((m4 - m2 * m2).max(0.0) / n_eff).sqrt(),
    }
}

/// Piecewise-linear distribution function of `μ` through the trapezoid cell masses,
/// accumulated separately from each tail so both tails keep relative accuracy.
#[derive(Debug, Clone)]
pub struct MeasureCdf {
    nodes: Vec<f64>,
    left: Vec<f64>,
    right: Vec<f64>,
}

impl MeasureCdf {
    pub fn new(eq: &EquilibriumMeasure) -> Self {
        let xs = eq.grid.nodes().to_vec();
        let h = eq.grid.spacing();
        let n = xs.len();
        let cells: Vec<f64> = (0..n - 1).map(|i| 0.5 * h * (eq.density[i] + eq.density[i + 1])).collect();
        let total: f64 = cells.iter().sum();
        let mut left = vec![0.0; n];
        for i in 0..n - 1 {
            left[i + 1] = left[i] + cells[i] / total;
        }
        let mut right = vec![0.0; n];
        for i in (0..n - 1).rev() {
            right[i] = right[i + 1] + cells[i] / total;
        }
        MeasureCdf { nodes: xs, left, right }
    }

    fn cell_of(&self, x: f64) -> Option<(usize, f64)> {
        let n = self.nodes.len();
        let h = self.nodes[1] - self.nodes[0];
        let t = (x - self.nodes[0]) / h;
        if t < 0.0 || t >= (n - 1) as f64 {
            return None;
        }
        let i = (t.floor() as usize).min(n - 2);
        Some((i, t - i as f64))
    }

    /// `μ((-∞, x])`.
    pub fn cdf(&self, x: f64) -> f64 {
        match self.cell_of(x) {
            None if x < self.nodes[0] => 0.0,
            None => 1.0,
            Some((i, s)) if self.left[i] < 0.5 => self.left[i] + s * (self.left[i + 1] - self.left[i]),
            Some((i, s)) => 1.0 - (self.right[i] + s * (self.right[i + 1] - self.right[i])),
        }
    }

    /// `μ((x, ∞))`, accurate far into the right tail.
    pub fn survival(&self, x: f64) -> f64 {
        match self.cell_of(x) {
            None if x < self.nodes[0] => 1.0,
            None => 0.0,
            Some((i, s)) => self.right[i] + s * (self.right[i + 1] - self.right[i]),
        }
    }

    /// Inverse distribution function for `u ∈ [0, 1)`.
    pub fn quantile(&self, u: f64) -> f64 {
        let n = self.nodes.len();
        if u < 0.5 {
            let k = self.left.partition_point(|&c| c <= u).clamp(1, n - 1) - 1;
            let span = self.left[k + 1] - self.left[k];
            let s = if span > 0.0 { (u - self.left[k]) / span } else { 0.5 };
            self.nodes[k] + s * (self.nodes[k + 1] - self.nodes[k])
        } else {
            let tail = 1.0 - u;
            // `right` is decreasing: first index with right <= tail.
            let k = self.right.partition_point(|&c| c > tail).clamp(1, n - 1) - 1;
            let span = self.right[k] - self.right[k + 1];
            let s = if span > 0.0 { (self.right[k] - tail) / span } else { 0.5 };
            self.nodes[k] + s * (self.nodes[k + 1] - self.nodes[k])
        }
    }
}
