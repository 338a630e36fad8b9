//! Limiting variance of linear statistics: the quadratic form `q`, its evaluation on
//! `Ξ^{-1}` of a centred test function, the difference-quotient identity used to prove
//! positivity, and the polarised currents of the Toda chain.

use serde::{Deserialize, Serialize};

use super::operators::quadrature_range;
use super::spectral::{assemble_operator, diagonalize_a, invert_l_spectral_unchecked, OperatorAssembly, SpectralOptions};
use crate::equilibrium::EquilibriumMeasure;
use crate::error::{Error, Result};
use crate::grid_numerics::{d1, d2, hilbert_slice};
use crate::par::{map_indexed, Parallelism};
use crate::test_functions::TestFunction;

/// Relative change of `σ²` under mode doubling that counts as converged.
pub const MODE_CONVERGENCE: f64 = 1e-5;

/// `Σ_i Σ_j μ_i μ_j ((g_i - g_j)/(x_i - x_j))²` with the diagonal `g'(x_i)²`.
fn difference_quotient_energy(eq: &EquilibriumMeasure, g: &[f64], g1: &[f64], mode: Parallelism) -> f64 {
    let xs = eq.grid.nodes();
    let w = eq.mu_weights();
    let (lo, hi) = quadrature_range(eq);
    let rows = map_indexed(mode, hi - lo + 1, |t| {
        let i = lo + t;
        let mut acc = w[i] * g1[i] * g1[i];
        for j in lo..=hi {
            if j != i {
                let dq = (g[i] - g[j]) / (xs[i] - xs[j]);
                acc += w[j] * dq * dq;
            }
        }
        w[i] * acc
    });
    rows.iter().sum()
}

/// `q(φ) = ∫(φ'² + V''φ²) dμ + P ∬ ((φ(x) - φ(y))/(x - y))² dμ dμ`.
pub fn forward_variance_q(eq: &EquilibriumMeasure, phi: &[f64]) -> f64 {
    forward_variance_q_with(eq, phi, Parallelism::default())
}

pub fn forward_variance_q_with(eq: &EquilibriumMeasure, phi: &[f64], mode: Parallelism) -> f64 {
    let phi1 = d1(eq.grid.spacing(), phi);
    let xs = eq.grid.nodes();
    let local: Vec<f64> = (0..phi.len())
        .map(|i| phi1[i] * phi1[i] + eq.potential.d2(xs[i]) * phi[i] * phi[i])
        .collect();
    let mut q = eq.mu_integral(&local);
    if eq.coupling != 0.0 {
        q += eq.coupling * difference_quotient_energy(eq, phi, &phi1, mode);
    }
    q
}

/// Sides of `∬((φ'(x) - φ'(y))/(x - y))² dμdμ = 2∫(H[ρ]'φ'² - H[φ'ρ]'φ') dμ`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct IdentityCheck {
    pub double_integral: f64,
    pub single_integral: f64,
    /// `|lhs - rhs| / max(|lhs|, |rhs|)`, 0 when both vanish.
    pub discrepancy: f64,
}

pub fn variance_identity_check(eq: &EquilibriumMeasure, phi: &[f64]) -> IdentityCheck {
    let h = eq.grid.spacing();
    let g = d1(h, phi);
    let g1 = d2(h, phi);
    let lhs = difference_quotient_energy(eq, &g, &g1, Parallelism::default());
    let flux: Vec<f64> = g.iter().zip(&eq.density).map(|(a, r)| a * r).collect();
    let hflux1 = hilbert_slice(&eq.grid, &d1(h, &flux));
    let integrand: Vec<f64> = (0..phi.len())
        .map(|i| eq.hilbert_d1[i] * g[i] * g[i] - hflux1[i] * g[i])
        .collect();
    let rhs = 2.0 * eq.mu_integral(&integrand);
    let scale = lhs.abs().max(rhs.abs());
    IdentityCheck {
        double_integral: lhs,
        single_integral: rhs,
        discrepancy: if scale > 0.0 { (lhs - rhs).abs() / scale } else { 0.0 },
    }
}

/// Limiting variance of `f` and its diagnostics.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct VarianceResult {
    pub sigma2: f64,
    /// `-∫ f' ψ dμ`, the compact form with the sign that makes it nonnegative.
    pub compact_form: f64,
    /// `ψ = (L^{-1} f̃)'`, solving `Ξ[ψ] = f̃`.
    #[serde(skip)]
    pub psi: Vec<f64>,
    pub modes: usize,
    /// `(modes, σ²)` along the nested truncations.
    pub history: Vec<(usize, f64)>,
    /// Relative change between the last two truncations.
    pub relative_change: f64,
    pub converged: bool,
}

fn check_test_function(eq: &EquilibriumMeasure, f: &[f64]) -> Result<()> {
    let h = eq.grid.spacing();
    let (lo, hi) = (eq.support.0, eq.support.1);
    let f1 = d1(h, f);
    let f2 = d2(h, f);
    let ok = (lo..=hi).all(|i| f[i].is_finite() && f1[i].is_finite() && f2[i].is_finite());
    if f.len() != eq.len() || !ok {
        return Err(Error::InvalidArgument("test function must be C² with finite values on the support".into()));
    }
    Ok(())
}

/// `σ²(f) = q(ψ)` with nested truncations `M/4, M/2, M` of the assembly.
pub fn limiting_variance(asm: &OperatorAssembly, f: &[f64]) -> Result<VarianceResult> {
    let eq = asm.measure();
    check_test_function(eq, f)?;
    let m = asm.n_modes();
    let peak = f.iter().fold(0.0f64, |a, v| a.max(v.abs()));
    if super::operators::mu_norm(eq, &eq.center(f)) <= 1e-13 * peak {
        // μ-a.e. constant: the statistic does not fluctuate.
        return Ok(VarianceResult {
            sigma2: 0.0,
            compact_form: 0.0,
            psi: vec![0.0; f.len()],
            modes: m,
            history: Vec::new(),
            relative_change: 0.0,
            converged: true,
        });
    }
    let mut sizes: Vec<usize> = [m / 4, m / 2, m].into_iter().filter(|&k| k >= 1).collect();
    sizes.dedup();
    let h = eq.grid.spacing();
    let f1 = d1(h, &eq.center(f));
    let mut history = Vec::new();
    let mut last = None;
    for &k in &sizes {
        let sol = invert_l_spectral_unchecked(asm, f, Some(k))?;
        let psi = d1(h, &sol.u);
        let sigma2 = forward_variance_q(eq, &psi);
        history.push((k, sigma2));
        last = Some(psi);
    }
    let psi = last.expect("at least one truncation");
    let sigma2 = history.last().unwrap().1;
    let relative_change = if history.len() >= 2 {
        let prev = history[history.len() - 2].1;
        (sigma2 - prev).abs() / sigma2.abs().max(1e-300)
    } else {
        f64::INFINITY
    };
    let prod: Vec<f64> = f1.iter().zip(&psi).map(|(a, b)| a * b).collect();
    let compact_form = -eq.mu_integral(&prod);
    Ok(VarianceResult {
        sigma2,
        compact_form,
        psi,
        modes: m,
        history,
        relative_change,
        converged: relative_change <= MODE_CONVERGENCE,
    })
}

/// Doubles the mode count from `opts.n_modes` until `σ²` settles or the grid's
/// resolution guard (`n/8` modes) is reached.
pub fn limiting_variance_auto(
    eq: &EquilibriumMeasure,
    f: &[f64],
    opts: &SpectralOptions,
) -> Result<(VarianceResult, OperatorAssembly)> {
    let mut o = *opts;
    loop {
        let asm = assemble_operator(diagonalize_a(eq, &o)?);
        let res = limiting_variance(&asm, f)?;
        if res.converged || 2 * o.n_modes > eq.len() / 8 {
            return Ok((res, asm));
        }
        o.n_modes *= 2;
    }
}

/// `J^{[n]} = (P/2)(σ²(h₁ + h_n) - σ²(h₁) - σ²(h_n))` with `h_k = x^k` tapered at `cutoff`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct TodaCurrent {
    pub order: u32,
    pub cutoff: f64,
    pub value: f64,
    /// Same current with the taper moved to `1.25·cutoff`.
    pub value_wider: f64,
    pub relative_sensitivity: f64,
}

pub fn toda_current(asm: &OperatorAssembly, order: u32, cutoff: f64) -> Result<TodaCurrent> {
    let eq = asm.measure();
    let half = eq.grid.half_width();
    if order == 0 || !(cutoff > 0.0) || 1.25 * cutoff > half - 1.0 {
        return Err(Error::InvalidArgument(format!(
            "need order >= 1 and 1.25·cutoff <= {:.3} (grid half width minus 1), got order {order}, cutoff {cutoff}",
            half - 1.0
        )));
    }
    let current = |c: f64| -> Result<f64> {
        if eq.coupling == 0.0 {
            return Ok(0.0);
        }
        let h1 = TestFunction::TruncatedMonomial { power: 1, cutoff: c }.on_grid(&eq.grid);
        let hn = TestFunction::TruncatedMonomial { power: order, cutoff: c }.on_grid(&eq.grid);
        let sum = h1.add(&hn);
        let s_sum = limiting_variance(asm, sum.values())?.sigma2;
        let s1 = limiting_variance(asm, h1.values())?.sigma2;
        let sn = limiting_variance(asm, hn.values())?.sigma2;
        Ok(0.5 * eq.coupling * (s_sum - s1 - sn))
    };
    let value = current(cutoff)?;
    let value_wider = current(1.25 * cutoff)?;
    let scale = value.abs().max(value_wider.abs());
    Ok(TodaCurrent {
        order,
        cutoff,
        value,
        value_wider,
        relative_sensitivity: if scale > 0.0 { (value - value_wider).abs() / scale } else { 0.0 },
    })
}

/// `max |u'(x) V'(x)|` over the outer tenth of the effective support on each side, a
/// discrete echo of `u' = O(1/V')`.
pub fn regularity_spot_check(eq: &EquilibriumMeasure, u: &[f64]) -> f64 {
    let du = d1(eq.grid.spacing(), u);
    let (lo, hi) = eq.support;
    let band = ((hi - lo) / 10).max(1);
    let xs = eq.grid.nodes();
    (lo..lo + band)
        .chain(hi + 1 - band..=hi)
        .map(|i| (du[i] * eq.potential.d1(xs[i])).abs())
        .fold(0.0, f64::max)
}
