//! Samplers of the Gibbs measure `exp(-E)`,
//! `E = Σ V(x_i) - (2P/N) Σ_{i<j} ln|x_i - x_j|`.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::{ChiSquared, Distribution, StandardNormal};

use super::config::{Configuration, EnsembleConfig, ExtremeBatch, SampleBatch, Sampler, SamplerDiagnostics};
use super::stats::{integrated_autocorrelation_time, MeasureCdf};
use crate::equilibrium::{EquilibriumMeasure, Potential};
use crate::error::{Error, Result};
use crate::linalg::{kth_eigenvalue, tridiagonal_eigenvalues};
use crate::par::{map_indexed, Parallelism};

/// Acceptance window outside of which the proposal scale is reported as mistuned.
pub const ACCEPTANCE_WINDOW: (f64, f64) = (0.1, 0.7);

/// Independent random stream `index` of the master `seed`.
pub(crate) fn stream_rng(seed: u64, index: u64) -> ChaCha8Rng {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(index);
    rng
}

/// `E(x)`; `+∞` when two positions coincide.
pub fn gibbs_energy(c: &[f64], potential: &Potential, coupling: f64, n: usize) -> f64 {
    let confinement: f64 = c.iter().map(|&x| potential.value(x)).sum();
    if coupling == 0.0 {
        return confinement;
    }
    let mut pairs = 0.0;
    for i in 0..c.len() {
        for j in i + 1..c.len() {
            let d = (c[i] - c[j]).abs();
            if d == 0.0 {
                return f64::INFINITY;
            }
            pairs += d.ln();
        }
    }
    confinement - 2.0 * coupling / n as f64 * pairs
}

/// `Σ_{j≠i} ln|y - x_j| / |x_i - x_j|`, multiplying ratios and taking one logarithm
/// whenever the running product leaves `[1e-100, 1e100]`.
fn log_ratio_sum(xs: &[f64], i: usize, y: f64) -> f64 {
    let x = xs[i];
    let mut total = 0.0;
    let mut prod = 1.0f64;
    for (j, &xj) in xs.iter().enumerate() {
        if j == i {
            continue;
        }
        prod *= ((y - xj) / (x - xj)).abs();
        if !(1e-100..=1e100).contains(&prod) {
            total += prod.ln();
            prod = 1.0;
        }
    }
    total + prod.ln()
}

fn proposal_scale(potential: &Potential, step: f64, x: f64) -> f64 {
    step / (1.0 + potential.d2(x).max(0.0)).sqrt()
}

struct ChainOutput {
    configs: Vec<Configuration>,
    accepted: u64,
    proposed: u64,
    tau: Option<f64>,
}

fn run_chain(cfg: &EnsembleConfig, chain: usize, count: usize) -> ChainOutput {
    let n = cfg.n_particles;
    let mut rng = stream_rng(cfg.seed, chain as u64);
    let v = &cfg.potential;
    let pair_weight = 2.0 * cfg.coupling / n as f64;
    // Start evenly spread inside [-1, 1]; burn-in removes the memory of this.
    let mut xs: Vec<f64> = (0..n).map(|i| 2.0 * (i as f64 + 0.5) / n as f64 - 1.0).collect();
    let (mut accepted, mut proposed) = (0u64, 0u64);
    let mut configs = Vec::with_capacity(count);
    let total_sweeps = cfg.burn_in + count * cfg.sweeps_per_sample;
    for sweep in 0..total_sweeps {
        let counting = sweep >= cfg.burn_in;
        for i in 0..n {
            let x = xs[i];
            let sx = proposal_scale(v, cfg.step_scale, x);
            let z: f64 = rng.sample(StandardNormal);
            let y = x + sx * z;
            let sy = proposal_scale(v, cfg.step_scale, y);
            // Hastings correction for the position-dependent proposal width.
            let log_q = (sx / sy).ln() - (y - x).powi(2) / (2.0 * sy * sy) + z * z / 2.0;
            let mut delta = v.value(y) - v.value(x);
            if pair_weight != 0.0 {
                delta -= pair_weight * log_ratio_sum(&xs, i, y);
            }
            let log_u: f64 = rng.gen::<f64>().ln();
            let accept = delta.is_finite() && log_u < log_q - delta;
            if accept {
                xs[i] = y;
            }
            if counting {
                proposed += 1;
                accepted += accept as u64;
            }
        }
        if counting && (sweep + 1 - cfg.burn_in) % cfg.sweeps_per_sample == 0 {
            let mut snap = xs.clone();
            snap.sort_by(|a, b| a.total_cmp(b));
            configs.push(Configuration::from_sorted(snap));
        }
    }
    let series: Vec<f64> = configs.iter().map(|c| c.positions().iter().map(|x| x * x).sum()).collect();
    ChainOutput { tau: integrated_autocorrelation_time(&series), configs, accepted, proposed }
}

/// Single-site random-walk Metropolis over `cfg.chains` independent chains.
/// Chain `c` uses stream `c` of the seed, so the batch does not depend on thread count.
pub fn sample_metropolis(cfg: &EnsembleConfig) -> Result<SampleBatch> {
    cfg.validate()?;
    let chains = cfg.chains.min(cfg.n_samples);
    let share = |c: usize| cfg.n_samples / chains + usize::from(c < cfg.n_samples % chains);
    let outputs = map_indexed(cfg.parallelism, chains, |c| run_chain(cfg, c, share(c)));
    let proposed: u64 = outputs.iter().map(|o| o.proposed).sum();
    let accepted: u64 = outputs.iter().map(|o| o.accepted).sum();
    let rate = if proposed > 0 { accepted as f64 / proposed as f64 } else { 0.0 };
    let tau = outputs.iter().filter_map(|o| o.tau).fold(None, |a: Option<f64>, t| Some(a.map_or(t, |a| a.max(t))));
    let mut warnings = Vec::new();
    if !(ACCEPTANCE_WINDOW.0..=ACCEPTANCE_WINDOW.1).contains(&rate) {
        warnings.push(format!("acceptance rate {rate:.3} outside [0.1, 0.7]; retune step_scale"));
    }
    if let Some(t) = tau {
        if t > 2.0 {
            warnings.push(format!(
                "autocorrelation time {t:.2} samples exceeds 2; raise sweeps_per_sample above {}",
                cfg.sweeps_per_sample
            ));
        }
    }
    for w in &warnings {
        log::warn!("{w}");
    }
    Ok(SampleBatch {
        configs: outputs.into_iter().flat_map(|o| o.configs).collect(),
        config: cfg.clone(),
        acceptance_rate: Some(rate),
        diagnostics: SamplerDiagnostics { autocorrelation_time: tau, warnings },
    })
}

/// Symmetric tridiagonal `β`-Hermite matrix: diagonal `N(0, 1)`, off-diagonal
/// `χ_{β(N-k)} / √2`. Its eigenvalue law is `∝ |Δ|^β exp(-Σ λ²/2)`.
pub fn tridiagonal_matrix(n: usize, beta: f64, rng: &mut ChaCha8Rng) -> (Vec<f64>, Vec<f64>) {
    let d: Vec<f64> = (0..n).map(|_| rng.sample(StandardNormal)).collect();
    let e: Vec<f64> = (1..n)
        .map(|k| {
            let chi2 = ChiSquared::new(beta * (n - k) as f64).expect("positive degrees of freedom");
            (chi2.sample(rng) / 2.0).sqrt()
        })
        .collect();
    (d, e)
}

/// Spectra of independent tridiagonal draws; sample `s` uses stream `s` of the seed.
pub fn sample_tridiagonal(cfg: &EnsembleConfig) -> Result<SampleBatch> {
    cfg.validate()?;
    if cfg.sampler != Sampler::TridiagonalGaussian {
        return Err(Error::InvalidArgument("config does not select the tridiagonal sampler".into()));
    }
    let (n, beta) = (cfg.n_particles, cfg.beta());
    let configs = map_indexed(cfg.parallelism, cfg.n_samples, |s| {
        let (d, e) = tridiagonal_matrix(n, beta, &mut stream_rng(cfg.seed, s as u64));
        Configuration::from_sorted(tridiagonal_eigenvalues(&d, &e))
    });
    Ok(SampleBatch { configs, config: cfg.clone(), acceptance_rate: None, diagnostics: SamplerDiagnostics::default() })
}

pub fn sample_tridiagonal_gaussian(n: usize, coupling: f64, n_samples: usize, seed: u64) -> Result<SampleBatch> {
    sample_tridiagonal(&EnsembleConfig::tridiagonal(coupling, n, n_samples, seed))
}

/// Extreme eigenvalues of the same draws as [`sample_tridiagonal`], by bisection.
pub fn sample_tridiagonal_extremes(
    n: usize,
    coupling: f64,
    n_samples: usize,
    seed: u64,
    mode: Parallelism,
) -> Result<ExtremeBatch> {
    let cfg = EnsembleConfig::tridiagonal(coupling, n, n_samples, seed);
    cfg.validate()?;
    let beta = cfg.beta();
    let pairs = map_indexed(mode, n_samples, |s| {
        let (d, e) = tridiagonal_matrix(n, beta, &mut stream_rng(seed, s as u64));
        (kth_eigenvalue(&d, &e, 0), kth_eigenvalue(&d, &e, n - 1))
    });
    Ok(ExtremeBatch {
        n_particles: n,
        coupling,
        minima: pairs.iter().map(|p| p.0).collect(),
        maxima: pairs.iter().map(|p| p.1).collect(),
    })
}

/// `N` independent draws from `μ` per sample, by inversion of its distribution function.
/// At `P = 0` this is exact sampling of the Gibbs measure.
pub fn sample_independent(eq: &EquilibriumMeasure, n: usize, n_samples: usize, seed: u64) -> Result<SampleBatch> {
    let mut cfg = EnsembleConfig::metropolis(eq.potential.clone(), eq.coupling, n, n_samples, seed);
    cfg.chains = 1;
    cfg.validate()?;
    let cdf = MeasureCdf::new(eq);
    let configs = map_indexed(Parallelism::default(), n_samples, |s| {
        let mut rng = stream_rng(seed, s as u64);
        let mut xs: Vec<f64> = (0..n).map(|_| cdf.quantile(rng.gen())).collect();
        xs.sort_by(|a, b| a.total_cmp(b));
        Configuration::from_sorted(xs)
    });
    Ok(SampleBatch { configs, config: cfg, acceptance_rate: None, diagnostics: SamplerDiagnostics::default() })
}

/// Extremes of `N` independent draws from `μ`: only the extreme uniforms are inverted.
pub fn sample_independent_extremes(eq: &EquilibriumMeasure, n: usize, n_samples: usize, seed: u64) -> ExtremeBatch {
    let cdf = MeasureCdf::new(eq);
    let pairs = map_indexed(Parallelism::default(), n_samples, |s| {
        let mut rng = stream_rng(seed, s as u64);
        let (mut lo, mut hi) = (1.0f64, 0.0f64);
        for _ in 0..n {
            let u: f64 = rng.gen();
            lo = lo.min(u);
            hi = hi.max(u);
        }
        (cdf.quantile(lo), cdf.quantile(hi))
    });
    ExtremeBatch {
        n_particles: n,
        coupling: eq.coupling,
        minima: pairs.iter().map(|p| p.0).collect(),
        maxima: pairs.iter().map(|p| p.1).collect(),
    }
}

/// Dispatch on `cfg.sampler`.
pub fn sample(cfg: &EnsembleConfig) -> Result<SampleBatch> {
    match cfg.sampler {
        Sampler::Metropolis => sample_metropolis(cfg),
        Sampler::TridiagonalGaussian => sample_tridiagonal(cfg),
    }
}
