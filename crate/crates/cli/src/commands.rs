//! One function per verb. Each writes its outputs through a [`Bundle`] and returns a
//! one-line human summary.

use loggas::ensemble_sim::{
    clt_test, concentration_curve, gumbel_test, sample, sample_tridiagonal_extremes, write_concentration_csv,
    write_edge_csv, write_fluctuation_csv, batch_summary_json, write_batch, EnsembleConfig, ExtremeBatch, Sampler,
};
use loggas::equilibrium::{
    gaussian_closed_form_density, measure_to_json, solve_equilibrium, tail_half_width, validate_potential,
    EquilibriumMeasure, Potential,
};
use loggas::grid_numerics::{build_grid, Grid};
use loggas::master_operator::{
    assemble_operator, forward_variance_q, limiting_variance, limiting_variance_auto, solve_for_operator,
    toda_current, variance_identity_check, OperatorAssembly, SpectralOptions,
};
use loggas::Parallelism;
use serde::Serialize;
use serde_json::json;

use crate::bundle::{Bundle, SCHEMA_VERSION};
use crate::config::RunConfig;
use crate::error::CliError;
use crate::plots;

pub struct Context {
    pub cfg: RunConfig,
    pub parallelism: Parallelism,
}

const DEFAULT_NODES: usize = 2048;

fn grid_for(cfg: &RunConfig) -> Result<std::sync::Arc<Grid>, CliError> {
    let half = cfg.grid.half_width.unwrap_or_else(|| tail_half_width(&cfg.potential, cfg.pressure));
    Ok(build_grid(half, cfg.grid.n_points.unwrap_or(DEFAULT_NODES))?)
}

fn solve_measure(cfg: &RunConfig) -> Result<EquilibriumMeasure, CliError> {
    Ok(solve_equilibrium(&cfg.potential, cfg.pressure, &grid_for(cfg)?, &cfg.equilibrium_options())?)
}

/// Measure on the automatically sized operator grid, with the assembled Galerkin system.
fn operator_fixture(ctx: &Context) -> Result<(EquilibriumMeasure, OperatorAssembly, SpectralOptions), CliError> {
    let cfg = &ctx.cfg;
    let opts = SpectralOptions { n_modes: cfg.spectral.modes, parallelism: ctx.parallelism, ..SpectralOptions::default() };
    let (eq, basis) = solve_for_operator(&cfg.potential, cfg.pressure, &opts, &cfg.equilibrium_options())?;
    Ok((eq, assemble_operator(basis), opts))
}

fn grid_json(g: &Grid) -> serde_json::Value {
    json!({ "half_width": g.half_width(), "n_points": g.len(), "spacing": g.spacing() })
}

fn header(kind: &str, cfg: &RunConfig) -> serde_json::Value {
    json!({ "schema_version": SCHEMA_VERSION, "kind": kind, "potential": cfg.potential, "pressure": cfg.pressure })
}

fn merge(mut a: serde_json::Value, b: serde_json::Value) -> serde_json::Value {
    if let (Some(a), serde_json::Value::Object(b)) = (a.as_object_mut(), b) {
        a.extend(b);
    }
    a
}

fn ensemble_config(ctx: &Context, n: usize, samples: usize, seed: u64) -> EnsembleConfig {
    let (cfg, e) = (&ctx.cfg, &ctx.cfg.ensemble);
    let mut c = match cfg.sampler() {
        Sampler::Metropolis => EnsembleConfig::metropolis(cfg.potential.clone(), cfg.pressure, n, samples, seed),
        Sampler::TridiagonalGaussian => EnsembleConfig::tridiagonal(cfg.pressure, n, samples, seed),
    };
    c.sweeps_per_sample = e.sweeps_per_sample.unwrap_or(c.sweeps_per_sample);
    c.burn_in = e.burn_in.unwrap_or(c.burn_in);
    c.step_scale = e.step_scale.unwrap_or(c.step_scale);
    c.chains = e.chains.unwrap_or(c.chains);
    c.parallelism = ctx.parallelism;
    c
}

/// Size `k` of a sweep uses seed `seed + k`.
fn seed_for(ctx: &Context, k: usize) -> u64 {
    ctx.cfg.ensemble.seed.wrapping_add(k as u64)
}

pub fn validate(ctx: &Context, bundle: &mut Bundle) -> Result<String, CliError> {
    let cfg = &ctx.cfg;
    let report = validate_potential(&cfg.potential, cfg.pressure, &*grid_for(cfg)?);
    let mut table = String::new();
    for c in &report.checks {
        let status = if c.passed { "pass" } else if c.hard { "FAIL" } else { "warn" };
        table.push_str(&format!("{status:<5} {:<28} {}\n", c.name, c.detail));
    }
    print!("{table}");
    let hard: Vec<String> = report.hard_failures().iter().map(|c| c.name.clone()).collect();
    let doc = merge(
        header("validation_report", cfg),
        json!({ "passed": report.passed(), "hard_failures": hard, "report": report }),
    );
    bundle.write_json("validation.json", &doc)?;
    if !hard.is_empty() {
        return Err(CliError::Validation(format!("hard assumption failures: {}", hard.join(", "))));
    }
    Ok(format!("{} at P = {}: {}", cfg.potential.name(), cfg.pressure, if report.passed() { "all checks pass" } else { "passes with warnings" }))
}

#[derive(Serialize)]
struct DensityRow {
    x: f64,
    rho: f64,
    #[serde(rename = "U")]
    u: f64,
    #[serde(rename = "H_rho")]
    h_rho: f64,
    rho_prime: f64,
}

pub fn equilibrium(ctx: &Context, bundle: &mut Bundle) -> Result<String, CliError> {
    let cfg = &ctx.cfg;
    let eq = solve_measure(cfg).inspect_err(|e| {
        if let CliError::Library(loggas::Error::NonConvergence { iterations, residual, .. }) = e {
            eprintln!("residual trace: {iterations} iterations, final sup-change {residual:.3e}");
        }
    })?;
    bundle.write("measure.json", measure_to_json(&eq).as_bytes())?;
    let xs = eq.grid.nodes();
    bundle.write_csv(
        "density.csv",
        (0..eq.len()).map(|i| DensityRow {
            x: xs[i],
            rho: eq.density[i],
            u: eq.log_potential[i],
            h_rho: eq.hilbert[i],
            rho_prime: eq.density_d1[i],
        }),
    )?;
    let mut closed_form_error = None;
    if cfg.potential == Potential::Gaussian {
        #[derive(Serialize)]
        struct Row {
            x: f64,
            rho_closed_form: f64,
        }
        let idx: Vec<usize> = (eq.support.0..=eq.support.1).collect();
        let reference: Vec<f64> = idx.iter().map(|&i| gaussian_closed_form_density(cfg.pressure, xs[i])).collect();
        closed_form_error = Some(
            idx.iter()
                .zip(&reference)
                .filter(|(&i, _)| xs[i].abs() <= 4.0)
                .map(|(&i, &r)| (eq.density[i] / r - 1.0).abs())
                .fold(0.0, f64::max),
        );
        bundle.write_csv("closed_form.csv", idx.iter().zip(&reference).map(|(&i, &r)| Row { x: xs[i], rho_closed_form: r }))?;
    }
    let report = merge(
        header("equilibrium_report", cfg),
        json!({
            "grid": grid_json(&eq.grid),
            "lambda": eq.lambda,
            "residual": eq.report.residual,
            "iterations": eq.report.iterations,
            "restarts": eq.report.restarts,
            "history": eq.report.history,
            "mass": eq.mass(),
            "second_moment": eq.moment(2),
            "exact_gibbs_regime": cfg.pressure == 0.0,
            "closed_form_max_relative_error": closed_form_error,
        }),
    );
    bundle.write_json("equilibrium_report.json", &report)?;
    bundle.write("plot_equilibrium.py", plots::EQUILIBRIUM.as_bytes())?;
    let regime = if cfg.pressure == 0.0 { ", exact Gibbs regime" } else { "" };
    Ok(format!("λ = {:.10}, residual {:.2e} after {} iterations{regime}", eq.lambda, eq.report.residual, eq.report.iterations))
}

pub fn spectrum(ctx: &Context, bundle: &mut Bundle) -> Result<String, CliError> {
    let (eq, asm, _) = operator_fixture(ctx)?;
    let b = &asm.basis;
    #[derive(Serialize)]
    struct Row {
        n: usize,
        eigenvalue: f64,
        residual: f64,
    }
    bundle.write_csv(
        "spectrum.csv",
        b.eigenvalues.iter().zip(&b.residuals).enumerate().map(|(k, (&e, &r))| Row { n: k + 1, eigenvalue: e, residual: r }),
    )?;
    let doc = merge(
        header("spectrum", &ctx.cfg),
        json!({
            "grid": grid_json(&eq.grid),
            "n_modes": b.n_modes(),
            "eigenvalues": b.eigenvalues,
            "residuals": b.residuals,
            "ground_eigenvalue": b.ground_eigenvalue,
            "schrodinger_potential_minimum": b.potential_minimum,
            "coercivity_margin": asm.coercivity_margin,
            "symmetry_defect": asm.symmetry_defect,
        }),
    );
    bundle.write_json("spectrum.json", &doc)?;
    Ok(format!("{} modes, λ_1 = {:.6}, λ_max = {:.3}", b.n_modes(), b.eigenvalues[0], b.eigenvalues[b.n_modes() - 1]))
}

pub fn variance(ctx: &Context, bundle: &mut Bundle) -> Result<String, CliError> {
    let (eq, asm, opts) = operator_fixture(ctx)?;
    let tf = ctx.cfg.test_function.to_test_function();
    let f = tf.on_grid(&eq.grid);
    let mut res = limiting_variance(&asm, f.values())?;
    if !res.converged {
        log::info!("mode count {} not converged, doubling", opts.n_modes);
        let doubled = SpectralOptions { n_modes: 2 * opts.n_modes, ..opts };
        res = limiting_variance_auto(&eq, f.values(), &doubled)?.0;
    }
    let identity = variance_identity_check(&eq, f.values());
    let q = forward_variance_q(&eq, f.values());
    let doc = merge(
        header("variance", &ctx.cfg),
        json!({
            "test_function": tf,
            "sigma2": res.sigma2,
            "compact_form": res.compact_form,
            "q_forward": q,
            "identity_residuals": identity,
            "mode_convergence": {
                "modes": res.modes,
                "history": res.history,
                "final_relative_change": res.relative_change,
                "converged": res.converged,
            },
        }),
    );
    bundle.write_json("variance.json", &doc)?;
    if !res.converged {
        return Err(loggas::Error::NonConvergence {
            what: "limiting variance in the mode count".into(),
            iterations: res.modes,
            residual: res.relative_change,
        }
        .into());
    }
    Ok(format!("σ²({}) = {:.10} with {} modes, q_forward = {:.10}", tf.label(), res.sigma2, res.modes, q))
}

pub fn simulate(ctx: &Context, bundle: &mut Bundle) -> Result<String, CliError> {
    let e = &ctx.cfg.ensemble;
    let mut summary = Vec::new();
    for (k, &n) in e.sizes.iter().enumerate() {
        let batch = sample(&ensemble_config(ctx, n, e.samples, seed_for(ctx, k)))?;
        for w in &batch.diagnostics.warnings {
            log::warn!("N = {n}: {w}");
        }
        let name = format!("batch_N{n}.bin");
        write_batch(&batch, &bundle.path(&name))?;
        bundle.record(&name)?;
        bundle.write(&format!("batch_N{n}.json"), batch_summary_json(&batch).as_bytes())?;
        summary.push(format!("N = {n}: {} samples", batch.len()));
    }
    Ok(summary.join("; "))
}

#[derive(Serialize)]
struct CltRow {
    n_particles: usize,
    samples: usize,
    effective_samples: f64,
    mean: f64,
    mean_se: f64,
    empirical_var: f64,
    empirical_var_se: f64,
    target_sigma2: f64,
    ks_pvalue: f64,
    variance_consistent: bool,
}

pub fn clt(ctx: &Context, bundle: &mut Bundle) -> Result<String, CliError> {
    let (eq, asm, _) = operator_fixture(ctx)?;
    let tf = ctx.cfg.test_function.to_test_function();
    let sigma2 = limiting_variance(&asm, tf.on_grid(&eq.grid).values())?.sigma2;
    let e = &ctx.cfg.ensemble;
    let mut rows = Vec::new();
    for (k, &n) in e.sizes.iter().enumerate() {
        let batch = sample(&ensemble_config(ctx, n, e.samples, seed_for(ctx, k)))?;
        let st = clt_test(&batch, &tf, &eq, sigma2)?;
        let name = format!("fluctuation_N{n}.csv");
        write_fluctuation_csv(&st, &bundle.path(&name))?;
        bundle.record(&name)?;
        rows.push(CltRow {
            n_particles: n,
            samples: batch.len(),
            effective_samples: st.effective_samples,
            mean: st.mean,
            mean_se: st.mean_se,
            empirical_var: st.variance,
            empirical_var_se: st.variance_se,
            target_sigma2: sigma2,
            ks_pvalue: st.ks.p_value,
            variance_consistent: st.variance_consistent,
        });
    }
    let doc = merge(header("clt", &ctx.cfg), json!({ "test_function": tf, "target_sigma2": sigma2, "runs": rows }));
    bundle.write_json("clt.json", &doc)?;
    let last = rows.last().expect("at least one size");
    let line = format!(
        "N = {}: Var {:.5} ± {:.5} vs σ² {:.5}, KS p = {:.3}",
        last.n_particles, last.empirical_var, last.empirical_var_se, sigma2, last.ks_pvalue
    );
    bundle.write_csv("clt.csv", rows)?;
    bundle.write("plot_clt.py", plots::CLT.as_bytes())?;
    Ok(line)
}

#[derive(Serialize)]
struct EdgeRow {
    n_particles: usize,
    samples: usize,
    e_plus: f64,
    alpha_plus: f64,
    e_minus: f64,
    alpha_minus: f64,
    ks_gumbel_max: f64,
    ks_pvalue_max: f64,
    ks_gumbel_min: f64,
    ks_pvalue_min: f64,
}

pub fn edge(ctx: &Context, bundle: &mut Bundle) -> Result<String, CliError> {
    let cfg = &ctx.cfg;
    let eq = solve_measure(cfg)?;
    let mut rows = Vec::new();
    for (k, &n) in cfg.edge.sizes.iter().enumerate() {
        let seed = seed_for(ctx, k);
        let extremes = match cfg.sampler() {
            Sampler::TridiagonalGaussian => {
                sample_tridiagonal_extremes(n, cfg.pressure, cfg.edge.samples, seed, ctx.parallelism)?
            }
            Sampler::Metropolis => ExtremeBatch::from(&sample(&ensemble_config(ctx, n, cfg.edge.samples, seed))?),
        };
        let st = gumbel_test(&extremes, &eq)?;
        let name = format!("edge_rescaled_N{n}.csv");
        write_edge_csv(&st, &bundle.path(&name))?;
        bundle.record(&name)?;
        rows.push(EdgeRow {
            n_particles: n,
            samples: extremes.len(),
            e_plus: st.scales.e_plus,
            alpha_plus: st.scales.alpha_plus,
            e_minus: st.scales.e_minus,
            alpha_minus: st.scales.alpha_minus,
            ks_gumbel_max: st.ks_max.statistic,
            ks_pvalue_max: st.ks_max.p_value,
            ks_gumbel_min: st.ks_min.statistic,
            ks_pvalue_min: st.ks_min.p_value,
        });
    }
    bundle.write_json("edge.json", &merge(header("edge", cfg), json!({ "runs": rows })))?;
    let line = rows.iter().map(|r| format!("N = {}: KS {:.4}", r.n_particles, r.ks_gumbel_max)).collect::<Vec<_>>().join(", ");
    bundle.write_csv("edge.csv", rows)?;
    bundle.write("plot_edge.py", plots::EDGE.as_bytes())?;
    Ok(line)
}

pub fn concentration(ctx: &Context, bundle: &mut Bundle) -> Result<String, CliError> {
    let cfg = &ctx.cfg;
    let eq = solve_measure(cfg)?;
    let e = &cfg.ensemble;
    let batches = e
        .sizes
        .iter()
        .enumerate()
        .map(|(k, &n)| sample(&ensemble_config(ctx, n, e.samples, seed_for(ctx, k))))
        .collect::<loggas::Result<Vec<_>>>()?;
    let width = cfg.concentration.smoothing_width.unwrap_or(eq.grid.spacing());
    let table = concentration_curve(&batches, &eq, &cfg.concentration.radii, width)?;
    write_concentration_csv(&table, &bundle.path("concentration.csv"))?;
    bundle.record("concentration.csv")?;
    let medians: Vec<f64> = table
        .distances
        .iter()
        .map(|d| {
            let mut d = d.clone();
            d.sort_by(f64::total_cmp);
            d[d.len() / 2]
        })
        .collect();
    let doc = merge(
        header("concentration", cfg),
        json!({
            "sizes": e.sizes,
            "median_distance": medians,
            "slope": table.slope,
            "fitted_k": table.fitted_k,
            "bound_holds_everywhere": table.bound_holds_everywhere,
            "smoothing_width": width,
        }),
    );
    bundle.write_json("concentration.json", &doc)?;
    bundle.write("plot_concentration.py", plots::CONCENTRATION.as_bytes())?;
    Ok(format!(
        "slope {:.3}, fitted K {:.3}, bound {} at every (N, r)",
        table.slope,
        table.fitted_k,
        if table.bound_holds_everywhere { "holds" } else { "does not hold" }
    ))
}

pub fn toda(ctx: &Context, bundle: &mut Bundle) -> Result<String, CliError> {
    let (_, asm, _) = operator_fixture(ctx)?;
    let currents = ctx
        .cfg
        .toda
        .orders
        .iter()
        .map(|&k| toda_current(&asm, k, ctx.cfg.toda.cutoff))
        .collect::<loggas::Result<Vec<_>>>()?;
    bundle.write_json("toda.json", &merge(header("toda_currents", &ctx.cfg), json!({ "currents": currents })))?;
    Ok(currents.iter().map(|c| format!("J[{}] = {:.6e}", c.order, c.value)).collect::<Vec<_>>().join(", "))
}
