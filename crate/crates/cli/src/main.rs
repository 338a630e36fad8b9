//! `loggas`: batch driver for equilibrium, operator and ensemble computations.
//! Exit codes: 0 success, 1 config error, 2 validation failure, 3 numerical failure.

// `!(x > 0.0)` is used on purpose: it also rejects NaN.
#![allow(clippy::neg_cmp_op_on_partial_ord)]

mod bundle;
mod commands;
mod config;
mod error;
mod plots;

use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Parser, Subcommand};
use loggas::Parallelism;

use crate::bundle::{config_hash, manifest_path, up_to_date, Bundle};
use crate::commands::Context;
use crate::config::{Overrides, RunConfig};
use crate::error::CliError;

#[derive(Parser)]
#[command(name = "loggas", version, about = "High-temperature log-gas toolkit")]
struct Cli {
    #[command(subcommand)]
    verb: Verb,
    /// TOML run configuration; defaults to the Gaussian potential at P = 1.
    #[arg(long, global = true)]
    config: Option<PathBuf>,
    /// Output directory (overrides `output_dir`).
    #[arg(long, global = true)]
    out: Option<PathBuf>,
    #[arg(long, global = true)]
    seed: Option<u64>,
    /// Worker threads; 1 runs everything sequentially.
    #[arg(long, global = true)]
    jobs: Option<usize>,
    /// Galerkin mode count.
    #[arg(long, global = true)]
    modes: Option<usize>,
    /// Equilibrium solver tolerance.
    #[arg(long, global = true)]
    tol: Option<f64>,
    /// Recompute even when the manifest says the outputs are current.
    #[arg(long, global = true)]
    force: bool,
}

#[derive(Subcommand, Clone, Copy)]
enum Verb {
    /// Check the potential against the standing assumptions.
    Validate,
    /// Solve for the equilibrium measure.
    Equilibrium,
    /// Diagonalise the Sturm-Liouville part of the master operator.
    Spectrum,
    /// Limiting variance of the configured test function.
    Variance,
    /// Sample the Gibbs measure and store the batches.
    Simulate,
    /// Empirical fluctuation variance and normality against the limit.
    Clt,
    /// Edge location, scale and Gumbel fit of the extreme particles.
    Edge,
    /// Exceedance frequencies of the log-energy distance.
    Concentration,
    /// Toda currents from polarised variances.
    Toda,
}

impl Verb {
    fn name(self) -> &'static str {
        match self {
            Verb::Validate => "validate",
            Verb::Equilibrium => "equilibrium",
            Verb::Spectrum => "spectrum",
            Verb::Variance => "variance",
            Verb::Simulate => "simulate",
            Verb::Clt => "clt",
            Verb::Edge => "edge",
            Verb::Concentration => "concentration",
            Verb::Toda => "toda",
        }
    }
}

fn configure_workers(jobs: Option<usize>) -> Result<Parallelism, CliError> {
    match jobs {
        Some(0) => Err(CliError::Config("--jobs must be >= 1".into())),
        Some(1) => Ok(Parallelism::Sequential),
        #[cfg(feature = "parallel")]
        Some(n) => {
            rayon::ThreadPoolBuilder::new()
                .num_threads(n)
                .build_global()
                .map_err(|e| CliError::Config(format!("worker pool: {e}")))?;
            Ok(Parallelism::Parallel)
        }
        #[cfg(not(feature = "parallel"))]
        Some(_) => {
            log::warn!("built without the parallel feature; --jobs is ignored");
            Ok(Parallelism::Sequential)
        }
        None => Ok(Parallelism::Parallel),
    }
}

fn run(cli: &Cli) -> Result<String, CliError> {
    let overrides = Overrides { seed: cli.seed, modes: cli.modes, tol: cli.tol, out: cli.out.clone() };
    let cfg = RunConfig::load(cli.config.as_deref(), &overrides)?;
    let parallelism = configure_workers(cli.jobs)?;
    let verb = cli.verb;
    // Validation is cheap and its exit code carries the verdict, so it always reruns.
    let cacheable = !matches!(verb, Verb::Validate);
    if cacheable && !cli.force && up_to_date(&cfg.output_dir, verb.name(), &config_hash(verb.name(), &cfg)) {
        return Ok(format!("up to date, skipped ({})", manifest_path(&cfg.output_dir, verb.name()).display()));
    }
    let mut bundle = Bundle::new(&cfg, verb.name())?;
    let ctx = Context { cfg, parallelism };
    let result = match verb {
        Verb::Validate => commands::validate(&ctx, &mut bundle),
        Verb::Equilibrium => commands::equilibrium(&ctx, &mut bundle),
        Verb::Spectrum => commands::spectrum(&ctx, &mut bundle),
        Verb::Variance => commands::variance(&ctx, &mut bundle),
        Verb::Simulate => commands::simulate(&ctx, &mut bundle),
        Verb::Clt => commands::clt(&ctx, &mut bundle),
        Verb::Edge => commands::edge(&ctx, &mut bundle),
        Verb::Concentration => commands::concentration(&ctx, &mut bundle),
        Verb::Toda => commands::toda(&ctx, &mut bundle),
    };
    // Failed runs leave no manifest, so they are never mistaken for cached results.
    let summary = result?;
    let manifest = bundle.finish()?;
    Ok(format!("{summary} ({})", manifest.display()))
}

fn main() -> ExitCode {
    env_logger::Builder::from_env(env_logger::Env::default().default_filter_or("warn")).init();
    let cli = Cli::parse();
    match run(&cli) {
        Ok(summary) => {
            println!("{}: {summary}", cli.verb.name());
            ExitCode::SUCCESS
        }
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(e.exit_code() as u8)
        }
    }
}
