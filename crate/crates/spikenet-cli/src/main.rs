//! `spikenet` — fit exact-interpolation ReLU networks, measure their L1
//! budgets, and verify the resulting reports.

use std::path::PathBuf;
use std::process::ExitCode;

use anyhow::{bail, Context, Result};
use clap::{Parser, Subcommand};

use spikenet::stream::derive_seed;
use spikenet::{
    approximate, build_spike, spike_l1_bound, ApproxConfig, SizeDistribution, SpikeSpec,
};
use spikenet_cli::config::ExperimentConfig;
use spikenet_cli::run::run_experiment;
use spikenet_cli::verify::verify_report;

#[derive(Parser)]
#[command(
    name = "spikenet",
    version,
    about = "Exact-interpolation ReLU networks: run seeded experiments, inspect the pieces, verify reports"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Run a configured experiment and write report, CSV, networks, figure
    Run {
        /// Experiment configuration (JSON)
        #[arg(long)]
        config: PathBuf,
        /// Output directory (defaults: config, then $SPIKENET_OUT_DIR, then ./spikenet-out)
        #[arg(long)]
        out_dir: Option<PathBuf>,
    },
    /// Re-derive a report's numbers from its stored artifacts
    Verify {
        /// Path to a report.json written by `run`
        #[arg(long)]
        report: PathBuf,
    },
    /// Compile one spike network and print its wire JSON with its L1 bound
    BuildSpike {
        /// Spike center, comma-separated coordinates in [0,1]
        #[arg(long, value_delimiter = ',', required = true)]
        center: Vec<f64>,
        /// Value the spike takes at its center
        #[arg(long)]
        residual: f64,
        /// Resolution n: the support is the L1 ball of radius 1/n
        #[arg(long)]
        resolution: u64,
        /// Write to this file instead of stdout
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Sample observed point sets from a size law and print them as JSON
    Sample {
        /// Size law: fixed, poisson, or geometric
        #[arg(long)]
        kind: String,
        /// Set size (fixed law)
        #[arg(long)]
        k: Option<u64>,
        /// Mean (poisson law)
        #[arg(long)]
        mean: Option<f64>,
        /// Success probability (geometric law)
        #[arg(long)]
        p: Option<f64>,
        /// Ambient dimension
        #[arg(long, default_value_t = 1)]
        dim: usize,
        /// Master seed
        #[arg(long, default_value_t = 0)]
        seed: u64,
        /// Number of sets (streams 0..sets)
        #[arg(long, default_value_t = 1)]
        sets: u64,
    },
    /// Run only the base-approximation stage of a config and print the certificate
    Approx {
        /// Experiment configuration (JSON)
        #[arg(long)]
        config: PathBuf,
    },
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match dispatch(cli.command) {
        Ok(pass) => {
            if pass {
                ExitCode::SUCCESS
            } else {
                ExitCode::from(2)
            }
        }
        Err(err) => {
            eprintln!("error: {err:#}");
            ExitCode::FAILURE
        }
    }
}

/// Runs one subcommand; `Ok(false)` means "ran fine, assertions failed".
fn dispatch(command: Command) -> Result<bool> {
    match command {
        Command::Run { config, out_dir } => {
            let config = ExperimentConfig::load(&config)?;
            let dir = config.resolve_output_dir(out_dir);
            let report = run_experiment(&config, &dir)?;
            for rec in &report.trials {
                println!(
                    "trial {:>3}: |X| = {:>3}  grid m = {:<4}  spikes = {:<3}  exactness = {:>9.2e} ({})  L1 = {:.5} < {} ({})  logs {}",
                    rec.trial,
                    rec.x.len(),
                    rec.grid_resolution.map_or_else(|| "-".into(), |m| m.to_string()),
                    rec.spike_count,
                    rec.exactness_max_error,
                    verdict(rec.exactness_pass),
                    rec.l1_estimate.value,
                    config.epsilon,
                    verdict(rec.l1_pass),
                    verdict(rec.logs_equal),
                );
            }
            println!(
                "summary: {} trials, {} points, {} spikes, {} mismatches -> {}",
                report.summary.trials,
                report.summary.total_points,
                report.summary.total_spikes,
                report.summary.total_mismatches,
                verdict(report.summary.pass)
            );
            println!("artifacts in {}", dir.display());
            Ok(report.summary.pass)
        }
        Command::Verify { report } => {
            let outcome = verify_report(&report)?;
            for failure in &outcome.failures {
                eprintln!("verify: {failure}");
            }
            println!(
                "verified {} trials: {}",
                outcome.trials_checked,
                verdict(outcome.passed())
            );
            Ok(outcome.passed())
        }
        Command::BuildSpike {
            center,
            residual,
            resolution,
            out,
        } => {
            let spec = SpikeSpec {
                center,
                residual,
                resolution,
            };
            let network = build_spike(&spec)?;
            let bound = spike_l1_bound(&spec);
            let payload = serde_json::json!({
                "spike": spec,
                "l1_bound": bound,
                "widths": network.widths(),
                "network": network,
            });
            let text = format!("{}\n", serde_json::to_string_pretty(&payload)?);
            match out {
                Some(path) => std::fs::write(&path, text)
                    .with_context(|| format!("cannot write {}", path.display()))?,
                None => print!("{text}"),
            }
            Ok(true)
        }
        Command::Sample {
            kind,
            k,
            mean,
            p,
            dim,
            seed,
            sets,
        } => {
            let dist = match kind.as_str() {
                "fixed" => SizeDistribution::Fixed {
                    k: k.context("--k is required for the fixed law")?,
                },
                "poisson" => SizeDistribution::Poisson {
                    mean: mean.context("--mean is required for the poisson law")?,
                },
                "geometric" => SizeDistribution::Geometric {
                    p: p.context("--p is required for the geometric law")?,
                },
                other => bail!("unknown size law {other:?}: expected fixed, poisson, or geometric"),
            };
            let mut drawn = Vec::with_capacity(sets as usize);
            for stream in 0..sets {
                let set =
                    spikenet::sampler::sample_finite_set_in_stream(&dist, dim, seed, stream)?;
                drawn.push(serde_json::json!({
                    "stream": stream,
                    "points": set.points(),
                }));
            }
            println!("{}", serde_json::to_string_pretty(&drawn)?);
            Ok(true)
        }
        Command::Approx { config } => {
            let config = ExperimentConfig::load(&config)?;
            let field = config.field.build_base_only(config.d)?;
            // Mirror trial 0 of a run: the base stage gets the base share of
            // the budget and the trial-0 derived seed.
            let budget = spikenet::BudgetSplit::default().base * config.epsilon;
            let approx_cfg = ApproxConfig {
                certificate_samples: config.quadrature.certificate_samples,
                seed: derive_seed(config.seed, 0),
                max_refinements: config.max_refinements,
                max_grid_nodes: config.max_grid_nodes,
            };
            let (network, certificate) = approximate(&field, budget, &approx_cfg)?;
            let payload = serde_json::json!({
                "budget": budget,
                "certificate": certificate,
                "widths": network.widths(),
                "network": network,
            });
            println!("{}", serde_json::to_string_pretty(&payload)?);
            Ok(true)
        }
    }
}

fn verdict(pass: bool) -> &'static str {
    if pass {
        "ok"
    } else {
        "FAIL"
    }
}
