//! Experiment execution: sample the observed set, mask, fit, check the
//! reconstruction, measure the L1 budget, and write every artifact.

use std::path::Path;
use std::time::{Instant, SystemTime, UNIX_EPOCH};

use anyhow::{Context, Result};

use spikenet::sampler::sample_finite_set_in_stream;
use spikenet::stream::derive_seed;
use spikenet::{
    fit, l1_distance, ApproxConfig, BudgetSplit, Network, PredictorConfig, QuadratureConfig,
    SampleSet,
};

use crate::config::ExperimentConfig;
use crate::report::{write_points_csv, ExperimentReport, PointRow, Summary, Timing, TrialRecord};
use crate::svg;

/// Relative tolerance of the exactness checks: reconstruction and mismatch
/// classification both compare at `1e-9 * max(1, |reference|)`.
pub const EXACTNESS_TOL: f64 = 1e-9;

/// Stream-index offset separating L1-measurement seeds from approximation
/// seeds in the derived-seed space.
const L1_SEED_SPACE: u64 = 1 << 32;

/// `|value - reference|` normalized by `max(1, |reference|)`.
pub fn relative_error(value: f64, reference: f64) -> f64 {
    (value - reference).abs() / reference.abs().max(1.0)
}

/// Runs every trial of `config`, writes `report.json`, `points.csv`, the
/// per-trial network wire files, and (for `d <= 2`) the trial-0 figure into
/// `out_dir`, and returns the report.
pub fn run_experiment(config: &ExperimentConfig, out_dir: &Path) -> Result<ExperimentReport> {
    config.validate()?;
    let started_unix_ms = SystemTime::now()
        .duration_since(UNIX_EPOCH)
        .map(|d| d.as_millis())
        .unwrap_or(0);
    let clock = Instant::now();

    std::fs::create_dir_all(out_dir.join("networks"))
        .with_context(|| format!("cannot create output directory {}", out_dir.display()))?;

    let field = config.field.build(config.d)?;
    let base_only = config.field.build_base_only(config.d)?;

    let mut trials: Vec<TrialRecord> = Vec::with_capacity(config.trials as usize);
    let mut rows: Vec<PointRow> = Vec::new();
    let mut first_network: Option<Network> = None;

    for t in 0..config.trials {
        let set = sample_finite_set_in_stream(&config.nu, config.d, config.seed, t)?;
        let masked = field.mask(&set)?;
        let approx_seed = derive_seed(config.seed, t);
        let l1_seed = derive_seed(config.seed, L1_SEED_SPACE + t);

        let predictor_cfg = PredictorConfig {
            epsilon: config.epsilon,
            split: BudgetSplit::default(),
            oracle: config.oracle.clone(),
            approx: ApproxConfig {
                certificate_samples: config.quadrature.certificate_samples,
                seed: approx_seed,
                max_refinements: config.max_refinements,
                max_grid_nodes: config.max_grid_nodes,
            },
        };
        let outcome = fit(&SampleSet::Finite(set.clone()), &masked, &predictor_cfg)
            .with_context(|| format!("trial {t}: fit failed"))?;
        let g = config.oracle.representative(&masked)?;

        let mut exactness_max: f64 = 0.0;
        for (i, rec) in outcome.per_point.iter().enumerate() {
            let truth = field.value_at(&rec.point)?;
            exactness_max = exactness_max.max(relative_error(rec.predicted, rec.hidden_truth));
            rows.push(PointRow {
                trial: t,
                index: i,
                point: rec.point.clone(),
                truth,
                representative: rec.hidden_truth,
                predicted: rec.predicted,
                abs_error: rec.abs_error,
                residual: outcome.residuals[i].residual,
            });
        }
        let exactness_pass = exactness_max <= EXACTNESS_TOL;

        // Failure law: predictions may disagree with the hidden truth only
        // where the oracle's representative already does.
        let mut mismatches: Vec<Vec<f64>> = Vec::new();
        let mut expected_mismatches: Vec<Vec<f64>> = Vec::new();
        for p in set.points() {
            let truth = field.value_at(p)?;
            let predicted = outcome.network.evaluate(p)?;
            if relative_error(predicted, truth) > EXACTNESS_TOL {
                mismatches.push(p.clone());
            }
            if relative_error(g.value_at(p)?, truth) > EXACTNESS_TOL {
                expected_mismatches.push(p.clone());
            }
        }
        let logs_equal = mismatches == expected_mismatches;

        let quad = QuadratureConfig {
            method: config.quadrature.method,
            samples: config.quadrature.samples,
            seed: l1_seed,
            ..QuadratureConfig::default()
        };
        let l1_estimate = l1_distance(&outcome.network, &base_only, &quad)
            .with_context(|| format!("trial {t}: L1 measurement failed"))?;
        let l1_pass = l1_estimate.upper_confidence < config.epsilon;

        let network_file = format!("networks/trial_{t:03}.json");
        std::fs::write(out_dir.join(&network_file), outcome.network.to_json())
            .with_context(|| format!("trial {t}: cannot write network file"))?;
        if t == 0 {
            first_network = Some(outcome.network.clone());
        }

        let spike_count = outcome
            .residuals
            .iter()
            .filter(|r| r.residual != 0.0)
            .count();
        trials.push(TrialRecord {
            trial: t,
            approx_seed,
            l1_seed,
            x: set.points().to_vec(),
            grid_resolution: outcome.certificate.grid_resolution,
            strategy: outcome.certificate.strategy,
            certificate: outcome.certificate.clone(),
            n_star: outcome.n_star,
            spike_count,
            exactness_max_error: exactness_max,
            exactness_pass,
            mismatches,
            expected_mismatches,
            logs_equal,
            l1_estimate,
            l1_pass,
            network_file,
        });
    }

    let summary = Summary {
        trials: config.trials,
        total_points: rows.len() as u64,
        total_spikes: trials.iter().map(|r| r.spike_count as u64).sum(),
        total_mismatches: trials.iter().map(|r| r.mismatches.len() as u64).sum(),
        exactness_all_pass: trials.iter().all(|r| r.exactness_pass),
        l1_all_pass: trials.iter().all(|r| r.l1_pass),
        logs_all_equal: trials.iter().all(|r| r.logs_equal),
        pass: trials
            .iter()
            .all(|r| r.exactness_pass && r.l1_pass && r.logs_equal),
    };

    let report = ExperimentReport {
        report_version: 1,
        config: config.clone(),
        trials,
        summary,
        timing: Timing {
            started_unix_ms,
            elapsed_ms: clock.elapsed().as_millis(),
        },
    };

    report.write(out_dir)?;
    write_points_csv(&rows, config.d, out_dir)?;
    if config.emit_figures && config.d <= 2 {
        if let (Some(record), Some(network)) = (report.trials.first(), &first_network) {
            svg::render_figure(config, &field, record, network, out_dir)?;
        }
    }
    Ok(report)
}
