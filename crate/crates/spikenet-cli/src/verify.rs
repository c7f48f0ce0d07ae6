//! Independent re-derivation of a report's claims from its stored artifacts.
//!
//! For every trial, verification (a) refits from the recorded seeds and
//! demands the stored network wire file byte-for-byte, (b) re-evaluates the
//! stored network at the observed points and recomputes the exactness and
//! mismatch records bitwise, and (c) reruns the L1 measurement with the
//! recorded seed and demands the recorded estimate bitwise. Any divergence
//! is reported, never papered over.

use std::path::Path;

use anyhow::{Context, Result};

use spikenet::{
    fit, l1_distance, ApproxConfig, BudgetSplit, FiniteSet, Network, PredictorConfig,
    QuadratureConfig, SampleSet,
};

use crate::report::{ExperimentReport, TrialRecord};
use crate::run::{relative_error, EXACTNESS_TOL};

/// What verification found.
#[derive(Debug, Clone, Default)]
pub struct VerifyOutcome {
    pub trials_checked: u64,
    pub failures: Vec<String>,
}

impl VerifyOutcome {
    pub fn passed(&self) -> bool {
        self.failures.is_empty()
    }
}

/// Verifies `report.json` at `report_path` against the artifacts referenced
/// from it (network files are resolved relative to the report's directory).
pub fn verify_report(report_path: &Path) -> Result<VerifyOutcome> {
    let report = ExperimentReport::load(report_path)?;
    report.config.validate()?;
    let dir = report_path.parent().unwrap_or_else(|| Path::new("."));

    let mut outcome = VerifyOutcome::default();
    if report.trials.len() as u64 != report.config.trials {
        outcome.failures.push(format!(
            "report holds {} trials but the config ran {}",
            report.trials.len(),
            report.config.trials
        ));
    }

    for record in &report.trials {
        if let Err(failure) = verify_trial(&report, record, dir) {
            outcome
                .failures
                .push(format!("trial {}: {failure}", record.trial));
        }
        outcome.trials_checked += 1;
    }

    // The summary must be a faithful aggregation of the records.
    let recomputed_pass = report
        .trials
        .iter()
        .all(|r| r.exactness_pass && r.l1_pass && r.logs_equal);
    if report.summary.pass != recomputed_pass {
        outcome.failures.push(format!(
            "summary.pass is {} but the trial records say {}",
            report.summary.pass, recomputed_pass
        ));
    }
    Ok(outcome)
}

/// All checks for one trial; the first divergence aborts the trial with a
/// description (an `anyhow` error doubles as the failure text).
fn verify_trial(report: &ExperimentReport, record: &TrialRecord, dir: &Path) -> Result<()> {
    let config = &report.config;
    let field = config.field.build(config.d)?;
    let base_only = config.field.build_base_only(config.d)?;

    let net_path = dir.join(&record.network_file);
    let stored_wire = std::fs::read_to_string(&net_path)
        .with_context(|| format!("cannot read {}", net_path.display()))?;
    let network = Network::from_json(&stored_wire).context("stored network does not parse")?;

    // (a) The recorded seeds regenerate the stored network byte-for-byte.
    let set = FiniteSet::new(config.d, record.x.clone())?;
    let masked = field.mask(&set)?;
    let predictor_cfg = PredictorConfig {
        epsilon: config.epsilon,
        split: BudgetSplit::default(),
        oracle: config.oracle.clone(),
        approx: ApproxConfig {
            certificate_samples: config.quadrature.certificate_samples,
            seed: record.approx_seed,
            max_refinements: config.max_refinements,
            max_grid_nodes: config.max_grid_nodes,
        },
    };
    let refit = fit(&SampleSet::Finite(set.clone()), &masked, &predictor_cfg)?;
    if refit.network.to_json() != stored_wire {
        anyhow::bail!("refit from recorded seeds does not reproduce the stored network");
    }
    if refit.certificate != record.certificate {
        anyhow::bail!("refit certificate differs from the recorded one");
    }
    if refit.n_star != record.n_star {
        anyhow::bail!(
            "refit n_star {:?} differs from recorded {:?}",
            refit.n_star,
            record.n_star
        );
    }

    // (b) The stored network reproduces the recorded pointwise records.
    let g = config.oracle.representative(&masked)?;
    let mut exactness_max: f64 = 0.0;
    let mut mismatches: Vec<Vec<f64>> = Vec::new();
    let mut expected_mismatches: Vec<Vec<f64>> = Vec::new();
    for p in set.points() {
        let predicted = network.evaluate(p)?;
        let representative = g.value_at(p)?;
        let truth = field.value_at(p)?;
        exactness_max = exactness_max.max(relative_error(predicted, representative));
        if relative_error(predicted, truth) > EXACTNESS_TOL {
            mismatches.push(p.clone());
        }
        if relative_error(representative, truth) > EXACTNESS_TOL {
            expected_mismatches.push(p.clone());
        }
    }
    if exactness_max != record.exactness_max_error {
        anyhow::bail!(
            "recomputed exactness error {exactness_max:e} differs from recorded {:e}",
            record.exactness_max_error
        );
    }
    if (exactness_max <= EXACTNESS_TOL) != record.exactness_pass {
        anyhow::bail!("recorded exactness_pass contradicts the recomputed error");
    }
    if mismatches != record.mismatches {
        anyhow::bail!("recomputed mismatch log differs from the recorded one");
    }
    if expected_mismatches != record.expected_mismatches {
        anyhow::bail!("recomputed expected-mismatch log differs from the recorded one");
    }
    if (mismatches == expected_mismatches) != record.logs_equal {
        anyhow::bail!("recorded logs_equal contradicts the recomputed logs");
    }

    // (c) The L1 measurement reproduces bitwise under the recorded seed.
    let quad = QuadratureConfig {
        method: config.quadrature.method,
        samples: config.quadrature.samples,
        seed: record.l1_seed,
        ..QuadratureConfig::default()
    };
    let l1 = l1_distance(&network, &base_only, &quad)?;
    if l1 != record.l1_estimate {
        anyhow::bail!(
            "recomputed L1 estimate {} differs from recorded {}",
            l1.value,
            record.l1_estimate.value
        );
    }
    if (l1.upper_confidence < config.epsilon) != record.l1_pass {
        anyhow::bail!("recorded l1_pass contradicts the recomputed estimate");
    }
    Ok(())
}
