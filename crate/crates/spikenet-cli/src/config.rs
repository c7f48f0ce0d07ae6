//! Experiment configuration: a JSON file describing the field, the oracle,
//! the sample-size law, and the measurement settings for a batch of trials.

use std::path::{Path, PathBuf};

use anyhow::{bail, Context, Result};
use serde::{Deserialize, Serialize};

use spikenet::{
    BaseFunction, ChoiceOracle, LabelField, QuadratureMethod, SizeDistribution,
};

/// Environment variable consulted for the default output directory.
pub const OUT_DIR_ENV: &str = "SPIKENET_OUT_DIR";

fn default_true() -> bool {
    true
}

/// The label field: a base function, pointwise exceptions, and whether the
/// base is integrable over the unit cube.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct FieldSpec {
    pub base: BaseFunction<f64>,
    #[serde(default = "default_true")]
    pub integrable: bool,
    #[serde(default)]
    pub exceptions: Vec<(Vec<f64>, f64)>,
}

impl FieldSpec {
    /// The full field, exceptions included (the hidden ground truth).
    pub fn build(&self, d: usize) -> Result<LabelField<f64>> {
        LabelField::new(d, self.base.clone(), self.exceptions.iter().cloned(), self.integrable)
            .context("invalid field specification")
    }

    /// The exception-free member of the field's class (the L1 reference).
    pub fn build_base_only(&self, d: usize) -> Result<LabelField<f64>> {
        LabelField::new(d, self.base.clone(), [], self.integrable)
            .context("invalid base function")
    }
}

/// Measurement settings: engine and sample counts.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct QuadratureSpec {
    /// Engine for the final L1 budget measurement.
    pub method: QuadratureMethod,
    /// Samples for the final L1 budget measurement.
    pub samples: u64,
    /// Monte Carlo samples per approximation certificate.
    pub certificate_samples: u64,
}

impl Default for QuadratureSpec {
    fn default() -> Self {
        QuadratureSpec {
            method: QuadratureMethod::MonteCarlo,
            samples: 50_000,
            certificate_samples: 20_000,
        }
    }
}

fn default_oracle() -> ChoiceOracle<f64> {
    ChoiceOracle::StripExceptions
}

fn default_max_refinements() -> u32 {
    12
}

fn default_max_grid_nodes() -> u64 {
    1_200
}

/// One experiment: `trials` independent draws of an observed set `X` from
/// the size law `nu`, each followed by a fit and its checks.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ExperimentConfig {
    /// Ambient dimension of the unit cube.
    pub d: usize,
    /// Total L1 budget per trial.
    pub epsilon: f64,
    /// Number of independent trials.
    pub trials: u64,
    /// Master seed; every random stream in the run derives from it.
    pub seed: u64,
    /// The hidden label field.
    pub field: FieldSpec,
    /// The choice oracle handed to the fitter.
    #[serde(default = "default_oracle")]
    pub oracle: ChoiceOracle<f64>,
    /// Size law for the observed set.
    pub nu: SizeDistribution,
    /// Measurement settings.
    #[serde(default)]
    pub quadrature: QuadratureSpec,
    /// Cap on resolution doublings in the approximation loop.
    #[serde(default = "default_max_refinements")]
    pub max_refinements: u32,
    /// Cap on interpolation grid nodes.
    #[serde(default = "default_max_grid_nodes")]
    pub max_grid_nodes: u64,
    /// Output directory (overridden by --out-dir, then by the environment).
    #[serde(default)]
    pub output_dir: Option<PathBuf>,
    /// Whether to render the trial-0 figure (d <= 2 only).
    #[serde(default = "default_true")]
    pub emit_figures: bool,
}

impl ExperimentConfig {
    /// Loads and validates a configuration file.
    pub fn load(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path)
            .with_context(|| format!("cannot read config {}", path.display()))?;
        let config: ExperimentConfig = serde_json::from_str(&text)
            .with_context(|| format!("cannot parse config {}", path.display()))?;
        config.validate()?;
        Ok(config)
    }

    /// Structural checks beyond what serde enforces.
    pub fn validate(&self) -> Result<()> {
        if self.d == 0 {
            bail!("d must be at least 1");
        }
        if !(self.epsilon.is_finite() && self.epsilon > 0.0) {
            bail!("epsilon must be a finite positive number, got {}", self.epsilon);
        }
        if self.trials == 0 {
            bail!("trials must be at least 1");
        }
        if self.quadrature.method == QuadratureMethod::Grid && self.d > 3 {
            bail!("grid quadrature supports dimensions 1..=3, got d = {}", self.d);
        }
        if self.quadrature.method == QuadratureMethod::Grid && !self.field.integrable {
            // Midpoint nodes of a power-of-two grid are coarse dyadic
            // rationals, exactly the support of the non-integrable stand-in,
            // so the grid sees the measure-zero set with full weight.
            bail!("grid quadrature cannot measure a non-integrable field; use monte_carlo");
        }
        // Field parameters are validated against d on construction.
        self.field.build(self.d)?;
        for point in self.oracle.corruption_points() {
            if point.len() != self.d {
                bail!(
                    "oracle corruption point {:?} has dimension {}, expected {}",
                    point,
                    point.len(),
                    self.d
                );
            }
        }
        Ok(())
    }

    /// Resolution order for the output directory: CLI flag, config field,
    /// `SPIKENET_OUT_DIR`, then `./spikenet-out`.
    pub fn resolve_output_dir(&self, cli: Option<PathBuf>) -> PathBuf {
        if let Some(dir) = cli {
            return dir;
        }
        if let Some(dir) = &self.output_dir {
            return dir.clone();
        }
        if let Ok(dir) = std::env::var(OUT_DIR_ENV) {
            if !dir.is_empty() {
                return PathBuf::from(dir);
            }
        }
        PathBuf::from("spikenet-out")
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn minimal_json() -> &'static str {
        r#"{
            "d": 1,
            "epsilon": 0.1,
            "trials": 2,
            "seed": 7,
            "field": { "base": { "base": "sin_sq", "params": { "amplitude": 1.0, "offset": 0.0 } } },
            "nu": { "kind": "poisson", "mean": 5.0 }
        }"#
    }

    #[test]
    fn minimal_config_parses_with_defaults() {
        let config: ExperimentConfig = serde_json::from_str(minimal_json()).unwrap();
        config.validate().unwrap();
        assert_eq!(config.oracle, ChoiceOracle::StripExceptions);
        assert_eq!(config.quadrature.samples, 50_000);
        assert_eq!(config.max_refinements, 12);
        assert!(config.emit_figures);
        assert!(config.field.integrable);
    }

    #[test]
    fn unknown_fields_are_rejected() {
        let text = minimal_json().replace("\"seed\": 7", "\"seed\": 7, \"bogus\": 1");
        let err = serde_json::from_str::<ExperimentConfig>(&text).unwrap_err();
        assert!(err.to_string().contains("bogus"));
    }

    #[test]
    fn validation_catches_bad_shapes() {
        let mut config: ExperimentConfig = serde_json::from_str(minimal_json()).unwrap();
        config.epsilon = 0.0;
        assert!(config.validate().is_err());

        let mut config: ExperimentConfig = serde_json::from_str(minimal_json()).unwrap();
        config.quadrature.method = QuadratureMethod::Grid;
        config.d = 4;
        assert!(config.validate().is_err());

        let mut config: ExperimentConfig = serde_json::from_str(minimal_json()).unwrap();
        config.quadrature.method = QuadratureMethod::Grid;
        config.field.integrable = false;
        config.field.base = BaseFunction::NonIntegrable;
        assert!(config.validate().is_err());

        let mut config: ExperimentConfig = serde_json::from_str(minimal_json()).unwrap();
        config.oracle = ChoiceOracle::Adversarial {
            corruption: vec![spikenet::oracle::CorruptionEntry {
                point: vec![0.5, 0.5],
                value: 0.1,
            }],
        };
        assert!(config.validate().is_err());
    }

    #[test]
    fn output_dir_resolution_order() {
        let mut config: ExperimentConfig = serde_json::from_str(minimal_json()).unwrap();
        assert_eq!(
            config.resolve_output_dir(Some(PathBuf::from("cli"))),
            PathBuf::from("cli")
        );
        config.output_dir = Some(PathBuf::from("from-config"));
        assert_eq!(config.resolve_output_dir(None), PathBuf::from("from-config"));
    }
}
