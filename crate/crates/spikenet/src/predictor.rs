//! End-to-end label prediction: oracle, base approximant, and exact spike
//! corrections assembled into one network.
//!
//! [`fit`] implements the full pipeline for a masked label field and an
//! observed sample set `X`:
//!
//! 1. the configured [`ChoiceOracle`] picks the class representative `g`
//!    (it sees only the base function and integrability flag, never the
//!    masked exceptions — distinct fields in the same equivalence class
//!    yield the same `g`);
//! 2. the exception-free member of `g`'s class is approximated by a
//!    network within the base share of the L1 budget (exceptions are
//!    measure-zero, hence invisible in L1), with a quadrature certificate;
//! 3. residuals `r_k = g(k) - Phi(k)` are corrected by one spike per
//!    nonzero residual at a common resolution `n*` chosen so the total
//!    spike L1 mass stays within the spike share of the budget and the
//!    spike supports are pairwise disjoint;
//! 4. base network and spikes are summed into a single ReLU network that
//!    reproduces `g` on `X` exactly (up to the last floating-point
//!    operation of the output layer) while staying within the L1 budget.
//!
//! An infinite sample set short-circuits to the zero network: no finite
//! construction can interpolate on an infinite set, and the zero network
//! is the conventional answer with no exactness claim attached.

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::approx::{approximate, ApproxCertificate, ApproxConfig, ApproxError, ApproxStrategy};
use crate::field::{FieldError, FiniteSet, LabelField};
use crate::oracle::ChoiceOracle;
use crate::quadrature::{l1_distance, QuadratureConfig, QuadratureError, QuadratureMethod};
use crate::real::{rf, Real};
use crate::relu_net::{sum_networks, NetworkError, ReluNetwork};
use crate::spike::{build_spike, select_resolution, SpikeError, SpikeSpec};

/// How the L1 budget `epsilon` is shared between the base approximant, the
/// spike corrections, and head-room kept in reserve.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct BudgetSplit {
    /// Fraction of `epsilon` spent on the base approximation.
    pub base: f64,
    /// Fraction of `epsilon` covering the total spike mass.
    pub spike: f64,
    /// Fraction held back as slack (certificates are statistical).
    pub slack: f64,
}

impl Default for BudgetSplit {
    fn default() -> Self {
        BudgetSplit {
            base: 0.4,
            spike: 0.4,
            slack: 0.2,
        }
    }
}

impl BudgetSplit {
    /// Checks that all shares are positive, finite, and sum to one.
    pub fn validate(&self) -> Result<(), PredictError> {
        for (name, v) in [
            ("base", self.base),
            ("spike", self.spike),
            ("slack", self.slack),
        ] {
            if !(v.is_finite() && v > 0.0) {
                return Err(PredictError::SplitInvalid {
                    detail: format!("{name} share must be a positive finite fraction, got {v}"),
                });
            }
        }
        let total = self.base + self.spike + self.slack;
        if (total - 1.0).abs() > 1e-9 {
            return Err(PredictError::SplitInvalid {
                detail: format!("shares must sum to 1, got {total}"),
            });
        }
        Ok(())
    }
}

/// Full configuration for a prediction run.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(bound = "F: Real")]
pub struct PredictorConfig<F: Real> {
    /// Total L1 budget `epsilon`.
    pub epsilon: F,
    /// Budget shares.
    #[serde(default)]
    pub split: BudgetSplit,
    /// The choice oracle supplying the class representative.
    pub oracle: ChoiceOracle<F>,
    /// Approximation loop settings.
    #[serde(default)]
    pub approx: ApproxConfig,
}

/// The observed sample set: either a concrete finite set of points or the
/// marker for an infinite one.
#[derive(Debug, Clone, PartialEq)]
pub enum SampleSet<F: Real> {
    Finite(FiniteSet<F>),
    Infinite,
}

/// One observed point with its prediction and the hidden truth.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(bound = "F: Real")]
pub struct PerPointRecord<F: Real> {
    pub point: Vec<F>,
    pub predicted: F,
    pub hidden_truth: F,
    pub abs_error: F,
}

/// One residual correction.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(bound = "F: Real")]
pub struct ResidualRecord<F: Real> {
    pub point: Vec<F>,
    pub residual: F,
}

/// Everything [`fit`] produces.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(bound = "F: Real")]
pub struct PredictionOutcome<F: Real> {
    /// The assembled predictor network.
    pub network: ReluNetwork<F>,
    /// Certificate for the base approximation step.
    pub certificate: ApproxCertificate<F>,
    /// Common spike resolution, when any spike was needed.
    pub n_star: Option<u64>,
    /// Residuals at the observed points (all of them, zero or not).
    pub residuals: Vec<ResidualRecord<F>>,
    /// Per-point evaluation of the final network against the hidden truth.
    pub per_point: Vec<PerPointRecord<F>>,
}

/// Errors from fitting or querying.
#[derive(Debug, Error)]
pub enum PredictError {
    #[error("epsilon must be a finite positive number, got {value}")]
    EpsilonInvalid { value: f64 },
    #[error("invalid budget split: {detail}")]
    SplitInvalid { detail: String },
    #[error("sample set dimension {set} does not match field dimension {field}")]
    DimensionMismatch { set: usize, field: usize },
    #[error(transparent)]
    Field(#[from] FieldError),
    #[error(transparent)]
    Approx(#[from] ApproxError),
    #[error(transparent)]
    Spike(#[from] SpikeError),
    #[error(transparent)]
    Network(#[from] NetworkError),
    #[error(transparent)]
    Quadrature(#[from] QuadratureError),
}

/// Runs the full pipeline. See the module documentation for the steps.
pub fn fit<F: Real>(
    x: &SampleSet<F>,
    masked: &LabelField<F>,
    cfg: &PredictorConfig<F>,
) -> Result<PredictionOutcome<F>, PredictError> {
    if !(cfg.epsilon.is_finite() && cfg.epsilon > F::zero()) {
        return Err(PredictError::EpsilonInvalid {
            value: cfg.epsilon.to_f64().unwrap_or(f64::NAN),
        });
    }
    cfg.split.validate()?;
    let g = cfg.oracle.representative(masked)?;

    let set = match x {
        SampleSet::Infinite => {
            // No finite construction interpolates on an infinite set; the
            // zero network is the conventional fallback. The certificate
            // records its (informational) distance to the representative.
            let network = ReluNetwork::zero(masked.dim());
            let quad = QuadratureConfig {
                method: QuadratureMethod::MonteCarlo,
                samples: cfg.approx.certificate_samples,
                seed: cfg.approx.seed,
                ..QuadratureConfig::default()
            };
            let estimate = l1_distance(&g, &network, &quad)?;
            let certificate = ApproxCertificate {
                budget: cfg.epsilon,
                estimate,
                grid_resolution: None,
                strategy: ApproxStrategy::Zero,
            };
            return Ok(PredictionOutcome {
                network,
                certificate,
                n_star: None,
                residuals: Vec::new(),
                per_point: Vec::new(),
            });
        }
        SampleSet::Finite(set) => set,
    };
    if set.dim() != masked.dim() {
        return Err(PredictError::DimensionMismatch {
            set: set.dim(),
            field: masked.dim(),
        });
    }

    // The L1 approximation target is the exception-free member of g's
    // class: exceptions live on a measure-zero set and cannot move an L1
    // distance, while `approximate` (rightly) refuses fields that carry
    // them. Pointwise corrections below still use g itself, exceptions and
    // all.
    let g_smooth = LabelField::new(masked.dim(), g.base().clone(), [], g.integrable())?;
    let base_budget = cfg.epsilon * rf::<F>(cfg.split.base);
    let (phi, certificate) = approximate(&g_smooth, base_budget, &cfg.approx)?;

    let mut residuals = Vec::with_capacity(set.len());
    for point in set.points() {
        let truth = g.value_at(point)?;
        let residual = truth - phi.evaluate(point)?;
        residuals.push(ResidualRecord {
            point: point.clone(),
            residual,
        });
    }

    let nonzero: Vec<&ResidualRecord<F>> = residuals
        .iter()
        .filter(|r| r.residual != F::zero())
        .collect();
    let (network, n_star) = if nonzero.is_empty() {
        (phi.clone(), None)
    } else {
        // The per-spike cap inside select_resolution is epsilon / (2 |X|),
        // so passing 2 * spike_share * epsilon makes the total spike mass
        // at most |X| * (spike_share * epsilon / |X|) = spike_share * epsilon.
        let spike_budget = rf::<F>(2.0) * cfg.epsilon * rf::<F>(cfg.split.spike);
        let values: Vec<F> = residuals.iter().map(|r| r.residual).collect();
        let n = select_resolution(set, &values, spike_budget)?;
        let mut summands = Vec::with_capacity(1 + nonzero.len());
        summands.push(phi.clone());
        for record in &nonzero {
            let spec = SpikeSpec {
                center: record.point.clone(),
                residual: record.residual,
                resolution: n,
            };
            summands.push(build_spike(&spec)?);
        }
        (sum_networks(&summands)?, Some(n))
    };

    let mut per_point = Vec::with_capacity(set.len());
    for point in set.points() {
        let predicted = network.evaluate(point)?;
        let hidden_truth = g.value_at(point)?;
        per_point.push(PerPointRecord {
            point: point.clone(),
            predicted,
            hidden_truth,
            abs_error: (predicted - hidden_truth).abs(),
        });
    }

    Ok(PredictionOutcome {
        network,
        certificate,
        n_star,
        residuals,
        per_point,
    })
}

/// A queryable view over a fitted predictor: exact reconstruction on the
/// observed set, pass-through of the masked field elsewhere.
#[derive(Debug, Clone)]
pub struct LabelMap<F: Real> {
    outcome: PredictionOutcome<F>,
    masked: LabelField<F>,
    observed: Option<FiniteSet<F>>,
}

impl<F: Real> LabelMap<F> {
    /// The fitted outcome (network, certificate, residual log).
    pub fn outcome(&self) -> &PredictionOutcome<F> {
        &self.outcome
    }

    /// Consumes the map, returning the outcome.
    pub fn into_outcome(self) -> PredictionOutcome<F> {
        self.outcome
    }

    /// Rebuilds a map from previously fitted (or deserialized) parts, e.g.
    /// when auditing a stored outcome. `observed` is `None` for the
    /// infinite sample-set marker. Dimensions must agree.
    pub fn from_parts(
        outcome: PredictionOutcome<F>,
        masked: LabelField<F>,
        observed: Option<FiniteSet<F>>,
    ) -> Result<Self, PredictError> {
        let net_dim = outcome.network.input_dim();
        if net_dim != masked.dim() {
            return Err(PredictError::DimensionMismatch {
                set: net_dim,
                field: masked.dim(),
            });
        }
        if let Some(set) = &observed {
            if set.dim() != masked.dim() {
                return Err(PredictError::DimensionMismatch {
                    set: set.dim(),
                    field: masked.dim(),
                });
            }
        }
        Ok(LabelMap {
            outcome,
            masked,
            observed,
        })
    }

    /// Predicts the label at `j`: for observed points the network output
    /// clamped to `[0, 1]`, elsewhere the masked field's value. With an
    /// infinite sample-set marker there is no membership test, so every
    /// query falls through to the masked field.
    pub fn query(&self, j: &[F]) -> Result<F, PredictError> {
        if let Some(set) = &self.observed {
            if set.contains(j) {
                let raw = self.outcome.network.evaluate(j)?;
                return Ok(raw.max(F::zero()).min(F::one()));
            }
        }
        Ok(self.masked.value_at(j)?)
    }
}

/// Fits the predictor and wraps it as a queryable [`LabelMap`].
pub fn predict_labels<F: Real>(
    x: &SampleSet<F>,
    masked: &LabelField<F>,
    cfg: &PredictorConfig<F>,
) -> Result<LabelMap<F>, PredictError> {
    let outcome = fit(x, masked, cfg)?;
    let observed = match x {
        SampleSet::Finite(set) => Some(set.clone()),
        SampleSet::Infinite => None,
    };
    Ok(LabelMap {
        outcome,
        masked: masked.clone(),
        observed,
    })
}
