//! Certified L1 approximation of base label functions by ReLU networks.
//!
//! [`approximate`] compiles piecewise-linear grid interpolants of a base
//! function at doubling resolutions `m = 1, 2, 4, ...` and stops at the
//! first resolution whose measured L1 distance to the target — including a
//! four-standard-error confidence margin — falls below the requested
//! budget. The returned [`ApproxCertificate`] records the estimate, so a
//! caller (or an independent re-run with a different quadrature seed) can
//! audit the claim.
//!
//! Two compilation strategies cover the supported dimensions:
//!
//! * `d == 1`: a hat-basis interpolant with widths `(1, m, 1)`;
//! * `d >= 2`: the simplicial (Kuhn) interpolant from [`crate::kuhn`].
//!
//! Non-integrable base functions (the measure-zero indicator stand-in) get
//! the zero network: their L1 distance to zero vanishes, so the zero
//! network meets every positive budget. The certificate marks this with
//! [`ApproxStrategy::Zero`] and carries an informational estimate.
//!
//! The procedure is deterministic: for a fixed field, budget, and
//! configuration, every quadrature level reuses the same configured seed,
//! so repeated calls return bitwise-identical networks and certificates.

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::field::{BaseFunction, FieldError, LabelField};
use crate::kuhn;
use crate::quadrature::{
    l1_distance, QuadratureConfig, QuadratureError, QuadratureEstimate, QuadratureMethod,
};
use crate::real::{rf, ru, Real};
use crate::relu_net::{AffineLayer, NetworkError, ReluNetwork};
use ndarray::{Array1, Array2};

/// Which compilation path produced an approximant.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ApproxStrategy {
    /// One-dimensional hat-basis interpolation, widths `(1, m, 1)`.
    HatInterp1d,
    /// Simplicial grid interpolation via clipped min-chains (`d >= 2`).
    SimplicialMinMax,
    /// The zero network (non-integrable targets).
    Zero,
}

/// Evidence that the returned network meets its L1 budget.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(bound = "F: Real")]
pub struct ApproxCertificate<F: Real> {
    /// The budget the approximation was asked to meet.
    pub budget: F,
    /// Measured L1 distance between network and target.
    pub estimate: QuadratureEstimate<F>,
    /// Grid resolution of the accepted interpolant (`None` for zero nets).
    pub grid_resolution: Option<u64>,
    /// Compilation path taken.
    pub strategy: ApproxStrategy,
}

/// Tuning knobs for the refinement loop.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct ApproxConfig {
    /// Monte Carlo samples per certificate evaluation.
    pub certificate_samples: u64,
    /// Quadrature seed (reused at every refinement level).
    pub seed: u64,
    /// Maximum number of resolution doublings from `m = 1`.
    pub max_refinements: u32,
    /// Upper bound on grid nodes `(m+1)^d`; coarser levels only.
    pub max_grid_nodes: u64,
}

impl Default for ApproxConfig {
    fn default() -> Self {
        ApproxConfig {
            certificate_samples: 20_000,
            seed: 0,
            max_refinements: 12,
            max_grid_nodes: 1_200,
        }
    }
}

/// Errors from [`approximate`].
#[derive(Debug, Error)]
pub enum ApproxError {
    #[error("approximation budget must be a finite positive number, got {value}")]
    BadBudget { value: f64 },
    #[error(
        "field carries {count} exception points; approximate the base field and add \
         corrections separately"
    )]
    ExceptionsPresent { count: usize },
    #[error(
        "budget {budget} not met: best certified distance {best} at resolution {resolution} \
         (refinement stopped by the node or refinement cap)"
    )]
    BudgetNotMet {
        budget: f64,
        best: f64,
        resolution: u64,
    },
    #[error(transparent)]
    Quadrature(#[from] QuadratureError),
    #[error(transparent)]
    Network(#[from] NetworkError),
    #[error(transparent)]
    Field(#[from] FieldError),
}

/// Compiles the one-dimensional piecewise-linear interpolant of `base` on
/// the uniform grid `i/m` as a `(1, m, 1)` network: hinge basis
/// `relu(x - i/m)` for `i = 0..m-1` with slope-difference coefficients.
fn hat_interp_1d<F: Real>(base: &BaseFunction<F>, m: u64) -> Result<ReluNetwork<F>, NetworkError> {
    assert!(m >= 1);
    let mu = m as usize;
    let m_f = ru::<F>(m);
    let values: Vec<F> = (0..=m)
        .map(|i| base.evaluate(&[rf::<F>(i as f64 / m as f64)]))
        .collect();
    let slopes: Vec<F> = (0..mu).map(|i| (values[i + 1] - values[i]) * m_f).collect();

    let mut w1 = Array2::zeros((mu, 1));
    let mut b1 = Array1::zeros(mu);
    for i in 0..mu {
        w1[(i, 0)] = F::one();
        b1[i] = -rf::<F>(i as f64 / m as f64);
    }
    let mut w2 = Array2::zeros((1, mu));
    w2[(0, 0)] = slopes[0];
    for i in 1..mu {
        w2[(0, i)] = slopes[i] - slopes[i - 1];
    }
    let b2 = Array1::from(vec![values[0]]);
    ReluNetwork::new(
        1,
        vec![
            AffineLayer {
                weights: w1,
                bias: b1,
            },
            AffineLayer {
                weights: w2,
                bias: b2,
            },
        ],
    )
}

/// Compiles the grid interpolant of `base` at resolution `m` for any
/// supported dimension.
pub fn compile_interpolant<F: Real>(
    base: &BaseFunction<F>,
    d: usize,
    m: u64,
) -> Result<ReluNetwork<F>, NetworkError> {
    if d == 1 {
        hat_interp_1d(base, m)
    } else {
        kuhn::compile(base, d, m)
    }
}

/// Approximates the base function of `field` to L1 accuracy `budget`.
///
/// Returns the network together with a certificate whose
/// `estimate.upper_confidence` is below `budget` (except for the zero
/// strategy, where the estimate is informational). The field must carry no
/// exception points: exact corrections on a finite set are a separate,
/// spike-based concern.
pub fn approximate<F: Real>(
    field: &LabelField<F>,
    budget: F,
    cfg: &ApproxConfig,
) -> Result<(ReluNetwork<F>, ApproxCertificate<F>), ApproxError> {
    if !(budget.is_finite() && budget > F::zero()) {
        return Err(ApproxError::BadBudget {
            value: budget.to_f64().unwrap_or(f64::NAN),
        });
    }
    if field.exception_count() > 0 {
        return Err(ApproxError::ExceptionsPresent {
            count: field.exception_count(),
        });
    }
    let d = field.dim();
    let quad = QuadratureConfig {
        method: QuadratureMethod::MonteCarlo,
        samples: cfg.certificate_samples,
        seed: cfg.seed,
        ..QuadratureConfig::default()
    };

    if !field.integrable() {
        let net = ReluNetwork::zero(d);
        let estimate = l1_distance(field, &net, &quad)?;
        let certificate = ApproxCertificate {
            budget,
            estimate,
            grid_resolution: None,
            strategy: ApproxStrategy::Zero,
        };
        return Ok((net, certificate));
    }

    let strategy = if d == 1 {
        ApproxStrategy::HatInterp1d
    } else {
        ApproxStrategy::SimplicialMinMax
    };
    let mut best: Option<(f64, u64)> = None;
    for level in 0..=cfg.max_refinements {
        let m = 1u64 << level;
        match kuhn::node_count(d, m) {
            Some(nodes) if nodes <= cfg.max_grid_nodes => {}
            _ => break,
        }
        let net = compile_interpolant(field.base(), d, m)?;
        let estimate = l1_distance(&net, field, &quad)?;
        let upper = estimate.upper_confidence;
        if upper < budget {
            let certificate = ApproxCertificate {
                budget,
                estimate,
                grid_resolution: Some(m),
                strategy,
            };
            return Ok((net, certificate));
        }
        let upper_f = upper.to_f64().unwrap_or(f64::INFINITY);
        if best.is_none_or(|(b, _)| upper_f < b) {
            best = Some((upper_f, m));
        }
    }
    let (best_val, resolution) = best.unwrap_or((f64::INFINITY, 0));
    Err(ApproxError::BudgetNotMet {
        budget: budget.to_f64().unwrap_or(f64::NAN),
        best: best_val,
        resolution,
    })
}
