//! Exact-interpolation ReLU networks over the unit cube.
//!
//! This crate builds feed-forward ReLU networks that reproduce a set of
//! hidden labels *exactly* on a finite point set while staying within a
//! prescribed L1 distance of a reference function on `[0,1]^d`. The
//! construction is split into small, independently testable pieces:
//!
//! * [`relu_net`] — network representation, evaluation, summation with
//!   depth alignment, and a pinned JSON wire format.
//! * [`spike`] — compactly supported "spike" networks that take a chosen
//!   value at one point and vanish outside an L1 ball, plus the resolution
//!   search that keeps the total spike mass within budget.
//! * [`field`] — label fields: a registry base function plus a finite map
//!   of pointwise exceptions, with masking and equivalence.
//! * [`oracle`] — choice oracles that pick a representative of a field's
//!   equivalence class (exceptions differ only on a finite set).
//! * [`sampler`] — deterministic, counter-based sampling of finite point
//!   sets with a configurable size distribution.
//! * [`quadrature`] — seeded Monte Carlo (and midpoint-grid) estimation of
//!   L1 distances with explicit confidence information.
//! * [`approx`] — budgeted L1 approximation of a base function by a
//!   network: exact hat interpolation in one dimension, a simplicial
//!   (Kuhn) interpolant compiled through min-chains in higher dimensions.
//! * [`predictor`] — the end-to-end pipeline: oracle representative, base
//!   approximant, residual spikes, assembled network, label queries.
//!
//! All numerical code is generic over the scalar type through the
//! [`real::Real`] trait (`f32` or `f64`); the type aliases at the crate
//! root fix `f64` for the concrete pipeline.

pub mod approx;
pub mod field;
pub mod kuhn;
pub mod oracle;
pub mod predictor;
pub mod quadrature;
pub mod real;
pub mod relu_net;
pub mod sampler;
pub mod spike;
pub mod stream;

pub use approx::{approximate, ApproxCertificate, ApproxConfig, ApproxError, ApproxStrategy};
pub use field::{BaseFunction, FieldError, FiniteSet, LabelField};
pub use oracle::ChoiceOracle;
pub use predictor::{
    fit, predict_labels, BudgetSplit, LabelMap, PerPointRecord, PredictError, PredictionOutcome,
    PredictorConfig, ResidualRecord, SampleSet,
};
pub use quadrature::{
    l1_distance, QuadratureConfig, QuadratureEstimate, QuadratureError, QuadratureMethod,
};
pub use real::Real;
pub use relu_net::{sum_networks, AffineLayer, NetworkError, ReluNetwork};
pub use sampler::{intersection_trials, sample_finite_set, IntersectionStats, SizeDistribution};
pub use spike::{build_spike, select_resolution, spike_l1_bound, SpikeError, SpikeSpec};

/// Concrete `f64` network, the default scalar for the pipeline.
pub type Network = ReluNetwork<f64>;
/// Concrete `f64` affine layer.
pub type Layer = AffineLayer<f64>;
/// Concrete `f64` label field.
pub type Field = LabelField<f64>;
/// Concrete `f64` finite point set.
pub type PointSet = FiniteSet<f64>;
/// Concrete `f64` spike specification.
pub type Spike = SpikeSpec<f64>;
/// Concrete `f64` quadrature estimate.
pub type Estimate = QuadratureEstimate<f64>;
/// Concrete `f64` approximation certificate.
pub type Certificate = ApproxCertificate<f64>;
/// Concrete `f64` prediction outcome.
pub type Outcome = PredictionOutcome<f64>;
