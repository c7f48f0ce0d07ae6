//! L1 distance estimation between evaluable functions on `[0,1]^d`.
//!
//! The Monte Carlo engine draws its points from counter-based streams keyed
//! by `(seed, chunk_index)` with a fixed chunk size, and combines per-chunk
//! partial sums in chunk order. Results are therefore bit-identical for a
//! given `(functions, config)` regardless of how many worker threads rayon
//! uses. The midpoint-grid engine (dimensions 1–3) exists to cross-validate
//! the Monte Carlo numbers; its upper confidence value is a heuristic
//! inflation, not a rigorous bound.

use ndarray::{Array2, ArrayView2};
use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::field::{FieldError, LabelField};
use crate::real::{rf, ru, Real};
use crate::relu_net::{NetworkError, ReluNetwork};
use crate::stream::{dyadic_unit, stream_rng};

/// Minimum admissible sample count.
pub const MIN_SAMPLES: u64 = 100;

/// Points per evaluation chunk. Fixed: the Monte Carlo point sequence is
/// part of the determinism contract (stream index = chunk index).
const CHUNK: u64 = 8192;

/// Errors from quadrature configuration and evaluation.
#[derive(Debug, Error)]
pub enum QuadratureError {
    #[error("integrands have dimensions {a} and {b}")]
    DimensionMismatch { a: usize, b: usize },
    #[error("{samples} samples requested, minimum is {minimum}")]
    TooFewSamples { samples: u64, minimum: u64 },
    #[error("grid quadrature supports dimensions 1..=3, got {d}")]
    GridUnsupportedDimension { d: usize },
    #[error("integrand produced NaN at {point:?}")]
    NaNAt { point: Vec<f64> },
    #[error(transparent)]
    Network(#[from] NetworkError),
    #[error(transparent)]
    Field(#[from] FieldError),
}

/// Quadrature engine selection.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum QuadratureMethod {
    MonteCarlo,
    Grid,
}

fn default_samples() -> u64 {
    200_000
}

fn default_grid_bound_factor() -> f64 {
    0.25
}

/// Configuration for one distance estimate.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct QuadratureConfig {
    pub method: QuadratureMethod,
    #[serde(default = "default_samples")]
    pub samples: u64,
    #[serde(default)]
    pub seed: u64,
    /// Heuristic inflation factor for the grid engine's upper confidence.
    #[serde(default = "default_grid_bound_factor")]
    pub grid_bound_factor: f64,
}

impl Default for QuadratureConfig {
    fn default() -> Self {
        QuadratureConfig {
            method: QuadratureMethod::MonteCarlo,
            samples: default_samples(),
            seed: 0,
            grid_bound_factor: default_grid_bound_factor(),
        }
    }
}

/// A distance estimate with confidence information.
///
/// For Monte Carlo, `upper_confidence = value + 4 * standard_error` (the
/// standard error is the sample standard deviation over `sqrt(samples)`).
/// For the grid engine, `upper_confidence = value * (1 + grid_bound_factor)`
/// and `standard_error` is zero.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(bound = "F: Real")]
pub struct QuadratureEstimate<F: Real> {
    pub value: F,
    pub standard_error: F,
    pub samples: u64,
    pub method: QuadratureMethod,
    pub upper_confidence: F,
}

/// Anything that can be evaluated in batch on points of `[0,1]^d`.
pub trait Integrand<F: Real>: Sync {
    /// Ambient dimension.
    fn dim(&self) -> usize;
    /// Evaluates at every row of `points`, writing into `out` (same length).
    fn eval_batch(&self, points: ArrayView2<F>, out: &mut [F]) -> Result<(), QuadratureError>;
}

impl<F: Real> Integrand<F> for ReluNetwork<F> {
    fn dim(&self) -> usize {
        self.input_dim()
    }

    fn eval_batch(&self, points: ArrayView2<F>, out: &mut [F]) -> Result<(), QuadratureError> {
        let values = self.evaluate_batch(points)?;
        out.copy_from_slice(values.as_slice().expect("contiguous"));
        Ok(())
    }
}

impl<F: Real> Integrand<F> for LabelField<F> {
    fn dim(&self) -> usize {
        self.dim()
    }

    fn eval_batch(&self, points: ArrayView2<F>, out: &mut [F]) -> Result<(), QuadratureError> {
        for (row, slot) in points.rows().into_iter().zip(out.iter_mut()) {
            *slot = self.value_at(row.as_slice().expect("contiguous"))?;
        }
        Ok(())
    }
}

/// Adapter turning a closure into an [`Integrand`].
pub struct FnIntegrand<F, G> {
    dim: usize,
    f: G,
    _marker: std::marker::PhantomData<fn() -> F>,
}

impl<F: Real, G: Fn(&[F]) -> F + Sync> FnIntegrand<F, G> {
    pub fn new(dim: usize, f: G) -> Self {
        FnIntegrand {
            dim,
            f,
            _marker: std::marker::PhantomData,
        }
    }
}

impl<F: Real, G: Fn(&[F]) -> F + Sync> Integrand<F> for FnIntegrand<F, G> {
    fn dim(&self) -> usize {
        self.dim
    }

    fn eval_batch(&self, points: ArrayView2<F>, out: &mut [F]) -> Result<(), QuadratureError> {
        for (row, slot) in points.rows().into_iter().zip(out.iter_mut()) {
            *slot = (self.f)(row.as_slice().expect("contiguous"));
        }
        Ok(())
    }
}

struct ChunkSums<F> {
    sum: F,
    sum_sq: F,
}

fn chunk_sums<F: Real>(
    a: &(impl Integrand<F> + ?Sized),
    b: &(impl Integrand<F> + ?Sized),
    points: &Array2<F>,
) -> Result<ChunkSums<F>, QuadratureError> {
    let n = points.nrows();
    let mut va = vec![F::zero(); n];
    let mut vb = vec![F::zero(); n];
    a.eval_batch(points.view(), &mut va)?;
    b.eval_batch(points.view(), &mut vb)?;
    let mut sum = F::zero();
    let mut sum_sq = F::zero();
    for i in 0..n {
        let diff = (va[i] - vb[i]).abs();
        if diff.is_nan() {
            let point: Vec<f64> = points
                .row(i)
                .iter()
                .map(|v| v.to_f64().unwrap_or(f64::NAN))
                .collect();
            return Err(QuadratureError::NaNAt { point });
        }
        sum += diff;
        sum_sq += diff * diff;
    }
    Ok(ChunkSums { sum, sum_sq })
}

fn finalize<F: Real>(
    sums: Vec<ChunkSums<F>>,
    samples: u64,
    method: QuadratureMethod,
    grid_bound_factor: f64,
) -> QuadratureEstimate<F> {
    let mut total = F::zero();
    let mut total_sq = F::zero();
    for s in sums {
        total += s.sum;
        total_sq += s.sum_sq;
    }
    let n = ru::<F>(samples);
    let value = total / n;
    match method {
        QuadratureMethod::MonteCarlo => {
            let variance = ((total_sq - n * value * value) / (n - F::one())).max(F::zero());
            let standard_error = (variance / n).sqrt();
            QuadratureEstimate {
                value,
                standard_error,
                samples,
                method,
                upper_confidence: value + rf::<F>(4.0) * standard_error,
            }
        }
        QuadratureMethod::Grid => QuadratureEstimate {
            value,
            standard_error: F::zero(),
            samples,
            method,
            upper_confidence: value * (F::one() + rf::<F>(grid_bound_factor)),
        },
    }
}

/// Estimates `∫ |a - b|` over `[0,1]^d` under `cfg`.
///
/// Deterministic: the result depends only on the integrands and the config,
/// never on thread scheduling.
pub fn l1_distance<F: Real>(
    a: &(impl Integrand<F> + ?Sized),
    b: &(impl Integrand<F> + ?Sized),
    cfg: &QuadratureConfig,
) -> Result<QuadratureEstimate<F>, QuadratureError> {
    let d = a.dim();
    if b.dim() != d {
        return Err(QuadratureError::DimensionMismatch { a: d, b: b.dim() });
    }
    if cfg.samples < MIN_SAMPLES {
        return Err(QuadratureError::TooFewSamples {
            samples: cfg.samples,
            minimum: MIN_SAMPLES,
        });
    }
    match cfg.method {
        QuadratureMethod::MonteCarlo => {
            let chunks = cfg.samples.div_ceil(CHUNK);
            let sums: Vec<ChunkSums<F>> = (0..chunks)
                .into_par_iter()
                .map(|c| {
                    let count = CHUNK.min(cfg.samples - c * CHUNK) as usize;
                    let mut rng = stream_rng(cfg.seed, c);
                    let mut points = Array2::zeros((count, d));
                    for mut row in points.rows_mut() {
                        for slot in row.iter_mut() {
                            *slot = rf::<F>(dyadic_unit(&mut rng));
                        }
                    }
                    chunk_sums(a, b, &points)
                })
                .collect::<Result<_, _>>()?;
            Ok(finalize(
                sums,
                cfg.samples,
                QuadratureMethod::MonteCarlo,
                cfg.grid_bound_factor,
            ))
        }
        QuadratureMethod::Grid => {
            if !(1..=3).contains(&d) {
                return Err(QuadratureError::GridUnsupportedDimension { d });
            }
            let per_axis = (cfg.samples as f64).powf(1.0 / d as f64).floor() as u64;
            let per_axis = per_axis.max(2);
            let total: u64 = per_axis.pow(d as u32);
            let chunks = total.div_ceil(CHUNK);
            let sums: Vec<ChunkSums<F>> = (0..chunks)
                .into_par_iter()
                .map(|c| {
                    let start = c * CHUNK;
                    let count = CHUNK.min(total - start) as usize;
                    let mut points = Array2::zeros((count, d));
                    for (i, mut row) in points.rows_mut().into_iter().enumerate() {
                        let mut linear = start + i as u64;
                        for slot in row.iter_mut().rev() {
                            let idx = linear % per_axis;
                            linear /= per_axis;
                            *slot = rf::<F>((idx as f64 + 0.5) / per_axis as f64);
                        }
                    }
                    chunk_sums(a, b, &points)
                })
                .collect::<Result<_, _>>()?;
            Ok(finalize(
                sums,
                total,
                QuadratureMethod::Grid,
                cfg.grid_bound_factor,
            ))
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::field::BaseFunction;

    fn constant_field(value: f64) -> LabelField<f64> {
        LabelField::new(1, BaseFunction::Constant { value }, [], true).unwrap()
    }

    #[test]
    fn constant_distance_is_exact_with_zero_error() {
        let a = constant_field(0.75);
        let b = constant_field(0.5);
        let est = l1_distance(&a, &b, &QuadratureConfig {
            samples: 1000,
            ..Default::default()
        })
        .unwrap();
        assert_eq!(est.value, 0.25);
        assert_eq!(est.standard_error, 0.0);
        assert_eq!(est.upper_confidence, 0.25);
        assert_eq!(est.samples, 1000);
    }

    #[test]
    fn estimates_are_deterministic() {
        let a = constant_field(0.75);
        let f = FnIntegrand::new(1, |x: &[f64]| x[0]);
        let cfg = QuadratureConfig {
            samples: 20_000,
            seed: 9,
            ..Default::default()
        };
        let e1 = l1_distance(&a, &f, &cfg).unwrap();
        let e2 = l1_distance(&a, &f, &cfg).unwrap();
        assert_eq!(e1, e2);
    }

    #[test]
    fn nan_is_propagated_with_the_point() {
        let a = constant_field(0.5);
        let bad = FnIntegrand::new(1, |x: &[f64]| {
            if x[0] > 0.5 {
                f64::NAN
            } else {
                0.0
            }
        });
        let err = l1_distance(&a, &bad, &QuadratureConfig {
            samples: 1000,
            ..Default::default()
        })
        .unwrap_err();
        match err {
            QuadratureError::NaNAt { point } => assert!(point[0] > 0.5),
            other => panic!("expected NaN error, got {other:?}"),
        }
    }

    #[test]
    fn minimum_sample_count_is_enforced() {
        let a = constant_field(0.5);
        let err = l1_distance(&a, &a, &QuadratureConfig {
            samples: 99,
            ..Default::default()
        })
        .unwrap_err();
        assert!(matches!(err, QuadratureError::TooFewSamples { .. }));
    }

    #[test]
    fn grid_engine_matches_monte_carlo_on_a_smooth_integrand() {
        let a = constant_field(0.0);
        let f = FnIntegrand::new(1, |x: &[f64]| x[0]);
        let grid = l1_distance(&a, &f, &QuadratureConfig {
            method: QuadratureMethod::Grid,
            samples: 10_000,
            ..Default::default()
        })
        .unwrap();
        // Midpoint rule integrates linear functions exactly.
        assert!((grid.value - 0.5).abs() < 1e-12);
        assert!(grid.upper_confidence > grid.value);
        let err = l1_distance(
            &FnIntegrand::new(4, |_: &[f64]| 0.0),
            &FnIntegrand::new(4, |_: &[f64]| 0.0),
            &QuadratureConfig {
                method: QuadratureMethod::Grid,
                samples: 10_000,
                ..Default::default()
            },
        )
        .unwrap_err();
        assert!(matches!(
            err,
            QuadratureError::GridUnsupportedDimension { d: 4 }
        ));
    }
}
