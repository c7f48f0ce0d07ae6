//! Deterministic sampling of finite point sets.
//!
//! A sampled set is drawn in two stages: the size comes from a configurable
//! distribution on the nonnegative integers, then that many points are drawn
//! uniformly from `[0,1)^d` as 53-bit dyadic rationals. Exact duplicates
//! collapse (set semantics). Every trial reads from the ChaCha stream keyed
//! by `(seed, trial_index)`, so results are bit-reproducible regardless of
//! execution order or thread count.
//!
//! The sampler is deliberately concrete in `f64`: the dyadic-rational
//! guarantee (exact-equality comparisons are meaningful) is a property of
//! the 53-bit significand.

use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::field::{FieldError, FiniteSet};
use crate::stream::{dyadic_unit, stream_rng};

/// Errors from sampler configuration.
#[derive(Debug, Error)]
pub enum SamplerError {
    #[error("poisson mean must lie in [0, 100], got {mean}")]
    BadPoissonMean { mean: f64 },
    #[error("geometric success probability must lie in (0, 1], got {p}")]
    BadGeometricP { p: f64 },
    #[error(transparent)]
    Field(#[from] FieldError),
}

/// Distribution of the sampled set's size.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum SizeDistribution {
    /// Always exactly `k` draws.
    Fixed { k: u64 },
    /// Poisson with the given mean (admissible means: `[0, 100]`).
    Poisson { mean: f64 },
    /// Geometric on `{0, 1, 2, ...}`: `P(k) = p (1-p)^k` (failures before
    /// the first success).
    Geometric { p: f64 },
}

impl SizeDistribution {
    fn validate(&self) -> Result<(), SamplerError> {
        match *self {
            SizeDistribution::Fixed { .. } => Ok(()),
            SizeDistribution::Poisson { mean } => {
                if !(0.0..=100.0).contains(&mean) {
                    Err(SamplerError::BadPoissonMean { mean })
                } else {
                    Ok(())
                }
            }
            SizeDistribution::Geometric { p } => {
                if !(p > 0.0 && p <= 1.0) {
                    Err(SamplerError::BadGeometricP { p })
                } else {
                    Ok(())
                }
            }
        }
    }

    fn sample_size(&self, rng: &mut ChaCha8Rng) -> u64 {
        match *self {
            SizeDistribution::Fixed { k } => k,
            SizeDistribution::Poisson { mean } => {
                // Knuth's product method; mean <= 100 keeps exp(-mean) > 0.
                let limit = (-mean).exp();
                let mut k = 0u64;
                let mut product = 1.0f64;
                loop {
                    product *= dyadic_unit(rng);
                    if product <= limit {
                        return k;
                    }
                    k += 1;
                }
            }
            SizeDistribution::Geometric { p } => {
                if p >= 1.0 {
                    return 0;
                }
                // Inversion: floor(ln(1-U) / ln(1-p)) with U uniform in [0,1).
                let u = dyadic_unit(rng);
                let k = ((1.0 - u).ln() / (1.0 - p).ln()).floor();
                k as u64
            }
        }
    }
}

/// Samples one finite set from stream 0 of `seed`.
pub fn sample_finite_set(
    dist: &SizeDistribution,
    d: usize,
    seed: u64,
) -> Result<FiniteSet<f64>, SamplerError> {
    sample_finite_set_in_stream(dist, d, seed, 0)
}

/// Samples one finite set from the ChaCha stream keyed by `(seed, stream)`.
///
/// Use a distinct stream index per trial: trials are then independent and
/// individually reproducible.
pub fn sample_finite_set_in_stream(
    dist: &SizeDistribution,
    d: usize,
    seed: u64,
    stream: u64,
) -> Result<FiniteSet<f64>, SamplerError> {
    dist.validate()?;
    let mut rng = stream_rng(seed, stream);
    let k = dist.sample_size(&mut rng);
    let mut points = Vec::with_capacity(k as usize);
    for _ in 0..k {
        let point: Vec<f64> = (0..d).map(|_| dyadic_unit(&mut rng)).collect();
        points.push(point);
    }
    Ok(FiniteSet::new(d, points)?)
}

/// Result of an intersection experiment.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct IntersectionStats {
    /// Number of sampled sets.
    pub trials: u64,
    /// Number of sets that hit the target in at least one point.
    pub hits: u64,
    /// Indices of the hitting trials, in increasing order.
    pub hit_trials: Vec<u64>,
}

/// Samples `trials` sets and counts exact intersections with `target`.
///
/// A trial hits when any sampled point equals any target point bitwise.
/// Under the dyadic sampling scheme the per-coordinate collision probability
/// is `2^-53`, so hits against a fixed finite target are expected to be zero
/// for any realistic trial count.
pub fn intersection_trials(
    dist: &SizeDistribution,
    d: usize,
    target: &FiniteSet<f64>,
    trials: u64,
    seed: u64,
) -> Result<IntersectionStats, SamplerError> {
    let mut stats = IntersectionStats {
        trials,
        hits: 0,
        hit_trials: Vec::new(),
    };
    for t in 0..trials {
        let set = sample_finite_set_in_stream(dist, d, seed, t)?;
        if set.points().iter().any(|p| target.contains(p)) {
            stats.hits += 1;
            stats.hit_trials.push(t);
        }
    }
    Ok(stats)
}
