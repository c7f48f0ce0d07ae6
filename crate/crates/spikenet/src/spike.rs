//! Spike networks: compactly supported bumps that interpolate one value.
//!
//! A spike with center `k`, residual `r`, and resolution `n` realizes
//!
//! ```text
//! phi(x) = r * max(0, 1 - n * |x - k|_1)
//! ```
//!
//! as a ReLU network with layer widths `(d, 3d, 1, 1)`. The function equals
//! the tent-product construction
//! `r * relu( sum_l [relu(n(x_l-k_l)+1) - 2 relu(n(x_l-k_l)) + relu(n(x_l-k_l)-1)] - (d-1) )`
//! everywhere: writing `a_l = 1 - |n(x_l-k_l)|`, both reduce to
//! `r * max(0, sum_l a_l - (d-1))` because whenever some `a_l < 0` the inner
//! sums are already nonpositive in both forms.
//!
//! The circuit below computes the L1-ball normal form directly
//! (`1 - sum_l (relu(u_l) + relu(-u_l))` with `u_l = n(x_l - k_l)`), because
//! it is exactly zero in floating-point arithmetic outside the support: each
//! `|u_l|` is computed without cancellation, and once the accumulated sum
//! reaches 1 the monotone rounding of `1 - sum` cannot produce a positive
//! pre-activation. The hinge-difference form leaves ±1-ulp residues that
//! break exact-zero guarantees in low dimensions.
//!
//! Hidden-layer rows come in triples per coordinate: `relu(u_l)`,
//! `relu(-u_l)`, and the outer hinge `relu(u_l - 1)` (weight zero downstream),
//! keeping the pinned `(d, 3d, 1, 1)` shape.

use ndarray::{Array1, Array2};
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::field::FiniteSet;
use crate::real::{rf, ru, Real};
use crate::relu_net::{AffineLayer, NetworkError, ReluNetwork};

/// Largest admissible spike resolution (`2^40`); beyond this the search for
/// a budget-satisfying resolution reports overflow instead of looping.
pub const MAX_RESOLUTION: u64 = 1 << 40;

/// Errors from spike construction and resolution selection.
#[derive(Debug, Error)]
pub enum SpikeError {
    #[error("spike resolution {resolution} must be a nonzero power of two")]
    BadResolution { resolution: u64 },
    #[error("spike center must lie in [0,1]^d; coordinate {index} is {value}")]
    CenterOutOfDomain { index: usize, value: f64 },
    #[error("spike center has no coordinates")]
    EmptyCenter,
    #[error("spike residual must be finite")]
    NonFiniteResidual,
    #[error("resolution selection needs a nonempty point set")]
    EmptySet,
    #[error("got {got} residuals for {expected} points")]
    ResidualCount { expected: usize, got: usize },
    #[error("epsilon must be positive and finite, got {value}")]
    BadEpsilon { value: f64 },
    #[error("no resolution up to 2^40 satisfies the budget and separation constraints")]
    ResolutionOverflow,
    #[error(transparent)]
    Network(#[from] NetworkError),
}

/// Specification of one spike: where it sits, what it adds, how narrow it is.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(bound = "F: Real")]
pub struct SpikeSpec<F: Real> {
    /// Center `k` in `[0,1]^d`.
    pub center: Vec<F>,
    /// Value the spike contributes at its center.
    pub residual: F,
    /// Resolution `n` (a power of two); the support is the open L1 ball of
    /// radius `1/n` around the center.
    pub resolution: u64,
}

impl<F: Real> SpikeSpec<F> {
    fn validate(&self) -> Result<(), SpikeError> {
        if self.center.is_empty() {
            return Err(SpikeError::EmptyCenter);
        }
        for (index, &c) in self.center.iter().enumerate() {
            let value = c.to_f64().unwrap_or(f64::NAN);
            if !(c >= F::zero() && c <= F::one()) {
                return Err(SpikeError::CenterOutOfDomain { index, value });
            }
        }
        if !self.residual.is_finite() {
            return Err(SpikeError::NonFiniteResidual);
        }
        if self.resolution == 0 || !self.resolution.is_power_of_two() {
            return Err(SpikeError::BadResolution {
                resolution: self.resolution,
            });
        }
        Ok(())
    }
}

/// Builds the spike network for `spec`. Layer widths are `(d, 3d, 1, 1)`.
///
/// Exactness properties (relied on by the predictor):
/// * `evaluate(center) == residual` exactly — every first-layer pre-activation
///   cancels to zero at the center, so the output is `residual * 1`;
/// * `evaluate(x) == 0.0` exactly whenever `|x - k|_inf >= 1/n` (up to within
///   one ulp of the support boundary).
pub fn build_spike<F: Real>(spec: &SpikeSpec<F>) -> Result<ReluNetwork<F>, SpikeError> {
    spec.validate()?;
    let d = spec.center.len();
    let n = ru::<F>(spec.resolution);
    let one = F::one();

    // T1: rows (relu(u_l), relu(-u_l), relu(u_l - 1)) per coordinate,
    // u_l = n * (x_l - k_l).
    let mut w1 = Array2::zeros((3 * d, d));
    let mut b1 = Array1::zeros(3 * d);
    for l in 0..d {
        let nk = n * spec.center[l];
        w1[(3 * l, l)] = n;
        b1[3 * l] = -nk;
        w1[(3 * l + 1, l)] = -n;
        b1[3 * l + 1] = nk;
        w1[(3 * l + 2, l)] = n;
        b1[3 * l + 2] = -nk - one;
    }

    // T2: 1 - sum_l (relu(u_l) + relu(-u_l)); outer hinges carry weight zero.
    let mut w2 = Array2::zeros((1, 3 * d));
    for l in 0..d {
        w2[(0, 3 * l)] = -one;
        w2[(0, 3 * l + 1)] = -one;
    }
    let b2 = Array1::from(vec![one]);

    // T3: scale by the residual.
    let mut w3 = Array2::zeros((1, 1));
    w3[(0, 0)] = spec.residual;
    let b3 = Array1::from(vec![F::zero()]);

    Ok(ReluNetwork::new(
        d,
        vec![
            AffineLayer::new(w1, b1)?,
            AffineLayer::new(w2, b2)?,
            AffineLayer::new(w3, b3)?,
        ],
    )?)
}

/// Exact L1 mass of the spike over `R^d`:
/// `|r| * 2^d / (n^d * (d+1)!)`.
///
/// For spikes whose support lies inside `[0,1]^d` this is the exact integral
/// of `|phi|` over the cube; for centers within `1/n` of the boundary it is
/// an upper bound (part of the mass falls outside).
pub fn spike_l1_bound<F: Real>(spec: &SpikeSpec<F>) -> F {
    let d = spec.center.len() as i32;
    let mut factorial = 1.0f64;
    for i in 2..=(d as u64 + 1) {
        factorial *= i as f64;
    }
    let geometry = 2f64.powi(d) / ((spec.resolution as f64).powi(d) * factorial);
    spec.residual.abs() * rf::<F>(geometry)
}

/// Selects the smallest power-of-two resolution `n` such that
///
/// * every spike with a nonzero residual has
///   `spike_l1_bound(k, r_k, n) < epsilon / (2 |X|)`, and
/// * if `|X| >= 2`, the supports are pairwise disjoint with margin:
///   `2/n <` the minimum pairwise L-infinity distance between points of `X`.
///
/// Both inequalities are strict. With no nonzero residuals and a single
/// point both conditions are vacuous and the result is `1`.
pub fn select_resolution<F: Real>(
    x: &FiniteSet<F>,
    residuals: &[F],
    epsilon: F,
) -> Result<u64, SpikeError> {
    if x.is_empty() {
        return Err(SpikeError::EmptySet);
    }
    if residuals.len() != x.len() {
        return Err(SpikeError::ResidualCount {
            expected: x.len(),
            got: residuals.len(),
        });
    }
    if epsilon <= F::zero() || !epsilon.is_finite() {
        return Err(SpikeError::BadEpsilon {
            value: epsilon.to_f64().unwrap_or(f64::NAN),
        });
    }

    let per_spike_cap = epsilon / (rf::<F>(2.0) * ru::<F>(x.len() as u64));
    let min_distance = x.min_pairwise_linf();

    let mut n: u64 = 1;
    loop {
        let budget_ok = x.points().iter().zip(residuals.iter()).all(|(k, &r)| {
            if r == F::zero() {
                return true;
            }
            let spec = SpikeSpec {
                center: k.clone(),
                residual: r,
                resolution: n,
            };
            spike_l1_bound(&spec) < per_spike_cap
        });
        let distance_ok = match min_distance {
            Some(delta) => rf::<F>(2.0) / ru::<F>(n) < delta,
            None => true, // fewer than two points
        };
        if budget_ok && distance_ok {
            return Ok(n);
        }
        if n >= MAX_RESOLUTION {
            return Err(SpikeError::ResolutionOverflow);
        }
        n *= 2;
    }
}
