//! Label fields on the unit cube: a registry base function plus a finite
//! map of pointwise exceptions.
//!
//! Two fields are *equivalent* when they share the same base function —
//! they then differ at most on a finite (measure-zero) set of points. The
//! choice oracles in [`crate::oracle`] pick canonical representatives of
//! these classes.
//!
//! All labels take values in `[0, 1]`. Exception lookups use exact
//! floating-point equality: a point carries an exception only if its bit
//! pattern matches, which is the semantics the exact-interpolation pipeline
//! needs (sampled points are 53-bit dyadics, so collisions are deliberate,
//! never accidental).

use std::collections::{BTreeMap, BTreeSet};

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::real::{rf, Real};

/// Errors from field and point-set construction and evaluation.
#[derive(Debug, Error)]
pub enum FieldError {
    #[error("dimension must be at least 1")]
    BadDimension,
    #[error("point has {got} coordinates, expected {expected}")]
    PointLength { expected: usize, got: usize },
    #[error("coordinate {index} = {value} lies outside [0, 1]")]
    CoordinateOutOfDomain { index: usize, value: f64 },
    #[error("label {value} lies outside [0, 1]")]
    LabelOutOfRange { value: f64 },
    #[error("invalid base function: {message}")]
    BaseInvalid { message: String },
    #[error("query has {got} coordinates, field dimension is {expected}")]
    EvalDimension { expected: usize, got: usize },
}

/// Total-order wrapper for exception keys. Fields and finite sets reject
/// non-finite coordinates at construction, so `partial_cmp` is total here.
#[derive(Debug, Clone, PartialEq)]
pub(crate) struct PointKey<F: Real>(pub(crate) Vec<F>);

impl<F: Real> Eq for PointKey<F> {}

impl<F: Real> PartialOrd for PointKey<F> {
    fn partial_cmp(&self, other: &Self) -> Option<std::cmp::Ordering> {
        Some(self.cmp(other))
    }
}

impl<F: Real> Ord for PointKey<F> {
    fn cmp(&self, other: &Self) -> std::cmp::Ordering {
        for (a, b) in self.0.iter().zip(other.0.iter()) {
            match a.partial_cmp(b).expect("finite coordinates") {
                std::cmp::Ordering::Equal => continue,
                non_eq => return non_eq,
            }
        }
        self.0.len().cmp(&other.0.len())
    }
}

fn check_point<F: Real>(d: usize, point: &[F]) -> Result<(), FieldError> {
    if point.len() != d {
        return Err(FieldError::PointLength {
            expected: d,
            got: point.len(),
        });
    }
    for (index, &c) in point.iter().enumerate() {
        if !(c >= F::zero() && c <= F::one()) {
            return Err(FieldError::CoordinateOutOfDomain {
                index,
                value: c.to_f64().unwrap_or(f64::NAN),
            });
        }
    }
    Ok(())
}

fn check_label<F: Real>(value: F) -> Result<(), FieldError> {
    if !(value >= F::zero() && value <= F::one()) {
        return Err(FieldError::LabelOutOfRange {
            value: value.to_f64().unwrap_or(f64::NAN),
        });
    }
    Ok(())
}

/// A finite set of pairwise-distinct points in `[0,1]^d`.
///
/// Construction collapses exact duplicates (set semantics) while preserving
/// first-occurrence order, which keeps downstream iteration deterministic.
#[derive(Debug, Clone, PartialEq)]
pub struct FiniteSet<F: Real> {
    d: usize,
    points: Vec<Vec<F>>,
    index: BTreeSet<PointKey<F>>,
}

impl<F: Real> FiniteSet<F> {
    /// Builds a set from points in `[0,1]^d`, dropping exact duplicates.
    pub fn new(d: usize, points: Vec<Vec<F>>) -> Result<Self, FieldError> {
        if d == 0 {
            return Err(FieldError::BadDimension);
        }
        let mut kept = Vec::with_capacity(points.len());
        let mut index = BTreeSet::new();
        for point in points {
            check_point(d, &point)?;
            if index.insert(PointKey(point.clone())) {
                kept.push(point);
            }
        }
        Ok(FiniteSet {
            d,
            points: kept,
            index,
        })
    }

    /// Ambient dimension `d`.
    pub fn dim(&self) -> usize {
        self.d
    }

    /// Number of (distinct) points.
    pub fn len(&self) -> usize {
        self.points.len()
    }

    /// True when the set holds no points.
    pub fn is_empty(&self) -> bool {
        self.points.is_empty()
    }

    /// The points, in first-occurrence order.
    pub fn points(&self) -> &[Vec<F>] {
        &self.points
    }

    /// Exact (bitwise floating-point) membership test.
    pub fn contains(&self, point: &[F]) -> bool {
        point.len() == self.d && self.index.contains(&PointKey(point.to_vec()))
    }

    /// Minimum pairwise L-infinity distance; `None` for fewer than 2 points.
    pub fn min_pairwise_linf(&self) -> Option<F> {
        if self.points.len() < 2 {
            return None;
        }
        let mut best = F::infinity();
        for i in 0..self.points.len() {
            for j in (i + 1)..self.points.len() {
                let mut dist = F::zero();
                for (a, b) in self.points[i].iter().zip(self.points[j].iter()) {
                    let diff = (*a - *b).abs();
                    if diff > dist {
                        dist = diff;
                    }
                }
                if dist < best {
                    best = dist;
                }
            }
        }
        Some(best)
    }
}

fn default_amplitude<F: Real>() -> F {
    F::one()
}

fn default_offset<F: Real>() -> F {
    F::zero()
}

fn default_width<F: Real>() -> F {
    rf(0.35)
}

/// The registry of base functions. Each variant has a stable identifier
/// (its serialized form, e.g. `{"base":"sin_sq","params":{...}}`), and two
/// fields are equivalent exactly when these identifiers coincide.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "base", content = "params", rename_all = "snake_case")]
#[serde(bound = "F: Real")]
pub enum BaseFunction<F: Real> {
    /// Constant label `value`.
    Constant { value: F },
    /// Affine label `intercept + weights . x`, validated to stay in `[0,1]`.
    Affine { weights: Vec<F>, intercept: F },
    /// Separable sinusoid `offset + amplitude * prod_l sin^2(pi x_l)`.
    SinSq {
        #[serde(default = "default_amplitude")]
        amplitude: F,
        #[serde(default = "default_offset")]
        offset: F,
    },
    /// Gaussian bump `exp(-|x - center|^2 / (2 width^2))`.
    RadialBump {
        center: Vec<F>,
        #[serde(default = "default_width")]
        width: F,
    },
    /// Axis-aligned step: `low` where `x[axis] < threshold`, else `high`.
    Step {
        axis: usize,
        threshold: F,
        low: F,
        high: F,
    },
    /// Non-integrable stand-in: the indicator of coarse dyadic rationals
    /// (every coordinate a multiple of 2^-16). Evaluable everywhere with
    /// values in {0, 1}; fields using it are declared `integrable = false`
    /// and the approximation layer degrades to the zero network.
    NonIntegrable,
}

impl<F: Real> BaseFunction<F> {
    /// Validates parameters against dimension `d`, including that the range
    /// stays within `[0, 1]`.
    pub fn validate(&self, d: usize) -> Result<(), FieldError> {
        let invalid = |message: String| Err(FieldError::BaseInvalid { message });
        match self {
            BaseFunction::Constant { value } => {
                check_label(*value)?;
                Ok(())
            }
            BaseFunction::Affine { weights, intercept } => {
                if weights.len() != d {
                    return invalid(format!("affine has {} weights for d = {d}", weights.len()));
                }
                if !intercept.is_finite() || weights.iter().any(|w| !w.is_finite()) {
                    return invalid("affine parameters must be finite".into());
                }
                let zero = F::zero();
                let lo = weights.iter().fold(*intercept, |acc, &w| {
                    acc + if w < zero { w } else { zero }
                });
                let hi = weights.iter().fold(*intercept, |acc, &w| {
                    acc + if w > zero { w } else { zero }
                });
                if lo < zero || hi > F::one() {
                    return invalid(format!(
                        "affine range [{lo}, {hi}] leaves [0,1] on the unit cube"
                    ));
                }
                Ok(())
            }
            BaseFunction::SinSq { amplitude, offset } => {
                if !(*amplitude >= F::zero() && *offset >= F::zero()) {
                    return invalid("sin_sq needs amplitude >= 0 and offset >= 0".into());
                }
                if *amplitude + *offset > F::one() {
                    return invalid("sin_sq needs amplitude + offset <= 1".into());
                }
                Ok(())
            }
            BaseFunction::RadialBump { center, width } => {
                if center.len() != d {
                    return invalid(format!(
                        "radial_bump center has {} coordinates for d = {d}",
                        center.len()
                    ));
                }
                check_point(d, center)?;
                if *width <= F::zero() || !width.is_finite() {
                    return invalid("radial_bump needs a positive finite width".into());
                }
                Ok(())
            }
            BaseFunction::Step {
                axis,
                threshold,
                low,
                high,
            } => {
                if *axis >= d {
                    return invalid(format!("step axis {axis} out of range for d = {d}"));
                }
                if !threshold.is_finite() {
                    return invalid("step threshold must be finite".into());
                }
                check_label(*low)?;
                check_label(*high)?;
                Ok(())
            }
            BaseFunction::NonIntegrable => Ok(()),
        }
    }

    /// Evaluates the base at `x` (dimension must already be validated).
    pub fn evaluate(&self, x: &[F]) -> F {
        match self {
            BaseFunction::Constant { value } => *value,
            BaseFunction::Affine { weights, intercept } => weights
                .iter()
                .zip(x.iter())
                .fold(*intercept, |acc, (&w, &v)| acc + w * v),
            BaseFunction::SinSq { amplitude, offset } => {
                let pi = rf::<F>(std::f64::consts::PI);
                let product = x.iter().fold(F::one(), |acc, &v| {
                    let s = (pi * v).sin();
                    acc * s * s
                });
                *offset + *amplitude * product
            }
            BaseFunction::RadialBump { center, width } => {
                let two = rf::<F>(2.0);
                let r2 = center
                    .iter()
                    .zip(x.iter())
                    .fold(F::zero(), |acc, (&c, &v)| acc + (v - c) * (v - c));
                (-r2 / (two * *width * *width)).exp()
            }
            BaseFunction::Step {
                axis,
                threshold,
                low,
                high,
            } => {
                if x[*axis] < *threshold {
                    *low
                } else {
                    *high
                }
            }
            BaseFunction::NonIntegrable => {
                let scale = rf::<F>(65536.0);
                let coarse_dyadic = x.iter().all(|&v| (v * scale).fract() == F::zero());
                if coarse_dyadic {
                    F::one()
                } else {
                    F::zero()
                }
            }
        }
    }

    /// Stable identifier: the canonical serialized form.
    pub fn identifier(&self) -> String {
        serde_json::to_string(self).expect("base functions serialize")
    }
}

/// A label field: base function, finite exception map, integrability flag.
#[derive(Debug, Clone, PartialEq)]
pub struct LabelField<F: Real> {
    d: usize,
    base: BaseFunction<F>,
    exceptions: BTreeMap<PointKey<F>, F>,
    integrable: bool,
}

impl<F: Real> LabelField<F> {
    /// Builds a field. Exception points must lie in `[0,1]^d` and values in
    /// `[0,1]`; a later duplicate point overrides an earlier one.
    pub fn new(
        d: usize,
        base: BaseFunction<F>,
        exceptions: impl IntoIterator<Item = (Vec<F>, F)>,
        integrable: bool,
    ) -> Result<Self, FieldError> {
        if d == 0 {
            return Err(FieldError::BadDimension);
        }
        base.validate(d)?;
        let mut map = BTreeMap::new();
        for (point, value) in exceptions {
            check_point(d, &point)?;
            check_label(value)?;
            map.insert(PointKey(point), value);
        }
        Ok(LabelField {
            d,
            base,
            exceptions: map,
            integrable,
        })
    }

    /// Ambient dimension `d`.
    pub fn dim(&self) -> usize {
        self.d
    }

    /// The base function.
    pub fn base(&self) -> &BaseFunction<F> {
        &self.base
    }

    /// Whether the field is declared integrable.
    pub fn integrable(&self) -> bool {
        self.integrable
    }

    /// Number of exception points.
    pub fn exception_count(&self) -> usize {
        self.exceptions.len()
    }

    /// Exceptions in deterministic (lexicographic point) order.
    pub fn exceptions(&self) -> impl Iterator<Item = (&[F], F)> {
        self.exceptions.iter().map(|(k, &v)| (k.0.as_slice(), v))
    }

    /// The label at `x`: the exception value on exact match, else the base.
    pub fn value_at(&self, x: &[F]) -> Result<F, FieldError> {
        if x.len() != self.d {
            return Err(FieldError::EvalDimension {
                expected: self.d,
                got: x.len(),
            });
        }
        if let Some(&v) = self.exceptions.get(&PointKey(x.to_vec())) {
            return Ok(v);
        }
        Ok(self.base.evaluate(x))
    }

    /// Returns a copy with the labels on `x` overwritten by `0.0` (masking).
    /// Base and integrability flag are unchanged.
    pub fn mask(&self, x: &FiniteSet<F>) -> Result<LabelField<F>, FieldError> {
        if x.dim() != self.d {
            return Err(FieldError::EvalDimension {
                expected: self.d,
                got: x.dim(),
            });
        }
        let mut masked = self.clone();
        for point in x.points() {
            masked.exceptions.insert(PointKey(point.clone()), F::zero());
        }
        Ok(masked)
    }

    /// Class equivalence: same dimension and same base identifier. Fields in
    /// one class differ only on finitely many points.
    pub fn equivalent(&self, other: &LabelField<F>) -> bool {
        self.d == other.d && self.base == other.base
    }
}
