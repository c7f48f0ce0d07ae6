//! Choice oracles: canonical representatives of field equivalence classes.
//!
//! Fields with the same base function form an equivalence class (they agree
//! off a finite set). An oracle maps any member of a class to one fixed
//! representative of that class. Class consistency — the output depends only
//! on the class, never on the particular member — is the load-bearing
//! property: it is what lets the pipeline recover labels that masking
//! deleted.
//!
//! Two oracles are provided:
//! * `strip_exceptions` returns the exception-free member (the pure base);
//! * `adversarial` returns the member carrying a fixed corruption map,
//!   demonstrating that *any* fixed representative works almost surely while
//!   failing exactly where a sampled set hits the corruption points.

use serde::{Deserialize, Serialize};

use crate::field::{FieldError, LabelField};
use crate::real::Real;

/// One corrupted point in an adversarial oracle.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(bound = "F: Real")]
pub struct CorruptionEntry<F: Real> {
    pub point: Vec<F>,
    pub value: F,
}

/// A choice oracle over field equivalence classes.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "oracle", rename_all = "snake_case")]
#[serde(bound = "F: Real")]
pub enum ChoiceOracle<F: Real> {
    /// Representative with an empty exception map.
    StripExceptions,
    /// Representative carrying a fixed exception map (the corruption).
    Adversarial { corruption: Vec<CorruptionEntry<F>> },
}

impl<F: Real> ChoiceOracle<F> {
    /// Returns the canonical representative of `field`'s equivalence class.
    ///
    /// Only the base function and integrability flag of `field` are read, so
    /// the result is identical for every member of the class.
    pub fn representative(&self, field: &LabelField<F>) -> Result<LabelField<F>, FieldError> {
        match self {
            ChoiceOracle::StripExceptions => {
                LabelField::new(field.dim(), field.base().clone(), [], field.integrable())
            }
            ChoiceOracle::Adversarial { corruption } => LabelField::new(
                field.dim(),
                field.base().clone(),
                corruption.iter().map(|e| (e.point.clone(), e.value)),
                field.integrable(),
            ),
        }
    }

    /// The corruption points, if any (empty for `strip_exceptions`).
    pub fn corruption_points(&self) -> Vec<Vec<F>> {
        match self {
            ChoiceOracle::StripExceptions => Vec::new(),
            ChoiceOracle::Adversarial { corruption } => {
                corruption.iter().map(|e| e.point.clone()).collect()
            }
        }
    }
}
