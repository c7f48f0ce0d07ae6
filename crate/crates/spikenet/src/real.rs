//! Scalar abstraction for all numerical code in this crate.
//!
//! Everything numeric is written against [`Real`], a small trait alias over
//! `num_traits::Float` that adds the conversions and auto-trait bounds the
//! library needs. `f32` and `f64` implement it; the crate-root type aliases
//! pin `f64` for the concrete pipeline.

use std::fmt::{Debug, Display};
use std::ops::AddAssign;

use num_traits::{Float, FromPrimitive};
use serde::{de::DeserializeOwned, Serialize};

/// Floating-point scalar usable throughout the crate.
///
/// The bound set is exactly what the library needs: IEEE float semantics
/// (`Float`), lossless construction from small integers and literals
/// (`FromPrimitive`), in-place accumulation for the array kernels
/// (`AddAssign`), printing for diagnostics, serde support for the wire
/// formats, and thread-safety for the parallel quadrature paths.
pub trait Real:
    Float
    + FromPrimitive
    + AddAssign
    + Debug
    + Display
    + Send
    + Sync
    + Serialize
    + DeserializeOwned
    + 'static
{
}

impl<T> Real for T where
    T: Float
        + FromPrimitive
        + AddAssign
        + Debug
        + Display
        + Send
        + Sync
        + Serialize
        + DeserializeOwned
        + 'static
{
}

/// Converts an `f64` constant into `F`, panicking only on values outside the
/// target type's range (never the case for the in-range constants used here).
pub fn rf<F: Real>(x: f64) -> F {
    F::from_f64(x).expect("constant representable in target scalar type")
}

/// Converts a `u64` into `F` the same way.
pub fn ru<F: Real>(x: u64) -> F {
    F::from_u64(x).expect("integer representable in target scalar type")
}
