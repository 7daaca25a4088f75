//! Floating-point scalar abstraction.
//!
//! All model and solver math is written against [`Scalar`], so the same code
//! runs at `f32` or `f64`. The shipped CLI, the experiment harness defaults,
//! and every stated tolerance assume `f64`; see the crate-root type aliases.

use std::fmt;

use num_traits::{Float, FromPrimitive, ToPrimitive};

/// Floating-point scalar type the model, physics, and solver are generic over.
pub trait Scalar:
    Float + FromPrimitive + ToPrimitive + fmt::Debug + fmt::Display + Send + Sync + 'static
{
}

impl Scalar for f32 {}
impl Scalar for f64 {}

/// Converts an `f64` constant into the working scalar type.
pub(crate) fn lit<S: Scalar>(value: f64) -> S {
    S::from_f64(value).expect("f64 constant must be representable in the scalar type")
}

/// Converts an integer count into the working scalar type.
pub(crate) fn count<S: Scalar>(value: u64) -> S {
    S::from_u64(value).expect("count must be representable in the scalar type")
}
