//! Floating-point scalar abstraction.
//!
//! Every numeric routine in the crate is generic over [`Scalar`] so the same
//! code runs in `f32` or `f64`. Configuration values stay `f64` and are
//! converted at the boundary.

use std::fmt::{Debug, Display};
use std::iter::Sum;

use num_traits::{Float, FromPrimitive, NumAssign, ToPrimitive};

/// Floating-point scalar: `f32` or `f64`.
pub trait Scalar:
    Float + FromPrimitive + ToPrimitive + NumAssign + Sum + Display + Debug + Send + Sync + 'static
{
}

impl<T> Scalar for T where
    T: Float
        + FromPrimitive
        + ToPrimitive
        + NumAssign
        + Sum
        + Display
        + Debug
        + Send
        + Sync
        + 'static
{
}

/// Convert an `f64` configuration constant into the working scalar.
#[inline]
pub fn sc<F: Scalar>(x: f64) -> F {
    F::from_f64(x).expect("f64 constant convertible to scalar")
}

/// Convert a count into the working scalar.
#[inline]
pub fn sc_usize<F: Scalar>(x: usize) -> F {
    F::from_usize(x).expect("usize convertible to scalar")
}
