//! Scalar abstraction for the numeric kernels.
//!
//! All floating-point math in this crate is generic over [`Real`] so the same
//! kernels run in `f32` or `f64`. The CLI and the acceptance suite use `f64`.

use std::fmt::{Debug, Display};
use std::iter::Sum;

use num_traits::{Float, FromPrimitive, NumAssign, ToPrimitive};

/// Floating-point scalar: `f32` or `f64`.
pub trait Real:
    Float + FromPrimitive + ToPrimitive + NumAssign + Sum + Debug + Display + Default + 'static
{
}

impl<T> Real for T where
    T: Float + FromPrimitive + ToPrimitive + NumAssign + Sum + Debug + Display + Default + 'static
{
}

/// Convert an `f64` constant into the working scalar.
#[inline]
pub fn real<F: Real>(v: f64) -> F {
    F::from_f64(v).expect("constant not representable in scalar type")
}

/// Convert a `usize` count into the working scalar.
#[inline]
pub fn real_of_usize<F: Real>(n: usize) -> F {
    F::from_usize(n).expect("count not representable in scalar type")
}
