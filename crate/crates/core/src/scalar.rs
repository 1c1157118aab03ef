//! Scalar abstraction shared by every numerical routine in the crate.

use std::fmt::{Debug, Display};
use std::iter::Sum;

use num_traits::{Float, FloatConst, FromPrimitive, ToPrimitive};
use rustfft::FftNum;
use serde::de::DeserializeOwned;
use serde::Serialize;

/// Floating-point type the crate can compute with: `f32` or `f64`.
pub trait Real:
    Float
    + FloatConst
    + FromPrimitive
    + ToPrimitive
    + FftNum
    + Sum
    + Default
    + Debug
    + Display
    + Send
    + Sync
    + Serialize
    + DeserializeOwned
    + 'static
{
    /// Smallest relative tolerance the bisection solvers should be asked for.
    fn tolerance_floor() -> Self {
        Self::epsilon() * lit(64.0)
    }
}

impl Real for f32 {}
impl Real for f64 {}

/// Converts an `f64` literal into the working scalar.
#[inline]
pub fn lit<T: Real>(x: f64) -> T {
    T::from_f64(x).expect("literal representable in scalar type")
}

/// Converts an integer into the working scalar.
#[inline]
pub fn from_i64<T: Real>(x: i64) -> T {
    T::from_i64(x).expect("integer representable in scalar type")
}

/// Converts a `usize` into the working scalar.
#[inline]
pub fn from_usize<T: Real>(x: usize) -> T {
    T::from_usize(x).expect("integer representable in scalar type")
}

/// `2^k` for an integer `k`, computed exactly for the exponents used here.
#[inline]
pub fn pow2<T: Real>(k: i32) -> T {
    lit::<T>(2.0).powi(k)
}
