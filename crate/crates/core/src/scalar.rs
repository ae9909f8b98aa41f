//! Scalar abstraction: every solver in this crate is generic over a real
//! floating-point type.

use std::fmt::{Debug, Display};
use std::iter::Sum;
use std::ops::{AddAssign, MulAssign, SubAssign};

use num_traits::float::FloatConst;
use num_traits::{Float, FromPrimitive, ToPrimitive};

/// Floating-point scalar with the constants and conversions the solvers need.
///
/// Implemented for `f32` and `f64`. The documented tolerances throughout the
/// crate assume `f64`; `f32` runs the same code at reduced accuracy.
pub trait Real:
    Float
    + FloatConst
    + FromPrimitive
    + ToPrimitive
    + AddAssign
    + SubAssign
    + MulAssign
    + Sum
    + Debug
    + Display
    + Send
    + Sync
    + 'static
{
    /// Lossy conversion from an `f64` literal or count.
    fn of(x: f64) -> Self {
        Self::from_f64(x).expect("finite f64 converts to any Real")
    }

    /// Conversion from a grid index or dimension.
    fn of_usize(x: usize) -> Self {
        Self::from_usize(x).expect("usize converts to any Real")
    }

    /// Widening conversion for reporting (error payloads, serialization).
    fn as_f64(self) -> f64 {
        self.to_f64().expect("every Real widens to f64")
    }
}

impl Real for f32 {}
impl Real for f64 {}

/// Shorthand used throughout the crate for converting literals.
pub fn lit<T: Real>(x: f64) -> T {
    T::of(x)
}
