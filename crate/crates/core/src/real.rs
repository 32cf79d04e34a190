//! Scalar abstraction: the whole library is generic over the floating-point
//! type through this trait, with `f64` as the working type of the CLI and
//! file formats.

use num_traits::{FromPrimitive, ToPrimitive};

/// Floating-point scalar usable by every algorithm in this crate.
pub trait Real: nalgebra::RealField + FromPrimitive + ToPrimitive + Copy {}

impl Real for f32 {}
impl Real for f64 {}

/// Convert an `f64` literal into the working scalar type.
#[inline]
pub fn real<T: Real>(value: f64) -> T {
    T::from_f64(value).expect("finite f64 literal")
}
