//! Scalar abstraction: the library is generic over the floating-point type.

use nalgebra::RealField;
use num_traits::NumCast;
use rand::Rng;
use rand_distr::{Distribution, StandardNormal};

/// Floating-point scalar the numerical code is generic over.
///
/// `f32` and `f64` implement it. Everything the library needs beyond
/// [`RealField`] is the ability to draw standard-normal variates and to
/// cast to/from `f64` for tolerances and reporting.
pub trait Real: RealField + NumCast + Copy {
    /// Draw one standard-normal variate from `rng`.
    fn standard_normal<R: Rng + ?Sized>(rng: &mut R) -> Self;
}

impl Real for f64 {
    #[inline]
    fn standard_normal<R: Rng + ?Sized>(rng: &mut R) -> Self {
        StandardNormal.sample(rng)
    }
}

impl Real for f32 {
    #[inline]
    fn standard_normal<R: Rng + ?Sized>(rng: &mut R) -> Self {
        StandardNormal.sample(rng)
    }
}

/// Converts an `f64` constant into the working scalar type.
#[inline]
pub fn conv<T: Real>(v: f64) -> T {
    nalgebra::convert(v)
}

/// Converts a count into the working scalar type.
#[inline]
pub fn conv_usize<T: Real>(v: usize) -> T {
    nalgebra::convert(v as f64)
}

/// Converts the working scalar to `f64` for reporting.
#[inline]
pub fn to_f64<T: Real>(v: T) -> f64 {
    <f64 as NumCast>::from(v).expect("real scalar converts to f64")
}
