use std::fmt::{Debug, Display};

use num_traits::{Float, FloatConst, FromPrimitive, ToPrimitive};
use realfft::FftNum;

/// Floating-point scalar the solvers are generic over.
///
/// Implemented for `f32` and `f64`. Every tolerance quoted in this crate is
/// calibrated for `f64`; the `f32` instantiation is useful for quick looks
/// and for checking that nothing silently depends on double precision.
pub trait Real:
    Float + FloatConst + FromPrimitive + ToPrimitive + FftNum + Default + Debug + Display + Send + Sync + 'static
{
    /// Lossy conversion from an `f64` literal.
    #[inline]
    fn c(value: f64) -> Self {
        <Self as FromPrimitive>::from_f64(value).expect("f64 literal representable")
    }

    #[inline]
    fn from_usize_lossy(value: usize) -> Self {
        <Self as FromPrimitive>::from_usize(value).expect("usize representable")
    }

    #[inline]
    fn to_f64_lossy(self) -> f64 {
        <Self as ToPrimitive>::to_f64(&self).unwrap_or(f64::NAN)
    }

    /// An absolute tolerance of `value`, widened to a few hundred ulps for
    /// low-precision scalars.
    #[inline]
    fn tol(value: f64) -> Self {
        let floor = Self::epsilon() * Self::c(1e3);
        Self::c(value).max(floor)
    }
}

impl Real for f32 {}
impl Real for f64 {}
