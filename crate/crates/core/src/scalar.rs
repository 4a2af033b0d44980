//! Scalar abstraction for the numerical kernels.
//!
//! Special functions, regression surfaces and the least-squares solver are
//! written once against [`Scalar`] and instantiated for `f32` and `f64`.
//! Monte Carlo counting and quadrature run in `f64` only.

use std::fmt::{Debug, Display};

use num_traits::{Float, FloatConst, FromPrimitive, NumAssign, ToPrimitive};

/// Floating-point types accepted by the generic kernels.
pub trait Scalar:
    Float
    + FloatConst
    + FromPrimitive
    + ToPrimitive
    + NumAssign
    + Debug
    + Display
    + Default
    + Send
    + Sync
    + 'static
{
    /// Converts an `f64` literal into this type.
    #[inline]
    fn lit(x: f64) -> Self {
        Self::from_f64(x).expect("f64 literal representable in scalar type")
    }

    /// Converts a count or index into this type.
    #[inline]
    fn from_count(n: usize) -> Self {
        Self::from_usize(n).expect("count representable in scalar type")
    }

    #[inline]
    fn to_f64_lossy(self) -> f64 {
        self.to_f64().unwrap_or(f64::NAN)
    }
}

impl<T> Scalar for T where
    T: Float
        + FloatConst
        + FromPrimitive
        + ToPrimitive
        + NumAssign
        + Debug
        + Display
        + Default
        + Send
        + Sync
        + 'static
{
}
