//! Scalar abstraction shared by the analytic and deterministic numerics.

use std::fmt::{Debug, Display};
use std::iter::Sum;

use num_traits::{Float, FloatConst, FromPrimitive, ToPrimitive};

/// Floating point scalar the deterministic solvers are generic over.
pub trait Real:
    Float + FloatConst + FromPrimitive + ToPrimitive + Sum + Debug + Display + Send + Sync + 'static
{
    /// Default relative stopping tolerance for self-convergent quadrature.
    fn quadrature_tolerance() -> Self;
    /// Default truncation tolerance for Poisson-weighted series.
    fn series_tolerance() -> Self;
}

impl Real for f64 {
    fn quadrature_tolerance() -> Self {
        1e-10
    }
    fn series_tolerance() -> Self {
        1e-12
    }
}

impl Real for f32 {
    fn quadrature_tolerance() -> Self {
        2e-5
    }
    fn series_tolerance() -> Self {
        1e-6
    }
}

/// Converts an `f64` literal into `T`.
#[inline]
pub fn lit<T: Real>(x: f64) -> T {
    T::from_f64(x).expect("literal representable in scalar type")
}

/// Converts a count into `T`.
#[inline]
pub fn from_usize<T: Real>(n: usize) -> T {
    T::from_usize(n).expect("count representable in scalar type")
}
