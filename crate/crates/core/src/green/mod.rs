//! Lattice Green functions of the simple random walk.
//!
//! Two conventions are kept apart and tagged on every value:
//!
//! * resolvent: `int e^{ik.x} / (lambda + 1 - phi(k)) dk / (2 pi)^d`, `lambda > 0`;
//! * generating: `sum_n s^n P(X_n = x)` for the discrete-time walk.
//!
//! They are related by `generating(x, s) = resolvent(x, (1 - s) / s) / s`.

pub mod bessel;
mod bessel_integral;
mod brillouin;
pub mod quadrature;
pub mod series;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::num::{from_usize, lit, Real};

pub use bessel_integral::{generating, green_d3, GreenD3};
pub use brillouin::{error_kernel, green_resolvent, green_resolvent_d2_line, potential_kernel, potential_kernel_tensor};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Convention {
    Resolvent,
    Generating,
}

impl std::fmt::Display for Convention {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(match self {
            Convention::Resolvent => "resolvent",
            Convention::Generating => "generating",
        })
    }
}

/// One evaluated Green kernel.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct GreenValue<T> {
    pub dim: usize,
    pub convention: Convention,
    pub x: Vec<i64>,
    /// `lambda` for the resolvent, `s` for the generating function.
    pub parameter: T,
    pub value: T,
    /// Last change of the self-convergent quadrature.
    pub est_error: T,
}

/// `phi(k) = (1/d) sum_j cos(k_j)`.
pub fn structure_function<T: Real>(k: &[T]) -> T {
    if k.is_empty() {
        return T::one();
    }
    k.iter().map(|k| k.cos()).sum::<T>() / from_usize(k.len())
}

/// `E[exp(-lambda R)]` for the first passage from `e_1` to `0` of the
/// one-dimensional walk with total jump rate `2 nu`.
pub fn hitting_transform_1d<T: Real>(nu: T, lambda: T) -> Result<T> {
    if !(nu > T::zero()) || !(lambda >= T::zero()) {
        return Err(Error::OutOfDomain("need nu > 0 and lambda >= 0".into()));
    }
    let two = lit::<T>(2.0);
    let b = lambda + two * nu;
    // (b - sqrt(b^2 - 4 nu^2)) / (2 nu), rationalized to avoid cancellation
    let root = (lambda * (lambda + lit::<T>(4.0) * nu)).sqrt();
    Ok(two * nu / (b + root))
}

/// `f(x, lambda) = f(e_1, lambda)^|x|` in one dimension.
pub fn hitting_transform_1d_at<T: Real>(x: i64, nu: T, lambda: T) -> Result<T> {
    Ok(hitting_transform_1d(nu, lambda)?.powi(x.unsigned_abs() as i32))
}
