//! Generating-function Green kernels through the Bessel representation
//!
//! `G(x, s) = (1/s) int_0^inf e^{-(1-s) v / s} prod_j e^{-v/d} I_{|x_j|}(v/d) dv`,
//!
//! which follows from Poissonizing the step count. At `s = 1` (only for
//! `d >= 3`) the integrand decays like `v^{-d/2}` and the tail beyond the
//! last panel is integrated term by term from the large-argument expansion.

use serde::{Deserialize, Serialize};

use super::bessel::{asymptotic_coefficients, scaled_bessel_i};
use super::quadrature::{adaptive, MAX_NODES_PER_PANEL};
use super::{Convention, GreenValue};
use crate::error::{Error, Result};
use crate::num::{from_usize, lit, Real};

/// Largest integration range accepted for `s < 1`.
const MAX_RANGE: f64 = 1e6;
/// Terms kept in the product expansion of the tail.
const TAIL_TERMS: usize = 24;

/// Three-or-more-dimensional Green function at `s = 1`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct GreenD3<T> {
    pub x: Vec<i64>,
    /// Expected number of visits of the discrete-time walk.
    pub discrete: T,
    /// Expected occupation time of the walk with total jump rate `2d`:
    /// `discrete / (2d)`.
    pub occupation: T,
    pub est_error: T,
}

/// Generating-convention kernel `sum_n s^n P(X_n = x)`; `s = 1` allowed for `d >= 3`.
pub fn generating<T: Real>(d: usize, x: &[i64], s: T) -> Result<GreenValue<T>> {
    if !(1..=crate::model::MAX_DIM).contains(&d) {
        return Err(Error::OutOfDomain(format!("dimension {d} not supported")));
    }
    if x.len() != d {
        return Err(Error::DimensionMismatch { state: x.len(), params: d });
    }
    if !(s > T::zero() && s <= T::one()) {
        return Err(Error::OutOfDomain("generating parameter must lie in (0, 1]".into()));
    }
    if s == T::one() && d < 3 {
        return Err(Error::OutOfDomain("generating function diverges at s = 1 for d < 3".into()));
    }
    let orders: Vec<u32> = x.iter().map(|c| c.unsigned_abs() as u32).collect();
    let max_order = orders.iter().copied().max().unwrap_or(0) as f64;
    let dd = from_usize::<T>(d);
    let beta = (T::one() - s) / s;
    let tol = T::quadrature_tolerance();
    let range = if s < T::one() {
        // e^{-beta V} / beta below the tolerance
        let b = beta.to_f64().unwrap_or(0.0);
        let v = (1.0 / (b * 1e-3 * tol.to_f64().unwrap_or(1e-10))).ln().max(1.0) / b;
        if v > MAX_RANGE {
            return Err(Error::OutOfDomain("generating parameter too close to 1".into()));
        }
        v.max(8.0)
    } else {
        d as f64 * (200.0 + 8.0 * max_order * max_order)
    };
    // first panel no wider than the decay length 1 / beta
    let first = match beta.to_f64() {
        Some(b) if b > 1.0 => 0.5 / b,
        _ => 0.5,
    };
    let mut breakpoints = vec![T::zero(), lit(first)];
    let mut b = 2.0 * first;
    while b < range {
        breakpoints.push(lit(b));
        b *= 2.0;
    }
    breakpoints.push(lit(range));
    let integrand = |v: T| -> T {
        let y = v / dd;
        let mut p = (-beta * v).exp();
        let mut cache: [(u32, T); 5] = [(u32::MAX, T::zero()); 5];
        for (j, &n) in orders.iter().enumerate() {
            let f = match cache[..j].iter().find(|(m, _)| *m == n) {
                Some(&(_, f)) => f,
                None => scaled_bessel_i(n, y),
            };
            cache[j] = (n, f);
            p = p * f;
        }
        p
    };
    let (prev, body, ok) = adaptive(&breakpoints, tol * lit(1e-2), tol * lit(1e-8), MAX_NODES_PER_PANEL, |nodes, weights| {
        nodes.iter().zip(weights).map(|(&v, &w)| w * integrand(v)).sum()
    });
    if !ok {
        return Err(Error::NonConvergence {
            what: "Bessel integral".into(),
            previous: prev.to_f64().unwrap_or(f64::NAN),
            last: body.to_f64().unwrap_or(f64::NAN),
        });
    }
    let tail = if s == T::one() { tail_integral(&orders, lit(range)) } else { T::zero() };
    let value = (body + tail) / s;
    Ok(GreenValue {
        dim: d,
        convention: Convention::Generating,
        x: x.to_vec(),
        parameter: s,
        value,
        est_error: (body - prev).abs() / s,
    })
}

/// `int_V^inf prod_j e^{-v/d} I_{n_j}(v/d) dv` from the product of the
/// large-argument expansions.
fn tail_integral<T: Real>(orders: &[u32], v: T) -> T {
    let d = orders.len();
    let dd = from_usize::<T>(d);
    let y = v / dd;
    let mut product = vec![T::zero(); TAIL_TERMS];
    product[0] = T::one();
    for &n in orders {
        let c = asymptotic_coefficients::<T>(n, TAIL_TERMS);
        let mut next = vec![T::zero(); TAIL_TERMS];
        for (i, &a) in product.iter().enumerate() {
            for (j, &b) in c.iter().enumerate().take(TAIL_TERMS - i) {
                next[i + j] = next[i + j] + a * b;
            }
        }
        product = next;
    }
    // int_Y^inf d (2 pi y)^{-d/2} y^{-m} dy
    let half_d = dd * lit(0.5);
    let scale = dd * (lit::<T>(2.0) * T::PI()).powf(-half_d);
    let mut total = T::zero();
    for (m, &c) in product.iter().enumerate() {
        let p = half_d + from_usize::<T>(m) - T::one();
        let term = c * y.powf(-p) / p;
        total = total + term;
        if term.abs() < T::epsilon() * total.abs() * lit(1e-2) {
            break;
        }
    }
    scale * total
}

/// `G_d(x)` at `s = 1` in both normalizations, `d >= 3`.
pub fn green_d3<T: Real>(x: &[i64]) -> Result<GreenD3<T>> {
    let d = x.len();
    if d < 3 {
        return Err(Error::OutOfDomain("green_d3 needs d >= 3".into()));
    }
    let g = generating::<T>(d, x, T::one())?;
    Ok(GreenD3 {
        x: x.to_vec(),
        discrete: g.value,
        occupation: g.value / from_usize::<T>(2 * d),
        est_error: g.est_error,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::green::series;

    #[test]
    fn watson_constant() {
        let g = green_d3::<f64>(&[0, 0, 0]).unwrap();
        assert!((g.discrete - 1.516_386_059_151_978).abs() < 1e-11, "{}", g.discrete);
        assert!((g.occupation - g.discrete / 6.0).abs() < 1e-16);
        let oracle = series::return_series_d3(300);
        assert!((g.discrete - oracle).abs() < 2e-6);
    }

    #[test]
    fn return_probability() {
        let g0 = green_d3::<f64>(&[0, 0, 0]).unwrap().discrete;
        let g1 = green_d3::<f64>(&[1, 0, 0]).unwrap().discrete;
        // G(0) = 1 + G(e_1) and G(e_1)/G(0) = 1 - 1/G(0)
        assert!((g0 - 1.0 - g1).abs() < 1e-10);
        assert!((g1 / g0 - 0.340_537_3).abs() < 1e-7);
    }

    #[test]
    fn decays_along_an_axis() {
        let values: Vec<f64> = (0..8).map(|k| green_d3::<f64>(&[k, 0, 0]).unwrap().discrete).collect();
        assert!(values.windows(2).all(|w| w[1] < w[0]));
        // far field 3 / (2 pi |x|)
        let far = 3.0 / (2.0 * std::f64::consts::PI * 7.0);
        assert!((values[7] - far).abs() < 0.01 * far);
    }

    #[test]
    fn harmonic_off_origin_d3() {
        let x = [2i64, 1, 0];
        let g = |y: [i64; 3]| green_d3::<f64>(&y).unwrap().discrete;
        let mut avg = 0.0;
        for j in 0..3 {
            for s in [1, -1] {
                let mut y = x;
                y[j] += s;
                avg += g(y) / 6.0;
            }
        }
        assert!((avg - g(x)).abs() < 1e-10);
    }

    #[test]
    fn generating_matches_series_in_the_plane() {
        for (x, s) in [([0i64, 0], 0.8), ([1, 0], 0.8), ([2, 1], 0.5)] {
            let g = generating::<f64>(2, &x, s).unwrap().value;
            let (series, tail) = series::generating_series(2, &x, s, 220);
            assert!(tail < 1e-15);
            assert!((g - series).abs() < 1e-11, "{x:?} {s}: {g} vs {series}");
        }
    }

    #[test]
    fn bridge_in_three_dimensions() {
        let s = 6.0 / 7.0;
        let g = generating::<f64>(3, &[1, 0, 0], s).unwrap().value;
        let r = crate::green::green_resolvent::<f64>(3, &[1, 0, 0], (1.0 - s) / s).unwrap().value;
        assert!((g - r / s).abs() < 1e-9, "{g} vs {}", r / s);
    }

    #[test]
    fn diverges_in_low_dimension() {
        assert!(generating::<f64>(2, &[0, 0], 1.0).is_err());
        assert!(green_d3::<f64>(&[0, 0]).is_err());
    }

    #[test]
    fn generic_over_f32() {
        let g = green_d3::<f32>(&[0, 0, 0]).unwrap();
        assert!((g.discrete - 1.516_386).abs() < 1e-4);
    }
}
