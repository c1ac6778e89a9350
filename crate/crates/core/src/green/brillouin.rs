//! Green kernels as integrals over the Brillouin box `[-pi, pi]^d`.
//!
//! Every integrand is even in each `k_j`, so the box is folded onto
//! `[0, pi]^d` with `cos(k_j x_j)` factors. Panels are graded toward `k = 0`,
//! where the integrands peak or have a direction-dependent limit.

use super::quadrature::{adaptive, composite, graded_breakpoints, MAX_NODES_PER_PANEL};
use super::{Convention, GreenValue};
use crate::error::{Error, Result};
use crate::num::{from_usize, lit, Real};

/// `1 - cos(u)` without cancellation.
#[inline]
fn one_minus_cos<T: Real>(u: T) -> T {
    let s = (u * lit(0.5)).sin();
    lit::<T>(2.0) * s * s
}

/// `1 - prod_j cos(u_j)` without cancellation.
#[inline]
fn one_minus_product<T: Real>(omc: &[T]) -> T {
    // 1 - c_1 c_2 ... = (1 - c_1) + c_1 (1 - c_2 ...)
    let mut out = T::zero();
    let mut prefix = T::one();
    for &m in omc {
        out = out + prefix * m;
        prefix = prefix * (T::one() - m);
    }
    out
}

fn check_dim(d: usize, x: &[i64], allowed: std::ops::RangeInclusive<usize>) -> Result<()> {
    if !allowed.contains(&d) {
        return Err(Error::OutOfDomain(format!("dimension {d} not supported here")));
    }
    if x.len() != d {
        return Err(Error::DimensionMismatch { state: x.len(), params: d });
    }
    Ok(())
}

/// Per-axis node data for one tensor rule.
struct Axis<T> {
    nodes: Vec<T>,
    weights: Vec<T>,
    omc_k: Vec<T>,
}

fn axis<T: Real>(breakpoints: &[T], n: usize) -> Axis<T> {
    let (nodes, weights) = composite(breakpoints, n);
    let omc_k = nodes.iter().map(|&k| one_minus_cos(k)).collect();
    Axis { nodes, weights, omc_k }
}

/// Tensor-product sum over `[0, pi]^d` of `g(1 - phi(k), cos(k_j x_j) terms)`,
/// normalized by `pi^d`.
fn tensor_sum<T: Real, G>(d: usize, x: &[i64], ax: &Axis<T>, g: &G) -> T
where
    G: Fn(T, &[T]) -> T,
{
    let n = ax.nodes.len();
    let dd = from_usize::<T>(d);
    // 1 - cos(k_j x_j) per axis and node
    let omc_x: Vec<Vec<T>> =
        x.iter().map(|&xj| ax.nodes.iter().map(|&k| one_minus_cos(k * lit(xj as f64))).collect()).collect();
    let mut idx = vec![0usize; d];
    let mut buf = vec![T::zero(); d];
    let mut total = T::zero();
    loop {
        let mut w = T::one();
        let mut s = T::zero();
        for j in 0..d {
            w = w * ax.weights[idx[j]];
            s = s + ax.omc_k[idx[j]];
            buf[j] = omc_x[j][idx[j]];
        }
        total = total + w * g(s / dd, &buf);
        let mut j = 0;
        loop {
            if j == d {
                return total / T::PI().powi(d as i32);
            }
            idx[j] += 1;
            if idx[j] < n {
                break;
            }
            idx[j] = 0;
            j += 1;
        }
    }
}

fn node_cap(d: usize) -> usize {
    match d {
        1 => MAX_NODES_PER_PANEL * 4,
        2 => MAX_NODES_PER_PANEL,
        _ => 32,
    }
}

fn converge<T: Real, G>(what: &str, d: usize, x: &[i64], h_min: T, g: G) -> Result<(T, T)>
where
    G: Fn(T, &[T]) -> T,
{
    let bp = graded_breakpoints(T::PI(), h_min);
    let tol = T::quadrature_tolerance();
    let mut n = 8;
    let mut previous = tensor_sum(d, x, &axis(&bp, n), &g);
    loop {
        n *= 2;
        let value = tensor_sum(d, x, &axis(&bp, n), &g);
        let change = (value - previous).abs();
        if change <= tol * value.abs() || change == T::zero() {
            return Ok((value, change));
        }
        if n >= node_cap(d) {
            return Err(Error::NonConvergence {
                what: what.to_string(),
                previous: previous.to_f64().unwrap_or(f64::NAN),
                last: value.to_f64().unwrap_or(f64::NAN),
            });
        }
        previous = value;
    }
}

fn resolvent_h_min<T: Real>(lambda: T) -> T {
    (lambda.sqrt() * lit(0.25)).min(lit(0.25))
}

/// Resolvent kernel `int e^{ik.x} / (lambda + 1 - phi(k)) dk / (2 pi)^d` by
/// tensor Gauss-Legendre quadrature, `d` in `1..=3`.
pub fn green_resolvent<T: Real>(d: usize, x: &[i64], lambda: T) -> Result<GreenValue<T>> {
    check_dim(d, x, 1..=3)?;
    if !(lambda > T::zero()) {
        return Err(Error::OutOfDomain("resolvent needs lambda > 0".into()));
    }
    let (value, est_error) = converge("resolvent quadrature", d, x, resolvent_h_min(lambda), |omc_phi, omc_x| {
        let mut c = T::one();
        for &m in omc_x {
            c = c * (T::one() - m);
        }
        c / (lambda + omc_phi)
    })?;
    let imag = resolvent_imaginary_part(d, x, lambda);
    if imag.abs() > lit::<T>(1e-12) * value.abs().max(T::one()) {
        return Err(Error::NonConvergence {
            what: "vanishing imaginary part".into(),
            previous: 0.0,
            last: imag.to_f64().unwrap_or(f64::NAN),
        });
    }
    Ok(GreenValue {
        dim: d,
        convention: Convention::Resolvent,
        x: x.to_vec(),
        parameter: lambda,
        value,
        est_error,
    })
}

/// Imaginary part `int sin(k.x) / (lambda + 1 - phi(k))` on the mirrored
/// full-box rule at the coarsest level.
fn resolvent_imaginary_part<T: Real>(d: usize, x: &[i64], lambda: T) -> T {
    let bp = graded_breakpoints(T::PI(), resolvent_h_min(lambda));
    let ax = axis(&bp, 8);
    let n = ax.nodes.len();
    let dd = from_usize::<T>(d);
    let mut total = T::zero();
    let mut idx = vec![0usize; d];
    'outer: loop {
        let mut w = T::one();
        let mut s = T::zero();
        for j in 0..d {
            w = w * ax.weights[idx[j]];
            s = s + ax.omc_k[idx[j]];
        }
        let denom = lambda + s / dd;
        for signs in 0..(1u32 << d) {
            let mut phase = T::zero();
            for j in 0..d {
                let k = if signs >> j & 1 == 1 { -ax.nodes[idx[j]] } else { ax.nodes[idx[j]] };
                phase = phase + k * lit(x[j] as f64);
            }
            total = total + w * phase.sin() / denom;
        }
        let mut j = 0;
        loop {
            if j == d {
                break 'outer;
            }
            idx[j] += 1;
            if idx[j] < n {
                break;
            }
            idx[j] = 0;
            j += 1;
        }
    }
    total / (lit::<T>(2.0) * T::PI()).powi(d as i32)
}

/// Two-dimensional resolvent reduced to a line integral: the `k_2` integral
/// is done in closed form, `int cos(m k) / (A - cos k) dk / 2pi = z^|m| / sqrt(A^2 - 1)`
/// with `z = A - sqrt(A^2 - 1)`.
pub fn green_resolvent_d2_line<T: Real>(x: &[i64], lambda: T) -> Result<GreenValue<T>> {
    check_dim(2, x, 2..=2)?;
    if !(lambda > T::zero()) {
        return Err(Error::OutOfDomain("resolvent needs lambda > 0".into()));
    }
    let two = lit::<T>(2.0);
    let (x1, x2) = (lit::<T>(x[0] as f64), x[1].unsigned_abs() as i32);
    let bp = graded_breakpoints(T::PI(), resolvent_h_min(lambda));
    let (prev, value, ok) = adaptive(&bp, T::quadrature_tolerance(), T::quadrature_tolerance() * lit(1e-6), 4 * MAX_NODES_PER_PANEL, |k, w| {
        k.iter()
            .zip(w)
            .map(|(&k, &w)| {
                // A - 1 = 2 lambda + 1 - cos k
                let am1 = two * lambda + one_minus_cos(k);
                let root = (am1 * (am1 + two)).sqrt();
                let z = T::one() + am1 - root;
                w * two * (k * x1).cos() * z.powi(x2) / root
            })
            .sum::<T>()
            / T::PI()
    });
    if !ok {
        return Err(Error::NonConvergence { what: "line resolvent".into(), previous: prev.to_f64().unwrap_or(f64::NAN), last: value.to_f64().unwrap_or(f64::NAN) });
    }
    Ok(GreenValue { dim: 2, convention: Convention::Resolvent, x: x.to_vec(), parameter: lambda, value, est_error: (value - prev).abs() })
}

/// Potential kernel of the planar walk as a line integral.
///
/// `a(x) = int_0^pi (2 / pi) (1 - cos(k x_1) z^|x_2|) / sqrt(A^2 - 1) dk`
/// with `A = 2 - cos k`; the integrand has a finite limit at `k = 0`.
pub fn potential_kernel<T: Real>(x: &[i64]) -> Result<(T, T)> {
    check_dim(2, x, 2..=2)?;
    if x.iter().all(|&c| c == 0) {
        return Ok((T::zero(), T::zero()));
    }
    // the kernel is symmetric under swapping coordinates; put the larger one
    // under the cosine so the power of z stays small
    let (a, b) = if x[0].abs() >= x[1].abs() { (x[0], x[1]) } else { (x[1], x[0]) };
    let two = lit::<T>(2.0);
    let x1 = lit::<T>(a as f64);
    let m = b.unsigned_abs() as i32;
    let bp = graded_breakpoints(T::PI(), lit(1e-9));
    let (prev, value, ok) = adaptive(&bp, T::quadrature_tolerance(), T::quadrature_tolerance() * lit(1e-6), 4 * MAX_NODES_PER_PANEL, |k, w| {
        k.iter()
            .zip(w)
            .map(|(&k, &w)| {
                let am1 = one_minus_cos(k);
                let root = (am1 * (am1 + two)).sqrt();
                // 1 - cos(k x1) z^m = (1 - cos(k x1)) + cos(k x1)(1 - z^m)
                let zm1 = am1 - root;
                let one_minus_zm = -(from_usize::<T>(m as usize) * zm1.ln_1p()).exp_m1();
                let num = one_minus_cos(k * x1) + (k * x1).cos() * one_minus_zm;
                w * two * num / root
            })
            .sum::<T>()
            / T::PI()
    });
    if !ok {
        return Err(Error::NonConvergence { what: "potential kernel".into(), previous: prev.to_f64().unwrap_or(f64::NAN), last: value.to_f64().unwrap_or(f64::NAN) });
    }
    Ok((value, (value - prev).abs()))
}

/// Potential kernel by tensor quadrature over the folded box. Slower than
/// [`potential_kernel`]; kept as an independent route.
pub fn potential_kernel_tensor<T: Real>(x: &[i64]) -> Result<(T, T)> {
    check_dim(2, x, 2..=2)?;
    converge("potential kernel", 2, x, lit(1e-7), |omc_phi, omc_x| {
        if omc_phi == T::zero() {
            T::zero()
        } else {
            one_minus_product(omc_x) / omc_phi
        }
    })
}

/// Error kernel `E(x, lambda) = int (1 - e^{ik.x}) (1/(1 + lambda - phi) - 1/(1 - phi))`,
/// integrated in the combined form `-lambda (1 - cos) / ((1 + lambda - phi)(1 - phi))`.
pub fn error_kernel<T: Real>(x: &[i64], lambda: T) -> Result<(T, T)> {
    check_dim(2, x, 2..=2)?;
    if !(lambda > T::zero()) {
        return Err(Error::OutOfDomain("error kernel needs lambda > 0".into()));
    }
    if x.iter().all(|&c| c == 0) {
        return Ok((T::zero(), T::zero()));
    }
    let h = (lambda.sqrt() * lit(0.25)).min(lit(1e-6));
    converge("error kernel", 2, x, h, |omc_phi, omc_x| {
        if omc_phi == T::zero() {
            T::zero()
        } else {
            -lambda * one_minus_product(omc_x) / ((lambda + omc_phi) * omc_phi)
        }
    })
}
