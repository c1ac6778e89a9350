//! Exponentially scaled modified Bessel functions `e^{-y} I_n(y)`.

use crate::num::{from_usize, lit, Real};

/// Above this argument (plus a margin growing with the order) the asymptotic
/// expansion replaces the power series.
const ASYMPTOTIC_FROM: f64 = 50.0;

fn use_asymptotic(n: u32, y: f64) -> bool {
    y > ASYMPTOTIC_FROM + 2.0 * (n as f64) * (n as f64)
}

/// `e^{-y} I_n(y)` for `y >= 0`.
pub fn scaled_bessel_i<T: Real>(n: u32, y: T) -> T {
    if y == T::zero() {
        return if n == 0 { T::one() } else { T::zero() };
    }
    if use_asymptotic(n, y.to_f64().unwrap_or(f64::INFINITY)) {
        asymptotic(n, y)
    } else {
        series(n, y)
    }
}

/// Power series summed outward from its largest term, in logarithmic scale so
/// that neither `e^{-y}` nor `I_n(y)` is formed separately.
fn series<T: Real>(n: u32, y: T) -> T {
    let half = y * lit(0.5);
    let q = half * half;
    let nn = from_usize::<T>(n as usize);
    // term ratio t_{k+1} / t_k = q / ((k + 1)(k + n + 1))
    let ratio = |k: usize| q / (from_usize::<T>(k + 1) * (from_usize::<T>(k + 1) + nn));
    let mut peak = 0usize;
    while ratio(peak) > T::one() {
        peak += 1;
    }
    // log t_peak = -y + (2 peak + n) ln(y/2) - ln(peak!) - ln((peak + n)!)
    let ln_half = half.ln();
    let mut log_peak = -y + from_usize::<T>(2 * peak + n as usize) * ln_half;
    for k in 1..=peak {
        log_peak = log_peak - from_usize::<T>(k).ln();
    }
    for k in 1..=(peak + n as usize) {
        log_peak = log_peak - from_usize::<T>(k).ln();
    }
    let eps = T::epsilon() * lit(1e-2);
    let mut sum = T::one();
    let mut t = T::one();
    let mut k = peak;
    loop {
        t = t * ratio(k);
        k += 1;
        sum = sum + t;
        if t < eps * sum {
            break;
        }
    }
    let mut t = T::one();
    let mut k = peak;
    while k > 0 {
        k -= 1;
        t = t / ratio(k);
        sum = sum + t;
        if t < eps * sum {
            break;
        }
    }
    log_peak.exp() * sum
}

/// Coefficients `c_k` with `e^{-y} I_n(y) ~ (2 pi y)^{-1/2} sum_k c_k y^{-k}`.
pub fn asymptotic_coefficients<T: Real>(n: u32, terms: usize) -> Vec<T> {
    let mu = lit::<T>(4.0) * from_usize::<T>(n as usize).powi(2);
    let eight = lit::<T>(8.0);
    let mut out = Vec::with_capacity(terms);
    let mut c = T::one();
    out.push(c);
    for k in 1..terms {
        let odd = from_usize::<T>(2 * k - 1);
        c = -c * (mu - odd * odd) / (from_usize::<T>(k) * eight);
        out.push(c);
    }
    out
}

fn asymptotic<T: Real>(n: u32, y: T) -> T {
    let coeffs = asymptotic_coefficients::<T>(n, 60);
    let mut sum = T::zero();
    let mut power = T::one();
    let mut last = T::infinity();
    for c in coeffs {
        let term = c * power;
        if term.abs() > last {
            break;
        }
        sum = sum + term;
        last = term.abs();
        if last < T::epsilon() * lit(1e-2) * sum.abs() {
            break;
        }
        power = power / y;
    }
    sum / (lit::<T>(2.0) * T::PI() * y).sqrt()
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn known_values() {
        // I_0(1), I_1(1), I_0(10), I_3(2.5)
        let cases = [
            (0, 1.0, 1.266_065_877_752_008_4),
            (1, 1.0, 0.565_159_103_992_485_0),
            (0, 10.0, 2_815.716_628_466_254_4),
            (3, 2.5, 0.474_370_408_778_035_9),
        ];
        for (n, y, i) in cases {
            let got = scaled_bessel_i::<f64>(n, y) * f64::exp(y);
            assert!((got - i).abs() < 1e-14 * i, "I_{n}({y}) = {got}, expected {i}");
        }
    }

    #[test]
    fn series_and_asymptotic_agree_at_the_switch() {
        for n in 0..6u32 {
            let y = ASYMPTOTIC_FROM + 2.0 * (n * n) as f64 + 1.0;
            let a = series::<f64>(n, y);
            let b = asymptotic::<f64>(n, y);
            assert!((a - b).abs() < 1e-12 * a, "n = {n}: {a} vs {b}");
        }
    }

    #[test]
    fn recurrence_holds() {
        // I_{n-1}(y) - I_{n+1}(y) = (2n / y) I_n(y)
        for &y in &[0.3, 4.0, 37.0, 120.0, 900.0] {
            for n in 1..8u32 {
                let l = scaled_bessel_i::<f64>(n - 1, y) - scaled_bessel_i::<f64>(n + 1, y);
                let r = 2.0 * n as f64 / y * scaled_bessel_i::<f64>(n, y);
                assert!((l - r).abs() < 1e-12 * scaled_bessel_i::<f64>(n - 1, y), "n = {n}, y = {y}");
            }
        }
    }

    #[test]
    fn large_argument_no_overflow() {
        let v = scaled_bessel_i::<f32>(2, 3000.0f32);
        assert!(v.is_finite() && v > 0.0);
        let v = series::<f64>(0, 2000.0);
        assert!((v * (2.0 * std::f64::consts::PI * 2000.0).sqrt() - 1.0).abs() < 1e-3);
    }
}
