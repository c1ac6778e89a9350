//! Random-walk series used as independent checks of the quadratures.

/// `sum_{n <= max_n} s^n P(X_n = x)` for the discrete walk in `d <= 2`, by
/// propagating the exact distribution. Returns the partial sum and the bound
/// `s^{max_n + 1} / (1 - s)` on the remainder.
pub fn generating_series(d: usize, x: &[i64], s: f64, max_n: usize) -> (f64, f64) {
    assert!(d == 1 || d == 2, "series oracle supports d = 1, 2");
    assert_eq!(x.len(), d);
    let r = max_n as i64 + 1;
    let side = (2 * r + 1) as usize;
    let cells = side.pow(d as u32);
    let at = |z: &[i64]| -> usize {
        let mut i = 0usize;
        for &c in z.iter().rev() {
            i = i * side + (c + r) as usize;
        }
        i
    };
    let mut p = vec![0.0f64; cells];
    let mut next = vec![0.0f64; cells];
    p[at(&vec![0; d])] = 1.0;
    let target = if x.iter().all(|c| c.abs() <= r) { Some(at(x)) } else { None };
    let stride: Vec<usize> = (0..d).map(|j| side.pow(j as u32)).collect();
    let share = 1.0 / (2 * d) as f64;
    let mut total = 0.0;
    let mut weight = 1.0;
    for n in 0..=max_n {
        if let Some(t) = target {
            total += weight * p[t];
        }
        if n == max_n {
            break;
        }
        next.iter_mut().for_each(|v| *v = 0.0);
        for (i, &mass) in p.iter().enumerate() {
            if mass == 0.0 {
                continue;
            }
            for &st in &stride {
                next[i + st] += share * mass;
                next[i - st] += share * mass;
            }
        }
        std::mem::swap(&mut p, &mut next);
        weight *= s;
    }
    (total, s.powi(max_n as i32 + 1) / (1.0 - s))
}

/// Expected number of visits to the origin of the three-dimensional walk,
/// `sum_n P(X_{2n} = 0)`, with the remainder estimated from the
/// `c n^{-3/2} (1 + a / n)` decay of the last terms.
pub fn return_series_d3(max_n: usize) -> f64 {
    // trinomial(n; 1/3, 1/3, 1/3) probabilities t[j][k], l = n - j - k
    let mut tri = vec![vec![0.0f64; max_n + 1]; max_n + 1];
    tri[0][0] = 1.0;
    let mut central = 1.0f64; // C(2n, n) / 4^n
    let mut terms = Vec::with_capacity(max_n + 1);
    for n in 0..=max_n {
        if n > 0 {
            for j in (0..=n).rev() {
                for k in (0..=(n - j)).rev() {
                    let mut v = if j + k < n { tri[j][k] } else { 0.0 };
                    if j > 0 {
                        v += tri[j - 1][k];
                    }
                    if k > 0 {
                        v += tri[j][k - 1];
                    }
                    tri[j][k] = v / 3.0;
                }
            }
            central *= (2 * n - 1) as f64 / (2 * n) as f64;
        }
        let mut sq = 0.0;
        for j in 0..=n {
            for k in 0..=(n - j) {
                sq += tri[j][k] * tri[j][k];
            }
        }
        terms.push(central * sq);
    }
    let partial: f64 = terms.iter().sum();
    // fit c and a on the terms at n and n/2
    let (n1, n2) = (max_n as f64, (max_n / 2) as f64);
    let (p1, p2) = (terms[max_n] * n1.powf(1.5), terms[max_n / 2] * n2.powf(1.5));
    // p = c (1 + a / n)
    let a = (p1 - p2) / (p2 / n1 - p1 / n2);
    let c = p1 / (1.0 + a / n1);
    let m = n1 + 0.5;
    partial + c * (2.0 / m.sqrt() + a * 2.0 / (3.0 * m.powf(1.5)))
}
