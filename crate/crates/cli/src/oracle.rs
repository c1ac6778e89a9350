//! Reference computations that share no code with the solvers they check.

use std::collections::HashMap;

/// Dense row-major square matrix.
#[derive(Debug, Clone, PartialEq)]
struct Dense {
    n: usize,
    a: Vec<f64>,
}

impl Dense {
    fn identity(n: usize) -> Self {
        let mut a = vec![0.0; n * n];
        for i in 0..n {
            a[i * n + i] = 1.0;
        }
        Dense { n, a }
    }

    fn mul(&self, other: &Dense) -> Dense {
        let n = self.n;
        let mut out = vec![0.0; n * n];
        for i in 0..n {
            for k in 0..n {
                let x = self.a[i * n + k];
                if x == 0.0 {
                    continue;
                }
                let row = &other.a[k * n..(k + 1) * n];
                for (o, &y) in out[i * n..(i + 1) * n].iter_mut().zip(row) {
                    *o += x * y;
                }
            }
        }
        Dense { n, a: out }
    }

    fn norm_inf(&self) -> f64 {
        (0..self.n).map(|i| self.a[i * self.n..(i + 1) * self.n].iter().map(|x| x.abs()).sum::<f64>()).fold(0.0, f64::max)
    }

    /// `exp(A)` by scaling and squaring with a Taylor polynomial.
    fn expm(&self) -> Dense {
        let norm = self.norm_inf();
        let squarings = if norm > 0.5 { (norm / 0.5).log2().ceil() as u32 } else { 0 };
        let scale = 0.5f64.powi(squarings as i32);
        let scaled = Dense { n: self.n, a: self.a.iter().map(|x| x * scale).collect() };
        let mut sum = Dense::identity(self.n);
        let mut term = Dense::identity(self.n);
        for k in 1..=24 {
            term = term.mul(&scaled);
            for x in term.a.iter_mut() {
                *x /= k as f64;
            }
            for (s, t) in sum.a.iter_mut().zip(&term.a) {
                *s += t;
            }
        }
        for _ in 0..squarings {
            sum = sum.mul(&sum);
        }
        sum
    }
}

/// Survival from the origin of a walk without dormancy, jumping at rate
/// `rate` to each neighbour and killed at rate `gamma` at the origin, on the
/// box `|z_j| <= radius`. Jumps out of the box kill (`reflecting = false`) or
/// are suppressed (`reflecting = true`).
pub fn plain_killed_survival(d: usize, rate: f64, gamma: f64, radius: usize, reflecting: bool, times: &[f64]) -> Vec<f64> {
    let side = 2 * radius + 1;
    let n = side.pow(d as u32);
    let r = radius as i64;
    let coords = |mut i: usize| -> Vec<i64> {
        let mut z = vec![0i64; d];
        for c in z.iter_mut() {
            *c = (i % side) as i64 - r;
            i /= side;
        }
        z
    };
    let index = |z: &[i64]| -> usize { z.iter().rev().fold(0usize, |acc, &c| acc * side + (c + r) as usize) };
    let mut q = Dense { n, a: vec![0.0; n * n] };
    for i in 0..n {
        let z = coords(i);
        let mut out = 0.0;
        for j in 0..d {
            for step in [-1i64, 1] {
                let mut y = z.clone();
                y[j] += step;
                if y[j].abs() > r {
                    if !reflecting {
                        out += rate;
                    }
                    continue;
                }
                q.a[i * n + index(&y)] += rate;
                out += rate;
            }
        }
        if z.iter().all(|&c| c == 0) {
            out += gamma;
        }
        q.a[i * n + i] -= out;
    }
    let origin = index(&vec![0; d]);
    times
        .iter()
        .map(|&t| {
            let e = Dense { n, a: q.a.iter().map(|x| x * t).collect() }.expm();
            e.a[origin * n..(origin + 1) * n].iter().sum()
        })
        .collect()
}

/// `sum_n s^n P_x(X_n = y, X_k != 0 for k <= n)` over walks of at most
/// `max_steps` steps of the discrete simple random walk, by enumeration of
/// the path weights step by step.
pub fn avoiding_green_paths(x: &[i64], y: &[i64], s: f64, max_steps: usize) -> f64 {
    let d = x.len();
    let step_weight = s / (2 * d) as f64;
    let is_origin = |z: &[i64]| z.iter().all(|&c| c == 0);
    if is_origin(x) {
        return 0.0;
    }
    let mut front: HashMap<Vec<i64>, f64> = HashMap::from([(x.to_vec(), 1.0)]);
    let mut total = if x == y { 1.0 } else { 0.0 };
    for _ in 0..max_steps {
        let mut next: HashMap<Vec<i64>, f64> = HashMap::new();
        for (z, w) in &front {
            for j in 0..d {
                for step in [-1i64, 1] {
                    let mut v = z.clone();
                    v[j] += step;
                    if is_origin(&v) {
                        continue;
                    }
                    *next.entry(v).or_insert(0.0) += w * step_weight;
                }
            }
        }
        total += next.get(y).copied().unwrap_or(0.0);
        front = next;
    }
    total
}
