//! Survival on a truncated lattice box by uniformization.
//!
//! The killed pair process is restricted to `{(z, alpha) : |z|_inf <= R}`.
//! Three boundary treatments are available:
//!
//! * `Absorbing`: mass leaving the box is lost. Survival is a lower bound.
//! * `Escaping`: mass leaving the box survives forever. Survival is an upper
//!   bound.
//! * `Reflecting`: moves leaving the box are removed. Not a bound in general,
//!   since confinement forces extra returns to the trap, but it is the
//!   conservative truncation of the generator.
//!
//! With `v = exp(tA) 1` the survival starting from any state is read off one
//! backward sweep `v_{k+1} = P v_k + b`, `P = I + A / Lambda`, weighted by
//! Poisson probabilities. One sweep serves every requested time.

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::model::{ModelParams, PairState};
use crate::num::{from_usize, lit, Real};

/// Largest state count accepted by [`build_operator`].
pub const MAX_STATES: usize = 20_000_000;

/// Relative stabilization tolerance of [`long_time_limit`].
pub const DEFAULT_STABILIZATION: f64 = 1e-4;

/// Finite-difference step in `gamma` used by [`expected_exposure`].
pub const EXPOSURE_STEP: f64 = 1e-4;

/// Default truncation radius per dimension.
pub fn default_radius(d: usize) -> usize {
    match d {
        1 => 300,
        2 => 60,
        3 => 25,
        4 => 10,
        _ => 6,
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Boundary {
    Absorbing,
    Reflecting,
    Escaping,
}

/// Enumeration of the states of the box; `alpha` is the fastest index.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct StateIndex {
    pub d: usize,
    pub radius: usize,
    side: usize,
}

impl StateIndex {
    pub fn new(d: usize, radius: usize) -> Self {
        Self { d, radius, side: 2 * radius + 1 }
    }

    pub fn len(&self) -> usize {
        2 * self.side.pow(self.d as u32)
    }

    pub fn is_empty(&self) -> bool {
        false
    }

    pub fn contains(&self, z: &[i64]) -> bool {
        z.iter().all(|c| c.unsigned_abs() as usize <= self.radius)
    }

    pub fn index(&self, state: &PairState) -> Option<usize> {
        if state.dim() != self.d || !self.contains(&state.z) {
            return None;
        }
        let mut flat = 0usize;
        for &c in state.z.iter().rev() {
            flat = flat * self.side + (c + self.radius as i64) as usize;
        }
        Some(2 * flat + usize::from(state.active))
    }

    pub fn state(&self, index: usize) -> PairState {
        let active = index % 2 == 1;
        let mut flat = index / 2;
        let mut z = Vec::with_capacity(self.d);
        for _ in 0..self.d {
            z.push((flat % self.side) as i64 - self.radius as i64);
            flat /= self.side;
        }
        PairState { z, active }
    }
}

/// Sparse sub-generator of the killed pair process on the box.
#[derive(Debug, Clone)]
pub struct TruncatedOperator<T> {
    pub params: ModelParams<T>,
    pub radius: usize,
    pub boundary: Boundary,
    pub state_index: StateIndex,
    row_ptr: Vec<usize>,
    cols: Vec<u32>,
    rates: Vec<T>,
    diagonal: Vec<T>,
    outflow: Vec<T>,
}

/// Builds the truncated sub-generator.
pub fn build_operator<T: Real>(params: &ModelParams<T>, radius: usize, boundary: Boundary) -> Result<TruncatedOperator<T>> {
    params.validate()?;
    if radius == 0 {
        return Err(Error::OutOfDomain("radius must be >= 1".into()));
    }
    let side = (2 * radius + 1) as f64;
    let count = 2.0 * side.powi(params.d as i32);
    if count > MAX_STATES as f64 {
        return Err(Error::MemoryBudget { states: count as usize, budget: MAX_STATES });
    }
    let index = StateIndex::new(params.d, radius);
    let n = index.len();
    let d = params.d;
    let r = radius as i64;
    let mut strides = vec![2usize; d];
    for j in 1..d {
        strides[j] = strides[j - 1] * (2 * radius + 1);
    }
    let mut row_ptr = Vec::with_capacity(n + 1);
    let mut cols = Vec::with_capacity(n * (2 * d + 1));
    let mut rates = Vec::with_capacity(n * (2 * d + 1));
    let mut diagonal = Vec::with_capacity(n);
    let mut outflow = Vec::with_capacity(n);
    row_ptr.push(0);
    let mut z = vec![-r; d];
    for i in 0..n {
        let active = i % 2 == 1;
        if i > 0 && !active {
            // advance the odometer once per pair of states
            for c in z.iter_mut() {
                *c += 1;
                if *c <= r {
                    break;
                }
                *c = -r;
            }
        }
        let on_trap = z.iter().all(|&c| c == 0);
        let lattice = params.lattice_rate(active);
        let mut exit = T::zero();
        let mut lost = T::zero();
        for j in 0..d {
            for step in [1i64, -1] {
                let target = z[j] + step;
                if target.abs() > r {
                    lost = lost + lattice;
                    continue;
                }
                let col = if step == 1 { i + strides[j] } else { i - strides[j] };
                cols.push(col as u32);
                rates.push(lattice);
                exit = exit + lattice;
            }
        }
        let switch = match (active, on_trap) {
            (true, true) => params.s1,
            (false, false) => params.s0,
            _ => T::zero(),
        };
        if switch > T::zero() {
            cols.push((i ^ 1) as u32);
            rates.push(switch);
            exit = exit + switch;
        }
        let kill = if active && on_trap { params.gamma } else { T::zero() };
        let leave = match boundary {
            Boundary::Reflecting => T::zero(),
            Boundary::Absorbing | Boundary::Escaping => lost,
        };
        diagonal.push(-(exit + leave + kill));
        outflow.push(if boundary == Boundary::Escaping { lost } else { T::zero() });
        row_ptr.push(cols.len());
    }
    Ok(TruncatedOperator { params: *params, radius, boundary, state_index: index, row_ptr, cols, rates, diagonal, outflow })
}

impl<T: Real> TruncatedOperator<T> {
    pub fn state_count(&self) -> usize {
        self.diagonal.len()
    }

    /// Off-diagonal entries of row `i` as `(column, rate)`.
    pub fn row(&self, i: usize) -> impl Iterator<Item = (usize, T)> + '_ {
        let span = self.row_ptr[i]..self.row_ptr[i + 1];
        self.cols[span.clone()].iter().map(|&c| c as usize).zip(self.rates[span].iter().copied())
    }

    pub fn diagonal(&self, i: usize) -> T {
        self.diagonal[i]
    }

    /// Rate at which row `i` leaves the box into the surviving sink.
    pub fn outflow(&self, i: usize) -> T {
        self.outflow[i]
    }

    /// Sum of the row of the sub-generator, sink excluded.
    pub fn row_sum(&self, i: usize) -> T {
        self.row(i).fold(self.diagonal[i], |acc, (_, r)| acc + r)
    }

    /// Uniformization rate: the largest total outflow of any state.
    pub fn uniformization_rate(&self) -> T {
        self.diagonal.iter().fold(T::zero(), |m, &x| m.max(-x))
    }

    /// Survival probabilities from `start` at the sorted `times`.
    pub fn survival_from(&self, start: &PairState, times: &[T]) -> Result<Vec<T>> {
        let origin = self
            .state_index
            .index(start)
            .ok_or_else(|| Error::OutOfDomain("start state outside the truncated box".into()))?;
        check_times(times)?;
        let lambda = self.uniformization_rate();
        if lambda == T::zero() {
            return Ok(vec![T::one(); times.len()]);
        }
        let windows: Vec<PoissonWindow<T>> = times.iter().map(|&t| PoissonWindow::new(lambda * t)).collect();
        let last = windows.iter().map(|w| w.end()).max().unwrap_or(0);
        let inv = T::one() / lambda;
        let stay: Vec<T> = self.diagonal.iter().map(|&a| T::one() + a * inv).collect();
        let source: Vec<T> = self.outflow.iter().map(|&b| b * inv).collect();
        let scaled: Vec<T> = self.rates.iter().map(|&r| r * inv).collect();
        let mut v = vec![T::one(); self.state_count()];
        let mut next = vec![T::zero(); self.state_count()];
        let mut acc = vec![T::zero(); times.len()];
        for k in 0..=last {
            for (a, w) in acc.iter_mut().zip(&windows) {
                if let Some(weight) = w.weight(k) {
                    *a = *a + weight * v[origin];
                }
            }
            if k == last {
                break;
            }
            self.apply(&stay, &scaled, &source, &v, &mut next);
            std::mem::swap(&mut v, &mut next);
        }
        Ok(acc.into_iter().map(|x| x.min(T::one()).max(T::zero())).collect())
    }

    fn apply(&self, stay: &[T], scaled: &[T], source: &[T], v: &[T], out: &mut [T]) {
        const CHUNK: usize = 1 << 14;
        out.par_chunks_mut(CHUNK).enumerate().for_each(|(c, block)| {
            let base = c * CHUNK;
            for (o, slot) in block.iter_mut().enumerate() {
                let i = base + o;
                let mut s = stay[i] * v[i] + source[i];
                for p in self.row_ptr[i]..self.row_ptr[i + 1] {
                    s = s + scaled[p] * v[self.cols[p] as usize];
                }
                *slot = s;
            }
        });
    }
}

fn check_times<T: Real>(times: &[T]) -> Result<()> {
    if times.iter().any(|t| !(*t >= T::zero()) || !t.is_finite()) || times.windows(2).any(|w| w[0] > w[1]) {
        return Err(Error::OutOfDomain("times must be finite, non-negative and sorted".into()));
    }
    Ok(())
}

/// Normalized Poisson probabilities on a window around the mode, truncated
/// once the tail terms fall below the scalar's series tolerance.
#[derive(Debug, Clone)]
pub struct PoissonWindow<T> {
    start: usize,
    weights: Vec<T>,
}

impl<T: Real> PoissonWindow<T> {
    pub fn new(mean: T) -> Self {
        if mean == T::zero() {
            return Self { start: 0, weights: vec![T::one()] };
        }
        let eps = T::series_tolerance() * lit(1e-3);
        let mode = mean.floor().to_usize().unwrap_or(0);
        // w_{k+1} / w_k = mean / (k + 1)
        let mut up = vec![T::one()];
        let mut k = mode;
        loop {
            let w = *up.last().unwrap() * mean / from_usize::<T>(k + 1);
            k += 1;
            up.push(w);
            // ratio is below 1 here, so the tail is bounded by a geometric series
            let ratio = mean / from_usize::<T>(k + 1);
            if w / (T::one() - ratio) < eps {
                break;
            }
        }
        let mut down = Vec::new();
        let mut k = mode;
        let mut w = T::one();
        while k > 0 {
            w = w * from_usize::<T>(k) / mean;
            k -= 1;
            down.push(w);
            let ratio = from_usize::<T>(k) / mean;
            if w / (T::one() - ratio) < eps {
                break;
            }
        }
        let start = mode - down.len();
        let mut weights: Vec<T> = down.into_iter().rev().collect();
        weights.extend(up);
        let total: T = weights.iter().copied().sum();
        for w in weights.iter_mut() {
            *w = *w / total;
        }
        Self { start, weights }
    }

    pub fn start(&self) -> usize {
        self.start
    }

    /// Last index with a retained weight.
    pub fn end(&self) -> usize {
        self.start + self.weights.len() - 1
    }

    pub fn weight(&self, k: usize) -> Option<T> {
        k.checked_sub(self.start).and_then(|i| self.weights.get(i).copied())
    }
}

/// Bracketing survival curve.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SurvivalCurve<T> {
    pub times: Vec<T>,
    /// Absorbing boundary.
    pub lower: Vec<T>,
    /// Escaping boundary.
    pub upper: Vec<T>,
    /// Reflecting boundary, reported for comparison.
    pub reflecting: Vec<T>,
}

impl<T: Real> SurvivalCurve<T> {
    pub fn gap(&self) -> Vec<T> {
        self.upper.iter().zip(&self.lower).map(|(&u, &l)| u - l).collect()
    }

    pub fn max_gap(&self) -> T {
        self.gap().into_iter().fold(T::zero(), T::max)
    }

    pub fn midpoint(&self) -> Vec<T> {
        let half = lit::<T>(0.5);
        self.upper.iter().zip(&self.lower).map(|(&u, &l)| half * (u + l)).collect()
    }
}

/// Survival from `(0, 1)` bracketed by the absorbing and escaping boxes.
pub fn survival<T: Real>(params: &ModelParams<T>, radius: usize, times: &[T]) -> Result<SurvivalCurve<T>> {
    let start = PairState::origin_active(params.d);
    let run = |b| build_operator(params, radius, b).and_then(|op| op.survival_from(&start, times));
    Ok(SurvivalCurve {
        times: times.to_vec(),
        lower: run(Boundary::Absorbing)?,
        upper: run(Boundary::Escaping)?,
        reflecting: run(Boundary::Reflecting)?,
    })
}

/// As [`survival`], failing when the bracketing gap exceeds `tolerance`.
pub fn survival_within<T: Real>(params: &ModelParams<T>, radius: usize, times: &[T], tolerance: T) -> Result<SurvivalCurve<T>> {
    let curve = survival(params, radius, times)?;
    let gap = curve.max_gap();
    if gap > tolerance {
        return Err(Error::ToleranceUnreachable { gap: gap.to_f64().unwrap_or(f64::NAN), tolerance: tolerance.to_f64().unwrap_or(f64::NAN) });
    }
    Ok(curve)
}

/// Survival at a large time together with its stabilization diagnostics.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct LongTimeValue<T> {
    pub t_max: T,
    /// Escaping-boundary value at `t_max`.
    pub value: T,
    pub lower: T,
    pub upper: T,
    pub gap: T,
    /// `|value(t_max) - value(t_max / 2)|`.
    pub stabilization: T,
}

/// Long-time survival in `d >= 3`, rejected when not stabilized to `tolerance`.
///
/// In transient dimensions a walker that reaches the edge of the box rarely
/// comes back, so the escaping value is used as the estimate; the absorbing
/// value is reported as the lower end of the bracket.
pub fn long_time_limit<T: Real>(params: &ModelParams<T>, radius: usize, t_max: T, tolerance: T) -> Result<LongTimeValue<T>> {
    if params.d < 3 {
        return Err(Error::OutOfDomain("long-time limit requires d >= 3".into()));
    }
    let half = t_max * lit(0.5);
    let start = PairState::origin_active(params.d);
    let lower = build_operator(params, radius, Boundary::Absorbing)?.survival_from(&start, &[t_max])?[0];
    let upper = build_operator(params, radius, Boundary::Escaping)?.survival_from(&start, &[half, t_max])?;
    let out = LongTimeValue {
        t_max,
        value: upper[1],
        lower,
        upper: upper[1],
        gap: upper[1] - lower,
        stabilization: (upper[1] - upper[0]).abs(),
    };
    if out.stabilization > tolerance {
        return Err(Error::NotStabilized {
            difference: out.stabilization.to_f64().unwrap_or(f64::NAN),
            tolerance: tolerance.to_f64().unwrap_or(f64::NAN),
        });
    }
    Ok(out)
}

/// `E[L_t]` from the survival curve by a one-sided second-order difference
/// in `gamma` at zero with step [`EXPOSURE_STEP`].
pub fn expected_exposure<T: Real>(params: &ModelParams<T>, radius: usize, boundary: Boundary, times: &[T]) -> Result<Vec<T>> {
    let h = lit::<T>(EXPOSURE_STEP);
    let start = PairState::origin_active(params.d);
    let at = |g: T| build_operator(&params.with_gamma(g), radius, boundary)?.survival_from(&start, times);
    let f0 = at(T::zero())?;
    let f1 = at(h)?;
    let f2 = at(h + h)?;
    let three = lit::<T>(3.0);
    let four = lit::<T>(4.0);
    Ok((0..times.len()).map(|i| (three * f0[i] - four * f1[i] + f2[i]) / (h + h)).collect())
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    fn unit(d: usize) -> ModelParams<f64> {
        ModelParams::unit(d)
    }

    #[test]
    fn state_index_round_trips() {
        let idx = StateIndex::new(2, 3);
        assert_eq!(idx.len(), 2 * 49);
        for i in 0..idx.len() {
            assert_eq!(idx.index(&idx.state(i)), Some(i));
        }
        assert_eq!(idx.index(&PairState::new(vec![4, 0], true)), None);
    }

    #[test]
    fn origin_row() {
        let p = unit(2).with_gamma(0.5);
        let op = build_operator(&p, 4, Boundary::Reflecting).unwrap();
        let i = op.state_index.index(&PairState::origin_active(2)).unwrap();
        assert_eq!(op.diagonal(i), -(8.0 + 1.0 + 0.5));
        let row: Vec<_> = op.row(i).collect();
        assert_eq!(row.len(), 5);
        assert_eq!(row.iter().filter(|(_, r)| *r == 2.0).count(), 4);
        let (switch_col, switch_rate) = row[4];
        assert_eq!(op.state_index.state(switch_col), PairState::new(vec![0, 0], false));
        assert_eq!(switch_rate, 1.0);
        assert!((op.row_sum(i) + 0.5).abs() < 1e-15);
    }

    #[test]
    fn conservative_without_killing() {
        let op = build_operator(&unit(2).with_gamma(0.0), 5, Boundary::Reflecting).unwrap();
        for i in 0..op.state_count() {
            assert!(op.row_sum(i).abs() < 1e-14);
        }
    }

    #[test]
    fn boundaries_differ_only_on_the_edge() {
        let p = unit(2);
        let a = build_operator(&p, 4, Boundary::Absorbing).unwrap();
        let r = build_operator(&p, 4, Boundary::Reflecting).unwrap();
        for i in 0..a.state_count() {
            let s = a.state_index.state(i);
            let edge = s.z.iter().any(|c| c.abs() == 4);
            let same = a.diagonal(i) == r.diagonal(i) && a.row(i).eq(r.row(i));
            assert_eq!(same, !edge, "state {s:?}");
            assert!(a.row_sum(i) <= 1e-15);
        }
    }

    #[test]
    fn memory_budget_is_enforced() {
        let err = build_operator(&unit(3), 200, Boundary::Absorbing).unwrap_err();
        assert!(matches!(err, Error::MemoryBudget { states, .. } if states == 2 * 401usize.pow(3)));
        assert!(build_operator(&unit(1), 0, Boundary::Absorbing).is_err());
    }

    #[test]
    fn poisson_window_is_normalized() {
        for mean in [0.3, 5.0, 77.7, 5000.0] {
            let w = PoissonWindow::<f64>::new(mean);
            let total: f64 = (w.start()..=w.end()).map(|k| w.weight(k).unwrap()).sum();
            assert!((total - 1.0).abs() < 1e-13);
            let m: f64 = (w.start()..=w.end()).map(|k| k as f64 * w.weight(k).unwrap()).sum();
            assert!((m - mean).abs() < 1e-9 * mean.max(1.0), "{m} vs {mean}");
        }
        let w = PoissonWindow::<f64>::new(2.0);
        assert!((w.weight(0).unwrap() - (-2.0f64).exp()).abs() < 1e-15);
    }

    #[test]
    fn time_zero_is_one() {
        let c = survival(&unit(1), 20, &[0.0]).unwrap();
        assert_eq!(c.lower, vec![1.0]);
        assert_eq!(c.upper, vec![1.0]);
    }

    #[test]
    fn initial_slope_is_minus_gamma() {
        let p = unit(2).with_gamma(0.7);
        let c = survival(&p, 5, &[1e-6, 1e-5]).unwrap();
        for (t, s) in c.times.iter().zip(&c.lower) {
            assert!(((1.0 - s) / t - 0.7).abs() < 1e-4 * 0.7 + 10.0 * t);
        }
    }

    #[test]
    fn bracket_holds_and_tightens() {
        let p = unit(1);
        let times = [1.0, 5.0, 20.0];
        let small = survival(&p, 10, &times).unwrap();
        let large = survival(&p, 20, &times).unwrap();
        for i in 0..times.len() {
            assert!(small.lower[i] <= large.lower[i] + 1e-14);
            assert!(large.upper[i] <= small.upper[i] + 1e-14);
            assert!(large.lower[i] <= large.upper[i]);
        }
        assert!(large.max_gap() < small.max_gap());
    }

    #[test]
    fn default_d1_bracket_is_tight() {
        let c = survival(&unit(1), 300, &[10.0, 20.0, 50.0]).unwrap();
        assert!(c.max_gap() < 1e-8, "gap {}", c.max_gap());
        assert!(survival_within(&unit(1), 5, &[50.0], 1e-6).is_err());
    }

    #[test]
    fn no_killing_survives() {
        let c = survival(&unit(2).with_gamma(0.0), 8, &[3.0]).unwrap();
        assert!((c.upper[0] - 1.0).abs() < 1e-13);
        assert!((c.reflecting[0] - 1.0).abs() < 1e-13);
        assert!(c.lower[0] < 1.0);
    }

    #[test]
    fn long_time_limit_requires_d3() {
        assert!(long_time_limit(&unit(2), 5, 10.0, 1e-4).is_err());
        let v = long_time_limit(&unit(3).with_gamma(0.0), 4, 10.0, 1e-4).unwrap();
        assert!((v.value - 1.0).abs() < 1e-13);
        assert!(v.lower < v.value);
        assert!(matches!(long_time_limit(&unit(3), 4, 2.0, 1e-6), Err(Error::NotStabilized { .. })));
    }

    #[test]
    fn generic_over_f32() {
        let c32 = survival(&ModelParams::<f32>::unit(1), 30, &[2.0f32]).unwrap();
        let c64 = survival(&unit(1), 30, &[2.0]).unwrap();
        assert!((c32.lower[0] as f64 - c64.lower[0]).abs() < 1e-5);
    }

    proptest! {
        #![proptest_config(ProptestConfig::with_cases(24))]

        #[test]
        fn curve_properties(
            d in 1usize..=2,
            kappa in 0.0f64..2.0,
            rho in 0.1f64..2.0,
            gamma in 0.0f64..3.0,
            s0 in 0.1f64..3.0,
            s1 in 0.0f64..3.0,
        ) {
            let p = ModelParams::new(d, kappa, rho, gamma, s0, s1).unwrap();
            let times = [0.0, 0.5, 1.0, 2.0, 4.0];
            let c = survival(&p, 6, &times).unwrap();
            let doubled = survival(&p.with_gamma(2.0 * gamma), 6, &times).unwrap();
            for i in 0..times.len() {
                prop_assert!(0.0 <= c.lower[i] && c.lower[i] <= c.upper[i] + 1e-14 && c.upper[i] <= 1.0);
                prop_assert!(c.reflecting[i] >= c.lower[i] - 1e-14);
                prop_assert!(c.reflecting[i] <= c.upper[i] + 1e-14);
                prop_assert!(doubled.lower[i] <= c.lower[i] + 1e-14);
                prop_assert!(doubled.upper[i] <= c.upper[i] + 1e-14);
                if i > 0 {
                    prop_assert!(c.lower[i] <= c.lower[i - 1] + 1e-14);
                    prop_assert!(c.upper[i] <= c.upper[i - 1] + 1e-14);
                }
            }
        }
    }
}
