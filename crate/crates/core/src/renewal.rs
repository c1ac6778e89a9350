//! Renewal structure of the visits to `(0, 1)`.
//!
//! Every visit to `(0, 1)` lasts an `Exp(2d(kappa + rho) + s1)` time and the
//! returns form a renewal process with inter-arrival time `Z_1`. With
//! `mu = P(a sojourn ends without killing)` the survival probability is
//! `G_mu(t) = E[mu^{N_t}]`, whose Laplace transform only needs
//! `E[exp(-lambda Z_1)]`.
//!
//! After falling dormant on the trap, the relative walk leaves the origin at
//! rate `2d rho` and then races a wake-up clock. In discrete time this is a
//! geometric clock: each trap step is preceded by a wake-up with probability
//! `p`. The location `Y` where the walker wakes has the law of `X_G` given
//! `G < tau_0`, and for `h` harmonic off the origin optional stopping gives
//!
//! `E[h(Y)] P(G < tau_0) = h(e_1) - h(0) (1 - P(G < tau_0))`.

use std::collections::HashMap;

use rand::Rng;
use rand_distr::{Distribution, Exp};
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::green::{generating, green_d3, green_resolvent, potential_kernel};
use crate::model::ModelParams;
use crate::num::{from_usize, lit, Real};
use crate::simulate::{path_rng, BLOCK};
use crate::stats::Moments;

/// Smallest accepted denominator of the discounted transform.
pub const DEGENERATE_DENOMINATOR: f64 = 1e-14;
/// Upper end of the documented validity window of the small-`lambda` expansions.
pub const EXPANSION_VALIDITY: f64 = 1e-2;

/// `hat G_mu(lambda)` together with its inputs.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct DiscountedTransform<T> {
    pub mu: T,
    pub lambda: T,
    /// `E[exp(-lambda Z_1)]`.
    pub laplace_f: T,
    pub value: T,
}

/// `hat G_mu(lambda) = (mu / lambda) (1 - F) / (1 - mu F)` with `F = E[exp(-lambda Z_1)]`.
pub fn discounted_transform<T: Real, F>(mu: T, laplace_f: F, lambda: T) -> Result<DiscountedTransform<T>>
where
    F: Fn(T) -> T,
{
    if !(lambda > T::zero()) {
        return Err(Error::OutOfDomain("transform needs lambda > 0".into()));
    }
    if !(mu > T::zero() && mu <= T::one()) {
        return Err(Error::OutOfDomain("discount mu must lie in (0, 1]".into()));
    }
    let f = laplace_f(lambda);
    if !(f >= T::zero() && f <= T::one()) {
        return Err(Error::OutOfDomain(format!("Laplace transform value {f} outside [0, 1]")));
    }
    // no killing: G is identically one
    if mu == T::one() {
        return Ok(DiscountedTransform { mu, lambda, laplace_f: f, value: T::one() / lambda });
    }
    let denom = T::one() - mu * f;
    if denom < lit(DEGENERATE_DENOMINATOR) {
        return Err(Error::DegenerateDenominator { value: denom.to_f64().unwrap_or(0.0) });
    }
    let value = mu / lambda * (T::one() - f) / denom;
    Ok(DiscountedTransform { mu, lambda, laplace_f: f, value })
}

/// Which switching rate drives the wake-up clock.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum ClockRate {
    /// `s1`, as written in the lemmas.
    Dormancy,
    /// `s0`, the rate at which the model actually wakes a dormant walker.
    Reactivation,
}

/// Geometric clock racing a switching rate against trap steps.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct GeometricClock<T> {
    pub d: usize,
    /// Switching rate `s` the clock is built from.
    pub rate: T,
    pub rho: T,
    /// Continuation probability `2d rho / (s + 2d rho)`.
    pub q: T,
    /// Success probability `s / (s + 2d rho)`.
    pub p: T,
}

impl<T: Real> GeometricClock<T> {
    pub fn new(d: usize, rate: T, rho: T) -> Result<Self> {
        if !(1..=crate::model::MAX_DIM).contains(&d) {
            return Err(Error::OutOfDomain(format!("dimension {d} not supported")));
        }
        if !(rate >= T::zero() && rho > T::zero()) {
            return Err(Error::InvalidParams("clock needs rate >= 0 and rho > 0".into()));
        }
        let trap = from_usize::<T>(2 * d) * rho;
        let q = trap / (rate + trap);
        Ok(Self { d, rate, rho, q, p: rate / (rate + trap) })
    }

    pub fn from_params(params: &ModelParams<T>, which: ClockRate) -> Result<Self> {
        let rate = match which {
            ClockRate::Dormancy => params.s1,
            ClockRate::Reactivation => params.s0,
        };
        Self::new(params.d, rate, params.rho)
    }

    /// Clock driven by `s1`.
    pub fn dormancy(params: &ModelParams<T>) -> Result<Self> {
        Self::from_params(params, ClockRate::Dormancy)
    }

    /// Clock driven by `s0`.
    pub fn reactivation(params: &ModelParams<T>) -> Result<Self> {
        Self::from_params(params, ClockRate::Reactivation)
    }

    /// `P(G < tau_0)` for the discrete walk started at `e_1`.
    pub fn escape_probability(&self) -> Result<T> {
        if !(self.rate > T::zero()) {
            return Err(Error::OutOfDomain("clock escape probability needs a positive rate".into()));
        }
        if self.d == 1 {
            let (s, rho) = (self.rate, self.rho);
            return Ok(((s * s + lit::<T>(4.0) * rho * s).sqrt() - s) / (lit::<T>(2.0) * rho));
        }
        let (g0, g1) = self.green_pair()?;
        Ok(T::one() - g1 / g0)
    }

    /// `(G(0, q), G(e_1, q))` in the generating convention.
    pub fn green_pair(&self) -> Result<(T, T)> {
        let mut x = vec![0i64; self.d];
        let g0 = generating(self.d, &x, self.q)?.value;
        x[0] = 1;
        let g1 = generating(self.d, &x, self.q)?.value;
        Ok((g0, g1))
    }
}

/// `P(G < tau_0)` with the clock driven by `s1`.
pub fn clock_escape_probability<T: Real>(params: &ModelParams<T>) -> Result<T> {
    GeometricClock::dormancy(params)?.escape_probability()
}

/// Runs the discrete walk from `e_1` against the clock. Returns the wake-up
/// position, or `None` when the origin is hit first.
pub fn clock_trial<R: Rng + ?Sized>(d: usize, p: f64, rng: &mut R) -> Option<Vec<i64>> {
    let mut x = vec![0i64; d];
    x[0] = 1;
    loop {
        if rng.random::<f64>() < p {
            return Some(x);
        }
        let dir = rng.random_range(0..2 * d);
        x[dir / 2] += if dir % 2 == 0 { 1 } else { -1 };
        if x.iter().all(|&c| c == 0) {
            return None;
        }
    }
}

/// `|x_1|, ..., |x_d|` sorted: every kernel used here is invariant under
/// sign flips and coordinate permutations.
fn canonical(x: &[i64]) -> Vec<i64> {
    let mut k: Vec<i64> = x.iter().map(|c| c.abs()).collect();
    k.sort_unstable();
    k
}

/// Outcome of `trials` clock trials: the number that woke up before hitting
/// the origin and the histogram of canonical wake-up positions.
#[derive(Debug, Clone, Default, PartialEq)]
pub struct ClockHistogram {
    pub trials: u64,
    pub escaped: u64,
    pub positions: HashMap<Vec<i64>, u64>,
}

impl ClockHistogram {
    pub fn escape_fraction(&self) -> f64 {
        self.escaped as f64 / self.trials as f64
    }

    pub fn escape_stderr(&self) -> f64 {
        let p = self.escape_fraction();
        (p * (1.0 - p) / self.trials as f64).sqrt()
    }

    fn merge(mut self, other: ClockHistogram) -> ClockHistogram {
        self.trials += other.trials;
        self.escaped += other.escaped;
        for (k, n) in other.positions {
            *self.positions.entry(k).or_insert(0) += n;
        }
        self
    }
}

/// Clock trials in parallel, one random stream per trial.
pub fn clock_histogram(d: usize, p: f64, trials: u64, seed: u64) -> ClockHistogram {
    let blocks = trials.div_ceil(BLOCK);
    (0..blocks)
        .into_par_iter()
        .map(|b| {
            let mut h = ClockHistogram::default();
            for i in b * BLOCK..((b + 1) * BLOCK).min(trials) {
                h.trials += 1;
                if let Some(y) = clock_trial(d, p, &mut path_rng(seed, i)) {
                    h.escaped += 1;
                    *h.positions.entry(canonical(&y)).or_insert(0) += 1;
                }
            }
            h
        })
        .reduce(ClockHistogram::default, ClockHistogram::merge)
}

/// Functions harmonic off the origin used by the identity checks.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Harmonic {
    /// `|z|` in `d = 1`.
    AbsD1,
    /// Potential kernel `a(x)` in `d = 2`.
    PotentialD2,
    /// Discrete-time Green function `G_3(x)`.
    GreenD3,
}

impl Harmonic {
    pub fn dim(self) -> usize {
        match self {
            Harmonic::AbsD1 => 1,
            Harmonic::PotentialD2 => 2,
            Harmonic::GreenD3 => 3,
        }
    }

    pub fn eval(self, x: &[i64]) -> Result<f64> {
        if x.len() != self.dim() {
            return Err(Error::DimensionMismatch { state: x.len(), params: self.dim() });
        }
        match self {
            Harmonic::AbsD1 => Ok(x[0].abs() as f64),
            Harmonic::PotentialD2 => Ok(potential_kernel::<f64>(x)?.0),
            Harmonic::GreenD3 => Ok(green_d3::<f64>(x)?.discrete),
        }
    }

    /// Values on a set of canonical points, evaluated in parallel.
    fn table<'a, I>(self, points: I) -> Result<HashMap<Vec<i64>, f64>>
    where
        I: IntoIterator<Item = &'a Vec<i64>>,
    {
        let mut keys: Vec<Vec<i64>> = points.into_iter().cloned().collect();
        keys.sort();
        keys.dedup();
        keys.into_par_iter().map(|k| self.eval(&k).map(|v| (k, v))).collect()
    }
}

impl std::str::FromStr for Harmonic {
    type Err = Error;
    fn from_str(s: &str) -> Result<Self> {
        match s {
            "abs_d1" => Ok(Harmonic::AbsD1),
            "potential_d2" => Ok(Harmonic::PotentialD2),
            "green_d3" => Ok(Harmonic::GreenD3),
            other => Err(Error::InvalidParams(format!("unknown harmonic function {other}"))),
        }
    }
}

/// Monte Carlo check of `E[h(Y)] = h(e_1) / P(G < tau_0)`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct HarmonicReport {
    pub h: Harmonic,
    pub trials: u64,
    /// `P(G < tau_0)` from the closed form or Green ratio.
    pub escape_probability: f64,
    /// Fraction of trials that woke before hitting the origin.
    pub escape_fraction: f64,
    pub escape_stderr: f64,
    /// Conditional mean of `h(Y)` and its standard error.
    pub mean: f64,
    pub stderr: f64,
    pub h_e1: f64,
    pub h_origin: f64,
    /// `h(e_1) / P(G < tau_0)`.
    pub predicted: f64,
    pub z_score: f64,
    /// `(h(e_1) - h(0)(1 - P)) / P`, the optional-stopping value.
    pub stopped_prediction: f64,
    pub stopped_z_score: f64,
}

/// Runs the identity check for `h` with the clock `clock`.
pub fn harmonic_identity_check(clock: &GeometricClock<f64>, h: Harmonic, trials: u64, seed: u64) -> Result<HarmonicReport> {
    if clock.d != h.dim() {
        return Err(Error::DimensionMismatch { state: h.dim(), params: clock.d });
    }
    let p_escape = clock.escape_probability()?;
    let hist = clock_histogram(clock.d, clock.p, trials, seed);
    if hist.escaped < 2 {
        return Err(Error::OutOfDomain("too few trials escaped the origin to condition on".into()));
    }
    let table = h.table(hist.positions.keys())?;
    let mut keys: Vec<&Vec<i64>> = hist.positions.keys().collect();
    keys.sort();
    let mut m = Moments::default();
    for k in keys {
        let v = table[k];
        let n = hist.positions[k] as f64;
        m.count += hist.positions[k];
        m.sum += n * v;
        m.sum_sq += n * v * v;
    }
    let mut e1 = vec![0i64; clock.d];
    let origin = e1.clone();
    e1[0] = 1;
    let h_e1 = h.eval(&e1)?;
    let h_origin = h.eval(&origin)?;
    let predicted = h_e1 / p_escape;
    let stopped = (h_e1 - h_origin * (1.0 - p_escape)) / p_escape;
    let se = m.stderr();
    Ok(HarmonicReport {
        h,
        trials,
        escape_probability: p_escape,
        escape_fraction: hist.escape_fraction(),
        escape_stderr: hist.escape_stderr(),
        mean: m.mean(),
        stderr: se,
        h_e1,
        h_origin,
        predicted,
        z_score: (m.mean() - predicted) / se,
        stopped_prediction: stopped,
        stopped_z_score: (m.mean() - stopped) / se,
    })
}

/// Mean of `h(X_{n ^ tau_0})` for the discrete walk from `e_1`.
pub fn stopped_martingale_mean(h: Harmonic, n: usize, trials: u64, seed: u64) -> Result<Moments> {
    let d = h.dim();
    let blocks = trials.div_ceil(BLOCK);
    let hist: HashMap<Vec<i64>, u64> = (0..blocks)
        .into_par_iter()
        .map(|b| {
            let mut counts: HashMap<Vec<i64>, u64> = HashMap::new();
            for i in b * BLOCK..((b + 1) * BLOCK).min(trials) {
                let mut rng = path_rng(seed, i);
                let mut x = vec![0i64; d];
                x[0] = 1;
                for _ in 0..n {
                    let dir = rng.random_range(0..2 * d);
                    x[dir / 2] += if dir % 2 == 0 { 1 } else { -1 };
                    if x.iter().all(|&c| c == 0) {
                        break;
                    }
                }
                *counts.entry(canonical(&x)).or_insert(0) += 1;
            }
            counts
        })
        .reduce(HashMap::new, |mut a, b| {
            for (k, n) in b {
                *a.entry(k).or_insert(0) += n;
            }
            a
        });
    let table = h.table(hist.keys())?;
    let mut keys: Vec<&Vec<i64>> = hist.keys().collect();
    keys.sort();
    let mut m = Moments::default();
    for k in keys {
        let (v, n) = (table[k], hist[k]);
        m.count += n;
        m.sum += n as f64 * v;
        m.sum_sq += n as f64 * v * v;
    }
    Ok(m)
}

/// Reading of the Green values in the planar ratio `G(0,q) / (G(0,1) + G(e_1,q))`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum PlanarReading {
    /// Every `G_2` is a resolvent kernel with `q` and `1` as `lambda`.
    Resolvent,
    /// `G_2(., q)` in the generating convention; `G_2(0, 1)` then diverges
    /// and the ratio is zero.
    Generating,
}

/// `G_2(0, q) / (G_2(0, 1) + G_2(e_1, q))` under `reading`, `q` from the `s1` clock.
pub fn planar_ratio<T: Real>(params: &ModelParams<T>, reading: PlanarReading) -> Result<T> {
    if params.d != 2 {
        return Err(Error::OutOfDomain("planar ratio needs d = 2".into()));
    }
    if params.s1 == T::zero() {
        return Ok(T::zero());
    }
    let clock = GeometricClock::dormancy(params)?;
    match reading {
        PlanarReading::Resolvent => {
            let g0q = green_resolvent(2, &[0, 0], clock.q)?.value;
            let g01 = green_resolvent(2, &[0, 0], T::one())?.value;
            let g1q = green_resolvent(2, &[1, 0], clock.q)?.value;
            Ok(g0q / (g01 + g1q))
        }
        PlanarReading::Generating => Ok(T::zero()),
    }
}

/// Leading behaviour of `E[exp(-lambda Z_1)]` or `P(Z_1 = inf)`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Z1Law<T> {
    pub params: ModelParams<T>,
    /// `c` in `1 - c sqrt(lambda)` (d = 1) or `1 - c / log(1/lambda)` (d = 2),
    /// as stated in the lemmas. In `d = 2` the resolvent reading.
    pub leading: Option<T>,
    /// `d = 2`, generating reading of the Green ratio.
    pub leading_generating: Option<T>,
    /// The same coefficient with `E[h(Y)]` taken from the model: reactivation
    /// clock, and the trap rate kept in `E[Y]`.
    pub leading_renewal: Option<T>,
    /// `C_{1, rho, kappa, s1} = 1 / (sqrt(kappa + rho) (sqrt(s1^2 + 4 rho s1) - s1))`.
    pub c1: Option<T>,
    /// `d >= 3`.
    pub escape: Option<EscapeProbability<T>>,
}

/// `1 / (sqrt(kappa + rho) (sqrt(s^2 + 4 rho s) - s))`; infinite for `s = 0`.
pub fn c1_theorem<T: Real>(kappa: T, rho: T, s: T) -> T {
    T::one() / ((kappa + rho).sqrt() * ((s * s + lit::<T>(4.0) * rho * s).sqrt() - s))
}

impl<T: Real> Z1Law<T> {
    pub fn new(params: &ModelParams<T>) -> Result<Self> {
        params.validate()?;
        let mut law = Z1Law { params: *params, leading: None, leading_generating: None, leading_renewal: None, c1: None, escape: None };
        let kr = params.kappa + params.rho;
        let (s1, two) = (params.s1, lit::<T>(2.0));
        match params.d {
            1 => {
                let scale = kr.sqrt() * (s1 + two * kr);
                // s1 C_1 vanishes with s1
                let (c1, dormant) = if s1 > T::zero() {
                    let c = c1_theorem(params.kappa, params.rho, s1);
                    (Some(c), kr.sqrt() * s1 * c)
                } else {
                    (None, T::zero())
                };
                law.c1 = c1;
                law.leading = Some(two * (kr + dormant) / scale);
                let wake = if s1 > T::zero() { s1 * expected_wake_distance_d1(params)? } else { T::zero() };
                law.leading_renewal = Some((two * kr + wake) / scale);
            }
            2 => {
                let four_kr = lit::<T>(4.0) * kr;
                let denom = s1 + four_kr;
                let pi = T::PI();
                for reading in [PlanarReading::Resolvent, PlanarReading::Generating] {
                    let c = pi * (four_kr + s1 * planar_ratio(params, reading)?) / denom;
                    match reading {
                        PlanarReading::Resolvent => law.leading = Some(c),
                        PlanarReading::Generating => law.leading_generating = Some(c),
                    }
                }
                let wake = if s1 > T::zero() {
                    s1 / GeometricClock::reactivation(params)?.escape_probability()?
                } else {
                    T::zero()
                };
                law.leading_renewal = Some(pi * (four_kr + wake) / denom);
            }
            _ => law.escape = Some(escape_probability_d3(params)?),
        }
        Ok(law)
    }
}

/// `E|Y| = 2 rho / (sqrt(s0^2 + 4 rho s0) - s0)` for the reactivation clock in `d = 1`.
fn expected_wake_distance_d1<T: Real>(params: &ModelParams<T>) -> Result<T> {
    let clock = GeometricClock::reactivation(params)?;
    Ok(T::one() / clock.escape_probability()?)
}

/// Small-`lambda` expansion of `E[exp(-lambda Z_1)]`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Z1Expansion<T> {
    pub lambda: T,
    /// The lemma's expansion; in `d = 2` with the resolvent reading.
    pub value: T,
    /// `d = 2`, generating reading.
    pub generating: Option<T>,
    /// Expansion with the model's wake-up law.
    pub renewal: T,
    /// False when `lambda` is above [`EXPANSION_VALIDITY`].
    pub within_validity: bool,
}

/// Evaluates the leading-order expansion of `E[exp(-lambda Z_1)]`, `d` in `{1, 2}`.
pub fn z1_laplace_expansion<T: Real>(params: &ModelParams<T>, lambda: T) -> Result<Z1Expansion<T>> {
    if !(1..=2).contains(&params.d) {
        return Err(Error::OutOfDomain("Laplace expansion of Z_1 is for d = 1, 2".into()));
    }
    if !(lambda > T::zero() && lambda < T::one()) {
        return Err(Error::OutOfDomain("expansion needs 0 < lambda < 1".into()));
    }
    let law = Z1Law::new(params)?;
    let scale = if params.d == 1 { lambda.sqrt() } else { T::one() / (T::one() / lambda).ln() };
    let at = |c: T| T::one() - c * scale;
    Ok(Z1Expansion {
        lambda,
        value: at(law.leading.expect("d <= 2 has a leading term")),
        generating: law.leading_generating.map(at),
        renewal: at(law.leading_renewal.expect("d <= 2 has a renewal term")),
        within_validity: lambda <= lit(EXPANSION_VALIDITY),
    })
}

/// Normalization of `G_d(0)` and `G_d(e_1)` in the transient formulas.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Normalization {
    /// Occupation time of the walk with total jump rate `2d`: discrete value over `2d`.
    Occupation,
    /// Expected visits of the discrete-time walk.
    Discrete,
}

impl Normalization {
    pub const ALL: [Normalization; 2] = [Normalization::Occupation, Normalization::Discrete];
}

impl std::fmt::Display for Normalization {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(match self {
            Normalization::Occupation => "occupation",
            Normalization::Discrete => "discrete",
        })
    }
}

/// Lemma-form escape probability under one normalization.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct EscapeReading<T> {
    pub normalization: Normalization,
    pub g0: T,
    pub g_e1: T,
    /// `K_d = G(e_1) G(0,q) / (G(0,q) - G(e_1,q))`.
    pub k_d: T,
    /// `1 - (2d(kappa+rho)^2 + s1 K_d) / ((s1 + 2d(kappa+rho)) G(0))`, unclamped.
    pub escape: T,
    /// `1 / (1 - escape)`.
    pub renewal_green: T,
    /// `1 - gamma G / (1 + gamma G)` with `G` the value above.
    pub limit: T,
}

impl<T: Real> EscapeReading<T> {
    pub fn is_probability(&self) -> bool {
        self.escape >= T::zero() && self.escape <= T::one()
    }
}

/// Escape probability `P(Z_1 = inf)` in `d >= 3`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EscapeProbability<T> {
    pub readings: Vec<EscapeReading<T>>,
    /// `P(G < tau_0)` for the reactivation clock.
    pub wake_escape: T,
    /// `P(Z_1 = inf)` from the renewal decomposition with the model's clock:
    /// `(2d(kappa+rho) + s1 / P) / ((2d(kappa+rho) + s1) G_disc(0))`.
    pub renewal_escape: T,
    /// Expected time in `(0, 1)` from `(0, 1)`: `1 / (P(Z_1 = inf) (2d(kappa+rho) + s1))`.
    pub renewal_green: T,
    /// `1 / (1 + gamma G)` with the renewal Green value.
    pub renewal_limit: T,
}

impl<T: Real> EscapeProbability<T> {
    pub fn reading(&self, normalization: Normalization) -> &EscapeReading<T> {
        self.readings.iter().find(|r| r.normalization == normalization).expect("both readings present")
    }

    /// The reading under `normalization`, or a normalization failure if its
    /// escape probability is not a probability.
    pub fn checked(&self, normalization: Normalization) -> Result<&EscapeReading<T>> {
        let r = self.reading(normalization);
        if r.is_probability() {
            Ok(r)
        } else {
            Err(Error::NormalizationFailure { reading: normalization.to_string(), value: r.escape.to_f64().unwrap_or(f64::NAN) })
        }
    }
}

/// Discrete-time `G_d(0)` and `G_d(e_1)` at `s = 1`.
pub fn transient_green<T: Real>(d: usize) -> Result<(T, T)> {
    let mut x = vec![0i64; d];
    let g0 = green_d3::<T>(&x)?.discrete;
    x[0] = 1;
    let g1 = green_d3::<T>(&x)?.discrete;
    Ok((g0, g1))
}

/// `K_d = G(e_1) G(0, q) / (G(0, q) - G(e_1, q))` with `q` from the `s1`
/// clock and `G(e_1)` in `normalization`; zero when `s1 = 0`.
pub fn k_d<T: Real>(params: &ModelParams<T>, normalization: Normalization) -> Result<T> {
    let (_, g1) = transient_green::<T>(params.d)?;
    let g1 = normalize(g1, params.d, normalization);
    if params.s1 == T::zero() {
        return Ok(T::zero());
    }
    let (g0q, g1q) = GeometricClock::dormancy(params)?.green_pair()?;
    Ok(g1 * g0q / (g0q - g1q))
}

fn normalize<T: Real>(discrete: T, d: usize, normalization: Normalization) -> T {
    match normalization {
        Normalization::Occupation => discrete / from_usize(2 * d),
        Normalization::Discrete => discrete,
    }
}

/// Evaluates the transient escape probability under both normalizations and
/// along the renewal route.
pub fn escape_probability_d3<T: Real>(params: &ModelParams<T>) -> Result<EscapeProbability<T>> {
    params.validate()?;
    if params.d < 3 {
        return Err(Error::OutOfDomain("escape probability needs d >= 3".into()));
    }
    let d = params.d;
    let (g0_disc, g1_disc) = transient_green::<T>(d)?;
    let kr = params.kappa + params.rho;
    let active = params.active_jump_rate();
    let exit = params.regeneration_exit_rate();
    let s1 = params.s1;
    let ratio = if s1 > T::zero() {
        let (g0q, g1q) = GeometricClock::dormancy(params)?.green_pair()?;
        g0q / (g0q - g1q)
    } else {
        T::zero()
    };
    let readings = Normalization::ALL
        .iter()
        .map(|&n| {
            let (g0, g1) = (normalize(g0_disc, d, n), normalize(g1_disc, d, n));
            let k = g1 * ratio;
            let escape = T::one() - (active * kr + s1 * k) / (exit * g0);
            let g = T::one() / (T::one() - escape);
            EscapeReading { normalization: n, g0, g_e1: g1, k_d: k, escape, renewal_green: g, limit: T::one() / (T::one() + params.gamma * g) }
        })
        .collect();
    let wake_escape = GeometricClock::reactivation(params)?.escape_probability()?;
    let renewal_escape = (active + s1 / wake_escape) / (exit * g0_disc);
    let renewal_green = T::one() / (renewal_escape * exit);
    Ok(EscapeProbability {
        readings,
        wake_escape,
        renewal_escape,
        renewal_green,
        renewal_limit: T::one() / (T::one() + params.gamma * renewal_green),
    })
}

/// One regeneration time drawn from its decomposition: the sojourn in
/// `(0, 1)`, then either an active first passage from `e_1`, or a dormant
/// phase made of excursions back to the trap that finish before the wake-up
/// clock, the wake-up at `Y`, and an active first passage from `Y`.
///
/// `clock` sets the wake-up rate used while dormant. Returns `horizon` and
/// `true` when the sample is censored.
pub fn sample_z1_decomposed<R: Rng + ?Sized>(params: &ModelParams<f64>, clock: ClockRate, horizon: f64, rng: &mut R) -> (f64, bool) {
    let d = params.d;
    let exit = params.regeneration_exit_rate();
    let active_rate = params.active_jump_rate();
    let dormant_rate = params.dormant_jump_rate();
    let wake = match clock {
        ClockRate::Dormancy => params.s1,
        ClockRate::Reactivation => params.s0,
    };
    let mut t = Exp::new(exit).expect("positive exit rate").sample(rng);
    let mut start = vec![0i64; d];
    start[0] = 1;
    let event_a = rng.random::<f64>() * exit < active_rate;
    if !event_a {
        let leave = Exp::new(dormant_rate).expect("positive trap rate");
        let ring = Exp::new(wake).expect("positive wake-up rate");
        loop {
            // leave the origin, then race the clock
            t += leave.sample(rng);
            let mut x = vec![0i64; d];
            let dir = rng.random_range(0..2 * d);
            x[dir / 2] += if dir % 2 == 0 { 1 } else { -1 };
            let deadline = ring.sample(rng);
            let mut clock_time = 0.0;
            let returned = loop {
                let dt = leave.sample(rng);
                if clock_time + dt > deadline {
                    break false;
                }
                clock_time += dt;
                let dir = rng.random_range(0..2 * d);
                x[dir / 2] += if dir % 2 == 0 { 1 } else { -1 };
                if x.iter().all(|&c| c == 0) {
                    break true;
                }
            };
            if t > horizon {
                return (horizon, true);
            }
            if returned {
                t += clock_time;
            } else {
                t += deadline;
                start = x;
                break;
            }
        }
    }
    match first_passage(&start, active_rate, horizon - t, rng) {
        Some(r) => (t + r, false),
        None => (horizon, true),
    }
}

/// First passage time to the origin of a walk with total rate `rate`, or
/// `None` beyond `budget`.
fn first_passage<R: Rng + ?Sized>(start: &[i64], rate: f64, budget: f64, rng: &mut R) -> Option<f64> {
    if budget <= 0.0 {
        return None;
    }
    let step = Exp::new(rate).expect("positive rate");
    let d = start.len();
    let mut x = start.to_vec();
    let mut t = 0.0;
    loop {
        t += step.sample(rng);
        if t > budget {
            return None;
        }
        let dir = rng.random_range(0..2 * d);
        x[dir / 2] += if dir % 2 == 0 { 1 } else { -1 };
        if x.iter().all(|&c| c == 0) {
            return Some(t);
        }
    }
}
