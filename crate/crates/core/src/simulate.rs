//! Exact event-driven sampling of the pair process.
//!
//! Paths are driven by competing exponential clocks; there is no time
//! discretisation. Every path owns an independent ChaCha8 stream selected by
//! `(master_seed, path_index)`, so results are reproducible regardless of how
//! paths are scheduled across threads.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, Exp1, Gamma};
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::model::{ModelParams, PairState, MAX_DIM};
use crate::stats::Moments;

/// Paths per deterministic reduction block.
pub const BLOCK: u64 = 1024;

/// Default censoring horizon for regeneration samples in `d >= 3`.
pub const DEFAULT_Z1_HORIZON: f64 = 1e4;

/// Survival estimator.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Estimator {
    /// Weight each path by `exp(-gamma L_t)`; paths never read `gamma`.
    Exposure,
    /// Kill at rate `gamma` while in `(0, 1)` and count survivors.
    HardKill,
}

/// Result of one path up to the horizon.
#[derive(Debug, Clone, PartialEq)]
pub struct TrajectoryOutcome {
    /// Time spent in `(0, 1)`, up to the horizon or the killing time.
    pub exposure: f64,
    /// Set in hard-kill mode only.
    pub survived: Option<bool>,
    pub final_state: PairState,
}

/// One sample of the regeneration time `Z_1`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct RegenerationSample {
    /// Return time, or the horizon when censored.
    pub value: f64,
    pub censored: bool,
}

/// Monte Carlo estimate of the annealed survival probability.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SurvivalEstimate {
    pub time: f64,
    pub mean: f64,
    pub stderr: f64,
    pub paths: u64,
    pub seed: u64,
    pub estimator: Estimator,
}

/// The random stream of path `path` under `master_seed`.
pub fn path_rng(master_seed: u64, path: u64) -> ChaCha8Rng {
    let mut rng = ChaCha8Rng::seed_from_u64(master_seed);
    rng.set_stream(path);
    rng
}

#[derive(Clone, Copy)]
struct Walker {
    z: [i64; MAX_DIM],
    d: usize,
    active: bool,
}

impl Walker {
    fn from_state(state: &PairState) -> Self {
        let mut z = [0; MAX_DIM];
        z[..state.dim()].copy_from_slice(&state.z);
        Self { z, d: state.dim(), active: state.active }
    }

    fn to_state(self) -> PairState {
        PairState { z: self.z[..self.d].to_vec(), active: self.active }
    }

    #[inline]
    fn on_trap(&self) -> bool {
        self.z[..self.d].iter().all(|&c| c == 0)
    }

    #[inline]
    fn step(&mut self, direction: usize) {
        self.z[direction >> 1] += if direction & 1 == 0 { 1 } else { -1 };
    }
}

/// Rates of the current state: per-neighbour lattice rate and switch rate.
#[inline]
fn rates(p: &ModelParams<f64>, w: &Walker) -> (f64, f64, bool) {
    let on = w.on_trap();
    let lattice = if w.active { p.kappa + p.rho } else { p.rho };
    let switch = match (w.active, on) {
        (true, true) => p.s1,
        (false, false) => p.s0,
        _ => 0.0,
    };
    (lattice, switch, w.active && on)
}

#[inline]
fn exp_sample<R: Rng + ?Sized>(rng: &mut R, rate: f64) -> f64 {
    let e: f64 = Exp1.sample(rng);
    e / rate
}

/// Outcome of the core loop: exposure at each checkpoint, killing time.
struct Run {
    exposures: Vec<f64>,
    kill_time: Option<f64>,
    last: Walker,
}

/// Runs one path through sorted `checkpoints`, recording `L_t` at each.
fn run<R: Rng + ?Sized>(
    p: &ModelParams<f64>,
    start: &PairState,
    checkpoints: &[f64],
    kill: bool,
    rng: &mut R,
) -> Run {
    let mut w = Walker::from_state(start);
    let n_dir = 2 * p.d;
    let mut exposures = Vec::with_capacity(checkpoints.len());
    let horizon = checkpoints.last().copied().unwrap_or(0.0);
    let mut t = 0.0;
    let mut exposure = 0.0;
    let mut next = 0;
    while next < checkpoints.len() && checkpoints[next] <= 0.0 {
        exposures.push(0.0);
        next += 1;
    }
    let mut kill_time = None;
    while next < checkpoints.len() {
        let (lattice, switch, regen) = rates(p, &w);
        let kill_rate = if kill && regen { p.gamma } else { 0.0 };
        let total = n_dir as f64 * lattice + switch + kill_rate;
        let hold = exp_sample(rng, total);
        let t_next = t + hold;
        while next < checkpoints.len() && checkpoints[next] <= t_next {
            let extra = if regen { checkpoints[next] - t } else { 0.0 };
            exposures.push(exposure + extra);
            next += 1;
        }
        if t_next >= horizon {
            break;
        }
        if regen {
            exposure += hold;
        }
        t = t_next;
        let u = rng.random::<f64>() * total;
        let lattice_total = n_dir as f64 * lattice;
        if u < lattice_total {
            let dir = ((u / lattice) as usize).min(n_dir - 1);
            w.step(dir);
        } else if u < lattice_total + switch {
            w.active = !w.active;
        } else {
            kill_time = Some(t);
            // killed paths keep their exposure frozen for the remaining checkpoints
            while exposures.len() < checkpoints.len() {
                exposures.push(exposure);
            }
            break;
        }
    }
    Run { exposures, kill_time, last: w }
}

/// Samples one path of the pair process up to `horizon`.
pub fn simulate_path<R: Rng + ?Sized>(
    params: &ModelParams<f64>,
    start: &PairState,
    horizon: f64,
    estimator: Estimator,
    rng: &mut R,
) -> Result<TrajectoryOutcome> {
    if start.dim() != params.d {
        return Err(Error::DimensionMismatch { state: start.dim(), params: params.d });
    }
    if !(horizon >= 0.0) {
        return Err(Error::OutOfDomain(format!("horizon must be >= 0, got {horizon}")));
    }
    let kill = estimator == Estimator::HardKill;
    let r = run(params, start, &[horizon], kill, rng);
    Ok(TrajectoryOutcome {
        exposure: r.exposures[0],
        survived: kill.then_some(r.kill_time.is_none()),
        final_state: r.last.to_state(),
    })
}

/// Exposure `L_t` at each of the sorted `times` along one path.
pub fn exposure_path<R: Rng + ?Sized>(params: &ModelParams<f64>, start: &PairState, times: &[f64], rng: &mut R) -> Vec<f64> {
    run(params, start, times, false, rng).exposures
}

/// Killing time of one hard-kill path, `None` if it survives past `horizon`.
pub fn kill_time<R: Rng + ?Sized>(params: &ModelParams<f64>, start: &PairState, horizon: f64, rng: &mut R) -> Option<f64> {
    run(params, start, &[horizon], true, rng).kill_time
}

fn check_times(times: &[f64]) -> Result<()> {
    if times.iter().any(|t| !(*t >= 0.0) || !t.is_finite()) || times.windows(2).any(|w| w[0] > w[1]) {
        return Err(Error::OutOfDomain("times must be finite, non-negative and sorted".into()));
    }
    Ok(())
}

/// Runs `paths` independent paths in deterministic blocks; `f` maps a path
/// index to one value per output slot.
pub fn parallel_moments<F>(paths: u64, slots: usize, f: F) -> Vec<Moments>
where
    F: Fn(u64, &mut [Moments]) + Sync,
{
    let blocks = paths.div_ceil(BLOCK);
    let partial: Vec<Vec<Moments>> = (0..blocks)
        .into_par_iter()
        .map(|b| {
            let mut m = vec![Moments::default(); slots];
            let end = ((b + 1) * BLOCK).min(paths);
            for i in b * BLOCK..end {
                f(i, &mut m);
            }
            m
        })
        .collect();
    let mut total = vec![Moments::default(); slots];
    for block in &partial {
        for (t, m) in total.iter_mut().zip(block) {
            t.merge(m);
        }
    }
    total
}

/// Estimates `E_{(0,1)}[exp(-gamma L_t)]` at each time of the sorted grid.
pub fn estimate_survival(
    params: &ModelParams<f64>,
    times: &[f64],
    paths: u64,
    seed: u64,
    estimator: Estimator,
) -> Result<Vec<SurvivalEstimate>> {
    params.validate()?;
    check_times(times)?;
    let start = PairState::origin_active(params.d);
    let horizon = times.last().copied().unwrap_or(0.0);
    let moments = parallel_moments(paths, times.len(), |i, m| {
        let mut rng = path_rng(seed, i);
        match estimator {
            Estimator::Exposure => {
                let ex = exposure_path(params, &start, times, &mut rng);
                for (slot, l) in m.iter_mut().zip(ex) {
                    slot.push((-params.gamma * l).exp());
                }
            }
            Estimator::HardKill => {
                let k = kill_time(params, &start, horizon, &mut rng);
                for (slot, &t) in m.iter_mut().zip(times) {
                    let alive = k.is_none_or(|kt| kt > t);
                    slot.push(if alive { 1.0 } else { 0.0 });
                }
            }
        }
    });
    Ok(times
        .iter()
        .zip(moments)
        .map(|(&time, m)| SurvivalEstimate { time, mean: m.mean(), stderr: m.stderr(), paths, seed, estimator })
        .collect())
}

/// Estimates `E[L_t]` at each time of the sorted grid.
pub fn estimate_exposure(params: &ModelParams<f64>, times: &[f64], paths: u64, seed: u64) -> Result<Vec<Moments>> {
    params.validate()?;
    check_times(times)?;
    let start = PairState::origin_active(params.d);
    Ok(parallel_moments(paths, times.len(), |i, m| {
        let mut rng = path_rng(seed, i);
        for (slot, l) in m.iter_mut().zip(exposure_path(params, &start, times, &mut rng)) {
            slot.push(l);
        }
    }))
}

/// Samples the regeneration time `Z_1`: leave `(0, 1)`, then run until the
/// first return or until `horizon`.
///
/// Active excursions away from the trap are plain simple random walks of
/// total rate `2d (kappa + rho)`; their jump sequence is drawn step by step
/// and the elapsed time as a Gamma variate per batch of steps, which has the
/// same law as drawing every holding time.
pub fn sample_z1<R: Rng + ?Sized>(params: &ModelParams<f64>, horizon: f64, rng: &mut R) -> RegenerationSample {
    let mut w = Walker { z: [0; MAX_DIM], d: params.d, active: true };
    let n_dir = 2 * params.d;
    let mut t = 0.0;
    loop {
        if w.active && !w.on_trap() {
            match active_excursion(params, &mut w, horizon - t, rng) {
                Some(dt) => return RegenerationSample { value: t + dt, censored: false },
                None => return RegenerationSample { value: horizon, censored: true },
            }
        }
        let (lattice, switch, _) = rates(params, &w);
        let total = n_dir as f64 * lattice + switch;
        t += exp_sample(rng, total);
        if t >= horizon {
            return RegenerationSample { value: horizon, censored: true };
        }
        let u = rng.random::<f64>() * total;
        if u < n_dir as f64 * lattice {
            w.step(((u / lattice) as usize).min(n_dir - 1));
        } else {
            w.active = !w.active;
        }
        if w.active && w.on_trap() {
            return RegenerationSample { value: t, censored: false };
        }
    }
}

/// Runs an active walk from `w` until it hits the origin. Returns the elapsed
/// time, or `None` if that exceeds `budget`.
fn active_excursion<R: Rng + ?Sized>(params: &ModelParams<f64>, w: &mut Walker, budget: f64, rng: &mut R) -> Option<f64> {
    const BATCH: u32 = 64;
    let rate = params.active_jump_rate();
    let n_dir = 2 * params.d;
    let mut elapsed = 0.0;
    loop {
        let mut steps = 0u32;
        let mut hit = false;
        if params.d == 1 {
            let bits: u64 = rng.random();
            while steps < BATCH {
                w.z[0] += if (bits >> steps) & 1 == 1 { 1 } else { -1 };
                steps += 1;
                if w.z[0] == 0 {
                    hit = true;
                    break;
                }
            }
        } else {
            while steps < BATCH {
                w.step(rng.random_range(0..n_dir));
                steps += 1;
                if w.on_trap() {
                    hit = true;
                    break;
                }
            }
        }
        elapsed += gamma_time(steps, rate, rng);
        if elapsed > budget {
            return None;
        }
        if hit {
            return Some(elapsed);
        }
    }
}

fn gamma_time<R: Rng + ?Sized>(steps: u32, rate: f64, rng: &mut R) -> f64 {
    if steps == 1 {
        exp_sample(rng, rate)
    } else {
        Gamma::new(steps as f64, 1.0 / rate).expect("positive shape and scale").sample(rng)
    }
}

/// Plain event-by-event sampler of `Z_1`, kept as a cross-check of
/// [`sample_z1`].
pub fn sample_z1_event_driven<R: Rng + ?Sized>(params: &ModelParams<f64>, horizon: f64, rng: &mut R) -> RegenerationSample {
    let mut w = Walker { z: [0; MAX_DIM], d: params.d, active: true };
    let n_dir = 2 * params.d;
    let mut t = 0.0;
    loop {
        let (lattice, switch, _) = rates(params, &w);
        let total = n_dir as f64 * lattice + switch;
        t += exp_sample(rng, total);
        if t >= horizon {
            return RegenerationSample { value: horizon, censored: true };
        }
        let u = rng.random::<f64>() * total;
        if u < n_dir as f64 * lattice {
            w.step(((u / lattice) as usize).min(n_dir - 1));
        } else {
            w.active = !w.active;
        }
        if w.active && w.on_trap() {
            return RegenerationSample { value: t, censored: false };
        }
    }
}

/// Draws `n` regeneration samples with per-sample streams.
pub fn sample_z1_many(params: &ModelParams<f64>, horizon: f64, n: u64, seed: u64) -> Vec<RegenerationSample> {
    (0..n)
        .into_par_iter()
        .map(|i| sample_z1(params, horizon, &mut path_rng(seed, i)))
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;

    fn unit(d: usize) -> ModelParams<f64> {
        ModelParams::unit(d)
    }

    #[test]
    fn zero_horizon_is_empty() {
        let mut rng = path_rng(1, 0);
        let start = PairState::origin_active(2);
        let out = simulate_path(&unit(2), &start, 0.0, Estimator::Exposure, &mut rng).unwrap();
        assert_eq!(out.exposure, 0.0);
        assert_eq!(out.final_state, start);
        assert_eq!(out.survived, None);
    }

    #[test]
    fn exposure_ignores_gamma() {
        let start = PairState::origin_active(1);
        for seed in 0..20 {
            let a = simulate_path(&unit(1), &start, 30.0, Estimator::Exposure, &mut path_rng(seed, 3)).unwrap();
            let b = simulate_path(&unit(1).with_gamma(7.5), &start, 30.0, Estimator::Exposure, &mut path_rng(seed, 3)).unwrap();
            assert_eq!(a, b);
        }
    }

    #[test]
    fn exposure_bounds() {
        let start = PairState::origin_active(1);
        for seed in 0..200 {
            let out = simulate_path(&unit(1), &start, 5.0, Estimator::Exposure, &mut path_rng(seed, 0)).unwrap();
            assert!(out.exposure > 0.0 && out.exposure <= 5.0);
        }
        let away = PairState::new(vec![50], true);
        let out = simulate_path(&unit(1), &away, 1.0, Estimator::Exposure, &mut path_rng(0, 0)).unwrap();
        assert_eq!(out.exposure, 0.0);
    }

    #[test]
    fn checkpoint_exposures_match_single_horizon_runs() {
        let p = unit(2);
        let start = PairState::origin_active(2);
        let times = [0.0, 1.0, 4.0, 9.0];
        for seed in 0..50 {
            let all = exposure_path(&p, &start, &times, &mut path_rng(seed, 1));
            let last = simulate_path(&p, &start, 9.0, Estimator::Exposure, &mut path_rng(seed, 1)).unwrap();
            assert_eq!(all[3], last.exposure);
            assert!(all.windows(2).all(|w| w[0] <= w[1]));
            assert_eq!(all[0], 0.0);
        }
    }

    #[test]
    fn without_dormancy_walker_stays_active() {
        let p = unit(1).with_s1(0.0);
        let start = PairState::origin_active(1);
        for seed in 0..100 {
            let out = simulate_path(&p, &start, 20.0, Estimator::Exposure, &mut path_rng(seed, 0)).unwrap();
            assert!(out.final_state.active);
        }
    }

    #[test]
    fn hard_kill_sets_survival_flag() {
        let p = unit(1).with_gamma(50.0);
        let start = PairState::origin_active(1);
        let out = simulate_path(&p, &start, 10.0, Estimator::HardKill, &mut path_rng(4, 0)).unwrap();
        assert!(out.survived.is_some());
        let zero = simulate_path(&unit(1).with_gamma(0.0), &start, 10.0, Estimator::HardKill, &mut path_rng(4, 0)).unwrap();
        assert_eq!(zero.survived, Some(true));
    }

    #[test]
    fn survival_estimates_are_reproducible() {
        let p = unit(1);
        let a = estimate_survival(&p, &[1.0, 2.0], 3000, 9, Estimator::Exposure).unwrap();
        let b = estimate_survival(&p, &[1.0, 2.0], 3000, 9, Estimator::Exposure).unwrap();
        assert_eq!(a, b);
        let pool = rayon::ThreadPoolBuilder::new().num_threads(3).build().unwrap();
        let c = pool.install(|| estimate_survival(&p, &[1.0, 2.0], 3000, 9, Estimator::Exposure).unwrap());
        assert_eq!(a, c);
    }

    #[test]
    fn first_sojourn_equals_exposure_before_first_exit() {
        // exposure up to a tiny horizon equals that horizon while still in (0, 1)
        let p = unit(1);
        let start = PairState::origin_active(1);
        let n = 100_000u64;
        let rate = p.regeneration_exit_rate();
        // P(still in (0,1) at t) = exp(-rate t)
        let t = 0.1;
        let m = parallel_moments(n, 1, |i, m| {
            let out = simulate_path(&p, &start, t, Estimator::Exposure, &mut path_rng(5, i)).unwrap();
            m[0].push(if out.exposure == t && out.final_state == start { 1.0 } else { 0.0 });
        });
        let expected = (-rate * t).exp();
        assert!((m[0].mean() - expected).abs() < 3.0 * m[0].stderr() + 1e-3);
    }

    #[test]
    fn reflection_symmetry_of_positions() {
        let p = unit(1);
        let start = PairState::origin_active(1);
        let n = 50_000u64;
        let m = parallel_moments(n, 2, |i, m| {
            let out = simulate_path(&p, &start, 3.0, Estimator::Exposure, &mut path_rng(21, i)).unwrap();
            let z = out.final_state.z[0];
            m[0].push(if z == 2 { 1.0 } else { 0.0 });
            m[1].push(if z == -2 { 1.0 } else { 0.0 });
        });
        let z = crate::stats::z_score(m[0].mean(), m[0].stderr(), m[1].mean(), m[1].stderr());
        assert!(z < 3.5, "z = {z}");
    }

    #[test]
    fn exposure_and_hard_kill_agree() {
        let p = unit(1);
        let a = estimate_survival(&p, &[5.0], 100_000, 3, Estimator::Exposure).unwrap()[0];
        let b = estimate_survival(&p, &[5.0], 100_000, 4, Estimator::HardKill).unwrap()[0];
        let z = crate::stats::z_score(a.mean, a.stderr, b.mean, b.stderr);
        assert!(z < 3.0, "z = {z}");
    }

    #[test]
    fn z1_first_sojourn_mean() {
        // the regeneration sampler's first holding time is the exit time of (0,1);
        // with s1 huge the walker almost surely falls dormant, so Z_1 >= sojourn
        let p = unit(1);
        let samples = sample_z1_many(&p, 1e3, 2000, 5);
        assert!(samples.iter().all(|s| s.value > 0.0 && s.value <= 1e3));
        assert!(samples.iter().filter(|s| s.censored).all(|s| s.value == 1e3));
    }

    #[test]
    fn fast_and_event_driven_z1_agree() {
        // two-sample Kolmogorov-Smirnov on the truncated law
        for d in [1usize, 2] {
            let p = unit(d).with_s0(0.7);
            let n = 20_000u64;
            let horizon = 200.0;
            let mut a: Vec<f64> = (0..n).map(|i| sample_z1(&p, horizon, &mut path_rng(31, i)).value).collect();
            let mut b: Vec<f64> = (0..n).map(|i| sample_z1_event_driven(&p, horizon, &mut path_rng(32, i)).value).collect();
            a.sort_by(f64::total_cmp);
            b.sort_by(f64::total_cmp);
            let ks = ks_statistic(&a, &b);
            // alpha = 0.001 critical value
            let crit = 1.95 * (2.0 / n as f64).sqrt();
            assert!(ks < crit, "d = {d}: KS {ks} >= {crit}");
        }
    }

    pub(crate) fn ks_statistic(a: &[f64], b: &[f64]) -> f64 {
        let (mut i, mut j, mut best) = (0usize, 0usize, 0.0f64);
        while i < a.len() && j < b.len() {
            let x = a[i].min(b[j]);
            while i < a.len() && a[i] <= x {
                i += 1;
            }
            while j < b.len() && b[j] <= x {
                j += 1;
            }
            best = best.max((i as f64 / a.len() as f64 - j as f64 / b.len() as f64).abs());
        }
        best
    }
}
