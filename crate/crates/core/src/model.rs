//! Parameters and state of the relative walker/trap pair process.
//!
//! The walker `X` and the trap `Y` are never simulated separately. The pair
//! `(Z, alpha)` with `Z = X - Y` is itself Markov: every lattice neighbour of
//! `z` is reached at rate `alpha * kappa + rho`, an active walker sitting on
//! the trap falls dormant at rate `s1`, and a dormant walker away from the
//! trap wakes up at rate `s0`. A dormant walker on the trap cannot wake up.
//!
//! All jump rates are per neighbour; a walk with per-neighbour rate `r` has
//! total jump rate `2 d r`.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::num::{from_usize, Real};

/// Largest supported lattice dimension.
pub const MAX_DIM: usize = 5;

/// Rate parameters of the model.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ModelParams<T> {
    /// Lattice dimension, `1..=5`.
    pub d: usize,
    /// Per-neighbour jump rate of an active walker.
    pub kappa: T,
    /// Per-neighbour jump rate of the trap.
    pub rho: T,
    /// Killing rate while active and on the trap.
    pub gamma: T,
    /// Wake-up rate of a dormant walker away from the trap.
    pub s0: T,
    /// Dormancy rate of an active walker on the trap.
    pub s1: T,
}

impl<T: Real> ModelParams<T> {
    /// Validated constructor.
    pub fn new(d: usize, kappa: T, rho: T, gamma: T, s0: T, s1: T) -> Result<Self> {
        let params = Self { d, kappa, rho, gamma, s0, s1 };
        params.validate()?;
        Ok(params)
    }

    /// All rates equal to one in dimension `d`.
    pub fn unit(d: usize) -> Self {
        Self { d, kappa: T::one(), rho: T::one(), gamma: T::one(), s0: T::one(), s1: T::one() }
    }

    pub fn validate(&self) -> Result<()> {
        let fail = |msg: &str| Err(Error::InvalidParams(msg.to_string()));
        if !(1..=MAX_DIM).contains(&self.d) {
            return fail("d must be in 1..=5");
        }
        let finite = [self.kappa, self.rho, self.gamma, self.s0, self.s1];
        if finite.iter().any(|x| !x.is_finite()) {
            return fail("all rates must be finite");
        }
        if self.kappa < T::zero() {
            return fail("kappa must be >= 0");
        }
        if self.rho <= T::zero() {
            return fail("rho must be > 0");
        }
        if self.gamma < T::zero() {
            return fail("gamma must be >= 0");
        }
        if self.s0 <= T::zero() {
            return fail("s0 must be > 0");
        }
        if self.s1 < T::zero() {
            return fail("s1 must be >= 0");
        }
        Ok(())
    }

    /// Number of lattice neighbours, `2d`.
    pub fn neighbours(&self) -> usize {
        2 * self.d
    }

    /// `2d (kappa + rho)`: total jump rate of the relative walk while active.
    pub fn active_jump_rate(&self) -> T {
        from_usize::<T>(self.neighbours()) * (self.kappa + self.rho)
    }

    /// `2d rho`: total jump rate of the relative walk while dormant.
    pub fn dormant_jump_rate(&self) -> T {
        from_usize::<T>(self.neighbours()) * self.rho
    }

    /// Exit rate of `(0, 1)` without killing: `2d (kappa + rho) + s1`.
    pub fn regeneration_exit_rate(&self) -> T {
        self.active_jump_rate() + self.s1
    }

    /// Probability that a sojourn in `(0, 1)` ends without killing.
    pub fn mu(&self) -> T {
        let exit = self.regeneration_exit_rate();
        exit / (exit + self.gamma)
    }

    pub fn with_gamma(mut self, gamma: T) -> Self {
        self.gamma = gamma;
        self
    }

    pub fn with_s0(mut self, s0: T) -> Self {
        self.s0 = s0;
        self
    }

    pub fn with_s1(mut self, s1: T) -> Self {
        self.s1 = s1;
        self
    }

    /// Per-neighbour lattice rate in activity state `active`.
    pub fn lattice_rate(&self, active: bool) -> T {
        if active {
            self.kappa + self.rho
        } else {
            self.rho
        }
    }

    /// Closed-form total exit rate of a state, killing excluded.
    pub fn exit_rate(&self, state: &PairState) -> T {
        let on_trap = state.on_trap();
        let switch = match (state.active, on_trap) {
            (true, true) => self.s1,
            (false, false) => self.s0,
            _ => T::zero(),
        };
        from_usize::<T>(self.neighbours()) * self.lattice_rate(state.active) + switch
    }
}

/// Relative position and activity flag.
#[derive(Debug, Clone, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct PairState {
    pub z: Vec<i64>,
    pub active: bool,
}

impl PairState {
    pub fn new(z: Vec<i64>, active: bool) -> Self {
        Self { z, active }
    }

    /// The regeneration state `(0, 1)`.
    pub fn origin_active(d: usize) -> Self {
        Self { z: vec![0; d], active: true }
    }

    pub fn dim(&self) -> usize {
        self.z.len()
    }

    pub fn on_trap(&self) -> bool {
        self.z.iter().all(|&c| c == 0)
    }

    pub fn is_regeneration(&self) -> bool {
        self.active && self.on_trap()
    }

    /// `alpha` as an integer in `{0, 1}`.
    pub fn alpha(&self) -> u8 {
        u8::from(self.active)
    }
}

/// One enabled transition out of a state.
#[derive(Debug, Clone, PartialEq)]
pub struct Transition<T> {
    pub target: PairState,
    pub rate: T,
}

/// All enabled transitions out of `state`, killing excluded.
///
/// Lattice moves come first in the order `+e_1, -e_1, +e_2, ...`, followed by
/// the switch move when it is enabled.
pub fn transition_rates<T: Real>(params: &ModelParams<T>, state: &PairState) -> Result<Vec<Transition<T>>> {
    if state.dim() != params.d {
        return Err(Error::DimensionMismatch { state: state.dim(), params: params.d });
    }
    let mut out = Vec::with_capacity(2 * params.d + 1);
    let lattice = params.lattice_rate(state.active);
    for axis in 0..params.d {
        for step in [1, -1] {
            let mut z = state.z.clone();
            z[axis] += step;
            out.push(Transition { target: PairState { z, active: state.active }, rate: lattice });
        }
    }
    let switch = match (state.active, state.on_trap()) {
        (true, true) => params.s1,
        (false, false) => params.s0,
        _ => T::zero(),
    };
    if switch > T::zero() {
        out.push(Transition { target: PairState { z: state.z.clone(), active: !state.active }, rate: switch });
    }
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    fn unit_d1() -> ModelParams<f64> {
        ModelParams::unit(1)
    }

    #[test]
    fn rates_at_origin_active() {
        let tr = transition_rates(&unit_d1(), &PairState::origin_active(1)).unwrap();
        assert_eq!(tr.len(), 3);
        assert_eq!(tr[0].target, PairState::new(vec![1], true));
        assert_eq!(tr[1].target, PairState::new(vec![-1], true));
        assert_eq!(tr[0].rate, 2.0);
        assert_eq!(tr[1].rate, 2.0);
        assert_eq!(tr[2].target, PairState::new(vec![0], false));
        assert_eq!(tr[2].rate, 1.0);
        let total: f64 = tr.iter().map(|t| t.rate).sum();
        assert_eq!(total, 5.0);
    }

    #[test]
    fn no_wake_up_on_trap() {
        let p = ModelParams::<f64>::unit(2).with_s0(3.0);
        let tr = transition_rates(&p, &PairState::new(vec![0, 0], false)).unwrap();
        assert_eq!(tr.len(), 4);
        assert!(tr.iter().all(|t| t.rate == p.rho && !t.target.active));
    }

    #[test]
    fn wake_up_away_from_trap() {
        let p = unit_d1().with_s0(2.0);
        let tr = transition_rates(&p, &PairState::new(vec![1], false)).unwrap();
        assert_eq!(tr.len(), 3);
        assert_eq!(tr[2].target, PairState::new(vec![1], true));
        assert_eq!(tr[2].rate, 2.0);
        assert!(tr[..2].iter().all(|t| t.rate == p.rho));
    }

    #[test]
    fn dimension_mismatch_rejected() {
        let err = transition_rates(&unit_d1(), &PairState::origin_active(2)).unwrap_err();
        assert_eq!(err, Error::DimensionMismatch { state: 2, params: 1 });
    }

    #[test]
    fn invalid_params_rejected() {
        assert!(ModelParams::new(0, 1.0, 1.0, 1.0, 1.0, 1.0).is_err());
        assert!(ModelParams::new(6, 1.0, 1.0, 1.0, 1.0, 1.0).is_err());
        assert!(ModelParams::new(1, -1.0, 1.0, 1.0, 1.0, 1.0).is_err());
        assert!(ModelParams::new(1, 1.0, 0.0, 1.0, 1.0, 1.0).is_err());
        assert!(ModelParams::new(1, 1.0, 1.0, -0.1, 1.0, 1.0).is_err());
        assert!(ModelParams::new(1, 1.0, 1.0, 1.0, 0.0, 1.0).is_err());
        assert!(ModelParams::new(1, 1.0, 1.0, 1.0, 1.0, -1.0).is_err());
        assert!(ModelParams::new(3, 0.0, 1.0, 0.0, 1.0, 0.0).is_ok());
    }

    #[test]
    fn mu_is_one_iff_no_killing() {
        let p = ModelParams::<f64>::unit(1);
        assert!((p.mu() - 5.0 / 6.0).abs() < 1e-15);
        assert_eq!(p.with_gamma(0.0).mu(), 1.0);
    }

    #[test]
    fn generic_over_f32() {
        let p = ModelParams::<f32>::unit(3);
        let tr = transition_rates(&p, &PairState::origin_active(3)).unwrap();
        let total: f32 = tr.iter().map(|t| t.rate).sum();
        assert_eq!(total, p.regeneration_exit_rate());
    }

    proptest! {
        #[test]
        fn rate_conservation(
            d in 1usize..=5,
            kappa in 0.0f64..5.0,
            rho in 0.01f64..5.0,
            s0 in 0.01f64..5.0,
            s1 in 0.0f64..5.0,
            coords in proptest::collection::vec(-3i64..=3, 5),
            active: bool,
        ) {
            let p = ModelParams::new(d, kappa, rho, 1.0, s0, s1).unwrap();
            let state = PairState::new(coords[..d].to_vec(), active);
            let tr = transition_rates(&p, &state).unwrap();
            let total: f64 = tr.iter().map(|t| t.rate).sum();
            let on = if state.on_trap() { 1.0 } else { 0.0 };
            let a = if active { 1.0 } else { 0.0 };
            let closed = 2.0 * d as f64 * (a * kappa + rho) + s1 * on * a + s0 * (1.0 - on) * (1.0 - a);
            prop_assert!((total - closed).abs() <= 1e-12 * closed.max(1.0));
            prop_assert!((total - p.exit_rate(&state)).abs() <= 1e-12 * closed.max(1.0));
            for t in &tr {
                prop_assert!(t.rate > 0.0);
                let diff: i64 = t.target.z.iter().zip(&state.z).map(|(a, b)| (a - b).abs()).sum();
                if t.target.active == state.active {
                    prop_assert_eq!(diff, 1);
                } else {
                    prop_assert_eq!(diff, 0);
                }
            }
        }
    }
}
