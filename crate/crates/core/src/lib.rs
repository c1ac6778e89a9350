//! Annealed survival of a random walker with responsive dormancy among a
//! single moving trap.
//!
//! The walker and the trap are tracked through their relative position and
//! the walker's activity flag. Survival up to time `t` is
//! `E[exp(-gamma L_t)]`, where `L_t` is the time the walker spends active on
//! the trap. The crate offers an exact event-driven sampler, a truncated
//! master-equation solver, lattice Green functions, the renewal layer built on
//! the regeneration time and closed-form long-time asymptotics.
//!
//! Numerical code is generic over [`num::Real`] (`f32` or `f64`); the aliases
//! below fix the scalar to `f64`.

pub mod asymptotics;
pub mod error;
pub mod exact;
pub mod green;
pub mod model;
pub mod num;
pub mod renewal;
pub mod simulate;
pub mod stats;

pub use error::{Error, Result};
pub use model::{transition_rates, PairState};
pub use num::Real;
pub use simulate::{Estimator, RegenerationSample, SurvivalEstimate, TrajectoryOutcome};

pub type Params = model::ModelParams<f64>;
pub type Transition = model::Transition<f64>;
