//! Experiment runner for the `dormantwalk` crate: configuration, output
//! records, the subcommands and the acceptance suite.

pub mod acceptance;
pub mod commands;
pub mod config;
pub mod oracle;
pub mod record;

/// Input rejected before any computation.
#[derive(Debug, Clone, PartialEq)]
pub struct InvalidInput(pub String);

impl std::fmt::Display for InvalidInput {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        write!(f, "invalid input: {}", self.0)
    }
}

impl std::error::Error for InvalidInput {}

/// Some acceptance criteria failed.
#[derive(Debug, Clone, PartialEq)]
pub struct AcceptanceFailure(pub Vec<u8>);

impl std::fmt::Display for AcceptanceFailure {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        write!(f, "acceptance criteria failed: {:?}", self.0)
    }
}

impl std::error::Error for AcceptanceFailure {}

pub const EXIT_INVALID: i32 = 1;
pub const EXIT_NUMERICAL: i32 = 2;
pub const EXIT_ACCEPTANCE: i32 = 3;

/// Process exit code for an error.
pub fn exit_code(err: &anyhow::Error) -> i32 {
    use dormantwalk::Error as E;
    if err.downcast_ref::<AcceptanceFailure>().is_some() {
        return EXIT_ACCEPTANCE;
    }
    match err.downcast_ref::<E>() {
        Some(E::NonConvergence { .. } | E::ToleranceUnreachable { .. } | E::NotStabilized { .. } | E::NormalizationFailure { .. } | E::DegenerateDenominator { .. }) => {
            EXIT_NUMERICAL
        }
        _ => EXIT_INVALID,
    }
}
