//! Classical state splitting and privacy amplification, run exactly.

mod pa;
mod split;
mod toeplitz;

use serde::Serialize;

pub use pa::{
    guessing_entropy, pa_converse_check, pa_smoothed_run, privacy_amplify_exact, PaConverse, PaRun,
    PaSmoothedRun, MAX_PA_INPUT_BITS,
};
pub use split::{state_split_exact, state_split_sample, SplitRun, SplitSample, MAX_SPLIT_ALPHABET};
pub use toeplitz::ToeplitzHashFamily;

/// Slack tolerance used by [`ProtocolReport::passed`].
pub const SLACK_TOL: f64 = 1e-9;

/// One asserted inequality `lhs <= rhs`.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct Check {
    pub name: String,
    pub lhs: f64,
    pub rhs: f64,
    pub slack: f64,
}

impl Check {
    pub fn le(name: impl Into<String>, lhs: f64, rhs: f64) -> Self {
        let slack = if lhs == rhs { 0.0 } else { rhs - lhs };
        Check {
            name: name.into(),
            lhs,
            rhs,
            slack,
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct ProtocolReport {
    pub protocol: &'static str,
    /// Exact error `T(actual, ideal)`.
    pub error: f64,
    /// Bits communicated or key bits extracted.
    pub resource: f64,
    /// The bound the resource is checked against.
    pub bound: f64,
    pub checks: Vec<Check>,
}

impl ProtocolReport {
    pub fn min_slack(&self) -> f64 {
        self.checks
            .iter()
            .map(|c| c.slack)
            .fold(f64::INFINITY, f64::min)
    }

    pub fn passed(&self) -> bool {
        self.checks.iter().all(|c| c.slack >= -SLACK_TOL)
    }

    pub fn failures(&self) -> impl Iterator<Item = &Check> {
        self.checks.iter().filter(|c| c.slack < -SLACK_TOL)
    }
}
