// SPDX-License-Identifier: Apache-2.0

use serde_json::json;
use tempomux::Error as CoreError;
use thiserror::Error;

pub const EXIT_CONFIG: i32 = 2;
pub const EXIT_NUMERICAL: i32 = 3;

#[derive(Debug, Error)]
pub enum CliError {
    #[error("configuration error: {0}")]
    Config(String),

    #[error(transparent)]
    Core(#[from] CoreError),

    #[error("output error: {0}")]
    Output(String),
}

impl From<std::io::Error> for CliError {
    fn from(e: std::io::Error) -> Self {
        CliError::Output(e.to_string())
    }
}

impl From<serde_json::Error> for CliError {
    fn from(e: serde_json::Error) -> Self {
        CliError::Output(e.to_string())
    }
}

impl From<csv::Error> for CliError {
    fn from(e: csv::Error) -> Self {
        CliError::Output(e.to_string())
    }
}

impl CliError {
    /// Invalid inputs map to the configuration code; everything the numerics
    /// reject once the inputs are accepted maps to the numerical code.
    pub fn exit_code(&self) -> i32 {
        match self {
            CliError::Config(_) | CliError::Output(_) => EXIT_CONFIG,
            CliError::Core(e) => match e {
                CoreError::InvalidParameter(_)
                | CoreError::ModeOrderTooLarge { .. }
                | CoreError::SpacingTooSmall { .. }
                | CoreError::Clipping { .. }
                | CoreError::ShiftOutsideGrid { .. }
                | CoreError::GridTooNarrow { .. }
                | CoreError::Parse(_)
                | CoreError::Serde(_)
                | CoreError::Io(_) => EXIT_CONFIG,
                _ => EXIT_NUMERICAL,
            },
        }
    }

    pub fn kind(&self) -> &'static str {
        match self {
            CliError::Config(_) => "config",
            CliError::Output(_) => "output",
            CliError::Core(e) => match e {
                CoreError::InvalidParameter(_) => "invalid_parameter",
                CoreError::GridMismatch => "grid_mismatch",
                CoreError::GridTooNarrow { .. } => "grid_too_narrow",
                CoreError::ModeOrderTooLarge { .. } => "mode_order_too_large",
                CoreError::RankDeficient { .. } => "rank_deficient",
                CoreError::IllConditioned(_) => "ill_conditioned",
                CoreError::ConstructionInconsistency { .. } => "construction_inconsistency",
                CoreError::SpacingTooSmall { .. } => "spacing_too_small",
                CoreError::InvalidWaveform(_) => "invalid_waveform",
                CoreError::Clipping { .. } => "clipping",
                CoreError::ShiftOutsideGrid { .. } => "shift_outside_grid",
                CoreError::DimensionMismatch { .. } => "dimension_mismatch",
                CoreError::InvalidState(_) => "invalid_state",
                CoreError::TraceDrift { .. } => "trace_drift",
                CoreError::BaselineTooSmall(_) => "baseline_too_small",
                CoreError::DegenerateEigenvalues(_) => "degenerate_eigenvalues",
                CoreError::NonConvergence { .. } => "non_convergence",
                CoreError::Aliasing { .. } => "aliasing",
                CoreError::Io(_) => "io",
                CoreError::Serde(_) => "serialization",
                CoreError::Parse(_) => "parse",
            },
        }
    }

    /// One-line JSON document for stderr.
    pub fn to_json(&self, command: &str) -> String {
        json!({
            "error": {
                "kind": self.kind(),
                "message": self.to_string(),
                "exit_code": self.exit_code(),
                "command": command,
            }
        })
        .to_string()
    }
}

impl From<clap::Error> for CliError {
    fn from(e: clap::Error) -> Self {
        CliError::Config(e.to_string())
    }
}
