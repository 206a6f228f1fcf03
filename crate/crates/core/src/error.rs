// SPDX-License-Identifier: Apache-2.0

use thiserror::Error;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("invalid parameter: {0}")]
    InvalidParameter(String),

    #[error("waveforms are sampled on different time grids")]
    GridMismatch,

    #[error("time grid too narrow: {lost:.3e} of the waveform energy falls outside the window")]
    GridTooNarrow { lost: f64 },

    #[error("mode order {order} exceeds the supported maximum {max}")]
    ModeOrderTooLarge { order: usize, max: usize },

    #[error("rank deficiency at input {index}: residual norm ratio {ratio:.3e}")]
    RankDeficient { index: usize, ratio: f64 },

    #[error("ill-conditioned input: condition number {0:.3e}")]
    IllConditioned(f64),

    #[error("analytic and numeric constructions disagree for mode {mode}: max deviation {deviation:.3e}")]
    ConstructionInconsistency { mode: usize, deviation: f64 },

    #[error("bin spacing too small: nearest-neighbour |I|^2 = {overlap_sq:.3e}")]
    SpacingTooSmall { overlap_sq: f64 },

    #[error("waveform invariant violated: {0}")]
    InvalidWaveform(String),

    #[error("sample magnitude {value:.6e} exceeds DAC full scale {full_scale:.6e}")]
    Clipping { value: f64, full_scale: f64 },

    #[error("shift of {shift:.3e} s moves {lost:.3e} of the waveform energy outside the grid")]
    ShiftOutsideGrid { shift: f64, lost: f64 },

    #[error("operator dimension {found} does not match layout dimension {expected}")]
    DimensionMismatch { expected: usize, found: usize },

    #[error("invalid density matrix: {0}")]
    InvalidState(String),

    #[error("step-size instability at t = {time:.6e} s: trace drift {drift:.3e}")]
    TraceDrift { time: f64, drift: f64 },

    #[error("baseline output energy {0:.3e} too small for an efficiency ratio")]
    BaselineTooSmall(f64),

    #[error("leading eigenvalues nearly degenerate (gap {0:.3e})")]
    DegenerateEigenvalues(f64),

    #[error("{what} did not converge after {iterations} iterations (last change {residual:.3e})")]
    NonConvergence {
        what: &'static str,
        iterations: usize,
        residual: f64,
    },

    #[error("aliasing: {fraction:.3e} of the spectral energy lies above the usable band")]
    Aliasing { fraction: f64 },

    #[error("io error: {0}")]
    Io(#[from] std::io::Error),

    #[error("serialization error: {0}")]
    Serde(#[from] serde_json::Error),

    #[error("parse error: {0}")]
    Parse(String),
}

impl Error {
    pub(crate) fn param(msg: impl Into<String>) -> Self {
        Error::InvalidParameter(msg.into())
    }
}
