// SPDX-License-Identifier: Apache-2.0

//! Temporal-mode multiplexing of itinerant microwave photons.
//!
//! Mode construction ([`modebasis`]), drive synthesis ([`pulsesynth`]),
//! master-equation transfer simulations ([`dynamics`]), process tomography
//! ([`tomography`]) and time–frequency capacity planning ([`tfplan`]).

pub mod dynamics;
pub mod error;
pub mod grid;
pub mod modebasis;
pub mod pulsesynth;
pub mod special;
pub mod tfplan;
pub mod tomography;

pub use nalgebra;
pub use num_complex::Complex64;

pub use error::{Error, Result};
pub use grid::{SampledWaveform, TimeGrid, WaveformKind};
pub use modebasis::{BasisFamily, ModeBasis, OverlapMatrix, Spectrum};
