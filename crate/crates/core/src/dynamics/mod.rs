// SPDX-License-Identifier: Apache-2.0

//! Open-system simulation of photon release, mode-selective absorption,
//! rejection and re-capture.

pub mod coherence;
pub mod hilbert;
pub mod model;
pub mod params;
pub mod solver;
pub mod sparse;
pub mod transfer;

pub use hilbert::{DensityMatrix, HilbertLayout, Subsystem};
pub use model::{build_hamiltonian, MasterEquation, TransferSetup};
pub use params::{DeviceParams, F0g1Normalization, ModelOptions, RoleAssignment};
pub use solver::{evolve, EvolveOptions, SimulationRecord};
pub use coherence::{first_order_coherence, rejected_waveform, CoherenceOptions, FirstOrderCoherence};
pub use transfer::{
    absorption_efficiency, cardinal_states, predicted_overlap, rejected_orthogonality, state_fidelity, CaptureResult, DelayPoint,
    ReceiverDrive, RejectedField, TransferConfig, TransferModel,
};
