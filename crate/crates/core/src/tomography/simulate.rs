// SPDX-License-Identifier: Apache-2.0

//! Tomography of states delivered by simulated transfers.

use nalgebra::{Matrix2, Matrix3};
use num_complex::Complex64 as C64;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::counts::{exact_frequencies, simulate_counts, CountTable};
use super::mle::{mle_state, mle_state_from_frequencies, MleOptions};
use super::process::{process_fidelity, process_matrix, ProcessMatrix};
use super::{measurement_settings, pi_ef, virtual_z, Confusion, Preparation};
use crate::dynamics::{ReceiverDrive, TransferModel};
use crate::error::{Error, Result};

/// Receiver qutrit states after transfer, `π_ef` and phase correction, one
/// per preparation.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct ReceiverStates {
    pub mode: usize,
    pub delta_t: f64,
    /// Virtual-Z phase making the `g+e` output coherence real and positive.
    pub phase: f64,
    pub preparations: Vec<Preparation>,
    pub states: Vec<Matrix3<C64>>,
}

/// Transfers each preparation in mode `m` into a receiver driven on mode `m`.
pub fn simulate_receiver_states(model: &TransferModel, m: usize, delta_t: f64) -> Result<ReceiverStates> {
    let storage = model.storage_subsystem();
    let drive = ReceiverDrive { mode: m, delta_t };
    let raw: Vec<Matrix3<C64>> = Preparation::ALL
        .par_iter()
        .map(|p| {
            let record = model.run(m, Some(drive), p.amplitudes())?;
            let r = record.final_state.reduced(storage)?;
            if r.nrows() < 3 {
                return Err(Error::param("storage subsystem has fewer than three levels"));
            }
            let q = Matrix3::from_fn(|i, j| r[(i, j)]);
            let u = pi_ef();
            Ok(u * q * u.adjoint())
        })
        .collect::<Result<_>>()?;
    let plus = Preparation::ALL.iter().position(|p| *p == Preparation::Plus).unwrap();
    let phase = raw[plus][(0, 1)].arg();
    let z = virtual_z(phase);
    let states = raw.iter().map(|q| z * q * z.adjoint()).collect();
    Ok(ReceiverStates { mode: m, delta_t, phase, preparations: Preparation::ALL.to_vec(), states })
}

/// Multinomial readout counts over all preparations and the nine settings.
pub fn simulate_tomography_counts(
    states: &ReceiverStates,
    shots: u64,
    seed: u64,
    confusion: &Confusion,
) -> Result<CountTable> {
    simulate_counts(&states.states, &states.preparations, &measurement_settings(), confusion, shots, seed)
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct ProcessReport {
    pub mode: usize,
    pub chi: ProcessMatrix,
    pub fidelity: f64,
    pub leakage: f64,
    pub reconstructed: Vec<Matrix3<C64>>,
    pub mle_iterations: Vec<usize>,
}

/// MLE state reconstruction for each preparation followed by `χ` and `F_p`.
/// Without counts the exact outcome probabilities are used.
pub fn reconstruct_process(
    states: &ReceiverStates,
    counts: Option<&CountTable>,
    confusion: &Confusion,
    opts: &MleOptions,
) -> Result<ProcessReport> {
    let settings = measurement_settings();
    let results = (0..states.states.len())
        .into_par_iter()
        .map(|i| match counts {
            Some(t) => mle_state(&t.counts[i], &settings, confusion, opts),
            None => {
                mle_state_from_frequencies(&exact_frequencies(&states.states[i], &settings, confusion), &settings, confusion, opts)
            }
        })
        .collect::<Result<Vec<_>>>()?;
    let inputs: Vec<Matrix2<C64>> = states
        .preparations
        .iter()
        .map(|p| {
            let d = p.density();
            Matrix2::from_fn(|i, j| d[(i, j)])
        })
        .collect();
    let reconstructed: Vec<Matrix3<C64>> = results.iter().map(|r| r.state).collect();
    let est = process_matrix(&inputs, &reconstructed)?;
    let fidelity = process_fidelity(&est.chi, &ProcessMatrix::identity())?;
    Ok(ProcessReport {
        mode: states.mode,
        chi: est.chi,
        fidelity,
        leakage: est.leakage,
        reconstructed,
        mle_iterations: results.iter().map(|r| r.iterations).collect(),
    })
}
