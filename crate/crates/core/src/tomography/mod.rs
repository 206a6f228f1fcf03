// SPDX-License-Identifier: Apache-2.0

//! Qutrit state tomography and qubit process tomography of transferred states.

mod counts;
mod mle;
mod process;
mod simulate;

use std::f64::consts::{FRAC_1_SQRT_2, PI};

use nalgebra::{DMatrix, Matrix3};
use num_complex::Complex64 as C64;
use serde::{Deserialize, Serialize};

pub use counts::{exact_frequencies, outcome_probabilities, simulate_counts, CountTable, SettingCounts};
pub use mle::{linear_inversion, mle_state, mle_state_from_frequencies, MleOptions, MleResult};
pub use process::{
    amplitude_damping_chi, chi_from_kraus, pauli_basis, photon_loss_estimate, process_fidelity, process_matrix,
    ProcessEstimate, ProcessMatrix,
};
pub use simulate::{
    reconstruct_process, simulate_receiver_states, simulate_tomography_counts, ProcessReport, ReceiverStates,
};

const ZERO: C64 = C64::new(0.0, 0.0);
const ONE: C64 = C64::new(1.0, 0.0);

/// The six input states `|g⟩, |e⟩, |g⟩±|e⟩, |g⟩±i|e⟩`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Preparation {
    Ground,
    Excited,
    Plus,
    Minus,
    PlusI,
    MinusI,
}

impl Preparation {
    pub const ALL: [Preparation; 6] = [
        Preparation::Ground,
        Preparation::Excited,
        Preparation::Plus,
        Preparation::Minus,
        Preparation::PlusI,
        Preparation::MinusI,
    ];

    /// Amplitudes on `(|g⟩, |e⟩)`.
    pub fn amplitudes(self) -> [C64; 2] {
        let h = C64::new(FRAC_1_SQRT_2, 0.0);
        let ih = C64::new(0.0, FRAC_1_SQRT_2);
        match self {
            Preparation::Ground => [ONE, ZERO],
            Preparation::Excited => [ZERO, ONE],
            Preparation::Plus => [h, h],
            Preparation::Minus => [h, -h],
            Preparation::PlusI => [h, ih],
            Preparation::MinusI => [h, -ih],
        }
    }

    pub fn density(self) -> DMatrix<C64> {
        let a = self.amplitudes();
        DMatrix::from_fn(2, 2, |i, j| a[i] * a[j].conj())
    }

    pub fn label(self) -> &'static str {
        match self {
            Preparation::Ground => "g",
            Preparation::Excited => "e",
            Preparation::Plus => "g+e",
            Preparation::Minus => "g-e",
            Preparation::PlusI => "g+ie",
            Preparation::MinusI => "g-ie",
        }
    }
}

/// Pre-measurement gate sequence on the qutrit.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MeasurementSetting {
    pub label: String,
    pub unitary: Matrix3<C64>,
}

/// Rotation by `angle` about an equatorial axis at `phase` in the
/// two-level subspace `(i, j)`.
pub fn subspace_rotation(i: usize, j: usize, angle: f64, phase: f64) -> Matrix3<C64> {
    let mut u = Matrix3::identity();
    let (c, s) = ((angle / 2.0).cos(), (angle / 2.0).sin());
    u[(i, i)] = C64::new(c, 0.0);
    u[(j, j)] = C64::new(c, 0.0);
    u[(i, j)] = C64::new(0.0, -s) * C64::from_polar(1.0, -phase);
    u[(j, i)] = C64::new(0.0, -s) * C64::from_polar(1.0, phase);
    u
}

/// `π` rotation on the e–f transition that maps `|f⟩` to `|e⟩`.
pub fn pi_ef() -> Matrix3<C64> {
    subspace_rotation(1, 2, PI, 0.0)
}

/// Phase correction `diag(1, e^{iφ}, e^{iφ})`.
pub fn virtual_z(phase: f64) -> Matrix3<C64> {
    let p = C64::from_polar(1.0, phase);
    Matrix3::from_diagonal(&nalgebra::Vector3::new(ONE, p, p))
}

/// The nine settings `I, (π/2)x_ge, (π/2)y_ge, πx_ge, (π/2)x_ef, (π/2)y_ef,
/// πx_ge·(π/2)x_ef, πx_ge·(π/2)y_ef, πx_ge·πx_ef`; sequences run left to right.
pub fn measurement_settings() -> Vec<MeasurementSetting> {
    let half = PI / 2.0;
    let ge = |angle, phase| subspace_rotation(0, 1, angle, phase);
    let ef = |angle, phase| subspace_rotation(1, 2, angle, phase);
    let seq = |first: Matrix3<C64>, second: Matrix3<C64>| second * first;
    let list = [
        ("I", Matrix3::identity()),
        ("x90_ge", ge(half, 0.0)),
        ("y90_ge", ge(half, half)),
        ("x180_ge", ge(PI, 0.0)),
        ("x90_ef", ef(half, 0.0)),
        ("y90_ef", ef(half, half)),
        ("x180_ge.x90_ef", seq(ge(PI, 0.0), ef(half, 0.0))),
        ("x180_ge.y90_ef", seq(ge(PI, 0.0), ef(half, half))),
        ("x180_ge.x180_ef", seq(ge(PI, 0.0), ef(PI, 0.0))),
    ];
    list.into_iter().map(|(label, unitary)| MeasurementSetting { label: label.to_string(), unitary }).collect()
}

/// Readout assignment matrix: entry `(k, j)` is `P(read k | level j)`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Confusion(pub Matrix3<f64>);

impl Confusion {
    pub fn ideal() -> Self {
        Confusion(Matrix3::identity())
    }

    /// Symmetric misassignment `p` to each other level.
    pub fn uniform(p: f64) -> Self {
        Confusion(Matrix3::from_fn(|k, j| if k == j { 1.0 - 2.0 * p } else { p }))
    }

    pub fn validate(&self) -> crate::Result<()> {
        for j in 0..3 {
            let col: f64 = (0..3).map(|k| self.0[(k, j)]).sum();
            if (col - 1.0).abs() > 1e-12 || (0..3).any(|k| self.0[(k, j)] < 0.0) {
                return Err(crate::Error::param("confusion matrix columns must be probability vectors"));
            }
        }
        Ok(())
    }
}

/// POVM elements `Π_{s,k} = U_s† (Σ_j C_kj |j⟩⟨j|) U_s` for every setting.
pub fn povm(settings: &[MeasurementSetting], confusion: &Confusion) -> Vec<[Matrix3<C64>; 3]> {
    settings
        .iter()
        .map(|s| {
            let u = s.unitary;
            std::array::from_fn(|k| {
                let d = Matrix3::from_diagonal(&nalgebra::Vector3::from_fn(|j, _| C64::new(confusion.0[(k, j)], 0.0)));
                u.adjoint() * d * u
            })
        })
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn settings_are_unitary() {
        let s = measurement_settings();
        assert_eq!(s.len(), 9);
        for m in &s {
            let err = (m.unitary.adjoint() * m.unitary - Matrix3::identity()).norm();
            assert!(err < 1e-12, "{}", m.label);
        }
    }

    #[test]
    fn settings_are_informationally_complete() {
        // Real linear map from the 9 Hermitian parameters to probabilities.
        let elems = povm(&measurement_settings(), &Confusion::ideal());
        let basis = hermitian_basis();
        let rows: Vec<f64> = elems
            .iter()
            .flat_map(|p| p.iter())
            .flat_map(|pi| basis.iter().map(move |b| (pi * b).trace().re))
            .collect();
        let a = DMatrix::from_row_slice(27, 9, &rows);
        let sv = a.svd(false, false).singular_values;
        assert!(sv.min() > 1e-3, "{sv}");
    }

    #[test]
    fn pi_ef_moves_f_to_e() {
        let u = pi_ef();
        assert!((u[(1, 2)].norm() - 1.0).abs() < 1e-15);
        assert!((u[(0, 0)] - ONE).norm() < 1e-15);
    }

    #[test]
    fn preparations_are_pure_and_normalized() {
        for p in Preparation::ALL {
            let rho = p.density();
            assert!((rho.trace() - ONE).norm() < 1e-15);
            assert!((&rho * &rho - &rho).norm() < 1e-15);
        }
    }

    pub(super) fn hermitian_basis() -> Vec<Matrix3<C64>> {
        let mut out = Vec::new();
        for i in 0..3 {
            for j in 0..3 {
                let mut m = Matrix3::zeros();
                if i == j {
                    m[(i, i)] = ONE;
                } else if i < j {
                    m[(i, j)] = ONE;
                    m[(j, i)] = ONE;
                } else {
                    m[(i, j)] = C64::new(0.0, 1.0);
                    m[(j, i)] = C64::new(0.0, -1.0);
                }
                out.push(m);
            }
        }
        out
    }
}
