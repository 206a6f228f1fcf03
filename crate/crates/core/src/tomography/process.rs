// SPDX-License-Identifier: Apache-2.0

//! Qubit process matrices in the `{I, X, Ỹ = iσ_y, Z}` basis.

use nalgebra::{DMatrix, DVector, Matrix2, Matrix3, Matrix4};
use num_complex::Complex64 as C64;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::grid::SampledWaveform;

const ZERO: C64 = C64::new(0.0, 0.0);
const ONE: C64 = C64::new(1.0, 0.0);

/// Receiver energy below which the loss ratio is undefined.
const MIN_RECEIVER_ENERGY: f64 = 1e-9;

/// `{I, X, Ỹ, Z}` with `Ỹ = iσ_y = [[0, 1], [-1, 0]]`.
pub fn pauli_basis() -> [Matrix2<C64>; 4] {
    [
        Matrix2::identity(),
        Matrix2::new(ZERO, ONE, ONE, ZERO),
        Matrix2::new(ZERO, ONE, -ONE, ZERO),
        Matrix2::new(ONE, ZERO, ZERO, -ONE),
    ]
}

/// Hermitian, unit-trace `χ` with `ε(ρ) = Σ χ_ij E_i ρ E_j†`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ProcessMatrix {
    entries: Matrix4<C64>,
}

impl ProcessMatrix {
    pub fn new(entries: Matrix4<C64>) -> Result<Self> {
        let scale = entries.norm().max(1.0);
        let herm = (entries - entries.adjoint()).norm();
        if herm > 1e-10 * scale {
            return Err(Error::InvalidState(format!("process matrix not Hermitian (deviation {herm:.3e})")));
        }
        let tr = entries.trace();
        if (tr - ONE).norm() > 1e-8 {
            return Err(Error::InvalidState(format!("process matrix trace {tr} differs from 1")));
        }
        Ok(Self { entries })
    }

    pub fn identity() -> Self {
        let mut e = Matrix4::zeros();
        e[(0, 0)] = ONE;
        Self { entries: e }
    }

    pub fn entries(&self) -> &Matrix4<C64> {
        &self.entries
    }

    pub fn get(&self, i: usize, j: usize) -> C64 {
        self.entries[(i, j)]
    }

    pub fn min_eigenvalue(&self) -> f64 {
        nalgebra::SymmetricEigen::new(self.entries).eigenvalues.min()
    }

    pub fn apply(&self, rho: &Matrix2<C64>) -> Matrix2<C64> {
        apply_chi(&self.entries, rho)
    }
}

fn apply_chi(chi: &Matrix4<C64>, rho: &Matrix2<C64>) -> Matrix2<C64> {
    let e = pauli_basis();
    let mut out = Matrix2::zeros();
    for i in 0..4 {
        for j in 0..4 {
            if chi[(i, j)] != ZERO {
                out += e[i] * rho * e[j].adjoint() * chi[(i, j)];
            }
        }
    }
    out
}

/// `χ` of a channel given by Kraus operators.
pub fn chi_from_kraus(kraus: &[Matrix2<C64>]) -> Result<ProcessMatrix> {
    let e = pauli_basis();
    let mut chi = Matrix4::<C64>::zeros();
    for k in kraus {
        let c: Vec<C64> = e.iter().map(|ei| (ei.adjoint() * k).trace() / 2.0).collect();
        for i in 0..4 {
            for j in 0..4 {
                chi[(i, j)] += c[i] * c[j].conj();
            }
        }
    }
    let tr = chi.trace().re;
    ProcessMatrix::new(chi / C64::new(tr, 0.0))
}

/// Amplitude damping with decay probability `gamma`.
pub fn amplitude_damping_chi(gamma: f64) -> Result<ProcessMatrix> {
    if !(0.0..=1.0).contains(&gamma) {
        return Err(Error::param(format!("damping probability {gamma} outside [0, 1]")));
    }
    let k0 = Matrix2::new(ONE, ZERO, ZERO, C64::new((1.0 - gamma).sqrt(), 0.0));
    let k1 = Matrix2::new(ZERO, C64::new(gamma.sqrt(), 0.0), ZERO, ZERO);
    chi_from_kraus(&[k0, k1])
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct ProcessEstimate {
    pub chi: ProcessMatrix,
    /// Mean `|f⟩` population over the preparations.
    pub leakage: f64,
    /// Smallest eigenvalue of the unprojected estimate.
    pub raw_min_eigenvalue: f64,
}

/// Linear-inversion `χ` from input qubit states and reconstructed qutrit
/// outputs, projected onto the positive cone and trace-normalised. The `|f⟩`
/// population is dropped from the map and reported as leakage.
pub fn process_matrix(inputs: &[Matrix2<C64>], outputs: &[Matrix3<C64>]) -> Result<ProcessEstimate> {
    if inputs.len() != outputs.len() {
        return Err(Error::DimensionMismatch { expected: inputs.len(), found: outputs.len() });
    }
    let e = pauli_basis();
    let n = inputs.len();
    let mut a = DMatrix::from_element(4 * n, 16, ZERO);
    let mut b = DVector::from_element(4 * n, ZERO);
    for (k, (rho, out)) in inputs.iter().zip(outputs).enumerate() {
        for i in 0..4 {
            for j in 0..4 {
                let term = e[i] * rho * e[j].adjoint();
                for r in 0..2 {
                    for c in 0..2 {
                        a[(4 * k + 2 * r + c, 4 * i + j)] = term[(r, c)];
                    }
                }
            }
        }
        for r in 0..2 {
            for c in 0..2 {
                b[4 * k + 2 * r + c] = out[(r, c)];
            }
        }
    }
    let svd = a.svd(true, true);
    let (smin, smax) = (svd.singular_values.min(), svd.singular_values.max());
    if !(smin > 1e-8 * smax) {
        return Err(Error::IllConditioned(smax / smin));
    }
    let x = svd.solve(&b, 1e-14).map_err(Error::param)?;
    let raw = Matrix4::from_fn(|i, j| x[4 * i + j]);
    let raw = (raw + raw.adjoint()) * C64::new(0.5, 0.0);
    let eig = nalgebra::SymmetricEigen::new(raw);
    let raw_min_eigenvalue = eig.eigenvalues.min();
    let mut chi = Matrix4::zeros();
    for (i, v) in eig.eigenvalues.iter().enumerate() {
        if *v > 0.0 {
            let col = eig.eigenvectors.column(i);
            chi += col * col.adjoint() * C64::new(*v, 0.0);
        }
    }
    let tr = chi.trace().re;
    if !(tr > 0.0) {
        return Err(Error::InvalidState("process estimate has no positive part".into()));
    }
    let chi = ProcessMatrix::new(chi / C64::new(tr, 0.0))?;
    let leakage = outputs.iter().map(|o| o[(2, 2)].re).sum::<f64>() / n as f64;
    Ok(ProcessEstimate { chi, leakage, raw_min_eigenvalue })
}

/// `Tr[χ_exp χ_ideal]`, clipped to `[0, 1]`.
pub fn process_fidelity(chi_exp: &ProcessMatrix, chi_ideal: &ProcessMatrix) -> Result<f64> {
    let f = (chi_exp.entries * chi_ideal.entries).trace();
    if f.im.abs() > 1e-10 {
        return Err(Error::InvalidState(format!("process fidelity has imaginary part {:.3e}", f.im)));
    }
    if f.re < -1e-6 || f.re > 1.0 + 1e-6 {
        log::warn!("process fidelity {} outside [0, 1], clipping", f.re);
    }
    Ok(f.re.clamp(0.0, 1.0))
}

/// `1 - ∫|emitted|² / ∫|receiver_emitted|²`. Negative values are returned
/// with a warning.
pub fn photon_loss_estimate(emitted: &SampledWaveform, receiver_emitted: &SampledWaveform) -> Result<f64> {
    let er = receiver_emitted.energy();
    if !(er >= MIN_RECEIVER_ENERGY) {
        return Err(Error::BaselineTooSmall(er));
    }
    let l = 1.0 - emitted.energy() / er;
    if l < 0.0 {
        log::warn!("sender flux exceeds receiver flux; loss estimate {l:.4} is negative");
    }
    Ok(l)
}
