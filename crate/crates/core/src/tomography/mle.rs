// SPDX-License-Identifier: Apache-2.0

//! Maximum-likelihood qutrit state reconstruction by the diluted `RρR`
//! iteration, warm-started from linear inversion.

use nalgebra::{DMatrix, DVector, Matrix3};
use num_complex::Complex64 as C64;
use serde::{Deserialize, Serialize};

use super::counts::SettingCounts;
use super::{povm, Confusion, MeasurementSetting};
use crate::error::{Error, Result};

/// Weight of the maximally mixed state blended into the warm start so every
/// outcome starts with non-zero probability.
const WARM_START_MIX: f64 = 1e-9;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct MleOptions {
    pub max_iterations: usize,
    /// Log-likelihood change (per setting, frequency-weighted) that ends the iteration.
    pub likelihood_tol: f64,
    /// Stationarity residual `‖(R - 1)ρ‖` that ends the iteration.
    pub gradient_tol: f64,
}

impl Default for MleOptions {
    fn default() -> Self {
        Self { max_iterations: 100_000, likelihood_tol: 1e-12, gradient_tol: 1e-8 }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MleResult {
    pub state: Matrix3<C64>,
    pub iterations: usize,
    pub log_likelihood: f64,
    pub gradient_norm: f64,
}

type Povm = Vec<[Matrix3<C64>; 3]>;

fn hermitize(m: &Matrix3<C64>) -> Matrix3<C64> {
    (m + m.adjoint()) * C64::new(0.5, 0.0)
}

fn log_likelihood(rho: &Matrix3<C64>, freqs: &[[f64; 3]], elems: &Povm) -> f64 {
    let mut ll = 0.0;
    for (f, e) in freqs.iter().zip(elems) {
        for k in 0..3 {
            if f[k] > 0.0 {
                ll += f[k] * (e[k] * rho).trace().re.max(f64::MIN_POSITIVE).ln();
            }
        }
    }
    ll
}

fn r_operator(rho: &Matrix3<C64>, freqs: &[[f64; 3]], elems: &Povm) -> Matrix3<C64> {
    let mut r = Matrix3::zeros();
    for (f, e) in freqs.iter().zip(elems) {
        for k in 0..3 {
            if f[k] > 0.0 {
                let p = (e[k] * rho).trace().re.max(f64::MIN_POSITIVE);
                r += e[k] * C64::new(f[k] / p, 0.0);
            }
        }
    }
    r / C64::new(freqs.len() as f64, 0.0)
}

/// Nearest unit-trace positive matrix by eigenvalue clipping.
fn make_physical(m: &Matrix3<C64>) -> Matrix3<C64> {
    let eig = nalgebra::SymmetricEigen::new(hermitize(m));
    let vals: Vec<f64> = eig.eigenvalues.iter().map(|v| v.max(0.0)).collect();
    let total: f64 = vals.iter().sum();
    let mut out = Matrix3::zeros();
    for (i, v) in vals.iter().enumerate() {
        let col = eig.eigenvectors.column(i);
        out += col * col.adjoint() * C64::new(v / total, 0.0);
    }
    out
}

/// Least-squares Hermitian estimate from frequencies, normalised to unit trace.
pub fn linear_inversion(freqs: &[[f64; 3]], settings: &[MeasurementSetting], confusion: &Confusion) -> Result<Matrix3<C64>> {
    if freqs.len() != settings.len() {
        return Err(Error::DimensionMismatch { expected: settings.len(), found: freqs.len() });
    }
    let elems = povm(settings, confusion);
    let basis = hermitian_basis();
    let n_rows = 3 * freqs.len();
    let mut a = DMatrix::zeros(n_rows, 9);
    let mut b = DVector::zeros(n_rows);
    for (s, e) in elems.iter().enumerate() {
        for k in 0..3 {
            for (j, h) in basis.iter().enumerate() {
                a[(3 * s + k, j)] = (e[k] * h).trace().re;
            }
            b[3 * s + k] = freqs[s][k];
        }
    }
    let svd = a.svd(true, true);
    let smin = svd.singular_values.min();
    let smax = svd.singular_values.max();
    if !(smin > 1e-10 * smax) {
        return Err(Error::IllConditioned(smax / smin));
    }
    let x = svd.solve(&b, 1e-12).map_err(Error::param)?;
    let mut rho = Matrix3::zeros();
    for (j, h) in basis.iter().enumerate() {
        rho += h * C64::new(x[j], 0.0);
    }
    let tr = rho.trace().re;
    Ok(rho / C64::new(tr, 0.0))
}

/// Coordinates: real diagonal, real and imaginary off-diagonal parts.
fn hermitian_basis() -> Vec<Matrix3<C64>> {
    let one = C64::new(1.0, 0.0);
    let mut out = Vec::with_capacity(9);
    for i in 0..3 {
        let mut m = Matrix3::zeros();
        m[(i, i)] = one;
        out.push(m);
    }
    for (i, j) in [(0, 1), (0, 2), (1, 2)] {
        let mut re = Matrix3::zeros();
        re[(i, j)] = C64::new(0.5, 0.0);
        re[(j, i)] = C64::new(0.5, 0.0);
        out.push(re);
        let mut im = Matrix3::zeros();
        im[(i, j)] = C64::new(0.0, 0.5);
        im[(j, i)] = C64::new(0.0, -0.5);
        out.push(im);
    }
    out
}

/// Maximum-likelihood state for per-setting outcome frequencies.
pub fn mle_state_from_frequencies(
    freqs: &[[f64; 3]],
    settings: &[MeasurementSetting],
    confusion: &Confusion,
    opts: &MleOptions,
) -> Result<MleResult> {
    let elems = povm(settings, confusion);
    let warm = make_physical(&linear_inversion(freqs, settings, confusion)?);
    let mixed = Matrix3::<C64>::identity() / C64::new(3.0, 0.0);
    let mut rho = warm * C64::new(1.0 - WARM_START_MIX, 0.0) + mixed * C64::new(WARM_START_MIX, 0.0);
    let mut ll = log_likelihood(&rho, freqs, &elems);
    let mut eps = 1e6;
    let mut last_change = f64::INFINITY;
    let id = Matrix3::<C64>::identity();
    for it in 0..opts.max_iterations {
        let r = r_operator(&rho, freqs, &elems);
        let gradient_norm = ((r - id) * rho).norm();
        if gradient_norm < opts.gradient_tol || last_change < opts.likelihood_tol {
            return Ok(MleResult { state: rho, iterations: it, log_likelihood: ll, gradient_norm });
        }
        let m = (id + r * C64::new(eps, 0.0)) / C64::new(1.0 + eps, 0.0);
        let mut cand = hermitize(&(m * rho * m.adjoint()));
        cand /= C64::new(cand.trace().re, 0.0);
        let ll_cand = log_likelihood(&cand, freqs, &elems);
        if ll_cand < ll {
            eps *= 0.5;
            if eps < 1e-12 {
                last_change = 0.0;
            }
            continue;
        }
        last_change = ll_cand - ll;
        rho = cand;
        ll = ll_cand;
    }
    Err(Error::NonConvergence { what: "maximum-likelihood reconstruction", iterations: opts.max_iterations, residual: last_change })
}

/// Maximum-likelihood state from raw counts.
pub fn mle_state(
    counts: &SettingCounts,
    settings: &[MeasurementSetting],
    confusion: &Confusion,
    opts: &MleOptions,
) -> Result<MleResult> {
    if counts.len() != settings.len() {
        return Err(Error::param(format!("counts cover {} of {} settings", counts.len(), settings.len())));
    }
    let freqs: Vec<[f64; 3]> = counts
        .iter()
        .map(|c| {
            let n = (c[0] + c[1] + c[2]) as f64;
            if n > 0.0 {
                Ok([c[0] as f64 / n, c[1] as f64 / n, c[2] as f64 / n])
            } else {
                Err(Error::param("setting with zero recorded shots"))
            }
        })
        .collect::<Result<_>>()?;
    mle_state_from_frequencies(&freqs, settings, confusion, opts)
}

#[cfg(test)]
mod tests {
    use super::super::counts::{exact_frequencies, simulate_counts};
    use super::super::{measurement_settings, Preparation};
    use super::*;

    fn fidelity_pure(rho: &Matrix3<C64>, psi: &[C64; 3]) -> f64 {
        let v = nalgebra::Vector3::from_column_slice(psi);
        (v.adjoint() * rho * v)[(0, 0)].re
    }

    fn min_eig(rho: &Matrix3<C64>) -> f64 {
        nalgebra::SymmetricEigen::new(hermitize(rho)).eigenvalues.min()
    }

    #[test]
    fn exact_pure_state_is_recovered() {
        let s = measurement_settings();
        let psi = [C64::new(0.6, 0.0), C64::new(0.0, 0.48), C64::new(0.64, 0.0)];
        let rho = Matrix3::from_fn(|i, j| psi[i] * psi[j].conj());
        let f = exact_frequencies(&rho, &s, &Confusion::ideal());
        let r = mle_state_from_frequencies(&f, &s, &Confusion::ideal(), &MleOptions::default()).unwrap();
        assert!(fidelity_pure(&r.state, &psi) > 1.0 - 1e-6);
        assert!(min_eig(&r.state) > -1e-8);
    }

    #[test]
    fn mixed_state_from_counts() {
        let s = measurement_settings();
        let mixed = Matrix3::identity() / C64::new(3.0, 0.0);
        let t = simulate_counts(&[mixed], &[Preparation::Ground], &s, &Confusion::ideal(), 100_000, 3).unwrap();
        let r = mle_state(&t.counts[0], &s, &Confusion::ideal(), &MleOptions::default()).unwrap();
        assert!((r.state - mixed).norm() < 1e-2);
        assert!((r.state.trace().re - 1.0).abs() < 1e-8);
    }

    #[test]
    fn rank_deficient_state_stays_positive() {
        let s = measurement_settings();
        let rho = Matrix3::from_fn(|i, j| if i == j && i < 2 { C64::new(0.5, 0.0) } else { C64::new(0.0, 0.0) });
        let t = simulate_counts(&[rho], &[Preparation::Ground], &s, &Confusion::ideal(), 2000, 11).unwrap();
        let r = mle_state(&t.counts[0], &s, &Confusion::ideal(), &MleOptions::default()).unwrap();
        assert!(min_eig(&r.state) > -1e-8);
        assert!((r.state.trace().re - 1.0).abs() < 1e-8);
    }

    #[test]
    fn readout_confusion_is_inverted() {
        let s = measurement_settings();
        let c = Confusion::uniform(0.03);
        let psi = [C64::new(0.0, 0.0), C64::new(1.0, 0.0), C64::new(0.0, 0.0)];
        let rho = Matrix3::from_fn(|i, j| psi[i] * psi[j].conj());
        let f = exact_frequencies(&rho, &s, &c);
        let r = mle_state_from_frequencies(&f, &s, &c, &MleOptions::default()).unwrap();
        assert!(fidelity_pure(&r.state, &psi) > 1.0 - 1e-6);
    }
}
