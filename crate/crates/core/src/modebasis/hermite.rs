// SPDX-License-Identifier: Apache-2.0

use num_complex::Complex64 as C64;

use super::{apply_sign_convention, BasisFamily, ModeBasis, ORTHOGONALITY_LIMIT};
use crate::error::{Error, Result};
use crate::grid::{SampledWaveform, TimeGrid, WaveformKind};

/// Hermite–Gaussian modes `ψ_m(t) = σ^{-1/2} h_m((t - t0)/σ)` where `h_m` are the
/// normalised Hermite functions, so `|ψ_0|² ∝ exp(-(t - t0)²/σ²)`.
///
/// The basis `kappa_ph` field stores `1/σ`.
pub fn hermite_gaussian_basis(n_modes: usize, t0: f64, sigma: f64, grid: &TimeGrid) -> Result<ModeBasis> {
    if n_modes == 0 {
        return Err(Error::param("n_modes must be at least 1"));
    }
    if !(sigma > 0.0) || !sigma.is_finite() {
        return Err(Error::param(format!("sigma must be positive, got {sigma}")));
    }
    let n = grid.len();
    let mut columns = vec![vec![C64::new(0.0, 0.0); n]; n_modes];
    let h0_scale = std::f64::consts::PI.powf(-0.25) / sigma.sqrt();
    for i in 0..n {
        let x = (grid.time(i) - t0) / sigma;
        let mut prev = 0.0;
        let mut cur = h0_scale * (-x * x / 2.0).exp();
        for (m, col) in columns.iter_mut().enumerate() {
            col[i] = C64::new(cur, 0.0);
            let next = (2.0 / (m + 1) as f64).sqrt() * x * cur - (m as f64 / (m + 1) as f64).sqrt() * prev;
            prev = cur;
            cur = next;
        }
    }
    let mut modes = Vec::with_capacity(n_modes);
    for col in columns {
        let w = SampledWaveform::new_unchecked(*grid, col, WaveformKind::ModeFunction)?;
        let lost = 1.0 - w.energy();
        if lost > super::sech::CONTAINMENT_LOSS {
            return Err(Error::GridTooNarrow { lost });
        }
        modes.push(apply_sign_convention(&w.normalized()?));
    }
    let basis = ModeBasis::new(modes, BasisFamily::HermiteGaussian, 1.0 / sigma)?;
    let worst = basis.overlap_matrix()?.max_off_diagonal_sq();
    if worst > ORTHOGONALITY_LIMIT {
        return Err(Error::param(format!(
            "grid spacing too coarse for sigma = {sigma:e}: off-diagonal overlap {worst:e}"
        )));
    }
    Ok(basis)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn zero_crossings_and_orthonormality() {
        let g = TimeGrid::symmetric(400e-9, 0.5e-9).unwrap();
        let basis = hermite_gaussian_basis(6, 0.0, 40e-9, &g).unwrap();
        for (m, mode) in basis.modes().iter().enumerate() {
            assert_eq!(mode.zero_crossings(1e-6), m);
        }
        assert!(basis.overlap_matrix().unwrap().max_deviation_from_identity() < 1e-10);
    }

    #[test]
    fn mode0_is_positive_gaussian() {
        let g = TimeGrid::symmetric(400e-9, 0.5e-9).unwrap();
        let basis = hermite_gaussian_basis(1, 20e-9, 40e-9, &g).unwrap();
        assert!(basis.modes()[0].samples().iter().all(|s| s.re >= 0.0 && s.im == 0.0));
    }

    #[test]
    fn narrow_grid_rejected() {
        let g = TimeGrid::symmetric(50e-9, 0.5e-9).unwrap();
        assert!(matches!(
            hermite_gaussian_basis(2, 0.0, 40e-9, &g),
            Err(Error::GridTooNarrow { .. })
        ));
    }
}
