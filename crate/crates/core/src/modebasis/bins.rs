// SPDX-License-Identifier: Apache-2.0

use std::f64::consts::PI;

use num_complex::Complex64 as C64;
use serde::{Deserialize, Serialize};

use super::sech::{sech, CONTAINMENT_LOSS};
use super::{BasisFamily, ModeBasis};
use crate::error::{Error, Result};
use crate::grid::{SampledWaveform, TimeGrid, WaveformKind};

/// Nearest-neighbour `|I|²` allowed between bins.
pub const BIN_OVERLAP_LIMIT: f64 = 1e-4;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum BinScheme {
    TimeBin,
    FrequencyBin,
}

impl BinScheme {
    pub fn family(&self) -> BasisFamily {
        match self {
            BinScheme::TimeBin => BasisFamily::TimeBin,
            BinScheme::FrequencyBin => BasisFamily::FrequencyBin,
        }
    }
}

/// `n_modes` copies of the sech mode 0 centred on the grid origin.
///
/// Time bins are shifted by multiples of `spacing` seconds; frequency bins
/// carry `exp(+i2π f_k t)` with `f_k` a multiple of `spacing` Hz.
pub fn bin_basis(
    scheme: BinScheme,
    n_modes: usize,
    kappa_ph: f64,
    spacing: f64,
    grid: &TimeGrid,
) -> Result<ModeBasis> {
    if n_modes == 0 {
        return Err(Error::param("n_modes must be at least 1"));
    }
    if !(kappa_ph > 0.0) {
        return Err(Error::param(format!("kappa_ph must be positive, got {kappa_ph}")));
    }
    if !(spacing >= 0.0) || !spacing.is_finite() {
        return Err(Error::param(format!("spacing must be non-negative, got {spacing}")));
    }
    let amp = (kappa_ph / 4.0).sqrt();
    let centre = (n_modes as f64 - 1.0) / 2.0;
    let mut modes = Vec::with_capacity(n_modes);
    for k in 0..n_modes {
        let offset = (k as f64 - centre) * spacing;
        let w = match scheme {
            BinScheme::TimeBin => SampledWaveform::from_fn(*grid, WaveformKind::ModeFunction, |t| {
                C64::new(amp * sech(kappa_ph * (t - offset) / 2.0), 0.0)
            })?,
            BinScheme::FrequencyBin => SampledWaveform::from_fn(*grid, WaveformKind::ModeFunction, |t| {
                C64::from_polar(amp * sech(kappa_ph * t / 2.0), 2.0 * PI * offset * t)
            })?,
        };
        let lost = 1.0 - w.energy();
        if lost > CONTAINMENT_LOSS {
            return Err(Error::GridTooNarrow { lost });
        }
        modes.push(w.normalized()?);
    }
    let basis = ModeBasis::new(modes, scheme.family(), kappa_ph)?;
    let worst = basis.overlap_matrix()?.max_off_diagonal_sq();
    if worst > BIN_OVERLAP_LIMIT {
        return Err(Error::SpacingTooSmall { overlap_sq: worst });
    }
    Ok(basis)
}

/// Analytic overlap between mode-0 copies: `a / sinh(a)`.
pub fn bin_overlap(scheme: BinScheme, kappa_ph: f64, spacing: f64) -> f64 {
    let a = scaled_separation(scheme, kappa_ph, spacing);
    if a.abs() < 1e-8 {
        1.0
    } else {
        a / a.sinh()
    }
}

fn scaled_separation(scheme: BinScheme, kappa_ph: f64, spacing: f64) -> f64 {
    match scheme {
        BinScheme::TimeBin => kappa_ph * spacing / 2.0,
        BinScheme::FrequencyBin => 2.0 * PI * PI * spacing / kappa_ph,
    }
}

/// Smallest spacing whose nearest-neighbour `|I|²` stays within
/// [`BIN_OVERLAP_LIMIT`] (seconds for time bins, Hz for frequency bins).
/// A relative margin of 1e-6 keeps quadrature rounding below the limit.
pub fn min_bin_spacing(scheme: BinScheme, kappa_ph: f64) -> f64 {
    let target = BIN_OVERLAP_LIMIT.sqrt();
    let (mut lo, mut hi) = (0.0f64, 60.0f64);
    for _ in 0..200 {
        let mid = 0.5 * (lo + hi);
        if mid / mid.sinh() > target {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    let per_unit = scaled_separation(scheme, kappa_ph, 1.0);
    hi * (1.0 + 1e-6) / per_unit
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::modebasis::sech_basis;

    const KAPPA: f64 = 2.0 * PI * 5e6;

    fn grid() -> TimeGrid {
        TimeGrid::symmetric(150.0 / KAPPA, 0.5e-9).unwrap()
    }

    #[test]
    fn single_time_bin_is_sech_mode0() {
        let g = grid();
        let bin = bin_basis(BinScheme::TimeBin, 1, KAPPA, 0.0, &g).unwrap();
        let sech0 = sech_basis(1, KAPPA, &g).unwrap();
        for (a, b) in bin.modes()[0].samples().iter().zip(sech0.modes()[0].samples()) {
            assert!((a - b).norm() < 1e-12);
        }
    }

    #[test]
    fn quadrature_matches_closed_form_overlap() {
        let g = grid();
        for s in [4.0, 8.0, 10.0] {
            let b = bin_basis(BinScheme::TimeBin, 2, KAPPA, s / KAPPA, &g);
            let expected = bin_overlap(BinScheme::TimeBin, KAPPA, s / KAPPA).powi(2);
            match b {
                Ok(basis) => {
                    let got = basis.overlap_matrix().unwrap().squared()[(0, 1)];
                    assert!((got - expected).abs() < 1e-9);
                }
                Err(Error::SpacingTooSmall { overlap_sq }) => {
                    assert!((overlap_sq - expected).abs() < 1e-9, "{overlap_sq} vs {expected}");
                }
                Err(e) => panic!("{e}"),
            }
        }
    }

    #[test]
    fn spacing_of_ten_over_kappa_is_not_enough() {
        let g = grid();
        let r = bin_basis(BinScheme::TimeBin, 2, KAPPA, 10.0 / KAPPA, &g);
        assert!(matches!(r, Err(Error::SpacingTooSmall { .. })));
    }

    #[test]
    fn minimal_spacing_passes() {
        let g = grid();
        for scheme in [BinScheme::TimeBin, BinScheme::FrequencyBin] {
            let s = min_bin_spacing(scheme, KAPPA) * 1.001;
            let basis = bin_basis(scheme, 3, KAPPA, s, &g).unwrap();
            let worst = basis.overlap_matrix().unwrap().max_off_diagonal_sq();
            assert!(worst <= BIN_OVERLAP_LIMIT && worst > 0.5 * BIN_OVERLAP_LIMIT, "{worst}");
        }
    }

    #[test]
    fn zero_frequency_spacing_rejected() {
        let r = bin_basis(BinScheme::FrequencyBin, 2, KAPPA, 0.0, &grid());
        match r {
            Err(Error::SpacingTooSmall { overlap_sq }) => assert!((overlap_sq - 1.0).abs() < 1e-12),
            other => panic!("{other:?}"),
        }
    }
}
