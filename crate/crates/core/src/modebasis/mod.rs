// SPDX-License-Identifier: Apache-2.0

//! Construction, orthonormalisation and comparison of temporal mode families.
//!
//! Mode functions are sampled on a shared [`TimeGrid`]; inner products use the
//! trapezoidal rule. The sech family is built by numeric Gram–Schmidt over
//! `sech(κt/2)·t^m`, with a closed-form polynomial construction kept as a
//! cross-check for the lowest orders.

mod bins;
mod hermite;
pub mod io;
mod sech;
mod spectrum;

pub use bins::{bin_basis, bin_overlap, min_bin_spacing, BinScheme, BIN_OVERLAP_LIMIT};
pub use hermite::hermite_gaussian_basis;
pub use sech::{
    analytic_polynomial, default_grid, default_grid_with_spacing, sech_basis, sech_mode_analytic,
    sech_norm_constant, sech_raw, CONTAINMENT_LOSS, MAX_ANALYTIC_ORDER, MAX_SECH_ORDER,
};
pub use spectrum::{fourier_transform, Spectrum};

use nalgebra::DMatrix;
use num_complex::Complex64 as C64;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::grid::{trapezoid_complex, SampledWaveform, TimeGrid, WaveformKind};

/// Off-diagonal bound on `|I_mm'|^2` for analytically constructed families.
pub const ORTHOGONALITY_LIMIT: f64 = 1e-10;

/// Gram matrices with a larger condition number are rejected.
pub const MAX_GRAM_CONDITION: f64 = 1e12;

/// Relative residual below which Gram–Schmidt reports linear dependence.
pub const RANK_TOLERANCE: f64 = 1e-10;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum BasisFamily {
    SechOrthogonal,
    HermiteGaussian,
    TimeBin,
    FrequencyBin,
    Measured,
}

impl BasisFamily {
    pub fn as_str(&self) -> &'static str {
        match self {
            BasisFamily::SechOrthogonal => "sech_orthogonal",
            BasisFamily::HermiteGaussian => "hermite_gaussian",
            BasisFamily::TimeBin => "time_bin",
            BasisFamily::FrequencyBin => "frequency_bin",
            BasisFamily::Measured => "measured",
        }
    }

    pub fn parse(s: &str) -> Result<Self> {
        Ok(match s {
            "sech_orthogonal" | "sech" => BasisFamily::SechOrthogonal,
            "hermite_gaussian" => BasisFamily::HermiteGaussian,
            "time_bin" => BasisFamily::TimeBin,
            "frequency_bin" => BasisFamily::FrequencyBin,
            "measured" => BasisFamily::Measured,
            other => return Err(Error::Parse(format!("unknown basis family `{other}`"))),
        })
    }
}

/// An ordered family of mode functions sharing one grid.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ModeBasis {
    modes: Vec<SampledWaveform>,
    family: BasisFamily,
    /// Pulse-width parameter in rad/s (for Hermite–Gaussian families, 1/σ).
    kappa_ph: f64,
}

impl ModeBasis {
    pub fn new(modes: Vec<SampledWaveform>, family: BasisFamily, kappa_ph: f64) -> Result<Self> {
        let first = modes
            .first()
            .ok_or_else(|| Error::param("a mode basis needs at least one mode"))?;
        let grid = *first.grid();
        for m in &modes {
            grid.ensure_matches(m.grid())?;
        }
        Ok(Self { modes, family, kappa_ph })
    }

    /// Imported or simulated waveforms; orthogonality is not enforced.
    pub fn measured(modes: Vec<SampledWaveform>, kappa_ph: f64) -> Result<Self> {
        Self::new(modes, BasisFamily::Measured, kappa_ph)
    }

    pub fn modes(&self) -> &[SampledWaveform] {
        &self.modes
    }

    pub fn mode(&self, m: usize) -> Option<&SampledWaveform> {
        self.modes.get(m)
    }

    pub fn len(&self) -> usize {
        self.modes.len()
    }

    pub fn is_empty(&self) -> bool {
        self.modes.is_empty()
    }

    pub fn family(&self) -> BasisFamily {
        self.family
    }

    pub fn kappa_ph(&self) -> f64 {
        self.kappa_ph
    }

    pub fn grid(&self) -> &TimeGrid {
        self.modes[0].grid()
    }

    pub fn into_modes(self) -> Vec<SampledWaveform> {
        self.modes
    }

    pub fn overlap_matrix(&self) -> Result<OverlapMatrix> {
        overlap_matrix(self)
    }
}

/// `∫ a*(t) b(t) dt` by the trapezoidal rule.
pub fn overlap(a: &SampledWaveform, b: &SampledWaveform) -> Result<C64> {
    a.grid().ensure_matches(b.grid())?;
    let prod: Vec<C64> = a
        .samples()
        .iter()
        .zip(b.samples())
        .map(|(x, y)| x.conj() * y)
        .collect();
    Ok(trapezoid_complex(&prod, a.grid().dt()))
}

/// Matrix of mutual overlaps `I_mm'` of a basis.
#[derive(Debug, Clone, PartialEq)]
pub struct OverlapMatrix {
    entries: DMatrix<C64>,
}

impl OverlapMatrix {
    pub fn entries(&self) -> &DMatrix<C64> {
        &self.entries
    }

    pub fn dim(&self) -> usize {
        self.entries.nrows()
    }

    pub fn get(&self, m: usize, mp: usize) -> C64 {
        self.entries[(m, mp)]
    }

    /// The `|I_mm'|^2` view.
    pub fn squared(&self) -> DMatrix<f64> {
        self.entries.map(|z| z.norm_sqr())
    }

    pub fn max_off_diagonal_sq(&self) -> f64 {
        let n = self.dim();
        let mut worst = 0.0f64;
        for i in 0..n {
            for j in 0..n {
                if i != j {
                    worst = worst.max(self.entries[(i, j)].norm_sqr());
                }
            }
        }
        worst
    }

    pub fn max_deviation_from_identity(&self) -> f64 {
        let n = self.dim();
        let mut worst = 0.0f64;
        for i in 0..n {
            for j in 0..n {
                let target = if i == j { C64::new(1.0, 0.0) } else { C64::new(0.0, 0.0) };
                worst = worst.max((self.entries[(i, j)] - target).norm());
            }
        }
        worst
    }
}

pub fn overlap_matrix(basis: &ModeBasis) -> Result<OverlapMatrix> {
    let n = basis.len();
    let mut entries = DMatrix::from_element(n, n, C64::new(0.0, 0.0));
    for i in 0..n {
        for j in i..n {
            let v = overlap(&basis.modes[i], &basis.modes[j])?;
            entries[(i, j)] = v;
            entries[(j, i)] = v.conj();
        }
    }
    Ok(OverlapMatrix { entries })
}

/// Condition number of the Gram matrix of `waveforms`.
pub fn gram_condition_number(waveforms: &[SampledWaveform]) -> Result<f64> {
    let n = waveforms.len();
    let mut gram = DMatrix::from_element(n, n, C64::new(0.0, 0.0));
    for i in 0..n {
        for j in i..n {
            let v = overlap(&waveforms[i], &waveforms[j])?;
            gram[(i, j)] = v;
            gram[(j, i)] = v.conj();
        }
    }
    let eig = nalgebra::SymmetricEigen::new(gram).eigenvalues;
    let max = eig.iter().cloned().fold(f64::MIN, f64::max);
    let min = eig.iter().cloned().fold(f64::MAX, f64::min);
    if min <= 0.0 {
        return Ok(f64::INFINITY);
    }
    Ok(max / min)
}

/// Orthonormalises `raw` in order.
///
/// Each vector is orthogonalised twice against the accepted ones (classical
/// Gram–Schmidt with one re-orthogonalisation pass), which keeps the
/// off-diagonal overlaps at rounding level even for the strongly correlated
/// `t^m sech` family. Signs are left as produced.
pub fn gram_schmidt(raw: &[SampledWaveform], family: BasisFamily, kappa_ph: f64) -> Result<ModeBasis> {
    if raw.is_empty() {
        return Err(Error::param("gram_schmidt needs at least one input"));
    }
    let grid = *raw[0].grid();
    for w in raw {
        grid.ensure_matches(w.grid())?;
    }
    let cond = gram_condition_number(raw)?;
    if !(cond < MAX_GRAM_CONDITION) {
        return Err(Error::IllConditioned(cond));
    }
    let mut out: Vec<SampledWaveform> = Vec::with_capacity(raw.len());
    for (index, v) in raw.iter().enumerate() {
        let v_norm = v.norm();
        let mut u = v.clone().with_kind(WaveformKind::FieldRecord);
        for _pass in 0..2 {
            for q in &out {
                let c = overlap(q, &u)?;
                let samples: Vec<C64> = u
                    .samples()
                    .iter()
                    .zip(q.samples())
                    .map(|(x, y)| x - c * y)
                    .collect();
                u = SampledWaveform::new_unchecked(grid, samples, WaveformKind::FieldRecord)?;
            }
        }
        let ratio = u.norm() / v_norm;
        if !(ratio >= RANK_TOLERANCE) {
            return Err(Error::RankDeficient { index, ratio });
        }
        out.push(u.normalized()?);
    }
    ModeBasis::new(out, family, kappa_ph)
}

/// Rotates the global phase so that the first sample above `1e-6` of the
/// peak is positive real.
pub fn apply_sign_convention(w: &SampledWaveform) -> SampledWaveform {
    match w.first_significant_index(1e-6) {
        Some(i) => {
            let s = w.samples()[i];
            w.scaled(s.conj() / s.norm())
        }
        None => w.clone(),
    }
}
