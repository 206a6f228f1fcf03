// SPDX-License-Identifier: Apache-2.0

use std::f64::consts::PI;

use num_complex::Complex64 as C64;
use rustfft::FftPlanner;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::grid::SampledWaveform;

/// Frequency-domain samples `ξ(f) = ∫ ξ(t) exp(-i2πft) dt` on a uniform axis.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Spectrum {
    pub f_start: f64,
    pub df: f64,
    pub n_points: usize,
    pub samples: Vec<C64>,
}

impl Spectrum {
    pub fn frequency(&self, i: usize) -> f64 {
        self.f_start + i as f64 * self.df
    }

    pub fn frequencies(&self) -> Vec<f64> {
        (0..self.n_points).map(|i| self.frequency(i)).collect()
    }

    /// `Σ |ξ(f_k)|² df`; equals the discrete time-domain energy exactly.
    pub fn energy(&self) -> f64 {
        self.samples.iter().map(|s| s.norm_sqr()).sum::<f64>() * self.df
    }
}

/// Zero-padding factor applied before the FFT.
const PAD_FACTOR: usize = 2;

/// Continuous Fourier transform by zero-padded FFT with the absolute time
/// origin restored, so real even modes have real spectra.
pub fn fourier_transform(w: &SampledWaveform) -> Result<Spectrum> {
    let grid = w.grid();
    if w.is_empty() {
        return Err(Error::InvalidWaveform("empty waveform".into()));
    }
    let n_fft = (PAD_FACTOR * grid.len()).next_power_of_two();
    let mut buf = vec![C64::new(0.0, 0.0); n_fft];
    buf[..grid.len()].copy_from_slice(w.samples());
    FftPlanner::new().plan_fft_forward(n_fft).process(&mut buf);

    let dt = grid.dt();
    let df = 1.0 / (n_fft as f64 * dt);
    let half = (n_fft / 2) as i64;
    let t0 = grid.t_start();
    let samples = (0..n_fft as i64)
        .map(|k| {
            let signed = k - half;
            let idx = signed.rem_euclid(n_fft as i64) as usize;
            let f = signed as f64 * df;
            buf[idx] * C64::from_polar(dt, -2.0 * PI * f * t0)
        })
        .collect();
    Ok(Spectrum { f_start: -(half as f64) * df, df, n_points: n_fft, samples })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::grid::TimeGrid;
    use crate::modebasis::sech_basis;

    const KAPPA: f64 = 2.0 * PI * 5e6;

    #[test]
    fn parseval_and_parity() {
        let g = TimeGrid::symmetric(60.0 / KAPPA, 0.5e-9).unwrap();
        let basis = sech_basis(4, KAPPA, &g).unwrap();
        for (m, mode) in basis.modes().iter().enumerate() {
            let s = fourier_transform(mode).unwrap();
            assert!((s.energy() - mode.energy()).abs() < 1e-6);
            let peak = s.samples.iter().map(|x| x.norm()).fold(0.0, f64::max);
            let stray = s
                .samples
                .iter()
                .map(|x| if m % 2 == 0 { x.im.abs() } else { x.re.abs() })
                .fold(0.0, f64::max);
            assert!(stray < 1e-6 * peak, "mode {m}: {stray}");
        }
    }

    #[test]
    fn mode0_matches_analytic_transform() {
        // ∫ √(κ/4) sech(κt/2) e^{-i2πft} dt = √(κ/4) (2π/κ) sech(2π² f/κ)
        let g = TimeGrid::symmetric(60.0 / KAPPA, 0.5e-9).unwrap();
        let basis = sech_basis(1, KAPPA, &g).unwrap();
        let s = fourier_transform(&basis.modes()[0]).unwrap();
        for (i, x) in s.samples.iter().enumerate() {
            let f = s.frequency(i);
            let expected = (KAPPA / 4.0).sqrt() * 2.0 * PI / KAPPA / (2.0 * PI * PI * f / KAPPA).cosh();
            assert!((x.re - expected).abs() < 1e-9 * (KAPPA / 4.0).sqrt() * 2.0 * PI / KAPPA);
        }
    }

    #[test]
    fn shift_changes_only_phase() {
        let g = TimeGrid::symmetric(80.0 / KAPPA, 0.5e-9).unwrap();
        let a = sech_basis(1, KAPPA, &g).unwrap().modes()[0].clone();
        let shift = 40;
        let mut shifted = vec![C64::new(0.0, 0.0); g.len()];
        shifted[shift..].copy_from_slice(&a.samples()[..g.len() - shift]);
        let b = SampledWaveform::new_unchecked(g, shifted, a.kind()).unwrap();
        let sa = fourier_transform(&a).unwrap();
        let sb = fourier_transform(&b).unwrap();
        let tau = shift as f64 * g.dt();
        for i in 0..sa.n_points {
            let f = sa.frequency(i);
            let expected = sa.samples[i] * C64::from_polar(1.0, -2.0 * PI * f * tau);
            assert!((sb.samples[i] - expected).norm() < 1e-9);
        }
    }
}
