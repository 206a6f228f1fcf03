// SPDX-License-Identifier: Apache-2.0

//! Chronocyclic Wigner function `W(t,f) = ∫dτ ξ(t+τ/2) ξ*(t−τ/2) e^{−i2πfτ}`.
//!
//! On a grid of spacing `Δt` the lag takes the values `τ = 2jΔt`, so the
//! frequency axis has period `1/(2Δt)` and modes must be band-limited to
//! `|f| < 1/(4Δt)`.

use std::f64::consts::PI;
use std::io::Write;

use nalgebra::DMatrix;
use num_complex::Complex64 as C64;
use rustfft::FftPlanner;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::grid::{SampledWaveform, TimeGrid};

/// Spectral energy fraction allowed outside the alias-free band.
pub const ALIASING_LIMIT: f64 = 1e-6;

/// Lag zero-padding factor.
const PAD: usize = 4;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct WignerGrid {
    pub times: TimeGrid,
    pub f_start: f64,
    pub df: f64,
    /// Rows indexed by time, columns by frequency.
    pub values: DMatrix<f64>,
}

impl WignerGrid {
    pub fn n_freq(&self) -> usize {
        self.values.ncols()
    }

    pub fn frequency(&self, j: usize) -> f64 {
        self.f_start + j as f64 * self.df
    }

    pub fn frequencies(&self) -> Vec<f64> {
        (0..self.n_freq()).map(|j| self.frequency(j)).collect()
    }

    /// `∫W dt df`.
    pub fn integral(&self) -> f64 {
        self.values.sum() * self.times.dt() * self.df
    }

    /// `∫W df` per time sample.
    pub fn time_marginal(&self) -> Vec<f64> {
        self.values.row_iter().map(|r| r.sum() * self.df).collect()
    }

    /// `∫W dt` per frequency sample.
    pub fn frequency_marginal(&self) -> Vec<f64> {
        self.values.column_iter().map(|c| c.sum() * self.times.dt()).collect()
    }

    pub fn min_value(&self) -> f64 {
        self.values.min()
    }

    fn matches(&self, other: &WignerGrid) -> bool {
        self.times.matches(&other.times)
            && self.values.shape() == other.values.shape()
            && (self.f_start - other.f_start).abs() <= 1e-9 * self.df.abs()
            && (self.df - other.df).abs() <= 1e-12 * self.df.abs()
    }
}

/// `|ξ(f)|²` at arbitrary frequencies by direct summation.
pub fn spectral_density(mode: &SampledWaveform, freqs: &[f64]) -> Vec<f64> {
    let g = mode.grid();
    freqs
        .iter()
        .map(|&f| {
            let mut acc = C64::new(0.0, 0.0);
            let step = C64::from_polar(1.0, -2.0 * PI * f * g.dt());
            let mut phase = C64::from_polar(1.0, -2.0 * PI * f * g.t_start());
            for s in mode.samples() {
                acc += s * phase;
                phase *= step;
            }
            (acc * g.dt()).norm_sqr()
        })
        .collect()
}

fn aliased_fraction(mode: &SampledWaveform) -> Result<f64> {
    let spec = crate::modebasis::fourier_transform(mode)?;
    let band = 1.0 / (4.0 * mode.grid().dt());
    let total = spec.energy();
    let outside: f64 = spec
        .samples
        .iter()
        .enumerate()
        .filter(|(i, _)| spec.frequency(*i).abs() >= band)
        .map(|(_, s)| s.norm_sqr())
        .sum::<f64>()
        * spec.df;
    Ok(outside / total)
}

/// Wigner function of a sampled mode on its own time grid, restricted to the
/// alias-free band `|f| < 1/(4Δt)`.
pub fn wigner(mode: &SampledWaveform) -> Result<WignerGrid> {
    let fraction = aliased_fraction(mode)?;
    if fraction > ALIASING_LIMIT {
        return Err(Error::Aliasing { fraction });
    }
    let g = *mode.grid();
    let n = g.len();
    let dt = g.dt();
    let x = mode.samples();
    let n_fft = (PAD * n).next_power_of_two();
    let fft = FftPlanner::new().plan_fft_forward(n_fft);
    // Lag period is 2Δt, so frequencies span 1/(2Δt) with spacing 1/(2Δt n_fft).
    let df = 1.0 / (2.0 * dt * n_fft as f64);
    let half = n_fft / 2;
    // Alias-free band is the middle half of the period.
    let lo = n_fft / 4;
    let n_band = n_fft / 2;
    let mut values = DMatrix::zeros(n, n_band);
    let mut buf = vec![C64::new(0.0, 0.0); n_fft];
    let mut max_imag = 0.0f64;
    for k in 0..n {
        buf.iter_mut().for_each(|b| *b = C64::new(0.0, 0.0));
        let reach = k.min(n - 1 - k);
        for j in 0..=reach {
            let c = x[k + j] * x[k - j].conj();
            buf[j] = c;
            if j > 0 {
                buf[n_fft - j] = c.conj();
            }
        }
        fft.process(&mut buf);
        for l in 0..n_band {
            let v = buf[(l + lo + half) % n_fft] * (2.0 * dt);
            max_imag = max_imag.max(v.im.abs());
            values[(k, l)] = v.re;
        }
    }
    let scale = values.amax().max(f64::MIN_POSITIVE);
    if max_imag > 1e-10 * scale.max(1.0) {
        return Err(Error::InvalidWaveform(format!("Wigner function not real (residue {max_imag:.3e})")));
    }
    Ok(WignerGrid { times: g, f_start: (lo as f64 - half as f64) * df, df, values })
}

/// `∫∫ W_a W_b dt df`; equals `|⟨ξ_a, ξ_b⟩|²` by Moyal's identity.
pub fn wigner_overlap(a: &WignerGrid, b: &WignerGrid) -> Result<f64> {
    if !a.matches(b) {
        return Err(Error::GridMismatch);
    }
    Ok(a.values.dot(&b.values) * a.times.dt() * a.df)
}

/// Dense matrix with a header row of frequencies and a leading time column.
pub fn write_wigner<W: Write>(out: &mut W, w: &WignerGrid) -> Result<()> {
    write!(out, "t\\f")?;
    for f in w.frequencies() {
        write!(out, ",{f:.9e}")?;
    }
    writeln!(out)?;
    for (k, row) in w.values.row_iter().enumerate() {
        write!(out, "{:.9e}", w.times.time(k))?;
        for v in row.iter() {
            write!(out, ",{v:.9e}")?;
        }
        writeln!(out)?;
    }
    Ok(())
}
