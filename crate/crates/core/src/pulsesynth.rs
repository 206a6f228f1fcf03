// SPDX-License-Identifier: Apache-2.0

//! Decay rates, coupling envelopes and DAC quantisation for shaped emission
//! and time-reversed absorption.
//!
//! A virtual source cavity released with collapse amplitude `λ(t) = ξ(t)/√r(t)`,
//! `r(t) = ∫_t^∞ |ξ|²`, emits exactly `ξ`. The couplings below are the same
//! objects expressed in transfer-filter units, `g = (√κ_f/2) λ*`.

use std::f64::consts::PI;

use num_complex::Complex64 as C64;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::grid::{cumulative_backward, cumulative_forward, SampledWaveform, TimeGrid, WaveformKind};
use crate::modebasis::{default_grid_with_spacing, overlap, sech_basis};

/// Device-limited maximum decay rate, rad/s.
pub const DEFAULT_RATE_CAP: f64 = 2.0 * PI * 8e6;

/// Remaining (or accumulated) energy below which a drive is switched off.
pub const DEFAULT_ENERGY_FLOOR: f64 = 1e-6;

/// Regularisation of the rate and coupling formulas.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct DriveOptions {
    /// Rate ceiling, rad/s.
    pub cap: f64,
    /// Energy floor for the vanishing denominators.
    pub floor: f64,
}

impl Default for DriveOptions {
    fn default() -> Self {
        Self { cap: DEFAULT_RATE_CAP, floor: DEFAULT_ENERGY_FLOOR }
    }
}

impl DriveOptions {
    pub fn validate(&self) -> Result<()> {
        if !(self.cap > 0.0) {
            return Err(Error::param(format!("rate cap must be positive, got {}", self.cap)));
        }
        if !(self.floor > 0.0 && self.floor < 1.0) {
            return Err(Error::param(format!("energy floor must lie in (0, 1), got {}", self.floor)));
        }
        Ok(())
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RateProfile {
    pub grid: TimeGrid,
    /// Rate per grid point, rad/s.
    pub gamma: Vec<f64>,
    pub mode_index: Option<usize>,
    pub cap: f64,
}

impl RateProfile {
    pub fn with_mode_index(mut self, m: usize) -> Self {
        self.mode_index = Some(m);
        self
    }

    pub fn peak(&self) -> f64 {
        self.gamma.iter().cloned().fold(0.0, f64::max)
    }

    /// First index where the profile has been switched off.
    pub fn truncation_index(&self) -> Option<usize> {
        let last_on = self.gamma.iter().rposition(|&g| g > 0.0)?;
        (last_on + 1 < self.gamma.len()).then_some(last_on + 1)
    }

    pub fn to_waveform(&self) -> Result<SampledWaveform> {
        SampledWaveform::new(
            self.grid,
            self.gamma.iter().map(|&g| C64::new(g, 0.0)).collect(),
            WaveformKind::Rate,
        )
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum CouplingRole {
    F0g1Receiver,
    VirtualCavitySource,
    VirtualCavitySink,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CouplingEnvelope {
    pub grid: TimeGrid,
    /// Coupling per grid point, rad/s.
    pub g: Vec<C64>,
    pub role: CouplingRole,
    /// Transfer-filter linewidth the envelope was scaled with, rad/s.
    pub kappa_f: f64,
}

impl CouplingEnvelope {
    /// An envelope that is zero everywhere.
    pub fn off(grid: TimeGrid, role: CouplingRole, kappa_f: f64) -> Self {
        Self { grid, g: vec![C64::new(0.0, 0.0); grid.len()], role, kappa_f }
    }

    pub fn is_off(&self) -> bool {
        self.g.iter().all(|g| g.norm_sqr() == 0.0)
    }

    /// Collapse-operator amplitude `(2/√κ_f) g*` used by the virtual cavities.
    pub fn collapse_amplitude(&self) -> Vec<C64> {
        let s = 2.0 / self.kappa_f.sqrt();
        self.g.iter().map(|g| g.conj() * s).collect()
    }

    /// Induced decay rate `4|g|²/κ_f`.
    pub fn rate(&self) -> Vec<f64> {
        self.g.iter().map(|g| 4.0 * g.norm_sqr() / self.kappa_f).collect()
    }

    pub fn scaled(&self, factor: C64) -> Self {
        Self { g: self.g.iter().map(|g| g * factor).collect(), ..self.clone() }
    }

    pub fn to_waveform(&self) -> Result<SampledWaveform> {
        SampledWaveform::new(self.grid, self.g.clone(), WaveformKind::DriveEnvelope)
    }
}

fn check_mode(mode: &SampledWaveform) -> Result<()> {
    let e = mode.energy();
    if (e - 1.0).abs() > 1e-6 {
        return Err(Error::InvalidWaveform(format!("mode energy {e} is not normalised")));
    }
    Ok(())
}

fn check_kappa_f(kappa_f: f64) -> Result<()> {
    if !(kappa_f > 0.0) || !kappa_f.is_finite() {
        return Err(Error::param(format!("kappa_f must be positive, got {kappa_f}")));
    }
    Ok(())
}

/// Remaining energy `∫_t^end |ξ|²` per sample.
pub fn remaining_energy(mode: &SampledWaveform) -> Vec<f64> {
    let density: Vec<f64> = mode.samples().iter().map(|s| s.norm_sqr()).collect();
    cumulative_backward(&density, mode.grid().dt())
}

/// Accumulated energy `∫_start^t |ξ|²` per sample.
pub fn accumulated_energy(mode: &SampledWaveform) -> Vec<f64> {
    let density: Vec<f64> = mode.samples().iter().map(|s| s.norm_sqr()).collect();
    cumulative_forward(&density, mode.grid().dt())
}

/// `Γ(t) = |ξ(t)|² / ∫_t^∞ |ξ|²`, clipped at `opts.cap` and zero once the
/// remaining energy drops below `opts.floor`.
///
/// The running integral uses a fourth-order rule; the trapezoidal rule leaves
/// a relative error of order `(κ dt)²/12` in the denominator.
pub fn decay_rate(mode: &SampledWaveform, opts: &DriveOptions) -> Result<RateProfile> {
    opts.validate()?;
    check_mode(mode)?;
    let remaining = remaining_energy(mode);
    let gamma = mode
        .samples()
        .iter()
        .zip(&remaining)
        .map(|(s, &r)| if r < opts.floor { 0.0 } else { (s.norm_sqr() / r).min(opts.cap) })
        .collect();
    Ok(RateProfile { grid: *mode.grid(), gamma, mode_index: None, cap: opts.cap })
}

fn clip_coupling(g: C64, kappa_f: f64, cap: f64) -> C64 {
    let max = (kappa_f * cap).sqrt() / 2.0;
    let n = g.norm();
    if n > max {
        g * (max / n)
    } else {
        g
    }
}

/// Virtual source-cavity coupling `(√κ_f/2) ξ*(t) / √(∫_t^∞ |ξ|²)`.
pub fn source_coupling(mode: &SampledWaveform, kappa_f: f64, opts: &DriveOptions) -> Result<CouplingEnvelope> {
    opts.validate()?;
    check_mode(mode)?;
    check_kappa_f(kappa_f)?;
    let remaining = remaining_energy(mode);
    let pre = kappa_f.sqrt() / 2.0;
    let g = mode
        .samples()
        .iter()
        .zip(&remaining)
        .map(|(s, &r)| {
            if r < opts.floor {
                C64::new(0.0, 0.0)
            } else {
                clip_coupling(s.conj() * (pre / r.sqrt()), kappa_f, opts.cap)
            }
        })
        .collect();
    Ok(CouplingEnvelope { grid: *mode.grid(), g, role: CouplingRole::VirtualCavitySource, kappa_f })
}

/// Absorbing coupling for a target waveform `w` arriving at the receiver:
/// `(√κ_f/2) w(t) / √(∫_start^t |w|²)`, zero until the accumulated energy
/// reaches `opts.floor`.
pub fn absorbing_coupling(
    target: &SampledWaveform,
    kappa_f: f64,
    role: CouplingRole,
    opts: &DriveOptions,
) -> Result<CouplingEnvelope> {
    opts.validate()?;
    check_kappa_f(kappa_f)?;
    let accumulated = accumulated_energy(target);
    let pre = kappa_f.sqrt() / 2.0;
    let g = target
        .samples()
        .iter()
        .zip(&accumulated)
        .map(|(s, &f)| {
            if f < opts.floor {
                C64::new(0.0, 0.0)
            } else {
                clip_coupling(s * (pre / f.sqrt()), kappa_f, opts.cap)
            }
        })
        .collect();
    Ok(CouplingEnvelope { grid: *target.grid(), g, role, kappa_f })
}

/// f0g1 receiver drive absorbing `ξ_n(-t + Δt)`.
pub fn receiver_coupling(
    mode: &SampledWaveform,
    kappa_f: f64,
    delta_t: f64,
    opts: &DriveOptions,
) -> Result<CouplingEnvelope> {
    check_mode(mode)?;
    let target = time_reverse_waveform(mode, delta_t)?;
    absorbing_coupling(&target, kappa_f, CouplingRole::F0g1Receiver, opts)
}

/// Waveform re-indexed as `w(2 t_mid - t + Δt)` where `t_mid` is the grid
/// midpoint. Integer-sample shifts are exact; others interpolate linearly.
pub fn time_reverse_waveform(w: &SampledWaveform, delta_t: f64) -> Result<SampledWaveform> {
    let samples = reverse_samples(w.grid(), w.samples(), delta_t, |s| s.norm_sqr())?;
    SampledWaveform::new_unchecked(*w.grid(), samples, w.kind())
}

/// Waveform delayed by `delay` (`w(t - delay)`), zero-filled.
pub fn shift_waveform(w: &SampledWaveform, delay: f64) -> Result<SampledWaveform> {
    let once = time_reverse_waveform(w, 0.0)?;
    time_reverse_waveform(&once, -delay)
}

fn reverse_samples(grid: &TimeGrid, samples: &[C64], delta_t: f64, weight: impl Fn(&C64) -> f64) -> Result<Vec<C64>> {
    if !delta_t.is_finite() {
        return Err(Error::param("delta_t must be finite"));
    }
    let n = grid.len();
    let shift = delta_t / grid.dt();
    let rounded = shift.round();
    let out: Vec<C64> = if (shift - rounded).abs() < 1e-9 {
        let k = rounded as i64;
        (0..n as i64)
            .map(|i| {
                let src = n as i64 - 1 - i + k;
                if (0..n as i64).contains(&src) {
                    samples[src as usize]
                } else {
                    C64::new(0.0, 0.0)
                }
            })
            .collect()
    } else {
        (0..n)
            .map(|i| {
                let x = (n - 1 - i) as f64 + shift;
                if x < 0.0 || x > (n - 1) as f64 {
                    return C64::new(0.0, 0.0);
                }
                let j = (x.floor() as usize).min(n - 2);
                let frac = x - j as f64;
                samples[j] * (1.0 - frac) + samples[j + 1] * frac
            })
            .collect()
    };
    let before: f64 = samples.iter().map(&weight).sum();
    let after: f64 = out.iter().map(&weight).sum();
    if before > 0.0 {
        let lost = (before - after) / before;
        if lost > 1e-6 {
            return Err(Error::ShiftOutsideGrid { shift: delta_t, lost });
        }
    }
    Ok(out)
}

/// Objects that can be re-indexed in time as `x(2 t_mid - t + Δt)`.
pub trait TimeReverse: Sized {
    fn time_reverse(&self, delta_t: f64) -> Result<Self>;
}

impl TimeReverse for SampledWaveform {
    fn time_reverse(&self, delta_t: f64) -> Result<Self> {
        time_reverse_waveform(self, delta_t)
    }
}

impl TimeReverse for CouplingEnvelope {
    fn time_reverse(&self, delta_t: f64) -> Result<Self> {
        let g = reverse_samples(&self.grid, &self.g, delta_t, |s| s.norm_sqr())?;
        Ok(Self { g, ..self.clone() })
    }
}

impl TimeReverse for RateProfile {
    fn time_reverse(&self, delta_t: f64) -> Result<Self> {
        let as_complex: Vec<C64> = self.gamma.iter().map(|&g| C64::new(g, 0.0)).collect();
        let gamma = reverse_samples(&self.grid, &as_complex, delta_t, |s| s.norm())?
            .into_iter()
            .map(|s| s.re)
            .collect();
        Ok(Self { gamma, ..self.clone() })
    }
}

pub fn time_reverse<T: TimeReverse>(x: &T, delta_t: f64) -> Result<T> {
    x.time_reverse(delta_t)
}

/// Arbitrary-waveform generator: sample rate, vertical resolution and the
/// amplitude mapped to the largest code.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct DacModel {
    pub sample_rate: f64,
    pub bits: u32,
    pub full_scale: f64,
}

impl DacModel {
    pub fn new(sample_rate: f64, bits: u32, full_scale: f64) -> Result<Self> {
        let d = Self { sample_rate, bits, full_scale };
        d.validate()?;
        Ok(d)
    }

    /// 1 GSa/s, 12 bits, full scale at the coupling that reaches `cap` for `kappa_f`.
    pub fn default_for(kappa_f: f64, cap: f64) -> Self {
        Self { sample_rate: 1e9, bits: 12, full_scale: (kappa_f * cap).sqrt() / 2.0 }
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.sample_rate > 0.0) {
            return Err(Error::param("DAC sample rate must be positive"));
        }
        if !(1..=64).contains(&self.bits) {
            return Err(Error::param(format!("DAC bits must lie in 1..=64, got {}", self.bits)));
        }
        if !(self.full_scale > 0.0) {
            return Err(Error::param("DAC full scale must be positive"));
        }
        Ok(())
    }

    /// Amplitude of one code step.
    pub fn step(&self) -> f64 {
        self.full_scale / 2f64.powi(self.bits as i32 - 1)
    }

    fn code_range(&self) -> (f64, f64) {
        let half = 2f64.powi(self.bits as i32 - 1);
        (-half, half - 1.0)
    }

    /// Two's-complement code of one quadrature.
    pub fn code(&self, x: f64) -> Result<i64> {
        if x.abs() > self.full_scale * (1.0 + 1e-12) {
            return Err(Error::Clipping { value: x, full_scale: self.full_scale });
        }
        let (lo, hi) = self.code_range();
        Ok((x / self.step()).round().clamp(lo, hi) as i64)
    }

    pub fn level(&self, code: i64) -> f64 {
        code as f64 * self.step()
    }

    /// Grid index that starts each DAC hold interval, for every grid sample.
    fn hold_sources(&self, grid: &TimeGrid) -> Vec<usize> {
        let period = 1.0 / self.sample_rate;
        let mut out = Vec::with_capacity(grid.len());
        let mut current_slot = i64::MIN;
        let mut source = 0;
        for i in 0..grid.len() {
            let slot = ((grid.time(i) - grid.t_start()) / period + 1e-9).floor() as i64;
            if slot != current_slot {
                current_slot = slot;
                source = i;
            }
            out.push(source);
        }
        out
    }

    /// Zero-order hold at the DAC rate followed by per-quadrature rounding.
    pub fn quantize_samples(&self, grid: &TimeGrid, samples: &[C64]) -> Result<Vec<C64>> {
        self.validate()?;
        let codes = self.codes(grid, samples)?;
        Ok(codes.iter().map(|&(re, im)| C64::new(self.level(re), self.level(im))).collect())
    }

    /// Integer codes (I, Q) per grid sample after zero-order hold.
    pub fn codes(&self, grid: &TimeGrid, samples: &[C64]) -> Result<Vec<(i64, i64)>> {
        if samples.len() != grid.len() {
            return Err(Error::DimensionMismatch { expected: grid.len(), found: samples.len() });
        }
        let sources = self.hold_sources(grid);
        sources
            .iter()
            .map(|&j| Ok((self.code(samples[j].re)?, self.code(samples[j].im)?)))
            .collect()
    }
}

pub trait Quantize: Sized {
    fn quantize(&self, dac: &DacModel) -> Result<Self>;
}

impl Quantize for SampledWaveform {
    fn quantize(&self, dac: &DacModel) -> Result<Self> {
        let q = dac.quantize_samples(self.grid(), self.samples())?;
        SampledWaveform::new_unchecked(*self.grid(), q, self.kind())
    }
}

impl Quantize for CouplingEnvelope {
    fn quantize(&self, dac: &DacModel) -> Result<Self> {
        let g = dac.quantize_samples(&self.grid, &self.g)?;
        Ok(Self { g, ..self.clone() })
    }
}

impl Quantize for RateProfile {
    fn quantize(&self, dac: &DacModel) -> Result<Self> {
        let as_complex: Vec<C64> = self.gamma.iter().map(|&g| C64::new(g, 0.0)).collect();
        let gamma = dac
            .quantize_samples(&self.grid, &as_complex)?
            .into_iter()
            .map(|s| s.re.max(0.0))
            .collect();
        Ok(Self { gamma, ..self.clone() })
    }
}

pub fn quantize<T: Quantize>(x: &T, dac: &DacModel) -> Result<T> {
    x.quantize(dac)
}

/// Field released by a virtual cavity, initially holding one excitation,
/// under a piecewise-constant collapse amplitude `λ_k` held over each step.
pub fn released_field(grid: &TimeGrid, lambda: &[C64]) -> Result<SampledWaveform> {
    let dt = grid.dt();
    let mut amplitude = 1.0;
    let mut out = Vec::with_capacity(lambda.len());
    for l in lambda {
        out.push(l * amplitude);
        amplitude *= (-0.5 * l.norm_sqr() * dt).exp();
    }
    SampledWaveform::new_unchecked(*grid, out, WaveformKind::FieldRecord)
}

/// `1 - |⟨a, b⟩|² / (‖a‖² ‖b‖²)`; 1 when either waveform vanishes.
pub fn shape_infidelity(a: &SampledWaveform, b: &SampledWaveform) -> Result<f64> {
    let ea = a.energy();
    let eb = b.energy();
    if ea == 0.0 || eb == 0.0 {
        return Ok(1.0);
    }
    let o = overlap(a, b)?;
    Ok((1.0 - o.norm_sqr() / (ea * eb)).clamp(0.0, 1.0))
}

/// Waveform infidelity caused by amplitude quantisation of the sender drive.
///
/// The sech mode is sampled at the DAC period so that the zero-order hold is
/// exact, its source drive is quantised with full scale at the rate cap, and
/// the released field is compared with the one released by the unquantised
/// drive on the same grid.
pub fn quantization_infidelity(mode_index: usize, bits: u32, kappa_ph: f64, opts: &DriveOptions) -> Result<f64> {
    let (ideal, quantized) = quantization_pair(mode_index, bits, kappa_ph, 1e9, opts)?;
    shape_infidelity(&ideal, &quantized)
}

/// Released fields from the unquantised and quantised drives.
pub fn quantization_pair(
    mode_index: usize,
    bits: u32,
    kappa_ph: f64,
    sample_rate: f64,
    opts: &DriveOptions,
) -> Result<(SampledWaveform, SampledWaveform)> {
    if bits == 0 {
        return Err(Error::param("bits must be at least 1"));
    }
    let grid = default_grid_with_spacing(kappa_ph, mode_index, 1.0 / sample_rate)?;
    let basis = sech_basis(mode_index + 1, kappa_ph, &grid)?;
    // κ_f cancels between the coupling and the collapse amplitude.
    let kappa_f = 1.0;
    let drive = source_coupling(&basis.modes()[mode_index], kappa_f, opts)?;
    let dac = DacModel::new(sample_rate, bits, (kappa_f * opts.cap).sqrt() / 2.0)?;
    let quantized = drive.quantize(&dac)?;
    let ideal = released_field(&grid, &drive.collapse_amplitude())?;
    let regenerated = released_field(&grid, &quantized.collapse_amplitude())?;
    Ok((ideal, regenerated))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::modebasis::default_grid;

    const KAPPA: f64 = 2.0 * PI * 5e6;
    const KAPPA_F: f64 = 2.0 * PI * 138e6;

    fn modes(n: usize) -> Vec<SampledWaveform> {
        let g = default_grid(KAPPA, 7).unwrap();
        sech_basis(n, KAPPA, &g).unwrap().into_modes()
    }

    #[test]
    fn mode0_rate_matches_closed_form() {
        let m = &modes(1)[0];
        let rate = decay_rate(m, &DriveOptions::default()).unwrap();
        let remaining = remaining_energy(m);
        for (i, &g) in rate.gamma.iter().enumerate() {
            if remaining[i] < 1e-6 {
                assert_eq!(g, 0.0);
                continue;
            }
            let t = m.grid().time(i);
            // 1 + tanh(y) written without cancellation.
            let expected = KAPPA / (1.0 + (-KAPPA * t).exp());
            assert!((g - expected).abs() <= 1e-6 * expected, "t = {t}: {g} vs {expected}");
        }
    }

    #[test]
    fn rate_is_capped_and_truncated() {
        let m = &modes(1)[0];
        let opts = DriveOptions { cap: KAPPA / 2.0, floor: 1e-6 };
        let rate = decay_rate(m, &opts).unwrap();
        assert!(rate.gamma.iter().all(|&g| (0.0..=opts.cap).contains(&g)));
        assert!(rate.truncation_index().is_some());
        assert!(rate.gamma[0] < 1e-3 * KAPPA);
        assert!(decay_rate(m, &DriveOptions { cap: 0.0, floor: 1e-6 }).is_err());
    }

    #[test]
    fn source_coupling_matches_rate() {
        for m in modes(4) {
            let opts = DriveOptions::default();
            let rate = decay_rate(&m, &opts).unwrap();
            let g = source_coupling(&m, KAPPA_F, &opts).unwrap();
            for (a, b) in g.rate().iter().zip(&rate.gamma) {
                assert!((a - b).abs() <= 1e-9 * b.max(1.0));
            }
            assert!(g.g.iter().all(|x| x.im == 0.0));
        }
    }

    #[test]
    fn receiver_coupling_scales_with_root_kappa() {
        let m = &modes(1)[0];
        let opts = DriveOptions { cap: 1e12, floor: 1e-6 };
        let a = receiver_coupling(m, KAPPA_F, 0.0, &opts).unwrap();
        let b = receiver_coupling(m, 2.0 * KAPPA_F, 0.0, &opts).unwrap();
        for (x, y) in a.g.iter().zip(&b.g) {
            assert!((y - x * 2f64.sqrt()).norm() <= 1e-12 * y.norm().max(1.0));
        }
    }

    #[test]
    fn receiver_mode0_decreases_after_plateau() {
        let m = &modes(1)[0];
        let g = receiver_coupling(m, KAPPA_F, 0.0, &DriveOptions::default()).unwrap();
        let mags: Vec<f64> = g.g.iter().map(|x| x.norm()).collect();
        let peak = mags.iter().cloned().fold(0.0, f64::max);
        let first_on = mags.iter().position(|&x| x > 0.0).unwrap();
        // Receiver-time mirror image of the emission rate: flat near √κ_f κ_ph/2
        // once switched on, then falling.
        let mid = g.grid.len() / 2;
        assert!(mags[first_on] > 0.99 * peak);
        for k in mid..mags.len() - 1 {
            assert!(mags[k + 1] <= mags[k] + 1e-9 * peak);
        }
    }

    #[test]
    fn time_reverse_round_trip_and_shift() {
        let m = &modes(2)[1];
        let twice = time_reverse_waveform(&time_reverse_waveform(m, 0.0).unwrap(), 0.0).unwrap();
        for (a, b) in twice.samples().iter().zip(m.samples()) {
            assert!((a - b).norm() < 1e-12);
        }
        let dt = m.grid().dt();
        let shifted = time_reverse_waveform(m, 36.0 * dt).unwrap();
        let base = time_reverse_waveform(m, 0.0).unwrap();
        for i in 0..m.len() - 36 {
            assert_eq!(shifted.samples()[i + 36], base.samples()[i]);
        }
        let far = time_reverse_waveform(m, m.grid().duration());
        assert!(matches!(far, Err(Error::ShiftOutsideGrid { .. })));
    }

    #[test]
    fn eighteen_ns_is_an_integer_shift() {
        let g = default_grid(KAPPA, 3).unwrap();
        let s = 18e-9 / g.dt();
        assert!((s - s.round()).abs() < 1e-9);
    }

    #[test]
    fn symmetric_density_survives_reversal() {
        let m = &modes(1)[0];
        let r = time_reverse_waveform(m, 0.0).unwrap();
        for (a, b) in r.samples().iter().zip(m.samples()) {
            assert!((a.norm_sqr() - b.norm_sqr()).abs() < 1e-12 * KAPPA);
        }
    }

    #[test]
    fn one_bit_dac_has_two_levels() {
        let dac = DacModel::new(1e9, 1, 1.0).unwrap();
        let g = TimeGrid::new(0.0, 0.25e-9, 64).unwrap();
        let s: Vec<C64> = (0..64).map(|i| C64::new((i as f64 * 0.3).sin(), 0.0)).collect();
        let q = dac.quantize_samples(&g, &s).unwrap();
        let mut levels: Vec<i64> = q.iter().map(|x| (x.re * 4.0).round() as i64).collect();
        levels.sort();
        levels.dedup();
        assert_eq!(levels.len(), 2);
    }

    #[test]
    fn quantize_is_idempotent_and_clips() {
        let dac = DacModel::new(1e9, 6, 1.0).unwrap();
        let g = TimeGrid::new(0.0, 0.25e-9, 200).unwrap();
        let s: Vec<C64> = (0..200).map(|i| C64::from_polar(0.9, i as f64 * 0.05)).collect();
        let w = SampledWaveform::new_unchecked(g, s, WaveformKind::DriveEnvelope).unwrap();
        let q1 = w.quantize(&dac).unwrap();
        let q2 = q1.quantize(&dac).unwrap();
        assert_eq!(q1, q2);
        let loud = w.scaled(C64::new(2.0, 0.0));
        assert!(matches!(loud.quantize(&dac), Err(Error::Clipping { .. })));
    }

    #[test]
    fn many_bits_only_resample() {
        let dac = DacModel::new(1e9, 64, 1.0).unwrap();
        let g = TimeGrid::new(0.0, 1e-9, 50).unwrap();
        let s: Vec<C64> = (0..50).map(|i| C64::new(0.5 * (i as f64 * 0.1).cos(), 0.1)).collect();
        let q = dac.quantize_samples(&g, &s).unwrap();
        for (a, b) in q.iter().zip(&s) {
            assert!((a - b).norm() < 1e-15);
        }
    }

    #[test]
    fn released_field_reproduces_mode() {
        let m = &modes(3)[2];
        let drive = source_coupling(m, KAPPA_F, &DriveOptions::default()).unwrap();
        let field = released_field(m.grid(), &drive.collapse_amplitude()).unwrap();
        assert!(shape_infidelity(m, &field).unwrap() < 1e-4);
    }
}
