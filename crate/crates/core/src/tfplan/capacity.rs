// SPDX-License-Identifier: Apache-2.0

//! How many orthogonal modes fit a temporal window and a bandwidth.

use std::io::Write;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::grid::{cumulative_forward, SampledWaveform};
use crate::modebasis::{default_grid, fourier_transform, min_bin_spacing, sech_basis, BinScheme, MAX_SECH_ORDER};

/// Energy fraction defining a mode's footprint.
pub const ENERGY_FRACTION: f64 = 0.99;

/// Number of log-spaced linewidths scanned by [`mode_count`].
pub const DEFAULT_KAPPA_SCAN: usize = 64;

/// Interpolated quantile of a cumulative distribution on a uniform axis.
fn quantile(axis_start: f64, step: f64, cumulative: &[f64], q: f64) -> f64 {
    let target = q * cumulative.last().copied().unwrap_or(0.0);
    let i = cumulative.partition_point(|&c| c < target);
    if i == 0 {
        return axis_start;
    }
    if i >= cumulative.len() {
        return axis_start + (cumulative.len() - 1) as f64 * step;
    }
    let (c0, c1) = (cumulative[i - 1], cumulative[i]);
    let frac = if c1 > c0 { (target - c0) / (c1 - c0) } else { 0.0 };
    axis_start + (i as f64 - 1.0 + frac) * step
}

fn check_fraction(fraction: f64) -> Result<()> {
    if !(fraction > 0.0 && fraction < 1.0) {
        return Err(Error::param(format!("energy fraction must lie in (0, 1), got {fraction}")));
    }
    Ok(())
}

/// Centered-quantile interval holding `fraction` of the temporal energy.
pub fn energy_window(mode: &SampledWaveform, fraction: f64) -> Result<(f64, f64)> {
    check_fraction(fraction)?;
    let g = mode.grid();
    let density: Vec<f64> = mode.samples().iter().map(|s| s.norm_sqr()).collect();
    let cum = cumulative_forward(&density, g.dt());
    let tail = (1.0 - fraction) / 2.0;
    Ok((quantile(g.t_start(), g.dt(), &cum, tail), quantile(g.t_start(), g.dt(), &cum, 1.0 - tail)))
}

/// Centered-quantile interval holding `fraction` of the spectral energy.
pub fn energy_bandwidth(mode: &SampledWaveform, fraction: f64) -> Result<(f64, f64)> {
    check_fraction(fraction)?;
    let spec = fourier_transform(mode)?;
    let density: Vec<f64> = spec.samples.iter().map(|s| s.norm_sqr()).collect();
    let cum = cumulative_forward(&density, spec.df);
    let tail = (1.0 - fraction) / 2.0;
    Ok((quantile(spec.f_start, spec.df, &cum, tail), quantile(spec.f_start, spec.df, &cum, 1.0 - tail)))
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Scheme {
    Temporal,
    TimeBin,
    FrequencyBin,
    /// Time bins × frequency bins of the fundamental mode.
    Combined,
}

impl Scheme {
    pub const ALL: [Scheme; 4] = [Scheme::Temporal, Scheme::TimeBin, Scheme::FrequencyBin, Scheme::Combined];
}

/// Temporal window (s), bandwidth (Hz) and the linewidth search range (rad/s).
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ResourceBudget {
    pub t_window: f64,
    pub bandwidth: f64,
    pub kappa_min: f64,
    pub kappa_max: f64,
}

impl ResourceBudget {
    pub fn validate(&self) -> Result<()> {
        let all_pos = [self.t_window, self.bandwidth, self.kappa_min, self.kappa_max]
            .iter()
            .all(|v| *v > 0.0 && v.is_finite());
        if !all_pos {
            return Err(Error::param("budget entries must be positive and finite"));
        }
        if self.kappa_min >= self.kappa_max {
            return Err(Error::param("kappa_min must be below kappa_max"));
        }
        Ok(())
    }
}

/// Dimensionless 99 % footprints of the sech family: window `× κ` and
/// bandwidth `/ κ` per mode order, plus the bin spacings.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ModeFootprints {
    pub windows: Vec<f64>,
    pub bandwidths: Vec<f64>,
    /// Time-bin spacing `× κ`.
    pub time_bin_spacing: f64,
    /// Frequency-bin spacing `/ κ`.
    pub frequency_bin_spacing: f64,
}

impl ModeFootprints {
    /// Footprints of sech modes `0..n_modes`, evaluated once at a reference
    /// linewidth and rescaled by dilation.
    pub fn sech(n_modes: usize) -> Result<Self> {
        if n_modes == 0 || n_modes > MAX_SECH_ORDER + 1 {
            return Err(Error::ModeOrderTooLarge { order: n_modes.saturating_sub(1), max: MAX_SECH_ORDER });
        }
        let kappa = 1.0;
        let grid = default_grid(kappa, n_modes - 1)?;
        let basis = sech_basis(n_modes, kappa, &grid)?;
        let mut windows = Vec::with_capacity(n_modes);
        let mut bandwidths = Vec::with_capacity(n_modes);
        for mode in basis.modes() {
            let (t0, t1) = energy_window(mode, ENERGY_FRACTION)?;
            let (f0, f1) = energy_bandwidth(mode, ENERGY_FRACTION)?;
            windows.push(t1 - t0);
            bandwidths.push(f1 - f0);
        }
        Ok(Self {
            windows,
            bandwidths,
            time_bin_spacing: min_bin_spacing(BinScheme::TimeBin, kappa),
            frequency_bin_spacing: min_bin_spacing(BinScheme::FrequencyBin, kappa),
        })
    }

    pub fn n_modes(&self) -> usize {
        self.windows.len()
    }

    /// Modes supported at a single linewidth.
    pub fn count_at(&self, scheme: Scheme, kappa: f64, t_window: f64, bandwidth: f64) -> usize {
        let (w0, b0) = (self.windows[0] / kappa, self.bandwidths[0] * kappa);
        if w0 > t_window || b0 > bandwidth {
            return 0;
        }
        let n_time = || ((t_window - w0) / (self.time_bin_spacing / kappa)).floor() as usize + 1;
        let n_freq = || ((bandwidth - b0) / (self.frequency_bin_spacing * kappa)).floor() as usize + 1;
        match scheme {
            Scheme::Temporal => self
                .windows
                .iter()
                .zip(&self.bandwidths)
                .take_while(|(w, b)| *w / kappa <= t_window && *b * kappa <= bandwidth)
                .count(),
            Scheme::TimeBin => n_time(),
            Scheme::FrequencyBin => n_freq(),
            Scheme::Combined => n_time() * n_freq(),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ModeCount {
    pub n: usize,
    /// Linewidth achieving `n` (the smallest on the scan), rad/s.
    pub kappa_opt: f64,
    /// `true` when the temporal count hit the largest computed mode order.
    pub saturated: bool,
}

fn kappa_scan(budget: &ResourceBudget, n_scan: usize) -> Vec<f64> {
    let (lo, hi) = (budget.kappa_min.ln(), budget.kappa_max.ln());
    let n = n_scan.max(2);
    (0..n).map(|i| (lo + (hi - lo) * i as f64 / (n - 1) as f64).exp()).collect()
}

/// Largest mode count over a log-spaced linewidth scan.
pub fn mode_count(footprints: &ModeFootprints, scheme: Scheme, budget: &ResourceBudget, n_scan: usize) -> Result<ModeCount> {
    budget.validate()?;
    let mut best = ModeCount { n: 0, kappa_opt: budget.kappa_min, saturated: false };
    for kappa in kappa_scan(budget, n_scan) {
        let n = footprints.count_at(scheme, kappa, budget.t_window, budget.bandwidth);
        if n > best.n {
            best = ModeCount { n, kappa_opt: kappa, saturated: false };
        }
    }
    best.saturated = scheme == Scheme::Temporal && best.n == footprints.n_modes();
    Ok(best)
}

/// One cell of a capacity map.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct CapacityPoint {
    pub t_window: f64,
    pub bandwidth: f64,
    pub n_temporal: usize,
    pub n_time_bin: usize,
    pub n_frequency_bin: usize,
    pub n_combined: usize,
}

/// Mode counts for every `(T, B)` pair, rows of `t_values` outermost.
pub fn capacity_map(
    footprints: &ModeFootprints,
    t_values: &[f64],
    b_values: &[f64],
    kappa_min: f64,
    kappa_max: f64,
    n_scan: usize,
) -> Result<Vec<CapacityPoint>> {
    let cells: Vec<(f64, f64)> = t_values.iter().flat_map(|&t| b_values.iter().map(move |&b| (t, b))).collect();
    cells
        .par_iter()
        .map(|&(t_window, bandwidth)| {
            let budget = ResourceBudget { t_window, bandwidth, kappa_min, kappa_max };
            let count = |s| mode_count(footprints, s, &budget, n_scan).map(|c| c.n);
            Ok(CapacityPoint {
                t_window,
                bandwidth,
                n_temporal: count(Scheme::Temporal)?,
                n_time_bin: count(Scheme::TimeBin)?,
                n_frequency_bin: count(Scheme::FrequencyBin)?,
                n_combined: count(Scheme::Combined)?,
            })
        })
        .collect()
}

/// Capacity table with raw and normalised axes: `T / t_unit`, `B / b_unit`.
pub fn write_capacity_csv<W: Write>(out: &mut W, points: &[CapacityPoint], t_unit: f64, b_unit: f64) -> Result<()> {
    writeln!(out, "t_window,bandwidth,t_norm,b_norm,n_temporal,n_time_bin,n_frequency_bin,n_combined")?;
    for p in points {
        writeln!(
            out,
            "{:.9e},{:.9e},{:.9e},{:.9e},{},{},{},{}",
            p.t_window,
            p.bandwidth,
            p.t_window / t_unit,
            p.bandwidth / b_unit,
            p.n_temporal,
            p.n_time_bin,
            p.n_frequency_bin,
            p.n_combined
        )?;
    }
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::grid::TimeGrid;
    use std::f64::consts::PI;

    const KAPPA: f64 = 2.0 * PI * 5e6;

    fn modes(kappa: f64) -> Vec<SampledWaveform> {
        let g = default_grid(kappa, 3).unwrap();
        sech_basis(4, kappa, &g).unwrap().into_modes()
    }

    #[test]
    fn window_of_fundamental_matches_closed_form() {
        // ∫sech²(κt/2) ∝ tanh(κt/2): the 99 % window is 4 atanh(0.99)/κ.
        let (lo, hi) = energy_window(&modes(KAPPA)[0], 0.99).unwrap();
        let expect = 4.0 * 0.99f64.atanh() / KAPPA;
        assert!(((hi - lo) - expect).abs() < 1e-3 * expect);
        assert!((lo + hi).abs() < 1e-3 * expect);
    }

    #[test]
    fn dilation_scales_window_and_bandwidth() {
        let (a, b) = (modes(KAPPA), modes(2.0 * KAPPA));
        for m in 0..4 {
            let wa = energy_window(&a[m], 0.99).unwrap();
            let wb = energy_window(&b[m], 0.99).unwrap();
            assert!(((wb.1 - wb.0) * 2.0 / (wa.1 - wa.0) - 1.0).abs() < 2e-3);
            let fa = energy_bandwidth(&a[m], 0.99).unwrap();
            let fb = energy_bandwidth(&b[m], 0.99).unwrap();
            assert!(((fb.1 - fb.0) / (2.0 * (fa.1 - fa.0)) - 1.0).abs() < 2e-2);
        }
    }

    #[test]
    fn higher_modes_are_wider() {
        let f = ModeFootprints::sech(8).unwrap();
        for m in 1..8 {
            assert!(f.windows[m] > f.windows[0]);
            assert!(f.bandwidths[m] > f.bandwidths[0]);
        }
    }

    #[test]
    fn fraction_limit_is_monotone() {
        let m = &modes(KAPPA)[2];
        let mut last = 0.0;
        for frac in [0.5, 0.9, 0.99, 0.999, 0.9999] {
            let (lo, hi) = energy_window(m, frac).unwrap();
            assert!(hi - lo > last);
            last = hi - lo;
        }
        assert!(energy_window(m, 1.0).is_err());
    }

    #[test]
    fn tiny_budget_supports_nothing() {
        let f = ModeFootprints::sech(4).unwrap();
        let b = ResourceBudget { t_window: 1e-9, bandwidth: 1e3, kappa_min: 1e5, kappa_max: 1e8 };
        for s in Scheme::ALL {
            assert_eq!(mode_count(&f, s, &b, 64).unwrap().n, 0);
        }
    }

    #[test]
    fn counts_are_monotone() {
        let f = ModeFootprints::sech(12).unwrap();
        let kmax = 2.0 * PI * 8e6;
        let ts: Vec<f64> = (1..30).map(|i| i as f64 * 0.2e-6).collect();
        let bs: Vec<f64> = (1..30).map(|i| i as f64 * 2e6).collect();
        let map = capacity_map(&f, &ts, &bs, kmax / 100.0, kmax, 64).unwrap();
        let at = |i: usize, j: usize| map[i * bs.len() + j];
        for i in 0..ts.len() {
            for j in 0..bs.len() {
                if i + 1 < ts.len() {
                    assert!(at(i + 1, j).n_temporal >= at(i, j).n_temporal);
                    assert!(at(i + 1, j).n_time_bin >= at(i, j).n_time_bin);
                    assert!(at(i + 1, j).n_frequency_bin >= at(i, j).n_frequency_bin);
                }
                if j + 1 < bs.len() {
                    assert!(at(i, j + 1).n_temporal >= at(i, j).n_temporal);
                    assert!(at(i, j + 1).n_time_bin >= at(i, j).n_time_bin);
                    assert!(at(i, j + 1).n_frequency_bin >= at(i, j).n_frequency_bin);
                }
            }
        }
        let _ = TimeGrid::symmetric(1.0, 0.1).unwrap();
    }
}
