// SPDX-License-Identifier: Apache-2.0

//! Uniform time grids and complex waveforms sampled on them.

use num_complex::Complex64 as C64;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Relative tolerance used when deciding whether two grids coincide.
const GRID_MATCH_TOL: f64 = 1e-9;

/// Tolerance on the trapezoidal norm of a `ModeFunction` waveform.
pub const MODE_NORM_TOL: f64 = 1e-8;

/// A uniform sampling of the time axis.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct TimeGrid {
    t_start: f64,
    dt: f64,
    n_points: usize,
}

impl TimeGrid {
    pub fn new(t_start: f64, dt: f64, n_points: usize) -> Result<Self> {
        if !(dt > 0.0) || !dt.is_finite() {
            return Err(Error::param(format!("grid spacing must be positive, got {dt}")));
        }
        if n_points < 2 {
            return Err(Error::param(format!("grid needs at least 2 points, got {n_points}")));
        }
        if !t_start.is_finite() {
            return Err(Error::param("grid start must be finite"));
        }
        Ok(Self { t_start, dt, n_points })
    }

    /// Grid symmetric about `t = 0` covering at least `[-half_width, half_width]`.
    /// The point count is always odd so that `t = 0` is a sample.
    pub fn symmetric(half_width: f64, dt: f64) -> Result<Self> {
        if !(half_width > 0.0) {
            return Err(Error::param("half width must be positive"));
        }
        let half = (half_width / dt).ceil() as usize;
        Self::new(-(half as f64) * dt, dt, 2 * half + 1)
    }

    pub fn t_start(&self) -> f64 {
        self.t_start
    }

    pub fn dt(&self) -> f64 {
        self.dt
    }

    pub fn len(&self) -> usize {
        self.n_points
    }

    pub fn is_empty(&self) -> bool {
        false
    }

    pub fn t_end(&self) -> f64 {
        self.time(self.n_points - 1)
    }

    pub fn duration(&self) -> f64 {
        self.dt * (self.n_points - 1) as f64
    }

    #[inline]
    pub fn time(&self, i: usize) -> f64 {
        self.t_start + self.dt * i as f64
    }

    pub fn times(&self) -> Vec<f64> {
        (0..self.n_points).map(|i| self.time(i)).collect()
    }

    /// Fractional sample position of time `t`.
    pub fn position(&self, t: f64) -> f64 {
        (t - self.t_start) / self.dt
    }

    pub fn matches(&self, other: &TimeGrid) -> bool {
        self.n_points == other.n_points
            && ((self.dt - other.dt).abs() <= GRID_MATCH_TOL * self.dt)
            && ((self.t_start - other.t_start).abs() <= GRID_MATCH_TOL * self.dt.max(self.duration()))
    }

    pub fn ensure_matches(&self, other: &TimeGrid) -> Result<()> {
        if self.matches(other) {
            Ok(())
        } else {
            Err(Error::GridMismatch)
        }
    }

    /// Every `stride`-th point, starting at the first.
    pub fn decimated(&self, stride: usize) -> Result<TimeGrid> {
        if stride == 0 {
            return Err(Error::param("decimation stride must be positive"));
        }
        TimeGrid::new(self.t_start, self.dt * stride as f64, (self.n_points - 1) / stride + 1)
    }

    /// Same span with the spacing halved.
    pub fn refined(&self) -> TimeGrid {
        TimeGrid {
            t_start: self.t_start,
            dt: self.dt / 2.0,
            n_points: 2 * self.n_points - 1,
        }
    }
}

/// What a sampled waveform represents; determines its invariants.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum WaveformKind {
    /// Photon mode function, unit trapezoidal norm, units s^(-1/2).
    ModeFunction,
    /// Drive or coupling envelope, rad/s.
    DriveEnvelope,
    /// Real non-negative rate, rad/s.
    Rate,
    /// Recorded output field, no normalisation constraint.
    FieldRecord,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SampledWaveform {
    grid: TimeGrid,
    samples: Vec<C64>,
    kind: WaveformKind,
}

impl SampledWaveform {
    /// Builds a waveform and checks the invariants of its `kind`.
    pub fn new(grid: TimeGrid, samples: Vec<C64>, kind: WaveformKind) -> Result<Self> {
        let w = Self::new_unchecked(grid, samples, kind)?;
        match kind {
            WaveformKind::ModeFunction => {
                let norm = w.energy();
                if (norm - 1.0).abs() > MODE_NORM_TOL {
                    return Err(Error::InvalidWaveform(format!(
                        "mode function norm {norm:.12} differs from 1"
                    )));
                }
            }
            WaveformKind::Rate => {
                if let Some(s) = w.samples.iter().find(|s| s.im != 0.0 || s.re < 0.0) {
                    return Err(Error::InvalidWaveform(format!("rate sample {s} is not real and non-negative")));
                }
            }
            _ => {}
        }
        Ok(w)
    }

    /// Builds a waveform checking only shape and finiteness.
    pub fn new_unchecked(grid: TimeGrid, samples: Vec<C64>, kind: WaveformKind) -> Result<Self> {
        if samples.len() != grid.len() {
            return Err(Error::InvalidWaveform(format!(
                "{} samples for a grid of {} points",
                samples.len(),
                grid.len()
            )));
        }
        if samples.iter().any(|s| !s.re.is_finite() || !s.im.is_finite()) {
            return Err(Error::InvalidWaveform("non-finite sample".into()));
        }
        Ok(Self { grid, samples, kind })
    }

    pub fn from_fn(grid: TimeGrid, kind: WaveformKind, f: impl Fn(f64) -> C64) -> Result<Self> {
        let samples = (0..grid.len()).map(|i| f(grid.time(i))).collect();
        Self::new_unchecked(grid, samples, kind)
    }

    pub fn grid(&self) -> &TimeGrid {
        &self.grid
    }

    pub fn samples(&self) -> &[C64] {
        &self.samples
    }

    pub fn into_samples(self) -> Vec<C64> {
        self.samples
    }

    pub fn kind(&self) -> WaveformKind {
        self.kind
    }

    pub fn with_kind(mut self, kind: WaveformKind) -> Self {
        self.kind = kind;
        self
    }

    pub fn len(&self) -> usize {
        self.samples.len()
    }

    pub fn is_empty(&self) -> bool {
        self.samples.is_empty()
    }

    /// Trapezoidal ∫|w|² dt.
    pub fn energy(&self) -> f64 {
        let sq: Vec<f64> = self.samples.iter().map(|s| s.norm_sqr()).collect();
        trapezoid(&sq, self.grid.dt)
    }

    pub fn norm(&self) -> f64 {
        self.energy().sqrt()
    }

    pub fn scaled(&self, factor: C64) -> Self {
        Self {
            grid: self.grid,
            samples: self.samples.iter().map(|s| s * factor).collect(),
            kind: self.kind,
        }
    }

    /// Rescaled to unit trapezoidal norm and tagged as a mode function.
    pub fn normalized(&self) -> Result<Self> {
        let n = self.norm();
        if !(n > 0.0) {
            return Err(Error::InvalidWaveform("cannot normalise a zero waveform".into()));
        }
        Ok(Self {
            grid: self.grid,
            samples: self.samples.iter().map(|s| s / n).collect(),
            kind: WaveformKind::ModeFunction,
        })
    }

    pub fn conj(&self) -> Self {
        Self {
            grid: self.grid,
            samples: self.samples.iter().map(|s| s.conj()).collect(),
            kind: self.kind,
        }
    }

    /// Keeps every `stride`-th sample.
    pub fn decimated(&self, stride: usize) -> Result<Self> {
        let grid = self.grid.decimated(stride)?;
        let samples = (0..grid.len()).map(|i| self.samples[i * stride]).collect();
        Ok(Self { grid, samples, kind: self.kind })
    }

    /// Linear interpolation at an arbitrary time; zero outside the grid.
    pub fn sample_at(&self, t: f64) -> C64 {
        let x = self.grid.position(t);
        let last = (self.grid.len() - 1) as f64;
        if x < 0.0 || x > last || !x.is_finite() {
            return C64::new(0.0, 0.0);
        }
        let i = x.floor() as usize;
        if i >= self.grid.len() - 1 {
            return self.samples[self.grid.len() - 1];
        }
        let frac = x - i as f64;
        self.samples[i] * (1.0 - frac) + self.samples[i + 1] * frac
    }

    /// Index of the first sample whose magnitude exceeds `rel_tol` times the peak.
    pub fn first_significant_index(&self, rel_tol: f64) -> Option<usize> {
        let peak = self.samples.iter().map(|s| s.norm()).fold(0.0, f64::max);
        if peak == 0.0 {
            return None;
        }
        self.samples.iter().position(|s| s.norm() > rel_tol * peak)
    }

    /// Number of sign changes of the real part, ignoring samples below
    /// `rel_tol` of the peak.
    pub fn zero_crossings(&self, rel_tol: f64) -> usize {
        let peak = self.samples.iter().map(|s| s.re.abs()).fold(0.0, f64::max);
        let mut last_sign = 0i8;
        let mut count = 0;
        for s in &self.samples {
            if s.re.abs() <= rel_tol * peak {
                continue;
            }
            let sign = if s.re > 0.0 { 1 } else { -1 };
            if last_sign != 0 && sign != last_sign {
                count += 1;
            }
            last_sign = sign;
        }
        count
    }
}

/// Trapezoidal rule on uniformly spaced samples.
pub fn trapezoid(values: &[f64], dt: f64) -> f64 {
    match values.len() {
        0 | 1 => 0.0,
        n => dt * (values.iter().sum::<f64>() - 0.5 * (values[0] + values[n - 1])),
    }
}

pub fn trapezoid_complex(values: &[C64], dt: f64) -> C64 {
    match values.len() {
        0 | 1 => C64::new(0.0, 0.0),
        n => (values.iter().sum::<C64>() - (values[0] + values[n - 1]) * 0.5) * dt,
    }
}

/// Per-interval integrals of uniformly sampled values, fourth-order accurate.
///
/// Interior intervals use the symmetric four-point rule
/// `h/24 (-f[k-1] + 13 f[k] + 13 f[k+1] - f[k+2])`; the two edge intervals
/// use the one-sided cubic rule.
fn interval_integrals(values: &[f64], dt: f64) -> Vec<f64> {
    let n = values.len();
    if n < 4 {
        return values.windows(2).map(|w| 0.5 * dt * (w[0] + w[1])).collect();
    }
    let f = values;
    let mut out = Vec::with_capacity(n - 1);
    out.push(dt / 24.0 * (9.0 * f[0] + 19.0 * f[1] - 5.0 * f[2] + f[3]));
    for k in 1..n - 2 {
        out.push(dt / 24.0 * (-f[k - 1] + 13.0 * f[k] + 13.0 * f[k + 1] - f[k + 2]));
    }
    out.push(dt / 24.0 * (9.0 * f[n - 1] + 19.0 * f[n - 2] - 5.0 * f[n - 3] + f[n - 4]));
    out
}

/// Running integral `∫_{t_0}^{t_k} f dt` for every sample `k`.
pub fn cumulative_forward(values: &[f64], dt: f64) -> Vec<f64> {
    let mut out = Vec::with_capacity(values.len());
    let mut acc = 0.0;
    out.push(0.0);
    for piece in interval_integrals(values, dt) {
        acc += piece;
        out.push(acc);
    }
    out
}

/// Remaining integral `∫_{t_k}^{t_end} f dt` for every sample `k`, summed from
/// the end so that small tails keep their relative precision.
pub fn cumulative_backward(values: &[f64], dt: f64) -> Vec<f64> {
    let pieces = interval_integrals(values, dt);
    let mut out = vec![0.0; values.len()];
    let mut acc = 0.0;
    for k in (0..pieces.len()).rev() {
        acc += pieces[k];
        out[k] = acc;
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn grid_validation() {
        assert!(TimeGrid::new(0.0, 0.0, 10).is_err());
        assert!(TimeGrid::new(0.0, 1.0, 1).is_err());
        let g = TimeGrid::symmetric(1.0, 0.25).unwrap();
        assert_eq!(g.len(), 9);
        assert!((g.time(4)).abs() < 1e-15);
        assert!((g.t_end() - 1.0).abs() < 1e-15);
    }

    #[test]
    fn refined_and_decimated_are_inverse() {
        let g = TimeGrid::symmetric(3.0, 0.5).unwrap();
        assert!(g.refined().decimated(2).unwrap().matches(&g));
    }

    #[test]
    fn cumulative_rules_are_fourth_order() {
        let dt = 0.01;
        let grid = TimeGrid::new(0.0, dt, 301).unwrap();
        let f: Vec<f64> = grid.times().iter().map(|t| t.exp()).collect();
        let fwd = cumulative_forward(&f, dt);
        let bwd = cumulative_backward(&f, dt);
        for (i, t) in grid.times().iter().enumerate() {
            assert!((fwd[i] - (t.exp() - 1.0)).abs() < 1e-8);
            assert!((bwd[i] - (3f64.exp() - t.exp())).abs() < 1e-8);
        }
    }

    #[test]
    fn mode_function_norm_is_checked() {
        let g = TimeGrid::symmetric(10.0, 0.01).unwrap();
        let w = SampledWaveform::from_fn(g, WaveformKind::FieldRecord, |t| C64::new((-t * t).exp(), 0.0)).unwrap();
        assert!(SampledWaveform::new(g, w.samples().to_vec(), WaveformKind::ModeFunction).is_err());
        let n = w.normalized().unwrap();
        assert!((n.energy() - 1.0).abs() < 1e-14);
    }

    #[test]
    fn rate_must_be_real_nonnegative() {
        let g = TimeGrid::new(0.0, 1.0, 3).unwrap();
        let bad = vec![C64::new(1.0, 0.0), C64::new(-1.0, 0.0), C64::new(0.0, 0.0)];
        assert!(SampledWaveform::new(g, bad, WaveformKind::Rate).is_err());
    }
}
