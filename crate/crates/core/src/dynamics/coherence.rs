// SPDX-License-Identifier: Apache-2.0

//! First-order field coherence by the quantum regression theorem and its
//! eigenmode decomposition.

use nalgebra::DMatrix;
use num_complex::Complex64 as C64;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::model::MasterEquation;
use super::solver::{propagate, SimulationRecord, Workspace};
use crate::error::{Error, Result};
use crate::grid::{cumulative_forward, SampledWaveform, TimeGrid, WaveformKind};
use crate::modebasis::apply_sign_convention;

const ZERO: C64 = C64::new(0.0, 0.0);

/// Smallest gap between the two leading occupations that counts as resolved.
pub const DEGENERACY_GAP: f64 = 1e-3;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct CoherenceOptions {
    /// Record points between correlation samples.
    pub decimation: usize,
    /// Output energy allowed outside the correlation window.
    pub tail: f64,
    /// Number of eigenmodes kept.
    pub n_modes: usize,
}

impl Default for CoherenceOptions {
    fn default() -> Self {
        Self { decimation: 4, tail: 1e-7, n_modes: 4 }
    }
}

/// `g1(t1, t2) = ⟨L_0†(t1) L_0(t2)⟩` on a decimated window and its eigenmodes.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct FirstOrderCoherence {
    /// Decimated record grid spanning the whole run.
    pub grid: TimeGrid,
    /// First grid index of the correlation window.
    pub window_start: usize,
    pub matrix: DMatrix<C64>,
    /// Occupations, descending; all of them.
    pub occupations: Vec<f64>,
    /// Leading eigenmodes on `grid`, zero outside the window.
    pub modes: Vec<SampledWaveform>,
}

impl FirstOrderCoherence {
    pub fn total_occupation(&self) -> f64 {
        self.occupations.iter().sum()
    }

    pub fn is_degenerate(&self) -> bool {
        self.occupations.len() > 1 && self.occupations[0] - self.occupations[1] < DEGENERACY_GAP
    }

    pub fn dominant(&self) -> (f64, &SampledWaveform) {
        (self.occupations[0], &self.modes[0])
    }
}

/// Correlation window in record indices, aligned to the decimation.
fn window(record: &SimulationRecord, opts: &CoherenceOptions) -> (usize, usize) {
    let cum = cumulative_forward(&record.i_out, record.record_grid.dt());
    let total = *cum.last().unwrap();
    let n = record.i_out.len();
    let lo = cum.iter().position(|&c| c >= 0.5 * opts.tail * total).unwrap_or(0).saturating_sub(1);
    let hi = cum.iter().position(|&c| total - c <= 0.5 * opts.tail * total).unwrap_or(n - 1) + 1;
    let k = opts.decimation;
    let lo = (lo / k) * k;
    let hi = (hi.div_ceil(k) * k).min(((n - 1) / k) * k);
    (lo, hi.max(lo + k))
}

/// Regression-theorem coherence for a run evolved with snapshots every
/// `opts.decimation` record points.
pub fn first_order_coherence(
    eq: &MasterEquation,
    record: &SimulationRecord,
    opts: &CoherenceOptions,
) -> Result<FirstOrderCoherence> {
    let k = opts.decimation;
    if k == 0 || record.snapshot_stride != k {
        return Err(Error::param(format!(
            "record holds snapshots every {} points, coherence needs every {k}",
            record.snapshot_stride
        )));
    }
    let d = eq.dim();
    let (lo, hi) = window(record, opts);
    let n_win = (hi - lo) / k + 1;
    let snapshots: Vec<&Vec<C64>> = (0..n_win)
        .map(|a| {
            let s = lo + a * k;
            record
                .snapshots
                .get(s / k)
                .filter(|(idx, _)| *idx == s)
                .map(|(_, x)| x)
                .ok_or_else(|| Error::param("missing snapshot"))
        })
        .collect::<Result<_>>()?;

    let fields: Vec<_> = (0..n_win).map(|a| eq.field.at(2 * (lo + a * k))).collect();
    let rows: Vec<Vec<C64>> = (0..n_win)
        .into_par_iter()
        .map(|a| {
            let mut ws = Workspace::new(eq);
            let start = lo + a * k;
            let mut lambda = vec![ZERO; d * d];
            fields[a].add_apply_right_adjoint(snapshots[a], &mut lambda, C64::new(1.0, 0.0));
            let mut row = vec![ZERO; n_win];
            row[a] = fields[a].trace_product(&lambda);
            propagate(eq, &mut ws, &mut lambda, start, hi - start, |s, x| {
                if (s - lo) % k == 0 {
                    let b = (s - lo) / k;
                    row[b] = fields[b].trace_product(x);
                }
            });
            row
        })
        .collect();

    let mut g = DMatrix::from_element(n_win, n_win, ZERO);
    for a in 0..n_win {
        for b in a..n_win {
            g[(a, b)] = rows[a][b];
            g[(b, a)] = rows[a][b].conj();
        }
    }
    let delta = record.record_grid.dt() * k as f64;
    let kernel = g.map(|x| x.conj() * delta);
    let eig = nalgebra::SymmetricEigen::new(kernel);
    let mut order: Vec<usize> = (0..n_win).collect();
    order.sort_by(|&i, &j| eig.eigenvalues[j].partial_cmp(&eig.eigenvalues[i]).unwrap());
    let occupations: Vec<f64> = order.iter().map(|&i| eig.eigenvalues[i]).collect();

    let grid = record.record_grid.decimated(k)?;
    let start = lo / k;
    let modes = order
        .iter()
        .take(opts.n_modes.min(n_win))
        .map(|&i| {
            let mut samples = vec![ZERO; grid.len()];
            for a in 0..n_win {
                samples[start + a] = eig.eigenvectors[(a, i)] / delta.sqrt();
            }
            let w = SampledWaveform::new_unchecked(grid, samples, WaveformKind::FieldRecord)?;
            Ok(apply_sign_convention(&w))
        })
        .collect::<Result<_>>()?;
    Ok(FirstOrderCoherence { grid, window_start: start, matrix: g, occupations, modes })
}

/// Dominant rejected mode scaled by the square root of its occupation.
pub fn rejected_waveform(coherence: &FirstOrderCoherence) -> Result<SampledWaveform> {
    if coherence.is_degenerate() {
        return Err(Error::DegenerateEigenvalues(coherence.occupations[0] - coherence.occupations[1]));
    }
    let (n0, v0) = coherence.dominant();
    Ok(v0.scaled(C64::new(n0.max(0.0).sqrt(), 0.0)))
}
