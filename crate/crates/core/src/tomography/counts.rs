// SPDX-License-Identifier: Apache-2.0

use nalgebra::Matrix3;
use num_complex::Complex64 as C64;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Binomial, Distribution};
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::{povm, Confusion, MeasurementSetting, Preparation};
use crate::error::{Error, Result};

/// Outcome counts `(g, e, f)` for each of the nine settings.
pub type SettingCounts = Vec<[u64; 3]>;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CountTable {
    pub shots: u64,
    pub seed: u64,
    pub settings: Vec<String>,
    pub preparations: Vec<Preparation>,
    /// Indexed `[preparation][setting]`.
    pub counts: Vec<SettingCounts>,
}

impl CountTable {
    /// Relative frequencies per setting.
    pub fn frequencies(&self, prep: usize) -> Vec<[f64; 3]> {
        self.counts[prep]
            .iter()
            .map(|c| {
                let n = (c[0] + c[1] + c[2]).max(1) as f64;
                [c[0] as f64 / n, c[1] as f64 / n, c[2] as f64 / n]
            })
            .collect()
    }
}

/// Readout probabilities of `rho` for every setting.
pub fn outcome_probabilities(rho: &Matrix3<C64>, settings: &[MeasurementSetting], confusion: &Confusion) -> Vec<[f64; 3]> {
    povm(settings, confusion)
        .iter()
        .map(|elems| std::array::from_fn(|k| (elems[k] * rho).trace().re))
        .collect()
}

/// Outcome probabilities clipped at zero and renormalised per setting; the
/// infinite-shot stand-in for a count table.
pub fn exact_frequencies(rho: &Matrix3<C64>, settings: &[MeasurementSetting], confusion: &Confusion) -> Vec<[f64; 3]> {
    outcome_probabilities(rho, settings, confusion)
        .into_iter()
        .map(|p| {
            let c = p.map(|x| x.max(0.0));
            let s: f64 = c.iter().sum();
            c.map(|x| x / s)
        })
        .collect()
}

fn multinomial(rng: &mut ChaCha8Rng, shots: u64, p: &[f64; 3]) -> Result<[u64; 3]> {
    let mut out = [0u64; 3];
    let mut left = shots;
    let mut mass = 1.0;
    for k in 0..2 {
        let q = if mass > 0.0 { (p[k] / mass).clamp(0.0, 1.0) } else { 0.0 };
        let n = Binomial::new(left, q).map_err(|e| Error::param(e.to_string()))?.sample(rng);
        out[k] = n;
        left -= n;
        mass -= p[k];
    }
    out[2] = left;
    Ok(out)
}

/// Multinomial readout samples for each prepared output state. Each
/// preparation draws from its own ChaCha stream derived from `seed`.
pub fn simulate_counts(
    states: &[Matrix3<C64>],
    preparations: &[Preparation],
    settings: &[MeasurementSetting],
    confusion: &Confusion,
    shots: u64,
    seed: u64,
) -> Result<CountTable> {
    if shots == 0 {
        return Err(Error::param("shots must be at least 1"));
    }
    if states.len() != preparations.len() {
        return Err(Error::DimensionMismatch { expected: preparations.len(), found: states.len() });
    }
    confusion.validate()?;
    let counts = states
        .par_iter()
        .enumerate()
        .map(|(i, rho)| {
            let mut rng = ChaCha8Rng::seed_from_u64(seed);
            rng.set_stream(i as u64);
            exact_frequencies(rho, settings, confusion)
                .iter()
                .map(|p| multinomial(&mut rng, shots, p))
                .collect::<Result<SettingCounts>>()
        })
        .collect::<Result<_>>()?;
    Ok(CountTable {
        shots,
        seed,
        settings: settings.iter().map(|s| s.label.clone()).collect(),
        preparations: preparations.to_vec(),
        counts,
    })
}
