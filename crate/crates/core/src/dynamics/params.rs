// SPDX-License-Identifier: Apache-2.0

use std::f64::consts::PI;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

const TWO_PI: f64 = 2.0 * PI;

/// Physical constants of one node. Rates in rad/s, times in seconds.
///
/// Coherence times set to `None` are treated as infinite.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct DeviceParams {
    /// Transfer-filter linewidth.
    pub kappa_f: f64,
    /// Transmon anharmonicity.
    pub alpha: f64,
    /// Resonator self-Kerr.
    pub kerr: f64,
    /// Dispersive shift.
    pub chi: f64,
    pub t1_ge: Option<f64>,
    pub t1_ef: Option<f64>,
    pub t2_ge_star: Option<f64>,
    /// Fraction of photon energy lost between sender and receiver.
    pub loss: f64,
}

impl DeviceParams {
    /// Lossless, decoherence-free node with the given linewidth and anharmonicity.
    pub fn ideal(kappa_f: f64, alpha: f64) -> Self {
        Self { kappa_f, alpha, kerr: 0.0, chi: 0.0, t1_ge: None, t1_ef: None, t2_ge_star: None, loss: 0.0 }
    }

    pub fn sender() -> Self {
        Self {
            kappa_f: TWO_PI * 138e6,
            alpha: TWO_PI * -356e6,
            kerr: 0.0,
            chi: 0.0,
            t1_ge: Some(29e-6),
            t1_ef: Some(22e-6),
            t2_ge_star: Some(11e-6),
            loss: 0.0,
        }
    }

    pub fn receiver() -> Self {
        Self {
            kappa_f: TWO_PI * 164e6,
            alpha: TWO_PI * -356e6,
            kerr: 0.0,
            chi: 0.0,
            t1_ge: Some(19e-6),
            t1_ef: Some(11e-6),
            t2_ge_star: Some(9e-6),
            loss: 0.0,
        }
    }

    /// Same node with all decoherence switched off.
    pub fn without_decoherence(mut self) -> Self {
        self.t1_ge = None;
        self.t1_ef = None;
        self.t2_ge_star = None;
        self
    }

    pub fn with_loss(mut self, loss: f64) -> Self {
        self.loss = loss;
        self
    }

    pub fn is_ideal(&self) -> bool {
        self.t1_ge.is_none() && self.t1_ef.is_none() && self.t2_ge_star.is_none() && self.loss == 0.0
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.kappa_f > 0.0) || !self.kappa_f.is_finite() {
            return Err(Error::param(format!("kappa_f must be positive, got {}", self.kappa_f)));
        }
        for (name, v) in [("alpha", self.alpha), ("kerr", self.kerr), ("chi", self.chi)] {
            if !v.is_finite() {
                return Err(Error::param(format!("{name} must be finite")));
            }
        }
        for (name, t) in [("t1_ge", self.t1_ge), ("t1_ef", self.t1_ef), ("t2_ge_star", self.t2_ge_star)] {
            if let Some(t) = t {
                if !(t > 0.0) {
                    return Err(Error::param(format!("{name} must be positive, got {t}")));
                }
            }
        }
        if !(0.0..1.0).contains(&self.loss) {
            return Err(Error::param(format!("loss must lie in [0, 1), got {}", self.loss)));
        }
        if let Some(rate) = self.pure_dephasing_rate()? {
            if rate < 0.0 {
                return Err(Error::param("t2_ge_star exceeds 2 t1_ge"));
            }
        }
        Ok(())
    }

    /// `1/T_φ = 1/T2* - 1/(2 T1ge)`, or `None` without a T2* value.
    pub fn pure_dephasing_rate(&self) -> Result<Option<f64>> {
        Ok(self.t2_ge_star.map(|t2| {
            let t1_term = self.t1_ge.map_or(0.0, |t1| 1.0 / (2.0 * t1));
            1.0 / t2 - t1_term
        }))
    }
}

/// Which printed operator plays the transmon.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Default, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum RoleAssignment {
    /// `b̂` carries the anharmonic terms and is the transmon; `â` is the
    /// resonator coupled to the line.
    #[default]
    AsPrinted,
    /// `â` is the transmon and `b̂` the resonator, with every term kept in its
    /// printed operator form.
    TextLabels,
}

/// Scale of the `b̂†b̂†â` drive term.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Default, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum F0g1Normalization {
    /// `⟨f,0|H|g,1⟩ = g`, matching the rate relation `Γ = 4|g|²/κ_f`.
    #[default]
    Transition,
    /// Coefficient `g` on `b̂†b̂†â`, giving a matrix element `√2 g`.
    AsPrinted,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct ModelOptions {
    pub roles: RoleAssignment,
    pub f0g1_normalization: F0g1Normalization,
    /// Resonator Fock cutoff.
    pub n_fock: usize,
}

impl Default for ModelOptions {
    fn default() -> Self {
        Self { roles: RoleAssignment::AsPrinted, f0g1_normalization: F0g1Normalization::Transition, n_fock: 3 }
    }
}

impl ModelOptions {
    pub fn validate(&self) -> Result<()> {
        if self.n_fock < 2 {
            return Err(Error::param(format!("n_fock must be at least 2, got {}", self.n_fock)));
        }
        Ok(())
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn table_values_validate() {
        DeviceParams::sender().validate().unwrap();
        DeviceParams::receiver().validate().unwrap();
        let rate = DeviceParams::receiver().pure_dephasing_rate().unwrap().unwrap();
        assert!((rate - (1.0 / 9e-6 - 1.0 / 38e-6)).abs() < 1e-6);
    }

    #[test]
    fn invalid_values_rejected() {
        assert!(DeviceParams::ideal(0.0, 0.0).validate().is_err());
        assert!(DeviceParams::ideal(1.0, 0.0).with_loss(1.0).validate().is_err());
        let mut p = DeviceParams::ideal(1.0, 0.0);
        p.t1_ge = Some(-1.0);
        assert!(p.validate().is_err());
    }
}
