// SPDX-License-Identifier: Apache-2.0

pub mod capacity;
pub mod drives;
pub mod modes;
pub mod simulate;
pub mod sweep;
pub mod tomography;
pub mod validate;

use std::f64::consts::PI;

use tempomux::dynamics::{SimulationRecord, TransferModel};
use tempomux::modebasis::{
    bin_basis, default_grid, default_grid_with_spacing, hermite_gaussian_basis, min_bin_spacing, sech_basis,
    BinScheme,
};
use tempomux::{ModeBasis, SampledWaveform, TimeGrid};

use crate::config::{BasisConfig, ExperimentConfig, FamilyChoice};
use crate::error::CliError;
use crate::output::Table;

pub(crate) const MHZ: f64 = 2.0 * PI * 1e6;

/// Basis spanning `0..=max(modes)` for the configured family.
pub fn build_basis(cfg: &BasisConfig) -> Result<ModeBasis, CliError> {
    let n = cfg.modes.iter().copied().max().unwrap_or(0) as usize + 1;
    let kappa = cfg.kappa_ph_mhz * MHZ;
    let dt = cfg.dt_ns.map(|d| d * 1e-9);
    let default_dt = 2.0 * PI / (400.0 * kappa);
    let basis = match cfg.family {
        FamilyChoice::Sech => {
            let grid = match dt {
                Some(dt) => default_grid_with_spacing(kappa, n - 1, dt)?,
                None => default_grid(kappa, n - 1)?,
            };
            sech_basis(n, kappa, &grid)?
        }
        FamilyChoice::HermiteGaussian => {
            let sigma = cfg.hg_sigma_ns * 1e-9;
            let grid = TimeGrid::symmetric(cfg.half_width_us * 1e-6, dt.unwrap_or(sigma / 50.0))?;
            hermite_gaussian_basis(n, 0.0, sigma, &grid)?
        }
        FamilyChoice::TimeBin | FamilyChoice::FrequencyBin => {
            let scheme =
                if cfg.family == FamilyChoice::TimeBin { BinScheme::TimeBin } else { BinScheme::FrequencyBin };
            let unit = if scheme == BinScheme::TimeBin { 1e-9 } else { 1e6 };
            let spacing = cfg.bin_spacing.map_or_else(|| min_bin_spacing(scheme, kappa), |s| s * unit);
            // Time bins need room for the outermost bin plus the sech tails.
            let reach = match scheme {
                BinScheme::TimeBin => (n as f64 - 1.0) / 2.0 * spacing + 40.0 / kappa,
                BinScheme::FrequencyBin => 40.0 / kappa,
            };
            let grid = TimeGrid::symmetric(reach.max(cfg.half_width_us * 1e-6), dt.unwrap_or(default_dt))?;
            bin_basis(scheme, n, kappa, spacing, &grid)?
        }
    };
    Ok(basis)
}

pub fn waveform_table(w: &SampledWaveform) -> Table {
    Table::new()
        .column("t_s", w.grid().times())
        .column("re", w.samples().iter().map(|s| s.re))
        .column("im", w.samples().iter().map(|s| s.im))
}

/// Time series of one run on the record grid.
pub fn record_table(r: &SimulationRecord) -> Table {
    Table::new()
        .column("t_s", r.record_grid.times())
        .column("i_out", r.i_out.iter().copied())
        .column("field_re", r.field_mean.iter().map(|z| z.re))
        .column("field_im", r.field_mean.iter().map(|z| z.im))
        .column("excitation", r.excitation.iter().copied())
        .column("dissipated", r.dissipated.iter().copied())
}

pub fn record_diagnostics(r: &SimulationRecord) -> serde_json::Value {
    serde_json::json!({
        "output_energy": r.output_energy(),
        "energy_budget_error": r.energy_budget_error(),
        "max_trace_error": r.max_trace_error,
        "min_eigenvalue": r.min_eigenvalue,
    })
}

/// Receiver delay offset per drive mode: configured or optimised.
pub fn delay_for(model: &TransferModel, config: &ExperimentConfig, n: usize) -> Result<f64, CliError> {
    match config.drive.delta_t_ns {
        Some(d) => Ok(d * 1e-9),
        None => Ok(model.optimal_delay(n, &config.drive.coarse_delays())?.delta_t),
    }
}

/// `true` when a simulated figure is only qualitatively comparable: loss or
/// any decoherence in the receiver.
pub fn is_qualitative(config: &ExperimentConfig) -> bool {
    let p = config.receiver.to_params();
    p.loss > 0.0 || p.t1_ge.is_some() || p.t1_ef.is_some() || p.t2_ge_star.is_some()
}
