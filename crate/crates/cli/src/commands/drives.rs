// SPDX-License-Identifier: Apache-2.0

use rayon::prelude::*;
use serde_json::{json, Value};
use tempomux::pulsesynth::{decay_rate, quantization_pair, receiver_coupling, shape_infidelity, source_coupling};

use super::{build_basis, MHZ};
use crate::error::CliError;
use crate::output::Table;
use crate::Context;

pub fn run(ctx: &mut Context) -> Result<Value, CliError> {
    let cfg = ctx.config.clone();
    let basis = build_basis(&cfg.basis)?;
    let opts = cfg.drive.options();
    let sender = cfg.sender.to_params();
    let receiver = cfg.receiver.to_params();
    let delta_t = cfg.drive.delta_t_ns.unwrap_or(0.0) * 1e-9;

    let mut per_mode = Vec::new();
    for &m in &cfg.basis.modes {
        let m = m as usize;
        let mode = &basis.modes()[m];
        let rate = decay_rate(mode, &opts)?.with_mode_index(m);
        let source = source_coupling(mode, sender.kappa_f, &opts)?;
        let absorb = receiver_coupling(mode, receiver.kappa_f, delta_t, &opts)?;
        let table = Table::new()
            .column("t_s", mode.grid().times())
            .column("gamma_rad_s", rate.gamma.iter().copied())
            .column("g_source_re", source.g.iter().map(|g| g.re))
            .column("g_source_im", source.g.iter().map(|g| g.im))
            .column("g_receiver_re", absorb.g.iter().map(|g| g.re))
            .column("g_receiver_im", absorb.g.iter().map(|g| g.im));
        ctx.out.write_table(&format!("drives/mode_{m}"), &table)?;
        let peak_g = |g: &[tempomux::Complex64]| g.iter().map(|z| z.norm()).fold(0.0, f64::max);
        per_mode.push(json!({
            "mode": m,
            "peak_rate_mhz": rate.peak() / MHZ,
            "truncation_time_s": rate.truncation_index().map(|i| mode.grid().time(i)),
            "peak_source_coupling_mhz": peak_g(&source.g) / MHZ,
            "peak_receiver_coupling_mhz": peak_g(&absorb.g) / MHZ,
        }));
    }

    // DAC study on the sech family at the configured linewidth.
    let kappa = cfg.basis.kappa_ph_mhz * MHZ;
    let rate_hz = cfg.dac.sample_rate_gsps * 1e9;
    let cells: Vec<(u32, usize)> =
        cfg.dac.bits.iter().flat_map(|&b| cfg.basis.modes.iter().map(move |&m| (b, m as usize))).collect();
    let infidelities = cells
        .par_iter()
        .map(|&(bits, m)| {
            let (ideal, quantized) = quantization_pair(m, bits, kappa, rate_hz, &opts)?;
            Ok(shape_infidelity(&ideal, &quantized)?)
        })
        .collect::<Result<Vec<f64>, CliError>>()?;
    let dac = Table::new()
        .column("bits", cells.iter().map(|c| c.0 as u64))
        .column("mode", cells.iter().map(|c| c.1 as u64))
        .column("infidelity", infidelities.iter().copied());
    ctx.out.write_table("dac", &dac)?;

    Ok(json!({
        "command": "drives",
        "cap_mhz": cfg.drive.cap_mhz,
        "floor": cfg.drive.floor,
        "receiver_delta_t_s": delta_t,
        "modes": per_mode,
        "dac_max_infidelity": infidelities.iter().copied().fold(0.0, f64::max),
    }))
}
