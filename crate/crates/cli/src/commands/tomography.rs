// SPDX-License-Identifier: Apache-2.0

use serde_json::{json, Value};
use tempomux::dynamics::TransferModel;
use tempomux::tomography::{
    reconstruct_process, simulate_receiver_states, simulate_tomography_counts, MleOptions,
};

use super::{delay_for, is_qualitative};
use crate::error::CliError;
use crate::output::Table;
use crate::Context;

pub fn run(ctx: &mut Context) -> Result<Value, CliError> {
    let cfg = ctx.config.clone();
    let tomo = &cfg.tomography;
    let model = TransferModel::new(cfg.transfer())?;
    let confusion = tomo.confusion();
    let mle = MleOptions { max_iterations: tomo.max_iterations, ..Default::default() };

    let mut reports = Vec::new();
    for &m in &tomo.modes {
        let delta_t = delay_for(&model, &cfg, m)?;
        let states = simulate_receiver_states(&model, m, delta_t)?;
        // Each mode draws from its own stream of the run seed.
        let counts = match tomo.shots {
            Some(shots) => Some(simulate_tomography_counts(&states, shots, ctx.seed.wrapping_add(m as u64), &confusion)?),
            None => None,
        };
        let report = reconstruct_process(&states, counts.as_ref(), &confusion, &mle)?;

        let chi = report.chi.entries();
        let labels = ["I", "X", "Y", "Z"];
        let mut table = Table::new().column("row", labels);
        for (j, l) in labels.iter().enumerate() {
            table = table
                .column(&format!("{l}_re"), (0..4).map(|i| chi[(i, j)].re))
                .column(&format!("{l}_im"), (0..4).map(|i| chi[(i, j)].im));
        }
        ctx.out.write_table(&format!("tomography/chi_m{m}"), &table)?;
        if let Some(c) = &counts {
            ctx.out.write_json_compact(&format!("tomography/counts_m{m}.json"), c)?;
        }
        reports.push(json!({
            "mode": m,
            "delta_t_s": delta_t,
            "process_fidelity": report.fidelity,
            "leakage": report.leakage,
            "chi_min_eigenvalue": report.chi.min_eigenvalue(),
            "mle_iterations": report.mle_iterations,
        }));
    }

    Ok(json!({
        "command": "tomography",
        "shots": tomo.shots,
        "seed": ctx.seed,
        // Loss and decoherence make the fidelities a qualitative comparison only.
        "qualitative": is_qualitative(&cfg),
        "modes": reports,
    }))
}
