// SPDX-License-Identifier: Apache-2.0

use std::collections::{BTreeMap, BTreeSet};

use rayon::prelude::*;
use serde_json::{json, Value};
use tempomux::dynamics::{absorption_efficiency, CoherenceOptions, ReceiverDrive, TransferModel};
use tempomux::Complex64;

use super::{delay_for, is_qualitative, record_diagnostics, record_table, waveform_table};
use crate::error::CliError;
use crate::Context;

const ONE_PHOTON: [Complex64; 2] = [Complex64::new(0.0, 0.0), Complex64::new(1.0, 0.0)];

pub fn run(ctx: &mut Context) -> Result<Value, CliError> {
    let cfg = ctx.config.clone();
    let sim = &cfg.simulate;
    let model = TransferModel::new(cfg.transfer())?;

    let mut emission = Vec::new();
    if sim.emission {
        let senders: BTreeSet<usize> = sim.pairs.iter().map(|p| p[0]).collect();
        let runs = senders
            .par_iter()
            .map(|&m| {
                let (energy, shape) = model.emission_round_trip(m)?;
                Ok((m, energy, shape, model.emit(m, ONE_PHOTON)?))
            })
            .collect::<Result<Vec<_>, CliError>>()?;
        for (m, energy, shape, record) in runs {
            ctx.out.write_table(&format!("simulate/emission_m{m}"), &record_table(&record))?;
            emission.push(json!({
                "mode": m,
                "energy": energy,
                "shape_overlap_sq": shape,
                "diagnostics": record_diagnostics(&record),
            }));
        }
    }

    let drives: BTreeSet<usize> = sim.pairs.iter().map(|p| p[1]).collect();
    let delays: BTreeMap<usize, f64> = drives
        .par_iter()
        .map(|&n| Ok((n, delay_for(&model, &cfg, n)?)))
        .collect::<Result<_, CliError>>()?;

    let coherence = CoherenceOptions { decimation: sim.decimation, ..Default::default() };
    let results = sim
        .pairs
        .par_iter()
        .map(|&[m, n]| pair_run(&model, m, n, delays[&n], sim.rejection, sim.capture, &coherence))
        .collect::<Result<Vec<_>, CliError>>()?;

    let mut pairs = Vec::new();
    for r in results {
        let stem = format!("simulate/absorption_m{}_n{}", r.m, r.n);
        ctx.out.write_table(&stem, &r.table)?;
        if let Some(w) = &r.rejected_waveform {
            ctx.out.write_table(&format!("simulate/rejected_m{}_n{}", r.m, r.n), &waveform_table(w))?;
        }
        pairs.push(r.summary);
    }

    Ok(json!({
        "command": "simulate",
        "qualitative": is_qualitative(&cfg),
        "delta_t_s": delays.iter().map(|(n, d)| (n.to_string(), *d)).collect::<BTreeMap<_, _>>(),
        "emission": emission,
        "pairs": pairs,
    }))
}

struct PairResult {
    m: usize,
    n: usize,
    table: crate::output::Table,
    rejected_waveform: Option<tempomux::SampledWaveform>,
    summary: Value,
}

fn pair_run(
    model: &TransferModel,
    m: usize,
    n: usize,
    delta_t: f64,
    rejection: bool,
    capture: bool,
    coherence: &CoherenceOptions,
) -> Result<PairResult, CliError> {
    let drive = ReceiverDrive { mode: n, delta_t };
    let base = model.baseline(m)?;
    let record = model.run(m, Some(drive), ONE_PHOTON)?;
    let efficiency = absorption_efficiency(&record, &base)?;
    let mut summary = json!({
        "sender_mode": m,
        "drive_mode": n,
        "delta_t_s": delta_t,
        "efficiency": efficiency,
        "predicted_overlap_sq": model.predicted_overlap_sq(m, drive)?,
        "diagnostics": record_diagnostics(&record),
    });
    let mut rejected_waveform = None;
    if rejection {
        let rejected = model.rejected(m, drive, coherence)?;
        summary["rejected_occupation"] = json!(rejected.occupation);
        summary["rejected_total_occupation"] = json!(rejected.total);
        rejected_waveform = Some(rejected.waveform);
    }
    if capture {
        summary["capture_fidelity"] = json!(model.capture_fidelity(m, Some(drive))?);
    }
    Ok(PairResult { m, n, table: record_table(&record), rejected_waveform, summary })
}
