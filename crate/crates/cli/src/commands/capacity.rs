// SPDX-License-Identifier: Apache-2.0

use serde_json::{json, Value};
use tempomux::modebasis::{default_grid_with_spacing, sech_basis};
use tempomux::tfplan::{capacity_map, mode_count, wigner, ModeFootprints, ResourceBudget, Scheme, WignerGrid};

use super::MHZ;
use crate::config::range;
use crate::error::CliError;
use crate::output::{Format, OutputDir, Table};
use crate::Context;

pub fn run(ctx: &mut Context) -> Result<Value, CliError> {
    let c = ctx.config.capacity.clone();
    let footprints = ModeFootprints::sech(c.n_modes)?;
    let (kappa_min, kappa_max) = (c.kappa_min_mhz * MHZ, c.kappa_max_mhz * MHZ);

    let t_values: Vec<f64> = range(c.t_window_us).into_iter().map(|t| t * 1e-6).collect();
    let b_values: Vec<f64> = range(c.bandwidth_mhz).into_iter().map(|b| b * 1e6).collect();
    let map = capacity_map(&footprints, &t_values, &b_values, kappa_min, kappa_max, c.n_kappa)?;
    let table = Table::new()
        .column("t_window_s", map.iter().map(|p| p.t_window))
        .column("bandwidth_hz", map.iter().map(|p| p.bandwidth))
        .column("n_temporal", map.iter().map(|p| p.n_temporal as u64))
        .column("n_time_bin", map.iter().map(|p| p.n_time_bin as u64))
        .column("n_frequency_bin", map.iter().map(|p| p.n_frequency_bin as u64))
        .column("n_combined", map.iter().map(|p| p.n_combined as u64));
    let map_file = ctx.out.write_table("capacity/map", &table)?;

    let point = match (c.point_t_window_us, c.point_bandwidth_mhz) {
        (Some(t), Some(b)) => {
            let budget = ResourceBudget { t_window: t * 1e-6, bandwidth: b * 1e6, kappa_min, kappa_max };
            let mut counts = serde_json::Map::new();
            for scheme in Scheme::ALL {
                let n = mode_count(&footprints, scheme, &budget, c.n_kappa)?;
                counts.insert(
                    serde_json::to_value(scheme)?.as_str().unwrap_or_default().to_string(),
                    json!({ "n": n.n, "kappa_opt_mhz": n.kappa_opt / MHZ, "saturated": n.saturated }),
                );
            }
            json!({ "t_window_us": t, "bandwidth_mhz": b, "counts": counts })
        }
        _ => Value::Null,
    };

    let mut wigner_files = Vec::new();
    if !c.wigner_modes.is_empty() {
        let kappa = c.wigner_kappa_mhz * MHZ;
        let top = *c.wigner_modes.iter().max().unwrap_or(&0);
        let grid = default_grid_with_spacing(kappa, top, c.wigner_dt_ns * 1e-9)?;
        let basis = sech_basis(top + 1, kappa, &grid)?;
        for &m in &c.wigner_modes {
            let w = wigner(&basis.modes()[m])?;
            let file = write_wigner_grid(&mut ctx.out, &format!("capacity/wigner_m{m}"), &w, c.wigner_max_freq_mhz * 1e6)?;
            wigner_files.push(file);
        }
    }

    Ok(json!({
        "command": "capacity",
        "cells": map.len(),
        "kappa_range_mhz": [c.kappa_min_mhz, c.kappa_max_mhz],
        "max_counts": {
            "temporal": map.iter().map(|p| p.n_temporal).max(),
            "time_bin": map.iter().map(|p| p.n_time_bin).max(),
            "frequency_bin": map.iter().map(|p| p.n_frequency_bin).max(),
            "combined": map.iter().map(|p| p.n_combined).max(),
        },
        "point": point,
        "map": map_file,
        "wigner": wigner_files,
    }))
}

/// Dense export restricted to `|f| <= f_max`: rows are times, columns frequencies.
fn write_wigner_grid(out: &mut OutputDir, stem: &str, w: &WignerGrid, f_max: f64) -> Result<String, CliError> {
    let cols: Vec<usize> = (0..w.n_freq()).filter(|&j| w.frequency(j).abs() <= f_max).collect();
    let times = w.times.times();
    let freqs: Vec<f64> = cols.iter().map(|&j| w.frequency(j)).collect();
    match out.format() {
        Format::Json => {
            let values: Vec<Vec<f64>> =
                (0..times.len()).map(|k| cols.iter().map(|&j| w.values[(k, j)]).collect()).collect();
            let relative = format!("{stem}.json");
            out.write_json_compact(&relative, &json!({ "t_s": times, "f_hz": freqs, "values": values }))?;
            Ok(relative)
        }
        Format::Csv => {
            let mut table = Table::new().column("t_s", times.iter().copied());
            for (&j, f) in cols.iter().zip(&freqs) {
                table = table.column(&format!("{f:e}"), (0..times.len()).map(|k| w.values[(k, j)]));
            }
            out.write_table(stem, &table)
        }
    }
}
