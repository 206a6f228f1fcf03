// SPDX-License-Identifier: Apache-2.0

use serde_json::{json, Value};
use tempomux::modebasis::fourier_transform;

use super::{build_basis, waveform_table, MHZ};
use crate::error::CliError;
use crate::output::Table;
use crate::Context;

pub fn run(ctx: &mut Context) -> Result<Value, CliError> {
    let cfg = ctx.config.basis.clone();
    let basis = build_basis(&cfg)?;
    let indices: Vec<usize> = cfg.modes.iter().map(|&m| m as usize).collect();

    let mut files = Vec::new();
    for &m in &indices {
        let mode = &basis.modes()[m];
        files.push(ctx.out.write_table(&format!("modes/mode_{m}"), &waveform_table(mode))?);
        let spectrum = fourier_transform(mode)?;
        let spec = Table::new()
            .column("f_hz", spectrum.frequencies())
            .column("re", spectrum.samples.iter().map(|s| s.re))
            .column("im", spectrum.samples.iter().map(|s| s.im));
        ctx.out.write_table(&format!("modes/spectrum_{m}"), &spec)?;
    }

    let overlaps = basis.overlap_matrix()?;
    let sq = overlaps.squared();
    let mut table = Table::new().column("mode", indices.iter().map(|&m| m as u64));
    for &n in &indices {
        table = table.column(&format!("overlap_sq_{n}"), indices.iter().map(|&m| sq[(m, n)]));
    }
    ctx.out.write_table("overlap", &table)?;

    let grid = basis.grid();
    Ok(json!({
        "command": "modes",
        "family": basis.family().as_str(),
        "kappa_ph_mhz": basis.kappa_ph() / MHZ,
        "modes": indices,
        "grid": { "t_start_s": grid.t_start(), "dt_s": grid.dt(), "n_points": grid.len() },
        "max_off_diagonal_overlap_sq": overlaps.max_off_diagonal_sq(),
        "max_deviation_from_identity": overlaps.max_deviation_from_identity(),
        "mode_files": files,
    }))
}
