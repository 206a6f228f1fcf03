// SPDX-License-Identifier: Apache-2.0

use serde_json::{json, Value};
use tempomux::dynamics::TransferModel;

use crate::config::range;
use crate::error::CliError;
use crate::output::Table;
use crate::Context;

pub fn run(ctx: &mut Context) -> Result<Value, CliError> {
    let cfg = ctx.config.clone();
    let model = TransferModel::new(cfg.transfer())?;
    let (m, n) = (cfg.sweep.sender_mode, cfg.sweep.receiver_mode);
    let delays: Vec<f64> = range(cfg.sweep.delta_t_ns).into_iter().map(|d| d * 1e-9).collect();
    let points = model.sweep_delay(m, n, &delays)?;
    let table = Table::new()
        .column("delta_t_s", points.iter().map(|p| p.delta_t))
        .column("efficiency", points.iter().map(|p| p.efficiency))
        .column("predicted_overlap_sq", points.iter().map(|p| p.predicted));
    let file = ctx.out.write_table(&format!("sweep/m{m}_n{n}"), &table)?;

    let best = points
        .iter()
        .max_by(|a, b| a.efficiency.total_cmp(&b.efficiency))
        .ok_or_else(|| CliError::Config("empty delay range".into()))?;
    let k = points.iter().position(|p| std::ptr::eq(p, best)).unwrap_or(0);
    let unimodal = points[..=k].windows(2).all(|w| w[1].efficiency >= w[0].efficiency - 1e-9)
        && points[k..].windows(2).all(|w| w[1].efficiency <= w[0].efficiency + 1e-9);
    Ok(json!({
        "command": "sweep",
        "sender_mode": m,
        "drive_mode": n,
        "points": points.len(),
        "best_delta_t_s": best.delta_t,
        "best_efficiency": best.efficiency,
        "unimodal": unimodal,
        "table": file,
    }))
}
