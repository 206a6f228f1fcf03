// SPDX-License-Identifier: Apache-2.0

use serde_json::{json, Value};
use tempomux::dynamics::{RoleAssignment, TransferModel};

use super::delay_for;
use crate::error::CliError;
use crate::Context;

/// Matched-absorption difference above which the two readings are reported as divergent.
pub const ROLE_DIVERGENCE: f64 = 1e-3;

pub fn run(ctx: &mut Context, config_hash: &str) -> Result<Value, CliError> {
    let cfg = ctx.config.clone();
    let mut readings = Vec::new();
    for roles in [RoleAssignment::AsPrinted, RoleAssignment::TextLabels] {
        let mut transfer = cfg.transfer();
        transfer.model.roles = roles;
        let model = TransferModel::new(transfer)?;
        let delta_t = delay_for(&model, &cfg, 0)?;
        let r = model.absorption_efficiency(0, tempomux::dynamics::ReceiverDrive { mode: 0, delta_t })?;
        readings.push((roles, delta_t, r));
    }
    let divergence = (readings[0].2 - readings[1].2).abs();
    if divergence > ROLE_DIVERGENCE {
        log::warn!("operator-role readings disagree on R00 by {divergence:.3e}");
    }
    Ok(json!({
        "command": "validate",
        "valid": true,
        "config_hash": config_hash,
        "schema_version": cfg.schema_version,
        "role_readings": readings.iter().map(|(roles, dt, r)| json!({
            "roles": roles,
            "delta_t_s": dt,
            "matched_efficiency_r00": r,
        })).collect::<Vec<_>>(),
        "role_divergence": divergence,
        "roles_diverge": divergence > ROLE_DIVERGENCE,
    }))
}
