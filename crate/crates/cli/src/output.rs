use serde_json::{json, Value};

use relay_bf::harness::{ExperimentSpec, ResultTable};
use relay_bf::model::linear_to_db;
use relay_bf::{PowerControl, SystemConfig};

fn config_db(c: &SystemConfig) -> Value {
    json!({
        "snr_bc_db": c.snr_bc_db(),
        "snr_fc_db": c.snr_fc_db(),
        "ps_db": linear_to_db(c.ps),
        "pr_db": linear_to_db(c.pr),
        "sigma1_sq_db": linear_to_db(c.sigma1_sq),
        "sigma2_sq_db": linear_to_db(c.sigma2_sq),
        "e1_sq_db": linear_to_db(c.e1_sq),
        "e2_sq_db": linear_to_db(c.e2_sq),
    })
}

/// Rows plus the resolved configuration. Non-finite numbers become `null`.
pub fn to_json(label: &str, spec: &ExperimentSpec, table: &ResultTable) -> String {
    let grid: Vec<Value> = spec
        .sweep_values
        .iter()
        .zip(spec.grid_configs())
        .map(|(v, c)| json!({ "sweep_value": v, "linear": c, "db": config_db(&c) }))
        .collect();
    let power = match spec.power_control.unwrap_or(PowerControl::Averaged) {
        PowerControl::Averaged => "averaged",
        PowerControl::Instantaneous => "instantaneous",
    };
    let doc = json!({
        "metadata": {
            "version": env!("CARGO_PKG_VERSION"),
            "experiment": label,
            "seed": spec.master_seed,
            "trials": spec.trials,
            "sweep_axis": spec.sweep_axis.name(),
            "sweep_values": spec.sweep_values,
            "schemes": spec.schemes,
            "average_domain": spec.average_domain,
            "power_control": power,
            "branches": spec.branches,
            "config": { "linear": spec.base_config, "db": config_db(&spec.base_config) },
            "grid": grid,
        },
        "rows": table.rows,
    });
    let mut s = serde_json::to_string_pretty(&doc).expect("json values always serialize");
    s.push('\n');
    s
}
