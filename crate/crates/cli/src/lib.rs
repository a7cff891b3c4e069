//! Scenario runner: reads a TOML config, runs one scenario and writes a CSV
//! table plus a JSON report that echoes the full config.

pub mod config;
pub mod error;
pub mod output;
pub mod scenarios;

use std::path::{Path, PathBuf};

use serde_json::json;

pub use config::ScenarioConfig;
pub use error::CliError;
pub use scenarios::{list_scenarios, run, validate, Diagnostics, Report, Scenario};

/// Files produced by [`execute`].
#[derive(Debug, Clone, PartialEq)]
pub struct Written {
    pub csv: PathBuf,
    pub json: PathBuf,
    pub attachments: Vec<PathBuf>,
    pub partial: bool,
}

/// The JSON report for a finished run.
pub fn report_json(cfg: &ScenarioConfig, report: &Report) -> serde_json::Value {
    json!({
        "scenario": report.scenario.name(),
        "version": env!("CARGO_PKG_VERSION"),
        "partial": report.partial,
        "config": cfg.to_json(),
        "csv_header": report.table.header,
        "rows": report.table.rows.len(),
        "summary": report.summary,
    })
}

/// Runs the scenario and writes `<scenario>.csv` and `<scenario>.json` to the
/// output directory.
pub fn execute(cfg: &ScenarioConfig, out_override: Option<&Path>) -> Result<Written, CliError> {
    let report = run(cfg)?;
    let dir = cfg.out_dir(out_override);
    let stem = report.scenario.name();
    let csv = dir.join(format!("{stem}.csv"));
    output::write_atomic(&csv, report.table.render().as_bytes())?;
    let mut attachments = Vec::new();
    for (name, value) in &report.attachments {
        let path = dir.join(format!("{stem}.{name}.json"));
        output::write_atomic(&path, to_pretty(value).as_bytes())?;
        attachments.push(path);
    }
    let json = dir.join(format!("{stem}.json"));
    output::write_atomic(&json, to_pretty(&report_json(cfg, &report)).as_bytes())?;
    Ok(Written { csv, json, attachments, partial: report.partial })
}

fn to_pretty(v: &serde_json::Value) -> String {
    let mut s = serde_json::to_string_pretty(v).expect("json value serializes");
    s.push('\n');
    s
}
