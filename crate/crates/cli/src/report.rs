use std::fmt::Write as _;
use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};

use qarb_core::report::{fmt_f64, Table};

use crate::config::ExperimentConfig;
use crate::CliError;

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Check {
    pub name: String,
    pub pass: bool,
    pub detail: String,
}

impl Check {
    pub fn new(name: impl Into<String>, pass: bool, detail: impl Into<String>) -> Self {
        Self { name: name.into(), pass, detail: detail.into() }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct RunReport {
    pub config: ExperimentConfig,
    pub checks: Vec<Check>,
    /// Artifact file names relative to the output directory.
    pub artifacts: Vec<String>,
    /// Bound variants used, e.g. `prop1_statement`.
    pub variant_flags: Vec<String>,
    pub wall_clock_seconds: f64,
    pub version: String,
}

impl RunReport {
    pub fn new(config: ExperimentConfig) -> Self {
        Self {
            config,
            checks: Vec::new(),
            artifacts: Vec::new(),
            variant_flags: Vec::new(),
            wall_clock_seconds: 0.0,
            version: env!("CARGO_PKG_VERSION").to_string(),
        }
    }

    pub fn check(&mut self, name: &str, pass: bool, detail: impl Into<String>) {
        debug_assert!(self.checks.iter().all(|c| c.name != name), "duplicate check {name}");
        self.checks.push(Check::new(name, pass, detail));
    }

    pub fn all_pass(&self) -> bool {
        self.checks.iter().all(|c| c.pass)
    }

    /// Writes `table` to `name` under `dir` and records it as an artifact.
    pub fn write_table(&mut self, dir: &Path, name: &str, table: &Table) -> Result<(), CliError> {
        table.write_csv(&dir.join(name))?;
        self.artifacts.push(name.to_string());
        Ok(())
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum ReportFormat {
    Json,
    Csv,
    Text,
}

pub const REPORT_CSV_HEADER: [&str; 3] = ["check", "pass", "detail"];

/// Writes `report.json`, `report.csv` or `report.txt` into `dir`.
pub fn emit_report(report: &RunReport, format: ReportFormat, dir: &Path) -> Result<PathBuf, CliError> {
    std::fs::create_dir_all(dir)?;
    match format {
        ReportFormat::Json => {
            let path = dir.join("report.json");
            std::fs::write(&path, serde_json::to_string_pretty(report)? + "\n")?;
            Ok(path)
        }
        ReportFormat::Csv => {
            let path = dir.join("report.csv");
            let mut t = Table::new(&REPORT_CSV_HEADER);
            for c in &report.checks {
                t.push(vec![c.name.clone(), c.pass.to_string(), c.detail.clone()]);
            }
            t.write_csv(&path)?;
            Ok(path)
        }
        ReportFormat::Text => {
            let path = dir.join("report.txt");
            std::fs::write(&path, render_text(report))?;
            Ok(path)
        }
    }
}

pub fn render_text(report: &RunReport) -> String {
    let mut s = String::new();
    let _ = writeln!(s, "qarb {} {} (seed {})", report.version, report.config.command.as_str(), report.config.seed);
    let _ = writeln!(s, "variant flags: {}", report.variant_flags.join(", "));
    for c in &report.checks {
        let _ = writeln!(s, "{} {}: {}", if c.pass { "PASS" } else { "FAIL" }, c.name, c.detail);
    }
    for a in &report.artifacts {
        let _ = writeln!(s, "artifact {a}");
    }
    let passed = report.checks.iter().filter(|c| c.pass).count();
    let _ = writeln!(s, "{passed}/{} checks passed in {}s", report.checks.len(), fmt_f64(report.wall_clock_seconds));
    s
}
