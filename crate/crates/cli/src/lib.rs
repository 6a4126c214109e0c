//! Library side of the `qarb` experiment runner.
//!
//! [`run`] executes one configured command, writes its CSV artifacts and the
//! three report files into the output directory, and returns the report.

pub mod commands;
pub mod config;
pub mod report;

use std::time::Instant;

use crate::config::{Command, ExperimentConfig};
use crate::report::{emit_report, ReportFormat, RunReport};

#[derive(Debug, thiserror::Error)]
pub enum CliError {
    #[error("usage: {0}")]
    Usage(String),
    #[error(transparent)]
    Core(#[from] qarb_core::Error),
    #[error("io: {0}")]
    Io(#[from] std::io::Error),
    #[error("json: {0}")]
    Json(#[from] serde_json::Error),
}

impl CliError {
    /// 2 for usage errors, 1 for everything else.
    pub fn exit_code(&self) -> i32 {
        match self {
            CliError::Usage(_) => 2,
            _ => 1,
        }
    }
}

/// Runs the command in `cfg` and writes `report.{json,csv,txt}`.
///
/// Everything except `wall_clock_seconds` in `report.json` is a function of
/// the config alone.
pub fn run(cfg: &ExperimentConfig) -> Result<RunReport, CliError> {
    let dir = cfg.out_dir();
    std::fs::create_dir_all(&dir)?;
    let start = Instant::now();
    let mut rep = RunReport::new(cfg.clone());
    rep.variant_flags = vec![cfg.prop1_variant.flag().to_string(), cfg.multiclass_variant.flag().to_string()];
    match cfg.command {
        Command::Encode => commands::encode_cmd(cfg, &dir, &mut rep)?,
        Command::Bounds => commands::bounds_cmd(cfg, &dir, &mut rep)?,
        Command::Table1 => commands::table1_cmd(cfg, &dir, &mut rep)?,
        Command::Attack => commands::attack_cmd(cfg, &dir, &mut rep)?,
        Command::Defend => commands::defend_cmd(cfg, &dir, &mut rep)?,
        Command::Risk => commands::risk_cmd(cfg, &dir, &mut rep)?,
        Command::Concentration => commands::concentration_cmd(cfg, &dir, &mut rep)?,
        Command::AuditAll => commands::audit_all_cmd(cfg, &dir, &mut rep)?,
    }
    rep.wall_clock_seconds = start.elapsed().as_secs_f64();
    for f in [ReportFormat::Json, ReportFormat::Csv, ReportFormat::Text] {
        emit_report(&rep, f, &dir)?;
    }
    Ok(rep)
}
