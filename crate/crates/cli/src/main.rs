use std::path::PathBuf;
use std::process::ExitCode;

use clap::Parser;

use qarb_cli::config::{load_config, Command};
use qarb_cli::report::render_text;

/// Run one robustness experiment and write its artifacts.
#[derive(Parser, Debug)]
#[command(name = "qarb", version)]
struct Args {
    command: Command,
    /// JSON experiment config.
    #[arg(long)]
    config: Option<PathBuf>,
    #[arg(long)]
    seed: Option<u64>,
    /// Output directory (default `qarb-out`).
    #[arg(long)]
    out: Option<PathBuf>,
    /// `key=value` with dotted keys for nested fields; repeatable.
    #[arg(long = "override", value_name = "KEY=VALUE")]
    overrides: Vec<String>,
}

fn main() -> ExitCode {
    let args = Args::parse();
    let result = load_config(args.command, args.config.as_deref(), args.seed, args.out.as_deref(), &args.overrides)
        .and_then(|cfg| qarb_cli::run(&cfg));
    match result {
        Ok(rep) => {
            print!("{}", render_text(&rep));
            if rep.all_pass() { ExitCode::SUCCESS } else { ExitCode::from(1) }
        }
        Err(e) => {
            eprintln!("qarb: {e}");
            ExitCode::from(e.exit_code() as u8)
        }
    }
}
