//! Command-line front end: flags map onto the same keys as the config file
//! and take precedence over it.

use crate::commands::{run, Report};
use crate::config::{Format, RunConfig, Settings};
use crate::error::CliError;
use clap::{Args, Parser, Subcommand};
use std::io::Write;
use std::path::PathBuf;

#[derive(Parser, Debug)]
#[command(name = "qfi", version, about = "Quantum Fisher information of qubit channels on very noisy inputs")]
pub struct Cli {
    #[command(subcommand)]
    pub command: Sub,
    #[command(flatten)]
    pub common: Common,
}

#[derive(Subcommand, Debug, Clone, Copy)]
pub enum Sub {
    /// Exact and series QFI over a (lambda, r, n) grid
    Qfi,
    /// Lower bound, canonical and grid-max H^(2), upper bound
    Bounds,
    /// Local measurement CFI against the exact QFI
    Measure,
    /// Phase-flip Escher bound against the optimal single-qubit QFI
    Escher,
    /// Series orders fitted from exact QFIs
    FitOrders,
    /// Bloch-form constraint checks over lambda
    ValidateChannel,
    /// Channel output state as Pauli coefficients
    State,
    /// Run the command named in the config file
    Run,
}

#[derive(Args, Debug, Default)]
pub struct Common {
    /// key = value config file with [channel], [protocol], [numerics], [output] sections
    #[arg(long, global = true)]
    pub config: Option<PathBuf>,
    /// Channel family: phase_shift, phase_flip, depolarizing, gad, pauli, custom_diag
    #[arg(long, global = true)]
    pub channel: Option<String>,
    /// Channel parameter as key=value (repeatable)
    #[arg(long = "param", global = true, value_name = "KEY=VAL")]
    pub params: Vec<String>,
    /// Lambda grid: a:b:steps, a value, or a comma list
    #[arg(long, global = true, allow_hyphen_values = true)]
    pub lambda: Option<String>,
    /// Purity grid: a:b:steps, a value, or a comma list
    #[arg(long, global = true)]
    pub purity: Option<String>,
    /// Qubit counts, comma separated (1 = single qubit)
    #[arg(long, global = true)]
    pub n: Option<String>,
    /// Control direction x,y,z
    #[arg(long = "c", global = true, allow_hyphen_values = true)]
    pub c: Option<String>,
    /// Initial direction x,y,z
    #[arg(long, global = true, allow_hyphen_values = true)]
    pub r0: Option<String>,
    /// Output file (stdout when absent)
    #[arg(long, global = true)]
    pub out: Option<PathBuf>,
    /// csv or json
    #[arg(long, global = true)]
    pub format: Option<String>,
    /// Worker threads
    #[arg(long, global = true)]
    pub jobs: Option<String>,
    /// Central-difference step in lambda
    #[arg(long = "fd-step", global = true)]
    pub fd_step: Option<String>,
    /// Relative eigenvalue cutoff for SLD pairs
    #[arg(long, global = true)]
    pub eps: Option<String>,
    /// Highest series order
    #[arg(long = "max-order", global = true)]
    pub max_order: Option<String>,
}

impl Sub {
    fn name(self) -> Option<&'static str> {
        Some(match self {
            Sub::Qfi => "qfi",
            Sub::Bounds => "bounds",
            Sub::Measure => "measure",
            Sub::Escher => "escher",
            Sub::FitOrders => "fit-orders",
            Sub::ValidateChannel => "validate-channel",
            Sub::State => "state",
            Sub::Run => return None,
        })
    }
}

pub fn settings(cli: &Cli) -> Result<Settings, CliError> {
    let c = &cli.common;
    let mut s = match &c.config {
        Some(path) => {
            let text = std::fs::read_to_string(path)
                .map_err(|e| CliError::Config(format!("cannot read config {}: {e}", path.display())))?;
            Settings::parse(&text)?
        }
        None => Settings::default(),
    };
    match cli.command.name() {
        Some(name) => s.set("command", name),
        None if s.get("command").is_none() => {
            return Err(CliError::Config("`run` needs a config file with a command".into()));
        }
        None => {}
    }
    let flags = [
        ("channel.name", &c.channel),
        ("protocol.lambda", &c.lambda),
        ("protocol.purity", &c.purity),
        ("protocol.n", &c.n),
        ("protocol.c", &c.c),
        ("protocol.r0", &c.r0),
        ("output.format", &c.format),
        ("numerics.jobs", &c.jobs),
        ("numerics.fd_step", &c.fd_step),
        ("numerics.eps", &c.eps),
        ("numerics.max_order", &c.max_order),
    ];
    for (key, value) in flags {
        if let Some(v) = value {
            s.set(key, v.as_str());
        }
    }
    if let Some(out) = &c.out {
        s.set("output.path", out.to_string_lossy());
    }
    for p in &c.params {
        let (k, v) = p.split_once('=').ok_or_else(|| CliError::Config(format!("--param expects key=value, got '{p}'")))?;
        s.set(&format!("channel.{}", k.trim()), v.trim());
    }
    Ok(s)
}

pub fn render(report: &Report, format: Format) -> String {
    match (format, &report.json) {
        (Format::Json, Some(j)) => {
            let mut s = serde_json::to_string_pretty(j).expect("json values serialize");
            s.push('\n');
            s
        }
        _ => report.table.render(format),
    }
}

/// Runs one invocation and returns the process exit code.
pub fn execute(cli: &Cli) -> i32 {
    match try_execute(cli) {
        Ok(code) => code,
        Err(e) => {
            eprintln!("qfi: {e}");
            e.exit_code()
        }
    }
}

fn try_execute(cli: &Cli) -> Result<i32, CliError> {
    let cfg = RunConfig::from_settings(&settings(cli)?)?;
    let report = run(&cfg)?;
    for w in &report.warnings {
        eprintln!("qfi: warning: {w}");
    }
    let text = render(&report, cfg.format);
    match &cfg.out {
        Some(path) => std::fs::write(path, text)?,
        None => std::io::stdout().lock().write_all(text.as_bytes())?,
    }
    match &report.failure {
        Some(msg) => {
            eprintln!("qfi: check failed: {msg}");
            Ok(3)
        }
        None => Ok(0),
    }
}
