//! Run configuration: a flat `key = value` file with `[section]` headers,
//! overridden key by key from the command line.
//!
//! ```text
//! command = qfi
//!
//! [channel]
//! name = gad
//! p = 0.8
//!
//! [protocol]
//! n = 1,2,3
//! lambda = 0.1:0.9:9
//! purity = 0.001:0.01:10
//! c = 0,0,1
//! r0 = 1,0,0
//!
//! [numerics]
//! fd_step = 1e-5
//! eps = 1e-12
//! max_order = 4
//! jobs = 4
//!
//! [output]
//! path = out.csv
//! format = csv
//! ```

use crate::error::CliError;
use qfi_core::bloch::{builtin, ChannelFamily};
use qfi_core::fisher::DEFAULT_PAIR_EPS;
use qfi_core::linalg::Vec3;
use qfi_core::mstate::DEFAULT_MAX_ORDER;
use qfi_core::protocols::MEASUREMENT_FD_STEP;
use std::collections::BTreeMap;
use std::path::PathBuf;

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Command {
    Qfi,
    Bounds,
    Measure,
    Escher,
    FitOrders,
    ValidateChannel,
    State,
}

impl Command {
    pub fn parse(s: &str) -> Result<Self, CliError> {
        Ok(match s {
            "qfi" => Command::Qfi,
            "bounds" => Command::Bounds,
            "measure" => Command::Measure,
            "escher" => Command::Escher,
            "fit-orders" | "fit_orders" => Command::FitOrders,
            "validate-channel" | "validate_channel" => Command::ValidateChannel,
            "state" => Command::State,
            other => return Err(CliError::Config(format!("unknown command '{other}'"))),
        })
    }

    pub fn as_str(self) -> &'static str {
        match self {
            Command::Qfi => "qfi",
            Command::Bounds => "bounds",
            Command::Measure => "measure",
            Command::Escher => "escher",
            Command::FitOrders => "fit-orders",
            Command::ValidateChannel => "validate-channel",
            Command::State => "state",
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Format {
    Csv,
    Json,
}

/// Raw settings keyed `section.key` (`command` has no section). Channel
/// parameters live under `channel.<param>`.
#[derive(Clone, Debug, Default)]
pub struct Settings(BTreeMap<String, String>);

const KNOWN: [&str; 13] = [
    "command",
    "protocol.n",
    "protocol.lambda",
    "protocol.purity",
    "protocol.c",
    "protocol.r0",
    "numerics.fd_step",
    "numerics.eps",
    "numerics.max_order",
    "numerics.jobs",
    "output.path",
    "output.format",
    "channel.name",
];

impl Settings {
    pub fn parse(text: &str) -> Result<Self, CliError> {
        let mut out = Settings::default();
        let mut section = String::new();
        for (lineno, raw) in text.lines().enumerate() {
            let line = raw.split(['#', ';']).next().unwrap_or("").trim();
            if line.is_empty() {
                continue;
            }
            let bad = |msg: &str| CliError::Config(format!("line {}: {msg}: '{}'", lineno + 1, raw.trim()));
            if let Some(rest) = line.strip_prefix('[') {
                let name = rest.strip_suffix(']').ok_or_else(|| bad("unterminated section header"))?.trim();
                if !matches!(name, "channel" | "protocol" | "numerics" | "output") {
                    return Err(bad("unknown section"));
                }
                section = name.to_string();
                continue;
            }
            let (k, v) = line.split_once('=').ok_or_else(|| bad("expected key = value"))?;
            let key = if section.is_empty() { k.trim().to_string() } else { format!("{section}.{}", k.trim()) };
            if section != "channel" && !KNOWN.contains(&key.as_str()) {
                return Err(bad("unknown key"));
            }
            out.0.insert(key, v.trim().to_string());
        }
        Ok(out)
    }

    pub fn set(&mut self, key: &str, value: impl Into<String>) {
        self.0.insert(key.to_string(), value.into());
    }

    pub fn get(&self, key: &str) -> Option<&str> {
        self.0.get(key).map(String::as_str)
    }

    fn channel_params(&self) -> Vec<(&str, &str)> {
        self.0
            .iter()
            .filter_map(|(k, v)| k.strip_prefix("channel.").filter(|p| *p != "name").map(|p| (p, v.as_str())))
            .collect()
    }
}

#[derive(Clone, Debug)]
pub struct RunConfig {
    pub command: Command,
    pub channel: Option<ChannelFamily>,
    pub lambdas: Option<Vec<f64>>,
    pub purities: Option<Vec<f64>>,
    pub ns: Option<Vec<usize>>,
    pub c: Option<Vec3>,
    pub r0: Option<Vec3>,
    pub out: Option<PathBuf>,
    pub format: Format,
    pub jobs: usize,
    pub fd_step: f64,
    pub eps: f64,
    pub max_order: usize,
}

impl RunConfig {
    pub fn from_settings(s: &Settings) -> Result<Self, CliError> {
        let command = Command::parse(s.get("command").ok_or_else(|| CliError::Config("no command given".into()))?)?;
        let channel = match s.get("channel.name") {
            Some(name) => Some(builtin(name, &s.channel_params()).map_err(|e| CliError::Config(format!("channel: {e}")))?),
            None => {
                if !s.channel_params().is_empty() {
                    return Err(CliError::Config("channel parameters given without a channel name".into()));
                }
                None
            }
        };
        let format = match s.get("output.format") {
            None => match s.get("output.path") {
                Some(p) if p.ends_with(".json") => Format::Json,
                _ => Format::Csv,
            },
            Some("csv") => Format::Csv,
            Some("json") => Format::Json,
            Some(other) => return Err(CliError::Config(format!("unknown format '{other}' (csv or json)"))),
        };
        let cfg = RunConfig {
            command,
            channel,
            lambdas: s.get("protocol.lambda").map(|v| parse_grid("lambda", v)).transpose()?,
            purities: s.get("protocol.purity").map(|v| parse_grid("purity", v)).transpose()?,
            ns: s.get("protocol.n").map(parse_ns).transpose()?,
            c: s.get("protocol.c").map(|v| parse_direction("c", v)).transpose()?,
            r0: s.get("protocol.r0").map(|v| parse_direction("r0", v)).transpose()?,
            out: s.get("output.path").map(PathBuf::from),
            format,
            jobs: s.get("numerics.jobs").map(|v| parse_positive_int("jobs", v)).transpose()?.unwrap_or(1),
            fd_step: s.get("numerics.fd_step").map(|v| parse_positive("fd_step", v)).transpose()?.unwrap_or(MEASUREMENT_FD_STEP),
            eps: s.get("numerics.eps").map(|v| parse_positive("eps", v)).transpose()?.unwrap_or(DEFAULT_PAIR_EPS),
            max_order: s.get("numerics.max_order").map(|v| parse_positive_int("max_order", v)).transpose()?.unwrap_or(DEFAULT_MAX_ORDER),
        };
        Ok(cfg)
    }

    pub fn family(&self) -> Result<&ChannelFamily, CliError> {
        self.channel.as_ref().ok_or_else(|| CliError::Config(format!("{} needs --channel", self.command.as_str())))
    }

    pub fn lambdas(&self) -> Result<&[f64], CliError> {
        self.lambdas.as_deref().ok_or_else(|| CliError::Config(format!("{} needs --lambda", self.command.as_str())))
    }
}

fn parse_f64(what: &str, v: &str) -> Result<f64, CliError> {
    let x: f64 = v.trim().parse().map_err(|_| CliError::Config(format!("{what}: '{v}' is not a number")))?;
    if !x.is_finite() {
        return Err(CliError::Config(format!("{what}: '{v}' is not finite")));
    }
    Ok(x)
}

fn parse_positive(what: &str, v: &str) -> Result<f64, CliError> {
    let x = parse_f64(what, v)?;
    if x <= 0.0 {
        return Err(CliError::Config(format!("{what} must be positive, got {v}")));
    }
    Ok(x)
}

fn parse_positive_int(what: &str, v: &str) -> Result<usize, CliError> {
    match v.trim().parse::<usize>() {
        Ok(k) if k > 0 => Ok(k),
        _ => Err(CliError::Config(format!("{what} must be a positive integer, got '{v}'"))),
    }
}

/// `a:b:steps` (inclusive, evenly spaced), a single value, or a comma list.
/// The result must be non-empty and strictly increasing.
pub fn parse_grid(what: &str, v: &str) -> Result<Vec<f64>, CliError> {
    let pts = if v.contains(':') {
        let parts: Vec<&str> = v.split(':').collect();
        if parts.len() != 3 {
            return Err(CliError::Config(format!("{what}: expected a:b:steps, got '{v}'")));
        }
        let (a, b) = (parse_f64(what, parts[0])?, parse_f64(what, parts[1])?);
        let steps = parse_positive_int(what, parts[2])?;
        if steps == 1 {
            if a != b {
                return Err(CliError::Config(format!("{what}: one step needs a = b, got '{v}'")));
            }
            vec![a]
        } else {
            (0..steps).map(|k| if k + 1 == steps { b } else { a + (b - a) * k as f64 / (steps - 1) as f64 }).collect()
        }
    } else {
        v.split(',').map(|p| parse_f64(what, p)).collect::<Result<_, _>>()?
    };
    if pts.is_empty() || pts.windows(2).any(|w| w[1] <= w[0]) {
        return Err(CliError::Config(format!("{what}: grid must be non-empty and strictly increasing, got '{v}'")));
    }
    Ok(pts)
}

fn parse_ns(v: &str) -> Result<Vec<usize>, CliError> {
    let ns: Vec<usize> = v.split(',').map(|p| parse_positive_int("n", p)).collect::<Result<_, _>>()?;
    if ns.windows(2).any(|w| w[1] <= w[0]) {
        return Err(CliError::Config(format!("n: list must be strictly increasing, got '{v}'")));
    }
    Ok(ns)
}

/// `x,y,z`, normalized; the zero vector is rejected.
pub fn parse_direction(what: &str, v: &str) -> Result<Vec3, CliError> {
    let parts: Vec<f64> = v.split(',').map(|p| parse_f64(what, p)).collect::<Result<_, _>>()?;
    if parts.len() != 3 {
        return Err(CliError::Config(format!("{what}: expected x,y,z, got '{v}'")));
    }
    let u = Vec3::new(parts[0], parts[1], parts[2]);
    if u.norm() < 1e-12 {
        return Err(CliError::Config(format!("{what}: direction must be nonzero")));
    }
    Ok(u.normalized())
}
