use std::fmt;
use std::fs;
use std::path::{Path, PathBuf};
use std::time::{SystemTime, UNIX_EPOCH};

use anyhow::Context;
use serde::de::DeserializeOwned;
use serde::Serialize;

pub mod exit {
    pub const OK: u8 = 0;
    pub const INTERNAL: u8 = 1;
    pub const INPUT: u8 = 2;
    pub const BOUNDARY: u8 = 3;
    pub const DEGENERATED: u8 = 4;
    pub const T_MAX: u8 = 5;
    pub const NUMERICAL: u8 = 6;
    pub const INADMISSIBLE: u8 = 7;
    pub const PROPERTY: u8 = 8;
}

#[derive(Debug)]
pub struct CliError {
    pub code: u8,
    pub error: anyhow::Error,
}

impl fmt::Display for CliError {
    /// The error chain, skipping causes already spelled out by their parent.
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let mut shown = String::new();
        for cause in self.error.chain() {
            let text = cause.to_string();
            if shown.is_empty() {
                shown = text;
            } else if !shown.contains(&text) {
                shown = format!("{shown}: {text}");
            }
        }
        f.write_str(&shown)
    }
}

impl From<anyhow::Error> for CliError {
    fn from(error: anyhow::Error) -> Self {
        CliError { code: exit::INTERNAL, error }
    }
}

pub trait WithCode<T> {
    fn code(self, code: u8) -> Result<T, CliError>;
}

impl<T, E: Into<anyhow::Error>> WithCode<T> for Result<T, E> {
    fn code(self, code: u8) -> Result<T, CliError> {
        self.map_err(|e| CliError { code, error: e.into() })
    }
}

pub fn read_json<T: DeserializeOwned>(path: &Path) -> Result<T, CliError> {
    let text = fs::read_to_string(path).with_context(|| format!("cannot read {}", path.display())).code(exit::INPUT)?;
    serde_json::from_str(&text).with_context(|| format!("cannot parse {}", path.display())).code(exit::INPUT)
}

pub fn to_json<T: Serialize>(value: &T) -> String {
    let mut s = serde_json::to_string_pretty(value).expect("reports serialize");
    s.push('\n');
    s
}

pub fn write_text(path: &Path, text: &str) -> Result<(), CliError> {
    fs::write(path, text).with_context(|| format!("cannot write {}", path.display())).code(exit::INTERNAL)
}

pub fn write_json<T: Serialize>(path: &Path, value: &T) -> Result<(), CliError> {
    write_text(path, &to_json(value))
}

/// `<path><suffix>`, e.g. `trace.csv` → `trace.csv.status.json`.
pub fn sidecar(path: &Path, suffix: &str) -> PathBuf {
    let mut s = path.as_os_str().to_owned();
    s.push(suffix);
    PathBuf::from(s)
}

fn unix_ms() -> u128 {
    SystemTime::now().duration_since(UNIX_EPOCH).map(|d| d.as_millis()).unwrap_or(0)
}

/// Provenance of one run, written next to its main output so that the
/// output itself stays byte-identical across reruns.
#[derive(Debug, Serialize)]
pub struct Manifest {
    pub command: String,
    pub inputs: Vec<String>,
    pub outputs: Vec<String>,
    pub config: serde_json::Value,
    pub tool_version: &'static str,
    pub started_unix_ms: u128,
    pub finished_unix_ms: u128,
}

pub struct Run {
    command: &'static str,
    inputs: Vec<String>,
    outputs: Vec<String>,
    config: serde_json::Value,
    started: u128,
}

impl Run {
    pub fn start(command: &'static str, config: serde_json::Value) -> Self {
        Run { command, inputs: Vec::new(), outputs: Vec::new(), config, started: unix_ms() }
    }

    pub fn input(&mut self, path: &Path) {
        self.inputs.push(path.display().to_string());
    }

    pub fn output(&mut self, path: &Path) {
        self.outputs.push(path.display().to_string());
    }

    /// Writes `<primary>.manifest.json`.
    pub fn finish(self, primary: &Path) -> Result<(), CliError> {
        let manifest = Manifest {
            command: self.command.to_string(),
            inputs: self.inputs,
            outputs: self.outputs,
            config: self.config,
            tool_version: env!("CARGO_PKG_VERSION"),
            started_unix_ms: self.started,
            finished_unix_ms: unix_ms(),
        };
        write_json(&sidecar(primary, ".manifest.json"), &manifest)
    }
}
