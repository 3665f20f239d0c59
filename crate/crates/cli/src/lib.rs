//! Experiment driver behind the `scatter` binary.

pub mod commands;
pub mod config;
pub mod presets;

use std::fmt::Write as _;
use std::path::Path;

pub use commands::{run_command, Command};
pub use config::ExperimentConfig;

#[derive(Debug, thiserror::Error)]
pub enum CliError {
    #[error("config error: {0}")]
    Config(String),
    #[error(transparent)]
    Core(#[from] floquet_core::Error),
    #[error("i/o error: {0}")]
    Io(#[from] std::io::Error),
}

/// One measured quantity against its acceptance target.
#[derive(Debug, Clone, PartialEq)]
pub struct Check {
    pub name: String,
    pub value: f64,
    pub target: String,
    pub passed: bool,
}

impl Check {
    pub fn below(name: impl Into<String>, value: f64, limit: f64) -> Self {
        Self {
            name: name.into(),
            value,
            target: format!("< {limit:e}"),
            passed: value < limit,
        }
    }

    pub fn above(name: impl Into<String>, value: f64, limit: f64) -> Self {
        Self {
            name: name.into(),
            value,
            target: format!("> {limit:e}"),
            passed: value > limit,
        }
    }

    pub fn within(name: impl Into<String>, value: f64, center: f64, tol: f64) -> Self {
        Self {
            name: name.into(),
            value,
            target: format!("{center} ± {tol}"),
            passed: (value - center).abs() < tol,
        }
    }
}

/// Checks and notes of one command, rendered as `summary.txt`.
#[derive(Debug, Clone, Default)]
pub struct Outcome {
    pub command: String,
    pub checks: Vec<Check>,
    pub notes: Vec<(String, String)>,
}

impl Outcome {
    pub fn new(command: &str) -> Self {
        Self {
            command: command.to_string(),
            ..Self::default()
        }
    }

    pub fn note(&mut self, key: &str, value: impl ToString) {
        self.notes.push((key.to_string(), value.to_string()));
    }

    pub fn passed(&self) -> bool {
        self.checks.iter().all(|c| c.passed)
    }

    pub fn check(&self, name: &str) -> Option<&Check> {
        self.checks.iter().find(|c| c.name == name)
    }

    pub fn render(&self, label: &str) -> String {
        let mut s = String::new();
        let _ = writeln!(s, "command: {}", self.command);
        let _ = writeln!(s, "config: {label}");
        for (k, v) in &self.notes {
            let _ = writeln!(s, "{k}: {v}");
        }
        for c in &self.checks {
            let _ = writeln!(
                s,
                "check {}: {:e} (target {}) {}",
                c.name,
                c.value,
                c.target,
                if c.passed { "PASS" } else { "FAIL" }
            );
        }
        let _ = writeln!(s, "result: {}", if self.passed() { "PASS" } else { "FAIL" });
        s
    }
}

/// Resolves `--preset` and `--config` into one configuration; keys in the
/// file override the preset.
pub fn load_config(preset: Option<&str>, path: Option<&Path>) -> Result<(ExperimentConfig, String), CliError> {
    let mut sections = config::Sections::new();
    let mut label = Vec::new();
    if let Some(name) = preset {
        let text = presets::preset(name).ok_or_else(|| {
            CliError::Config(format!("unknown preset {name:?}; known: {}", presets::NAMES.join(", ")))
        })?;
        sections = config::parse_sections(&text)?;
        label.push(format!("preset {name}"));
    }
    let mut base_dir = std::path::PathBuf::from(".");
    if let Some(p) = path {
        let text = std::fs::read_to_string(p)?;
        sections = config::merge(sections, config::parse_sections(&text)?);
        if let Some(dir) = p.parent() {
            base_dir = dir.to_path_buf();
        }
        label.push(format!("file {}", p.display()));
    }
    if label.is_empty() {
        label.push("defaults".into());
    }
    Ok((ExperimentConfig::from_sections(&sections, &base_dir)?, label.join(" + ")))
}

/// Worker count from `SCATTER_THREADS`, if set.
pub fn thread_count() -> Result<Option<usize>, CliError> {
    match std::env::var("SCATTER_THREADS") {
        Err(_) => Ok(None),
        Ok(v) => match v.trim().parse::<usize>() {
            Ok(n) if n > 0 => Ok(Some(n)),
            _ => Err(CliError::Config(format!("SCATTER_THREADS must be a positive integer, got {v:?}"))),
        },
    }
}
