//! Batch front-end for the santalo-core verifiers.
//!
//! Every run produces one JSON report per job under the output directory,
//! named `<command>-<label>-<hash>.json`, plus `<command>-summary.csv`.

pub mod args;
pub mod jobs;
pub mod suite;

use std::path::{Path, PathBuf};

use serde::Serialize;
use sha2::{Digest, Sha256};
use thiserror::Error;

use santalo_core::inequalities::VerificationReport;

pub use args::{Cli, Command, RunArgs, Settings};

pub const EXIT_PASSED: u8 = 0;
pub const EXIT_FAILED: u8 = 1;
pub const EXIT_INVALID: u8 = 2;
pub const EXIT_NUMERICAL: u8 = 3;

pub const THREADS_ENV: &str = "SANTALO_LAB_THREADS";

#[derive(Debug, Error)]
pub enum CliError {
    #[error("{0}")]
    Spec(String),
    #[error(transparent)]
    Core(#[from] santalo_core::Error),
    #[error("non-finite value in report `{0}`")]
    NonFinite(String),
    #[error("{label}: {source}")]
    InJob { label: String, source: Box<CliError> },
    #[error("cannot write {path}: {source}")]
    Io { path: PathBuf, source: std::io::Error },
}

impl CliError {
    pub fn in_job(self, label: &str) -> Self {
        CliError::InJob { label: label.to_string(), source: Box::new(self) }
    }

    pub fn exit_code(&self) -> u8 {
        match self {
            CliError::NonFinite(_) | CliError::Core(santalo_core::Error::Numerical(_)) => EXIT_NUMERICAL,
            CliError::InJob { source, .. } => source.exit_code(),
            _ => EXIT_INVALID,
        }
    }
}

/// One verifier run with the inputs that produced it.
#[derive(Debug, Clone, Serialize)]
pub struct Outcome {
    pub command: String,
    pub label: String,
    pub spec: serde_json::Value,
    pub report: VerificationReport,
}

impl Outcome {
    pub fn new(command: &str, label: impl Into<String>, spec: serde_json::Value, report: VerificationReport) -> Self {
        Self { command: command.to_string(), label: label.into(), spec, report }
    }

    /// Hex prefix of the SHA-256 of the command, label, spec and report name.
    pub fn hash(&self) -> String {
        let mut h = Sha256::new();
        for part in [&self.command, &self.label, &self.spec.to_string(), &self.report.name] {
            h.update(part.as_bytes());
            h.update([0]);
        }
        h.finalize()[..6].iter().map(|b| format!("{b:02x}")).collect()
    }

    pub fn file_name(&self) -> String {
        format!("{}-{}-{}.json", self.command, self.label, self.hash())
    }
}

/// `label,name,deficit,tolerance,passed` with one row per outcome.
pub fn summary_csv(outcomes: &[Outcome]) -> String {
    let mut out = String::from("label,name,deficit,tolerance,passed\n");
    for o in outcomes {
        let r = &o.report;
        out.push_str(&format!("{},{},{:e},{:e},{}\n", o.label, r.name, r.deficit, r.tolerance, r.passed));
    }
    out
}

fn write(path: &Path, text: &str) -> Result<(), CliError> {
    std::fs::write(path, text).map_err(|source| CliError::Io { path: path.to_path_buf(), source })
}

/// Writes the reports and the summary; returns the report paths.
pub fn write_outputs(out: &Path, command: Command, outcomes: &[Outcome]) -> Result<Vec<PathBuf>, CliError> {
    std::fs::create_dir_all(out).map_err(|source| CliError::Io { path: out.to_path_buf(), source })?;
    let mut paths = Vec::with_capacity(outcomes.len());
    for o in outcomes {
        let path = out.join(o.file_name());
        let mut text = serde_json::to_string_pretty(o).expect("serializable");
        text.push('\n');
        write(&path, &text)?;
        paths.push(path);
    }
    write(&out.join(format!("{}-summary.csv", command.name())), &summary_csv(outcomes))?;
    Ok(paths)
}

/// Thread cap from [`THREADS_ENV`]; `None` means machine parallelism.
pub fn thread_cap() -> Result<Option<usize>, CliError> {
    match std::env::var(THREADS_ENV) {
        Ok(v) => match v.trim().parse::<usize>() {
            Ok(n) if n > 0 => Ok(Some(n)),
            _ => Err(CliError::Spec(format!("{THREADS_ENV} must be a positive integer, got `{v}`"))),
        },
        Err(_) => Ok(None),
    }
}

/// Runs a command to completion and returns the exit code.
pub fn execute(command: Command, settings: &Settings) -> Result<u8, CliError> {
    let outcomes = match command {
        Command::Suite => suite::run(settings)?,
        _ => jobs::run(command, settings)?,
    };
    if let Some(bad) = outcomes.iter().find(|o| !o.report.is_finite()) {
        return Err(CliError::NonFinite(format!("{}/{}", bad.label, bad.report.name)));
    }
    write_outputs(&settings.out, command, &outcomes)?;
    print!("{}", summary_csv(&outcomes));
    Ok(if outcomes.iter().all(|o| o.report.passed) { EXIT_PASSED } else { EXIT_FAILED })
}
