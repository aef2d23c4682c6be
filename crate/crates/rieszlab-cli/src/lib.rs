//! Experiment driver behind the `rieszlab` binary.
//!
//! Every subcommand reads a JSON config and writes `<name>.csv` plus
//! `<name>.summary.json` into the output directory.

pub mod commands;
pub mod config;

use serde::Serialize;
use sha2::{Digest, Sha256};
use std::fmt;
use std::path::{Path, PathBuf};

pub const GIT_REVISION: &str = env!("RIESZLAB_GIT_REVISION");

#[derive(Debug, Clone, Copy, PartialEq, Eq, clap::ValueEnum)]
pub enum Command {
    Energy,
    Minimize,
    LatticeConst,
    Mmot,
    Monotone1d,
    SwissCheese,
    FgSplit,
    ScanS,
    Compare,
    Limits,
}

impl Command {
    pub fn label(self) -> &'static str {
        match self {
            Command::Energy => "energy",
            Command::Minimize => "minimize",
            Command::LatticeConst => "lattice-const",
            Command::Mmot => "mmot",
            Command::Monotone1d => "monotone1d",
            Command::SwissCheese => "swiss-cheese",
            Command::FgSplit => "fg-split",
            Command::ScanS => "scan-s",
            Command::Compare => "compare",
            Command::Limits => "limits",
        }
    }
}

#[derive(Debug)]
pub enum CliError {
    /// Bad config; exit status 2.
    Config { field: String, message: String },
    /// Failure inside the numerical library.
    Numeric(rieszlab::Error),
    Io(String),
}

impl CliError {
    pub fn config(field: impl Into<String>, message: impl Into<String>) -> Self {
        CliError::Config { field: field.into(), message: message.into() }
    }

    pub fn exit_code(&self) -> i32 {
        match self {
            CliError::Config { .. } => 2,
            CliError::Numeric(_) => 1,
            CliError::Io(_) => 1,
        }
    }
}

impl fmt::Display for CliError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            CliError::Config { field, message } => write!(f, "config field `{field}`: {message}"),
            CliError::Numeric(e) => write!(f, "{e}"),
            CliError::Io(e) => write!(f, "io: {e}"),
        }
    }
}

impl std::error::Error for CliError {}

impl From<rieszlab::Error> for CliError {
    fn from(e: rieszlab::Error) -> Self {
        match e {
            rieszlab::Error::Parameter { name, reason } => CliError::config(name, reason),
            other => CliError::Numeric(other),
        }
    }
}

impl From<std::io::Error> for CliError {
    fn from(e: std::io::Error) -> Self {
        CliError::Io(e.to_string())
    }
}

#[derive(Debug, Clone, Default)]
pub struct RunOptions {
    pub config: PathBuf,
    pub out: PathBuf,
    pub seed: Option<u64>,
    pub threads: Option<usize>,
    pub tolerance: Option<f64>,
}

/// Rows destined for `<name>.csv`.
#[derive(Debug, Clone, Default)]
pub struct Table {
    pub header: Vec<String>,
    pub rows: Vec<Vec<String>>,
}

impl Table {
    pub fn new<S: Into<String>>(header: impl IntoIterator<Item = S>) -> Self {
        Self { header: header.into_iter().map(Into::into).collect(), rows: Vec::new() }
    }

    pub fn push(&mut self, row: Vec<String>) {
        self.rows.push(row);
    }

    fn write(&self, path: &Path) -> Result<(), CliError> {
        let mut w = csv::Writer::from_path(path).map_err(|e| CliError::Io(e.to_string()))?;
        w.write_record(&self.header).map_err(|e| CliError::Io(e.to_string()))?;
        for r in &self.rows {
            w.write_record(r).map_err(|e| CliError::Io(e.to_string()))?;
        }
        w.flush()?;
        Ok(())
    }
}

/// Shortest round-trip decimal form, in exponent notation for very small or large magnitudes.
pub fn num(x: f64) -> String {
    let a = x.abs();
    if x == 0.0 || !x.is_finite() || (1e-4..1e15).contains(&a) {
        format!("{x}")
    } else {
        format!("{x:e}")
    }
}

/// What a subcommand hands back to the driver.
pub struct Output {
    pub name: String,
    pub seed: Option<u64>,
    pub table: Table,
    pub result: serde_json::Value,
    /// (file suffix, contents) written next to the CSV.
    pub extras: Vec<(String, String)>,
}

#[derive(Debug, Clone)]
pub struct Context {
    pub command: Command,
    pub base_dir: PathBuf,
    pub seed: Option<u64>,
    pub tolerance: Option<f64>,
}

impl Context {
    /// The effective seed: the flag wins over the config.
    pub fn seed(&self, from_config: Option<u64>) -> Option<u64> {
        self.seed.or(from_config)
    }

    pub fn require_seed(&self, from_config: Option<u64>) -> Result<u64, CliError> {
        self.seed(from_config).ok_or_else(|| {
            CliError::config("seed", format!("`{}` is stochastic; pass --seed or set `seed` in the config", self.command.label()))
        })
    }
}

#[derive(Debug, Clone, Serialize)]
pub struct Provenance {
    pub config_path: String,
    pub config_sha256: String,
    pub seed: Option<u64>,
    pub git_revision: String,
    pub version: String,
    pub threads: Option<usize>,
    pub tolerance: Option<f64>,
}

#[derive(Debug, Clone)]
pub struct RunReport {
    pub csv: PathBuf,
    pub summary: PathBuf,
    pub extras: Vec<PathBuf>,
}

pub fn sha256_hex(bytes: &[u8]) -> String {
    Sha256::digest(bytes).iter().map(|b| format!("{b:02x}")).collect()
}

/// Runs one subcommand end to end.
pub fn run(command: Command, opts: &RunOptions) -> Result<RunReport, CliError> {
    if let Some(t) = opts.tolerance {
        if !(t.is_finite() && t > 0.0) {
            return Err(CliError::config("--tolerance", format!("must be a positive finite number, got {t}")));
        }
    }
    if opts.threads == Some(0) {
        return Err(CliError::config("--threads", "need at least one thread"));
    }
    let bytes = std::fs::read(&opts.config).map_err(|e| CliError::Io(format!("{}: {e}", opts.config.display())))?;
    let text = String::from_utf8(bytes.clone()).map_err(|e| CliError::config("<document>", e.to_string()))?;
    let raw: serde_json::Value = config::parse(&text)?;
    if !raw.is_object() {
        return Err(CliError::config("<root>", "config must be a JSON object"));
    }
    let ctx = Context {
        command,
        base_dir: opts.config.parent().map(Path::to_path_buf).unwrap_or_default(),
        seed: opts.seed,
        tolerance: opts.tolerance,
    };
    let output = match opts.threads {
        Some(n) => {
            let pool = rayon::ThreadPoolBuilder::new().num_threads(n).build().map_err(|e| CliError::Io(e.to_string()))?;
            pool.install(|| commands::dispatch(&ctx, &text))?
        }
        None => commands::dispatch(&ctx, &text)?,
    };
    check_name(&output.name)?;
    std::fs::create_dir_all(&opts.out)?;
    let csv_path = opts.out.join(format!("{}.csv", output.name));
    output.table.write(&csv_path)?;
    let mut extras = Vec::new();
    for (suffix, contents) in &output.extras {
        let p = opts.out.join(format!("{}.{suffix}", output.name));
        std::fs::write(&p, contents)?;
        extras.push(p);
    }
    let provenance = Provenance {
        config_path: opts.config.display().to_string(),
        config_sha256: sha256_hex(&bytes),
        seed: output.seed,
        git_revision: GIT_REVISION.to_string(),
        version: env!("CARGO_PKG_VERSION").to_string(),
        threads: opts.threads,
        tolerance: opts.tolerance,
    };
    let summary = serde_json::json!({
        "command": command.label(),
        "name": output.name,
        "provenance": provenance,
        "config": raw,
        "csv": csv_path.file_name().map(|f| f.to_string_lossy().to_string()),
        "result": output.result,
    });
    let summary_path = opts.out.join(format!("{}.summary.json", output.name));
    let mut body = serde_json::to_string_pretty(&summary).map_err(|e| CliError::Io(e.to_string()))?;
    body.push('\n');
    std::fs::write(&summary_path, body)?;
    Ok(RunReport { csv: csv_path, summary: summary_path, extras })
}

fn check_name(name: &str) -> Result<(), CliError> {
    if name.is_empty() || name.contains(['/', '\\']) || name == "." || name == ".." {
        return Err(CliError::config("name", format!("{name:?} is not a usable file stem")));
    }
    Ok(())
}
