//! Batch command-line front end.
//!
//! `olskit <command> --config c.json --data d.csv [--query q.csv] --out dir/ [--seed n]`
//!
//! Every run writes `report.json` (deterministic for fixed inputs), the
//! command's output files and a `timing.json` sidecar holding wall time.
//! Exit codes: 0 when all checks pass, 1 when a check fails, 2 on input errors.

mod commands;
mod config;
mod data;

use std::collections::BTreeMap;
use std::ffi::OsString;
use std::path::{Path, PathBuf};
use std::time::Instant;

use clap::{Args, Parser, Subcommand};
use serde::Serialize;
use serde_json::Value;
use sha2::{Digest, Sha256};

pub use config::{
    parse_config, ConditionConfig, Config, ContinuityConfig, DisintegrationConfig, EntropyConfig, FuzzyConfig,
    GmtConfig, KrigeConfig, SvmConfig, VerifyConfig,
};
pub use data::{fmt_f64, load_csv, parse_csv, render_csv};

pub const SCHEMA_VERSION: u32 = 1;

#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub enum CliError {
    #[error("{0}")]
    Input(String),
}

impl From<crate::Error> for CliError {
    fn from(e: crate::Error) -> Self {
        CliError::Input(e.to_string())
    }
}

#[derive(Debug, Parser)]
#[command(
    name = "olskit",
    version,
    about = "OLS conditioning, kriging and kernel classification"
)]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Clone, Subcommand)]
pub enum Command {
    /// Predict an array at query points from observed values.
    Krige(CommonArgs),
    /// Train a maximum-margin classifier on 0/1-labelled points.
    ClassifySvm(CommonArgs),
    /// Krige the 0/1 labels into a fuzzy classifier.
    ClassifyFuzzy(CommonArgs),
    /// Posterior mean, variance and draws given observed values.
    Condition(CommonArgs),
    /// Numerical verification runs.
    #[command(subcommand)]
    Verify(VerifyCommand),
}

#[derive(Debug, Clone, Subcommand)]
pub enum VerifyCommand {
    Gmt(CommonArgs),
    Disintegration(CommonArgs),
    Uii(CommonArgs),
    Entropy(CommonArgs),
    Continuity(CommonArgs),
}

#[derive(Debug, Clone, Args)]
pub struct CommonArgs {
    #[arg(long)]
    pub config: Option<PathBuf>,
    #[arg(long)]
    pub data: Option<PathBuf>,
    #[arg(long)]
    pub query: Option<PathBuf>,
    #[arg(long)]
    pub out: PathBuf,
    /// Overrides the config seed.
    #[arg(long)]
    pub seed: Option<u64>,
}

impl Command {
    pub fn name(&self) -> &'static str {
        match self {
            Command::Krige(_) => "krige",
            Command::ClassifySvm(_) => "classify-svm",
            Command::ClassifyFuzzy(_) => "classify-fuzzy",
            Command::Condition(_) => "condition",
            Command::Verify(v) => match v {
                VerifyCommand::Gmt(_) => "verify gmt",
                VerifyCommand::Disintegration(_) => "verify disintegration",
                VerifyCommand::Uii(_) => "verify uii",
                VerifyCommand::Entropy(_) => "verify entropy",
                VerifyCommand::Continuity(_) => "verify continuity",
            },
        }
    }

    pub fn args(&self) -> &CommonArgs {
        match self {
            Command::Krige(a) | Command::ClassifySvm(a) | Command::ClassifyFuzzy(a) | Command::Condition(a) => a,
            Command::Verify(
                VerifyCommand::Gmt(a)
                | VerifyCommand::Disintegration(a)
                | VerifyCommand::Uii(a)
                | VerifyCommand::Entropy(a)
                | VerifyCommand::Continuity(a),
            ) => a,
        }
    }

    fn needs_config(&self) -> bool {
        !matches!(self, Command::Verify(VerifyCommand::Uii(_)))
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Report {
    pub schema_version: u32,
    pub command: String,
    pub inputs_digest: String,
    pub seed: Option<u64>,
    pub config: Option<Config>,
    pub metrics: BTreeMap<String, Value>,
    pub checks: BTreeMap<String, bool>,
    pub pass: bool,
    pub outputs: Vec<String>,
}

/// Metrics, checks and output files produced by a command.
#[derive(Debug, Default)]
pub(crate) struct Outcome {
    pub metrics: BTreeMap<String, Value>,
    pub checks: BTreeMap<String, bool>,
    pub files: Vec<(String, String)>,
}

impl Outcome {
    pub fn metric(&mut self, name: &str, value: impl Serialize) {
        self.metrics.insert(
            name.to_string(),
            serde_json::to_value(value).expect("metric serializes"),
        );
    }

    pub fn check(&mut self, name: &str, ok: bool) {
        self.checks.insert(name.to_string(), ok);
    }

    pub fn file(&mut self, name: &str, contents: String) {
        self.files.push((name.to_string(), contents));
    }
}

/// Inputs handed to a command after parsing.
pub(crate) struct Inputs {
    pub config: Option<Config>,
    pub seed: Option<u64>,
    pub data: Option<Vec<u8>>,
    pub query: Option<Vec<u8>>,
}

impl Inputs {
    pub fn config(&self) -> &Config {
        self.config.as_ref().expect("config checked before dispatch")
    }

    pub fn seed(&self, command: &str) -> Result<u64, CliError> {
        self.seed
            .ok_or_else(|| CliError::Input(format!("config: seed: required for `{command}`")))
    }

    pub fn data(&self, command: &str) -> Result<&[u8], CliError> {
        self.data
            .as_deref()
            .ok_or_else(|| CliError::Input(format!("`{command}` needs --data")))
    }
}

fn read_optional(path: &Option<PathBuf>, what: &str) -> Result<Option<Vec<u8>>, CliError> {
    path.as_ref()
        .map(|p| std::fs::read(p).map_err(|e| CliError::Input(format!("cannot read {what} {}: {e}", p.display()))))
        .transpose()
}

fn digest(command: &str, config: Option<&Config>, seed: Option<u64>, inputs: &Inputs) -> String {
    let mut h = Sha256::new();
    let mut part = |bytes: &[u8]| {
        h.update((bytes.len() as u64).to_le_bytes());
        h.update(bytes);
    };
    part(command.as_bytes());
    part(config.map(Config::to_json).unwrap_or_default().as_bytes());
    part(&seed.map(|s| s.to_le_bytes().to_vec()).unwrap_or_default());
    part(inputs.data.as_deref().unwrap_or_default());
    part(inputs.query.as_deref().unwrap_or_default());
    hex::encode(h.finalize())
}

/// Parse inputs, run the command and build its report and output files.
pub fn execute(command: &Command) -> Result<(Report, Vec<(String, String)>), CliError> {
    let args = command.args();
    let mut config = match (&args.config, command.needs_config()) {
        (Some(p), _) => Some(parse_config(p)?),
        (None, true) => return Err(CliError::Input(format!("`{}` needs --config", command.name()))),
        (None, false) => None,
    };
    let seed = args.seed.or(config.as_ref().and_then(|c| c.seed));
    if let Some(c) = config.as_mut() {
        c.seed = seed;
    }
    let inputs = Inputs {
        config,
        seed,
        data: read_optional(&args.data, "data")?,
        query: read_optional(&args.query, "query")?,
    };
    let outcome = match command {
        Command::Krige(_) => commands::krige(&inputs)?,
        Command::ClassifySvm(_) => commands::classify_svm(&inputs)?,
        Command::ClassifyFuzzy(_) => commands::classify_fuzzy(&inputs)?,
        Command::Condition(_) => commands::condition(&inputs)?,
        Command::Verify(v) => match v {
            VerifyCommand::Gmt(_) => commands::verify_gmt(&inputs)?,
            VerifyCommand::Disintegration(_) => commands::verify_disintegration(&inputs)?,
            VerifyCommand::Uii(_) => commands::verify_uii(&inputs)?,
            VerifyCommand::Entropy(_) => commands::verify_entropy(&inputs)?,
            VerifyCommand::Continuity(_) => commands::verify_continuity(&inputs)?,
        },
    };
    let report = Report {
        schema_version: SCHEMA_VERSION,
        command: command.name().to_string(),
        inputs_digest: digest(command.name(), inputs.config.as_ref(), seed, &inputs),
        seed,
        pass: outcome.checks.values().all(|&ok| ok),
        outputs: outcome.files.iter().map(|(n, _)| n.clone()).collect(),
        config: inputs.config,
        metrics: outcome.metrics,
        checks: outcome.checks,
    };
    Ok((report, outcome.files))
}

/// Write `contents` to `dir/name` through a temporary file and a rename.
pub fn write_atomic(dir: &Path, name: &str, contents: &[u8]) -> std::io::Result<()> {
    let tmp = dir.join(format!(".{name}.tmp"));
    std::fs::write(&tmp, contents)?;
    std::fs::rename(&tmp, dir.join(name))
}

fn write_outputs(dir: &Path, report: &Report, files: &[(String, String)], seconds: f64) -> std::io::Result<()> {
    std::fs::create_dir_all(dir)?;
    for (name, contents) in files {
        write_atomic(dir, name, contents.as_bytes())?;
    }
    let mut json = serde_json::to_string_pretty(report).expect("report serializes");
    json.push('\n');
    write_atomic(dir, "report.json", json.as_bytes())?;
    let timing = serde_json::json!({ "wall_time_seconds": seconds });
    write_atomic(dir, "timing.json", format!("{timing}\n").as_bytes())
}

/// Run the CLI on the given arguments and return the process exit code.
pub fn main_with_args<I, T>(args: I) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(cli) => cli,
        Err(e) => {
            let _ = e.print();
            return if e.use_stderr() { 2 } else { 0 };
        }
    };
    let start = Instant::now();
    let (report, files) = match execute(&cli.command) {
        Ok(r) => r,
        Err(e) => {
            eprintln!("error: {e}");
            return 2;
        }
    };
    if let Err(e) = write_outputs(&cli.command.args().out, &report, &files, start.elapsed().as_secs_f64()) {
        eprintln!("error: cannot write outputs: {e}");
        return 2;
    }
    for (name, ok) in &report.checks {
        eprintln!("{} {name}", if *ok { "pass" } else { "FAIL" });
    }
    if report.pass {
        0
    } else {
        1
    }
}
