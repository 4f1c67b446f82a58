use std::fs;
use std::path::Path;
use std::time::{SystemTime, UNIX_EPOCH};

use clap::Parser;
use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};

use crate::args::{Cli, Command};
use crate::commands::{execute, CliError, Outcome};

pub fn sha256_hex(bytes: &[u8]) -> String {
    hex::encode(Sha256::digest(bytes))
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FileDigest {
    pub path: String,
    pub sha256: String,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "camelCase")]
pub struct Timing {
    pub started_unix_seconds: u64,
    pub elapsed_seconds: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "camelCase")]
pub struct ExperimentRecord {
    pub tool: String,
    pub version: String,
    /// Arguments after the program name, exactly as given.
    pub args: Vec<String>,
    pub threads: Option<usize>,
    pub inputs: Vec<FileDigest>,
    pub seeds: Vec<u64>,
    pub timing: Timing,
    /// Output files, relative to the output directory.
    pub outputs: Vec<FileDigest>,
}

fn digest_file(path: &Path) -> Result<FileDigest, CliError> {
    Ok(FileDigest { path: path.display().to_string(), sha256: sha256_hex(&fs::read(path)?) })
}

impl ExperimentRecord {
    pub fn new(args: &[String], outcome: &Outcome, elapsed: f64, threads: Option<usize>) -> Result<Self, CliError> {
        let started = SystemTime::now().duration_since(UNIX_EPOCH).map(|d| d.as_secs()).unwrap_or(0);
        Ok(Self {
            tool: env!("CARGO_PKG_NAME").into(),
            version: env!("CARGO_PKG_VERSION").into(),
            args: args.to_vec(),
            threads,
            inputs: outcome.inputs.iter().map(|p| digest_file(p)).collect::<Result<_, _>>()?,
            seeds: outcome.seeds.clone(),
            timing: Timing { started_unix_seconds: started.saturating_sub(elapsed as u64), elapsed_seconds: elapsed },
            outputs: outcome
                .outputs
                .iter()
                .map(|(name, bytes)| FileDigest { path: name.clone(), sha256: sha256_hex(bytes) })
                .collect(),
        })
    }
}

pub struct Replayed {
    pub outcome: Outcome,
}

/// Re-run the recorded command in memory and compare every output hash.
pub fn replay(path: &Path) -> Result<Replayed, CliError> {
    let rec: ExperimentRecord = hypfill_core::io::read_json(path)?;
    for input in &rec.inputs {
        let now = digest_file(Path::new(&input.path))?;
        if now.sha256 != input.sha256 {
            return Err(CliError::Replay(format!("input {} changed since the record was made", input.path)));
        }
    }
    let argv = std::iter::once("hypfill".to_string()).chain(rec.args.iter().cloned());
    let cli = Cli::try_parse_from(argv).map_err(|e| CliError::Usage(e.render().to_string()))?;
    if matches!(cli.command, Command::Replay(_)) {
        return Err(CliError::Usage("a record cannot replay a replay".into()));
    }
    let outcome = execute(&cli.command)?;
    if outcome.outputs.len() != rec.outputs.len() {
        return Err(CliError::Replay(format!(
            "recorded {} outputs, regenerated {}",
            rec.outputs.len(),
            outcome.outputs.len()
        )));
    }
    for ((name, bytes), want) in outcome.outputs.iter().zip(&rec.outputs) {
        let got = sha256_hex(bytes);
        if name != &want.path || got != want.sha256 {
            return Err(CliError::Replay(format!("{name}: sha256 {got}, recorded {}", want.sha256)));
        }
    }
    Ok(Replayed { outcome })
}
