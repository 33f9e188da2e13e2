//! Run-wide settings assembled from flags, an optional TOML config file, and
//! the environment. Precedence: explicit flag, then config file, then
//! CHARPOLY_WORKERS (workers only), then built-in defaults.

use std::path::PathBuf;

use serde::Deserialize;

use crate::output::Format;
use crate::{CliError, FormatArg, GlobalArgs};

pub const WORKERS_ENV: &str = "CHARPOLY_WORKERS";

/// TOML mirror of the command line flags. Unknown keys are rejected so typos
/// surface as usage errors instead of silently using defaults.
#[derive(Debug, Default, Deserialize)]
#[serde(rename_all = "kebab-case", deny_unknown_fields)]
struct FileConfig {
    seed: Option<u64>,
    workers: Option<usize>,
    format: Option<String>,
    out: Option<PathBuf>,
    no_header: Option<bool>,
    samples: Option<u64>,
    significance: Option<f64>,
    z_threshold: Option<f64>,
}

pub struct Settings {
    pub seed: u64,
    pub workers: usize,
    pub format: Format,
    pub out: Option<PathBuf>,
    pub no_header: bool,
    /// Config-file sample count; commands fall back to their own defaults.
    pub samples: Option<u64>,
    pub significance: f64,
    pub z_threshold: f64,
}

pub fn resolve(globals: &GlobalArgs) -> Result<Settings, CliError> {
    let file = match &globals.config {
        Some(path) => {
            let text = std::fs::read_to_string(path)
                .map_err(|e| CliError::Io { path: path.display().to_string(), source: e })?;
            toml::from_str::<FileConfig>(&text)
                .map_err(|e| CliError::Usage(format!("config file {}: {e}", path.display())))?
        }
        None => FileConfig::default(),
    };

    let env_workers = match std::env::var(WORKERS_ENV) {
        Ok(v) => match v.trim().parse::<usize>() {
            Ok(w) if w >= 1 => Some(w),
            _ => {
                return Err(CliError::Usage(format!(
                    "{WORKERS_ENV}={v} is not a positive integer"
                )))
            }
        },
        Err(_) => None,
    };

    let format = match globals.format {
        Some(FormatArg::Jsonl) => Format::Jsonl,
        Some(FormatArg::Csv) => Format::Csv,
        None => match file.format.as_deref() {
            None | Some("jsonl") => Format::Jsonl,
            Some("csv") => Format::Csv,
            Some(other) => {
                return Err(CliError::Usage(format!(
                    "config file format = {other:?}; expected \"jsonl\" or \"csv\""
                )))
            }
        },
    };

    Ok(Settings {
        seed: globals.seed.or(file.seed).unwrap_or(7),
        workers: globals.workers.or(file.workers).or(env_workers).unwrap_or(1).max(1),
        format,
        out: globals.out.clone().or(file.out),
        no_header: globals.no_header || file.no_header.unwrap_or(false),
        samples: file.samples,
        significance: file.significance.unwrap_or(1e-3),
        z_threshold: file.z_threshold.unwrap_or(5.0),
    })
}
