//! Key-value configuration files and the resolved run configuration.
//!
//! A configuration file holds one `key = value` per line, with keys named
//! after the long flags (`input`, `gap-max`, `tol.herm_tol`, ...). Blank
//! lines and lines starting with `#` are ignored.

use std::path::{Path, PathBuf};

use clap::Parser;
use emc_core::Tolerances;
use serde::Serialize;
use sha2::{Digest, Sha256};

use crate::args::{normalize_tol_flags, Command, Mutation, Options};
use crate::Failure;

#[derive(Debug, Parser)]
#[command(name = "config")]
struct ConfigOnly {
    #[command(flatten)]
    options: Options,
}

/// Parses configuration text into options, reusing the flag parser.
pub fn parse_config(text: &str, origin: &Path) -> Result<Options, Failure> {
    let mut argv = vec!["config".to_string()];
    for (n, line) in text.lines().enumerate() {
        let line = line.trim();
        if line.is_empty() || line.starts_with('#') {
            continue;
        }
        let (key, value) = line
            .split_once('=')
            .ok_or_else(|| Failure::validation(format!("{}:{}: expected `key = value`", origin.display(), n + 1)))?;
        let key = key.trim().replace('_', "-");
        let key = match key.strip_prefix("tol.") {
            // tolerance names keep their underscores
            Some(_) => format!("tol.{}", key["tol.".len()..].replace('-', "_")),
            None => key,
        };
        if key == "config" {
            return Err(Failure::validation(format!(
                "{}:{}: nested config files are not supported",
                origin.display(),
                n + 1
            )));
        }
        argv.push(format!("--{key}"));
        argv.push(value.trim().to_string());
    }
    let parsed = ConfigOnly::try_parse_from(normalize_tol_flags(argv))
        .map_err(|e| Failure::validation(format!("{}: {}", origin.display(), e.to_string().trim())))?;
    Ok(parsed.options)
}

pub fn load_config(path: &Path) -> Result<Options, Failure> {
    let text = std::fs::read_to_string(path).map_err(|e| Failure::validation(format!("{}: {e}", path.display())))?;
    parse_config(&text, path)
}

/// Applies `NAME=VALUE` overrides in order.
pub fn tolerances(overrides: &[String]) -> Result<Tolerances, Failure> {
    let mut tol = Tolerances::default();
    for pair in overrides {
        let (name, value) = pair
            .split_once('=')
            .ok_or_else(|| Failure::validation(format!("tolerance override `{pair}`: expected NAME=VALUE")))?;
        tol.set(name.trim(), value)?;
    }
    Ok(tol)
}

/// Everything that determines a run's output, with input files replaced by
/// their contents' digests.
#[derive(Debug, Clone, Serialize)]
pub struct RunConfig {
    pub command: &'static str,
    pub input_sha256: Option<String>,
    pub group_sha256: Option<String>,
    pub phases: Option<String>,
    pub alpha: Option<Vec<f64>>,
    pub k: Option<usize>,
    pub gap_max: Option<usize>,
    pub seed: u64,
    pub word: Option<String>,
    pub a: Option<String>,
    pub b: Option<String>,
    pub mutate: Option<Mutation>,
    pub tolerances: Tolerances,
    #[serde(skip)]
    pub input: Option<(PathBuf, String)>,
    #[serde(skip)]
    pub group: Option<(PathBuf, String)>,
    #[serde(skip)]
    pub out: Option<PathBuf>,
}

fn read_input(path: &Option<PathBuf>) -> Result<Option<(PathBuf, String)>, Failure> {
    path.as_ref()
        .map(|p| {
            std::fs::read_to_string(p)
                .map(|text| (p.clone(), text))
                .map_err(|e| Failure::validation(format!("{}: {e}", p.display())))
        })
        .transpose()
}

fn digest(bytes: &[u8]) -> String {
    hex::encode(Sha256::digest(bytes))
}

/// Phase text: a file's contents if the value names an existing file.
fn read_phases(value: &Option<String>) -> Result<Option<String>, Failure> {
    match value {
        Some(v) if Path::new(v).is_file() => {
            std::fs::read_to_string(v).map(Some).map_err(|e| Failure::validation(format!("{v}: {e}")))
        }
        other => Ok(other.clone()),
    }
}

fn parse_alpha(text: &str) -> Result<Vec<f64>, Failure> {
    text.split(',')
        .map(|t| t.trim().parse::<f64>().map_err(|_| Failure::validation(format!("alpha entry `{t}` is not a number"))))
        .collect()
}

impl RunConfig {
    pub fn resolve(command: Command, options: Options) -> Result<RunConfig, Failure> {
        let options = match &options.config {
            Some(path) => {
                let file = load_config(path)?;
                options.or(file)
            }
            None => options,
        };
        let input = read_input(&options.input)?;
        let group = read_input(&options.group)?;
        Ok(RunConfig {
            command: command.name(),
            input_sha256: input.as_ref().map(|(_, t)| digest(t.as_bytes())),
            group_sha256: group.as_ref().map(|(_, t)| digest(t.as_bytes())),
            phases: read_phases(&options.phases)?,
            alpha: options.alpha.as_deref().map(parse_alpha).transpose()?,
            k: options.k,
            gap_max: options.gap_max,
            seed: options.seed.unwrap_or(0),
            word: options.word,
            a: options.a,
            b: options.b,
            mutate: options.mutate,
            tolerances: tolerances(&options.tol)?,
            input,
            group,
            out: options.out,
        })
    }

    /// SHA-256 of the canonical JSON of this configuration.
    pub fn hash(&self) -> String {
        digest(serde_json::to_string(self).expect("configuration serializes").as_bytes())
    }
}
