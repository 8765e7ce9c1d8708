use std::io::Write;
use std::path::Path;

use emc_core::Tolerances;
use serde::Serialize;
use tempfile::NamedTempFile;

use crate::config::RunConfig;
use crate::Failure;

pub const SCHEMA: &str = "emc/1";

#[derive(Debug, Serialize)]
pub struct Envelope<'a, T: Serialize> {
    pub schema: &'static str,
    pub command: &'static str,
    pub config_hash: String,
    pub tolerances: &'a Tolerances,
    /// Per-row deficiency of the matrix the run was based on.
    pub deficiencies: &'a [f64],
    pub result: T,
}

/// Files produced by one run, written together at the end.
#[derive(Debug, Default)]
pub struct Outputs {
    pub report: Vec<u8>,
    pub extra: Vec<(String, Vec<u8>)>,
}

impl Outputs {
    pub fn new<T: Serialize>(config: &RunConfig, deficiencies: &[f64], result: T) -> Result<Self, Failure> {
        let envelope = Envelope {
            schema: SCHEMA,
            command: config.command,
            config_hash: config.hash(),
            tolerances: &config.tolerances,
            deficiencies,
            result,
        };
        let mut report = serde_json::to_vec_pretty(&envelope).map_err(|e| Failure::validation(e.to_string()))?;
        report.push(b'\n');
        Ok(Outputs { report, extra: Vec::new() })
    }

    pub fn add(&mut self, name: impl Into<String>, bytes: impl Into<Vec<u8>>) {
        self.extra.push((name.into(), bytes.into()));
    }

    /// Writes `<command>.json` and the extra files into `dir`, or the report
    /// alone to stdout.
    pub fn emit(&self, command: &str, dir: Option<&Path>) -> Result<(), Failure> {
        match dir {
            Some(dir) => {
                write_atomic(dir, &format!("{command}.json"), &self.report)?;
                for (name, bytes) in &self.extra {
                    write_atomic(dir, name, bytes)?;
                }
                Ok(())
            }
            None => std::io::stdout().write_all(&self.report).map_err(|e| Failure::validation(format!("stdout: {e}"))),
        }
    }
}

/// Temp file in the target directory, then rename.
pub fn write_atomic(dir: &Path, name: &str, bytes: &[u8]) -> Result<(), Failure> {
    let io = |e: std::io::Error| Failure::validation(format!("{}: {e}", dir.join(name).display()));
    std::fs::create_dir_all(dir).map_err(io)?;
    let mut tmp = NamedTempFile::new_in(dir).map_err(io)?;
    tmp.write_all(bytes).map_err(io)?;
    tmp.as_file().sync_all().map_err(io)?;
    tmp.persist(dir.join(name)).map_err(|e| io(e.error))?;
    Ok(())
}
