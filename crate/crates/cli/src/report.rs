//! The JSON report every subcommand writes.

use std::io::Write;
use std::path::Path;

use serde::Serialize;
use sha2::{Digest, Sha256};

use crate::error::CliError;
use crate::files::InputLog;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub enum Relation {
    #[serde(rename = "<=")]
    AtMost,
    #[serde(rename = ">")]
    Above,
}

/// One numeric check. A missing value always fails.
#[derive(Debug, Clone, Serialize)]
pub struct Check {
    pub name: String,
    pub value: Option<f64>,
    pub tolerance: f64,
    pub relation: Relation,
    pub pass: bool,
}

impl Check {
    pub fn at_most(name: impl Into<String>, value: Option<f64>, tolerance: f64) -> Self {
        Self::new(name.into(), value, tolerance, Relation::AtMost)
    }

    pub fn above(name: impl Into<String>, value: Option<f64>, threshold: f64) -> Self {
        Self::new(name.into(), value, threshold, Relation::Above)
    }

    fn new(name: String, value: Option<f64>, tolerance: f64, relation: Relation) -> Self {
        let pass = match (value, relation) {
            (Some(v), Relation::AtMost) => v <= tolerance,
            (Some(v), Relation::Above) => v > tolerance,
            (None, _) => false,
        };
        Check {
            name,
            value,
            tolerance,
            relation,
            pass,
        }
    }
}

#[derive(Debug, Clone, Serialize)]
pub struct Report {
    pub tool_version: String,
    pub seed: Option<u64>,
    pub inputs_digest: String,
    pub results: serde_json::Value,
    pub checks: Vec<Check>,
}

impl Report {
    pub fn new(
        seed: Option<u64>,
        inputs: &InputLog,
        results: serde_json::Value,
        checks: Vec<Check>,
    ) -> Self {
        Report {
            tool_version: env!("CARGO_PKG_VERSION").to_string(),
            seed,
            inputs_digest: digest(inputs),
            results,
            checks,
        }
    }

    pub fn passed(&self) -> bool {
        self.checks.iter().all(|c| c.pass)
    }

    pub fn failures(&self) -> impl Iterator<Item = &Check> {
        self.checks.iter().filter(|c| !c.pass)
    }

    pub fn to_json(&self) -> String {
        let mut s = serde_json::to_string_pretty(self).expect("reports serialize");
        s.push('\n');
        s
    }
}

/// SHA-256 over each input's name and bytes, length-prefixed so that
/// boundaries cannot shift.
pub fn digest(inputs: &InputLog) -> String {
    let mut h = Sha256::new();
    for (name, bytes) in inputs.entries() {
        for part in [name.as_bytes(), bytes.as_slice()] {
            h.update((part.len() as u64).to_le_bytes());
            h.update(part);
        }
    }
    hex::encode(h.finalize())
}

/// Writes `text` to `out`, or to standard output for `-`. Files are
/// replaced atomically through a temporary file in the same directory.
pub fn write_output(out: &str, text: &str) -> Result<(), CliError> {
    let fail = |e: std::io::Error| CliError::Output {
        path: out.to_string(),
        message: e.to_string(),
    };
    if out == "-" {
        let mut stdout = std::io::stdout().lock();
        return stdout
            .write_all(text.as_bytes())
            .and_then(|_| stdout.flush())
            .map_err(fail);
    }
    let path = Path::new(out);
    let dir = match path.parent() {
        Some(p) if !p.as_os_str().is_empty() => p,
        _ => Path::new("."),
    };
    let mut tmp = tempfile::NamedTempFile::new_in(dir).map_err(fail)?;
    tmp.write_all(text.as_bytes()).map_err(fail)?;
    tmp.as_file().sync_all().map_err(fail)?;
    #[cfg(unix)]
    {
        use std::os::unix::fs::PermissionsExt;
        tmp.as_file()
            .set_permissions(std::fs::Permissions::from_mode(0o644))
            .map_err(fail)?;
    }
    tmp.persist(path).map_err(|e| fail(e.error))?;
    Ok(())
}
