//! On-disk JSON formats: matrices and history families.
//!
//! Complex numbers are `[re, im]` pairs everywhere. Matrices are row-major.

use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};

use histories_core::histories::HistoryFamily;
use histories_core::linalg::{Ket, Operator, C64};
use histories_core::spectral::ProjectiveDecomposition;
use histories_core::tol;

use crate::error::CliError;

/// `{"dim": n, "entries": [[[re, im], …], …]}`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct MatrixFile {
    pub dim: usize,
    pub entries: Vec<Vec<[f64; 2]>>,
}

impl MatrixFile {
    pub fn from_operator(op: &Operator) -> Self {
        let n = op.dim();
        let entries = (0..n)
            .map(|i| (0..n).map(|j| [op[(i, j)].re, op[(i, j)].im]).collect())
            .collect();
        MatrixFile { dim: n, entries }
    }

    /// Checks the shape and converts. `field` prefixes error messages.
    pub fn to_operator(&self, field: &str) -> Result<Operator, CliError> {
        if self.dim == 0 {
            return Err(CliError::input(field, "dim must be positive"));
        }
        if self.entries.len() != self.dim {
            return Err(CliError::input(
                format!("{field}.entries"),
                format!("expected {} rows, found {}", self.dim, self.entries.len()),
            ));
        }
        let mut flat = Vec::with_capacity(self.dim * self.dim);
        for (i, row) in self.entries.iter().enumerate() {
            if row.len() != self.dim {
                return Err(CliError::input(
                    format!("{field}.entries[{i}]"),
                    format!("expected {} columns, found {}", self.dim, row.len()),
                ));
            }
            for (j, [re, im]) in row.iter().enumerate() {
                if !re.is_finite() || !im.is_finite() {
                    return Err(CliError::input(
                        format!("{field}.entries[{i}][{j}]"),
                        "entries must be finite",
                    ));
                }
                flat.push(C64::new(*re, *im));
            }
        }
        Operator::new(self.dim, flat).map_err(|e| CliError::input(field, e.to_string()))
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("matrix files contain only finite numbers")
    }

    pub fn parse(text: &str, origin: &str) -> Result<Self, CliError> {
        serde_json::from_str(text).map_err(|e| CliError::input(origin, e.to_string()))
    }
}

/// Reads a file and remembers every byte for the inputs digest.
#[derive(Debug, Default)]
pub struct InputLog {
    entries: Vec<(String, Vec<u8>)>,
}

impl InputLog {
    pub fn read(&mut self, path: &Path) -> Result<String, CliError> {
        let bytes = std::fs::read(path)
            .map_err(|e| CliError::input(path.display().to_string(), e.to_string()))?;
        let text = String::from_utf8(bytes.clone())
            .map_err(|_| CliError::input(path.display().to_string(), "file is not UTF-8"))?;
        let name = path
            .file_name()
            .map(|n| n.to_string_lossy().into_owned())
            .unwrap_or_default();
        self.entries.push((name, bytes));
        Ok(text)
    }

    pub fn record(&mut self, name: &str, value: &str) {
        self.entries
            .push((name.to_string(), value.as_bytes().to_vec()));
    }

    pub fn entries(&self) -> &[(String, Vec<u8>)] {
        &self.entries
    }

    pub fn load_matrix(&mut self, path: &Path) -> Result<Operator, CliError> {
        let text = self.read(path)?;
        let origin = path.display().to_string();
        MatrixFile::parse(&text, &origin)?.to_operator(&origin)
    }
}

/// A propagator or projector: inline, the literal `"identity"`, or a path
/// to a matrix file relative to the family file.
#[derive(Debug, Clone, Serialize)]
#[serde(untagged)]
pub enum MatrixRef {
    Inline(MatrixFile),
    Named(String),
}

impl<'de> Deserialize<'de> for MatrixRef {
    fn deserialize<D: serde::Deserializer<'de>>(d: D) -> Result<Self, D::Error> {
        use serde::de::Error;
        match serde_json::Value::deserialize(d)? {
            serde_json::Value::String(s) => Ok(MatrixRef::Named(s)),
            other => MatrixFile::deserialize(other)
                .map(MatrixRef::Inline)
                .map_err(|e| D::Error::custom(format!("matrix: {e}"))),
        }
    }
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct DecompositionEntry {
    pub labels: Vec<String>,
    pub projectors: Vec<MatrixRef>,
}

/// `{"initial_state", "times", "propagators", "decompositions"}`.
///
/// `times` holds `n + 1` labels; `propagators[k]` evolves from `times[k]` to
/// `times[k+1]`, where `decompositions[k]` applies.
#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct FamilyFile {
    pub initial_state: Vec<[f64; 2]>,
    pub times: Vec<String>,
    pub propagators: Vec<MatrixRef>,
    pub decompositions: Vec<DecompositionEntry>,
}

impl FamilyFile {
    pub fn parse(text: &str, origin: &str) -> Result<Self, CliError> {
        serde_json::from_str(text).map_err(|e| CliError::input(origin, e.to_string()))
    }

    /// Validates every part and builds the family. Matrix paths resolve
    /// against `base`.
    pub fn build(&self, base: &Path, log: &mut InputLog) -> Result<HistoryFamily, CliError> {
        let dim = self.initial_state.len();
        if dim == 0 {
            return Err(CliError::input("initial_state", "state is empty"));
        }
        if let Some(k) = self
            .initial_state
            .iter()
            .position(|[re, im]| !re.is_finite() || !im.is_finite())
        {
            return Err(CliError::input(
                format!("initial_state[{k}]"),
                "amplitudes must be finite",
            ));
        }
        let psi = Ket::new(
            self.initial_state
                .iter()
                .map(|[re, im]| C64::new(*re, *im))
                .collect(),
        )
        .map_err(|e| CliError::input("initial_state", e.to_string()))?;
        if (psi.norm_sqr() - 1.0).abs() > tol::NORM {
            return Err(CliError::input(
                "initial_state",
                format!("state is not normalized (|psi|^2 = {})", psi.norm_sqr()),
            ));
        }
        if self.times.len() < 2 {
            return Err(CliError::input("times", "need at least two time labels"));
        }
        let steps = self.times.len() - 1;
        for (field, found) in [
            ("propagators", self.propagators.len()),
            ("decompositions", self.decompositions.len()),
        ] {
            if found != steps {
                return Err(CliError::input(
                    field,
                    format!(
                        "expected {steps} entries for {} time labels, found {found}",
                        steps + 1
                    ),
                ));
            }
        }
        for (k, t) in self.times.iter().enumerate() {
            if t.is_empty() {
                return Err(CliError::input(format!("times[{k}]"), "empty time label"));
            }
            if self.times[..k].contains(t) {
                return Err(CliError::input(
                    format!("times[{k}]"),
                    format!("duplicate time label {t}"),
                ));
            }
        }

        let mut propagators = Vec::with_capacity(steps);
        for (k, r) in self.propagators.iter().enumerate() {
            let field = format!(
                "propagators[{k}] ({} -> {})",
                self.times[k],
                self.times[k + 1]
            );
            let u = resolve(r, dim, base, &field, log)?;
            let residual = u.unitarity_residual();
            if residual > tol::STRUCT {
                return Err(CliError::input(
                    field,
                    format!("not unitary (residual {residual:e})"),
                ));
            }
            propagators.push(u);
        }

        let mut decompositions = Vec::with_capacity(steps);
        for (k, d) in self.decompositions.iter().enumerate() {
            let time = &self.times[k + 1];
            let field = format!("decompositions[{k}] (time {time})");
            let projectors = d
                .projectors
                .iter()
                .enumerate()
                .map(|(j, r)| resolve(r, dim, base, &format!("{field}.projectors[{j}]"), log))
                .collect::<Result<Vec<_>, _>>()?;
            let dec = ProjectiveDecomposition::new(d.labels.clone(), projectors)
                .map_err(|e| CliError::input(&field, e.to_string()))?;
            decompositions.push(dec);
        }

        HistoryFamily::new(psi, self.times.clone(), propagators, decompositions)
            .map_err(|e| CliError::input("family", e.to_string()))
    }
}

fn resolve(
    r: &MatrixRef,
    dim: usize,
    base: &Path,
    field: &str,
    log: &mut InputLog,
) -> Result<Operator, CliError> {
    let op = match r {
        MatrixRef::Inline(m) => m.to_operator(field)?,
        MatrixRef::Named(name) if name == "identity" => Operator::identity(dim),
        MatrixRef::Named(name) => {
            let path: PathBuf = base.join(name);
            let text = log.read(&path)?;
            MatrixFile::parse(&text, field)?.to_operator(field)?
        }
    };
    if op.dim() != dim {
        return Err(CliError::input(
            field,
            format!(
                "dimension {} does not match the initial state dimension {dim}",
                op.dim()
            ),
        ));
    }
    Ok(op)
}

/// Serializes a family to the file format with every matrix inline.
pub fn family_to_file(f: &HistoryFamily) -> FamilyFile {
    FamilyFile {
        initial_state: f
            .initial_state()
            .amplitudes()
            .iter()
            .map(|z| [z.re, z.im])
            .collect(),
        times: f.times().to_vec(),
        propagators: f
            .propagators()
            .iter()
            .map(|u| MatrixRef::Inline(MatrixFile::from_operator(u)))
            .collect(),
        decompositions: f
            .decompositions()
            .iter()
            .map(|d| DecompositionEntry {
                labels: d.labels().to_vec(),
                projectors: d
                    .projectors()
                    .iter()
                    .map(|p| MatrixRef::Inline(MatrixFile::from_operator(p)))
                    .collect(),
            })
            .collect(),
    }
}
