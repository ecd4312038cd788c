//! JSON file formats for datasets and states.
//!
//! Complex numbers are `[re, im]` pairs. Doubles go through serde_json's
//! shortest round-trip formatting, so write-then-read is bit-exact.

use std::collections::BTreeMap;
use std::path::Path;

use mlq_core::linalg::c;
use mlq_core::{CVector, ComplexMatrix, Dataset, DensityMatrix, Effect, Record};
use serde::{Deserialize, Serialize};

use crate::CliError;

pub const SCHEMA_VERSION: &str = "1";
/// Effect vectors must be unit norm to this tolerance on load.
pub const EFFECT_NORM_TOL: f64 = 1e-10;
/// Hermiticity, trace and positivity tolerance for loaded states.
pub const STATE_LOAD_TOL: f64 = 1e-8;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RecordEntry {
    pub effect: Vec<[f64; 2]>,
    pub label: String,
    pub count: u64,
    /// Index of the measurement setting; 0 when absent.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub observable: Option<usize>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DatasetFile {
    pub schema_version: String,
    pub dim: usize,
    pub records: Vec<RecordEntry>,
    pub total: u64,
    /// Shots spent on each setting, when they differ from the recorded counts.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub observable_shots: Option<Vec<u64>>,
    #[serde(default)]
    pub metadata: BTreeMap<String, String>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct StateFile {
    pub schema_version: String,
    pub dim: usize,
    pub matrix: Vec<Vec<[f64; 2]>>,
}

fn schema(msg: impl Into<String>) -> CliError {
    CliError::Schema(msg.into())
}

fn check_version(version: &str) -> Result<(), CliError> {
    if version != SCHEMA_VERSION {
        return Err(schema(format!("unsupported schema_version {version:?}")));
    }
    Ok(())
}

impl DatasetFile {
    pub fn from_dataset(data: &Dataset, metadata: BTreeMap<String, String>) -> Self {
        let records = data
            .records()
            .iter()
            .map(|r| RecordEntry {
                effect: r.effect.vector().iter().map(|z| [z.re, z.im]).collect(),
                label: r.effect.label().to_string(),
                count: r.count,
                observable: Some(r.observable),
            })
            .collect();
        Self {
            schema_version: SCHEMA_VERSION.to_string(),
            dim: data.dim(),
            records,
            total: data.total(),
            observable_shots: Some(data.observable_shots().to_vec()),
            metadata,
        }
    }

    pub fn to_dataset(&self) -> Result<Dataset, CliError> {
        check_version(&self.schema_version)?;
        let mut records = Vec::with_capacity(self.records.len());
        for (i, entry) in self.records.iter().enumerate() {
            if entry.effect.len() != self.dim {
                return Err(schema(format!(
                    "record {i}: effect has {} entries, dim is {}",
                    entry.effect.len(),
                    self.dim
                )));
            }
            let vector =
                CVector::from_iterator(self.dim, entry.effect.iter().map(|p| c(p[0], p[1])));
            let norm = vector.iter().map(|z| z.norm_sqr()).sum::<f64>().sqrt();
            if (norm - 1.0).abs() > EFFECT_NORM_TOL {
                return Err(schema(format!("record {i}: effect norm {norm} is not 1")));
            }
            let effect = Effect::new(vector, entry.label.clone())
                .map_err(|e| schema(format!("record {i}: {e}")))?;
            records.push(Record {
                effect,
                count: entry.count,
                observable: entry.observable.unwrap_or(0),
            });
        }
        let sum: u64 = records.iter().map(|r| r.count).sum();
        if sum != self.total {
            return Err(schema(format!(
                "counts sum to {sum}, total says {}",
                self.total
            )));
        }
        Dataset::new(records, self.observable_shots.clone()).map_err(|e| schema(e.to_string()))
    }
}

impl StateFile {
    pub fn from_state(state: &DensityMatrix) -> Self {
        let rows = state
            .matrix()
            .to_rows()
            .into_iter()
            .map(|row| row.into_iter().map(|z| [z.re, z.im]).collect())
            .collect();
        Self {
            schema_version: SCHEMA_VERSION.to_string(),
            dim: state.dim(),
            matrix: rows,
        }
    }

    pub fn to_state(&self) -> Result<DensityMatrix, CliError> {
        check_version(&self.schema_version)?;
        if self.dim == 0
            || self.matrix.len() != self.dim
            || self.matrix.iter().any(|r| r.len() != self.dim)
        {
            return Err(schema(format!("matrix is not {0}x{0}", self.dim)));
        }
        let rows: Vec<Vec<_>> = self
            .matrix
            .iter()
            .map(|row| row.iter().map(|p| c(p[0], p[1])).collect())
            .collect();
        let m = ComplexMatrix::from_rows(&rows).map_err(|e| schema(e.to_string()))?;
        DensityMatrix::with_tolerance(m, STATE_LOAD_TOL).map_err(|e| schema(e.to_string()))
    }
}

pub fn read_json<T: for<'de> Deserialize<'de>>(path: &Path) -> Result<T, CliError> {
    let text = std::fs::read_to_string(path)
        .map_err(|e| CliError::Io(format!("{}: {e}", path.display())))?;
    serde_json::from_str(&text).map_err(|e| schema(format!("{}: {e}", path.display())))
}

pub fn to_json<T: Serialize>(value: &T) -> String {
    let mut text = serde_json::to_string_pretty(value).expect("serializable");
    text.push('\n');
    text
}

pub fn write_text(path: &Path, text: &str) -> Result<(), CliError> {
    std::fs::write(path, text).map_err(|e| CliError::Io(format!("{}: {e}", path.display())))
}

pub fn load_dataset(path: &Path) -> Result<Dataset, CliError> {
    read_json::<DatasetFile>(path)?.to_dataset()
}

pub fn load_state(path: &Path) -> Result<DensityMatrix, CliError> {
    read_json::<StateFile>(path)?.to_state()
}
