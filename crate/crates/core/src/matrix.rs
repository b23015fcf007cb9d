//! The named-column feature matrix, edge labels, and their file formats.
//!
//! A matrix row is keyed by its (source, target) edge; the column list plus
//! schema version hash to a stable identifier that models embed and check at
//! prediction time.

use std::collections::BTreeMap;
use std::io::{Read, Write};

use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};
use thiserror::Error;

#[derive(Debug, Error)]
pub enum MatrixError {
    #[error("i/o error: {0}")]
    Io(#[from] std::io::Error),
    #[error("malformed matrix file: {0}")]
    Malformed(String),
    #[error("row {0} has {1} values, expected {2}")]
    RowWidth(usize, usize, usize),
    #[error("unknown edge label `{0}`")]
    UnknownLabel(String),
    #[error("labels missing for {0} matrix rows (first: {1}->{2})")]
    MissingLabels(usize, String, String),
}

/// Ground-truth class of one directed edge.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Serialize, Deserialize, Hash)]
#[serde(rename_all = "snake_case")]
pub enum EdgeLabel {
    Causal,
    ReverseCausal,
    Random,
    EarlyEffectCommonCause,
    Coexistence,
}

impl EdgeLabel {
    pub fn as_str(&self) -> &'static str {
        match self {
            EdgeLabel::Causal => "causal",
            EdgeLabel::ReverseCausal => "reverse_causal",
            EdgeLabel::Random => "random",
            EdgeLabel::EarlyEffectCommonCause => "early_effect_common_cause",
            EdgeLabel::Coexistence => "coexistence",
        }
    }
}

impl std::str::FromStr for EdgeLabel {
    type Err = MatrixError;
    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s {
            "causal" => Ok(EdgeLabel::Causal),
            "reverse_causal" => Ok(EdgeLabel::ReverseCausal),
            "random" => Ok(EdgeLabel::Random),
            "early_effect_common_cause" => Ok(EdgeLabel::EarlyEffectCommonCause),
            "coexistence" => Ok(EdgeLabel::Coexistence),
            other => Err(MatrixError::UnknownLabel(other.to_string())),
        }
    }
}

impl std::fmt::Display for EdgeLabel {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(self.as_str())
    }
}

/// Binary classification tasks over edge labels.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum TaskMode {
    /// causal (1) vs random (0)
    RandomVsCausal,
    /// causal (1) vs reverse_causal (0)
    Direction,
    /// causal or reverse_causal (1) vs random (0)
    Mixed,
}

impl TaskMode {
    /// Binary encoding of a label under this task; `None` excludes the row.
    pub fn binary(&self, label: EdgeLabel) -> Option<u8> {
        match (self, label) {
            (TaskMode::RandomVsCausal, EdgeLabel::Causal) => Some(1),
            (TaskMode::RandomVsCausal, EdgeLabel::Random) => Some(0),
            (TaskMode::Direction, EdgeLabel::Causal) => Some(1),
            (TaskMode::Direction, EdgeLabel::ReverseCausal) => Some(0),
            (TaskMode::Mixed, EdgeLabel::Causal | EdgeLabel::ReverseCausal) => Some(1),
            (TaskMode::Mixed, EdgeLabel::Random) => Some(0),
            _ => None,
        }
    }
}

impl std::str::FromStr for TaskMode {
    type Err = MatrixError;
    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s {
            "random_vs_causal" => Ok(TaskMode::RandomVsCausal),
            "direction" => Ok(TaskMode::Direction),
            "mixed" => Ok(TaskMode::Mixed),
            other => Err(MatrixError::UnknownLabel(other.to_string())),
        }
    }
}

/// Feature rows keyed by edge, with a fixed named-column schema.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FeatureMatrix {
    pub schema_version: String,
    pub columns: Vec<String>,
    pub keys: Vec<(String, String)>,
    pub rows: Vec<Vec<f64>>,
}

impl FeatureMatrix {
    pub fn n_rows(&self) -> usize {
        self.rows.len()
    }

    pub fn n_columns(&self) -> usize {
        self.columns.len()
    }

    /// Stable identifier of (schema version, column list).
    pub fn schema_hash(&self) -> String {
        schema_hash(&self.schema_version, &self.columns)
    }

    pub fn column_index(&self, name: &str) -> Option<usize> {
        self.columns.iter().position(|c| c == name)
    }

    /// New matrix with the given rows (indices may repeat).
    pub fn select(&self, indices: &[usize]) -> FeatureMatrix {
        FeatureMatrix {
            schema_version: self.schema_version.clone(),
            columns: self.columns.clone(),
            keys: indices.iter().map(|&i| self.keys[i].clone()).collect(),
            rows: indices.iter().map(|&i| self.rows[i].clone()).collect(),
        }
    }

    pub fn write_csv<W: Write>(&self, writer: W) -> Result<(), MatrixError> {
        let mut w = csv::Writer::from_writer(writer);
        let mut header = vec!["source".to_string(), "target".to_string()];
        header.extend(self.columns.iter().cloned());
        w.write_record(&header).map_err(csv_io)?;
        for (key, row) in self.keys.iter().zip(&self.rows) {
            let mut rec = vec![key.0.clone(), key.1.clone()];
            rec.extend(row.iter().map(|v| v.to_string()));
            w.write_record(&rec).map_err(csv_io)?;
        }
        w.flush()?;
        Ok(())
    }

    pub fn read_csv<R: Read>(reader: R, schema_version: &str) -> Result<FeatureMatrix, MatrixError> {
        let mut r = csv::Reader::from_reader(reader);
        let header = r.headers().map_err(csv_io)?.clone();
        if header.len() < 2 || &header[0] != "source" || &header[1] != "target" {
            return Err(MatrixError::Malformed(
                "expected header starting with source,target".into(),
            ));
        }
        let columns: Vec<String> = header.iter().skip(2).map(|s| s.to_string()).collect();
        let mut keys = Vec::new();
        let mut rows = Vec::new();
        for (i, rec) in r.records().enumerate() {
            let rec = rec.map_err(csv_io)?;
            if rec.len() != columns.len() + 2 {
                return Err(MatrixError::RowWidth(i, rec.len(), columns.len() + 2));
            }
            keys.push((rec[0].to_string(), rec[1].to_string()));
            let row: Result<Vec<f64>, _> = rec.iter().skip(2).map(|v| v.parse::<f64>()).collect();
            rows.push(row.map_err(|e| MatrixError::Malformed(format!("row {i}: {e}")))?);
        }
        Ok(FeatureMatrix {
            schema_version: schema_version.to_string(),
            columns,
            keys,
            rows,
        })
    }
}

pub fn schema_hash(version: &str, columns: &[String]) -> String {
    let mut hasher = Sha256::new();
    hasher.update(version.as_bytes());
    for c in columns {
        hasher.update(b"\n");
        hasher.update(c.as_bytes());
    }
    let digest = hasher.finalize();
    digest.iter().map(|b| format!("{b:02x}")).collect()
}

/// A feature matrix with one ground-truth label per row.
#[derive(Debug, Clone, PartialEq)]
pub struct LabeledEdgeSet {
    pub matrix: FeatureMatrix,
    pub labels: Vec<EdgeLabel>,
}

impl LabeledEdgeSet {
    pub fn new(matrix: FeatureMatrix, labels: Vec<EdgeLabel>) -> Self {
        assert_eq!(matrix.n_rows(), labels.len(), "labels must match rows");
        LabeledEdgeSet { matrix, labels }
    }

    /// Join matrix rows with a label map; every row must be covered.
    pub fn join(
        matrix: FeatureMatrix,
        label_map: &BTreeMap<(String, String), EdgeLabel>,
    ) -> Result<Self, MatrixError> {
        let mut labels = Vec::with_capacity(matrix.n_rows());
        let mut missing = 0usize;
        let mut first: Option<(String, String)> = None;
        for key in &matrix.keys {
            match label_map.get(key) {
                Some(&l) => labels.push(l),
                None => {
                    missing += 1;
                    if first.is_none() {
                        first = Some(key.clone());
                    }
                }
            }
        }
        if missing > 0 {
            let (s, t) = first.unwrap();
            return Err(MatrixError::MissingLabels(missing, s, t));
        }
        Ok(LabeledEdgeSet { matrix, labels })
    }

    pub fn select(&self, indices: &[usize]) -> LabeledEdgeSet {
        LabeledEdgeSet {
            matrix: self.matrix.select(indices),
            labels: indices.iter().map(|&i| self.labels[i]).collect(),
        }
    }

    /// Rows participating in the task, with their binary encodings.
    pub fn binary_view(&self, mode: TaskMode) -> (FeatureMatrix, Vec<u8>) {
        let mut indices = Vec::new();
        let mut y = Vec::new();
        for (i, &label) in self.labels.iter().enumerate() {
            if let Some(bit) = mode.binary(label) {
                indices.push(i);
                y.push(bit);
            }
        }
        (self.matrix.select(&indices), y)
    }

    pub fn class_count(&self, label: EdgeLabel) -> usize {
        self.labels.iter().filter(|&&l| l == label).count()
    }
}

// --- label file format (CSV `source,target,label`) ---

pub fn write_labels_csv<W: Write>(
    writer: W,
    labels: &BTreeMap<(String, String), EdgeLabel>,
) -> Result<(), MatrixError> {
    let mut w = csv::Writer::from_writer(writer);
    w.write_record(["source", "target", "label"]).map_err(csv_io)?;
    for ((s, t), label) in labels {
        w.write_record([s.as_str(), t.as_str(), label.as_str()])
            .map_err(csv_io)?;
    }
    w.flush()?;
    Ok(())
}

pub fn read_labels_csv<R: Read>(
    reader: R,
) -> Result<BTreeMap<(String, String), EdgeLabel>, MatrixError> {
    let mut r = csv::Reader::from_reader(reader);
    let mut out = BTreeMap::new();
    for rec in r.records() {
        let rec = rec.map_err(csv_io)?;
        if rec.len() != 3 {
            return Err(MatrixError::Malformed(format!(
                "label row needs 3 fields, got {}",
                rec.len()
            )));
        }
        out.insert((rec[0].to_string(), rec[1].to_string()), rec[2].parse()?);
    }
    Ok(out)
}

fn csv_io(err: csv::Error) -> MatrixError {
    MatrixError::Malformed(err.to_string())
}
