//! Subcommand implementations.

pub mod build;
pub mod cluster;
pub mod evaluate;
pub mod experiment;
pub mod featurize;
pub mod importance;
pub mod ingest;
pub mod predict;
pub mod synth;
pub mod train;

use std::collections::BTreeMap;
use std::fs::File;
use std::path::Path;

use anyhow::{Context, Result};
use causeway_core::features::FEATURE_SCHEMA_VERSION;
use causeway_core::matrix::{EdgeLabel, FeatureMatrix, TaskMode};
use causeway_core::model::Model;

pub fn ensure_output_dir(path: &Path) -> Result<()> {
    std::fs::create_dir_all(path)
        .with_context(|| format!("creating output directory {}", path.display()))
}

pub fn open_input(path: &Path) -> Result<File> {
    File::open(path).with_context(|| format!("opening {}", path.display()))
}

pub fn write_text(path: &Path, text: &str) -> Result<()> {
    std::fs::write(path, text).with_context(|| format!("writing {}", path.display()))
}

pub fn read_feature_matrix(path: &Path) -> Result<FeatureMatrix> {
    let file = open_input(path)?;
    let matrix = FeatureMatrix::read_csv(file, FEATURE_SCHEMA_VERSION)
        .with_context(|| format!("parsing feature matrix {}", path.display()))?;
    Ok(matrix)
}

pub fn read_labels(path: &Path) -> Result<BTreeMap<(String, String), EdgeLabel>> {
    let file = open_input(path)?;
    causeway_core::matrix::read_labels_csv(file)
        .with_context(|| format!("parsing labels {}", path.display()))
}

pub fn read_model(path: &Path) -> Result<Model> {
    let text = std::fs::read_to_string(path)
        .with_context(|| format!("reading model {}", path.display()))?;
    Model::from_json(&text).with_context(|| format!("parsing model {}", path.display()))
}

pub fn parse_mode(mode: &str) -> Result<TaskMode> {
    mode.parse::<TaskMode>()
        .with_context(|| format!("unknown task mode `{mode}`"))
}

pub fn parse_features_per_split(
    raw: &str,
) -> Result<causeway_core::model::FeaturesPerSplit> {
    use causeway_core::model::FeaturesPerSplit;
    if raw == "sqrt" {
        return Ok(FeaturesPerSplit::SQRT);
    }
    let k: usize = raw
        .parse()
        .map_err(|_| causeway_core::model::ModelError::InvalidConfig(format!(
            "features-per-split must be `sqrt` or a positive integer, got `{raw}`"
        )))?;
    Ok(FeaturesPerSplit::Fixed(k))
}

/// predictions.csv (`source,target,measure`)
pub fn write_predictions(
    path: &Path,
    keys: &[(String, String)],
    measures: &[f64],
) -> Result<()> {
    let mut out = String::from("source,target,measure\n");
    for (key, m) in keys.iter().zip(measures) {
        out.push_str(&format!("{},{},{}\n", key.0, key.1, m));
    }
    write_text(path, &out)
}

pub fn read_predictions(path: &Path) -> Result<Vec<((String, String), f64)>> {
    let text = std::fs::read_to_string(path)
        .with_context(|| format!("reading predictions {}", path.display()))?;
    let mut out = Vec::new();
    for (i, line) in text.lines().enumerate() {
        if i == 0 {
            if line.trim() != "source,target,measure" {
                anyhow::bail!("bad predictions header: {line}");
            }
            continue;
        }
        if line.trim().is_empty() {
            continue;
        }
        let parts: Vec<&str> = line.split(',').collect();
        if parts.len() != 3 {
            anyhow::bail!("bad predictions row {i}: {line}");
        }
        let measure: f64 = parts[2]
            .parse()
            .with_context(|| format!("bad measure on row {i}"))?;
        out.push(((parts[0].to_string(), parts[1].to_string()), measure));
    }
    Ok(out)
}
