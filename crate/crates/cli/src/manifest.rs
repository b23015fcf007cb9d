//! Per-run manifest: enough to reproduce any output directory bit for bit.

use std::collections::BTreeMap;
use std::path::{Path, PathBuf};
use std::time::Instant;

use anyhow::{Context, Result};
use serde::Serialize;
use sha2::{Digest, Sha256};

#[derive(Debug, Serialize)]
pub struct InputDigest {
    pub path: String,
    pub sha256: String,
}

#[derive(Debug, Serialize)]
pub struct RunManifest {
    pub tool_version: String,
    pub command: String,
    pub seed: u64,
    pub feature_schema_version: String,
    pub config: serde_json::Value,
    pub inputs: Vec<InputDigest>,
    pub timings_ms: BTreeMap<String, u128>,
}

pub struct ManifestBuilder {
    command: String,
    seed: u64,
    config: serde_json::Value,
    inputs: Vec<InputDigest>,
    timings: BTreeMap<String, u128>,
    started: Instant,
}

impl ManifestBuilder {
    pub fn new(command: &str, seed: u64, config: serde_json::Value) -> Self {
        ManifestBuilder {
            command: command.to_string(),
            seed,
            config,
            inputs: Vec::new(),
            timings: BTreeMap::new(),
            started: Instant::now(),
        }
    }

    pub fn add_input(&mut self, path: &Path) -> Result<()> {
        let bytes = std::fs::read(path)
            .with_context(|| format!("reading input {}", path.display()))?;
        let mut hasher = Sha256::new();
        hasher.update(&bytes);
        let digest: String = hasher
            .finalize()
            .iter()
            .map(|b| format!("{b:02x}"))
            .collect();
        self.inputs.push(InputDigest {
            path: path.display().to_string(),
            sha256: digest,
        });
        Ok(())
    }

    pub fn record_timing(&mut self, stage: &str, ms: u128) {
        self.timings.insert(stage.to_string(), ms);
    }

    /// Write `manifest.json` into the output directory.
    pub fn write(mut self, output: &Path) -> Result<PathBuf> {
        self.timings
            .insert("total".to_string(), self.started.elapsed().as_millis());
        let manifest = RunManifest {
            tool_version: env!("CARGO_PKG_VERSION").to_string(),
            command: self.command,
            seed: self.seed,
            feature_schema_version: causeway_core::features::FEATURE_SCHEMA_VERSION.to_string(),
            config: self.config,
            inputs: self.inputs,
            timings_ms: self.timings,
        };
        let path = output.join("manifest.json");
        std::fs::write(&path, serde_json::to_string_pretty(&manifest)?)
            .with_context(|| format!("writing {}", path.display()))?;
        Ok(path)
    }
}
