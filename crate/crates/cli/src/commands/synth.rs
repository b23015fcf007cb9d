use anyhow::{Context, Result};
use causeway_core::ingest::write_events_csv;
use causeway_core::matrix::write_labels_csv;
use causeway_core::synth::{generate, PlantedNetworkSpec};
use serde_json::json;

use super::{ensure_output_dir, write_text};
use crate::manifest::ManifestBuilder;
use crate::SynthArgs;

pub fn run(args: SynthArgs) -> Result<()> {
    ensure_output_dir(&args.output)?;
    let text = std::fs::read_to_string(&args.config)
        .with_context(|| format!("reading {}", args.config.display()))?;
    let mut spec = PlantedNetworkSpec::from_toml(&text)?;
    if let Some(seed) = args.seed {
        spec.rng_seed = seed;
    }
    let mut manifest = ManifestBuilder::new(
        "synth",
        spec.rng_seed,
        json!({ "config": serde_json::to_value(&spec)? }),
    );
    manifest.add_input(&args.config)?;

    let (dataset, truth) = generate(&spec)?;

    let mut buf = Vec::new();
    write_events_csv(&mut buf, &dataset)?;
    write_text(&args.output.join("events.csv"), &String::from_utf8(buf)?)?;
    let mut buf = Vec::new();
    write_labels_csv(&mut buf, truth.planted())?;
    write_text(&args.output.join("truth.csv"), &String::from_utf8(buf)?)?;

    println!(
        "synth: {} entities, {} records, {} planted pairs",
        dataset.n_entities(),
        dataset.n_records,
        truth.planted().len() / 2
    );
    manifest.write(&args.output)?;
    Ok(())
}
