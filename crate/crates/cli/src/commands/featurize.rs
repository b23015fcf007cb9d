use anyhow::{Context, Result};
use causeway_core::features::featurize_all;
use causeway_core::graph::TransitionNetwork;
use serde_json::json;

use super::{ensure_output_dir, write_text};
use crate::manifest::ManifestBuilder;
use crate::FeaturizeArgs;

pub fn run(args: FeaturizeArgs) -> Result<()> {
    ensure_output_dir(&args.output)?;
    let mut manifest = ManifestBuilder::new(
        "featurize",
        0,
        json!({
            "network": args.network.display().to_string(),
            "min_edge_count": args.min_edge_count,
        }),
    );
    manifest.add_input(&args.network)?;

    let text = std::fs::read_to_string(&args.network)
        .with_context(|| format!("reading {}", args.network.display()))?;
    let net = TransitionNetwork::from_json(&text)?;
    let matrix = featurize_all(&net, args.min_edge_count)?;

    let mut buf = Vec::new();
    matrix.write_csv(&mut buf)?;
    write_text(&args.output.join("features.csv"), &String::from_utf8(buf)?)?;
    println!(
        "featurize: {} edges x {} features (schema {})",
        matrix.n_rows(),
        matrix.n_columns(),
        matrix.schema_hash()
    );
    manifest.write(&args.output)?;
    Ok(())
}
