use anyhow::{Context, Result};
use causeway_core::graph::TransitionNetwork;
use causeway_core::ingest::{read_codes_csv, read_transitions_csv};
use serde_json::json;

use super::{ensure_output_dir, open_input, write_text};
use crate::manifest::ManifestBuilder;
use crate::BuildArgs;

pub fn run(args: BuildArgs) -> Result<()> {
    ensure_output_dir(&args.output)?;
    let mut manifest = ManifestBuilder::new(
        "build",
        0,
        json!({
            "transitions": args.transitions.display().to_string(),
            "codes": args.codes.display().to_string(),
        }),
    );
    manifest.add_input(&args.transitions)?;
    manifest.add_input(&args.codes)?;

    let transitions = read_transitions_csv(open_input(&args.transitions)?)
        .with_context(|| format!("parsing {}", args.transitions.display()))?;
    let freqs = read_codes_csv(open_input(&args.codes)?)
        .with_context(|| format!("parsing {}", args.codes.display()))?;
    let net = TransitionNetwork::build_from_frequencies(&transitions, freqs)?;

    write_text(&args.output.join("network.json"), &net.to_json())?;
    println!(
        "build: {} nodes, {} edges, {} transitions",
        net.nodes.len(),
        net.edges.len(),
        net.total_transitions
    );
    manifest.write(&args.output)?;
    Ok(())
}
