use anyhow::{Context, Result};
use causeway_core::ingest::{
    extract_transitions, filter_by_edge_count, filter_by_max_interval, parse_events,
    write_codes_csv, write_transitions_csv, InputFormat,
};
use serde_json::json;

use super::{ensure_output_dir, open_input, write_text};
use crate::manifest::ManifestBuilder;
use crate::IngestArgs;

pub fn run(args: IngestArgs) -> Result<()> {
    ensure_output_dir(&args.output)?;
    let format: InputFormat = args.format.parse()?;
    let mut manifest = ManifestBuilder::new(
        "ingest",
        0,
        json!({
            "input": args.input.display().to_string(),
            "format": args.format,
            "min_edge_count": args.min_edge_count,
            "max_interval": args.max_interval,
        }),
    );
    manifest.add_input(&args.input)?;

    let outcome = parse_events(open_input(&args.input)?, format)
        .with_context(|| format!("parsing {}", args.input.display()))?;
    let mut transitions = extract_transitions(&outcome.dataset);
    if let Some(cutoff) = args.max_interval {
        transitions = filter_by_max_interval(&transitions, cutoff);
    }
    if let Some(min) = args.min_edge_count {
        transitions = filter_by_edge_count(&transitions, min);
    }

    let freqs = outcome.dataset.code_frequencies();
    let mut buf = Vec::new();
    write_transitions_csv(&mut buf, &transitions)?;
    write_text(&args.output.join("transitions.csv"), &String::from_utf8(buf)?)?;
    let mut buf = Vec::new();
    write_codes_csv(&mut buf, &freqs)?;
    write_text(&args.output.join("codes.csv"), &String::from_utf8(buf)?)?;

    let summary = json!({
        "entities": outcome.dataset.n_entities(),
        "records": outcome.dataset.n_records,
        "transitions": transitions.len(),
        "distinct_codes": freqs.len(),
        "malformed_lines": outcome.malformed_count,
    });
    write_text(
        &args.output.join("summary.json"),
        &serde_json::to_string_pretty(&summary)?,
    )?;
    println!(
        "ingest: {} entities, {} records, {} transitions, {} distinct codes",
        outcome.dataset.n_entities(),
        outcome.dataset.n_records,
        transitions.len(),
        freqs.len()
    );
    manifest.write(&args.output)?;
    Ok(())
}
