use anyhow::{bail, Result};
use causeway_core::matrix::LabeledEdgeSet;
use causeway_core::model::{variable_importance, Model};
use causeway_core::stats::ks_two_sample;
use serde_json::json;

use super::{ensure_output_dir, parse_mode, read_feature_matrix, read_labels, write_text};
use crate::manifest::ManifestBuilder;
use crate::ImportanceArgs;

const HISTOGRAM_BINS: usize = 20;

pub fn run(args: ImportanceArgs) -> Result<()> {
    ensure_output_dir(&args.output)?;
    let mode = parse_mode(&args.mode)?;
    let mut manifest = ManifestBuilder::new(
        "importance",
        0,
        json!({ "mode": args.mode, "top": args.top }),
    );
    manifest.add_input(&args.model)?;
    manifest.add_input(&args.features)?;
    manifest.add_input(&args.labels)?;

    let model = super::read_model(&args.model)?;
    let Model::RandomForest(forest) = &model else {
        bail!(causeway_core::model::ModelError::InvalidConfig(
            "variable importance needs a random forest model".into()
        ));
    };
    let ranking = variable_importance(forest);

    let mut out = String::from("rank,feature,scaled_importance\n");
    for (i, (name, ri)) in ranking.iter().enumerate() {
        out.push_str(&format!("{},{},{}\n", i + 1, name, ri));
    }
    write_text(&args.output.join("importance.csv"), &out)?;

    // class-conditional distributions of the top predictors
    let matrix = read_feature_matrix(&args.features)?;
    if matrix.schema_hash() != forest.schema_hash {
        bail!(causeway_core::model::ModelError::SchemaMismatch {
            expected: forest.schema_hash.clone(),
            got: matrix.schema_hash(),
        });
    }
    let label_map = read_labels(&args.labels)?;
    let labeled = LabeledEdgeSet::join(matrix, &label_map)?;
    let (task_matrix, y) = labeled.binary_view(mode);

    let mut hist = String::from("feature,class,scale,bin_lo,bin_hi,count\n");
    let mut ks = String::from("feature,ks_d,ks_p\n");
    for (name, _) in ranking.iter().take(args.top) {
        let idx = task_matrix
            .column_index(name)
            .expect("ranking names come from the schema");
        let pos: Vec<f64> = task_matrix
            .rows
            .iter()
            .zip(&y)
            .filter(|(_, &l)| l == 1)
            .map(|(r, _)| r[idx])
            .collect();
        let neg: Vec<f64> = task_matrix
            .rows
            .iter()
            .zip(&y)
            .filter(|(_, &l)| l == 0)
            .map(|(r, _)| r[idx])
            .collect();
        if pos.is_empty() || neg.is_empty() {
            continue;
        }
        let (d, p) = ks_two_sample(&pos, &neg)?;
        ks.push_str(&format!("{name},{d},{p}\n"));
        for (class, values) in [(1u8, &pos), (0u8, &neg)] {
            for line in histogram_lines(name, class, values) {
                hist.push_str(&line);
            }
        }
    }
    write_text(&args.output.join("histograms.csv"), &hist)?;
    write_text(&args.output.join("ks.csv"), &ks)?;

    println!(
        "importance: top predictor {} (1.000), {} features ranked",
        ranking.first().map(|(n, _)| n.as_str()).unwrap_or("-"),
        ranking.len()
    );
    manifest.write(&args.output)?;
    Ok(())
}

/// Log-binned when the observed values are all positive, linear otherwise.
fn histogram_lines(feature: &str, class: u8, values: &[f64]) -> Vec<String> {
    let min = values.iter().copied().fold(f64::INFINITY, f64::min);
    let max = values.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    let mut lines = Vec::new();
    if min == max {
        lines.push(format!(
            "{feature},{class},point,{min},{max},{}\n",
            values.len()
        ));
        return lines;
    }
    let log_scale = min > 0.0;
    let (lo, hi) = if log_scale {
        (min.ln(), max.ln())
    } else {
        (min, max)
    };
    let width = (hi - lo) / HISTOGRAM_BINS as f64;
    let mut counts = vec![0usize; HISTOGRAM_BINS];
    for &v in values {
        let t = if log_scale { v.ln() } else { v };
        let mut bin = ((t - lo) / width) as usize;
        if bin >= HISTOGRAM_BINS {
            bin = HISTOGRAM_BINS - 1;
        }
        counts[bin] += 1;
    }
    let scale = if log_scale { "log" } else { "linear" };
    for (b, &count) in counts.iter().enumerate() {
        let (bin_lo, bin_hi) = {
            let a = lo + b as f64 * width;
            let z = lo + (b + 1) as f64 * width;
            if log_scale {
                (a.exp(), z.exp())
            } else {
                (a, z)
            }
        };
        lines.push(format!(
            "{feature},{class},{scale},{bin_lo},{bin_hi},{count}\n"
        ));
    }
    lines
}
