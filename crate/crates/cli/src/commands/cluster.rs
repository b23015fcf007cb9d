use anyhow::Result;
use causeway_core::eval::{adjusted_rand_index, pam_cluster, write_clusters_csv, ClusteringReport};
use causeway_core::matrix::LabeledEdgeSet;
use causeway_core::stats::pca;
use serde_json::json;

use super::{ensure_output_dir, parse_mode, read_feature_matrix, read_labels, write_text};
use crate::manifest::ManifestBuilder;
use crate::ClusterArgs;

pub fn run(args: ClusterArgs) -> Result<()> {
    ensure_output_dir(&args.output)?;
    let mut manifest = ManifestBuilder::new(
        "cluster",
        0,
        json!({ "k": args.k, "mode": args.mode }),
    );
    manifest.add_input(&args.features)?;

    let matrix = read_feature_matrix(&args.features)?;
    let result = pam_cluster(&matrix.rows, args.k)?;
    let projection = pca(&matrix.rows, 2)?;

    let labels = match &args.labels {
        Some(path) => {
            manifest.add_input(path)?;
            let label_map = read_labels(path)?;
            Some(LabeledEdgeSet::join(matrix.clone(), &label_map)?.labels)
        }
        None => None,
    };
    let ari = match (&labels, parse_mode(&args.mode)) {
        (Some(labels), Ok(mode)) => {
            let truth: Vec<usize> = labels
                .iter()
                .map(|&l| mode.binary(l).unwrap_or(2) as usize)
                .collect();
            Some(adjusted_rand_index(&result.assignments, &truth)?)
        }
        _ => None,
    };

    let clustering = ClusteringReport {
        k: args.k,
        ari,
        medoids: result.medoids.clone(),
        assignments: result.assignments.clone(),
        pca_coords: projection
            .coords
            .iter()
            .map(|c| [c[0], *c.get(1).unwrap_or(&0.0)])
            .collect(),
        explained: [
            projection.explained[0],
            *projection.explained.get(1).unwrap_or(&0.0),
        ],
    };

    let mut buf = Vec::new();
    write_clusters_csv(&mut buf, &matrix.keys, &clustering, labels.as_deref())?;
    write_text(&args.output.join("clusters.csv"), &String::from_utf8(buf)?)?;
    let report = json!({
        "k": args.k,
        "cost": result.cost,
        "medoids": result.medoids,
        "ari": ari,
        "pca_explained": clustering.explained,
    });
    write_text(
        &args.output.join("cluster_report.json"),
        &serde_json::to_string_pretty(&report)?,
    )?;
    match ari {
        Some(ari) => println!("cluster: k={} cost {:.4} ari {:.4}", args.k, result.cost, ari),
        None => println!("cluster: k={} cost {:.4}", args.k, result.cost),
    }
    manifest.write(&args.output)?;
    Ok(())
}
