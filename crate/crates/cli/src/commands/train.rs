use anyhow::{bail, Result};
use causeway_core::matrix::LabeledEdgeSet;
use causeway_core::model::{cross_validate, train_forest, train_logistic, Model, TrainConfig};
use serde_json::json;

use super::{
    ensure_output_dir, parse_features_per_split, parse_mode, read_feature_matrix, read_labels,
    write_text,
};
use crate::manifest::ManifestBuilder;
use crate::TrainArgs;

pub fn run(args: TrainArgs) -> Result<()> {
    ensure_output_dir(&args.output)?;
    let mode = parse_mode(&args.mode)?;
    let cfg = TrainConfig {
        n_trees: args.trees,
        max_depth: args.depth,
        k_folds: args.folds,
        repeats: args.repeats,
        rng_seed: args.seed,
        features_per_split: parse_features_per_split(&args.features_per_split)?,
        min_leaf: args.min_leaf,
    };
    let mut manifest = ManifestBuilder::new(
        "train",
        args.seed,
        json!({
            "mode": args.mode,
            "model": args.model,
            "config": serde_json::to_value(&cfg)?,
            "no_cv": args.no_cv,
        }),
    );
    manifest.add_input(&args.features)?;
    manifest.add_input(&args.labels)?;

    let matrix = read_feature_matrix(&args.features)?;
    let label_map = read_labels(&args.labels)?;
    let labeled = LabeledEdgeSet::join(matrix, &label_map)?;
    let (task_matrix, y) = labeled.binary_view(mode);
    println!(
        "train: {} task rows ({} positive) from {} labeled edges",
        task_matrix.n_rows(),
        y.iter().filter(|&&v| v == 1).count(),
        labeled.matrix.n_rows()
    );
    {
        let pos = y.iter().filter(|&&v| v == 1).count();
        let neg = y.len() - pos;
        if pos != neg {
            eprintln!("warning: unbalanced classes ({pos} positive vs {neg} negative)");
        }
    }

    let model = match args.model.as_str() {
        "rf" => {
            if !args.no_cv {
                let report = cross_validate(&task_matrix, &y, &cfg)?;
                write_text(
                    &args.output.join("cv_report.json"),
                    &serde_json::to_string_pretty(&report)?,
                )?;
                println!(
                    "cv: heldout auc {:.4} +/- {:.4} over {} repeats",
                    report.heldout_mean.auc, report.heldout_sd.auc, cfg.repeats
                );
            }
            let (forest, oob) = train_forest(&task_matrix, &y, &cfg)?;
            if let Some(err) = oob.error {
                println!("oob: error {:.4} over {} covered rows", err, oob.n_covered);
            }
            Model::RandomForest(forest)
        }
        "logistic" => Model::Logistic(train_logistic(&task_matrix, &y, &cfg)?),
        other => bail!(causeway_core::model::ModelError::InvalidConfig(format!(
            "unknown model kind `{other}` (rf or logistic)"
        ))),
    };

    write_text(&args.output.join("model.json"), &model.to_json())?;
    manifest.write(&args.output)?;
    Ok(())
}
