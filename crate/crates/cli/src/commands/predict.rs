use anyhow::Result;
use serde_json::json;

use super::{ensure_output_dir, read_feature_matrix, read_model, write_predictions};
use crate::manifest::ManifestBuilder;
use crate::PredictArgs;

pub fn run(args: PredictArgs) -> Result<()> {
    ensure_output_dir(&args.output)?;
    let mut manifest = ManifestBuilder::new(
        "predict",
        0,
        json!({
            "model": args.model.display().to_string(),
            "features": args.features.display().to_string(),
        }),
    );
    manifest.add_input(&args.model)?;
    manifest.add_input(&args.features)?;

    let model = read_model(&args.model)?;
    let matrix = read_feature_matrix(&args.features)?;
    let measures = model.predict_matrix(&matrix)?;
    write_predictions(&args.output.join("predictions.csv"), &matrix.keys, &measures)?;
    println!("predict: scored {} edges", measures.len());
    manifest.write(&args.output)?;
    Ok(())
}
