use anyhow::Result;
use causeway_core::eval::{
    assemble_report, write_calibration_csv, write_roc_csv, write_score_dist_csv, ScoredSet,
};
use serde_json::json;

use super::{ensure_output_dir, parse_mode, read_labels, read_predictions, write_text};
use crate::manifest::ManifestBuilder;
use crate::EvaluateArgs;

pub fn run(args: EvaluateArgs) -> Result<()> {
    ensure_output_dir(&args.output)?;
    let mode = parse_mode(&args.mode)?;
    let mut manifest = ManifestBuilder::new(
        "evaluate",
        0,
        json!({ "mode": args.mode, "bins": args.bins }),
    );
    manifest.add_input(&args.predictions)?;
    manifest.add_input(&args.labels)?;

    let predictions = read_predictions(&args.predictions)?;
    let label_map = read_labels(&args.labels)?;

    let mut scores = Vec::new();
    let mut labels = Vec::new();
    let mut skipped = 0usize;
    for (key, measure) in &predictions {
        match label_map.get(key).and_then(|&l| mode.binary(l)) {
            Some(bit) => {
                scores.push(*measure);
                labels.push(bit);
            }
            None => skipped += 1,
        }
    }
    if skipped > 0 {
        eprintln!("warning: {skipped} predictions without a usable label were skipped");
    }
    let scored = ScoredSet::new(scores, labels)?;
    let report = assemble_report(&scored, args.bins, None)?;

    write_text(
        &args.output.join("report.json"),
        &serde_json::to_string_pretty(&report)?,
    )?;
    let mut buf = Vec::new();
    write_roc_csv(&mut buf, &report.roc_points)?;
    write_text(&args.output.join("roc.csv"), &String::from_utf8(buf)?)?;
    let mut buf = Vec::new();
    write_calibration_csv(&mut buf, &report.calibration_deciles)?;
    write_text(&args.output.join("calibration.csv"), &String::from_utf8(buf)?)?;
    let mut buf = Vec::new();
    write_score_dist_csv(&mut buf, &report.score_dist)?;
    write_text(&args.output.join("score_dist.csv"), &String::from_utf8(buf)?)?;

    println!(
        "evaluate: n {} auc {:.4} mse {:.4} r2 {:.4} hl p {:.3} youden {:.4}",
        report.n, report.auc, report.mse, report.r2, report.hl_p, report.youden_threshold
    );
    manifest.write(&args.output)?;
    Ok(())
}
