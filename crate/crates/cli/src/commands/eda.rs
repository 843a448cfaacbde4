use std::fs;

use serde_json::json;
use tubepulse_core::eda::{
    iqr_outliers, matrix_series, threshold_pairs, CorrelationMatrix, NumericColumn, TARGET_COLUMN,
};
use tubepulse_core::{FeatureProfile, Featurizer};

use super::{check_k, dataset_paths, json_pretty, load_records, write_out, Io, DEFAULT_OUTLIER_K};
use crate::args::EdaArgs;
use crate::config::Config;
use crate::failure::{CmdResult, Failure};

pub const CORRELATION_FILE: &str = "correlation.csv";
pub const PAIRS_FILE: &str = "threshold_pairs.json";
pub const OUTLIERS_FILE: &str = "outliers.json";

pub fn run(args: &EdaArgs, config: &Config, io: &mut Io<'_>) -> CmdResult {
    if !(0.0..=1.0).contains(&args.threshold) {
        return Err(Failure::usage(format!(
            "--threshold must be in [0, 1], got {}",
            args.threshold
        )));
    }
    let k = args.k.or(config.outlier_k).unwrap_or(DEFAULT_OUTLIER_K);
    check_k(k)?;
    let records = load_records(&dataset_paths(&args.csv, config)?)?;
    if records.len() < 2 {
        return Err(Failure::domain(format!("need at least 2 rows, got {}", records.len())));
    }

    // Every engineered column plus engagement and the target.
    let matrix = Featurizer::new(FeatureProfile::post_upload())
        .build_matrix(&records)
        .map_err(|e| Failure::domain(e.to_string()))?;
    let mut names: Vec<&str> = matrix.columns().iter().map(String::as_str).collect();
    names.push(TARGET_COLUMN);
    let series = matrix_series(&matrix, &names).map_err(|e| Failure::domain(e.to_string()))?;
    let (cm, degenerate) =
        CorrelationMatrix::from_series_lenient(&series).map_err(|e| Failure::domain(e.to_string()))?;
    let pairs = threshold_pairs(&cm, args.threshold).map_err(|e| Failure::usage(e.to_string()))?;

    let mut warnings: Vec<String> = degenerate
        .iter()
        .map(|c| format!("column {c} is constant; left out of the correlation matrix"))
        .collect();
    let mut outliers = Vec::new();
    for col in NumericColumn::ALL {
        let values: Vec<f64> = records.iter().map(|r| col.value(r)).collect();
        match iqr_outliers(&values, k) {
            Ok(mut report) => {
                report.column = col.name().to_string();
                outliers.push(report);
            }
            Err(e) => warnings.push(format!("outliers for {col}: {e}")),
        }
    }

    fs::create_dir_all(&args.out).map_err(|e| Failure::io(&args.out, e))?;
    let write = |name: &str, body: String| {
        let path = args.out.join(name);
        fs::write(&path, body).map_err(|e| Failure::io(&path, e))?;
        Ok::<_, Failure>(path)
    };
    let corr_path = write(CORRELATION_FILE, cm.to_csv())?;
    let pairs_path = write(
        PAIRS_FILE,
        json_pretty(&json!({"threshold": args.threshold, "pairs": pairs})),
    )?;
    let outliers_path = write(OUTLIERS_FILE, json_pretty(&json!({"k": k, "columns": outliers})))?;
    for w in &warnings {
        log::warn!("{w}");
    }

    let text = if args.json {
        json_pretty(&json!({
            "rows": records.len(),
            "threshold": args.threshold,
            "k": k,
            "pairs": pairs,
            "outlier_counts": outliers
                .iter()
                .map(|o| json!({"column": o.column, "count": o.outlier_row_indices.len()}))
                .collect::<Vec<_>>(),
            "warnings": warnings,
            "artifacts": [corr_path, pairs_path, outliers_path],
        }))
    } else {
        let mut s = format!("rows: {}\npairs with |r| >= {}:\n", records.len(), args.threshold);
        for p in &pairs {
            s += &format!("  {:<16} {:<16} {:>7.3}\n", p.a, p.b, p.r);
        }
        s += &format!("outliers (k = {k}):\n");
        for o in &outliers {
            s += &format!("  {:<16} {}\n", o.column, o.outlier_row_indices.len());
        }
        if !warnings.is_empty() {
            s += "warnings:\n";
            for w in &warnings {
                s += &format!("  {w}\n");
            }
        }
        for p in [&corr_path, &pairs_path, &outliers_path] {
            s += &format!("wrote {}\n", p.display());
        }
        s
    };
    write_out(io, &text)
}
