use std::fs;

use tubepulse_core::eda::NumericColumn;
use tubepulse_core::eval::{render_table, score_model, train_test_split, DEFAULT_SPLIT_RATIO};
use tubepulse_core::model::fingerprint;
use tubepulse_core::{RegressionModel, ScoreReport, VideoRecord};

use super::{
    apply_outliers, check_ratio, dataset_paths, json_pretty, load_records, model_paths, write_out, Io, OutlierPlan,
};
use crate::args::EvaluateArgs;
use crate::config::Config;
use crate::failure::{CmdResult, Failure};

/// Re-runs the model's own preprocessing and split, then scores it.
fn score_one(
    model: &RegressionModel,
    records: &[VideoRecord],
    fallback_seed: u64,
    fallback_ratio: f64,
) -> CmdResult<ScoreReport> {
    let domain = |e: &dyn std::fmt::Display| Failure::domain(e.to_string());
    let pipeline = model.training.pipeline.as_ref();
    let plan = match pipeline {
        Some(p) if !p.outlier_columns.is_empty() => Some(OutlierPlan {
            columns: p
                .outlier_columns
                .iter()
                .map(|c| c.parse::<NumericColumn>())
                .collect::<Result<_, _>>()
                .map_err(|e| domain(&e))?,
            k: p.outlier_k.unwrap_or(super::DEFAULT_OUTLIER_K),
        }),
        _ => None,
    };
    let (records, _) = apply_outliers(records.to_vec(), plan.as_ref())?;
    let matrix = model.featurizer().build_matrix(&records).map_err(|e| domain(&e))?;
    let (seed, ratio) = match pipeline {
        Some(p) => {
            if p.source_fingerprint != fingerprint(&matrix) {
                log::warn!(
                    "{}: dataset differs from the one it was trained on; test rows may include training rows",
                    model.version()
                );
            }
            (p.split_seed, p.split_ratio)
        }
        None => (fallback_seed, fallback_ratio),
    };
    let split = train_test_split(matrix.n_rows(), ratio, seed).map_err(|e| domain(&e))?;
    score_model(model, &matrix, &split).map_err(|e| domain(&e))
}

pub fn run(args: &EvaluateArgs, config: &Config, io: &mut Io<'_>) -> CmdResult {
    let paths = model_paths(&args.models, config)?;
    if paths.is_empty() {
        return Err(Failure::usage(
            "no model given (pass --model or set models in the config)",
        ));
    }
    let seed = args.seed.or(config.seed).unwrap_or(0);
    let ratio = args.ratio.or(config.split_ratio).unwrap_or(DEFAULT_SPLIT_RATIO);
    check_ratio(ratio)?;
    let models = paths
        .iter()
        .map(|p| RegressionModel::load_file(p).map_err(|e| Failure::io(p, e)))
        .collect::<CmdResult<Vec<_>>>()?;
    let records = load_records(&dataset_paths(&args.csv, config)?)?;
    let reports = models
        .iter()
        .map(|m| score_one(m, &records, seed, ratio))
        .collect::<CmdResult<Vec<_>>>()?;

    let json = json_pretty(&reports);
    if let Some(path) = &args.report {
        fs::write(path, &json).map_err(|e| Failure::io(path, e))?;
    }
    write_out(io, &if args.json { json } else { render_table(&reports) })
}
