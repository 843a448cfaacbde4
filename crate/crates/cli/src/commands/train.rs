use std::path::PathBuf;

use serde_json::json;
use tubepulse_core::eval::{render_table, score_model, train_test_split, DEFAULT_SPLIT_RATIO};
use tubepulse_core::model::{fingerprint, train, PipelineMeta};
use tubepulse_core::{
    BoostParams, ChannelFrequency, FeatureProfile, Featurizer, ForestParams, ModelSpec, ProfileKind, TargetTransform,
    TreeParams,
};

use super::{apply_outliers, check_ratio, dataset_paths, json_pretty, load_records, outlier_plan, write_out, Io};
use crate::args::{Algo, ProfileArg, TrainArgs, TransformArg};
use crate::config::{Config, Hyperparameters};
use crate::failure::{CmdResult, Failure};

fn parse_algo(name: &str) -> CmdResult<Algo> {
    match name {
        "tree" => Ok(Algo::Tree),
        "forest" => Ok(Algo::Forest),
        "gbt" => Ok(Algo::Gbt),
        other => Err(Failure::usage(format!(
            "unknown algorithm {other:?} (valid: {})",
            Algo::NAMES
        ))),
    }
}

fn parse_profile(name: &str) -> CmdResult<ProfileArg> {
    match name {
        "pre" | "pre_upload" => Ok(ProfileArg::Pre),
        "post" | "post_upload" => Ok(ProfileArg::Post),
        other => Err(Failure::usage(format!("unknown profile {other:?} (valid: pre, post)"))),
    }
}

fn parse_transform(name: &str) -> CmdResult<TransformArg> {
    match name {
        "log1p" => Ok(TransformArg::Log1p),
        "identity" => Ok(TransformArg::Identity),
        other => Err(Failure::usage(format!(
            "unknown transform {other:?} (valid: log1p, identity)"
        ))),
    }
}

/// Library defaults, then config, then flags.
fn build_spec(algo: Algo, args: &TrainArgs, cfg: &Hyperparameters, seed: u64) -> CmdResult<ModelSpec> {
    let tree_of = |base: TreeParams| TreeParams {
        max_depth: args.max_depth.or(cfg.max_depth).unwrap_or(base.max_depth),
        min_samples_leaf: args
            .min_samples_leaf
            .or(cfg.min_samples_leaf)
            .unwrap_or(base.min_samples_leaf),
        min_gain: args.min_gain.or(cfg.min_gain).unwrap_or(base.min_gain),
    };
    let invalid = |e: tubepulse_core::TreeError| Failure::usage(e.to_string());
    let spec = match algo {
        Algo::Tree => {
            let p = tree_of(TreeParams::default());
            p.validate().map_err(invalid)?;
            ModelSpec::Tree(p)
        }
        Algo::Forest => {
            let d = ForestParams::default();
            let bootstrap = if args.no_bootstrap {
                false
            } else {
                cfg.bootstrap.unwrap_or(d.bootstrap)
            };
            let p = ForestParams {
                n_trees: args.n_trees.or(cfg.n_trees).unwrap_or(d.n_trees),
                feature_fraction: args
                    .feature_fraction
                    .or(cfg.feature_fraction)
                    .unwrap_or(d.feature_fraction),
                bootstrap,
                seed,
                tree: tree_of(d.tree),
            };
            p.validate().map_err(invalid)?;
            ModelSpec::Forest(p)
        }
        Algo::Gbt => {
            let d = BoostParams::default();
            let p = BoostParams {
                n_rounds: args.n_rounds.or(cfg.n_rounds).unwrap_or(d.n_rounds),
                eta: args.eta.or(cfg.eta).unwrap_or(d.eta),
                lambda: args.lambda.or(cfg.lambda).unwrap_or(d.lambda),
                tree: tree_of(d.tree),
                base_score: None,
            };
            p.validate().map_err(invalid)?;
            ModelSpec::Boosted(p)
        }
    };
    Ok(spec)
}

pub fn run(args: &TrainArgs, config: &Config, io: &mut Io<'_>) -> CmdResult {
    let algo = match (args.algo, config.algo.as_deref()) {
        (Some(a), _) => a,
        (None, Some(name)) => parse_algo(name)?,
        (None, None) => Algo::Gbt,
    };
    let profile = match (args.profile, config.profile.as_deref()) {
        (Some(p), _) => p,
        (None, Some(name)) => parse_profile(name)?,
        (None, None) => ProfileArg::Pre,
    };
    let transform = match (args.transform, config.transform.as_deref()) {
        (Some(t), _) => t,
        (None, Some(name)) => parse_transform(name)?,
        (None, None) => TransformArg::Log1p,
    };
    let transform = match transform {
        TransformArg::Log1p => TargetTransform::Log1p,
        TransformArg::Identity => TargetTransform::Identity,
    };
    let seed = args.seed.or(config.seed).unwrap_or(0);
    let ratio = args.ratio.or(config.split_ratio).unwrap_or(DEFAULT_SPLIT_RATIO);
    check_ratio(ratio)?;
    let out: PathBuf = args
        .out
        .clone()
        .or_else(|| config.model_out.clone())
        .ok_or_else(|| Failure::usage("no output path (pass --out or set model_out in the config)"))?;
    let spec = build_spec(algo, args, &config.hyperparameters, seed)?;
    let plan = outlier_plan(&args.data, config)?;
    let channel_frequency = args.channel_frequency || config.channel_frequency.unwrap_or(false);

    let records = load_records(&dataset_paths(&args.data.csv, config)?)?;
    let (records, _) = apply_outliers(records, plan.as_ref())?;
    let split = train_test_split(records.len(), ratio, seed).map_err(|e| Failure::domain(e.to_string()))?;

    let kind = match profile {
        ProfileArg::Pre => ProfileKind::PreUpload,
        ProfileArg::Post => ProfileKind::PostUpload,
    };
    let feature_profile = FeatureProfile::new(kind, channel_frequency);
    // Channel counts come from the training partition only.
    let channels = channel_frequency.then(|| {
        let train_records: Vec<_> = split.train.iter().map(|&i| records[i].clone()).collect();
        ChannelFrequency::from_records(&train_records)
    });
    let featurizer = match &channels {
        Some(c) => Featurizer::with_channels(feature_profile, c.clone()),
        None => Featurizer::new(feature_profile),
    };
    let matrix = featurizer
        .build_matrix(&records)
        .map_err(|e| Failure::domain(e.to_string()))?;

    let mut model = train(&spec, &matrix.select_rows(&split.train), transform, channels)
        .map_err(|e| Failure::domain(e.to_string()))?;
    model.training.pipeline = Some(PipelineMeta {
        split_ratio: ratio,
        split_seed: seed,
        outlier_columns: plan
            .as_ref()
            .map(|p| p.columns.iter().map(|c| c.name().to_string()).collect())
            .unwrap_or_default(),
        outlier_k: plan.as_ref().map(|p| p.k),
        source_fingerprint: fingerprint(&matrix),
    });
    let report = score_model(&model, &matrix, &split).map_err(|e| Failure::domain(e.to_string()))?;
    model.save_file(&out).map_err(|e| Failure::io(&out, e))?;
    log::info!("saved {} to {}", model.version(), out.display());

    let text = if args.json {
        json_pretty(&json!({
            "model_path": out,
            "model_version": model.version(),
            "rows": records.len(),
            "report": report,
        }))
    } else {
        format!(
            "{}saved {} to {}\n",
            render_table(std::slice::from_ref(&report)),
            model.version(),
            out.display()
        )
    };
    write_out(io, &text)
}
