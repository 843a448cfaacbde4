//! One function per subcommand. Machine output goes to `out`; logs go to
//! stderr through `log`.

mod eda;
mod evaluate;
mod predict;
mod rank;
mod serve;
mod train;
mod validate;

use std::fs::File;
use std::io::{Read, Write};
use std::path::{Path, PathBuf};

use tubepulse_core::eda::{remove_outliers, NumericColumn};
use tubepulse_core::ingest::parse_csv;
use tubepulse_core::{EmbeddingTable, OutlierReport, TrendingTopics, VideoRecord};

use crate::args::{Cli, Command, DataArgs, TrendArgs};
use crate::config::{require_exists, Config};
use crate::failure::{CmdResult, Failure};

pub const DEFAULT_OUTLIER_K: f64 = 1.5;

/// Standard streams, swappable in tests.
pub struct Io<'a> {
    pub out: &'a mut dyn Write,
    pub input: &'a mut dyn Read,
}

pub fn run(cli: Cli, io: &mut Io<'_>) -> CmdResult {
    let config = match &cli.config {
        Some(path) => Config::load(path)?,
        None => Config::default(),
    };
    match cli.command {
        Command::Validate(a) => validate::run(&a, &config, io),
        Command::Eda(a) => eda::run(&a, &config, io),
        Command::Train(a) => train::run(&a, &config, io),
        Command::Evaluate(a) => evaluate::run(&a, &config, io),
        Command::Predict(a) => predict::run(&a, &config, io),
        Command::Rank(a) => rank::run(&a, &config, io),
        Command::Serve(a) => serve::run(&a, &config),
    }
}

fn write_out(io: &mut Io<'_>, text: &str) -> CmdResult {
    io.out
        .write_all(text.as_bytes())
        .and_then(|_| io.out.flush())
        .map_err(|e| Failure::usage(format!("writing output: {e}")))
}

fn json_line<T: serde::Serialize + ?Sized>(value: &T) -> String {
    let mut s = serde_json::to_string(value).expect("output serializes");
    s.push('\n');
    s
}

fn json_pretty<T: serde::Serialize + ?Sized>(value: &T) -> String {
    let mut s = serde_json::to_string_pretty(value).expect("output serializes");
    s.push('\n');
    s
}

/// Positional CSV paths, else the config's datasets. All must exist.
fn dataset_paths(csv: &[PathBuf], config: &Config) -> CmdResult<Vec<PathBuf>> {
    let paths = if csv.is_empty() {
        config.datasets.clone()
    } else {
        csv.to_vec()
    };
    if paths.is_empty() {
        return Err(Failure::usage(
            "no dataset given (pass CSV paths or set datasets in the config)",
        ));
    }
    for p in &paths {
        require_exists(p)?;
    }
    Ok(paths)
}

/// Reads and concatenates datasets. Rejected rows are logged and skipped.
fn load_records(paths: &[PathBuf]) -> CmdResult<Vec<VideoRecord>> {
    let mut all = Vec::new();
    for p in paths {
        let file = File::open(p).map_err(|e| Failure::io(p, e))?;
        let (records, report) = parse_csv(file).map_err(|e| Failure::domain(format!("{}: {e}", p.display())))?;
        if !report.is_clean() {
            log::warn!(
                "{}: skipped {} of {} rows (run `validate` for details)",
                p.display(),
                report.rejected,
                report.total()
            );
        }
        all.extend(records);
    }
    if all.is_empty() {
        return Err(Failure::domain("datasets contain no usable rows"));
    }
    Ok(all)
}

/// Outlier settings after merging flags and config; `None` columns means
/// filtering is off.
struct OutlierPlan {
    columns: Vec<NumericColumn>,
    k: f64,
}

fn outlier_plan(data: &DataArgs, config: &Config) -> CmdResult<Option<OutlierPlan>> {
    if data.no_outliers || config.remove_outliers == Some(false) {
        return Ok(None);
    }
    let names = data.outlier_columns.clone().or_else(|| config.outlier_columns.clone());
    let columns = match names {
        Some(names) => names
            .iter()
            .map(|n| n.trim().parse::<NumericColumn>())
            .collect::<Result<Vec<_>, _>>()
            .map_err(|e| Failure::usage(format!("{e} (valid: view_count, likes, dislikes, comment_count)")))?,
        None => NumericColumn::ALL.to_vec(),
    };
    let k = data.outlier_k.or(config.outlier_k).unwrap_or(DEFAULT_OUTLIER_K);
    check_k(k)?;
    if columns.is_empty() {
        return Ok(None);
    }
    Ok(Some(OutlierPlan { columns, k }))
}

fn check_k(k: f64) -> CmdResult {
    if k.is_finite() && k >= 0.0 {
        Ok(())
    } else {
        Err(Failure::usage(format!("outlier k must be finite and >= 0, got {k}")))
    }
}

fn apply_outliers(
    records: Vec<VideoRecord>,
    plan: Option<&OutlierPlan>,
) -> CmdResult<(Vec<VideoRecord>, Vec<OutlierReport>)> {
    match plan {
        None => Ok((records, Vec::new())),
        Some(plan) => {
            let (kept, reports) =
                remove_outliers(&records, &plan.columns, plan.k).map_err(|e| Failure::domain(e.to_string()))?;
            log::info!("outlier removal kept {} of {} rows", kept.len(), records.len());
            Ok((kept, reports))
        }
    }
}

fn check_ratio(ratio: f64) -> CmdResult {
    if ratio > 0.0 && ratio < 1.0 {
        Ok(())
    } else {
        Err(Failure::usage(format!("split ratio must be in (0, 1), got {ratio}")))
    }
}

fn model_paths(flags: &[PathBuf], config: &Config) -> CmdResult<Vec<PathBuf>> {
    let paths = if flags.is_empty() {
        config.models.clone()
    } else {
        flags.to_vec()
    };
    for p in &paths {
        require_exists(p)?;
    }
    Ok(paths)
}

fn beta(trend: &TrendArgs, config: &Config) -> CmdResult<f64> {
    let b = trend
        .beta
        .or(config.beta)
        .unwrap_or(tubepulse_core::trendrank::DEFAULT_BETA);
    if b.is_finite() && b >= 0.0 {
        Ok(b)
    } else {
        Err(Failure::usage(format!("beta must be finite and >= 0, got {b}")))
    }
}

fn trend_paths(trend: &TrendArgs, config: &Config) -> (Option<PathBuf>, Option<PathBuf>) {
    (
        trend.embeddings.clone().or_else(|| config.embeddings.clone()),
        trend.topics.clone().or_else(|| config.topics.clone()),
    )
}

fn load_table(path: &Path) -> CmdResult<EmbeddingTable> {
    require_exists(path)?;
    let table = tubepulse_core::trendrank::load_embeddings_file(path).map_err(|e| Failure::io(path, e))?;
    let w = table.warnings();
    if w.duplicate_tokens + w.zero_vectors > 0 {
        log::warn!(
            "{}: ignored {} duplicate tokens and {} zero vectors",
            path.display(),
            w.duplicate_tokens,
            w.zero_vectors
        );
    }
    Ok(table)
}

fn load_topic_file(path: &Path, max: usize) -> CmdResult<TrendingTopics> {
    require_exists(path)?;
    let topics = tubepulse_core::trendrank::load_topics(path, max).map_err(|e| Failure::io(path, e))?;
    if topics.truncated > 0 {
        log::warn!(
            "{}: kept the first {max} topics, dropped {}",
            path.display(),
            topics.truncated
        );
    }
    Ok(topics)
}

/// Reads a whole file, or stdin for `-`.
fn read_input(path: &Path, io: &mut Io<'_>) -> CmdResult<String> {
    let mut text = String::new();
    if path == Path::new("-") {
        io.input
            .read_to_string(&mut text)
            .map_err(|e| Failure::usage(format!("reading stdin: {e}")))?;
    } else {
        require_exists(path)?;
        text = std::fs::read_to_string(path).map_err(|e| Failure::io(path, e))?;
    }
    Ok(text)
}
