//! Trending-video CSV ingestion.
//!
//! Files follow the public trending-video dataset layout: one header row
//! naming the columns (any order), then one video per row. Rows that fail
//! to parse or that violate a record invariant are skipped and listed in
//! the [`IngestReport`]; only a missing header column or an unreadable
//! stream aborts the whole parse.

use std::collections::HashMap;
use std::fmt;
use std::io::{Read, Write};

use chrono::{DateTime, NaiveDate, SecondsFormat, Utc};
use serde::{Deserialize, Serialize};
use thiserror::Error;

/// Tag cell value the dataset uses for videos without tags. Older dataset
/// releases spell it in lowercase, so matching is case-insensitive.
pub const NO_TAGS_SENTINEL: &str = "[None]";

/// Separator between tags inside the tag cell.
pub const TAG_DELIMITER: char = '|';

pub const COL_VIDEO_ID: &str = "video_id";
pub const COL_TITLE: &str = "title";
pub const COL_PUBLISHED_AT: &str = "publishedAt";
pub const COL_CHANNEL_ID: &str = "channelId";
pub const COL_CHANNEL_TITLE: &str = "channelTitle";
pub const COL_CATEGORY_ID: &str = "categoryId";
pub const COL_TRENDING_DATE: &str = "trending_date";
pub const COL_TAGS: &str = "tags";
pub const COL_VIEW_COUNT: &str = "view_count";
pub const COL_LIKES: &str = "likes";
pub const COL_DISLIKES: &str = "dislikes";
pub const COL_COMMENT_COUNT: &str = "comment_count";
pub const COL_THUMBNAIL_LINK: &str = "thumbnail_link";
pub const COL_COMMENTS_DISABLED: &str = "comments_disabled";
pub const COL_RATINGS_DISABLED: &str = "ratings_disabled";
pub const COL_DESCRIPTION: &str = "description";
pub const COL_COUNTRY: &str = "country";
pub const COL_COUNTRY_ID: &str = "countryId";

/// Columns every input file must name in its header.
pub const REQUIRED_COLUMNS: [&str; 16] = [
    COL_VIDEO_ID,
    COL_TITLE,
    COL_PUBLISHED_AT,
    COL_CHANNEL_ID,
    COL_CHANNEL_TITLE,
    COL_CATEGORY_ID,
    COL_TRENDING_DATE,
    COL_TAGS,
    COL_VIEW_COUNT,
    COL_LIKES,
    COL_DISLIKES,
    COL_COMMENT_COUNT,
    COL_THUMBNAIL_LINK,
    COL_COMMENTS_DISABLED,
    COL_RATINGS_DISABLED,
    COL_DESCRIPTION,
];

#[derive(Debug, Error)]
pub enum IngestError {
    #[error("invalid timestamp {raw:?}: expected ISO-8601 with an explicit UTC designator")]
    Timestamp { raw: String },
    #[error("missing required column {0:?} in header")]
    MissingColumn(String),
    #[error("failed to read CSV: {0}")]
    Io(#[from] std::io::Error),
    #[error("malformed CSV: {0}")]
    Csv(#[from] csv::Error),
}

/// One trending-list entry of a video.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct VideoRecord {
    pub video_id: String,
    pub title: String,
    pub published_at: DateTime<Utc>,
    pub channel_id: String,
    pub channel_title: String,
    pub category_id: u32,
    pub trending_date: DateTime<Utc>,
    pub tags: Vec<String>,
    pub view_count: u64,
    pub likes: u64,
    pub dislikes: u64,
    pub comment_count: u64,
    /// Carried through, never used as a feature.
    pub thumbnail_link: String,
    pub comments_disabled: bool,
    pub ratings_disabled: bool,
    pub description: String,
    /// Opaque country code or id; metadata only.
    pub country: Option<String>,
}

/// Outcome of parsing one file.
#[derive(Debug, Clone, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct IngestReport {
    pub accepted: usize,
    pub rejected: usize,
    pub row_errors: Vec<RowError>,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct RowError {
    /// 1-based data row number; the header is not counted.
    pub row: usize,
    pub reason: String,
}

impl IngestReport {
    pub fn total(&self) -> usize {
        self.accepted + self.rejected
    }

    pub fn is_clean(&self) -> bool {
        self.rejected == 0
    }

    /// Folds the report of another file into this one. Row numbers stay
    /// relative to their own file, so callers merging reports usually
    /// prefix reasons with the file name first.
    pub fn merge(&mut self, other: IngestReport) {
        self.accepted += other.accepted;
        self.rejected += other.rejected;
        self.row_errors.extend(other.row_errors);
    }
}

impl fmt::Display for IngestReport {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        writeln!(
            f,
            "rows: {}  accepted: {}  rejected: {}",
            self.total(),
            self.accepted,
            self.rejected
        )?;
        for e in &self.row_errors {
            writeln!(f, "  row {}: {}", e.row, e.reason)?;
        }
        Ok(())
    }
}

/// Parses an ISO-8601 / RFC 3339 instant. A zone designator is mandatory;
/// offsets other than `Z` are converted to UTC. Fractional seconds are
/// truncated.
pub fn parse_timestamp(raw: &str) -> Result<DateTime<Utc>, IngestError> {
    let trimmed = raw.trim();
    let parsed = DateTime::parse_from_rfc3339(trimmed).map_err(|_| IngestError::Timestamp { raw: raw.to_string() })?;
    let utc = parsed.with_timezone(&Utc);
    Ok(DateTime::from_timestamp(utc.timestamp(), 0).expect("in-range timestamp"))
}

/// Like [`parse_timestamp`], but a bare `YYYY-MM-DD` date is read as
/// midnight UTC. Used for the trending date column only.
pub fn parse_trending_date(raw: &str) -> Result<DateTime<Utc>, IngestError> {
    match parse_timestamp(raw) {
        Ok(ts) => Ok(ts),
        Err(err) => {
            let date = NaiveDate::parse_from_str(raw.trim(), "%Y-%m-%d").map_err(|_| err)?;
            Ok(date.and_hms_opt(0, 0, 0).expect("midnight").and_utc())
        }
    }
}

/// Renders an instant the way the dataset stores it: `2018-04-10T14:00:00Z`.
pub fn format_timestamp(ts: &DateTime<Utc>) -> String {
    ts.to_rfc3339_opts(SecondsFormat::Secs, true)
}

/// Splits a pipe-delimited tag cell.
pub fn parse_tags(raw: &str) -> Vec<String> {
    let trimmed = raw.trim();
    if trimmed.is_empty() || trimmed.eq_ignore_ascii_case(NO_TAGS_SENTINEL) {
        return Vec::new();
    }
    trimmed
        .split(TAG_DELIMITER)
        .map(|t| t.trim().trim_matches('"').trim())
        .filter(|t| !t.is_empty())
        .map(str::to_string)
        .collect()
}

/// Inverse of [`parse_tags`] for tags that survive parsing unchanged.
pub fn format_tags(tags: &[String]) -> String {
    if tags.is_empty() {
        NO_TAGS_SENTINEL.to_string()
    } else {
        tags.join("|")
    }
}

fn parse_count(field: &str, raw: &str) -> Result<u64, String> {
    raw.trim()
        .parse::<u64>()
        .map_err(|_| format!("{field}: expected a non-negative integer, got {raw:?}"))
}

fn parse_bool(field: &str, raw: &str) -> Result<bool, String> {
    match raw.trim().to_ascii_lowercase().as_str() {
        "true" | "1" => Ok(true),
        "false" | "0" => Ok(false),
        _ => Err(format!("{field}: expected True/False, got {raw:?}")),
    }
}

struct ColumnIndex {
    positions: HashMap<&'static str, usize>,
    country: Option<usize>,
}

impl ColumnIndex {
    fn from_header(header: &csv::StringRecord) -> Result<Self, IngestError> {
        let lookup: HashMap<&str, usize> = header
            .iter()
            .enumerate()
            .map(|(i, name)| (name.trim().trim_start_matches('\u{feff}'), i))
            .collect();
        let mut positions = HashMap::new();
        for col in REQUIRED_COLUMNS {
            let idx = lookup
                .get(col)
                .ok_or_else(|| IngestError::MissingColumn(col.to_string()))?;
            positions.insert(col, *idx);
        }
        let country = lookup.get(COL_COUNTRY).or_else(|| lookup.get(COL_COUNTRY_ID)).copied();
        Ok(ColumnIndex { positions, country })
    }

    fn get<'r>(&self, row: &'r csv::StringRecord, col: &'static str) -> &'r str {
        row.get(self.positions[col]).unwrap_or("")
    }

    fn record(&self, row: &csv::StringRecord) -> Result<VideoRecord, String> {
        let ts = |col: &'static str| parse_timestamp(self.get(row, col)).map_err(|e| format!("{col}: {e}"));
        let published_at = ts(COL_PUBLISHED_AT)?;
        let trending_date =
            parse_trending_date(self.get(row, COL_TRENDING_DATE)).map_err(|e| format!("{COL_TRENDING_DATE}: {e}"))?;
        if trending_date < published_at {
            return Err(format!(
                "ordering: {COL_TRENDING_DATE} {} is earlier than {COL_PUBLISHED_AT} {}",
                format_timestamp(&trending_date),
                format_timestamp(&published_at)
            ));
        }
        let category_id = self.get(row, COL_CATEGORY_ID).trim().parse::<u32>().map_err(|_| {
            format!(
                "{COL_CATEGORY_ID}: expected a non-negative integer, got {:?}",
                self.get(row, COL_CATEGORY_ID)
            )
        })?;
        let country = self
            .country
            .and_then(|i| row.get(i))
            .map(str::trim)
            .filter(|c| !c.is_empty())
            .map(str::to_string);

        Ok(VideoRecord {
            video_id: self.get(row, COL_VIDEO_ID).to_string(),
            title: self.get(row, COL_TITLE).to_string(),
            published_at,
            channel_id: self.get(row, COL_CHANNEL_ID).to_string(),
            channel_title: self.get(row, COL_CHANNEL_TITLE).to_string(),
            category_id,
            trending_date,
            tags: parse_tags(self.get(row, COL_TAGS)),
            view_count: parse_count(COL_VIEW_COUNT, self.get(row, COL_VIEW_COUNT))?,
            likes: parse_count(COL_LIKES, self.get(row, COL_LIKES))?,
            dislikes: parse_count(COL_DISLIKES, self.get(row, COL_DISLIKES))?,
            comment_count: parse_count(COL_COMMENT_COUNT, self.get(row, COL_COMMENT_COUNT))?,
            thumbnail_link: self.get(row, COL_THUMBNAIL_LINK).to_string(),
            comments_disabled: parse_bool(COL_COMMENTS_DISABLED, self.get(row, COL_COMMENTS_DISABLED))?,
            ratings_disabled: parse_bool(COL_RATINGS_DISABLED, self.get(row, COL_RATINGS_DISABLED))?,
            description: self.get(row, COL_DESCRIPTION).to_string(),
            country,
        })
    }
}

/// Parses a whole CSV stream into records plus a per-row report.
pub fn parse_csv<R: Read>(source: R) -> Result<(Vec<VideoRecord>, IngestReport), IngestError> {
    let mut reader = csv::ReaderBuilder::new()
        .has_headers(true)
        .flexible(true)
        .from_reader(source);
    let header = reader.headers()?.clone();
    let columns = ColumnIndex::from_header(&header)?;
    let width = header.len();

    let mut records = Vec::new();
    let mut report = IngestReport::default();
    let mut raw = csv::ByteRecord::new();
    let mut row = 0usize;
    loop {
        match reader.read_byte_record(&mut raw) {
            Ok(false) => break,
            Ok(true) => {
                row += 1;
                let parsed = if raw.len() != width {
                    Err(format!("expected {width} fields, found {}", raw.len()))
                } else {
                    csv::StringRecord::from_byte_record(raw.clone())
                        .map_err(|e| format!("invalid UTF-8: {e}"))
                        .and_then(|rec| columns.record(&rec))
                };
                match parsed {
                    Ok(rec) => {
                        report.accepted += 1;
                        records.push(rec);
                    }
                    Err(reason) => {
                        report.rejected += 1;
                        report.row_errors.push(RowError { row, reason });
                    }
                }
            }
            Err(err) => match err.kind() {
                csv::ErrorKind::Io(_) => return Err(err.into()),
                _ => {
                    row += 1;
                    report.rejected += 1;
                    report.row_errors.push(RowError {
                        row,
                        reason: err.to_string(),
                    });
                }
            },
        }
    }
    Ok((records, report))
}

/// Writes records with the canonical column order. Output parses back to
/// equal records through [`parse_csv`].
pub fn write_csv<W: Write>(records: &[VideoRecord], sink: W) -> Result<(), IngestError> {
    let mut writer = csv::Writer::from_writer(sink);
    let mut header: Vec<&str> = REQUIRED_COLUMNS.to_vec();
    header.push(COL_COUNTRY);
    writer.write_record(&header)?;
    for r in records {
        let b = |v: bool| if v { "True" } else { "False" };
        writer.write_record([
            r.video_id.as_str(),
            r.title.as_str(),
            &format_timestamp(&r.published_at),
            r.channel_id.as_str(),
            r.channel_title.as_str(),
            &r.category_id.to_string(),
            &format_timestamp(&r.trending_date),
            &format_tags(&r.tags),
            &r.view_count.to_string(),
            &r.likes.to_string(),
            &r.dislikes.to_string(),
            &r.comment_count.to_string(),
            r.thumbnail_link.as_str(),
            b(r.comments_disabled),
            b(r.ratings_disabled),
            r.description.as_str(),
            r.country.as_deref().unwrap_or(""),
        ])?;
    }
    writer.flush()?;
    Ok(())
}
