//! Numeric feature engineering on top of [`VideoRecord`]s.
//!
//! Every video becomes a fixed-order row of numbers. The time-delta columns
//! `dd`/`dh` hold whole days and *total* whole hours between publication
//! and the as-of instant, so `dd == dh / 24` always.
//!
//! Two profiles exist. `pre_upload` holds what a creator knows before
//! publishing; `post_upload` adds the engagement counters.

use std::collections::BTreeMap;
use std::fmt;
use std::io::Write;

use chrono::{DateTime, Datelike, Utc};
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::ingest::VideoRecord;
use crate::trees::Matrix;

/// Bumped whenever the column list or its order changes.
pub const PROFILE_VERSION: u32 = 1;

const BASE_COLUMNS: [&str; 12] = [
    "cid",
    "cd",
    "rd",
    "dd",
    "dh",
    "py",
    "pm",
    "ty",
    "tm",
    "tag_count",
    "title_len",
    "desc_len",
];
const ENGAGEMENT_COLUMNS: [&str; 3] = ["likes", "dislikes", "comment_count"];
const CHANNEL_COLUMN: &str = "channel_video_count";

#[derive(Debug, Error, PartialEq)]
pub enum FeatureError {
    #[error("as-of instant {as_of} precedes publication {published_at}")]
    Ordering {
        published_at: DateTime<Utc>,
        as_of: DateTime<Utc>,
    },
    #[error("cannot build a feature matrix from an empty dataset")]
    EmptyDataset,
    #[error("feature vector is missing {0} required by profile {1}")]
    MissingColumn(&'static str, String),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ProfileKind {
    PreUpload,
    PostUpload,
}

impl ProfileKind {
    pub fn as_str(self) -> &'static str {
        match self {
            ProfileKind::PreUpload => "pre_upload",
            ProfileKind::PostUpload => "post_upload",
        }
    }
}

impl fmt::Display for ProfileKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

/// The ordered column set a model is trained on.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct FeatureProfile {
    pub kind: ProfileKind,
    pub version: u32,
    /// Adds the channel frequency column. Off by default.
    #[serde(default)]
    pub channel_frequency: bool,
    pub columns: Vec<String>,
}

impl FeatureProfile {
    pub fn new(kind: ProfileKind, channel_frequency: bool) -> Self {
        let mut columns: Vec<String> = BASE_COLUMNS.iter().map(|c| c.to_string()).collect();
        if kind == ProfileKind::PostUpload {
            columns.extend(ENGAGEMENT_COLUMNS.iter().map(|c| c.to_string()));
        }
        if channel_frequency {
            columns.push(CHANNEL_COLUMN.to_string());
        }
        FeatureProfile {
            kind,
            version: PROFILE_VERSION,
            channel_frequency,
            columns,
        }
    }

    pub fn pre_upload() -> Self {
        Self::new(ProfileKind::PreUpload, false)
    }

    pub fn post_upload() -> Self {
        Self::new(ProfileKind::PostUpload, false)
    }

    /// `pre_upload/v1`, `post_upload+channel/v1`, ...
    pub fn id(&self) -> String {
        let channel = if self.channel_frequency { "+channel" } else { "" };
        format!("{}{}/v{}", self.kind, channel, self.version)
    }

    pub fn width(&self) -> usize {
        self.columns.len()
    }

    pub fn column_index(&self, name: &str) -> Option<usize> {
        self.columns.iter().position(|c| c == name)
    }
}

impl fmt::Display for FeatureProfile {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.id())
    }
}

/// Engineered features of one video.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FeatureVector {
    pub cid: u32,
    pub cd: u8,
    pub rd: u8,
    pub dd: i64,
    pub dh: i64,
    pub py: i32,
    pub pm: u32,
    pub ty: i32,
    pub tm: u32,
    pub tag_count: usize,
    pub title_len: usize,
    pub desc_len: usize,
    pub likes: Option<u64>,
    pub dislikes: Option<u64>,
    pub comment_count: Option<u64>,
    pub channel_video_count: Option<u64>,
    /// Raw view count, present for training rows.
    pub target: Option<u64>,
}

impl FeatureVector {
    /// The profile this vector satisfies, judged by which engagement
    /// counters it carries.
    pub fn inferred_kind(&self) -> ProfileKind {
        if self.likes.is_some() && self.dislikes.is_some() && self.comment_count.is_some() {
            ProfileKind::PostUpload
        } else {
            ProfileKind::PreUpload
        }
    }

    /// Lays the vector out in `profile` column order.
    pub fn to_row(&self, profile: &FeatureProfile) -> Result<Vec<f64>, FeatureError> {
        let missing = |col: &'static str| FeatureError::MissingColumn(col, profile.id());
        let mut row = vec![
            f64::from(self.cid),
            f64::from(self.cd),
            f64::from(self.rd),
            self.dd as f64,
            self.dh as f64,
            f64::from(self.py),
            f64::from(self.pm),
            f64::from(self.ty),
            f64::from(self.tm),
            self.tag_count as f64,
            self.title_len as f64,
            self.desc_len as f64,
        ];
        if profile.kind == ProfileKind::PostUpload {
            row.push(self.likes.ok_or_else(|| missing("likes"))? as f64);
            row.push(self.dislikes.ok_or_else(|| missing("dislikes"))? as f64);
            row.push(self.comment_count.ok_or_else(|| missing("comment_count"))? as f64);
        }
        if profile.channel_frequency {
            row.push(self.channel_video_count.ok_or_else(|| missing(CHANNEL_COLUMN))? as f64);
        }
        debug_assert_eq!(row.len(), profile.width());
        Ok(row)
    }
}

/// Whole days and total whole hours elapsed from `published_at` to `as_of`.
pub fn time_deltas(published_at: DateTime<Utc>, as_of: DateTime<Utc>) -> Result<(i64, i64), FeatureError> {
    if as_of < published_at {
        return Err(FeatureError::Ordering { published_at, as_of });
    }
    let secs = (as_of - published_at).num_seconds();
    let dh = secs / 3600;
    Ok((dh / 24, dh))
}

/// Number of training videos per channel title, the frequency encoding
/// behind the optional channel column. Unknown channels count as zero.
#[derive(Debug, Clone, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct ChannelFrequency {
    pub counts: BTreeMap<String, u64>,
}

impl ChannelFrequency {
    pub fn from_records(records: &[VideoRecord]) -> Self {
        let mut counts = BTreeMap::new();
        for r in records {
            *counts.entry(r.channel_title.clone()).or_insert(0) += 1;
        }
        ChannelFrequency { counts }
    }

    pub fn count(&self, channel: &str) -> u64 {
        self.counts.get(channel).copied().unwrap_or(0)
    }
}

/// The subset of a video's fields that featurization reads. Both stored
/// records and creator drafts convert into this.
#[derive(Debug, Clone, Copy)]
pub struct VideoFacts<'a> {
    pub title: &'a str,
    pub description: &'a str,
    pub tag_count: usize,
    pub category_id: u32,
    pub channel_title: Option<&'a str>,
    pub published_at: DateTime<Utc>,
    pub comments_disabled: bool,
    pub ratings_disabled: bool,
    pub likes: Option<u64>,
    pub dislikes: Option<u64>,
    pub comment_count: Option<u64>,
    pub view_count: Option<u64>,
}

impl<'a> From<&'a VideoRecord> for VideoFacts<'a> {
    fn from(r: &'a VideoRecord) -> Self {
        VideoFacts {
            title: &r.title,
            description: &r.description,
            tag_count: r.tags.len(),
            category_id: r.category_id,
            channel_title: Some(&r.channel_title),
            published_at: r.published_at,
            comments_disabled: r.comments_disabled,
            ratings_disabled: r.ratings_disabled,
            likes: Some(r.likes),
            dislikes: Some(r.dislikes),
            comment_count: Some(r.comment_count),
            view_count: Some(r.view_count),
        }
    }
}

/// Turns videos into feature vectors for one profile.
#[derive(Debug, Clone)]
pub struct Featurizer {
    profile: FeatureProfile,
    channels: Option<ChannelFrequency>,
}

impl Featurizer {
    pub fn new(profile: FeatureProfile) -> Self {
        Featurizer {
            profile,
            channels: None,
        }
    }

    pub fn with_channels(profile: FeatureProfile, channels: ChannelFrequency) -> Self {
        Featurizer {
            profile,
            channels: Some(channels),
        }
    }

    pub fn profile(&self) -> &FeatureProfile {
        &self.profile
    }

    pub fn featurize_facts(&self, facts: VideoFacts<'_>, as_of: DateTime<Utc>) -> Result<FeatureVector, FeatureError> {
        let (dd, dh) = time_deltas(facts.published_at, as_of)?;
        let post = self.profile.kind == ProfileKind::PostUpload;
        let channel_video_count = if self.profile.channel_frequency {
            let channels = self.channels.as_ref();
            Some(facts.channel_title.zip(channels).map_or(0, |(c, freq)| freq.count(c)))
        } else {
            None
        };
        Ok(FeatureVector {
            cid: facts.category_id,
            cd: u8::from(facts.comments_disabled),
            rd: u8::from(facts.ratings_disabled),
            dd,
            dh,
            py: facts.published_at.year(),
            pm: facts.published_at.month(),
            ty: as_of.year(),
            tm: as_of.month(),
            tag_count: facts.tag_count,
            title_len: facts.title.chars().count(),
            desc_len: facts.description.chars().count(),
            likes: if post { facts.likes } else { None },
            dislikes: if post { facts.dislikes } else { None },
            comment_count: if post { facts.comment_count } else { None },
            channel_video_count,
            target: facts.view_count,
        })
    }

    pub fn featurize(&self, record: &VideoRecord, as_of: DateTime<Utc>) -> Result<FeatureVector, FeatureError> {
        self.featurize_facts(record.into(), as_of)
    }

    /// One row per record, each taken as of its trending date.
    pub fn build_matrix(&self, records: &[VideoRecord]) -> Result<FeatureMatrix, FeatureError> {
        if records.is_empty() {
            return Err(FeatureError::EmptyDataset);
        }
        let width = self.profile.width();
        let mut data = Vec::with_capacity(records.len() * width);
        let mut targets = Vec::with_capacity(records.len());
        for r in records {
            let fv = self.featurize(r, r.trending_date)?;
            data.extend(fv.to_row(&self.profile)?);
            targets.push(r.view_count as f64);
        }
        Ok(FeatureMatrix {
            profile: self.profile.clone(),
            x: Matrix::new(records.len(), width, data),
            targets,
        })
    }
}

/// Featurizes with the default (channel-free) encoding.
pub fn featurize(
    record: &VideoRecord,
    as_of: DateTime<Utc>,
    profile: &FeatureProfile,
) -> Result<FeatureVector, FeatureError> {
    Featurizer::new(profile.clone()).featurize(record, as_of)
}

pub fn build_matrix(records: &[VideoRecord], profile: &FeatureProfile) -> Result<FeatureMatrix, FeatureError> {
    Featurizer::new(profile.clone()).build_matrix(records)
}

/// Rows of features plus raw view-count targets.
#[derive(Debug, Clone, PartialEq)]
pub struct FeatureMatrix {
    pub profile: FeatureProfile,
    pub x: Matrix,
    pub targets: Vec<f64>,
}

impl FeatureMatrix {
    pub fn n_rows(&self) -> usize {
        self.x.n_rows()
    }

    pub fn columns(&self) -> &[String] {
        &self.profile.columns
    }

    pub fn column(&self, name: &str) -> Option<Vec<f64>> {
        let j = self.profile.column_index(name)?;
        Some(self.x.column(j))
    }

    pub fn select_rows(&self, rows: &[usize]) -> FeatureMatrix {
        FeatureMatrix {
            profile: self.profile.clone(),
            x: self.x.select_rows(rows),
            targets: rows.iter().map(|&i| self.targets[i]).collect(),
        }
    }

    /// Writes the matrix as CSV: profile columns followed by `views`.
    pub fn write_csv<W: Write>(&self, sink: W) -> Result<(), csv::Error> {
        let mut w = csv::Writer::from_writer(sink);
        let mut header: Vec<&str> = self.profile.columns.iter().map(String::as_str).collect();
        header.push("views");
        w.write_record(&header)?;
        for i in 0..self.n_rows() {
            let mut fields: Vec<String> = self.x.row(i).iter().map(|v| v.to_string()).collect();
            fields.push(self.targets[i].to_string());
            w.write_record(&fields)?;
        }
        w.flush()?;
        Ok(())
    }
}
