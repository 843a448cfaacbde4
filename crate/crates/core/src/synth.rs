//! Deterministic synthetic trending data with a known view-count function,
//! plus the small embedding and topic fixtures used by tests and demos.

use std::fmt::Write as _;

use chrono::{DateTime, Duration, TimeZone, Utc};
use rand::seq::IndexedRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, Normal};

use crate::ingest::VideoRecord;
use crate::request::PredictRequest;

/// Standard deviation of the multiplicative noise on views.
pub const NOISE: f64 = 0.05;

/// Seed behind every shipped fixture.
pub const FIXTURE_SEED: u64 = 2024;
/// Dimension of the shipped embedding fixture.
pub const FIXTURE_DIM: usize = 24;

/// Category ids drawn by the generator with their effect on log views.
pub const CATEGORIES: [(u32, f64); 10] = [
    (1, 0.6),
    (2, -0.4),
    (10, 1.5),
    (17, 0.9),
    (20, 1.1),
    (22, 0.0),
    (23, 0.7),
    (24, 1.3),
    (25, -0.6),
    (28, 0.3),
];

fn category_effect(cid: u32) -> f64 {
    CATEGORIES.iter().find(|(c, _)| *c == cid).map_or(0.0, |(_, e)| *e)
}

/// Noise-free views implied by the generator for the given fields.
pub fn expected_views(
    category_id: u32,
    hours_trending: i64,
    tag_count: usize,
    title_len: usize,
    desc_len: usize,
    comments_disabled: bool,
    ratings_disabled: bool,
) -> f64 {
    let days = hours_trending as f64 / 24.0;
    let log_views = 8.0 + category_effect(category_id) + 1.1 * (1.0 + days).ln() + 0.03 * tag_count.min(30) as f64
        - 0.01 * (title_len as f64 - 50.0).abs()
        + if desc_len > 200 { 0.3 } else { 0.0 }
        - if comments_disabled { 0.5 } else { 0.0 }
        - if ratings_disabled { 0.3 } else { 0.0 };
    log_views.exp()
}

const TOPIC_WORDS: [&[&str]; 6] = [
    &[
        "eurovision",
        "contest",
        "song",
        "singer",
        "music",
        "europe",
        "vote",
        "final",
        "performance",
    ],
    &[
        "cricket",
        "ipl",
        "match",
        "wicket",
        "highlights",
        "football",
        "goal",
        "league",
    ],
    &["royal", "wedding", "prince", "harry", "meghan", "ceremony"],
    &["iphone", "apple", "review", "unboxing", "phone", "tech"],
    &["game", "fortnite", "minecraft", "gameplay", "trailer"],
    &["recipe", "cooking", "food", "chef", "kitchen"],
];

const FILLER_WORDS: [&str; 12] = [
    "official", "video", "new", "best", "live", "full", "episode", "week", "2018", "vs", "first", "look",
];

fn category_topic(cid: u32) -> usize {
    match cid {
        10 => 0,
        17 => 1,
        24 | 25 => 2,
        28 => 3,
        20 => 4,
        _ => 5,
    }
}

fn words<R: Rng>(rng: &mut R, topic: usize, n: usize) -> Vec<&'static str> {
    (0..n)
        .map(|_| {
            if rng.random_bool(0.6) {
                *TOPIC_WORDS[topic].choose(rng).expect("non-empty")
            } else {
                *FILLER_WORDS.choose(rng).expect("non-empty")
            }
        })
        .collect()
}

fn capitalize(w: &str) -> String {
    let mut c = w.chars();
    match c.next() {
        Some(f) => f.to_uppercase().chain(c).collect(),
        None => String::new(),
    }
}

fn video_id<R: Rng>(rng: &mut R) -> String {
    const ALPHABET: &[u8] = b"ABCDEFGHIJKLMNOPQRSTUVWXYZabcdefghijklmnopqrstuvwxyz0123456789-_";
    (0..11)
        .map(|_| ALPHABET[rng.random_range(0..ALPHABET.len())] as char)
        .collect()
}

/// `n` records drawn from the generative model. The same `(n, seed)`
/// always yields the same records.
pub fn generate(n: usize, seed: u64) -> Vec<VideoRecord> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let noise = Normal::new(0.0, NOISE).expect("valid sigma");
    let start = Utc.with_ymd_and_hms(2017, 11, 14, 0, 0, 0).unwrap();
    let window_secs = 200 * 24 * 3600;
    let channels: Vec<(String, String, u32)> = (0..60)
        .map(|i| {
            let cid = CATEGORIES[rng.random_range(0..CATEGORIES.len())].0;
            (format!("UC{:022}", i), format!("Channel {i:02}"), cid)
        })
        .collect();
    let countries = ["US", "GB", "CA", "IN", "DE"];

    (0..n)
        .map(|_| {
            let (channel_id, channel_title, cid) = channels.choose(&mut rng).expect("channels").clone();
            let topic = category_topic(cid);
            let published_at = start + Duration::seconds(rng.random_range(0..window_secs));
            let u: f64 = rng.random();
            let hours = 2 + (u * u * 718.0) as i64;
            let trending_date = published_at + Duration::hours(hours) + Duration::seconds(rng.random_range(0..3600));

            let n_title = rng.random_range(2..=12);
            let title = words(&mut rng, topic, n_title)
                .iter()
                .map(|w| capitalize(w))
                .collect::<Vec<_>>()
                .join(" ");
            let n_tags = rng.random_range(0..=30);
            let mut tags: Vec<String> = words(&mut rng, topic, n_tags).iter().map(|w| w.to_string()).collect();
            tags.dedup();
            let n_desc = if rng.random_bool(0.2) {
                0
            } else {
                rng.random_range(3..=60)
            };
            let description = words(&mut rng, topic, n_desc).join(" ");
            let comments_disabled = rng.random_bool(0.05);
            let ratings_disabled = rng.random_bool(0.03);

            let dh = (trending_date - published_at).num_seconds() / 3600;
            let mean = expected_views(
                cid,
                dh,
                tags.len(),
                title.chars().count(),
                description.chars().count(),
                comments_disabled,
                ratings_disabled,
            );
            let factor = (1.0 + noise.sample(&mut rng)).max(0.5);
            let view_count = (mean * factor).round() as u64;

            let like_rate = rng.random_range(0.02..0.05);
            let (likes, dislikes) = if ratings_disabled {
                (0, 0)
            } else {
                let l = (view_count as f64 * like_rate).round() as u64;
                (l, (l as f64 * rng.random_range(0.02..0.1)).round() as u64)
            };
            let comment_count = if comments_disabled {
                0
            } else {
                (view_count as f64 * like_rate * rng.random_range(0.08..0.15)).round() as u64
            };
            let id = video_id(&mut rng);
            VideoRecord {
                thumbnail_link: format!("https://i.ytimg.com/vi/{id}/default.jpg"),
                video_id: id,
                title,
                published_at,
                channel_id,
                channel_title,
                category_id: cid,
                trending_date,
                tags,
                view_count,
                likes,
                dislikes,
                comment_count,
                comments_disabled,
                ratings_disabled,
                description,
                country: Some(countries.choose(&mut rng).expect("countries").to_string()),
            }
        })
        .collect()
}

fn ts(s: &str) -> DateTime<Utc> {
    DateTime::parse_from_rfc3339(s)
        .expect("fixture timestamp")
        .with_timezone(&Utc)
}

/// Five source rows whose featurization reproduces the published
/// five-row feature sample.
pub fn sample_records() -> Vec<VideoRecord> {
    let rows: [(u32, u64, &str, &str, &str); 5] = [
        (
            24,
            834_299,
            "2018-04-10T14:00:00Z",
            "2018-04-14T03:00:00Z",
            "Late Night Sketch",
        ),
        (
            1,
            61_240,
            "2018-01-05T10:00:00Z",
            "2018-01-07T12:00:00Z",
            "Short Film Trailer",
        ),
        (
            19,
            573_049,
            "2018-04-03T08:00:00Z",
            "2018-04-10T18:00:00Z",
            "City Walking Tour",
        ),
        (
            10,
            16_408_326,
            "2018-04-20T12:00:00Z",
            "2018-05-05T18:00:00Z",
            "Official Music Video",
        ),
        (
            26,
            2_491_725,
            "2018-05-02T01:00:00Z",
            "2018-05-13T23:00:00Z",
            "Home Makeover Tips",
        ),
    ];
    rows.iter()
        .enumerate()
        .map(|(i, &(cid, views, published, trending, title))| VideoRecord {
            video_id: format!("sample{:04}", i + 1),
            title: title.to_string(),
            published_at: ts(published),
            channel_id: format!("UCsamplechannel{:02}", i + 1),
            channel_title: format!("Sample Channel {}", i + 1),
            category_id: cid,
            trending_date: ts(trending),
            tags: vec!["sample".into(), format!("row{}", i + 1)],
            view_count: views,
            likes: views / 40,
            dislikes: views / 1000,
            comment_count: views / 300,
            thumbnail_link: format!("https://i.ytimg.com/vi/sample{:04}/default.jpg", i + 1),
            comments_disabled: false,
            ratings_disabled: false,
            description: format!("Sample description {}", i + 1),
            country: Some("US".into()),
        })
        .collect()
}

/// Word vectors in word2vec text format. Words of one topic cluster
/// around a shared direction; filler words point elsewhere at random.
pub fn embedding_fixture(dim: usize, seed: u64) -> String {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let gauss = Normal::new(0.0, 1.0).expect("valid sigma");
    let mut rows: Vec<(String, Vec<f64>)> = Vec::new();
    for cluster in TOPIC_WORDS {
        let centre: Vec<f64> = (0..dim).map(|_| gauss.sample(&mut rng)).collect();
        for w in cluster {
            let v = centre.iter().map(|c| c + 0.35 * gauss.sample(&mut rng)).collect();
            rows.push((w.to_string(), v));
        }
    }
    for w in FILLER_WORDS {
        rows.push((w.to_string(), (0..dim).map(|_| gauss.sample(&mut rng)).collect()));
    }
    let mut out = format!("{} {}\n", rows.len(), dim);
    for (w, v) in rows {
        out.push_str(&w);
        for x in v {
            write!(out, " {x:.5}").expect("write to string");
        }
        out.push('\n');
    }
    out
}

/// A five-phrase trending list.
pub fn topics_fixture() -> String {
    "# fetched: 2018-05-31T00:00:00Z\n\
     # Monthly trending topics\n\
     Eurovision\n\
     Royal Wedding\n\
     IPL Cricket\n\
     Fortnite\n\
     iPhone Review\n"
        .to_string()
}

/// Candidate drafts for ranking. The first two differ only in a title of
/// equal length, and only the first names a trending topic.
pub fn drafts_fixture() -> Vec<PredictRequest> {
    let base = |id: &str, title: &str, tags: &[&str], description: &str| PredictRequest {
        id: Some(id.to_string()),
        title: Some(title.to_string()),
        description: Some(description.to_string()),
        tags: Some(tags.iter().map(|t| t.to_string()).collect()),
        category_id: Some(10),
        published_at: Some("2018-05-10T18:00:00Z".to_string()),
        as_of: Some("2018-05-14T18:00:00Z".to_string()),
        ..Default::default()
    };
    vec![
        base(
            "contest",
            "Eurovision Contest Song",
            &["studio", "session"],
            "Recorded at home",
        ),
        base(
            "piano",
            "Late Night Piano Improv",
            &["studio", "session"],
            "Recorded at home",
        ),
        base(
            "kitchen",
            "Weeknight Recipe",
            &["cooking", "food"],
            "Quick recipe from the kitchen",
        ),
    ]
}
