use serde::{Deserialize, Serialize};

use super::embedding::EmbeddingTable;

/// Function words dropped before embedding lookup.
pub const STOPWORDS: &[&str] = &[
    "a", "about", "after", "all", "also", "am", "an", "and", "any", "are", "as", "at", "be", "been", "before", "but",
    "by", "can", "did", "do", "does", "for", "from", "had", "has", "have", "he", "her", "him", "his", "how", "i", "if",
    "in", "into", "is", "it", "its", "just", "me", "more", "my", "no", "not", "now", "of", "on", "one", "only", "or",
    "our", "out", "over", "she", "so", "some", "than", "that", "the", "their", "them", "then", "there", "these",
    "they", "this", "those", "to", "too", "up", "us", "very", "was", "we", "were", "what", "when", "where", "which",
    "who", "why", "will", "with", "would", "you", "your",
];

/// Lowercases, splits on anything that is not alphanumeric, and drops
/// stopwords and single-character tokens.
pub fn tokenize(text: &str) -> Vec<String> {
    text.to_lowercase()
        .split(|c: char| !c.is_alphanumeric())
        .filter(|t| t.chars().count() >= 2 && !STOPWORDS.contains(t))
        .map(str::to_string)
        .collect()
}

/// The text fields of a video that take part in trend matching.
#[derive(Debug, Clone, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct Draft {
    pub title: String,
    #[serde(default)]
    pub tags: Vec<String>,
    #[serde(default)]
    pub description: String,
}

impl From<&crate::ingest::VideoRecord> for Draft {
    fn from(r: &crate::ingest::VideoRecord) -> Self {
        Draft {
            title: r.title.clone(),
            tags: r.tags.clone(),
            description: r.description.clone(),
        }
    }
}

/// Title, then tags, then description, joined by single spaces. Empty
/// parts are left out.
pub fn keyword_text(draft: &Draft) -> String {
    let tags = draft.tags.join(" ");
    [draft.title.as_str(), tags.as_str(), draft.description.as_str()]
        .into_iter()
        .filter(|s| !s.is_empty())
        .collect::<Vec<_>>()
        .join(" ")
}

/// Embedding of a phrase plus the tokens the table did not know.
#[derive(Debug, Clone, PartialEq)]
pub struct PhraseVector {
    /// Mean of the in-vocabulary token vectors; `None` if there were none.
    pub vector: Option<Vec<f64>>,
    pub oov_tokens: Vec<String>,
}

/// Averages token embeddings. Tokens are summed in sorted order, so the
/// result depends only on the multiset of tokens.
pub fn phrase_vector(phrase: &str, table: &EmbeddingTable) -> PhraseVector {
    let tokens = tokenize(phrase);
    let mut oov_tokens = Vec::new();
    let mut in_vocab: Vec<(&str, &[f32])> = Vec::with_capacity(tokens.len());
    for t in &tokens {
        match table.get(t) {
            Some(v) => in_vocab.push((t.as_str(), v)),
            None => oov_tokens.push(t.clone()),
        }
    }
    if in_vocab.is_empty() {
        return PhraseVector {
            vector: None,
            oov_tokens,
        };
    }
    in_vocab.sort_by(|a, b| a.0.cmp(b.0));
    let mut sum = vec![0.0f64; table.dim()];
    for (_, v) in &in_vocab {
        for (s, x) in sum.iter_mut().zip(v.iter()) {
            *s += f64::from(*x);
        }
    }
    let n = in_vocab.len() as f64;
    for s in &mut sum {
        *s /= n;
    }
    // The mean of non-zero vectors can still cancel to zero.
    let vector = if sum.iter().all(|&x| x == 0.0) { None } else { Some(sum) };
    PhraseVector { vector, oov_tokens }
}
