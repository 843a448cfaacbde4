use std::collections::hash_map::Entry;
use std::collections::HashMap;
use std::fs::File;
use std::io::{BufRead, BufReader};
use std::path::Path;

use serde::Serialize;

use super::TrendError;

/// Token normalization applied at load and lookup time.
pub const NORMALIZATION: &str = "lowercase";

/// Static word vectors loaded from word2vec text format.
#[derive(Debug, Clone, PartialEq)]
pub struct EmbeddingTable {
    dim: usize,
    vectors: HashMap<String, Vec<f32>>,
    warnings: LoadWarnings,
}

/// Rows skipped while loading.
#[derive(Debug, Clone, Default, PartialEq, Eq, Serialize)]
pub struct LoadWarnings {
    /// Tokens seen again after normalization; the first row wins.
    pub duplicate_tokens: usize,
    /// All-zero rows, which have no direction and cannot be compared.
    pub zero_vectors: usize,
}

impl EmbeddingTable {
    /// Builds a table directly; zero vectors and duplicates are skipped as
    /// in [`load_embeddings`].
    pub fn from_entries<I, S>(dim: usize, entries: I) -> Result<Self, TrendError>
    where
        I: IntoIterator<Item = (S, Vec<f32>)>,
        S: AsRef<str>,
    {
        let mut table = EmbeddingTable {
            dim,
            vectors: HashMap::new(),
            warnings: LoadWarnings::default(),
        };
        for (token, v) in entries {
            if v.len() != dim {
                return Err(TrendError::Shape {
                    expected: dim,
                    found: v.len(),
                });
            }
            table.insert(token.as_ref(), v);
        }
        Ok(table)
    }

    fn insert(&mut self, token: &str, v: Vec<f32>) {
        if v.iter().all(|&x| x == 0.0) {
            self.warnings.zero_vectors += 1;
            return;
        }
        let key = token.to_lowercase();
        match self.vectors.entry(key) {
            Entry::Occupied(_) => self.warnings.duplicate_tokens += 1,
            Entry::Vacant(slot) => {
                slot.insert(v);
            }
        }
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn len(&self) -> usize {
        self.vectors.len()
    }

    pub fn is_empty(&self) -> bool {
        self.vectors.is_empty()
    }

    pub fn warnings(&self) -> &LoadWarnings {
        &self.warnings
    }

    pub fn get(&self, token: &str) -> Option<&[f32]> {
        match self.vectors.get(token) {
            Some(v) => Some(v),
            None => self.vectors.get(&token.to_lowercase()).map(Vec::as_slice),
        }
    }

    /// Same table with every vector multiplied by `factor`.
    pub fn scaled(&self, factor: f32) -> Self {
        EmbeddingTable {
            dim: self.dim,
            vectors: self
                .vectors
                .iter()
                .map(|(k, v)| (k.clone(), v.iter().map(|x| x * factor).collect()))
                .collect(),
            warnings: self.warnings.clone(),
        }
    }
}

fn format_err(line: usize, message: impl Into<String>) -> TrendError {
    TrendError::Format {
        line,
        message: message.into(),
    }
}

/// Reads word2vec text format: a `vocab_size dim` header, then one
/// `token v1 .. v_dim` row per token.
pub fn load_embeddings<R: BufRead>(source: R) -> Result<EmbeddingTable, TrendError> {
    let mut lines = source.lines().enumerate();
    let (vocab, dim) = loop {
        let Some((i, line)) = lines.next() else {
            return Err(format_err(1, "missing header"));
        };
        let line = line?;
        if line.trim().is_empty() {
            continue;
        }
        let parts: Vec<&str> = line.split_whitespace().collect();
        let parse = |s: &str| s.parse::<usize>().ok();
        match parts.as_slice() {
            [v, d] => match (parse(v), parse(d)) {
                (Some(v), Some(d)) if d > 0 => break (v, d),
                _ => return Err(format_err(i + 1, format!("bad header {line:?}"))),
            },
            _ => {
                return Err(format_err(
                    i + 1,
                    format!("header must be \"vocab_size dim\", got {line:?}"),
                ))
            }
        }
    };

    let mut table = EmbeddingTable {
        dim,
        vectors: HashMap::with_capacity(vocab.min(1 << 20)),
        warnings: LoadWarnings::default(),
    };
    let mut rows = 0usize;
    let mut last_line = 1;
    for (i, line) in lines {
        let line = line?;
        let lineno = i + 1;
        last_line = lineno;
        if line.trim().is_empty() {
            continue;
        }
        rows += 1;
        if rows > vocab {
            return Err(format_err(
                lineno,
                format!("header declares {vocab} tokens but more rows follow"),
            ));
        }
        let mut parts = line.split_whitespace();
        let token = parts.next().expect("non-empty line");
        let values: Vec<f32> = parts
            .map(|p| p.parse::<f32>().ok().filter(|v| v.is_finite()))
            .collect::<Option<_>>()
            .ok_or_else(|| format_err(lineno, format!("non-numeric value in row for {token:?}")))?;
        if values.len() != dim {
            return Err(format_err(
                lineno,
                format!("expected {dim} values for {token:?}, found {}", values.len()),
            ));
        }
        table.insert(token, values);
    }
    if rows < vocab {
        return Err(format_err(
            last_line,
            format!("header declares {vocab} tokens but only {rows} rows follow"),
        ));
    }
    if table.warnings.duplicate_tokens > 0 || table.warnings.zero_vectors > 0 {
        log::warn!(
            "embeddings: skipped {} duplicate tokens and {} zero vectors",
            table.warnings.duplicate_tokens,
            table.warnings.zero_vectors
        );
    }
    Ok(table)
}

pub fn load_embeddings_file(path: impl AsRef<Path>) -> Result<EmbeddingTable, TrendError> {
    load_embeddings(BufReader::new(File::open(path)?))
}

/// Cosine similarity of two non-zero vectors of equal length.
pub fn cosine(u: &[f64], v: &[f64]) -> Result<f64, TrendError> {
    if u.len() != v.len() {
        return Err(TrendError::Shape {
            expected: u.len(),
            found: v.len(),
        });
    }
    let (mut dot, mut uu, mut vv) = (0.0, 0.0, 0.0);
    for (a, b) in u.iter().zip(v) {
        dot += a * b;
        uu += a * a;
        vv += b * b;
    }
    if uu == 0.0 || vv == 0.0 {
        return Err(TrendError::ZeroVector);
    }
    Ok(dot / (uu.sqrt() * vv.sqrt()))
}
