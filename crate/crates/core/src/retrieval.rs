//! BM25 retrieval of solved examples.

use std::cmp::Ordering;
use std::collections::{BTreeMap, HashSet};
use std::fs;
use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::cot::CotPrompt;
use crate::dataset::VarCategory;
use crate::hints::TypeHintSet;

pub const DEFAULT_K1: f64 = 1.2;
pub const DEFAULT_B: f64 = 0.75;

const FORMAT: &str = "typeprompt-bm25";
const VERSION: u32 = 1;

/// A solved example: the slice, hints and reasoning for one annotated
/// training target.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ExampleRecord {
    pub id: String,
    /// Target name as used in the question (function name for returns).
    pub name: String,
    pub slice: String,
    pub hints: TypeHintSet,
    pub cot: CotPrompt,
    pub annotation: String,
    pub kind: VarCategory,
}

#[derive(Debug, Error)]
pub enum IndexError {
    #[error("example {0}: empty annotation")]
    EmptyAnnotation(String),
    #[error("example {id}: conclusion does not quote `{annotation}`")]
    ConclusionMismatch { id: String, annotation: String },
    #[error("cannot build an index without examples")]
    Empty,
    #[error("{path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },
    #[error("{path}: {source}")]
    Json {
        path: PathBuf,
        #[source]
        source: serde_json::Error,
    },
    #[error("{path}: not a {FORMAT} v{VERSION} index")]
    Format { path: PathBuf },
}

impl ExampleRecord {
    pub fn validate(&self) -> Result<(), IndexError> {
        if self.annotation.trim().is_empty() {
            return Err(IndexError::EmptyAnnotation(self.id.clone()));
        }
        if !self.cot.conclusion.ends_with(&format!(" is `{}`.", self.annotation)) {
            return Err(IndexError::ConclusionMismatch {
                id: self.id.clone(),
                annotation: self.annotation.clone(),
            });
        }
        Ok(())
    }
}

/// Splits on non-alphanumeric characters, then on camelCase boundaries, and
/// lowercases. `HTTPServer` gives `http`, `server`.
pub fn tokenize(text: &str) -> Vec<String> {
    let mut out = Vec::new();
    for word in text.split(|c: char| !c.is_alphanumeric()).filter(|w| !w.is_empty()) {
        let chars: Vec<char> = word.chars().collect();
        let mut start = 0;
        for i in 1..chars.len() {
            let (prev, cur) = (chars[i - 1], chars[i]);
            let next_lower = chars.get(i + 1).is_some_and(|c| c.is_lowercase());
            let boundary = (cur.is_uppercase() && !prev.is_uppercase())
                || (cur.is_uppercase() && prev.is_uppercase() && next_lower);
            if boundary {
                out.push(chars[start..i].iter().collect::<String>().to_lowercase());
                start = i;
            }
        }
        out.push(chars[start..].iter().collect::<String>().to_lowercase());
    }
    out
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Bm25Index {
    format: String,
    version: u32,
    pub k1: f64,
    pub b: f64,
    pub records: Vec<ExampleRecord>,
    pub doc_lens: Vec<usize>,
    pub avg_doc_len: f64,
    /// term → (document index, term frequency), by document index.
    pub postings: BTreeMap<String, Vec<(usize, usize)>>,
}

pub fn build_index(records: Vec<ExampleRecord>, k1: f64, b: f64) -> Result<Bm25Index, IndexError> {
    if records.is_empty() {
        return Err(IndexError::Empty);
    }
    for r in &records {
        r.validate()?;
    }
    let mut postings: BTreeMap<String, Vec<(usize, usize)>> = BTreeMap::new();
    let mut doc_lens = Vec::with_capacity(records.len());
    for (i, r) in records.iter().enumerate() {
        let toks = tokenize(&r.slice);
        doc_lens.push(toks.len());
        let mut tf: BTreeMap<String, usize> = BTreeMap::new();
        for t in toks {
            *tf.entry(t).or_default() += 1;
        }
        for (t, n) in tf {
            postings.entry(t).or_default().push((i, n));
        }
    }
    let avg_doc_len = doc_lens.iter().sum::<usize>() as f64 / doc_lens.len() as f64;
    Ok(Bm25Index {
        format: FORMAT.into(),
        version: VERSION,
        k1,
        b,
        records,
        doc_lens,
        avg_doc_len,
        postings,
    })
}

impl Bm25Index {
    pub fn len(&self) -> usize {
        self.records.len()
    }

    pub fn is_empty(&self) -> bool {
        self.records.is_empty()
    }

    pub fn idf(&self, term: &str) -> f64 {
        let n = self.records.len() as f64;
        let df = self.postings.get(term).map_or(0, Vec::len) as f64;
        ((n - df + 0.5) / (df + 0.5)).ln().max(0.0)
    }

    /// BM25 score of every document against the query text. Repeated query
    /// terms count once.
    pub fn scores(&self, query: &str) -> Vec<f64> {
        let mut scores = vec![0.0; self.records.len()];
        let terms: HashSet<String> = tokenize(query).into_iter().collect();
        let mut terms: Vec<String> = terms.into_iter().collect();
        terms.sort();
        for term in terms {
            let Some(posts) = self.postings.get(&term) else { continue };
            let idf = self.idf(&term);
            for &(doc, tf) in posts {
                let tf = tf as f64;
                let norm = 1.0 - self.b + self.b * self.doc_lens[doc] as f64 / self.avg_doc_len;
                scores[doc] += idf * tf * (self.k1 + 1.0) / (tf + self.k1 * norm);
            }
        }
        scores
    }

    pub fn save(&self, path: &Path) -> Result<(), IndexError> {
        let text = serde_json::to_string(self).map_err(|source| IndexError::Json {
            path: path.to_path_buf(),
            source,
        })?;
        fs::write(path, text).map_err(|source| IndexError::Io {
            path: path.to_path_buf(),
            source,
        })
    }

    pub fn load(path: &Path) -> Result<Self, IndexError> {
        let text = fs::read_to_string(path).map_err(|source| IndexError::Io {
            path: path.to_path_buf(),
            source,
        })?;
        let header: serde_json::Value = serde_json::from_str(&text).map_err(|source| IndexError::Json {
            path: path.to_path_buf(),
            source,
        })?;
        if header.get("format").and_then(|v| v.as_str()) != Some(FORMAT)
            || header.get("version").and_then(|v| v.as_u64()) != Some(VERSION as u64)
        {
            return Err(IndexError::Format {
                path: path.to_path_buf(),
            });
        }
        serde_json::from_value(header).map_err(|source| IndexError::Json {
            path: path.to_path_buf(),
            source,
        })
    }
}

/// Indices of the `k` best `(id, score)` pairs, least similar first. Higher
/// scores win selection; ties go to the smaller id in both steps.
pub fn rank_by_scores(scored: &[(&str, f64)], k: usize) -> Vec<usize> {
    let mut order: Vec<usize> = (0..scored.len()).collect();
    order.sort_by(|&a, &b| {
        scored[b]
            .1
            .partial_cmp(&scored[a].1)
            .unwrap_or(Ordering::Equal)
            .then_with(|| scored[a].0.cmp(scored[b].0))
    });
    order.truncate(k);
    order.sort_by(|&a, &b| {
        scored[a]
            .1
            .partial_cmp(&scored[b].1)
            .unwrap_or(Ordering::Equal)
            .then_with(|| scored[a].0.cmp(scored[b].0))
    });
    order
}

/// The `k` most similar examples in ascending similarity, so the best match
/// sits right before the target.
pub fn select_examples<'a>(idx: &'a Bm25Index, target_slice: &str, k: usize) -> Vec<(&'a ExampleRecord, f64)> {
    select_examples_where(idx, target_slice, k, |_| true)
}

/// Like [`select_examples`], considering only records accepted by `keep`.
pub fn select_examples_where<'a>(
    idx: &'a Bm25Index,
    target_slice: &str,
    k: usize,
    keep: impl Fn(&ExampleRecord) -> bool,
) -> Vec<(&'a ExampleRecord, f64)> {
    let scores = idx.scores(target_slice);
    let candidates: Vec<usize> = (0..idx.records.len()).filter(|&i| keep(&idx.records[i])).collect();
    let scored: Vec<(&str, f64)> = candidates
        .iter()
        .map(|&i| (idx.records[i].id.as_str(), scores[i]))
        .collect();
    rank_by_scores(&scored, k)
        .into_iter()
        .map(|j| (&idx.records[candidates[j]], scored[j].1))
        .collect()
}

/// Examples by explicit id, in the given order. Unknown ids are returned as
/// the error value.
pub fn select_fixed<'a>(idx: &'a Bm25Index, ids: &[String]) -> Result<Vec<&'a ExampleRecord>, String> {
    ids.iter()
        .map(|id| idx.records.iter().find(|r| &r.id == id).ok_or_else(|| id.clone()))
        .collect()
}
