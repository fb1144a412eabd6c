//! The representation stage: produce or ingest the embedding matrix.
//!
//! Two sources are supported: a built-in deterministic hashed n-gram text
//! embedder, and passthrough of embeddings already attached to the corpus
//! (typically loaded from a file, see [`io`]).

pub mod io;

use ndarray::Array2;
use rayon::prelude::*;

use crate::error::{Error, Result};
use crate::matrix::EmbeddingMatrix;

/// One dataset record. Either `text` or `embedding` must be present.
#[derive(Debug, Clone)]
pub struct CorpusRecord {
    pub id: String,
    pub text: Option<String>,
    pub embedding: Option<Vec<f64>>,
    pub batch: Option<String>,
}

/// An ordered, non-empty collection of records with unique ids.
#[derive(Debug, Clone)]
pub struct Corpus {
    records: Vec<CorpusRecord>,
}

impl Corpus {
    pub fn new(records: Vec<CorpusRecord>) -> Result<Self> {
        if records.is_empty() {
            return Err(Error::Input("corpus is empty".into()));
        }
        let mut seen = std::collections::HashSet::new();
        let mut embed_dim: Option<usize> = None;
        for rec in &records {
            if !seen.insert(rec.id.as_str()) {
                return Err(Error::Input(format!("duplicate record id {:?}", rec.id)));
            }
            if rec.text.is_none() && rec.embedding.is_none() {
                return Err(Error::Input(format!(
                    "record {:?} has neither text nor embedding",
                    rec.id
                )));
            }
            if let Some(e) = &rec.embedding {
                if let Some(&bad) = e.iter().find(|v| !v.is_finite()) {
                    return Err(Error::Input(format!(
                        "record {:?} has non-finite embedding value {bad}",
                        rec.id
                    )));
                }
                match embed_dim {
                    None => embed_dim = Some(e.len()),
                    Some(d) if d != e.len() => {
                        return Err(Error::Input(format!(
                            "record {:?} has embedding dimension {} but earlier records have {}",
                            rec.id,
                            e.len(),
                            d
                        )))
                    }
                    _ => {}
                }
            }
        }
        Ok(Self { records })
    }

    pub fn records(&self) -> &[CorpusRecord] {
        &self.records
    }

    pub fn len(&self) -> usize {
        self.records.len()
    }

    pub fn is_empty(&self) -> bool {
        false // construction rejects empty corpora
    }
}

/// How to turn a corpus into an embedding matrix.
#[derive(Debug, Clone, PartialEq)]
pub enum EmbedderSpec {
    /// Signed feature hashing of word-level n-grams (orders `1..=ngram_order`)
    /// into a power-of-two dimension, optionally L2-normalized.
    HashedNgram {
        ngram_order: usize,
        dim: usize,
        normalize: bool,
    },
    /// Pass through embeddings carried by the records themselves.
    ExternalFile { normalize: bool },
}

impl EmbedderSpec {
    pub const DEFAULT_NGRAM_ORDER: usize = 3;
    pub const DEFAULT_DIM: usize = 256;

    pub fn hashed_ngram(ngram_order: usize, dim: usize, normalize: bool) -> Result<Self> {
        if ngram_order < 1 {
            return Err(Error::Parameter("n-gram order must be >= 1".into()));
        }
        if dim < 16 || !dim.is_power_of_two() {
            return Err(Error::Parameter(format!(
                "hashed embedding dimension must be a power of two >= 16, got {dim}"
            )));
        }
        Ok(Self::HashedNgram { ngram_order, dim, normalize })
    }

    pub fn external_file(normalize: bool) -> Self {
        Self::ExternalFile { normalize }
    }
}

impl Default for EmbedderSpec {
    fn default() -> Self {
        Self::HashedNgram {
            ngram_order: Self::DEFAULT_NGRAM_ORDER,
            dim: Self::DEFAULT_DIM,
            normalize: true,
        }
    }
}

/// Lowercase, split on Unicode whitespace, strip leading/trailing
/// non-alphanumeric characters, drop tokens that end up empty.
pub fn tokenize(text: &str) -> Vec<String> {
    text.split_whitespace()
        .map(|w| w.trim_matches(|c: char| !c.is_alphanumeric()))
        .filter(|w| !w.is_empty())
        .map(|w| w.to_lowercase())
        .collect()
}

// FNV-1a 64-bit: the fixed, documented hash behind the feature hasher.
// Offset basis and prime are the standard constants, so the embedding of a
// given text is identical across runs and platforms.
const FNV_OFFSET: u64 = 0xcbf2_9ce4_8422_2325;
const FNV_PRIME: u64 = 0x0000_0100_0000_01b3;

fn fnv1a64(bytes: &[u8]) -> u64 {
    let mut h = FNV_OFFSET;
    for &b in bytes {
        h ^= u64::from(b);
        h = h.wrapping_mul(FNV_PRIME);
    }
    h
}

/// Hash one text into a `dim`-length vector: every n-gram of orders
/// `1..=order` contributes +1 or -1 (sign from the hash's top bit) at
/// `hash & (dim - 1)`.
fn hash_text(text: &str, order: usize, dim: usize) -> Vec<f64> {
    let tokens = tokenize(text);
    let mut v = vec![0.0; dim];
    let mut key = Vec::new();
    for n in 1..=order {
        for window in tokens.windows(n) {
            key.clear();
            for (i, tok) in window.iter().enumerate() {
                if i > 0 {
                    key.push(0x1f); // unit separator, never inside a token
                }
                key.extend_from_slice(tok.as_bytes());
            }
            let h = fnv1a64(&key);
            let idx = (h & (dim as u64 - 1)) as usize;
            let sign = if h >> 63 == 1 { -1.0 } else { 1.0 };
            v[idx] += sign;
        }
    }
    v
}

/// An embedding matrix plus the indices of rows that came out all-zero
/// (empty token set or zero input vector); such rows are kept as zeros and
/// skipped by normalization.
#[derive(Debug, Clone)]
pub struct Embedded {
    pub matrix: EmbeddingMatrix,
    pub zero_rows: Vec<usize>,
}

/// Embed every record of the corpus, preserving record order.
///
/// Deterministic: the same corpus and spec yield the same matrix, bit for
/// bit, regardless of thread count.
pub fn embed_corpus(corpus: &Corpus, spec: &EmbedderSpec) -> Result<Embedded> {
    let rows: Vec<Vec<f64>> = match spec {
        EmbedderSpec::HashedNgram { ngram_order, dim, .. } => {
            if let Some(rec) = corpus.records().iter().find(|r| r.text.is_none()) {
                return Err(Error::Input(format!(
                    "record {:?} has no text; the hashed n-gram embedder requires text",
                    rec.id
                )));
            }
            corpus
                .records()
                .par_iter()
                .map(|r| hash_text(r.text.as_deref().unwrap(), *ngram_order, *dim))
                .collect()
        }
        EmbedderSpec::ExternalFile { .. } => {
            if let Some(rec) = corpus.records().iter().find(|r| r.embedding.is_none()) {
                return Err(Error::Input(format!(
                    "record {:?} has no embedding; external-file embedding requires one per record",
                    rec.id
                )));
            }
            corpus
                .records()
                .iter()
                .map(|r| r.embedding.clone().unwrap())
                .collect()
        }
    };

    let normalize = match spec {
        EmbedderSpec::HashedNgram { normalize, .. } => *normalize,
        EmbedderSpec::ExternalFile { normalize } => *normalize,
    };

    let n = rows.len();
    let d = rows[0].len();
    let mut data = Array2::from_shape_vec((n, d), rows.concat())
        .expect("shape matches collected length");
    let mut zero_rows = Vec::new();
    for (i, mut row) in data.rows_mut().into_iter().enumerate() {
        let norm = row.iter().map(|v| v * v).sum::<f64>().sqrt();
        if norm == 0.0 {
            zero_rows.push(i);
        } else if normalize {
            row.mapv_inplace(|v| v / norm);
        }
    }
    Ok(Embedded {
        matrix: EmbeddingMatrix::new(data)?,
        zero_rows,
    })
}
