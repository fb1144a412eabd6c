//! File ingestion for embeddings and corpora.
//!
//! Three formats:
//! - CSV embeddings: first line `n,d`, then `n` lines of `d` comma-separated
//!   decimal floats.
//! - f32 binary embeddings: 16-byte header (magic `DVK1`, little-endian u32
//!   `n`, u32 `d`, reserved u32 = 0), then `n*d` little-endian IEEE-754
//!   binary32 values, row-major.
//! - JSONL corpus: one object per line with keys `id` (required), `text`,
//!   `embedding`, `batch` (optional).

use std::fs;
use std::path::Path;

use ndarray::Array2;
use serde::Deserialize;

use crate::embed::{Corpus, CorpusRecord, EmbedderSpec};
use crate::error::{Error, Result};
use crate::matrix::EmbeddingMatrix;

pub const F32_MAGIC: &[u8; 4] = b"DVK1";
pub const F32_HEADER_LEN: usize = 16;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum EmbeddingFormat {
    Csv,
    F32Binary,
    Jsonl,
}

impl EmbeddingFormat {
    /// Infer the format from a file extension (`csv`, `bin`, `jsonl`).
    pub fn from_extension(path: &Path) -> Option<Self> {
        match path.extension().and_then(|e| e.to_str()) {
            Some("csv") => Some(Self::Csv),
            Some("bin") => Some(Self::F32Binary),
            Some("jsonl") => Some(Self::Jsonl),
            _ => None,
        }
    }
}

fn format_err(path: &Path, location: impl Into<String>, message: impl Into<String>) -> Error {
    Error::Format {
        path: path.display().to_string(),
        location: location.into(),
        message: message.into(),
    }
}

/// Load an embedding matrix from a file in the given format.
pub fn load_embeddings(path: &Path, format: EmbeddingFormat) -> Result<EmbeddingMatrix> {
    match format {
        EmbeddingFormat::Csv => load_csv(path),
        EmbeddingFormat::F32Binary => load_f32_binary(path),
        EmbeddingFormat::Jsonl => {
            let corpus = load_corpus_jsonl(path)?;
            let out = crate::embed::embed_corpus(&corpus, &EmbedderSpec::external_file(false))
                .map_err(|e| match e {
                    Error::Input(msg) => format_err(path, "corpus", msg),
                    other => other,
                })?;
            Ok(out.matrix)
        }
    }
}

fn load_csv(path: &Path) -> Result<EmbeddingMatrix> {
    let content = fs::read_to_string(path)?;
    let mut lines = content.lines().enumerate();
    let (_, header) = lines
        .next()
        .ok_or_else(|| format_err(path, "line 1", "empty file"))?;
    let dims: Vec<&str> = header.split(',').collect();
    if dims.len() != 2 {
        return Err(format_err(path, "line 1", "header must be `n,d`"));
    }
    let n: usize = dims[0]
        .trim()
        .parse()
        .map_err(|_| format_err(path, "line 1", format!("bad sample count {:?}", dims[0])))?;
    let d: usize = dims[1]
        .trim()
        .parse()
        .map_err(|_| format_err(path, "line 1", format!("bad dimension {:?}", dims[1])))?;
    if n == 0 || d == 0 {
        return Err(format_err(path, "line 1", "empty dataset rejected (n and d must be >= 1)"));
    }

    let mut data = Vec::with_capacity(n * d);
    let mut rows = 0usize;
    for (idx, line) in lines {
        if line.trim().is_empty() {
            continue;
        }
        let lineno = idx + 1;
        let fields: Vec<&str> = line.split(',').collect();
        if fields.len() != d {
            return Err(format_err(
                path,
                format!("line {lineno}"),
                format!("expected {d} values, found {}", fields.len()),
            ));
        }
        for f in fields {
            let v: f64 = f.trim().parse().map_err(|_| {
                format_err(path, format!("line {lineno}"), format!("bad float {f:?}"))
            })?;
            if !v.is_finite() {
                return Err(format_err(
                    path,
                    format!("line {lineno}"),
                    format!("non-finite value {v}"),
                ));
            }
            data.push(v);
        }
        rows += 1;
    }
    if rows != n {
        return Err(format_err(
            path,
            "end of file",
            format!("header promised {n} rows, found {rows}"),
        ));
    }
    let arr = Array2::from_shape_vec((n, d), data).expect("checked row count and width");
    EmbeddingMatrix::new(arr)
}

fn load_f32_binary(path: &Path) -> Result<EmbeddingMatrix> {
    let bytes = fs::read(path)?;
    if bytes.len() < F32_HEADER_LEN {
        return Err(format_err(path, "offset 0", "file shorter than the 16-byte header"));
    }
    if &bytes[0..4] != F32_MAGIC {
        return Err(format_err(path, "offset 0", "bad magic, expected `DVK1`"));
    }
    let n = u32::from_le_bytes(bytes[4..8].try_into().unwrap()) as usize;
    let d = u32::from_le_bytes(bytes[8..12].try_into().unwrap()) as usize;
    let reserved = u32::from_le_bytes(bytes[12..16].try_into().unwrap());
    if reserved != 0 {
        return Err(format_err(path, "offset 12", "reserved header field must be 0"));
    }
    if n == 0 || d == 0 {
        return Err(format_err(path, "offset 4", "empty dataset rejected (n and d must be >= 1)"));
    }
    let expected = F32_HEADER_LEN + 4 * n * d;
    if bytes.len() != expected {
        return Err(format_err(
            path,
            format!("offset {}", bytes.len().min(expected)),
            format!("expected {expected} bytes for {n}x{d}, found {}", bytes.len()),
        ));
    }
    let mut data = Vec::with_capacity(n * d);
    for (i, chunk) in bytes[F32_HEADER_LEN..].chunks_exact(4).enumerate() {
        let v = f32::from_le_bytes(chunk.try_into().unwrap());
        if !v.is_finite() {
            return Err(format_err(
                path,
                format!("offset {}", F32_HEADER_LEN + 4 * i),
                format!("non-finite value {v}"),
            ));
        }
        data.push(f64::from(v));
    }
    let arr = Array2::from_shape_vec((n, d), data).expect("length checked against header");
    EmbeddingMatrix::new(arr)
}

/// Write an embedding matrix in the f32 binary format. Lossy for values
/// outside f32 range/precision; byte-identical output for identical input.
pub fn write_embeddings_f32(path: &Path, matrix: &EmbeddingMatrix) -> Result<()> {
    let (n, d) = (matrix.n(), matrix.dim());
    let mut bytes = Vec::with_capacity(F32_HEADER_LEN + 4 * n * d);
    bytes.extend_from_slice(F32_MAGIC);
    bytes.extend_from_slice(&(n as u32).to_le_bytes());
    bytes.extend_from_slice(&(d as u32).to_le_bytes());
    bytes.extend_from_slice(&0u32.to_le_bytes());
    for &v in matrix.data().iter() {
        bytes.extend_from_slice(&(v as f32).to_le_bytes());
    }
    fs::write(path, bytes)?;
    Ok(())
}

#[derive(Debug, Deserialize)]
struct JsonlRecord {
    id: String,
    #[serde(default)]
    text: Option<String>,
    #[serde(default)]
    embedding: Option<Vec<f64>>,
    #[serde(default)]
    batch: Option<String>,
}

/// Load a JSONL corpus: one record object per line, blank lines skipped.
pub fn load_corpus_jsonl(path: &Path) -> Result<Corpus> {
    let content = fs::read_to_string(path)?;
    let mut records = Vec::new();
    for (idx, line) in content.lines().enumerate() {
        if line.trim().is_empty() {
            continue;
        }
        let rec: JsonlRecord = serde_json::from_str(line).map_err(|e| {
            format_err(path, format!("line {}", idx + 1), e.to_string())
        })?;
        if let Some(emb) = &rec.embedding {
            if let Some(&bad) = emb.iter().find(|v| !v.is_finite()) {
                return Err(format_err(
                    path,
                    format!("line {}", idx + 1),
                    format!("non-finite embedding value {bad}"),
                ));
            }
        }
        records.push(CorpusRecord {
            id: rec.id,
            text: rec.text,
            embedding: rec.embedding,
            batch: rec.batch,
        });
    }
    Corpus::new(records).map_err(|e| match e {
        Error::Input(msg) => format_err(path, "corpus", msg),
        other => other,
    })
}
