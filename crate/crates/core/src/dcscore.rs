//! The trace-of-softmax diversity metric.
//!
//! Each sample is classified against one category per sample: the kernel row
//! provides the logits, a temperature softmax turns them into probabilities,
//! and the diagonal sum (how confidently each sample claims its own
//! category) is the diversity score. The score is an effective sample
//! number: 1 when all samples coincide, approaching `n` as they separate.

use std::collections::HashMap;
use std::time::Instant;

use rayon::prelude::*;
use serde::Serialize;

use crate::embed::{embed_corpus, Corpus, EmbedderSpec};
use crate::error::{Error, Result};
use crate::kernel::{compute_kernel, KernelSpec};
use crate::matrix::{row_softmax, trace, EmbeddingMatrix};
use crate::report::{check_effective_number_bounds, DiversityReport};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum Protocol {
    /// Score the whole dataset as one classification problem.
    Overall,
    /// Score each batch separately and average the batch scores.
    Batched,
}

impl Protocol {
    pub fn label(self) -> &'static str {
        match self {
            Protocol::Overall => "overall",
            Protocol::Batched => "batched",
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct DCScoreParams {
    /// Softmax temperature; smaller values sharpen the per-row
    /// classification toward the nearest category.
    pub tau: f64,
    pub kernel: KernelSpec,
    pub protocol: Protocol,
}

impl Default for DCScoreParams {
    fn default() -> Self {
        Self {
            tau: 1.0,
            kernel: KernelSpec::inner_product(),
            protocol: Protocol::Overall,
        }
    }
}

impl DCScoreParams {
    pub fn validate(&self) -> Result<()> {
        if !(self.tau > 0.0 && self.tau.is_finite()) {
            return Err(Error::Parameter(format!(
                "tau must be positive and finite, got {}",
                self.tau
            )));
        }
        self.kernel.validate()
    }
}

pub(crate) struct StageScore {
    pub score: f64,
    pub similarity_ms: f64,
    pub summarization_ms: f64,
}

/// Kernel + softmax + trace on one embedding matrix, with per-stage timing.
pub(crate) fn score_matrix(h: &EmbeddingMatrix, params: &DCScoreParams) -> Result<StageScore> {
    let t0 = Instant::now();
    let kernel = compute_kernel(h, &params.kernel)?;
    let similarity_ms = t0.elapsed().as_secs_f64() * 1e3;

    let t1 = Instant::now();
    let probs = row_softmax(kernel.data(), params.tau)?;
    let score = trace(&probs);
    let summarization_ms = t1.elapsed().as_secs_f64() * 1e3;

    if kernel.psd_declared() {
        check_effective_number_bounds("dcscore", score, h.n())?;
    }
    Ok(StageScore { score, similarity_ms, summarization_ms })
}

fn base_report(
    score: f64,
    n: usize,
    params: &DCScoreParams,
    dim: usize,
    protocol: Protocol,
) -> Result<DiversityReport> {
    Ok(DiversityReport::new("dcscore", score)?
        .with_param("n", n)
        .with_param("tau", params.tau)
        .with_param("kernel", params.kernel.kind.label())
        .with_param("gamma", params.kernel.resolved_gamma(dim))
        .with_param("degree", params.kernel.degree)
        .with_param("coef0", params.kernel.coef0)
        .with_param("protocol", protocol.label()))
}

/// Score an embedding matrix under the overall protocol.
pub fn dcscore(h: &EmbeddingMatrix, params: &DCScoreParams) -> Result<DiversityReport> {
    params.validate()?;
    let staged = score_matrix(h, params)?;
    Ok(base_report(staged.score, h.n(), params, h.dim(), Protocol::Overall)?
        .with_timing("similarity", staged.similarity_ms)
        .with_timing("summarization", staged.summarization_ms))
}

/// Embed a corpus and score it batch by batch, averaging batch scores.
///
/// Every record must carry a batch tag; batches are reported in
/// first-appearance order and averaged unweighted.
pub fn dcscore_batched(
    corpus: &Corpus,
    embedder: &EmbedderSpec,
    params: &DCScoreParams,
) -> Result<DiversityReport> {
    params.validate()?;
    if let Some(rec) = corpus.records().iter().find(|r| r.batch.is_none()) {
        return Err(Error::Input(format!(
            "record {:?} has no batch tag; the batched protocol requires one per record",
            rec.id
        )));
    }

    let t0 = Instant::now();
    let embedded = embed_corpus(corpus, embedder)?;
    let representation_ms = t0.elapsed().as_secs_f64() * 1e3;

    // Group row indices by batch tag, keeping first-appearance order.
    let mut order: Vec<String> = Vec::new();
    let mut groups: HashMap<String, Vec<usize>> = HashMap::new();
    for (i, rec) in corpus.records().iter().enumerate() {
        let tag = rec.batch.clone().unwrap();
        groups
            .entry(tag.clone())
            .or_insert_with(|| {
                order.push(tag);
                Vec::new()
            })
            .push(i);
    }

    let per_batch: Vec<Result<(String, StageScore)>> = order
        .par_iter()
        .map(|tag| {
            let sub = embedded.matrix.select_rows(&groups[tag])?;
            let staged = score_matrix(&sub, params)?;
            Ok((tag.clone(), staged))
        })
        .collect();

    let mut batch_scores = Vec::with_capacity(order.len());
    let mut similarity_ms = 0.0;
    let mut summarization_ms = 0.0;
    for item in per_batch {
        let (tag, staged) = item?;
        batch_scores.push((tag, staged.score));
        similarity_ms += staged.similarity_ms;
        summarization_ms += staged.summarization_ms;
    }
    let mean = batch_scores.iter().map(|(_, s)| s).sum::<f64>() / batch_scores.len() as f64;

    let dim = embedded.matrix.dim();
    let mut report = base_report(mean, corpus.len(), params, dim, Protocol::Batched)?
        .with_param("batches", batch_scores.len())
        .with_batch_scores(batch_scores)
        .with_timing("representation", representation_ms)
        .with_timing("similarity", similarity_ms)
        .with_timing("summarization", summarization_ms);
    if !embedded.zero_rows.is_empty() {
        report = report.with_param("zero_rows", embedded.zero_rows.len());
    }
    Ok(report)
}
