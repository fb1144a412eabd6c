//! Spearman rank correlation and the dispersion-controlled synthetic
//! corpus generator.
//!
//! The generator is the desk-scale stand-in for sampling-temperature
//! sweeps: each dispersion level draws samples around fixed cluster anchors
//! with Gaussian noise of scale sigma, so higher sigma means higher true
//! diversity, and a metric's quality shows up as rank correlation between
//! sigma and its scores.

use ndarray::Array2;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, Normal, StandardNormal};
use rayon::prelude::*;

use crate::baselines::{kmeans_inertia, vendi_score, KMeansParams, VendiParams};
use crate::dcscore::{dcscore, DCScoreParams};
use crate::error::{Error, Result};
use crate::matrix::EmbeddingMatrix;

/// Spearman's rho with its pair count; rho lies in [-1, 1].
#[derive(Debug, Clone, Copy, PartialEq, serde::Serialize)]
pub struct RankCorrelation {
    pub rho: f64,
    pub n_pairs: usize,
}

/// Average ranks (ties share the mean of the positions they span).
fn average_ranks(values: &[f64]) -> Vec<f64> {
    let n = values.len();
    let mut order: Vec<usize> = (0..n).collect();
    order.sort_by(|&a, &b| values[a].total_cmp(&values[b]));
    let mut ranks = vec![0.0; n];
    let mut i = 0;
    while i < n {
        let mut j = i;
        while j + 1 < n && values[order[j + 1]] == values[order[i]] {
            j += 1;
        }
        // positions i..=j (0-based) share the average 1-based rank
        let rank = (i + j) as f64 / 2.0 + 1.0;
        for &idx in &order[i..=j] {
            ranks[idx] = rank;
        }
        i = j + 1;
    }
    ranks
}

/// Spearman's rho: Pearson correlation of the average-rank vectors.
pub fn spearman_rho(x: &[f64], y: &[f64]) -> Result<RankCorrelation> {
    if x.len() != y.len() {
        return Err(Error::Input(format!(
            "length mismatch: {} vs {}",
            x.len(),
            y.len()
        )));
    }
    if x.len() < 2 {
        return Err(Error::Input("need at least 2 pairs".into()));
    }
    if x.iter().chain(y.iter()).any(|v| !v.is_finite()) {
        return Err(Error::Input("inputs contain non-finite values".into()));
    }

    let rx = average_ranks(x);
    let ry = average_ranks(y);
    let n = rx.len() as f64;
    let mx = rx.iter().sum::<f64>() / n;
    let my = ry.iter().sum::<f64>() / n;
    let mut cov = 0.0;
    let mut vx = 0.0;
    let mut vy = 0.0;
    for (a, b) in rx.iter().zip(ry.iter()) {
        cov += (a - mx) * (b - my);
        vx += (a - mx) * (a - mx);
        vy += (b - my) * (b - my);
    }
    if vx == 0.0 || vy == 0.0 {
        return Err(Error::UndefinedCorrelation(
            "zero rank variance (all values tied)".into(),
        ));
    }
    let rho = (cov / (vx * vy).sqrt()).clamp(-1.0, 1.0);
    Ok(RankCorrelation { rho, n_pairs: x.len() })
}

/// Specification of a dispersion sweep.
#[derive(Debug, Clone, PartialEq)]
pub struct SyntheticSpec {
    /// Dispersion (noise scale) levels, positive and strictly increasing.
    pub levels: Vec<f64>,
    pub samples_per_level: usize,
    pub clusters: usize,
    pub dim: usize,
    pub seed: u64,
}

impl SyntheticSpec {
    /// The shipped default sweep: 21 levels from 2e-3 to ~2.05 in
    /// half-octave steps, 100 samples around 5 anchors in 64 dimensions.
    pub fn default_sweep(seed: u64) -> Self {
        let levels = (0..21).map(|k| 0.002 * 2f64.powf(k as f64 / 2.0)).collect();
        Self { levels, samples_per_level: 100, clusters: 5, dim: 64, seed }
    }

    pub fn validate(&self) -> Result<()> {
        if self.levels.len() < 2 {
            return Err(Error::Parameter("need at least 2 dispersion levels".into()));
        }
        if self.levels[0] <= 0.0 || !self.levels.iter().all(|v| v.is_finite()) {
            return Err(Error::Parameter("dispersion levels must be positive and finite".into()));
        }
        for pair in self.levels.windows(2) {
            if pair[0] >= pair[1] {
                return Err(Error::Parameter(
                    "dispersion levels must be strictly increasing".into(),
                ));
            }
        }
        if self.samples_per_level < 2 {
            return Err(Error::Parameter("samples_per_level must be >= 2".into()));
        }
        if self.clusters < 1 {
            return Err(Error::Parameter("clusters must be >= 1".into()));
        }
        if self.dim < 2 {
            return Err(Error::Parameter("dim must be >= 2".into()));
        }
        Ok(())
    }
}

fn normalize_or(row: &mut [f64], fallback: &[f64]) {
    let norm = row.iter().map(|v| v * v).sum::<f64>().sqrt();
    if norm > 0.0 {
        for v in row.iter_mut() {
            *v /= norm;
        }
    } else {
        row.copy_from_slice(fallback);
    }
}

/// Generate one embedding matrix per dispersion level.
///
/// Anchors are drawn once (RNG stream 0); level `i` draws its noise from
/// stream `i + 1`, so the sweep is deterministic given the seed and levels
/// can be generated in parallel. Sample `j` belongs to cluster
/// `j % clusters`; every output row is L2-normalized.
pub fn generate_synthetic(spec: &SyntheticSpec) -> Result<Vec<(f64, EmbeddingMatrix)>> {
    spec.validate()?;
    let d = spec.dim;

    let mut anchor_rng = ChaCha8Rng::seed_from_u64(spec.seed);
    anchor_rng.set_stream(0);
    let mut anchors: Vec<Vec<f64>> = Vec::with_capacity(spec.clusters);
    for _ in 0..spec.clusters {
        let mut a: Vec<f64> = (0..d)
            .map(|_| <StandardNormal as Distribution<f64>>::sample(&StandardNormal, &mut anchor_rng))
            .collect();
        let mut unit = vec![0.0; d];
        unit[0] = 1.0;
        normalize_or(&mut a, &unit);
        anchors.push(a);
    }

    spec.levels
        .par_iter()
        .enumerate()
        .map(|(li, &sigma)| {
            let mut rng = ChaCha8Rng::seed_from_u64(spec.seed);
            rng.set_stream(li as u64 + 1);
            let noise = Normal::new(0.0, sigma)
                .map_err(|e| Error::Parameter(format!("bad dispersion {sigma}: {e}")))?;
            let n = spec.samples_per_level;
            let mut data = Array2::zeros((n, d));
            for j in 0..n {
                let anchor = &anchors[j % spec.clusters];
                let mut row: Vec<f64> = anchor
                    .iter()
                    .map(|a| a + noise.sample(&mut rng))
                    .collect();
                normalize_or(&mut row, anchor);
                for (dst, v) in data.row_mut(j).iter_mut().zip(&row) {
                    *dst = *v;
                }
            }
            Ok((sigma, EmbeddingMatrix::new(data)?))
        })
        .collect()
}

/// Which metric a sweep correlates against the dispersion pseudo-truth.
#[derive(Debug, Clone)]
pub enum SweepMetric {
    DcScore(DCScoreParams),
    Vendi(VendiParams),
    KmeansInertia(KMeansParams),
    /// Listed for CLI completeness; rejected here because the synthetic
    /// sweep produces embeddings, not text.
    DistinctN { n_gram: usize },
}

/// Rank correlation between the dispersion levels and per-level scores.
pub fn correlate_metric(spec: &SyntheticSpec, metric: &SweepMetric) -> Result<RankCorrelation> {
    if let SweepMetric::DistinctN { .. } = metric {
        return Err(Error::Parameter(
            "distinct-n evaluates text, but the synthetic sweep produces embeddings; \
             use dcscore, vendi, or kmeans-inertia"
                .into(),
        ));
    }
    let datasets = generate_synthetic(spec)?;
    let scores: Vec<Result<f64>> = datasets
        .par_iter()
        .map(|(_, h)| match metric {
            SweepMetric::DcScore(p) => Ok(dcscore(h, p)?.score),
            SweepMetric::Vendi(p) => Ok(vendi_score(h, p)?.score),
            SweepMetric::KmeansInertia(p) => Ok(kmeans_inertia(h, p)?.score),
            SweepMetric::DistinctN { .. } => unreachable!("rejected above"),
        })
        .collect();
    let scores = scores.into_iter().collect::<Result<Vec<f64>>>()?;
    let sigmas: Vec<f64> = datasets.iter().map(|(s, _)| *s).collect();
    spearman_rho(&sigmas, &scores)
}
