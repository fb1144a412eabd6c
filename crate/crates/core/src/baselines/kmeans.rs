//! K-means inertia: Lloyd's algorithm with D^2-weighted (k-means++) seeding,
//! best of `n_init` runs. Inertia — the summed squared distance from each
//! sample to its centroid — grows with embedding dispersion, so it doubles
//! as a diversity signal.

use std::time::Instant;

use ndarray::ArrayView1;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;

use crate::error::{Error, Result};
use crate::matrix::EmbeddingMatrix;
use crate::report::DiversityReport;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct KMeansParams {
    pub k: usize,
    pub max_iters: usize,
    pub seed: u64,
    pub n_init: usize,
}

impl Default for KMeansParams {
    fn default() -> Self {
        Self { k: 10, max_iters: 100, seed: 0, n_init: 4 }
    }
}

fn sq_dist(a: ArrayView1<f64>, b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| (x - y) * (x - y)).sum()
}

struct LloydRun {
    inertia: f64,
}

fn lloyd_run(h: &EmbeddingMatrix, k: usize, max_iters: usize, seed: u64, stream: u64) -> LloydRun {
    let n = h.n();
    let d = h.dim();
    let data = h.data();
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(stream);

    // k-means++ seeding: first centroid uniform, then D^2-weighted draws.
    let mut centroids: Vec<Vec<f64>> = Vec::with_capacity(k);
    let mut is_center = vec![false; n];
    let first = rng.random_range(0..n as u64) as usize;
    centroids.push(data.row(first).to_vec());
    is_center[first] = true;

    let mut min_d2 = vec![0.0f64; n];
    while centroids.len() < k {
        let last = centroids.last().unwrap();
        let first_pass = centroids.len() == 1;
        for (i, slot) in min_d2.iter_mut().enumerate() {
            let dist = sq_dist(data.row(i), last);
            if first_pass || dist < *slot {
                *slot = dist;
            }
        }
        let total: f64 = min_d2.iter().sum();
        let chosen = if total > 0.0 {
            let mut target = rng.random::<f64>() * total;
            let mut pick = n - 1;
            for (i, &w) in min_d2.iter().enumerate() {
                target -= w;
                if target <= 0.0 {
                    pick = i;
                    break;
                }
            }
            pick
        } else {
            // all points coincide with existing centroids; take the first
            // index not already used so seeding still terminates
            (0..n).find(|&i| !is_center[i]).unwrap_or(0)
        };
        is_center[chosen] = true;
        centroids.push(data.row(chosen).to_vec());
    }

    // Lloyd iterations until assignments stabilize.
    let mut assignment = vec![usize::MAX; n];
    for _ in 0..max_iters {
        let mut changed = false;
        for (i, slot) in assignment.iter_mut().enumerate() {
            let row = data.row(i);
            let mut best = 0usize;
            let mut best_d = f64::INFINITY;
            for (c, centroid) in centroids.iter().enumerate() {
                let dist = sq_dist(row, centroid);
                if dist < best_d {
                    best_d = dist;
                    best = c;
                }
            }
            if *slot != best {
                *slot = best;
                changed = true;
            }
        }
        if !changed {
            break;
        }
        let mut sums = vec![vec![0.0f64; d]; k];
        let mut counts = vec![0usize; k];
        for (i, &c) in assignment.iter().enumerate() {
            counts[c] += 1;
            for (s, v) in sums[c].iter_mut().zip(data.row(i)) {
                *s += v;
            }
        }
        for c in 0..k {
            if counts[c] > 0 {
                for (dst, s) in centroids[c].iter_mut().zip(&sums[c]) {
                    *dst = s / counts[c] as f64;
                }
            }
            // empty clusters keep their previous centroid
        }
    }

    let inertia: f64 = (0..n)
        .map(|i| sq_dist(data.row(i), &centroids[assignment[i]]))
        .sum();
    LloydRun { inertia }
}

/// Cluster `H` into `k` groups and report the best inertia over `n_init`
/// seeded runs. Deterministic given the seed; ties between runs break
/// toward the lower run index.
pub fn kmeans_inertia(h: &EmbeddingMatrix, params: &KMeansParams) -> Result<DiversityReport> {
    let n = h.n();
    if params.k < 1 || params.k > n {
        return Err(Error::Parameter(format!(
            "cluster count k must satisfy 1 <= k <= n, got k={} with n={n}",
            params.k
        )));
    }
    if params.n_init < 1 {
        return Err(Error::Parameter("n_init must be >= 1".into()));
    }
    if params.max_iters < 1 {
        return Err(Error::Parameter("max_iters must be >= 1".into()));
    }

    let t0 = Instant::now();
    let runs: Vec<LloydRun> = (0..params.n_init as u64)
        .into_par_iter()
        .map(|stream| lloyd_run(h, params.k, params.max_iters, params.seed, stream))
        .collect();
    let similarity_ms = t0.elapsed().as_secs_f64() * 1e3;

    let t1 = Instant::now();
    let mut best = &runs[0];
    for run in &runs[1..] {
        if run.inertia < best.inertia {
            best = run;
        }
    }
    let summarization_ms = t1.elapsed().as_secs_f64() * 1e3;

    Ok(DiversityReport::new("kmeans-inertia", best.inertia)?
        .with_param("n", n)
        .with_param("k", params.k)
        .with_param("n_init", params.n_init)
        .with_param("max_iters", params.max_iters)
        .with_param("seed", params.seed)
        .with_timing("similarity", similarity_ms)
        .with_timing("summarization", summarization_ms))
}
