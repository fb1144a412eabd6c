//! Wall-clock benchmark harness for the timing comparisons between metrics,
//! plus the log-log scaling-exponent fit.
//!
//! Inputs are seeded random unit-norm embedding matrices, so the measured
//! times depend only on `(n, d, kernel)`. Each (method, size) cell runs one
//! discarded warm-up iteration followed by `repeats` timed runs; methods run
//! sequentially to avoid cross-contamination.

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, StandardNormal};
use serde::Serialize;

use crate::baselines::{kmeans_inertia, vendi_score, KMeansParams, VendiParams};
use crate::dcscore::{dcscore, DCScoreParams};
use crate::error::{Error, Result};
use crate::kernel::KernelSpec;
use crate::matrix::EmbeddingMatrix;
use crate::report::DiversityReport;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum BenchMethod {
    Dcscore,
    Vendi,
    KmeansInertia,
}

impl BenchMethod {
    pub fn label(self) -> &'static str {
        match self {
            BenchMethod::Dcscore => "dcscore",
            BenchMethod::Vendi => "vendi",
            BenchMethod::KmeansInertia => "kmeans-inertia",
        }
    }
}

#[derive(Debug, Clone, Serialize)]
pub struct BenchPlan {
    /// Sample sizes, strictly ascending.
    pub sizes: Vec<usize>,
    pub dims: usize,
    pub kernel: KernelSpec,
    pub methods: Vec<BenchMethod>,
    /// Timed repetitions per cell (a warm-up run is discarded first).
    pub repeats: usize,
    pub seed: u64,
    /// When false (the default), the measured calls run inside a one-thread
    /// pool so timings are free of scheduler cross-contamination; scores are
    /// identical either way.
    pub parallel: bool,
}

impl BenchPlan {
    /// The shipped default: the RBF-kernel size sweep the complexity claims
    /// are checked on.
    pub fn default_plan(seed: u64) -> Self {
        Self {
            sizes: vec![512, 1024, 2048, 4096],
            dims: 64,
            kernel: KernelSpec::rbf(None),
            methods: vec![BenchMethod::Dcscore, BenchMethod::Vendi],
            repeats: 5,
            seed,
            parallel: false,
        }
    }

    pub fn validate(&self) -> Result<()> {
        if self.sizes.is_empty() {
            return Err(Error::Parameter("bench plan needs at least one size".into()));
        }
        for pair in self.sizes.windows(2) {
            if pair[0] >= pair[1] {
                return Err(Error::Parameter("bench sizes must be strictly ascending".into()));
            }
        }
        if self.sizes[0] == 0 {
            return Err(Error::Parameter("bench sizes must be positive".into()));
        }
        if self.dims == 0 {
            return Err(Error::Parameter("bench dims must be >= 1".into()));
        }
        if self.methods.is_empty() {
            return Err(Error::Parameter("bench plan needs at least one method".into()));
        }
        if self.repeats < 3 {
            return Err(Error::Parameter("bench repeats must be >= 3".into()));
        }
        self.kernel.validate()
    }
}

#[derive(Debug, Clone, Serialize)]
pub struct BenchEntry {
    pub method: String,
    pub n: usize,
    pub stage: String,
    pub mean_ms: f64,
    pub std_ms: f64,
}

#[derive(Debug, Clone, Serialize)]
pub struct BenchScore {
    pub method: String,
    pub n: usize,
    pub score: f64,
}

#[derive(Debug, Clone, Serialize)]
pub struct BenchEnv {
    pub threads: usize,
    /// Seconds since the Unix epoch at report creation.
    pub timestamp: u64,
}

#[derive(Debug, Clone, Serialize)]
pub struct BenchReport {
    pub plan: BenchPlan,
    pub results: Vec<BenchEntry>,
    pub scores: Vec<BenchScore>,
    pub env: BenchEnv,
}

impl BenchReport {
    pub fn mean_ms(&self, method: BenchMethod, n: usize, stage: &str) -> Option<f64> {
        self.results
            .iter()
            .find(|e| e.method == method.label() && e.n == n && e.stage == stage)
            .map(|e| e.mean_ms)
    }

    /// Total (similarity + summarization) mean time for one cell.
    pub fn total_mean_ms(&self, method: BenchMethod, n: usize) -> Option<f64> {
        Some(self.mean_ms(method, n, "similarity")? + self.mean_ms(method, n, "summarization")?)
    }

    /// Per-size means for one method and stage, in plan size order.
    pub fn stage_series(&self, method: BenchMethod, stage: &str) -> Vec<f64> {
        self.plan
            .sizes
            .iter()
            .filter_map(|&n| self.mean_ms(method, n, stage))
            .collect()
    }
}

/// Seeded random unit-norm embedding matrix; the input generator for every
/// bench cell (size index selects the RNG stream).
pub fn bench_input(seed: u64, size_index: usize, n: usize, d: usize) -> EmbeddingMatrix {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(size_index as u64);
    let rows: Vec<Vec<f64>> = (0..n)
        .map(|_| {
            let mut v: Vec<f64> = (0..d)
                .map(|_| <StandardNormal as Distribution<f64>>::sample(&StandardNormal, &mut rng))
                .collect();
            let norm = v.iter().map(|x| x * x).sum::<f64>().sqrt();
            if norm > 0.0 {
                for x in v.iter_mut() {
                    *x /= norm;
                }
            } else {
                v[0] = 1.0;
            }
            v
        })
        .collect();
    EmbeddingMatrix::from_rows(rows).expect("generated rows are finite and non-empty")
}

fn run_method(h: &EmbeddingMatrix, method: BenchMethod, kernel: &KernelSpec) -> Result<DiversityReport> {
    match method {
        BenchMethod::Dcscore => dcscore(
            h,
            &DCScoreParams { kernel: *kernel, ..Default::default() },
        ),
        BenchMethod::Vendi => vendi_score(
            h,
            &VendiParams { kernel: *kernel, ..Default::default() },
        ),
        BenchMethod::KmeansInertia => kmeans_inertia(h, &KMeansParams::default()),
    }
}

fn mean_std(samples: &[f64]) -> (f64, f64) {
    let n = samples.len() as f64;
    let mean = samples.iter().sum::<f64>() / n;
    if samples.len() < 2 {
        return (mean, 0.0);
    }
    let var = samples.iter().map(|x| (x - mean) * (x - mean)).sum::<f64>() / (n - 1.0);
    (mean, var.sqrt())
}

/// Run the plan and aggregate per-stage wall-clock statistics.
///
/// Scores are produced by the same library entry points as direct calls, so
/// they are bitwise identical to scoring the same seeded inputs outside the
/// bench; repeats must agree bitwise or the run errors.
pub fn run_bench(plan: &BenchPlan) -> Result<BenchReport> {
    plan.validate()?;
    let (results, scores) = if plan.parallel {
        bench_cells(plan)?
    } else {
        let pool = rayon::ThreadPoolBuilder::new()
            .num_threads(1)
            .build()
            .map_err(|e| Error::Numerical(format!("could not build bench pool: {e}")))?;
        pool.install(|| bench_cells(plan))?
    };

    let timestamp = std::time::SystemTime::now()
        .duration_since(std::time::UNIX_EPOCH)
        .map(|d| d.as_secs())
        .unwrap_or(0);
    let threads = if plan.parallel { rayon::current_num_threads() } else { 1 };
    Ok(BenchReport {
        plan: plan.clone(),
        results,
        scores,
        env: BenchEnv { threads, timestamp },
    })
}

fn bench_cells(plan: &BenchPlan) -> Result<(Vec<BenchEntry>, Vec<BenchScore>)> {
    let mut results = Vec::new();
    let mut scores = Vec::new();

    for &method in &plan.methods {
        for (size_index, &n) in plan.sizes.iter().enumerate() {
            if method == BenchMethod::KmeansInertia && n < KMeansParams::default().k {
                return Err(Error::Parameter(format!(
                    "bench size {n} is smaller than the default cluster count"
                )));
            }
            let input = bench_input(plan.seed, size_index, n, plan.dims);

            // warm-up, discarded
            let warm = run_method(&input, method, &plan.kernel)?;
            let mut score = warm.score;

            let mut stage_samples: Vec<(f64, f64)> = Vec::with_capacity(plan.repeats);
            for repeat in 0..plan.repeats {
                let report = run_method(&input, method, &plan.kernel)?;
                if repeat == 0 {
                    score = report.score;
                } else if report.score.to_bits() != score.to_bits() {
                    return Err(Error::Numerical(format!(
                        "non-deterministic score for {} at n={n}: {} vs {score}",
                        method.label(),
                        report.score
                    )));
                }
                let sim = report.timings_ms.get("similarity").copied().unwrap_or(0.0);
                let sum = report.timings_ms.get("summarization").copied().unwrap_or(0.0);
                stage_samples.push((sim, sum));
            }

            let sims: Vec<f64> = stage_samples.iter().map(|s| s.0).collect();
            let sums: Vec<f64> = stage_samples.iter().map(|s| s.1).collect();
            for (stage, samples) in [("similarity", sims), ("summarization", sums)] {
                let (mean_ms, std_ms) = mean_std(&samples);
                results.push(BenchEntry {
                    method: method.label().to_string(),
                    n,
                    stage: stage.to_string(),
                    mean_ms,
                    std_ms,
                });
            }
            scores.push(BenchScore { method: method.label().to_string(), n, score });
        }
    }
    Ok((results, scores))
}

/// Least-squares slope of `log(time)` against `log(n)`.
pub fn fit_scaling_exponent(sizes: &[usize], times: &[f64]) -> Result<f64> {
    if sizes.len() != times.len() {
        return Err(Error::Input(format!(
            "length mismatch: {} sizes vs {} times",
            sizes.len(),
            times.len()
        )));
    }
    if sizes.len() < 3 {
        return Err(Error::Input("need at least 3 points to fit a slope".into()));
    }
    if sizes.contains(&0) {
        return Err(Error::Input("sizes must be positive".into()));
    }
    if let Some(&bad) = times.iter().find(|t| !(**t > 0.0 && t.is_finite())) {
        return Err(Error::Input(format!("times must be positive and finite, got {bad}")));
    }
    let xs: Vec<f64> = sizes.iter().map(|&n| (n as f64).ln()).collect();
    let ys: Vec<f64> = times.iter().map(|&t| t.ln()).collect();
    let n = xs.len() as f64;
    let mx = xs.iter().sum::<f64>() / n;
    let my = ys.iter().sum::<f64>() / n;
    let mut num = 0.0;
    let mut den = 0.0;
    for (x, y) in xs.iter().zip(ys.iter()) {
        num += (x - mx) * (y - my);
        den += (x - mx) * (x - mx);
    }
    if den == 0.0 {
        return Err(Error::Input("sizes are all equal; slope undefined".into()));
    }
    Ok(num / den)
}

/// Text table of total times (mean +/- std, milliseconds), one row per
/// method, one column per size.
pub fn format_bench_table(report: &BenchReport) -> String {
    let mut out = String::new();
    out.push_str(&format!(
        "kernel: {}  (d = {}, repeats = {})\n",
        report.plan.kernel.kind.label(),
        report.plan.dims,
        report.plan.repeats
    ));
    out.push_str(&format!("{:<16}", "method"));
    for &n in &report.plan.sizes {
        out.push_str(&format!("{:>18}", format!("n={n}")));
    }
    out.push('\n');
    for &method in &report.plan.methods {
        out.push_str(&format!("{:<16}", method.label()));
        for &n in &report.plan.sizes {
            let sim = report.mean_ms(method, n, "similarity").unwrap_or(0.0);
            let sum = report.mean_ms(method, n, "summarization").unwrap_or(0.0);
            let sim_std = report
                .results
                .iter()
                .find(|e| e.method == method.label() && e.n == n && e.stage == "similarity")
                .map(|e| e.std_ms)
                .unwrap_or(0.0);
            let sum_std = report
                .results
                .iter()
                .find(|e| e.method == method.label() && e.n == n && e.stage == "summarization")
                .map(|e| e.std_ms)
                .unwrap_or(0.0);
            let cell = format!("{:.1}±{:.1}", sim + sum, sim_std + sum_std);
            out.push_str(&format!("{cell:>18}"));
        }
        out.push('\n');
    }
    out
}
