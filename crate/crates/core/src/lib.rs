//! divkit: diversity measurement for (synthetic) datasets.
//!
//! The headline metric scores a dataset as the trace of a sample-level
//! classification probability matrix: embed every sample, compute pairwise
//! similarities, turn each row into an n-way softmax classification, and sum
//! the diagonal. The result is an effective sample number between 1 (all
//! samples identical) and n (all samples distinct).
//!
//! Alongside it ship three comparison metrics (spectral-entropy scoring,
//! distinct n-gram ratios, K-means inertia), a Spearman-correlation harness
//! with a dispersion-controlled synthetic generator, and a wall-clock
//! benchmark harness for the complexity comparisons.
//!
//! Pipelines are pure functions over immutable inputs. All parallel paths
//! keep fixed reduction orders, so scores are bitwise reproducible across
//! runs and thread counts; randomness is always seeded explicitly.

pub mod baselines;
pub mod dcscore;
pub mod embed;
pub mod error;
pub mod harness;
pub mod kernel;
pub mod matrix;
pub mod report;
pub mod stats;

pub use baselines::{distinct_n, kmeans_inertia, vendi_score, KMeansParams, VendiParams};
pub use dcscore::{dcscore, dcscore_batched, DCScoreParams, Protocol};
pub use embed::{embed_corpus, tokenize, Corpus, CorpusRecord, Embedded, EmbedderSpec};
pub use error::{Error, Result};
pub use harness::{fit_scaling_exponent, format_bench_table, run_bench, BenchMethod, BenchPlan, BenchReport};
pub use kernel::{compute_kernel, gram_dual, KernelKind, KernelSpec};
pub use matrix::{row_softmax, trace, EmbeddingMatrix, KernelMatrix, ProbabilityMatrix};
pub use report::DiversityReport;
pub use stats::{correlate_metric, generate_synthetic, spearman_rho, RankCorrelation, SweepMetric, SyntheticSpec};
