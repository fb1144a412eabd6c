//! Command-line front end: score datasets, run timing benches, generate
//! synthetic dispersion sweeps, and correlate metrics against them.
//!
//! Machine-readable JSON goes to stdout (or `--output`); `--pretty` adds a
//! human-readable summary on stderr. Exit codes: 0 success, 2 input or
//! parameter errors, 3 numerical errors.

use std::path::{Path, PathBuf};
use std::process::ExitCode;
use std::time::Instant;

use clap::{Args, Parser, Subcommand, ValueEnum};
use divkit::embed::io::{
    load_corpus_jsonl, load_embeddings, write_embeddings_f32, EmbeddingFormat,
};
use divkit::{
    correlate_metric, dcscore, dcscore_batched, distinct_n, embed_corpus, format_bench_table,
    generate_synthetic, kmeans_inertia, run_bench, vendi_score, BenchMethod, BenchPlan, Corpus,
    DCScoreParams, DiversityReport, EmbedderSpec, EmbeddingMatrix, Error, KMeansParams,
    KernelSpec, Protocol, SweepMetric, SyntheticSpec, VendiParams,
};

const DEFAULT_SEED: u64 = 7;

#[derive(Parser)]
#[command(name = "divkit", version, about = "Dataset diversity measurement toolkit")]
struct Cli {
    /// Worker threads for parallel sections (default: one per core).
    #[arg(long, global = true, env = "DIVKIT_THREADS")]
    threads: Option<usize>,

    /// Write the JSON report here instead of stdout.
    #[arg(long, global = true)]
    output: Option<PathBuf>,

    /// Also print a human-readable summary to stderr.
    #[arg(long, global = true)]
    pretty: bool,

    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Score a dataset file with one diversity metric.
    Score(ScoreArgs),
    /// Time the metrics over a size sweep of seeded random inputs.
    Bench(BenchArgs),
    /// Generate dispersion-controlled synthetic embedding files.
    Synth(SynthArgs),
    /// Rank-correlate a metric against a synthetic dispersion sweep.
    Correlate(CorrelateArgs),
}

#[derive(Clone, Copy, PartialEq, Eq, ValueEnum)]
enum MethodArg {
    Dcscore,
    Vendi,
    #[value(name = "distinct-n")]
    DistinctN,
    Kmeans,
}

#[derive(Clone, Copy, PartialEq, Eq, ValueEnum)]
enum KernelArg {
    Inner,
    Rbf,
    Laplacian,
    Poly,
}

#[derive(Clone, Copy, PartialEq, Eq, ValueEnum)]
enum FormatArg {
    Jsonl,
    Csv,
    #[value(name = "f32-binary")]
    F32Binary,
}

#[derive(Clone, Copy, PartialEq, Eq, ValueEnum)]
enum EmbedArg {
    #[value(name = "hashed-ngram")]
    HashedNgram,
    File,
}

#[derive(Clone, Copy, PartialEq, Eq, ValueEnum)]
enum ProtocolArg {
    Overall,
    Batched,
}

#[derive(Args)]
struct KernelFlags {
    /// Kernel family for dcscore and vendi.
    #[arg(long, value_enum, default_value = "inner")]
    kernel: KernelArg,

    /// Kernel scale; defaults to 1/d.
    #[arg(long)]
    gamma: Option<f64>,

    /// Polynomial kernel degree.
    #[arg(long, default_value_t = KernelSpec::DEFAULT_DEGREE)]
    degree: u32,

    /// Polynomial kernel independent term.
    #[arg(long, default_value_t = KernelSpec::DEFAULT_COEF0)]
    coef0: f64,
}

impl KernelFlags {
    fn to_spec(&self) -> KernelSpec {
        match self.kernel {
            KernelArg::Inner => KernelSpec::inner_product(),
            KernelArg::Rbf => KernelSpec::rbf(self.gamma),
            KernelArg::Laplacian => KernelSpec::laplacian(self.gamma),
            KernelArg::Poly => KernelSpec::polynomial(self.gamma, self.degree, self.coef0),
        }
    }
}

#[derive(Args)]
struct ScoreArgs {
    /// Dataset file (JSONL corpus, CSV embeddings, or f32 binary embeddings).
    input: PathBuf,

    /// Input format; inferred from the extension when omitted.
    #[arg(long, value_enum)]
    format: Option<FormatArg>,

    #[arg(long, value_enum, default_value = "dcscore")]
    method: MethodArg,

    /// Embedding source for JSONL corpora.
    #[arg(long, value_enum, default_value = "hashed-ngram")]
    embed: EmbedArg,

    /// Hashed-embedder dimension (power of two, >= 16).
    #[arg(long, default_value_t = EmbedderSpec::DEFAULT_DIM)]
    dim: usize,

    /// N-gram order: distinct-n defaults to 5, the hashed embedder to 3.
    #[arg(long)]
    ngram: Option<usize>,

    #[command(flatten)]
    kernel: KernelFlags,

    /// Softmax temperature for dcscore.
    #[arg(long, default_value_t = 1.0)]
    tau: f64,

    #[arg(long, value_enum, default_value = "overall")]
    protocol: ProtocolArg,

    /// Cluster count for kmeans.
    #[arg(long, default_value_t = 10)]
    k: usize,

    #[arg(long, default_value_t = DEFAULT_SEED)]
    seed: u64,
}

#[derive(Args)]
struct BenchArgs {
    /// Ascending sample sizes.
    #[arg(long, value_delimiter = ',', default_values_t = vec![512usize, 1024, 2048, 4096])]
    sizes: Vec<usize>,

    /// Dimension of the random embedding inputs.
    #[arg(long, default_value_t = 64)]
    dim: usize,

    #[command(flatten)]
    kernel: KernelFlags,

    /// Methods to time (repeatable).
    #[arg(long = "method", value_enum, default_values = ["dcscore", "vendi"])]
    methods: Vec<MethodArg>,

    #[arg(long, default_value_t = 5)]
    repeats: usize,

    #[arg(long, default_value_t = DEFAULT_SEED)]
    seed: u64,
}

#[derive(Args)]
struct SweepFlags {
    /// Dispersion levels, ascending; defaults to the shipped 21-level sweep.
    #[arg(long, value_delimiter = ',')]
    levels: Option<Vec<f64>>,

    #[arg(long, default_value_t = 100)]
    samples: usize,

    #[arg(long, default_value_t = 5)]
    clusters: usize,

    #[arg(long, default_value_t = 64)]
    dim: usize,

    #[arg(long, default_value_t = DEFAULT_SEED)]
    seed: u64,
}

impl SweepFlags {
    fn to_spec(&self) -> SyntheticSpec {
        let mut spec = SyntheticSpec::default_sweep(self.seed);
        if let Some(levels) = &self.levels {
            spec.levels = levels.clone();
        }
        spec.samples_per_level = self.samples;
        spec.clusters = self.clusters;
        spec.dim = self.dim;
        spec
    }
}

#[derive(Args)]
struct SynthArgs {
    /// Directory the per-level embedding files are written to.
    #[arg(long)]
    out_dir: PathBuf,

    #[command(flatten)]
    sweep: SweepFlags,
}

#[derive(Args)]
struct CorrelateArgs {
    #[arg(long, value_enum, default_value = "dcscore")]
    method: MethodArg,

    #[command(flatten)]
    sweep: SweepFlags,

    #[command(flatten)]
    kernel: KernelFlags,

    #[arg(long, default_value_t = 1.0)]
    tau: f64,

    #[arg(long)]
    ngram: Option<usize>,

    /// Cluster count for kmeans.
    #[arg(long, default_value_t = 10)]
    k: usize,
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    if let Some(threads) = cli.threads {
        if rayon::ThreadPoolBuilder::new()
            .num_threads(threads)
            .build_global()
            .is_err()
        {
            eprintln!("error: thread pool already initialized");
            return ExitCode::from(2);
        }
    }
    match run(&cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(err) => {
            eprintln!("error: {err}");
            ExitCode::from(if err.is_numerical() { 3 } else { 2 })
        }
    }
}

fn run(cli: &Cli) -> Result<(), Error> {
    match &cli.command {
        Command::Score(args) => cmd_score(cli, args),
        Command::Bench(args) => cmd_bench(cli, args),
        Command::Synth(args) => cmd_synth(cli, args),
        Command::Correlate(args) => cmd_correlate(cli, args),
    }
}

fn emit(cli: &Cli, json: &serde_json::Value) -> Result<(), Error> {
    let text = serde_json::to_string_pretty(json)
        .map_err(|e| Error::Input(format!("serialization failed: {e}")))?;
    match &cli.output {
        Some(path) => std::fs::write(path, text + "\n")?,
        None => {
            use std::io::Write;
            // a downstream pipe closing early (e.g. `| head`) is not an error
            if let Err(e) = writeln!(std::io::stdout().lock(), "{text}") {
                if e.kind() != std::io::ErrorKind::BrokenPipe {
                    return Err(Error::Io(e));
                }
            }
        }
    }
    Ok(())
}

fn resolve_format(path: &Path, flag: Option<FormatArg>) -> Result<EmbeddingFormat, Error> {
    match flag {
        Some(FormatArg::Jsonl) => Ok(EmbeddingFormat::Jsonl),
        Some(FormatArg::Csv) => Ok(EmbeddingFormat::Csv),
        Some(FormatArg::F32Binary) => Ok(EmbeddingFormat::F32Binary),
        None => EmbeddingFormat::from_extension(path).ok_or_else(|| {
            Error::Parameter(format!(
                "cannot infer format from {:?}; pass --format",
                path.display()
            ))
        }),
    }
}

fn cmd_score(cli: &Cli, args: &ScoreArgs) -> Result<(), Error> {
    let format = resolve_format(&args.input, args.format)?;
    let kernel = args.kernel.to_spec();
    let protocol = match args.protocol {
        ProtocolArg::Overall => Protocol::Overall,
        ProtocolArg::Batched => Protocol::Batched,
    };
    let dc_params = DCScoreParams { tau: args.tau, kernel, protocol };

    if protocol == Protocol::Batched && args.method != MethodArg::Dcscore {
        return Err(Error::Parameter(
            "the batched protocol is only available for dcscore".into(),
        ));
    }
    if protocol == Protocol::Batched && format != EmbeddingFormat::Jsonl {
        return Err(Error::Parameter(
            "the batched protocol needs a JSONL corpus with batch tags".into(),
        ));
    }

    let mut report = match format {
        EmbeddingFormat::Jsonl => {
            let corpus = load_corpus_jsonl(&args.input)?;
            score_corpus(args, &corpus, &dc_params)?
        }
        _ => {
            if args.method == MethodArg::DistinctN {
                return Err(Error::Parameter(
                    "distinct-n needs a JSONL corpus with text records".into(),
                ));
            }
            let t0 = Instant::now();
            let matrix = load_embeddings(&args.input, format)?;
            let load_ms = t0.elapsed().as_secs_f64() * 1e3;
            let mut report = score_matrix(args, &matrix, &dc_params)?;
            report.add_timing("representation", load_ms);
            report
        }
    };

    report = report.with_param("input", args.input.display().to_string());
    if cli.pretty {
        eprintln!("method        {}", report.method);
        eprintln!("score         {:.6}", report.score);
        if let Some(batches) = &report.batch_scores {
            for (tag, score) in batches {
                eprintln!("  batch {tag:<8} {score:.6}");
            }
        }
        for (stage, ms) in &report.timings_ms {
            eprintln!("{stage:<13} {ms:.3} ms");
        }
    }
    emit(cli, &serde_json::to_value(&report).map_err(|e| Error::Input(e.to_string()))?)
}

fn embedder_spec(args: &ScoreArgs) -> Result<EmbedderSpec, Error> {
    match args.embed {
        EmbedArg::HashedNgram => EmbedderSpec::hashed_ngram(
            args.ngram.unwrap_or(EmbedderSpec::DEFAULT_NGRAM_ORDER),
            args.dim,
            true,
        ),
        EmbedArg::File => Ok(EmbedderSpec::external_file(false)),
    }
}

fn score_corpus(
    args: &ScoreArgs,
    corpus: &Corpus,
    dc_params: &DCScoreParams,
) -> Result<DiversityReport, Error> {
    if args.method == MethodArg::DistinctN {
        return distinct_n(corpus, args.ngram.unwrap_or(5));
    }
    let embedder = embedder_spec(args)?;
    if dc_params.protocol == Protocol::Batched {
        return dcscore_batched(corpus, &embedder, dc_params);
    }

    let t0 = Instant::now();
    let embedded = embed_corpus(corpus, &embedder)?;
    let embed_ms = t0.elapsed().as_secs_f64() * 1e3;
    let mut report = score_matrix(args, &embedded.matrix, dc_params)?;
    report.add_timing("representation", embed_ms);
    if !embedded.zero_rows.is_empty() {
        report = report.with_param("zero_rows", embedded.zero_rows.len());
    }
    Ok(report)
}

fn score_matrix(
    args: &ScoreArgs,
    matrix: &EmbeddingMatrix,
    dc_params: &DCScoreParams,
) -> Result<DiversityReport, Error> {
    match args.method {
        MethodArg::Dcscore => dcscore(matrix, dc_params),
        MethodArg::Vendi => vendi_score(
            matrix,
            &VendiParams { kernel: dc_params.kernel, fast_gram_path: None },
        ),
        MethodArg::Kmeans => kmeans_inertia(
            matrix,
            &KMeansParams { k: args.k, seed: args.seed, ..Default::default() },
        ),
        MethodArg::DistinctN => Err(Error::Parameter(
            "distinct-n needs a JSONL corpus with text records".into(),
        )),
    }
}

fn cmd_bench(cli: &Cli, args: &BenchArgs) -> Result<(), Error> {
    let methods = args
        .methods
        .iter()
        .map(|m| match m {
            MethodArg::Dcscore => Ok(BenchMethod::Dcscore),
            MethodArg::Vendi => Ok(BenchMethod::Vendi),
            MethodArg::Kmeans => Ok(BenchMethod::KmeansInertia),
            MethodArg::DistinctN => Err(Error::Parameter(
                "the bench times transformation-based methods; distinct-n is not one".into(),
            )),
        })
        .collect::<Result<Vec<_>, Error>>()?;
    // by default the measured calls run single-threaded; an explicit
    // --threads opts the bench into the library's internal parallelism
    let plan = BenchPlan {
        sizes: args.sizes.clone(),
        dims: args.dim,
        kernel: args.kernel.to_spec(),
        methods,
        repeats: args.repeats,
        seed: args.seed,
        parallel: cli.threads.is_some(),
    };
    let report = run_bench(&plan)?;
    if cli.pretty {
        eprint!("{}", format_bench_table(&report));
    }
    emit(cli, &serde_json::to_value(&report).map_err(|e| Error::Input(e.to_string()))?)
}

fn cmd_synth(cli: &Cli, args: &SynthArgs) -> Result<(), Error> {
    let spec = args.sweep.to_spec();
    let datasets = generate_synthetic(&spec)?;
    std::fs::create_dir_all(&args.out_dir)?;
    let mut manifest_levels = Vec::new();
    for (i, (sigma, matrix)) in datasets.iter().enumerate() {
        let path = args.out_dir.join(format!("level_{i:02}.bin"));
        write_embeddings_f32(&path, matrix)?;
        manifest_levels.push(serde_json::json!({
            "sigma": sigma,
            "path": path.display().to_string(),
            "n": matrix.n(),
            "d": matrix.dim(),
        }));
    }
    if cli.pretty {
        eprintln!("wrote {} level files to {}", datasets.len(), args.out_dir.display());
    }
    emit(
        cli,
        &serde_json::json!({
            "seed": spec.seed,
            "samples_per_level": spec.samples_per_level,
            "clusters": spec.clusters,
            "dim": spec.dim,
            "levels": manifest_levels,
        }),
    )
}

fn cmd_correlate(cli: &Cli, args: &CorrelateArgs) -> Result<(), Error> {
    let spec = args.sweep.to_spec();
    let kernel = args.kernel.to_spec();
    let metric = match args.method {
        MethodArg::Dcscore => SweepMetric::DcScore(DCScoreParams {
            tau: args.tau,
            kernel,
            protocol: Protocol::Overall,
        }),
        MethodArg::Vendi => {
            SweepMetric::Vendi(VendiParams { kernel, fast_gram_path: None })
        }
        MethodArg::Kmeans => SweepMetric::KmeansInertia(KMeansParams {
            k: args.k,
            seed: spec.seed,
            ..Default::default()
        }),
        MethodArg::DistinctN => SweepMetric::DistinctN { n_gram: args.ngram.unwrap_or(5) },
    };
    let corr = correlate_metric(&spec, &metric)?;
    if cli.pretty {
        eprintln!("rho = {:.6} over {} levels", corr.rho, corr.n_pairs);
    }
    let method = match args.method {
        MethodArg::Dcscore => "dcscore",
        MethodArg::Vendi => "vendi",
        MethodArg::Kmeans => "kmeans-inertia",
        MethodArg::DistinctN => "distinct-n",
    };
    emit(
        cli,
        &serde_json::json!({
            "method": method,
            "rho": corr.rho,
            "n_pairs": corr.n_pairs,
            "levels": spec.levels,
            "samples_per_level": spec.samples_per_level,
            "clusters": spec.clusters,
            "dim": spec.dim,
            "seed": spec.seed,
            "tau": args.tau,
        }),
    )
}
