//! Acceptance suite: one test per release criterion, each printing a
//! `criterion N (<name>): PASS` line (visible with `--nocapture`).
//!
//! Tests share a lock so wall-clock measurements never overlap; run with
//! `cargo test -p divkit-cli --test acceptance -- --test-threads=1 --nocapture`
//! for clean sequential output.

use std::process::Command;
use std::sync::Mutex;
use std::time::Instant;

use divkit::harness::bench_input;
use divkit::{
    correlate_metric, dcscore, distinct_n, fit_scaling_exponent, kmeans_inertia, run_bench,
    spearman_rho, vendi_score, BenchMethod, BenchPlan, Corpus, CorpusRecord, DCScoreParams,
    EmbeddingMatrix, KMeansParams, KernelSpec, SweepMetric, SyntheticSpec, VendiParams,
};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

static GATE: Mutex<()> = Mutex::new(());

const SWEEP_SEED: u64 = 7;

fn gate() -> std::sync::MutexGuard<'static, ()> {
    GATE.lock().unwrap_or_else(|p| p.into_inner())
}

fn random_instance(rng: &mut ChaCha8Rng, max_n: usize, max_d: usize) -> EmbeddingMatrix {
    let n = rng.random_range(1..=max_n as u64) as usize;
    let d = rng.random_range(1..=max_d as u64) as usize;
    let rows: Vec<Vec<f64>> = (0..n)
        .map(|_| (0..d).map(|_| rng.random::<f64>() * 2.0 - 1.0).collect())
        .collect();
    EmbeddingMatrix::from_rows(rows).unwrap()
}

fn kernel_family(i: usize) -> KernelSpec {
    match i % 4 {
        0 => KernelSpec::inner_product(),
        1 => KernelSpec::rbf(None),
        2 => KernelSpec::laplacian(None),
        _ => KernelSpec::polynomial(None, 2, 1.0),
    }
}

#[test]
fn criterion_1_axiom_suite() {
    let _g = gate();
    let start = Instant::now();
    let mut rng = ChaCha8Rng::seed_from_u64(101);

    for i in 0..200 {
        let h = random_instance(&mut rng, 64, 32);
        let n = h.n();
        let params = DCScoreParams { kernel: kernel_family(i), ..Default::default() };

        // effective-number bounds
        let score = dcscore(&h, &params).unwrap().score;
        assert!(
            score >= 1.0 - 1e-6 && score <= n as f64 + 1e-6,
            "bounds violated: {score} for n={n} (instance {i})"
        );

        // identical-samples stack invariance
        let rows: Vec<Vec<f64>> = (0..n).map(|r| h.row(r).to_vec()).collect();
        let stacked =
            EmbeddingMatrix::from_rows(rows.iter().chain(rows.iter()).cloned().collect()).unwrap();
        let stacked_score = dcscore(&stacked, &params).unwrap().score;
        assert!(
            (score - stacked_score).abs() <= 1e-8,
            "stack invariance violated: {score} vs {stacked_score} (instance {i})"
        );

        // permutation invariance
        let mut perm: Vec<usize> = (0..n).collect();
        for j in (1..n).rev() {
            let k = rng.random_range(0..=(j as u64)) as usize;
            perm.swap(j, k);
        }
        let permuted =
            EmbeddingMatrix::from_rows(perm.iter().map(|&r| rows[r].clone()).collect()).unwrap();
        let permuted_score = dcscore(&permuted, &params).unwrap().score;
        assert!(
            (score - permuted_score).abs() <= 1e-9,
            "permutation invariance violated: {score} vs {permuted_score} (instance {i})"
        );
    }

    // monotonicity: v(theta) rotates from orthogonal-to-both toward e2;
    // the score strictly decreases as similarity to an existing sample grows
    let mut prev = f64::INFINITY;
    for step in 0..20 {
        let theta = std::f64::consts::FRAC_PI_2 * (step as f64) / 20.0;
        let h = EmbeddingMatrix::from_rows(vec![
            vec![1.0, 0.0, 0.0],
            vec![0.0, 1.0, 0.0],
            vec![0.0, theta.sin(), theta.cos()],
        ])
        .unwrap();
        let score = dcscore(&h, &DCScoreParams::default()).unwrap().score;
        assert!(score < prev, "monotonicity violated at step {step}: {score} >= {prev}");
        prev = score;
    }

    let elapsed = start.elapsed().as_secs_f64();
    assert!(elapsed < 30.0, "axiom suite took {elapsed:.1} s, limit 30 s");
    println!(
        "criterion 1 (axiom suite, 200 instances x 4 kernels + 20-point rotation): PASS ({elapsed:.1} s)"
    );
}

#[test]
fn criterion_2_dispersion_correlation() {
    let _g = gate();
    let start = Instant::now();
    let spec = SyntheticSpec::default_sweep(SWEEP_SEED);
    assert_eq!(spec.levels.len(), 21);
    assert_eq!(spec.samples_per_level, 100);
    assert_eq!(spec.clusters, 5);
    assert_eq!(spec.dim, 64);

    let rho_dc = correlate_metric(&spec, &SweepMetric::DcScore(DCScoreParams::default()))
        .unwrap()
        .rho;
    let rho_vendi = correlate_metric(&spec, &SweepMetric::Vendi(VendiParams::default()))
        .unwrap()
        .rho;
    assert!(rho_dc >= 0.95, "rho(sigma, dcscore) = {rho_dc} < 0.95");
    assert!(rho_vendi >= 0.95, "rho(sigma, vendi) = {rho_vendi} < 0.95");

    let elapsed = start.elapsed().as_secs_f64();
    assert!(elapsed < 20.0, "correlation sweep took {elapsed:.1} s, limit 20 s");
    println!(
        "criterion 2 (dispersion correlation): PASS (rho_dc = {rho_dc:.4}, rho_vendi = {rho_vendi:.4}, {elapsed:.1} s)"
    );
}

#[test]
fn criterion_3_duplicate_stability() {
    let _g = gate();
    let start = Instant::now();
    let base = bench_input(SWEEP_SEED, 0, 1000, 64);
    let base_rows: Vec<Vec<f64>> = (0..1000).map(|i| base.row(i).to_vec()).collect();

    let base_dc = dcscore(&base, &DCScoreParams::default()).unwrap().score;
    let base_vendi = vendi_score(&base, &VendiParams::default()).unwrap().score;

    let mut rng = ChaCha8Rng::seed_from_u64(103);
    let mut max_dc_change: f64 = 0.0;
    let mut max_vendi_change: f64 = 0.0;
    for &dup in &[10usize, 100, 500, 1000] {
        let mut indices: Vec<usize> = (0..1000).collect();
        for j in (1..1000).rev() {
            let k = rng.random_range(0..=(j as u64)) as usize;
            indices.swap(j, k);
        }
        let mut rows = base_rows.clone();
        rows.extend(indices[..dup].iter().map(|&i| base_rows[i].clone()));
        let h = EmbeddingMatrix::from_rows(rows).unwrap();

        let dc = dcscore(&h, &DCScoreParams::default()).unwrap().score;
        let vendi = vendi_score(&h, &VendiParams::default()).unwrap().score;
        let dc_change = (dc - base_dc).abs() / base_dc;
        let vendi_change = (vendi - base_vendi).abs() / base_vendi;
        assert!(dc_change < 0.005, "dcscore moved {:.4}% at {dup} duplicates", dc_change * 100.0);
        assert!(
            vendi_change < 0.005,
            "vendi moved {:.4}% at {dup} duplicates",
            vendi_change * 100.0
        );
        max_dc_change = max_dc_change.max(dc_change);
        max_vendi_change = max_vendi_change.max(vendi_change);
    }

    let elapsed = start.elapsed().as_secs_f64();
    assert!(elapsed < 30.0, "duplicate stability took {elapsed:.1} s, limit 30 s");
    println!(
        "criterion 3 (duplicate stability, subsets 10/100/500/1000): PASS (max rel change dcscore {:.4}%, vendi {:.4}%, {elapsed:.1} s)",
        max_dc_change * 100.0,
        max_vendi_change * 100.0
    );
}

#[test]
fn criterion_4_vendi_gram_oracle() {
    let _g = gate();
    let start = Instant::now();
    let mut rng = ChaCha8Rng::seed_from_u64(104);

    let mut max_gap: f64 = 0.0;
    for i in 0..50 {
        let n = rng.random_range(2..=256u64) as usize;
        let d = rng.random_range(1..=16u64) as usize;
        let rows: Vec<Vec<f64>> = (0..n)
            .map(|_| (0..d).map(|_| rng.random::<f64>() * 2.0 - 1.0).collect())
            .collect();
        let h = EmbeddingMatrix::from_rows(rows).unwrap();
        let fast = vendi_score(&h, &VendiParams { fast_gram_path: Some(true), ..Default::default() })
            .unwrap()
            .score;
        let direct =
            vendi_score(&h, &VendiParams { fast_gram_path: Some(false), ..Default::default() })
                .unwrap()
                .score;
        let gap = (fast - direct).abs();
        assert!(gap <= 1e-8, "paths diverge by {gap} at n={n} d={d} (instance {i})");
        max_gap = max_gap.max(gap);
    }

    // analytic anchors
    let mut identity_rows = vec![vec![0.0; 16]; 16];
    for (i, row) in identity_rows.iter_mut().enumerate() {
        row[i] = 1.0;
    }
    let identity = EmbeddingMatrix::from_rows(identity_rows).unwrap();
    let s = vendi_score(&identity, &VendiParams::default()).unwrap().score;
    assert!((s - 16.0).abs() <= 1e-9, "identity anchor: {s}");

    let identical = EmbeddingMatrix::from_rows(vec![vec![0.6, 0.8]; 9]).unwrap();
    let s = vendi_score(&identical, &VendiParams::default()).unwrap().score;
    assert!((s - 1.0).abs() <= 1e-9, "identical-rows anchor: {s}");

    let elapsed = start.elapsed().as_secs_f64();
    assert!(elapsed < 10.0, "gram oracle took {elapsed:.1} s, limit 10 s");
    println!(
        "criterion 4 (vendi dual-Gram path vs direct, 50 instances + anchors): PASS (max gap {max_gap:.2e}, {elapsed:.1} s)"
    );
}

#[test]
fn criterion_5_complexity_ordering() {
    let _g = gate();
    let start = Instant::now();
    let plan = BenchPlan {
        sizes: vec![512, 1024, 2048, 4096],
        dims: 64,
        kernel: KernelSpec::rbf(None),
        methods: vec![BenchMethod::Dcscore, BenchMethod::Vendi],
        repeats: 5,
        seed: SWEEP_SEED,
        parallel: false,
    };
    let report = run_bench(&plan).unwrap();

    let dc_total = report.total_mean_ms(BenchMethod::Dcscore, 4096).unwrap();
    let vendi_total = report.total_mean_ms(BenchMethod::Vendi, 4096).unwrap();
    assert!(
        dc_total < vendi_total,
        "dcscore total {dc_total:.1} ms not below vendi total {vendi_total:.1} ms at n=4096"
    );

    let dc_sum = report.stage_series(BenchMethod::Dcscore, "summarization");
    let vendi_sum = report.stage_series(BenchMethod::Vendi, "summarization");
    let dc_slope = fit_scaling_exponent(&plan.sizes, &dc_sum).unwrap();
    let vendi_slope = fit_scaling_exponent(&plan.sizes, &vendi_sum).unwrap();
    assert!(dc_slope <= 2.4, "dcscore summarization slope {dc_slope:.2} exceeds 2.4");
    assert!(
        vendi_slope > dc_slope,
        "vendi summarization slope {vendi_slope:.2} not above dcscore slope {dc_slope:.2}"
    );

    let elapsed = start.elapsed().as_secs_f64();
    assert!(elapsed < 300.0, "complexity bench took {elapsed:.1} s, limit 300 s");
    println!(
        "criterion 5 (complexity ordering): PASS (totals at n=4096: dcscore {dc_total:.0} ms < vendi {vendi_total:.0} ms; summarization slopes {dc_slope:.2} vs {vendi_slope:.2}, {elapsed:.1} s)"
    );
}

#[test]
fn criterion_6_tau_sensitivity() {
    let _g = gate();
    let start = Instant::now();
    let spec = SyntheticSpec::default_sweep(SWEEP_SEED);
    let rho_default = correlate_metric(&spec, &SweepMetric::DcScore(DCScoreParams::default()))
        .unwrap()
        .rho;
    let rho_low_tau = correlate_metric(
        &spec,
        &SweepMetric::DcScore(DCScoreParams { tau: 1e-4, ..Default::default() }),
    )
    .unwrap()
    .rho;
    assert!(
        rho_default >= rho_low_tau,
        "rho at tau=1 ({rho_default:.4}) below rho at tau=1e-4 ({rho_low_tau:.4})"
    );

    let elapsed = start.elapsed().as_secs_f64();
    assert!(elapsed < 30.0, "tau sensitivity took {elapsed:.1} s, limit 30 s");
    println!(
        "criterion 6 (tau sensitivity): PASS (rho {rho_default:.4} at tau=1 >= {rho_low_tau:.4} at tau=1e-4, {elapsed:.1} s)"
    );
}

#[test]
fn criterion_7_baseline_anchors() {
    let _g = gate();

    let corpus = Corpus::new(vec![CorpusRecord {
        id: "a".into(),
        text: Some("the cat sat the cat".into()),
        embedding: None,
        batch: None,
    }])
    .unwrap();
    let d = distinct_n(&corpus, 2).unwrap().score;
    assert!((d - 0.75).abs() <= 1e-9, "distinct-n anchor: {d}");

    let pair = EmbeddingMatrix::from_rows(vec![vec![0.0], vec![2.0]]).unwrap();
    let inertia = kmeans_inertia(&pair, &KMeansParams { k: 1, ..Default::default() })
        .unwrap()
        .score;
    assert!((inertia - 2.0).abs() <= 1e-9, "k=1 inertia anchor: {inertia}");

    let distinct_points = EmbeddingMatrix::from_rows(vec![
        vec![0.0, 0.0],
        vec![3.0, 0.0],
        vec![0.0, 3.0],
    ])
    .unwrap();
    let zero = kmeans_inertia(&distinct_points, &KMeansParams { k: 3, ..Default::default() })
        .unwrap()
        .score;
    assert!(zero.abs() <= 1e-9, "k=n inertia anchor: {zero}");

    let rho = spearman_rho(&[1.0, 2.0, 3.0], &[3.0, 1.0, 2.0]).unwrap().rho;
    assert!((rho + 0.5).abs() <= 1e-9, "spearman anchor: {rho}");

    println!(
        "criterion 7 (baseline unit anchors): PASS (distinct-n 0.75, inertia 2.0 and 0.0, rho -0.5)"
    );
}

#[test]
fn criterion_8_cli_determinism() {
    let _g = gate();
    let bin = env!("CARGO_BIN_EXE_divkit");
    let dir = tempfile::tempdir().unwrap();

    // cmd_synth: byte-identical level files across runs and thread counts
    let synth_args = |out: &str, threads: &str| {
        vec![
            "synth".to_string(),
            "--out-dir".to_string(),
            out.to_string(),
            "--levels".to_string(),
            "0.05,0.2,0.8".to_string(),
            "--samples".to_string(),
            "50".to_string(),
            "--clusters".to_string(),
            "3".to_string(),
            "--dim".to_string(),
            "16".to_string(),
            "--seed".to_string(),
            "11".to_string(),
            "--threads".to_string(),
            threads.to_string(),
        ]
    };
    let mut file_sets = Vec::new();
    for (run, threads) in [(0, "1"), (1, "4"), (2, "1")] {
        let out = dir.path().join(format!("synth{run}"));
        let status = Command::new(bin)
            .args(synth_args(out.to_str().unwrap(), threads))
            .output()
            .unwrap();
        assert!(status.status.success(), "synth failed: {}", String::from_utf8_lossy(&status.stderr));
        let mut bytes = Vec::new();
        for i in 0..3 {
            bytes.push(std::fs::read(out.join(format!("level_{i:02}.bin"))).unwrap());
        }
        file_sets.push(bytes);
    }
    assert_eq!(file_sets[0], file_sets[1], "synth differs between thread counts 1 and 4");
    assert_eq!(file_sets[0], file_sets[2], "synth differs between consecutive runs");

    // cmd_score: byte-identical score fields across runs and thread counts
    let input = dir.path().join("synth0/level_01.bin");
    for method in ["dcscore", "vendi", "kmeans"] {
        let mut scores = Vec::new();
        for threads in ["1", "4", "1", "4"] {
            let out = Command::new(bin)
                .args([
                    "score",
                    input.to_str().unwrap(),
                    "--method",
                    method,
                    "--seed",
                    "11",
                    "--threads",
                    threads,
                ])
                .output()
                .unwrap();
            assert!(out.status.success(), "score failed: {}", String::from_utf8_lossy(&out.stderr));
            let json: serde_json::Value = serde_json::from_slice(&out.stdout).unwrap();
            scores.push(json["score"].to_string());
        }
        assert!(
            scores.windows(2).all(|w| w[0] == w[1]),
            "{method} scores differ across runs/threads: {scores:?}"
        );
    }

    println!("criterion 8 (CLI determinism across runs and thread counts 1/4): PASS");
}
