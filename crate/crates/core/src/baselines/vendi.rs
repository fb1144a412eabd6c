//! VendiScore: the exponential of the Shannon entropy of the eigenvalues of
//! `K/n`. An entropy-based effective sample number.
//!
//! For the inner-product kernel with `n > d` the spectrum of `K/n = H H^T/n`
//! is computed from the `d x d` dual Gram matrix `H^T H / n` instead, which
//! shares its nonzero eigenvalues; the padding zeros contribute nothing to
//! the entropy.

use std::sync::Once;
use std::time::Instant;

use ndarray::Array2;

use crate::error::{Error, Result};
use crate::kernel::{compute_kernel, gram_dual, KernelKind, KernelSpec};
use crate::matrix::EmbeddingMatrix;
use crate::report::{check_effective_number_bounds, DiversityReport};

/// Eigenvalues in `[-EIG_CLAMP, 0)` are treated as round-off and clamped to
/// zero; anything below is a genuine PSD violation and an error.
pub const EIG_CLAMP: f64 = 1e-8;

#[derive(Debug, Clone, Copy, PartialEq, Default)]
pub struct VendiParams {
    pub kernel: KernelSpec,
    /// `None` selects the fast dual-Gram path automatically (inner-product
    /// kernel and `n > d`); `Some(_)` forces the choice.
    pub fast_gram_path: Option<bool>,
}

static PIN_SEQ: Once = Once::new();

/// Eigenvalues of a symmetric matrix. The solver is pinned to sequential
/// execution so scores are identical across thread counts.
pub(crate) fn symmetric_eigenvalues(m: &Array2<f64>) -> Result<Vec<f64>> {
    PIN_SEQ.call_once(|| faer::set_global_parallelism(faer::Par::Seq));
    let n = m.nrows();
    let fm = faer::Mat::from_fn(n, n, |i, j| m[[i, j]]);
    fm.self_adjoint_eigenvalues(faer::Side::Lower)
        .map_err(|e| Error::Numerical(format!("eigendecomposition failed: {e:?}")))
}

/// Shannon entropy of a clamped eigenvalue spectrum, with `0 log 0 := 0`.
pub(crate) fn spectrum_entropy(eigenvalues: &[f64]) -> Result<f64> {
    let mut entropy = 0.0;
    for &lam in eigenvalues {
        if lam < -EIG_CLAMP {
            return Err(Error::Numerical(format!(
                "kernel matrix is not positive semi-definite: eigenvalue {lam}"
            )));
        }
        if lam > 0.0 {
            entropy -= lam * lam.ln();
        }
        // lam in [-EIG_CLAMP, 0] contributes nothing
    }
    Ok(entropy)
}

/// Score an embedding matrix: `exp` of the spectral entropy of `K/n`.
pub fn vendi_score(h: &EmbeddingMatrix, params: &VendiParams) -> Result<DiversityReport> {
    params.kernel.validate()?;
    if !params.kernel.psd_on_valid_inputs() {
        return Err(Error::Parameter(format!(
            "VendiScore requires a PSD-declared kernel; {} with coef0 {} is not",
            params.kernel.kind.label(),
            params.kernel.coef0
        )));
    }
    let n = h.n();
    let use_fast = params.kernel.kind == KernelKind::InnerProduct
        && params.fast_gram_path.unwrap_or(n > h.dim());

    let (eigenvalues, similarity_ms, summarization_ms) = if use_fast {
        let t0 = Instant::now();
        let dual = gram_dual(h).mapv_into(|v| v / n as f64);
        let similarity_ms = t0.elapsed().as_secs_f64() * 1e3;

        let t1 = Instant::now();
        let eigs = symmetric_eigenvalues(&dual)?;
        // spectrum padded to length n by zeros; 0 log 0 = 0, so skip them
        (eigs, similarity_ms, t1.elapsed().as_secs_f64() * 1e3)
    } else {
        let t0 = Instant::now();
        let kernel = compute_kernel(h, &params.kernel)?;
        let similarity_ms = t0.elapsed().as_secs_f64() * 1e3;

        let t1 = Instant::now();
        let scaled = kernel.data().mapv(|v| v / n as f64);
        let eigs = symmetric_eigenvalues(&scaled)?;
        (eigs, similarity_ms, t1.elapsed().as_secs_f64() * 1e3)
    };

    let entropy = spectrum_entropy(&eigenvalues)?;
    let score = entropy.exp();

    // The effective-number bounds presuppose a trace-normalized spectrum
    // (unit-diagonal kernels); only enforce them there.
    let spectrum_sum: f64 = eigenvalues.iter().filter(|l| **l > 0.0).sum();
    if (spectrum_sum - 1.0).abs() <= 1e-6 {
        check_effective_number_bounds("vendi", score, n)?;
    }

    Ok(DiversityReport::new("vendi", score)?
        .with_param("n", n)
        .with_param("kernel", params.kernel.kind.label())
        .with_param("gamma", params.kernel.resolved_gamma(h.dim()))
        .with_param("degree", params.kernel.degree)
        .with_param("coef0", params.kernel.coef0)
        .with_param("fast_gram_path", use_fast)
        .with_timing("similarity", similarity_ms)
        .with_timing("summarization", summarization_ms))
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    fn identity_embedding(n: usize) -> EmbeddingMatrix {
        let mut rows = vec![vec![0.0; n]; n];
        for (i, row) in rows.iter_mut().enumerate() {
            row[i] = 1.0;
        }
        EmbeddingMatrix::from_rows(rows).unwrap()
    }

    fn unit_rows(rng: &mut ChaCha8Rng, n: usize, d: usize) -> EmbeddingMatrix {
        let rows: Vec<Vec<f64>> = (0..n)
            .map(|_| {
                let v: Vec<f64> = (0..d).map(|_| rng.random::<f64>() - 0.5).collect();
                let norm = v.iter().map(|x| x * x).sum::<f64>().sqrt();
                v.into_iter().map(|x| x / norm).collect()
            })
            .collect();
        EmbeddingMatrix::from_rows(rows).unwrap()
    }

    #[test]
    fn identity_spectrum_scores_n() {
        // K/4 has eigenvalues all 1/4: exp(log 4) = 4.
        let r = vendi_score(&identity_embedding(4), &VendiParams::default()).unwrap();
        assert!((r.score - 4.0).abs() <= 1e-9);
    }

    #[test]
    fn identical_rows_score_one() {
        let h = EmbeddingMatrix::from_rows(vec![vec![0.6, 0.8]; 3]).unwrap();
        let r = vendi_score(&h, &VendiParams::default()).unwrap();
        assert!((r.score - 1.0).abs() <= 1e-9);
    }

    #[test]
    fn single_sample_scores_one() {
        let h = EmbeddingMatrix::from_rows(vec![vec![0.6, 0.8]]).unwrap();
        let r = vendi_score(&h, &VendiParams::default()).unwrap();
        assert!((r.score - 1.0).abs() <= 1e-9);
    }

    #[test]
    fn fast_path_matches_direct_path() {
        let mut rng = ChaCha8Rng::seed_from_u64(61);
        let h = unit_rows(&mut rng, 50, 4);
        let fast = vendi_score(
            &h,
            &VendiParams { fast_gram_path: Some(true), ..Default::default() },
        )
        .unwrap();
        let direct = vendi_score(
            &h,
            &VendiParams { fast_gram_path: Some(false), ..Default::default() },
        )
        .unwrap();
        assert!((fast.score - direct.score).abs() <= 1e-8);
        assert_eq!(fast.params["fast_gram_path"], true);
        assert_eq!(direct.params["fast_gram_path"], false);
    }

    #[test]
    fn fast_path_auto_selection() {
        let mut rng = ChaCha8Rng::seed_from_u64(67);
        let tall = unit_rows(&mut rng, 20, 3);
        let r = vendi_score(&tall, &VendiParams::default()).unwrap();
        assert_eq!(r.params["fast_gram_path"], true);

        let wide = unit_rows(&mut rng, 3, 20);
        let r = vendi_score(&wide, &VendiParams::default()).unwrap();
        assert_eq!(r.params["fast_gram_path"], false);

        let rbf = vendi_score(
            &tall,
            &VendiParams { kernel: KernelSpec::rbf(None), ..Default::default() },
        )
        .unwrap();
        assert_eq!(rbf.params["fast_gram_path"], false);
    }

    #[test]
    fn bounds_hold_on_unit_diagonal_kernels() {
        let mut rng = ChaCha8Rng::seed_from_u64(71);
        for _ in 0..10 {
            let n = rng.random_range(2..24u64) as usize;
            let d = rng.random_range(1..8u64) as usize;
            let h = unit_rows(&mut rng, n, d);
            for params in [
                VendiParams::default(),
                VendiParams { kernel: KernelSpec::rbf(None), ..Default::default() },
                VendiParams { kernel: KernelSpec::laplacian(None), ..Default::default() },
            ] {
                let r = vendi_score(&h, &params).unwrap();
                assert!(
                    r.score >= 1.0 - 1e-6 && r.score <= n as f64 + 1e-6,
                    "{} at n={n}",
                    r.score
                );
            }
        }
    }

    #[test]
    fn permutation_and_duplicate_stack_invariance() {
        let mut rng = ChaCha8Rng::seed_from_u64(73);
        let h = unit_rows(&mut rng, 12, 5);
        let rows: Vec<Vec<f64>> = (0..12).map(|i| h.row(i).to_vec()).collect();

        let mut reversed = rows.clone();
        reversed.reverse();
        let perm = EmbeddingMatrix::from_rows(reversed).unwrap();
        let a = vendi_score(&h, &VendiParams::default()).unwrap().score;
        let b = vendi_score(&perm, &VendiParams::default()).unwrap().score;
        assert!((a - b).abs() <= 1e-8);

        let stacked =
            EmbeddingMatrix::from_rows(rows.iter().chain(rows.iter()).cloned().collect()).unwrap();
        let c = vendi_score(&stacked, &VendiParams::default()).unwrap().score;
        assert!((a - c).abs() <= 1e-6, "{a} vs {c}");
    }

    #[test]
    fn non_psd_declared_kernel_rejected() {
        let h = identity_embedding(3);
        let params = VendiParams {
            kernel: KernelSpec::polynomial(None, 2, -1.0),
            ..Default::default()
        };
        assert!(matches!(vendi_score(&h, &params), Err(Error::Parameter(_))));
    }

    #[test]
    fn spectrum_entropy_clamps_and_rejects() {
        // tiny negative round-off is clamped to zero contribution
        assert_eq!(spectrum_entropy(&[1.0, -1e-9]).unwrap(), 0.0);
        // a real negative eigenvalue is an error naming the value
        let err = spectrum_entropy(&[0.9, -1e-7]).unwrap_err();
        assert!(matches!(err, Error::Numerical(_)));
        assert!(err.to_string().contains("-0.0000001") || err.to_string().contains("1e-7"));
        // 0 log 0 = 0
        assert_eq!(spectrum_entropy(&[1.0, 0.0, 0.0]).unwrap(), 0.0);
    }
}
