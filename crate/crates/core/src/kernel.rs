//! The pairwise-similarity stage: `K = Kernel(H)` for the four kernel
//! families (inner product, RBF, Laplacian, polynomial).

use ndarray::Array2;
use rayon::prelude::*;
use serde::Serialize;

use crate::error::{Error, Result};
use crate::matrix::{EmbeddingMatrix, KernelMatrix};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum KernelKind {
    InnerProduct,
    Rbf,
    Laplacian,
    Polynomial,
}

impl KernelKind {
    pub fn label(self) -> &'static str {
        match self {
            KernelKind::InnerProduct => "inner-product",
            KernelKind::Rbf => "rbf",
            KernelKind::Laplacian => "laplacian",
            KernelKind::Polynomial => "polynomial",
        }
    }
}

/// Kernel family plus its hyperparameters.
///
/// `gamma = None` means the default `1/d`, resolved against the embedding
/// dimension at compute time.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct KernelSpec {
    pub kind: KernelKind,
    pub gamma: Option<f64>,
    pub degree: u32,
    pub coef0: f64,
}

impl Default for KernelSpec {
    fn default() -> Self {
        Self::inner_product()
    }
}

impl KernelSpec {
    pub const DEFAULT_DEGREE: u32 = 3;
    pub const DEFAULT_COEF0: f64 = 1.0;

    pub fn inner_product() -> Self {
        Self { kind: KernelKind::InnerProduct, gamma: None, degree: Self::DEFAULT_DEGREE, coef0: Self::DEFAULT_COEF0 }
    }

    pub fn rbf(gamma: Option<f64>) -> Self {
        Self { kind: KernelKind::Rbf, gamma, degree: Self::DEFAULT_DEGREE, coef0: Self::DEFAULT_COEF0 }
    }

    pub fn laplacian(gamma: Option<f64>) -> Self {
        Self { kind: KernelKind::Laplacian, gamma, degree: Self::DEFAULT_DEGREE, coef0: Self::DEFAULT_COEF0 }
    }

    pub fn polynomial(gamma: Option<f64>, degree: u32, coef0: f64) -> Self {
        Self { kind: KernelKind::Polynomial, gamma, degree, coef0 }
    }

    pub fn validate(&self) -> Result<()> {
        if let Some(g) = self.gamma {
            if !(g > 0.0 && g.is_finite()) {
                return Err(Error::Parameter(format!("kernel gamma must be positive, got {g}")));
            }
        }
        if self.degree < 1 {
            return Err(Error::Parameter("polynomial degree must be >= 1".into()));
        }
        if !self.coef0.is_finite() {
            return Err(Error::Parameter(format!("coef0 must be finite, got {}", self.coef0)));
        }
        Ok(())
    }

    pub fn resolved_gamma(&self, dim: usize) -> f64 {
        self.gamma.unwrap_or(1.0 / dim as f64)
    }

    /// PSD on valid inputs? True for all four families, except polynomial
    /// kernels with a negative independent term.
    pub fn psd_on_valid_inputs(&self) -> bool {
        match self.kind {
            KernelKind::Polynomial => self.coef0 >= 0.0,
            _ => true,
        }
    }
}

// `dot` can return non-standard layouts for degenerate shapes (d = 1);
// the row-chunk parallel paths below need standard (row-major) layout.
fn to_standard(m: Array2<f64>) -> Array2<f64> {
    if m.is_standard_layout() {
        m
    } else {
        m.as_standard_layout().into_owned()
    }
}

// Copy the upper triangle onto the lower one so K is symmetric exactly,
// not just up to matmul rounding.
fn mirror_upper(m: &mut Array2<f64>) {
    let n = m.nrows();
    for i in 0..n {
        for j in (i + 1)..n {
            m[[j, i]] = m[[i, j]];
        }
    }
}

/// Compute the pairwise similarity matrix `K[i,j] = k(h_i, h_j)`.
///
/// Per family: inner product `h_i . h_j`; RBF `exp(-gamma ||h_i - h_j||^2)`;
/// Laplacian `exp(-gamma ||h_i - h_j||_1)`; polynomial
/// `(gamma h_i . h_j + coef0)^degree`.
pub fn compute_kernel(h: &EmbeddingMatrix, spec: &KernelSpec) -> Result<KernelMatrix> {
    spec.validate()?;
    let n = h.n();
    let gamma = spec.resolved_gamma(h.dim());
    let psd = spec.psd_on_valid_inputs();

    let data = match spec.kind {
        KernelKind::InnerProduct => {
            let mut gram = to_standard(h.data().dot(&h.data().t()));
            mirror_upper(&mut gram);
            gram
        }
        KernelKind::Rbf => {
            let mut gram = to_standard(h.data().dot(&h.data().t()));
            mirror_upper(&mut gram);
            let sq_norms: Vec<f64> = (0..n).map(|i| gram[[i, i]]).collect();
            let mut out = gram;
            let slice = out.as_slice_mut().expect("owned row-major matrix");
            slice
                .par_chunks_mut(n)
                .enumerate()
                .for_each(|(i, row)| {
                    for (j, v) in row.iter_mut().enumerate() {
                        // ||a-b||^2 expanded via the Gram diagonal; clamp
                        // kills negative round-off so exp never exceeds 1.
                        let d2 = (sq_norms[i] + sq_norms[j] - 2.0 * *v).max(0.0);
                        *v = (-gamma * d2).exp();
                    }
                });
            out
        }
        KernelKind::Laplacian => {
            let mut out = Array2::zeros((n, n));
            let hd = h.data();
            let slice = out.as_slice_mut().expect("owned row-major matrix");
            slice
                .par_chunks_mut(n)
                .enumerate()
                .for_each(|(i, row)| {
                    let a = hd.row(i);
                    for (j, v) in row.iter_mut().enumerate() {
                        let b = hd.row(j);
                        let l1: f64 = a.iter().zip(b.iter()).map(|(x, y)| (x - y).abs()).sum();
                        *v = (-gamma * l1).exp();
                    }
                });
            out
        }
        KernelKind::Polynomial => {
            let mut gram = to_standard(h.data().dot(&h.data().t()));
            mirror_upper(&mut gram);
            let deg = spec.degree as i32;
            let coef0 = spec.coef0;
            gram.mapv_inplace(|g| (gamma * g + coef0).powi(deg));
            gram
        }
    };

    KernelMatrix::new(data, psd)
}

/// The `d x d` dual Gram matrix `H^T H`. Its nonzero eigenvalues (divided by
/// `n`) equal those of `H H^T / n`, which backs the VendiScore fast path for
/// inner-product kernels when `n >> d`.
pub fn gram_dual(h: &EmbeddingMatrix) -> Array2<f64> {
    let mut g = to_standard(h.data().t().dot(h.data()));
    mirror_upper(&mut g);
    g
}
