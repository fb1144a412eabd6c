//! Dense matrix domain types and the shared row-softmax / trace primitives.
//!
//! All matrices are dense with row-major semantics. Operations are pure
//! functions over immutable inputs; row-parallel paths keep a fixed per-row
//! reduction order so results are bitwise reproducible across thread counts.

use ndarray::{Array2, ArrayView1};
use rayon::prelude::*;

use crate::error::{Error, Result};

/// Absolute tolerance for structural invariants (symmetry, row sums).
pub const INVARIANT_TOL: f64 = 1e-9;

fn all_finite(data: &Array2<f64>) -> bool {
    data.iter().all(|v| v.is_finite())
}

/// An `n x d` matrix of sample representations, one row per sample.
///
/// Invariants: `n >= 1`, `d >= 1`, every entry finite.
#[derive(Debug, Clone, PartialEq)]
pub struct EmbeddingMatrix {
    data: Array2<f64>,
}

impl EmbeddingMatrix {
    pub fn new(data: Array2<f64>) -> Result<Self> {
        if data.nrows() < 1 || data.ncols() < 1 {
            return Err(Error::Input(format!(
                "embedding matrix must be at least 1x1, got {}x{}",
                data.nrows(),
                data.ncols()
            )));
        }
        if !all_finite(&data) {
            return Err(Error::Input(
                "embedding matrix contains non-finite entries".into(),
            ));
        }
        Ok(Self { data })
    }

    pub fn from_rows(rows: Vec<Vec<f64>>) -> Result<Self> {
        let n = rows.len();
        if n == 0 {
            return Err(Error::Input("embedding matrix has no rows".into()));
        }
        let d = rows[0].len();
        if rows.iter().any(|r| r.len() != d) {
            return Err(Error::Input("embedding rows have inconsistent lengths".into()));
        }
        let flat: Vec<f64> = rows.into_iter().flatten().collect();
        let data = Array2::from_shape_vec((n, d), flat)
            .expect("shape matches collected length");
        Self::new(data)
    }

    /// Number of samples (rows).
    pub fn n(&self) -> usize {
        self.data.nrows()
    }

    /// Representation dimension (columns).
    pub fn dim(&self) -> usize {
        self.data.ncols()
    }

    pub fn row(&self, i: usize) -> ArrayView1<'_, f64> {
        self.data.row(i)
    }

    pub fn data(&self) -> &Array2<f64> {
        &self.data
    }

    /// New matrix holding the given rows, in the given order.
    pub fn select_rows(&self, indices: &[usize]) -> Result<Self> {
        if indices.is_empty() {
            return Err(Error::Input("row selection is empty".into()));
        }
        if let Some(&bad) = indices.iter().find(|&&i| i >= self.n()) {
            return Err(Error::Input(format!(
                "row index {bad} out of bounds for {} rows",
                self.n()
            )));
        }
        let d = self.dim();
        let mut data = Array2::zeros((indices.len(), d));
        for (out, &src) in indices.iter().enumerate() {
            data.row_mut(out).assign(&self.data.row(src));
        }
        Ok(Self { data })
    }
}

/// An `n x n` pairwise similarity matrix with a declared PSD status.
///
/// Invariants: symmetric within `1e-9 * max(1, |K[i,j]|)`, every entry finite.
#[derive(Debug, Clone, PartialEq)]
pub struct KernelMatrix {
    data: Array2<f64>,
    psd_declared: bool,
}

impl KernelMatrix {
    pub fn new(data: Array2<f64>, psd_declared: bool) -> Result<Self> {
        let n = data.nrows();
        if n < 1 || data.ncols() != n {
            return Err(Error::Input(format!(
                "kernel matrix must be square, got {}x{}",
                n,
                data.ncols()
            )));
        }
        if !all_finite(&data) {
            return Err(Error::Numerical(
                "kernel matrix contains non-finite entries".into(),
            ));
        }
        for i in 0..n {
            for j in (i + 1)..n {
                let a = data[[i, j]];
                let b = data[[j, i]];
                if (a - b).abs() > INVARIANT_TOL * a.abs().max(1.0) {
                    return Err(Error::Numerical(format!(
                        "kernel matrix is not symmetric at ({i},{j}): {a} vs {b}"
                    )));
                }
            }
        }
        Ok(Self { data, psd_declared })
    }

    pub fn n(&self) -> usize {
        self.data.nrows()
    }

    pub fn data(&self) -> &Array2<f64> {
        &self.data
    }

    /// True when the producing kernel family guarantees positive
    /// semi-definiteness on valid inputs.
    pub fn psd_declared(&self) -> bool {
        self.psd_declared
    }
}

/// An `n x n` row-stochastic classification probability matrix.
///
/// Invariants: every entry in `[0, 1]`, every row sums to 1 within `1e-9`.
#[derive(Debug, Clone, PartialEq)]
pub struct ProbabilityMatrix {
    data: Array2<f64>,
}

impl ProbabilityMatrix {
    pub fn new(data: Array2<f64>) -> Result<Self> {
        let n = data.nrows();
        if n < 1 || data.ncols() != n {
            return Err(Error::Input(format!(
                "probability matrix must be square, got {}x{}",
                n,
                data.ncols()
            )));
        }
        for (i, row) in data.rows().into_iter().enumerate() {
            let mut sum = 0.0;
            for &v in row {
                if !(0.0..=1.0).contains(&v) {
                    return Err(Error::Numerical(format!(
                        "probability entry {v} in row {i} outside [0, 1]"
                    )));
                }
                sum += v;
            }
            if (sum - 1.0).abs() > INVARIANT_TOL {
                return Err(Error::Numerical(format!(
                    "probability row {i} sums to {sum}, not 1"
                )));
            }
        }
        Ok(Self { data })
    }

    pub fn n(&self) -> usize {
        self.data.nrows()
    }

    pub fn data(&self) -> &Array2<f64> {
        &self.data
    }
}

/// Row-wise temperature softmax with per-row max subtraction.
///
/// Entry `(i, j)` is `exp(logits[i,j]/tau) / sum_j exp(logits[i,j]/tau)`,
/// computed as `exp((x - max_row)/tau)` so rows with large-magnitude logits
/// neither overflow nor underflow to all-zero.
pub fn row_softmax(logits: &Array2<f64>, tau: f64) -> Result<ProbabilityMatrix> {
    if !(tau > 0.0 && tau.is_finite()) {
        return Err(Error::Parameter(format!(
            "softmax temperature must be positive and finite, got {tau}"
        )));
    }
    let n = logits.nrows();
    if n < 1 || logits.ncols() != n {
        return Err(Error::Input(format!(
            "row_softmax expects a square matrix, got {}x{}",
            n,
            logits.ncols()
        )));
    }
    if !all_finite(logits) {
        return Err(Error::Input("softmax input contains non-finite entries".into()));
    }

    // copy into a standard-layout array regardless of the input's layout
    let mut out = Array2::zeros(logits.raw_dim());
    out.assign(logits);
    let slice = out
        .as_slice_mut()
        .expect("freshly allocated matrix is row-major contiguous");
    // Each row is transformed independently with a fixed left-to-right
    // reduction order, so the result does not depend on the thread count.
    slice.par_chunks_mut(n).for_each(|row| {
        let max = row.iter().copied().fold(f64::NEG_INFINITY, f64::max);
        let mut sum = 0.0;
        for v in row.iter_mut() {
            *v = ((*v - max) / tau).exp();
            sum += *v;
        }
        for v in row.iter_mut() {
            *v /= sum;
        }
    });
    ProbabilityMatrix::new(out)
}

/// Sum of the diagonal of a probability matrix.
pub fn trace(p: &ProbabilityMatrix) -> f64 {
    (0..p.n()).map(|i| p.data()[[i, i]]).sum()
}
