use nalgebra::DMatrix;

use crate::error::{Error, Result};
use crate::kernel::KernelMatrix;

/// Pivots at or below this fraction of the largest prior variance signal
/// that the numerical rank is exhausted.
pub const PIVOT_FLOOR: f64 = 1e-12;

/// Gaussian-process posterior after conditioning on a growing set of
/// noiseless observations, kept as a partial Cholesky factor.
///
/// `factor[k]` holds column `k` of the `N × n` factor `G` with
/// `G Gᵀ = K[:, S] K[S, S]⁻¹ K[S, :]`, so the rows of `G` at the selected
/// indices form the lower-triangular Cholesky factor of `K[S, S]` and the
/// posterior variance is `Σ_j = K_jj − ‖G_j‖²`.
#[derive(Debug, Clone)]
pub struct PosteriorState<'a> {
    kernel: &'a KernelMatrix,
    selected: Vec<usize>,
    factor: Vec<Vec<f64>>,
    mspe: Vec<f64>,
    max_diag: f64,
}

impl<'a> PosteriorState<'a> {
    /// Prior state: no observations, `Σ = diag(K)`.
    pub fn new(kernel: &'a KernelMatrix) -> Self {
        PosteriorState {
            kernel,
            selected: Vec::new(),
            factor: Vec::new(),
            mspe: kernel.diag().to_vec(),
            max_diag: kernel.max_diag(),
        }
    }

    pub fn kernel(&self) -> &KernelMatrix {
        self.kernel
    }

    pub fn selected(&self) -> &[usize] {
        &self.selected
    }

    /// Current MSPE field, clamped at zero.
    pub fn mspe(&self) -> Vec<f64> {
        self.mspe.iter().map(|v| v.max(0.0)).collect()
    }

    /// Unclamped MSPE field as maintained by the updates.
    pub fn mspe_raw(&self) -> &[f64] {
        &self.mspe
    }

    /// Column `k` of the partial factor (length `N`).
    pub fn factor_column(&self, k: usize) -> &[f64] {
        &self.factor[k]
    }

    /// Lower-triangular Cholesky factor of `K[S, S]`.
    pub fn selected_factor(&self) -> DMatrix<f64> {
        let n = self.selected.len();
        DMatrix::from_fn(n, n, |r, c| {
            if c <= r {
                self.factor[c][self.selected[r]]
            } else {
                0.0
            }
        })
    }

    /// Conditions on one more observation at `index`, in `O(N n)` work.
    pub fn rank_one_update(&mut self, index: usize) -> Result<()> {
        let n = self.kernel.len();
        if index >= n {
            return Err(Error::Validation(format!("index {index} out of range for N = {n}")));
        }
        if self.selected.contains(&index) {
            return Err(Error::Validation(format!("index {index} is already selected")));
        }
        let pivot = self.mspe[index];
        if !(pivot > PIVOT_FLOOR * self.max_diag) {
            return Err(Error::NumericalBreakdown { index, pivot });
        }
        let mut col = self.kernel.column(index).to_vec();
        for g in &self.factor {
            let gp = g[index];
            for (c, gj) in col.iter_mut().zip(g) {
                *c -= gj * gp;
            }
        }
        let root = pivot.sqrt();
        for (c, s) in col.iter_mut().zip(self.mspe.iter_mut()) {
            *c /= root;
            *s -= *c * *c;
        }
        self.factor.push(col);
        self.selected.push(index);
        Ok(())
    }
}
