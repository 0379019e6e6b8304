use nalgebra::DMatrix;

use super::posterior::PIVOT_FLOOR;
use crate::error::{Error, Result};
use crate::kernel::KernelMatrix;

/// Result of a partial diagonally pivoted Cholesky factorization.
#[derive(Debug, Clone)]
pub struct PivotedCholesky {
    /// Pivot rows in elimination order.
    pub pivots: Vec<usize>,
    /// `N × L` factor with `K ≈ factor · factorᵀ`.
    pub factor: DMatrix<f64>,
    /// Diagonal of the remaining Schur complement.
    pub schur_diagonal: Vec<f64>,
}

/// `steps` steps of right-looking Cholesky with full diagonal pivoting:
/// each pivot is the largest diagonal entry of the current Schur complement
/// (lowest index among exact ties), followed by a rank-one downdate of the
/// whole complement.
pub fn pivoted_cholesky(kernel: &KernelMatrix, steps: usize) -> Result<PivotedCholesky> {
    let n = kernel.len();
    if steps > n {
        return Err(Error::Config(format!("cannot take {steps} pivots from N = {n}")));
    }
    let floor = PIVOT_FLOOR * kernel.max_diag();
    let mut schur = kernel.entries().clone();
    let mut factor = DMatrix::zeros(n, steps);
    let mut pivots = Vec::with_capacity(steps);
    for step in 0..steps {
        let mut p = 0;
        for i in 1..n {
            if schur[(i, i)] > schur[(p, p)] {
                p = i;
            }
        }
        let pivot = schur[(p, p)];
        if !(pivot > floor) {
            return Err(Error::NumericalBreakdown { index: p, pivot });
        }
        let root = pivot.sqrt();
        let g: Vec<f64> = schur.column(p).iter().map(|s| s / root).collect();
        for j in 0..n {
            let gj = g[j];
            for (s, gi) in schur.column_mut(j).iter_mut().zip(&g) {
                *s -= gi * gj;
            }
        }
        factor.column_mut(step).copy_from_slice(&g);
        pivots.push(p);
    }
    let schur_diagonal = schur.diagonal().iter().copied().collect();
    Ok(PivotedCholesky {
        pivots,
        factor,
        schur_diagonal,
    })
}
