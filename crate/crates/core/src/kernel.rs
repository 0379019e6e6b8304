//! Dense squared-exponential kernel matrices and their reweighted variant.
//!
//! Bandwidth convention: `K(x, y) = exp(−‖x − y‖² / ε)`. A reweighted kernel
//! requested at bandwidth `ε` is assembled as `K_{ε/2} Λ K_{ε/2}` with
//! `Λ = diag(w ν)`, so both kinds share the same effective length scale.

use std::io::{Read, Write};

use nalgebra::{DMatrix, DMatrixViewMut};
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::geometry::WeightField;
use crate::mesh_io::PointCloud;

/// Relative diagonal jitter used by [`JitterPolicy::Relative`].
pub const RELATIVE_JITTER: f64 = 1e-12;

/// Output columns per gemm block; fixed so results do not depend on the
/// number of worker threads.
const BLOCK_COLS: usize = 64;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum KernelKind {
    Euclidean,
    Reweighted,
    /// Supplied directly as a Gram matrix.
    Precomputed,
}

impl KernelKind {
    fn code(self) -> u32 {
        match self {
            KernelKind::Euclidean => 0,
            KernelKind::Reweighted => 1,
            KernelKind::Precomputed => 2,
        }
    }

    fn from_code(c: u32) -> Option<Self> {
        Some(match c {
            0 => KernelKind::Euclidean,
            1 => KernelKind::Reweighted,
            2 => KernelKind::Precomputed,
            _ => return None,
        })
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum JitterPolicy {
    #[default]
    None,
    Relative,
}

/// Symmetric positive semidefinite Gram matrix over a fixed point set.
#[derive(Debug, Clone, PartialEq)]
pub struct KernelMatrix {
    entries: DMatrix<f64>,
    diag: Vec<f64>,
    bandwidth: f64,
    kind: KernelKind,
    jitter: f64,
}

impl KernelMatrix {
    fn from_parts(entries: DMatrix<f64>, bandwidth: f64, kind: KernelKind) -> Self {
        let diag = entries.diagonal().iter().copied().collect();
        KernelMatrix {
            entries,
            diag,
            bandwidth,
            kind,
            jitter: 0.0,
        }
    }

    /// Wraps an arbitrary square matrix. Asymmetry up to `1e-12` relative is
    /// removed by mirroring the upper triangle; anything larger is an error.
    pub fn from_gram(mut entries: DMatrix<f64>) -> Result<Self> {
        let n = entries.nrows();
        if entries.ncols() != n {
            return Err(Error::DimensionMismatch {
                expected: n,
                got: entries.ncols(),
            });
        }
        if entries.iter().any(|v| !v.is_finite()) {
            return Err(Error::Validation("Gram matrix has non-finite entries".into()));
        }
        let scale = entries.amax().max(f64::MIN_POSITIVE);
        for j in 0..n {
            for i in j + 1..n {
                if (entries[(i, j)] - entries[(j, i)]).abs() > 1e-12 * scale {
                    return Err(Error::Validation(format!(
                        "Gram matrix is not symmetric at ({i}, {j})"
                    )));
                }
                entries[(i, j)] = entries[(j, i)];
            }
        }
        Ok(KernelMatrix::from_parts(entries, f64::NAN, KernelKind::Precomputed))
    }

    pub fn len(&self) -> usize {
        self.diag.len()
    }

    pub fn is_empty(&self) -> bool {
        self.diag.is_empty()
    }

    #[inline]
    pub fn get(&self, i: usize, j: usize) -> f64 {
        self.entries[(i, j)]
    }

    /// Column `j`, which equals row `j` by symmetry.
    #[inline]
    pub fn column(&self, j: usize) -> &[f64] {
        let n = self.len();
        &self.entries.as_slice()[j * n..(j + 1) * n]
    }

    pub fn entries(&self) -> &DMatrix<f64> {
        &self.entries
    }

    pub fn diag(&self) -> &[f64] {
        &self.diag
    }

    pub fn max_diag(&self) -> f64 {
        self.diag.iter().copied().fold(0.0, f64::max)
    }

    /// Effective bandwidth ε; NaN for precomputed matrices.
    pub fn bandwidth(&self) -> f64 {
        self.bandwidth
    }

    pub fn kind(&self) -> KernelKind {
        self.kind
    }

    /// Diagonal shift added by [`psd_floor`], zero otherwise.
    pub fn jitter(&self) -> f64 {
        self.jitter
    }

    /// Dense copy of the rows/columns listed in `idx`.
    pub fn submatrix(&self, idx: &[usize]) -> DMatrix<f64> {
        DMatrix::from_fn(idx.len(), idx.len(), |r, c| self.get(idx[r], idx[c]))
    }

    /// Kernel restricted to a subset, re-indexed in the order of `order`.
    pub fn permuted(&self, order: &[usize]) -> KernelMatrix {
        KernelMatrix {
            entries: self.submatrix(order),
            diag: order.iter().map(|&i| self.diag[i]).collect(),
            ..*self
        }
    }

    /// Binary dump: little-endian `u64 N`, `u32 kind`, `f64 ε`, then `N²`
    /// row-major `f64` entries.
    pub fn write_binary<W: Write>(&self, mut out: W) -> std::io::Result<()> {
        let n = self.len();
        out.write_all(&(n as u64).to_le_bytes())?;
        out.write_all(&self.kind.code().to_le_bytes())?;
        out.write_all(&self.bandwidth.to_le_bytes())?;
        for i in 0..n {
            for j in 0..n {
                out.write_all(&self.get(i, j).to_le_bytes())?;
            }
        }
        Ok(())
    }

    pub fn read_binary<R: Read>(mut input: R) -> Result<Self> {
        let bad = |e: std::io::Error| Error::io(std::path::Path::new("<kernel dump>"), e);
        let mut u64b = [0u8; 8];
        let mut u32b = [0u8; 4];
        input.read_exact(&mut u64b).map_err(bad)?;
        let n = u64::from_le_bytes(u64b) as usize;
        input.read_exact(&mut u32b).map_err(bad)?;
        let kind = KernelKind::from_code(u32::from_le_bytes(u32b))
            .ok_or_else(|| Error::Validation("unknown kernel kind code".into()))?;
        input.read_exact(&mut u64b).map_err(bad)?;
        let bandwidth = f64::from_le_bytes(u64b);
        let mut entries = DMatrix::zeros(n, n);
        for i in 0..n {
            for j in 0..n {
                input.read_exact(&mut u64b).map_err(bad)?;
                entries[(i, j)] = f64::from_le_bytes(u64b);
            }
        }
        Ok(KernelMatrix::from_parts(entries, bandwidth, kind))
    }
}

fn check_bandwidth(eps: f64) -> Result<()> {
    if eps > 0.0 && eps.is_finite() {
        Ok(())
    } else {
        Err(Error::InvalidBandwidth(eps))
    }
}

/// `(0.1 · bounding-box diagonal)²`.
pub fn auto_bandwidth(points: &PointCloud) -> f64 {
    let d = 0.1 * points.bbox_diagonal();
    d * d
}

/// `K_ij = exp(−‖x_i − x_j‖² / ε)`.
pub fn squared_exponential_kernel(points: &PointCloud, eps: f64) -> Result<KernelMatrix> {
    check_bandwidth(eps)?;
    let n = points.len();
    let mut entries = DMatrix::zeros(n, n);
    entries
        .as_mut_slice()
        .par_chunks_mut(n)
        .enumerate()
        .for_each(|(j, col)| {
            let xj = points.point(j);
            for (i, v) in col.iter_mut().enumerate() {
                *v = (-crate::mesh_io::sq_dist(points.point(i), xj) / eps).exp();
            }
        });
    Ok(KernelMatrix::from_parts(entries, eps, KernelKind::Euclidean))
}

/// `K^w = Kᵀ Λ K` with `Λ = diag(w_k ν_k)`. The inner kernel should be
/// assembled at half the requested effective bandwidth; the result records
/// twice the inner bandwidth.
pub fn reweighted_kernel(inner: &KernelMatrix, wf: &WeightField) -> Result<KernelMatrix> {
    if inner.kind() != KernelKind::Euclidean {
        return Err(Error::Config("reweighting requires a Euclidean inner kernel".into()));
    }
    let n = inner.len();
    if wf.len() != n {
        return Err(Error::DimensionMismatch {
            expected: n,
            got: wf.len(),
        });
    }
    let measure = wf.measure();
    let k = &inner.entries;
    let mut scaled = k.clone();
    for (mut row, m) in scaled.row_iter_mut().zip(&measure) {
        row *= *m;
    }
    let mut out = DMatrix::zeros(n, n);
    out.as_mut_slice()
        .par_chunks_mut(n * BLOCK_COLS)
        .enumerate()
        .for_each(|(b, chunk)| {
            let c0 = b * BLOCK_COLS;
            let w = chunk.len() / n;
            let mut block = DMatrixViewMut::from_slice(chunk, n, w);
            block.gemm(1.0, k, &scaled.columns(c0, w), 0.0);
        });
    // exact symmetry: mirror the upper triangle
    for j in 0..n {
        for i in j + 1..n {
            out[(i, j)] = out[(j, i)];
        }
    }
    Ok(KernelMatrix::from_parts(out, 2.0 * inner.bandwidth, KernelKind::Reweighted))
}

/// Reweighted kernel at effective bandwidth `eps`, assembled from points.
pub fn reweighted_from_points(points: &PointCloud, eps: f64, wf: &WeightField) -> Result<KernelMatrix> {
    check_bandwidth(eps)?;
    let inner = squared_exponential_kernel(points, eps / 2.0)?;
    reweighted_kernel(&inner, wf)
}

/// Optionally shifts the diagonal by `1e-12 · max_diag`.
pub fn psd_floor(kernel: &KernelMatrix, policy: JitterPolicy) -> KernelMatrix {
    match policy {
        JitterPolicy::None => kernel.clone(),
        JitterPolicy::Relative => {
            let delta = RELATIVE_JITTER * kernel.max_diag();
            let mut out = kernel.clone();
            for i in 0..out.len() {
                out.entries[(i, i)] += delta;
                out.diag[i] += delta;
            }
            out.jitter = kernel.jitter + delta;
            out
        }
    }
}
