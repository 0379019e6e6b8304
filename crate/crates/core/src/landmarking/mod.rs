//! Greedy Gaussian-process landmarking.
//!
//! At every step the vertex with the largest posterior variance (MSPE) under
//! the current landmarks is added to the design, and the posterior is
//! refreshed with a rank-one Cholesky update. The resulting order coincides
//! with the pivot order of diagonally pivoted Cholesky on the kernel matrix.

mod cholesky;
mod posterior;

use std::io::Write;
use std::path::Path;

use nalgebra::DMatrix;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::kernel::{KernelKind, KernelMatrix};

pub use cholesky::{pivoted_cholesky, PivotedCholesky};
pub use posterior::{PosteriorState, PIVOT_FLOOR};

/// How to choose among exactly tied maximizers.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum TieRule {
    #[default]
    LowestIndex,
    Random { seed: u64 },
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum StopReason {
    Budget,
    Tolerance,
}

/// Ordered landmarks with the max-MSPE value observed before each pick.
///
/// `sigma_history[n]` is the largest posterior variance given the first `n`
/// landmarks, so `sigma_history[0]` is the largest prior variance.
#[derive(Debug, Clone, PartialEq)]
pub struct LandmarkTrace {
    pub selected: Vec<usize>,
    pub sigma_history: Vec<f64>,
    pub stop_reason: StopReason,
    /// MSPE field after the last selection.
    pub final_mspe: Vec<f64>,
}

impl LandmarkTrace {
    pub fn len(&self) -> usize {
        self.selected.len()
    }

    pub fn is_empty(&self) -> bool {
        self.selected.is_empty()
    }

    /// Largest MSPE after all selections.
    pub fn final_sigma(&self) -> f64 {
        self.final_mspe.iter().copied().fold(0.0, f64::max)
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct GreedyOptions {
    pub budget: usize,
    /// Stop once the largest MSPE is at most `tolerance · max_diag`.
    pub tolerance: f64,
    pub tie_rule: TieRule,
}

impl GreedyOptions {
    pub fn budget(budget: usize) -> Self {
        GreedyOptions {
            budget,
            tolerance: 0.0,
            tie_rule: TieRule::LowestIndex,
        }
    }
}

fn check_design(n: usize, selected: &[usize]) -> Result<()> {
    let mut seen = vec![false; n];
    for &i in selected {
        if i >= n {
            return Err(Error::Validation(format!("design index {i} out of range for N = {n}")));
        }
        if std::mem::replace(&mut seen[i], true) {
            return Err(Error::Validation(format!("design index {i} appears twice")));
        }
    }
    Ok(())
}

/// Cholesky factor of `K[S, S]` and the back-solved cross-covariance
/// `L⁻¹ K[S, :]`.
fn conditioned(kernel: &KernelMatrix, selected: &[usize]) -> Result<(DMatrix<f64>, DMatrix<f64>)> {
    check_design(kernel.len(), selected)?;
    let chol = kernel
        .submatrix(selected)
        .cholesky()
        .ok_or(Error::SingularSubmatrix(selected.len()))?;
    let l = chol.l();
    let cross = DMatrix::from_fn(selected.len(), kernel.len(), |r, j| kernel.get(selected[r], j));
    let solved = l
        .solve_lower_triangular(&cross)
        .ok_or(Error::SingularSubmatrix(selected.len()))?;
    Ok((l, solved))
}

/// Posterior variance `Σ(x_i) = K_ii − k_nᵀ K_nn⁻¹ k_n` at every point,
/// computed from scratch. Negative round-off is clamped to zero.
pub fn mspe_field(kernel: &KernelMatrix, selected: &[usize]) -> Result<Vec<f64>> {
    if selected.is_empty() {
        return Ok(kernel.diag().to_vec());
    }
    let (_, solved) = conditioned(kernel, selected)?;
    Ok(solved
        .column_iter()
        .zip(kernel.diag())
        .map(|(c, d)| (d - c.norm_squared()).max(0.0))
        .collect())
}

/// Index of the largest entry; exact ties resolve to the lowest index.
pub fn select_next(mspe: &[f64]) -> usize {
    let mut best = 0;
    for (i, v) in mspe.iter().enumerate() {
        if *v > mspe[best] {
            best = i;
        }
    }
    best
}

/// Argmax with a configurable tie rule.
#[derive(Debug, Clone)]
pub struct Selector {
    rng: Option<ChaCha8Rng>,
}

impl Selector {
    pub fn new(rule: TieRule) -> Self {
        let rng = match rule {
            TieRule::LowestIndex => None,
            TieRule::Random { seed } => Some(ChaCha8Rng::seed_from_u64(seed)),
        };
        Selector { rng }
    }

    pub fn select(&mut self, mspe: &[f64]) -> usize {
        let best = select_next(mspe);
        match &mut self.rng {
            None => best,
            Some(rng) => {
                let top = mspe[best];
                let ties: Vec<usize> = (0..mspe.len()).filter(|&i| mspe[i] == top).collect();
                ties[rng.random_range(0..ties.len())]
            }
        }
    }
}

/// Greedy max-MSPE landmarking.
///
/// Stops after `budget` picks, or earlier once the largest MSPE drops to
/// `tolerance · max_diag` or below [`PIVOT_FLOOR`]` · max_diag`.
pub fn gp_landmark(kernel: &KernelMatrix, opts: &GreedyOptions) -> Result<LandmarkTrace> {
    let n = kernel.len();
    if opts.budget == 0 || opts.budget > n {
        return Err(Error::Config(format!(
            "landmark budget must lie in [1, N = {n}], got {}",
            opts.budget
        )));
    }
    if !(opts.tolerance >= 0.0 && opts.tolerance.is_finite()) {
        return Err(Error::Config(format!("tolerance must be >= 0, got {}", opts.tolerance)));
    }
    let max_diag = kernel.max_diag();
    let threshold = (opts.tolerance * max_diag).max(PIVOT_FLOOR * max_diag);
    let mut state = PosteriorState::new(kernel);
    let mut selector = Selector::new(opts.tie_rule);
    let mut sigma_history = Vec::with_capacity(opts.budget);
    let mut stop_reason = StopReason::Budget;
    while state.selected().len() < opts.budget {
        let next = selector.select(state.mspe_raw());
        let sigma = state.mspe_raw()[next];
        if !(sigma > threshold) {
            stop_reason = StopReason::Tolerance;
            break;
        }
        state.rank_one_update(next)?;
        sigma_history.push(sigma);
    }
    let final_mspe = state.mspe();
    log::debug!(
        "greedy landmarking picked {} of {} ({:?})",
        sigma_history.len(),
        opts.budget,
        stop_reason
    );
    Ok(LandmarkTrace {
        selected: state.selected().to_vec(),
        sigma_history,
        stop_reason,
        final_mspe,
    })
}

/// Simple-kriging predictor `Y*(x) = k_n(x)ᵀ K_nn⁻¹ Y_n` at each query index.
pub fn blp_predict(
    kernel: &KernelMatrix,
    selected: &[usize],
    observations: &[f64],
    queries: &[usize],
) -> Result<Vec<f64>> {
    if observations.len() != selected.len() {
        return Err(Error::DimensionMismatch {
            expected: selected.len(),
            got: observations.len(),
        });
    }
    if let Some(&q) = queries.iter().find(|&&q| q >= kernel.len()) {
        return Err(Error::Validation(format!("query index {q} out of range")));
    }
    if selected.is_empty() {
        return Ok(vec![0.0; queries.len()]);
    }
    check_design(kernel.len(), selected)?;
    let chol = kernel
        .submatrix(selected)
        .cholesky()
        .ok_or(Error::SingularSubmatrix(selected.len()))?;
    let alpha = chol.solve(&nalgebra::DVector::from_column_slice(observations));
    Ok(queries
        .iter()
        .map(|&q| selected.iter().zip(alpha.iter()).map(|(&s, a)| kernel.get(q, s) * a).sum())
        .collect())
}

/// Parameters recorded alongside a trace.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TraceParams {
    pub epsilon: f64,
    pub lambda: Option<f64>,
    pub rho: Option<f64>,
    pub kernel_kind: KernelKind,
    pub tie_rule: TieRule,
}

#[derive(Serialize, Deserialize)]
struct TraceDocument {
    selected: Vec<usize>,
    sigma_history: Vec<f64>,
    stop_reason: StopReason,
    params: TraceParams,
}

/// Pretty JSON: `{selected, sigma_history, stop_reason, params}`.
pub fn trace_to_json(trace: &LandmarkTrace, params: &TraceParams) -> Result<String> {
    let doc = TraceDocument {
        selected: trace.selected.clone(),
        sigma_history: trace.sigma_history.clone(),
        stop_reason: trace.stop_reason,
        params: params.clone(),
    };
    Ok(serde_json::to_string_pretty(&doc)?)
}

/// Reads a JSON trace. The MSPE field is not stored, so `final_mspe` is empty.
pub fn read_trace_json(path: &Path) -> Result<(LandmarkTrace, TraceParams)> {
    let text = std::fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
    let doc: TraceDocument = serde_json::from_str(&text)?;
    if doc.selected.len() != doc.sigma_history.len() {
        return Err(Error::Validation(
            "trace has different numbers of landmarks and sigma values".into(),
        ));
    }
    let trace = LandmarkTrace {
        selected: doc.selected,
        sigma_history: doc.sigma_history,
        stop_reason: doc.stop_reason,
        final_mspe: Vec::new(),
    };
    Ok((trace, doc.params))
}

/// CSV twin of the JSON trace: `step,vertex_index,sigma` with 1-based steps.
pub fn write_trace_csv<W: Write>(mut out: W, trace: &LandmarkTrace) -> std::io::Result<()> {
    writeln!(out, "step,vertex_index,sigma")?;
    for (k, (v, s)) in trace.selected.iter().zip(&trace.sigma_history).enumerate() {
        writeln!(out, "{},{v},{s:?}", k + 1)?;
    }
    Ok(())
}
