//! Design quality metrics and convergence diagnostics.

mod plot;

use std::io::Write;

use nalgebra::DMatrix;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::kernel::KernelMatrix;
use crate::landmarking::{mspe_field, LandmarkTrace};
use crate::mesh_io::{sq_dist, PointCloud};

pub use plot::convergence_svg;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum DesignMethod {
    Greedy,
    Random,
    Fps,
    Grid,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum BaselineMethod {
    Random,
    Fps,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DesignReport {
    pub design: Vec<usize>,
    /// Largest MSPE over all points (squared power function maximum).
    pub max_mspe: f64,
    pub fill_distance: f64,
    pub method: DesignMethod,
    pub seed: Option<u64>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum FitScale {
    Loglog,
    Semilog,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ConvergenceFit {
    pub n_range: [usize; 2],
    pub slope: f64,
    pub intercept: f64,
    pub r_squared: f64,
    pub scale: FitScale,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BoundCheck {
    pub m: usize,
    /// `σ_{2m}` of the greedy trace.
    pub lhs: f64,
    /// `2 · max_diag^{1/2} · (min_X Π_{K,X})^{1/2}` over the candidate `m`-designs.
    pub rhs: f64,
    pub best_candidate_mspe: f64,
    pub candidates: usize,
    pub pass: bool,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FillScalingRow {
    pub n: usize,
    pub fill_distance: f64,
    /// `h_n · n^{1/d}`.
    pub scaled: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FillScalingReport {
    pub dim: usize,
    pub rows: Vec<FillScalingRow>,
    /// Largest `scaled` value relative to the first one.
    pub max_ratio: f64,
    pub flagged: bool,
}

/// Growth of `h_n · n^{1/d}` beyond this factor is flagged.
pub const FILL_GROWTH_LIMIT: f64 = 1.25;

/// Largest posterior variance over all points for a given design.
pub fn power_max(kernel: &KernelMatrix, design: &[usize]) -> Result<f64> {
    Ok(mspe_field(kernel, design)?.into_iter().fold(0.0, f64::max))
}

/// Squared RKHS distance from `K(·, x)` to `span{K(·, x_i)}` at every `x`,
/// via the projection coefficients `a = K_nn⁻¹ k_n(x)`:
/// `K(x,x) − 2 aᵀ k_n(x) + aᵀ K_nn a`. Uses an LU solve, independent of the
/// Cholesky path in [`mspe_field`].
pub fn projection_distance_sq(kernel: &KernelMatrix, design: &[usize]) -> Result<Vec<f64>> {
    if design.is_empty() {
        return Ok(kernel.diag().to_vec());
    }
    let gram = kernel.submatrix(design);
    let cross = DMatrix::from_fn(design.len(), kernel.len(), |r, j| kernel.get(design[r], j));
    let coef = gram
        .clone()
        .lu()
        .solve(&cross)
        .ok_or(Error::SingularSubmatrix(design.len()))?;
    let gram_coef = &gram * &coef;
    Ok((0..kernel.len())
        .map(|x| {
            let a = coef.column(x);
            kernel.get(x, x) - 2.0 * a.dot(&cross.column(x)) + a.dot(&gram_coef.column(x))
        })
        .collect())
}

/// `h = max_i min_{j ∈ design} ‖x_i − x_j‖` in the ambient metric.
pub fn fill_distance(points: &PointCloud, design: &[usize]) -> Result<f64> {
    if design.is_empty() {
        return Err(Error::EmptyDesign);
    }
    if let Some(&bad) = design.iter().find(|&&d| d >= points.len()) {
        return Err(Error::Validation(format!("design index {bad} out of range")));
    }
    let worst = (0..points.len())
        .map(|i| {
            design
                .iter()
                .map(|&d| points.sq_dist(i, d))
                .fold(f64::INFINITY, f64::min)
        })
        .fold(0.0, f64::max);
    Ok(worst.sqrt())
}

/// Farthest point sampling started from index 0; ties go to the lowest index.
pub fn farthest_point_sampling(points: &PointCloud, n: usize) -> Vec<usize> {
    let total = points.len();
    let n = n.min(total);
    let mut design = Vec::with_capacity(n);
    if n == 0 {
        return design;
    }
    let mut nearest = vec![f64::INFINITY; total];
    let mut next = 0;
    for _ in 0..n {
        design.push(next);
        let p = points.point(next);
        nearest
            .par_iter_mut()
            .enumerate()
            .for_each(|(i, d)| *d = d.min(sq_dist(points.point(i), p)));
        next = crate::landmarking::select_next(&nearest);
    }
    design
}

pub fn baseline_design(
    points: &PointCloud,
    method: BaselineMethod,
    n: usize,
    seed: u64,
) -> Result<Vec<usize>> {
    if n > points.len() {
        return Err(Error::Config(format!(
            "cannot draw {n} design points from N = {}",
            points.len()
        )));
    }
    Ok(match method {
        BaselineMethod::Random => {
            let mut rng = ChaCha8Rng::seed_from_u64(seed);
            rand::seq::index::sample(&mut rng, points.len(), n).into_vec()
        }
        BaselineMethod::Fps => farthest_point_sampling(points, n),
    })
}

pub fn evaluate_design(
    kernel: &KernelMatrix,
    points: &PointCloud,
    design: Vec<usize>,
    method: DesignMethod,
    seed: Option<u64>,
) -> Result<DesignReport> {
    let max_mspe = power_max(kernel, &design)?;
    let fill_distance = fill_distance(points, &design)?;
    Ok(DesignReport {
        design,
        max_mspe,
        fill_distance,
        method,
        seed,
    })
}

/// `count` seeded random `m`-designs plus one FPS design, evaluated in parallel.
/// Random design `k` uses seed `seed + k`.
pub fn candidate_designs(
    kernel: &KernelMatrix,
    points: &PointCloud,
    m: usize,
    count: usize,
    seed: u64,
) -> Result<Vec<DesignReport>> {
    let mut reports = (0..count as u64)
        .into_par_iter()
        .map(|k| {
            let s = seed.wrapping_add(k);
            let design = baseline_design(points, BaselineMethod::Random, m, s)?;
            evaluate_design(kernel, points, design, DesignMethod::Random, Some(s))
        })
        .collect::<Result<Vec<_>>>()?;
    let fps = baseline_design(points, BaselineMethod::Fps, m, 0)?;
    reports.push(evaluate_design(kernel, points, fps, DesignMethod::Fps, None)?);
    Ok(reports)
}

/// Checks `σ_{2m} ≤ 2 · max_diag^{1/2} · (min Π_{K,X_m})^{1/2}` where the
/// minimum runs over the supplied candidate `m`-designs, each of which
/// upper-bounds the optimal `m`-point worst-case error.
pub fn oracle_bound_check(
    kernel: &KernelMatrix,
    trace: &LandmarkTrace,
    candidates: &[DesignReport],
    m: usize,
) -> Result<BoundCheck> {
    if m == 0 || trace.sigma_history.len() < 2 * m {
        return Err(Error::Config(format!(
            "bound check at m = {m} needs at least {} greedy steps, trace has {}",
            2 * m,
            trace.sigma_history.len()
        )));
    }
    if candidates.is_empty() {
        return Err(Error::Config("bound check needs at least one candidate design".into()));
    }
    if let Some(c) = candidates.iter().find(|c| c.design.len() != m) {
        return Err(Error::Config(format!(
            "candidate design has {} points, expected {m}",
            c.design.len()
        )));
    }
    let best = candidates.iter().map(|c| c.max_mspe).fold(f64::INFINITY, f64::min);
    let max_diag = kernel.max_diag();
    let lhs = trace.sigma_history[2 * m - 1];
    let rhs = 2.0 * max_diag.sqrt() * best.sqrt();
    Ok(BoundCheck {
        m,
        lhs,
        rhs,
        best_candidate_mspe: best,
        candidates: candidates.len(),
        // rounding slack only
        pass: lhs <= rhs + 1e-12 * max_diag,
    })
}

/// Least-squares line through `(log n, log σ_n)` or `(n, log σ_n)` for
/// `n ∈ [n_min, n_max]`, with `σ_n = sigma[n - 1]`.
pub fn convergence_fit(
    sigma: &[f64],
    n_min: usize,
    n_max: usize,
    scale: FitScale,
) -> Result<ConvergenceFit> {
    if n_min == 0 || n_min >= n_max || n_max > sigma.len() {
        return Err(Error::Config(format!(
            "fit range [{n_min}, {n_max}] must satisfy 1 <= n_min < n_max <= {}",
            sigma.len()
        )));
    }
    let range = n_min..=n_max;
    let bad: Vec<usize> = range.clone().filter(|&n| !(sigma[n - 1] > 0.0)).collect();
    if !bad.is_empty() {
        if bad.len() * 10 > range.clone().count() {
            return Err(Error::NonpositiveSigma(bad[0]));
        }
        log::warn!("excluding {} nonpositive sigma values from the fit", bad.len());
    }
    let pts: Vec<(f64, f64)> = range
        .filter(|&n| sigma[n - 1] > 0.0)
        .map(|n| {
            let x = match scale {
                FitScale::Loglog => (n as f64).ln(),
                FitScale::Semilog => n as f64,
            };
            (x, sigma[n - 1].ln())
        })
        .collect();
    if pts.len() < 2 {
        return Err(Error::NonpositiveSigma(n_min));
    }
    let m = pts.len() as f64;
    let mx = pts.iter().map(|p| p.0).sum::<f64>() / m;
    let my = pts.iter().map(|p| p.1).sum::<f64>() / m;
    let sxx: f64 = pts.iter().map(|p| (p.0 - mx) * (p.0 - mx)).sum();
    let sxy: f64 = pts.iter().map(|p| (p.0 - mx) * (p.1 - my)).sum();
    let syy: f64 = pts.iter().map(|p| (p.1 - my) * (p.1 - my)).sum();
    let slope = sxy / sxx;
    let intercept = my - slope * mx;
    let ss_res: f64 = pts
        .iter()
        .map(|p| {
            let r = p.1 - (intercept + slope * p.0);
            r * r
        })
        .sum();
    let r_squared = if syy > 0.0 {
        (1.0 - ss_res / syy).clamp(0.0, 1.0)
    } else {
        1.0
    };
    Ok(ConvergenceFit {
        n_range: [n_min, n_max],
        slope,
        intercept,
        r_squared,
        scale,
    })
}

/// Fill distance of FPS designs at each size in `n_list`, scaled by `n^{1/dim}`.
/// FPS designs are nested, so a single run of the largest size serves all.
pub fn fill_scaling_check(points: &PointCloud, n_list: &[usize], dim: usize) -> Result<FillScalingReport> {
    if dim == 0 {
        return Err(Error::Config("intrinsic dimension must be positive".into()));
    }
    let largest = n_list.iter().copied().max().unwrap_or(0);
    if n_list.is_empty() || n_list.contains(&0) || largest > points.len() {
        return Err(Error::Config(format!(
            "design sizes must lie in [1, N = {}]",
            points.len()
        )));
    }
    let fps = farthest_point_sampling(points, largest);
    let rows = n_list
        .iter()
        .map(|&n| {
            let h = fill_distance(points, &fps[..n])?;
            Ok(FillScalingRow {
                n,
                fill_distance: h,
                scaled: h * (n as f64).powf(1.0 / dim as f64),
            })
        })
        .collect::<Result<Vec<_>>>()?;
    let first = rows[0].scaled;
    let max_ratio = if first > 0.0 {
        rows.iter().map(|r| r.scaled / first).fold(0.0, f64::max)
    } else {
        1.0
    };
    Ok(FillScalingReport {
        dim,
        rows,
        max_ratio,
        flagged: max_ratio > FILL_GROWTH_LIMIT,
    })
}

#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
pub struct AnalysisReport {
    pub designs: Vec<DesignReport>,
    pub bound_checks: Vec<BoundCheck>,
    pub fits: Vec<ConvergenceFit>,
}

impl AnalysisReport {
    pub fn to_json(&self) -> Result<String> {
        Ok(serde_json::to_string_pretty(self)?)
    }

    /// One row per design: `method,seed,size,max_mspe,fill_distance`,
    /// followed by a bound-check table and a fit table.
    pub fn write_csv<W: Write>(&self, mut out: W) -> std::io::Result<()> {
        writeln!(out, "method,seed,size,max_mspe,fill_distance")?;
        for d in &self.designs {
            let method = serde_json::to_value(d.method).unwrap_or_default();
            let seed = d.seed.map(|s| s.to_string()).unwrap_or_default();
            writeln!(
                out,
                "{},{seed},{},{:?},{:?}",
                method.as_str().unwrap_or(""),
                d.design.len(),
                d.max_mspe,
                d.fill_distance
            )?;
        }
        writeln!(out)?;
        writeln!(out, "m,lhs,rhs,best_candidate_mspe,candidates,pass")?;
        for b in &self.bound_checks {
            writeln!(
                out,
                "{},{:?},{:?},{:?},{},{}",
                b.m, b.lhs, b.rhs, b.best_candidate_mspe, b.candidates, b.pass
            )?;
        }
        writeln!(out)?;
        writeln!(out, "scale,n_min,n_max,slope,intercept,r_squared")?;
        for f in &self.fits {
            let scale = match f.scale {
                FitScale::Loglog => "loglog",
                FitScale::Semilog => "semilog",
            };
            writeln!(
                out,
                "{scale},{},{},{:?},{:?},{:?}",
                f.n_range[0], f.n_range[1], f.slope, f.intercept, f.r_squared
            )?;
        }
        Ok(())
    }
}
