//! Discrete differential geometry on triangle meshes.
//!
//! Per-vertex mixed Voronoi areas, angle-deficit Gaussian curvature and
//! cotangent-Laplacian mean curvature (Meyer, Desbrun, Schröder & Barr,
//! "Discrete Differential-Geometry Operators for Triangulated 2-Manifolds"),
//! plus the curvature weight that deforms the kernel's reference measure.

use std::f64::consts::{FRAC_PI_2, PI};
use std::io::Write;

use nalgebra::{DMatrix, Vector3};
use rayon::prelude::*;

use crate::error::{Error, Result};
use crate::mesh_io::{PointCloud, TriangleMesh};

/// Angle deficits (radians) and scaled mean curvatures below this are
/// treated as exactly flat when building curvature weights.
const FLAT_TOL: f64 = 1e-10;

/// Per-vertex curvature: Gaussian `κ` (length⁻²) and unsigned mean `η` (length⁻¹).
#[derive(Debug, Clone, PartialEq)]
pub struct CurvatureField {
    pub gaussian: Vec<f64>,
    pub mean: Vec<f64>,
}

impl CurvatureField {
    pub fn new(gaussian: Vec<f64>, mean: Vec<f64>) -> Result<Self> {
        if gaussian.len() != mean.len() {
            return Err(Error::DimensionMismatch {
                expected: gaussian.len(),
                got: mean.len(),
            });
        }
        if let Some(i) = gaussian
            .iter()
            .zip(&mean)
            .position(|(k, h)| !k.is_finite() || !h.is_finite())
        {
            return Err(Error::DegenerateGeometry(format!(
                "non-finite curvature at vertex {i}"
            )));
        }
        Ok(CurvatureField { gaussian, mean })
    }

    pub fn len(&self) -> usize {
        self.gaussian.len()
    }

    pub fn is_empty(&self) -> bool {
        self.gaussian.is_empty()
    }
}

/// Nonnegative per-vertex weight `w` together with the vertex measure `ν`.
#[derive(Debug, Clone, PartialEq)]
pub struct WeightField {
    weight: Vec<f64>,
    area: Vec<f64>,
}

impl WeightField {
    pub fn new(weight: Vec<f64>, area: Vec<f64>) -> Result<Self> {
        if weight.len() != area.len() {
            return Err(Error::DimensionMismatch {
                expected: area.len(),
                got: weight.len(),
            });
        }
        if let Some(i) = weight.iter().position(|w| !(w.is_finite() && *w >= 0.0)) {
            return Err(Error::Validation(format!(
                "weight at vertex {i} is {}, must be finite and nonnegative",
                weight[i]
            )));
        }
        if let Some(i) = area.iter().position(|a| !(a.is_finite() && *a > 0.0)) {
            return Err(Error::Validation(format!(
                "area at vertex {i} is {}, must be positive",
                area[i]
            )));
        }
        if weight.iter().all(|&w| w == 0.0) {
            return Err(Error::Validation("all weights are zero".into()));
        }
        Ok(WeightField { weight, area })
    }

    /// Rescales arbitrary nonnegative weights so that `Σ w ν = 1`.
    pub fn normalized(weight: Vec<f64>, area: Vec<f64>) -> Result<Self> {
        let field = WeightField::new(weight, area)?;
        let total = field.mass();
        let weight = field.weight.iter().map(|w| w / total).collect();
        Ok(WeightField {
            weight,
            area: field.area,
        })
    }

    /// Constant weight over the given vertex measure, normalized to unit mass.
    pub fn uniform_over(area: Vec<f64>) -> Result<Self> {
        WeightField::normalized(vec![1.0; area.len()], area)
    }

    /// `w = 1`, `ν = 1/N`: the counting measure on `n` points.
    pub fn uniform(n: usize) -> Result<Self> {
        WeightField::new(vec![1.0; n], vec![1.0 / n as f64; n])
    }

    pub fn weight(&self) -> &[f64] {
        &self.weight
    }

    pub fn area(&self) -> &[f64] {
        &self.area
    }

    pub fn len(&self) -> usize {
        self.weight.len()
    }

    pub fn is_empty(&self) -> bool {
        self.weight.is_empty()
    }

    /// `Σ_i w_i ν_i`, summed in index order.
    pub fn mass(&self) -> f64 {
        self.weight.iter().zip(&self.area).map(|(w, a)| w * a).sum()
    }

    /// Diagonal of the reweighting measure, `w_i ν_i`.
    pub fn measure(&self) -> Vec<f64> {
        self.weight.iter().zip(&self.area).map(|(w, a)| w * a).collect()
    }
}

struct Corner {
    /// Interior angles at the three corners.
    angle: [f64; 3],
    area: f64,
}

fn face_geometry(mesh: &TriangleMesh, f: usize) -> Result<(Corner, [Vector3<f64>; 3])> {
    let [a, b, c] = mesh.faces()[f];
    let v = mesh.vertices();
    let p = [v[a].coords, v[b].coords, v[c].coords];
    let edge = |i: usize, j: usize| p[j] - p[i];
    for k in 0..3 {
        if edge(k, (k + 1) % 3).norm_squared() == 0.0 {
            return Err(Error::DegenerateGeometry(format!("face {f} has a zero-length edge")));
        }
    }
    let area = 0.5 * edge(0, 1).cross(&edge(0, 2)).norm();
    if area == 0.0 {
        return Err(Error::DegenerateGeometry(format!("face {f} has zero area")));
    }
    let angle = std::array::from_fn(|k| {
        let (u, w) = (edge(k, (k + 1) % 3), edge(k, (k + 2) % 3));
        u.cross(&w).norm().atan2(u.dot(&w))
    });
    Ok((Corner { angle, area }, p))
}

/// Mixed Voronoi area per vertex: circumcentric cells for non-obtuse
/// triangles, midpoint split (½ / ¼ / ¼) for obtuse ones.
pub fn voronoi_areas(mesh: &TriangleMesh) -> Result<Vec<f64>> {
    let mut area = vec![0.0; mesh.num_vertices()];
    for (f, face) in mesh.faces().iter().enumerate() {
        let (corner, p) = face_geometry(mesh, f)?;
        let obtuse = corner.angle.iter().position(|&t| t > FRAC_PI_2);
        for k in 0..3 {
            let (j, l) = ((k + 1) % 3, (k + 2) % 3);
            area[face[k]] += match obtuse {
                None => {
                    let cot = |t: f64| t.cos() / t.sin();
                    ((p[j] - p[k]).norm_squared() * cot(corner.angle[l])
                        + (p[l] - p[k]).norm_squared() * cot(corner.angle[j]))
                        / 8.0
                }
                Some(o) if o == k => corner.area / 2.0,
                Some(_) => corner.area / 4.0,
            };
        }
    }
    if let Some(i) = area.iter().position(|&a| a <= 0.0) {
        return Err(Error::DegenerateGeometry(format!("vertex {i} belongs to no face")));
    }
    Ok(area)
}

/// Sum of flat triangle areas.
pub fn surface_area(mesh: &TriangleMesh) -> f64 {
    let v = mesh.vertices();
    mesh.faces()
        .iter()
        .map(|&[a, b, c]| 0.5 * (v[b] - v[a]).cross(&(v[c] - v[a])).norm())
        .sum()
}

/// Angle-deficit Gaussian curvature and cotangent-Laplacian mean curvature,
/// both divided by the mixed Voronoi area. Boundary vertices use `π − Σθ`.
pub fn discrete_curvatures(mesh: &TriangleMesh) -> Result<CurvatureField> {
    let area = voronoi_areas(mesh)?;
    let n = mesh.num_vertices();
    let mut angle_sum = vec![0.0; n];
    let mut laplace = vec![Vector3::zeros(); n];
    for (f, face) in mesh.faces().iter().enumerate() {
        let (corner, p) = face_geometry(mesh, f)?;
        for k in 0..3 {
            angle_sum[face[k]] += corner.angle[k];
            // edge (j, l) is opposite corner k
            let (j, l) = ((k + 1) % 3, (k + 2) % 3);
            let cot = corner.angle[k].cos() / corner.angle[k].sin();
            laplace[face[j]] += cot * (p[j] - p[l]);
            laplace[face[l]] += cot * (p[l] - p[j]);
        }
    }
    let boundary = mesh.boundary_vertices();
    let gaussian = (0..n)
        .map(|i| {
            let full = if boundary[i] { PI } else { 2.0 * PI };
            (full - angle_sum[i]) / area[i]
        })
        .collect();
    // mean-curvature normal is laplace / (2A) = 2ηn
    let mean = (0..n).map(|i| laplace[i].norm() / (4.0 * area[i])).collect();
    CurvatureField::new(gaussian, mean)
}

/// Curvature weight `w = λ|κ|^ρ / Σ|κ|^ρν + (1−λ)|η|^ρ / Σ|η|^ρν`.
pub fn curvature_weight(
    curv: &CurvatureField,
    area: &[f64],
    lambda: f64,
    rho: f64,
) -> Result<WeightField> {
    if curv.len() != area.len() {
        return Err(Error::DimensionMismatch {
            expected: area.len(),
            got: curv.len(),
        });
    }
    if !(0.0..=1.0).contains(&lambda) {
        return Err(Error::Config(format!("lambda must lie in [0, 1], got {lambda}")));
    }
    if !(rho > 0.0 && rho.is_finite()) {
        return Err(Error::Config(format!("rho must be positive, got {rho}")));
    }
    let gauss: Vec<f64> = curv
        .gaussian
        .iter()
        .zip(area)
        .map(|(k, a)| if (k * a).abs() <= FLAT_TOL { 0.0 } else { k.abs().powf(rho) })
        .collect();
    let mean: Vec<f64> = curv
        .mean
        .iter()
        .zip(area)
        .map(|(h, a)| if h.abs() * a.sqrt() <= FLAT_TOL { 0.0 } else { h.abs().powf(rho) })
        .collect();
    let term = |vals: &[f64], coef: f64, name: &'static str| -> Result<Vec<f64>> {
        if coef == 0.0 {
            return Ok(vec![0.0; vals.len()]);
        }
        let total: f64 = vals.iter().zip(area).map(|(v, a)| v * a).sum();
        if total <= 0.0 {
            return Err(Error::AllZeroCurvature(name));
        }
        Ok(vals.iter().map(|v| coef * v / total).collect())
    };
    let g = term(&gauss, lambda, "gaussian curvature")?;
    let h = term(&mean, 1.0 - lambda, "mean curvature")?;
    let weight = g.iter().zip(&h).map(|(a, b)| a + b).collect();
    WeightField::new(weight, area.to_vec())
}

/// Convenience: areas, curvatures and weight in one pass over the mesh.
pub fn mesh_curvature_weight(
    mesh: &TriangleMesh,
    lambda: f64,
    rho: f64,
) -> Result<(CurvatureField, WeightField)> {
    let curv = discrete_curvatures(mesh)?;
    let area = voronoi_areas(mesh)?;
    let wf = curvature_weight(&curv, &area, lambda, rho)?;
    Ok((curv, wf))
}

/// Indices of the `k` nearest other points to `i`, ties broken by index.
pub fn nearest_neighbors(cloud: &PointCloud, i: usize, k: usize) -> Vec<usize> {
    let mut cand: Vec<(f64, usize)> = (0..cloud.len())
        .filter(|&j| j != i)
        .map(|j| (cloud.sq_dist(i, j), j))
        .collect();
    let by = |a: &(f64, usize), b: &(f64, usize)| a.0.total_cmp(&b.0).then(a.1.cmp(&b.1));
    if k < cand.len() {
        cand.select_nth_unstable_by(k, by);
        cand.truncate(k);
    }
    cand.sort_unstable_by(by);
    cand.into_iter().map(|(_, j)| j).collect()
}

/// PCA surface variation of the neighborhood `{i} ∪ kNN(i)`: smallest
/// covariance eigenvalue over the eigenvalue sum.
pub fn surface_variation(cloud: &PointCloud, i: usize, k: usize) -> Result<f64> {
    let d = cloud.dim();
    let mut idx = nearest_neighbors(cloud, i, k);
    idx.push(i);
    let m = idx.len() as f64;
    let mut centroid = vec![0.0; d];
    for &j in &idx {
        for (c, x) in centroid.iter_mut().zip(cloud.point(j)) {
            *c += x / m;
        }
    }
    let mut cov = DMatrix::<f64>::zeros(d, d);
    for &j in &idx {
        let p = cloud.point(j);
        for r in 0..d {
            for c in 0..d {
                cov[(r, c)] += (p[r] - centroid[r]) * (p[c] - centroid[c]) / m;
            }
        }
    }
    let eig: nalgebra::DVector<f64> = cov.symmetric_eigenvalues();
    let total: f64 = eig.iter().map(|e| e.max(0.0)).sum();
    if total <= 0.0 {
        return Err(Error::DegenerateNeighborhood(i));
    }
    let smallest = eig.iter().copied().fold(f64::INFINITY, f64::min).max(0.0);
    let variation = smallest / total;
    Ok(if variation <= 1e-12 { 0.0 } else { variation })
}

/// Importance field for point clouds: surface variation from `k` nearest
/// neighbors, counting measure `ν = 1/N`, normalized to unit mass.
pub fn pointcloud_importance(cloud: &PointCloud, k: usize) -> Result<WeightField> {
    let n = cloud.len();
    if k < 4 || k >= n {
        return Err(Error::Config(format!(
            "neighbor count must satisfy 4 <= k < N = {n}, got {k}"
        )));
    }
    let variation = (0..n)
        .into_par_iter()
        .map(|i| surface_variation(cloud, i, k))
        .collect::<Result<Vec<f64>>>()?;
    if variation.iter().all(|&v| v == 0.0) {
        return Err(Error::AllZeroCurvature("surface variation"));
    }
    WeightField::normalized(variation, vec![1.0 / n as f64; n])
}

/// Debug dump: `vertex_index,kappa,eta,nu,w`. Curvature columns are left
/// empty when no curvature field is available (point clouds).
pub fn write_geometry_csv<W: Write>(
    mut out: W,
    curv: Option<&CurvatureField>,
    wf: &WeightField,
) -> std::io::Result<()> {
    writeln!(out, "vertex_index,kappa,eta,nu,w")?;
    for i in 0..wf.len() {
        match curv {
            Some(c) => write!(out, "{i},{:?},{:?},", c.gaussian[i], c.mean[i])?,
            None => write!(out, "{i},,,")?,
        }
        writeln!(out, "{:?},{:?}", wf.area()[i], wf.weight()[i])?;
    }
    Ok(())
}
