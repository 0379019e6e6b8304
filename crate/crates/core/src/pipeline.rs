//! Glue from an input surface to a kernel matrix.

use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::geometry::{self, CurvatureField, WeightField};
use crate::kernel::{self, KernelKind, KernelMatrix};
use crate::mesh_io::{self, InputFormat, PointCloud, TriangleMesh};

/// Default number of neighbors for point-cloud importance.
pub const DEFAULT_KNN: usize = 10;

#[derive(Debug, Clone)]
pub enum Surface {
    Mesh(TriangleMesh),
    Cloud(PointCloud),
}

impl Surface {
    pub fn load(path: &Path, format: InputFormat) -> Result<Self> {
        Ok(match format {
            InputFormat::Mesh(f) => Surface::Mesh(mesh_io::load_mesh(path, f)?),
            InputFormat::Cloud(f) => Surface::Cloud(mesh_io::load_point_cloud(path, f)?),
        })
    }

    pub fn points(&self) -> PointCloud {
        match self {
            Surface::Mesh(m) => mesh_io::mesh_to_cloud(m),
            Surface::Cloud(c) => c.clone(),
        }
    }

    pub fn len(&self) -> usize {
        match self {
            Surface::Mesh(m) => m.num_vertices(),
            Surface::Cloud(c) => c.len(),
        }
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }

    /// Per-point measure: mixed Voronoi areas on meshes, `1/N` on clouds.
    pub fn point_measure(&self) -> Result<Vec<f64>> {
        match self {
            Surface::Mesh(m) => geometry::voronoi_areas(m),
            Surface::Cloud(c) => Ok(vec![1.0 / c.len() as f64; c.len()]),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum WeightSource {
    Curvature,
    Uniform,
    /// One nonnegative weight per line, renormalized to unit mass.
    File(std::path::PathBuf),
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct WeightParams {
    pub source: WeightSource,
    pub lambda: f64,
    pub rho: f64,
    pub knn: usize,
}

impl Default for WeightParams {
    fn default() -> Self {
        WeightParams {
            source: WeightSource::Curvature,
            lambda: 0.5,
            rho: 1.0,
            knn: DEFAULT_KNN,
        }
    }
}

/// Reads one weight per line (blank lines and `#` comments ignored).
pub fn read_weights(path: &Path) -> Result<Vec<f64>> {
    let text = std::fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
    mesh_io::content_lines(&text)
        .map(|(l, s)| mesh_io::parse_f64(s.split(',').next_back().unwrap_or(s).trim(), path, l))
        .collect()
}

/// Weight field plus curvature (meshes with curvature weights only).
pub fn weight_field(surface: &Surface, params: &WeightParams) -> Result<(Option<CurvatureField>, WeightField)> {
    match (&params.source, surface) {
        (WeightSource::Curvature, Surface::Mesh(m)) => {
            let (curv, wf) = geometry::mesh_curvature_weight(m, params.lambda, params.rho)?;
            Ok((Some(curv), wf))
        }
        (WeightSource::Curvature, Surface::Cloud(c)) => {
            Ok((None, geometry::pointcloud_importance(c, params.knn)?))
        }
        (WeightSource::Uniform, s) => Ok((None, WeightField::uniform_over(s.point_measure()?)?)),
        (WeightSource::File(path), s) => {
            let w = read_weights(path)?;
            if w.len() != s.len() {
                return Err(Error::DimensionMismatch {
                    expected: s.len(),
                    got: w.len(),
                });
            }
            Ok((None, WeightField::normalized(w, s.point_measure()?)?))
        }
    }
}

/// Kernel of the requested kind at effective bandwidth `eps`.
pub fn assemble_kernel(
    points: &PointCloud,
    kind: KernelKind,
    eps: f64,
    weights: Option<&WeightField>,
) -> Result<KernelMatrix> {
    match kind {
        KernelKind::Euclidean => kernel::squared_exponential_kernel(points, eps),
        KernelKind::Reweighted => {
            let wf = weights.ok_or_else(|| Error::Config("reweighted kernel needs a weight field".into()))?;
            kernel::reweighted_from_points(points, eps, wf)
        }
        KernelKind::Precomputed => Err(Error::Config("precomputed kernels cannot be assembled".into())),
    }
}
