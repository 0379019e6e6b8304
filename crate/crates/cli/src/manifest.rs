//! Fully resolved run configuration, written next to every trace.

use std::path::{Path, PathBuf};

use gplandmark::kernel::{self, KernelKind, KernelMatrix};
use gplandmark::landmarking::TieRule;
use gplandmark::mesh_io::{InputFormat, PointCloud};
use gplandmark::pipeline::{self, Surface, WeightParams};
use gplandmark::{Error, Result};
use serde::{Deserialize, Serialize};

pub const FILE_NAME: &str = "run_manifest.json";

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RunManifest {
    pub input: PathBuf,
    pub format: String,
    pub kernel: KernelKind,
    /// Resolved bandwidth.
    pub epsilon: f64,
    pub epsilon_auto: bool,
    pub weights: WeightParams,
    pub num_landmarks: usize,
    pub tolerance: f64,
    pub tie_rule: TieRule,
    pub seed: u64,
    pub emit: Vec<String>,
}

/// Points, weights and the assembled kernel for a run.
pub struct Prepared {
    pub points: PointCloud,
    pub curvature: Option<gplandmark::geometry::CurvatureField>,
    pub weights: Option<gplandmark::geometry::WeightField>,
    pub kernel: KernelMatrix,
}

impl RunManifest {
    pub fn input_format(&self) -> Result<InputFormat> {
        self.format.parse()
    }

    pub fn write(&self, dir: &Path) -> Result<()> {
        let path = dir.join(FILE_NAME);
        let text = serde_json::to_string_pretty(self)?;
        std::fs::write(&path, text + "\n").map_err(|e| Error::Io { path, source: e })
    }

    pub fn read(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path).map_err(|e| Error::Io {
            path: path.to_path_buf(),
            source: e,
        })?;
        Ok(serde_json::from_str(&text)?)
    }

    /// Loads the input and assembles the kernel.
    pub fn prepare(&self, surface: Surface) -> Result<Prepared> {
        let points = surface.points();
        let (curvature, weights) = match self.kernel {
            KernelKind::Reweighted => {
                let (c, w) = pipeline::weight_field(&surface, &self.weights)?;
                (c, Some(w))
            }
            _ => (None, None),
        };
        let kernel = pipeline::assemble_kernel(&points, self.kernel, self.epsilon, weights.as_ref())?;
        Ok(Prepared {
            points,
            curvature,
            weights,
            kernel,
        })
    }
}

/// `auto` or a positive number.
pub fn resolve_epsilon(value: &str, points: &PointCloud) -> Result<(f64, bool)> {
    if value.eq_ignore_ascii_case("auto") {
        return Ok((kernel::auto_bandwidth(points), true));
    }
    let eps: f64 = value
        .parse()
        .map_err(|_| Error::Config(format!("epsilon must be 'auto' or a number, got '{value}'")))?;
    if !(eps.is_finite() && eps > 0.0) {
        return Err(Error::InvalidBandwidth(eps));
    }
    Ok((eps, false))
}
