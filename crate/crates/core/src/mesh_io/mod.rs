//! Triangle mesh and point cloud ingestion.
//!
//! Readers cover the ASCII variants of OFF, PLY and OBJ for meshes and
//! whitespace/comma separated tables for point clouds. Every reader returns
//! a fully validated value; vertex and row order are preserved from the file.

mod cloud;
mod obj;
mod off;
mod ply;

use std::collections::{HashMap, HashSet};
use std::fmt;
use std::io::Write;
use std::path::Path;
use std::str::FromStr;

use nalgebra::Point3;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

pub use cloud::parse_point_cloud;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum MeshFormat {
    Off,
    Ply,
    Obj,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum CloudFormat {
    Xyz,
    Csv,
}

/// Any supported input format, mesh or point cloud.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(untagged)]
pub enum InputFormat {
    Mesh(MeshFormat),
    Cloud(CloudFormat),
}

impl InputFormat {
    /// Guess the format from a file extension.
    pub fn from_path(path: &Path) -> Option<Self> {
        let ext = path.extension()?.to_str()?.to_ascii_lowercase();
        ext.parse().ok()
    }
}

impl FromStr for InputFormat {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        Ok(match s.to_ascii_lowercase().as_str() {
            "off" => InputFormat::Mesh(MeshFormat::Off),
            "ply" | "ply_ascii" => InputFormat::Mesh(MeshFormat::Ply),
            "obj" => InputFormat::Mesh(MeshFormat::Obj),
            "xyz" | "txt" => InputFormat::Cloud(CloudFormat::Xyz),
            "csv" => InputFormat::Cloud(CloudFormat::Csv),
            other => return Err(Error::Config(format!("unknown input format '{other}'"))),
        })
    }
}

impl fmt::Display for InputFormat {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            InputFormat::Mesh(MeshFormat::Off) => "off",
            InputFormat::Mesh(MeshFormat::Ply) => "ply",
            InputFormat::Mesh(MeshFormat::Obj) => "obj",
            InputFormat::Cloud(CloudFormat::Xyz) => "xyz",
            InputFormat::Cloud(CloudFormat::Csv) => "csv",
        })
    }
}

/// A triangulated surface: vertex positions plus index triples.
#[derive(Debug, Clone, PartialEq)]
pub struct TriangleMesh {
    vertices: Vec<Point3<f64>>,
    faces: Vec<[usize; 3]>,
}

impl TriangleMesh {
    /// Builds a mesh, checking index ranges, degenerate faces and duplicate
    /// vertices. Non-manifold edges are accepted with a warning.
    pub fn new(vertices: Vec<Point3<f64>>, faces: Vec<[usize; 3]>) -> Result<Self> {
        let n = vertices.len();
        if n < 3 {
            return Err(Error::Validation(format!("need at least 3 vertices, got {n}")));
        }
        if faces.is_empty() {
            return Err(Error::Validation("mesh has no faces".into()));
        }
        for (f, face) in faces.iter().enumerate() {
            if let Some(&bad) = face.iter().find(|&&i| i >= n) {
                return Err(Error::Validation(format!(
                    "face {f} references vertex {bad}, but there are only {n} vertices"
                )));
            }
            if face[0] == face[1] || face[1] == face[2] || face[0] == face[2] {
                return Err(Error::Validation(format!(
                    "face {f} is degenerate: ({}, {}, {})",
                    face[0], face[1], face[2]
                )));
            }
        }
        let mut seen = HashMap::with_capacity(n);
        for (i, v) in vertices.iter().enumerate() {
            if !v.coords.iter().all(|c| c.is_finite()) {
                return Err(Error::Validation(format!("vertex {i} has non-finite coordinates")));
            }
            // +0.0 and -0.0 compare equal
            let key = v.coords.map(|c| (c + 0.0).to_bits());
            if let Some(j) = seen.insert((key[0], key[1], key[2]), i) {
                return Err(Error::Validation(format!(
                    "vertices {j} and {i} share identical coordinates"
                )));
            }
        }
        let mesh = TriangleMesh { vertices, faces };
        let overfull = mesh
            .edge_face_counts()
            .values()
            .filter(|&&c| c > 2)
            .count();
        if overfull > 0 {
            log::warn!("mesh is non-manifold: {overfull} edges are shared by more than two faces");
        }
        Ok(mesh)
    }

    pub fn vertices(&self) -> &[Point3<f64>] {
        &self.vertices
    }

    pub fn faces(&self) -> &[[usize; 3]] {
        &self.faces
    }

    pub fn num_vertices(&self) -> usize {
        self.vertices.len()
    }

    pub fn num_faces(&self) -> usize {
        self.faces.len()
    }

    /// Number of faces incident to each undirected edge `(lo, hi)`.
    pub fn edge_face_counts(&self) -> HashMap<(usize, usize), usize> {
        let mut counts = HashMap::with_capacity(self.faces.len() * 3 / 2);
        for f in &self.faces {
            for k in 0..3 {
                let (a, b) = (f[k], f[(k + 1) % 3]);
                *counts.entry((a.min(b), a.max(b))).or_insert(0) += 1;
            }
        }
        counts
    }

    pub fn num_edges(&self) -> usize {
        self.edge_face_counts().len()
    }

    /// χ = V − E + F.
    pub fn euler_characteristic(&self) -> i64 {
        self.num_vertices() as i64 - self.num_edges() as i64 + self.num_faces() as i64
    }

    /// Flags vertices lying on an edge used by exactly one face.
    pub fn boundary_vertices(&self) -> Vec<bool> {
        let mut on_boundary = vec![false; self.vertices.len()];
        for ((a, b), c) in self.edge_face_counts() {
            if c == 1 {
                on_boundary[a] = true;
                on_boundary[b] = true;
            }
        }
        on_boundary
    }

    /// Vertices that belong to no face.
    pub fn isolated_vertices(&self) -> Vec<usize> {
        let mut used: HashSet<usize> = HashSet::with_capacity(self.vertices.len());
        used.extend(self.faces.iter().flatten().copied());
        (0..self.vertices.len()).filter(|i| !used.contains(i)).collect()
    }

    /// Length of the bounding-box diagonal.
    pub fn bbox_diagonal(&self) -> f64 {
        mesh_to_cloud(self).bbox_diagonal()
    }

    /// Writes the mesh as ASCII OFF with shortest round-trip float formatting.
    pub fn write_off<W: Write>(&self, mut out: W) -> std::io::Result<()> {
        writeln!(out, "OFF")?;
        writeln!(out, "{} {} {}", self.vertices.len(), self.faces.len(), self.num_edges())?;
        for v in &self.vertices {
            writeln!(out, "{:?} {:?} {:?}", v.x, v.y, v.z)?;
        }
        for f in &self.faces {
            writeln!(out, "3 {} {} {}", f[0], f[1], f[2])?;
        }
        Ok(())
    }

    /// Applies `f` to every vertex, keeping connectivity.
    pub fn map_vertices(&self, f: impl Fn(&Point3<f64>) -> Point3<f64>) -> Result<Self> {
        TriangleMesh::new(self.vertices.iter().map(f).collect(), self.faces.clone())
    }
}

/// Points in `R^dim`, stored row-major.
#[derive(Debug, Clone, PartialEq)]
pub struct PointCloud {
    coords: Vec<f64>,
    dim: usize,
}

impl PointCloud {
    pub fn new(coords: Vec<f64>, dim: usize) -> Result<Self> {
        if dim == 0 {
            return Err(Error::Validation("ambient dimension must be positive".into()));
        }
        if !coords.len().is_multiple_of(dim) {
            return Err(Error::DimensionMismatch {
                expected: dim * (coords.len() / dim + 1),
                got: coords.len(),
            });
        }
        let n = coords.len() / dim;
        if n < 2 {
            return Err(Error::Validation(format!("need at least 2 points, got {n}")));
        }
        if coords.iter().any(|c| !c.is_finite()) {
            return Err(Error::Validation("point cloud has non-finite coordinates".into()));
        }
        let mut seen = HashMap::with_capacity(n);
        for (i, row) in coords.chunks_exact(dim).enumerate() {
            let key: Vec<u64> = row.iter().map(|c| (c + 0.0).to_bits()).collect();
            if let Some(j) = seen.insert(key, i) {
                return Err(Error::Validation(format!(
                    "points {j} and {i} share identical coordinates"
                )));
            }
        }
        Ok(PointCloud { coords, dim })
    }

    pub fn from_rows(rows: &[Vec<f64>]) -> Result<Self> {
        let dim = rows.first().map_or(0, Vec::len);
        if let Some((i, r)) = rows.iter().enumerate().find(|(_, r)| r.len() != dim) {
            return Err(Error::Validation(format!(
                "row {i} has {} coordinates, expected {dim}",
                r.len()
            )));
        }
        PointCloud::new(rows.concat(), dim)
    }

    pub fn len(&self) -> usize {
        self.coords.len() / self.dim
    }

    pub fn is_empty(&self) -> bool {
        self.coords.is_empty()
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn point(&self, i: usize) -> &[f64] {
        &self.coords[i * self.dim..(i + 1) * self.dim]
    }

    pub fn iter(&self) -> impl ExactSizeIterator<Item = &[f64]> + '_ {
        self.coords.chunks_exact(self.dim)
    }

    pub fn coords(&self) -> &[f64] {
        &self.coords
    }

    pub fn sq_dist(&self, i: usize, j: usize) -> f64 {
        sq_dist(self.point(i), self.point(j))
    }

    pub fn bbox_diagonal(&self) -> f64 {
        let mut lo = vec![f64::INFINITY; self.dim];
        let mut hi = vec![f64::NEG_INFINITY; self.dim];
        for p in self.iter() {
            for d in 0..self.dim {
                lo[d] = lo[d].min(p[d]);
                hi[d] = hi[d].max(p[d]);
            }
        }
        lo.iter()
            .zip(&hi)
            .map(|(a, b)| (b - a) * (b - a))
            .sum::<f64>()
            .sqrt()
    }

    /// Permutes the rows so that new row `k` is old row `order[k]`.
    pub fn permuted(&self, order: &[usize]) -> Result<Self> {
        let coords = order.iter().flat_map(|&i| self.point(i).iter().copied()).collect();
        PointCloud::new(coords, self.dim)
    }
}

#[inline]
pub(crate) fn sq_dist(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| (x - y) * (x - y)).sum()
}

pub fn load_mesh(path: impl AsRef<Path>, format: MeshFormat) -> Result<TriangleMesh> {
    let path = path.as_ref();
    let bytes = std::fs::read(path).map_err(|e| Error::io(path, e))?;
    let text = String::from_utf8_lossy(&bytes);
    parse_mesh(&text, format, path)
}

/// Parses mesh text; `origin` is used only for error messages.
pub fn parse_mesh(text: &str, format: MeshFormat, origin: &Path) -> Result<TriangleMesh> {
    match format {
        MeshFormat::Off => off::parse(text, origin),
        MeshFormat::Ply => ply::parse(text, origin),
        MeshFormat::Obj => obj::parse(text, origin),
    }
}

pub fn load_point_cloud(path: impl AsRef<Path>, format: CloudFormat) -> Result<PointCloud> {
    let path = path.as_ref();
    let text = std::fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
    parse_point_cloud(&text, format, path)
}

pub fn mesh_to_cloud(mesh: &TriangleMesh) -> PointCloud {
    let coords = mesh
        .vertices()
        .iter()
        .flat_map(|v| [v.x, v.y, v.z])
        .collect();
    PointCloud { coords, dim: 3 }
}

/// Data lines of a text file with their 1-based line numbers, comments
/// (`#` to end of line) stripped and blank lines skipped.
pub(crate) fn content_lines(text: &str) -> impl Iterator<Item = (usize, &str)> {
    text.lines().enumerate().filter_map(|(i, line)| {
        let line = line.split('#').next().unwrap_or("").trim();
        (!line.is_empty()).then_some((i + 1, line))
    })
}

pub(crate) fn parse_f64(tok: &str, path: &Path, line: usize) -> Result<f64> {
    let v: f64 = tok
        .parse()
        .map_err(|_| Error::parse(path, line, format!("expected a number, found '{tok}'")))?;
    if !v.is_finite() {
        return Err(Error::parse(path, line, format!("non-finite value '{tok}'")));
    }
    Ok(v)
}

pub(crate) fn parse_usize(tok: &str, path: &Path, line: usize) -> Result<usize> {
    tok.parse()
        .map_err(|_| Error::parse(path, line, format!("expected a nonnegative integer, found '{tok}'")))
}

#[cfg(test)]
mod tests {
    use super::*;

    fn tri() -> Vec<Point3<f64>> {
        vec![
            Point3::new(0.0, 0.0, 0.0),
            Point3::new(1.0, 0.0, 0.0),
            Point3::new(0.0, 1.0, 0.0),
        ]
    }

    #[test]
    fn rejects_out_of_range_index() {
        let err = TriangleMesh::new(tri(), vec![[0, 1, 3]]).unwrap_err();
        assert!(matches!(err, Error::Validation(_)), "{err}");
    }

    #[test]
    fn rejects_duplicate_vertices() {
        let mut v = tri();
        v.push(Point3::new(1.0, 0.0, 0.0));
        let err = TriangleMesh::new(v, vec![[0, 1, 2]]).unwrap_err();
        assert!(err.to_string().contains("identical"), "{err}");
    }

    #[test]
    fn signed_zero_counts_as_duplicate() {
        let mut v = tri();
        v.push(Point3::new(-0.0, 0.0, 0.0));
        assert!(TriangleMesh::new(v, vec![[0, 1, 2]]).is_err());
    }

    #[test]
    fn rejects_empty_faces_and_tiny_meshes() {
        assert!(TriangleMesh::new(tri(), vec![]).is_err());
        assert!(TriangleMesh::new(tri()[..2].to_vec(), vec![[0, 1, 1]]).is_err());
    }

    #[test]
    fn non_manifold_is_accepted() {
        let mut v = tri();
        v.push(Point3::new(0.0, 0.0, 1.0));
        v.push(Point3::new(0.0, 0.0, -1.0));
        let mesh = TriangleMesh::new(v, vec![[0, 1, 2], [0, 1, 3], [0, 1, 4]]).unwrap();
        assert_eq!(mesh.edge_face_counts()[&(0, 1)], 3);
    }

    #[test]
    fn mesh_to_cloud_preserves_vertices() {
        let mesh = TriangleMesh::new(tri(), vec![[0, 1, 2]]).unwrap();
        let cloud = mesh_to_cloud(&mesh);
        assert_eq!(cloud.len(), mesh.num_vertices());
        assert_eq!(cloud.dim(), 3);
        for (i, v) in mesh.vertices().iter().enumerate() {
            assert_eq!(cloud.point(i), &[v.x, v.y, v.z]);
        }
    }

    #[test]
    fn cloud_rejects_duplicates_and_short_input() {
        assert!(PointCloud::new(vec![1.0, 2.0, 1.0, 2.0], 2).is_err());
        assert!(PointCloud::new(vec![1.0, 2.0], 2).is_err());
        assert!(PointCloud::new(vec![1.0, 2.0, 3.0], 2).is_err());
    }

    #[test]
    fn format_names() {
        assert_eq!("OFF".parse::<InputFormat>().unwrap(), InputFormat::Mesh(MeshFormat::Off));
        assert_eq!(
            InputFormat::from_path(Path::new("a/b.csv")),
            Some(InputFormat::Cloud(CloudFormat::Csv))
        );
        assert!("stl".parse::<InputFormat>().is_err());
    }
}
