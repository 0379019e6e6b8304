//! Gaussian-process landmarking on triangle meshes and point clouds.
//!
//! The pipeline reads a surface ([`mesh_io`]), derives a curvature-based
//! weight field ([`geometry`]), assembles a squared-exponential or
//! curvature-reweighted kernel matrix ([`kernel`]) and greedily selects the
//! points of largest posterior variance ([`landmarking`]). [`analysis`]
//! provides the metrics used to judge the resulting designs.

pub mod analysis;
pub mod error;
pub mod geometry;
pub mod kernel;
pub mod landmarking;
pub mod mesh_io;
pub mod pipeline;
pub mod shapes;

pub use error::{Error, Result};
