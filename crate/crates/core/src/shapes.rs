//! Synthetic surfaces for tests, benchmarks and demos.

use std::collections::HashMap;
use std::f64::consts::PI;

use nalgebra::Point3;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::mesh_io::{PointCloud, TriangleMesh};

/// Regular icosahedron with the given circumradius.
pub fn icosahedron(radius: f64) -> TriangleMesh {
    let (vertices, faces) = icosahedron_raw();
    let vertices = vertices
        .into_iter()
        .map(|v| Point3::from(v.coords.normalize() * radius))
        .collect();
    TriangleMesh::new(vertices, faces).expect("icosahedron is valid")
}

fn icosahedron_raw() -> (Vec<Point3<f64>>, Vec<[usize; 3]>) {
    let t = (1.0 + 5f64.sqrt()) / 2.0;
    let vertices = vec![
        Point3::new(-1.0, t, 0.0),
        Point3::new(1.0, t, 0.0),
        Point3::new(-1.0, -t, 0.0),
        Point3::new(1.0, -t, 0.0),
        Point3::new(0.0, -1.0, t),
        Point3::new(0.0, 1.0, t),
        Point3::new(0.0, -1.0, -t),
        Point3::new(0.0, 1.0, -t),
        Point3::new(t, 0.0, -1.0),
        Point3::new(t, 0.0, 1.0),
        Point3::new(-t, 0.0, -1.0),
        Point3::new(-t, 0.0, 1.0),
    ];
    let faces = vec![
        [0, 11, 5],
        [0, 5, 1],
        [0, 1, 7],
        [0, 7, 10],
        [0, 10, 11],
        [1, 5, 9],
        [5, 11, 4],
        [11, 10, 2],
        [10, 7, 6],
        [7, 1, 8],
        [3, 9, 4],
        [3, 4, 2],
        [3, 2, 6],
        [3, 6, 8],
        [3, 8, 9],
        [4, 9, 5],
        [2, 4, 11],
        [6, 2, 10],
        [8, 6, 7],
        [9, 8, 1],
    ];
    (vertices, faces)
}

/// Icosahedron refined `levels` times by 4-to-1 midpoint subdivision, with
/// every vertex projected onto the sphere. `levels = 4` gives 2562 vertices.
pub fn icosphere(levels: usize, radius: f64) -> TriangleMesh {
    let (mut vertices, mut faces) = icosahedron_raw();
    for v in &mut vertices {
        *v = Point3::from(v.coords.normalize());
    }
    for _ in 0..levels {
        let mut midpoints: HashMap<(usize, usize), usize> = HashMap::new();
        let mut refined = Vec::with_capacity(faces.len() * 4);
        for f in &faces {
            let mut mid = [0usize; 3];
            for k in 0..3 {
                let (a, b) = (f[k], f[(k + 1) % 3]);
                mid[k] = *midpoints.entry((a.min(b), a.max(b))).or_insert_with(|| {
                    let m = (vertices[a].coords + vertices[b].coords).normalize();
                    vertices.push(Point3::from(m));
                    vertices.len() - 1
                });
            }
            refined.push([f[0], mid[0], mid[2]]);
            refined.push([f[1], mid[1], mid[0]]);
            refined.push([f[2], mid[2], mid[1]]);
            refined.push(mid);
        }
        faces = refined;
    }
    let vertices = vertices.into_iter().map(|v| v * radius).collect();
    TriangleMesh::new(vertices, faces).expect("icosphere is valid")
}

/// Torus with tube radius `minor` around a circle of radius `major`,
/// `nu × nv` vertices, closed in both directions (genus 1).
pub fn torus(major: f64, minor: f64, nu: usize, nv: usize) -> TriangleMesh {
    let mut vertices = Vec::with_capacity(nu * nv);
    for i in 0..nu {
        let u = 2.0 * PI * i as f64 / nu as f64;
        for j in 0..nv {
            let v = 2.0 * PI * j as f64 / nv as f64;
            let r = major + minor * v.cos();
            vertices.push(Point3::new(r * u.cos(), r * u.sin(), minor * v.sin()));
        }
    }
    let id = |i: usize, j: usize| (i % nu) * nv + (j % nv);
    let mut faces = Vec::with_capacity(2 * nu * nv);
    for i in 0..nu {
        for j in 0..nv {
            faces.push([id(i, j), id(i + 1, j), id(i + 1, j + 1)]);
            faces.push([id(i, j), id(i + 1, j + 1), id(i, j + 1)]);
        }
    }
    TriangleMesh::new(vertices, faces).expect("torus is valid")
}

/// Flat `nx × ny` vertex grid in the z = 0 plane.
pub fn grid(nx: usize, ny: usize, spacing: f64) -> TriangleMesh {
    let mut vertices = Vec::with_capacity(nx * ny);
    for j in 0..ny {
        for i in 0..nx {
            vertices.push(Point3::new(i as f64 * spacing, j as f64 * spacing, 0.0));
        }
    }
    let id = |i: usize, j: usize| j * nx + i;
    let mut faces = Vec::new();
    for j in 0..ny - 1 {
        for i in 0..nx - 1 {
            faces.push([id(i, j), id(i + 1, j), id(i + 1, j + 1)]);
            faces.push([id(i, j), id(i + 1, j + 1), id(i, j + 1)]);
        }
    }
    TriangleMesh::new(vertices, faces).expect("grid is valid")
}

/// Moves every vertex by a uniform random offset in `[-amplitude, amplitude]^3`.
pub fn jitter(mesh: &TriangleMesh, amplitude: f64, seed: u64) -> TriangleMesh {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let offsets: Vec<[f64; 3]> = (0..mesh.num_vertices())
        .map(|_| std::array::from_fn(|_| rng.random_range(-amplitude..=amplitude)))
        .collect();
    let vertices = mesh
        .vertices()
        .iter()
        .zip(&offsets)
        .map(|(v, o)| Point3::new(v.x + o[0], v.y + o[1], v.z + o[2]))
        .collect();
    TriangleMesh::new(vertices, mesh.faces().to_vec()).expect("jittered mesh is valid")
}

/// `n` points uniformly distributed on the torus surface (area measure).
pub fn torus_samples(n: usize, major: f64, minor: f64, seed: u64) -> PointCloud {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut coords = Vec::with_capacity(3 * n);
    while coords.len() < 3 * n {
        let u = rng.random_range(0.0..2.0 * PI);
        let v = rng.random_range(0.0..2.0 * PI);
        // rejection on the area element (major + minor cos v)
        let accept = rng.random_range(0.0..major + minor);
        if accept > major + minor * v.cos() {
            continue;
        }
        let r = major + minor * v.cos();
        coords.extend([r * u.cos(), r * u.sin(), minor * v.sin()]);
    }
    PointCloud::new(coords, 3).expect("random samples are distinct")
}

/// `n` points uniformly distributed on the sphere of the given radius.
pub fn sphere_samples(n: usize, radius: f64, seed: u64) -> PointCloud {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut coords = Vec::with_capacity(3 * n);
    for _ in 0..n {
        let z: f64 = rng.random_range(-1.0..=1.0);
        let phi = rng.random_range(0.0..2.0 * PI);
        let s = (1.0 - z * z).sqrt();
        coords.extend([radius * s * phi.cos(), radius * s * phi.sin(), radius * z]);
    }
    PointCloud::new(coords, 3).expect("random samples are distinct")
}

/// `n` points uniform in the unit cube `[0, 1]^dim`.
pub fn cube_samples(n: usize, dim: usize, seed: u64) -> PointCloud {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let coords = (0..n * dim).map(|_| rng.random::<f64>()).collect();
    PointCloud::new(coords, dim).expect("random samples are distinct")
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn counts_and_topology() {
        let ico = icosahedron(1.0);
        assert_eq!((ico.num_vertices(), ico.num_faces()), (12, 20));
        assert_eq!(ico.euler_characteristic(), 2);
        let s = icosphere(4, 1.0);
        assert_eq!(s.num_vertices(), 2562);
        assert_eq!(s.euler_characteristic(), 2);
        assert!(s.boundary_vertices().iter().all(|b| !b));
        let t = torus(2.0, 0.7, 24, 12);
        assert_eq!(t.euler_characteristic(), 0);
        let g = grid(4, 3, 1.0);
        assert_eq!(g.euler_characteristic(), 1);
        assert_eq!(g.boundary_vertices().iter().filter(|b| **b).count(), 10);
    }

    #[test]
    fn icosphere_vertices_on_sphere() {
        for v in icosphere(2, 2.0).vertices() {
            assert!((v.coords.norm() - 2.0).abs() < 1e-12);
        }
    }

    #[test]
    fn samples_are_reproducible() {
        assert_eq!(torus_samples(50, 2.0, 0.5, 3), torus_samples(50, 2.0, 0.5, 3));
        assert_ne!(sphere_samples(50, 1.0, 3), sphere_samples(50, 1.0, 4));
    }
}
