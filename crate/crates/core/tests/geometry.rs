use std::f64::consts::PI;

use gplandmark::geometry::{self, CurvatureField, WeightField};
use gplandmark::mesh_io::{PointCloud, TriangleMesh};
use gplandmark::shapes;
use nalgebra::{Point3, Rotation3, Vector3};

fn total_curvature(mesh: &TriangleMesh) -> f64 {
    let curv = geometry::discrete_curvatures(mesh).unwrap();
    let area = geometry::voronoi_areas(mesh).unwrap();
    curv.gaussian.iter().zip(&area).map(|(k, a)| k * a).sum()
}

fn rigid(mesh: &TriangleMesh) -> TriangleMesh {
    let rot = Rotation3::from_euler_angles(0.3, -1.1, 2.0);
    let shift = Vector3::new(5.0, -2.0, 0.75);
    mesh.map_vertices(|p| rot * p + shift).unwrap()
}

fn max_rel(a: &[f64], b: &[f64]) -> f64 {
    let scale = a.iter().map(|x| x.abs()).fold(0.0, f64::max).max(1e-300);
    a.iter().zip(b).map(|(x, y)| (x - y).abs()).fold(0.0, f64::max) / scale
}

#[test]
fn gauss_bonnet_on_closed_surfaces() {
    let sphere = shapes::jitter(&shapes::icosphere(3, 1.0), 0.01, 1);
    assert!((total_curvature(&sphere) - 4.0 * PI).abs() <= 1e-6 * 4.0 * PI);

    for mesh in [shapes::torus(2.0, 0.5, 40, 16), shapes::jitter(&shapes::torus(3.0, 1.0, 30, 12), 0.02, 9)] {
        assert_eq!(mesh.euler_characteristic(), 0);
        assert!(total_curvature(&mesh).abs() <= 1e-6 * 2.0 * PI);
    }
}

#[test]
fn voronoi_areas_partition_the_surface() {
    for mesh in [
        shapes::jitter(&shapes::icosphere(2, 3.0), 0.05, 4),
        shapes::torus(2.0, 0.9, 25, 7),
        shapes::jitter(&shapes::grid(8, 5, 0.3), 0.05, 2),
    ] {
        let total: f64 = geometry::voronoi_areas(&mesh).unwrap().iter().sum();
        let surface = geometry::surface_area(&mesh);
        assert!((total - surface).abs() <= 1e-12 * surface);
    }
}

#[test]
fn curvatures_are_invariant_under_rigid_motion() {
    let mesh = shapes::jitter(&shapes::icosphere(2, 1.3), 0.03, 17);
    let moved = rigid(&mesh);
    let (c0, w0) = geometry::mesh_curvature_weight(&mesh, 0.5, 1.0).unwrap();
    let (c1, w1) = geometry::mesh_curvature_weight(&moved, 0.5, 1.0).unwrap();
    assert!(max_rel(&c0.gaussian, &c1.gaussian) < 1e-9);
    assert!(max_rel(&c0.mean, &c1.mean) < 1e-9);
    assert!(max_rel(w0.area(), w1.area()) < 1e-12);
    assert!(max_rel(w0.weight(), w1.weight()) < 1e-9);
}

#[test]
fn scaling_covariance() {
    let mesh = shapes::jitter(&shapes::torus(2.0, 0.7, 20, 10), 0.03, 5);
    let s = 3.0;
    let scaled = mesh.map_vertices(|p| Point3::from(p.coords * s)).unwrap();
    let (c0, w0) = geometry::mesh_curvature_weight(&mesh, 0.3, 1.5).unwrap();
    let (c1, w1) = geometry::mesh_curvature_weight(&scaled, 0.3, 1.5).unwrap();
    let areas: Vec<f64> = w0.area().iter().map(|a| a * s * s).collect();
    assert!(max_rel(&areas, w1.area()) < 1e-12);
    let gauss: Vec<f64> = c0.gaussian.iter().map(|k| k / (s * s)).collect();
    assert!(max_rel(&gauss, &c1.gaussian) < 1e-9);
    let mean: Vec<f64> = c0.mean.iter().map(|h| h / s).collect();
    assert!(max_rel(&mean, &c1.mean) < 1e-9);
    // the measure w·ν is scale free
    assert!(max_rel(&w0.measure(), &w1.measure()) < 1e-9);
}

#[test]
fn curvature_weight_matches_formula() {
    let area = vec![0.5, 0.25, 0.25];
    let curv = CurvatureField::new(vec![2.0, -1.0, 0.0], vec![1.0, 1.0, 3.0]).unwrap();
    let wf = geometry::curvature_weight(&curv, &area, 0.25, 2.0).unwrap();
    // Σ|κ|²ν = 2 + 0.25 = 2.25, Σ|η|²ν = 0.5 + 0.25 + 2.25 = 3
    let expected = [
        0.25 * 4.0 / 2.25 + 0.75 * 1.0 / 3.0,
        0.25 * 1.0 / 2.25 + 0.75 * 1.0 / 3.0,
        0.75 * 9.0 / 3.0,
    ];
    for (w, e) in wf.weight().iter().zip(expected) {
        assert!((w - e).abs() < 1e-14);
    }
    assert!((wf.mass() - 1.0).abs() < 1e-14);
}

/// Points on the surface of the unit cube, `n` per edge of each face grid.
fn cube_surface(n: usize) -> PointCloud {
    let mut rows: Vec<Vec<f64>> = Vec::new();
    let t = |i: usize| i as f64 / (n - 1) as f64;
    for i in 0..n {
        for j in 0..n {
            for k in 0..n {
                let on_face = [i, j, k].iter().any(|&c| c == 0 || c == n - 1);
                if on_face {
                    rows.push(vec![t(i), t(j), t(k)]);
                }
            }
        }
    }
    PointCloud::from_rows(&rows).unwrap()
}

#[test]
fn cube_corners_vary_more_than_faces() {
    let n = 9;
    let cloud = cube_surface(n);
    let find = |p: [f64; 3]| cloud.iter().position(|q| q == p).unwrap();
    let corner = find([0.0, 0.0, 0.0]);
    let face = find([0.5, 0.5, 0.0]);
    let k = 12;
    let at_corner = geometry::surface_variation(&cloud, corner, k).unwrap();
    let at_face = geometry::surface_variation(&cloud, face, k).unwrap();
    assert_eq!(at_face, 0.0);
    assert!(at_corner > 0.1, "{at_corner}");
    assert!(at_corner <= 1.0 / 3.0 + 1e-12);

    let wf = geometry::pointcloud_importance(&cloud, k).unwrap();
    assert!(wf.weight()[corner] > wf.weight()[face]);
    assert!((wf.mass() - 1.0).abs() < 1e-12);
}

#[test]
fn collinear_cloud_has_no_importance() {
    let rows: Vec<Vec<f64>> = (0..8).map(|i| vec![i as f64, 2.0 * i as f64, 0.0]).collect();
    let cloud = PointCloud::from_rows(&rows).unwrap();
    assert_eq!(geometry::surface_variation(&cloud, 0, 5).unwrap(), 0.0);
    assert!(geometry::pointcloud_importance(&cloud, 5).is_err());
}

#[test]
fn uniform_weight_field() {
    let wf = WeightField::uniform(4).unwrap();
    assert_eq!(wf.weight(), &[1.0; 4]);
    assert!((wf.mass() - 1.0).abs() < 1e-15);
}
