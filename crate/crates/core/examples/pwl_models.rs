//! Piecewise linear models: polyline normals and spring forces in 2D,
//! hull triangulation and vertex normals in 3D.

use std::f64::consts::TAU;

use membrane::points::fibonacci_sphere;
use membrane::pwl::{pwl_normals_2d, spring_force_2d, spring_force_3d, triangulate_sphere_like, vertex_normals_angle_weighted, ClosedPolyline};
use nalgebra::{Vector2, Vector3};

fn main() -> membrane::Result<()> {
    // Ellipse with 100 IB points.
    let pts: Vec<Vector2<f64>> = (0..100)
        .map(|i| {
            let l = TAU * i as f64 / 100.0;
            Vector2::new(2.0 * l.cos(), l.sin())
        })
        .collect();
    let curve = ClosedPolyline::new(pts)?;
    let normals = pwl_normals_2d(&curve)?;
    let forces = spring_force_2d(&curve, 1.0);
    let total: Vector2<f64> = forces.iter().sum();
    println!("2D: normal at (2, 0) = {:.6?}, sum of spring forces = {:e}", normals[0], total.norm());

    // Sphere of radius 0.5 from 400 Fibonacci points.
    let verts: Vec<Vector3<f64>> = fibonacci_sphere(400)?.unit_vectors().iter().map(|v| v * 0.5).collect();
    let mesh = triangulate_sphere_like(&verts)?;
    let vn = vertex_normals_angle_weighted(&mesh)?;
    let worst = vn
        .iter()
        .zip(mesh.vertices())
        .map(|(n, v)| (n - v.normalize()).norm())
        .fold(0.0, f64::max);
    let total: Vector3<f64> = spring_force_3d(&mesh, 1.0).iter().sum();
    println!(
        "3D: {} triangles, Euler characteristic {}, worst normal deviation {worst:.3e}, sum of spring forces {:e}",
        mesh.triangles().len(),
        mesh.euler_characteristic(),
        total.norm()
    );
    Ok(())
}
