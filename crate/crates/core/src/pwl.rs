//! Piecewise linear immersed-boundary representation.
//!
//! 2D: closed polylines with local quadratic fits for normals and Hookean
//! springs between neighbours. 3D: a closed triangulation with angle-weighted
//! vertex normals and springs along triangle edges.
//!
//! The two spring laws are implemented as written in the literature they come
//! from, which gives them opposite signs: the 2D force at `x_i` is
//! `K0 Σ (x_j − x_i)` over its two neighbours, the 3D force is
//! `K0 Σ (x_i − x_j)` over its mesh neighbours.

use std::collections::HashMap;
use std::fmt::Write as _;

use nalgebra::{Vector2, Vector3};

use crate::error::{Error, Result};

/// Implicitly closed polyline: the last point connects back to the first.
#[derive(Debug, Clone, PartialEq)]
pub struct ClosedPolyline {
    points: Vec<Vector2<f64>>,
}

impl ClosedPolyline {
    pub fn new(points: Vec<Vector2<f64>>) -> Result<Self> {
        if points.len() < 3 {
            return Err(Error::invalid(format!(
                "closed polyline needs at least 3 points, got {}",
                points.len()
            )));
        }
        let n = points.len();
        for i in 0..n {
            if points[i] == points[(i + 1) % n] {
                return Err(Error::Validation(format!(
                    "consecutive points {i} and {} coincide",
                    (i + 1) % n
                )));
            }
        }
        Ok(ClosedPolyline { points })
    }

    pub fn points(&self) -> &[Vector2<f64>] {
        &self.points
    }

    pub fn len(&self) -> usize {
        self.points.len()
    }

    pub fn is_empty(&self) -> bool {
        self.points.is_empty()
    }

    fn neighbours(&self, i: usize) -> (Vector2<f64>, Vector2<f64>, Vector2<f64>) {
        let n = self.points.len();
        (
            self.points[(i + n - 1) % n],
            self.points[i],
            self.points[(i + 1) % n],
        )
    }
}

/// `x(t) = a_x t² + b_x t + c_x`, `y(t) = a_y t² + b_y t + c_y` through three
/// consecutive points placed at local parameters −1, 0, 1.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct LocalQuadratic {
    pub a_x: f64,
    pub b_x: f64,
    pub c_x: f64,
    pub a_y: f64,
    pub b_y: f64,
    pub c_y: f64,
}

impl LocalQuadratic {
    pub fn eval(&self, t: f64) -> Vector2<f64> {
        Vector2::new(
            (self.a_x * t + self.b_x) * t + self.c_x,
            (self.a_y * t + self.b_y) * t + self.c_y,
        )
    }

    /// Derivative with respect to the local parameter at `t`.
    pub fn tangent(&self, t: f64) -> Vector2<f64> {
        Vector2::new(2.0 * self.a_x * t + self.b_x, 2.0 * self.a_y * t + self.b_y)
    }
}

const STENCIL: [f64; 3] = [-1.0, 0.0, 1.0];

/// Gaussian elimination with partial pivoting on the 3×3 Vandermonde system.
fn solve_vandermonde3(rhs: [f64; 3]) -> Result<[f64; 3]> {
    let mut m = [[0.0; 4]; 3];
    for (row, &t) in STENCIL.iter().enumerate() {
        m[row] = [t * t, t, 1.0, rhs[row]];
    }
    for k in 0..3 {
        let p = (k..3)
            .max_by(|&i, &j| m[i][k].abs().total_cmp(&m[j][k].abs()))
            .unwrap_or(k);
        if m[p][k].abs() < 1e-300 {
            return Err(Error::IllConditioned {
                condition: f64::INFINITY,
                advice: "local quadratic system is singular".into(),
            });
        }
        m.swap(k, p);
        for i in (k + 1)..3 {
            let f = m[i][k] / m[k][k];
            for j in k..4 {
                m[i][j] -= f * m[k][j];
            }
        }
    }
    let mut x = [0.0; 3];
    for i in (0..3).rev() {
        let mut s = m[i][3];
        for j in (i + 1)..3 {
            s -= m[i][j] * x[j];
        }
        x[i] = s / m[i][i];
    }
    Ok(x)
}

/// Fit the local quadratic through points `i−1, i, i+1` (cyclic).
pub fn fit_local_quadratic(curve: &ClosedPolyline, i: usize) -> Result<LocalQuadratic> {
    if i >= curve.len() {
        return Err(Error::invalid(format!("index {i} out of range for {} points", curve.len())));
    }
    let (prev, here, next) = curve.neighbours(i);
    let [a_x, b_x, c_x] = solve_vandermonde3([prev.x, here.x, next.x])?;
    let [a_y, b_y, c_y] = solve_vandermonde3([prev.y, here.y, next.y])?;
    Ok(LocalQuadratic {
        a_x,
        b_x,
        c_x,
        a_y,
        b_y,
        c_y,
    })
}

/// Unit normals `(−τ̂_y, τ̂_x)` from the local quadratic tangent at each point.
pub fn pwl_normals_2d(curve: &ClosedPolyline) -> Result<Vec<Vector2<f64>>> {
    (0..curve.len())
        .map(|i| {
            let tangent = fit_local_quadratic(curve, i)?.tangent(0.0);
            let n = tangent.norm();
            if !(n > 0.0) {
                return Err(Error::DegenerateJet(format!("zero tangent at IB point {i}")));
            }
            let t = tangent / n;
            Ok(Vector2::new(-t.y, t.x))
        })
        .collect()
}

/// `F_i = K0 (x_{i+1} − 2 x_i + x_{i−1})`.
pub fn spring_force_2d(curve: &ClosedPolyline, k0: f64) -> Vec<Vector2<f64>> {
    (0..curve.len())
        .map(|i| {
            let (prev, here, next) = curve.neighbours(i);
            (next - here * 2.0 + prev) * k0
        })
        .collect()
}

/// Closed, consistently oriented triangle mesh with symmetric vertex adjacency.
#[derive(Debug, Clone, PartialEq)]
pub struct TriMesh {
    vertices: Vec<Vector3<f64>>,
    triangles: Vec<[usize; 3]>,
    adjacency: Vec<Vec<usize>>,
}

impl TriMesh {
    /// Builds adjacency and checks: nondegenerate triangles and every edge shared
    /// by exactly two triangles with opposite orientation.
    pub fn new(vertices: Vec<Vector3<f64>>, triangles: Vec<[usize; 3]>) -> Result<Self> {
        let n = vertices.len();
        let mut directed: HashMap<(usize, usize), usize> = HashMap::new();
        for (t, tri) in triangles.iter().enumerate() {
            if tri.iter().any(|&v| v >= n) {
                return Err(Error::Validation(format!("triangle {t} references a missing vertex")));
            }
            let [a, b, c] = *tri;
            let area = (vertices[b] - vertices[a]).cross(&(vertices[c] - vertices[a])).norm();
            if !(area > 0.0) {
                return Err(Error::Validation(format!("triangle {t} is degenerate")));
            }
            for (u, v) in [(a, b), (b, c), (c, a)] {
                if directed.insert((u, v), t).is_some() {
                    return Err(Error::Validation(format!(
                        "edge ({u}, {v}) used twice with the same orientation"
                    )));
                }
            }
        }
        for &(u, v) in directed.keys() {
            if !directed.contains_key(&(v, u)) {
                return Err(Error::Validation(format!("edge ({u}, {v}) is a boundary edge")));
            }
        }
        let mut adjacency = vec![Vec::new(); n];
        for &(u, v) in directed.keys() {
            adjacency[u].push(v);
        }
        for list in &mut adjacency {
            list.sort_unstable();
        }
        Ok(TriMesh {
            vertices,
            triangles,
            adjacency,
        })
    }

    pub fn vertices(&self) -> &[Vector3<f64>] {
        &self.vertices
    }

    pub fn triangles(&self) -> &[[usize; 3]] {
        &self.triangles
    }

    pub fn adjacency(&self) -> &[Vec<usize>] {
        &self.adjacency
    }

    pub fn edge_count(&self) -> usize {
        self.adjacency.iter().map(Vec::len).sum::<usize>() / 2
    }

    /// `V − E + F`.
    pub fn euler_characteristic(&self) -> i64 {
        self.vertices.len() as i64 - self.edge_count() as i64 + self.triangles.len() as i64
    }

    /// Same connectivity, new vertex positions.
    pub fn with_vertices(&self, vertices: Vec<Vector3<f64>>) -> Result<Self> {
        if vertices.len() != self.vertices.len() {
            return Err(Error::LengthMismatch {
                expected: self.vertices.len(),
                actual: vertices.len(),
            });
        }
        Ok(TriMesh {
            vertices,
            triangles: self.triangles.clone(),
            adjacency: self.adjacency.clone(),
        })
    }

    /// OFF text: header, counts line, vertices, faces.
    pub fn to_off(&self) -> String {
        let mut out = String::from("OFF\n");
        let _ = writeln!(out, "{} {} {}", self.vertices.len(), self.triangles.len(), self.edge_count());
        for v in &self.vertices {
            let _ = writeln!(out, "{} {} {}", v.x, v.y, v.z);
        }
        for t in &self.triangles {
            let _ = writeln!(out, "3 {} {} {}", t[0], t[1], t[2]);
        }
        out
    }
}

fn orient(a: &Vector3<f64>, b: &Vector3<f64>, c: &Vector3<f64>, p: &Vector3<f64>) -> f64 {
    (b - a).cross(&(c - a)).dot(&(p - a))
}

/// Incremental convex hull of points that all lie on the hull (directions on
/// the unit sphere). Faces are returned counterclockwise seen from outside.
fn sphere_hull(dirs: &[Vector3<f64>]) -> Result<Vec<[usize; 3]>> {
    const EPS: f64 = 1e-12;
    let n = dirs.len();
    // Initial tetrahedron: first point, farthest from it, farthest from that
    // line, farthest from that plane.
    let i0 = 0;
    let i1 = (1..n)
        .max_by(|&a, &b| (dirs[a] - dirs[i0]).norm().total_cmp(&(dirs[b] - dirs[i0]).norm()))
        .ok_or_else(|| Error::invalid("too few points"))?;
    let line = dirs[i1] - dirs[i0];
    let i2 = (0..n)
        .filter(|&k| k != i0 && k != i1)
        .max_by(|&a, &b| {
            line.cross(&(dirs[a] - dirs[i0]))
                .norm()
                .total_cmp(&line.cross(&(dirs[b] - dirs[i0])).norm())
        })
        .ok_or_else(|| Error::invalid("too few points"))?;
    let i3 = (0..n)
        .filter(|&k| k != i0 && k != i1 && k != i2)
        .max_by(|&a, &b| {
            orient(&dirs[i0], &dirs[i1], &dirs[i2], &dirs[a])
                .abs()
                .total_cmp(&orient(&dirs[i0], &dirs[i1], &dirs[i2], &dirs[b]).abs())
        })
        .ok_or_else(|| Error::invalid("too few points"))?;
    if orient(&dirs[i0], &dirs[i1], &dirs[i2], &dirs[i3]).abs() <= EPS {
        return Err(Error::Validation("points are coplanar".into()));
    }

    let mut faces: Vec<[usize; 3]> = Vec::new();
    let mut alive: Vec<bool> = Vec::new();
    let mut edge_face: HashMap<(usize, usize), usize> = HashMap::new();
    let add_face = |f: [usize; 3], faces: &mut Vec<[usize; 3]>, alive: &mut Vec<bool>, edge_face: &mut HashMap<(usize, usize), usize>| {
        let id = faces.len();
        faces.push(f);
        alive.push(true);
        for (u, v) in [(f[0], f[1]), (f[1], f[2]), (f[2], f[0])] {
            edge_face.insert((u, v), id);
        }
    };
    let base = [i0, i1, i2, i3];
    for (skip, &opposite) in base.iter().enumerate().rev() {
        let mut f: Vec<usize> = base.iter().enumerate().filter(|(k, _)| *k != skip).map(|(_, &v)| v).collect();
        if orient(&dirs[f[0]], &dirs[f[1]], &dirs[f[2]], &dirs[opposite]) > 0.0 {
            f.swap(1, 2);
        }
        add_face([f[0], f[1], f[2]], &mut faces, &mut alive, &mut edge_face);
    }

    for p in 0..n {
        if base.contains(&p) {
            continue;
        }
        let visible: Vec<usize> = (0..faces.len())
            .filter(|&f| alive[f] && orient(&dirs[faces[f][0]], &dirs[faces[f][1]], &dirs[faces[f][2]], &dirs[p]) > EPS)
            .collect();
        if visible.is_empty() {
            return Err(Error::Validation(format!(
                "point {p} is not on the hull; points must be star-shaped about their centroid"
            )));
        }
        for &f in &visible {
            alive[f] = false;
        }
        let mut horizon = Vec::new();
        for &f in &visible {
            let [a, b, c] = faces[f];
            for (u, v) in [(a, b), (b, c), (c, a)] {
                let twin = edge_face[&(v, u)];
                if alive[twin] {
                    horizon.push((u, v));
                }
            }
        }
        for &f in &visible {
            let [a, b, c] = faces[f];
            for (u, v) in [(a, b), (b, c), (c, a)] {
                if edge_face.get(&(u, v)) == Some(&f) {
                    edge_face.remove(&(u, v));
                }
            }
        }
        for (u, v) in horizon {
            add_face([u, v, p], &mut faces, &mut alive, &mut edge_face);
        }
    }
    Ok(faces
        .into_iter()
        .zip(alive)
        .filter_map(|(f, a)| a.then_some(f))
        .collect())
}

/// Triangulate points that are star-shaped about their centroid by taking the
/// convex hull of their directions from the centroid.
pub fn triangulate_sphere_like(points: &[Vector3<f64>]) -> Result<TriMesh> {
    if points.len() < 4 {
        return Err(Error::invalid(format!(
            "triangulation needs at least 4 points, got {}",
            points.len()
        )));
    }
    let centroid = points.iter().sum::<Vector3<f64>>() / points.len() as f64;
    let dirs: Vec<Vector3<f64>> = points
        .iter()
        .map(|p| {
            let d = p - centroid;
            d / d.norm()
        })
        .collect();
    if dirs.iter().any(|d| !d.iter().all(|c| c.is_finite())) {
        return Err(Error::Validation("a point coincides with the centroid".into()));
    }
    let triangles = sphere_hull(&dirs)?;
    for (t, tri) in triangles.iter().enumerate() {
        let [a, b, c] = tri.map(|k| points[k]);
        let normal = (b - a).cross(&(c - a));
        let mid = (a + b + c) / 3.0 - centroid;
        if !(normal.dot(&mid) > 0.0) {
            return Err(Error::Validation(format!("triangle {t} is not outward oriented")));
        }
    }
    TriMesh::new(points.to_vec(), triangles)
}

fn corner_angle(at: &Vector3<f64>, p: &Vector3<f64>, q: &Vector3<f64>) -> f64 {
    let u = p - at;
    let v = q - at;
    u.cross(&v).norm().atan2(u.dot(&v))
}

/// Per-vertex unit normals: incident facet normals weighted by the corner angle.
pub fn vertex_normals_angle_weighted(mesh: &TriMesh) -> Result<Vec<Vector3<f64>>> {
    let v = mesh.vertices();
    let mut acc = vec![Vector3::zeros(); v.len()];
    for &[a, b, c] in mesh.triangles() {
        let n = (v[b] - v[a]).cross(&(v[c] - v[a])).normalize();
        acc[a] += n * corner_angle(&v[a], &v[b], &v[c]);
        acc[b] += n * corner_angle(&v[b], &v[c], &v[a]);
        acc[c] += n * corner_angle(&v[c], &v[a], &v[b]);
    }
    acc.into_iter()
        .enumerate()
        .map(|(i, s)| {
            let norm = s.norm();
            if norm > 0.0 {
                Ok(s / norm)
            } else {
                Err(Error::Validation(format!("vertex {i} has no incident triangles")))
            }
        })
        .collect()
}

/// `F_i = K0 Σ_{j ∈ adj(i)} (x_i − x_j)`.
pub fn spring_force_3d(mesh: &TriMesh, k0: f64) -> Vec<Vector3<f64>> {
    let v = mesh.vertices();
    mesh.adjacency()
        .iter()
        .enumerate()
        .map(|(i, adj)| adj.iter().map(|&j| v[i] - v[j]).sum::<Vector3<f64>>() * k0)
        .collect()
}
