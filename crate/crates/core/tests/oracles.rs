//! Independent oracles: exact rational Legendre sums, symbolic jets frozen
//! from a computer algebra system, closed-form point configurations.

use std::f64::consts::{FRAC_PI_2, FRAC_PI_4, PI, TAU};

use membrane::fourier::LegendreTable;
use membrane::points::{
    fibonacci_sphere, min_chordal_distance, minimal_energy_sphere, riesz_energy, NodeSet3D, PointKind, SpherePoint,
};
use membrane::pwl::{pwl_normals_2d, triangulate_sphere_like, vertex_normals_angle_weighted, ClosedPolyline};
use membrane::shapes::{reference_jet_2d, reference_jet_3d, Partial, TestObject2D, TestObject3D};
use nalgebra::{Vector2, Vector3};
use num::{BigInt, BigRational, One, ToPrimitive, Zero};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

fn binomial(n: u64, k: u64) -> BigInt {
    let mut r = BigInt::one();
    for i in 0..k {
        r = r * BigInt::from(n - i) / BigInt::from(i + 1);
    }
    r
}

fn factorial(n: u64) -> BigInt {
    (1..=n).fold(BigInt::one(), |acc, i| acc * BigInt::from(i))
}

/// Coefficients of `d^m/dx^m P_l(x)` from the explicit sum
/// `P_l(x) = 2^{-l} Σ_k (−1)^k C(l,k) C(2l−2k,l) x^{l−2k}`, indexed by power.
fn legendre_derivative_coefficients(l: u64, m: u64) -> Vec<BigRational> {
    let mut c = vec![BigRational::zero(); (l + 1) as usize];
    let scale = BigRational::new(BigInt::one(), BigInt::one() << l as usize);
    for k in 0..=l / 2 {
        let j = l - 2 * k;
        if j < m {
            continue;
        }
        let sign = if k % 2 == 0 { BigInt::one() } else { -BigInt::one() };
        let falling = factorial(j) / factorial(j - m);
        let coef = sign * binomial(l, k) * binomial(2 * l - 2 * k, l) * falling;
        c[(j - m) as usize] += BigRational::from_integer(coef) * &scale;
    }
    c
}

#[test]
fn legendre_recurrence_matches_exact_summation() {
    const L: u64 = 30;
    let coeffs: Vec<Vec<Vec<BigRational>>> =
        (0..=L).map(|l| (0..=l).map(|m| legendre_derivative_coefficients(l, m)).collect()).collect();
    let mut rng = ChaCha8Rng::seed_from_u64(11);
    let mut worst = 0.0f64;
    for _ in 0..100 {
        let theta: f64 = rng.gen_range(-FRAC_PI_2..FRAC_PI_2);
        let table = LegendreTable::new(theta, L as usize);
        let x = BigRational::from_float(theta.sin()).expect("finite");
        let mut powers = vec![BigRational::one()];
        for k in 1..=L as usize {
            let next = &powers[k - 1] * &x;
            powers.push(next);
        }
        let u = theta.cos();
        for l in 0..=L {
            for m in 0..=l {
                let poly: BigRational = coeffs[l as usize][m as usize]
                    .iter()
                    .zip(&powers)
                    .filter(|(c, _)| !c.is_zero())
                    .map(|(c, p)| c * p)
                    .fold(BigRational::zero(), |a, b| a + b);
                let ratio = BigRational::new(factorial(l - m), factorial(l + m)).to_f64().expect("finite");
                let norm = ((2 * l + 1) as f64 / (4.0 * PI) * ratio).sqrt();
                let phase = if m % 2 == 0 { 1.0 } else { -1.0 };
                let exact = phase * norm * u.powi(m as i32) * poly.to_f64().expect("finite");
                let got = table.p[LegendreTable::index(l as usize, m as usize)];
                worst = worst.max((got - exact).abs());
            }
        }
    }
    assert!(worst <= 1e-10, "worst deviation {worst:e}");
}

#[test]
fn zonal_degree_one_slope_at_equator() {
    let t = LegendreTable::new(0.0, 1);
    assert!((t.dp[LegendreTable::index(1, 0)] - (3.0 / (4.0 * PI)).sqrt()).abs() < 1e-14);
    let h = 1e-5;
    let fd = (LegendreTable::new(h, 1).p[1] - LegendreTable::new(-h, 1).p[1]) / (2.0 * h);
    assert!((fd - t.dp[1]).abs() < 1e-8);
}

fn close(a: f64, b: f64, rel: f64) -> bool {
    (a - b).abs() <= rel * b.abs().max(1e-300) || (a - b).abs() <= 1e-16
}

#[test]
fn rough_objects_match_high_precision_values() {
    let p = TestObject2D::object2().eval(FRAC_PI_2);
    assert!(close(p.x, 0.20263354390246324, 1e-15) && close(p.y, 0.30395031585369486, 1e-15), "{p:?}");
    let q = TestObject3D::object2().eval(FRAC_PI_4, 0.0);
    let want = [0.172141994200333, 0.172141994200333, 0.2016768910972088];
    for i in 0..3 {
        assert!(close(q[i], want[i], 1e-14), "{q:?}");
    }
}

#[test]
fn smooth_2d_jet_matches_symbolic_derivatives() {
    let want = [
        [0.93163586052886284372, 0.95231986333846999431],
        [-0.11157326082993727362, -0.051961108930746662435],
        [0.39202122198040888243, 0.37018936064788917055],
    ];
    let r = reference_jet_2d(&TestObject2D::object1(), 1.0);
    let got = [r.jet.x, r.jet.d1, r.jet.d2];
    for (g, w) in got.iter().zip(&want) {
        for i in 0..2 {
            assert!(close(g[i], w[i], 1e-9), "{g:?} vs {w:?}");
        }
    }
}

#[test]
fn smooth_3d_jet_matches_symbolic_derivatives() {
    let want: [[f64; 3]; 6] = [
        [0.99124293849870334859, 0.99906524649833639908, 0.93357029617266045791],
        [-0.046145966998118367847, 0.16893925199320737041, 0.0],
        [0.023702376977246203574, 0.021675897645345397766, 0.13355993097173878922],
        [-0.084469625996603685204, -0.092291933996236735695, 0.0],
        [0.011954764294201959104, -0.043766098513006224800, 0.0],
        [0.16528821240215494533, 0.15921428960965876058, 0.21961361011815406757],
    ];
    let r = reference_jet_3d(&TestObject3D::object1(), 0.5, 0.3);
    for p in Partial::ALL {
        let g = r.jet.get(p);
        let w = want[p.index()];
        for i in 0..3 {
            assert!((g[i] - w[i]).abs() <= 1e-9 * (1.0 + w[i].abs()), "{}: {g:?} vs {w:?}", p.name());
        }
    }
}

fn tetrahedron_energy() -> f64 {
    // Six edges of length √(8/3).
    6.0 / (8.0f64 / 3.0).sqrt()
}

fn octahedron_energy() -> f64 {
    // Twelve edges of length √2 and three antipodal pairs.
    12.0 / 2f64.sqrt() + 3.0 / 2.0
}

#[test]
fn four_points_form_a_tetrahedron() {
    let me = minimal_energy_sphere(4, 5, 2000, 1e-10).unwrap();
    assert!((me.energy - tetrahedron_energy()).abs() < 1e-9, "{}", me.energy);
    let v = me.set.unit_vectors();
    for i in 0..4 {
        for j in i + 1..4 {
            assert!((v[i].dot(&v[j]) + 1.0 / 3.0).abs() < 1e-6);
        }
    }
    let brute = (0..4)
        .flat_map(|i| (i + 1..4).map(move |j| (i, j)))
        .map(|(i, j)| (v[i] - v[j]).norm())
        .fold(f64::INFINITY, f64::min);
    assert!((min_chordal_distance(&me.set).unwrap() - brute).abs() < 1e-15);
    assert!((brute - (8.0f64 / 3.0).sqrt()).abs() < 1e-6);
}

#[test]
fn six_points_form_an_octahedron() {
    let me = minimal_energy_sphere(6, 5, 2000, 1e-10).unwrap();
    assert!((me.energy - octahedron_energy()).abs() < 1e-8, "{}", me.energy);
    assert!((min_chordal_distance(&me.set).unwrap() - 2f64.sqrt()).abs() < 1e-4);
}

#[test]
fn minimal_energy_beats_fibonacci() {
    for n in [4, 9, 16, 25] {
        let me = minimal_energy_sphere(n, 1, 1500, 1e-9).unwrap();
        let fib = riesz_energy(&fibonacci_sphere(n).unwrap().unit_vectors());
        assert!(me.energy <= fib, "n={n}: {} > {fib}", me.energy);
    }
}

#[test]
fn minimal_energy_is_bitwise_deterministic() {
    let a = minimal_energy_sphere(30, 9, 300, 1e-9).unwrap();
    let b = minimal_energy_sphere(30, 9, 300, 1e-9).unwrap();
    assert_eq!(a.set.points(), b.set.points());
    assert_eq!(a.energy.to_bits(), b.energy.to_bits());
}

#[test]
fn fibonacci_hundred_is_well_separated() {
    let set = fibonacci_sphere(100).unwrap();
    let v = set.unit_vectors();
    let mut brute = f64::INFINITY;
    for i in 0..v.len() {
        for j in i + 1..v.len() {
            brute = brute.min((v[i] - v[j]).norm());
        }
    }
    assert!(brute > 0.1);
    assert_eq!(min_chordal_distance(&set).unwrap(), brute);
}

/// The three-point stencil is exact on circles and their affine images, so
/// second order convergence is checked on a lobed curve.
#[test]
fn polyline_normals_converge_at_second_order() {
    let errors: Vec<f64> = [25usize, 50, 100, 200]
        .iter()
        .map(|&n| {
            let pts: Vec<Vector2<f64>> = (0..n)
                .map(|i| {
                    let l = TAU * i as f64 / n as f64;
                    let r = 1.0 + 0.2 * (3.0 * l).cos();
                    Vector2::new(r * l.cos(), r * l.sin())
                })
                .collect();
            let normals = pwl_normals_2d(&ClosedPolyline::new(pts.clone()).unwrap()).unwrap();
            (0..n)
                .map(|i| {
                    let l = TAU * i as f64 / n as f64;
                    let (r, dr) = (1.0 + 0.2 * (3.0 * l).cos(), -0.6 * (3.0 * l).sin());
                    let t = Vector2::new(dr * l.cos() - r * l.sin(), dr * l.sin() + r * l.cos());
                    let exact = Vector2::new(-t.y, t.x).normalize();
                    (normals[i] - exact).norm()
                })
                .fold(0.0, f64::max)
        })
        .collect();
    for w in errors.windows(2) {
        let ratio = w[0] / w[1];
        assert!((3.5..4.5).contains(&ratio), "{errors:?}");
    }
}

#[test]
fn unit_circle_polyline_normals_are_radial() {
    let n = 100;
    let pts: Vec<Vector2<f64>> = (0..n)
        .map(|i| {
            let l = TAU * i as f64 / n as f64;
            Vector2::new(l.cos(), l.sin())
        })
        .collect();
    let normals = pwl_normals_2d(&ClosedPolyline::new(pts.clone()).unwrap()).unwrap();
    for (nrm, p) in normals.iter().zip(&pts) {
        let angle = (nrm.x * -p.y + nrm.y * p.x).atan2(-nrm.dot(p));
        assert!(angle.abs() <= 1e-3);
    }
}

#[test]
fn object_mesh_from_minimal_energy_nodes_is_closed() {
    let me = minimal_energy_sphere(256, 0, 400, 1e-9).unwrap();
    let object = TestObject3D::object1();
    let pts: Vec<Vector3<f64>> = me.set.points().iter().map(|p| object.eval(p.lambda, p.theta)).collect();
    let mesh = triangulate_sphere_like(&pts).unwrap();
    assert_eq!(mesh.euler_characteristic(), 2);
}

#[test]
fn sphere_tessellation_normals_are_radial() {
    let set = fibonacci_sphere(1024).unwrap();
    let mesh = triangulate_sphere_like(&set.unit_vectors()).unwrap();
    let normals = vertex_normals_angle_weighted(&mesh).unwrap();
    let worst = normals
        .iter()
        .zip(mesh.vertices())
        .map(|(n, v)| n.cross(v).norm().atan2(n.dot(v)))
        .fold(0.0, f64::max);
    assert!(worst <= 1e-2, "{worst}");
}

#[test]
fn poles_are_single_points() {
    let pts = vec![
        SpherePoint::new(0.0, FRAC_PI_2),
        SpherePoint::new(1.0, FRAC_PI_2),
        SpherePoint::new(0.0, 0.0),
    ];
    assert!(NodeSet3D::new(pts, PointKind::Loaded).is_err());
}
