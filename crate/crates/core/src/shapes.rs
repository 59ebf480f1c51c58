//! Analytic test objects: perturbed ellipses/circles in 2D and perturbed
//! ellipsoids/spheres in 3D, plus finite-difference reference jets.

use std::f64::consts::FRAC_PI_2;

use nalgebra::{Vector2, Vector3};

use crate::error::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct IdealShape2D {
    pub x_c: f64,
    pub y_c: f64,
    pub a: f64,
    pub b: f64,
}

impl IdealShape2D {
    pub fn new(x_c: f64, y_c: f64, a: f64, b: f64) -> Result<Self> {
        if !(a > 0.0 && b > 0.0) {
            return Err(Error::Validation(format!("radii must be positive, got a={a} b={b}")));
        }
        Ok(IdealShape2D { x_c, y_c, a, b })
    }

    pub fn eval(&self, lambda: f64) -> Vector2<f64> {
        let (s, c) = lambda.sin_cos();
        Vector2::new(self.x_c + self.a * c, self.y_c + self.b * s)
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct IdealShape3D {
    pub x_c: f64,
    pub y_c: f64,
    pub z_c: f64,
    pub a: f64,
    pub b: f64,
    pub c: f64,
}

impl IdealShape3D {
    pub fn new(center: [f64; 3], a: f64, b: f64, c: f64) -> Result<Self> {
        if !(a > 0.0 && b > 0.0 && c > 0.0) {
            return Err(Error::Validation(format!(
                "radii must be positive, got a={a} b={b} c={c}"
            )));
        }
        Ok(IdealShape3D {
            x_c: center[0],
            y_c: center[1],
            z_c: center[2],
            a,
            b,
            c,
        })
    }

    pub fn eval(&self, lambda: f64, theta: f64) -> Vector3<f64> {
        let (sl, cl) = lambda.sin_cos();
        let (st, ct) = theta.sin_cos();
        Vector3::new(
            self.x_c + self.a * cl * ct,
            self.y_c + self.b * sl * ct,
            self.z_c + self.c * st,
        )
    }
}

/// Selects the bump exponent: infinitely smooth or finitely differentiable.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Profile {
    Smooth,
    Rough,
}

/// `[1 + A exp(g(λ)/σ)] x_ideal(λ)` with `g = −(1 − cos λ)²` (smooth) or
/// `g = −(1 − cos² λ)^{3/2}` (rough, two continuous derivatives).
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct TestObject2D {
    pub ideal: IdealShape2D,
    pub amplitude: f64,
    pub sigma: f64,
    pub profile: Profile,
}

impl TestObject2D {
    pub fn new(ideal: IdealShape2D, amplitude: f64, sigma: f64, profile: Profile) -> Result<Self> {
        if !(sigma > 0.0) {
            return Err(Error::Validation(format!("sigma must be positive, got {sigma}")));
        }
        Ok(TestObject2D {
            ideal,
            amplitude,
            sigma,
            profile,
        })
    }

    /// Smooth, highly perturbed ellipse.
    pub fn object1() -> Self {
        TestObject2D {
            ideal: IdealShape2D {
                x_c: 0.9,
                y_c: 0.9,
                a: 0.04,
                b: 0.05,
            },
            amplitude: 0.09,
            sigma: 0.1,
            profile: Profile::Smooth,
        }
    }

    /// Rough perturbation of a circle.
    pub fn object2() -> Self {
        TestObject2D {
            ideal: IdealShape2D {
                x_c: 0.2,
                y_c: 0.2,
                a: 0.1,
                b: 0.1,
            },
            amplitude: 0.04,
            sigma: 0.9,
            profile: Profile::Rough,
        }
    }

    pub fn scale_factor(&self, lambda: f64) -> f64 {
        let c = lambda.cos();
        let g = match self.profile {
            Profile::Smooth => -(1.0 - c).powi(2),
            Profile::Rough => -(1.0 - c * c).max(0.0).powf(1.5),
        };
        1.0 + self.amplitude * (g / self.sigma).exp()
    }

    pub fn eval(&self, lambda: f64) -> Vector2<f64> {
        self.ideal.eval(lambda) * self.scale_factor(lambda)
    }
}

/// `[1 + A exp(−r_c^p/σ)] x_ideal(λ, θ)` with
/// `r_c = 1 − cos θ cos θ_c cos(λ − λ_c) − sin θ sin θ_c` and `p = 2` (smooth)
/// or `p = 2.5` (rough, three continuous derivatives).
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct TestObject3D {
    pub ideal: IdealShape3D,
    pub amplitude: f64,
    pub sigma: f64,
    pub lambda_c: f64,
    pub theta_c: f64,
    pub profile: Profile,
}

impl TestObject3D {
    pub fn new(
        ideal: IdealShape3D,
        amplitude: f64,
        sigma: f64,
        lambda_c: f64,
        theta_c: f64,
        profile: Profile,
    ) -> Result<Self> {
        if !(sigma > 0.0) {
            return Err(Error::Validation(format!("sigma must be positive, got {sigma}")));
        }
        Ok(TestObject3D {
            ideal,
            amplitude,
            sigma,
            lambda_c,
            theta_c,
            profile,
        })
    }

    /// Smooth, highly perturbed ellipsoid.
    pub fn object1() -> Self {
        TestObject3D {
            ideal: IdealShape3D {
                x_c: 0.9,
                y_c: 0.9,
                z_c: 0.9,
                a: 0.1,
                b: 0.2,
                c: 0.09,
            },
            amplitude: 0.09,
            sigma: 0.2,
            lambda_c: 0.0,
            theta_c: FRAC_PI_2,
            profile: Profile::Smooth,
        }
    }

    /// Rough perturbation of a sphere.
    pub fn object2() -> Self {
        TestObject3D {
            ideal: IdealShape3D {
                x_c: 0.1,
                y_c: 0.1,
                z_c: 0.2,
                a: 0.1,
                b: 0.1,
                c: 0.1,
            },
            amplitude: 0.04,
            sigma: 16.0 / 25.0,
            lambda_c: 0.0,
            theta_c: FRAC_PI_2,
            profile: Profile::Rough,
        }
    }

    pub fn bump_distance(&self, lambda: f64, theta: f64) -> f64 {
        let r = 1.0
            - theta.cos() * self.theta_c.cos() * (lambda - self.lambda_c).cos()
            - theta.sin() * self.theta_c.sin();
        r.max(0.0)
    }

    pub fn scale_factor(&self, lambda: f64, theta: f64) -> f64 {
        let r = self.bump_distance(lambda, theta);
        let rp = match self.profile {
            Profile::Smooth => r * r,
            Profile::Rough => r.powf(2.5),
        };
        1.0 + self.amplitude * (-rp / self.sigma).exp()
    }

    pub fn eval(&self, lambda: f64, theta: f64) -> Vector3<f64> {
        self.ideal.eval(lambda, theta) * self.scale_factor(lambda, theta)
    }
}

/// Named parameter sets for the four test objects.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Preset {
    Object1_2D,
    Object2_2D,
    Object1_3D,
    Object2_3D,
}

impl Preset {
    pub const ALL: [Preset; 4] = [
        Preset::Object1_2D,
        Preset::Object2_2D,
        Preset::Object1_3D,
        Preset::Object2_3D,
    ];

    pub fn name(&self) -> &'static str {
        match self {
            Preset::Object1_2D => "object1-2d",
            Preset::Object2_2D => "object2-2d",
            Preset::Object1_3D => "object1-3d",
            Preset::Object2_3D => "object2-3d",
        }
    }

    pub fn parse(name: &str) -> Result<Self> {
        let lower = name.to_ascii_lowercase();
        Preset::ALL
            .into_iter()
            .find(|p| p.name() == lower)
            .ok_or_else(|| {
                Error::invalid(format!(
                    "unknown object `{name}` (known: object1-2d, object2-2d, object1-3d, object2-3d)"
                ))
            })
    }

    pub fn dimension(&self) -> usize {
        match self {
            Preset::Object1_2D | Preset::Object2_2D => 2,
            Preset::Object1_3D | Preset::Object2_3D => 3,
        }
    }
}

/// A test object of either dimension.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum Geometry {
    Curve(TestObject2D),
    Surface(TestObject3D),
}

/// A test object together with the label written to reports. Presets keep
/// their identity so per-object defaults (such as RBF shape parameters) apply.
#[derive(Debug, Clone, PartialEq)]
pub struct NamedObject {
    pub name: String,
    pub preset: Option<Preset>,
    pub geometry: Geometry,
}

impl NamedObject {
    pub fn custom(name: impl Into<String>, geometry: Geometry) -> Self {
        NamedObject {
            name: name.into(),
            preset: None,
            geometry,
        }
    }

    pub fn dimension(&self) -> usize {
        match self.geometry {
            Geometry::Curve(_) => 2,
            Geometry::Surface(_) => 3,
        }
    }

    pub fn curve(&self) -> Result<&TestObject2D> {
        match &self.geometry {
            Geometry::Curve(c) => Ok(c),
            Geometry::Surface(_) => Err(Error::invalid(format!("{} is not a 2D object", self.name))),
        }
    }

    pub fn surface(&self) -> Result<&TestObject3D> {
        match &self.geometry {
            Geometry::Surface(s) => Ok(s),
            Geometry::Curve(_) => Err(Error::invalid(format!("{} is not a 3D object", self.name))),
        }
    }
}

impl From<Preset> for NamedObject {
    fn from(p: Preset) -> Self {
        let geometry = match p {
            Preset::Object1_2D => Geometry::Curve(TestObject2D::object1()),
            Preset::Object2_2D => Geometry::Curve(TestObject2D::object2()),
            Preset::Object1_3D => Geometry::Surface(TestObject3D::object1()),
            Preset::Object2_3D => Geometry::Surface(TestObject3D::object2()),
        };
        NamedObject {
            name: p.name().to_string(),
            preset: Some(p),
            geometry,
        }
    }
}

/// Position with first and second parametric derivatives on a curve.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Jet2D {
    pub x: Vector2<f64>,
    pub d1: Vector2<f64>,
    pub d2: Vector2<f64>,
}

/// Position with all first and second partials on a surface.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Jet3D {
    pub x: Vector3<f64>,
    pub d_lambda: Vector3<f64>,
    pub d_theta: Vector3<f64>,
    pub d_ll: Vector3<f64>,
    pub d_lt: Vector3<f64>,
    pub d_tt: Vector3<f64>,
}

/// One of the six quantities in a [`Jet3D`].
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Partial {
    Val,
    DLambda,
    DTheta,
    DLambdaLambda,
    DLambdaTheta,
    DThetaTheta,
}

impl Partial {
    pub const ALL: [Partial; 6] = [
        Partial::Val,
        Partial::DLambda,
        Partial::DTheta,
        Partial::DLambdaLambda,
        Partial::DLambdaTheta,
        Partial::DThetaTheta,
    ];

    pub fn index(self) -> usize {
        self as usize
    }

    pub fn name(self) -> &'static str {
        match self {
            Partial::Val => "val",
            Partial::DLambda => "dl",
            Partial::DTheta => "dt",
            Partial::DLambdaLambda => "dll",
            Partial::DLambdaTheta => "dlt",
            Partial::DThetaTheta => "dtt",
        }
    }
}

impl Jet3D {
    /// Assemble from values ordered as [`Partial::ALL`].
    pub fn from_partials(p: [Vector3<f64>; 6]) -> Self {
        Jet3D {
            x: p[0],
            d_lambda: p[1],
            d_theta: p[2],
            d_ll: p[3],
            d_lt: p[4],
            d_tt: p[5],
        }
    }

    pub fn get(&self, partial: Partial) -> Vector3<f64> {
        match partial {
            Partial::Val => self.x,
            Partial::DLambda => self.d_lambda,
            Partial::DTheta => self.d_theta,
            Partial::DLambdaLambda => self.d_ll,
            Partial::DLambdaTheta => self.d_lt,
            Partial::DThetaTheta => self.d_tt,
        }
    }
}

/// A reference jet with the largest Richardson error estimate among its components.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ReferenceJet<J> {
    pub jet: J,
    pub accuracy: f64,
}

/// Initial finite-difference step; subsequent steps halve it.
pub const RICHARDSON_H0: f64 = 1e-2;
const RICHARDSON_TABLE: usize = 10;

/// Richardson extrapolation of a central-difference estimator whose error
/// expands in even powers of `h`. Returns the best estimate and its error.
pub fn richardson<const D: usize>(estimate: impl Fn(f64) -> [f64; D], h0: f64) -> ([f64; D], f64) {
    const CON2: f64 = 4.0;
    const SAFE: f64 = 2.0;
    let diff = |a: &[f64; D], b: &[f64; D]| {
        a.iter().zip(b).map(|(x, y)| (x - y).abs()).fold(0.0, f64::max)
    };
    let mut table = vec![vec![[0.0; D]; RICHARDSON_TABLE]; RICHARDSON_TABLE];
    let mut h = h0;
    table[0][0] = estimate(h);
    let mut best = table[0][0];
    let mut err = f64::INFINITY;
    for i in 1..RICHARDSON_TABLE {
        h *= 0.5;
        table[0][i] = estimate(h);
        let mut fac = CON2;
        for j in 1..=i {
            let mut next = [0.0; D];
            for k in 0..D {
                next[k] = (table[j - 1][i][k] * fac - table[j - 1][i - 1][k]) / (fac - 1.0);
            }
            table[j][i] = next;
            fac *= CON2;
            let errt = diff(&next, &table[j - 1][i]).max(diff(&next, &table[j - 1][i - 1]));
            if errt <= err {
                err = errt;
                best = next;
            }
        }
        if diff(&table[i][i], &table[i - 1][i - 1]) >= SAFE * err {
            break;
        }
    }
    (best, err)
}

fn v2(a: [f64; 2]) -> Vector2<f64> {
    Vector2::new(a[0], a[1])
}

fn v3(a: &[f64], off: usize) -> Vector3<f64> {
    Vector3::new(a[off], a[off + 1], a[off + 2])
}

/// Ground-truth jet of a curve given only its position map.
pub fn reference_jet_2d_of(f: impl Fn(f64) -> Vector2<f64>, lambda: f64) -> ReferenceJet<Jet2D> {
    let x = f(lambda);
    let (d1, e1) = richardson(
        |h| {
            let d = (f(lambda + h) - f(lambda - h)) / (2.0 * h);
            [d.x, d.y]
        },
        RICHARDSON_H0,
    );
    let (d2, e2) = richardson(
        |h| {
            let d = (f(lambda + h) - 2.0 * x + f(lambda - h)) / (h * h);
            [d.x, d.y]
        },
        RICHARDSON_H0,
    );
    ReferenceJet {
        jet: Jet2D {
            x,
            d1: v2(d1),
            d2: v2(d2),
        },
        accuracy: e1.max(e2),
    }
}

pub fn reference_jet_2d(obj: &TestObject2D, lambda: f64) -> ReferenceJet<Jet2D> {
    reference_jet_2d_of(|l| obj.eval(l), lambda)
}

/// Ground-truth jet of a surface given only its position map. The mixed
/// partial uses the nested central difference on the four diagonal neighbours.
pub fn reference_jet_3d_of(
    f: impl Fn(f64, f64) -> Vector3<f64>,
    lambda: f64,
    theta: f64,
) -> ReferenceJet<Jet3D> {
    let x = f(lambda, theta);
    let (first, e1) = richardson(
        |h| {
            let dl = (f(lambda + h, theta) - f(lambda - h, theta)) / (2.0 * h);
            let dt = (f(lambda, theta + h) - f(lambda, theta - h)) / (2.0 * h);
            [dl.x, dl.y, dl.z, dt.x, dt.y, dt.z]
        },
        RICHARDSON_H0,
    );
    let (second, e2) = richardson(
        |h| {
            let h2 = h * h;
            let ll = (f(lambda + h, theta) - 2.0 * x + f(lambda - h, theta)) / h2;
            let tt = (f(lambda, theta + h) - 2.0 * x + f(lambda, theta - h)) / h2;
            let lt = (f(lambda + h, theta + h) - f(lambda + h, theta - h) - f(lambda - h, theta + h)
                + f(lambda - h, theta - h))
                / (4.0 * h2);
            [ll.x, ll.y, ll.z, lt.x, lt.y, lt.z, tt.x, tt.y, tt.z]
        },
        RICHARDSON_H0,
    );
    ReferenceJet {
        jet: Jet3D {
            x,
            d_lambda: v3(&first, 0),
            d_theta: v3(&first, 3),
            d_ll: v3(&second, 0),
            d_lt: v3(&second, 3),
            d_tt: v3(&second, 6),
        },
        accuracy: e1.max(e2),
    }
}

pub fn reference_jet_3d(obj: &TestObject3D, lambda: f64, theta: f64) -> ReferenceJet<Jet3D> {
    reference_jet_3d_of(|l, t| obj.eval(l, t), lambda, theta)
}

#[cfg(test)]
mod tests {
    use super::*;
    use std::f64::consts::PI;

    #[test]
    fn object1_2d_at_bump_center() {
        let p = TestObject2D::object1().eval(0.0);
        assert!((p.x - 1.0246).abs() < 1e-14);
        assert!((p.y - 0.981).abs() < 1e-14);
    }

    #[test]
    fn object1_3d_at_bump_center() {
        let p = TestObject3D::object1().eval(0.0, FRAC_PI_2);
        let expected = Vector3::new(0.9, 0.9, 0.99) * 1.09;
        assert!((p - expected).norm() < 1e-14);
    }

    #[test]
    fn invariants_rejected() {
        assert!(IdealShape2D::new(0.0, 0.0, 0.0, 1.0).is_err());
        assert!(IdealShape3D::new([0.0; 3], 1.0, 1.0, -1.0).is_err());
        let ideal = IdealShape2D::new(0.0, 0.0, 1.0, 1.0).unwrap();
        assert!(TestObject2D::new(ideal, 0.1, 0.0, Profile::Smooth).is_err());
    }

    #[test]
    fn periodic_seam_is_continuous() {
        for obj in [TestObject2D::object1(), TestObject2D::object2()] {
            let a = obj.eval(-PI + 1e-9);
            let b = obj.eval(PI - 1e-9);
            assert!((a - b).norm() < 1e-9);
        }
    }

    #[test]
    fn pole_continuity_3d() {
        for obj in [TestObject3D::object1(), TestObject3D::object2()] {
            for &l in &[-2.0, -0.5, 0.3, 1.7] {
                let other = if l <= 0.0 { l + PI } else { l - PI };
                assert!((obj.eval(l, FRAC_PI_2) - obj.eval(other, FRAC_PI_2)).norm() < 1e-15);
                assert!((obj.eval(l, -FRAC_PI_2) - obj.eval(other, -FRAC_PI_2)).norm() < 1e-15);
            }
        }
    }

    #[test]
    fn circle_jet() {
        let circle = TestObject2D::new(IdealShape2D::new(0.0, 0.0, 1.0, 1.0).unwrap(), 0.0, 1.0, Profile::Smooth).unwrap();
        for &l in &[-2.5, -1.0, 0.0, 0.7, 3.0] {
            let r = reference_jet_2d(&circle, l);
            assert!((r.jet.d1 - Vector2::new(-l.sin(), l.cos())).norm() < 1e-11);
            assert!((r.jet.d2 - Vector2::new(-l.cos(), -l.sin())).norm() < 1e-10);
            assert!(r.accuracy < 1e-9);
        }
    }

    #[test]
    fn sphere_jet_and_mirror_symmetry() {
        let sphere = TestObject3D::new(
            IdealShape3D::new([0.0; 3], 1.0, 1.0, 1.0).unwrap(),
            0.0,
            1.0,
            0.0,
            FRAC_PI_2,
            Profile::Smooth,
        )
        .unwrap();
        let (l, t) = (0.8, 0.4);
        let r = reference_jet_3d(&sphere, l, t);
        let expected = Vector3::new(-l.sin() * t.cos(), l.cos() * t.cos(), 0.0);
        assert!((r.jet.d_lambda - expected).norm() < 1e-11);
        let m = reference_jet_3d(&sphere, l, -t);
        // z-mirror: d_theta(−θ) = (−x, −y, z) components of d_theta(θ) with sign flip.
        let a = r.jet.d_theta;
        let b = m.jet.d_theta;
        assert!((a.x + b.x).abs() < 1e-11 && (a.y + b.y).abs() < 1e-11 && (a.z - b.z).abs() < 1e-11);
    }

    #[test]
    fn richardson_on_exponential() {
        let (d, err) = richardson(|h| [((1.0f64 + h).exp() - (1.0f64 - h).exp()) / (2.0 * h)], 0.1);
        assert!((d[0] - 1f64.exp()).abs() < 1e-12, "{}", d[0] - 1f64.exp());
        assert!(err < 1e-10);
    }

    #[test]
    fn preset_names_round_trip() {
        for p in Preset::ALL {
            assert_eq!(Preset::parse(p.name()).unwrap(), p);
        }
        assert_eq!(Preset::parse("Object1-2D").unwrap(), Preset::Object1_2D);
        assert!(Preset::parse("blob").is_err());
    }
}
