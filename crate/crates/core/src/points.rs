//! Node and evaluation point sets on the circle and the sphere.
//!
//! Angles follow the longitude/latitude convention used throughout the crate:
//! `λ ∈ (−π, π]` and `θ ∈ [−π/2, π/2]`, with the unit vector
//! `(cos λ cos θ, sin λ cos θ, sin θ)`.

use std::f64::consts::{FRAC_PI_2, PI, TAU};
use std::fmt::Write as _;
use std::fs;
use std::path::{Path, PathBuf};

use log::{debug, info, warn};
use nalgebra::Vector3;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;

use crate::error::{Error, Result};

/// Wrap an angle into `(−π, π]`.
pub fn wrap_angle(x: f64) -> f64 {
    if x > -PI && x <= PI {
        return x;
    }
    let y = (x + PI).rem_euclid(TAU) - PI;
    if y <= -PI {
        PI
    } else {
        y
    }
}

/// Parameter values on the circle.
#[derive(Debug, Clone, PartialEq)]
pub struct NodeSet2D {
    angles: Vec<f64>,
    equispaced: bool,
}

impl NodeSet2D {
    /// Validated general node set: angles in `(−π, π]`, strictly increasing.
    pub fn new(angles: Vec<f64>) -> Result<Self> {
        if angles.is_empty() {
            return Err(Error::invalid("empty node set"));
        }
        for (k, &a) in angles.iter().enumerate() {
            if !(a > -PI && a <= PI) {
                return Err(Error::Validation(format!("angle {a} at index {k} outside (-pi, pi]")));
            }
        }
        if let Some(k) = angles.windows(2).position(|w| !(w[1] > w[0])) {
            return Err(Error::Validation(format!(
                "angles must be strictly increasing (index {})",
                k + 1
            )));
        }
        Ok(NodeSet2D {
            angles,
            equispaced: false,
        })
    }

    pub fn angles(&self) -> &[f64] {
        &self.angles
    }

    pub fn len(&self) -> usize {
        self.angles.len()
    }

    pub fn is_empty(&self) -> bool {
        self.angles.is_empty()
    }

    /// True when built by [`equispaced_circle`].
    pub fn is_equispaced(&self) -> bool {
        self.equispaced
    }
}

/// `n` equispaced angles `λ_k = −π + 2πk/n`, `k = 1..n`.
pub fn equispaced_circle(n: usize) -> Result<NodeSet2D> {
    if n < 4 || n % 2 != 0 {
        return Err(Error::invalid(format!(
            "equispaced circle needs an even count >= 4, got {n}"
        )));
    }
    let angles = (1..=n)
        .map(|k| -PI + TAU * (k as f64 / n as f64))
        .collect();
    Ok(NodeSet2D {
        angles,
        equispaced: true,
    })
}

/// A point on the unit sphere in longitude/latitude form.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SpherePoint {
    pub lambda: f64,
    pub theta: f64,
}

impl SpherePoint {
    pub fn new(lambda: f64, theta: f64) -> Self {
        SpherePoint { lambda, theta }
    }

    pub fn unit_vector(&self) -> Vector3<f64> {
        let (sl, cl) = self.lambda.sin_cos();
        let (st, ct) = self.theta.sin_cos();
        Vector3::new(cl * ct, sl * ct, st)
    }

    /// Angles of a (unit) vector. `λ = −π` is mapped to `π`.
    pub fn from_vector(v: &Vector3<f64>) -> Self {
        let lambda = wrap_angle(v.y.atan2(v.x));
        let theta = v.z.atan2(v.x.hypot(v.y));
        SpherePoint { lambda, theta }
    }
}

/// Where a sphere point set came from.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum PointKind {
    MinimalEnergy,
    MaximalDeterminant,
    Fibonacci,
    Loaded,
}

/// Unit vectors closer than this are treated as the same point.
pub const COINCIDENT_DISTANCE: f64 = 1e-14;

/// Parameter values on the sphere.
#[derive(Debug, Clone, PartialEq)]
pub struct NodeSet3D {
    points: Vec<SpherePoint>,
    kind: PointKind,
}

impl NodeSet3D {
    /// Validates angle ranges and pairwise distinctness of the unit vectors.
    pub fn new(points: Vec<SpherePoint>, kind: PointKind) -> Result<Self> {
        if points.is_empty() {
            return Err(Error::invalid("empty node set"));
        }
        for (k, p) in points.iter().enumerate() {
            if !(p.lambda > -PI && p.lambda <= PI) {
                return Err(Error::Validation(format!(
                    "lambda {} at index {k} outside (-pi, pi]",
                    p.lambda
                )));
            }
            if !(p.theta >= -FRAC_PI_2 && p.theta <= FRAC_PI_2) {
                return Err(Error::Validation(format!(
                    "theta {} at index {k} outside [-pi/2, pi/2]",
                    p.theta
                )));
            }
        }
        if points.len() >= 2 {
            let (d, i, j) = closest_pair(&points);
            if !(d > COINCIDENT_DISTANCE) {
                return Err(Error::Validation(format!(
                    "points {i} and {j} coincide on the sphere"
                )));
            }
        }
        Ok(NodeSet3D { points, kind })
    }

    pub fn points(&self) -> &[SpherePoint] {
        &self.points
    }

    pub fn kind(&self) -> PointKind {
        self.kind
    }

    pub fn len(&self) -> usize {
        self.points.len()
    }

    pub fn is_empty(&self) -> bool {
        self.points.is_empty()
    }

    pub fn unit_vectors(&self) -> Vec<Vector3<f64>> {
        self.points.iter().map(SpherePoint::unit_vector).collect()
    }

    /// Stable identity of the exact angle bits, used as a factorization cache key.
    pub fn fingerprint(&self) -> u64 {
        // FNV-1a over the raw bits.
        let mut h: u64 = 0xcbf2_9ce4_8422_2325;
        for p in &self.points {
            for v in [p.lambda.to_bits(), p.theta.to_bits()] {
                for b in v.to_le_bytes() {
                    h ^= b as u64;
                    h = h.wrapping_mul(0x0100_0000_01b3);
                }
            }
        }
        h
    }
}

fn closest_pair(points: &[SpherePoint]) -> (f64, usize, usize) {
    let v: Vec<Vector3<f64>> = points.iter().map(SpherePoint::unit_vector).collect();
    let mut best = (f64::INFINITY, 0, 0);
    for i in 0..v.len() {
        for j in (i + 1)..v.len() {
            let d = (v[i] - v[j]).norm();
            if d < best.0 {
                best = (d, i, j);
            }
        }
    }
    best
}

/// Minimum Euclidean distance between the unit vectors of a set.
pub fn min_chordal_distance(set: &NodeSet3D) -> Result<f64> {
    if set.len() < 2 {
        return Err(Error::invalid("min chordal distance needs at least 2 points"));
    }
    Ok(closest_pair(set.points()).0)
}

/// Riesz s = 1 (Coulomb) energy `Σ_{i<j} 1/‖p_i − p_j‖`.
pub fn riesz_energy(v: &[Vector3<f64>]) -> f64 {
    let partial: Vec<f64> = v
        .par_iter()
        .enumerate()
        .map(|(i, p)| v[i + 1..].iter().map(|q| 1.0 / (p - q).norm()).sum::<f64>())
        .collect();
    partial.iter().sum()
}

/// Convergence status of the minimal-energy optimizer.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum Convergence {
    Converged { iterations: usize, gradient_norm: f64 },
    /// No step decreases the energy in floating point: a local minimum to
    /// working precision, though the gradient is still above `tol`.
    Stalled { iterations: usize, gradient_norm: f64 },
    /// The iteration budget ran out; the last iterate is still returned.
    MaxIterations { iterations: usize, gradient_norm: f64 },
}

impl Convergence {
    pub fn gradient_norm(&self) -> f64 {
        match *self {
            Convergence::Converged { gradient_norm, .. }
            | Convergence::Stalled { gradient_norm, .. }
            | Convergence::MaxIterations { gradient_norm, .. } => gradient_norm,
        }
    }

    pub fn is_converged(&self) -> bool {
        matches!(self, Convergence::Converged { .. })
    }
}

#[derive(Debug, Clone)]
pub struct MinimalEnergy {
    pub set: NodeSet3D,
    pub energy: f64,
    pub status: Convergence,
}

fn tangential_gradient(v: &[Vector3<f64>]) -> Vec<Vector3<f64>> {
    v.par_iter()
        .enumerate()
        .map(|(i, p)| {
            let mut g = Vector3::zeros();
            for (j, q) in v.iter().enumerate() {
                if i != j {
                    let d = p - q;
                    let r = d.norm();
                    g -= d / (r * r * r);
                }
            }
            g - p * g.dot(p)
        })
        .collect()
}

/// Points on the unit sphere at a local minimum of the Riesz s = 1 energy.
///
/// Projected gradient descent from a seeded uniform random start. Each step
/// tries the Barzilai–Borwein length from the previous step and halves it
/// until the energy decreases. Convergence is declared when the largest
/// tangential gradient norm falls to `tol`. Output is bitwise deterministic
/// in its arguments.
pub fn minimal_energy_sphere(n: usize, seed: u64, max_iters: usize, tol: f64) -> Result<MinimalEnergy> {
    if n < 2 {
        return Err(Error::invalid("minimal energy set needs n >= 2"));
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut pts: Vec<Vector3<f64>> = (0..n)
        .map(|_| {
            let z: f64 = rng.gen_range(-1.0..1.0);
            let phi: f64 = rng.gen_range(0.0..TAU);
            let s = (1.0 - z * z).sqrt();
            Vector3::new(s * phi.cos(), s * phi.sin(), z)
        })
        .collect();

    let mut energy = riesz_energy(&pts);
    let mut grad = tangential_gradient(&pts);
    let max_norm = |g: &[Vector3<f64>]| g.iter().map(|x| x.norm()).fold(0.0, f64::max);
    let mut gnorm = max_norm(&grad);
    // First step moves the most-pushed point by a fraction of the mean spacing.
    let mut step = 0.2 * (4.0 / n as f64).sqrt() / gnorm.max(f64::MIN_POSITIVE);
    let mut iterations = 0;
    let mut converged = gnorm <= tol;
    let mut stalled = false;

    'descent: while !converged && iterations < max_iters {
        iterations += 1;
        let mut t = step;
        loop {
            let trial: Vec<Vector3<f64>> = pts.iter().zip(&grad).map(|(p, g)| (p - g * t).normalize()).collect();
            let trial_energy = riesz_energy(&trial);
            if trial_energy < energy {
                let trial_grad = tangential_gradient(&trial);
                let (mut ss, mut sy) = (0.0, 0.0);
                for i in 0..n {
                    let s = trial[i] - pts[i];
                    ss += s.dot(&s);
                    sy += s.dot(&(trial_grad[i] - grad[i]));
                }
                step = if sy > 0.0 { ss / sy } else { 2.0 * t };
                pts = trial;
                energy = trial_energy;
                grad = trial_grad;
                gnorm = max_norm(&grad);
                converged = gnorm <= tol;
                break;
            }
            t *= 0.5;
            if t * gnorm < 1e-17 {
                // No representable descent step remains.
                stalled = true;
                break 'descent;
            }
        }
    }

    let status = if converged {
        Convergence::Converged {
            iterations,
            gradient_norm: gnorm,
        }
    } else if stalled {
        debug!("minimal energy set n={n} seed={seed} stalled after {iterations} iterations, gradient norm {gnorm:.3e}");
        Convergence::Stalled {
            iterations,
            gradient_norm: gnorm,
        }
    } else {
        warn!("minimal energy set n={n} seed={seed} stopped after {iterations} iterations, gradient norm {gnorm:.3e}");
        Convergence::MaxIterations {
            iterations,
            gradient_norm: gnorm,
        }
    };
    let points = pts.iter().map(SpherePoint::from_vector).collect();
    Ok(MinimalEnergy {
        set: NodeSet3D::new(points, PointKind::MinimalEnergy)?,
        energy,
        status,
    })
}

/// Generalized spiral points, `z_i = 1 − (2i+1)/n` with golden-angle longitude steps.
pub fn fibonacci_sphere(n: usize) -> Result<NodeSet3D> {
    if n == 0 {
        return Err(Error::invalid("fibonacci sphere needs n >= 1"));
    }
    let golden = PI * (3.0 - 5f64.sqrt());
    let points = (0..n)
        .map(|i| {
            let z = 1.0 - (2 * i + 1) as f64 / n as f64;
            SpherePoint::new(wrap_angle(golden * i as f64), z.asin())
        })
        .collect();
    NodeSet3D::new(points, PointKind::Fibonacci)
}

/// On-disk layout of a point-set file.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum PointFormat {
    /// `λ θ` per line, radians.
    Angles,
    /// `x y z` per line.
    UnitVectors,
}

#[derive(Debug, Clone, PartialEq)]
pub struct PointSetFile {
    pub path: PathBuf,
    pub format: PointFormat,
    /// Tag the loaded set as maximal-determinant points.
    pub maximal_determinant: bool,
}

impl PointSetFile {
    pub fn new(path: impl Into<PathBuf>, format: PointFormat) -> Self {
        PointSetFile {
            path: path.into(),
            format,
            maximal_determinant: false,
        }
    }
}

/// Tolerance on `|‖v‖ − 1|` for unit-vector input lines.
pub const UNIT_TOLERANCE: f64 = 1e-6;

pub fn load_point_set(file: &PointSetFile) -> Result<NodeSet3D> {
    let text = fs::read_to_string(&file.path).map_err(|e| Error::io(&file.path, e))?;
    let want = match file.format {
        PointFormat::Angles => 2,
        PointFormat::UnitVectors => 3,
    };
    let mut points = Vec::new();
    for (lineno, line) in text.lines().enumerate() {
        let line = line.trim();
        if line.is_empty() || line.starts_with('#') {
            continue;
        }
        let parse_err = |message: String| Error::Parse {
            path: file.path.clone(),
            line: lineno + 1,
            message,
        };
        let values = line
            .split_whitespace()
            .map(|t| t.parse::<f64>().map_err(|e| parse_err(format!("`{t}`: {e}"))))
            .collect::<Result<Vec<f64>>>()?;
        if values.len() != want {
            return Err(parse_err(format!("expected {want} values, found {}", values.len())));
        }
        let p = match file.format {
            PointFormat::Angles => SpherePoint::new(values[0], values[1]),
            PointFormat::UnitVectors => {
                let v = Vector3::new(values[0], values[1], values[2]);
                let norm = v.norm();
                if !((norm - 1.0).abs() <= UNIT_TOLERANCE) {
                    return Err(Error::Validation(format!(
                        "{}:{}: vector norm {norm} is not unit",
                        file.path.display(),
                        lineno + 1
                    )));
                }
                SpherePoint::from_vector(&(v / norm))
            }
        };
        points.push(p);
    }
    let kind = if file.maximal_determinant {
        PointKind::MaximalDeterminant
    } else {
        PointKind::Loaded
    };
    NodeSet3D::new(points, kind)
}

/// Text form of a set, one point per line; values use shortest round-trip formatting.
pub fn format_point_set(set: &NodeSet3D, format: PointFormat) -> String {
    let mut out = String::new();
    match format {
        PointFormat::Angles => {
            for p in set.points() {
                let _ = writeln!(out, "{} {}", p.lambda, p.theta);
            }
        }
        PointFormat::UnitVectors => {
            for v in set.unit_vectors() {
                let _ = writeln!(out, "{} {} {}", v.x, v.y, v.z);
            }
        }
    }
    out
}

pub fn save_point_set(set: &NodeSet3D, path: &Path, format: PointFormat) -> Result<()> {
    if let Some(parent) = path.parent() {
        if !parent.as_os_str().is_empty() {
            fs::create_dir_all(parent).map_err(|e| Error::io(parent, e))?;
        }
    }
    fs::write(path, format_point_set(set, format)).map_err(|e| Error::io(path, e))
}

/// Environment variable overriding [`PointCache::default_dir`].
pub const CACHE_ENV: &str = "MEMBRANE_CACHE_DIR";

/// Optimizer settings for cached minimal-energy sets.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct EnergyParams {
    pub max_iters: usize,
    pub tol: f64,
}

impl Default for EnergyParams {
    fn default() -> Self {
        EnergyParams {
            max_iters: 1500,
            tol: 1e-9,
        }
    }
}

/// Directory of generated point sets, `me_<n>_<seed>.txt` in angle format.
#[derive(Debug, Clone)]
pub struct PointCache {
    dir: PathBuf,
    params: EnergyParams,
}

impl PointCache {
    pub fn new(dir: impl Into<PathBuf>) -> Self {
        PointCache {
            dir: dir.into(),
            params: EnergyParams::default(),
        }
    }

    pub fn with_params(mut self, params: EnergyParams) -> Self {
        self.params = params;
        self
    }

    /// `$MEMBRANE_CACHE_DIR`, falling back to `./.membrane-cache`.
    pub fn default_dir() -> PathBuf {
        std::env::var_os(CACHE_ENV)
            .map(PathBuf::from)
            .unwrap_or_else(|| PathBuf::from(".membrane-cache"))
    }

    pub fn dir(&self) -> &Path {
        &self.dir
    }

    pub fn me_path(&self, n: usize, seed: u64) -> PathBuf {
        self.dir.join(format!("me_{n}_{seed}.txt"))
    }

    /// Load a cached minimal-energy set or generate and store it.
    pub fn minimal_energy(&self, n: usize, seed: u64) -> Result<NodeSet3D> {
        let path = self.me_path(n, seed);
        if path.exists() {
            let set = load_point_set(&PointSetFile::new(&path, PointFormat::Angles))?;
            if set.len() == n {
                return Ok(NodeSet3D {
                    points: set.points,
                    kind: PointKind::MinimalEnergy,
                });
            }
            warn!("cached set {} has {} points, regenerating", path.display(), set.len());
        }
        info!("generating minimal energy set n={n} seed={seed}");
        let me = minimal_energy_sphere(n, seed, self.params.max_iters, self.params.tol)?;
        save_point_set(&me.set, &path, PointFormat::Angles)?;
        Ok(me.set)
    }
}
