//! Radial basis function interpolation on the unit circle and unit sphere
//! using chordal distances and multiquadric-type kernels.
//!
//! Kernels are handled as `ψ(t) = φ(√t)` with `t` the squared chordal
//! distance, which is smooth in the angles everywhere.

use std::collections::HashMap;
use std::fmt;
use std::io::Write;
use std::sync::{Arc, Mutex};

use nalgebra::{DMatrix, DVector, Vector2, Vector3};
use rustfft::num_complex::Complex;
use rustfft::FftPlanner;

use crate::error::{Error, Result};
use crate::fourier::{check_len, order_partial, trig_fit, write_coefficients_csv, BasisTag, OperatorMatrix};
use crate::linalg::{Cholesky, Dense, Factorization, Lu};
use crate::points::{equispaced_circle, NodeSet2D, NodeSet3D, SpherePoint};
use crate::shapes::Partial;

const EPSILON_ADVICE: &str = "increase the shape parameter epsilon";

/// Fits whose condition number exceeds this are refused. It sits at the
/// reciprocal of the unit roundoff: RBF-Direct interpolants stay accurate up
/// to the point where the system becomes numerically singular, so a tighter
/// bound would reject shape parameters that work.
pub const RBF_CONDITION_LIMIT: f64 = 1.0 / f64::EPSILON;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum KernelFamily {
    /// `φ(r) = √(1 + (εr)²)`
    Multiquadric,
    /// `φ(r) = 1/√(1 + (εr)²)`
    InverseMultiquadric,
}

impl KernelFamily {
    pub fn name(self) -> &'static str {
        match self {
            KernelFamily::Multiquadric => "mq",
            KernelFamily::InverseMultiquadric => "imq",
        }
    }

    pub fn parse(s: &str) -> Result<Self> {
        match s.to_ascii_lowercase().as_str() {
            "mq" => Ok(KernelFamily::Multiquadric),
            "imq" => Ok(KernelFamily::InverseMultiquadric),
            _ => Err(Error::invalid(format!("unknown kernel `{s}` (expected mq or imq)"))),
        }
    }
}

impl fmt::Display for KernelFamily {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct RadialKernel {
    pub family: KernelFamily,
    pub epsilon: f64,
}

impl RadialKernel {
    pub fn new(family: KernelFamily, epsilon: f64) -> Result<Self> {
        if !(epsilon > 0.0 && epsilon.is_finite()) {
            return Err(Error::invalid(format!("epsilon must be positive, got {epsilon}")));
        }
        Ok(RadialKernel { family, epsilon })
    }

    pub fn mq(epsilon: f64) -> Result<Self> {
        Self::new(KernelFamily::Multiquadric, epsilon)
    }

    pub fn imq(epsilon: f64) -> Result<Self> {
        Self::new(KernelFamily::InverseMultiquadric, epsilon)
    }

    /// `φ(r)`.
    pub fn phi(&self, r: f64) -> f64 {
        self.psi(r * r)[0]
    }

    /// `[ψ, ψ', ψ'']` at squared distance `t`.
    pub fn psi(&self, t: f64) -> [f64; 3] {
        let e2 = self.epsilon * self.epsilon;
        let q = 1.0 + e2 * t;
        let s = q.sqrt();
        match self.family {
            KernelFamily::Multiquadric => [s, 0.5 * e2 / s, -0.25 * e2 * e2 / (q * s)],
            KernelFamily::InverseMultiquadric => {
                let inv = 1.0 / s;
                let inv3 = inv / q;
                [inv, -0.5 * e2 * inv3, 0.75 * e2 * e2 * inv3 / q]
            }
        }
    }
}

pub fn chordal_distance_circle(l1: f64, l2: f64) -> f64 {
    (2.0 - 2.0 * (l1 - l2).cos()).max(0.0).sqrt()
}

pub fn chordal_distance_sphere(a: SpherePoint, b: SpherePoint) -> f64 {
    squared_chord_sphere(a, b).sqrt()
}

fn squared_chord_sphere(a: SpherePoint, b: SpherePoint) -> f64 {
    let t = 2.0
        * (1.0 - a.theta.cos() * b.theta.cos() * (a.lambda - b.lambda).cos() - a.theta.sin() * b.theta.sin());
    t.max(0.0)
}

fn with_advice(e: Error) -> Error {
    match e {
        Error::IllConditioned { condition, .. } => Error::IllConditioned {
            condition,
            advice: EPSILON_ADVICE.into(),
        },
        other => other,
    }
}

fn check_condition(condition: f64) -> Result<()> {
    if !(condition <= RBF_CONDITION_LIMIT) {
        return Err(Error::IllConditioned {
            condition,
            advice: EPSILON_ADVICE.into(),
        });
    }
    Ok(())
}

/// A factored RBF system matrix.
#[derive(Debug, Clone)]
enum SymmetricFactor {
    Cholesky(Cholesky),
    Lu(Lu),
}

impl SymmetricFactor {
    /// Cholesky for the positive-definite inverse multiquadric, LU otherwise.
    fn new(a: Dense, family: KernelFamily) -> Result<Self> {
        if family == KernelFamily::InverseMultiquadric {
            if let Some(c) = Cholesky::factor(&a) {
                return Ok(SymmetricFactor::Cholesky(c));
            }
            let lu = Lu::factor(a).map_err(with_advice)?;
            return Err(Error::IllConditioned {
                condition: lu.condition_estimate(),
                advice: format!("Cholesky factorization failed; {EPSILON_ADVICE}"),
            });
        }
        Ok(SymmetricFactor::Lu(Lu::factor(a).map_err(with_advice)?))
    }

    fn solve(&self, b: &[f64]) -> Vec<f64> {
        match self {
            SymmetricFactor::Cholesky(c) => c.solve(b),
            SymmetricFactor::Lu(l) => l.solve(b),
        }
    }

    fn condition(&self) -> f64 {
        match self {
            SymmetricFactor::Cholesky(c) => c.condition_estimate(),
            SymmetricFactor::Lu(l) => l.condition_estimate(),
        }
    }

    fn dim(&self) -> usize {
        match self {
            SymmetricFactor::Cholesky(c) => c.dim(),
            SymmetricFactor::Lu(l) => l.dim(),
        }
    }

    fn is_cholesky(&self) -> bool {
        matches!(self, SymmetricFactor::Cholesky(_))
    }
}

// ---------------------------------------------------------------------------
// Circle

#[derive(Debug, Clone, PartialEq)]
pub struct RbfInterpolant2D {
    pub nodes: NodeSet2D,
    pub kernel: RadialKernel,
    pub coeffs_x: Vec<f64>,
    pub coeffs_y: Vec<f64>,
    /// 2-norm condition number (circulant path) or 1-norm estimate (dense path).
    pub condition: f64,
}

/// `[ψ, ∂λψ, ∂λλψ]` of the kernel centered at `center`, evaluated at `lambda`.
fn circle_terms(kernel: &RadialKernel, lambda: f64, center: f64) -> [f64; 3] {
    let (s, c) = (lambda - center).sin_cos();
    let t = (2.0 - 2.0 * c).max(0.0);
    let [p0, p1, p2] = kernel.psi(t);
    let t1 = 2.0 * s;
    let t2 = 2.0 * c;
    [p0, p1 * t1, p2 * t1 * t1 + p1 * t2]
}

impl RbfInterpolant2D {
    pub fn eval(&self, lambda: f64, order: usize) -> Result<Vector2<f64>> {
        order_partial(order)?;
        let mut v = Vector2::zeros();
        for (k, &c) in self.nodes.angles().iter().enumerate() {
            let w = circle_terms(&self.kernel, lambda, c)[order];
            v += Vector2::new(self.coeffs_x[k], self.coeffs_y[k]) * w;
        }
        Ok(v)
    }

    pub fn write_csv<W: Write>(&self, out: &mut W) -> std::io::Result<()> {
        write_coefficients_csv(out, &[("x", &self.coeffs_x), ("y", &self.coeffs_y)])
    }
}

/// System matrix `A_jk = φ(‖x(λ_j) − x(λ_k)‖)`.
pub fn rbf_matrix_2d(nodes: &NodeSet2D, kernel: &RadialKernel) -> Dense {
    let a = nodes.angles();
    Dense::from_fn(a.len(), |i, j| circle_terms(kernel, a[i], a[j])[0])
}

/// Fit both coordinates. Equispaced nodes use the circulant structure of the
/// system (eigenvalues by FFT); other node sets use [`rbf_fit_2d_dense`].
pub fn rbf_fit_2d(nodes: &NodeSet2D, data_x: &[f64], data_y: &[f64], kernel: RadialKernel) -> Result<RbfInterpolant2D> {
    let n = nodes.len();
    check_len(n, data_x.len())?;
    check_len(n, data_y.len())?;
    if !nodes.is_equispaced() {
        return rbf_fit_2d_dense(nodes, data_x, data_y, kernel);
    }
    let solver = CirculantSolver::new(n, &kernel)?;
    Ok(RbfInterpolant2D {
        nodes: nodes.clone(),
        kernel,
        coeffs_x: solver.solve(data_x),
        coeffs_y: solver.solve(data_y),
        condition: solver.condition,
    })
}

/// Reference path: dense factorization of the symmetric system.
pub fn rbf_fit_2d_dense(
    nodes: &NodeSet2D,
    data_x: &[f64],
    data_y: &[f64],
    kernel: RadialKernel,
) -> Result<RbfInterpolant2D> {
    let n = nodes.len();
    check_len(n, data_x.len())?;
    check_len(n, data_y.len())?;
    let fact = SymmetricFactor::new(rbf_matrix_2d(nodes, &kernel), kernel.family)?;
    let condition = fact.condition();
    check_condition(condition)?;
    Ok(RbfInterpolant2D {
        nodes: nodes.clone(),
        kernel,
        coeffs_x: fact.solve(data_x),
        coeffs_y: fact.solve(data_y),
        condition,
    })
}

/// Diagonalization of a symmetric circulant system by the DFT.
struct CirculantSolver {
    eigenvalues: Vec<f64>,
    condition: f64,
    forward: Arc<dyn rustfft::Fft<f64>>,
    inverse: Arc<dyn rustfft::Fft<f64>>,
}

impl CirculantSolver {
    fn new(n: usize, kernel: &RadialKernel) -> Result<Self> {
        let mut planner = FftPlanner::new();
        let forward = planner.plan_fft_forward(n);
        let inverse = planner.plan_fft_inverse(n);
        let step = std::f64::consts::TAU / n as f64;
        let mut col: Vec<Complex<f64>> = (0..n)
            .map(|k| Complex::new(circle_terms(kernel, k as f64 * step, 0.0)[0], 0.0))
            .collect();
        forward.process(&mut col);
        let eigenvalues: Vec<f64> = col.iter().map(|c| c.re).collect();
        let max = eigenvalues.iter().fold(0.0f64, |m, v| m.max(v.abs()));
        let min = eigenvalues.iter().fold(f64::INFINITY, |m, v| m.min(v.abs()));
        let condition = if min > 0.0 { max / min } else { f64::INFINITY };
        check_condition(condition)?;
        Ok(CirculantSolver {
            eigenvalues,
            condition,
            forward,
            inverse,
        })
    }

    fn solve(&self, b: &[f64]) -> Vec<f64> {
        let n = b.len();
        let mut buf: Vec<Complex<f64>> = b.iter().map(|&v| Complex::new(v, 0.0)).collect();
        self.forward.process(&mut buf);
        for (v, e) in buf.iter_mut().zip(&self.eigenvalues) {
            *v /= *e;
        }
        self.inverse.process(&mut buf);
        buf.iter().map(|c| c.re / n as f64).collect()
    }
}

pub fn rbf_eval_2d(s: &RbfInterpolant2D, eval: &NodeSet2D, order: usize) -> Result<Vec<Vector2<f64>>> {
    order_partial(order)?;
    eval.angles().iter().map(|&l| s.eval(l, order)).collect()
}

/// Coefficients → values of the `order`-th derivative at `eval`.
pub fn rbf_operator_2d(nodes: &NodeSet2D, kernel: &RadialKernel, eval: &NodeSet2D, order: usize) -> Result<OperatorMatrix> {
    let partial = order_partial(order)?;
    let centers = nodes.angles();
    let matrix = DMatrix::from_fn(eval.len(), centers.len(), |i, k| {
        circle_terms(kernel, eval.angles()[i], centers[k])[order]
    });
    Ok(OperatorMatrix {
        matrix,
        basis: BasisTag::Rbf,
        partial,
        from_data: false,
    })
}

/// Node data → values of the `order`-th derivative at `eval` (fit folded in).
pub fn rbf_data_operator_2d(
    nodes: &NodeSet2D,
    kernel: &RadialKernel,
    eval: &NodeSet2D,
    order: usize,
) -> Result<OperatorMatrix> {
    let coeff = rbf_operator_2d(nodes, kernel, eval, order)?;
    let n = nodes.len();
    let mut inverse = DMatrix::zeros(n, n);
    let zeros = vec![0.0; n];
    for j in 0..n {
        let mut e = vec![0.0; n];
        e[j] = 1.0;
        let s = rbf_fit_2d(nodes, &e, &zeros, *kernel)?;
        for i in 0..n {
            inverse[(i, j)] = s.coeffs_x[i];
        }
    }
    Ok(OperatorMatrix {
        matrix: coeff.matrix * inverse,
        from_data: true,
        ..coeff
    })
}

/// One entry of an ε → 0 comparison against the trigonometric interpolant.
#[derive(Debug, Clone, PartialEq)]
pub struct EpsilonGap {
    pub epsilon: f64,
    /// `max |s(λ) − p(λ)|` on the dense grid, `None` if the RBF fit was refused.
    pub gap: Option<f64>,
    pub condition: f64,
    pub failure: Option<String>,
}

/// Grid used by [`epsilon_limit_gap`].
pub const GAP_GRID: usize = 512;

/// For each `ε`, the largest deviation between the multiquadric interpolant
/// and the trigonometric interpolant of the same data.
pub fn epsilon_limit_gap(nodes: &NodeSet2D, data: &[f64], eps_list: &[f64]) -> Result<Vec<EpsilonGap>> {
    if !nodes.is_equispaced() {
        return Err(Error::invalid("epsilon limit comparison needs equispaced nodes"));
    }
    check_len(nodes.len(), data.len())?;
    let zeros = vec![0.0; data.len()];
    let trig = trig_fit(nodes, data, &zeros)?;
    let grid = equispaced_circle(GAP_GRID)?;
    let reference: Vec<f64> = grid
        .angles()
        .iter()
        .map(|&l| trig.eval(l, 0).map(|v| v.x))
        .collect::<Result<_>>()?;
    let mut out = Vec::with_capacity(eps_list.len());
    for &eps in eps_list {
        let kernel = RadialKernel::mq(eps)?;
        match rbf_fit_2d(nodes, data, &zeros, kernel) {
            Ok(s) => {
                let mut gap = 0.0f64;
                for (&l, r) in grid.angles().iter().zip(&reference) {
                    gap = gap.max((s.eval(l, 0)?.x - r).abs());
                }
                out.push(EpsilonGap {
                    epsilon: eps,
                    gap: Some(gap),
                    condition: s.condition,
                    failure: None,
                });
            }
            Err(e) => {
                let condition = match &e {
                    Error::IllConditioned { condition, .. } => *condition,
                    _ => f64::NAN,
                };
                out.push(EpsilonGap {
                    epsilon: eps,
                    gap: None,
                    condition,
                    failure: Some(e.to_string()),
                });
            }
        }
    }
    Ok(out)
}

// ---------------------------------------------------------------------------
// Sphere

/// `[ψ, ∂λ, ∂θ, ∂λλ, ∂λθ, ∂θθ]` of the kernel centered at `c`, evaluated at `p`.
fn sphere_terms(kernel: &RadialKernel, p: SpherePoint, c: SpherePoint) -> [f64; 6] {
    let (sd, cd) = (p.lambda - c.lambda).sin_cos();
    let (st, ct) = p.theta.sin_cos();
    let (sk, ck) = c.theta.sin_cos();
    let t = (2.0 * (1.0 - ct * ck * cd - st * sk)).max(0.0);
    let t_l = 2.0 * ct * ck * sd;
    let t_t = 2.0 * (st * ck * cd - ct * sk);
    let t_ll = 2.0 * ct * ck * cd;
    let t_lt = -2.0 * st * ck * sd;
    let t_tt = 2.0 * (ct * ck * cd + st * sk);
    let [p0, p1, p2] = kernel.psi(t);
    [
        p0,
        p1 * t_l,
        p1 * t_t,
        p2 * t_l * t_l + p1 * t_ll,
        p2 * t_l * t_t + p1 * t_lt,
        p2 * t_t * t_t + p1 * t_tt,
    ]
}

#[derive(Debug, Clone, PartialEq)]
pub struct RbfInterpolant3D {
    pub nodes: NodeSet3D,
    pub kernel: RadialKernel,
    pub coeffs_x: Vec<f64>,
    pub coeffs_y: Vec<f64>,
    pub coeffs_z: Vec<f64>,
}

impl RbfInterpolant3D {
    pub fn eval(&self, p: SpherePoint, partial: Partial) -> Vector3<f64> {
        let mut v = Vector3::zeros();
        for (k, &c) in self.nodes.points().iter().enumerate() {
            let w = sphere_terms(&self.kernel, p, c)[partial.index()];
            v += Vector3::new(self.coeffs_x[k], self.coeffs_y[k], self.coeffs_z[k]) * w;
        }
        v
    }

    pub fn write_csv<W: Write>(&self, out: &mut W) -> std::io::Result<()> {
        write_coefficients_csv(
            out,
            &[("x", &self.coeffs_x), ("y", &self.coeffs_y), ("z", &self.coeffs_z)],
        )
    }
}

pub fn rbf_matrix_3d(nodes: &NodeSet3D, kernel: &RadialKernel) -> Dense {
    let p = nodes.points();
    Dense::from_fn(p.len(), |i, j| kernel.psi(squared_chord_sphere(p[i], p[j]))[0])
}

/// Factored sphere system for one node set and kernel.
#[derive(Debug, Clone)]
pub struct RbfSolver3D {
    nodes: NodeSet3D,
    kernel: RadialKernel,
    factor: SymmetricFactor,
    condition: f64,
}

impl RbfSolver3D {
    pub fn new(nodes: &NodeSet3D, kernel: RadialKernel) -> Result<Self> {
        if nodes.len() < 4 {
            return Err(Error::invalid(format!(
                "sphere interpolation needs at least 4 nodes, got {}",
                nodes.len()
            )));
        }
        let factor = SymmetricFactor::new(rbf_matrix_3d(nodes, &kernel), kernel.family)?;
        let condition = factor.condition();
        log::debug!(
            "{} system, N={}, epsilon={}: condition estimate {condition:.3e}",
            kernel.family,
            nodes.len(),
            kernel.epsilon
        );
        check_condition(condition)?;
        Ok(RbfSolver3D {
            nodes: nodes.clone(),
            kernel,
            factor,
            condition,
        })
    }

    pub fn condition(&self) -> f64 {
        self.condition
    }

    pub fn kernel(&self) -> RadialKernel {
        self.kernel
    }

    pub fn is_cholesky(&self) -> bool {
        self.factor.is_cholesky()
    }

    pub fn fit(&self, data_x: &[f64], data_y: &[f64], data_z: &[f64]) -> Result<RbfInterpolant3D> {
        let n = self.factor.dim();
        check_len(n, data_x.len())?;
        check_len(n, data_y.len())?;
        check_len(n, data_z.len())?;
        Ok(RbfInterpolant3D {
            nodes: self.nodes.clone(),
            kernel: self.kernel,
            coeffs_x: self.factor.solve(data_x),
            coeffs_y: self.factor.solve(data_y),
            coeffs_z: self.factor.solve(data_z),
        })
    }

    pub fn inverse(&self) -> DMatrix<f64> {
        let n = self.factor.dim();
        let mut inv = DMatrix::zeros(n, n);
        for j in 0..n {
            let mut e = vec![0.0; n];
            e[j] = 1.0;
            for (i, v) in self.factor.solve(&e).into_iter().enumerate() {
                inv[(i, j)] = v;
            }
        }
        inv
    }
}

type SolverKey = (u64, KernelFamily, u64);

/// Shares factorizations between fits with the same nodes and kernel.
#[derive(Debug, Default)]
pub struct RbfSolverCache {
    solvers: Mutex<HashMap<SolverKey, Arc<RbfSolver3D>>>,
}

impl RbfSolverCache {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn get(&self, nodes: &NodeSet3D, kernel: RadialKernel) -> Result<Arc<RbfSolver3D>> {
        let key = (nodes.fingerprint(), kernel.family, kernel.epsilon.to_bits());
        if let Some(s) = self.solvers.lock().expect("solver cache poisoned").get(&key) {
            return Ok(Arc::clone(s));
        }
        let solver = Arc::new(RbfSolver3D::new(nodes, kernel)?);
        self.solvers
            .lock()
            .expect("solver cache poisoned")
            .insert(key, Arc::clone(&solver));
        Ok(solver)
    }

    pub fn len(&self) -> usize {
        self.solvers.lock().expect("solver cache poisoned").len()
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }
}

pub fn rbf_fit_3d(
    nodes: &NodeSet3D,
    data_x: &[f64],
    data_y: &[f64],
    data_z: &[f64],
    kernel: RadialKernel,
) -> Result<RbfInterpolant3D> {
    RbfSolver3D::new(nodes, kernel)?.fit(data_x, data_y, data_z)
}

pub fn rbf_eval_3d(s: &RbfInterpolant3D, eval: &NodeSet3D, partial: Partial) -> Vec<Vector3<f64>> {
    let op = rbf_operator_3d(&s.nodes, &s.kernel, eval, partial);
    let coeffs = DMatrix::from_columns(&[
        DVector::from_column_slice(&s.coeffs_x),
        DVector::from_column_slice(&s.coeffs_y),
        DVector::from_column_slice(&s.coeffs_z),
    ]);
    let v = op.apply_columns(&coeffs);
    (0..v.nrows()).map(|i| Vector3::new(v[(i, 0)], v[(i, 1)], v[(i, 2)])).collect()
}

pub fn rbf_operator_3d(nodes: &NodeSet3D, kernel: &RadialKernel, eval: &NodeSet3D, partial: Partial) -> OperatorMatrix {
    let c = nodes.points();
    let e = eval.points();
    let matrix = DMatrix::from_fn(e.len(), c.len(), |i, k| sphere_terms(kernel, e[i], c[k])[partial.index()]);
    OperatorMatrix {
        matrix,
        basis: BasisTag::Rbf,
        partial,
        from_data: false,
    }
}

pub fn rbf_data_operator_3d(solver: &RbfSolver3D, eval: &NodeSet3D, partial: Partial) -> OperatorMatrix {
    let coeff = rbf_operator_3d(&solver.nodes, &solver.kernel, eval, partial);
    OperatorMatrix {
        matrix: coeff.matrix * solver.inverse(),
        from_data: true,
        ..coeff
    }
}
