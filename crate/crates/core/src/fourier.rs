//! Trigonometric interpolation on the circle and real spherical-harmonic
//! interpolation on the sphere, with analytic derivatives up to second order.

use std::collections::HashMap;
use std::f64::consts::PI;
use std::io::Write;
use std::sync::{Arc, Mutex};

use nalgebra::{DMatrix, DVector, Vector2, Vector3};
use rustfft::num_complex::Complex;
use rustfft::FftPlanner;

use crate::error::{Error, Result};
use crate::linalg::{Dense, Factorization, Lu, CONDITION_LIMIT};
use crate::points::{NodeSet2D, NodeSet3D};
use crate::shapes::Partial;

/// Which family of basis functions an [`OperatorMatrix`] was built from.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum BasisTag {
    Trig,
    SphericalHarmonic,
    Rbf,
}

/// Dense evaluation operator with `rows = eval points`.
///
/// `from_data` distinguishes operators acting on raw node data (the
/// interpolation solve folded in) from ones acting on coefficients.
#[derive(Debug, Clone)]
pub struct OperatorMatrix {
    pub matrix: DMatrix<f64>,
    pub basis: BasisTag,
    pub partial: Partial,
    pub from_data: bool,
}

impl OperatorMatrix {
    pub fn rows(&self) -> usize {
        self.matrix.nrows()
    }

    pub fn cols(&self) -> usize {
        self.matrix.ncols()
    }

    pub fn apply(&self, v: &[f64]) -> Result<Vec<f64>> {
        if v.len() != self.cols() {
            return Err(Error::LengthMismatch {
                expected: self.cols(),
                actual: v.len(),
            });
        }
        let out = &self.matrix * DVector::from_column_slice(v);
        Ok(out.as_slice().to_vec())
    }

    /// Apply to each coordinate of a point cloud stored column-wise.
    pub fn apply_columns(&self, cols: &DMatrix<f64>) -> DMatrix<f64> {
        &self.matrix * cols
    }
}

pub(crate) fn order_partial(order: usize) -> Result<Partial> {
    match order {
        0 => Ok(Partial::Val),
        1 => Ok(Partial::DLambda),
        2 => Ok(Partial::DLambdaLambda),
        _ => Err(Error::invalid(format!("derivative order must be 0, 1 or 2, got {order}"))),
    }
}

pub(crate) fn check_len(expected: usize, actual: usize) -> Result<()> {
    if expected != actual {
        return Err(Error::LengthMismatch { expected, actual });
    }
    Ok(())
}

/// Write `coordinate,index,value` rows for each coordinate's coefficients.
pub fn write_coefficients_csv<W: Write>(out: &mut W, coords: &[(&str, &[f64])]) -> std::io::Result<()> {
    writeln!(out, "coordinate,index,value")?;
    for (name, c) in coords {
        for (i, v) in c.iter().enumerate() {
            writeln!(out, "{name},{i},{v:e}")?;
        }
    }
    Ok(())
}

// ---------------------------------------------------------------------------
// Circle

/// `p(λ) = c₀ + Σ_{k=1}^{n/2} c_{2k−1} cos kλ + Σ_{k=1}^{n/2−1} c_{2k} sin kλ`
/// for each coordinate.
#[derive(Debug, Clone, PartialEq)]
pub struct TrigInterpolant {
    pub n: usize,
    pub coeffs_x: Vec<f64>,
    pub coeffs_y: Vec<f64>,
}

impl TrigInterpolant {
    pub fn eval(&self, lambda: f64, order: usize) -> Result<Vector2<f64>> {
        order_partial(order)?;
        let row = trig_basis(lambda, self.n, order);
        Ok(Vector2::new(dot(&row, &self.coeffs_x), dot(&row, &self.coeffs_y)))
    }

    pub fn write_csv<W: Write>(&self, out: &mut W) -> std::io::Result<()> {
        write_coefficients_csv(out, &[("x", &self.coeffs_x), ("y", &self.coeffs_y)])
    }
}

fn dot(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| x * y).sum()
}

/// Row of the `order`-th λ-derivative of all `n` trigonometric basis functions.
/// Orders above 2 are not checked here.
pub fn trig_basis(lambda: f64, n: usize, order: usize) -> Vec<f64> {
    let mut row = vec![0.0; n];
    if n == 0 {
        return row;
    }
    if order == 0 {
        row[0] = 1.0;
    }
    for k in 1..=n / 2 {
        let kf = k as f64;
        let (s, c) = (kf * lambda).sin_cos();
        let (vc, vs) = match order {
            0 => (c, s),
            1 => (-kf * s, kf * c),
            _ => (-kf * kf * c, -kf * kf * s),
        };
        row[2 * k - 1] = vc;
        if 2 * k < n {
            row[2 * k] = vs;
        }
    }
    row
}

fn check_trig_nodes(nodes: &NodeSet2D) -> Result<usize> {
    let n = nodes.len();
    if n < 2 || n % 2 != 0 {
        return Err(Error::invalid(format!(
            "trigonometric interpolation needs an even node count, got {n}"
        )));
    }
    Ok(n)
}

/// Fit both coordinates. Equispaced node sets use the FFT; anything else
/// goes through [`trig_fit_dense`].
pub fn trig_fit(nodes: &NodeSet2D, data_x: &[f64], data_y: &[f64]) -> Result<TrigInterpolant> {
    let n = check_trig_nodes(nodes)?;
    check_len(n, data_x.len())?;
    check_len(n, data_y.len())?;
    if !nodes.is_equispaced() {
        return trig_fit_dense(nodes, data_x, data_y);
    }
    let mut planner = FftPlanner::new();
    let fft = planner.plan_fft_forward(n);
    Ok(TrigInterpolant {
        n,
        coeffs_x: trig_coeffs_fft(fft.as_ref(), data_x),
        coeffs_y: trig_coeffs_fft(fft.as_ref(), data_y),
    })
}

fn trig_coeffs_fft(fft: &dyn rustfft::Fft<f64>, data: &[f64]) -> Vec<f64> {
    let n = data.len();
    let mut buf: Vec<Complex<f64>> = data.iter().map(|&v| Complex::new(v, 0.0)).collect();
    fft.process(&mut buf);
    let nf = n as f64;
    let mut c = vec![0.0; n];
    c[0] = buf[0].re / nf;
    for (j, b) in buf.iter().enumerate().take(n / 2 + 1).skip(1) {
        // Nodes start at −π + 2π/n rather than 0.
        let phase = PI * j as f64 - 2.0 * PI * j as f64 / nf;
        let g = b * Complex::from_polar(1.0, phase);
        if j < n / 2 {
            c[2 * j - 1] = 2.0 * g.re / nf;
            c[2 * j] = -2.0 * g.im / nf;
        } else {
            c[2 * j - 1] = g.re / nf;
        }
    }
    c
}

/// Reference path: LU solve of the full interpolation system.
pub fn trig_fit_dense(nodes: &NodeSet2D, data_x: &[f64], data_y: &[f64]) -> Result<TrigInterpolant> {
    let n = check_trig_nodes(nodes)?;
    check_len(n, data_x.len())?;
    check_len(n, data_y.len())?;
    let rows: Vec<Vec<f64>> = nodes.angles().iter().map(|&l| trig_basis(l, n, 0)).collect();
    let lu = Lu::factor(Dense::from_fn(n, |i, j| rows[i][j]))?;
    let cond = lu.condition_estimate();
    if !(cond <= CONDITION_LIMIT) {
        return Err(Error::IllConditioned {
            condition: cond,
            advice: "trigonometric interpolation nodes are too clustered".into(),
        });
    }
    Ok(TrigInterpolant {
        n,
        coeffs_x: lu.solve(data_x),
        coeffs_y: lu.solve(data_y),
    })
}

pub fn trig_eval(p: &TrigInterpolant, eval: &NodeSet2D, order: usize) -> Result<Vec<Vector2<f64>>> {
    order_partial(order)?;
    eval.angles().iter().map(|&l| p.eval(l, order)).collect()
}

/// Coefficients → values of the `order`-th derivative at `eval`.
pub fn trig_operator(n: usize, eval: &NodeSet2D, order: usize) -> Result<OperatorMatrix> {
    let partial = order_partial(order)?;
    let m = eval.len();
    let mut matrix = DMatrix::zeros(m, n);
    for (i, &l) in eval.angles().iter().enumerate() {
        for (j, v) in trig_basis(l, n, order).into_iter().enumerate() {
            matrix[(i, j)] = v;
        }
    }
    Ok(OperatorMatrix {
        matrix,
        basis: BasisTag::Trig,
        partial,
        from_data: false,
    })
}

/// Node data → values of the `order`-th derivative at `eval` (fit folded in).
pub fn trig_data_operator(nodes: &NodeSet2D, eval: &NodeSet2D, order: usize) -> Result<OperatorMatrix> {
    let n = check_trig_nodes(nodes)?;
    let coeff_op = trig_operator(n, eval, order)?;
    // Columns of the inverse interpolation matrix are the fits of unit data.
    let mut inverse = DMatrix::zeros(n, n);
    let zeros = vec![0.0; n];
    for j in 0..n {
        let mut e = vec![0.0; n];
        e[j] = 1.0;
        let p = trig_fit(nodes, &e, &zeros)?;
        for i in 0..n {
            inverse[(i, j)] = p.coeffs_x[i];
        }
    }
    Ok(OperatorMatrix {
        matrix: coeff_op.matrix * inverse,
        basis: BasisTag::Trig,
        partial: coeff_op.partial,
        from_data: true,
    })
}

/// Trigonometric interpolation from `n` to `m ≥ n` equispaced points by
/// spectral zero padding, for the value and the first two derivatives.
///
/// Both coordinates travel together as `x + iy`, so one step costs a forward
/// transform of length `n` and three inverse transforms of length `m`. Plans
/// and buffers are allocated once; [`TrigResampler::apply`] does not allocate.
pub struct TrigResampler {
    n: usize,
    m: usize,
    forward: Arc<dyn rustfft::Fft<f64>>,
    inverse: Arc<dyn rustfft::Fft<f64>>,
    data: Vec<Complex<f64>>,
    out: [Vec<Complex<f64>>; 3],
    scratch: Vec<Complex<f64>>,
}

impl TrigResampler {
    /// Node and site sets are those of [`crate::points::equispaced_circle`].
    pub fn new(n: usize, m: usize) -> Result<Self> {
        if n < 2 || n % 2 != 0 || m < n {
            return Err(Error::invalid(format!(
                "spectral resampling needs an even n <= m, got n={n}, m={m}"
            )));
        }
        let mut planner = FftPlanner::new();
        let forward = planner.plan_fft_forward(n);
        let inverse = planner.plan_fft_inverse(m);
        let scratch_len = forward.get_inplace_scratch_len().max(inverse.get_inplace_scratch_len());
        let zero = Complex::new(0.0, 0.0);
        Ok(TrigResampler {
            n,
            m,
            forward,
            inverse,
            data: vec![zero; n],
            out: std::array::from_fn(|_| vec![zero; m]),
            scratch: vec![zero; scratch_len],
        })
    }

    pub fn apply(&mut self, data_x: &[f64], data_y: &[f64]) -> Result<()> {
        let (n, m) = (self.n, self.m);
        check_len(n, data_x.len())?;
        check_len(n, data_y.len())?;
        // Node k sits at −π + 2π(k+1)/n; rotate so index 0 is at −π.
        for k in 0..n {
            self.data[(k + 1) % n] = Complex::new(data_x[k], data_y[k]);
        }
        self.forward.process_with_scratch(&mut self.data, &mut self.scratch);
        let scale = 1.0 / n as f64;
        let half = n / 2;
        for (order, out) in self.out.iter_mut().enumerate() {
            out.fill(Complex::new(0.0, 0.0));
            let mut put = |freq: isize, c: Complex<f64>| {
                let f = freq as f64;
                let d = match order {
                    0 => c,
                    1 => c * Complex::new(0.0, f),
                    _ => c * -(f * f),
                };
                out[freq.rem_euclid(m as isize) as usize] += d;
            };
            for j in 0..n {
                let c = self.data[j] * scale;
                if j < half {
                    put(j as isize, c);
                } else if j > half {
                    put(j as isize - n as isize, c);
                } else {
                    // The Nyquist cosine splits evenly between ±n/2.
                    put(half as isize, c * 0.5);
                    put(-(half as isize), c * 0.5);
                }
            }
            self.inverse.process_with_scratch(out, &mut self.scratch);
        }
        Ok(())
    }

    /// `order`-th derivative at site `i` from the last [`TrigResampler::apply`].
    pub fn value(&self, order: usize, i: usize) -> Vector2<f64> {
        let z = self.out[order][(i + 1) % self.m];
        Vector2::new(z.re, z.im)
    }
}

// ---------------------------------------------------------------------------
// Sphere

/// Column of `Y_ℓ^j` in the coefficient vector: `ℓ² + j`, where `j = 0` is the
/// zonal term, `j = 2m − 1` the `sin mλ` term and `j = 2m` the `cos mλ` term.
pub fn sph_index(l: usize, j: usize) -> usize {
    l * l + j
}

pub fn sph_basis_len(degree: usize) -> usize {
    (degree + 1) * (degree + 1)
}

/// Scaled associated Legendre functions
/// `√((2ℓ+1)/4π · (ℓ−m)!/(ℓ+m)!) P_ℓ^m(sin θ)` (Condon–Shortley phase) and their
/// first two θ-derivatives, packed at `ℓ(ℓ+1)/2 + m`.
#[derive(Debug, Clone)]
pub struct LegendreTable {
    pub degree: usize,
    pub p: Vec<f64>,
    pub dp: Vec<f64>,
    pub d2p: Vec<f64>,
}

impl LegendreTable {
    pub fn index(l: usize, m: usize) -> usize {
        l * (l + 1) / 2 + m
    }

    /// Recurrences run on `(x, u) = (sin θ, cos θ)` and are differentiated
    /// term by term, so nothing divides by `cos θ` at the poles.
    pub fn new(theta: f64, degree: usize) -> Self {
        let size = (degree + 1) * (degree + 2) / 2;
        let mut p = vec![0.0; size];
        let mut dp = vec![0.0; size];
        let mut d2p = vec![0.0; size];
        let (x, u) = theta.sin_cos();
        let idx = Self::index;

        p[0] = 0.5 / PI.sqrt();
        for m in 1..=degree {
            let s = -((2 * m + 1) as f64 / (2 * m) as f64).sqrt();
            let (q, dq, d2q) = (p[idx(m - 1, m - 1)], dp[idx(m - 1, m - 1)], d2p[idx(m - 1, m - 1)]);
            let k = idx(m, m);
            p[k] = s * u * q;
            dp[k] = s * (-x * q + u * dq);
            d2p[k] = s * (-u * q - 2.0 * x * dq + u * d2q);
        }
        for m in 0..degree {
            let s = ((2 * m + 3) as f64).sqrt();
            let (q, dq, d2q) = (p[idx(m, m)], dp[idx(m, m)], d2p[idx(m, m)]);
            let k = idx(m + 1, m);
            p[k] = s * x * q;
            dp[k] = s * (u * q + x * dq);
            d2p[k] = s * (-x * q + 2.0 * u * dq + x * d2q);
        }
        for m in 0..=degree {
            for l in (m + 2)..=degree {
                let lf = l as f64;
                let mf = m as f64;
                let a = ((4.0 * lf * lf - 1.0) / (lf * lf - mf * mf)).sqrt();
                let b = (((lf - 1.0) * (lf - 1.0) - mf * mf) / (4.0 * (lf - 1.0) * (lf - 1.0) - 1.0)).sqrt();
                let (i1, i2) = (idx(l - 1, m), idx(l - 2, m));
                let k = idx(l, m);
                p[k] = a * (x * p[i1] - b * p[i2]);
                dp[k] = a * (u * p[i1] + x * dp[i1] - b * dp[i2]);
                d2p[k] = a * (-x * p[i1] + 2.0 * u * dp[i1] + x * d2p[i1] - b * d2p[i2]);
            }
        }
        LegendreTable { degree, p, dp, d2p }
    }
}

/// All six partial rows at one point, indexed by [`Partial::index`].
pub fn sph_basis_all(lambda: f64, theta: f64, degree: usize) -> [Vec<f64>; 6] {
    let len = sph_basis_len(degree);
    let mut rows: [Vec<f64>; 6] = std::array::from_fn(|_| vec![0.0; len]);
    let leg = LegendreTable::new(theta, degree);
    for m in 0..=degree {
        let mf = m as f64;
        let (s, c) = (mf * lambda).sin_cos();
        // (T, T', T'') for the cosine and sine factors.
        let cos_t = [c, -mf * s, -mf * mf * c];
        let sin_t = [s, mf * c, -mf * mf * s];
        for l in m..=degree {
            let k = LegendreTable::index(l, m);
            let pl = [leg.p[k], leg.dp[k], leg.d2p[k]];
            let mut put = |col: usize, t: &[f64; 3]| {
                rows[0][col] = t[0] * pl[0];
                rows[1][col] = t[1] * pl[0];
                rows[2][col] = t[0] * pl[1];
                rows[3][col] = t[2] * pl[0];
                rows[4][col] = t[1] * pl[1];
                rows[5][col] = t[0] * pl[2];
            };
            if m == 0 {
                put(sph_index(l, 0), &cos_t);
            } else {
                put(sph_index(l, 2 * m), &cos_t);
                put(sph_index(l, 2 * m - 1), &sin_t);
            }
        }
    }
    rows
}

pub fn sph_basis_row(lambda: f64, theta: f64, degree: usize, partial: Partial) -> Vec<f64> {
    let [r0, r1, r2, r3, r4, r5] = sph_basis_all(lambda, theta, degree);
    match partial {
        Partial::Val => r0,
        Partial::DLambda => r1,
        Partial::DTheta => r2,
        Partial::DLambdaLambda => r3,
        Partial::DLambdaTheta => r4,
        Partial::DThetaTheta => r5,
    }
}

/// Degree `M` with `(M+1)² = n`, if any.
pub fn sph_degree_for(n: usize) -> Option<usize> {
    let r = (n as f64).sqrt().round() as usize;
    (r >= 1 && r * r == n).then(|| r - 1)
}

#[derive(Debug, Clone, PartialEq)]
pub struct SphInterpolant {
    pub degree: usize,
    pub coeffs_x: Vec<f64>,
    pub coeffs_y: Vec<f64>,
    pub coeffs_z: Vec<f64>,
    /// Fingerprint of the node set the interpolant was fitted on.
    pub nodes: u64,
}

impl SphInterpolant {
    pub fn eval(&self, lambda: f64, theta: f64, partial: Partial) -> Vector3<f64> {
        let row = sph_basis_row(lambda, theta, self.degree, partial);
        Vector3::new(
            dot(&row, &self.coeffs_x),
            dot(&row, &self.coeffs_y),
            dot(&row, &self.coeffs_z),
        )
    }

    pub fn write_csv<W: Write>(&self, out: &mut W) -> std::io::Result<()> {
        write_coefficients_csv(
            out,
            &[("x", &self.coeffs_x), ("y", &self.coeffs_y), ("z", &self.coeffs_z)],
        )
    }
}

/// LU factorization of the spherical-harmonic interpolation matrix for one
/// node set, reusable across right-hand sides.
#[derive(Debug, Clone)]
pub struct SphSolver {
    degree: usize,
    fingerprint: u64,
    lu: Lu,
    condition: f64,
}

impl SphSolver {
    pub fn new(nodes: &NodeSet3D, degree: usize) -> Result<Self> {
        let n = sph_basis_len(degree);
        if nodes.len() != n {
            return Err(Error::invalid(format!(
                "degree {degree} needs {n} nodes, got {}",
                nodes.len()
            )));
        }
        let rows: Vec<Vec<f64>> = nodes
            .points()
            .iter()
            .map(|p| sph_basis_row(p.lambda, p.theta, degree, Partial::Val))
            .collect();
        let advice = "use maximal determinant nodes for spherical harmonic interpolation";
        let lu = Lu::factor(Dense::from_fn(n, |i, j| rows[i][j])).map_err(|e| match e {
            Error::IllConditioned { condition, .. } => Error::IllConditioned {
                condition,
                advice: advice.into(),
            },
            other => other,
        })?;
        let condition = lu.condition_estimate();
        log::debug!("spherical harmonic system, degree {degree}: condition estimate {condition:.3e}");
        if !(condition <= CONDITION_LIMIT) {
            return Err(Error::IllConditioned {
                condition,
                advice: advice.into(),
            });
        }
        Ok(SphSolver {
            degree,
            fingerprint: nodes.fingerprint(),
            lu,
            condition,
        })
    }

    pub fn degree(&self) -> usize {
        self.degree
    }

    pub fn condition(&self) -> f64 {
        self.condition
    }

    pub fn fingerprint(&self) -> u64 {
        self.fingerprint
    }

    pub fn fit(&self, data_x: &[f64], data_y: &[f64], data_z: &[f64]) -> Result<SphInterpolant> {
        let n = self.lu.dim();
        check_len(n, data_x.len())?;
        check_len(n, data_y.len())?;
        check_len(n, data_z.len())?;
        Ok(SphInterpolant {
            degree: self.degree,
            coeffs_x: self.lu.solve(data_x),
            coeffs_y: self.lu.solve(data_y),
            coeffs_z: self.lu.solve(data_z),
            nodes: self.fingerprint,
        })
    }

    /// Dense inverse of the interpolation matrix, column by column.
    pub fn inverse(&self) -> DMatrix<f64> {
        let n = self.lu.dim();
        let mut inv = DMatrix::zeros(n, n);
        for j in 0..n {
            let mut e = vec![0.0; n];
            e[j] = 1.0;
            for (i, v) in self.lu.solve(&e).into_iter().enumerate() {
                inv[(i, j)] = v;
            }
        }
        inv
    }
}

/// Shares factorizations between fits on the same node set and degree.
#[derive(Debug, Default)]
pub struct SphSolverCache {
    solvers: Mutex<HashMap<(u64, usize), Arc<SphSolver>>>,
}

impl SphSolverCache {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn get(&self, nodes: &NodeSet3D, degree: usize) -> Result<Arc<SphSolver>> {
        let key = (nodes.fingerprint(), degree);
        if let Some(s) = self.solvers.lock().expect("solver cache poisoned").get(&key) {
            return Ok(Arc::clone(s));
        }
        let solver = Arc::new(SphSolver::new(nodes, degree)?);
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

pub fn sph_fit(
    nodes: &NodeSet3D,
    data_x: &[f64],
    data_y: &[f64],
    data_z: &[f64],
    degree: usize,
) -> Result<SphInterpolant> {
    SphSolver::new(nodes, degree)?.fit(data_x, data_y, data_z)
}

pub fn sph_eval(p: &SphInterpolant, eval: &NodeSet3D, partial: Partial) -> Vec<Vector3<f64>> {
    let op = sph_operator(p.degree, eval, partial);
    let coeffs = DMatrix::from_columns(&[
        DVector::from_column_slice(&p.coeffs_x),
        DVector::from_column_slice(&p.coeffs_y),
        DVector::from_column_slice(&p.coeffs_z),
    ]);
    let v = op.apply_columns(&coeffs);
    (0..v.nrows()).map(|i| Vector3::new(v[(i, 0)], v[(i, 1)], v[(i, 2)])).collect()
}

/// Coefficients → values of `partial` at `eval`.
pub fn sph_operator(degree: usize, eval: &NodeSet3D, partial: Partial) -> OperatorMatrix {
    let len = sph_basis_len(degree);
    let mut matrix = DMatrix::zeros(eval.len(), len);
    for (i, p) in eval.points().iter().enumerate() {
        for (j, v) in sph_basis_row(p.lambda, p.theta, degree, partial).into_iter().enumerate() {
            matrix[(i, j)] = v;
        }
    }
    OperatorMatrix {
        matrix,
        basis: BasisTag::SphericalHarmonic,
        partial,
        from_data: false,
    }
}

/// Node data → values of `partial` at `eval`.
pub fn sph_data_operator(solver: &SphSolver, eval: &NodeSet3D, partial: Partial) -> OperatorMatrix {
    let coeff = sph_operator(solver.degree, eval, partial);
    OperatorMatrix {
        matrix: coeff.matrix * solver.inverse(),
        from_data: true,
        ..coeff
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::points::{equispaced_circle, fibonacci_sphere, PointKind, SpherePoint};
    use crate::shapes::TestObject2D;

    fn circle_data(nodes: &NodeSet2D) -> (Vec<f64>, Vec<f64>) {
        nodes.angles().iter().map(|l| (l.cos(), l.sin())).unzip()
    }

    #[test]
    fn pure_modes() {
        let nodes = equispaced_circle(8).unwrap();
        let (x, y) = circle_data(&nodes);
        let p = trig_fit(&nodes, &x, &y).unwrap();
        for i in 0..8 {
            let ex = if i == 1 { 1.0 } else { 0.0 };
            let ey = if i == 2 { 1.0 } else { 0.0 };
            assert!((p.coeffs_x[i] - ex).abs() < 1e-12, "{:?}", p.coeffs_x);
            assert!((p.coeffs_y[i] - ey).abs() < 1e-12, "{:?}", p.coeffs_y);
        }
        let c = vec![2.5; 8];
        let q = trig_fit(&nodes, &c, &c).unwrap();
        assert!((q.coeffs_x[0] - 2.5).abs() < 1e-14);
        assert!(q.coeffs_x[1..].iter().all(|v| v.abs() < 1e-14));
    }

    #[test]
    fn fft_matches_dense() {
        let obj = TestObject2D::object1();
        for n in [8, 24, 56] {
            let nodes = equispaced_circle(n).unwrap();
            let (x, y): (Vec<f64>, Vec<f64>) =
                nodes.angles().iter().map(|&l| (obj.eval(l).x, obj.eval(l).y)).unzip();
            let a = trig_fit(&nodes, &x, &y).unwrap();
            let b = trig_fit_dense(&nodes, &x, &y).unwrap();
            for i in 0..n {
                assert!((a.coeffs_x[i] - b.coeffs_x[i]).abs() < 1e-12);
                assert!((a.coeffs_y[i] - b.coeffs_y[i]).abs() < 1e-12);
            }
            for (k, &l) in nodes.angles().iter().enumerate() {
                let v = a.eval(l, 0).unwrap();
                assert!((v.x - x[k]).abs() < 1e-12 && (v.y - y[k]).abs() < 1e-12);
            }
        }
    }

    #[test]
    fn nyquist_cosine_is_recovered() {
        let nodes = equispaced_circle(10).unwrap();
        let x: Vec<f64> = nodes.angles().iter().map(|l| (5.0 * l).cos()).collect();
        let p = trig_fit(&nodes, &x, &x).unwrap();
        assert!((p.coeffs_x[9] - 1.0).abs() < 1e-13);
    }

    #[test]
    fn second_derivative_of_circle() {
        let nodes = equispaced_circle(8).unwrap();
        let (x, y) = circle_data(&nodes);
        let p = trig_fit(&nodes, &x, &y).unwrap();
        let eval = equispaced_circle(30).unwrap();
        for (l, v) in eval.angles().iter().zip(trig_eval(&p, &eval, 2).unwrap()) {
            assert!((v - Vector2::new(-l.cos(), -l.sin())).norm() < 1e-12);
        }
        assert!(matches!(trig_eval(&p, &eval, 3), Err(Error::InvalidArgument(_))));
    }

    #[test]
    fn general_nodes_take_dense_path() {
        let nodes = NodeSet2D::new(vec![-2.9, -2.0, -0.7, 0.1, 1.3, 2.2]).unwrap();
        let f = |l: f64| 0.3 + (2.0 * l).sin() - 0.5 * l.cos();
        let x: Vec<f64> = nodes.angles().iter().map(|&l| f(l)).collect();
        let p = trig_fit(&nodes, &x, &x).unwrap();
        assert!((p.eval(0.77, 0).unwrap().x - f(0.77)).abs() < 1e-12);
    }

    #[test]
    fn data_operator_reproduces_fit() {
        let nodes = equispaced_circle(12).unwrap();
        let eval = equispaced_circle(20).unwrap();
        let x: Vec<f64> = nodes.angles().iter().map(|l| (l.sin() * 2.0).exp()).collect();
        let p = trig_fit(&nodes, &x, &x).unwrap();
        let op = trig_data_operator(&nodes, &eval, 1).unwrap();
        let direct = trig_eval(&p, &eval, 1).unwrap();
        for (a, b) in op.apply(&x).unwrap().iter().zip(&direct) {
            assert!((a - b.x).abs() < 1e-11);
        }
    }

    #[test]
    fn resampler_matches_interpolant() {
        let obj = TestObject2D::object1();
        for (n, m) in [(8, 8), (24, 100), (56, 100), (56, 112)] {
            let nodes = equispaced_circle(n).unwrap();
            let sites = equispaced_circle(m).unwrap();
            let (x, y): (Vec<f64>, Vec<f64>) = nodes.angles().iter().map(|&l| obj.eval(l)).map(|p| (p.x, p.y)).unzip();
            let p = trig_fit(&nodes, &x, &y).unwrap();
            let mut r = TrigResampler::new(n, m).unwrap();
            r.apply(&x, &y).unwrap();
            for order in 0..3 {
                for (i, &l) in sites.angles().iter().enumerate() {
                    let want = p.eval(l, order).unwrap();
                    assert!((r.value(order, i) - want).norm() <= 1e-12 * (1.0 + want.norm()), "n={n} m={m}");
                }
            }
        }
        assert!(TrigResampler::new(56, 24).is_err());
    }

    #[test]
    fn low_degree_harmonics() {
        let y00 = 0.5 / PI.sqrt();
        for &(l, t) in &[(0.0, 0.0), (1.2, -0.4), (-3.0, 1.5)] {
            assert!((sph_basis_row(l, t, 0, Partial::Val)[0] - y00).abs() < 1e-15);
        }
        let c = (3.0 / (4.0 * PI)).sqrt();
        assert!((sph_basis_row(0.0, PI / 2.0, 1, Partial::Val)[1] - c).abs() < 1e-15);
        assert!((sph_basis_row(0.0, 0.0, 1, Partial::DTheta)[1] - c).abs() < 1e-15);
    }

    #[test]
    fn partials_match_differences() {
        let degree = 6;
        let (l, t) = (0.7, -0.35);
        let h = 1e-5;
        let f = |l: f64, t: f64, p| sph_basis_row(l, t, degree, p);
        let rows = sph_basis_all(l, t, degree);
        for j in 0..sph_basis_len(degree) {
            let fd_l = (f(l + h, t, Partial::Val)[j] - f(l - h, t, Partial::Val)[j]) / (2.0 * h);
            let fd_t = (f(l, t + h, Partial::Val)[j] - f(l, t - h, Partial::Val)[j]) / (2.0 * h);
            let fd_tt = (f(l, t + h, Partial::DTheta)[j] - f(l, t - h, Partial::DTheta)[j]) / (2.0 * h);
            let fd_lt = (f(l + h, t, Partial::DTheta)[j] - f(l - h, t, Partial::DTheta)[j]) / (2.0 * h);
            let fd_ll = (f(l + h, t, Partial::DLambda)[j] - f(l - h, t, Partial::DLambda)[j]) / (2.0 * h);
            assert!((rows[1][j] - fd_l).abs() < 1e-8);
            assert!((rows[2][j] - fd_t).abs() < 1e-8);
            assert!((rows[3][j] - fd_ll).abs() < 1e-7);
            assert!((rows[4][j] - fd_lt).abs() < 1e-7);
            assert!((rows[5][j] - fd_tt).abs() < 1e-7);
        }
    }

    #[test]
    fn pole_values_are_finite() {
        for t in [PI / 2.0, -PI / 2.0] {
            for row in sph_basis_all(0.4, t, 10) {
                assert!(row.iter().all(|v| v.is_finite()));
            }
        }
    }

    fn tetrahedron() -> NodeSet3D {
        let v = [
            Vector3::new(1.0, 1.0, 1.0),
            Vector3::new(1.0, -1.0, -1.0),
            Vector3::new(-1.0, 1.0, -1.0),
            Vector3::new(-1.0, -1.0, 1.0),
        ];
        let pts = v.iter().map(|p| SpherePoint::from_vector(&p.normalize())).collect();
        NodeSet3D::new(pts, PointKind::Loaded).unwrap()
    }

    #[test]
    fn sphere_is_reproduced_at_degree_one() {
        let nodes = tetrahedron();
        let u = nodes.unit_vectors();
        let x: Vec<f64> = u.iter().map(|v| v.x).collect();
        let y: Vec<f64> = u.iter().map(|v| v.y).collect();
        let z: Vec<f64> = u.iter().map(|v| v.z).collect();
        let p = sph_fit(&nodes, &x, &y, &z, 1).unwrap();
        let eval = fibonacci_sphere(50).unwrap();
        for (pt, v) in eval.points().iter().zip(sph_eval(&p, &eval, Partial::Val)) {
            assert!((v - pt.unit_vector()).norm() < 1e-10);
        }
        let origin = NodeSet3D::new(vec![SpherePoint::new(0.0, 0.0)], PointKind::Loaded).unwrap();
        let d = sph_eval(&p, &origin, Partial::DLambda)[0];
        assert!((d - Vector3::new(0.0, 1.0, 0.0)).norm() < 1e-10);
    }

    #[test]
    fn near_duplicate_nodes_are_refused() {
        let mut pts = tetrahedron().points().to_vec();
        pts[3] = SpherePoint::new(pts[0].lambda + 1e-13, pts[0].theta);
        let nodes = NodeSet3D::new(pts, PointKind::Loaded).unwrap();
        let e = SphSolver::new(&nodes, 1).unwrap_err();
        assert!(matches!(e, Error::IllConditioned { .. }), "{e}");
        assert!(e.to_string().contains("maximal determinant"));
    }

    #[test]
    fn cache_reuses_solver() {
        let cache = SphSolverCache::new();
        let nodes = tetrahedron();
        let a = cache.get(&nodes, 1).unwrap();
        let b = cache.get(&nodes, 1).unwrap();
        assert!(Arc::ptr_eq(&a, &b));
        assert_eq!(cache.len(), 1);
    }

    #[test]
    fn degree_for_counts() {
        assert_eq!(sph_degree_for(256), Some(15));
        assert_eq!(sph_degree_for(529), Some(22));
        assert_eq!(sph_degree_for(100), Some(9));
        assert_eq!(sph_degree_for(99), None);
    }

    #[test]
    fn coefficient_csv_layout() {
        let p = TrigInterpolant {
            n: 2,
            coeffs_x: vec![1.0, 0.5],
            coeffs_y: vec![0.0, -2.0],
        };
        let mut buf = Vec::new();
        p.write_csv(&mut buf).unwrap();
        let s = String::from_utf8(buf).unwrap();
        let lines: Vec<&str> = s.lines().collect();
        assert_eq!(lines[0], "coordinate,index,value");
        assert_eq!(lines.len(), 5);
        assert!(lines[4].starts_with("y,1,"));
    }
}
