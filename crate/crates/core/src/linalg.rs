//! Small dense factorizations used by the interpolation solvers.
//!
//! Both factorizations keep the original matrix 1-norm so that a Hager/Higham
//! style 1-norm condition estimate can be produced without forming the inverse.

use crate::error::{Error, Result};

/// Refuse interpolation systems whose condition estimate exceeds this.
pub const CONDITION_LIMIT: f64 = 1e12;

/// Square row-major matrix.
#[derive(Debug, Clone, PartialEq)]
pub struct Dense {
    n: usize,
    data: Vec<f64>,
}

impl Dense {
    pub fn zeros(n: usize) -> Self {
        Dense {
            n,
            data: vec![0.0; n * n],
        }
    }

    pub fn from_fn(n: usize, mut f: impl FnMut(usize, usize) -> f64) -> Self {
        let mut data = Vec::with_capacity(n * n);
        for i in 0..n {
            for j in 0..n {
                data.push(f(i, j));
            }
        }
        Dense { n, data }
    }

    pub fn dim(&self) -> usize {
        self.n
    }

    #[inline]
    pub fn get(&self, i: usize, j: usize) -> f64 {
        self.data[i * self.n + j]
    }

    #[inline]
    pub fn set(&mut self, i: usize, j: usize, v: f64) {
        self.data[i * self.n + j] = v;
    }

    pub fn norm1(&self) -> f64 {
        (0..self.n)
            .map(|j| (0..self.n).map(|i| self.get(i, j).abs()).sum::<f64>())
            .fold(0.0, f64::max)
    }

    pub fn mul_vec(&self, x: &[f64]) -> Vec<f64> {
        self.data
            .chunks_exact(self.n)
            .map(|row| row.iter().zip(x).map(|(a, b)| a * b).sum())
            .collect()
    }

    /// Largest absolute asymmetry `max |A_ij - A_ji|`.
    pub fn asymmetry(&self) -> f64 {
        let mut worst: f64 = 0.0;
        for i in 0..self.n {
            for j in 0..i {
                worst = worst.max((self.get(i, j) - self.get(j, i)).abs());
            }
        }
        worst
    }
}

/// Anything that can solve `A x = b` and `Aᵀ x = b` from a stored factorization.
pub trait Factorization {
    fn dim(&self) -> usize;
    fn solve(&self, b: &[f64]) -> Vec<f64>;
    fn solve_transpose(&self, b: &[f64]) -> Vec<f64>;
    /// 1-norm of the factored matrix.
    fn matrix_norm1(&self) -> f64;

    /// Estimate of `‖A‖₁ ‖A⁻¹‖₁`.
    fn condition_estimate(&self) -> f64 {
        self.matrix_norm1() * inverse_norm1_estimate(self)
    }
}

/// Hager's iteration with Higham's alternative starting vector as a safeguard.
fn inverse_norm1_estimate<F: Factorization + ?Sized>(fact: &F) -> f64 {
    let n = fact.dim();
    if n == 0 {
        return 0.0;
    }
    let mut x = vec![1.0 / n as f64; n];
    let mut est = 0.0;
    let mut last_j = usize::MAX;
    for _ in 0..5 {
        let y = fact.solve(&x);
        let norm_y: f64 = y.iter().map(|v| v.abs()).sum();
        if !norm_y.is_finite() {
            return f64::INFINITY;
        }
        est = f64::max(est, norm_y);
        let signs: Vec<f64> = y.iter().map(|v| if *v >= 0.0 { 1.0 } else { -1.0 }).collect();
        let z = fact.solve_transpose(&signs);
        let (j, zj) = z
            .iter()
            .enumerate()
            .fold((0, f64::NEG_INFINITY), |acc, (i, v)| {
                if v.abs() > acc.1 {
                    (i, v.abs())
                } else {
                    acc
                }
            });
        let ztx: f64 = z.iter().zip(&x).map(|(a, b)| a * b).sum();
        if zj <= ztx || j == last_j {
            break;
        }
        last_j = j;
        x.iter_mut().for_each(|v| *v = 0.0);
        x[j] = 1.0;
    }
    let alt: Vec<f64> = (0..n)
        .map(|i| {
            let s = if i % 2 == 0 { 1.0 } else { -1.0 };
            let t = if n > 1 { i as f64 / (n - 1) as f64 } else { 0.0 };
            s * (1.0 + t)
        })
        .collect();
    let y = fact.solve(&alt);
    let alt_est = 2.0 * y.iter().map(|v| v.abs()).sum::<f64>() / (3.0 * n as f64);
    est.max(alt_est)
}

/// LU factorization with partial pivoting, `P A = L U`.
#[derive(Debug, Clone)]
pub struct Lu {
    lu: Dense,
    perm: Vec<usize>,
    norm1: f64,
}

impl Lu {
    /// Factor `a`. Fails with a condition estimate of infinity on an exactly
    /// (or numerically) zero pivot.
    pub fn factor(a: Dense) -> Result<Self> {
        let n = a.dim();
        let norm1 = a.norm1();
        let mut lu = a;
        let mut perm: Vec<usize> = (0..n).collect();
        let tiny = f64::EPSILON * norm1.max(f64::MIN_POSITIVE) * 1e-3;
        for k in 0..n {
            let (p, pmax) = (k..n)
                .map(|i| (i, lu.get(i, k).abs()))
                .fold((k, -1.0), |acc, v| if v.1 > acc.1 { v } else { acc });
            if !(pmax > tiny) {
                return Err(Error::IllConditioned {
                    condition: f64::INFINITY,
                    advice: format!("zero pivot in column {k}; the system is singular"),
                });
            }
            if p != k {
                for j in 0..n {
                    let t = lu.get(k, j);
                    lu.set(k, j, lu.get(p, j));
                    lu.set(p, j, t);
                }
                perm.swap(k, p);
            }
            let pivot = lu.get(k, k);
            for i in (k + 1)..n {
                let m = lu.get(i, k) / pivot;
                lu.set(i, k, m);
                if m != 0.0 {
                    let (top, bottom) = lu.data.split_at_mut(i * n);
                    let row_k = &top[k * n..k * n + n];
                    let row_i = &mut bottom[..n];
                    for j in (k + 1)..n {
                        row_i[j] -= m * row_k[j];
                    }
                }
            }
        }
        Ok(Lu { lu, perm, norm1 })
    }
}

impl Factorization for Lu {
    fn dim(&self) -> usize {
        self.lu.dim()
    }

    fn solve(&self, b: &[f64]) -> Vec<f64> {
        let n = self.dim();
        let mut x: Vec<f64> = self.perm.iter().map(|&p| b[p]).collect();
        for i in 0..n {
            let mut s = x[i];
            for j in 0..i {
                s -= self.lu.get(i, j) * x[j];
            }
            x[i] = s;
        }
        for i in (0..n).rev() {
            let mut s = x[i];
            for j in (i + 1)..n {
                s -= self.lu.get(i, j) * x[j];
            }
            x[i] = s / self.lu.get(i, i);
        }
        x
    }

    fn solve_transpose(&self, b: &[f64]) -> Vec<f64> {
        // Aᵀ = Uᵀ Lᵀ P, so solve Uᵀ w = b, Lᵀ v = w, x = Pᵀ v.
        let n = self.dim();
        let mut w = b.to_vec();
        for i in 0..n {
            let mut s = w[i];
            for j in 0..i {
                s -= self.lu.get(j, i) * w[j];
            }
            w[i] = s / self.lu.get(i, i);
        }
        for i in (0..n).rev() {
            let mut s = w[i];
            for j in (i + 1)..n {
                s -= self.lu.get(j, i) * w[j];
            }
            w[i] = s;
        }
        let mut x = vec![0.0; n];
        for (k, &p) in self.perm.iter().enumerate() {
            x[p] = w[k];
        }
        x
    }

    fn matrix_norm1(&self) -> f64 {
        self.norm1
    }
}

/// Cholesky factorization `A = L Lᵀ` of a symmetric positive-definite matrix.
#[derive(Debug, Clone)]
pub struct Cholesky {
    l: Dense,
    norm1: f64,
}

impl Cholesky {
    /// Returns `None` when `a` is not numerically positive definite.
    pub fn factor(a: &Dense) -> Option<Self> {
        let n = a.dim();
        let mut l = Dense::zeros(n);
        for j in 0..n {
            let mut d = a.get(j, j);
            for k in 0..j {
                d -= l.get(j, k) * l.get(j, k);
            }
            if !(d > 0.0) {
                return None;
            }
            let djj = d.sqrt();
            l.set(j, j, djj);
            for i in (j + 1)..n {
                let mut s = a.get(i, j);
                for k in 0..j {
                    s -= l.get(i, k) * l.get(j, k);
                }
                l.set(i, j, s / djj);
            }
        }
        Some(Cholesky {
            l,
            norm1: a.norm1(),
        })
    }
}

impl Factorization for Cholesky {
    fn dim(&self) -> usize {
        self.l.dim()
    }

    fn solve(&self, b: &[f64]) -> Vec<f64> {
        let n = self.dim();
        let mut y = b.to_vec();
        for i in 0..n {
            let mut s = y[i];
            for k in 0..i {
                s -= self.l.get(i, k) * y[k];
            }
            y[i] = s / self.l.get(i, i);
        }
        for i in (0..n).rev() {
            let mut s = y[i];
            for k in (i + 1)..n {
                s -= self.l.get(k, i) * y[k];
            }
            y[i] = s / self.l.get(i, i);
        }
        y
    }

    fn solve_transpose(&self, b: &[f64]) -> Vec<f64> {
        self.solve(b)
    }

    fn matrix_norm1(&self) -> f64 {
        self.norm1
    }
}

/// Exact 1-norm condition number via the explicit inverse. Test helper for
/// small systems.
pub fn condition_exact<F: Factorization>(fact: &F) -> f64 {
    let n = fact.dim();
    let mut inv_norm: f64 = 0.0;
    for j in 0..n {
        let mut e = vec![0.0; n];
        e[j] = 1.0;
        let col = fact.solve(&e);
        inv_norm = inv_norm.max(col.iter().map(|v| v.abs()).sum());
    }
    fact.matrix_norm1() * inv_norm
}
