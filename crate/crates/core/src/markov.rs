//! Inverse eigenvalue constructions: transition matrices with a prescribed
//! stationary distribution, and the asymptotic variance of time averages
//! along them.
//!
//! Two constructions are provided. The reversible one attains the smallest
//! possible second eigenvalue `-t1/(1-t1)` among reversible chains (`t1` the
//! smallest stationary mass); the irreversible one has a fundamental matrix
//! that acts as a scalar on mean-zero functions.

use nalgebra::{DMatrix, DVector, SymmetricEigen};
use serde::{Deserialize, Serialize};

use crate::aggregate::dense_stationary;
use crate::comparison::StochasticMatrix;
use crate::error::{check_len, Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum MatrixKind {
    Reversible,
    Irreversible,
}

/// How [`worst_case_variance`] evaluates the supremum.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum VarianceMethod {
    /// Eigen-decomposition of the symmetrized chain; valid for reversible `P`.
    Reversible,
    /// Closed form for matrices from [`irreversible_inverse_eigen`].
    Irreversible,
    /// Generalized symmetric eigenproblem; valid for any irreducible `P`.
    Generic,
}

impl From<MatrixKind> for VarianceMethod {
    fn from(k: MatrixKind) -> Self {
        match k {
            MatrixKind::Reversible => Self::Reversible,
            MatrixKind::Irreversible => Self::Irreversible,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct VarianceReport {
    pub value: f64,
    pub worst_case: f64,
    pub matrix_kind: VarianceMethod,
}

fn check_simplex(theta: &[f64]) -> Result<()> {
    if theta.len() < 2 {
        return Err(Error::InvalidScores(format!("need at least 2 states, got {}", theta.len())));
    }
    if theta.iter().any(|t| !(t.is_finite() && *t > 0.0)) {
        return Err(Error::InvalidScores("stationary masses must be positive".into()));
    }
    let s: f64 = theta.iter().sum();
    if (s - 1.0).abs() > 1e-9 {
        return Err(Error::InvalidScores(format!("stationary masses sum to {s}")));
    }
    Ok(())
}

/// Indices sorting `theta` ascending, ties by index.
fn ascending_order(theta: &[f64]) -> Vec<usize> {
    let mut order: Vec<usize> = (0..theta.len()).collect();
    order.sort_by(|&a, &b| theta[a].total_cmp(&theta[b]));
    order
}

/// Builds `P` in sorted coordinates via `build`, then maps it back.
fn in_sorted_order(theta: &[f64], build: impl FnOnce(&[f64]) -> DMatrix<f64>) -> Result<StochasticMatrix> {
    check_simplex(theta)?;
    let n = theta.len();
    let order = ascending_order(theta);
    let sorted: Vec<f64> = order.iter().map(|&k| theta[k]).collect();
    let ps = build(&sorted);
    let mut p = DMatrix::zeros(n, n);
    for a in 0..n {
        for b in 0..n {
            p[(order[a], order[b])] = ps[(a, b)];
        }
    }
    StochasticMatrix::new(p)?.with_stationary(theta.to_vec())
}

/// Reversible chain with stationary distribution `theta` and the smallest
/// attainable second eigenvalue.
pub fn reversible_inverse_eigen(theta: &[f64]) -> Result<StochasticMatrix> {
    in_sorted_order(theta, |t| {
        let n = t.len();
        let mut th = t.to_vec();
        let mut p = DMatrix::zeros(n, n);
        let mut mult = 1.0;
        for k in 0..n - 1 {
            let beta = 1.0 - th[k];
            let alpha = 1.0 - th[k] / beta;
            for j in k + 1..n {
                p[(k, j)] = mult * th[j] / beta;
                p[(j, k)] = mult * (1.0 - alpha);
            }
            mult *= alpha;
            for v in th.iter_mut() {
                *v /= beta;
            }
        }
        let off: f64 = (0..n - 1).map(|j| p[(n - 1, j)]).sum();
        p[(n - 1, n - 1)] = (1.0 - off).max(0.0);
        p
    })
}

/// Irreversible chain with stationary distribution `theta` whose
/// fundamental matrix is a multiple of the identity on mean-zero functions.
pub fn irreversible_inverse_eigen(theta: &[f64]) -> Result<StochasticMatrix> {
    in_sorted_order(theta, |t| {
        let n = t.len();
        let (t1, tn) = (t[0], t[n - 1]);
        // ratio[k] = (tn - t_k) / (t_k + tn)
        let ratio: Vec<f64> = t.iter().map(|&tk| (tn - tk) / (tk + tn)).collect();
        let mut p = DMatrix::zeros(n, n);
        for i in 0..n - 1 {
            p[(i, i)] = (t[i] - t1) / (t[i] + tn);
            let mut prod = 1.0;
            for j in i + 1..n - 1 {
                p[(i, j)] = 2.0 * t[j] * (t1 + tn) / ((t[i] + tn) * (t[j] + tn)) * prod;
                prod *= ratio[j];
            }
        }
        let mut prod = 1.0;
        for j in 0..n - 1 {
            p[(n - 1, j)] = t[j] * (t1 + tn) / (tn * (t[j] + tn)) * prod;
            prod *= ratio[j];
        }
        // The last column closes every row.
        for i in 0..n {
            let row: f64 = (0..n - 1).map(|j| p[(i, j)]).sum();
            p[(i, n - 1)] = (1.0 - row).max(0.0);
        }
        p
    })
}

pub fn inverse_eigen(theta: &[f64], kind: MatrixKind) -> Result<StochasticMatrix> {
    match kind {
        MatrixKind::Reversible => reversible_inverse_eigen(theta),
        MatrixKind::Irreversible => irreversible_inverse_eigen(theta),
    }
}

fn stationary_of(p: &StochasticMatrix) -> Result<Vec<f64>> {
    match p.stationary() {
        Some(t) => Ok(t.to_vec()),
        None => dense_stationary(p),
    }
}

/// `Z = (I - P + 1 theta^T)^{-1}`.
pub fn fundamental_matrix(p: &StochasticMatrix, theta: &[f64]) -> Result<DMatrix<f64>> {
    check_len(p.n(), theta.len())?;
    let n = p.n();
    let mut a = DMatrix::identity(n, n) - p.entries();
    for i in 0..n {
        for j in 0..n {
            a[(i, j)] += theta[j];
        }
    }
    a.try_inverse().ok_or(Error::SingularSystem)
}

fn inner(x: &[f64], y: &[f64], theta: &[f64]) -> f64 {
    x.iter().zip(y).zip(theta).map(|((a, b), t)| a * b * t).sum()
}

/// Second-largest eigenvalue of a reversible chain, via its symmetrization
/// `Theta^{1/2} P Theta^{-1/2}`.
pub fn second_eigenvalue(p: &StochasticMatrix) -> Result<f64> {
    let theta = stationary_of(p)?;
    let n = p.n();
    let s = DMatrix::from_fn(n, n, |i, j| {
        let a = p.entries()[(i, j)] * (theta[i] / theta[j]).sqrt();
        let b = p.entries()[(j, i)] * (theta[j] / theta[i]).sqrt();
        0.5 * (a + b)
    });
    let mut eig: Vec<f64> = SymmetricEigen::new(s).eigenvalues.iter().copied().collect();
    eig.sort_by(|a, b| b.total_cmp(a));
    Ok(eig[1])
}

/// Supremum of the asymptotic variance over mean-zero `f` with unit
/// `theta`-norm.
pub fn worst_case_variance(p: &StochasticMatrix, method: VarianceMethod) -> Result<f64> {
    match method {
        VarianceMethod::Reversible => {
            let l2 = second_eigenvalue(p)?;
            Ok((1.0 + l2) / (1.0 - l2))
        }
        VarianceMethod::Irreversible => {
            let theta = stationary_of(p)?;
            let lo = theta.iter().copied().fold(f64::INFINITY, f64::min);
            let hi = theta.iter().copied().fold(f64::NEG_INFINITY, f64::max);
            Ok((hi - lo) / (hi + lo))
        }
        VarianceMethod::Generic => {
            let theta = stationary_of(p)?;
            let z = fundamental_matrix(p, &theta)?;
            let n = p.n();
            let s = DVector::from_iterator(n, theta.iter().map(|t| t.sqrt()));
            // g = Theta^{1/2} f turns the theta-inner product into the
            // Euclidean one; the constraint becomes g orthogonal to s.
            let mut k = DMatrix::from_fn(n, n, |i, j| {
                let a = theta[i] * z[(i, j)] + theta[j] * z[(j, i)];
                0.5 * a / (s[i] * s[j])
            });
            let q = DMatrix::identity(n, n) - &s * s.transpose();
            k = &q * k * &q;
            let shift = 1.0 + k.amax() * n as f64;
            k -= &s * s.transpose() * shift;
            let top = SymmetricEigen::new(k).eigenvalues.max();
            Ok(2.0 * top - 1.0)
        }
    }
}

/// Asymptotic variance `2<Zf,f> - <f,f>` after centering `f` and scaling it
/// to unit `theta`-norm. A function that is constant on the chain has
/// variance zero.
pub fn asymptotic_variance(p: &StochasticMatrix, f: &[f64], method: VarianceMethod) -> Result<VarianceReport> {
    check_len(p.n(), f.len())?;
    let theta = stationary_of(p)?;
    let z = fundamental_matrix(p, &theta)?;
    let mean = inner(f, &vec![1.0; f.len()], &theta);
    let mut g: Vec<f64> = f.iter().map(|v| v - mean).collect();
    let norm2 = inner(&g, &g, &theta);
    let worst_case = worst_case_variance(p, method)?;
    let scale = f.iter().fold(0.0f64, |a, v| a.max(v.abs())).max(1e-300);
    if norm2.sqrt() <= 1e-14 * scale {
        return Ok(VarianceReport { value: 0.0, worst_case, matrix_kind: method });
    }
    let nrm = norm2.sqrt();
    g.iter_mut().for_each(|v| *v /= nrm);
    let zg: Vec<f64> = (&z * DVector::from_column_slice(&g)).iter().copied().collect();
    let value = 2.0 * inner(&zg, &g, &theta) - inner(&g, &g, &theta);
    Ok(VarianceReport { value, worst_case, matrix_kind: method })
}
