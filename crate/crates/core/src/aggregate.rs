//! The two victim aggregators: HodgeRank (weighted least squares on the
//! comparison graph) and rank centrality (stationary distribution of a
//! random walk toward winners).

use nalgebra::{DMatrix, DVector, SymmetricEigen};
use serde::{Deserialize, Serialize};

use crate::comparison::{transition_matrix, PairwiseDataset, Ranking, StochasticMatrix};
use crate::error::{check_len, Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct HodgeConfig {
    pub lambda0: f64,
}

impl Default for HodgeConfig {
    fn default() -> Self {
        Self { lambda0: 1e-6 }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SpectralConfig {
    pub tol: f64,
    pub max_iter: usize,
}

impl Default for SpectralConfig {
    fn default() -> Self {
        Self { tol: 1e-10, max_iter: 100_000 }
    }
}

/// `C^T W C` for the given edge weights: the symmetrized weighted Laplacian.
pub fn hodge_normal_matrix(d: &PairwiseDataset) -> DMatrix<f64> {
    let n = d.n();
    let mut l = DMatrix::zeros(n, n);
    for (m, i, j) in d.indexer().iter() {
        let w = d.weights()[m];
        l[(i, i)] += w;
        l[(j, j)] += w;
        l[(i, j)] -= w;
        l[(j, i)] -= w;
    }
    l
}

/// `C^T W y`: net weighted flow out of each candidate.
pub fn hodge_rhs(d: &PairwiseDataset, y: &[f64]) -> Result<DVector<f64>> {
    check_len(d.weights().len(), y.len())?;
    let mut r = DVector::zeros(d.n());
    for (m, i, j) in d.indexer().iter() {
        let f = d.weights()[m] * y[m];
        r[i] += f;
        r[j] -= f;
    }
    Ok(r)
}

/// Moore-Penrose pseudo-inverse of a symmetric matrix; eigenvalues below
/// `1e-12 * max|eig|` are treated as zero.
pub fn symmetric_pinv(a: &DMatrix<f64>) -> DMatrix<f64> {
    let eig = SymmetricEigen::new(a.clone());
    let cutoff = 1e-12 * eig.eigenvalues.amax();
    let inv = eig.eigenvalues.map(|v| if v.abs() > cutoff && v != 0.0 { 1.0 / v } else { 0.0 });
    &eig.eigenvectors * DMatrix::from_diagonal(&inv) * eig.eigenvectors.transpose()
}

fn flow_or_ones(d: &PairwiseDataset, y: Option<&[f64]>) -> Vec<f64> {
    y.map_or_else(|| vec![1.0; d.weights().len()], <[f64]>::to_vec)
}

/// Minimal-norm least-squares HodgeRank scores. `y` defaults to all ones.
/// The result sums to zero and the winner gets the largest score.
pub fn hodgerank_minimal_norm(d: &PairwiseDataset, y: Option<&[f64]>) -> Result<Vec<f64>> {
    let y = flow_or_ones(d, y);
    let rhs = hodge_rhs(d, &y)?;
    let theta = symmetric_pinv(&hodge_normal_matrix(d)) * rhs;
    Ok(theta.iter().copied().collect())
}

/// Solves `(C^T W C + 2 lambda0 I) theta = C^T W y`.
pub fn hodgerank_regularized(d: &PairwiseDataset, y: Option<&[f64]>, cfg: &HodgeConfig) -> Result<Vec<f64>> {
    if !(cfg.lambda0 > 0.0) {
        return Err(Error::InvalidArgument("lambda0 must be positive".into()));
    }
    let y = flow_or_ones(d, y);
    let rhs = hodge_rhs(d, &y)?;
    let mut a = hodge_normal_matrix(d);
    for i in 0..d.n() {
        a[(i, i)] += 2.0 * cfg.lambda0;
    }
    let chol = a.cholesky().ok_or(Error::SingularSystem)?;
    Ok(chol.solve(&rhs).iter().copied().collect())
}

/// Stationary distribution of an irreducible chain by power iteration from
/// the uniform distribution, falling back to a dense solve.
pub fn stationary_distribution(p: &StochasticMatrix, cfg: &SpectralConfig) -> Result<Vec<f64>> {
    if !p.is_irreducible() {
        return Err(Error::ReducibleChain);
    }
    walk_limit(p, cfg)
}

/// Limit of the lazy walk started from the uniform distribution. For a
/// reducible chain this is one of several stationary distributions, with no
/// mass on transient states.
pub fn walk_limit(p: &StochasticMatrix, cfg: &SpectralConfig) -> Result<Vec<f64>> {
    let n = p.n();
    let pt = p.entries().transpose();
    // Lazy walk: same fixed point, but immune to periodic chains.
    let mut x = DVector::from_element(n, 1.0 / n as f64);
    for _ in 0..cfg.max_iter {
        let next = (&pt * &x + &x) * 0.5;
        let delta = (&next - &x).lp_norm(1);
        x = next;
        if delta < cfg.tol * 1e-2 {
            let s = x.sum();
            let theta: Vec<f64> = x.iter().map(|v| v / s).collect();
            if stationarity_gap(p, &theta) <= cfg.tol {
                return Ok(theta);
            }
        }
    }
    if p.is_irreducible() {
        dense_stationary(p)
    } else {
        Err(Error::NoConvergence { iterations: cfg.max_iter, residual: stationarity_gap(p, x.as_slice()) })
    }
}

/// Solves `theta^T (I - P) = 0`, `sum theta = 1` directly.
pub fn dense_stationary(p: &StochasticMatrix) -> Result<Vec<f64>> {
    let n = p.n();
    let mut a = DMatrix::identity(n, n) - p.entries().transpose();
    for k in 0..n {
        a[(n - 1, k)] = 1.0;
    }
    let mut b = DVector::zeros(n);
    b[n - 1] = 1.0;
    let x = a.lu().solve(&b).ok_or(Error::ReducibleChain)?;
    Ok(x.iter().copied().collect())
}

/// `max_j |(theta^T P)_j - theta_j|`.
pub fn stationarity_gap(p: &StochasticMatrix, theta: &[f64]) -> f64 {
    let t = DVector::from_column_slice(theta);
    (p.entries().transpose() * &t - &t).amax()
}

/// Rank centrality scores on the simplex.
pub fn rank_centrality(d: &PairwiseDataset, cfg: &SpectralConfig) -> Result<Vec<f64>> {
    stationary_distribution(&transition_matrix(d, None)?, cfg)
}

pub fn ranking_from_scores(theta: &[f64]) -> Ranking {
    Ranking::from_scores(theta)
}

/// The aggregation algorithm under attack.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub enum Victim {
    HodgeRank(HodgeConfig),
    RankCentrality(SpectralConfig),
}

impl Victim {
    pub fn hodge() -> Self {
        Self::HodgeRank(HodgeConfig::default())
    }

    pub fn spectral() -> Self {
        Self::RankCentrality(SpectralConfig::default())
    }

    pub fn scores(&self, d: &PairwiseDataset) -> Result<Vec<f64>> {
        match self {
            Self::HodgeRank(cfg) => hodgerank_regularized(d, None, cfg),
            Self::RankCentrality(cfg) => rank_centrality(d, cfg),
        }
    }

    pub fn ranking(&self, d: &PairwiseDataset) -> Result<Ranking> {
        Ok(Ranking::from_scores(&self.scores(d)?))
    }
}
