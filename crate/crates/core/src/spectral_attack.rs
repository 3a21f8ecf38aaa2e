//! Targeted poisoning of rank centrality.
//!
//! The attacker builds a chain whose stationary distribution is the target
//! score vector, then inverts the victim's data-to-chain map to obtain
//! pairwise counts that induce it.

use nalgebra::DMatrix;
use serde::{Deserialize, Serialize};

use crate::comparison::{EdgeIndexer, PairwiseDataset, StochasticMatrix};
use crate::error::{check_len, Error, Result};
use crate::markov::{inverse_eigen, MatrixKind};

/// Number of comparisons assigned to each unordered pair when rebuilding data.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub enum PairTotals {
    Uniform(f64),
    /// Symmetric `n x n` matrix; only the upper triangle is read.
    PerPair(DMatrix<f64>),
}

impl Default for PairTotals {
    fn default() -> Self {
        Self::Uniform(1e4)
    }
}

impl PairTotals {
    /// `w_ij + w_ji` for every pair of `d`.
    pub fn from_dataset(d: &PairwiseDataset) -> Self {
        let n = d.n();
        Self::PerPair(DMatrix::from_fn(n, n, |i, j| if i == j { 0.0 } else { d.pair_total(i, j) }))
    }

    fn get(&self, i: usize, j: usize) -> f64 {
        match self {
            Self::Uniform(t) => *t,
            Self::PerPair(m) => m[(i.min(j), i.max(j))],
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct Reconstruction {
    /// Real-valued counts; round with [`Reconstruction::rounded`] if needed.
    pub dataset: PairwiseDataset,
    /// Pairs whose two transition probabilities did not sum to `1/d_scale`
    /// and were rescaled before splitting the pair total.
    pub renormalized_pairs: usize,
}

impl Reconstruction {
    pub fn rounded(&self) -> PairwiseDataset {
        let w = self.dataset.weights().iter().map(|w| w.round()).collect();
        PairwiseDataset::new(self.dataset.n(), w).expect("rounding keeps weights valid")
    }
}

/// Inverts the victim's transition map: each compared pair gets
/// `w_ij + w_ji = total` with `w_ji = total * d_scale * P_ij`, so that
/// `transition_matrix(result, Some(d_scale))` reproduces `P` off the
/// diagonal. `d_scale` is the victim's degree normalization (`n - 1` on a
/// complete graph). Pairs whose two scaled probabilities do not sum to one
/// (including those pushed above one by `d_scale`) are renormalized and
/// counted.
pub fn reconstruct_weights(p: &StochasticMatrix, d_scale: f64, totals: &PairTotals) -> Result<Reconstruction> {
    let n = p.n();
    if !(d_scale.is_finite() && d_scale > 0.0) {
        return Err(Error::InvalidArgument(format!("d_scale = {d_scale}")));
    }
    if let PairTotals::PerPair(m) = totals {
        if m.nrows() != n || m.ncols() != n {
            return Err(Error::DimensionMismatch { expected: n, found: m.nrows() });
        }
    }
    let idx = EdgeIndexer::new(n)?;
    let mut w = vec![0.0; idx.len()];
    let mut renormalized = 0;
    for i in 0..n {
        for j in i + 1..n {
            let total = totals.get(i, j);
            if !(total.is_finite() && total >= 0.0) {
                return Err(Error::InvalidArgument(format!("pair total {total} for ({i}, {j})")));
            }
            let mut to_j = d_scale * p.entries()[(i, j)];
            let mut to_i = d_scale * p.entries()[(j, i)];
            let s = to_j + to_i;
            if s <= 0.0 || total == 0.0 {
                continue;
            }
            if (s - 1.0).abs() > 1e-9 {
                to_j /= s;
                to_i /= s;
                renormalized += 1;
            }
            // The walk moves toward winners: P_ij carries the wins of j over i.
            w[idx.index(j, i)] = total * to_j;
            w[idx.index(i, j)] = total * to_i;
        }
    }
    Ok(Reconstruction { dataset: PairwiseDataset::new(n, w)?, renormalized_pairs: renormalized })
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SpectralAttackConfig {
    pub kind: MatrixKind,
    /// Degree normalization used to rebuild the observed chain; `None` means `n - 1`.
    pub d1: Option<f64>,
    /// Degree normalization used to rebuild the target chain; `None` means `n - 1`.
    pub d2: Option<f64>,
    pub totals: PairTotals,
}

impl SpectralAttackConfig {
    pub fn new(kind: MatrixKind) -> Self {
        Self { kind, d1: None, d2: None, totals: PairTotals::default() }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct SpectralAttackOutcome {
    /// Real-valued replacement for the attacker's data.
    pub w_k: Vec<f64>,
    /// Estimate of the hidden data (zero on visible edges).
    pub w_u: Vec<f64>,
    /// Mass removed when clamping negative intermediate weights at zero.
    pub clamped_mass: f64,
    pub renormalized_pairs: usize,
    /// Set when clamping removed more than half of the target mass.
    pub ill_conditioned: bool,
}

/// Builds poisoned data for rank centrality.
///
/// `known` carries the attacker's view: its mask marks the visible edges
/// (no mask means complete information) and hidden weights are ignored.
/// The hidden part is estimated by rebuilding the chain of the observed
/// scores `theta_r` on the hidden edges; the replacement is the rebuilt
/// target chain minus that estimate.
pub fn attack_rank_centrality(
    known: &PairwiseDataset,
    theta_r: &[f64],
    theta_a: &[f64],
    cfg: &SpectralAttackConfig,
) -> Result<SpectralAttackOutcome> {
    let n = known.n();
    check_len(n, theta_r.len())?;
    check_len(n, theta_a.len())?;
    let default_d = (n - 1) as f64;
    let p_r = inverse_eigen(theta_r, cfg.kind)?;
    let p_a = inverse_eigen(theta_a, cfg.kind)?;
    let rec_r = reconstruct_weights(&p_r, cfg.d1.unwrap_or(default_d), &cfg.totals)?;
    let rec_a = reconstruct_weights(&p_a, cfg.d2.unwrap_or(default_d), &cfg.totals)?;

    let w_u: Vec<f64> = rec_r
        .dataset
        .weights()
        .iter()
        .enumerate()
        .map(|(m, &r)| if known.is_known(m) { 0.0 } else { r.max(0.0) })
        .collect();
    let mut clamped = 0.0;
    let w_k: Vec<f64> = rec_a
        .dataset
        .weights()
        .iter()
        .zip(&w_u)
        .map(|(&a, &u)| {
            let v = a - u;
            if v < 0.0 {
                clamped -= v;
            }
            v.max(0.0)
        })
        .collect();
    let target_mass = rec_a.dataset.total();
    Ok(SpectralAttackOutcome {
        w_k,
        w_u,
        clamped_mass: clamped,
        renormalized_pairs: rec_r.renormalized_pairs + rec_a.renormalized_pairs,
        ill_conditioned: clamped > 0.5 * target_mass,
    })
}
