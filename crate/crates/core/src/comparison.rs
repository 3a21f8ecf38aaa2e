//! Pairwise comparison data: edge indexing, weight vectors, the comparison
//! matrix, the graph Laplacian, divergence, and the random-walk transition
//! matrix used by rank centrality.
//!
//! Internally every candidate and edge id is 0-based. The free functions
//! [`edge_index`] and [`edge_pair`] expose the 1-based convention used in
//! files and on the command line.

use nalgebra::{DMatrix, DVector};
use serde::{Deserialize, Serialize};

use crate::error::{check_len, Error, Result};

/// Maps ordered pairs `(i, j)` with `i != j` onto `0..n(n-1)` in row-major
/// order, skipping the diagonal.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct EdgeIndexer {
    n: usize,
}

impl EdgeIndexer {
    pub fn new(n: usize) -> Result<Self> {
        if n < 2 {
            return Err(Error::InvalidIndex(format!("need at least 2 candidates, got {n}")));
        }
        Ok(Self { n })
    }

    pub fn n(&self) -> usize {
        self.n
    }

    /// Number of ordered pairs, `n(n-1)`.
    pub fn len(&self) -> usize {
        self.n * (self.n - 1)
    }

    pub fn is_empty(&self) -> bool {
        false
    }

    /// 0-based edge id of `(i, j)`. Panics in debug builds on `i == j`.
    #[inline]
    pub fn index(&self, i: usize, j: usize) -> usize {
        debug_assert!(i != j && i < self.n && j < self.n);
        i * (self.n - 1) + j - usize::from(j > i)
    }

    pub fn checked_index(&self, i: usize, j: usize) -> Result<usize> {
        if i >= self.n || j >= self.n || i == j {
            return Err(Error::InvalidIndex(format!("pair ({i}, {j}) for n = {}", self.n)));
        }
        Ok(self.index(i, j))
    }

    /// Inverse of [`EdgeIndexer::index`].
    #[inline]
    pub fn pair(&self, m: usize) -> (usize, usize) {
        debug_assert!(m < self.len());
        let i = m / (self.n - 1);
        let r = m % (self.n - 1);
        (i, if r < i { r } else { r + 1 })
    }

    /// Edge id of the reversed pair.
    #[inline]
    pub fn reverse(&self, m: usize) -> usize {
        let (i, j) = self.pair(m);
        self.index(j, i)
    }

    /// Iterates `(m, i, j)` over all ordered pairs.
    pub fn iter(&self) -> impl Iterator<Item = (usize, usize, usize)> + '_ {
        (0..self.len()).map(move |m| {
            let (i, j) = self.pair(m);
            (m, i, j)
        })
    }
}

/// 1-based edge index of the ordered pair `(i, j)` among `n` candidates.
///
/// ```
/// assert_eq!(rankpoison::edge_index(2, 1, 3).unwrap(), 3);
/// ```
pub fn edge_index(i: usize, j: usize, n: usize) -> Result<usize> {
    if i == 0 || j == 0 || i > n || j > n || i == j {
        return Err(Error::InvalidIndex(format!("pair ({i}, {j}) for n = {n}")));
    }
    Ok(EdgeIndexer::new(n)?.index(i - 1, j - 1) + 1)
}

/// Inverse of [`edge_index`], 1-based on both sides.
pub fn edge_pair(m: usize, n: usize) -> Result<(usize, usize)> {
    let idx = EdgeIndexer::new(n)?;
    if m == 0 || m > idx.len() {
        return Err(Error::InvalidIndex(format!("edge {m} for n = {n}")));
    }
    let (i, j) = idx.pair(m - 1);
    Ok((i + 1, j + 1))
}

/// Nonnegative edge weights `w[m]` = number of times `i` was preferred to
/// `j`, with an optional mask marking which edges the attacker can see.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PairwiseDataset {
    n: usize,
    weights: Vec<f64>,
    known: Option<Vec<bool>>,
}

impl PairwiseDataset {
    pub fn new(n: usize, weights: Vec<f64>) -> Result<Self> {
        let idx = EdgeIndexer::new(n)?;
        check_len(idx.len(), weights.len())?;
        if let Some(m) = weights.iter().position(|w| !w.is_finite() || *w < 0.0) {
            return Err(Error::InvalidWeights(format!("edge {m} has weight {}", weights[m])));
        }
        Ok(Self { n, weights, known: None })
    }

    pub fn zeros(n: usize) -> Result<Self> {
        let len = EdgeIndexer::new(n)?.len();
        Self::new(n, vec![0.0; len])
    }

    /// Builds a dataset from a dense `n x n` matrix of win counts. The
    /// diagonal is ignored.
    pub fn from_matrix(m: &DMatrix<f64>) -> Result<Self> {
        if m.nrows() != m.ncols() {
            return Err(Error::DimensionMismatch { expected: m.nrows(), found: m.ncols() });
        }
        let idx = EdgeIndexer::new(m.nrows())?;
        Self::new(m.nrows(), idx.iter().map(|(_, i, j)| m[(i, j)]).collect())
    }

    /// Accumulates 0-based `(winner, loser, count)` triples.
    pub fn from_counts(n: usize, counts: &[(usize, usize, f64)]) -> Result<Self> {
        let mut d = Self::zeros(n)?;
        for &(i, j, c) in counts {
            d.add(i, j, c)?;
        }
        Ok(d)
    }

    /// Attaches a known-edge mask; `false` entries are hidden from the attacker.
    pub fn with_known_mask(mut self, mask: Vec<bool>) -> Result<Self> {
        check_len(self.weights.len(), mask.len())?;
        self.known = Some(mask);
        Ok(self)
    }

    pub fn without_mask(mut self) -> Self {
        self.known = None;
        self
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn indexer(&self) -> EdgeIndexer {
        EdgeIndexer { n: self.n }
    }

    pub fn weights(&self) -> &[f64] {
        &self.weights
    }

    pub fn into_weights(self) -> Vec<f64> {
        self.weights
    }

    pub fn known_mask(&self) -> Option<&[bool]> {
        self.known.as_deref()
    }

    pub fn is_known(&self, m: usize) -> bool {
        self.known.as_ref().is_none_or(|k| k[m])
    }

    pub fn weight(&self, i: usize, j: usize) -> f64 {
        self.weights[self.indexer().index(i, j)]
    }

    pub fn add(&mut self, i: usize, j: usize, count: f64) -> Result<()> {
        let m = self.indexer().checked_index(i, j)?;
        let w = self.weights[m] + count;
        if !w.is_finite() || w < 0.0 {
            return Err(Error::InvalidWeights(format!("edge ({i}, {j}) would become {w}")));
        }
        self.weights[m] = w;
        Ok(())
    }

    pub fn total(&self) -> f64 {
        self.weights.iter().sum()
    }

    /// `w_ij + w_ji`.
    pub fn pair_total(&self, i: usize, j: usize) -> f64 {
        self.weight(i, j) + self.weight(j, i)
    }

    /// Weights visible to the attacker (hidden edges zeroed).
    pub fn known_weights(&self) -> Vec<f64> {
        self.masked(true)
    }

    /// Weights hidden from the attacker (visible edges zeroed).
    pub fn hidden_weights(&self) -> Vec<f64> {
        self.masked(false)
    }

    fn masked(&self, keep_known: bool) -> Vec<f64> {
        self.weights
            .iter()
            .enumerate()
            .map(|(m, &w)| if self.is_known(m) == keep_known { w } else { 0.0 })
            .collect()
    }

    /// Dense `n x n` matrix with `W[i][j] = w_ij`.
    pub fn weight_matrix(&self) -> DMatrix<f64> {
        let mut w = DMatrix::zeros(self.n, self.n);
        for (m, i, j) in self.indexer().iter() {
            w[(i, j)] = self.weights[m];
        }
        w
    }

    /// Returns a copy with every weight multiplied by `factor`.
    pub fn scaled(&self, factor: f64) -> Result<Self> {
        let mut out = Self::new(self.n, self.weights.iter().map(|w| w * factor).collect())?;
        out.known.clone_from(&self.known);
        Ok(out)
    }

    /// Returns a copy with replaced weights, keeping the mask.
    pub fn with_weights(&self, weights: Vec<f64>) -> Result<Self> {
        let mut out = Self::new(self.n, weights)?;
        out.known.clone_from(&self.known);
        Ok(out)
    }

    /// Number of distinct opponents each candidate has been compared with.
    pub fn degrees(&self) -> Vec<usize> {
        let mut deg = vec![0; self.n];
        for i in 0..self.n {
            for j in (i + 1)..self.n {
                if self.pair_total(i, j) > 0.0 {
                    deg[i] += 1;
                    deg[j] += 1;
                }
            }
        }
        deg
    }
}

/// Aggregates vote matrices into edge weights:
/// `w_ij = sum_u [y_ij > 0] + [y_ji < 0]`.
pub fn weights_from_votes(n: usize, votes: &[DMatrix<i8>]) -> Result<PairwiseDataset> {
    let idx = EdgeIndexer::new(n)?;
    let mut w = vec![0.0; idx.len()];
    for (u, y) in votes.iter().enumerate() {
        if y.nrows() != n || y.ncols() != n {
            return Err(Error::InvalidVotes(format!(
                "voter {u}: matrix is {}x{}, expected {n}x{n}",
                y.nrows(),
                y.ncols()
            )));
        }
        if let Some(bad) = y.iter().find(|v| !(-1..=1).contains(*v)) {
            return Err(Error::InvalidVotes(format!("voter {u}: entry {bad}")));
        }
        if y != &(-y.transpose()) {
            return Err(Error::InvalidVotes(format!("voter {u}: matrix is not skew-symmetric")));
        }
        for (m, i, j) in idx.iter() {
            w[m] += f64::from(u8::from(y[(i, j)] > 0) + u8::from(y[(j, i)] < 0));
        }
    }
    PairwiseDataset::new(n, w)
}

/// Signed incidence matrix with one row per ordered pair: `+1` in the
/// winner's column, `-1` in the loser's.
#[derive(Debug, Clone, PartialEq)]
pub struct ComparisonMatrix {
    n: usize,
    entries: DMatrix<i8>,
}

impl ComparisonMatrix {
    pub fn n(&self) -> usize {
        self.n
    }

    pub fn entries(&self) -> &DMatrix<i8> {
        &self.entries
    }

    pub fn to_f64(&self) -> DMatrix<f64> {
        self.entries.map(f64::from)
    }

    /// `C theta`, the score difference on every edge.
    pub fn apply(&self, theta: &[f64]) -> Result<DVector<f64>> {
        check_len(self.n, theta.len())?;
        let idx = EdgeIndexer { n: self.n };
        Ok(DVector::from_iterator(idx.len(), idx.iter().map(|(_, i, j)| theta[i] - theta[j])))
    }
}

pub fn build_comparison_matrix(n: usize) -> Result<ComparisonMatrix> {
    let idx = EdgeIndexer::new(n)?;
    let mut entries = DMatrix::zeros(idx.len(), n);
    for (m, i, j) in idx.iter() {
        entries[(m, i)] = 1;
        entries[(m, j)] = -1;
    }
    Ok(ComparisonMatrix { n, entries })
}

/// `L = D - W` where `D` holds the out-weight of each candidate.
pub fn graph_laplacian(d: &PairwiseDataset) -> DMatrix<f64> {
    let w = d.weight_matrix();
    let mut l = -&w;
    for i in 0..d.n() {
        l[(i, i)] = w.row(i).sum();
    }
    l
}

/// `div_i = sum_j w_ij y_ij` for per-edge labels `y`.
pub fn divergence(d: &PairwiseDataset, y: &[f64]) -> Result<DVector<f64>> {
    check_len(d.weights().len(), y.len())?;
    let mut div = DVector::zeros(d.n());
    for (m, i, _) in d.indexer().iter() {
        div[i] += d.weights()[m] * y[m];
    }
    Ok(div)
}

/// A row-stochastic matrix, optionally carrying its stationary distribution.
#[derive(Debug, Clone, PartialEq)]
pub struct StochasticMatrix {
    entries: DMatrix<f64>,
    stationary: Option<Vec<f64>>,
}

impl StochasticMatrix {
    /// Validates squareness, nonnegativity and unit row sums (within `1e-9`).
    pub fn new(entries: DMatrix<f64>) -> Result<Self> {
        if entries.nrows() != entries.ncols() {
            return Err(Error::DimensionMismatch { expected: entries.nrows(), found: entries.ncols() });
        }
        if entries.iter().any(|p| !p.is_finite() || *p < -1e-12) {
            return Err(Error::InvalidArgument("transition matrix has a negative entry".into()));
        }
        for (r, row) in entries.row_iter().enumerate() {
            let s = row.sum();
            if (s - 1.0).abs() > 1e-9 {
                return Err(Error::InvalidArgument(format!("row {r} sums to {s}")));
            }
        }
        Ok(Self { entries, stationary: None })
    }

    pub fn with_stationary(mut self, theta: Vec<f64>) -> Result<Self> {
        check_len(self.n(), theta.len())?;
        self.stationary = Some(theta);
        Ok(self)
    }

    pub fn n(&self) -> usize {
        self.entries.nrows()
    }

    pub fn entries(&self) -> &DMatrix<f64> {
        &self.entries
    }

    pub fn into_entries(self) -> DMatrix<f64> {
        self.entries
    }

    pub fn stationary(&self) -> Option<&[f64]> {
        self.stationary.as_deref()
    }

    /// True when every state reaches every other through positive entries.
    pub fn is_irreducible(&self) -> bool {
        let n = self.n();
        let reach = |forward: bool| {
            let mut seen = vec![false; n];
            let mut stack = vec![0];
            seen[0] = true;
            while let Some(u) = stack.pop() {
                for v in 0..n {
                    let p = if forward { self.entries[(u, v)] } else { self.entries[(v, u)] };
                    if p > 0.0 && !seen[v] {
                        seen[v] = true;
                        stack.push(v);
                    }
                }
            }
            seen.into_iter().all(|s| s)
        };
        reach(true) && reach(false)
    }
}

/// Random-walk transition matrix of rank centrality:
/// `P_ij = w_ji / (d_max (w_ij + w_ji))` for compared pairs, with the
/// diagonal closing every row. `d_max` defaults to the largest number of
/// distinct opponents of any candidate.
pub fn transition_matrix(d: &PairwiseDataset, d_max: Option<f64>) -> Result<StochasticMatrix> {
    let n = d.n();
    let max_deg = d.degrees().into_iter().max().unwrap_or(0);
    if max_deg == 0 {
        return Err(Error::EmptyGraph);
    }
    let d_max = d_max.unwrap_or(max_deg as f64);
    if !(d_max.is_finite() && d_max >= max_deg as f64) {
        return Err(Error::InvalidArgument(format!(
            "d_max = {d_max} is below the maximum degree {max_deg}"
        )));
    }
    let mut p = DMatrix::zeros(n, n);
    for i in 0..n {
        for j in 0..n {
            if i == j {
                continue;
            }
            let tot = d.pair_total(i, j);
            if tot > 0.0 {
                p[(i, j)] = d.weight(j, i) / tot / d_max;
            }
        }
        let off: f64 = p.row(i).sum();
        p[(i, i)] = 1.0 - off;
    }
    StochasticMatrix::new(p)
}

/// A strict ordering of candidates, best first, stored as 0-based ids.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Ranking(Vec<usize>);

impl Ranking {
    pub fn new(order: Vec<usize>) -> Result<Self> {
        let n = order.len();
        let mut seen = vec![false; n];
        for &c in &order {
            if c >= n || std::mem::replace(&mut seen[c], true) {
                return Err(Error::InvalidRanking(format!("{order:?} is not a permutation")));
            }
        }
        Ok(Self(order))
    }

    /// Builds a ranking from 1-based candidate ids.
    pub fn from_one_based(order: &[usize]) -> Result<Self> {
        if order.contains(&0) {
            return Err(Error::InvalidRanking("candidate id 0 in a 1-based ranking".into()));
        }
        Self::new(order.iter().map(|c| c - 1).collect())
    }

    /// Sorts by descending score; ties keep the smaller id first.
    pub fn from_scores(scores: &[f64]) -> Self {
        let mut order: Vec<usize> = (0..scores.len()).collect();
        order.sort_by(|&a, &b| scores[b].total_cmp(&scores[a]));
        Self(order)
    }

    pub fn identity(n: usize) -> Self {
        Self((0..n).collect())
    }

    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }

    pub fn as_slice(&self) -> &[usize] {
        &self.0
    }

    pub fn top(&self) -> usize {
        self.0[0]
    }

    pub fn to_one_based(&self) -> Vec<usize> {
        self.0.iter().map(|c| c + 1).collect()
    }

    /// `pos[c]` = 0-based position of candidate `c`.
    pub fn positions(&self) -> Vec<usize> {
        let mut pos = vec![0; self.0.len()];
        for (p, &c) in self.0.iter().enumerate() {
            pos[c] = p;
        }
        pos
    }
}

/// Rounds `total * w / sum(w)` to the nearest integers.
pub fn integerize_weights(w: &[f64], total: u64) -> Result<Vec<f64>> {
    let s: f64 = w.iter().sum();
    if w.iter().any(|x| !x.is_finite() || *x < 0.0) {
        return Err(Error::InvalidWeights("negative or non-finite weight".into()));
    }
    if s <= 0.0 {
        return Err(Error::InvalidWeights("weights sum to zero".into()));
    }
    let scale = total as f64 / s;
    Ok(w.iter().map(|x| (x * scale).round()).collect())
}

/// [`integerize_weights`] followed by a caller-supplied check, typically
/// that the victim's top candidate is unchanged.
pub fn integerize_checked<F>(w: &[f64], total: u64, check: F) -> Result<Vec<f64>>
where
    F: FnOnce(&[f64]) -> Result<bool>,
{
    let out = integerize_weights(w, total)?;
    if check(&out)? {
        Ok(out)
    } else {
        Err(Error::ResolutionTooCoarse)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn edge_index_matches_listed_order() {
        let order = [(1, 2), (1, 3), (2, 1), (2, 3), (3, 1), (3, 2)];
        for (k, &(i, j)) in order.iter().enumerate() {
            assert_eq!(edge_index(i, j, 3).unwrap(), k + 1);
            assert_eq!(edge_pair(k + 1, 3).unwrap(), (i, j));
        }
    }

    #[test]
    fn edge_index_rejects_bad_pairs() {
        assert!(matches!(edge_index(2, 2, 3), Err(Error::InvalidIndex(_))));
        assert!(matches!(edge_index(0, 1, 3), Err(Error::InvalidIndex(_))));
        assert!(matches!(edge_index(1, 4, 3), Err(Error::InvalidIndex(_))));
        assert!(edge_pair(7, 3).is_err());
    }

    #[test]
    fn votes_aggregate_both_indicator_terms() {
        let y = DMatrix::from_row_slice(2, 2, &[0, 1, -1, 0]);
        let d = weights_from_votes(2, std::slice::from_ref(&y)).unwrap();
        assert_eq!(d.weights(), &[2.0, 0.0]);
        let d = weights_from_votes(2, &[y.clone(), -y]).unwrap();
        assert_eq!(d.weights(), &[2.0, 2.0]);
        assert_eq!(weights_from_votes(3, &[]).unwrap().total(), 0.0);
    }

    #[test]
    fn votes_reject_out_of_range() {
        let y = DMatrix::from_row_slice(2, 2, &[0, 2, -1, 0]);
        assert!(matches!(weights_from_votes(2, &[y]), Err(Error::InvalidVotes(_))));
        let y = DMatrix::from_row_slice(2, 2, &[0, 1, 0, 0]);
        assert!(matches!(weights_from_votes(2, &[y]), Err(Error::InvalidVotes(_))));
        let y = DMatrix::<i8>::zeros(3, 3);
        assert!(matches!(weights_from_votes(2, &[y]), Err(Error::InvalidVotes(_))));
    }

    #[test]
    fn comparison_matrix_three_candidates() {
        let c = build_comparison_matrix(3).unwrap();
        let expect: [[i8; 3]; 6] = [[1, -1, 0], [1, 0, -1], [-1, 1, 0], [0, 1, -1], [-1, 0, 1], [0, -1, 1]];
        for (m, row) in expect.iter().enumerate() {
            for (k, &x) in row.iter().enumerate() {
                assert_eq!(c.entries()[(m, k)], x);
            }
        }
        assert!(c.apply(&[1.0, 1.0, 1.0]).unwrap().iter().all(|v| *v == 0.0));
    }

    #[test]
    fn laplacian_and_divergence_two_candidates() {
        let d = PairwiseDataset::new(2, vec![3.0, 1.0]).unwrap();
        let l = graph_laplacian(&d);
        assert_eq!(l, DMatrix::from_row_slice(2, 2, &[3.0, -3.0, -1.0, 1.0]));
        assert_eq!(divergence(&d, &[1.0, 1.0]).unwrap().as_slice(), &[3.0, 1.0]);
    }

    #[test]
    fn transition_two_candidates() {
        let d = PairwiseDataset::new(2, vec![3.0, 1.0]).unwrap();
        let p = transition_matrix(&d, None).unwrap();
        assert_eq!(p.entries(), &DMatrix::from_row_slice(2, 2, &[0.75, 0.25, 0.75, 0.25]));
    }

    #[test]
    fn transition_rejects_empty_graph() {
        let d = PairwiseDataset::zeros(3).unwrap();
        assert_eq!(transition_matrix(&d, None), Err(Error::EmptyGraph));
    }

    #[test]
    fn integerize_example() {
        assert_eq!(integerize_weights(&[0.6, 0.4], 5).unwrap(), vec![3.0, 2.0]);
        assert_eq!(integerize_weights(&[0.3, 0.1], 4).unwrap(), vec![3.0, 1.0]);
        assert_eq!(integerize_weights(&[1.0, 1.0, 1.0], 3).unwrap(), vec![1.0; 3]);
        assert!(integerize_weights(&[0.0, 0.0], 5).is_err());
        assert_eq!(integerize_checked(&[0.6, 0.4], 5, |_| Ok(false)), Err(Error::ResolutionTooCoarse));
    }

    #[test]
    fn ranking_ties_prefer_smaller_id() {
        assert_eq!(Ranking::from_scores(&[1.0, 2.0, 2.0]).as_slice(), &[1, 2, 0]);
        assert!(Ranking::new(vec![0, 0]).is_err());
    }

    #[test]
    fn masks_split_weights() {
        let d = PairwiseDataset::new(2, vec![3.0, 1.0]).unwrap().with_known_mask(vec![true, false]).unwrap();
        assert_eq!(d.known_weights(), vec![3.0, 0.0]);
        assert_eq!(d.hidden_weights(), vec![0.0, 1.0]);
    }
}
