//! Synthetic comparison data under the Bradley-Terry-Luce model and the
//! hiding step used for incomplete-information experiments.

use rand::seq::SliceRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::comparison::PairwiseDataset;
use crate::error::{Error, Result};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SimulationSpec {
    pub n: usize,
    /// Positive BTL strengths; `None` means `1, 2, ..., n`.
    pub true_scores: Option<Vec<f64>>,
    pub samples: u64,
    pub seed: u64,
}

impl SimulationSpec {
    pub fn new(n: usize, samples: u64, seed: u64) -> Self {
        Self { n, true_scores: None, samples, seed }
    }

    pub fn scores(&self) -> Vec<f64> {
        self.true_scores.clone().unwrap_or_else(|| (1..=self.n).map(|i| i as f64).collect())
    }

    fn validate(&self) -> Result<()> {
        if self.n < 2 {
            return Err(Error::InvalidArgument(format!("n = {} is below 2", self.n)));
        }
        if self.samples == 0 {
            return Err(Error::InvalidArgument("need at least one sample".into()));
        }
        let s = self.scores();
        if s.len() != self.n || s.iter().any(|v| !(v.is_finite() && *v > 0.0)) {
            return Err(Error::InvalidScores("true scores must be n positive numbers".into()));
        }
        Ok(())
    }
}

/// Draws `samples` uniformly chosen pairs and resolves each by a BTL coin.
pub fn simulate_btl(spec: &SimulationSpec) -> Result<PairwiseDataset> {
    spec.validate()?;
    let theta = spec.scores();
    let n = spec.n;
    let mut rng = ChaCha8Rng::seed_from_u64(spec.seed);
    let mut d = PairwiseDataset::zeros(n)?;
    let idx = d.indexer();
    let mut w = vec![0.0; idx.len()];
    for _ in 0..spec.samples {
        let i = rng.random_range(0..n);
        let mut j = rng.random_range(0..n - 1);
        if j >= i {
            j += 1;
        }
        let (win, lose) = if rng.random::<f64>() < theta[i] / (theta[i] + theta[j]) { (i, j) } else { (j, i) };
        w[idx.index(win, lose)] += 1.0;
    }
    d = d.with_weights(w)?;
    Ok(d)
}

/// Marks edges as hidden, in random order, until the hidden weight reaches
/// `fraction` of the total.
pub fn hide_fraction<R: Rng + ?Sized>(d: &PairwiseDataset, fraction: f64, rng: &mut R) -> Result<PairwiseDataset> {
    if !(0.0..1.0).contains(&fraction) {
        return Err(Error::InvalidArgument(format!("hidden fraction {fraction} outside [0, 1)")));
    }
    let goal = fraction * d.total();
    let mut edges: Vec<usize> = (0..d.weights().len()).filter(|&m| d.weights()[m] > 0.0).collect();
    edges.shuffle(rng);
    let mut mask = vec![true; d.weights().len()];
    let mut hidden = 0.0;
    for m in edges {
        if hidden >= goal {
            break;
        }
        mask[m] = false;
        hidden += d.weights()[m];
    }
    d.clone().with_known_mask(mask)
}

/// [`hide_fraction`] driven by a seeded generator.
pub fn hide_fraction_seeded(d: &PairwiseDataset, fraction: f64, seed: u64) -> Result<PairwiseDataset> {
    hide_fraction(d, fraction, &mut ChaCha8Rng::seed_from_u64(seed))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn deterministic_under_seed() {
        let s = SimulationSpec::new(5, 1000, 3);
        assert_eq!(simulate_btl(&s).unwrap(), simulate_btl(&s).unwrap());
        assert_eq!(simulate_btl(&s).unwrap().total(), 1000.0);
    }

    #[test]
    fn hiding_reaches_fraction() {
        let d = simulate_btl(&SimulationSpec::new(6, 3000, 1)).unwrap();
        let h = hide_fraction(&d, 0.2, &mut ChaCha8Rng::seed_from_u64(2)).unwrap();
        let hidden: f64 = h.hidden_weights().iter().sum();
        assert!(hidden >= 0.2 * d.total());
        assert!(hidden < 0.2 * d.total() + d.weights().iter().copied().fold(0.0, f64::max));
        let none = hide_fraction(&d, 0.0, &mut ChaCha8Rng::seed_from_u64(2)).unwrap();
        assert_eq!(none.known_weights(), d.weights());
    }
}
