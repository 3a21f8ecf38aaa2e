//! Baseline adversaries in the interaction model: an oracle returns
//! `z in {-1, 0, +1}` for a queried ordered pair, and the profile gains or
//! loses one comparison on that edge accordingly.

use rand::Rng;
use serde::{Deserialize, Serialize};

use crate::comparison::{EdgeIndexer, Ranking};
use crate::error::{check_len, Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum Strategy {
    /// `z` uniform over `{-1, 0, +1}`.
    Random,
    /// Agree with the target ranking on every pair.
    Naive,
    /// Agree with the BTL win probability of the target scores when it clears a threshold.
    Probabilistic,
}

impl Strategy {
    pub const ALL: [Strategy; 3] = [Strategy::Random, Strategy::Naive, Strategy::Probabilistic];

    pub fn name(self) -> &'static str {
        match self {
            Self::Random => "random",
            Self::Naive => "naive",
            Self::Probabilistic => "probabilistic",
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct OperationStep {
    /// 0-based edge id.
    pub edge: usize,
    pub z: i8,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct OracleParams {
    pub target_ranking: Option<Ranking>,
    /// Positive scores; only their ratios matter.
    pub target_scores: Option<Vec<f64>>,
    pub threshold: f64,
}

impl Default for OracleParams {
    fn default() -> Self {
        Self { target_ranking: None, target_scores: None, threshold: 0.6 }
    }
}

impl OracleParams {
    fn validate(&self, strategy: Strategy) -> Result<()> {
        match strategy {
            Strategy::Random => Ok(()),
            Strategy::Naive if self.target_ranking.is_none() => {
                Err(Error::InvalidArgument("naive strategy needs a target ranking".into()))
            }
            Strategy::Naive => Ok(()),
            Strategy::Probabilistic => match &self.target_scores {
                None => Err(Error::InvalidArgument("probabilistic strategy needs target scores".into())),
                Some(s) if s.iter().any(|v| !(*v > 0.0)) => {
                    Err(Error::InvalidArgument("probabilistic strategy needs positive scores".into()))
                }
                Some(_) if !(self.threshold >= 0.5) => {
                    Err(Error::InvalidArgument("probabilistic threshold must be at least 0.5".into()))
                }
                Some(_) => Ok(()),
            },
        }
    }
}

/// Oracle answer for the ordered pair `(i, j)` (0-based).
pub fn oracle_step<R: Rng + ?Sized>(
    strategy: Strategy,
    i: usize,
    j: usize,
    params: &OracleParams,
    rng: &mut R,
) -> Result<i8> {
    params.validate(strategy)?;
    Ok(match strategy {
        Strategy::Random => rng.random_range(-1..=1),
        Strategy::Naive => {
            let pos = params.target_ranking.as_ref().expect("validated").positions();
            if pos.get(i).zip(pos.get(j)).is_none() {
                return Err(Error::InvalidIndex(format!("pair ({i}, {j})")));
            }
            if pos[i] < pos[j] {
                1
            } else {
                -1
            }
        }
        Strategy::Probabilistic => {
            let s = params.target_scores.as_ref().expect("validated");
            if i >= s.len() || j >= s.len() {
                return Err(Error::InvalidIndex(format!("pair ({i}, {j})")));
            }
            let p = s[i] / (s[i] + s[j]);
            match p.partial_cmp(&params.threshold) {
                Some(std::cmp::Ordering::Greater) => 1,
                Some(std::cmp::Ordering::Less) => -1,
                _ => 0,
            }
        }
    })
}

/// Applies one step in place and reports whether the weight changed.
pub fn apply_step(w: &mut [f64], step: OperationStep) -> bool {
    let v = &mut w[step.edge];
    match step.z {
        1 => {
            *v += 1.0;
            true
        }
        -1 if *v >= 1.0 => {
            *v -= 1.0;
            true
        }
        _ => false,
    }
}

pub fn apply_profile(w: &[f64], steps: &[OperationStep]) -> Vec<f64> {
    let mut out = w.to_vec();
    for &s in steps {
        apply_step(&mut out, s);
    }
    out
}

/// L1 distance between two weight vectors.
pub fn ipco_delta(before: &[f64], after: &[f64]) -> Result<f64> {
    check_len(before.len(), after.len())?;
    Ok(before.iter().zip(after).map(|(a, b)| (a - b).abs()).sum())
}

#[derive(Debug, Clone, PartialEq)]
pub struct BaselineOutcome {
    pub weights: Vec<f64>,
    /// Oracle queries issued.
    pub interactions: u64,
    /// Unit modifications actually applied.
    pub budget_used: u64,
}

/// Queries edges round-robin until `budget` unit modifications have been
/// applied or `max_interactions` queries were spent.
pub fn run_baseline<R: Rng + ?Sized>(
    strategy: Strategy,
    n: usize,
    start: &[f64],
    params: &OracleParams,
    budget: u64,
    max_interactions: u64,
    rng: &mut R,
) -> Result<BaselineOutcome> {
    let idx = EdgeIndexer::new(n)?;
    check_len(idx.len(), start.len())?;
    params.validate(strategy)?;
    let mut w = start.to_vec();
    let (mut interactions, mut used) = (0u64, 0u64);
    let mut edge = 0;
    while used < budget && interactions < max_interactions {
        let (i, j) = idx.pair(edge);
        let z = oracle_step(strategy, i, j, params, rng)?;
        if apply_step(&mut w, OperationStep { edge, z }) {
            used += 1;
        }
        interactions += 1;
        edge = (edge + 1) % idx.len();
    }
    Ok(BaselineOutcome { weights: w, interactions, budget_used: used })
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    fn rng() -> ChaCha8Rng {
        ChaCha8Rng::seed_from_u64(1)
    }

    #[test]
    fn delta_examples() {
        assert_eq!(ipco_delta(&[3.0, 1.0], &[3.0, 1.0]).unwrap(), 0.0);
        assert_eq!(ipco_delta(&[3.0, 1.0], &[1.0, 1.0]).unwrap(), 2.0);
        assert!(ipco_delta(&[1.0], &[1.0, 2.0]).is_err());
    }

    #[test]
    fn naive_follows_target() {
        let params = OracleParams { target_ranking: Some(Ranking::from_one_based(&[2, 1]).unwrap()), ..Default::default() };
        assert_eq!(oracle_step(Strategy::Naive, 1, 0, &params, &mut rng()).unwrap(), 1);
        assert_eq!(oracle_step(Strategy::Naive, 0, 1, &params, &mut rng()).unwrap(), -1);
    }

    #[test]
    fn probabilistic_threshold() {
        let tie = OracleParams { target_scores: Some(vec![0.5, 0.5]), threshold: 0.5, ..Default::default() };
        assert_eq!(oracle_step(Strategy::Probabilistic, 0, 1, &tie, &mut rng()).unwrap(), 0);
        assert_eq!(oracle_step(Strategy::Probabilistic, 1, 0, &tie, &mut rng()).unwrap(), 0);
        let p = OracleParams { target_scores: Some(vec![0.8, 0.2]), threshold: 0.6, ..Default::default() };
        assert_eq!(oracle_step(Strategy::Probabilistic, 0, 1, &p, &mut rng()).unwrap(), 1);
        assert_eq!(oracle_step(Strategy::Probabilistic, 1, 0, &p, &mut rng()).unwrap(), -1);
    }

    #[test]
    fn missing_params_rejected() {
        let p = OracleParams::default();
        assert!(oracle_step(Strategy::Naive, 0, 1, &p, &mut rng()).is_err());
        assert!(oracle_step(Strategy::Probabilistic, 0, 1, &p, &mut rng()).is_err());
    }

    #[test]
    fn profile_update_rule() {
        assert_eq!(apply_profile(&[0.0, 5.0], &[OperationStep { edge: 0, z: -1 }]), vec![0.0, 5.0]);
        assert_eq!(apply_profile(&[0.0, 5.0], &[OperationStep { edge: 1, z: 1 }]), vec![0.0, 6.0]);
        let steps = vec![OperationStep { edge: 1, z: 1 }; 7];
        let after = apply_profile(&[0.0, 5.0], &steps);
        assert_eq!(ipco_delta(&[0.0, 5.0], &after).unwrap(), 7.0);
    }

    #[test]
    fn baseline_spends_exact_budget() {
        let params = OracleParams { target_ranking: Some(Ranking::identity(3)), ..Default::default() };
        let start = vec![2.0; 6];
        let out = run_baseline(Strategy::Naive, 3, &start, &params, 9, 1000, &mut rng()).unwrap();
        assert_eq!(out.budget_used, 9);
        assert_eq!(ipco_delta(&start, &out.weights).unwrap(), 9.0);
    }
}
