//! Rank aggregation from pairwise comparisons, and targeted data-poisoning
//! attacks against it.
//!
//! Two aggregators are covered: HodgeRank ([`aggregate::hodgerank_regularized`])
//! and rank centrality ([`aggregate::rank_centrality`]). For each there is an
//! attack that rewrites the attacker's share of the comparisons so the
//! aggregate follows a chosen order while changing as little data as
//! possible: an ADMM solver for HodgeRank ([`hodge_attack`]) and an
//! inverse-eigenvalue construction for rank centrality ([`spectral_attack`]).
//!
//! ```
//! use rankpoison::{PairwiseDataset, aggregate::{rank_centrality, SpectralConfig}};
//!
//! // Candidate 0 beat candidate 1 three times out of four.
//! let d = PairwiseDataset::new(2, vec![3.0, 1.0]).unwrap();
//! let theta = rank_centrality(&d, &SpectralConfig::default()).unwrap();
//! assert!((theta[0] - 0.75).abs() < 1e-10);
//! ```

pub mod aggregate;
pub mod baselines;
pub mod comparison;
mod error;
pub mod hodge_attack;
pub mod markov;
pub mod metrics;
pub mod preflib;
mod qp;
pub mod scenario;
pub mod simulate;
pub mod spectral_attack;

pub use comparison::{
    build_comparison_matrix, divergence, edge_index, edge_pair, graph_laplacian, integerize_checked,
    integerize_weights, transition_matrix, weights_from_votes, ComparisonMatrix, EdgeIndexer, PairwiseDataset,
    Ranking, StochasticMatrix,
};
pub use error::{Error, Result};
