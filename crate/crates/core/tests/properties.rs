//! Property tests over randomly generated inputs.

use proptest::prelude::*;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use rankpoison::aggregate::{hodgerank_regularized, rank_centrality, HodgeConfig, SpectralConfig};
use rankpoison::baselines::{apply_profile, run_baseline, OperationStep, OracleParams, Strategy as Attack};
use rankpoison::hodge_attack::permute_target_scores;
use rankpoison::metrics::{build_target_ranking, kendall_tau, reciprocal_rank, scores_from_ranking};
use rankpoison::{
    build_comparison_matrix, divergence, edge_index, edge_pair, transition_matrix, EdgeIndexer, PairwiseDataset,
    Ranking,
};

fn dataset(max_n: usize, max_w: u32) -> impl Strategy<Value = PairwiseDataset> {
    (2..=max_n).prop_flat_map(move |n| {
        proptest::collection::vec(0..=max_w, n * (n - 1))
            .prop_map(move |w| PairwiseDataset::new(n, w.into_iter().map(f64::from).collect()).unwrap())
    })
}

/// Every pair won at least once in each direction, so the chain is irreducible.
fn connected_dataset(max_n: usize) -> impl Strategy<Value = PairwiseDataset> {
    (2..=max_n).prop_flat_map(|n| {
        proptest::collection::vec((1u32..20, 1u32..20), n * (n - 1) / 2).prop_map(move |pairs| {
            let mut d = PairwiseDataset::zeros(n).unwrap();
            let mut k = 0;
            for i in 0..n {
                for j in i + 1..n {
                    d.add(i, j, f64::from(pairs[k].0)).unwrap();
                    d.add(j, i, f64::from(pairs[k].1)).unwrap();
                    k += 1;
                }
            }
            d
        })
    })
}

fn permutation(max_n: usize) -> impl Strategy<Value = Ranking> {
    (2..=max_n)
        .prop_flat_map(|n| Just((0..n).collect::<Vec<_>>()).prop_shuffle())
        .prop_map(|v| Ranking::new(v).unwrap())
}

proptest! {
    #[test]
    fn edge_index_round_trips(n in 2usize..=50, seed in any::<u64>()) {
        let len = n * (n - 1);
        let m = 1 + (seed as usize) % len;
        let (i, j) = edge_pair(m, n).unwrap();
        prop_assert_eq!(edge_index(i, j, n).unwrap(), m);
        let idx = EdgeIndexer::new(n).unwrap();
        let (a, b) = idx.pair(m - 1);
        prop_assert_eq!(idx.index(a, b), m - 1);
        prop_assert_eq!(idx.pair(idx.reverse(m - 1)), (b, a));
    }

    #[test]
    fn comparison_matrix_annihilates_constants(n in 2usize..=30) {
        let c = build_comparison_matrix(n).unwrap();
        for row in c.entries().row_iter() {
            prop_assert_eq!(row.iter().map(|&v| i32::from(v)).sum::<i32>(), 0);
            prop_assert_eq!(row.iter().filter(|&&v| v == 1).count(), 1);
            prop_assert_eq!(row.iter().filter(|&&v| v == -1).count(), 1);
        }
    }

    #[test]
    fn transition_rows_are_stochastic(d in dataset(7, 30)) {
        prop_assume!(d.weights().iter().any(|&w| w > 0.0));
        let p = transition_matrix(&d, None).unwrap();
        for row in p.entries().row_iter() {
            prop_assert!((row.sum() - 1.0).abs() <= 1e-12);
            prop_assert!(row.iter().all(|&v| v >= 0.0));
        }
    }

    #[test]
    fn divergence_matches_incidence_form(d in dataset(5, 10), y_seed in any::<u64>()) {
        let len = d.weights().len();
        let mut rng = ChaCha8Rng::seed_from_u64(y_seed);
        let y: Vec<f64> = (0..len).map(|_| rand::Rng::random_range(&mut rng, -2.0..2.0)).collect();
        let div = divergence(&d, &y).unwrap();
        let idx = d.indexer();
        // Each edge (i, j) adds w_ij y_ij to i's entry only.
        let mut brute = vec![0.0; d.n()];
        for (m, i, _) in idx.iter() {
            brute[i] += d.weights()[m] * y[m];
        }
        for k in 0..d.n() {
            prop_assert!((div[k] - brute[k]).abs() <= 1e-12);
        }
        // C^T diag(w) y counts each flow twice: once at its tail, negated at its head.
        let ct = build_comparison_matrix(d.n()).unwrap().to_f64().transpose();
        let wy = nalgebra::DVector::from_iterator(len, (0..len).map(|m| d.weights()[m] * y[m]));
        let signed = ct * wy;
        let mut expect = vec![0.0; d.n()];
        for (m, i, j) in idx.iter() {
            expect[i] += d.weights()[m] * y[m];
            expect[j] -= d.weights()[m] * y[m];
        }
        for k in 0..d.n() {
            prop_assert!((signed[k] - expect[k]).abs() <= 1e-12);
        }
    }

    #[test]
    fn rankings_ignore_positive_scaling(scores in proptest::collection::vec(-10.0f64..10.0, 2..12), k in 1e-3f64..1e3) {
        let scaled: Vec<f64> = scores.iter().map(|s| s * k).collect();
        prop_assert_eq!(Ranking::from_scores(&scores), Ranking::from_scores(&scaled));
    }

    #[test]
    fn hodgerank_ranking_ignores_data_scaling(d in connected_dataset(6), k in 1u32..10) {
        let cfg = HodgeConfig::default();
        let a = hodgerank_regularized(&d, None, &cfg).unwrap();
        let b = hodgerank_regularized(&d.scaled(f64::from(k)).unwrap(), None, &cfg).unwrap();
        for (x, y) in a.iter().zip(&b) {
            prop_assert!((x - y).abs() <= 1e-6);
        }
        // Exact ties are broken by rounding noise, so only compare separated scores.
        let mut sorted = a.clone();
        sorted.sort_by(f64::total_cmp);
        if sorted.windows(2).all(|w| w[1] - w[0] > 1e-6) {
            prop_assert_eq!(Ranking::from_scores(&a), Ranking::from_scores(&b));
        }
    }

    #[test]
    fn permuted_targets_keep_values_and_follow_order(
        (scores, target) in (2usize..10).prop_flat_map(|n| (
            proptest::collection::vec(-5.0f64..5.0, n),
            Just((0..n).collect::<Vec<_>>()).prop_shuffle(),
        ))
    ) {
        let target = Ranking::new(target).unwrap();
        let out = permute_target_scores(&scores, &target).unwrap();
        let (mut a, mut b) = (scores.clone(), out.clone());
        a.sort_by(f64::total_cmp);
        b.sort_by(f64::total_cmp);
        prop_assert_eq!(a, b);
        // Distinct values make the order unambiguous.
        let mut distinct = scores.clone();
        distinct.sort_by(f64::total_cmp);
        distinct.dedup();
        if distinct.len() == scores.len() {
            prop_assert_eq!(Ranking::from_scores(&out), target);
        }
    }

    #[test]
    fn profiles_never_go_negative(
        w in proptest::collection::vec(0u32..3, 6),
        steps in proptest::collection::vec((0usize..6, -1i8..=1), 0..60),
    ) {
        let w: Vec<f64> = w.into_iter().map(f64::from).collect();
        let steps: Vec<OperationStep> = steps.into_iter().map(|(edge, z)| OperationStep { edge, z }).collect();
        let out = apply_profile(&w, &steps);
        prop_assert!(out.iter().all(|&v| v >= 0.0));
    }

    #[test]
    fn naive_saturation_moves_toward_target(
        (w, order) in (2usize..=5).prop_flat_map(|n| (
            proptest::collection::vec(0u32..=5, n * (n - 1)),
            Just((0..n).collect::<Vec<_>>()).prop_shuffle(),
        )),
        budget in 0u64..200,
    ) {
        let d = PairwiseDataset::new(order.len(), w.into_iter().map(f64::from).collect()).unwrap();
        let target = Ranking::new(order).unwrap();
        let params = OracleParams { target_ranking: Some(target.clone()), ..Default::default() };
        let mut rng = ChaCha8Rng::seed_from_u64(0);
        let out = run_baseline(Attack::Naive, d.n(), d.weights(), &params, budget, 10 * budget + 100, &mut rng).unwrap();
        let pos = target.positions();
        for (m, i, j) in d.indexer().iter() {
            if pos[i] < pos[j] {
                prop_assert!(out.weights[m] >= d.weights()[m]);
            } else {
                prop_assert!(out.weights[m] <= d.weights()[m]);
            }
        }
    }

    #[test]
    fn reciprocal_rank_takes_harmonic_values(a in permutation(8), seed in any::<u64>()) {
        let mut v = a.as_slice().to_vec();
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        rand::seq::SliceRandom::shuffle(v.as_mut_slice(), &mut rng);
        let b = Ranking::new(v).unwrap();
        let r = reciprocal_rank(&a, &b).unwrap();
        let k = (1.0 / r).round();
        prop_assert!((1.0..=a.len() as f64).contains(&k));
        prop_assert!((r - 1.0 / k).abs() < 1e-15);
        let tau = kendall_tau(&a, &b).unwrap();
        prop_assert!((-1.0..=1.0).contains(&tau));
    }

    #[test]
    fn target_construction_is_a_promotion(base in permutation(10), t_seed in any::<usize>()) {
        let n = base.len();
        let t = 2 + t_seed % (n - 1);
        let out = build_target_ranking(&base, t).unwrap();
        prop_assert_eq!(out.top(), base.as_slice()[t - 1]);
        let rest: Vec<usize> = base.as_slice().iter().copied().filter(|&c| c != out.top()).collect();
        prop_assert_eq!(&out.as_slice()[1..], rest.as_slice());
        // Promoting the former winner (now at position 2) restores the base order.
        prop_assert_eq!(build_target_ranking(&out, 2).unwrap(), {
            let mut v = out.as_slice().to_vec();
            v.swap(0, 1);
            Ranking::new(v).unwrap()
        });
    }

    #[test]
    fn borda_scores_round_trip(r in permutation(7)) {
        let s = scores_from_ranking(&r);
        prop_assert!(s.iter().all(|&v| v > 0.0));
        prop_assert!((s.iter().sum::<f64>() - 1.0).abs() < 1e-12);
        prop_assert_eq!(Ranking::from_scores(&s), r);
    }

    #[test]
    fn stationary_is_a_fixed_point(d in connected_dataset(8)) {
        let cfg = SpectralConfig::default();
        let theta = rank_centrality(&d, &cfg).unwrap();
        let p = transition_matrix(&d, None).unwrap();
        let t = nalgebra::DVector::from_column_slice(&theta);
        let moved = p.entries().transpose() * &t;
        prop_assert!((moved - t).amax() <= 1e-10);
    }
}
