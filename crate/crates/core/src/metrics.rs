//! Ranking comparison metrics and target construction.

use crate::comparison::Ranking;
use crate::error::{check_len, Error, Result};

fn same_candidates(a: &Ranking, b: &Ranking) -> Result<()> {
    check_len(a.len(), b.len())
}

/// `1 / position` of the target's winner in the observed ranking.
pub fn reciprocal_rank(target: &Ranking, observed: &Ranking) -> Result<f64> {
    same_candidates(target, observed)?;
    if target.is_empty() {
        return Err(Error::InvalidRanking("empty ranking".into()));
    }
    let pos = observed.positions()[target.top()];
    Ok(1.0 / (pos + 1) as f64)
}

/// Kendall rank correlation: mean pairwise order agreement in `[-1, 1]`.
pub fn kendall_tau(a: &Ranking, b: &Ranking) -> Result<f64> {
    same_candidates(a, b)?;
    let n = a.len();
    if n < 2 {
        return Err(Error::InvalidRanking("need at least two candidates".into()));
    }
    let (pa, pb) = (a.positions(), b.positions());
    let mut s: i64 = 0;
    for i in 0..n {
        for j in i + 1..n {
            let x = (pa[i] < pa[j]) == (pb[i] < pb[j]);
            s += if x { 1 } else { -1 };
        }
    }
    Ok(2.0 * s as f64 / (n * (n - 1)) as f64)
}

/// Moves the candidate at 1-based position `t` to the front.
pub fn build_target_ranking(base: &Ranking, t: usize) -> Result<Ranking> {
    let n = base.len();
    if t < 2 || t > n {
        return Err(Error::InvalidArgument(format!("target position {t} outside 2..={n}")));
    }
    let mut order = base.as_slice().to_vec();
    let c = order.remove(t - 1);
    order.insert(0, c);
    Ranking::new(order)
}

/// Positional (Borda) scores on the simplex: the candidate at position `k`
/// (1-based) receives `n - k + 1`, normalized.
pub fn scores_from_ranking(r: &Ranking) -> Vec<f64> {
    let n = r.len();
    let total = (n * (n + 1) / 2) as f64;
    let mut s = vec![0.0; n];
    for (k, &c) in r.as_slice().iter().enumerate() {
        s[c] = (n - k) as f64 / total;
    }
    s
}

#[cfg(test)]
mod tests {
    use super::*;

    fn r(v: &[usize]) -> Ranking {
        Ranking::from_one_based(v).unwrap()
    }

    #[test]
    fn reciprocal_rank_examples() {
        let target = r(&[4, 1, 2, 3]);
        assert_eq!(reciprocal_rank(&target, &target).unwrap(), 1.0);
        assert_eq!(reciprocal_rank(&target, &r(&[1, 2, 3, 4])).unwrap(), 0.25);
        assert!((reciprocal_rank(&target, &r(&[1, 2, 4, 3])).unwrap() - 1.0 / 3.0).abs() < 1e-15);
        assert!(reciprocal_rank(&target, &r(&[1, 2, 3])).is_err());
    }

    #[test]
    fn kendall_examples() {
        assert_eq!(kendall_tau(&r(&[1, 2, 3]), &r(&[1, 2, 3])).unwrap(), 1.0);
        assert_eq!(kendall_tau(&r(&[1, 2, 3]), &r(&[3, 2, 1])).unwrap(), -1.0);
        assert!((kendall_tau(&r(&[1, 2, 3]), &r(&[2, 1, 3])).unwrap() - 1.0 / 3.0).abs() < 1e-15);
    }

    #[test]
    fn target_examples() {
        let base = r(&[10, 9, 8, 7, 6, 5, 4, 3, 2, 1]);
        assert_eq!(build_target_ranking(&base, 2).unwrap().to_one_based(), vec![9, 10, 8, 7, 6, 5, 4, 3, 2, 1]);
        assert_eq!(build_target_ranking(&r(&[1, 2]), 2).unwrap().to_one_based(), vec![2, 1]);
        assert!(build_target_ranking(&base, 1).is_err());
        assert!(build_target_ranking(&base, 11).is_err());
    }

    #[test]
    fn borda_example() {
        let s = scores_from_ranking(&r(&[2, 1]));
        assert!((s[0] - 1.0 / 3.0).abs() < 1e-15 && (s[1] - 2.0 / 3.0).abs() < 1e-15);
    }
}
