//! Loader for PrefLib election files (strict, partial and tied orders).
//!
//! Both the current layout (`# KEY: value` metadata, ballots as
//! `count: a,b,{c,d}`) and the legacy layout (candidate count, candidate
//! lines, a voter-count line, then `count,a,b,...`) are accepted. Every
//! ballot contributes one comparison per ranked-above pair; unranked
//! candidates contribute nothing.

use std::io::BufRead;

use crate::comparison::PairwiseDataset;
use crate::error::{Error, Result};

#[derive(Debug, Clone, PartialEq)]
pub struct Election {
    pub dataset: PairwiseDataset,
    pub candidates: usize,
    /// Total number of voters (sum of ballot multiplicities).
    pub ballots: u64,
    pub comparisons: u64,
    pub names: Vec<String>,
}

fn err(line: usize, msg: impl Into<String>) -> Error {
    Error::Parse { line, msg: msg.into() }
}

/// Parses `a,{b,c},d` into tied groups of 0-based ids.
fn parse_order(s: &str, line: usize) -> Result<Vec<Vec<usize>>> {
    let mut groups = Vec::new();
    let mut rest = s.trim();
    while !rest.is_empty() {
        let (group, tail) = if let Some(r) = rest.strip_prefix('{') {
            let close = r.find('}').ok_or_else(|| err(line, "unclosed '{'"))?;
            (&r[..close], &r[close + 1..])
        } else {
            match rest.find(',') {
                Some(k) => (&rest[..k], &rest[k..]),
                None => (rest, ""),
            }
        };
        let ids = group
            .split(',')
            .map(str::trim)
            .filter(|t| !t.is_empty())
            .map(|t| match t.parse::<usize>() {
                Ok(0) | Err(_) => Err(err(line, format!("bad candidate id '{t}'"))),
                Ok(v) => Ok(v - 1),
            })
            .collect::<Result<Vec<_>>>()?;
        if !ids.is_empty() {
            groups.push(ids);
        }
        rest = tail.trim_start();
        if let Some(r) = rest.strip_prefix(',') {
            rest = r.trim_start();
        } else if !rest.is_empty() {
            return Err(err(line, format!("unexpected '{rest}'")));
        }
    }
    Ok(groups)
}

struct Builder {
    ballots: Vec<(u64, Vec<Vec<usize>>, usize)>,
}

impl Builder {
    fn finish(self, n: usize, names: Vec<String>) -> Result<Election> {
        let mut d = PairwiseDataset::zeros(n)?;
        let mut total_ballots = 0;
        let mut comparisons = 0;
        for (count, groups, line) in self.ballots {
            let mut seen = vec![false; n];
            for &c in groups.iter().flatten() {
                if c >= n {
                    return Err(err(line, format!("candidate {} exceeds {n}", c + 1)));
                }
                if std::mem::replace(&mut seen[c], true) {
                    return Err(err(line, format!("candidate {} ranked twice", c + 1)));
                }
            }
            total_ballots += count;
            for (g, hi) in groups.iter().enumerate() {
                for lo in &groups[g + 1..] {
                    for &a in hi {
                        for &b in lo {
                            d.add(a, b, count as f64)?;
                            comparisons += count;
                        }
                    }
                }
            }
        }
        Ok(Election { dataset: d, candidates: n, ballots: total_ballots, comparisons, names })
    }
}

fn parse_count(s: &str, line: usize) -> Result<u64> {
    s.trim().parse().map_err(|_| err(line, format!("bad ballot count '{}'", s.trim())))
}

/// Reads a PrefLib election from any buffered reader.
pub fn read_preflib<R: BufRead>(reader: R) -> Result<Election> {
    let lines: Vec<(usize, String)> = reader
        .lines()
        .enumerate()
        .map(|(k, l)| l.map(|s| (k + 1, s)).map_err(|e| err(k + 1, e.to_string())))
        .collect::<Result<_>>()?;
    let mut body = lines.iter().filter(|(_, l)| !l.trim().is_empty()).peekable();
    let Some((_, first)) = body.peek() else {
        return Err(err(1, "empty file"));
    };
    let mut b = Builder { ballots: Vec::new() };
    if first.trim_start().starts_with('#') {
        let mut n = None;
        let mut names = Vec::new();
        for (ln, l) in body {
            if let Some(meta) = l.trim_start().strip_prefix('#') {
                if let Some((k, v)) = meta.split_once(':') {
                    let k = k.trim();
                    if k == "NUMBER ALTERNATIVES" {
                        n = Some(v.trim().parse::<usize>().map_err(|_| err(*ln, "bad alternative count"))?);
                    } else if k.starts_with("ALTERNATIVE NAME") {
                        names.push(v.trim().to_string());
                    }
                }
                continue;
            }
            let (count, order) = l.split_once(':').ok_or_else(|| err(*ln, "expected 'count: order'"))?;
            b.ballots.push((parse_count(count, *ln)?, parse_order(order, *ln)?, *ln));
        }
        let n = match n {
            Some(n) => n,
            None => b.ballots.iter().flat_map(|(_, g, _)| g.iter().flatten()).max().map_or(0, |m| m + 1),
        };
        return b.finish(n, names);
    }

    let (ln, l) = body.next().expect("peeked");
    let n: usize = l.trim().parse().map_err(|_| err(*ln, "expected the number of candidates"))?;
    let mut names = Vec::with_capacity(n);
    for _ in 0..n {
        let (ln, l) = body.next().ok_or_else(|| err(*ln, "missing candidate lines"))?;
        let (_, name) = l.split_once(',').ok_or_else(|| err(*ln, "expected 'id,name'"))?;
        names.push(name.trim().to_string());
    }
    let (ln, l) = body.next().ok_or_else(|| err(*ln, "missing voter totals line"))?;
    if l.split(',').count() != 3 {
        return Err(err(*ln, "expected 'voters,sum,unique'"));
    }
    for (ln, l) in body {
        let (count, order) = l.split_once(',').ok_or_else(|| err(*ln, "expected 'count,order'"))?;
        b.ballots.push((parse_count(count, *ln)?, parse_order(order, *ln)?, *ln));
    }
    b.finish(n, names)
}

pub fn load_preflib_election(path: &std::path::Path) -> Result<Election> {
    let f = std::fs::File::open(path).map_err(|e| err(0, format!("{}: {e}", path.display())))?;
    read_preflib(std::io::BufReader::new(f))
}

/// Aggregates `(i, j, winner)` judgments (0-based) into weights, one
/// comparison per judgment.
pub fn dataset_from_annotations(n: usize, rows: &[(usize, usize, usize)]) -> Result<PairwiseDataset> {
    let mut d = PairwiseDataset::zeros(n)?;
    for (k, &(i, j, winner)) in rows.iter().enumerate() {
        let loser = if winner == i {
            j
        } else if winner == j {
            i
        } else {
            return Err(err(k + 1, format!("winner {} is neither {} nor {}", winner + 1, i + 1, j + 1)));
        };
        d.add(winner, loser, 1.0).map_err(|e| err(k + 1, e.to_string()))?;
    }
    Ok(d)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn single_pair_ballot() {
        let e = read_preflib("# NUMBER ALTERNATIVES: 3\n2: 3,1\n".as_bytes()).unwrap();
        assert_eq!(e.dataset.weight(2, 0), 2.0);
        assert_eq!(e.dataset.total(), 2.0);
        assert_eq!((e.ballots, e.comparisons), (2, 2));
    }

    #[test]
    fn full_order_ballot() {
        let e = read_preflib("# NUMBER ALTERNATIVES: 3\n1: 1,2,3\n".as_bytes()).unwrap();
        for (i, j) in [(0, 1), (0, 2), (1, 2)] {
            assert_eq!(e.dataset.weight(i, j), 1.0);
        }
        assert_eq!(e.comparisons, 3);
    }

    #[test]
    fn tied_groups() {
        let e = read_preflib("# NUMBER ALTERNATIVES: 3\n1: {1,2},3\n".as_bytes()).unwrap();
        assert_eq!(e.dataset.weight(0, 1), 0.0);
        assert_eq!(e.dataset.weight(0, 2), 1.0);
        assert_eq!(e.dataset.weight(1, 2), 1.0);
    }

    #[test]
    fn legacy_layout() {
        let text = "3\n1,A\n2,B\n3,C\n5,5,2\n3,2,1\n2,1,3,2\n";
        let e = read_preflib(text.as_bytes()).unwrap();
        assert_eq!(e.names, vec!["A", "B", "C"]);
        assert_eq!(e.ballots, 5);
        assert_eq!(e.comparisons, 3 + 6);
        assert_eq!(e.dataset.weight(1, 0), 3.0);
    }

    #[test]
    fn errors_carry_line_numbers() {
        let bad = "# NUMBER ALTERNATIVES: 3\n1: 1,2\nx: 1,2\n";
        assert_eq!(read_preflib(bad.as_bytes()).unwrap_err(), Error::Parse { line: 3, msg: "bad ballot count 'x'".into() });
        let dup = "# NUMBER ALTERNATIVES: 3\n1: 1,1\n";
        assert!(matches!(read_preflib(dup.as_bytes()), Err(Error::Parse { line: 2, .. })));
        let range = "# NUMBER ALTERNATIVES: 2\n1: 1,3\n";
        assert!(matches!(read_preflib(range.as_bytes()), Err(Error::Parse { line: 2, .. })));
    }

    #[test]
    fn annotations() {
        let d = dataset_from_annotations(3, &[(0, 1, 1), (0, 1, 0), (2, 1, 2)]).unwrap();
        assert_eq!((d.weight(1, 0), d.weight(0, 1), d.weight(2, 1)), (1.0, 1.0, 1.0));
        assert!(dataset_from_annotations(3, &[(0, 1, 2)]).is_err());
    }
}
