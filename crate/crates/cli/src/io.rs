//! File formats: comparison CSV (`i,j,count`, 1-based), annotation CSV
//! (`voter,i,j,winner`), PrefLib elections, and the output tables.

use std::fs::File;
use std::io::Write;
use std::path::Path;

use anyhow::{bail, Context, Result};
use rankpoison::preflib::{dataset_from_annotations, load_preflib_election};
use rankpoison::PairwiseDataset;
use serde::{Deserialize, Serialize};

#[derive(Debug, Clone, Copy, PartialEq, Eq, clap::ValueEnum, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum InputFormat {
    /// Comparison counts `i,j,count`.
    Csv,
    /// PrefLib election (`.soc`, `.soi`, `.toc`, `.toi`).
    Preflib,
    /// Individual judgments `voter,i,j,winner`.
    Annotations,
}

impl InputFormat {
    fn guess(path: &Path) -> Self {
        match path.extension().and_then(|e| e.to_str()) {
            Some("soc" | "soi" | "toc" | "toi") => Self::Preflib,
            _ => Self::Csv,
        }
    }
}

#[derive(Debug, Serialize, Deserialize)]
struct CountRow {
    i: usize,
    j: usize,
    count: f64,
}

#[derive(Debug, Deserialize)]
struct AnnotationRow {
    #[allow(dead_code)]
    voter: String,
    i: usize,
    j: usize,
    winner: usize,
}

fn one_based(v: usize, line: usize) -> Result<usize> {
    if v == 0 {
        bail!("line {line}: candidate ids are 1-based");
    }
    Ok(v - 1)
}

/// Deserializes every record together with its line number.
fn read_rows<T: serde::de::DeserializeOwned>(path: &Path) -> Result<Vec<(usize, T)>> {
    let mut rdr = csv::ReaderBuilder::new()
        .trim(csv::Trim::All)
        .from_path(path)
        .with_context(|| format!("opening {}", path.display()))?;
    let headers = rdr.headers()?.clone();
    let mut out = Vec::new();
    for rec in rdr.records() {
        let rec = rec.with_context(|| format!("reading {}", path.display()))?;
        let line = rec.position().map_or(0, |p| p.line() as usize);
        let row = rec
            .deserialize(Some(&headers))
            .with_context(|| format!("{}: line {line}", path.display()))?;
        out.push((line, row));
    }
    Ok(out)
}

/// Loads a dataset. `n` overrides the candidate count inferred from the file.
pub fn read_dataset(path: &Path, format: Option<InputFormat>, n: Option<usize>) -> Result<PairwiseDataset> {
    let format = format.unwrap_or_else(|| InputFormat::guess(path));
    let d = match format {
        InputFormat::Preflib => {
            let e = load_preflib_election(path).with_context(|| format!("reading {}", path.display()))?;
            if let Some(n) = n {
                if n != e.candidates {
                    bail!("--n {n} disagrees with the {} candidates in {}", e.candidates, path.display());
                }
            }
            e.dataset
        }
        InputFormat::Csv => {
            let counts = read_rows::<CountRow>(path)?;
            let inferred = counts.iter().map(|(_, r)| r.i.max(r.j)).max().unwrap_or(0);
            let n = n.unwrap_or(inferred);
            let mut triples = Vec::with_capacity(counts.len());
            for &(line, ref r) in &counts {
                if r.i > n || r.j > n {
                    bail!("line {line}: candidate id exceeds n = {n}");
                }
                if r.i == r.j {
                    bail!("line {line}: a candidate cannot be compared with itself");
                }
                if !(r.count.is_finite() && r.count >= 0.0) {
                    bail!("line {line}: count must be a nonnegative number");
                }
                triples.push((one_based(r.i, line)?, one_based(r.j, line)?, r.count));
            }
            PairwiseDataset::from_counts(n, &triples)?
        }
        InputFormat::Annotations => {
            let mut rows = Vec::new();
            let mut inferred = 0;
            for (line, r) in read_rows::<AnnotationRow>(path)? {
                inferred = inferred.max(r.i).max(r.j);
                rows.push((one_based(r.i, line)?, one_based(r.j, line)?, one_based(r.winner, line)?));
            }
            dataset_from_annotations(n.unwrap_or(inferred), &rows)?
        }
    };
    Ok(d)
}

/// Writes nonzero counts as `i,j,count`.
pub fn write_dataset(path: &Path, weights: &[f64], n: usize) -> Result<()> {
    let d = PairwiseDataset::new(n, weights.to_vec())?;
    let mut w = csv::Writer::from_path(path)?;
    for (m, i, j) in d.indexer().iter() {
        if weights[m] != 0.0 {
            w.serialize(CountRow { i: i + 1, j: j + 1, count: weights[m] })?;
        }
    }
    w.flush()?;
    Ok(())
}

/// Paired weight vectors before and after the attack, one row per edge.
pub fn write_weight_pairs(path: &Path, n: usize, columns: &[(&str, &[f64])]) -> Result<()> {
    let idx = rankpoison::EdgeIndexer::new(n)?;
    let mut w = csv::Writer::from_path(path)?;
    let mut header = vec!["i".to_string(), "j".to_string()];
    header.extend(columns.iter().map(|(name, _)| name.to_string()));
    w.write_record(&header)?;
    for (m, i, j) in idx.iter() {
        let mut rec = vec![(i + 1).to_string(), (j + 1).to_string()];
        rec.extend(columns.iter().map(|(_, v)| v[m].to_string()));
        w.write_record(&rec)?;
    }
    w.flush()?;
    Ok(())
}

/// Dense matrix with one CSV row per matrix row and no header.
pub fn write_matrix(path: &Path, rows: &[Vec<f64>]) -> Result<()> {
    let mut w = csv::WriterBuilder::new().has_headers(false).from_path(path)?;
    for row in rows {
        w.write_record(row.iter().map(|v| v.to_string()))?;
    }
    w.flush()?;
    Ok(())
}

pub fn write_rows<T: Serialize>(path: &Path, rows: &[T]) -> Result<()> {
    let mut w = csv::Writer::from_path(path)?;
    for r in rows {
        w.serialize(r)?;
    }
    w.flush()?;
    Ok(())
}

pub fn write_json<T: Serialize>(path: &Path, value: &T) -> Result<()> {
    let mut f = File::create(path).with_context(|| format!("creating {}", path.display()))?;
    serde_json::to_writer_pretty(&mut f, value)?;
    writeln!(f)?;
    Ok(())
}
