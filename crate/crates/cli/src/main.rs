//! `rankpoison` command-line front end.

mod io;

use std::path::{Path, PathBuf};

use anyhow::{bail, Context, Result};
use clap::{Args, Parser, Subcommand, ValueEnum};
use serde::Serialize;

use rankpoison::aggregate::Victim;
use rankpoison::markov::MatrixKind;
use rankpoison::scenario::{
    run_attack, run_scenario, summarize, AttackOptions, DataSource, Feedback, Information, ScenarioSpec, VictimKind,
};
use rankpoison::simulate::{hide_fraction_seeded, simulate_btl, SimulationSpec};
use rankpoison::{transition_matrix, PairwiseDataset, Ranking};

use io::InputFormat;

#[derive(Debug, Parser, Serialize)]
#[command(name = "rankpoison", version, about = "Rank aggregation and targeted poisoning of pairwise comparisons")]
struct Cli {
    /// Manifest path (default: manifest.json in the output directory).
    #[arg(long, global = true)]
    manifest: Option<PathBuf>,
    #[command(subcommand)]
    command: Command,
}

#[derive(Debug, Subcommand, Serialize)]
#[serde(rename_all = "lowercase")]
enum Command {
    /// Draw a Bradley-Terry-Luce comparison dataset.
    Simulate(SimulateArgs),
    /// Aggregate a dataset and print scores and ranking.
    Aggregate(AggregateArgs),
    /// Run the targeted attack on one dataset.
    Attack(AttackArgs),
    /// Run repeated trials of the attack and the baselines.
    Evaluate(EvaluateArgs),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum, Serialize)]
#[serde(rename_all = "lowercase")]
enum VictimArg {
    Hodge,
    Spectral,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum, Serialize)]
#[serde(rename_all = "lowercase")]
enum KindArg {
    Reversible,
    Irreversible,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum, Serialize)]
#[serde(rename_all = "lowercase")]
enum ScenarioArg {
    /// Complete information, perfect feedback.
    Cp,
    /// Incomplete information, perfect feedback.
    Ip,
    /// Complete information, imperfect feedback.
    Ci,
    /// Incomplete information, imperfect feedback.
    Ii,
}

#[derive(Debug, Args, Serialize)]
struct VictimArgs {
    #[arg(long, value_enum, default_value = "hodge")]
    victim: VictimArg,
    /// Chain construction used against the spectral victim.
    #[arg(long, value_enum, default_value = "reversible")]
    kind: KindArg,
}

impl VictimArgs {
    fn victim_kind(&self) -> VictimKind {
        match (self.victim, self.kind) {
            (VictimArg::Hodge, _) => VictimKind::HodgeRank,
            (VictimArg::Spectral, KindArg::Reversible) => VictimKind::RankCentrality(MatrixKind::Reversible),
            (VictimArg::Spectral, KindArg::Irreversible) => VictimKind::RankCentrality(MatrixKind::Irreversible),
        }
    }
}

/// Input file, or simulation parameters when no file is given.
#[derive(Debug, Args, Serialize)]
struct DataArgs {
    #[arg(long)]
    input: Option<PathBuf>,
    /// Input format (guessed from the extension when omitted).
    #[arg(long, value_enum)]
    format: Option<InputFormat>,
    /// Number of candidates.
    #[arg(long)]
    n: Option<usize>,
    #[arg(long, default_value_t = 5000)]
    samples: u64,
    #[arg(long, default_value_t = 0)]
    seed: u64,
}

impl DataArgs {
    fn load(&self) -> Result<PairwiseDataset> {
        match &self.input {
            Some(p) => io::read_dataset(p, self.format, self.n),
            None => Ok(simulate_btl(&SimulationSpec::new(self.n.unwrap_or(10), self.samples, self.seed))?),
        }
    }
}

#[derive(Debug, Args, Serialize)]
struct SimulateArgs {
    #[arg(long, default_value_t = 10)]
    n: usize,
    #[arg(long, default_value_t = 5000)]
    samples: u64,
    #[arg(long, default_value_t = 0)]
    seed: u64,
    /// Comma-separated positive strengths (default 1, 2, ..., n).
    #[arg(long, value_delimiter = ',')]
    scores: Option<Vec<f64>>,
    #[arg(long, default_value = ".")]
    out_dir: PathBuf,
}

#[derive(Debug, Args, Serialize)]
struct AggregateArgs {
    #[arg(long, value_enum, default_value = "hodge")]
    victim: VictimArg,
    #[arg(long)]
    input: PathBuf,
    #[arg(long, value_enum)]
    format: Option<InputFormat>,
    #[arg(long)]
    n: Option<usize>,
    /// Also write scores and dense matrices here.
    #[arg(long)]
    out_dir: Option<PathBuf>,
}

#[derive(Debug, Args, Serialize)]
struct AttackArgs {
    #[command(flatten)]
    victim: VictimArgs,
    #[command(flatten)]
    data: DataArgs,
    #[arg(long, value_enum, default_value = "cp")]
    scenario: ScenarioArg,
    /// Position (1-based) of the candidate to promote.
    #[arg(long, default_value_t = 2)]
    target_t: usize,
    /// Share of the comparison mass hidden from the attacker.
    #[arg(long, default_value_t = 0.2)]
    hidden_fraction: f64,
    #[arg(long, default_value = ".")]
    out_dir: PathBuf,
}

#[derive(Debug, Args, Serialize)]
struct EvaluateArgs {
    #[command(flatten)]
    victim: VictimArgs,
    #[command(flatten)]
    data: DataArgs,
    /// Scenarios to run, comma separated.
    #[arg(long, value_enum, value_delimiter = ',', default_value = "cp")]
    scenario: Vec<ScenarioArg>,
    #[arg(long, default_value_t = 50)]
    trials: usize,
    #[arg(long, default_value_t = 2)]
    target_t: usize,
    #[arg(long, default_value_t = 0.2)]
    hidden_fraction: f64,
    /// Threshold of the probabilistic baseline.
    #[arg(long, default_value_t = 0.6)]
    threshold: f64,
    #[arg(long, default_value = ".")]
    out_dir: PathBuf,
}

fn scenario_parts(s: ScenarioArg, hidden_fraction: f64) -> (Information, Feedback) {
    let incomplete = Information::Incomplete { hidden_fraction };
    match s {
        ScenarioArg::Cp => (Information::Complete, Feedback::Perfect),
        ScenarioArg::Ip => (incomplete, Feedback::Perfect),
        ScenarioArg::Ci => (Information::Complete, Feedback::Imperfect),
        ScenarioArg::Ii => (incomplete, Feedback::Imperfect),
    }
}

fn victim_of(v: VictimArg) -> Victim {
    match v {
        VictimArg::Hodge => Victim::hodge(),
        VictimArg::Spectral => Victim::spectral(),
    }
}

fn one_based(r: &Ranking) -> Vec<usize> {
    r.to_one_based()
}

#[derive(Serialize)]
struct Manifest<'a> {
    tool: &'static str,
    version: &'static str,
    argv: Vec<String>,
    arguments: &'a Cli,
    outputs: Vec<String>,
}

fn write_manifest(cli: &Cli, default_dir: Option<&Path>, outputs: &[PathBuf]) -> Result<()> {
    let path = match (&cli.manifest, default_dir) {
        (Some(p), _) => p.clone(),
        (None, Some(d)) => d.join("manifest.json"),
        (None, None) => return Ok(()),
    };
    let m = Manifest {
        tool: env!("CARGO_PKG_NAME"),
        version: env!("CARGO_PKG_VERSION"),
        argv: std::env::args().skip(1).collect(),
        arguments: cli,
        outputs: outputs.iter().map(|p| p.display().to_string()).collect(),
    };
    io::write_json(&path, &m)
}

fn ensure_dir(dir: &Path) -> Result<()> {
    std::fs::create_dir_all(dir).with_context(|| format!("creating {}", dir.display()))
}

fn simulate(a: &SimulateArgs) -> Result<Vec<PathBuf>> {
    let mut spec = SimulationSpec::new(a.n, a.samples, a.seed);
    spec.true_scores = a.scores.clone();
    let d = simulate_btl(&spec)?;
    ensure_dir(&a.out_dir)?;
    let out = a.out_dir.join("comparisons.csv");
    io::write_dataset(&out, d.weights(), d.n())?;
    println!("wrote {} comparisons over {} candidates to {}", d.total(), d.n(), out.display());
    Ok(vec![out])
}

#[derive(Serialize)]
struct AggregateResult {
    victim: VictimArg,
    n: usize,
    total: f64,
    scores: Vec<f64>,
    ranking: Vec<usize>,
}

fn aggregate(a: &AggregateArgs) -> Result<Vec<PathBuf>> {
    let d = io::read_dataset(&a.input, a.format, a.n)?;
    let scores = victim_of(a.victim).scores(&d)?;
    let ranking = Ranking::from_scores(&scores);
    println!("rank,candidate,score");
    for (k, &c) in ranking.as_slice().iter().enumerate() {
        println!("{},{},{}", k + 1, c + 1, scores[c]);
    }
    let Some(dir) = &a.out_dir else { return Ok(Vec::new()) };
    ensure_dir(dir)?;
    let result = AggregateResult { victim: a.victim, n: d.n(), total: d.total(), scores, ranking: one_based(&ranking) };
    let json = dir.join("scores.json");
    io::write_json(&json, &result)?;
    let w = d.weight_matrix();
    let wpath = dir.join("weight_matrix.csv");
    io::write_matrix(&wpath, &rows(&w))?;
    let mut outputs = vec![json, wpath];
    if a.victim == VictimArg::Spectral {
        let p = transition_matrix(&d, None)?;
        let ppath = dir.join("transition_matrix.csv");
        io::write_matrix(&ppath, &rows(p.entries()))?;
        outputs.push(ppath);
    }
    Ok(outputs)
}

fn rows(m: &nalgebra::DMatrix<f64>) -> Vec<Vec<f64>> {
    m.row_iter().map(|r| r.iter().copied().collect()).collect()
}

#[derive(Serialize)]
struct AttackResult {
    victim: &'static str,
    scenario: &'static str,
    target_t: usize,
    delta: f64,
    rrank: f64,
    kendall: f64,
    converged: bool,
    residual: f64,
    clamped_mass: f64,
    scale: f64,
    clean_ranking: Vec<usize>,
    target: Vec<usize>,
    observed: Vec<usize>,
}

fn scenario_code(s: ScenarioArg) -> &'static str {
    match s {
        ScenarioArg::Cp => "cp",
        ScenarioArg::Ip => "ip",
        ScenarioArg::Ci => "ci",
        ScenarioArg::Ii => "ii",
    }
}

fn attack(a: &AttackArgs) -> Result<Vec<PathBuf>> {
    let kind = a.victim.victim_kind();
    let clean = a.data.load()?;
    let (info, feedback) = scenario_parts(a.scenario, a.hidden_fraction);
    let data = match info {
        Information::Complete => clean,
        Information::Incomplete { hidden_fraction } => hide_fraction_seeded(&clean, hidden_fraction, a.data.seed)?,
    };
    let report = run_attack(kind, &data, feedback, a.target_t, &AttackOptions::default())?;
    ensure_dir(&a.out_dir)?;

    let poisoned = a.out_dir.join("poisoned.csv");
    io::write_dataset(&poisoned, &report.submitted, data.n())?;
    let original: Vec<f64> = data.weights().iter().map(|w| w * report.scale).collect();
    let real: Vec<f64> = report.real_weights.iter().map(|w| w * report.scale).collect();
    let pairs = a.out_dir.join("weights.csv");
    io::write_weight_pairs(
        &pairs,
        data.n(),
        &[("original", &original), ("real", &real), ("submitted", &report.submitted)],
    )?;
    let trace = a.out_dir.join("residuals.csv");
    io::write_rows(&trace, &report.trace)?;

    let result = AttackResult {
        victim: kind.name(),
        scenario: scenario_code(a.scenario),
        target_t: a.target_t,
        delta: report.delta,
        rrank: report.rrank,
        kendall: report.kendall,
        converged: report.converged,
        residual: report.residual,
        clamped_mass: report.clamped_mass,
        scale: report.scale,
        clean_ranking: one_based(&report.clean_ranking),
        target: one_based(&report.target),
        observed: one_based(&report.observed),
    };
    let json = a.out_dir.join("attack_result.json");
    io::write_json(&json, &result)?;
    println!(
        "rrank={} kendall={:.4} delta={} converged={} (target {:?}, observed {:?})",
        result.rrank, result.kendall, result.delta, result.converged, result.target, result.observed
    );
    Ok(vec![poisoned, pairs, trace, json])
}

fn evaluate(a: &EvaluateArgs) -> Result<Vec<PathBuf>> {
    if a.trials == 0 {
        bail!("--trials must be positive");
    }
    let source = match &a.data.input {
        Some(_) => DataSource::Fixed(a.data.load()?),
        None => DataSource::Simulated { n: a.data.n.unwrap_or(10), samples: a.data.samples },
    };
    let mut all = Vec::new();
    for &s in &a.scenario {
        let (info, feedback) = scenario_parts(s, a.hidden_fraction);
        let mut spec = ScenarioSpec::new(a.victim.victim_kind(), info, feedback);
        spec.trials = a.trials;
        spec.seed = a.data.seed;
        spec.target_t = a.target_t;
        spec.threshold = a.threshold;
        let rows = run_scenario(&spec, &source)?;
        println!("{} {}", spec.victim.name(), spec.code());
        for t in summarize(&rows) {
            println!(
                "  {:<14} mean_rrank={:.3} rrank1={}/{} kendall1={}/{} mean_delta={:.1}",
                t.strategy, t.mean_rrank, t.top1_hits, t.trials, t.exact_hits, t.trials, t.mean_delta
            );
        }
        all.extend(rows);
    }
    ensure_dir(&a.out_dir)?;
    let out = a.out_dir.join("results.csv");
    io::write_rows(&out, &all)?;
    Ok(vec![out])
}

fn main() -> Result<()> {
    let cli = Cli::parse();
    let (outputs, dir) = match &cli.command {
        Command::Simulate(a) => (simulate(a)?, Some(a.out_dir.as_path())),
        Command::Aggregate(a) => (aggregate(a)?, a.out_dir.as_deref()),
        Command::Attack(a) => (attack(a)?, Some(a.out_dir.as_path())),
        Command::Evaluate(a) => (evaluate(a)?, Some(a.out_dir.as_path())),
    };
    write_manifest(&cli, dir, &outputs)
}
