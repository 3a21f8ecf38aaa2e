//! End-to-end attack runs and the multi-trial experiment runner.
//!
//! A trial aggregates clean data, derives the attacker's view of the
//! victim's output (exact scores, or positional scores of the ranking only),
//! moves the candidate at position `t` to the top, runs the matching attack,
//! submits integer counts, and re-aggregates. The three baselines are then
//! given the same number of unit modifications.

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::aggregate::{walk_limit, HodgeConfig, SpectralConfig, Victim};
use crate::baselines::{ipco_delta, run_baseline, OracleParams, Strategy};
use crate::comparison::{integerize_weights, transition_matrix, PairwiseDataset, Ranking};
use crate::error::{Error, Result};
use crate::hodge_attack::{attack_complete, attack_incomplete, permute_target_scores, AdmmConfig, HodgeAttackProblem, ResidualRecord};
use crate::markov::MatrixKind;
use crate::metrics::{build_target_ranking, kendall_tau, reciprocal_rank, scores_from_ranking};
use crate::simulate::{hide_fraction, simulate_btl, SimulationSpec};
use crate::spectral_attack::{attack_rank_centrality, PairTotals, SpectralAttackConfig};

use nalgebra::DMatrix;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum VictimKind {
    HodgeRank,
    RankCentrality(MatrixKind),
}

impl VictimKind {
    pub fn name(self) -> &'static str {
        match self {
            Self::HodgeRank => "hodge",
            Self::RankCentrality(MatrixKind::Reversible) => "spectral-reversible",
            Self::RankCentrality(MatrixKind::Irreversible) => "spectral-irreversible",
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub enum Information {
    Complete,
    Incomplete { hidden_fraction: f64 },
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum Feedback {
    /// The attacker sees the victim's scores.
    Perfect,
    /// The attacker sees only the victim's ranking.
    Imperfect,
}

/// Knobs shared by every attack run.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct AttackOptions {
    pub hodge: HodgeConfig,
    pub spectral: SpectralConfig,
    pub admm: AdmmConfig,
    /// Largest power of two tried as a data multiplier when rounding to
    /// integer counts breaks the target order (complete information only).
    pub max_doublings: u32,
}

impl Default for AttackOptions {
    fn default() -> Self {
        Self {
            hodge: HodgeConfig::default(),
            spectral: SpectralConfig::default(),
            admm: AdmmConfig::default(),
            max_doublings: 10,
        }
    }
}

/// Outcome of one proposed attack.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct AttackReport {
    pub delta: f64,
    pub rrank: f64,
    pub kendall: f64,
    pub converged: bool,
    pub residual: f64,
    pub clamped_mass: f64,
    /// Multiplier applied to the clean counts before rounding.
    pub scale: f64,
    pub target: Ranking,
    /// Scores the attack aimed for.
    pub target_scores: Vec<f64>,
    pub clean_ranking: Ranking,
    pub observed: Ranking,
    /// Real-valued replacement for the attacker's data, at the clean scale.
    pub real_weights: Vec<f64>,
    /// Integer counts the victim finally aggregates (attacker's part plus hidden part).
    pub submitted: Vec<f64>,
    #[serde(skip)]
    pub trace: Vec<ResidualRecord>,
}

/// The victim's ranking of submitted data. Poisoned data can leave some
/// candidate without wins, making the walk reducible; the victim's power
/// iteration then still settles, and its limit is what gets published.
fn observe(victim: &Victim, d: &PairwiseDataset) -> Result<Ranking> {
    match (victim, victim.scores(d)) {
        (Victim::RankCentrality(cfg), Err(Error::ReducibleChain)) => {
            Ok(Ranking::from_scores(&walk_limit(&transition_matrix(d, None)?, cfg)?))
        }
        (_, r) => Ok(Ranking::from_scores(&r?)),
    }
}

fn victim_of(kind: VictimKind, opts: &AttackOptions) -> Victim {
    match kind {
        VictimKind::HodgeRank => Victim::HodgeRank(opts.hodge),
        VictimKind::RankCentrality(_) => Victim::RankCentrality(opts.spectral),
    }
}

/// Pair totals the attacker can infer: exact on fully visible pairs, the
/// mean visible pair total elsewhere.
pub fn attacker_pair_totals(d: &PairwiseDataset) -> PairTotals {
    let n = d.n();
    let idx = d.indexer();
    let visible = |i: usize, j: usize| d.is_known(idx.index(i, j)) && d.is_known(idx.index(j, i));
    let (mut sum, mut cnt) = (0.0, 0usize);
    for i in 0..n {
        for j in i + 1..n {
            if visible(i, j) {
                sum += d.pair_total(i, j);
                cnt += 1;
            }
        }
    }
    let mean = if cnt > 0 { sum / cnt as f64 } else { d.total() / (n * (n - 1) / 2) as f64 };
    PairTotals::PerPair(DMatrix::from_fn(n, n, |i, j| {
        if i == j {
            0.0
        } else if visible(i, j) {
            d.pair_total(i, j)
        } else {
            mean
        }
    }))
}

struct Plan {
    w_k: Vec<f64>,
    converged: bool,
    residual: f64,
    clamped_mass: f64,
    trace: Vec<ResidualRecord>,
}

fn plan_attack(
    kind: VictimKind,
    d: &PairwiseDataset,
    theta_r: &[f64],
    theta_a: &[f64],
    opts: &AttackOptions,
) -> Result<Plan> {
    let known = d.known_weights();
    let complete = d.known_mask().is_none_or(|m| m.iter().all(|k| *k));
    match kind {
        VictimKind::HodgeRank => {
            let scale: f64 = known.iter().sum();
            if scale <= 0.0 {
                return Err(Error::InvalidWeights("attacker has no data".into()));
            }
            // Normalized weights with lambda0 / scale describe the same
            // optimality condition as the raw counts with lambda0.
            let mut p = HodgeAttackProblem::new(
                d.n(),
                known.iter().map(|w| w / scale).collect(),
                theta_r.to_vec(),
                theta_a.to_vec(),
            )?;
            p.lambda0 = opts.hodge.lambda0 / scale;
            p.hidden_support = d.known_mask().map(|m| m.iter().map(|k| !k).collect());
            p.admm = opts.admm;
            let run = if complete { attack_complete(&p) } else { attack_incomplete(&p) };
            match run {
                Ok(o) => Ok(Plan {
                    w_k: o.w_k.iter().map(|w| w * scale).collect(),
                    converged: true,
                    residual: o.residual,
                    clamped_mass: 0.0,
                    trace: o.trace,
                }),
                Err(Error::NoConvergence { residual, .. }) => Ok(Plan {
                    w_k: known,
                    converged: false,
                    residual,
                    clamped_mass: 0.0,
                    trace: Vec::new(),
                }),
                Err(Error::InfeasibleTarget(_)) if !complete => Ok(Plan {
                    w_k: known,
                    converged: false,
                    residual: f64::NAN,
                    clamped_mass: 0.0,
                    trace: Vec::new(),
                }),
                Err(e) => Err(e),
            }
        }
        VictimKind::RankCentrality(matrix) => {
            let mut cfg = SpectralAttackConfig::new(matrix);
            cfg.totals = attacker_pair_totals(d);
            let o = attack_rank_centrality(d, theta_r, theta_a, &cfg)?;
            Ok(Plan {
                w_k: o.w_k,
                converged: !o.ill_conditioned,
                residual: 0.0,
                clamped_mass: o.clamped_mass,
                trace: Vec::new(),
            })
        }
    }
}

fn add(a: &[f64], b: &[f64]) -> Vec<f64> {
    a.iter().zip(b).map(|(x, y)| x + y).collect()
}

/// Observed scores the attacker starts from, and the target scores.
pub fn attacker_scores(
    kind: VictimKind,
    clean_scores: &[f64],
    feedback: Feedback,
    target: &Ranking,
) -> Result<(Vec<f64>, Vec<f64>)> {
    let clean = Ranking::from_scores(clean_scores);
    let s = match feedback {
        Feedback::Perfect => clean_scores.to_vec(),
        Feedback::Imperfect => scores_from_ranking(&clean),
    };
    let theta_r = if kind == VictimKind::HodgeRank {
        // HodgeRank scores live in the sum-zero gauge; this also removes
        // round-off drift from the victim's solve.
        let mean = s.iter().sum::<f64>() / s.len() as f64;
        s.iter().map(|v| v - mean).collect()
    } else {
        s
    };
    let theta_a = permute_target_scores(&theta_r, target)?;
    Ok((theta_r, theta_a))
}

/// Runs the proposed attack on `d`. The mask of `d` (if any) marks what the
/// attacker can see; the victim always aggregates everything.
pub fn run_attack(
    kind: VictimKind,
    d: &PairwiseDataset,
    feedback: Feedback,
    target_t: usize,
    opts: &AttackOptions,
) -> Result<AttackReport> {
    let victim = victim_of(kind, opts);
    let clean_scores = victim.scores(d)?;
    let clean_ranking = Ranking::from_scores(&clean_scores);
    let target = build_target_ranking(&clean_ranking, target_t)?;
    let (theta_r, theta_a) = attacker_scores(kind, &clean_scores, feedback, &target)?;
    let plan = plan_attack(kind, d, &theta_r, &theta_a, opts)?;

    let known = d.known_weights();
    let hidden = d.hidden_weights();
    let complete = hidden.iter().all(|h| *h == 0.0);
    let doublings = if complete { opts.max_doublings } else { 0 };
    let plan_total: f64 = plan.w_k.iter().sum();

    let mut first = None;
    for k in 0..=doublings {
        let m = f64::from(1u32 << k);
        let w_k = if plan_total > 0.0 {
            integerize_weights(&plan.w_k, (m * plan_total).round() as u64)?
        } else {
            vec![0.0; plan.w_k.len()]
        };
        let scaled_hidden: Vec<f64> = hidden.iter().map(|h| h * m).collect();
        let submitted = add(&w_k, &scaled_hidden);
        let observed = observe(&victim, &d.with_weights(submitted.clone())?)?;
        let scaled_known: Vec<f64> = known.iter().map(|w| w * m).collect();
        let report = AttackReport {
            delta: ipco_delta(&scaled_known, &w_k)?,
            rrank: reciprocal_rank(&target, &observed)?,
            kendall: kendall_tau(&target, &observed)?,
            converged: plan.converged,
            residual: plan.residual,
            clamped_mass: plan.clamped_mass,
            scale: m,
            target: target.clone(),
            target_scores: theta_a.clone(),
            clean_ranking: clean_ranking.clone(),
            observed: observed.clone(),
            real_weights: plan.w_k.clone(),
            submitted,
            trace: plan.trace.clone(),
        };
        if observed == target || !plan.converged {
            return Ok(report);
        }
        first.get_or_insert(report);
    }
    Ok(first.expect("at least one rounding attempt"))
}

/// One row of the results table.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TrialRecord {
    pub trial: usize,
    pub victim: String,
    pub scenario: String,
    pub target_t: usize,
    pub strategy: String,
    pub rrank: f64,
    pub kendall: f64,
    pub delta: f64,
    pub converged: bool,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ScenarioSpec {
    pub victim: VictimKind,
    pub information: Information,
    pub feedback: Feedback,
    pub target_t: usize,
    pub trials: usize,
    pub seed: u64,
    /// Threshold of the probabilistic baseline.
    pub threshold: f64,
    pub options: AttackOptions,
}

impl ScenarioSpec {
    pub fn new(victim: VictimKind, information: Information, feedback: Feedback) -> Self {
        Self {
            victim,
            information,
            feedback,
            target_t: 2,
            trials: 50,
            seed: 0,
            threshold: 0.6,
            options: AttackOptions::default(),
        }
    }

    /// Short scenario code: `c`/`i` for information, `p`/`i` for feedback.
    pub fn code(&self) -> String {
        let a = match self.information {
            Information::Complete => 'c',
            Information::Incomplete { .. } => 'i',
        };
        let b = match self.feedback {
            Feedback::Perfect => 'p',
            Feedback::Imperfect => 'i',
        };
        format!("{a}{b}")
    }
}

/// Where each trial's clean data comes from.
#[derive(Debug, Clone, PartialEq)]
pub enum DataSource {
    Fixed(PairwiseDataset),
    /// Re-simulated per trial with a trial-specific seed.
    Simulated { n: usize, samples: u64 },
}

fn trial_seed(seed: u64, trial: usize) -> u64 {
    seed.wrapping_mul(0x9E37_79B9_7F4A_7C15).wrapping_add(trial as u64)
}

fn rng_for(seed: u64, stream: u64) -> ChaCha8Rng {
    let mut r = ChaCha8Rng::seed_from_u64(seed);
    r.set_stream(stream);
    r
}

/// Runs one trial: the proposed attack followed by the three baselines.
pub fn run_trial(spec: &ScenarioSpec, source: &DataSource, trial: usize) -> Result<Vec<TrialRecord>> {
    let seed = trial_seed(spec.seed, trial);
    let clean = match source {
        DataSource::Fixed(d) => d.clone().without_mask(),
        DataSource::Simulated { n, samples } => simulate_btl(&SimulationSpec::new(*n, *samples, seed))?,
    };
    let data = match spec.information {
        Information::Complete => clean,
        Information::Incomplete { hidden_fraction } => hide_fraction(&clean, hidden_fraction, &mut rng_for(seed, 1))?,
    };
    let report = run_attack(spec.victim, &data, spec.feedback, spec.target_t, &spec.options)?;
    let record = |strategy: &str, rrank, kendall, delta, converged| TrialRecord {
        trial,
        victim: spec.victim.name().into(),
        scenario: spec.code(),
        target_t: spec.target_t,
        strategy: strategy.into(),
        rrank,
        kendall,
        delta,
        converged,
    };
    let mut out = vec![record("proposed", report.rrank, report.kendall, report.delta, report.converged)];

    let victim = victim_of(spec.victim, &spec.options);
    let start: Vec<f64> = data.known_weights().iter().map(|w| w * report.scale).collect();
    let hidden: Vec<f64> = data.hidden_weights().iter().map(|w| w * report.scale).collect();
    let params = OracleParams {
        target_ranking: Some(report.target.clone()),
        target_scores: Some(match spec.victim {
            VictimKind::HodgeRank => scores_from_ranking(&report.target),
            VictimKind::RankCentrality(_) => report.target_scores.clone(),
        }),
        threshold: spec.threshold,
    };
    let budget = report.delta.round() as u64;
    let cap = 100 * budget + 10 * start.len() as u64;
    for (s, strategy) in Strategy::ALL.into_iter().enumerate() {
        let mut rng = rng_for(seed, 2 + s as u64);
        let b = run_baseline(strategy, data.n(), &start, &params, budget, cap, &mut rng)?;
        let observed = observe(&victim, &data.with_weights(add(&b.weights, &hidden))?)?;
        out.push(record(
            strategy.name(),
            reciprocal_rank(&report.target, &observed)?,
            kendall_tau(&report.target, &observed)?,
            ipco_delta(&start, &b.weights)?,
            b.budget_used == budget,
        ));
    }
    Ok(out)
}

/// Runs all trials in parallel; rows are ordered by trial, then strategy.
pub fn run_scenario(spec: &ScenarioSpec, source: &DataSource) -> Result<Vec<TrialRecord>> {
    if let Information::Incomplete { hidden_fraction } = spec.information {
        if !(0.0..1.0).contains(&hidden_fraction) {
            return Err(Error::InvalidArgument(format!("hidden fraction {hidden_fraction}")));
        }
    }
    let rows: Vec<Vec<TrialRecord>> = (0..spec.trials)
        .into_par_iter()
        .map(|t| run_trial(spec, source, t))
        .collect::<Result<_>>()?;
    Ok(rows.into_iter().flatten().collect())
}

/// Per-strategy aggregates over a results table.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct StrategySummary {
    pub strategy: String,
    pub trials: usize,
    pub mean_rrank: f64,
    pub top1_hits: usize,
    pub exact_hits: usize,
    pub mean_delta: f64,
}

pub fn summarize(rows: &[TrialRecord]) -> Vec<StrategySummary> {
    let mut names: Vec<&str> = Vec::new();
    for r in rows {
        if !names.contains(&r.strategy.as_str()) {
            names.push(&r.strategy);
        }
    }
    names
        .into_iter()
        .map(|s| {
            let sel: Vec<&TrialRecord> = rows.iter().filter(|r| r.strategy == s).collect();
            let k = sel.len().max(1) as f64;
            StrategySummary {
                strategy: s.to_string(),
                trials: sel.len(),
                mean_rrank: sel.iter().map(|r| r.rrank).sum::<f64>() / k,
                top1_hits: sel.iter().filter(|r| r.rrank == 1.0).count(),
                exact_hits: sel.iter().filter(|r| r.kendall == 1.0).count(),
                mean_delta: sel.iter().map(|r| r.delta).sum::<f64>() / k,
            }
        })
        .collect()
}
