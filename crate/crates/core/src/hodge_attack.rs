//! Targeted poisoning of HodgeRank.
//!
//! The victim's regularized optimality condition
//! `(C^T W C + 2 lambda0 I) theta = C^T W y` is affine in the weights, so it
//! can be written `B_theta w = b_theta` with `B_theta = C^T diag(C theta - y)`
//! and `b_theta = -2 lambda0 theta`. The attacker looks for the nonnegative
//! weights closest to its own data that make the target scores optimal.
//!
//! With incomplete information the attacker also estimates the hidden part
//! `w_u` by requiring that its own data plus `w_u` reproduce the victim's
//! observed scores. Both problems are solved by ADMM; every block update is
//! an exact nonnegative QP, so the augmented Lagrangian never increases
//! between multiplier updates.

use nalgebra::{DMatrix, DVector};
use serde::{Deserialize, Serialize};

use crate::comparison::{EdgeIndexer, Ranking};
use crate::error::{check_len, Error, Result};
use crate::qp::NonnegQp;

/// ADMM parameters. `eta` scales the multiplier step.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct AdmmConfig {
    pub rho1: f64,
    pub rho2: f64,
    pub gamma: f64,
    pub eta: f64,
    pub max_iter: usize,
    pub tol_residual: f64,
}

impl Default for AdmmConfig {
    fn default() -> Self {
        Self { rho1: 1.0, rho2: 1.0, gamma: 1.0, eta: 1.0, max_iter: 20_000, tol_residual: 1e-8 }
    }
}

impl AdmmConfig {
    fn validate(&self) -> Result<()> {
        let ok = self.rho1 > 0.0
            && self.rho2 > 0.0
            && self.gamma > 0.0
            && self.eta > 0.0
            && self.eta < (1.0 + 5f64.sqrt()) / 2.0
            && self.tol_residual > 0.0
            && self.max_iter > 0;
        if ok {
            Ok(())
        } else {
            Err(Error::InvalidArgument(format!("bad ADMM configuration {self:?}")))
        }
    }
}

/// Inputs of one attack. Weights are normalized by the caller (typically to
/// unit total); `theta_r` is the victim's observed score vector and is
/// ignored by [`attack_complete`].
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct HodgeAttackProblem {
    pub n: usize,
    pub y: Vec<f64>,
    pub w_known: Vec<f64>,
    pub theta_r: Vec<f64>,
    pub theta_a: Vec<f64>,
    pub lambda0: f64,
    /// Edges the surrogate `w_u` may occupy (the hidden ones). `None` lets
    /// it use every edge, which can let it absorb the whole manipulation.
    pub hidden_support: Option<Vec<bool>>,
    pub admm: AdmmConfig,
}

impl HodgeAttackProblem {
    /// Problem with `y = 1`, `lambda0 = 1e-6` and default ADMM settings.
    pub fn new(n: usize, w_known: Vec<f64>, theta_r: Vec<f64>, theta_a: Vec<f64>) -> Result<Self> {
        let len = EdgeIndexer::new(n)?.len();
        let p = Self {
            n,
            y: vec![1.0; len],
            w_known,
            theta_r,
            theta_a,
            lambda0: 1e-6,
            hidden_support: None,
            admm: AdmmConfig::default(),
        };
        p.validate()?;
        Ok(p)
    }

    fn validate(&self) -> Result<()> {
        let len = EdgeIndexer::new(self.n)?.len();
        check_len(len, self.y.len())?;
        check_len(len, self.w_known.len())?;
        check_len(self.n, self.theta_r.len())?;
        check_len(self.n, self.theta_a.len())?;
        if let Some(h) = &self.hidden_support {
            check_len(len, h.len())?;
        }
        if self.w_known.iter().any(|w| !w.is_finite() || *w < 0.0) {
            return Err(Error::InvalidWeights("known weights must be finite and nonnegative".into()));
        }
        if !(self.lambda0 > 0.0) {
            return Err(Error::InvalidArgument("lambda0 must be positive".into()));
        }
        self.admm.validate()
    }
}

/// `(B_theta, b_theta)` such that `B_theta w - b_theta` equals the residual of
/// the regularized HodgeRank normal equations at `theta` for weights `w`.
pub fn constraint_operator(theta: &[f64], y: &[f64], lambda0: f64) -> Result<(DMatrix<f64>, DVector<f64>)> {
    let n = theta.len();
    let idx = EdgeIndexer::new(n)?;
    check_len(idx.len(), y.len())?;
    let mut b_mat = DMatrix::zeros(n, idx.len());
    for (m, i, j) in idx.iter() {
        let r = theta[i] - theta[j] - y[m];
        b_mat[(i, m)] = r;
        b_mat[(j, m)] = -r;
    }
    let b = DVector::from_iterator(n, theta.iter().map(|t| -2.0 * lambda0 * t));
    Ok((b_mat, b))
}

/// Reassigns the values of `theta_r` so that their order follows `target`:
/// the best-ranked candidate receives the largest value, and so on.
pub fn permute_target_scores(theta_r: &[f64], target: &Ranking) -> Result<Vec<f64>> {
    check_len(theta_r.len(), target.len())?;
    let mut sorted = theta_r.to_vec();
    sorted.sort_by(|a, b| b.total_cmp(a));
    let mut out = vec![0.0; theta_r.len()];
    for (k, &c) in target.as_slice().iter().enumerate() {
        out[c] = sorted[k];
    }
    Ok(out)
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ResidualRecord {
    pub iter: usize,
    pub primal_res: f64,
    pub dual_res: f64,
}

/// Iterates of the ADMM run.
#[derive(Debug, Clone, PartialEq)]
pub struct AdmmState {
    pub w_k: DVector<f64>,
    pub w_u: DVector<f64>,
    pub mu1: DVector<f64>,
    pub mu2: DVector<f64>,
    pub iterations: usize,
    pub trace: Vec<ResidualRecord>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct HodgeAttackOutcome {
    /// Replacement for the attacker's accessible weights.
    pub w_k: Vec<f64>,
    /// Surrogate of the hidden weights (all zero under complete information).
    pub w_u: Vec<f64>,
    pub residual: f64,
    pub iterations: usize,
    pub trace: Vec<ResidualRecord>,
}

/// Assembled operators of one attack, shared by the solver and by tests
/// that evaluate the augmented Lagrangian.
pub struct AdmmSystem {
    w_star: DVector<f64>,
    b_r: DMatrix<f64>,
    c_r: DVector<f64>,
    b_a: DMatrix<f64>,
    c_a: DVector<f64>,
    // Operators acting on w_u: columns outside the hidden support are zero.
    b_r_u: DMatrix<f64>,
    b_a_u: DMatrix<f64>,
    cfg: AdmmConfig,
    complete: bool,
}

fn check_target_gauge(theta: &[f64], what: &str) -> Result<()> {
    let s: f64 = theta.iter().sum();
    let scale = theta.iter().fold(1e-300f64, |a, t| a.max(t.abs()));
    // Columns of B sum to zero, so B w = -2 lambda0 theta needs sum(theta) = 0.
    if s.abs() > 1e-9 * scale.max(1.0) {
        return Err(Error::InfeasibleTarget(format!("{what} scores must sum to zero, got {s:e}")));
    }
    Ok(())
}

impl AdmmSystem {
    pub fn new(p: &HodgeAttackProblem, complete: bool) -> Result<Self> {
        p.validate()?;
        check_target_gauge(&p.theta_a, "target")?;
        if !complete {
            check_target_gauge(&p.theta_r, "observed")?;
        }
        let (b_r, c_r) = constraint_operator(&p.theta_r, &p.y, p.lambda0)?;
        let (b_a, c_a) = constraint_operator(&p.theta_a, &p.y, p.lambda0)?;
        let (mut b_r_u, mut b_a_u) = (b_r.clone(), b_a.clone());
        if let Some(h) = &p.hidden_support {
            for (m, _) in h.iter().enumerate().filter(|(_, hid)| !**hid) {
                b_r_u.column_mut(m).fill(0.0);
                b_a_u.column_mut(m).fill(0.0);
            }
        }
        Ok(Self {
            b_r_u,
            b_a_u,
            w_star: DVector::from_column_slice(&p.w_known),
            b_r,
            c_r,
            b_a,
            c_a,
            cfg: p.admm,
            complete,
        })
    }

    fn r_residual(&self, w_u: &DVector<f64>) -> DVector<f64> {
        &self.b_r * &self.w_star + &self.b_r_u * w_u - &self.c_r
    }

    fn a_residual(&self, w_k: &DVector<f64>, w_u: &DVector<f64>) -> DVector<f64> {
        &self.b_a * w_k + &self.b_a_u * w_u - &self.c_a
    }

    fn primal_residual(&self, s: &AdmmState) -> f64 {
        let a = self.a_residual(&s.w_k, &s.w_u).norm_squared();
        let r = if self.complete { 0.0 } else { self.r_residual(&s.w_u).norm_squared() };
        (a + r).sqrt()
    }

    /// Augmented Lagrangian at the given iterate.
    pub fn augmented_lagrangian(&self, s: &AdmmState) -> f64 {
        let ra = self.a_residual(&s.w_k, &s.w_u);
        let mut l = 0.5 * (&s.w_k - &self.w_star).norm_squared() + s.mu2.dot(&ra) + 0.5 * self.cfg.rho2 * ra.norm_squared();
        if !self.complete {
            let rr = self.r_residual(&s.w_u);
            l += s.mu1.dot(&rr) + 0.5 * self.cfg.rho1 * rr.norm_squared();
        }
        l
    }

    pub fn initial_state(&self) -> AdmmState {
        let (n, len) = self.b_a.shape();
        AdmmState {
            w_k: self.w_star.clone(),
            w_u: DVector::zeros(len),
            mu1: DVector::zeros(n),
            mu2: DVector::zeros(n),
            iterations: 0,
            trace: Vec::new(),
        }
    }

    /// Runs ADMM to convergence. `observer` sees the state after each of the
    /// two primal block updates (tag 0 and 1) and after the multiplier update
    /// (tag 2).
    pub fn run_with<F: FnMut(u8, &AdmmState)>(&self, mut observer: F) -> Result<AdmmState> {
        let cfg = self.cfg;
        let len = self.w_star.len();
        let bta = self.b_a.transpose();
        let btr_u = self.b_r_u.transpose();
        let bta_u = self.b_a_u.transpose();
        let gram_a = &bta * &self.b_a;
        let eye = DMatrix::<f64>::identity(len, len);
        let qp_k = NonnegQp::new(&eye + &gram_a * cfg.rho2)?;
        let qp_u = if self.complete {
            None
        } else {
            let h = &eye / cfg.gamma + (&btr_u * &self.b_r_u) * cfg.rho1 + (&bta_u * &self.b_a_u) * cfg.rho2;
            Some(NonnegQp::new(h)?)
        };

        let mut s = self.initial_state();
        let mut history: Vec<f64> = Vec::new();
        for it in 1..=cfg.max_iter {
            // w_k block.
            let q = &self.w_star - &bta * &s.mu2 - &bta * (&self.b_a_u * &s.w_u - &self.c_a) * cfg.rho2;
            let w_k = qp_k.solve(&q);
            let dk = (&w_k - &s.w_k).norm();
            s.w_k = w_k;
            observer(0, &s);

            // Proximal w_u block.
            let mut du = 0.0;
            if let Some(qp_u) = &qp_u {
                let q = &s.w_u / cfg.gamma
                    - &btr_u * &s.mu1
                    - &btr_u * (&self.b_r * &self.w_star - &self.c_r) * cfg.rho1
                    - &bta_u * &s.mu2
                    - &bta_u * (&self.b_a * &s.w_k - &self.c_a) * cfg.rho2;
                let w_u = qp_u.solve(&q);
                du = (&w_u - &s.w_u).norm();
                s.w_u = w_u;
            }
            observer(1, &s);

            // Multipliers.
            let ra = self.a_residual(&s.w_k, &s.w_u);
            s.mu2 += ra * (cfg.eta * cfg.rho2);
            if !self.complete {
                let rr = self.r_residual(&s.w_u);
                s.mu1 += rr * (cfg.eta * cfg.rho1);
            }
            observer(2, &s);

            let primal = self.primal_residual(&s);
            s.iterations = it;
            s.trace.push(ResidualRecord { iter: it, primal_res: primal, dual_res: if self.complete { dk } else { du } });
            history.push(primal);
            // The surrogate w_u may keep drifting along directions that do not
            // affect the objective; stationarity of w_k is what matters.
            if primal <= cfg.tol_residual && dk <= cfg.tol_residual {
                return Ok(s);
            }
        }
        let residual = *history.last().unwrap_or(&f64::INFINITY);
        if residual <= cfg.tol_residual {
            return Ok(s);
        }
        // A residual that has stopped improving points at an unreachable target.
        let tail = cfg.max_iter / 10;
        if !self.complete && tail > 0 {
            let earlier = history[history.len() - 1 - tail];
            if residual > 0.99 * earlier {
                return Err(Error::InfeasibleTarget(format!(
                    "residual plateaued at {residual:e} (was {earlier:e} {tail} iterations earlier)"
                )));
            }
        }
        Err(Error::NoConvergence { iterations: cfg.max_iter, residual })
    }

    pub fn run(&self) -> Result<AdmmState> {
        self.run_with(|_, _| {})
    }
}

fn outcome(sys: &AdmmSystem, s: AdmmState) -> HodgeAttackOutcome {
    HodgeAttackOutcome {
        residual: sys.primal_residual(&s),
        w_k: s.w_k.iter().copied().collect(),
        w_u: s.w_u.iter().copied().collect(),
        iterations: s.iterations,
        trace: s.trace,
    }
}

/// Complete information: the nonnegative weights closest to `w_known` for
/// which `theta_a` is the victim's solution.
pub fn attack_complete(p: &HodgeAttackProblem) -> Result<HodgeAttackOutcome> {
    let sys = AdmmSystem::new(p, true)?;
    let s = sys.run()?;
    Ok(outcome(&sys, s))
}

/// Incomplete information: jointly estimates the hidden weights `w_u` from
/// the observed scores `theta_r` and computes the replacement `w_k`.
pub fn attack_incomplete(p: &HodgeAttackProblem) -> Result<HodgeAttackOutcome> {
    let sys = AdmmSystem::new(p, false)?;
    let s = sys.run()?;
    Ok(outcome(&sys, s))
}
