//! Seeded randomized campaigns over generated convex functions.
//!
//! Trial `i` draws everything it needs from the substream `(seed, "trial", i)`,
//! so a trial's inputs and outcome depend only on the configuration and its
//! index. Trials run in parallel and are folded in index order, which makes
//! the summary independent of scheduling.

mod sharpen;

pub use sharpen::{nelder_mead, sharpness_probe, Minimum, NelderMead, SharpnessRecord};

use std::time::Instant;

use rand::{Rng, RngCore};
use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::funcs::{random_convex, Family, Interval};
use crate::ineq::{evaluate, InequalityReport, Theorem, Tolerances, Verdict};
use crate::rng::substream;

/// Violation reproducers kept per theorem.
pub const MAX_VIOLATIONS_KEPT: usize = 16;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum ConfigError {
    #[error("trials must be at least 1")]
    NoTrials,
    #[error("theorem set is empty")]
    NoTheorems,
    #[error("family set is empty")]
    NoFamilies,
    #[error("{0} is not a function-level evaluator")]
    NotAnEvaluator(Theorem),
    #[error("family '{0}' cannot be generated")]
    NotGenerated(Family),
    #[error("interval bounds need 0 < lo and lo + 0.05·lo <= hi, got lo = {lo}, hi = {hi}")]
    Bounds { lo: f64, hi: f64 },
    #[error("tolerance must be positive and finite, got {0}")]
    Tolerance(f64),
    #[error("iterations must be at least 1")]
    NoIterations,
    #[error("invalid configuration: {0}")]
    Invalid(String),
}

fn default_theorems() -> Vec<Theorem> {
    vec![Theorem::Hadamard, Theorem::Thm21, Theorem::Thm22, Theorem::Thm23]
}

fn default_families() -> Vec<Family> {
    Family::GENERATED.to_vec()
}

fn default_trials() -> u64 {
    100
}

fn default_lo() -> f64 {
    0.1
}

fn default_hi() -> f64 {
    10.0
}

/// Sweeps run many triple integrals; quadrature error still widens each
/// verdict band, so a looser tolerance costs sharpness, not soundness.
pub const DEFAULT_SWEEP_TOL: f64 = 1e-8;

fn default_tol() -> f64 {
    DEFAULT_SWEEP_TOL
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SweepConfig {
    #[serde(default = "default_theorems")]
    pub theorems: Vec<Theorem>,
    #[serde(default = "default_families")]
    pub families: Vec<Family>,
    #[serde(default = "default_trials")]
    pub trials: u64,
    #[serde(default)]
    pub seed: u64,
    #[serde(default = "default_lo")]
    pub lo: f64,
    #[serde(default = "default_hi")]
    pub hi: f64,
    /// Quadrature tolerance.
    #[serde(default = "default_tol")]
    pub tol: f64,
}

impl Default for SweepConfig {
    fn default() -> Self {
        SweepConfig {
            theorems: default_theorems(),
            families: default_families(),
            trials: default_trials(),
            seed: 0,
            lo: default_lo(),
            hi: default_hi(),
            tol: default_tol(),
        }
    }
}

impl SweepConfig {
    pub fn validate(&self) -> Result<(), ConfigError> {
        if self.trials == 0 {
            return Err(ConfigError::NoTrials);
        }
        if self.theorems.is_empty() {
            return Err(ConfigError::NoTheorems);
        }
        if let Some(&t) = self.theorems.iter().find(|t| !Theorem::EVALUATORS.contains(t)) {
            return Err(ConfigError::NotAnEvaluator(t));
        }
        if self.families.is_empty() {
            return Err(ConfigError::NoFamilies);
        }
        if let Some(&f) = self.families.iter().find(|f| !Family::GENERATED.contains(f)) {
            return Err(ConfigError::NotGenerated(f));
        }
        if !(self.lo > 0.0 && self.hi.is_finite() && self.lo + min_width(self.lo) <= self.hi) {
            return Err(ConfigError::Bounds { lo: self.lo, hi: self.hi });
        }
        if !(self.tol > 0.0 && self.tol.is_finite()) {
            return Err(ConfigError::Tolerance(self.tol));
        }
        Ok(())
    }

    pub fn tolerances(&self) -> Tolerances {
        Tolerances::with_quad(self.tol)
    }
}

fn min_width(lo: f64) -> f64 {
    0.05 * lo
}

fn log_uniform<R: Rng>(rng: &mut R, lo: f64, hi: f64) -> f64 {
    (rng.random_range(lo.ln()..=hi.ln())).exp().clamp(lo, hi)
}

/// Endpoints drawn log-uniformly in `[lo, hi]`, widened to at least `0.05·lo`.
pub fn draw_interval<R: Rng>(rng: &mut R, lo: f64, hi: f64) -> Interval {
    let u = log_uniform(rng, lo, hi);
    let v = log_uniform(rng, lo, hi);
    let (mut a, mut b) = (u.min(v), u.max(v));
    let w = min_width(lo);
    if b - a < w {
        b = (a + w).min(hi);
        a = b - w;
    }
    Interval::new(a, b).expect("validated bounds give a proper interval")
}

/// Everything needed to regenerate one trial's function and re-run it.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Reproducer {
    pub trial: u64,
    pub family: Family,
    pub function_seed: u64,
    pub function: String,
    pub interval: Interval,
    pub verdict: Verdict,
    pub slack: f64,
}

impl Reproducer {
    /// Regenerates the function and re-evaluates `theorem` on it.
    pub fn replay(&self, theorem: Theorem, tol: &Tolerances) -> Result<InequalityReport, crate::Error> {
        let f = random_convex(self.function_seed, self.family, self.interval)?;
        Ok(evaluate(theorem, &f, tol)?)
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TheoremSummary {
    pub theorem: Theorem,
    pub trials: u64,
    pub holds: u64,
    pub equality: u64,
    pub violated: u64,
    pub inconclusive: u64,
    /// Trials whose precondition failed (midpoint value at or below tolerance).
    pub skipped_precondition: u64,
    pub min_slack: Option<Reproducer>,
    pub violations: Vec<Reproducer>,
}

impl TheoremSummary {
    fn new(theorem: Theorem) -> Self {
        TheoremSummary {
            theorem,
            trials: 0,
            holds: 0,
            equality: 0,
            violated: 0,
            inconclusive: 0,
            skipped_precondition: 0,
            min_slack: None,
            violations: Vec::new(),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SweepSummary {
    pub config: SweepConfig,
    pub theorems: Vec<TheoremSummary>,
    pub wall_time_s: f64,
}

impl SweepSummary {
    pub fn total_violated(&self) -> u64 {
        self.theorems.iter().map(|t| t.violated).sum()
    }

    pub fn total_inconclusive(&self) -> u64 {
        self.theorems.iter().map(|t| t.inconclusive).sum()
    }

    pub fn theorem(&self, t: Theorem) -> Option<&TheoremSummary> {
        self.theorems.iter().find(|s| s.theorem == t)
    }
}

enum Outcome {
    Judged(Verdict, f64),
    Skipped,
    Failed,
}

struct Trial {
    family: Family,
    function_seed: u64,
    function: Option<String>,
    interval: Interval,
    outcomes: Vec<Outcome>,
}

fn run_trial(cfg: &SweepConfig, tol: &Tolerances, index: u64) -> Trial {
    let mut rng = substream(cfg.seed, "trial", index);
    let family = cfg.families[rng.random_range(0..cfg.families.len())];
    let interval = draw_interval(&mut rng, cfg.lo, cfg.hi);
    let function_seed = rng.next_u64();
    let f = match random_convex(function_seed, family, interval) {
        Ok(f) => f,
        Err(_) => {
            return Trial {
                family,
                function_seed,
                function: None,
                interval,
                outcomes: cfg.theorems.iter().map(|_| Outcome::Failed).collect(),
            }
        }
    };
    let outcomes = cfg
        .theorems
        .iter()
        .map(|&t| {
            if t == Theorem::Thm22 {
                match f.eval(interval.midpoint()) {
                    Ok(fm) if fm <= tol.abs => return Outcome::Skipped,
                    Err(_) => return Outcome::Failed,
                    _ => {}
                }
            }
            match evaluate(t, &f, tol) {
                Ok(r) => Outcome::Judged(r.verdict, r.slack),
                Err(_) => Outcome::Failed,
            }
        })
        .collect();
    Trial { family, function_seed, function: Some(f.spec()), interval, outcomes }
}

/// Runs the configured campaign on the current rayon pool.
pub fn run_sweep(cfg: &SweepConfig) -> Result<SweepSummary, ConfigError> {
    cfg.validate()?;
    let started = Instant::now();
    let tol = cfg.tolerances();
    let trials: Vec<Trial> = (0..cfg.trials).into_par_iter().map(|i| run_trial(cfg, &tol, i)).collect();

    let mut summaries: Vec<TheoremSummary> = cfg.theorems.iter().map(|&t| TheoremSummary::new(t)).collect();
    for (index, trial) in trials.iter().enumerate() {
        for (s, outcome) in summaries.iter_mut().zip(&trial.outcomes) {
            s.trials += 1;
            let (verdict, slack) = match *outcome {
                Outcome::Skipped => {
                    s.skipped_precondition += 1;
                    continue;
                }
                Outcome::Failed => {
                    s.inconclusive += 1;
                    continue;
                }
                Outcome::Judged(v, slack) => (v, slack),
            };
            match verdict {
                Verdict::Holds => s.holds += 1,
                Verdict::Equality => s.equality += 1,
                Verdict::Violated => s.violated += 1,
                Verdict::Inconclusive => s.inconclusive += 1,
            }
            let repro = || Reproducer {
                trial: index as u64,
                family: trial.family,
                function_seed: trial.function_seed,
                function: trial.function.clone().unwrap_or_default(),
                interval: trial.interval,
                verdict,
                slack,
            };
            if verdict == Verdict::Violated && s.violations.len() < MAX_VIOLATIONS_KEPT {
                s.violations.push(repro());
            }
            if verdict != Verdict::Inconclusive && s.min_slack.as_ref().is_none_or(|m| slack < m.slack) {
                s.min_slack = Some(repro());
            }
        }
    }
    Ok(SweepSummary { config: cfg.clone(), theorems: summaries, wall_time_s: started.elapsed().as_secs_f64() })
}
