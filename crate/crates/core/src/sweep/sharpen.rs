//! Derivative-free search for near-equality cases.

use serde::{Deserialize, Serialize};

use super::ConfigError;
use crate::funcs::{ConvexFunction, Family, FamilyParams, Interval};
use crate::ineq::{evaluate, Theorem, Tolerances, Verdict};
use crate::rng::substream;

/// Nelder–Mead coefficients.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct NelderMead {
    pub reflect: f64,
    pub expand: f64,
    pub contract: f64,
    pub shrink: f64,
}

impl Default for NelderMead {
    fn default() -> Self {
        NelderMead { reflect: 1.0, expand: 2.0, contract: 0.5, shrink: 0.5 }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct Minimum {
    pub x: Vec<f64>,
    pub value: f64,
    /// Best value after each iteration; non-increasing.
    pub trace: Vec<f64>,
    pub evaluations: usize,
}

fn lincomb(p: &[f64], q: &[f64], t: f64) -> Vec<f64> {
    // p + t·(q − p)
    p.iter().zip(q).map(|(a, b)| a + t * (b - a)).collect()
}

/// Minimizes `f` from `x0` for exactly `iterations` iterations. NaN values
/// are treated as `+inf`.
pub fn nelder_mead<F: FnMut(&[f64]) -> f64>(mut f: F, x0: &[f64], iterations: usize, coef: NelderMead) -> Minimum {
    let n = x0.len();
    let mut evaluations = 0;
    let mut eval = |x: &[f64]| {
        evaluations += 1;
        let v = f(x);
        if v.is_nan() {
            f64::INFINITY
        } else {
            v
        }
    };
    let mut simplex: Vec<(Vec<f64>, f64)> = Vec::with_capacity(n + 1);
    simplex.push((x0.to_vec(), eval(x0)));
    for i in 0..n {
        let mut x = x0.to_vec();
        x[i] += 0.1 * x[i].abs().max(0.25);
        let v = eval(&x);
        simplex.push((x, v));
    }
    let mut trace = Vec::with_capacity(iterations);
    for _ in 0..iterations {
        simplex.sort_by(|a, b| a.1.total_cmp(&b.1));
        let best = simplex[0].1;
        let second_worst = simplex[n.saturating_sub(1)].1;
        let (worst_x, worst) = simplex[n].clone();
        let mut centroid = vec![0.0; n];
        for (x, _) in &simplex[..n] {
            for (c, xi) in centroid.iter_mut().zip(x) {
                *c += xi / n as f64;
            }
        }
        let xr = lincomb(&centroid, &worst_x, -coef.reflect);
        let fr = eval(&xr);
        if fr < best {
            let xe = lincomb(&centroid, &xr, coef.expand);
            let fe = eval(&xe);
            simplex[n] = if fe < fr { (xe, fe) } else { (xr, fr) };
        } else if fr < second_worst {
            simplex[n] = (xr, fr);
        } else {
            let (xc, fc) = if fr < worst {
                let xc = lincomb(&centroid, &xr, coef.contract);
                let fc = eval(&xc);
                (xc, fc)
            } else {
                let xc = lincomb(&centroid, &worst_x, coef.contract);
                let fc = eval(&xc);
                (xc, fc)
            };
            if fc < fr.min(worst) {
                simplex[n] = (xc, fc);
            } else {
                let anchor = simplex[0].0.clone();
                for vertex in simplex.iter_mut().skip(1) {
                    let x = lincomb(&anchor, &vertex.0, coef.shrink);
                    let v = eval(&x);
                    *vertex = (x, v);
                }
            }
        }
        let current = simplex.iter().map(|s| s.1).fold(f64::INFINITY, f64::min);
        trace.push(current.min(trace.last().copied().unwrap_or(f64::INFINITY)));
    }
    simplex.sort_by(|a, b| a.1.total_cmp(&b.1));
    let (x, value) = simplex.swap_remove(0);
    Minimum { x, value, trace, evaluations }
}

/// Outcome of a sharpness search.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SharpnessRecord {
    pub theorem: Theorem,
    pub family: Family,
    pub domain: Interval,
    pub seed: u64,
    pub iterations: usize,
    /// Raw slack at the best parameters.
    pub best_slack: f64,
    /// `slack / (1 + |rhs|)` at the best parameters; the minimized quantity.
    pub best_objective: f64,
    pub best_params: FamilyParams,
    pub best_function: String,
    pub trace: Vec<f64>,
    pub evaluations: usize,
}

/// Relative slack of `theorem` for the family member with parameters `v`;
/// `+inf` when the member cannot be built, fails certification, or the
/// evaluation is not conclusive.
fn objective(theorem: Theorem, family: Family, domain: Interval, v: &[f64], tol: &Tolerances) -> Option<(f64, f64)> {
    if v.iter().any(|x| !x.is_finite()) {
        return None;
    }
    let params = FamilyParams::from_vec(family, v).ok()?;
    let f = ConvexFunction::from_params(&params, domain).ok()?;
    let r = evaluate(theorem, &f, tol).ok()?;
    if r.verdict == Verdict::Inconclusive {
        return None;
    }
    Some((r.slack / (1.0 + r.rhs().abs()), r.slack))
}

/// Nelder–Mead over the parameters of `family`, minimizing relative slack.
/// The start point is a random draw from `(seed, "sharpen")`.
pub fn sharpness_probe(
    theorem: Theorem,
    family: Family,
    domain: Interval,
    seed: u64,
    iterations: usize,
    tol: &Tolerances,
) -> Result<SharpnessRecord, ConfigError> {
    if !Theorem::EVALUATORS.contains(&theorem) {
        return Err(ConfigError::NotAnEvaluator(theorem));
    }
    if !Family::GENERATED.contains(&family) {
        return Err(ConfigError::NotGenerated(family));
    }
    if iterations == 0 {
        return Err(ConfigError::NoIterations);
    }
    let mut rng = substream(seed, "sharpen", 0);
    let start = FamilyParams::draw(&mut rng, family, domain).map_err(|e| ConfigError::Invalid(e.to_string()))?;
    let result = nelder_mead(
        |v| objective(theorem, family, domain, v, tol).map_or(f64::INFINITY, |o| o.0),
        &start.to_vec(),
        iterations,
        NelderMead::default(),
    );
    let best_params = FamilyParams::from_vec(family, &result.x).map_err(|e| ConfigError::Invalid(e.to_string()))?;
    let best_slack = objective(theorem, family, domain, &result.x, tol).map_or(f64::INFINITY, |o| o.1);
    Ok(SharpnessRecord {
        theorem,
        family,
        domain,
        seed,
        iterations,
        best_slack,
        best_objective: result.value,
        best_function: best_params.expr().to_string(),
        best_params,
        trace: result.trace,
        evaluations: result.evaluations,
    })
}
