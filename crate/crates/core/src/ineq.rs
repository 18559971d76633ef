//! Evaluators for the Hadamard chain and the four two-sided integral
//! inequalities built on it, plus audits of the intermediate proof steps.
//!
//! Every evaluator returns an [`InequalityReport`]: the ordered chain of
//! side values (each carrying a quadrature error bound), the endpoint
//! quantities `M`, `N`, `psi`, the slack, and a verdict that accounts for
//! both the declared tolerance and the quadrature error.

use std::collections::BTreeMap;
use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::expr::DomainError;
use crate::funcs::{ConvexFunction, Interval, Method, Property};
use crate::quad::{try_integrate, QuadError, Sample, VecQuadrature};

#[derive(Debug, Clone, PartialEq, Error)]
pub enum IneqError {
    #[error(transparent)]
    Domain(#[from] DomainError),
    #[error(transparent)]
    Quadrature(#[from] QuadError),
    #[error("f((a+b)/2) = {value} is not positive; the inequality divides by it")]
    MidpointZero { value: f64 },
    #[error("function is not certified for {0:?}")]
    NotCertified(Property),
    #[error("point {x} lies outside the domain [{a}, {b}]")]
    OutsideDomain { x: f64, a: f64, b: f64 },
    #[error("unknown theorem '{0}'")]
    UnknownTheorem(String),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub enum Theorem {
    #[serde(rename = "hadamard-1.1")]
    Hadamard,
    #[serde(rename = "thm-2.1")]
    Thm21,
    #[serde(rename = "thm-2.2")]
    Thm22,
    #[serde(rename = "thm-2.3")]
    Thm23,
    #[serde(rename = "thm-2.4")]
    Thm24,
    #[serde(rename = "step-2.3.1")]
    Step231,
    #[serde(rename = "step-2.3.2")]
    Step232,
    #[serde(rename = "step-2.4.1")]
    Step241,
    #[serde(rename = "step-2.4.2")]
    Step242,
    #[serde(rename = "prop-3.1")]
    Prop31,
    #[serde(rename = "prop-3.2")]
    Prop32,
}

impl Theorem {
    /// The five function-level evaluators.
    pub const EVALUATORS: [Theorem; 5] =
        [Theorem::Hadamard, Theorem::Thm21, Theorem::Thm22, Theorem::Thm23, Theorem::Thm24];

    pub fn tag(self) -> &'static str {
        match self {
            Theorem::Hadamard => "hadamard-1.1",
            Theorem::Thm21 => "thm-2.1",
            Theorem::Thm22 => "thm-2.2",
            Theorem::Thm23 => "thm-2.3",
            Theorem::Thm24 => "thm-2.4",
            Theorem::Step231 => "step-2.3.1",
            Theorem::Step232 => "step-2.3.2",
            Theorem::Step241 => "step-2.4.1",
            Theorem::Step242 => "step-2.4.2",
            Theorem::Prop31 => "prop-3.1",
            Theorem::Prop32 => "prop-3.2",
        }
    }

    /// Short number form used on the command line, e.g. `2.1`.
    pub fn number(self) -> &'static str {
        self.tag().split_once('-').map(|(_, n)| n).unwrap()
    }
}

impl fmt::Display for Theorem {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.tag())
    }
}

impl FromStr for Theorem {
    type Err = IneqError;

    /// Accepts the full tag (`thm-2.1`) or the bare number (`2.1`).
    fn from_str(s: &str) -> Result<Self, Self::Err> {
        const ALL: [Theorem; 11] = [
            Theorem::Hadamard,
            Theorem::Thm21,
            Theorem::Thm22,
            Theorem::Thm23,
            Theorem::Thm24,
            Theorem::Step231,
            Theorem::Step232,
            Theorem::Step241,
            Theorem::Step242,
            Theorem::Prop31,
            Theorem::Prop32,
        ];
        let s = s.trim();
        ALL.into_iter()
            .find(|t| t.tag() == s)
            .or_else(|| {
                // bare numbers name theorems, never proof steps
                ALL.into_iter().filter(|t| !t.tag().starts_with("step-")).find(|t| t.number() == s)
            })
            .ok_or_else(|| IneqError::UnknownTheorem(s.to_string()))
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum Verdict {
    Holds,
    Equality,
    Violated,
    Inconclusive,
}

impl fmt::Display for Verdict {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        fmt::Debug::fmt(self, f)
    }
}

/// One named member of an inequality chain.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SideValue {
    pub name: String,
    pub value: f64,
    pub abs_error: f64,
}

impl SideValue {
    pub fn new(name: impl Into<String>, value: f64, abs_error: f64) -> Self {
        SideValue { name: name.into(), value, abs_error }
    }

    pub fn exact(name: impl Into<String>, value: f64) -> Self {
        Self::new(name, value, 0.0)
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct InequalityReport {
    pub theorem: Theorem,
    pub function: String,
    pub interval: Interval,
    /// Ordered so that each value should not exceed the next.
    pub chain: Vec<SideValue>,
    pub aux: BTreeMap<String, f64>,
    /// Minimum over adjacent pairs of `later - earlier`.
    pub slack: f64,
    pub tolerance_used: f64,
    pub verdict: Verdict,
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    pub notes: Vec<String>,
}

impl InequalityReport {
    pub fn lhs(&self) -> f64 {
        self.chain[0].value
    }

    pub fn rhs(&self) -> f64 {
        self.chain[self.chain.len() - 1].value
    }

    /// Sum of the chain's error estimates.
    pub fn combined_error(&self) -> f64 {
        self.chain.iter().map(|s| s.abs_error).sum()
    }

    pub fn value(&self, name: &str) -> Option<f64> {
        self.chain.iter().find(|s| s.name == name).map(|s| s.value)
    }
}

/// Quadrature tolerance and verdict thresholds.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Tolerances {
    /// Requested quadrature tolerance (absolute + relative).
    pub quad: f64,
    /// Absolute verdict tolerance.
    pub abs: f64,
    /// Relative verdict tolerance, scaled by the largest chain magnitude.
    pub rel: f64,
}

impl Default for Tolerances {
    fn default() -> Self {
        Tolerances { quad: 1e-10, abs: 1e-9, rel: 1e-8 }
    }
}

impl Tolerances {
    pub fn with_quad(quad: f64) -> Self {
        Tolerances { quad, ..Self::default() }
    }
}

/// Slack, tolerance and verdict for a finished chain.
pub fn judge(chain: &[SideValue], converged: bool, tol: &Tolerances) -> (f64, f64, Verdict) {
    let slack = chain.windows(2).map(|w| w[1].value - w[0].value).fold(f64::INFINITY, f64::min);
    let scale = chain.iter().map(|s| s.value.abs()).fold(0.0, f64::max);
    let tolerance_used = tol.abs.max(tol.rel * scale);
    let band = tolerance_used + chain.iter().map(|s| s.abs_error).sum::<f64>();
    let verdict = if !converged || !slack.is_finite() {
        Verdict::Inconclusive
    } else if slack.abs() <= band {
        Verdict::Equality
    } else if slack < 0.0 {
        Verdict::Violated
    } else {
        Verdict::Holds
    };
    (slack, tolerance_used, verdict)
}

pub(crate) struct Draft {
    pub theorem: Theorem,
    pub function: String,
    pub interval: Interval,
    pub chain: Vec<SideValue>,
    pub aux: BTreeMap<String, f64>,
    pub converged: bool,
    pub notes: Vec<String>,
}

impl Draft {
    pub fn finish(self, tol: &Tolerances) -> InequalityReport {
        let (slack, tolerance_used, verdict) = judge(&self.chain, self.converged, tol);
        let mut notes = self.notes;
        if !self.converged {
            notes.push("quadrature did not converge; verdict forced to Inconclusive".into());
        }
        InequalityReport {
            theorem: self.theorem,
            function: self.function,
            interval: self.interval,
            chain: self.chain,
            aux: self.aux,
            slack,
            tolerance_used,
            verdict,
            notes,
        }
    }
}

fn require_certified(f: &ConvexFunction) -> Result<(), IneqError> {
    if !f.convexity().passed() {
        return Err(IneqError::NotCertified(Property::Convexity));
    }
    if !f.nonnegativity().passed() {
        return Err(IneqError::NotCertified(Property::Nonnegativity));
    }
    Ok(())
}

fn certificate_note(f: &ConvexFunction) -> String {
    let method = match f.convexity().method {
        Method::Analytic => "second derivative on grid",
        Method::Sampled => "sampled midpoints",
    };
    format!(
        "convexity certified by {method}, nonnegativity by sampling ({} points); sampled certificates are evidence, not proof",
        f.convexity().grid
    )
}

fn draft(theorem: Theorem, f: &ConvexFunction) -> Draft {
    Draft {
        theorem,
        function: f.spec(),
        interval: f.domain(),
        chain: Vec::new(),
        aux: BTreeMap::new(),
        converged: true,
        notes: vec![certificate_note(f)],
    }
}

struct Endpoints {
    fa: f64,
    fb: f64,
    fm: f64,
}

fn endpoints(f: &ConvexFunction) -> Result<Endpoints, IneqError> {
    let d = f.domain();
    Ok(Endpoints { fa: f.eval(d.a())?, fb: f.eval(d.b())?, fm: f.eval(d.midpoint())? })
}

/// `f(a)² + f(a)f(b) + f(b)²`
pub fn aux_m(f: &ConvexFunction) -> Result<f64, IneqError> {
    let e = endpoints(f)?;
    Ok(e.fa * e.fa + e.fa * e.fb + e.fb * e.fb)
}

/// `f(a)² + 4f(a)f(b) + f(b)²`
pub fn aux_n(f: &ConvexFunction) -> Result<f64, IneqError> {
    let e = endpoints(f)?;
    Ok(e.fa * e.fa + 4.0 * e.fa * e.fb + e.fb * e.fb)
}

/// `f(a)² + 2f(a)f(b) + f(b)²`, i.e. `(f(a) + f(b))²`.
pub fn aux_psi(f: &ConvexFunction) -> Result<f64, IneqError> {
    let e = endpoints(f)?;
    Ok(e.fa * e.fa + 2.0 * e.fa * e.fb + e.fb * e.fb)
}

/// `[∫f, ∫f²]` over the domain.
fn plain_integrals(f: &ConvexFunction, tol: f64) -> Result<VecQuadrature<2>, IneqError> {
    let d = f.domain();
    try_integrate(
        |x| {
            let v = f.eval(x)?;
            Ok(Sample::exact([v, v * v]))
        },
        d.a(),
        d.b(),
        f.kinks(),
        tol,
    )
}

/// Chord parameters `t` at which `f(t·x + (1−t)·y)` may have a corner.
fn chord_breaks(f: &ConvexFunction, x: f64, y: f64) -> Vec<f64> {
    if x == y {
        return Vec::new();
    }
    f.kinks().iter().map(|k| (k - y) / (x - y)).collect()
}

/// `[∫₀¹ f(z)(t·f(x) + (1−t)·f(y)) dt, ∫₀¹ f(z)² dt]` with `z = t·x + (1−t)·y`.
fn chord_integrals(
    f: &ConvexFunction,
    x: f64,
    fx: f64,
    y: f64,
    fy: f64,
    tol: f64,
) -> Result<VecQuadrature<2>, IneqError> {
    try_integrate(
        |t| {
            let fz = f.eval(t * x + (1.0 - t) * y)?;
            Ok(Sample::exact([fz * (t * fx + (1.0 - t) * fy), fz * fz]))
        },
        0.0,
        1.0,
        &chord_breaks(f, x, y),
        tol,
    )
}

/// `f((a+b)/2) ≤ (1/(b−a))∫f ≤ (f(a)+f(b))/2`
pub fn eval_hadamard(f: &ConvexFunction, tol: &Tolerances) -> Result<InequalityReport, IneqError> {
    require_certified(f)?;
    let d = f.domain();
    let w = d.width();
    let e = endpoints(f)?;
    let ints = plain_integrals(f, tol.quad)?;
    let mut r = draft(Theorem::Hadamard, f);
    r.chain = vec![
        SideValue::exact("f_mid", e.fm),
        SideValue::new("mean", ints.value[0] / w, ints.abs_error[0] / w),
        SideValue::exact("endpoint_mean", 0.5 * (e.fa + e.fb)),
    ];
    r.aux.insert("f_mid".into(), e.fm);
    r.converged = ints.converged;
    r.notes.push("nonnegativity was certified although this chain only requires convexity".into());
    Ok(r.finish(tol))
}

/// Weighted-integral inequality with `M = f(a)² + f(a)f(b) + f(b)²`:
/// `2f(a)/(b−a)²·∫(b−x)f + 2f(b)/(b−a)²·∫(x−a)f ≤ (1/(b−a))∫f² + M/3`.
pub fn eval_thm21(f: &ConvexFunction, tol: &Tolerances) -> Result<InequalityReport, IneqError> {
    require_certified(f)?;
    let d = f.domain();
    let (a, b, w) = (d.a(), d.b(), d.width());
    let e = endpoints(f)?;
    let m = aux_m(f)?;
    let ints: VecQuadrature<3> = try_integrate(
        |x| {
            let v = f.eval(x)?;
            Ok::<_, IneqError>(Sample::exact([(b - x) * v, (x - a) * v, v * v]))
        },
        a,
        b,
        f.kinks(),
        tol.quad,
    )?;
    let ka = 2.0 * e.fa / (w * w);
    let kb = 2.0 * e.fb / (w * w);
    let lhs = ka * ints.value[0] + kb * ints.value[1];
    let lhs_err = ka.abs() * ints.abs_error[0] + kb.abs() * ints.abs_error[1];
    let mut r = draft(Theorem::Thm21, f);
    r.chain = vec![
        SideValue::new("lhs", lhs, lhs_err),
        SideValue::new("rhs", ints.value[2] / w + m / 3.0, ints.abs_error[2] / w),
    ];
    r.aux.insert("M".into(), m);
    r.converged = ints.converged;
    Ok(r.finish(tol))
}

/// Midpoint-weighted inequality with `N = f(a)² + 4f(a)f(b) + f(b)²` and
/// `m = (a+b)/2`:
/// `(1/(b−a))∫f ≤ f(m)/2 + ∫f²/(4f(m)(b−a)) + N/(24f(m))`.
pub fn eval_thm22(f: &ConvexFunction, tol: &Tolerances) -> Result<InequalityReport, IneqError> {
    require_certified(f)?;
    let w = f.domain().width();
    let e = endpoints(f)?;
    if e.fm <= 0.0 {
        return Err(IneqError::MidpointZero { value: e.fm });
    }
    let n = aux_n(f)?;
    let ints = plain_integrals(f, tol.quad)?;
    let k = 1.0 / (4.0 * e.fm * w);
    let mut r = draft(Theorem::Thm22, f);
    r.chain = vec![
        SideValue::new("lhs", ints.value[0] / w, ints.abs_error[0] / w),
        SideValue::new("rhs", 0.5 * e.fm + k * ints.value[1] + n / (24.0 * e.fm), k * ints.abs_error[1]),
    ];
    r.aux.insert("N".into(), n);
    r.aux.insert("f_mid".into(), e.fm);
    r.converged = ints.converged;
    Ok(r.finish(tol))
}

/// Integrals shared by the triple-integral inequality and its step audit.
struct TripleParts {
    /// `∫∫∫ f(z)(t f(x) + (1−t) f(y))` and `∫∫∫ f(z)²` over `[a,b]²×[0,1]`.
    triple: VecQuadrature<2>,
    /// `∫f` and `∫f²`.
    plain: VecQuadrature<2>,
    psi: f64,
}

fn triple_parts(f: &ConvexFunction, tol: f64) -> Result<TripleParts, IneqError> {
    let d = f.domain();
    let (a, b) = (d.a(), d.b());
    let level = tol / 3.0;
    // Both integrands are unchanged by (x, y, t) -> (y, x, 1 - t), so the
    // square is folded onto the triangle y <= x.
    let half = try_integrate(
        |x| {
            if x <= a {
                return Ok(Sample::exact([0.0; 2]));
            }
            let fx = f.eval(x)?;
            try_integrate(
                |y| {
                    let fy = f.eval(y)?;
                    Ok::<_, IneqError>(chord_integrals(f, x, fx, y, fy, level)?.as_sample())
                },
                a,
                x,
                f.kinks(),
                level,
            )
            .map(|r| r.as_sample())
        },
        a,
        b,
        f.kinks(),
        level,
    )?;
    let triple =
        VecQuadrature { value: half.value.map(|v| 2.0 * v), abs_error: half.abs_error.map(|e| 2.0 * e), ..half };
    Ok(TripleParts { triple, plain: plain_integrals(f, tol)?, psi: aux_psi(f)? })
}

/// Triple-integral inequality with `psi = (f(a) + f(b))²`:
/// `(2/(b−a)²)∫∫∫ f(z)(t f(x) + (1−t) f(y)) ≤ (1/(b−a)²)∫∫∫ f(z)² + (2/(3(b−a)))∫f² + psi/12`
/// where `z = t·x + (1−t)·y` and the triple integrals run over `[a,b]²×[0,1]`.
pub fn eval_thm23(f: &ConvexFunction, tol: &Tolerances) -> Result<InequalityReport, IneqError> {
    require_certified(f)?;
    let p = triple_parts(f, tol.quad)?;
    let w = f.domain().width();
    let w2 = w * w;
    let mut r = draft(Theorem::Thm23, f);
    r.chain = vec![
        SideValue::new("lhs", 2.0 * p.triple.value[0] / w2, 2.0 * p.triple.abs_error[0] / w2),
        SideValue::new(
            "rhs",
            p.triple.value[1] / w2 + 2.0 / (3.0 * w) * p.plain.value[1] + p.psi / 12.0,
            p.triple.abs_error[1] / w2 + 2.0 / (3.0 * w) * p.plain.abs_error[1],
        ),
    ];
    r.aux.insert("psi".into(), p.psi);
    r.converged = p.triple.converged && p.plain.converged;
    Ok(r.finish(tol))
}

struct MidChordParts {
    /// `∫∫ f(z)(t f(x) + (1−t) f(m))` and `∫∫ f(z)²` over `[a,b]×[0,1]`,
    /// `z = t·x + (1−t)·m`.
    double: VecQuadrature<2>,
    plain: VecQuadrature<2>,
    fm: f64,
    psi: f64,
}

fn mid_chord_parts(f: &ConvexFunction, tol: f64) -> Result<MidChordParts, IneqError> {
    let d = f.domain();
    let m = d.midpoint();
    let fm = f.eval(m)?;
    let level = tol / 2.0;
    let double = try_integrate(
        |x| {
            let fx = f.eval(x)?;
            Ok::<_, IneqError>(chord_integrals(f, x, fx, m, fm, level)?.as_sample())
        },
        d.a(),
        d.b(),
        f.kinks(),
        level,
    )?;
    Ok(MidChordParts { double, plain: plain_integrals(f, tol)?, fm, psi: aux_psi(f)? })
}

/// Midpoint-chord inequality, evaluated exactly as stated:
/// `(2/(b−a))∫∫ f(z)(t f(x) + (1−t) f(m)) ≤ (1/(b−a))∫∫ f(z)² + (psi/12)(b−a+2)`
/// with `z = t·x + (1−t)·m`, `m = (a+b)/2`, integrals over `[a,b]×[0,1]`.
///
/// This statement is false in general (it fails for `f(x) = x` on `[0,1]`);
/// the evaluator reports whatever the numbers say.
pub fn eval_thm24(f: &ConvexFunction, tol: &Tolerances) -> Result<InequalityReport, IneqError> {
    require_certified(f)?;
    let p = mid_chord_parts(f, tol.quad)?;
    let w = f.domain().width();
    let mut r = draft(Theorem::Thm24, f);
    r.chain = vec![
        SideValue::new("lhs", 2.0 * p.double.value[0] / w, 2.0 * p.double.abs_error[0] / w),
        SideValue::new("rhs", p.double.value[1] / w + p.psi / 12.0 * (w + 2.0), p.double.abs_error[1] / w),
    ];
    r.aux.insert("psi".into(), p.psi);
    r.aux.insert("f_mid".into(), p.fm);
    r.converged = p.double.converged;
    Ok(r.finish(tol))
}

/// Audits the two steps behind the triple-integral inequality.
///
/// The first report checks the pointwise bound at `(x, y)`:
/// `2∫₀¹ f(z)(t f(x) + (1−t) f(y)) ≤ ∫₀¹ f(z)² + (f(x)² + f(x)f(y) + f(y)²)/3`.
/// The second checks the `(x, y)`-integrated chain, scaled by `1/(b−a)²`:
/// the left side, the exact integrated right side
/// `∫∫∫f(z)² + (2(b−a)/3)∫f² + (1/3)(∫f)²`, and the final bound after
/// replacing `(∫f)²` by its Hadamard bound `(b−a)²((f(a)+f(b))/2)²`.
pub fn audit_thm23_steps(
    f: &ConvexFunction,
    x: f64,
    y: f64,
    tol: &Tolerances,
) -> Result<(InequalityReport, InequalityReport), IneqError> {
    require_certified(f)?;
    let d = f.domain();
    for p in [x, y] {
        if !d.contains(p) {
            return Err(IneqError::OutsideDomain { x: p, a: d.a(), b: d.b() });
        }
    }
    let (fx, fy) = (f.eval(x)?, f.eval(y)?);
    let chord = chord_integrals(f, x, fx, y, fy, tol.quad)?;
    let mut pointwise = draft(Theorem::Step231, f);
    pointwise.chain = vec![
        SideValue::new("lhs", 2.0 * chord.value[0], 2.0 * chord.abs_error[0]),
        SideValue::new("rhs", chord.value[1] + (fx * fx + fx * fy + fy * fy) / 3.0, chord.abs_error[1]),
    ];
    pointwise.converged = chord.converged;
    pointwise.notes.push(format!("evaluated at x = {x}, y = {y}"));

    let p = triple_parts(f, tol.quad)?;
    let w = d.width();
    let w2 = w * w;
    let base = p.triple.value[1] / w2 + 2.0 / (3.0 * w) * p.plain.value[1];
    let base_err = p.triple.abs_error[1] / w2 + 2.0 / (3.0 * w) * p.plain.abs_error[1];
    let int_f = p.plain.value[0];
    let mut integrated = draft(Theorem::Step232, f);
    integrated.chain = vec![
        SideValue::new("lhs", 2.0 * p.triple.value[0] / w2, 2.0 * p.triple.abs_error[0] / w2),
        SideValue::new(
            "integrated_rhs",
            base + int_f * int_f / (3.0 * w2),
            base_err + 2.0 * int_f.abs() * p.plain.abs_error[0] / (3.0 * w2),
        ),
        SideValue::new("rhs", base + p.psi / 12.0, base_err),
    ];
    integrated.aux.insert("psi".into(), p.psi);
    integrated.converged = p.triple.converged && p.plain.converged;
    Ok((pointwise.finish(tol), integrated.finish(tol)))
}

/// Audits the two steps behind the midpoint-chord inequality, both scaled
/// by `1/(b−a)`.
///
/// Step one compares the left side with the exact integrated bound
/// `∫∫f(z)² + (1/3)∫f² + (1/3)f(m)∫f + ((b−a)/3)f(m)²`. Step two compares
/// that bound with the final stated right side; when the full inequality
/// fails, this pair shows which step is responsible.
pub fn audit_thm24_steps(f: &ConvexFunction, tol: &Tolerances) -> Result<Vec<InequalityReport>, IneqError> {
    require_certified(f)?;
    let p = mid_chord_parts(f, tol.quad)?;
    let w = f.domain().width();
    let lhs = SideValue::new("lhs", 2.0 * p.double.value[0] / w, 2.0 * p.double.abs_error[0] / w);
    let mid = SideValue::new(
        "integrated_rhs",
        (p.double.value[1] + p.plain.value[1] / 3.0 + p.fm * p.plain.value[0] / 3.0 + w / 3.0 * p.fm * p.fm) / w,
        (p.double.abs_error[1] + p.plain.abs_error[1] / 3.0 + p.fm.abs() * p.plain.abs_error[0] / 3.0) / w,
    );
    let rhs = SideValue::new("rhs", p.double.value[1] / w + p.psi / 12.0 * (w + 2.0), p.double.abs_error[1] / w);
    let converged = p.double.converged && p.plain.converged;

    let mut first = draft(Theorem::Step241, f);
    first.chain = vec![lhs, mid.clone()];
    first.aux.insert("f_mid".into(), p.fm);
    first.converged = converged;

    let mut second = draft(Theorem::Step242, f);
    second.chain = vec![mid, rhs];
    second.aux.insert("psi".into(), p.psi);
    second.aux.insert("f_mid".into(), p.fm);
    second.converged = converged;
    Ok(vec![first.finish(tol), second.finish(tol)])
}

/// Dispatches one of the five function-level evaluators.
pub fn evaluate(theorem: Theorem, f: &ConvexFunction, tol: &Tolerances) -> Result<InequalityReport, IneqError> {
    match theorem {
        Theorem::Hadamard => eval_hadamard(f, tol),
        Theorem::Thm21 => eval_thm21(f, tol),
        Theorem::Thm22 => eval_thm22(f, tol),
        Theorem::Thm23 => eval_thm23(f, tol),
        Theorem::Thm24 => eval_thm24(f, tol),
        other => Err(IneqError::UnknownTheorem(format!("{other} is not a function-level evaluator"))),
    }
}
