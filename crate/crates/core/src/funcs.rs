//! Functions under test: a DSL body on a closed interval together with
//! sampled evidence that it is convex and nonnegative there.

use std::fmt;
use std::str::FromStr;

use rand::Rng;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::expr::{differentiate, kinks, DomainError, Expr, Program};
use crate::rng::substream;

/// Default certification grid size.
pub const DEFAULT_GRID: usize = 257;
/// Default convexity tolerance.
pub const DEFAULT_CONVEX_TOL: f64 = 1e-9;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum FuncError {
    #[error(transparent)]
    Domain(#[from] DomainError),
    #[error("invalid interval [{a}, {b}]: need finite a < b")]
    InvalidInterval { a: f64, b: f64 },
    #[error("grid of {got} points is too small (need at least {min})")]
    InvalidGrid { got: usize, min: usize },
    #[error("unknown or unsupported family '{0}'")]
    InvalidFamily(String),
    #[error("family {family} is not defined on [{a}, {b}]")]
    DomainIncompatible { family: Family, a: f64, b: f64 },
    #[error("point {x} lies outside [{a}, {b}]")]
    OutsideDomain { x: f64, a: f64, b: f64 },
    #[error("generated {family} function failed certification: {spec}")]
    CertificationFailed { family: Family, spec: String },
}

/// Closed interval `[a, b]` with finite `a < b`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(into = "[f64; 2]", try_from = "[f64; 2]")]
pub struct Interval {
    a: f64,
    b: f64,
}

impl Interval {
    pub fn new(a: f64, b: f64) -> Result<Self, FuncError> {
        if a.is_finite() && b.is_finite() && a < b {
            Ok(Interval { a, b })
        } else {
            Err(FuncError::InvalidInterval { a, b })
        }
    }

    pub fn unit() -> Self {
        Interval { a: 0.0, b: 1.0 }
    }

    pub fn a(&self) -> f64 {
        self.a
    }

    pub fn b(&self) -> f64 {
        self.b
    }

    pub fn width(&self) -> f64 {
        self.b - self.a
    }

    pub fn midpoint(&self) -> f64 {
        0.5 * (self.a + self.b)
    }

    pub fn contains(&self, x: f64) -> bool {
        self.a <= x && x <= self.b
    }

    /// `n >= 2` equally spaced points including both endpoints.
    pub fn grid(&self, n: usize) -> impl Iterator<Item = f64> + '_ {
        let step = self.width() / (n - 1) as f64;
        (0..n).map(move |i| if i + 1 == n { self.b } else { self.a + step * i as f64 })
    }
}

impl From<Interval> for [f64; 2] {
    fn from(i: Interval) -> Self {
        [i.a, i.b]
    }
}

impl TryFrom<[f64; 2]> for Interval {
    type Error = FuncError;

    fn try_from(v: [f64; 2]) -> Result<Self, Self::Error> {
        Interval::new(v[0], v[1])
    }
}

impl fmt::Display for Interval {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "[{}, {}]", self.a, self.b)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Family {
    Quadratic,
    ExpAffine,
    Power,
    Recip,
    PiecewiseLinearMax,
    User,
}

impl Family {
    /// Families `random_convex` can generate.
    pub const GENERATED: [Family; 5] =
        [Family::Quadratic, Family::ExpAffine, Family::Power, Family::Recip, Family::PiecewiseLinearMax];

    pub fn tag(self) -> &'static str {
        match self {
            Family::Quadratic => "quadratic",
            Family::ExpAffine => "exp-affine",
            Family::Power => "power",
            Family::Recip => "recip",
            Family::PiecewiseLinearMax => "piecewise-linear-max",
            Family::User => "user",
        }
    }
}

impl fmt::Display for Family {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.tag())
    }
}

impl FromStr for Family {
    type Err = FuncError;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        [Family::User]
            .into_iter()
            .chain(Family::GENERATED)
            .find(|f| f.tag() == s)
            .ok_or_else(|| FuncError::InvalidFamily(s.to_string()))
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Property {
    Convexity,
    Nonnegativity,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Outcome {
    Pass,
    Fail,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Method {
    /// Second derivative checked on the grid.
    Analytic,
    /// Function values checked on the grid. Evidence, not proof.
    Sampled,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Witness {
    Point(f64),
    Pair(f64, f64),
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Certificate {
    pub property: Property,
    pub outcome: Outcome,
    pub method: Method,
    pub witness: Option<Witness>,
    pub grid: usize,
    pub tolerance: f64,
}

impl Certificate {
    pub fn passed(&self) -> bool {
        self.outcome == Outcome::Pass
    }

    /// Re-evaluates a failure witness directly; true when the violation is
    /// reproduced.
    pub fn reverify(&self, body: &Expr) -> Result<bool, DomainError> {
        let p = Program::compile(body);
        match (self.property, self.witness) {
            (Property::Nonnegativity, Some(Witness::Point(x))) => Ok(p.eval(x)? < 0.0),
            (Property::Convexity, Some(Witness::Pair(u, v))) => {
                midpoint_excess(&p, u, v, self.tolerance).map(|e| e > 0.0)
            }
            _ => Ok(false),
        }
    }
}

/// Amount by which `f((u+v)/2)` exceeds the chord midpoint plus the
/// magnitude-scaled tolerance; positive means a convexity violation.
pub fn midpoint_excess(p: &Program, u: f64, v: f64, tol: f64) -> Result<f64, DomainError> {
    let fu = p.eval(u)?;
    let fv = p.eval(v)?;
    let fm = p.eval(0.5 * (u + v))?;
    let allowance = tol * (1.0 + fu.abs().max(fv.abs()));
    Ok(fm - (0.5 * (fu + fv) + allowance))
}

/// Samples `body` on `grid` points of `domain`; passes when the smallest
/// value is at least `-1e-12 * (1 + max|f|)`.
pub fn check_nonnegative(body: &Expr, domain: Interval, grid: usize) -> Result<Certificate, FuncError> {
    if grid < 2 {
        return Err(FuncError::InvalidGrid { got: grid, min: 2 });
    }
    let p = Program::compile(body);
    let mut min = (f64::INFINITY, domain.a());
    let mut max_abs = 0.0f64;
    for x in domain.grid(grid) {
        let v = p.eval(x)?;
        max_abs = max_abs.max(v.abs());
        if v < min.0 {
            min = (v, x);
        }
    }
    let pass = min.0 >= -1e-12 * (1.0 + max_abs);
    Ok(Certificate {
        property: Property::Nonnegativity,
        outcome: if pass { Outcome::Pass } else { Outcome::Fail },
        method: Method::Sampled,
        witness: (!pass).then_some(Witness::Point(min.1)),
        grid,
        tolerance: 1e-12,
    })
}

/// Convexity falsifier.
///
/// Smooth bodies first try the second derivative on the grid. If that is
/// unavailable or dips below `-tol`, every grid pair `(u, v)` is tested
/// for midpoint convexity and the worst violating pair becomes the witness.
pub fn check_convex(body: &Expr, domain: Interval, grid: usize, tol: f64) -> Result<Certificate, FuncError> {
    if grid < 3 {
        return Err(FuncError::InvalidGrid { got: grid, min: 3 });
    }
    let cert = |outcome, method, witness| Certificate {
        property: Property::Convexity,
        outcome,
        method,
        witness,
        grid,
        tolerance: tol,
    };
    if let Ok(d2) = differentiate(body, 2) {
        let p2 = Program::compile(&d2);
        let ok = domain.grid(grid).all(|x| matches!(p2.eval(x), Ok(v) if v >= -tol));
        if ok {
            return Ok(cert(Outcome::Pass, Method::Analytic, None));
        }
    }

    let p = Program::compile(body);
    let xs: Vec<f64> = domain.grid(grid).collect();
    let mut worst: Option<(f64, f64, f64)> = None;
    for (i, &u) in xs.iter().enumerate() {
        for &v in &xs[i + 1..] {
            let excess = midpoint_excess(&p, u, v, tol)?;
            if excess > 0.0 && worst.is_none_or(|w| excess > w.0) {
                worst = Some((excess, u, v));
            }
        }
    }
    Ok(match worst {
        None => cert(Outcome::Pass, Method::Sampled, None),
        Some((_, u, v)) => cert(Outcome::Fail, Method::Sampled, Some(Witness::Pair(u, v))),
    })
}

/// A body on a domain with its convexity and nonnegativity certificates.
#[derive(Debug, Clone)]
pub struct ConvexFunction {
    body: Expr,
    program: Program,
    domain: Interval,
    family: Family,
    kinks: Vec<f64>,
    convexity: Certificate,
    nonnegativity: Certificate,
}

impl ConvexFunction {
    /// Certifies `body` on `domain` with the default grid and tolerance.
    /// Failing certificates are recorded, not turned into errors.
    pub fn certify(body: Expr, domain: Interval, family: Family) -> Result<Self, FuncError> {
        Self::certify_with(body, domain, family, DEFAULT_GRID, DEFAULT_CONVEX_TOL)
    }

    pub fn certify_with(
        body: Expr,
        domain: Interval,
        family: Family,
        grid: usize,
        tol: f64,
    ) -> Result<Self, FuncError> {
        if matches!(family, Family::Recip) && domain.a() <= 0.0 {
            return Err(FuncError::DomainIncompatible { family, a: domain.a(), b: domain.b() });
        }
        let convexity = check_convex(&body, domain, grid, tol)?;
        let nonnegativity = check_nonnegative(&body, domain, grid)?;
        Ok(ConvexFunction {
            program: Program::compile(&body),
            kinks: kinks(&body, domain.a(), domain.b()),
            body,
            domain,
            family,
            convexity,
            nonnegativity,
        })
    }

    /// Parses and certifies a user-supplied function.
    pub fn from_dsl(text: &str, domain: Interval) -> Result<Self, crate::Error> {
        let body = crate::expr::parse_expr(text)?;
        Ok(Self::certify(body, domain, Family::User)?)
    }

    #[inline]
    pub fn eval(&self, x: f64) -> Result<f64, DomainError> {
        self.program.eval(x)
    }

    pub fn body(&self) -> &Expr {
        &self.body
    }

    pub fn domain(&self) -> Interval {
        self.domain
    }

    pub fn family(&self) -> Family {
        self.family
    }

    /// Points inside the domain where the body may have a corner.
    pub fn kinks(&self) -> &[f64] {
        &self.kinks
    }

    pub fn convexity(&self) -> &Certificate {
        &self.convexity
    }

    pub fn nonnegativity(&self) -> &Certificate {
        &self.nonnegativity
    }

    pub fn is_certified(&self) -> bool {
        self.convexity.passed() && self.nonnegativity.passed()
    }

    /// Canonical DSL text of the body.
    pub fn spec(&self) -> String {
        self.body.to_string()
    }
}

/// `t ↦ f(t·x + (1−t)·y)` on `[0, 1]`.
#[derive(Debug, Clone, Copy)]
pub struct Chord<'a> {
    f: &'a ConvexFunction,
    x: f64,
    y: f64,
}

impl Chord<'_> {
    pub fn eval(&self, t: f64) -> Result<f64, DomainError> {
        if self.x == self.y {
            return self.f.eval(self.x);
        }
        self.f.eval(t * self.x + (1.0 - t) * self.y)
    }

    pub fn domain(&self) -> Interval {
        Interval::unit()
    }

    /// The restriction written as a DSL body in the variable `t` (printed `x`).
    pub fn to_expr(&self) -> Expr {
        let arg = if self.x == self.y {
            Expr::c(self.x)
        } else {
            Expr::add(Expr::mul(Expr::c(self.x), Expr::X), Expr::mul(Expr::sub(Expr::c(1.0), Expr::X), Expr::c(self.y)))
        };
        self.f.body().substitute(&arg)
    }
}

pub fn chord_restriction(f: &ConvexFunction, x: f64, y: f64) -> Result<Chord<'_>, FuncError> {
    let d = f.domain();
    for p in [x, y] {
        if !d.contains(p) {
            return Err(FuncError::OutsideDomain { x: p, a: d.a(), b: d.b() });
        }
    }
    Ok(Chord { f, x, y })
}

/// Parameters of one member of a generated family.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "family", rename_all = "kebab-case")]
pub enum FamilyParams {
    Quadratic {
        c2: f64,
        c1: f64,
        c0: f64,
    },
    ExpAffine {
        alpha: f64,
        beta: f64,
        gamma: f64,
    },
    Power {
        p: f64,
    },
    Recip {
        lambda: f64,
    },
    /// `(slope, intercept)` per affine piece.
    PiecewiseLinearMax {
        pieces: Vec<(f64, f64)>,
    },
}

/// `acc ± |coef|·term`, choosing the sign so that no negative literal is
/// needed.
fn signed_sum(acc: Expr, coef: f64, term: Option<Expr>) -> Expr {
    let mag = coef.abs();
    let t = match term {
        Some(t) => Expr::mul(Expr::c(mag), t),
        None => Expr::c(mag),
    };
    if coef.is_sign_negative() {
        Expr::sub(acc, t)
    } else {
        Expr::add(acc, t)
    }
}

fn affine(slope: f64, intercept: f64) -> Expr {
    signed_sum(Expr::mul(Expr::c(slope), Expr::X), intercept, None)
}

impl FamilyParams {
    pub fn family(&self) -> Family {
        match self {
            FamilyParams::Quadratic { .. } => Family::Quadratic,
            FamilyParams::ExpAffine { .. } => Family::ExpAffine,
            FamilyParams::Power { .. } => Family::Power,
            FamilyParams::Recip { .. } => Family::Recip,
            FamilyParams::PiecewiseLinearMax { .. } => Family::PiecewiseLinearMax,
        }
    }

    pub fn to_vec(&self) -> Vec<f64> {
        match self {
            FamilyParams::Quadratic { c2, c1, c0 } => vec![*c2, *c1, *c0],
            FamilyParams::ExpAffine { alpha, beta, gamma } => vec![*alpha, *beta, *gamma],
            FamilyParams::Power { p } => vec![*p],
            FamilyParams::Recip { lambda } => vec![*lambda],
            FamilyParams::PiecewiseLinearMax { pieces } => pieces.iter().flat_map(|&(s, c)| [s, c]).collect(),
        }
    }

    pub fn from_vec(family: Family, v: &[f64]) -> Result<Self, FuncError> {
        let bad = || FuncError::InvalidFamily(format!("{family} with {} parameters", v.len()));
        Ok(match (family, v) {
            (Family::Quadratic, &[c2, c1, c0]) => FamilyParams::Quadratic { c2, c1, c0 },
            (Family::ExpAffine, &[alpha, beta, gamma]) => FamilyParams::ExpAffine { alpha, beta, gamma },
            (Family::Power, &[p]) => FamilyParams::Power { p },
            (Family::Recip, &[lambda]) => FamilyParams::Recip { lambda },
            (Family::PiecewiseLinearMax, v) if !v.is_empty() && v.len() % 2 == 0 => {
                FamilyParams::PiecewiseLinearMax { pieces: v.chunks(2).map(|c| (c[0], c[1])).collect() }
            }
            _ => return Err(bad()),
        })
    }

    pub fn expr(&self) -> Expr {
        match self {
            FamilyParams::Quadratic { c2, c1, c0 } => {
                let lead = Expr::mul(Expr::c(*c2), Expr::pow(Expr::X, 2.0));
                signed_sum(signed_sum(lead, *c1, Some(Expr::X)), *c0, None)
            }
            FamilyParams::ExpAffine { alpha, beta, gamma } => {
                let e = Expr::exp(Expr::mul(Expr::c(*beta), Expr::X));
                signed_sum(Expr::mul(Expr::c(*alpha), e), *gamma, None)
            }
            FamilyParams::Power { p } => Expr::pow(Expr::X, *p),
            FamilyParams::Recip { lambda } => Expr::div(Expr::c(*lambda), Expr::X),
            FamilyParams::PiecewiseLinearMax { pieces } => {
                Expr::Max(pieces.iter().map(|&(s, c)| affine(s, c)).collect())
            }
        }
    }

    /// Draws parameters that make the member convex and nonnegative on
    /// `domain` by construction.
    pub fn draw<R: Rng>(rng: &mut R, family: Family, domain: Interval) -> Result<Self, FuncError> {
        let (a, b) = (domain.a(), domain.b());
        let incompatible = || FuncError::DomainIncompatible { family, a, b };
        Ok(match family {
            Family::Quadratic => {
                let c2 = rng.random_range(0.0..=5.0);
                let c1 = rng.random_range(-5.0..=5.0);
                let q = |x: f64| c2 * x * x + c1 * x;
                let mut low = q(a).min(q(b));
                if c2 > 0.0 {
                    let vertex = -c1 / (2.0 * c2);
                    if domain.contains(vertex) {
                        low = low.min(q(vertex));
                    }
                }
                let c0 = -low + rng.random_range(0.0..1.0);
                FamilyParams::Quadratic { c2, c1, c0 }
            }
            Family::ExpAffine => FamilyParams::ExpAffine {
                alpha: rng.random_range(0.0..=3.0),
                beta: rng.random_range(-2.0..=2.0),
                gamma: rng.random_range(0.0..=2.0),
            },
            Family::Power => {
                if a < 0.0 {
                    return Err(incompatible());
                }
                const EXPONENTS: [f64; 4] = [1.0, 1.5, 2.0, 3.0];
                FamilyParams::Power { p: EXPONENTS[rng.random_range(0..EXPONENTS.len())] }
            }
            Family::Recip => {
                if a <= 0.0 {
                    return Err(incompatible());
                }
                FamilyParams::Recip { lambda: 3.0 * (1.0 - rng.random_range(0.0..1.0)) }
            }
            Family::PiecewiseLinearMax => {
                let k = rng.random_range(2..=5usize);
                let m = domain.midpoint();
                let scale = 0.5 * domain.width();
                let mut pieces: Vec<(f64, f64)> = (0..k)
                    .map(|_| {
                        let s = rng.random_range(-3.0..=3.0);
                        let c = rng.random_range(-1.0..=1.0) * scale;
                        (s, c - s * m)
                    })
                    .collect();
                let shift = -pwl_min(&pieces, domain) + 0.5 * rng.random_range(0.0..1.0);
                for p in &mut pieces {
                    p.1 += shift;
                }
                FamilyParams::PiecewiseLinearMax { pieces }
            }
            Family::User => return Err(FuncError::InvalidFamily("user".into())),
        })
    }
}

/// Minimum over `domain` of `max_i (s_i·x + c_i)`, taken over the endpoints
/// and every pairwise crossing inside the domain.
fn pwl_min(pieces: &[(f64, f64)], domain: Interval) -> f64 {
    let eval = |x: f64| pieces.iter().map(|&(s, c)| s * x + c).fold(f64::NEG_INFINITY, f64::max);
    let mut candidates = vec![domain.a(), domain.b()];
    for (i, &(s1, c1)) in pieces.iter().enumerate() {
        for &(s2, c2) in &pieces[i + 1..] {
            if s1 != s2 {
                let x = (c2 - c1) / (s1 - s2);
                if domain.contains(x) {
                    candidates.push(x);
                }
            }
        }
    }
    candidates.into_iter().map(eval).fold(f64::INFINITY, f64::min)
}

impl ConvexFunction {
    /// Builds and certifies a family member from explicit parameters.
    pub fn from_params(params: &FamilyParams, domain: Interval) -> Result<Self, FuncError> {
        let family = params.family();
        if (family == Family::Power && domain.a() < 0.0) || (family == Family::Recip && domain.a() <= 0.0) {
            return Err(FuncError::DomainIncompatible { family, a: domain.a(), b: domain.b() });
        }
        Self::certify(params.expr(), domain, family)
    }
}

/// Random convex nonnegative member of `family` on `domain`, deterministic
/// in `(seed, family, domain)`.
pub fn random_convex(seed: u64, family: Family, domain: Interval) -> Result<ConvexFunction, FuncError> {
    let mut rng = substream(seed, family.tag(), 0);
    let params = FamilyParams::draw(&mut rng, family, domain)?;
    let f = ConvexFunction::from_params(&params, domain)?;
    if !f.is_certified() {
        return Err(FuncError::CertificationFailed { family, spec: f.spec() });
    }
    Ok(f)
}
