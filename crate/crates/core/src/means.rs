//! Arithmetic, quadratic, logarithmic and geometric means, and the two
//! closed-form mean inequalities obtained by taking `f(x) = 1/x`.

use std::collections::BTreeMap;
use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::funcs::Interval;
use crate::ineq::{InequalityReport, SideValue, Theorem, Tolerances};

#[derive(Debug, Clone, PartialEq, Error)]
pub enum MeanError {
    #[error("mean {mean} is undefined for a = {a}, b = {b}")]
    Undefined { mean: &'static str, a: f64, b: f64 },
    #[error("need 0 < a < b, got a = {a}, b = {b}")]
    Order { a: f64, b: f64 },
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[allow(non_snake_case)]
pub struct MeansBundle {
    pub A: f64,
    pub K: f64,
    pub L: f64,
    pub G: f64,
}

/// All four means of `a, b > 0` with `a != b`.
pub fn compute_means(a: f64, b: f64) -> Result<MeansBundle, MeanError> {
    if !(a.is_finite() && b.is_finite()) || a <= 0.0 || b <= 0.0 {
        let mean = if a * b <= 0.0 { "G" } else { "L" };
        return Err(MeanError::Undefined { mean, a, b });
    }
    if a == b {
        return Err(MeanError::Undefined { mean: "L", a, b });
    }
    Ok(MeansBundle {
        A: 0.5 * (a + b),
        K: (0.5 * (a * a + b * b)).sqrt(),
        L: (b - a) / (b.ln() - a.ln()),
        G: (a * b).sqrt(),
    })
}

/// Which denominator to use in the last term of the second proposition.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Prop32Variant {
    /// `24G⁴`: re-derived from the midpoint-weighted inequality at `1/x`.
    #[default]
    Corrected,
    /// `24G²` as printed; not homogeneous.
    AsPrinted,
}

impl fmt::Display for Prop32Variant {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Prop32Variant::Corrected => "corrected",
            Prop32Variant::AsPrinted => "paper-literal",
        })
    }
}

impl FromStr for Prop32Variant {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s {
            "corrected" => Ok(Prop32Variant::Corrected),
            "paper-literal" | "as-printed" => Ok(Prop32Variant::AsPrinted),
            other => Err(format!("unknown variant '{other}'")),
        }
    }
}

fn ordered(a: f64, b: f64) -> Result<(MeansBundle, Interval), MeanError> {
    if !(a > 0.0 && a < b && b.is_finite()) {
        return Err(MeanError::Order { a, b });
    }
    let interval = Interval::new(a, b).map_err(|_| MeanError::Order { a, b })?;
    Ok((compute_means(a, b)?, interval))
}

fn report(
    theorem: Theorem,
    interval: Interval,
    m: &MeansBundle,
    chain: Vec<SideValue>,
    notes: Vec<String>,
    tol: &Tolerances,
) -> InequalityReport {
    let (slack, tolerance_used, verdict) = crate::ineq::judge(&chain, true, tol);
    let aux = BTreeMap::from([
        ("A".to_string(), m.A),
        ("G".to_string(), m.G),
        ("K".to_string(), m.K),
        ("L".to_string(), m.L),
    ]);
    InequalityReport { theorem, function: "1/x".into(), interval, chain, aux, slack, tolerance_used, verdict, notes }
}

/// `4A/L ≤ (2/3)K²/G² + 10/3`, evaluated in closed form.
pub fn eval_prop31(a: f64, b: f64, tol: &Tolerances) -> Result<InequalityReport, MeanError> {
    let (m, interval) = ordered(a, b)?;
    let g2 = m.G * m.G;
    let chain = vec![
        SideValue::exact("lhs", 4.0 * m.A / m.L),
        SideValue::exact("rhs", 2.0 / 3.0 * (m.K * m.K) / g2 + 10.0 / 3.0),
    ];
    Ok(report(Theorem::Prop31, interval, &m, chain, Vec::new(), tol))
}

/// `1/L ≤ 1/(2A) + A/(4G²) + A(2K² + 4G²)/(24·D)` with `D = G⁴` (corrected)
/// or `D = G²` (as printed), evaluated in closed form.
pub fn eval_prop32(a: f64, b: f64, variant: Prop32Variant, tol: &Tolerances) -> Result<InequalityReport, MeanError> {
    let (m, interval) = ordered(a, b)?;
    let g2 = m.G * m.G;
    let denom = match variant {
        Prop32Variant::Corrected => 24.0 * g2 * g2,
        Prop32Variant::AsPrinted => 24.0 * g2,
    };
    let chain = vec![
        SideValue::exact("lhs", 1.0 / m.L),
        SideValue::exact("rhs", 1.0 / (2.0 * m.A) + m.A / (4.0 * g2) + m.A * (2.0 * m.K * m.K + 4.0 * g2) / denom),
    ];
    let notes = match variant {
        Prop32Variant::Corrected => vec!["corrected variant: last denominator 24G^4".to_string()],
        Prop32Variant::AsPrinted => vec![
            "paper-literal variant: last denominator 24G^2 is dimensionally inconsistent and does not follow from the midpoint-weighted inequality at 1/x".to_string(),
        ],
    };
    Ok(report(Theorem::Prop32, interval, &m, chain, notes, tol))
}
