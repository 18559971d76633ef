use thiserror::Error;

use super::ast::Expr;
use super::eval::fold;

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum DiffError {
    #[error("expression contains a piecewise node ({0}) and cannot be differentiated")]
    NonDifferentiable(&'static str),
    #[error("derivative order must be 1 or 2, got {0}")]
    UnsupportedOrder(u32),
}

/// Symbolic derivative of order 1 or 2.
///
/// Only literal-only subtrees are folded; no other rewriting is applied.
pub fn differentiate(e: &Expr, order: u32) -> Result<Expr, DiffError> {
    match order {
        1 => d(e),
        2 => d(&d(e)?),
        n => Err(DiffError::UnsupportedOrder(n)),
    }
}

fn mul(l: Expr, r: Expr) -> Expr {
    fold(Expr::mul(l, r))
}

fn add(l: Expr, r: Expr) -> Expr {
    fold(Expr::add(l, r))
}

fn sub(l: Expr, r: Expr) -> Expr {
    fold(Expr::sub(l, r))
}

fn d(e: &Expr) -> Result<Expr, DiffError> {
    Ok(match e {
        Expr::Const(_) => Expr::c(0.0),
        Expr::X => Expr::c(1.0),
        Expr::Add(l, r) => add(d(l)?, d(r)?),
        Expr::Sub(l, r) => sub(d(l)?, d(r)?),
        Expr::Mul(l, r) => add(mul(d(l)?, (**r).clone()), mul((**l).clone(), d(r)?)),
        Expr::Div(l, r) => fold(Expr::div(
            sub(mul(d(l)?, (**r).clone()), mul((**l).clone(), d(r)?)),
            fold(Expr::pow((**r).clone(), 2.0)),
        )),
        Expr::Neg(a) => fold(Expr::neg(d(a)?)),
        Expr::Pow(base, p) => mul(mul(Expr::c(*p), fold(Expr::pow((**base).clone(), p - 1.0))), d(base)?),
        Expr::Exp(a) => mul(e.clone(), d(a)?),
        Expr::Ln(a) => fold(Expr::div(d(a)?, (**a).clone())),
        Expr::Abs(_) => return Err(DiffError::NonDifferentiable("abs")),
        Expr::Max(_) => return Err(DiffError::NonDifferentiable("max")),
        Expr::Min(_) => return Err(DiffError::NonDifferentiable("min")),
    })
}
