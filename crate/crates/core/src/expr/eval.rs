use smallvec::SmallVec;
use thiserror::Error;

use super::ast::Expr;

/// Evaluation left the domain of one of the primitive operations.
#[derive(Debug, Clone, Copy, PartialEq, Error)]
pub enum DomainError {
    #[error("division by zero at x = {x}")]
    DivisionByZero { x: f64 },
    #[error("logarithm of non-positive value {arg} at x = {x}")]
    LogNonPositive { x: f64, arg: f64 },
    #[error("zero raised to negative exponent {exponent} at x = {x}")]
    ZeroToNegativePower { x: f64, exponent: f64 },
    #[error("negative base {base} raised to non-integer exponent {exponent} at x = {x}")]
    NegativeBaseFractionalPower { x: f64, base: f64, exponent: f64 },
    #[error("max/min called with no arguments")]
    EmptyArguments,
}

#[inline]
fn div(x: f64, num: f64, den: f64) -> Result<f64, DomainError> {
    if den == 0.0 {
        Err(DomainError::DivisionByZero { x })
    } else {
        Ok(num / den)
    }
}

#[inline]
fn ln(x: f64, arg: f64) -> Result<f64, DomainError> {
    if arg <= 0.0 || arg.is_nan() {
        Err(DomainError::LogNonPositive { x, arg })
    } else {
        Ok(arg.ln())
    }
}

#[inline]
fn pow(x: f64, base: f64, exponent: f64) -> Result<f64, DomainError> {
    if base == 0.0 && exponent < 0.0 {
        return Err(DomainError::ZeroToNegativePower { x, exponent });
    }
    if base < 0.0 && exponent.fract() != 0.0 {
        return Err(DomainError::NegativeBaseFractionalPower { x, base, exponent });
    }
    if exponent == 2.0 {
        Ok(base * base)
    } else if exponent.fract() == 0.0 && exponent.abs() <= i32::MAX as f64 {
        Ok(base.powi(exponent as i32))
    } else {
        Ok(base.powf(exponent))
    }
}

/// Recursive evaluation of the tree at `x`.
pub fn eval_expr(e: &Expr, x: f64) -> Result<f64, DomainError> {
    Ok(match e {
        Expr::Const(v) => *v,
        Expr::X => x,
        Expr::Add(l, r) => eval_expr(l, x)? + eval_expr(r, x)?,
        Expr::Sub(l, r) => eval_expr(l, x)? - eval_expr(r, x)?,
        Expr::Mul(l, r) => eval_expr(l, x)? * eval_expr(r, x)?,
        Expr::Div(l, r) => {
            let n = eval_expr(l, x)?;
            div(x, n, eval_expr(r, x)?)?
        }
        Expr::Neg(e) => -eval_expr(e, x)?,
        Expr::Pow(b, p) => pow(x, eval_expr(b, x)?, *p)?,
        Expr::Exp(e) => eval_expr(e, x)?.exp(),
        Expr::Ln(e) => ln(x, eval_expr(e, x)?)?,
        Expr::Abs(e) => eval_expr(e, x)?.abs(),
        Expr::Max(args) | Expr::Min(args) => {
            let is_max = matches!(e, Expr::Max(_));
            let mut acc: Option<f64> = None;
            for a in args {
                let v = eval_expr(a, x)?;
                acc = Some(match acc {
                    None => v,
                    Some(m) if is_max => m.max(v),
                    Some(m) => m.min(v),
                });
            }
            acc.ok_or(DomainError::EmptyArguments)?
        }
    })
}

/// Collapses a node whose children are all constants into one constant.
/// Nodes whose evaluation fails or overflows are left as they are.
pub fn fold(e: Expr) -> Expr {
    if matches!(e, Expr::Const(_)) || !e.is_literal() {
        return e;
    }
    match eval_expr(&e, 0.0) {
        Ok(v) if v.is_finite() => Expr::Const(v),
        _ => e,
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
enum Op {
    Const(f64),
    X,
    Add,
    Sub,
    Mul,
    Div,
    Neg,
    Pow(f64),
    Exp,
    Ln,
    Abs,
    Max(u32),
    Min(u32),
}

/// Postfix form of an [`Expr`] for fast repeated evaluation.
///
/// Produces bit-identical results to [`eval_expr`].
#[derive(Debug, Clone, PartialEq)]
pub struct Program {
    ops: Vec<Op>,
}

impl Program {
    pub fn compile(e: &Expr) -> Program {
        let mut ops = Vec::with_capacity(e.node_count());
        emit(e, &mut ops);
        Program { ops }
    }

    pub fn eval(&self, x: f64) -> Result<f64, DomainError> {
        let mut stack: SmallVec<[f64; 16]> = SmallVec::new();
        for op in &self.ops {
            match *op {
                Op::Const(v) => stack.push(v),
                Op::X => stack.push(x),
                Op::Neg => {
                    let v = stack.pop().unwrap();
                    stack.push(-v);
                }
                Op::Pow(p) => {
                    let v = stack.pop().unwrap();
                    stack.push(pow(x, v, p)?);
                }
                Op::Exp => {
                    let v = stack.pop().unwrap();
                    stack.push(v.exp());
                }
                Op::Ln => {
                    let v = stack.pop().unwrap();
                    stack.push(ln(x, v)?);
                }
                Op::Abs => {
                    let v = stack.pop().unwrap();
                    stack.push(v.abs());
                }
                Op::Max(n) | Op::Min(n) => {
                    if n == 0 {
                        return Err(DomainError::EmptyArguments);
                    }
                    let start = stack.len() - n as usize;
                    let is_max = matches!(op, Op::Max(_));
                    let mut acc = stack[start];
                    for &v in &stack[start + 1..] {
                        acc = if is_max { acc.max(v) } else { acc.min(v) };
                    }
                    stack.truncate(start);
                    stack.push(acc);
                }
                Op::Add | Op::Sub | Op::Mul | Op::Div => {
                    let r = stack.pop().unwrap();
                    let l = stack.pop().unwrap();
                    stack.push(match op {
                        Op::Add => l + r,
                        Op::Sub => l - r,
                        Op::Mul => l * r,
                        _ => div(x, l, r)?,
                    });
                }
            }
        }
        Ok(stack[0])
    }
}

fn emit(e: &Expr, ops: &mut Vec<Op>) {
    match e {
        Expr::Const(v) => ops.push(Op::Const(*v)),
        Expr::X => ops.push(Op::X),
        Expr::Add(l, r) | Expr::Sub(l, r) | Expr::Mul(l, r) | Expr::Div(l, r) => {
            emit(l, ops);
            emit(r, ops);
            ops.push(match e {
                Expr::Add(..) => Op::Add,
                Expr::Sub(..) => Op::Sub,
                Expr::Mul(..) => Op::Mul,
                _ => Op::Div,
            });
        }
        Expr::Neg(a) => {
            emit(a, ops);
            ops.push(Op::Neg);
        }
        Expr::Pow(a, p) => {
            emit(a, ops);
            ops.push(Op::Pow(*p));
        }
        Expr::Exp(a) => {
            emit(a, ops);
            ops.push(Op::Exp);
        }
        Expr::Ln(a) => {
            emit(a, ops);
            ops.push(Op::Ln);
        }
        Expr::Abs(a) => {
            emit(a, ops);
            ops.push(Op::Abs);
        }
        Expr::Max(args) | Expr::Min(args) => {
            for a in args {
                emit(a, ops);
            }
            let n = args.len() as u32;
            ops.push(if matches!(e, Expr::Max(_)) { Op::Max(n) } else { Op::Min(n) });
        }
    }
}
