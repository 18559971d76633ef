//! Numerical verification and auditing of Hadamard-type integral
//! inequalities for nonnegative convex functions.
//!
//! Functions are written in a small expression language ([`expr`]),
//! certified convex and nonnegative on an interval ([`funcs`]), integrated
//! with adaptive Simpson quadrature ([`quad`]) and fed to the inequality
//! evaluators ([`ineq`], [`means`]). [`sweep`] runs seeded randomized
//! campaigns and a sharpness search; [`cli`] is the command-line front end.

pub mod cli;
pub mod expr;
pub mod funcs;
pub mod ineq;
pub mod means;
pub mod output;
pub mod quad;
pub mod rng;
pub mod sweep;

use thiserror::Error;

pub use expr::{canonical_print, parse_expr, Expr};
pub use funcs::{ConvexFunction, Family, Interval};
pub use ineq::{InequalityReport, Theorem, Tolerances, Verdict};

/// Any error surfaced by the library.
#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    #[error("parse error: {0}")]
    Parse(#[from] expr::ParseError),
    #[error(transparent)]
    Func(#[from] funcs::FuncError),
    #[error(transparent)]
    Ineq(#[from] ineq::IneqError),
    #[error(transparent)]
    Mean(#[from] means::MeanError),
    #[error(transparent)]
    Config(#[from] sweep::ConfigError),
}
