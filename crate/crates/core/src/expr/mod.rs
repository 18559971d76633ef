//! The function DSL: parsing, canonical printing, evaluation and symbolic
//! differentiation of single-variable expressions.

mod ast;
mod diff;
mod eval;
mod kinks;
mod parse;

pub use ast::{format_number, Expr};
pub use diff::{differentiate, DiffError};
pub use eval::{eval_expr, fold, DomainError, Program};
pub use kinks::{affine_form, kinks};
pub use parse::{parse_expr, ParseError};

/// Canonical DSL text for `e`; parsing it yields a structurally equal tree.
pub fn canonical_print(e: &Expr) -> String {
    e.to_string()
}
