//! Expression language for residuals and boundary values.
//!
//! Variables are `x` and `y0..y10`, where `yk` is the `k`-th derivative of the
//! unknown. Functions: `sin cos tan exp ln sqrt abs` (one argument) and
//! `pow(a, b)`. `pi` and `e` are folded to constants while parsing.

mod ast;
mod parser;
mod token;

use std::collections::HashMap;

use thiserror::Error;

pub use ast::{ipow, real_pow, BinOp, EmptyEnv, Env, ExprAst, Func, PointEnv, Var, MAX_DERIV_VAR};
pub use parser::parse;
pub use token::{tokenize, Token, TokenKind};

#[derive(Debug, Error, Clone, PartialEq)]
pub enum ExprError {
    #[error("illegal character '{found}' at position {pos}")]
    Lex { pos: usize, found: String },
    #[error("parse error at position {pos}: {message}")]
    Parse { pos: usize, message: String },
    #[error("unknown name '{0}'")]
    Name(String),
    #[error("'{name}' at position {pos} takes {expected} argument(s), got {got}")]
    Arity {
        pos: usize,
        name: String,
        expected: usize,
        got: usize,
    },
    #[error("evaluation error: {0}")]
    Eval(String),
}

/// Tokenize and parse in one go.
pub fn parse_str(src: &str) -> Result<ExprAst, ExprError> {
    parse(&tokenize(src)?)
}

pub fn eval_ast(ast: &ExprAst, env: &HashMap<String, f64>) -> Result<f64, ExprError> {
    ast.eval(env)
}

/// Value of an expression that must not mention any variable.
pub fn eval_constant(src: &str) -> Result<f64, ExprError> {
    parse_str(src)?.eval(&EmptyEnv)
}
