//! Recursive-descent parser.
//!
//! ```text
//! expr    := term (('+' | '-') term)*
//! term    := unary (('*' | '/') unary)*
//! unary   := '-' unary | power
//! power   := primary ('^' unary)?
//! primary := number | constant | variable | call | '(' expr ')'
//! ```
//!
//! `^` is right-associative and binds tighter than a leading minus, so
//! `-x^2` is `-(x^2)` and `2^-1` is `2^(-1)`.

use std::f64::consts::{E, PI};

use super::ast::{BinOp, ExprAst, Func, Var};
use super::token::{Token, TokenKind};
use super::ExprError;

const MAX_DEPTH: usize = 200;

pub fn parse(tokens: &[Token]) -> Result<ExprAst, ExprError> {
    let mut parser = Parser {
        tokens,
        pos: 0,
        depth: 0,
    };
    if tokens.is_empty() {
        return Err(parser.error("empty expression"));
    }
    let ast = parser.expr()?;
    if let Some(tok) = parser.peek() {
        return Err(ExprError::Parse {
            pos: tok.pos,
            message: format!("unexpected '{}'", tok.text),
        });
    }
    Ok(ast)
}

struct Parser<'a> {
    tokens: &'a [Token],
    pos: usize,
    depth: usize,
}

impl Parser<'_> {
    fn peek(&self) -> Option<&Token> {
        self.tokens.get(self.pos)
    }

    fn next(&mut self) -> Option<&Token> {
        let tok = self.tokens.get(self.pos);
        self.pos += 1;
        tok
    }

    fn peek_op(&self) -> Option<char> {
        match self.peek()?.kind {
            TokenKind::Op(c) => Some(c),
            _ => None,
        }
    }

    /// Position used for errors at the current token, or end of input.
    fn here(&self) -> usize {
        match self.peek() {
            Some(t) => t.pos,
            None => self.tokens.last().map_or(0, |t| t.pos + t.text.len()),
        }
    }

    fn error(&self, message: &str) -> ExprError {
        ExprError::Parse {
            pos: self.here(),
            message: message.to_string(),
        }
    }

    fn enter(&mut self) -> Result<(), ExprError> {
        self.depth += 1;
        if self.depth > MAX_DEPTH {
            return Err(self.error("expression nested too deeply"));
        }
        Ok(())
    }

    fn expr(&mut self) -> Result<ExprAst, ExprError> {
        self.enter()?;
        let mut lhs = self.term()?;
        while let Some(c @ ('+' | '-')) = self.peek_op() {
            self.pos += 1;
            let rhs = self.term()?;
            let op = if c == '+' { BinOp::Add } else { BinOp::Sub };
            lhs = ExprAst::Binary(op, Box::new(lhs), Box::new(rhs));
        }
        self.depth -= 1;
        Ok(lhs)
    }

    fn term(&mut self) -> Result<ExprAst, ExprError> {
        let mut lhs = self.unary()?;
        while let Some(c @ ('*' | '/')) = self.peek_op() {
            self.pos += 1;
            let rhs = self.unary()?;
            let op = if c == '*' { BinOp::Mul } else { BinOp::Div };
            lhs = ExprAst::Binary(op, Box::new(lhs), Box::new(rhs));
        }
        Ok(lhs)
    }

    fn unary(&mut self) -> Result<ExprAst, ExprError> {
        if self.peek_op() == Some('-') {
            self.pos += 1;
            self.enter()?;
            let inner = self.unary()?;
            self.depth -= 1;
            return Ok(ExprAst::Neg(Box::new(inner)));
        }
        self.power()
    }

    fn power(&mut self) -> Result<ExprAst, ExprError> {
        let base = self.primary()?;
        if self.peek_op() == Some('^') {
            self.pos += 1;
            self.enter()?;
            let exponent = self.unary()?;
            self.depth -= 1;
            return Ok(ExprAst::Binary(
                BinOp::Pow,
                Box::new(base),
                Box::new(exponent),
            ));
        }
        Ok(base)
    }

    fn primary(&mut self) -> Result<ExprAst, ExprError> {
        let here = self.here();
        let Some(tok) = self.next() else {
            return Err(ExprError::Parse {
                pos: here,
                message: "unexpected end of expression".into(),
            });
        };
        match &tok.kind {
            TokenKind::Number(v) => Ok(ExprAst::Constant(*v)),
            TokenKind::LParen => {
                let inner = self.expr()?;
                self.expect_rparen()?;
                Ok(inner)
            }
            TokenKind::Ident(name) => {
                let name = name.clone();
                let pos = tok.pos;
                if matches!(self.peek().map(|t| &t.kind), Some(TokenKind::LParen)) {
                    self.pos += 1;
                    return self.call(&name, pos);
                }
                match name.as_str() {
                    "pi" => Ok(ExprAst::Constant(PI)),
                    "e" => Ok(ExprAst::Constant(E)),
                    _ => {
                        if let Some(var) = Var::from_name(&name) {
                            Ok(ExprAst::Variable(var))
                        } else if Func::from_name(&name).is_some() {
                            Err(ExprError::Parse {
                                pos,
                                message: format!("function '{name}' needs an argument list"),
                            })
                        } else {
                            Err(ExprError::Name(name))
                        }
                    }
                }
            }
            _ => Err(ExprError::Parse {
                pos: tok.pos,
                message: format!("unexpected '{}'", tok.text),
            }),
        }
    }

    fn call(&mut self, name: &str, pos: usize) -> Result<ExprAst, ExprError> {
        let func = Func::from_name(name).ok_or_else(|| ExprError::Name(name.to_string()))?;
        let mut args = Vec::new();
        if matches!(self.peek().map(|t| &t.kind), Some(TokenKind::RParen)) {
            self.pos += 1;
        } else {
            loop {
                args.push(self.expr()?);
                match self.peek().map(|t| &t.kind) {
                    Some(TokenKind::Comma) => self.pos += 1,
                    _ => {
                        self.expect_rparen()?;
                        break;
                    }
                }
            }
        }
        if args.len() != func.arity() {
            return Err(ExprError::Arity {
                pos,
                name: name.to_string(),
                expected: func.arity(),
                got: args.len(),
            });
        }
        Ok(ExprAst::Call(func, args))
    }

    fn expect_rparen(&mut self) -> Result<(), ExprError> {
        match self.peek().map(|t| &t.kind) {
            Some(TokenKind::RParen) => {
                self.pos += 1;
                Ok(())
            }
            _ => Err(self.error("expected ')'")),
        }
    }
}
