use std::collections::HashMap;
use std::fmt;

use super::ExprError;

/// Highest derivative index accepted as a variable (`y10`).
pub const MAX_DERIV_VAR: usize = 10;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Var {
    X,
    /// `y<k>`: the `k`-th derivative of the unknown.
    Y(usize),
}

impl Var {
    pub fn from_name(name: &str) -> Option<Self> {
        if name == "x" {
            return Some(Var::X);
        }
        let digits = name.strip_prefix('y')?;
        if digits.is_empty() || (digits.len() > 1 && digits.starts_with('0')) {
            return None;
        }
        let k: usize = digits.parse().ok()?;
        (k <= MAX_DERIV_VAR).then_some(Var::Y(k))
    }
}

impl fmt::Display for Var {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Var::X => f.write_str("x"),
            Var::Y(k) => write!(f, "y{k}"),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum BinOp {
    Add,
    Sub,
    Mul,
    Div,
    Pow,
}

impl BinOp {
    pub fn symbol(self) -> char {
        match self {
            BinOp::Add => '+',
            BinOp::Sub => '-',
            BinOp::Mul => '*',
            BinOp::Div => '/',
            BinOp::Pow => '^',
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Func {
    Sin,
    Cos,
    Tan,
    Exp,
    Ln,
    Sqrt,
    Abs,
    Pow,
}

impl Func {
    pub fn from_name(name: &str) -> Option<Self> {
        Some(match name {
            "sin" => Func::Sin,
            "cos" => Func::Cos,
            "tan" => Func::Tan,
            "exp" => Func::Exp,
            "ln" => Func::Ln,
            "sqrt" => Func::Sqrt,
            "abs" => Func::Abs,
            "pow" => Func::Pow,
            _ => return None,
        })
    }

    pub fn name(self) -> &'static str {
        match self {
            Func::Sin => "sin",
            Func::Cos => "cos",
            Func::Tan => "tan",
            Func::Exp => "exp",
            Func::Ln => "ln",
            Func::Sqrt => "sqrt",
            Func::Abs => "abs",
            Func::Pow => "pow",
        }
    }

    pub fn arity(self) -> usize {
        match self {
            Func::Pow => 2,
            _ => 1,
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub enum ExprAst {
    Constant(f64),
    Variable(Var),
    Neg(Box<ExprAst>),
    Binary(BinOp, Box<ExprAst>, Box<ExprAst>),
    Call(Func, Vec<ExprAst>),
}

/// Variable bindings for evaluation.
pub trait Env {
    fn lookup(&self, var: Var) -> Option<f64>;
}

impl Env for HashMap<String, f64> {
    fn lookup(&self, var: Var) -> Option<f64> {
        self.get(&var.to_string()).copied()
    }
}

/// `x` plus the derivative tuple `(y, y', ..., y^(n))`.
#[derive(Debug, Clone, Copy)]
pub struct PointEnv<'a> {
    pub x: f64,
    pub derivs: &'a [f64],
}

impl Env for PointEnv<'_> {
    fn lookup(&self, var: Var) -> Option<f64> {
        match var {
            Var::X => Some(self.x),
            Var::Y(k) => self.derivs.get(k).copied(),
        }
    }
}

/// No variables bound; for constant expressions.
pub struct EmptyEnv;

impl Env for EmptyEnv {
    fn lookup(&self, _: Var) -> Option<f64> {
        None
    }
}

/// `base^exp` for integer exponents by repeated squaring.
///
/// Used for every integer power in residuals so that hand-written and parsed
/// residuals round identically.
pub fn ipow(base: f64, exp: i64) -> f64 {
    let mut result = 1.0;
    let mut b = base;
    let mut e = exp.unsigned_abs();
    while e > 0 {
        if e & 1 == 1 {
            result *= b;
        }
        e >>= 1;
        if e > 0 {
            b *= b;
        }
    }
    if exp < 0 {
        1.0 / result
    } else {
        result
    }
}

/// Real power: integer exponents go through [`ipow`]; a negative base with a
/// fractional exponent is an error.
pub fn real_pow(base: f64, exp: f64) -> Result<f64, ExprError> {
    if exp.fract() == 0.0 && exp.abs() <= i32::MAX as f64 {
        return Ok(ipow(base, exp as i64));
    }
    if base < 0.0 {
        return Err(ExprError::Eval(format!(
            "negative base {base} with non-integer exponent {exp}"
        )));
    }
    Ok(base.powf(exp))
}

impl ExprAst {
    pub fn eval(&self, env: &dyn Env) -> Result<f64, ExprError> {
        match self {
            ExprAst::Constant(v) => Ok(*v),
            ExprAst::Variable(var) => env
                .lookup(*var)
                .ok_or_else(|| ExprError::Name(var.to_string())),
            ExprAst::Neg(inner) => Ok(-inner.eval(env)?),
            ExprAst::Binary(op, lhs, rhs) => {
                let a = lhs.eval(env)?;
                let b = rhs.eval(env)?;
                match op {
                    BinOp::Add => Ok(a + b),
                    BinOp::Sub => Ok(a - b),
                    BinOp::Mul => Ok(a * b),
                    BinOp::Div => {
                        if b == 0.0 {
                            Err(ExprError::Eval("division by zero".into()))
                        } else {
                            Ok(a / b)
                        }
                    }
                    BinOp::Pow => real_pow(a, b),
                }
            }
            ExprAst::Call(func, args) => {
                let a = args[0].eval(env)?;
                match func {
                    Func::Sin => Ok(a.sin()),
                    Func::Cos => Ok(a.cos()),
                    Func::Tan => Ok(a.tan()),
                    Func::Exp => Ok(a.exp()),
                    Func::Ln => {
                        if a <= 0.0 {
                            Err(ExprError::Eval(format!("ln of non-positive value {a}")))
                        } else {
                            Ok(a.ln())
                        }
                    }
                    Func::Sqrt => {
                        if a < 0.0 {
                            Err(ExprError::Eval(format!("sqrt of negative value {a}")))
                        } else {
                            Ok(a.sqrt())
                        }
                    }
                    Func::Abs => Ok(a.abs()),
                    Func::Pow => real_pow(a, args[1].eval(env)?),
                }
            }
        }
    }

    pub fn visit_vars(&self, f: &mut impl FnMut(Var)) {
        match self {
            ExprAst::Constant(_) => {}
            ExprAst::Variable(v) => f(*v),
            ExprAst::Neg(inner) => inner.visit_vars(f),
            ExprAst::Binary(_, a, b) => {
                a.visit_vars(f);
                b.visit_vars(f);
            }
            ExprAst::Call(_, args) => args.iter().for_each(|a| a.visit_vars(f)),
        }
    }

    pub fn is_constant(&self) -> bool {
        let mut any = false;
        self.visit_vars(&mut |_| any = true);
        !any
    }

    /// Highest `k` among the `y<k>` variables, if any appear.
    pub fn max_deriv(&self) -> Option<usize> {
        let mut max = None;
        self.visit_vars(&mut |v| {
            if let Var::Y(k) = v {
                max = Some(max.map_or(k, |m: usize| m.max(k)));
            }
        });
        max
    }
}

/// Fully parenthesised form; parsing it back gives the same tree.
impl fmt::Display for ExprAst {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            ExprAst::Constant(v) => write!(f, "{v:?}"),
            ExprAst::Variable(var) => write!(f, "{var}"),
            ExprAst::Neg(inner) => write!(f, "(-{inner})"),
            ExprAst::Binary(op, a, b) => write!(f, "({a} {} {b})", op.symbol()),
            ExprAst::Call(func, args) => {
                write!(f, "{}(", func.name())?;
                for (i, a) in args.iter().enumerate() {
                    if i > 0 {
                        f.write_str(", ")?;
                    }
                    write!(f, "{a}")?;
                }
                f.write_str(")")
            }
        }
    }
}
