//! A small arithmetic language over the single variable `t`.
//!
//! Precedence, lowest to highest: `+ -`, `* /`, unary `-`, `^` (right
//! associative), then calls and atoms. So `-2^2` is `-(2^2)` and `2^-1` is
//! `2^(-1)`. Angles are in radians. Model parameters are not variables; they
//! are substituted as literals with [`substitute_params`] before parsing.

mod function;
mod parser;

use std::fmt;

use crate::scalar::Real;

pub(crate) use function::param as function_param;
pub use function::{CatalogFunction, Params, TimeFunction};
pub use parser::{parse, substitute_params, ParseError};

/// Parsed expression tree.
#[derive(Debug, Clone, PartialEq)]
pub enum Expr {
    Num(f64),
    Var,
    Neg(Box<Expr>),
    Binary(BinOp, Box<Expr>, Box<Expr>),
    Call(Func, Box<Expr>),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum BinOp {
    Add,
    Sub,
    Mul,
    Div,
    Pow,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Func {
    Sin,
    Cos,
    Tan,
    Exp,
    Log,
    Sqrt,
    Abs,
}

impl Func {
    pub const ALL: [Func; 7] = [
        Func::Sin,
        Func::Cos,
        Func::Tan,
        Func::Exp,
        Func::Log,
        Func::Sqrt,
        Func::Abs,
    ];

    pub fn name(self) -> &'static str {
        match self {
            Func::Sin => "sin",
            Func::Cos => "cos",
            Func::Tan => "tan",
            Func::Exp => "exp",
            Func::Log => "log",
            Func::Sqrt => "sqrt",
            Func::Abs => "abs",
        }
    }

    pub fn from_name(name: &str) -> Option<Func> {
        Func::ALL.into_iter().find(|f| f.name() == name)
    }

    fn apply<T: Real>(self, x: T) -> Result<T, EvalError> {
        let domain = |func: Func| EvalError::Domain {
            func: func.name(),
            arg: x.as_f64(),
        };
        Ok(match self {
            Func::Sin => x.sin(),
            Func::Cos => x.cos(),
            Func::Tan => x.tan(),
            Func::Exp => x.exp(),
            Func::Log if x > T::zero() => x.ln(),
            Func::Log => return Err(domain(self)),
            Func::Sqrt if x >= T::zero() => x.sqrt(),
            Func::Sqrt => return Err(domain(self)),
            Func::Abs => x.abs(),
        })
    }
}

impl BinOp {
    fn symbol(self) -> &'static str {
        match self {
            BinOp::Add => "+",
            BinOp::Sub => "-",
            BinOp::Mul => "*",
            BinOp::Div => "/",
            BinOp::Pow => "^",
        }
    }
}

/// Evaluation failure. Non-finite intermediate values are always reported.
#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub enum EvalError {
    #[error("{func}({arg}) is outside the function's domain")]
    Domain { func: &'static str, arg: f64 },
    #[error("expression evaluates to a non-finite value at t = {t}")]
    NonFinite { t: f64 },
}

impl Expr {
    pub fn eval<T: Real>(&self, t: T) -> Result<T, EvalError> {
        let v = match self {
            Expr::Num(x) => T::lit(*x),
            Expr::Var => t,
            Expr::Neg(e) => -e.eval(t)?,
            Expr::Binary(op, l, r) => {
                let (l, r) = (l.eval(t)?, r.eval(t)?);
                match op {
                    BinOp::Add => l + r,
                    BinOp::Sub => l - r,
                    BinOp::Mul => l * r,
                    BinOp::Div => l / r,
                    BinOp::Pow => l.powf(r),
                }
            }
            Expr::Call(f, arg) => f.apply(arg.eval(t)?)?,
        };
        if v.is_finite() {
            Ok(v)
        } else {
            Err(EvalError::NonFinite { t: t.as_f64() })
        }
    }

    pub fn depends_on_t(&self) -> bool {
        match self {
            Expr::Num(_) => false,
            Expr::Var => true,
            Expr::Neg(e) | Expr::Call(_, e) => e.depends_on_t(),
            Expr::Binary(_, l, r) => l.depends_on_t() || r.depends_on_t(),
        }
    }
}

/// Fully parenthesised form; reparses to an identical tree up to the sign of
/// negative literals, which come back as `Neg`.
impl fmt::Display for Expr {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Expr::Num(x) if *x < 0.0 || (*x == 0.0 && x.is_sign_negative()) => {
                write!(f, "(-{:?})", -x)
            }
            Expr::Num(x) => write!(f, "{x:?}"),
            Expr::Var => f.write_str("t"),
            Expr::Neg(e) => write!(f, "(-{e})"),
            Expr::Binary(op, l, r) => write!(f, "({l} {} {r})", op.symbol()),
            Expr::Call(func, arg) => write!(f, "{}({arg})", func.name()),
        }
    }
}

/// Parses a parameter value, accepting any `t`-free expression such as `1/3`.
pub fn parse_constant(source: &str) -> Result<f64, crate::Error> {
    let expr = parse(source)?;
    if expr.depends_on_t() {
        return Err(crate::Error::InvalidParameter {
            name: source.to_string(),
            reason: "constant expected, found a function of t".into(),
        });
    }
    Ok(expr.eval(0.0f64)?)
}
