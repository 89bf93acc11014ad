use super::jet::Scalar;
use crate::error::{Error, Result};
use std::fmt;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Func {
    Sin,
    Cos,
    Exp,
    Log,
    Sqrt,
    Abs,
}

impl Func {
    pub fn from_name(name: &str) -> Option<Func> {
        Some(match name {
            "sin" => Func::Sin,
            "cos" => Func::Cos,
            "exp" => Func::Exp,
            "log" | "ln" => Func::Log,
            "sqrt" => Func::Sqrt,
            "abs" => Func::Abs,
            _ => return None,
        })
    }

    fn name(self) -> &'static str {
        match self {
            Func::Sin => "sin",
            Func::Cos => "cos",
            Func::Exp => "exp",
            Func::Log => "log",
            Func::Sqrt => "sqrt",
            Func::Abs => "abs",
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub enum Expr {
    Const(f64),
    Param(usize),
    Add(Box<Expr>, Box<Expr>),
    Sub(Box<Expr>, Box<Expr>),
    Mul(Box<Expr>, Box<Expr>),
    Div(Box<Expr>, Box<Expr>),
    Neg(Box<Expr>),
    Pow(Box<Expr>, i32),
    Call(Func, Box<Expr>),
}

impl Expr {
    /// Largest parameter index used plus one.
    pub fn param_count(&self) -> usize {
        match self {
            Expr::Const(_) => 0,
            Expr::Param(i) => i + 1,
            Expr::Add(a, b) | Expr::Sub(a, b) | Expr::Mul(a, b) | Expr::Div(a, b) => {
                a.param_count().max(b.param_count())
            }
            Expr::Neg(a) | Expr::Pow(a, _) | Expr::Call(_, a) => a.param_count(),
        }
    }

    pub fn depth(&self) -> usize {
        match self {
            Expr::Const(_) | Expr::Param(_) => 1,
            Expr::Add(a, b) | Expr::Sub(a, b) | Expr::Mul(a, b) | Expr::Div(a, b) => {
                1 + a.depth().max(b.depth())
            }
            Expr::Neg(a) | Expr::Pow(a, _) | Expr::Call(_, a) => 1 + a.depth(),
        }
    }

    /// Evaluates over any [`Scalar`]; with jets this yields exact derivatives.
    ///
    /// Points where the expression or a requested derivative is undefined
    /// (log of a nonpositive value, sqrt at or below zero, division by zero,
    /// the kink of abs) are reported as [`Error::Domain`].
    pub fn eval<S: Scalar>(&self, y: &[S]) -> Result<S> {
        Ok(match self {
            Expr::Const(v) => S::cst(*v),
            Expr::Param(i) => *y.get(*i).ok_or(Error::DimensionMismatch {
                expected: i + 1,
                got: y.len(),
            })?,
            Expr::Add(a, b) => a.eval(y)? + b.eval(y)?,
            Expr::Sub(a, b) => a.eval(y)? - b.eval(y)?,
            Expr::Mul(a, b) => a.eval(y)? * b.eval(y)?,
            Expr::Div(a, b) => {
                let d = b.eval(y)?;
                if d.value() == 0.0 {
                    return Err(Error::Domain("division by zero".into()));
                }
                a.eval(y)? / d
            }
            Expr::Neg(a) => -a.eval(y)?,
            Expr::Pow(a, n) => {
                let base = a.eval(y)?;
                if *n < 0 && base.value() == 0.0 {
                    return Err(Error::Domain("negative power of zero".into()));
                }
                base.powi(*n)
            }
            Expr::Call(f, a) => {
                let u = a.eval(y)?;
                let v = u.value();
                match f {
                    Func::Sin => u.sin(),
                    Func::Cos => u.cos(),
                    Func::Exp => u.exp(),
                    Func::Log => {
                        if v <= 0.0 {
                            return Err(Error::Domain(format!("log of {v}")));
                        }
                        u.ln()
                    }
                    Func::Sqrt => {
                        if v < 0.0 || (v == 0.0 && S::tracks_derivatives()) {
                            return Err(Error::Domain(format!("sqrt of {v}")));
                        }
                        u.sqrt()
                    }
                    Func::Abs => {
                        if v == 0.0 && S::tracks_derivatives() {
                            return Err(Error::Domain("abs is not differentiable at 0".into()));
                        }
                        u.abs()
                    }
                }
            }
        })
    }
}

impl fmt::Display for Expr {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Expr::Const(v) => write!(f, "{v:?}"),
            Expr::Param(i) => write!(f, "y{i}"),
            Expr::Add(a, b) => write!(f, "({a} + {b})"),
            Expr::Sub(a, b) => write!(f, "({a} - {b})"),
            Expr::Mul(a, b) => write!(f, "({a} * {b})"),
            Expr::Div(a, b) => write!(f, "({a} / {b})"),
            Expr::Neg(a) => write!(f, "(-{a})"),
            Expr::Pow(a, n) => write!(f, "({a}^{n})"),
            Expr::Call(func, a) => write!(f, "{}({a})", func.name()),
        }
    }
}
