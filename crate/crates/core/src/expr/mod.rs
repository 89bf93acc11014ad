//! Chart expressions: a small arithmetic language evaluated with
//! second-order forward-mode differentiation.

mod ast;
pub mod jet;
mod parse;

pub use ast::{Expr, Func};
pub use jet::{Jet2, Scalar, MAX_PARAMS};
pub use parse::{parse, parse_with_params};

use crate::error::{Error, Result};

/// Value, gradient and Hessian of an expression at a point.
pub fn eval_jet2(expr: &Expr, y: &[f64]) -> Result<Jet2> {
    if y.len() > MAX_PARAMS {
        return Err(Error::Invalid(format!(
            "at most {MAX_PARAMS} parameters are supported, got {}",
            y.len()
        )));
    }
    if y.iter().any(|v| !v.is_finite()) {
        return Err(Error::Invalid("non-finite parameter".into()));
    }
    expr.eval(&Jet2::seed(y))
}
