//! Second-order forward-mode jets.
//!
//! A [`Jet2`] carries a value together with its gradient and Hessian with
//! respect to at most [`MAX_PARAMS`] chart parameters. Arithmetic propagates
//! all three by the product and chain rules, so evaluating a chart on seeded
//! jets yields exact first and second derivatives.

use std::ops::{Add, Div, Mul, Neg, Sub};

/// Largest supported chart parameter dimension.
pub const MAX_PARAMS: usize = 4;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Jet2 {
    pub value: f64,
    pub grad: [f64; MAX_PARAMS],
    pub hess: [[f64; MAX_PARAMS]; MAX_PARAMS],
    dim: usize,
}

impl Jet2 {
    pub fn constant(value: f64) -> Self {
        Jet2 {
            value,
            grad: [0.0; MAX_PARAMS],
            hess: [[0.0; MAX_PARAMS]; MAX_PARAMS],
            dim: 0,
        }
    }

    /// Constant with zero derivatives in `dim` parameters.
    pub fn with_dim(value: f64, dim: usize) -> Self {
        assert!(dim <= MAX_PARAMS);
        let mut j = Jet2::constant(value);
        j.dim = dim;
        j
    }

    /// The `index`-th of `dim` independent variables, evaluated at `value`.
    pub fn variable(value: f64, index: usize, dim: usize) -> Self {
        assert!(dim <= MAX_PARAMS && index < dim);
        let mut j = Jet2::constant(value);
        j.dim = dim;
        j.grad[index] = 1.0;
        j
    }

    /// Seeds one jet per coordinate of `y`.
    pub fn seed(y: &[f64]) -> Vec<Jet2> {
        y.iter()
            .enumerate()
            .map(|(i, &v)| Jet2::variable(v, i, y.len()))
            .collect()
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn gradient(&self, m: usize) -> Vec<f64> {
        self.grad[..m].to_vec()
    }

    pub fn hessian(&self, m: usize) -> Vec<Vec<f64>> {
        (0..m).map(|i| self.hess[i][..m].to_vec()).collect()
    }

    /// Applies a scalar function given its value and first two derivatives.
    fn chain(self, f: f64, df: f64, d2f: f64) -> Self {
        let n = self.dim;
        let mut out = Jet2::constant(f);
        out.dim = n;
        for i in 0..n {
            out.grad[i] = df * self.grad[i];
            for j in 0..n {
                out.hess[i][j] = df * self.hess[i][j] + d2f * self.grad[i] * self.grad[j];
            }
        }
        out
    }

    pub fn recip(self) -> Self {
        let v = self.value;
        self.chain(1.0 / v, -1.0 / (v * v), 2.0 / (v * v * v))
    }
}

impl Add for Jet2 {
    type Output = Jet2;
    fn add(self, rhs: Jet2) -> Jet2 {
        let n = self.dim.max(rhs.dim);
        let mut out = Jet2::constant(self.value + rhs.value);
        out.dim = n;
        for i in 0..n {
            out.grad[i] = self.grad[i] + rhs.grad[i];
            for j in 0..n {
                out.hess[i][j] = self.hess[i][j] + rhs.hess[i][j];
            }
        }
        out
    }
}

impl Sub for Jet2 {
    type Output = Jet2;
    fn sub(self, rhs: Jet2) -> Jet2 {
        self + (-rhs)
    }
}

impl Neg for Jet2 {
    type Output = Jet2;
    fn neg(self) -> Jet2 {
        let mut out = self;
        out.value = -out.value;
        for i in 0..out.dim {
            out.grad[i] = -out.grad[i];
            for j in 0..out.dim {
                out.hess[i][j] = -out.hess[i][j];
            }
        }
        out
    }
}

impl Mul for Jet2 {
    type Output = Jet2;
    fn mul(self, rhs: Jet2) -> Jet2 {
        let n = self.dim.max(rhs.dim);
        let (a, b) = (self.value, rhs.value);
        let mut out = Jet2::constant(a * b);
        out.dim = n;
        for i in 0..n {
            out.grad[i] = self.grad[i] * b + a * rhs.grad[i];
            for j in 0..n {
                out.hess[i][j] = self.hess[i][j] * b
                    + a * rhs.hess[i][j]
                    + self.grad[i] * rhs.grad[j]
                    + rhs.grad[i] * self.grad[j];
            }
        }
        out
    }
}

impl Div for Jet2 {
    type Output = Jet2;
    #[allow(clippy::suspicious_arithmetic_impl)]
    fn div(self, rhs: Jet2) -> Jet2 {
        self * rhs.recip()
    }
}

/// Numeric type a chart or expression can be evaluated over.
///
/// Implemented by `f64` (values only) and [`Jet2`] (values with exact first
/// and second derivatives).
pub trait Scalar:
    Copy
    + Add<Output = Self>
    + Sub<Output = Self>
    + Mul<Output = Self>
    + Div<Output = Self>
    + Neg<Output = Self>
{
    fn cst(v: f64) -> Self;
    fn value(&self) -> f64;
    /// Whether derivatives are propagated (kinks and singular points matter).
    fn tracks_derivatives() -> bool;
    fn sin(self) -> Self;
    fn cos(self) -> Self;
    fn exp(self) -> Self;
    fn ln(self) -> Self;
    fn sqrt(self) -> Self;
    fn abs(self) -> Self;
    fn powi(self, n: i32) -> Self;

    fn scale(self, k: f64) -> Self {
        self * Self::cst(k)
    }

    fn square(self) -> Self {
        self * self
    }
}

impl Scalar for f64 {
    fn cst(v: f64) -> Self {
        v
    }
    fn value(&self) -> f64 {
        *self
    }
    fn tracks_derivatives() -> bool {
        false
    }
    fn sin(self) -> Self {
        f64::sin(self)
    }
    fn cos(self) -> Self {
        f64::cos(self)
    }
    fn exp(self) -> Self {
        f64::exp(self)
    }
    fn ln(self) -> Self {
        f64::ln(self)
    }
    fn sqrt(self) -> Self {
        f64::sqrt(self)
    }
    fn abs(self) -> Self {
        f64::abs(self)
    }
    fn powi(self, n: i32) -> Self {
        f64::powi(self, n)
    }
}

impl Scalar for Jet2 {
    fn cst(v: f64) -> Self {
        Jet2::constant(v)
    }
    fn value(&self) -> f64 {
        self.value
    }
    fn tracks_derivatives() -> bool {
        true
    }
    fn sin(self) -> Self {
        let (s, c) = self.value.sin_cos();
        self.chain(s, c, -s)
    }
    fn cos(self) -> Self {
        let (s, c) = self.value.sin_cos();
        self.chain(c, -s, -c)
    }
    fn exp(self) -> Self {
        let e = self.value.exp();
        self.chain(e, e, e)
    }
    fn ln(self) -> Self {
        let v = self.value;
        self.chain(v.ln(), 1.0 / v, -1.0 / (v * v))
    }
    fn sqrt(self) -> Self {
        let r = self.value.sqrt();
        self.chain(r, 0.5 / r, -0.25 / (r * self.value))
    }
    fn abs(self) -> Self {
        let s = if self.value < 0.0 { -1.0 } else { 1.0 };
        self.chain(self.value.abs(), s, 0.0)
    }
    fn powi(self, n: i32) -> Self {
        let v = self.value;
        match n {
            0 => Jet2::constant(1.0),
            1 => self,
            _ => {
                let nf = f64::from(n);
                self.chain(
                    v.powi(n),
                    nf * v.powi(n - 1),
                    nf * (nf - 1.0) * v.powi(n - 2),
                )
            }
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn product_of_variables() {
        let y = Jet2::seed(&[2.0, 5.0]);
        let p = y[0] * y[1];
        assert_eq!(p.value, 10.0);
        assert_eq!(p.gradient(2), vec![5.0, 2.0]);
        assert_eq!(p.hessian(2), vec![vec![0.0, 1.0], vec![1.0, 0.0]]);
    }

    #[test]
    fn quotient_rule() {
        // 1/y at y=2: -1/4, 2/8
        let y = Jet2::variable(2.0, 0, 1);
        let q = Jet2::constant(1.0) / y;
        assert!((q.grad[0] + 0.25).abs() < 1e-15);
        assert!((q.hess[0][0] - 0.25).abs() < 1e-15);
    }

    #[test]
    fn composition_sin_of_square() {
        // d/dy sin(y^2) = 2y cos(y^2); d2 = 2cos(y^2) - 4y^2 sin(y^2)
        let y = 0.7;
        let j = Jet2::variable(y, 0, 1).powi(2).sin();
        let y2: f64 = y * y;
        assert!((j.grad[0] - 2.0 * y * y2.cos()).abs() < 1e-14);
        assert!((j.hess[0][0] - (2.0 * y2.cos() - 4.0 * y2 * y2.sin())).abs() < 1e-14);
    }
}
