use super::domain::Domain;
use crate::error::{Error, Result};
use crate::expr::{Expr, Jet2, Scalar, MAX_PARAMS};
use nalgebra::{DMatrix, DVector};
use std::f64::consts::{FRAC_PI_2, PI};
use std::sync::Arc;

/// How a chart's first and second derivatives are obtained.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum DerivativeMode {
    /// Exact, by forward-mode jets.
    Analytic,
    /// Central differences of values.
    FiniteDifference,
}

/// Parametrizations with closed-form evaluation.
#[derive(Debug, Clone, PartialEq)]
pub enum Builtin {
    Circle { center: [f64; 2], radius: f64 },
    /// Stereographic chart of the sphere of `radius` about `center` in R^d;
    /// `flip` selects the chart centred on the upper pole.
    Stereographic { center: Vec<f64>, radius: f64, flip: bool },
    Affine { origin: Vec<f64>, directions: Vec<Vec<f64>> },
    /// Graph `t -> (t, f(t))` of an expression in `y0`.
    Graph { f: Expr },
    /// Graph of the C^{1,1} function whose derivative is the piecewise linear
    /// sawtooth accumulating at the origin.
    Lip1,
    Torus { major: f64, minor: f64 },
    Helix { radius: f64, pitch: f64 },
    /// Unit-speed curve: ray along the x-axis, quarter circle, ray along the y-axis.
    QuarterCircleWithRays,
    /// Zero-dimensional chart.
    Point { coords: Vec<f64> },
}

#[derive(Debug, Clone, PartialEq)]
pub enum ChartMap {
    Builtin(Builtin),
    Expr(Vec<Expr>),
}

/// Sawtooth pieces below this index are dropped (derivative set to zero).
pub const LIP1_MAX_K: i32 = 12;

fn lip1_a(k: i32) -> f64 {
    9f64.powi(-k)
}

/// f(2 * 9^-k): sum over the full periods below.
fn lip1_period_sum(k: i32) -> f64 {
    (k..=LIP1_MAX_K).map(|j| 32.0 / 81.0 * lip1_a(j).powi(2)).sum()
}

fn lip1_period(x: f64) -> Option<i32> {
    (0..=LIP1_MAX_K).find(|&k| x > 2.0 * lip1_a(k) / 9.0)
}

/// Exact antiderivative of [`lip1_slope`], vanishing for `x <= 0`.
pub fn lip1_value<S: Scalar>(x: S) -> S {
    let xv = x.value();
    if xv <= 0.0 {
        return S::cst(0.0);
    }
    if xv > 1.0 {
        return S::cst(lip1_value(1.0));
    }
    let Some(k) = lip1_period(xv) else {
        return S::cst(0.0);
    };
    let a = lip1_a(k);
    let base = lip1_period_sum(k + 1);
    if xv <= 2.0 * a / 3.0 {
        let u = S::cst(a / 3.0) - x;
        S::cst(base + (a / 9.0).powi(2) / 2.0) - u.square().scale(0.5)
    } else {
        let u = x - S::cst(a);
        S::cst(base - 4.0 / 81.0 * a * a - (a / 3.0).powi(2) / 2.0) + u.square().scale(0.5)
    }
}

/// The sawtooth slope function.
pub fn lip1_slope(x: f64) -> f64 {
    if x <= 0.0 || x > 1.0 {
        return 0.0;
    }
    match lip1_period(x) {
        None => 0.0,
        Some(k) => {
            let a = lip1_a(k);
            if x <= 2.0 * a / 3.0 {
                a / 3.0 - x
            } else {
                x - a
            }
        }
    }
}

impl Builtin {
    pub fn param_dim(&self) -> usize {
        match self {
            Builtin::Circle { .. } | Builtin::Graph { .. } | Builtin::Lip1 => 1,
            Builtin::Helix { .. } | Builtin::QuarterCircleWithRays => 1,
            Builtin::Stereographic { center, .. } => center.len() - 1,
            Builtin::Affine { directions, .. } => directions.len(),
            Builtin::Torus { .. } => 2,
            Builtin::Point { .. } => 0,
        }
    }

    pub fn ambient_dim(&self) -> usize {
        match self {
            Builtin::Circle { .. } | Builtin::Graph { .. } | Builtin::Lip1 => 2,
            Builtin::QuarterCircleWithRays => 2,
            Builtin::Helix { .. } | Builtin::Torus { .. } => 3,
            Builtin::Stereographic { center, .. } => center.len(),
            Builtin::Affine { origin, .. } => origin.len(),
            Builtin::Point { coords } => coords.len(),
        }
    }

    /// Whether second derivatives are continuous everywhere on the chart.
    pub fn is_c2(&self) -> bool {
        !matches!(self, Builtin::Lip1 | Builtin::QuarterCircleWithRays)
    }

    fn eval<S: Scalar>(&self, y: &[S]) -> Result<Vec<S>> {
        Ok(match self {
            Builtin::Circle { center, radius } => vec![
                S::cst(center[0]) + y[0].cos().scale(*radius),
                S::cst(center[1]) + y[0].sin().scale(*radius),
            ],
            Builtin::Stereographic { center, radius, flip } => {
                let s = y.iter().fold(S::cst(0.0), |acc, &u| acc + u * u);
                let denom = s + S::cst(1.0);
                let mut out: Vec<S> = y
                    .iter()
                    .enumerate()
                    .map(|(i, &u)| S::cst(center[i]) + (u.scale(2.0 * radius) / denom))
                    .collect();
                let sign = if *flip { -1.0 } else { 1.0 };
                let last = center.len() - 1;
                out.push(S::cst(center[last]) + ((s - S::cst(1.0)) / denom).scale(sign * radius));
                out
            }
            Builtin::Affine { origin, directions } => origin
                .iter()
                .enumerate()
                .map(|(k, &o)| {
                    directions
                        .iter()
                        .zip(y)
                        .fold(S::cst(o), |acc, (dir, &u)| acc + u.scale(dir[k]))
                })
                .collect(),
            Builtin::Graph { f } => vec![y[0], f.eval(&y[..1])?],
            Builtin::Lip1 => vec![y[0], lip1_value(y[0])],
            Builtin::Torus { major, minor } => {
                let ring = S::cst(*major) + y[1].cos().scale(*minor);
                vec![ring * y[0].cos(), ring * y[0].sin(), y[1].sin().scale(*minor)]
            }
            Builtin::Helix { radius, pitch } => vec![
                y[0].cos().scale(*radius),
                y[0].sin().scale(*radius),
                y[0].scale(*pitch),
            ],
            Builtin::QuarterCircleWithRays => {
                let s = y[0];
                let v = s.value();
                if v < 0.0 {
                    vec![S::cst(1.0) - s, S::cst(0.0)]
                } else if v <= FRAC_PI_2 {
                    vec![S::cst(1.0) - s.sin(), S::cst(1.0) - s.cos()]
                } else {
                    vec![S::cst(0.0), S::cst(1.0 - FRAC_PI_2) + s]
                }
            }
            Builtin::Point { coords } => coords.iter().map(|&c| S::cst(c)).collect(),
        })
    }
}

impl ChartMap {
    fn eval<S: Scalar>(&self, y: &[S]) -> Result<Vec<S>> {
        match self {
            ChartMap::Builtin(b) => b.eval(y),
            ChartMap::Expr(components) => components.iter().map(|c| c.eval(y)).collect(),
        }
    }
}

/// A local parametrization `psi: box in R^m -> R^d`.
#[derive(Debug, Clone)]
pub struct Chart {
    map: Arc<ChartMap>,
    domain: Domain,
    mode: DerivativeMode,
    c2: bool,
    param_dim: usize,
    ambient_dim: usize,
}

impl Chart {
    pub fn builtin(b: Builtin, domain: Domain) -> Result<Self> {
        let (m, d, c2) = (b.param_dim(), b.ambient_dim(), b.is_c2());
        Chart::from_parts(ChartMap::Builtin(b), domain, m, d, c2)
    }

    /// Chart from one expression per ambient coordinate, in parameters `y0..`.
    pub fn expression(components: Vec<Expr>, domain: Domain) -> Result<Self> {
        let m = domain.dim();
        let d = components.len();
        if let Some(c) = components.iter().find(|c| c.param_count() > m) {
            return Err(Error::Invalid(format!("component `{c}` uses more than {m} parameters")));
        }
        Chart::from_parts(ChartMap::Expr(components), domain, m, d, true)
    }

    fn from_parts(map: ChartMap, domain: Domain, m: usize, d: usize, c2: bool) -> Result<Self> {
        if domain.dim() != m {
            return Err(Error::DimensionMismatch { expected: m, got: domain.dim() });
        }
        if m >= d {
            return Err(Error::Invalid(format!("parameter dimension {m} must be below ambient {d}")));
        }
        if m > MAX_PARAMS {
            return Err(Error::Invalid(format!("at most {MAX_PARAMS} chart parameters")));
        }
        if m > 0 && !domain.is_valid() {
            return Err(Error::Invalid("chart domain must satisfy lo < hi with finite bounds".into()));
        }
        Ok(Chart {
            map: Arc::new(map),
            domain,
            mode: DerivativeMode::Analytic,
            c2,
            param_dim: m,
            ambient_dim: d,
        })
    }

    pub fn with_mode(mut self, mode: DerivativeMode) -> Self {
        self.mode = mode;
        self
    }

    /// Marks the chart as only C^1 (second derivatives exist piecewise).
    pub fn with_c2(mut self, c2: bool) -> Self {
        self.c2 = c2;
        self
    }

    pub fn map(&self) -> &ChartMap {
        &self.map
    }

    pub fn domain(&self) -> &Domain {
        &self.domain
    }

    pub fn mode(&self) -> DerivativeMode {
        self.mode
    }

    pub fn is_c2(&self) -> bool {
        self.c2
    }

    pub fn param_dim(&self) -> usize {
        self.param_dim
    }

    pub fn ambient_dim(&self) -> usize {
        self.ambient_dim
    }

    fn checked(&self, y: &[f64]) -> Result<Vec<f64>> {
        if y.len() != self.param_dim {
            return Err(Error::DimensionMismatch { expected: self.param_dim, got: y.len() });
        }
        if !self.domain.contains(y) {
            return Err(Error::OutsideDomain { coords: y.to_vec() });
        }
        let mut y = y.to_vec();
        self.domain.normalize(&mut y);
        Ok(y)
    }

    /// Evaluates without the domain check; periodic axes still wrap.
    pub(crate) fn eval_raw(&self, y: &[f64]) -> Result<Vec<f64>> {
        self.map.eval(y)
    }

    pub fn eval(&self, y: &[f64]) -> Result<DVector<f64>> {
        let y = self.checked(y)?;
        Ok(DVector::from_vec(self.eval_raw(&y)?))
    }

    /// One jet per ambient coordinate (value, gradient, Hessian in parameters).
    /// No domain check, for use inside solvers that keep iterates feasible.
    pub(crate) fn jets_raw(&self, y: &[f64]) -> Result<Vec<Jet2>> {
        match self.mode {
            DerivativeMode::Analytic => self.map.eval(&Jet2::seed(y)),
            DerivativeMode::FiniteDifference => self.fd_jets(y),
        }
    }

    pub fn jets(&self, y: &[f64]) -> Result<Vec<Jet2>> {
        let y = self.checked(y)?;
        self.jets_raw(&y)
    }

    pub fn jacobian(&self, y: &[f64]) -> Result<DMatrix<f64>> {
        let jets = self.jets(y)?;
        Ok(jacobian_of(&jets, self.param_dim))
    }

    /// `hess[k]` is the m x m matrix of second partials of coordinate `k`.
    pub fn hessians(&self, y: &[f64]) -> Result<Vec<DMatrix<f64>>> {
        if !self.c2 {
            return Err(Error::NotC2);
        }
        let jets = self.jets(y)?;
        Ok(hessians_of(&jets, self.param_dim))
    }

    /// Central differences with steps eps^(1/3) and eps^(1/4) scaled by max(1, |y_i|).
    fn fd_jets(&self, y: &[f64]) -> Result<Vec<Jet2>> {
        let m = self.param_dim;
        let d = self.ambient_dim;
        let f0 = self.eval_raw(y)?;
        let mut out: Vec<Jet2> = f0
            .iter()
            .map(|&v| Jet2::with_dim(v, m))
            .collect();
        let shifted = |offsets: &[(usize, f64)]| -> Result<Vec<f64>> {
            let mut z = y.to_vec();
            for &(i, h) in offsets {
                z[i] += h;
            }
            self.eval_raw(&z)
        };
        let eps = f64::EPSILON;
        let h1: Vec<f64> = y.iter().map(|v| eps.cbrt() * v.abs().max(1.0)).collect();
        let h2: Vec<f64> = y.iter().map(|v| eps.powf(0.25) * v.abs().max(1.0)).collect();
        for i in 0..m {
            let fp = shifted(&[(i, h1[i])])?;
            let fm = shifted(&[(i, -h1[i])])?;
            let fp2 = shifted(&[(i, h2[i])])?;
            let fm2 = shifted(&[(i, -h2[i])])?;
            for k in 0..d {
                out[k].grad[i] = (fp[k] - fm[k]) / (2.0 * h1[i]);
                out[k].hess[i][i] = (fp2[k] - 2.0 * f0[k] + fm2[k]) / (h2[i] * h2[i]);
            }
            for j in 0..i {
                let pp = shifted(&[(i, h2[i]), (j, h2[j])])?;
                let pm = shifted(&[(i, h2[i]), (j, -h2[j])])?;
                let mp = shifted(&[(i, -h2[i]), (j, h2[j])])?;
                let mm = shifted(&[(i, -h2[i]), (j, -h2[j])])?;
                for k in 0..d {
                    let v = (pp[k] - pm[k] - mp[k] + mm[k]) / (4.0 * h2[i] * h2[j]);
                    out[k].hess[i][j] = v;
                    out[k].hess[j][i] = v;
                }
            }
        }
        Ok(out)
    }
}

pub(crate) fn jacobian_of(jets: &[Jet2], m: usize) -> DMatrix<f64> {
    DMatrix::from_fn(jets.len(), m, |k, i| jets[k].grad[i])
}

pub(crate) fn hessians_of(jets: &[Jet2], m: usize) -> Vec<DMatrix<f64>> {
    jets.iter()
        .map(|j| DMatrix::from_fn(m, m, |a, b| j.hess[a][b]))
        .collect()
}

/// Default circle period.
pub const TWO_PI: f64 = 2.0 * PI;
