//! Submanifolds of R^d given by charts, with tangent and normal frames.

pub mod catalog;
mod chart;
mod domain;
mod frames;
pub mod manifest;

pub use chart::{lip1_slope, lip1_value, Builtin, Chart, ChartMap, DerivativeMode, LIP1_MAX_K, TWO_PI};
pub use domain::{Axis, Domain, Edge};
pub(crate) use frames::check_rank;
pub(crate) use chart::jacobian_of;
pub use frames::{
    endpoint, normal_frame, subspace_distance, subspace_distance_report, tangent_frame, NormalFrame,
    SubspaceDistance, TangentFrame,
};

use crate::error::{Error, Result};
use nalgebra::DVector;
use serde::Serialize;

/// Ambient point.
pub type Point = DVector<f64>;

/// A submanifold as a list of charts sharing parameter and ambient dimension.
#[derive(Debug, Clone)]
pub struct ManifoldSpec {
    pub name: String,
    charts: Vec<Chart>,
    /// Documentation only.
    pub smoothness_claim: u32,
}

impl ManifoldSpec {
    pub fn new(name: impl Into<String>, charts: Vec<Chart>, smoothness_claim: u32) -> Result<Self> {
        let first = charts
            .first()
            .ok_or_else(|| Error::Invalid("a manifold needs at least one chart".into()))?;
        let (m, d) = (first.param_dim(), first.ambient_dim());
        if let Some(c) = charts.iter().find(|c| c.param_dim() != m || c.ambient_dim() != d) {
            return Err(Error::Invalid(format!(
                "charts disagree on dimensions: ({m}, {d}) vs ({}, {})",
                c.param_dim(),
                c.ambient_dim()
            )));
        }
        Ok(ManifoldSpec {
            name: name.into(),
            charts,
            smoothness_claim: smoothness_claim.max(1),
        })
    }

    pub fn charts(&self) -> &[Chart] {
        &self.charts
    }

    pub fn chart(&self, i: usize) -> Result<&Chart> {
        self.charts
            .get(i)
            .ok_or_else(|| Error::Invalid(format!("chart index {i} out of range")))
    }

    pub fn param_dim(&self) -> usize {
        self.charts[0].param_dim()
    }

    pub fn ambient_dim(&self) -> usize {
        self.charts[0].ambient_dim()
    }

    pub fn codim(&self) -> usize {
        self.ambient_dim() - self.param_dim()
    }

    /// All charts carry continuous second derivatives.
    pub fn is_c2(&self) -> bool {
        self.charts.iter().all(Chart::is_c2)
    }

    /// No chart was cut off artificially.
    pub fn is_compact(&self) -> bool {
        !self.charts.iter().any(|c| c.domain().has_truncation())
    }

    pub fn point(&self, chart: usize, y: &[f64]) -> Result<Point> {
        self.chart(chart)?.eval(y)
    }

    /// Samples on each chart's tensor grid (`n` nodes per axis).
    pub fn samples(&self, n: usize) -> Result<Vec<Point>> {
        let mut out = Vec::new();
        for c in &self.charts {
            for y in c.domain().grid(n, false) {
                out.push(c.eval(&y)?);
            }
        }
        Ok(out)
    }
}

/// A unit normal vector attached to a point of the manifold.
#[derive(Debug, Clone, Serialize)]
pub struct NormalRay {
    #[serde(serialize_with = "crate::serde_util::vector")]
    pub foot: Point,
    pub chart_index: usize,
    pub chart_coords: Vec<f64>,
    #[serde(serialize_with = "crate::serde_util::vector")]
    pub direction: DVector<f64>,
}

impl NormalRay {
    /// Builds a ray, normalizing `direction` and rejecting tangential components.
    pub fn new(m: &ManifoldSpec, chart_index: usize, coords: &[f64], direction: DVector<f64>) -> Result<Self> {
        let chart = m.chart(chart_index)?;
        if direction.len() != m.ambient_dim() {
            return Err(Error::DimensionMismatch { expected: m.ambient_dim(), got: direction.len() });
        }
        let norm = direction.norm();
        if !(norm.is_finite() && norm > 0.0) {
            return Err(Error::Invalid("ray direction must be a nonzero finite vector".into()));
        }
        let direction = direction / norm;
        let tangent = tangent_frame(chart, coords)?;
        for t in tangent.vectors.column_iter() {
            let c = t.dot(&direction);
            if c.abs() > 1e-8 {
                return Err(Error::Invalid(format!("direction is not normal (tangential component {c:e})")));
            }
        }
        let mut y = coords.to_vec();
        chart.domain().normalize(&mut y);
        Ok(NormalRay {
            foot: chart.eval(&y)?,
            chart_index,
            chart_coords: y,
            direction,
        })
    }

    /// Ray along a combination of the deterministic normal frame vectors.
    pub fn from_normal_coefficients(
        m: &ManifoldSpec,
        chart_index: usize,
        coords: &[f64],
        coefficients: &[f64],
    ) -> Result<Self> {
        let nf = normal_frame(m.chart(chart_index)?, coords)?;
        if coefficients.len() != nf.vectors.ncols() {
            return Err(Error::DimensionMismatch { expected: nf.vectors.ncols(), got: coefficients.len() });
        }
        let v = &nf.vectors * DVector::from_column_slice(coefficients);
        NormalRay::new(m, chart_index, coords, v)
    }

    pub fn at(&self, r: f64) -> Point {
        endpoint(self, r)
    }

    pub fn reversed(&self) -> NormalRay {
        NormalRay {
            direction: -&self.direction,
            ..self.clone()
        }
    }
}
