//! Closed-form derivative of the metric projection, the gradient of the
//! squared distance, and finite-difference cross-checks.

use crate::curvature::{shape_operator, sorted_eigenvalues};
use crate::error::{Error, Result};
use crate::extended::Extended;
use crate::manifold::{tangent_frame, ManifoldSpec, NormalRay, Point};
use crate::projection::{project, project_with_hints, scale_at, Minimum, ProjectOptions};
use nalgebra::{DMatrix, DVector};
use serde::Serialize;

/// `|1 - t lambda|` at or below this makes the resolvent singular.
const RESOLVENT_FLOOR: f64 = 1e-10;

#[derive(Debug, Clone, Serialize)]
pub struct DpFormula {
    pub foot: Minimum,
    #[serde(serialize_with = "crate::serde_util::matrix")]
    pub matrix: DMatrix<f64>,
}

#[derive(Debug, Clone, Serialize)]
pub struct DpReport {
    #[serde(serialize_with = "crate::serde_util::vector")]
    pub x: Point,
    #[serde(serialize_with = "crate::serde_util::vector")]
    pub foot: Point,
    #[serde(serialize_with = "crate::serde_util::matrix")]
    pub formula_matrix: DMatrix<f64>,
    #[serde(serialize_with = "crate::serde_util::matrix")]
    pub fd_matrix: DMatrix<f64>,
    /// `|formula - fd|_F / (1 + |fd|_F)`.
    pub rel_error: f64,
    /// `(1 - |x - xi| / eps0)^{-1}` when `eps0` was given and exceeds the distance.
    pub norm_bound: Extended,
}

fn unique_foot(m: &ManifoldSpec, x: &Point, opts: &ProjectOptions) -> Result<Minimum> {
    let res = project(m, x, opts)?;
    if !res.is_unique() {
        return Err(Error::NotUnique(format!("projection of {x} is not unique")));
    }
    Ok(res.minima[0].clone())
}

/// `Dp(x) = (id_T - |x - xi| L_{xi,v})^{-1} P_T` as a `d x d` matrix.
///
/// The resolvent is inverted in the orthonormal tangent frame of the shape
/// operator and mapped back, so the result vanishes on the normal space.
pub fn dp_formula(m: &ManifoldSpec, x: &Point, opts: &ProjectOptions) -> Result<DpFormula> {
    let foot = unique_foot(m, x, opts)?;
    let d = m.ambient_dim();
    let chart = m.chart(foot.chart_index)?;
    if chart.param_dim() == 0 {
        return Ok(DpFormula { foot, matrix: DMatrix::zeros(d, d) });
    }
    let tf = tangent_frame(chart, &foot.chart_coords)?.vectors;
    let diff = x - &foot.point;
    // keep only the normal part so rounding in the foot cannot tilt v
    let normal_part = &diff - &tf * (tf.transpose() * &diff);
    let t = normal_part.norm();
    if t <= 1e-14 * scale_at(x) {
        return Ok(DpFormula { matrix: &tf * tf.transpose(), foot });
    }
    let ray = NormalRay::new(m, foot.chart_index, &foot.chart_coords, normal_part / t)?;
    let so = shape_operator(m, &ray)?;
    let pd = so.matrix.nrows();
    let a = DMatrix::identity(pd, pd) - &so.matrix * t;
    for l in sorted_eigenvalues(&a) {
        if l.abs() <= RESOLVENT_FLOOR {
            return Err(Error::SingularResolvent(1.0 - l));
        }
    }
    let r = a.try_inverse().ok_or(Error::SingularResolvent(1.0))?;
    let f = &so.frame;
    Ok(DpFormula { matrix: f * r * f.transpose(), foot })
}

/// Default finite-difference step `1e-5 (1 + |x|)`.
pub fn default_fd_step(x: &Point) -> f64 {
    1e-5 * scale_at(x)
}

/// Central differences of the projection feet with step `h` along each axis.
///
/// Each probe must keep a unique foot within `max(0.1 |x - xi|, 100 h)` of
/// `xi`; otherwise the probe has left the basin and [`Error::FootJump`] names
/// the axis.
pub fn dp_fd(m: &ManifoldSpec, x: &Point, h: f64, opts: &ProjectOptions) -> Result<DMatrix<f64>> {
    if !(h > 0.0) {
        return Err(Error::Invalid("h must be positive".into()));
    }
    let foot = unique_foot(m, x, opts)?;
    let d = x.len();
    let radius = (0.1 * (x - &foot.point).norm()).max(100.0 * h);
    let hint = [foot.chart_point()];
    let mut out = DMatrix::zeros(d, d);
    for i in 0..d {
        let mut feet = [DVector::zeros(d), DVector::zeros(d)];
        for (slot, sign) in feet.iter_mut().zip([1.0, -1.0]) {
            let mut q = x.clone();
            q[i] += sign * h;
            let r = project_with_hints(m, &q, opts, &hint)?;
            if !r.is_unique() || (r.foot() - &foot.point).norm() > radius {
                return Err(Error::FootJump { axis: i });
            }
            *slot = r.foot().clone();
        }
        out.set_column(i, &((&feet[0] - &feet[1]) / (2.0 * h)));
    }
    Ok(out)
}

/// Gradient of `delta_M^2` at `x`: `2 (x - p(x))`.
pub fn grad_delta_squared(m: &ManifoldSpec, x: &Point, opts: &ProjectOptions) -> Result<DVector<f64>> {
    let foot = unique_foot(m, x, opts)?;
    Ok((x - &foot.point) * 2.0)
}

/// Largest singular value.
pub fn operator_norm(a: &DMatrix<f64>) -> f64 {
    if a.is_empty() {
        return 0.0;
    }
    a.clone().svd(false, false).singular_values.max()
}

#[derive(Debug, Clone, Copy, Serialize)]
pub struct NormBound {
    pub bound: f64,
    pub operator_norm: f64,
}

/// The bound `(1 - |x - xi| / eps0)^{-1}` on `|Dp(x)|` inside the `eps0` tube,
/// checked against the operator norm of [`dp_formula`].
pub fn dp_norm_bound(m: &ManifoldSpec, x: &Point, eps0: f64, opts: &ProjectOptions) -> Result<NormBound> {
    let dp = dp_formula(m, x, opts)?;
    let dist = (x - &dp.foot.point).norm();
    if !(dist < eps0) {
        return Err(Error::Invalid(format!("distance {dist} is not below eps0 = {eps0}")));
    }
    let bound = 1.0 / (1.0 - dist / eps0);
    let norm = operator_norm(&dp.matrix);
    if norm > bound + 1e-8 {
        return Err(Error::BoundViolation { norm, bound });
    }
    Ok(NormBound { bound, operator_norm: norm })
}

/// Formula vs finite differences at `x`, plus the tube bound when `eps0` is given.
pub fn dp_check(
    m: &ManifoldSpec,
    x: &Point,
    h: Option<f64>,
    eps0: Option<f64>,
    opts: &ProjectOptions,
) -> Result<DpReport> {
    let formula = dp_formula(m, x, opts)?;
    let fd = dp_fd(m, x, h.unwrap_or_else(|| default_fd_step(x)), opts)?;
    let rel_error = (&formula.matrix - &fd).norm() / (1.0 + fd.norm());
    let dist = (x - &formula.foot.point).norm();
    let norm_bound = match eps0 {
        Some(e) if dist < e => Extended::Finite(dp_norm_bound(m, x, e, opts)?.bound),
        _ => Extended::Unbounded,
    };
    Ok(DpReport {
        x: x.clone(),
        foot: formula.foot.point.clone(),
        formula_matrix: formula.matrix,
        fd_matrix: fd,
        rel_error,
        norm_bound,
    })
}
