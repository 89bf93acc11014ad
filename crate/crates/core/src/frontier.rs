//! Frontier function along normal rays, the fibre scaling maps, the bundle
//! chart, and reach estimates.

use crate::error::{Error, Result};
use crate::extended::Extended;
use crate::manifold::{normal_frame, ManifoldSpec, NormalRay, Point};
use crate::projection::{project, project_with_hints, ChartPoint, ProjectOptions};
use nalgebra::DVector;
use rayon::prelude::*;
use serde::Serialize;

/// Initial radius of the doubling search.
const R0: f64 = 1e-3;
/// A probe foot must be within this distance of the ray's foot to agree.
const FOOT_AGREE: f64 = 1e-6;

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct TraceEntry {
    pub r: f64,
    pub foot_agrees: bool,
}

#[derive(Debug, Clone, Serialize)]
pub struct FrontierEstimate {
    pub ray: NormalRay,
    pub theta_lo: f64,
    pub theta_hi: f64,
    /// Set to the `r_max` used when the predicate still held there.
    pub unbounded_beyond: Option<f64>,
    pub predicate_trace: Vec<TraceEntry>,
}

impl FrontierEstimate {
    /// Midpoint of the bracket, or `Unbounded`.
    pub fn theta(&self) -> Extended {
        if self.unbounded_beyond.is_some() {
            Extended::Unbounded
        } else {
            Extended::Finite(0.5 * (self.theta_lo + self.theta_hi))
        }
    }
}

/// Whether `xi + r v` projects uniquely onto `xi`.
fn foot_agrees(m: &ManifoldSpec, ray: &NormalRay, r: f64, opts: &ProjectOptions) -> Result<bool> {
    let hint = [ChartPoint { chart_index: ray.chart_index, coords: ray.chart_coords.clone() }];
    let res = project_with_hints(m, &ray.at(r), opts, &hint)?;
    Ok(res.is_unique() && (res.foot() - &ray.foot).norm() <= FOOT_AGREE)
}

/// Brackets `theta(xi, v)` by doubling from `1e-3` and then bisecting to `tol`.
///
/// The membership test at radius `r` is "the projection of `xi + r v` is
/// unique and equals `xi`". After bisection the bracket is re-examined at
/// `theta_lo * k/4` (`k = 1, 2, 3`); a failure there means the predicate is not
/// monotone along the ray and is reported as [`Error::NonMonotone`].
pub fn frontier(
    m: &ManifoldSpec,
    ray: &NormalRay,
    r_max: f64,
    tol: f64,
    opts: &ProjectOptions,
) -> Result<FrontierEstimate> {
    if !(r_max > 0.0 && tol > 0.0) {
        return Err(Error::Invalid("r_max and tol must be positive".into()));
    }
    let mut trace = Vec::new();
    let eval = |r: f64, trace: &mut Vec<TraceEntry>| -> Result<bool> {
        let ok = foot_agrees(m, ray, r, opts)?;
        trace.push(TraceEntry { r, foot_agrees: ok });
        Ok(ok)
    };

    let r_start = (16.0 * tol).min(r_max);
    if !eval(r_start, &mut trace)? {
        return Err(Error::FootMismatchAtZero { r: r_start });
    }
    let mut lo = r_start;
    let mut hi = None;
    let mut r = R0;
    while r <= lo {
        r *= 2.0;
    }
    while lo < r_max {
        let r_try = r.min(r_max);
        if eval(r_try, &mut trace)? {
            lo = r_try;
            r *= 2.0;
        } else {
            hi = Some(r_try);
            break;
        }
    }
    let Some(mut hi) = hi else {
        trace.sort_by(|a, b| a.r.total_cmp(&b.r));
        return Ok(FrontierEstimate {
            ray: ray.clone(),
            theta_lo: r_max,
            theta_hi: r_max,
            unbounded_beyond: Some(r_max),
            predicate_trace: trace,
        });
    };
    while hi - lo > tol {
        let mid = 0.5 * (lo + hi);
        if eval(mid, &mut trace)? {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    for k in 1..4 {
        let r = lo * k as f64 / 4.0;
        if r > r_start && !eval(r, &mut trace)? {
            return Err(Error::NonMonotone(r));
        }
    }
    trace.sort_by(|a, b| a.r.total_cmp(&b.r));
    Ok(FrontierEstimate {
        ray: ray.clone(),
        theta_lo: lo,
        theta_hi: hi,
        unbounded_beyond: None,
        predicate_trace: trace,
    })
}

/// `theta / (theta - |v|)` for finite `theta` and `v != 0`, otherwise 1.
pub fn theta_bar(theta: Extended, v_norm: f64) -> Result<f64> {
    match theta {
        Extended::Unbounded => Ok(1.0),
        Extended::Finite(_) if v_norm == 0.0 => Ok(1.0),
        Extended::Finite(t) if v_norm < t => Ok(t / (t - v_norm)),
        Extended::Finite(t) => Err(Error::FiberOverflow { v_norm, theta: t }),
    }
}

/// `theta / (theta + |w|)` for finite `theta` and `w != 0`, otherwise 1.
pub fn theta_under(theta: Extended, w_norm: f64) -> f64 {
    match theta {
        Extended::Finite(t) if w_norm != 0.0 => t / (t + w_norm),
        _ => 1.0,
    }
}

/// A point of the normal bundle: foot and normal vector.
#[derive(Debug, Clone, Serialize)]
pub struct BundlePoint {
    pub foot: ChartPoint,
    #[serde(serialize_with = "crate::serde_util::vector")]
    pub foot_point: Point,
    #[serde(serialize_with = "crate::serde_util::vector")]
    pub normal: DVector<f64>,
}

/// Frontier-search settings shared by the bundle chart, reach and profiles.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct FrontierOptions {
    pub r_max: f64,
    pub tol: f64,
    pub project: ProjectOptions,
}

impl Default for FrontierOptions {
    fn default() -> Self {
        FrontierOptions { r_max: 4.0, tol: 1e-4, project: ProjectOptions::default() }
    }
}

fn scaled_theta(m: &ManifoldSpec, foot: &ChartPoint, dir: &DVector<f64>, fo: &FrontierOptions) -> Result<Extended> {
    let ray = NormalRay::new(m, foot.chart_index, &foot.coords, dir.clone())?;
    Ok(frontier(m, &ray, fo.r_max, fo.tol, &fo.project)?.theta())
}

/// `x -> (xi, theta_bar * (x - xi))` with `theta` estimated on the ray through `x`.
pub fn bundle_chart(m: &ManifoldSpec, x: &Point, fo: &FrontierOptions) -> Result<BundlePoint> {
    let res = project(m, x, &fo.project)?;
    if !res.is_unique() {
        return Err(Error::NotUnique("bundle chart needs a unique foot".into()));
    }
    let min = &res.minima[0];
    let foot = min.chart_point();
    let v = x - &min.point;
    let v_norm = v.norm();
    // x on M up to rounding: the normal part is zero
    let normal = if v_norm <= 1e-12 * crate::projection::scale_at(x) {
        DVector::zeros(x.len())
    } else {
        let theta = scaled_theta(m, &foot, &v, fo)?;
        &v * theta_bar(theta, v_norm)?
    };
    Ok(BundlePoint { foot, foot_point: min.point.clone(), normal })
}

/// Inverse of [`bundle_chart`]: `(xi, w) -> xi + theta_under * w`.
pub fn bundle_chart_inverse(m: &ManifoldSpec, b: &BundlePoint, fo: &FrontierOptions) -> Result<Point> {
    let foot = m.point(b.foot.chart_index, &b.foot.coords)?;
    let w_norm = b.normal.norm();
    if w_norm == 0.0 {
        return Ok(foot);
    }
    let theta = scaled_theta(m, &b.foot, &b.normal, fo)?;
    Ok(foot + &b.normal * theta_under(theta, w_norm))
}

/// How the unit normal bundle is discretized for reach estimates.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SamplingSpec {
    /// Cell-centred feet per chart parameter axis.
    pub feet_per_axis: usize,
    /// Directions on the unit normal sphere when the codimension is 3.
    pub sphere_points: usize,
    /// Fraction of each interval axis (centred) that feet are drawn from.
    pub inner_fraction: f64,
}

impl Default for SamplingSpec {
    fn default() -> Self {
        SamplingSpec { feet_per_axis: 32, sphere_points: 16, inner_fraction: 1.0 }
    }
}

fn fibonacci_sphere(n: usize) -> Vec<[f64; 3]> {
    let golden = std::f64::consts::PI * (3.0 - 5f64.sqrt());
    (0..n)
        .map(|k| {
            let z = 1.0 - 2.0 * (k as f64 + 0.5) / n as f64;
            let r = (1.0 - z * z).sqrt();
            let phi = golden * k as f64;
            [r * phi.cos(), r * phi.sin(), z]
        })
        .collect()
}

/// Deterministic sample of unit normal rays: a cell-centred grid of feet in
/// every chart times a set of unit normal directions at each foot.
pub fn sample_rays(m: &ManifoldSpec, spec: &SamplingSpec) -> Result<Vec<NormalRay>> {
    if spec.feet_per_axis == 0 || !(spec.inner_fraction > 0.0 && spec.inner_fraction <= 1.0) {
        return Err(Error::Invalid("sampling spec needs feet_per_axis > 0 and inner_fraction in (0, 1]".into()));
    }
    let mut rays = Vec::new();
    for (ci, chart) in m.charts().iter().enumerate() {
        let dom = chart.domain();
        let feet = if dom.dim() == 0 { vec![vec![]] } else { dom.grid(spec.feet_per_axis, true) };
        for mut y in feet {
            for (i, axis) in dom.axes.iter().enumerate() {
                if matches!(axis, crate::manifold::Axis::Interval { .. }) {
                    let c = 0.5 * (dom.lo[i] + dom.hi[i]);
                    y[i] = c + (y[i] - c) * spec.inner_fraction;
                }
            }
            let nf = normal_frame(chart, &y)?.vectors;
            let k = nf.ncols();
            let coeffs: Vec<Vec<f64>> = if k == 3 {
                fibonacci_sphere(spec.sphere_points).into_iter().map(|c| c.to_vec()).collect()
            } else {
                (0..k)
                    .flat_map(|j| {
                        [1.0, -1.0].map(|s| {
                            let mut c = vec![0.0; k];
                            c[j] = s;
                            c
                        })
                    })
                    .collect()
            };
            for c in coeffs {
                let v = &nf * DVector::from_column_slice(&c);
                rays.push(NormalRay::new(m, ci, &y, v)?);
            }
        }
    }
    Ok(rays)
}

#[derive(Debug, Clone, Serialize)]
pub struct ReachReport {
    pub samples: Vec<FrontierEstimate>,
    pub reach_estimate: Extended,
    /// Index into `samples` of the smallest estimate (first on ties).
    pub argmin: Option<usize>,
}

/// Frontier estimates for a family of rays, computed in parallel, in input order.
pub fn theta_profile(m: &ManifoldSpec, rays: &[NormalRay], fo: &FrontierOptions) -> Result<Vec<FrontierEstimate>> {
    rays.par_iter()
        .map(|r| frontier(m, r, fo.r_max, fo.tol, &fo.project))
        .collect()
}

/// `reach(M)` estimated as the smallest frontier over a sample of unit normal rays.
pub fn reach(m: &ManifoldSpec, spec: &SamplingSpec, fo: &FrontierOptions) -> Result<ReachReport> {
    let rays = sample_rays(m, spec)?;
    let samples = theta_profile(m, &rays, fo)?;
    let mut argmin: Option<(usize, f64)> = None;
    for (i, s) in samples.iter().enumerate() {
        if let Extended::Finite(t) = s.theta() {
            if argmin.map_or(true, |(_, b)| t < b) {
                argmin = Some((i, t));
            }
        }
    }
    Ok(ReachReport {
        reach_estimate: argmin.map_or(Extended::Unbounded, |(_, t)| Extended::Finite(t)),
        argmin: argmin.map(|(i, _)| i),
        samples,
    })
}
