//! Metric projection onto a manifold and classification of ambient points.

mod classify;
mod solver;

pub use classify::{classify, default_probe_eps, foot_continuous, trace_segment, PointClass, PointLabel, SegmentOutcome};

use crate::error::{Error, Result};
use crate::manifold::{manifest::ToleranceOverrides, Axis, Edge, ManifoldSpec, Point};
use serde::Serialize;
use solver::{local_minimize, LocalMin, SolverOptions};

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ProjectOptions {
    /// Grid starts per parameter axis (cell centred), per chart.
    pub grid_per_axis: usize,
    /// Additional Halton-sequence starts per chart.
    pub quasi_random_starts: usize,
    /// Offset into the Halton sequence.
    pub seed: u64,
    pub max_iter: usize,
    /// Stop once a step moves less than this (relative to 1 + |y|).
    pub step_tol: f64,
    /// Feet closer than `tol_sep * (1 + |x|)` are the same point.
    pub tol_sep: f64,
    /// Minima within `tol_dist * (1 + |x|)` of the best count as global.
    pub tol_dist: f64,
}

impl Default for ProjectOptions {
    fn default() -> Self {
        ProjectOptions {
            grid_per_axis: 5,
            quasi_random_starts: 32,
            seed: 0,
            max_iter: 200,
            step_tol: 1e-12,
            tol_sep: 1e-5,
            tol_dist: 1e-7,
        }
    }
}

impl ProjectOptions {
    pub fn with_overrides(mut self, o: Option<ToleranceOverrides>) -> Self {
        if let Some(o) = o {
            if let Some(s) = o.tol_sep {
                self.tol_sep = s;
            }
            if let Some(d) = o.tol_dist {
                self.tol_dist = d;
            }
        }
        self
    }

    pub fn with_seed(mut self, seed: u64) -> Self {
        self.seed = seed;
        self
    }
}

/// `1 + |x|`, the scale for all relative tolerances at `x`.
pub fn scale_at(x: &Point) -> f64 {
    1.0 + x.norm()
}

/// A location on the manifold in chart coordinates.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ChartPoint {
    pub chart_index: usize,
    pub coords: Vec<f64>,
}

#[derive(Debug, Clone, Serialize)]
pub struct Minimum {
    pub chart_index: usize,
    pub chart_coords: Vec<f64>,
    #[serde(serialize_with = "crate::serde_util::vector")]
    pub point: Point,
    pub distance: f64,
    /// Face of a chart box that holds this minimizer, if any.
    pub held_by: Option<Edge>,
}

impl Minimum {
    pub fn chart_point(&self) -> ChartPoint {
        ChartPoint { chart_index: self.chart_index, coords: self.chart_coords.clone() }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub enum Multiplicity {
    Unique,
    Multiple,
    /// Every global minimizer sits on a truncation face: no nearest point.
    #[serde(rename = "None")]
    NotAttained,
}

#[derive(Debug, Clone, Copy, Serialize)]
pub struct Diagnostics {
    pub starts_used: usize,
    pub converged_fraction: f64,
}

#[derive(Debug, Clone, Serialize)]
pub struct ProjectionResult {
    pub minima: Vec<Minimum>,
    pub global_distance: f64,
    pub multiplicity: Multiplicity,
    pub diagnostics: Diagnostics,
}

impl ProjectionResult {
    /// The nearest point (first of the sorted minima).
    pub fn foot(&self) -> &Point {
        &self.minima[0].point
    }

    pub fn is_unique(&self) -> bool {
        self.multiplicity == Multiplicity::Unique
    }

    /// Largest pairwise distance between reported feet.
    pub fn foot_spread(&self) -> f64 {
        let mut s: f64 = 0.0;
        for (i, a) in self.minima.iter().enumerate() {
            for b in &self.minima[i + 1..] {
                s = s.max((&a.point - &b.point).norm());
            }
        }
        s
    }
}

fn halton(mut index: u64, base: u64) -> f64 {
    let mut f = 1.0;
    let mut r = 0.0;
    while index > 0 {
        f /= base as f64;
        r += f * (index % base) as f64;
        index /= base;
    }
    r
}

const HALTON_BASES: [u64; 4] = [2, 3, 5, 7];

fn starts_for(chart: &crate::manifold::Chart, opts: &ProjectOptions) -> Vec<Vec<f64>> {
    let dom = chart.domain();
    let m = dom.dim();
    if m == 0 {
        return vec![vec![]];
    }
    let mut out = dom.grid(opts.grid_per_axis.max(1), true);
    for k in 0..opts.quasi_random_starts as u64 {
        let idx = opts.seed.wrapping_mul(7919).wrapping_add(k + 1);
        out.push(
            (0..m)
                .map(|i| dom.lo[i] + dom.span(i) * halton(idx, HALTON_BASES[i]))
                .collect(),
        );
    }
    out
}

/// All global minimizers of the distance to `x`, by multi-start local search.
pub fn project(m: &ManifoldSpec, x: &Point, opts: &ProjectOptions) -> Result<ProjectionResult> {
    project_with_hints(m, x, opts, &[])
}

/// [`project`] with extra start points (e.g. a nearby foot) prepended.
pub fn project_with_hints(
    m: &ManifoldSpec,
    x: &Point,
    opts: &ProjectOptions,
    hints: &[ChartPoint],
) -> Result<ProjectionResult> {
    if x.len() != m.ambient_dim() {
        return Err(Error::DimensionMismatch { expected: m.ambient_dim(), got: x.len() });
    }
    if x.iter().any(|v| !v.is_finite()) {
        return Err(Error::Invalid("query point must be finite".into()));
    }
    let scale = scale_at(x);
    let sopts = SolverOptions { max_iter: opts.max_iter, step_tol: opts.step_tol };
    let xs = x.as_slice();

    let mut found: Vec<(usize, LocalMin)> = Vec::new();
    let mut unconverged_best = f64::INFINITY;
    let mut starts_used = 0;
    let mut converged = 0;
    for (ci, chart) in m.charts().iter().enumerate() {
        let mut starts: Vec<Vec<f64>> = hints
            .iter()
            .filter(|h| h.chart_index == ci && h.coords.len() == chart.param_dim())
            .map(|h| h.coords.clone())
            .collect();
        starts.extend(starts_for(chart, opts));
        let merge_radius = 1e-5 * (1.0 + (0..chart.param_dim()).map(|i| chart.domain().span(i)).fold(0.0, f64::max));
        let mut known: Vec<LocalMin> = Vec::new();
        for s in &starts {
            starts_used += 1;
            let r = local_minimize(chart, xs, s, &sopts, &known, merge_radius)?;
            if r.converged {
                converged += 1;
                if !known.iter().any(|k| k.y == r.y) {
                    known.push(r);
                }
            } else {
                unconverged_best = unconverged_best.min(r.sq_dist.sqrt());
            }
        }
        found.extend(known.into_iter().map(|k| (ci, k)));
    }

    // minimizers pinned against a seam are not minima of M; another chart covers them
    found.retain(|(_, k)| !k.held_by.contains(&Edge::Seam));
    let converged_fraction = converged as f64 / starts_used.max(1) as f64;
    let diagnostics = Diagnostics { starts_used, converged_fraction };
    let best = found.iter().map(|(_, k)| k.sq_dist.sqrt()).fold(f64::INFINITY, f64::min);
    if !best.is_finite() || (converged_fraction < 0.5 && unconverged_best < best - opts.tol_dist * scale) {
        return Err(Error::SolverFailure { converged, starts: starts_used });
    }
    if converged_fraction < 0.5 {
        log::warn!("only {converged}/{starts_used} starts converged; best minima agree, continuing");
    }

    let mut cands: Vec<Minimum> = found
        .into_iter()
        .filter(|(_, k)| k.sq_dist.sqrt() <= best + opts.tol_dist * scale)
        .map(|(ci, k)| {
            let point = m.charts()[ci]
                .eval(&k.y)
                .expect("solver iterates stay inside the domain");
            Minimum {
                chart_index: ci,
                distance: (&point - x).norm(),
                chart_coords: k.y,
                point,
                held_by: k.held_by.first().copied(),
            }
        })
        .collect();
    cands.sort_by(|a, b| {
        a.distance
            .total_cmp(&b.distance)
            .then(a.chart_index.cmp(&b.chart_index))
    });

    let sep = opts.tol_sep * scale;
    let mut minima: Vec<Minimum> = Vec::new();
    for c in cands {
        match minima.iter_mut().find(|r| (&r.point - &c.point).norm() <= sep) {
            // prefer a representative away from any chart face
            Some(r) if r.held_by.is_some() && c.held_by.is_none() && c.distance <= r.distance + opts.tol_dist * scale => *r = c,
            Some(_) => {}
            None => minima.push(c),
        }
    }
    minima.sort_by(|a, b| a.distance.total_cmp(&b.distance).then(a.chart_index.cmp(&b.chart_index)));
    let global_distance = minima[0].distance;

    let multiplicity = if minima.iter().all(|r| r.held_by == Some(Edge::Truncated)) {
        Multiplicity::NotAttained
    } else if minima.len() > 1 {
        Multiplicity::Multiple
    } else {
        Multiplicity::Unique
    };
    Ok(ProjectionResult { minima, global_distance, multiplicity, diagnostics })
}

/// `delta_M(x)`.
pub fn distance(m: &ManifoldSpec, x: &Point, opts: &ProjectOptions) -> Result<f64> {
    project(m, x, opts).map(|r| r.global_distance)
}

/// Nearest sample on a dense tensor grid of every chart domain (`grid_n`
/// nodes per axis). Used as an independent oracle.
///
/// Sample-grid local minima within `tie_tol` of the best and separated by more
/// than `2 * tie_tol` are all reported.
pub fn brute_force_project(m: &ManifoldSpec, x: &Point, grid_n: usize) -> Result<ProjectionResult> {
    if grid_n < 2 {
        return Err(Error::Invalid("grid_n must be at least 2".into()));
    }
    if x.len() != m.ambient_dim() {
        return Err(Error::DimensionMismatch { expected: m.ambient_dim(), got: x.len() });
    }
    let mut samples: Vec<(usize, Vec<f64>, f64, bool)> = Vec::new();
    let mut tie_tol: f64 = 0.0;
    for (ci, chart) in m.charts().iter().enumerate() {
        let dom = chart.domain();
        let pd = chart.param_dim();
        if pd == 0 {
            let p = chart.eval(&[])?;
            samples.push((ci, vec![], (&p - x).norm(), true));
            continue;
        }
        let periodic: Vec<bool> = dom.axes.iter().map(|a| matches!(a, Axis::Periodic)).collect();
        let coord = |i: usize, k: usize| {
            if periodic[i] {
                dom.lo[i] + dom.span(i) * k as f64 / grid_n as f64
            } else {
                dom.lo[i] + dom.span(i) * k as f64 / (grid_n - 1) as f64
            }
        };
        let total = grid_n.pow(pd as u32);
        let mut dist = vec![0.0; total];
        let mut y = vec![0.0; pd];
        let mut max_step: f64 = 0.0;
        for (idx, slot) in dist.iter_mut().enumerate() {
            let mut r = idx;
            for (i, yi) in y.iter_mut().enumerate() {
                *yi = coord(i, r % grid_n);
                r /= grid_n;
            }
            let p = chart.eval_raw(&y)?;
            *slot = p.iter().zip(x.iter()).map(|(a, b)| (a - b) * (a - b)).sum::<f64>().sqrt();
            // ambient spacing to the next node along axis 0
            if idx % grid_n + 1 < grid_n {
                let mut z = y.clone();
                z[0] = coord(0, idx % grid_n + 1);
                let q = chart.eval_raw(&z)?;
                let step = p.iter().zip(&q).map(|(a, b)| (a - b) * (a - b)).sum::<f64>().sqrt();
                max_step = max_step.max(step);
            }
        }
        tie_tol = tie_tol.max(max_step);
        for idx in 0..total {
            let mut is_min = true;
            let mut stride = 1;
            for i in 0..pd {
                let k = (idx / stride) % grid_n;
                for dir in [-1i64, 1] {
                    let nk = k as i64 + dir;
                    let nk = if periodic[i] {
                        nk.rem_euclid(grid_n as i64)
                    } else if nk < 0 || nk >= grid_n as i64 {
                        continue;
                    } else {
                        nk
                    };
                    let nidx = idx - k * stride + nk as usize * stride;
                    if dist[nidx] < dist[idx] {
                        is_min = false;
                    }
                }
                stride *= grid_n;
            }
            let mut r = idx;
            let yv: Vec<f64> = (0..pd)
                .map(|i| {
                    let v = coord(i, r % grid_n);
                    r /= grid_n;
                    v
                })
                .collect();
            if is_min {
                samples.push((ci, yv, dist[idx], true));
            }
        }
    }
    let best = samples.iter().map(|s| s.2).fold(f64::INFINITY, f64::min);
    let mut picked: Vec<Minimum> = Vec::new();
    let mut sorted: Vec<_> = samples.into_iter().filter(|s| s.3 && s.2 <= best + tie_tol).collect();
    sorted.sort_by(|a, b| a.2.total_cmp(&b.2));
    for (ci, y, d, _) in sorted {
        let point = m.charts()[ci].eval(&y)?;
        if picked.iter().all(|p| (&p.point - &point).norm() > 2.0 * tie_tol) {
            picked.push(Minimum { chart_index: ci, chart_coords: y, point, distance: d, held_by: None });
        }
    }
    let multiplicity = if picked.len() > 1 { Multiplicity::Multiple } else { Multiplicity::Unique };
    Ok(ProjectionResult {
        global_distance: picked[0].distance,
        minima: picked,
        multiplicity,
        diagnostics: Diagnostics { starts_used: 0, converged_fraction: 1.0 },
    })
}

/// Foot stays put on `]x, foot]`: returns the first `lambda` in `lambdas`
/// where `x + lambda (foot - x)` has a different or non-unique foot.
pub fn segment_violation(
    m: &ManifoldSpec,
    x: &Point,
    lambdas: &[f64],
    foot_tol: f64,
    opts: &ProjectOptions,
) -> Result<Option<f64>> {
    let base = project(m, x, opts)?;
    if !base.is_unique() {
        return Err(Error::NotUnique("segment property needs a unique foot".into()));
    }
    let foot = base.foot().clone();
    let hint = [base.minima[0].chart_point()];
    for &l in lambdas {
        let z = x + (&foot - x) * l;
        let r = project_with_hints(m, &z, opts, &hint)?;
        if !r.is_unique() || (r.foot() - &foot).norm() > foot_tol {
            return Ok(Some(l));
        }
    }
    Ok(None)
}

/// Scans `foot + a (x - foot)` for the given `a > 1` and returns the first
/// factor at which the foot changes, or `None` if it never does.
pub fn extension_scan(
    m: &ManifoldSpec,
    x: &Point,
    factors: &[f64],
    foot_tol: f64,
    opts: &ProjectOptions,
) -> Result<Option<f64>> {
    let base = project(m, x, opts)?;
    if !base.is_unique() {
        return Err(Error::NotUnique("extension scan needs a unique foot".into()));
    }
    let foot = base.foot().clone();
    let hint = [base.minima[0].chart_point()];
    for &a in factors {
        let z = &foot + (x - &foot) * a;
        let r = project_with_hints(m, &z, opts, &hint)?;
        if !r.is_unique() || (r.foot() - &foot).norm() > foot_tol {
            return Ok(Some(a));
        }
    }
    Ok(None)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::manifold::catalog;
    use nalgebra::dvector;

    fn opts() -> ProjectOptions {
        ProjectOptions::default()
    }

    #[test]
    fn circle_outside_point() {
        let r = project(&catalog::unit_circle(), &dvector![2.0, 0.0], &opts()).unwrap();
        assert_eq!(r.multiplicity, Multiplicity::Unique);
        assert!((r.foot() - dvector![1.0, 0.0]).norm() < 1e-12);
        assert!((r.global_distance - 1.0).abs() < 1e-14);
    }

    #[test]
    fn circle_center_is_multiple() {
        let r = project(&catalog::unit_circle(), &dvector![0.0, 0.0], &opts()).unwrap();
        assert_eq!(r.multiplicity, Multiplicity::Multiple);
        assert!(r.minima.len() >= 2);
        assert!((r.global_distance - 1.0).abs() < 1e-14);
    }

    #[test]
    fn half_parabola_points_on_axis() {
        let m = catalog::half_parabola(5.0).unwrap();
        for y in [0.1, 0.25, 0.49, 0.5] {
            let r = project(&m, &dvector![0.0, y], &opts()).unwrap();
            assert!(r.is_unique(), "y = {y}");
            assert!(r.foot().norm() < 1e-7, "y = {y}: {}", r.foot());
            assert!((r.global_distance - y).abs() < 1e-12);
        }
        // above the frontier the foot is (sqrt((2y-1)/2), (2y-1)/2)
        let r = project(&m, &dvector![0.0, 1.0], &opts()).unwrap();
        assert!(r.is_unique());
        assert!((r.foot() - dvector![0.5f64.sqrt(), 0.5]).norm() < 1e-12);
        let oracle = brute_force_project(&m, &dvector![0.0, 1.0], 200_001).unwrap();
        assert!((oracle.foot() - r.foot()).norm() < 1e-3);
        assert!((oracle.global_distance - 0.75f64.sqrt()).abs() < 1e-8);
    }

    #[test]
    fn oracle_examples() {
        let r = brute_force_project(&catalog::unit_circle(), &dvector![2.0, 0.0], 100_000).unwrap();
        assert!((r.global_distance - 1.0).abs() < 1e-8);
        let line = catalog::line(vec![0.0, 0.0], vec![1.0, 0.0], 10.0).unwrap();
        let r = brute_force_project(&line, &dvector![0.0, 3.0], 2001).unwrap();
        assert!((r.global_distance - 3.0).abs() < 1e-12);
        assert!(r.foot().norm() < 1e-12);
        let t = catalog::torus(2.0, 0.5).unwrap();
        let r = brute_force_project(&t, &dvector![0.0, 0.0, 0.0], 400).unwrap();
        assert!((r.global_distance - 1.5).abs() < 1e-9);
        assert_eq!(r.multiplicity, Multiplicity::Multiple);
    }

    #[test]
    fn truncated_line_end_has_no_nearest_point() {
        let line = catalog::line(vec![0.0, 0.0], vec![1.0, 0.0], 1.0).unwrap();
        let r = project(&line, &dvector![3.0, 0.5], &opts()).unwrap();
        assert_eq!(r.multiplicity, Multiplicity::NotAttained);
        let r = project(&line, &dvector![0.3, 0.5], &opts()).unwrap();
        assert!(r.is_unique());
    }

    #[test]
    fn torus_and_sphere_agree_with_oracle() {
        let cases = [
            (catalog::torus(2.0, 0.5).unwrap(), dvector![2.3, 0.4, 0.7]),
            (catalog::sphere(2.0, 3).unwrap(), dvector![0.3, -1.1, 2.9]),
        ];
        for (m, x) in cases {
            let r = project(&m, &x, &opts()).unwrap();
            let o = brute_force_project(&m, &x, 600).unwrap();
            assert!(r.global_distance <= o.global_distance + 1e-12);
            assert!(o.global_distance - r.global_distance < 1e-3);
        }
    }

    #[test]
    fn point_set_projection() {
        let m = catalog::point_set(vec![vec![0.0, 0.0], vec![2.0, 0.0]]).unwrap();
        let r = project(&m, &dvector![0.5, 1.0], &opts()).unwrap();
        assert!(r.is_unique() && r.foot().norm() == 0.0);
        let r = project(&m, &dvector![1.0, 1.0], &opts()).unwrap();
        assert_eq!(r.multiplicity, Multiplicity::Multiple);
    }

    #[test]
    fn dimension_checked() {
        assert!(matches!(
            project(&catalog::unit_circle(), &dvector![1.0, 2.0, 3.0], &opts()),
            Err(Error::DimensionMismatch { .. })
        ));
    }
}
