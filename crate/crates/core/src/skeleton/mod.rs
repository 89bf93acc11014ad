//! Grid sampling of the skeleton of the complement, medial-axis recovery, and
//! the decomposition of the complement of the projection domain.

mod hull;

pub use hull::{halfspaces_from_points, HalfSpace, HalfSpaceSet, THICKEN_EPS};

use crate::error::{Error, Result};
use crate::extended::Extended;
use crate::manifold::{ManifoldSpec, Point};
use crate::projection::{
    project, project_with_hints, scale_at, trace_segment, Multiplicity, PointLabel, ProjectOptions,
    ProjectionResult, SegmentOutcome,
};
use nalgebra::DVector;
use rayon::prelude::*;
use serde::Serialize;

/// Axis-aligned sampling box.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Region {
    pub lo: Vec<f64>,
    pub hi: Vec<f64>,
}

impl Region {
    pub fn new(lo: Vec<f64>, hi: Vec<f64>) -> Result<Self> {
        if lo.len() != hi.len() || lo.is_empty() {
            return Err(Error::Invalid("region bounds must have the same nonzero length".into()));
        }
        if lo.iter().zip(&hi).any(|(a, b)| !(a.is_finite() && b.is_finite() && a < b)) {
            return Err(Error::Invalid("region must be bounded with lo < hi".into()));
        }
        Ok(Region { lo, hi })
    }

    pub fn dim(&self) -> usize {
        self.lo.len()
    }

    /// Cell size per axis for `n` cells.
    pub fn spacing(&self, n: usize) -> Vec<f64> {
        self.lo.iter().zip(&self.hi).map(|(a, b)| (b - a) / n as f64).collect()
    }
}

/// Projection of every node of an `(n+1)^d` grid plus continuity of the
/// foot along every grid edge.
#[derive(Debug, Clone)]
pub struct GridSweep {
    pub region: Region,
    pub cells: usize,
    pub nodes: Vec<Point>,
    pub results: Vec<ProjectionResult>,
    pub labels: Vec<PointLabel>,
    /// Points on grid edges where bisection found no unique foot.
    pub splits: Vec<(Point, ProjectionResult)>,
    /// Points on grid edges where the foot moved faster than any Lipschitz
    /// rate down to the bisection floor, without a split.
    pub unresolved: Vec<Point>,
}

impl GridSweep {
    /// Largest cell size over the axes.
    pub fn resolution(&self) -> f64 {
        self.region.spacing(self.cells).into_iter().fold(0.0, f64::max)
    }
}

/// Projects every grid node and bisects every edge whose endpoint feet are
/// unique but far apart.
///
/// Node labels follow the projection: no nearest point, several nearest
/// points (skeleton candidate), or a unique foot. A node with a unique foot is
/// interior unless one of its edges to another unique node is discontinuous.
pub fn grid_sweep(m: &ManifoldSpec, region: &Region, grid_n: usize, opts: &ProjectOptions) -> Result<GridSweep> {
    if grid_n == 0 {
        return Err(Error::Invalid("grid_n must be positive".into()));
    }
    let d = region.dim();
    if d != m.ambient_dim() {
        return Err(Error::DimensionMismatch { expected: m.ambient_dim(), got: d });
    }
    let side = grid_n + 1;
    let total = side
        .checked_pow(d as u32)
        .filter(|t| *t <= 50_000_000)
        .ok_or_else(|| Error::Invalid("grid too large".into()))?;
    let h = region.spacing(grid_n);
    let nodes: Vec<Point> = (0..total)
        .map(|mut idx| {
            DVector::from_fn(d, |i, _| {
                let k = idx % side;
                idx /= side;
                region.lo[i] + h[i] * k as f64
            })
        })
        .collect();
    let results: Vec<ProjectionResult> = nodes.par_iter().map(|x| project(m, x, opts)).collect::<Result<_>>()?;

    let mut edges = Vec::new();
    for idx in 0..total {
        let mut stride = 1;
        for _ in 0..d {
            if (idx / stride) % side + 1 < side {
                let j = idx + stride;
                if results[idx].is_unique() && results[j].is_unique() {
                    let gap = (results[idx].foot() - results[j].foot()).norm();
                    let len = (&nodes[idx] - &nodes[j]).norm();
                    let small = 0.5 * opts.tol_sep * scale_at(&nodes[idx]).max(scale_at(&nodes[j]));
                    if gap > small && gap > 4.0 * len {
                        edges.push((idx, j));
                    }
                }
            }
            stride *= side;
        }
    }
    let outcomes: Vec<SegmentOutcome> = edges
        .par_iter()
        .map(|&(i, j)| trace_segment(m, &nodes[i], &results[i].minima[0], &nodes[j], &results[j].minima[0], opts))
        .collect::<Result<_>>()?;

    let mut broken = vec![false; total];
    let mut splits = Vec::new();
    let mut unresolved = Vec::new();
    for (&(i, j), out) in edges.iter().zip(outcomes) {
        match out {
            SegmentOutcome::Continuous => continue,
            SegmentOutcome::Split { point, witness } => splits.push((point, witness)),
            SegmentOutcome::Unresolved { point } => unresolved.push(point),
        }
        broken[i] = true;
        broken[j] = true;
    }
    let labels = results
        .iter()
        .zip(&broken)
        .map(|(r, &b)| match r.multiplicity {
            Multiplicity::NotAttained => PointLabel::NoNearestPoint,
            Multiplicity::Multiple => PointLabel::SkeletonCandidate,
            Multiplicity::Unique if b => PointLabel::BoundaryOrOutsideE,
            Multiplicity::Unique => PointLabel::InteriorE,
        })
        .collect();
    Ok(GridSweep { region: region.clone(), cells: grid_n, nodes, results, labels, splits, unresolved })
}

/// A ball inside the complement of `M` that touches `M` in at least two points.
#[derive(Debug, Clone, Serialize)]
pub struct MaximalBall {
    #[serde(serialize_with = "crate::serde_util::vector")]
    pub center: Point,
    pub radius: f64,
    #[serde(serialize_with = "crate::serde_util::vectors")]
    pub witness_feet: Vec<Point>,
}

impl MaximalBall {
    fn from_result(center: &Point, r: &ProjectionResult) -> Self {
        MaximalBall {
            center: center.clone(),
            radius: r.global_distance,
            witness_feet: r.minima.iter().map(|m| m.point.clone()).collect(),
        }
    }
}

#[derive(Debug, Clone, Serialize)]
pub struct SkeletonCloud {
    pub balls: Vec<MaximalBall>,
    /// Unique-foot nodes whose foot changes when pushed 1% further out.
    #[serde(serialize_with = "crate::serde_util::vectors")]
    pub skeleton_adjacent: Vec<Point>,
    /// Points without a nearest point; these arise only from truncated charts.
    #[serde(serialize_with = "crate::serde_util::vectors")]
    pub no_nearest_truncation: Vec<Point>,
    pub region: Region,
    pub resolution: f64,
}

/// Extension factor used for the skeleton-adjacent scan.
const EXTENSION_FACTOR: f64 = 1.01;

/// Skeleton sample from a grid sweep: every node and every refined edge
/// crossing with several nearest points becomes a [`MaximalBall`].
pub fn skeleton_sample(
    m: &ManifoldSpec,
    region: &Region,
    grid_n: usize,
    extension_scan: bool,
    opts: &ProjectOptions,
) -> Result<SkeletonCloud> {
    let sweep = grid_sweep(m, region, grid_n, opts)?;
    let mut balls = Vec::new();
    let mut no_nearest = Vec::new();
    let points = sweep.nodes.iter().zip(&sweep.results).chain(sweep.splits.iter().map(|(p, r)| (p, r)));
    for (x, r) in points {
        match r.multiplicity {
            Multiplicity::Multiple => balls.push(MaximalBall::from_result(x, r)),
            Multiplicity::NotAttained => no_nearest.push(x.clone()),
            Multiplicity::Unique => {}
        }
    }
    let skeleton_adjacent = if extension_scan {
        let flags: Vec<bool> = sweep
            .nodes
            .par_iter()
            .zip(&sweep.results)
            .map(|(x, r)| -> Result<bool> {
                if !r.is_unique() || r.global_distance <= opts.tol_sep * scale_at(x) {
                    return Ok(false);
                }
                let foot = r.foot();
                let z = foot + (x - foot) * EXTENSION_FACTOR;
                let e = project_with_hints(m, &z, opts, &[r.minima[0].chart_point()])?;
                Ok(!e.is_unique() || (e.foot() - foot).norm() > opts.tol_sep * scale_at(&z))
            })
            .collect::<Result<_>>()?;
        sweep.nodes.iter().zip(flags).filter(|(_, f)| *f).map(|(x, _)| x.clone()).collect()
    } else {
        vec![]
    };
    Ok(SkeletonCloud {
        balls,
        skeleton_adjacent,
        no_nearest_truncation: no_nearest,
        region: region.clone(),
        resolution: sweep.resolution(),
    })
}

/// Supporting half-spaces of the hull of about `n_samples` manifold samples.
pub fn convex_hull_halfspaces(m: &ManifoldSpec, n_samples: usize) -> Result<HalfSpaceSet> {
    let k = m.param_dim();
    let per_axis = if k == 0 { 1 } else { ((n_samples as f64).powf(1.0 / k as f64).round() as usize).max(2) };
    let samples = m.samples(per_axis)?;
    halfspaces_from_points(&samples, true)
}

/// Indicator of the complement of `M` recovered from maximal balls and
/// supporting half-spaces: inside an open ball or strictly outside a half-space.
pub fn medial_recover(cloud: &SkeletonCloud, hs: &HalfSpaceSet, query: &Point) -> bool {
    cloud.balls.iter().any(|b| (query - &b.center).norm() < b.radius) || hs.outside(query)
}

#[derive(Debug, Clone, Serialize)]
pub struct EComplementReport {
    /// Nodes not labelled interior: the sampled complement of the domain of `p`.
    #[serde(serialize_with = "crate::serde_util::vectors")]
    pub complement: Vec<Point>,
    /// Skeleton points: nodes and edge crossings with several nearest points.
    #[serde(serialize_with = "crate::serde_util::vectors")]
    pub skeleton: Vec<Point>,
    /// Points without a nearest point (truncation-induced).
    #[serde(serialize_with = "crate::serde_util::vectors")]
    pub no_nearest: Vec<Point>,
    /// Sup over `complement` of the distance to `skeleton + no_nearest`.
    pub gap_complement_to_sf: Extended,
    /// Sup over `skeleton + no_nearest` of the distance to `complement`.
    pub gap_sf_to_complement: Extended,
    pub resolution: f64,
    /// Both gaps are at most two grid cells.
    pub within_two_cells: bool,
}

/// One-sided Hausdorff distance `sup_{a in A} inf_{b in B} |a - b|`.
pub fn one_sided_hausdorff(a: &[Point], b: &[Point]) -> Extended {
    if a.is_empty() {
        return Extended::Finite(0.0);
    }
    if b.is_empty() {
        return Extended::Unbounded;
    }
    let gap = a
        .par_iter()
        .map(|p| b.iter().map(|q| (p - q).norm()).fold(f64::INFINITY, f64::min))
        .reduce(|| 0.0, f64::max);
    Extended::Finite(gap)
}

/// Compares the sampled complement of the projection domain with the sampled
/// skeleton and no-nearest-point set, both from one grid sweep.
pub fn e_complement_check(
    m: &ManifoldSpec,
    region: &Region,
    grid_n: usize,
    opts: &ProjectOptions,
) -> Result<EComplementReport> {
    let sweep = grid_sweep(m, region, grid_n, opts)?;
    let complement: Vec<Point> = sweep
        .nodes
        .iter()
        .zip(&sweep.labels)
        .filter(|(_, l)| **l != PointLabel::InteriorE)
        .map(|(x, _)| x.clone())
        .collect();
    let mut skeleton = Vec::new();
    let mut no_nearest = Vec::new();
    let points = sweep.nodes.iter().zip(&sweep.results).chain(sweep.splits.iter().map(|(p, r)| (p, r)));
    for (x, r) in points {
        match r.multiplicity {
            Multiplicity::Multiple => skeleton.push(x.clone()),
            Multiplicity::NotAttained => no_nearest.push(x.clone()),
            Multiplicity::Unique => {}
        }
    }
    let sf: Vec<Point> = skeleton.iter().chain(&no_nearest).cloned().collect();
    let a = one_sided_hausdorff(&complement, &sf);
    let b = one_sided_hausdorff(&sf, &complement);
    let resolution = sweep.resolution();
    let limit = Extended::Finite(2.0 * resolution);
    Ok(EComplementReport {
        within_two_cells: a.le_scaled(limit, 1.0) && b.le_scaled(limit, 1.0),
        complement,
        skeleton,
        no_nearest,
        gap_complement_to_sf: a,
        gap_sf_to_complement: b,
        resolution,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::manifold::catalog;
    use nalgebra::dvector;

    fn square(h: f64) -> Region {
        Region::new(vec![-h, -h], vec![h, h]).unwrap()
    }

    #[test]
    fn parallel_lines_skeleton() {
        let m = catalog::parallel_lines(1.0, 10.0).unwrap();
        let cloud = skeleton_sample(&m, &square(2.0), 40, true, &ProjectOptions::default()).unwrap();
        assert!(!cloud.balls.is_empty());
        for b in &cloud.balls {
            assert!(b.center[1].abs() < 1e-9, "{}", b.center);
            assert!((b.radius - 1.0).abs() < 1e-9);
            assert!(b.witness_feet.len() >= 2);
        }
        assert!(cloud.no_nearest_truncation.is_empty());
        for p in &cloud.skeleton_adjacent {
            assert!(p[1].abs() <= 0.1 + 1e-12, "{p}");
        }
    }

    #[test]
    fn circle_skeleton_is_centre() {
        let m = catalog::unit_circle();
        let cloud = skeleton_sample(&m, &square(2.0), 40, false, &ProjectOptions::default()).unwrap();
        assert_eq!(cloud.balls.len(), 1);
        assert!(cloud.balls[0].center.norm() < 1e-12);
        assert!((cloud.balls[0].radius - 1.0).abs() < 1e-12);
    }

    #[test]
    fn circle_complement_and_recovery() {
        let m = catalog::unit_circle();
        let rep = e_complement_check(&m, &square(2.0), 40, &ProjectOptions::default()).unwrap();
        assert!(rep.within_two_cells, "{rep:?}");
        let cloud = skeleton_sample(&m, &square(2.0), 40, false, &ProjectOptions::default()).unwrap();
        let hs = convex_hull_halfspaces(&m, 256).unwrap();
        assert_eq!(hs.halfspaces.len(), 256);
        for h in &hs.halfspaces {
            assert!((h.offset - 1.0).abs() < 1e-3);
        }
        assert!(medial_recover(&cloud, &hs, &dvector![0.0, 0.0]));
        assert!(!medial_recover(&cloud, &hs, &dvector![1.0, 0.0]));
        assert!(medial_recover(&cloud, &hs, &dvector![5.0, 5.0]));
    }

    #[test]
    fn full_line_has_empty_complement() {
        let m = catalog::line(vec![0.0, 0.0], vec![1.0, 0.0], 50.0).unwrap();
        let rep = e_complement_check(&m, &square(2.0), 20, &ProjectOptions::default()).unwrap();
        assert!(rep.complement.is_empty() && rep.skeleton.is_empty());
        assert!(rep.within_two_cells);
    }

    #[test]
    fn truncated_segment_has_no_nearest_points() {
        let m = catalog::line(vec![0.0, 0.0], vec![1.0, 0.0], 1.0).unwrap();
        let rep = e_complement_check(&m, &square(2.0), 20, &ProjectOptions::default()).unwrap();
        assert!(!rep.no_nearest.is_empty());
        assert!(rep.no_nearest.iter().all(|p| p[0].abs() >= 1.0));
    }

    #[test]
    fn voronoi_of_three_points() {
        let m = catalog::point_set(vec![vec![0.0, 0.0], vec![2.0, 0.0], vec![0.0, 2.0]]).unwrap();
        let cloud = skeleton_sample(&m, &Region::new(vec![-1.0, -1.0], vec![3.0, 3.0]).unwrap(), 40, false, &ProjectOptions::default()).unwrap();
        assert!(!cloud.balls.is_empty());
        for b in &cloud.balls {
            let ds: Vec<f64> = b.witness_feet.iter().map(|f| (f - &b.center).norm()).collect();
            assert!(ds.iter().all(|d| (d - b.radius).abs() < 1e-9));
        }
    }

    #[test]
    fn bad_region() {
        assert!(Region::new(vec![0.0], vec![0.0]).is_err());
        assert!(Region::new(vec![0.0, 1.0], vec![1.0]).is_err());
    }
}
