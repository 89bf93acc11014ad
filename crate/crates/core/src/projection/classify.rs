//! Probe-based classification of ambient points relative to the set where
//! the projection is defined.

use super::{project_with_hints, scale_at, Minimum, Multiplicity, ProjectOptions, ProjectionResult};
use crate::error::{Error, Result};
use crate::manifold::{ManifoldSpec, Point};
use serde::Serialize;

/// Foot displacement per unit of query displacement accepted without further
/// refinement when checking continuity along a segment.
const LIPSCHITZ_OK: f64 = 4.0;
/// Bisection gives up (declares a jump) below this segment length, relative
/// to the query scale.
const MIN_SEGMENT: f64 = 1e-12;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub enum PointLabel {
    InteriorE,
    BoundaryOrOutsideE,
    SkeletonCandidate,
    NoNearestPoint,
}

#[derive(Debug, Clone, Serialize)]
pub struct PointClass {
    pub label: PointLabel,
    pub witness: ProjectionResult,
}

/// Default probe radius `1e-3 * (1 + |x|)`.
pub fn default_probe_eps(x: &Point) -> f64 {
    1e-3 * scale_at(x)
}

/// Labels `x` by projecting it and the `2d` axis probes at radius `probe_eps`.
///
/// A unique foot is labelled interior only when every probe has a unique foot
/// that is reached from the foot of `x` continuously along the connecting
/// segment. Continuity is decided by bisecting towards the larger foot gap
/// until the gap falls below half the separation tolerance, so a foot that
/// moves like a cube root (infinite derivative) is reported as a jump.
pub fn classify(m: &ManifoldSpec, x: &Point, probe_eps: f64, opts: &ProjectOptions) -> Result<PointClass> {
    if !(probe_eps > 0.0) {
        return Err(Error::Invalid("probe_eps must be positive".into()));
    }
    let witness = super::project(m, x, opts)?;
    let label = match witness.multiplicity {
        Multiplicity::NotAttained => PointLabel::NoNearestPoint,
        Multiplicity::Multiple => PointLabel::SkeletonCandidate,
        Multiplicity::Unique => {
            let foot = &witness.minima[0];
            let hint = [foot.chart_point()];
            let mut interior = true;
            'probes: for i in 0..x.len() {
                for sign in [-1.0, 1.0] {
                    let mut q = x.clone();
                    q[i] += sign * probe_eps;
                    let r = project_with_hints(m, &q, opts, &hint)?;
                    if !r.is_unique() || !foot_continuous(m, x, foot, &q, &r.minima[0], opts)? {
                        interior = false;
                        break 'probes;
                    }
                }
            }
            if interior {
                PointLabel::InteriorE
            } else {
                PointLabel::BoundaryOrOutsideE
            }
        }
    };
    Ok(PointClass { label, witness })
}

/// Result of following the foot along a segment whose endpoints have unique feet.
#[derive(Debug, Clone)]
pub enum SegmentOutcome {
    /// The foot varies continuously along the segment.
    Continuous,
    /// Bisection reached a point without a unique foot.
    Split { point: Point, witness: ProjectionResult },
    /// The foot gap did not shrink with the segment down to the length floor.
    Unresolved { point: Point },
}

/// Whether the (unique) foot moves continuously along the segment `[a, b]`
/// given unique feet `fa`, `fb` at the endpoints.
pub fn foot_continuous(
    m: &ManifoldSpec,
    a: &Point,
    fa: &Minimum,
    b: &Point,
    fb: &Minimum,
    opts: &ProjectOptions,
) -> Result<bool> {
    Ok(matches!(trace_segment(m, a, fa, b, fb, opts)?, SegmentOutcome::Continuous))
}

/// Bisects `[a, b]` towards the larger foot gap until the gap is below half
/// the separation tolerance or within `4 x` the segment length (continuous), a
/// midpoint has no unique foot (split), or the segment is shorter than
/// `1e-12 (1 + |x|)` (unresolved).
pub fn trace_segment(
    m: &ManifoldSpec,
    a: &Point,
    fa: &Minimum,
    b: &Point,
    fb: &Minimum,
    opts: &ProjectOptions,
) -> Result<SegmentOutcome> {
    let scale = scale_at(a).max(scale_at(b));
    let small_gap = 0.5 * opts.tol_sep * scale;
    let (mut a, mut b) = (a.clone(), b.clone());
    let (mut fa, mut fb) = (fa.clone(), fb.clone());
    loop {
        let gap = (&fa.point - &fb.point).norm();
        let len = (&a - &b).norm();
        if gap <= small_gap || gap <= LIPSCHITZ_OK * len {
            return Ok(SegmentOutcome::Continuous);
        }
        let mid = (&a + &b) * 0.5;
        if len < MIN_SEGMENT * scale {
            return Ok(SegmentOutcome::Unresolved { point: mid });
        }
        let r = project_with_hints(m, &mid, opts, &[fa.chart_point(), fb.chart_point()])?;
        if !r.is_unique() {
            return Ok(SegmentOutcome::Split { point: mid, witness: r });
        }
        let fm = r.minima[0].clone();
        let gap_a = (&fa.point - &fm.point).norm();
        let gap_b = (&fm.point - &fb.point).norm();
        if gap_a >= gap_b {
            b = mid;
            fb = fm;
        } else {
            a = mid;
            fa = fm;
        }
    }
}
