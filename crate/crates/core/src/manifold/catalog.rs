//! Built-in manifolds.

use super::{Axis, Builtin, Chart, Domain, Edge, ManifoldSpec, TWO_PI};
use crate::error::{Error, Result};
use crate::expr::parse_with_params;
use serde_json::Value;
use std::f64::consts::FRAC_PI_2;

/// Half-width of the parameter box of each stereographic sphere chart;
/// 1 maps to the equator, so neighbouring charts overlap.
const STEREO_HALF_WIDTH: f64 = 1.25;

pub fn circle(center: [f64; 2], radius: f64) -> Result<ManifoldSpec> {
    let chart = Chart::builtin(
        Builtin::Circle { center, radius },
        Domain::periodic(vec![0.0], vec![TWO_PI]),
    )?;
    ManifoldSpec::new("circle", vec![chart], 1000)
}

pub fn unit_circle() -> ManifoldSpec {
    let mut m = circle([0.0, 0.0], 1.0).expect("valid");
    m.name = "unit_circle".into();
    m
}

/// Sphere of `radius` about the origin in R^d, covered by two stereographic charts.
pub fn sphere(radius: f64, d: usize) -> Result<ManifoldSpec> {
    if d < 2 || d > 5 {
        return Err(Error::Invalid(format!("sphere ambient dimension must be in 2..=5, got {d}")));
    }
    if !(radius > 0.0) {
        return Err(Error::Invalid("sphere radius must be positive".into()));
    }
    let m = d - 1;
    let charts = [false, true]
        .into_iter()
        .map(|flip| {
            Chart::builtin(
                Builtin::Stereographic { center: vec![0.0; d], radius, flip },
                Domain::uniform(vec![-STEREO_HALF_WIDTH; m], vec![STEREO_HALF_WIDTH; m], Edge::Seam),
            )
        })
        .collect::<Result<Vec<_>>>()?;
    ManifoldSpec::new(format!("sphere({radius},{d})"), charts, 1000)
}

/// Affine subspace `origin + span(directions)`, truncated to `[-half_extent, half_extent]^m`.
pub fn affine(origin: Vec<f64>, directions: Vec<Vec<f64>>, half_extent: f64) -> Result<ManifoldSpec> {
    let m = directions.len();
    if directions.iter().any(|d| d.len() != origin.len()) {
        return Err(Error::Invalid("direction length differs from origin length".into()));
    }
    let chart = Chart::builtin(
        Builtin::Affine { origin, directions },
        Domain::uniform(vec![-half_extent; m], vec![half_extent; m], Edge::Truncated),
    )?;
    ManifoldSpec::new("affine", vec![chart], 1000)
}

pub fn line(origin: Vec<f64>, direction: Vec<f64>, half_length: f64) -> Result<ManifoldSpec> {
    let mut m = affine(origin, vec![direction], half_length)?;
    m.name = "line".into();
    Ok(m)
}

/// Graph of `f` (an expression in `y0`) over `[lo, hi]`, cut at both ends.
pub fn graph_curve(f: &str, lo: f64, hi: f64) -> Result<ManifoldSpec> {
    let chart = Chart::builtin(
        Builtin::Graph { f: parse_with_params(f, 1)? },
        Domain::uniform(vec![lo], vec![hi], Edge::Truncated),
    )?;
    ManifoldSpec::new(format!("graph({f})"), vec![chart], 2)
}

/// `{(x, x^2) : 0 <= x <= x_max}`; the origin is a genuine endpoint.
pub fn half_parabola(x_max: f64) -> Result<ManifoldSpec> {
    let chart = Chart::builtin(
        Builtin::Graph { f: parse_with_params("y0^2", 1)? },
        Domain::new(
            vec![0.0],
            vec![x_max],
            vec![Axis::Interval { lo: Edge::Boundary, hi: Edge::Truncated }],
        ),
    )?;
    ManifoldSpec::new("half_parabola", vec![chart], 1000)
}

/// Graph of the C^{1,1} function with sawtooth derivative, over `[-w, w]`.
pub fn lip1_example(half_width: f64) -> Result<ManifoldSpec> {
    let chart = Chart::builtin(
        Builtin::Lip1,
        Domain::uniform(vec![-half_width], vec![half_width], Edge::Truncated),
    )?;
    ManifoldSpec::new("lip1_example", vec![chart], 1)
}

pub fn torus(major: f64, minor: f64) -> Result<ManifoldSpec> {
    if !(major > minor && minor > 0.0) {
        return Err(Error::Invalid("torus needs major > minor > 0".into()));
    }
    let chart = Chart::builtin(
        Builtin::Torus { major, minor },
        Domain::periodic(vec![0.0, 0.0], vec![TWO_PI, TWO_PI]),
    )?;
    ManifoldSpec::new(format!("torus({major},{minor})"), vec![chart], 1000)
}

/// `(a cos t, a sin t, c t)` for `|t| <= t_max`.
pub fn helix(radius: f64, pitch: f64, t_max: f64) -> Result<ManifoldSpec> {
    let chart = Chart::builtin(
        Builtin::Helix { radius, pitch },
        Domain::uniform(vec![-t_max], vec![t_max], Edge::Truncated),
    )?;
    ManifoldSpec::new("helix", vec![chart], 1000)
}

/// Ray `[1, inf) x {0}`, the lower-left quarter of the unit circle about
/// (1, 1), and the ray `{0} x [1, inf)`, both rays cut at `ray_length`.
pub fn quarter_circle_with_rays(ray_length: f64) -> Result<ManifoldSpec> {
    let chart = Chart::builtin(
        Builtin::QuarterCircleWithRays,
        Domain::uniform(vec![-ray_length], vec![FRAC_PI_2 + ray_length], Edge::Truncated),
    )?;
    ManifoldSpec::new("quarter_circle_with_rays", vec![chart], 1)
}

/// The lines `y = +/- half_sep` in R^2, each cut at `|x| <= half_length`.
pub fn parallel_lines(half_sep: f64, half_length: f64) -> Result<ManifoldSpec> {
    let charts = [half_sep, -half_sep]
        .into_iter()
        .map(|y| {
            Chart::builtin(
                Builtin::Affine { origin: vec![0.0, y], directions: vec![vec![1.0, 0.0]] },
                Domain::uniform(vec![-half_length], vec![half_length], Edge::Truncated),
            )
        })
        .collect::<Result<Vec<_>>>()?;
    ManifoldSpec::new("parallel_lines", charts, 1000)
}

/// Finite point set as a zero-dimensional manifold.
pub fn point_set(points: Vec<Vec<f64>>) -> Result<ManifoldSpec> {
    let charts = points
        .into_iter()
        .map(|coords| Chart::builtin(Builtin::Point { coords }, Domain::uniform(vec![], vec![], Edge::Boundary)))
        .collect::<Result<Vec<_>>>()?;
    ManifoldSpec::new("point_set", charts, 1000)
}

fn num(params: &Value, key: &str, default: f64) -> Result<f64> {
    match params.get(key) {
        None | Some(Value::Null) => Ok(default),
        Some(v) => v
            .as_f64()
            .ok_or_else(|| Error::Manifest(format!("parameter `{key}` must be a number"))),
    }
}

fn vec_param(params: &Value, key: &str) -> Result<Option<Vec<f64>>> {
    match params.get(key) {
        None | Some(Value::Null) => Ok(None),
        Some(v) => serde_json::from_value(v.clone())
            .map(Some)
            .map_err(|e| Error::Manifest(format!("parameter `{key}`: {e}"))),
    }
}

/// Catalog keys accepted by [`by_key`].
pub const KEYS: &[&str] = &[
    "unit_circle",
    "circle",
    "sphere",
    "line",
    "affine",
    "graph_curve",
    "half_parabola",
    "lip1_example",
    "torus",
    "helix",
    "quarter_circle_with_rays",
    "parallel_lines",
    "point_set",
];

/// Builds a catalog manifold from its key and a JSON parameter object.
pub fn by_key(key: &str, params: &Value) -> Result<ManifoldSpec> {
    match key {
        "unit_circle" => Ok(unit_circle()),
        "circle" => {
            let c = vec_param(params, "center")?.unwrap_or_else(|| vec![0.0, 0.0]);
            if c.len() != 2 {
                return Err(Error::Manifest("circle center must have two coordinates".into()));
            }
            circle([c[0], c[1]], num(params, "radius", 1.0)?)
        }
        "sphere" => sphere(num(params, "radius", 1.0)?, num(params, "ambient_dim", 3.0)? as usize),
        "line" => line(
            vec_param(params, "origin")?.unwrap_or_else(|| vec![0.0, 0.0]),
            vec_param(params, "direction")?.unwrap_or_else(|| vec![1.0, 0.0]),
            num(params, "half_length", 10.0)?,
        ),
        "affine" => {
            let dirs: Vec<Vec<f64>> = match params.get("directions") {
                Some(v) => serde_json::from_value(v.clone()).map_err(|e| Error::Manifest(e.to_string()))?,
                None => return Err(Error::Manifest("affine needs `directions`".into())),
            };
            let origin = vec_param(params, "origin")?.unwrap_or_else(|| vec![0.0; dirs.first().map_or(0, Vec::len)]);
            affine(origin, dirs, num(params, "half_extent", 10.0)?)
        }
        "graph_curve" => {
            let f = params
                .get("f")
                .and_then(Value::as_str)
                .unwrap_or("y0^2");
            graph_curve(f, num(params, "lo", -3.0)?, num(params, "hi", 3.0)?)
        }
        "half_parabola" => half_parabola(num(params, "x_max", 5.0)?),
        "lip1_example" => lip1_example(num(params, "half_width", 3.0)?),
        "torus" => torus(num(params, "major", 2.0)?, num(params, "minor", 0.5)?),
        "helix" => helix(
            num(params, "radius", 1.0)?,
            num(params, "pitch", 1.0)?,
            num(params, "t_max", TWO_PI)?,
        ),
        "quarter_circle_with_rays" => quarter_circle_with_rays(num(params, "ray_length", 10.0)?),
        "parallel_lines" => parallel_lines(num(params, "half_sep", 1.0)?, num(params, "half_length", 10.0)?),
        "point_set" => {
            let pts: Vec<Vec<f64>> = match params.get("points") {
                Some(v) => serde_json::from_value(v.clone()).map_err(|e| Error::Manifest(e.to_string()))?,
                None => return Err(Error::Manifest("point_set needs `points`".into())),
            };
            point_set(pts)
        }
        other => Err(Error::Manifest(format!("unknown catalog key `{other}`"))),
    }
}
