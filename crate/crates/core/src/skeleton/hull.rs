//! Supporting half-spaces of the convex hull of a planar or spatial point set.

use crate::error::{Error, Result};
use crate::manifold::Point;
use nalgebra::{DMatrix, DVector, Vector2, Vector3};
use serde::Serialize;

/// Thickness added in the missing directions of a flat point set.
pub const THICKEN_EPS: f64 = 1e-9;

/// `{z : <z, normal> <= offset}` with a unit `normal`.
#[derive(Debug, Clone, Serialize)]
pub struct HalfSpace {
    #[serde(serialize_with = "crate::serde_util::vector")]
    pub normal: DVector<f64>,
    pub offset: f64,
}

impl HalfSpace {
    /// Signed excess `<z, normal> - offset`; positive means outside.
    pub fn excess(&self, z: &Point) -> f64 {
        z.dot(&self.normal) - self.offset
    }
}

#[derive(Debug, Clone, Serialize)]
pub struct HalfSpaceSet {
    pub halfspaces: Vec<HalfSpace>,
    /// The input was affinely dependent and was thickened by [`THICKEN_EPS`].
    pub thickened: bool,
}

impl HalfSpaceSet {
    /// Whether `z` violates at least one half-space.
    pub fn outside(&self, z: &Point) -> bool {
        self.halfspaces.iter().any(|h| h.excess(z) > 0.0)
    }
}

/// Orthonormal basis of the directions the centred points do not span.
fn missing_directions(points: &[Point], d: usize, scale: f64) -> Vec<DVector<f64>> {
    let n = points.len() as f64;
    let mean = points.iter().fold(DVector::zeros(d), |acc, p| acc + p) / n;
    let mut c = DMatrix::zeros(d, points.len());
    for (j, p) in points.iter().enumerate() {
        c.set_column(j, &(p - &mean));
    }
    // left singular vectors of the centred data, padded with zero columns
    let cols = points.len().max(d);
    let mut padded = DMatrix::zeros(d, cols);
    padded.view_mut((0, 0), (d, points.len())).copy_from(&c);
    let svd = padded.svd(true, false);
    let u = svd.u.expect("requested u");
    (0..d)
        .filter(|&k| svd.singular_values[k] <= 1e-12 * scale * n.sqrt())
        .map(|k| u.column(k).into_owned())
        .collect()
}

/// Half-spaces supporting the convex hull of `points` (`d = 2` or `3`).
///
/// Affinely dependent input fails with [`Error::DegenerateHull`] unless
/// `thicken` is set, in which case every point is duplicated at `+/- 1e-9`
/// along each missing direction and the result is flagged.
pub fn halfspaces_from_points(points: &[Point], thicken: bool) -> Result<HalfSpaceSet> {
    let Some(first) = points.first() else {
        return Err(Error::Invalid("hull of an empty point set".into()));
    };
    let d = first.len();
    if !(d == 2 || d == 3) {
        return Err(Error::Invalid(format!("convex hull supports d = 2 or 3, got {d}")));
    }
    if points.iter().any(|p| p.len() != d) {
        return Err(Error::DimensionMismatch { expected: d, got: points.iter().find(|p| p.len() != d).unwrap().len() });
    }
    let scale = 1.0 + points.iter().map(|p| p.amax()).fold(0.0, f64::max);
    let missing = missing_directions(points, d, scale);
    let mut pts: Vec<Point> = points.to_vec();
    let thickened = !missing.is_empty();
    if thickened {
        if !thicken {
            return Err(Error::DegenerateHull);
        }
        for p in points {
            for n in &missing {
                pts.push(p + n * THICKEN_EPS);
                pts.push(p - n * THICKEN_EPS);
            }
        }
    }
    let normals = if d == 2 { hull_normals_2d(&pts, scale) } else { hull_normals_3d(&pts, scale)? };
    let mut halfspaces: Vec<HalfSpace> = Vec::new();
    for u in normals {
        let offset = pts.iter().map(|p| p.dot(&u)).fold(f64::NEG_INFINITY, f64::max);
        if !halfspaces
            .iter()
            .any(|h| (&h.normal - &u).norm() < 1e-9 && (h.offset - offset).abs() < 1e-9 * scale)
        {
            halfspaces.push(HalfSpace { normal: u, offset });
        }
    }
    Ok(HalfSpaceSet { halfspaces, thickened })
}

fn cross2(o: &Vector2<f64>, a: &Vector2<f64>, b: &Vector2<f64>) -> f64 {
    (a - o).perp(&(b - o))
}

/// Outward edge normals of the counter-clockwise monotone-chain hull.
fn hull_normals_2d(points: &[Point], scale: f64) -> Vec<DVector<f64>> {
    let mut p: Vec<Vector2<f64>> = points.iter().map(|q| Vector2::new(q[0], q[1])).collect();
    p.sort_by(|a, b| a.x.total_cmp(&b.x).then(a.y.total_cmp(&b.y)));
    p.dedup();
    let eps = 1e-14 * scale * scale;
    let mut hull: Vec<Vector2<f64>> = Vec::with_capacity(2 * p.len());
    for pass in 0..2 {
        let start = hull.len();
        let iter: Box<dyn Iterator<Item = &Vector2<f64>>> =
            if pass == 0 { Box::new(p.iter()) } else { Box::new(p.iter().rev()) };
        for q in iter {
            while hull.len() >= start + 2 && cross2(&hull[hull.len() - 2], &hull[hull.len() - 1], q) <= eps {
                hull.pop();
            }
            hull.push(*q);
        }
        hull.pop();
    }
    (0..hull.len())
        .map(|i| {
            let e = hull[(i + 1) % hull.len()] - hull[i];
            let n = Vector2::new(e.y, -e.x).normalize();
            DVector::from_column_slice(n.as_slice())
        })
        .collect()
}

/// Outward facet normals of the hull by incremental insertion.
fn hull_normals_3d(points: &[Point], scale: f64) -> Result<Vec<DVector<f64>>> {
    let p: Vec<Vector3<f64>> = points.iter().map(|q| Vector3::new(q[0], q[1], q[2])).collect();
    let eps = 1e-13 * scale;
    let far = |from: &dyn Fn(&Vector3<f64>) -> f64| {
        (0..p.len()).max_by(|&a, &b| from(&p[a]).total_cmp(&from(&p[b]))).unwrap()
    };
    let i0 = 0;
    let i1 = far(&|q| (q - p[i0]).norm());
    let line = (p[i1] - p[i0]).normalize();
    let i2 = far(&|q| (q - p[i0]).cross(&line).norm());
    let plane = (p[i1] - p[i0]).cross(&(p[i2] - p[i0])).normalize();
    let i3 = far(&|q| (q - p[i0]).dot(&plane).abs());
    if (p[i3] - p[i0]).dot(&plane).abs() <= eps {
        return Err(Error::DegenerateHull);
    }
    let centroid = (p[i0] + p[i1] + p[i2] + p[i3]) / 4.0;
    let normal = |f: &[usize; 3]| (p[f[1]] - p[f[0]]).cross(&(p[f[2]] - p[f[0]]));
    let mut faces: Vec<[usize; 3]> = Vec::new();
    for f in [[i0, i1, i2], [i0, i1, i3], [i0, i2, i3], [i1, i2, i3]] {
        let oriented = if normal(&f).dot(&(p[f[0]] - centroid)) < 0.0 { [f[0], f[2], f[1]] } else { f };
        faces.push(oriented);
    }
    for (k, q) in p.iter().enumerate() {
        if [i0, i1, i2, i3].contains(&k) {
            continue;
        }
        let visible: Vec<bool> = faces
            .iter()
            .map(|f| {
                let n = normal(f);
                n.dot(&(q - p[f[0]])) > eps * n.norm()
            })
            .collect();
        if !visible.iter().any(|&v| v) {
            continue;
        }
        let mut edges = std::collections::HashSet::new();
        for (f, _) in faces.iter().zip(&visible).filter(|(_, &v)| v) {
            for e in 0..3 {
                edges.insert((f[e], f[(e + 1) % 3]));
            }
        }
        let mut horizon: Vec<(usize, usize)> = edges.iter().copied().filter(|&(a, b)| !edges.contains(&(b, a))).collect();
        horizon.sort_unstable();
        let mut next: Vec<[usize; 3]> = faces
            .iter()
            .zip(&visible)
            .filter(|(_, &v)| !v)
            .map(|(f, _)| *f)
            .collect();
        next.extend(horizon.into_iter().map(|(a, b)| [a, b, k]));
        faces = next;
    }
    Ok(faces
        .iter()
        .map(|f| {
            let n = normal(f).normalize();
            DVector::from_column_slice(n.as_slice())
        })
        .collect())
}
