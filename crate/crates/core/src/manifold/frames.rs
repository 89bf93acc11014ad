use super::{Chart, NormalRay, Point};
use crate::error::{Error, Result};
use nalgebra::{DMatrix, DVector};
use serde::Serialize;

/// Orthonormal basis of the tangent space, one vector per column.
#[derive(Debug, Clone)]
pub struct TangentFrame {
    pub base_point: Point,
    pub vectors: DMatrix<f64>,
}

/// Orthonormal basis of the normal space, one vector per column.
#[derive(Debug, Clone)]
pub struct NormalFrame {
    pub base_point: Point,
    pub vectors: DMatrix<f64>,
}

const RANK_RATIO: f64 = 1e-10;
const PARALLEL_REJECT: f64 = 1e-6;

pub(crate) fn check_rank(jac: &DMatrix<f64>, y: &[f64]) -> Result<()> {
    if jac.ncols() == 0 {
        return Ok(());
    }
    let sv = jac.clone().svd(false, false).singular_values;
    let max = sv.max();
    let min = sv.min();
    let ratio = if max > 0.0 { min / max } else { 0.0 };
    if !(ratio >= RANK_RATIO) {
        return Err(Error::RankDeficient { coords: y.to_vec(), ratio });
    }
    Ok(())
}

/// Orthonormalizes `v` against the columns of `basis` (two passes of Gram-Schmidt).
fn orthogonalize(basis: &[DVector<f64>], mut v: DVector<f64>) -> DVector<f64> {
    for _ in 0..2 {
        for b in basis {
            let c = b.dot(&v);
            v -= b * c;
        }
    }
    v
}

fn gram_schmidt_columns(jac: &DMatrix<f64>) -> Vec<DVector<f64>> {
    let mut out: Vec<DVector<f64>> = Vec::with_capacity(jac.ncols());
    for col in jac.column_iter() {
        let v = orthogonalize(&out, col.into_owned());
        let n = v.norm();
        out.push(v / n);
    }
    out
}

/// Gram-Schmidt on the columns of the jacobian, in coordinate order.
pub fn tangent_frame(chart: &Chart, y: &[f64]) -> Result<TangentFrame> {
    let jac = chart.jacobian(y)?;
    check_rank(&jac, y)?;
    let cols = gram_schmidt_columns(&jac);
    Ok(TangentFrame {
        base_point: chart.eval(y)?,
        vectors: columns_to_matrix(chart.ambient_dim(), &cols),
    })
}

/// Completes the tangent frame with canonical basis vectors taken in index
/// order, skipping candidates nearly inside the current span.
pub fn normal_frame(chart: &Chart, y: &[f64]) -> Result<NormalFrame> {
    let tf = tangent_frame(chart, y)?;
    let d = chart.ambient_dim();
    let mut basis: Vec<DVector<f64>> = tf.vectors.column_iter().map(|c| c.into_owned()).collect();
    let m = basis.len();
    for i in 0..d {
        if basis.len() == d {
            break;
        }
        let v = orthogonalize(&basis, DVector::from_fn(d, |k, _| if k == i { 1.0 } else { 0.0 }));
        let n = v.norm();
        if n > PARALLEL_REJECT {
            basis.push(v / n);
        }
    }
    Ok(NormalFrame {
        base_point: tf.base_point,
        vectors: columns_to_matrix(d, &basis[m..]),
    })
}

fn columns_to_matrix(d: usize, cols: &[DVector<f64>]) -> DMatrix<f64> {
    let mut out = DMatrix::zeros(d, cols.len());
    for (j, c) in cols.iter().enumerate() {
        out.set_column(j, c);
    }
    out
}

/// `foot + r * direction`.
pub fn endpoint(ray: &NormalRay, r: f64) -> Point {
    &ray.foot + &ray.direction * r
}

#[derive(Debug, Clone, Copy, Serialize)]
pub struct SubspaceDistance {
    /// Largest principal angle.
    pub max_angle: f64,
    /// Sup over unit vectors of one space of the chord to the nearest unit vector of the other.
    pub chord: f64,
    /// `2 asin(angle / 2)`, the alternative closed form.
    pub arcsin_form: f64,
}

/// Distance between equal-dimensional subspaces given by orthonormal columns.
pub fn subspace_distance_report(t1: &DMatrix<f64>, t2: &DMatrix<f64>) -> Result<SubspaceDistance> {
    if t1.nrows() != t2.nrows() {
        return Err(Error::DimensionMismatch { expected: t1.nrows(), got: t2.nrows() });
    }
    if t1.ncols() != t2.ncols() {
        return Err(Error::DimensionMismatch { expected: t1.ncols(), got: t2.ncols() });
    }
    if t1.ncols() == 0 {
        return Ok(SubspaceDistance { max_angle: 0.0, chord: 0.0, arcsin_form: 0.0 });
    }
    let cosines = (t1.transpose() * t2).svd(false, false).singular_values;
    let min_cos = cosines.min().clamp(-1.0, 1.0);
    // acos loses accuracy near 1; recover the angle from the residual instead
    let angle = if min_cos > 0.9 {
        let proj = t2 * t2.transpose();
        let resid = t1 - &proj * t1;
        let s = resid.svd(false, false).singular_values.max().min(1.0);
        s.asin()
    } else {
        min_cos.acos()
    };
    Ok(SubspaceDistance {
        max_angle: angle,
        chord: 2.0 * (angle / 2.0).sin(),
        arcsin_form: 2.0 * (angle / 2.0).asin(),
    })
}

/// Sup-inf chord distance between subspaces.
pub fn subspace_distance(t1: &DMatrix<f64>, t2: &DMatrix<f64>) -> Result<f64> {
    subspace_distance_report(t1, t2).map(|r| r.chord)
}
