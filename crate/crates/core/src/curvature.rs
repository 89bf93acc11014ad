//! Shape operator, principal curvatures, radius and centres of curvature.

use crate::error::{Error, Result};
use crate::extended::Extended;
use crate::manifold::{ManifoldSpec, NormalRay, Point};
use nalgebra::{DMatrix, DVector, SymmetricEigen};
use serde::Serialize;

/// Eigenvalue floor used when forming `G^{-1/2}`.
const METRIC_FLOOR: f64 = 1e-12;
/// Relative tolerance for matching `1/r` against a principal curvature.
const SINGULAR_REL: f64 = 1e-6;

#[derive(Debug, Clone, Serialize)]
pub struct ShapeOperatorReport {
    pub ray: NormalRay,
    /// Symmetric `m x m` matrix in the orthonormal tangent frame `frame`.
    #[serde(serialize_with = "crate::serde_util::matrix")]
    pub matrix: DMatrix<f64>,
    /// The orthonormal tangent frame `J G^{-1/2}` (columns) the matrix refers to.
    #[serde(serialize_with = "crate::serde_util::matrix")]
    pub frame: DMatrix<f64>,
    /// Principal curvatures, sorted descending.
    pub eigenvalues: Vec<f64>,
    pub rho: Extended,
    #[serde(serialize_with = "crate::serde_util::vectors")]
    pub centers: Vec<Point>,
    /// `|S - S^T|_F` before symmetrization.
    pub asymmetry: f64,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub enum EndpointKind {
    Singular,
    Regular,
}

/// `G^{-1/2}` for a symmetric positive semidefinite `G`, eigenvalues floored.
pub(crate) fn inv_sqrt_spd(g: &DMatrix<f64>) -> DMatrix<f64> {
    let eig = SymmetricEigen::new(g.clone());
    let d = eig.eigenvalues.map(|l| 1.0 / l.max(METRIC_FLOOR).sqrt());
    &eig.eigenvectors * DMatrix::from_diagonal(&d) * eig.eigenvectors.transpose()
}

/// Eigenvalues of a symmetric matrix, sorted descending.
pub(crate) fn sorted_eigenvalues(s: &DMatrix<f64>) -> Vec<f64> {
    if s.nrows() == 0 {
        return vec![];
    }
    let mut ev: Vec<f64> = SymmetricEigen::new(s.clone()).eigenvalues.iter().copied().collect();
    ev.sort_by(|a, b| b.total_cmp(a));
    ev
}

/// Shape operator `L_{xi,v}` from the second fundamental form `B_ij = <d_ij psi, v>`
/// and the metric `G = J^T J`, expressed as `G^{-1/2} B G^{-1/2}`.
pub fn shape_operator(m: &ManifoldSpec, ray: &NormalRay) -> Result<ShapeOperatorReport> {
    let chart = m.chart(ray.chart_index)?;
    let y = &ray.chart_coords;
    let pd = chart.param_dim();
    if pd == 0 {
        return Ok(ShapeOperatorReport {
            ray: ray.clone(),
            matrix: DMatrix::zeros(0, 0),
            frame: DMatrix::zeros(m.ambient_dim(), 0),
            eigenvalues: vec![],
            rho: Extended::Unbounded,
            centers: vec![],
            asymmetry: 0.0,
        });
    }
    let jac = chart.jacobian(y)?;
    crate::manifold::check_rank(&jac, y)?;
    let hess = chart.hessians(y)?;
    let mut b = DMatrix::zeros(pd, pd);
    for (hk, vk) in hess.iter().zip(ray.direction.iter()) {
        b += hk * *vk;
    }
    let g = jac.transpose() * &jac;
    let gi = inv_sqrt_spd(&g);
    let s = &gi * b * &gi;
    let asymmetry = (&s - s.transpose()).norm();
    if asymmetry > 0.0 {
        log::debug!("shape operator asymmetry {asymmetry:e} removed by symmetrization");
    }
    let matrix = (&s + s.transpose()) * 0.5;
    let eigenvalues = sorted_eigenvalues(&matrix);
    let lmax = eigenvalues.first().copied().unwrap_or(0.0);
    let centers = eigenvalues
        .iter()
        .filter(|&&l| l > 0.0)
        .map(|l| &ray.foot + &ray.direction / *l)
        .collect();
    Ok(ShapeOperatorReport {
        ray: ray.clone(),
        matrix,
        frame: jac * gi,
        eigenvalues,
        rho: Extended::recip_of_positive_part(lmax),
        centers,
        asymmetry,
    })
}

/// Tangent projector `J (J^T J)^{-1} J^T`.
fn tangent_projector(jac: &DMatrix<f64>) -> Result<DMatrix<f64>> {
    let g = jac.transpose() * jac;
    let gi = g
        .try_inverse()
        .ok_or_else(|| Error::RankDeficient { coords: vec![], ratio: 0.0 })?;
    Ok(jac * gi * jac.transpose())
}

/// `-P_T Dn` by central differences of the unit normal field
/// `n(y) = (v - P_T(y) v) / |v - P_T(y) v|`, differentiated along the
/// orthonormal tangent frame. Uses first derivatives of the chart only.
pub fn shape_operator_fd_oracle(m: &ManifoldSpec, ray: &NormalRay) -> Result<DMatrix<f64>> {
    let chart = m.chart(ray.chart_index)?;
    let y0 = &ray.chart_coords;
    let pd = chart.param_dim();
    let jac0 = chart.jacobian(y0)?;
    crate::manifold::check_rank(&jac0, y0)?;
    let gi = inv_sqrt_spd(&(jac0.transpose() * &jac0));
    let frame = &jac0 * &gi;
    let v = &ray.direction;
    let normal_at = |y: &[f64]| -> Result<DVector<f64>> {
        let jets = chart.jets_raw(y)?;
        let jac = crate::manifold::jacobian_of(&jets, pd);
        let n = v - tangent_projector(&jac)? * v;
        Ok(&n / n.norm())
    };
    let h = 1e-4;
    let mut dn = DMatrix::zeros(m.ambient_dim(), pd);
    for j in 0..pd {
        // parameter direction whose image is the j-th frame vector
        let dy = gi.column(j);
        let plus: Vec<f64> = y0.iter().zip(dy.iter()).map(|(a, b)| a + h * b).collect();
        let minus: Vec<f64> = y0.iter().zip(dy.iter()).map(|(a, b)| a - h * b).collect();
        let d = (normal_at(&plus)? - normal_at(&minus)?) / (2.0 * h);
        dn.set_column(j, &d);
    }
    Ok(-(frame.transpose() * dn))
}

/// Whether `xi + r v` is a centre of curvature: `1/r` equals a positive
/// principal curvature within a relative `1e-6`.
pub fn endpoint_singularity_check(m: &ManifoldSpec, ray: &NormalRay, r: f64) -> Result<EndpointKind> {
    if !(r > 0.0) {
        return Err(Error::Invalid("r must be positive".into()));
    }
    let rep = shape_operator(m, ray)?;
    let target = 1.0 / r;
    let singular = rep
        .eigenvalues
        .iter()
        .any(|&l| l > 0.0 && (l - target).abs() <= SINGULAR_REL * l);
    Ok(if singular { EndpointKind::Singular } else { EndpointKind::Regular })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::manifold::catalog;
    use nalgebra::{dvector, DMatrix};

    fn ray(m: &ManifoldSpec, chart: usize, y: &[f64], v: DVector<f64>) -> NormalRay {
        NormalRay::new(m, chart, y, v).unwrap()
    }

    #[test]
    fn parabola_at_origin() {
        let m = catalog::graph_curve("y0^2", -2.0, 2.0).unwrap();
        let r = ray(&m, 0, &[0.0], dvector![0.0, 1.0]);
        let rep = shape_operator(&m, &r).unwrap();
        assert!((rep.matrix[(0, 0)] - 2.0).abs() < 1e-12);
        assert_eq!(rep.rho, Extended::Finite(0.5));
        assert!((&rep.centers[0] - dvector![0.0, 0.5]).norm() < 1e-12);
        let fd = shape_operator_fd_oracle(&m, &r).unwrap();
        assert!((fd[(0, 0)] - 2.0).abs() < 1e-5);
    }

    #[test]
    fn circle_inward_and_outward() {
        let m = catalog::unit_circle();
        let inward = ray(&m, 0, &[0.0], dvector![-1.0, 0.0]);
        let rep = shape_operator(&m, &inward).unwrap();
        assert!((rep.eigenvalues[0] - 1.0).abs() < 1e-12);
        assert_eq!(rep.rho, Extended::Finite(1.0));
        assert!(rep.centers[0].norm() < 1e-12);
        let rep = shape_operator(&m, &inward.reversed()).unwrap();
        assert!((rep.eigenvalues[0] + 1.0).abs() < 1e-12);
        assert_eq!(rep.rho, Extended::Unbounded);
        assert!(rep.centers.is_empty());
    }

    #[test]
    fn sphere_oracle() {
        let m = catalog::sphere(2.0, 3).unwrap();
        // chart coordinates of (2,0,0), located by projection
        let p = crate::projection::project(&m, &dvector![3.0, 0.0, 0.0], &Default::default()).unwrap();
        let f = &p.minima[0];
        let r = ray(&m, f.chart_index, &f.chart_coords, dvector![-1.0, 0.0, 0.0]);
        let fd = shape_operator_fd_oracle(&m, &r).unwrap();
        assert!((fd - DMatrix::identity(2, 2) * 0.5).norm() < 1e-5);
        let rep = shape_operator(&m, &r).unwrap();
        assert!((&rep.matrix - DMatrix::identity(2, 2) * 0.5).norm() < 1e-10);
    }

    #[test]
    fn flat_line() {
        let m = catalog::line(vec![0.0, 0.0], vec![1.0, 1.0], 5.0).unwrap();
        let r = ray(&m, 0, &[0.3], dvector![1.0, -1.0]);
        assert!(shape_operator_fd_oracle(&m, &r).unwrap().norm() < 1e-10);
        let rep = shape_operator(&m, &r).unwrap();
        assert_eq!(rep.rho, Extended::Unbounded);
        for rr in [0.1, 1.0, 100.0] {
            assert_eq!(endpoint_singularity_check(&m, &r, rr).unwrap(), EndpointKind::Regular);
        }
    }

    #[test]
    fn endpoint_singularity() {
        let m = catalog::unit_circle();
        let r = ray(&m, 0, &[0.0], dvector![-1.0, 0.0]);
        assert_eq!(endpoint_singularity_check(&m, &r, 1.0).unwrap(), EndpointKind::Singular);
        assert_eq!(endpoint_singularity_check(&m, &r, 0.5).unwrap(), EndpointKind::Regular);
        assert!(endpoint_singularity_check(&m, &r, 0.0).is_err());
    }

    #[test]
    fn linear_in_direction_and_symmetric() {
        let m = catalog::torus(2.0, 0.5).unwrap();
        let nf = crate::manifold::normal_frame(m.chart(0).unwrap(), &[0.7, 2.1]).unwrap();
        let r = ray(&m, 0, &[0.7, 2.1], nf.vectors.column(0).into_owned());
        let a = shape_operator(&m, &r).unwrap();
        let b = shape_operator(&m, &r.reversed()).unwrap();
        assert!((&a.matrix + &b.matrix).norm() < 1e-8);
        assert!(a.asymmetry < 1e-8);
        let fd = shape_operator_fd_oracle(&m, &r).unwrap();
        assert!((&fd - &a.matrix).norm() < 1e-4 * (1.0 + a.matrix.norm()));
    }

    #[test]
    fn not_c2_is_reported() {
        let m = catalog::lip1_example(3.0).unwrap();
        let r = ray(&m, 0, &[0.5], {
            let s = crate::manifold::lip1_slope(0.5);
            dvector![-s, 1.0]
        });
        assert!(matches!(shape_operator(&m, &r), Err(Error::NotC2)));
    }

    /// Contact of balls `B_r(xi + r v)` with dense samples near `xi` flips at `rho`.
    #[test]
    fn ball_contact_matches_rho() {
        let m = catalog::graph_curve("y0^2", -2.0, 2.0).unwrap();
        let r = ray(&m, 0, &[0.0], dvector![0.0, 1.0]);
        let rho = shape_operator(&m, &r).unwrap().rho.finite().unwrap();
        let samples: Vec<Point> = (0..=20_000)
            .map(|k| {
                let t = -0.2 + 0.4 * k as f64 / 20_000.0;
                dvector![t, t * t]
            })
            .filter(|p| p.norm() > 1e-12)
            .collect();
        let hits = |rad: f64| {
            let c = dvector![0.0, rad];
            samples.iter().any(|p| (p - &c).norm() < rad * (1.0 - 1e-12))
        };
        assert!(!hits(rho * (1.0 - 1e-3)));
        assert!(hits(rho * (1.0 + 1e-3)));
    }
}
