//! Local minimization of `1/2 |psi(y) - x|^2` over a chart's parameter box.
//!
//! Levenberg-damped Newton iterations on the full Hessian
//! `J^T J + sum_k r_k H_k` (the Gauss-Newton matrix plus the curvature
//! term), restricted to the free variables of the box. Damping grows until
//! the step decreases the objective, which makes every accepted iterate a
//! descent step even where the Hessian is indefinite.

use crate::error::Result;
use crate::expr::{Jet2, MAX_PARAMS};
use crate::manifold::{Axis, Chart, Edge};

#[derive(Debug, Clone, Copy)]
pub(crate) struct SolverOptions {
    pub max_iter: usize,
    pub step_tol: f64,
}

#[derive(Debug, Clone)]
pub(crate) struct LocalMin {
    pub y: Vec<f64>,
    /// Squared distance.
    pub sq_dist: f64,
    pub converged: bool,
    /// Face kinds the iterate is held against (gradient pointing out of the box).
    pub held_by: Vec<Edge>,
}

struct Eval {
    phi: f64,
    grad: [f64; MAX_PARAMS],
    hess: [[f64; MAX_PARAMS]; MAX_PARAMS],
}

fn evaluate(jets: &[Jet2], x: &[f64], m: usize) -> Eval {
    let mut e = Eval {
        phi: 0.0,
        grad: [0.0; MAX_PARAMS],
        hess: [[0.0; MAX_PARAMS]; MAX_PARAMS],
    };
    for (j, &xk) in jets.iter().zip(x) {
        let r = j.value - xk;
        e.phi += 0.5 * r * r;
        for a in 0..m {
            e.grad[a] += r * j.grad[a];
            for b in 0..m {
                e.hess[a][b] += j.grad[a] * j.grad[b] + r * j.hess[a][b];
            }
        }
    }
    e
}

/// Solves `(A + mu I) z = b` on the index set `free` by Cholesky; `None` if not positive definite.
fn damped_solve(
    a: &[[f64; MAX_PARAMS]; MAX_PARAMS],
    b: &[f64; MAX_PARAMS],
    free: &[usize],
    mu: f64,
) -> Option<[f64; MAX_PARAMS]> {
    let n = free.len();
    let mut l = [[0.0; MAX_PARAMS]; MAX_PARAMS];
    for i in 0..n {
        for j in 0..=i {
            let mut s = a[free[i]][free[j]];
            if i == j {
                s += mu;
            }
            for k in 0..j {
                s -= l[i][k] * l[j][k];
            }
            if i == j {
                if !(s > 0.0) {
                    return None;
                }
                l[i][i] = s.sqrt();
            } else {
                l[i][j] = s / l[j][j];
            }
        }
    }
    let mut z = [0.0; MAX_PARAMS];
    for i in 0..n {
        let mut s = b[free[i]];
        for k in 0..i {
            s -= l[i][k] * z[k];
        }
        z[i] = s / l[i][i];
    }
    for i in (0..n).rev() {
        let mut s = z[i];
        for k in i + 1..n {
            s -= l[k][i] * z[k];
        }
        z[i] = s / l[i][i];
    }
    let mut out = [0.0; MAX_PARAMS];
    for (i, &f) in free.iter().enumerate() {
        out[f] = z[i];
    }
    Some(out)
}

/// Variables pinned at a face with the gradient pointing outward, with the face kind.
fn held_faces(chart: &Chart, y: &[f64], grad: &[f64; MAX_PARAMS]) -> Vec<(usize, Edge)> {
    let dom = chart.domain();
    let mut out = Vec::new();
    for (i, is_hi, kind) in dom.active_faces(y) {
        if matches!(dom.axes[i], Axis::Periodic) {
            continue;
        }
        let outward = if is_hi { grad[i] < 0.0 } else { grad[i] > 0.0 };
        if outward {
            out.push((i, kind));
        }
    }
    out
}

fn param_distance(chart: &Chart, a: &[f64], b: &[f64]) -> f64 {
    let dom = chart.domain();
    a.iter()
        .zip(b)
        .enumerate()
        .map(|(i, (u, v))| {
            let mut d = (u - v).abs();
            if matches!(dom.axes[i], Axis::Periodic) {
                d = d.min(dom.span(i) - d);
            }
            d * d
        })
        .sum::<f64>()
        .sqrt()
}

/// Runs the damped Newton iteration from `start`.
///
/// If the iterate settles within `merge_radius` of one of `known` (minimizers
/// already found on this chart) the run stops early and reports that minimizer.
pub(crate) fn local_minimize(
    chart: &Chart,
    x: &[f64],
    start: &[f64],
    opts: &SolverOptions,
    known: &[LocalMin],
    merge_radius: f64,
) -> Result<LocalMin> {
    let m = chart.param_dim();
    let dom = chart.domain();
    let mut y = start.to_vec();
    dom.normalize(&mut y);
    let mut cur = evaluate(&chart.jets_raw(&y)?, x, m);
    if m == 0 {
        return Ok(LocalMin { y, sq_dist: 2.0 * cur.phi, converged: true, held_by: vec![] });
    }
    let scale: f64 = 1.0 + y.iter().map(|v| v * v).sum::<f64>().sqrt();
    let mut mu = 0.0;
    let mut converged = false;
    let mut free: Vec<usize> = Vec::with_capacity(m);
    'outer: for _ in 0..opts.max_iter {
        let held: Vec<usize> = held_faces(chart, &y, &cur.grad).into_iter().map(|(i, _)| i).collect();
        free.clear();
        free.extend((0..m).filter(|i| !held.contains(i)));
        if free.is_empty() || free.iter().all(|&i| cur.grad[i] == 0.0) {
            converged = true;
            break;
        }
        let neg_grad = cur.grad.map(|g| -g);
        let diag_scale = free.iter().map(|&i| cur.hess[i][i].abs()).fold(0.0, f64::max).max(1e-300);
        loop {
            let Some(step) = damped_solve(&cur.hess, &neg_grad, &free, mu) else {
                mu = (mu * 4.0).max(1e-8 * diag_scale);
                continue;
            };
            let mut trial: Vec<f64> = (0..m).map(|i| y[i] + step[i]).collect();
            dom.normalize(&mut trial);
            let moved = param_distance(chart, &trial, &y);
            if moved <= opts.step_tol * scale {
                converged = true;
                break 'outer;
            }
            let next = evaluate(&chart.jets_raw(&trial)?, x, m);
            let grad_norm = |e: &Eval| free.iter().map(|&i| e.grad[i] * e.grad[i]).sum::<f64>();
            let flat = (next.phi - cur.phi).abs() <= 1e-14 * (cur.phi + f64::MIN_POSITIVE);
            if next.phi < cur.phi || (flat && grad_norm(&next) < grad_norm(&cur)) {
                y = trial;
                cur = next;
                mu = if mu < 1e-12 * diag_scale { 0.0 } else { mu / 4.0 };
                break;
            }
            mu = (mu * 4.0).max(1e-8 * diag_scale);
            if mu > 1e30 * diag_scale {
                converged = true;
                break 'outer;
            }
        }
        if let Some(k) = known
            .iter()
            .find(|k| param_distance(chart, &k.y, &y) <= merge_radius && k.sq_dist <= 2.0 * cur.phi)
        {
            return Ok(k.clone());
        }
    }
    let held_by = held_faces(chart, &y, &cur.grad).into_iter().map(|(_, e)| e).collect();
    Ok(LocalMin { y, sq_dist: 2.0 * cur.phi, converged, held_by })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::manifold::catalog;

    const OPTS: SolverOptions = SolverOptions { max_iter: 200, step_tol: 1e-12 };

    #[test]
    fn circle_radial_projection() {
        let c = &catalog::unit_circle().charts()[0].clone();
        let r = local_minimize(c, &[2.0, 1.0], &[0.1], &OPTS, &[], 0.0).unwrap();
        assert!(r.converged);
        let expect = 1.0_f64.atan2(2.0);
        assert!((r.y[0] - expect).abs() < 1e-13, "{}", r.y[0]);
        assert!((r.sq_dist.sqrt() - (5f64.sqrt() - 1.0)).abs() < 1e-14);
    }

    #[test]
    fn half_parabola_endpoint_is_held() {
        let m = catalog::half_parabola(5.0).unwrap();
        let r = local_minimize(&m.charts()[0], &[-1.0, 0.2], &[1.0], &OPTS, &[], 0.0).unwrap();
        assert!(r.converged);
        assert_eq!(r.y, vec![0.0]);
        assert_eq!(r.held_by, vec![Edge::Boundary]);
    }

    #[test]
    fn half_parabola_above_frontier() {
        // nearest point of (0, 1) is (1/sqrt 2, 1/2)
        let m = catalog::half_parabola(5.0).unwrap();
        let r = local_minimize(&m.charts()[0], &[0.0, 1.0], &[2.0], &OPTS, &[], 0.0).unwrap();
        assert!((r.y[0] - 0.5f64.sqrt()).abs() < 1e-12);
        assert!((r.sq_dist - 0.75).abs() < 1e-14);
    }
}
