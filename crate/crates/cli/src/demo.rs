//! End-to-end demos of the worked examples, with in-process checks.

use crate::commands::{base_panel, frontier_options, frontier_table, print_json, region, write_ecomp, CmdResult};
use crate::output::{num, svg, OutDir, Panel};
use crate::{CliError, Common};
use nalgebra::dvector;
use nlproj::frontier::{frontier, theta_profile, FrontierEstimate};
use nlproj::manifold::{catalog, lip1_slope, lip1_value};
use nlproj::projection::ProjectOptions;
use nlproj::skeleton::{self, one_sided_hausdorff};
use nlproj::{NormalRay, Point};
use serde_json::json;

fn check(ok: bool, what: impl Into<String>) -> Result<(), CliError> {
    if ok {
        Ok(())
    } else {
        Err(CliError::Check(what.into()))
    }
}

/// `(x, (1 + 3 (x^2)^{1/3}) / 2)` for `x <= 0`: the closed-form complement of E(M).
pub fn half_parabola_curve(x: f64) -> f64 {
    (1.0 + 3.0 * (x * x).cbrt()) / 2.0
}

/// Half-parabola: sampled complement of E(M) against the closed-form curve,
/// and the frontier on the vertical ray at the endpoint.
pub fn half_parabola(c: &Common) -> CmdResult {
    let m = catalog::half_parabola(5.0)?;
    let opts = ProjectOptions::default().with_seed(c.seed);
    let fo = frontier_options(c, opts)?;
    let region = region(c, 2, Some(vec![-3.0, 0.0, 3.0, 5.0]))?;
    let n = c.grid.unwrap_or(400);
    let rep = skeleton::e_complement_check(&m, &region, n, &opts)?;
    let out = OutDir::new(&c.out);
    let mut summary = write_ecomp(&m, &region, &rep, &out, "eM_boundary.csv")?;

    let x_lo = region.lo[0].min(0.0);
    let curve: Vec<Point> = (0..=20_000)
        .map(|k| {
            let x = x_lo * (1.0 - k as f64 / 20_000.0);
            dvector![x, half_parabola_curve(x)]
        })
        .filter(|p| p[1] >= region.lo[1] && p[1] <= region.hi[1])
        .collect();
    let to_curve = one_sided_hausdorff(&rep.complement, &curve);
    let from_curve = one_sided_hausdorff(&curve, &rep.complement);
    let limit = nlproj::Extended::Finite(2.0 * rep.resolution);

    let ray = NormalRay::new(&m, 0, &[0.0], dvector![0.0, 1.0])?;
    let est = frontier(&m, &ray, fo.r_max, fo.tol, &opts)?;
    let theta = est.theta();
    println!("theta((0,0),(0,1)) = {theta}");

    let curve_line: Vec<(f64, f64)> = curve.iter().map(|p| (p[0], p[1])).collect();
    let panel = base_panel(&m, &region, "half-parabola: sampled complement of E(M) and closed form")?
        .scatter(&rep.complement, "#36c", 1.5)
        .polyline(curve_line, "crimson");
    out.text("half_parabola.svg", &svg(&[panel]))?;

    summary["closed_form_gap_sampled_to_curve"] = json!(to_curve);
    summary["closed_form_gap_curve_to_sampled"] = json!(from_curve);
    summary["theta_lo"] = json!(est.theta_lo);
    summary["theta_hi"] = json!(est.theta_hi);
    print_json(&summary)?;

    check(to_curve.le_scaled(limit, 1.0) && from_curve.le_scaled(limit, 1.0), "sampled complement is not within 2 cells of the closed-form curve")?;
    check(theta.finite().is_some_and(|t| (t - 0.5).abs() <= 1e-3), format!("theta = {theta}, expected 0.5"))
}

/// Lip1 graph: frontier on vertical rays left of the origin versus at the
/// points `3^{-2k}` where the slope vanishes.
pub fn lip1_theta(c: &Common) -> CmdResult {
    let m = catalog::lip1_example(3.0)?;
    let opts = ProjectOptions::default().with_seed(c.seed);
    let fo = frontier_options(c, opts)?;
    let up = dvector![0.0, 1.0];
    let left: Vec<f64> = (0..25).map(|k| -0.5 + 0.49 * k as f64 / 24.0).collect();
    let special: Vec<f64> = (1..=5).map(|k| 3f64.powi(-2 * k)).collect();
    let rays = left
        .iter()
        .chain(&special)
        .map(|&x| NormalRay::new(&m, 0, &[x], up.clone()))
        .collect::<Result<Vec<_>, _>>()?;
    let est = theta_profile(&m, &rays, &fo)?;
    let (mut header, rows) = frontier_table(&m, &est);
    header.insert(0, "family".into());
    let rows: Vec<Vec<String>> = rows
        .into_iter()
        .enumerate()
        .map(|(i, mut r)| {
            r.insert(0, if i < left.len() { "left".into() } else { "critical".into() });
            r
        })
        .collect();
    let out = OutDir::new(&c.out);
    out.csv("theta_profile.csv", &header, &rows)?;

    let xs: Vec<f64> = (0..=4000).map(|k| -0.1 + 1.2 * k as f64 / 4000.0).collect();
    let f: Vec<(f64, f64)> = xs.iter().map(|&x| (x, lip1_value(x))).collect();
    let fp: Vec<(f64, f64)> = xs.iter().map(|&x| (x, lip1_slope(x))).collect();
    let fmax = f.iter().map(|p| p.1).fold(0.0, f64::max);
    let fpmax = fp.iter().map(|p| p.1).fold(0.0, f64::max);
    out.text(
        "lip1.svg",
        &svg(&[
            Panel::new("f", (-0.1, 1.1), (-0.1 * fmax, 1.1 * fmax)).polyline(f, "black"),
            Panel::new("f'", (-0.1, 1.1), (-0.1 * fpmax, 1.1 * fpmax)).polyline(fp, "black"),
        ]),
    )?;

    let (l, s) = est.split_at(left.len());
    let lowest_left = l.iter().map(|e| e.theta_lo).fold(f64::INFINITY, f64::min);
    let highest_critical = s.iter().map(|e| e.theta_hi).fold(0.0, f64::max);
    let show = |e: &[FrontierEstimate]| e.iter().map(|e| num(e.theta_lo)).collect::<Vec<_>>();
    print_json(&json!({
        "left_theta_lo": show(l),
        "critical_theta_lo": show(s),
        "min_left": lowest_left,
        "max_critical": highest_critical,
    }))?;
    check(lowest_left >= 2.0 - 1e-2, format!("left rays: min theta {lowest_left} < 2"))?;
    check(
        highest_critical <= 1.0 + 1e-2,
        format!("critical rays: max theta {highest_critical} exceeds the radius of curvature 1"),
    )
}

/// Voronoi boundaries of a finite point set as its skeleton.
pub fn voronoi(c: &Common) -> CmdResult {
    let sites = vec![vec![0.0, 0.0], vec![2.0, 0.3], vec![0.7, 1.8], vec![-1.2, 1.1], vec![1.5, -1.4]];
    let m = catalog::point_set(sites)?;
    let opts = ProjectOptions::default().with_seed(c.seed);
    let region = region(c, 2, Some(vec![-3.0, -3.0, 3.0, 3.0]))?;
    let cloud = skeleton::skeleton_sample(&m, &region, c.grid.unwrap_or(200), false, &opts)?;
    let rows: Vec<Vec<String>> = cloud
        .balls
        .iter()
        .map(|b| vec![num(b.center[0]), num(b.center[1]), num(b.radius), b.witness_feet.len().to_string()])
        .collect();
    let out = OutDir::new(&c.out);
    out.csv("voronoi.csv", &["x", "y", "radius", "sites"].map(String::from), &rows)?;
    let centers: Vec<Point> = cloud.balls.iter().map(|b| b.center.clone()).collect();
    let panel = base_panel(&m, &region, "Voronoi boundaries as skeleton")?.scatter(&centers, "crimson", 1.0);
    out.text("voronoi.svg", &svg(&[panel]))?;
    let worst = cloud
        .balls
        .iter()
        .flat_map(|b| {
            let scale = 1.0 + b.center.norm();
            b.witness_feet.iter().map(move |f| ((f - &b.center).norm() - b.radius).abs() / scale)
        })
        .fold(0.0, f64::max);
    print_json(&json!({ "balls": cloud.balls.len(), "max_radius_mismatch": worst }))?;
    check(!cloud.balls.is_empty(), "no Voronoi boundary points found")?;
    check(cloud.balls.iter().all(|b| b.witness_feet.len() >= 2), "ball with fewer than two sites")?;
    check(worst <= opts.tol_sep, "witness sites are not equidistant")
}
