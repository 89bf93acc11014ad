//! Acceptance suite: one PASS/FAIL line per criterion, with the sub-checks
//! that make it up listed underneath.
//!
//! Two sub-checks restate closed forms that do not hold for the manifolds as
//! defined (see `KNOWN_WRONG`). They are evaluated exactly as stated and are
//! expected to print FAIL; every other sub-check must pass.

mod common;

use common::{c2_cases, random_tube_point, rng, Case};
use nalgebra::{dvector, DMatrix};
use nlproj::curvature::{shape_operator, shape_operator_fd_oracle};
use nlproj::derivative::{dp_fd, dp_formula, dp_norm_bound, default_fd_step};
use nlproj::frontier::{frontier, reach, SamplingSpec, FrontierOptions};
use nlproj::manifold::{catalog, lip1_value, normal_frame, tangent_frame};
use nlproj::projection::{
    classify, default_probe_eps, extension_scan, project, segment_violation, PointLabel, ProjectOptions,
};
use nlproj::skeleton::{
    convex_hull_halfspaces, e_complement_check, grid_sweep, medial_recover, one_sided_hausdorff,
    skeleton_sample, Region,
};
use nlproj::{Error, Extended, ManifoldSpec, NormalRay, Point};
use std::io::Write;
use std::time::Instant;

/// Sub-checks whose stated value contradicts the example it comes from.
///
/// `1b`: minimizing `t^2 + (1 - t^2)^2` gives `t^2 = 1/2`, so the nearest
/// point of `(0, 1)` on the half-parabola is `(2^{-1/2}, 1/2)`, at squared
/// distance 0.75 against 0.8125 for `(0.5, 0.25)`.
///
/// `2b`: on the pieces containing `3^{-2k}` the slope has unit rate, so the
/// curvature there is 1 and the frontier is about 1, not at most 1/2.
const KNOWN_WRONG: &[&str] = &["1b", "2b"];

struct Sub {
    id: String,
    ok: bool,
    detail: String,
}

#[derive(Default)]
struct Criterion {
    subs: Vec<Sub>,
}

impl Criterion {
    fn check(&mut self, id: &str, ok: bool, detail: impl Into<String>) {
        self.subs.push(Sub { id: id.into(), ok, detail: detail.into() });
    }
}

fn line(text: &str) {
    // written straight to the process stdout so the harness does not capture it
    let mut out = std::io::stdout().lock();
    let _ = writeln!(out, "{text}");
    let _ = out.flush();
}

fn pass_fail(ok: bool) -> &'static str {
    if ok {
        "PASS"
    } else {
        "FAIL"
    }
}

fn opts() -> ProjectOptions {
    ProjectOptions::default()
}

fn case<'a>(cases: &'a [Case], name: &str) -> &'a Case {
    cases.iter().find(|c| c.name == name).expect("fixture exists")
}

fn vertical_ray(m: &ManifoldSpec, x: f64) -> NormalRay {
    NormalRay::new(m, 0, &[x], dvector![0.0, 1.0]).unwrap()
}

fn half_parabola_closed_forms() -> Criterion {
    let mut c = Criterion::default();
    let m = catalog::half_parabola(5.0).unwrap();
    let mut worst: f64 = 0.0;
    for y in [0.1, 0.25, 0.49] {
        let r = project(&m, &dvector![0.0, y], &opts()).unwrap();
        let err = if r.is_unique() { r.foot().norm() } else { f64::INFINITY };
        worst = worst.max(err);
    }
    c.check("1a", worst <= 1e-7, format!("p((0,y)) = (0,0) for y in {{0.1, 0.25, 0.49}}: max error {worst:.2e}"));

    let r = project(&m, &dvector![0.0, 1.0], &opts()).unwrap();
    let err = (r.foot() - dvector![0.5, 0.25]).norm();
    c.check(
        "1b",
        r.is_unique() && err <= 1e-7,
        format!(
            "p((0,1)) = (0.5, 0.25): computed ({:.9}, {:.9}), error {err:.3e}",
            r.foot()[0],
            r.foot()[1]
        ),
    );

    let est = frontier(&m, &vertical_ray(&m, 0.0), 4.0, 1e-4, &opts()).unwrap();
    let theta = est.theta().finite().unwrap_or(f64::INFINITY);
    c.check("1c", (theta - 0.5).abs() <= 1e-3, format!("theta((0,0),(0,1)) = {theta:.6}"));

    let region = Region::new(vec![-3.0, 0.0], vec![3.0, 5.0]).unwrap();
    let rep = e_complement_check(&m, &region, 400, &opts()).unwrap();
    let curve: Vec<Point> = (0..=30_000)
        .map(|k| {
            let x = -3.0 * k as f64 / 30_000.0;
            dvector![x, (1.0 + 3.0 * (x * x).cbrt()) / 2.0]
        })
        .collect();
    let limit = Extended::Finite(2.0 * rep.resolution);
    let to = one_sided_hausdorff(&rep.complement, &curve);
    let from = one_sided_hausdorff(&curve, &rep.complement);
    c.check(
        "1d",
        to.le_scaled(limit, 1.0) && from.le_scaled(limit, 1.0),
        format!("E(M)^c vs closed-form curve on 400x400: gaps {to:.4} / {from:.4}, 2 cells = {limit:.4}"),
    );
    c
}

fn lip1_gap() -> Criterion {
    let mut c = Criterion::default();
    let m = catalog::lip1_example(3.0).unwrap();
    let mut lowest = f64::INFINITY;
    for x in [-0.5, -0.1, -0.01] {
        let est = frontier(&m, &vertical_ray(&m, x), 4.0, 1e-4, &opts()).unwrap();
        lowest = lowest.min(est.theta_lo);
    }
    c.check("2a", lowest >= 2.0 - 1e-2, format!("theta((x,0),(0,1)) >= 2 for x in {{-0.5,-0.1,-0.01}}: min theta_lo {lowest:.4}"));

    let mut highest: f64 = 0.0;
    let mut values = Vec::new();
    for k in 1..=3 {
        let x = 3f64.powi(-2 * k);
        let est = frontier(&m, &vertical_ray(&m, x), 4.0, 1e-4, &opts()).unwrap();
        highest = highest.max(est.theta_hi);
        values.push(format!("{:.4}", est.theta_hi));
        assert!((est.ray.foot[1] - lip1_value(x)).abs() < 1e-15);
    }
    c.check(
        "2b",
        highest <= 0.5 + 1e-2,
        format!("theta(3^-2k) <= 0.5 for k = 1..3: theta_hi = [{}]", values.join(", ")),
    );
    c.check("2c", highest < lowest, format!("frontier jumps at the origin: {highest:.4} < {lowest:.4}"));
    c
}

fn curvature_checks(cases: &[Case]) -> Criterion {
    let mut c = Criterion::default();
    let mut g = rng(3);
    for (id, name) in [("3a", "circle"), ("3b", "sphere(2,3)"), ("3c", "torus(2,0.5)"), ("3d", "graph t^2")] {
        let k = case(cases, name);
        let mut worst: f64 = 0.0;
        for _ in 0..20 {
            let (_, ray, _) = random_tube_point(k, 1.0, &mut g);
            let exact = shape_operator(&k.m, &ray).unwrap().matrix;
            let fd = shape_operator_fd_oracle(&k.m, &ray).unwrap();
            worst = worst.max((exact - fd).norm());
        }
        c.check(id, worst <= 1e-4, format!("{name}: 20 rays, max Frobenius error vs FD {worst:.2e}"));
    }
    let parabola = &case(cases, "graph t^2").m;
    let rho = shape_operator(parabola, &vertical_ray(parabola, 0.0)).unwrap().rho;
    c.check(
        "3e",
        rho.finite().is_some_and(|r| (r - 0.5).abs() <= 1e-6),
        format!("rho((0,0),(0,1)) on t^2 = {rho}"),
    );
    let circle = catalog::unit_circle();
    let out = NormalRay::new(&circle, 0, &[0.0], dvector![1.0, 0.0]).unwrap();
    let rho = shape_operator(&circle, &out).unwrap().rho;
    c.check("3f", rho == Extended::Unbounded, format!("outward circle ray: rho = {rho}"));
    c
}

fn theta_below_rho(cases: &[Case]) -> Criterion {
    let mut c = Criterion::default();
    let mut g = rng(4);
    let r_max = 4.0;
    for k in cases {
        let mut violations = 0;
        let mut detail = String::new();
        for _ in 0..50 {
            let (_, ray, _) = random_tube_point(k, 1.0, &mut g);
            let rho = shape_operator(&k.m, &ray).unwrap().rho;
            let est = frontier(&k.m, &ray, r_max, 1e-4, &opts()).unwrap();
            let upper = if est.unbounded_beyond.is_some() { Extended::Unbounded } else { Extended::Finite(est.theta_hi) };
            // an unbounded bracket only certifies theta >= r_max
            let bad = match (upper, rho) {
                (_, Extended::Unbounded) => false,
                (Extended::Unbounded, Extended::Finite(r)) => r_max > r * (1.0 + 1e-3),
                (Extended::Finite(t), Extended::Finite(r)) => t > r * (1.0 + 1e-3),
            };
            if bad {
                violations += 1;
                detail = format!(" (e.g. theta_hi {upper} vs rho {rho} at {})", ray.foot);
            }
        }
        c.check(&format!("4.{}", k.name), violations == 0, format!("{}: {violations}/50 rays with theta > rho{detail}", k.name));
    }

    let circle = catalog::unit_circle();
    let mut worst: f64 = 0.0;
    for j in 0..16 {
        let a = std::f64::consts::TAU * j as f64 / 16.0;
        let ray = NormalRay::new(&circle, 0, &[a], dvector![-a.cos(), -a.sin()]).unwrap();
        let theta = frontier(&circle, &ray, r_max, 1e-4, &opts()).unwrap().theta().finite().unwrap_or(f64::INFINITY);
        worst = worst.max((theta - 1.0).abs());
    }
    c.check("4.circle=", worst <= 1e-3, format!("circle inward rays: max |theta - rho| = {worst:.2e}"));
    let parabola = &case(cases, "graph t^2").m;
    let theta = frontier(parabola, &vertical_ray(parabola, 0.0), r_max, 1e-4, &opts())
        .unwrap()
        .theta()
        .finite()
        .unwrap_or(f64::INFINITY);
    c.check("4.t^2=", (theta - 0.5).abs() <= 0.5e-3, format!("t^2 at the origin: theta = {theta:.6}, rho = 0.5"));
    c
}

fn reach_estimates() -> Criterion {
    let mut c = Criterion::default();
    let fo = FrontierOptions::default();
    let runs = [
        ("5a", "circle", catalog::unit_circle(), 32, 1.0, 1e-3),
        ("5b", "sphere(2,3)", catalog::sphere(2.0, 3).unwrap(), 6, 2.0, 1e-2),
        ("5c", "torus(2,0.5)", catalog::torus(2.0, 0.5).unwrap(), 8, 0.5, 1e-2),
    ];
    for (id, name, m, feet, expected, tol) in runs {
        let start = Instant::now();
        let spec = SamplingSpec { feet_per_axis: feet, ..SamplingSpec::default() };
        let rep = reach(&m, &spec, &fo).unwrap();
        let value = rep.reach_estimate.finite().unwrap_or(f64::INFINITY);
        c.check(
            id,
            (value - expected).abs() <= tol,
            format!(
                "{name}: reach {value:.6} (expected {expected} +/- {tol}) from {} rays in {:.1} s",
                rep.samples.len(),
                start.elapsed().as_secs_f64()
            ),
        );
    }
    c
}

fn projection_derivative(cases: &[Case]) -> Criterion {
    let mut c = Criterion::default();
    let mut g = rng(6);
    for k in cases {
        let eps0 = 0.9 * k.reach;
        let (mut tested, mut attempts) = (0, 0);
        let (mut worst_rel, mut worst_inv): (f64, f64) = (0.0, 0.0);
        let mut bound_violations = 0;
        while tested < 100 && attempts < 400 {
            attempts += 1;
            let (x, _, _) = random_tube_point(k, 0.9, &mut g);
            if classify(&k.m, &x, default_probe_eps(&x), &opts()).unwrap().label != PointLabel::InteriorE {
                continue;
            }
            tested += 1;
            let dp = dp_formula(&k.m, &x, &opts()).unwrap();
            let fd = dp_fd(&k.m, &x, default_fd_step(&x), &opts()).unwrap();
            worst_rel = worst_rel.max((&dp.matrix - &fd).norm() / (1.0 + fd.norm()));

            let chart = k.m.chart(dp.foot.chart_index).unwrap();
            let n = normal_frame(chart, &dp.foot.chart_coords).unwrap().vectors;
            let t = tangent_frame(chart, &dp.foot.chart_coords).unwrap().vectors;
            let pt: DMatrix<f64> = &t * t.transpose();
            let kernel = (&dp.matrix * &n).amax();
            let along = (&dp.matrix * (&x - &dp.foot.point)).amax();
            let range = (&pt * &dp.matrix - &dp.matrix).amax();
            worst_inv = worst_inv.max(kernel).max(along).max(range);

            match dp_norm_bound(&k.m, &x, eps0, &opts()) {
                Ok(_) => {}
                Err(Error::BoundViolation { .. }) => bound_violations += 1,
                Err(e) => panic!("{}: norm bound at {x}: {e}", k.name),
            }
        }
        let ok = tested == 100 && worst_rel <= 1e-4 && worst_inv <= 1e-8 && bound_violations == 0;
        c.check(
            &format!("6.{}", k.name),
            ok,
            format!(
                "{}: {tested} interior points, max rel error {worst_rel:.2e}, invariants {worst_inv:.1e}, bound violations {bound_violations}",
                k.name
            ),
        );
    }
    let circle = catalog::unit_circle();
    let dp = dp_formula(&circle, &dvector![2.0, 0.0], &opts()).unwrap();
    let err = (dp.matrix - DMatrix::from_row_slice(2, 2, &[0.0, 0.0, 0.0, 0.5])).amax();
    c.check("6.spot", err <= 1e-8, format!("circle Dp((2,0)) = [[0,0],[0,0.5]]: error {err:.1e}"));
    c
}

fn segment_and_extension(cases: &[Case]) -> Criterion {
    let mut c = Criterion::default();
    let mut g = rng(7);
    let lambdas = [0.05, 0.1, 0.25, 0.5, 0.75, 0.9, 0.99, 1.0];
    let (mut seg_trials, mut seg_bad, mut ext_trials, mut ext_bad) = (0, 0, 0, 0);
    let mut example = String::new();
    for trial in 0..500 {
        let k = &cases[trial % cases.len()];
        let (x, _, _) = random_tube_point(k, 0.9, &mut g);
        let base = project(&k.m, &x, &opts()).unwrap();
        if !base.is_unique() {
            continue;
        }
        seg_trials += 1;
        if let Some(l) = segment_violation(&k.m, &x, &lambdas, 1e-6, &opts()).unwrap() {
            seg_bad += 1;
            example = format!(" (segment: {} at {x}, lambda {l})", k.name);
        }
        if classify(&k.m, &x, default_probe_eps(&x), &opts()).unwrap().label == PointLabel::InteriorE {
            ext_trials += 1;
            if let Some(a) = extension_scan(&k.m, &x, &[1.01], 1e-6, &opts()).unwrap() {
                ext_bad += 1;
                example = format!(" (extension: {} at {x}, a {a})", k.name);
            }
        }
    }
    c.check("7a", seg_bad == 0 && seg_trials >= 450, format!("segment property: {seg_bad} violations in {seg_trials} trials{example}"));
    c.check("7b", ext_bad == 0 && ext_trials >= 450, format!("extension property: {ext_bad} violations in {ext_trials} trials"));
    c
}

fn skeleton_decomposition() -> Criterion {
    let mut c = Criterion::default();
    let square = Region::new(vec![-2.0, -2.0], vec![2.0, 2.0]).unwrap();
    let runs = [
        ("8a", "circle", catalog::unit_circle(), square.clone(), 100),
        (
            "8b",
            "half_parabola",
            catalog::half_parabola(5.0).unwrap(),
            Region::new(vec![-3.0, 0.0], vec![3.0, 5.0]).unwrap(),
            200,
        ),
        ("8c", "parallel_lines", catalog::parallel_lines(1.0, 10.0).unwrap(), square.clone(), 100),
    ];
    for (id, name, m, region, n) in runs {
        let rep = e_complement_check(&m, &region, n, &opts()).unwrap();
        c.check(
            id,
            rep.within_two_cells,
            format!(
                "{name}: {} complement / {} skeleton points, gaps {:.4} / {:.4}, 2 cells = {:.4}",
                rep.complement.len(),
                rep.skeleton.len() + rep.no_nearest.len(),
                rep.gap_complement_to_sf,
                rep.gap_sf_to_complement,
                2.0 * rep.resolution
            ),
        );
    }

    let circle = catalog::unit_circle();
    let cloud = skeleton_sample(&circle, &square, 200, false, &opts()).unwrap();
    let hs = convex_hull_halfspaces(&circle, 256).unwrap();
    let h = 4.0 / 200.0;
    let (mut compared, mut wrong) = (0, 0);
    for i in 0..=200 {
        for j in 0..=200 {
            let q = dvector![-2.0 + h * i as f64, -2.0 + h * j as f64];
            let off = (q.norm() - 1.0).abs();
            if off <= 2.0 * h {
                continue;
            }
            compared += 1;
            // every point off the circle lies in its complement
            if !medial_recover(&cloud, &hs, &q) {
                wrong += 1;
            }
        }
    }
    c.check("8d", wrong == 0, format!("medial recovery of the circle complement: {wrong} mismatches in {compared} nodes"));
    c
}

fn csv_bytes(rows: impl Iterator<Item = Vec<f64>>) -> Vec<u8> {
    let mut out = Vec::new();
    for r in rows {
        let cells: Vec<String> = r.iter().map(|v| format!("{v:.16e}")).collect();
        out.extend_from_slice(cells.join(",").as_bytes());
        out.push(b'\n');
    }
    out
}

fn determinism() -> Criterion {
    let mut c = Criterion::default();
    let m = catalog::half_parabola(5.0).unwrap();
    let region = Region::new(vec![-3.0, 0.0], vec![3.0, 5.0]).unwrap();
    let sweep_csv = |threads: usize| {
        let pool = rayon::ThreadPoolBuilder::new().num_threads(threads).build().unwrap();
        pool.install(|| {
            let s = grid_sweep(&m, &region, 60, &opts().with_seed(11)).unwrap();
            let splits = s.splits.iter().map(|(p, r)| vec![p[0], p[1], r.global_distance]);
            let nodes = s
                .nodes
                .iter()
                .zip(&s.results)
                .zip(&s.labels)
                .map(|((p, r), l)| vec![p[0], p[1], r.foot()[0], r.foot()[1], *l as u8 as f64]);
            csv_bytes(nodes.chain(splits))
        })
    };
    let torus = catalog::torus(2.0, 0.5).unwrap();
    let reach_csv = |threads: usize| {
        let pool = rayon::ThreadPoolBuilder::new().num_threads(threads).build().unwrap();
        pool.install(|| {
            let fo = FrontierOptions { project: opts().with_seed(11), ..FrontierOptions::default() };
            let spec = SamplingSpec { feet_per_axis: 4, ..SamplingSpec::default() };
            let rep = reach(&torus, &spec, &fo).unwrap();
            csv_bytes(rep.samples.iter().map(|e| vec![e.ray.foot[0], e.ray.foot[1], e.ray.foot[2], e.theta_lo, e.theta_hi]))
        })
    };
    let (a, b, d) = (sweep_csv(1), sweep_csv(1), sweep_csv(4));
    c.check("9a", a == b && a == d, format!("grid sweep CSV: {} bytes, identical across runs and thread counts: {}", a.len(), a == b && a == d));
    let (a, b, d) = (reach_csv(1), reach_csv(1), reach_csv(3));
    c.check("9b", a == b && a == d, format!("reach CSV: {} bytes, identical across runs and thread counts: {}", a.len(), a == b && a == d));
    c
}

#[test]
fn acceptance() {
    let cases = c2_cases();
    let criteria: Vec<(&str, Box<dyn Fn() -> Criterion + '_>)> = vec![
        ("1 half-parabola closed forms", Box::new(half_parabola_closed_forms)),
        ("2 Lip1 frontier discontinuity", Box::new(lip1_gap)),
        ("3 shape operator vs finite differences", Box::new(|| curvature_checks(&cases))),
        ("4 theta <= rho on C2 manifolds", Box::new(|| theta_below_rho(&cases))),
        ("5 reach of circle, sphere, torus", Box::new(reach_estimates)),
        ("6 projection derivative", Box::new(|| projection_derivative(&cases))),
        ("7 segment and extension properties", Box::new(|| segment_and_extension(&cases))),
        ("8 skeleton decomposition and medial recovery", Box::new(skeleton_decomposition)),
        ("9 determinism", Box::new(determinism)),
    ];
    let mut unexpected = Vec::new();
    for (title, run) in criteria {
        let start = Instant::now();
        let crit = run();
        let ok = crit.subs.iter().all(|s| s.ok);
        line(&format!("{} criterion {title} ({:.1} s)", pass_fail(ok), start.elapsed().as_secs_f64()));
        for s in &crit.subs {
            let note = if !s.ok && KNOWN_WRONG.contains(&s.id.as_str()) { " [stated value contradicts the example]" } else { "" };
            line(&format!("    {} {:<16} {}{note}", pass_fail(s.ok), s.id, s.detail));
            if !s.ok && !KNOWN_WRONG.contains(&s.id.as_str()) {
                unexpected.push(s.id.clone());
            }
        }
    }
    assert!(unexpected.is_empty(), "failing sub-checks: {unexpected:?}");
}
