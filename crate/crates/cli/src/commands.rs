//! Subcommand implementations.

use crate::output::{indexed, num, nums, svg, OutDir, Panel};
use crate::{CliError, Common, Coords, RaySpec};
use nalgebra::DVector;
use nlproj::frontier::{FrontierOptions, SamplingSpec};
use nlproj::manifold::manifest::Manifest;
use nlproj::manifold::normal_frame;
use nlproj::projection::ProjectOptions;
use nlproj::skeleton::{self, Region};
use nlproj::{Extended, ManifoldSpec, NormalRay, Point};
use serde::Serialize;
use serde_json::json;

pub type CmdResult = Result<(), CliError>;

/// Loaded manifold with the projection options its manifest implies.
pub struct Setup {
    pub manifold: ManifoldSpec,
    pub opts: ProjectOptions,
}

pub fn load(c: &Common) -> Result<Setup, CliError> {
    let src = c
        .manifest
        .as_deref()
        .ok_or_else(|| CliError::Usage("--manifest is required".into()))?;
    let manifest = match src.strip_prefix("catalog:") {
        Some(key) => {
            let params = match &c.params {
                Some(p) => serde_json::from_str(p).map_err(|e| CliError::Usage(format!("--params: {e}")))?,
                None => json!({}),
            };
            Manifest::builtin(key, key, params)?
        }
        None => Manifest::load(std::path::Path::new(src))?,
    };
    Ok(Setup {
        manifold: manifest.build()?,
        opts: ProjectOptions::default().with_seed(c.seed).with_overrides(manifest.tolerances),
    })
}

pub fn frontier_options(c: &Common, opts: ProjectOptions) -> Result<FrontierOptions, CliError> {
    let fo = FrontierOptions { r_max: c.rmax.unwrap_or(4.0), tol: c.tol.unwrap_or(1e-4), project: opts };
    if !(fo.r_max > 0.0 && fo.tol > 0.0) {
        return Err(CliError::Usage("--rmax and --tol must be positive".into()));
    }
    Ok(fo)
}

pub fn region(c: &Common, d: usize, default: Option<Vec<f64>>) -> Result<Region, CliError> {
    let v = match (&c.region, default) {
        (Some(r), _) => r.0.clone(),
        (None, Some(d)) => d,
        (None, None) => return Err(CliError::Usage("--region is required".into())),
    };
    if v.len() != 2 * d {
        return Err(CliError::Usage(format!("--region needs {} numbers (lo then hi) for d = {d}", 2 * d)));
    }
    Ok(Region::new(v[..d].to_vec(), v[d..].to_vec())?)
}

fn point(c: &Coords) -> Point {
    DVector::from_column_slice(&c.0)
}

pub fn print_json<T: Serialize>(v: &T) -> CmdResult {
    let text = serde_json::to_string_pretty(v).map_err(crate::output::OutputError::from)?;
    println!("{text}");
    Ok(())
}

pub fn make_ray(m: &ManifoldSpec, chart: usize, at: &[f64], direction: Option<&Coords>) -> Result<NormalRay, CliError> {
    let ch = m.chart(chart)?;
    if at.len() != ch.param_dim() {
        return Err(nlproj::Error::DimensionMismatch { expected: ch.param_dim(), got: at.len() }.into());
    }
    let v = match direction {
        Some(d) => point(d),
        None => {
            let nf = normal_frame(ch, at)?;
            if nf.vectors.ncols() == 0 {
                return Err(CliError::Usage("manifold has no normal directions".into()));
            }
            nf.vectors.column(0).into_owned()
        }
    };
    Ok(NormalRay::new(m, chart, at, v)?)
}

pub fn project(c: &Common, p: &Coords) -> CmdResult {
    let s = load(c)?;
    print_json(&nlproj::projection::project(&s.manifold, &point(p), &s.opts)?)
}

pub fn frontier(c: &Common, r: &RaySpec) -> CmdResult {
    let s = load(c)?;
    let fo = frontier_options(c, s.opts)?;
    let ray = make_ray(&s.manifold, r.chart, &r.at.0, r.direction.as_ref())?;
    print_json(&nlproj::frontier::frontier(&s.manifold, &ray, fo.r_max, fo.tol, &fo.project)?)
}

pub fn curvature(c: &Common, r: &RaySpec) -> CmdResult {
    let s = load(c)?;
    let ray = make_ray(&s.manifold, r.chart, &r.at.0, r.direction.as_ref())?;
    print_json(&nlproj::curvature::shape_operator(&s.manifold, &ray)?)
}

pub fn dpcheck(c: &Common, p: &Coords, h: Option<f64>, eps0: Option<f64>) -> CmdResult {
    let s = load(c)?;
    print_json(&nlproj::derivative::dp_check(&s.manifold, &point(p), h, eps0, &s.opts)?)
}

/// CSV header and rows for a list of frontier estimates.
pub fn frontier_table(m: &ManifoldSpec, est: &[nlproj::frontier::FrontierEstimate]) -> (Vec<String>, Vec<Vec<String>>) {
    let d = m.ambient_dim();
    let pd = m.param_dim();
    let mut header = vec!["chart".to_string()];
    header.extend(indexed("y", pd));
    header.extend(indexed("foot", d));
    header.extend(indexed("v", d));
    header.extend(["theta_lo", "theta_hi", "unbounded"].map(String::from));
    let rows = est
        .iter()
        .map(|e| {
            let mut row = vec![e.ray.chart_index.to_string()];
            row.extend(nums(&e.ray.chart_coords));
            row.extend(nums(e.ray.foot.as_slice()));
            row.extend(nums(e.ray.direction.as_slice()));
            row.push(num(e.theta_lo));
            row.push(num(e.theta_hi));
            row.push(e.unbounded_beyond.is_some().to_string());
            row
        })
        .collect();
    (header, rows)
}

pub fn reach(c: &Common, sphere_points: usize, inner_fraction: f64) -> CmdResult {
    let s = load(c)?;
    let fo = frontier_options(c, s.opts)?;
    let spec = SamplingSpec { feet_per_axis: c.grid.unwrap_or(32), sphere_points, inner_fraction };
    let rep = nlproj::frontier::reach(&s.manifold, &spec, &fo)?;
    let (header, rows) = frontier_table(&s.manifold, &rep.samples);
    let csv = OutDir::new(&c.out).csv("reach.csv", &header, &rows)?;
    print_json(&json!({
        "manifold": s.manifold.name,
        "reach_estimate": rep.reach_estimate,
        "rays": rep.samples.len(),
        "argmin": rep.argmin.map(|i| &rep.samples[i].ray),
        "csv": csv,
    }))
}

fn manifold_polyline(m: &ManifoldSpec, n: usize) -> Result<Vec<Vec<(f64, f64)>>, CliError> {
    let mut out = Vec::new();
    for ch in m.charts() {
        let pts = ch.domain().grid(n, false);
        let mut line = Vec::with_capacity(pts.len());
        for y in pts {
            let p = ch.eval(&y)?;
            line.push((p[0], p[1]));
        }
        out.push(line);
    }
    Ok(out)
}

/// Panel over `region` with M drawn as polylines (curves) or dots (points).
pub fn base_panel(m: &ManifoldSpec, region: &Region, title: &str) -> Result<Panel, CliError> {
    let mut panel = Panel::new(title, (region.lo[0], region.hi[0]), (region.lo[1], region.hi[1]));
    if m.param_dim() == 0 {
        let pts = m.samples(1)?;
        panel = panel.scatter(&pts, "black", 3.0);
    } else if m.param_dim() == 1 {
        for line in manifold_polyline(m, 800)? {
            let clipped: Vec<(f64, f64)> = line
                .into_iter()
                .filter(|&(x, y)| x >= region.lo[0] && x <= region.hi[0] && y >= region.lo[1] && y <= region.hi[1])
                .collect();
            panel = panel.polyline(clipped, "black");
        }
    }
    Ok(panel)
}

fn point_rows(points: &[Point]) -> Vec<Vec<String>> {
    points.iter().map(|p| nums(p.as_slice())).collect()
}

pub fn skeleton(c: &Common, extension_scan: bool) -> CmdResult {
    let s = load(c)?;
    let d = s.manifold.ambient_dim();
    let region = region(c, d, None)?;
    let cloud = skeleton::skeleton_sample(&s.manifold, &region, c.grid.unwrap_or(200), extension_scan, &s.opts)?;
    let out = OutDir::new(&c.out);
    let mut header = indexed("c", d);
    header.extend(["radius", "witnesses"].map(String::from));
    let rows: Vec<Vec<String>> = cloud
        .balls
        .iter()
        .map(|b| {
            let mut r = nums(b.center.as_slice());
            r.push(num(b.radius));
            r.push(b.witness_feet.len().to_string());
            r
        })
        .collect();
    out.csv("skeleton.csv", &header, &rows)?;
    out.csv("skeleton_adjacent.csv", &indexed("x", d), &point_rows(&cloud.skeleton_adjacent))?;
    out.csv("no_nearest.csv", &indexed("x", d), &point_rows(&cloud.no_nearest_truncation))?;
    if d == 2 {
        let centers: Vec<Point> = cloud.balls.iter().map(|b| b.center.clone()).collect();
        let panel = base_panel(&s.manifold, &region, "skeleton sample")?
            .scatter(&cloud.skeleton_adjacent, "#8ab", 1.0)
            .scatter(&centers, "crimson", 1.5)
            .scatter(&cloud.no_nearest_truncation, "orange", 1.5);
        out.text("skeleton.svg", &svg(&[panel]))?;
    }
    print_json(&json!({
        "manifold": s.manifold.name,
        "balls": cloud.balls.len(),
        "skeleton_adjacent": cloud.skeleton_adjacent.len(),
        "no_nearest_truncation": cloud.no_nearest_truncation.len(),
        "resolution": cloud.resolution,
    }))
}

pub fn recover(c: &Common, query: Option<&Coords>, samples: usize) -> CmdResult {
    let s = load(c)?;
    let d = s.manifold.ambient_dim();
    let region = region(c, d, None)?;
    let n = c.grid.unwrap_or(200);
    let cloud = skeleton::skeleton_sample(&s.manifold, &region, n, false, &s.opts)?;
    let hs = skeleton::convex_hull_halfspaces(&s.manifold, samples)?;
    if let Some(q) = query {
        let q = point(q);
        if q.len() != d {
            return Err(nlproj::Error::DimensionMismatch { expected: d, got: q.len() }.into());
        }
        return print_json(&json!({
            "query": q.as_slice(),
            "in_complement": skeleton::medial_recover(&cloud, &hs, &q),
        }));
    }
    let side = n + 1;
    let h = region.spacing(n);
    let mut rows = Vec::new();
    let mut inside = 0usize;
    for idx in 0..side.pow(d as u32) {
        let mut k = idx;
        let p = DVector::from_fn(d, |i, _| {
            let v = region.lo[i] + h[i] * (k % side) as f64;
            k /= side;
            v
        });
        let r = skeleton::medial_recover(&cloud, &hs, &p);
        inside += r as usize;
        let mut row = nums(p.as_slice());
        row.push((r as u8).to_string());
        rows.push(row);
    }
    let mut header = indexed("x", d);
    header.push("in_complement".into());
    let csv = OutDir::new(&c.out).csv("recover.csv", &header, &rows)?;
    print_json(&json!({
        "manifold": s.manifold.name,
        "balls": cloud.balls.len(),
        "halfspaces": hs.halfspaces.len(),
        "hull_thickened": hs.thickened,
        "grid_points": rows.len(),
        "in_complement": inside,
        "csv": csv,
    }))
}

/// Writes the three point sets of an E(M)^c report and returns a JSON summary.
pub fn write_ecomp(
    m: &ManifoldSpec,
    region: &Region,
    rep: &skeleton::EComplementReport,
    out: &OutDir,
    boundary_name: &str,
) -> Result<serde_json::Value, CliError> {
    let d = m.ambient_dim();
    let mut header = vec!["set".to_string()];
    header.extend(indexed("x", d));
    let mut rows = Vec::new();
    for (name, pts) in [("complement", &rep.complement), ("skeleton", &rep.skeleton), ("no_nearest", &rep.no_nearest)] {
        for p in pts {
            let mut r = vec![name.to_string()];
            r.extend(nums(p.as_slice()));
            rows.push(r);
        }
    }
    out.csv("ecomp.csv", &header, &rows)?;
    out.csv(boundary_name, &indexed("x", d), &point_rows(&rep.complement))?;
    if d == 2 {
        let panel = base_panel(m, region, "complement of E(M) (blue), skeleton (red), no nearest point (orange)")?
            .scatter(&rep.complement, "#36c", 1.5)
            .scatter(&rep.skeleton, "crimson", 1.0)
            .scatter(&rep.no_nearest, "orange", 1.0);
        out.text("ecomp.svg", &svg(&[panel]))?;
    }
    Ok(json!({
        "manifold": m.name,
        "complement": rep.complement.len(),
        "skeleton": rep.skeleton.len(),
        "no_nearest": rep.no_nearest.len(),
        "gap_complement_to_sf": rep.gap_complement_to_sf,
        "gap_sf_to_complement": rep.gap_sf_to_complement,
        "resolution": rep.resolution,
        "within_two_cells": rep.within_two_cells,
    }))
}

pub fn ecomp(c: &Common) -> CmdResult {
    let s = load(c)?;
    let region = region(c, s.manifold.ambient_dim(), None)?;
    let rep = skeleton::e_complement_check(&s.manifold, &region, c.grid.unwrap_or(200), &s.opts)?;
    let summary = write_ecomp(&s.manifold, &region, &rep, &OutDir::new(&c.out), "ecomp_complement.csv")?;
    print_json(&summary)
}

pub fn theta_profile(
    c: &Common,
    chart: usize,
    from: &Coords,
    to: &Coords,
    count: usize,
    direction: Option<&Coords>,
) -> CmdResult {
    let s = load(c)?;
    let fo = frontier_options(c, s.opts)?;
    if from.0.len() != to.0.len() || count == 0 {
        return Err(CliError::Usage("--from and --to need equal lengths and --count > 0".into()));
    }
    let rays = (0..count)
        .map(|k| {
            let t = if count == 1 { 0.0 } else { k as f64 / (count - 1) as f64 };
            let y: Vec<f64> = from.0.iter().zip(&to.0).map(|(a, b)| a + t * (b - a)).collect();
            make_ray(&s.manifold, chart, &y, direction)
        })
        .collect::<Result<Vec<_>, _>>()?;
    let est = nlproj::frontier::theta_profile(&s.manifold, &rays, &fo)?;
    let (header, rows) = frontier_table(&s.manifold, &est);
    let csv = OutDir::new(&c.out).csv("theta_profile.csv", &header, &rows)?;
    let thetas: Vec<Extended> = est.iter().map(|e| e.theta()).collect();
    print_json(&json!({ "manifold": s.manifold.name, "theta": thetas, "csv": csv }))
}
