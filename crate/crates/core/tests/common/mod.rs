//! Shared fixtures for the integration suites: catalog manifolds with
//! known reach and a sampler for points of their tubular neighbourhoods.

#![allow(dead_code)]

use nalgebra::DVector;
use nlproj::manifold::{catalog, normal_frame};
use nlproj::{ManifoldSpec, NormalRay, Point};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

pub fn rng(seed: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed)
}

/// A catalog manifold with the parameter boxes feet are drawn from and its reach.
pub struct Case {
    pub name: &'static str,
    pub m: ManifoldSpec,
    /// Per chart: `(lo, hi)` per parameter axis, kept away from cut edges.
    pub feet: Vec<Vec<(f64, f64)>>,
    /// Reach of the manifold; `f64::INFINITY` for the line.
    pub reach: f64,
    /// Largest offset sampled when the reach is infinite.
    pub offset_cap: f64,
}

const TAU: f64 = std::f64::consts::TAU;

/// Every C^2 catalog entry used by the suites.
pub fn c2_cases() -> Vec<Case> {
    vec![
        Case { name: "circle", m: catalog::unit_circle(), feet: vec![vec![(0.0, TAU)]], reach: 1.0, offset_cap: 1.0 },
        Case {
            name: "sphere(2,3)",
            m: catalog::sphere(2.0, 3).unwrap(),
            feet: vec![vec![(-1.0, 1.0); 2]; 2],
            reach: 2.0,
            offset_cap: 2.0,
        },
        Case {
            name: "torus(2,0.5)",
            m: catalog::torus(2.0, 0.5).unwrap(),
            feet: vec![vec![(0.0, TAU); 2]],
            reach: 0.5,
            offset_cap: 0.5,
        },
        Case {
            name: "graph t^2",
            m: catalog::graph_curve("y0^2", -3.0, 3.0).unwrap(),
            feet: vec![vec![(-1.5, 1.5)]],
            reach: 0.5,
            offset_cap: 0.5,
        },
        Case {
            name: "half_parabola",
            m: catalog::half_parabola(5.0).unwrap(),
            feet: vec![vec![(0.5, 2.0)]],
            reach: 0.5,
            offset_cap: 0.5,
        },
        Case {
            name: "line",
            m: catalog::line(vec![0.0, 0.0, 0.0], vec![1.0, 2.0, 2.0], 10.0).unwrap(),
            feet: vec![vec![(-2.0, 2.0)]],
            reach: f64::INFINITY,
            offset_cap: 3.0,
        },
        Case {
            name: "parallel_lines",
            m: catalog::parallel_lines(1.0, 10.0).unwrap(),
            feet: vec![vec![(-3.0, 3.0)]; 2],
            reach: 1.0,
            offset_cap: 1.0,
        },
        Case {
            name: "helix",
            m: catalog::helix(1.0, 0.5, 2.0 * TAU).unwrap(),
            feet: vec![vec![(-TAU, TAU)]],
            reach: 1.25,
            offset_cap: 1.25,
        },
    ]
}

/// Random foot in one of the case's charts.
pub fn random_foot(case: &Case, rng: &mut ChaCha8Rng) -> (usize, Vec<f64>) {
    let chart = rng.gen_range(0..case.feet.len());
    let y = case.feet[chart].iter().map(|&(lo, hi)| rng.gen_range(lo..hi)).collect();
    (chart, y)
}

/// Random unit normal ray at a random foot.
pub fn random_ray(case: &Case, rng: &mut ChaCha8Rng) -> NormalRay {
    let (chart, y) = random_foot(case, rng);
    let nf = normal_frame(case.m.chart(chart).unwrap(), &y).unwrap();
    let k = nf.vectors.ncols();
    loop {
        let c = DVector::from_fn(k, |_, _| rng.gen_range(-1.0..1.0));
        if c.norm() > 0.1 {
            return NormalRay::new(&case.m, chart, &y, &nf.vectors * c).unwrap();
        }
    }
}

/// `xi + r v` with `r` uniform in `(0, fraction * reach)`, the ray and `r`.
pub fn random_tube_point(case: &Case, fraction: f64, rng: &mut ChaCha8Rng) -> (Point, NormalRay, f64) {
    let ray = random_ray(case, rng);
    let r = fraction * case.reach.min(case.offset_cap) * rng.gen_range(0.01..1.0);
    (ray.at(r), ray, r)
}
