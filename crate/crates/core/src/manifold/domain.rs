use serde::{Deserialize, Serialize};

/// What a face of a chart's parameter box means geometrically.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Edge {
    /// A genuine boundary of the manifold (e.g. the endpoint of a half-parabola).
    Boundary,
    /// An artificial cut of an unbounded manifold.
    Truncated,
    /// Interior of the manifold, covered by another chart.
    Seam,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Axis {
    /// Parameter wraps around; `hi - lo` is the period.
    Periodic,
    Interval { lo: Edge, hi: Edge },
}

/// Closed axis-aligned parameter box.
#[derive(Debug, Clone, PartialEq)]
pub struct Domain {
    pub lo: Vec<f64>,
    pub hi: Vec<f64>,
    pub axes: Vec<Axis>,
}

/// Relative slack when testing domain membership.
const MEMBERSHIP_SLACK: f64 = 1e-12;

impl Domain {
    pub fn new(lo: Vec<f64>, hi: Vec<f64>, axes: Vec<Axis>) -> Self {
        assert_eq!(lo.len(), hi.len());
        assert_eq!(lo.len(), axes.len());
        Domain { lo, hi, axes }
    }

    /// Box whose every face is the same kind of edge.
    pub fn uniform(lo: Vec<f64>, hi: Vec<f64>, edge: Edge) -> Self {
        let axes = vec![Axis::Interval { lo: edge, hi: edge }; lo.len()];
        Domain::new(lo, hi, axes)
    }

    pub fn periodic(lo: Vec<f64>, hi: Vec<f64>) -> Self {
        let axes = vec![Axis::Periodic; lo.len()];
        Domain::new(lo, hi, axes)
    }

    pub fn dim(&self) -> usize {
        self.lo.len()
    }

    pub fn span(&self, i: usize) -> f64 {
        self.hi[i] - self.lo[i]
    }

    pub fn is_valid(&self) -> bool {
        self.lo
            .iter()
            .zip(&self.hi)
            .all(|(l, h)| l.is_finite() && h.is_finite() && l < h)
    }

    pub fn contains(&self, y: &[f64]) -> bool {
        y.len() == self.dim()
            && (0..self.dim()).all(|i| {
                let slack = MEMBERSHIP_SLACK * (1.0 + self.span(i));
                y[i].is_finite() && y[i] >= self.lo[i] - slack && y[i] <= self.hi[i] + slack
            })
    }

    /// Wraps periodic coordinates into `[lo, hi)` and clamps the rest.
    pub fn normalize(&self, y: &mut [f64]) {
        for (i, v) in y.iter_mut().enumerate() {
            match self.axes[i] {
                Axis::Periodic => {
                    let p = self.span(i);
                    let mut w = (*v - self.lo[i]).rem_euclid(p);
                    if w >= p {
                        w = 0.0;
                    }
                    *v = self.lo[i] + w;
                }
                Axis::Interval { .. } => *v = v.clamp(self.lo[i], self.hi[i]),
            }
        }
    }

    /// The face (axis, is_hi, kind) that `y` sits on, if any; periodic axes have none.
    pub fn active_faces(&self, y: &[f64]) -> Vec<(usize, bool, Edge)> {
        let mut out = Vec::new();
        for i in 0..self.dim() {
            if let Axis::Interval { lo, hi } = self.axes[i] {
                let tol = MEMBERSHIP_SLACK * (1.0 + self.span(i));
                if y[i] <= self.lo[i] + tol {
                    out.push((i, false, lo));
                } else if y[i] >= self.hi[i] - tol {
                    out.push((i, true, hi));
                }
            }
        }
        out
    }

    pub fn has_truncation(&self) -> bool {
        self.axes.iter().any(|a| {
            matches!(a, Axis::Interval { lo, hi } if *lo == Edge::Truncated || *hi == Edge::Truncated)
        })
    }

    /// Tensor grid with `n` nodes per axis. Periodic axes skip the duplicate
    /// endpoint; with `cell_centered` closed axes use cell midpoints.
    pub fn grid(&self, n: usize, cell_centered: bool) -> Vec<Vec<f64>> {
        let m = self.dim();
        let coords: Vec<Vec<f64>> = (0..m)
            .map(|i| {
                let (lo, span) = (self.lo[i], self.span(i));
                match self.axes[i] {
                    Axis::Periodic => (0..n).map(|k| lo + span * k as f64 / n as f64).collect(),
                    Axis::Interval { .. } if cell_centered || n == 1 => (0..n)
                        .map(|k| lo + span * (k as f64 + 0.5) / n as f64)
                        .collect(),
                    Axis::Interval { .. } => (0..n)
                        .map(|k| lo + span * k as f64 / (n - 1) as f64)
                        .collect(),
                }
            })
            .collect();
        let total = n.pow(m as u32);
        (0..total)
            .map(|mut idx| {
                let mut y = vec![0.0; m];
                for (i, c) in coords.iter().enumerate() {
                    y[i] = c[idx % n];
                    idx /= n;
                }
                y
            })
            .collect()
    }
}
