//! JSON manifold manifests.
//!
//! ```json
//! {"name": "circle", "ambient_dim": 2, "param_dim": 1,
//!  "charts": [{"kind": "builtin", "payload": {"key": "unit_circle"}}]}
//! ```
//!
//! Builtin payloads are `{"key": <catalog key>, "params": {...}}` and may
//! expand to several charts; an explicit `domain` replaces the catalog box
//! of every chart they produce. Expression payloads are
//! `{"components": ["expr for x1", ...]}` in parameters `y0..y{m-1}` and
//! require a domain.

use super::{catalog, Axis, Chart, DerivativeMode, Domain, Edge, ManifoldSpec};
use crate::error::{Error, Result};
use crate::expr::parse_with_params;
use serde::{Deserialize, Serialize};
use std::path::Path;

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct Manifest {
    pub name: String,
    pub ambient_dim: usize,
    pub param_dim: usize,
    pub charts: Vec<ChartEntry>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub smoothness: Option<u32>,
    /// Overrides for the projection dedupe tolerances (relative to 1 + |x|).
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub tolerances: Option<ToleranceOverrides>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub derivatives: Option<DerivativeSetting>,
}

#[derive(Debug, Clone, Copy, Serialize, Deserialize, PartialEq)]
pub struct ToleranceOverrides {
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub tol_sep: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub tol_dist: Option<f64>,
}

#[derive(Debug, Clone, Copy, Serialize, Deserialize, PartialEq, Eq)]
#[serde(rename_all = "kebab-case")]
pub enum DerivativeSetting {
    Analytic,
    FiniteDifference,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct ChartEntry {
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub domain: Option<DomainEntry>,
    pub kind: ChartKind,
    pub payload: serde_json::Value,
}

#[derive(Debug, Clone, Copy, Serialize, Deserialize, PartialEq, Eq)]
#[serde(rename_all = "lowercase")]
pub enum ChartKind {
    Builtin,
    Expression,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct DomainEntry {
    pub lo: Vec<f64>,
    pub hi: Vec<f64>,
    /// Per-axis periodicity; default all false.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub periodic: Option<Vec<bool>>,
    /// Per-axis `[lo_edge, hi_edge]`; default truncated.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub edges: Option<Vec<[Edge; 2]>>,
}

impl DomainEntry {
    fn to_domain(&self) -> Result<Domain> {
        let m = self.lo.len();
        if self.hi.len() != m {
            return Err(Error::Manifest("domain lo/hi lengths differ".into()));
        }
        let periodic = self.periodic.clone().unwrap_or_else(|| vec![false; m]);
        let edges = self
            .edges
            .clone()
            .unwrap_or_else(|| vec![[Edge::Truncated, Edge::Truncated]; m]);
        if periodic.len() != m || edges.len() != m {
            return Err(Error::Manifest("domain periodic/edges lengths differ from lo".into()));
        }
        let axes = (0..m)
            .map(|i| {
                if periodic[i] {
                    Axis::Periodic
                } else {
                    Axis::Interval { lo: edges[i][0], hi: edges[i][1] }
                }
            })
            .collect();
        Ok(Domain::new(self.lo.clone(), self.hi.clone(), axes))
    }
}

#[derive(Debug, Deserialize)]
struct BuiltinPayload {
    key: String,
    #[serde(default)]
    params: serde_json::Value,
}

#[derive(Debug, Deserialize)]
struct ExpressionPayload {
    components: Vec<String>,
}

impl Manifest {
    pub fn from_json(text: &str) -> Result<Self> {
        serde_json::from_str(text).map_err(|e| Error::Manifest(e.to_string()))
    }

    pub fn load(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path)
            .map_err(|e| Error::Manifest(format!("{}: {e}", path.display())))?;
        Manifest::from_json(&text)
    }

    /// Manifest consisting of one catalog entry.
    pub fn builtin(name: &str, key: &str, params: serde_json::Value) -> Result<Self> {
        let spec = catalog::by_key(key, &params)?;
        Ok(Manifest {
            name: name.into(),
            ambient_dim: spec.ambient_dim(),
            param_dim: spec.param_dim(),
            charts: vec![ChartEntry {
                domain: None,
                kind: ChartKind::Builtin,
                payload: serde_json::json!({"key": key, "params": params}),
            }],
            smoothness: None,
            tolerances: None,
            derivatives: None,
        })
    }

    pub fn build(&self) -> Result<ManifoldSpec> {
        let mode = match self.derivatives {
            Some(DerivativeSetting::FiniteDifference) => DerivativeMode::FiniteDifference,
            _ => DerivativeMode::Analytic,
        };
        let mut charts = Vec::new();
        let mut smooth = u32::MAX;
        for (i, entry) in self.charts.iter().enumerate() {
            let ctx = |e: Error| Error::Manifest(format!("chart {i}: {e}"));
            match entry.kind {
                ChartKind::Builtin => {
                    let p: BuiltinPayload =
                        serde_json::from_value(entry.payload.clone()).map_err(|e| Error::Manifest(format!("chart {i}: {e}")))?;
                    let params = if p.params.is_null() { serde_json::json!({}) } else { p.params };
                    let spec = catalog::by_key(&p.key, &params).map_err(ctx)?;
                    smooth = smooth.min(spec.smoothness_claim);
                    for c in spec.charts() {
                        let c = match &entry.domain {
                            Some(d) => Chart::builtin(
                                match c.map() {
                                    super::ChartMap::Builtin(b) => b.clone(),
                                    super::ChartMap::Expr(_) => unreachable!(),
                                },
                                d.to_domain()?,
                            )
                            .map_err(ctx)?,
                            None => c.clone(),
                        };
                        charts.push(c.with_mode(mode));
                    }
                }
                ChartKind::Expression => {
                    let p: ExpressionPayload =
                        serde_json::from_value(entry.payload.clone()).map_err(|e| Error::Manifest(format!("chart {i}: {e}")))?;
                    let domain = entry
                        .domain
                        .as_ref()
                        .ok_or_else(|| Error::Manifest(format!("chart {i}: expression charts need a domain")))?
                        .to_domain()?;
                    let comps = p
                        .components
                        .iter()
                        .map(|s| parse_with_params(s, self.param_dim))
                        .collect::<Result<Vec<_>>>()
                        .map_err(ctx)?;
                    charts.push(Chart::expression(comps, domain).map_err(ctx)?.with_mode(mode));
                }
            }
        }
        let spec = ManifoldSpec::new(self.name.clone(), charts, self.smoothness.unwrap_or(smooth.min(1000)))?;
        if spec.ambient_dim() != self.ambient_dim || spec.param_dim() != self.param_dim {
            return Err(Error::Manifest(format!(
                "declared dimensions ({}, {}) do not match charts ({}, {})",
                self.param_dim,
                self.ambient_dim,
                spec.param_dim(),
                spec.ambient_dim()
            )));
        }
        Ok(spec)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn builtin_circle_manifest() {
        let text = r#"{"name": "circle", "ambient_dim": 2, "param_dim": 1,
            "charts": [{"kind": "builtin", "payload": {"key": "unit_circle"}}]}"#;
        let m = Manifest::from_json(text).unwrap().build().unwrap();
        assert_eq!(m.charts().len(), 1);
        assert!((m.point(0, &[0.0]).unwrap()[0] - 1.0).abs() < 1e-15);
    }

    #[test]
    fn expression_manifest_with_edges() {
        let text = r#"{"name": "para", "ambient_dim": 2, "param_dim": 1,
            "charts": [{"kind": "expression",
                        "domain": {"lo": [0.0], "hi": [2.0], "edges": [["boundary", "truncated"]]},
                        "payload": {"components": ["y0", "y0^2"]}}],
            "tolerances": {"tol_sep": 1e-4}}"#;
        let mf = Manifest::from_json(text).unwrap();
        assert_eq!(mf.tolerances.unwrap().tol_sep, Some(1e-4));
        let m = mf.build().unwrap();
        assert_eq!(
            m.charts()[0].domain().axes[0],
            Axis::Interval { lo: Edge::Boundary, hi: Edge::Truncated }
        );
    }

    #[test]
    fn dimension_mismatch_is_reported() {
        let text = r#"{"name": "bad", "ambient_dim": 3, "param_dim": 1,
            "charts": [{"kind": "builtin", "payload": {"key": "unit_circle"}}]}"#;
        assert!(matches!(Manifest::from_json(text).unwrap().build(), Err(Error::Manifest(_))));
    }

    #[test]
    fn expression_chart_requires_domain() {
        let text = r#"{"name": "bad", "ambient_dim": 2, "param_dim": 1,
            "charts": [{"kind": "expression", "payload": {"components": ["y0", "y0"]}}]}"#;
        assert!(Manifest::from_json(text).unwrap().build().is_err());
    }

    #[test]
    fn round_trip_builtin_helper() {
        let mf = Manifest::builtin("t", "torus", serde_json::json!({"major": 2.0, "minor": 0.5})).unwrap();
        let text = serde_json::to_string(&mf).unwrap();
        let back = Manifest::from_json(&text).unwrap().build().unwrap();
        assert_eq!(back.param_dim(), 2);
    }
}
