//! Nonlinear orthogonal projection onto parametrized submanifolds of R^d.
//!
//! The crate computes the metric projection `p` and distance `delta_M`,
//! classifies points against the maximal domain of `p`, estimates the
//! frontier function and the reach, evaluates the shape operator and the
//! closed-form derivative of `p`, and samples the topological skeleton of
//! the complement.
//!
//! ```
//! use nalgebra::dvector;
//! use nlproj::frontier::{reach, FrontierOptions, SamplingSpec};
//! use nlproj::manifold::catalog;
//! use nlproj::projection::{project, ProjectOptions};
//!
//! # fn main() -> nlproj::Result<()> {
//! let torus = catalog::torus(2.0, 0.5)?;
//! let p = project(&torus, &dvector![3.0, 0.0, 0.2], &ProjectOptions::default())?;
//! assert!(p.is_unique());
//!
//! let spec = SamplingSpec { feet_per_axis: 4, ..SamplingSpec::default() };
//! let r = reach(&torus, &spec, &FrontierOptions::default())?;
//! assert!((r.reach_estimate.finite().unwrap() - 0.5).abs() < 1e-2);
//! # Ok(())
//! # }
//! ```

pub mod error;
pub mod expr;
mod extended;
pub mod manifold;
pub mod projection;
pub mod curvature;
pub mod frontier;
pub mod derivative;
pub mod skeleton;
pub mod serde_util;

pub use error::{Error, Result};
pub use extended::Extended;
pub use manifold::{ManifoldSpec, NormalRay, Point};
