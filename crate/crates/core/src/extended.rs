use serde::{Serialize, Serializer};
use std::fmt;

/// A nonnegative real that may be infinite.
///
/// Infinity is a separate variant so callers have to branch on it instead of
/// comparing against a float sentinel.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum Extended {
    Finite(f64),
    Unbounded,
}

impl Extended {
    /// `1/x` with `0^-1 = inf`. Negative inputs are clamped to zero first.
    pub fn recip_of_positive_part(x: f64) -> Self {
        if x > 0.0 {
            Extended::Finite(1.0 / x)
        } else {
            Extended::Unbounded
        }
    }

    pub fn finite(self) -> Option<f64> {
        match self {
            Extended::Finite(v) => Some(v),
            Extended::Unbounded => None,
        }
    }

    pub fn is_unbounded(self) -> bool {
        matches!(self, Extended::Unbounded)
    }

    /// Returns `self <= other * factor` with infinity as the top element.
    pub fn le_scaled(self, other: Extended, factor: f64) -> bool {
        match (self, other) {
            (_, Extended::Unbounded) => true,
            (Extended::Unbounded, Extended::Finite(_)) => false,
            (Extended::Finite(a), Extended::Finite(b)) => a <= b * factor,
        }
    }
}

impl fmt::Display for Extended {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Extended::Finite(v) => fmt::Display::fmt(v, f),
            Extended::Unbounded => write!(f, "inf"),
        }
    }
}

impl Serialize for Extended {
    fn serialize<S: Serializer>(&self, s: S) -> Result<S::Ok, S::Error> {
        match self {
            Extended::Finite(v) => s.serialize_f64(*v),
            Extended::Unbounded => s.serialize_str("inf"),
        }
    }
}
