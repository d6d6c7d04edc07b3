use std::fmt;

use serde::{Deserialize, Serialize};
use thiserror::Error;

/// Failures that are not a legitimate mathematical answer.
#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    #[error("invalid parameter: {0}")]
    InvalidParameter(String),

    #[error("gamma function pole at x = {0}")]
    Pole(f64),

    #[error("integrand returned a non-finite value at x = {at}")]
    NonFinite { at: f64 },

    #[error("quadrature did not converge: estimate {value}, error estimate {abs_err}")]
    QuadratureFailed { value: f64, abs_err: f64 },

    #[error("series diverged after {terms} terms (partial sum {partial}, last term {last_term})")]
    DivergentSeries {
        terms: usize,
        partial: f64,
        last_term: f64,
    },

    #[error("no sign change on [{lo}, {hi}]")]
    NoRootInBracket { lo: f64, hi: f64 },
}

pub type Result<T> = std::result::Result<T, Error>;

/// Why an analytic moment is unbounded.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum Divergence {
    /// Every source transmits in every slot (eta = F), so a nearby interferer always collides.
    FullLoad,
    /// The interference exponent grows at least linearly in the outer variable.
    ContentionThreshold,
    /// The defining series does not converge.
    SeriesDivergence,
    /// The value overflows double precision.
    Overflow,
}

impl fmt::Display for Divergence {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let s = match self {
            Divergence::FullLoad => "full load",
            Divergence::ContentionThreshold => "contention threshold exceeded",
            Divergence::SeriesDivergence => "divergent series",
            Divergence::Overflow => "overflow",
        };
        f.write_str(s)
    }
}

/// An age statistic that may legitimately be infinite.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub enum AoiValue {
    Finite(f64),
    Infinite(Divergence),
}

impl AoiValue {
    /// Wraps a computed number, mapping overflow to `Infinite`.
    pub fn from_f64(x: f64) -> Self {
        if x.is_finite() {
            AoiValue::Finite(x)
        } else {
            AoiValue::Infinite(Divergence::Overflow)
        }
    }

    pub fn finite(self) -> Option<f64> {
        match self {
            AoiValue::Finite(x) => Some(x),
            AoiValue::Infinite(_) => None,
        }
    }

    pub fn is_infinite(self) -> bool {
        matches!(self, AoiValue::Infinite(_))
    }

    /// The value as `f64`, with `+inf` for the infinite case.
    pub fn as_f64(self) -> f64 {
        match self {
            AoiValue::Finite(x) => x,
            AoiValue::Infinite(_) => f64::INFINITY,
        }
    }

    pub fn map(self, f: impl FnOnce(f64) -> f64) -> Self {
        match self {
            AoiValue::Finite(x) => AoiValue::from_f64(f(x)),
            inf => inf,
        }
    }
}

impl fmt::Display for AoiValue {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            AoiValue::Finite(x) => write!(f, "{x}"),
            AoiValue::Infinite(_) => f.write_str("inf"),
        }
    }
}
