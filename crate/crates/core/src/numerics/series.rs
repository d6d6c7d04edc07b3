use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Truncation contract for infinite sums.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SeriesSpec {
    pub term_tol: f64,
    pub max_terms: usize,
    /// Abort once |partial sum| exceeds this factor times the largest of the first ten partial sums.
    pub divergence_guard: f64,
}

impl Default for SeriesSpec {
    fn default() -> Self {
        SeriesSpec {
            term_tol: 1e-12,
            max_terms: 20_000,
            divergence_guard: 1e3,
        }
    }
}

impl SeriesSpec {
    pub fn validate(&self) -> Result<()> {
        if !(self.term_tol > 0.0 && self.max_terms >= 2 && self.divergence_guard > 1.0) {
            return Err(Error::InvalidParameter(format!(
                "series spec needs term_tol > 0, max_terms >= 2, divergence_guard > 1 (got {self:?})"
            )));
        }
        Ok(())
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SeriesSum {
    pub value: f64,
    pub terms: usize,
    pub last_term: f64,
    /// True when the last term fell below `term_tol`.
    pub converged: bool,
}

/// Sums `term(0) + term(1) + …` until a term drops below `term_tol`.
pub fn sum_series<F: FnMut(usize) -> f64>(mut term: F, spec: &SeriesSpec) -> Result<SeriesSum> {
    spec.validate()?;
    let mut sum = 0.0;
    let mut comp = 0.0;
    let mut reference = 0.0f64;
    let mut last = f64::NAN;
    for k in 0..spec.max_terms {
        let t = term(k);
        if !t.is_finite() {
            return Err(Error::DivergentSeries {
                terms: k,
                partial: sum,
                last_term: t,
            });
        }
        // Kahan–Babuška summation
        let s = sum + t;
        if sum.abs() >= t.abs() {
            comp += (sum - s) + t;
        } else {
            comp += (t - s) + sum;
        }
        sum = s;
        last = t;
        let partial = sum + comp;
        if k < 10 {
            reference = reference.max(partial.abs()).max(spec.term_tol);
        } else if partial.abs() > spec.divergence_guard * reference || !partial.is_finite() {
            return Err(Error::DivergentSeries {
                terms: k + 1,
                partial,
                last_term: t,
            });
        }
        if t.abs() <= spec.term_tol && k >= 1 {
            return Ok(SeriesSum {
                value: partial,
                terms: k + 1,
                last_term: t,
                converged: true,
            });
        }
    }
    Ok(SeriesSum {
        value: sum + comp,
        terms: spec.max_terms,
        last_term: last,
        converged: false,
    })
}
