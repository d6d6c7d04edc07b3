//! Special functions, quadrature, series summation and root finding.

mod quad;
mod roots;
mod series;
mod special;

pub use quad::{
    quad_2d_rect, quad_breakpoints, quad_finite, quad_half_line, quad_semi_infinite, QuadResult,
    QuadratureSpec, TailMap,
};
pub use roots::find_root_bracketed;
pub use series::{sum_series, SeriesSpec, SeriesSum};
pub use special::{gamma_fn, gamma_product, gen_binomial, ln_gamma, sin_pi, trigamma};
