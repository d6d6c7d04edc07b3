//! Adaptive Gauss–Kronrod quadrature (7/15 points) with global error control.

use std::cmp::Ordering;
use std::collections::BinaryHeap;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

const XGK: [f64; 8] = [
    0.991_455_371_120_812_639_206_854_697_526_329,
    0.949_107_912_342_758_524_526_189_684_047_851,
    0.864_864_423_359_769_072_789_712_788_640_926,
    0.741_531_185_599_394_439_863_864_773_280_788,
    0.586_087_235_467_691_130_294_144_845_693_013,
    0.405_845_151_377_397_166_906_606_412_076_961,
    0.207_784_955_007_898_467_600_689_403_773_245,
    0.0,
];
const WGK: [f64; 8] = [
    0.022_935_322_010_529_224_963_732_008_058_970,
    0.063_092_092_629_978_553_290_700_663_189_204,
    0.104_790_010_322_250_183_839_876_322_541_518,
    0.140_653_259_715_525_918_745_189_590_510_238,
    0.169_004_726_639_267_902_826_583_426_598_550,
    0.190_350_578_064_785_409_913_256_402_421_014,
    0.204_432_940_075_298_892_414_161_999_234_649,
    0.209_482_141_084_727_828_012_999_174_891_714,
];
const WG: [f64; 4] = [
    0.129_484_966_168_869_693_270_611_432_679_082,
    0.279_705_391_489_276_667_901_467_771_423_780,
    0.381_830_050_505_118_944_950_369_775_488_975,
    0.417_959_183_673_469_387_755_102_040_816_327,
];

/// Tolerance contract shared by every integral in the crate.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct QuadratureSpec {
    pub abs_tol: f64,
    pub rel_tol: f64,
    pub max_subdivisions: usize,
}

impl Default for QuadratureSpec {
    fn default() -> Self {
        QuadratureSpec {
            abs_tol: 1e-9,
            rel_tol: 1e-7,
            max_subdivisions: 1000,
        }
    }
}

impl QuadratureSpec {
    pub fn new(abs_tol: f64, rel_tol: f64, max_subdivisions: usize) -> Result<Self> {
        let s = QuadratureSpec {
            abs_tol,
            rel_tol,
            max_subdivisions,
        };
        s.validate()?;
        Ok(s)
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.abs_tol > 0.0 && self.rel_tol > 0.0 && self.max_subdivisions >= 1) {
            return Err(Error::InvalidParameter(format!(
                "quadrature spec needs abs_tol > 0, rel_tol > 0, max_subdivisions >= 1 (got {self:?})"
            )));
        }
        Ok(())
    }

    /// The admissible error for a result of the given size.
    pub fn tolerance(&self, value: f64) -> f64 {
        self.abs_tol.max(self.rel_tol * value.abs())
    }

    /// A spec with both tolerances divided by `factor`.
    pub fn tightened(&self, factor: f64) -> Self {
        QuadratureSpec {
            abs_tol: self.abs_tol / factor,
            rel_tol: self.rel_tol / factor,
            max_subdivisions: self.max_subdivisions,
        }
    }
}

/// Result of an adaptive integration.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct QuadResult {
    pub value: f64,
    pub abs_err: f64,
    pub evaluations: usize,
    /// False when the subdivision budget ran out before the tolerance was met.
    pub converged: bool,
}

impl QuadResult {
    /// Turns a non-converged result into an error.
    pub fn require(self) -> Result<f64> {
        if self.converged {
            Ok(self.value)
        } else {
            Err(Error::QuadratureFailed {
                value: self.value,
                abs_err: self.abs_err,
            })
        }
    }
}

struct Segment {
    a: f64,
    b: f64,
    value: f64,
    err: f64,
}

impl PartialEq for Segment {
    fn eq(&self, other: &Self) -> bool {
        self.err.total_cmp(&other.err) == Ordering::Equal
    }
}
impl Eq for Segment {}
impl PartialOrd for Segment {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}
impl Ord for Segment {
    fn cmp(&self, other: &Self) -> Ordering {
        self.err.total_cmp(&other.err)
    }
}

fn eval<F: FnMut(f64) -> f64>(f: &mut F, x: f64) -> Result<f64> {
    let y = f(x);
    if y.is_finite() {
        Ok(y)
    } else {
        Err(Error::NonFinite { at: x })
    }
}

fn gk15<F: FnMut(f64) -> f64>(f: &mut F, a: f64, b: f64) -> Result<(f64, f64)> {
    let c = 0.5 * (a + b);
    let h = 0.5 * (b - a);
    let fc = eval(f, c)?;
    let mut resk = fc * WGK[7];
    let mut resg = fc * WG[3];
    let mut resabs = resk.abs();
    let mut fv1 = [0.0; 7];
    let mut fv2 = [0.0; 7];
    for j in 0..7 {
        let dx = h * XGK[j];
        let f1 = eval(f, c - dx)?;
        let f2 = eval(f, c + dx)?;
        fv1[j] = f1;
        fv2[j] = f2;
        resk += WGK[j] * (f1 + f2);
        resabs += WGK[j] * (f1.abs() + f2.abs());
        if j % 2 == 1 {
            resg += WG[j / 2] * (f1 + f2);
        }
    }
    let mean = resk * 0.5;
    let mut resasc = WGK[7] * (fc - mean).abs();
    for j in 0..7 {
        resasc += WGK[j] * ((fv1[j] - mean).abs() + (fv2[j] - mean).abs());
    }
    let value = resk * h;
    let resabs = resabs * h.abs();
    let resasc = resasc * h.abs();
    let mut err = ((resk - resg) * h).abs();
    if resasc != 0.0 && err != 0.0 {
        err = resasc * (200.0 * err / resasc).powf(1.5).min(1.0);
    }
    if resabs > f64::MIN_POSITIVE / (50.0 * f64::EPSILON) {
        err = err.max(50.0 * f64::EPSILON * resabs);
    }
    Ok((value, err))
}

/// Integrates `f` over the consecutive panels defined by `points` (sorted, at least two).
pub fn quad_breakpoints<F: FnMut(f64) -> f64>(
    mut f: F,
    points: &[f64],
    spec: &QuadratureSpec,
) -> Result<QuadResult> {
    spec.validate()?;
    if points.len() < 2 {
        return Err(Error::InvalidParameter("need at least two breakpoints".into()));
    }
    let mut heap = BinaryHeap::new();
    let mut total = 0.0;
    let mut total_err = 0.0;
    let mut evaluations = 0;
    for w in points.windows(2) {
        let (a, b) = (w[0], w[1]);
        if b <= a {
            continue;
        }
        let (value, err) = gk15(&mut f, a, b)?;
        evaluations += 15;
        total += value;
        total_err += err;
        heap.push(Segment { a, b, value, err });
    }
    let mut splits = 0;
    while total_err > spec.tolerance(total) {
        if splits >= spec.max_subdivisions {
            return Ok(QuadResult {
                value: total,
                abs_err: total_err,
                evaluations,
                converged: false,
            });
        }
        let Some(seg) = heap.pop() else { break };
        let mid = 0.5 * (seg.a + seg.b);
        if mid <= seg.a || mid >= seg.b {
            // interval can no longer be split in double precision
            heap.push(seg);
            return Ok(QuadResult {
                value: total,
                abs_err: total_err,
                evaluations,
                converged: false,
            });
        }
        let (v1, e1) = gk15(&mut f, seg.a, mid)?;
        let (v2, e2) = gk15(&mut f, mid, seg.b)?;
        evaluations += 30;
        splits += 1;
        total += v1 + v2 - seg.value;
        total_err += e1 + e2 - seg.err;
        heap.push(Segment {
            a: seg.a,
            b: mid,
            value: v1,
            err: e1,
        });
        heap.push(Segment {
            a: mid,
            b: seg.b,
            value: v2,
            err: e2,
        });
        // refresh sums to avoid drift from repeated cancellation
        if splits % 64 == 0 {
            total = heap.iter().map(|s| s.value).sum();
            total_err = heap.iter().map(|s| s.err).sum();
        }
    }
    let total: f64 = heap.iter().map(|s| s.value).sum();
    let total_err: f64 = heap.iter().map(|s| s.err).sum();
    Ok(QuadResult {
        value: total,
        abs_err: total_err,
        evaluations,
        converged: total_err <= spec.tolerance(total),
    })
}

/// ∫_a^b f.
pub fn quad_finite<F: FnMut(f64) -> f64>(
    f: F,
    a: f64,
    b: f64,
    spec: &QuadratureSpec,
) -> Result<QuadResult> {
    quad_breakpoints(f, &[a, b], spec)
}

/// How `[a, ∞)` is folded onto `[0, 1)`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum TailMap {
    /// x = a − ln(1−t)/rate, suited to integrands dominated by e^{−rate·x}.
    Exponential { rate: f64 },
    /// x = a + scale·(t/(1−t))^k with k picked so an x^{−decay} tail becomes
    /// smooth at t = 1. Requires decay > 1.
    Algebraic { decay: f64, scale: f64 },
}

/// ∫_a^∞ f under the given change of variables.
pub fn quad_half_line<F: FnMut(f64) -> f64>(
    mut f: F,
    a: f64,
    map: TailMap,
    spec: &QuadratureSpec,
) -> Result<QuadResult> {
    match map {
        TailMap::Exponential { rate } => {
            if !(rate > 0.0) {
                return Err(Error::InvalidParameter("tail rate must be positive".into()));
            }
            quad_finite(
                |t| {
                    let om = 1.0 - t;
                    if om <= 0.0 {
                        return 0.0;
                    }
                    let x = a - (-t).ln_1p() / rate;
                    let y = f(x);
                    if y == 0.0 {
                        0.0
                    } else {
                        y / (rate * om)
                    }
                },
                0.0,
                1.0,
                spec,
            )
        }
        TailMap::Algebraic { decay, scale } => {
            if !(decay > 1.0 && scale > 0.0) {
                return Err(Error::InvalidParameter(
                    "algebraic tail needs decay > 1 and scale > 0".into(),
                ));
            }
            let k = (2.0 / (decay - 1.0)).clamp(1.0, 6.0);
            quad_finite(
                |t| {
                    let om = 1.0 - t;
                    if om <= 0.0 {
                        return 0.0;
                    }
                    let u = t / om;
                    let x = a + scale * u.powf(k);
                    let y = f(x);
                    if y == 0.0 {
                        0.0
                    } else {
                        // dx/dt = scale k u^{k−1} / (1−t)²
                        y * scale * k * u.powf(k - 1.0) / (om * om)
                    }
                },
                0.0,
                1.0,
                spec,
            )
        }
    }
}

/// ∫_0^∞ f via z = −ln(1−t), dz = dt/(1−t).
pub fn quad_semi_infinite<F: FnMut(f64) -> f64>(f: F, spec: &QuadratureSpec) -> Result<QuadResult> {
    quad_half_line(f, 0.0, TailMap::Exponential { rate: 1.0 }, spec)
}

/// ∫_0^∞ ∫_0^1 f(q, s) ds dq by iterated quadrature.
///
/// The inner integral runs at a tolerance 100× tighter than the outer one.
/// The result is flagged non-converged if any inner integral failed.
pub fn quad_2d_rect<F: FnMut(f64, f64) -> f64>(
    mut f: F,
    spec: &QuadratureSpec,
) -> Result<QuadResult> {
    let inner = spec.tightened(100.0);
    let mut all_inner_ok = true;
    let mut inner_error: Option<Error> = None;
    let mut evals = 0;
    let outer = quad_semi_infinite(
        |q| match quad_finite(|s| f(q, s), 0.0, 1.0, &inner) {
            Ok(r) => {
                all_inner_ok &= r.converged;
                evals += r.evaluations;
                r.value
            }
            Err(e) => {
                inner_error.get_or_insert(e);
                f64::NAN
            }
        },
        spec,
    );
    if let Some(e) = inner_error {
        return Err(e);
    }
    let mut r = outer?;
    r.converged &= all_inner_ok;
    r.evaluations += evals;
    Ok(r)
}
