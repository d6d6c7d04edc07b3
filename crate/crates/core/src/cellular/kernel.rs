//! The interference kernels g_θ and G_θ and the outer expectation over the
//! normalized link distance z ~ Exp(1).

use std::cell::{Cell, RefCell};

use serde::{Deserialize, Serialize};

use crate::error::{AoiValue, Divergence, Error, Result};
use crate::numerics::{quad_breakpoints, quad_finite, quad_half_line, QuadratureSpec, TailMap};

use super::CellularConfig;

/// Coefficients (a, b, c, d, l, ϱ) of G_θ, whose integrand weight is
/// [c(d+T)^l + ϱ] / (a+T)^b.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct GThetaArgs {
    pub a: f64,
    pub b: f64,
    pub c: f64,
    pub d: f64,
    pub l: f64,
    pub varrho: f64,
}

impl GThetaArgs {
    pub fn new(a: f64, b: f64, c: f64, d: f64, l: f64, varrho: f64) -> Self {
        GThetaArgs {
            a,
            b,
            c,
            d,
            l,
            varrho,
        }
    }

    /// The tuple reducing G_θ to g_θ(m, ·).
    pub fn g(m: f64) -> Self {
        Self::new(m, 1.0, 1.0, 0.0, 0.0, 0.0)
    }

    /// The tuple whose G_θ, scaled by β, is the exponent of E[1/μ²].
    pub fn inv_mu_sq(beta: f64) -> Self {
        Self::new(1.0 - beta, 2.0, 2.0, 1.0 - beta, 1.0, beta)
    }

    #[inline]
    fn weight(&self, t: f64) -> f64 {
        let num = if self.l == 0.0 {
            self.c + self.varrho
        } else {
            self.c * pow(self.d + t, self.l) + self.varrho
        };
        num / pow(self.a + t, self.b)
    }
}

#[inline]
fn pow(x: f64, e: f64) -> f64 {
    if e == 1.0 {
        x
    } else if e == 2.0 {
        x * x
    } else if e == e.round() && e.abs() <= 8.0 {
        x.powi(e as i32)
    } else {
        x.powf(e)
    }
}

/// Transmit power law of the interfering sensors, in normalized units.
#[derive(Debug, Clone, Copy, PartialEq)]
pub(crate) enum PowerLaw {
    /// P = R^{αε}.
    Fractional,
    /// P = min(R^{αε}, p), with the cap expressed as C_ε = (5/4)λ_d π p^{δ/ε}.
    Capped { c_eps: f64 },
}

/// Geometry of T(q, s) = D^α P_0 r^{−α} / (θ P_i) with q = (D/r)², s = (R/D)².
#[derive(Clone, Copy)]
struct Geometry {
    theta: f64,
    half_alpha: f64,
    a_q: f64,
    b_s: f64,
    power: PowerLaw,
}

impl Geometry {
    fn new(cfg: &CellularConfig, power: PowerLaw) -> Self {
        let eps = cfg.epsilon;
        Geometry {
            theta: cfg.theta,
            half_alpha: cfg.alpha / 2.0,
            a_q: cfg.alpha * (1.0 - eps) / 2.0,
            b_s: cfg.alpha * eps / 2.0,
            power,
        }
    }

    /// The q-dependent factor of T, precomputed once per q.
    fn q_factor(&self, q: f64, z: f64) -> f64 {
        match self.power {
            PowerLaw::Fractional => q.powf(self.a_q) / self.theta,
            PowerLaw::Capped { c_eps } => q.powf(self.half_alpha) * z.min(c_eps).powf(self.b_s) / self.theta,
        }
    }

    #[inline]
    fn t(&self, qf: f64, zq: f64, s: f64) -> f64 {
        if self.b_s == 0.0 {
            return qf;
        }
        match self.power {
            PowerLaw::Fractional => qf / s.powf(self.b_s),
            PowerLaw::Capped { c_eps } => qf / (zq * s).min(c_eps).powf(self.b_s),
        }
    }
}

fn push_if_inside(points: &mut Vec<f64>, x: f64, lo: f64, hi: f64) {
    if x.is_finite() && x > lo && x < hi {
        points.push(x);
    }
}

fn sorted_points(mut pts: Vec<f64>) -> Vec<f64> {
    pts.sort_by(|a, b| a.total_cmp(b));
    pts.dedup_by(|a, b| (*a - *b).abs() <= 1e-12 * b.abs().max(1e-300));
    pts
}

/// (4/5) z² ∫_0^∞ ∫_0^1 q e^{−zqs} w(T) / (1 − e^{−zq}) ds dq.
pub(crate) fn kernel(
    args: GThetaArgs,
    z: f64,
    cfg: &CellularConfig,
    power: PowerLaw,
    spec: &QuadratureSpec,
) -> Result<f64> {
    if !(z >= 0.0) {
        return Err(Error::InvalidParameter(format!("z must be non-negative, got {z}")));
    }
    if z == 0.0 {
        return Ok(0.0);
    }
    let geo = Geometry::new(cfg, power);
    let inner_spec = spec.tightened(100.0);
    let outer_spec = spec.tightened(10.0);
    let failure: RefCell<Option<Error>> = RefCell::new(None);
    let inner_ok = Cell::new(true);

    let h = |q: f64| -> f64 {
        if failure.borrow().is_some() {
            return f64::NAN;
        }
        let zq = z * q;
        let pref = if zq < 1e-8 { 1.0 / z + q / 2.0 } else { q / -(-zq).exp_m1() };
        let qf = geo.q_factor(q, z);
        let mut pts = vec![0.0, 1.0];
        let s1 = 1.0 / zq;
        push_if_inside(&mut pts, s1, 0.0, 1.0);
        push_if_inside(&mut pts, s1 / 16.0, 0.0, 1.0);
        push_if_inside(&mut pts, 16.0 * s1, 0.0, 1.0);
        if geo.b_s > 0.0 && args.a > 0.0 {
            match geo.power {
                PowerLaw::Fractional => {
                    push_if_inside(&mut pts, (qf / args.a).powf(1.0 / geo.b_s), 0.0, 1.0)
                }
                PowerLaw::Capped { c_eps } => push_if_inside(&mut pts, c_eps / zq, 0.0, 1.0),
            }
        }
        let pts = sorted_points(pts);
        let r = quad_breakpoints(
            |s| {
                let e = (-zq * s).exp();
                if e == 0.0 {
                    0.0
                } else {
                    e * args.weight(geo.t(qf, zq, s))
                }
            },
            &pts,
            &inner_spec,
        );
        match r {
            Ok(r) => {
                if !r.converged {
                    inner_ok.set(false);
                }
                pref * r.value
            }
            Err(e) => {
                failure.borrow_mut().get_or_insert(e);
                f64::NAN
            }
        }
    };

    let mut qpts = vec![0.0];
    push_if_inside(&mut qpts, 1.0 / z, 0.0, f64::INFINITY);
    if geo.a_q > 0.0 && args.a > 0.0 {
        push_if_inside(&mut qpts, (args.a * geo.theta).powf(1.0 / geo.a_q), 0.0, f64::INFINITY);
    }
    if let PowerLaw::Capped { c_eps } = geo.power {
        push_if_inside(&mut qpts, c_eps / z, 0.0, f64::INFINITY);
    }
    qpts.push(1.0);
    let qpts = sorted_points(qpts);
    let q_tail = *qpts.last().unwrap();

    let mut h = h;
    let head = quad_breakpoints(&mut h, &qpts, &outer_spec);
    let tail = quad_half_line(
        &mut h,
        q_tail,
        TailMap::Algebraic {
            decay: geo.half_alpha,
            scale: q_tail,
        },
        &outer_spec,
    );
    if let Some(e) = failure.into_inner() {
        return Err(e);
    }
    let (head, tail) = (head?, tail?);
    let value = head.value + tail.value;
    if !(head.converged && tail.converged && inner_ok.get()) {
        return Err(Error::QuadratureFailed {
            value: 0.8 * z * z * value,
            abs_err: 0.8 * z * z * (head.abs_err + tail.abs_err),
        });
    }
    Ok(0.8 * z * z * value)
}

/// E[exp(φ(Z))] for Z ~ Exp(1), integrated over doubling panels until the tail
/// is negligible. A log-integrand that is still non-decreasing far out means
/// the expectation is infinite.
pub(crate) fn expect_exp<P: FnMut(f64) -> Result<f64>>(
    mut phi: P,
    extra_breaks: &[f64],
    linear_growth: bool,
    spec: &QuadratureSpec,
) -> Result<AoiValue> {
    let failure: RefCell<Option<Error>> = RefCell::new(None);
    let mut log_integrand = |z: f64| -> Result<f64> { Ok(-z + phi(z)?) };

    let mut edges = vec![0.0];
    let mut b = 1.0;
    while b <= 2f64.powi(52) {
        edges.push(b);
        b *= 2.0;
    }
    for &x in extra_breaks {
        push_if_inside(&mut edges, x, 0.0, 2f64.powi(52));
    }
    let edges = sorted_points(edges);
    let panel_spec = QuadratureSpec {
        abs_tol: spec.abs_tol / 16.0,
        ..*spec
    };

    let mut total = 0.0;
    let mut prev_log = log_integrand(0.0)?;
    let mut prev_z = 0.0;
    for w in edges.windows(2) {
        let (a, b) = (w[0], w[1]);
        let r = {
            let f = |z: f64| -> f64 {
                if failure.borrow().is_some() {
                    return f64::NAN;
                }
                match log_integrand(z) {
                    Ok(l) => l.exp(),
                    Err(e) => {
                        failure.borrow_mut().get_or_insert(e);
                        f64::NAN
                    }
                }
            };
            quad_finite(f, a, b, &panel_spec)
        };
        if let Some(e) = failure.borrow_mut().take() {
            return Err(e);
        }
        let r = match r {
            Err(Error::NonFinite { .. }) => return Ok(AoiValue::Infinite(overflow_cause(linear_growth))),
            other => other?,
        };
        if !r.converged {
            if !(r.abs_err.is_finite() && (total + r.value) < 1e300) {
                return Ok(AoiValue::Infinite(overflow_cause(linear_growth)));
            }
            return Err(Error::QuadratureFailed {
                value: total + r.value,
                abs_err: r.abs_err,
            });
        }
        total += r.value;
        if !total.is_finite() {
            return Ok(AoiValue::Infinite(overflow_cause(linear_growth)));
        }
        let lb = log_integrand(b)?;
        let slope = (lb - prev_log) / (b - prev_z);
        prev_log = lb;
        prev_z = b;
        if b >= 4.0 && slope < 0.0 {
            let tail = lb.exp() / slope.abs().min(1.0);
            if tail < 1e-2 * spec.tolerance(total) {
                return Ok(AoiValue::Finite(total));
            }
        }
        if b >= 4096.0 && slope >= 0.0 {
            return Ok(AoiValue::Infinite(overflow_cause(linear_growth)));
        }
    }
    Ok(AoiValue::Infinite(overflow_cause(linear_growth)))
}

fn overflow_cause(linear_growth: bool) -> Divergence {
    if linear_growth {
        Divergence::ContentionThreshold
    } else {
        Divergence::Overflow
    }
}
