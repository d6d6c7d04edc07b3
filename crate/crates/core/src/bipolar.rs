//! Closed forms for the Poisson bipolar network.

use std::f64::consts::PI;

use serde::{Deserialize, Serialize};

use crate::error::{AoiValue, Divergence, Error, Result};
use crate::numerics::{find_root_bracketed, gamma_product, sum_series, SeriesSpec};
use crate::renewal::{CondSuccessProb, ProtocolParams};

/// Transmitter density, link distance, path-loss exponent and linear SIR threshold.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct BipolarConfig {
    pub lambda: f64,
    pub r: f64,
    pub alpha: f64,
    pub theta: f64,
}

impl BipolarConfig {
    pub fn new(lambda: f64, r: f64, alpha: f64, theta: f64) -> Result<Self> {
        let c = BipolarConfig {
            lambda,
            r,
            alpha,
            theta,
        };
        c.validate()?;
        Ok(c)
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.alpha > 2.0) {
            return Err(Error::InvalidParameter(format!("alpha must exceed 2, got {}", self.alpha)));
        }
        if !(self.lambda >= 0.0 && self.r > 0.0 && self.theta > 0.0) {
            return Err(Error::InvalidParameter(format!(
                "need lambda >= 0, r > 0, theta > 0 (got {self:?})"
            )));
        }
        Ok(())
    }

    /// δ = 2/α.
    pub fn delta(&self) -> f64 {
        2.0 / self.alpha
    }
}

/// C = λπr²θ^δ Γ(1−δ)Γ(1+δ).
#[derive(Debug, Clone, Copy, PartialEq, PartialOrd, Serialize, Deserialize)]
pub struct SpatialContention(pub f64);

pub fn contention(cfg: &BipolarConfig) -> SpatialContention {
    let d = cfg.delta();
    SpatialContention(cfg.lambda * PI * cfg.r * cfg.r * cfg.theta.powf(d) * gamma_product(d))
}

/// Per-attempt success probability of the typical link for a fixed set of
/// interferer distances, averaged over fading and interferer activity.
pub fn cond_success_prob_bipolar(
    distances: &[f64],
    p: ProtocolParams,
    cfg: &BipolarConfig,
) -> Result<CondSuccessProb> {
    let beta = p.beta();
    let k = cfg.theta * cfg.r.powf(cfg.alpha);
    let mut mu = 1.0;
    for &d in distances {
        if !(d > 0.0) {
            return Err(Error::InvalidParameter(format!("interferer distance must be positive, got {d}")));
        }
        mu *= 1.0 - beta / (1.0 + d.powf(cfg.alpha) / k);
    }
    CondSuccessProb::new(mu)
}

/// E[μ] = exp(−Cβ).
pub fn mean_mu(cfg: &BipolarConfig, p: ProtocolParams) -> f64 {
    (-contention(cfg).0 * p.beta()).exp()
}

/// E[1/μ] = exp(Cβ(1−β)^{δ−1}).
pub fn mean_inv_mu(cfg: &BipolarConfig, p: ProtocolParams) -> AoiValue {
    let c = contention(cfg).0;
    let beta = p.beta();
    if c == 0.0 {
        return AoiValue::Finite(1.0);
    }
    if beta >= 1.0 {
        return AoiValue::Infinite(Divergence::FullLoad);
    }
    AoiValue::from_f64((c * beta * (1.0 - beta).powf(cfg.delta() - 1.0)).exp())
}

/// Σ_{k≥1} (k+1) binom(δ−1, k−1) (−β)^k, the exponent series of E[1/μ²] (without −C).
pub fn inv_mu_sq_series(delta: f64, beta: f64, s: &SeriesSpec) -> Result<f64> {
    // term k+1 from term k via the binomial recurrence
    let mut binom = 1.0; // binom(δ−1, k−1) at k = 1
    let mut pow = -beta;
    let r = sum_series(
        |j| {
            // j = k − 1
            let k = j + 1;
            if j > 0 {
                binom *= (delta - 1.0 - (j - 1) as f64) / j as f64;
                pow *= -beta;
            }
            (k as f64 + 1.0) * binom * pow
        },
        s,
    )?;
    if !r.converged {
        return Err(Error::DivergentSeries {
            terms: r.terms,
            partial: r.value,
            last_term: r.last_term,
        });
    }
    Ok(r.value)
}

/// Closed form of [`inv_mu_sq_series`], −2β(1−β)^{δ−1} − (1−δ)β²(1−β)^{δ−2}.
fn inv_mu_sq_closed(delta: f64, beta: f64) -> f64 {
    let q = 1.0 - beta;
    -2.0 * beta * q.powf(delta - 1.0) - (1.0 - delta) * beta * beta * q.powf(delta - 2.0)
}

/// E[1/μ²] = exp(−C Σ_{k≥1}(k+1) binom(δ−1,k−1)(−β)^k).
///
/// Near β = 1 the series needs more terms than `s` allows; the closed form
/// of its sum is used instead.
pub fn mean_inv_mu_sq(cfg: &BipolarConfig, p: ProtocolParams, s: &SeriesSpec) -> Result<AoiValue> {
    let c = contention(cfg).0;
    let beta = p.beta();
    if c == 0.0 {
        return Ok(AoiValue::Finite(1.0));
    }
    if beta >= 1.0 {
        return Ok(AoiValue::Infinite(Divergence::FullLoad));
    }
    let sum = match inv_mu_sq_series(cfg.delta(), beta, s) {
        Ok(v) => v,
        Err(Error::DivergentSeries { .. }) => inv_mu_sq_closed(cfg.delta(), beta),
        Err(e) => return Err(e),
    };
    Ok(AoiValue::from_f64((-c * sum).exp()))
}

/// Spatially averaged AoI of the typical link.
pub fn avg_aoi_bipolar(cfg: &BipolarConfig, p: ProtocolParams) -> AoiValue {
    let f = p.f();
    let eta = p.eta();
    let m = mean_mu(cfg, p);
    mean_inv_mu(cfg, p).map(|m1| f / eta * m1 + (f * f - 1.0) * eta / (12.0 * f) * m + (1.0 - f) / 2.0)
}

/// Slotted ALOHA average AoI.
pub fn avg_aoi_sa(cfg: &BipolarConfig, eta: f64) -> Result<AoiValue> {
    Ok(avg_aoi_bipolar(cfg, ProtocolParams::slotted(eta)?))
}

/// Q1 = ((F²−1)/12)β e^{−Cβ} + (1−F)/2, the gap between FSA and SA at rate β.
pub fn q1(cfg: &BipolarConfig, p: ProtocolParams) -> f64 {
    let f = p.f();
    let beta = p.beta();
    (f * f - 1.0) / 12.0 * beta * (-contention(cfg).0 * beta).exp() + (1.0 - f) / 2.0
}

/// Network-independent lower bound 2√((F²−1)/12) + (1−F)/2.
pub fn aoi_lower_bound(frame_size: u32) -> f64 {
    let f = frame_size as f64;
    2.0 * ((f * f - 1.0) / 12.0).sqrt() + (1.0 - f) / 2.0
}

/// Derivative of the average AoI with respect to a real-valued frame size.
pub fn y_of_f(cfg: &BipolarConfig, eta: f64, f: f64) -> f64 {
    let c = contention(cfg).0;
    let d = cfg.delta();
    let b = eta / f;
    let first = (1.0 / eta + c * (1.0 - b).powf(d - 2.0) / (f * f) * (eta * d - f))
        * (c * b * (1.0 - b).powf(d - 1.0)).exp();
    let second = ((f * f + 1.0) * f + (f * f - 1.0) * c * eta) / (12.0 * f * f * f) * eta * (-c * b).exp();
    first + second - 0.5
}

/// Integer frame size minimizing the average AoI, via the root of `y_of_f` on [1, f_max].
///
/// Without a sign change the AoI is monotone in F: increasing gives 1,
/// decreasing gives `f_max`.
pub fn optimal_frame(cfg: &BipolarConfig, eta: f64, f_max: u32) -> Result<u32> {
    if !(eta > 0.0 && eta <= 1.0) || f_max == 0 {
        return Err(Error::InvalidParameter(format!("need eta in (0, 1] and f_max >= 1 (got {eta}, {f_max})")));
    }
    if f_max == 1 {
        return Ok(1);
    }
    let hi = f_max as f64;
    // at eta = 1 the point F = 1 is a pole of y; step off it until y is finite
    let mut lo: f64 = 1.0;
    let mut step: f64 = 1e-9;
    while !y_of_f(cfg, eta, lo).is_finite() && lo < hi {
        lo = (1.0 + step).min(hi);
        step *= 4.0;
    }
    let (ylo, yhi) = (y_of_f(cfg, eta, lo), y_of_f(cfg, eta, hi));
    let fstar = if ylo.is_finite() && ylo > 0.0 && yhi > 0.0 {
        return Ok(1);
    } else if yhi < 0.0 && (ylo < 0.0 || ylo.is_nan()) {
        return Ok(f_max);
    } else {
        find_root_bracketed(|x| y_of_f(cfg, eta, x), lo, hi, 1e-10)?
    };
    let lo_i = (fstar.floor() as u32).max(1);
    let hi_i = (fstar.ceil() as u32).clamp(1, f_max);
    let aoi = |f: u32| -> Result<f64> { Ok(avg_aoi_bipolar(cfg, ProtocolParams::new(eta, f)?).as_f64()) };
    Ok(if aoi(hi_i)? < aoi(lo_i)? { hi_i } else { lo_i })
}

/// Expected throughput of the typical link in nats per slot: β e^{−Cβ} ln(1+θ).
pub fn spatial_throughput(cfg: &BipolarConfig, p: ProtocolParams) -> f64 {
    p.beta() * mean_mu(cfg, p) * cfg.theta.ln_1p()
}

/// Average transmit power ηP_tx/F.
pub fn tx_power(p: ProtocolParams, p_tx: f64) -> f64 {
    p.beta() * p_tx
}

/// The three deconditioned moments of 1/μ and E[μ], or the reason one is infinite.
struct Moments {
    m: f64,
    m1: f64,
    m2: f64,
}

fn moments(cfg: &BipolarConfig, p: ProtocolParams, s: &SeriesSpec) -> Result<std::result::Result<Moments, Divergence>> {
    let m = mean_mu(cfg, p);
    let m1 = match mean_inv_mu(cfg, p) {
        AoiValue::Finite(x) => x,
        AoiValue::Infinite(d) => return Ok(Err(d)),
    };
    let m2 = match mean_inv_mu_sq(cfg, p, s)? {
        AoiValue::Finite(x) => x,
        AoiValue::Infinite(d) => return Ok(Err(d)),
    };
    Ok(Ok(Moments { m, m1, m2 }))
}

/// Spatially averaged second moment of AoI.
pub fn quad_aoi_bipolar(cfg: &BipolarConfig, p: ProtocolParams, s: &SeriesSpec) -> Result<AoiValue> {
    let Moments { m, m1, m2 } = match moments(cfg, p, s)? {
        Ok(x) => x,
        Err(d) => return Ok(AoiValue::Infinite(d)),
    };
    let f = p.f();
    let eta = p.eta();
    Ok(AoiValue::from_f64(
        2.0 * f * f / (eta * eta) * m2 - f * (2.0 * f - 1.0) / eta * m1
            + (f * f - 1.0) * eta / (12.0 * f) * m
            + f * (f - 1.0) / 2.0,
    ))
}

/// Variance of AoI as E[Δ²] − E[Δ]² with both moments deconditioned.
pub fn var_aoi_bipolar(cfg: &BipolarConfig, p: ProtocolParams, s: &SeriesSpec) -> Result<AoiValue> {
    let q = quad_aoi_bipolar(cfg, p, s)?;
    let mean = avg_aoi_bipolar(cfg, p);
    Ok(match (q, mean) {
        (AoiValue::Finite(q), AoiValue::Finite(m)) => AoiValue::from_f64(q - m * m),
        (AoiValue::Infinite(d), _) | (_, AoiValue::Infinite(d)) => AoiValue::Infinite(d),
    })
}

/// Variance of AoI as seven separate exponential terms.
///
/// An independent assembly of [`var_aoi_bipolar`] used as a consistency check;
/// the constant term is (F²−1)/4.
pub fn var_aoi_bipolar_expanded(cfg: &BipolarConfig, p: ProtocolParams, s: &SeriesSpec) -> Result<AoiValue> {
    let Moments { m, m1, m2 } = match moments(cfg, p, s)? {
        Ok(x) => x,
        Err(d) => return Ok(AoiValue::Infinite(d)),
    };
    let c = contention(cfg).0;
    let (f, eta, beta, d) = (p.f(), p.eta(), p.beta(), cfg.delta());
    let mixed = (c * beta * ((1.0 - beta).powf(d - 1.0) - 1.0)).exp();
    let v = 2.0 * f * f / (eta * eta) * m2
        - f * f / (eta * eta) * m1 * m1
        - (f * f - 1.0).powi(2) * eta * eta / (144.0 * f * f) * m * m
        - (f * f - 1.0) / 6.0 * mixed
        - f * f / eta * m1
        + (f * f - 1.0) * eta / 12.0 * m
        + (f * f - 1.0) / 4.0;
    Ok(AoiValue::from_f64(v))
}

/// Slotted ALOHA variance of AoI.
pub fn var_aoi_sa(cfg: &BipolarConfig, eta: f64, s: &SeriesSpec) -> Result<AoiValue> {
    var_aoi_bipolar(cfg, ProtocolParams::slotted(eta)?, s)
}

/// Q2 = σ²_FSA − σ²_SA(β).
pub fn q2_bipolar(cfg: &BipolarConfig, p: ProtocolParams, s: &SeriesSpec) -> Result<f64> {
    let Moments { m, m1, .. } = match moments(cfg, p, s)? {
        Ok(x) => x,
        Err(d) => {
            return Err(Error::InvalidParameter(format!("Q2 undefined: variance is infinite ({d})")))
        }
    };
    let (f, beta) = (p.f(), p.beta());
    let g = f * f - 1.0;
    let a = g * beta / 12.0 * m;
    Ok(-a * a - g / 6.0 * m * m1 - (f - 1.0) / beta * m1 + g * f * beta / 12.0 * m + g / 4.0)
}
