//! Poisson cellular uplink with fractional power control.
//!
//! Link distances are normalized as z = (5/4)λ_d π r², which is Exp(1)
//! under the approximate link-distance law.

mod kernel;

use std::f64::consts::PI;

use serde::{Deserialize, Serialize};

use crate::error::{AoiValue, Divergence, Error, Result};
use crate::numerics::{gamma_product, ln_gamma, quad_finite, sum_series, trigamma, QuadratureSpec, SeriesSpec};
use crate::renewal::{CondSuccessProb, ProtocolParams};

pub use kernel::GThetaArgs;
use kernel::{expect_exp, kernel, PowerLaw};

/// Sensor and center densities, path loss, linear threshold and power control.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct CellularConfig {
    pub lambda_s: f64,
    pub lambda_d: f64,
    pub alpha: f64,
    pub theta: f64,
    pub epsilon: f64,
    /// p = P_max/P_tx for the capped power model.
    pub p_max_ratio: Option<f64>,
}

impl CellularConfig {
    pub fn new(lambda_s: f64, lambda_d: f64, alpha: f64, theta: f64, epsilon: f64) -> Result<Self> {
        let c = CellularConfig {
            lambda_s,
            lambda_d,
            alpha,
            theta,
            epsilon,
            p_max_ratio: None,
        };
        c.validate()?;
        Ok(c)
    }

    pub fn with_max_power(mut self, p: f64) -> Result<Self> {
        self.p_max_ratio = Some(p);
        self.validate()?;
        Ok(self)
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.alpha > 2.0) {
            return Err(Error::InvalidParameter(format!("alpha must exceed 2, got {}", self.alpha)));
        }
        if !(self.lambda_s >= 0.0 && self.lambda_d > 0.0 && self.theta > 0.0) {
            return Err(Error::InvalidParameter(format!(
                "need lambda_s >= 0, lambda_d > 0, theta > 0 (got {self:?})"
            )));
        }
        if !(0.0..=1.0).contains(&self.epsilon) {
            return Err(Error::InvalidParameter(format!("epsilon must lie in [0, 1], got {}", self.epsilon)));
        }
        if let Some(p) = self.p_max_ratio {
            if !(p > 0.0) {
                return Err(Error::InvalidParameter(format!("p_max_ratio must be positive, got {p}")));
            }
        }
        Ok(())
    }

    /// Density ratio λ_s/λ_d.
    pub fn rho(&self) -> f64 {
        self.lambda_s / self.lambda_d
    }

    pub fn delta(&self) -> f64 {
        2.0 / self.alpha
    }

    /// Ω_δ = θ^δ Γ(1−δ)Γ(1+δ).
    pub fn omega(&self) -> f64 {
        self.theta.powf(self.delta()) * gamma_product(self.delta())
    }

    /// C_ε = (5/4)λ_d π p^{δ/ε}, the normalized squared distance at which power saturates.
    pub fn c_eps(&self) -> Option<f64> {
        match self.p_max_ratio {
            Some(p) if self.epsilon > 0.0 => {
                Some(1.25 * self.lambda_d * PI * p.powf(self.delta() / self.epsilon))
            }
            _ => None,
        }
    }

    fn power_law(&self) -> PowerLaw {
        match self.c_eps() {
            Some(c_eps) => PowerLaw::Capped { c_eps },
            None => PowerLaw::Fractional,
        }
    }

    fn breaks(&self) -> Vec<f64> {
        self.c_eps().into_iter().collect()
    }

    /// At β = 1 the inverse moments diverge when the interference weight near
    /// the typical center, of order q^{−α(1−ε)/2}, is not integrable.
    fn full_load_diverges(&self, beta: f64) -> bool {
        beta >= 1.0 && self.lambda_s > 0.0 && self.alpha * (1.0 - self.epsilon) >= 2.0
    }

    fn unbounded_growth_possible(&self) -> bool {
        self.epsilon == 0.0 || self.p_max_ratio.is_some()
    }
}

/// g_θ(m, z) with the power law of `cfg` (fractional, or capped when `p_max_ratio` is set).
pub fn g_theta(m: f64, z: f64, cfg: &CellularConfig, spec: &QuadratureSpec) -> Result<f64> {
    kernel(GThetaArgs::g(m), z, cfg, cfg.power_law(), spec)
}

/// G_θ((a, b, c, d, l, ϱ), z).
pub fn big_g_theta(args: GThetaArgs, z: f64, cfg: &CellularConfig, spec: &QuadratureSpec) -> Result<f64> {
    kernel(args, z, cfg, cfg.power_law(), spec)
}

/// Per-attempt success probability of the typical link for interferers at
/// distances D_i from the typical center with own link distances R_i.
pub fn cond_success_prob_cellular(
    pairs: &[(f64, f64)],
    p: ProtocolParams,
    cfg: &CellularConfig,
    r: f64,
) -> Result<CondSuccessProb> {
    let beta = p.beta();
    let (a, e) = (cfg.alpha, cfg.epsilon);
    let signal = cfg.theta * r.powf(a * (1.0 - e));
    let mut mu = 1.0;
    for &(d, rr) in pairs {
        if !(rr > 0.0 && rr <= d) {
            return Err(Error::InvalidParameter(format!(
                "interferer link distance {rr} must lie in (0, D = {d}]"
            )));
        }
        mu *= 1.0 - beta / (1.0 + d.powf(a) / (signal * rr.powf(a * e)));
    }
    CondSuccessProb::new(mu)
}

/// E[μ] = E_z[exp(−ρβ g_θ(1, z))].
pub fn mean_mu_cellular(cfg: &CellularConfig, p: ProtocolParams, spec: &QuadratureSpec) -> Result<f64> {
    let k = cfg.rho() * p.beta();
    if k == 0.0 {
        return Ok(1.0);
    }
    let v = expect_exp(|z| Ok(-k * g_theta(1.0, z, cfg, spec)?), &cfg.breaks(), false, spec)?;
    v.finite().ok_or(Error::QuadratureFailed {
        value: f64::INFINITY,
        abs_err: f64::INFINITY,
    })
}

/// E[1/μ] = E_z[exp(ρβ g_θ(1−β, z))].
pub fn mean_inv_mu_cellular(cfg: &CellularConfig, p: ProtocolParams, spec: &QuadratureSpec) -> Result<AoiValue> {
    let beta = p.beta();
    let k = cfg.rho() * beta;
    if k == 0.0 {
        return Ok(AoiValue::Finite(1.0));
    }
    if cfg.full_load_diverges(beta) {
        return Ok(AoiValue::Infinite(Divergence::FullLoad));
    }
    expect_exp(
        |z| Ok(k * g_theta(1.0 - beta, z, cfg, spec)?),
        &cfg.breaks(),
        cfg.unbounded_growth_possible(),
        spec,
    )
}

/// E[1/μ²] = E_z[exp(ρβ G_θ((1−β, 2, 2, 1−β, 1, β), z))].
pub fn mean_inv_mu_sq_cellular(cfg: &CellularConfig, p: ProtocolParams, spec: &QuadratureSpec) -> Result<AoiValue> {
    let beta = p.beta();
    let k = cfg.rho() * beta;
    if k == 0.0 {
        return Ok(AoiValue::Finite(1.0));
    }
    if cfg.full_load_diverges(beta) {
        return Ok(AoiValue::Infinite(Divergence::FullLoad));
    }
    let args = GThetaArgs::inv_mu_sq(beta);
    expect_exp(
        |z| Ok(k * big_g_theta(args, z, cfg, spec)?),
        &cfg.breaks(),
        cfg.unbounded_growth_possible(),
        spec,
    )
}

fn assemble_mean(p: ProtocolParams, m: f64, m1: AoiValue) -> AoiValue {
    let (f, eta) = (p.f(), p.eta());
    m1.map(|m1| (f * f - 1.0) / (12.0 * f) * eta * m + f / eta * m1 + (1.0 - f) / 2.0)
}

/// Average AoI of the typical uplink.
pub fn avg_aoi_cellular(cfg: &CellularConfig, p: ProtocolParams, spec: &QuadratureSpec) -> Result<AoiValue> {
    let m1 = mean_inv_mu_cellular(cfg, p, spec)?;
    if m1.is_infinite() {
        return Ok(m1);
    }
    Ok(assemble_mean(p, mean_mu_cellular(cfg, p, spec)?, m1))
}

/// Slotted ALOHA average AoI, (1/η) E[1/μ].
pub fn avg_aoi_sa_cellular(cfg: &CellularConfig, eta: f64, spec: &QuadratureSpec) -> Result<AoiValue> {
    let p = ProtocolParams::slotted(eta)?;
    Ok(mean_inv_mu_cellular(cfg, p, spec)?.map(|m1| m1 / eta))
}

/// Q2 = ((F²−1)/12)β E[μ] + (1−F)/2, the gap between FSA and SA at rate β.
pub fn q2_cellular(cfg: &CellularConfig, p: ProtocolParams, spec: &QuadratureSpec) -> Result<f64> {
    let f = p.f();
    Ok((f * f - 1.0) / 12.0 * p.beta() * mean_mu_cellular(cfg, p, spec)? + (1.0 - f) / 2.0)
}

fn require_epsilon(cfg: &CellularConfig, eps: f64) -> Result<()> {
    if cfg.epsilon != eps {
        return Err(Error::InvalidParameter(format!(
            "this closed form needs epsilon = {eps}, got {}",
            cfg.epsilon
        )));
    }
    Ok(())
}

/// Constant transmit power, in closed form.
///
/// The effective density ratio is (4/5)λ_s/λ_d, matching the 5/4-corrected
/// link-distance law used by the general integral.
pub fn avg_aoi_no_power_control(cfg: &CellularConfig, p: ProtocolParams) -> Result<AoiValue> {
    require_epsilon(cfg, 0.0)?;
    let (f, eta, beta, d) = (p.f(), p.eta(), p.beta(), cfg.delta());
    let k = 0.8 * cfg.rho() * cfg.omega() * beta;
    let growth = if beta >= 1.0 {
        if k == 0.0 {
            0.0
        } else {
            return Ok(AoiValue::Infinite(Divergence::FullLoad));
        }
    } else {
        k * (1.0 - beta).powf(d - 1.0)
    };
    if growth >= 1.0 {
        return Ok(AoiValue::Infinite(Divergence::ContentionThreshold));
    }
    Ok(AoiValue::from_f64(
        f / eta / (1.0 - growth) + (f * f - 1.0) / (12.0 * f) * eta / (1.0 + k) + (1.0 - f) / 2.0,
    ))
}

/// g_θ at ε = 1, where it no longer depends on z:
/// (4/5) ∫_0^1 ψ′(s) θ s^{α/2} / (1 + mθ s^{α/2}) ds.
pub fn g_full_inversion(m: f64, cfg: &CellularConfig, spec: &QuadratureSpec) -> Result<f64> {
    let (theta, ha) = (cfg.theta, cfg.alpha / 2.0);
    // s = v^k removes the s^{α/2−2} endpoint behavior
    let k = (2.0 / (ha - 1.0)).clamp(1.0, 8.0);
    let r = quad_finite(
        |v| {
            if v == 0.0 {
                return 0.0;
            }
            let s = v.powf(k);
            let x = theta * s.powf(ha);
            trigamma(s) * x / (1.0 + m * x) * k * v.powf(k - 1.0)
        },
        0.0,
        1.0,
        &spec.tightened(10.0),
    )?;
    Ok(0.8 * r.require()?)
}

/// Full path inversion (ε = 1), via the one-dimensional reduction of g_θ.
pub fn avg_aoi_full_inversion(cfg: &CellularConfig, p: ProtocolParams, spec: &QuadratureSpec) -> Result<AoiValue> {
    require_epsilon(cfg, 1.0)?;
    let (f, eta, beta) = (p.f(), p.eta(), p.beta());
    let k = cfg.rho() * beta;
    let g1 = g_full_inversion(1.0, cfg, spec)?;
    let gb = g_full_inversion(1.0 - beta, cfg, spec)?;
    Ok(AoiValue::from_f64(
        (f * f - 1.0) / (12.0 * f) * eta * (-k * g1).exp() + f / eta * (k * gb).exp() + (1.0 - f) / 2.0,
    ))
}

/// E[exp(c Z^{1−ε})], Z ~ Exp(1), via Σ Γ(1+(1−ε)n)/n! cⁿ, falling back to
/// quadrature when the series diverges or cancels badly and ε > 0.
pub fn stretched_exp_moment(c: f64, eps: f64, s: &SeriesSpec, spec: &QuadratureSpec) -> Result<AoiValue> {
    if c == 0.0 {
        return Ok(AoiValue::Finite(1.0));
    }
    let w = 1.0 - eps;
    let mut largest = 0.0f64;
    let lc = c.abs().ln();
    let series = sum_series(
        |n| {
            let nf = n as f64;
            let mag = (ln_gamma(1.0 + w * nf) - ln_gamma(1.0 + nf) + nf * lc).exp();
            largest = largest.max(mag);
            if c < 0.0 && n % 2 == 1 {
                -mag
            } else {
                mag
            }
        },
        s,
    );
    match series {
        Ok(r) if r.converged && largest * 1e-15 <= 1e-3 * spec.tolerance(r.value) => {
            return Ok(AoiValue::from_f64(r.value))
        }
        Err(Error::DivergentSeries { .. }) | Ok(_) if eps == 0.0 => {
            return Ok(AoiValue::Infinite(Divergence::SeriesDivergence))
        }
        Err(Error::DivergentSeries { .. }) | Ok(_) => {}
        Err(e) => return Err(e),
    }
    expect_exp(|z| Ok(c * z.powf(w)), &[], false, spec)
}

/// Series approximation treating interferer positions as an independent marked process.
///
/// C₁ = (4/5)(λ_s/λ_d)βΩ_δΓ(1+ε) and C₂ = C₁(1−β)^{δ−1}.
pub fn avg_aoi_cellular_approx(cfg: &CellularConfig, p: ProtocolParams, s: &SeriesSpec) -> Result<AoiValue> {
    let (f, eta, beta, eps) = (p.f(), p.eta(), p.beta(), cfg.epsilon);
    let c1 = 0.8 * cfg.rho() * beta * cfg.omega() * crate::numerics::gamma_fn(1.0 + eps)?;
    let c2 = if beta >= 1.0 {
        if c1 == 0.0 {
            0.0
        } else {
            return Ok(AoiValue::Infinite(Divergence::FullLoad));
        }
    } else {
        c1 * (1.0 - beta).powf(cfg.delta() - 1.0)
    };
    let spec = QuadratureSpec::default();
    let plus = stretched_exp_moment(c2, eps, s, &spec)?;
    let minus = stretched_exp_moment(-c1, eps, s, &spec)?;
    Ok(match (plus, minus) {
        (AoiValue::Finite(a), AoiValue::Finite(b)) => {
            AoiValue::from_f64((1.0 - f) / 2.0 + (f * f - 1.0) / (12.0 * f) * eta * b + f / eta * a)
        }
        (AoiValue::Infinite(d), _) | (_, AoiValue::Infinite(d)) => AoiValue::Infinite(d),
    })
}

/// Closed-form approximation at ε = 1: the series approximation with Γ(1+ε) = 1.
pub fn avg_aoi_full_inversion_approx(cfg: &CellularConfig, p: ProtocolParams) -> Result<AoiValue> {
    require_epsilon(cfg, 1.0)?;
    let (f, eta, beta) = (p.f(), p.eta(), p.beta());
    let c1 = 0.8 * cfg.rho() * beta * cfg.omega();
    if beta >= 1.0 && c1 > 0.0 {
        return Ok(AoiValue::Infinite(Divergence::FullLoad));
    }
    let c2 = if c1 == 0.0 { 0.0 } else { c1 * (1.0 - beta).powf(cfg.delta() - 1.0) };
    Ok(AoiValue::from_f64(
        (f * f - 1.0) / (12.0 * f) * eta * (-c1).exp() + f / eta * c2.exp() + (1.0 - f) / 2.0,
    ))
}

/// Capped power P = min(R^{αε}, p), through the capped kernel.
pub fn avg_aoi_max_power(cfg: &CellularConfig, p: ProtocolParams, spec: &QuadratureSpec) -> Result<AoiValue> {
    if cfg.p_max_ratio.is_none() || cfg.epsilon == 0.0 {
        return Err(Error::InvalidParameter(
            "the maximum-power model needs p_max_ratio and epsilon > 0".into(),
        ));
    }
    avg_aoi_cellular(cfg, p, spec)
}

/// Second moment of AoI.
pub fn quad_aoi_cellular(cfg: &CellularConfig, p: ProtocolParams, spec: &QuadratureSpec) -> Result<AoiValue> {
    let m2 = mean_inv_mu_sq_cellular(cfg, p, spec)?;
    let m1 = mean_inv_mu_cellular(cfg, p, spec)?;
    let (m1, m2) = match (m1, m2) {
        (AoiValue::Finite(a), AoiValue::Finite(b)) => (a, b),
        (AoiValue::Infinite(d), _) | (_, AoiValue::Infinite(d)) => return Ok(AoiValue::Infinite(d)),
    };
    Ok(assemble_quad(p, mean_mu_cellular(cfg, p, spec)?, m1, m2))
}

/// Variance of AoI, E[Δ²] − E[Δ]².
pub fn var_aoi_cellular(cfg: &CellularConfig, p: ProtocolParams, spec: &QuadratureSpec) -> Result<AoiValue> {
    let q = quad_aoi_cellular(cfg, p, spec)?;
    if q.is_infinite() {
        return Ok(q);
    }
    let mean = avg_aoi_cellular(cfg, p, spec)?;
    Ok(match (q, mean) {
        (AoiValue::Finite(q), AoiValue::Finite(m)) => AoiValue::from_f64(q - m * m),
        (AoiValue::Infinite(d), _) | (_, AoiValue::Infinite(d)) => AoiValue::Infinite(d),
    })
}

/// Mean, second moment and variance of AoI, sharing the three moment integrals.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct CellularAoi {
    pub mean_mu: f64,
    pub mean: AoiValue,
    /// The FSA-minus-SA gap Q2 at the same effective rate.
    pub q2: f64,
    pub second_moment: AoiValue,
    pub variance: AoiValue,
}

/// All AoI statistics of the typical uplink. Equivalent to calling
/// [`avg_aoi_cellular`], [`quad_aoi_cellular`] and [`var_aoi_cellular`], at
/// about a third of the cost.
pub fn aoi_cellular(cfg: &CellularConfig, p: ProtocolParams, spec: &QuadratureSpec) -> Result<CellularAoi> {
    let m = mean_mu_cellular(cfg, p, spec)?;
    let m1 = mean_inv_mu_cellular(cfg, p, spec)?;
    let mean = assemble_mean(p, m, m1);
    let (second_moment, variance) = match (m1, mean) {
        (AoiValue::Finite(m1), AoiValue::Finite(avg)) => match mean_inv_mu_sq_cellular(cfg, p, spec)? {
            AoiValue::Finite(m2) => {
                let q = assemble_quad(p, m, m1, m2);
                (q, q.map(|q| q - avg * avg))
            }
            inf => (inf, inf),
        },
        _ => (mean, mean),
    };
    let f = p.f();
    Ok(CellularAoi {
        mean_mu: m,
        mean,
        q2: (f * f - 1.0) / 12.0 * p.beta() * m + (1.0 - f) / 2.0,
        second_moment,
        variance,
    })
}

fn assemble_quad(p: ProtocolParams, m: f64, m1: f64, m2: f64) -> AoiValue {
    let (f, eta) = (p.f(), p.eta());
    AoiValue::from_f64(
        2.0 * f * f / (eta * eta) * m2 - f * (2.0 * f - 1.0) / eta * m1
            + (f * f - 1.0) / (12.0 * f) * eta * m
            + f * (f - 1.0) / 2.0,
    )
}

/// Slotted ALOHA variance, 2E[1/μ²]/η² − E[1/μ]/η − (E[1/μ]/η)².
pub fn var_aoi_sa_cellular(cfg: &CellularConfig, eta: f64, spec: &QuadratureSpec) -> Result<AoiValue> {
    let p = ProtocolParams::slotted(eta)?;
    let m2 = mean_inv_mu_sq_cellular(cfg, p, spec)?;
    let m1 = mean_inv_mu_cellular(cfg, p, spec)?;
    Ok(match (m1, m2) {
        (AoiValue::Finite(m1), AoiValue::Finite(m2)) => {
            AoiValue::from_f64(2.0 * m2 / (eta * eta) - m1 / eta - (m1 / eta).powi(2))
        }
        (AoiValue::Infinite(d), _) | (_, AoiValue::Infinite(d)) => AoiValue::Infinite(d),
    })
}

/// Distance densities of the cellular model.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct DistancePdfs {
    pub lambda_d: f64,
}

pub fn distance_pdfs(cfg: &CellularConfig) -> DistancePdfs {
    DistancePdfs {
        lambda_d: cfg.lambda_d,
    }
}

impl DistancePdfs {
    /// Approximate density of a sensor's link distance (5/4-corrected Rayleigh).
    pub fn f_r(&self, u: f64) -> f64 {
        if u < 0.0 {
            return 0.0;
        }
        let k = 1.25 * self.lambda_d * PI;
        2.0 * k * u * (-k * u * u).exp()
    }

    /// Density of the distance from a sensor to its nearest center.
    pub fn f_x(&self, u: f64) -> f64 {
        if u < 0.0 {
            return 0.0;
        }
        let k = self.lambda_d * PI;
        2.0 * k * u * (-k * u * u).exp()
    }

    /// Link-distance density conditioned on R ≤ D.
    pub fn f_r_given(&self, u: f64, d: f64) -> f64 {
        if u < 0.0 || u > d {
            return 0.0;
        }
        let k = 1.25 * self.lambda_d * PI;
        self.f_r(u) / -(-k * d * d).exp_m1()
    }

    /// CDF of [`Self::f_r`].
    pub fn cdf_r(&self, u: f64) -> f64 {
        -(-1.25 * self.lambda_d * PI * u.max(0.0).powi(2)).exp_m1()
    }

    /// CDF of [`Self::f_x`].
    pub fn cdf_x(&self, u: f64) -> f64 {
        -(-self.lambda_d * PI * u.max(0.0).powi(2)).exp_m1()
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;

    fn cfg(eps: f64) -> CellularConfig {
        CellularConfig::new(5.0, 1.0, 3.5, 1.0, eps).unwrap()
    }

    #[test]
    fn kernel_vanishes_at_origin() {
        assert_eq!(g_theta(1.0, 0.0, &cfg(0.5), &QuadratureSpec::default()).unwrap(), 0.0);
    }

    #[test]
    fn constant_power_kernel_is_linear_in_z() {
        let c = cfg(0.0);
        let spec = QuadratureSpec::default();
        for &(m, z) in &[(1.0, 0.3), (1.0, 2.0), (0.7, 1.0), (0.4, 7.5)] {
            let expected = 0.8 * z * c.omega() * f64::powf(m, c.delta() - 1.0);
            assert_relative_eq!(g_theta(m, z, &c, &spec).unwrap(), expected, max_relative = 1e-8);
        }
    }

    #[test]
    fn full_inversion_kernel_matches_general() {
        let c = cfg(1.0);
        let spec = QuadratureSpec::default();
        for &m in &[1.0, 0.6] {
            let one_d = g_full_inversion(m, &c, &spec).unwrap();
            for &z in &[0.5, 3.0] {
                assert_relative_eq!(g_theta(m, z, &c, &spec).unwrap(), one_d, max_relative = 1e-6);
            }
        }
    }

    #[test]
    fn pdfs_integrate_to_one() {
        let d = distance_pdfs(&cfg(0.5));
        let spec = QuadratureSpec::default();
        for f in [&(|u| d.f_r(u)) as &dyn Fn(f64) -> f64, &|u| d.f_x(u)] {
            let r = crate::numerics::quad_semi_infinite(f, &spec).unwrap();
            assert_relative_eq!(r.value, 1.0, max_relative = 1e-8);
        }
        let r = quad_finite(|u| d.f_r_given(u, 0.7), 0.0, 0.7, &spec).unwrap();
        assert_relative_eq!(r.value, 1.0, max_relative = 1e-9);
    }

    #[test]
    fn association_constraint_is_checked() {
        let p = ProtocolParams::new(0.5, 2).unwrap();
        assert!(cond_success_prob_cellular(&[(1.0, 2.0)], p, &cfg(0.5), 1.0).is_err());
        let mu = cond_success_prob_cellular(&[(1.0, 1.0)], p, &cfg(0.5), 1.0).unwrap();
        assert_relative_eq!(mu.get(), 1.0 - p.beta() / 2.0, max_relative = 1e-15);
    }
}
