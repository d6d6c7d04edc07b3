//! Conditional AoI moments of the frame-slotted renewal process, and a
//! slot-level Monte Carlo of the same process.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Per-frame update probability η and frame size F.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ProtocolParams {
    eta: f64,
    frame_size: u32,
}

impl ProtocolParams {
    pub fn new(eta: f64, frame_size: u32) -> Result<Self> {
        if !(eta > 0.0 && eta <= 1.0) {
            return Err(Error::InvalidParameter(format!("eta must lie in (0, 1], got {eta}")));
        }
        if frame_size == 0 {
            return Err(Error::InvalidParameter("frame size must be at least 1".into()));
        }
        Ok(ProtocolParams { eta, frame_size })
    }

    /// Slotted ALOHA with per-slot probability `eta`.
    pub fn slotted(eta: f64) -> Result<Self> {
        Self::new(eta, 1)
    }

    pub fn eta(&self) -> f64 {
        self.eta
    }

    pub fn frame_size(&self) -> u32 {
        self.frame_size
    }

    pub fn f(&self) -> f64 {
        self.frame_size as f64
    }

    /// Effective per-slot transmission probability β = η/F.
    pub fn beta(&self) -> f64 {
        self.eta / self.f()
    }
}

/// Per-attempt delivery probability of the typical link given the topology.
#[derive(Debug, Clone, Copy, PartialEq, PartialOrd, Serialize, Deserialize)]
pub struct CondSuccessProb(f64);

impl CondSuccessProb {
    pub fn new(mu: f64) -> Result<Self> {
        if !(mu > 0.0 && mu <= 1.0) {
            return Err(Error::InvalidParameter(format!("mu must lie in (0, 1], got {mu}")));
        }
        Ok(CondSuccessProb(mu))
    }

    pub fn get(self) -> f64 {
        self.0
    }
}

/// Mean, second moment and variance of AoI, in slots.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct AoiStats {
    pub mean: f64,
    pub second_moment: f64,
    pub variance: f64,
    /// 95% half-width of the mean (simulation only).
    pub ci_halfwidth_mean: Option<f64>,
    /// 95% half-width of the variance (simulation only).
    pub ci_halfwidth_variance: Option<f64>,
    /// Slots, or realizations for spatial estimates (simulation only).
    pub sample_count: Option<u64>,
    /// Fewer than 100 deliveries were observed.
    pub low_sample: bool,
}

impl AoiStats {
    pub fn exact(mean: f64, second_moment: f64) -> Self {
        AoiStats {
            mean,
            second_moment,
            variance: second_moment - mean * mean,
            ci_halfwidth_mean: None,
            ci_halfwidth_variance: None,
            sample_count: None,
            low_sample: false,
        }
    }
}

/// Time-average AoI given μ.
pub fn cond_avg_aoi(p: ProtocolParams, mu: CondSuccessProb) -> f64 {
    let f = p.f();
    let x = p.eta() * mu.get();
    (f * f - 1.0) / (12.0 * f) * x + f / x + (1.0 - f) / 2.0
}

/// Time-average squared AoI given μ.
pub fn cond_quad_aoi(p: ProtocolParams, mu: CondSuccessProb) -> f64 {
    let f = p.f();
    let x = p.eta() * mu.get();
    2.0 * f * f / (x * x) - f * (2.0 * f - 1.0) / x + (f * f - 1.0) / (12.0 * f) * x
        + f * (f - 1.0) / 2.0
}

/// Variance of AoI given μ.
pub fn cond_var_aoi(p: ProtocolParams, mu: CondSuccessProb) -> f64 {
    let m = cond_avg_aoi(p, mu);
    (cond_quad_aoi(p, mu) - m * m).max(0.0)
}

/// First three raw moments of the geometric law on {1, 2, …}.
pub fn geometric_moments(p_succ: f64) -> (f64, f64, f64) {
    let p = p_succ;
    (1.0 / p, (2.0 - p) / (p * p), (p * p - 6.0 * p + 6.0) / (p * p * p))
}

/// Output of [`simulate_renewal`].
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct RenewalRun {
    pub stats: AoiStats,
    /// Deliveries inside the measurement window.
    pub successes: u64,
    /// Mean slots between consecutive deliveries inside the window.
    pub mean_interval: f64,
}

const BURN_IN_SUCCESSES: u64 = 100;
const BATCHES: usize = 100;

/// Slot-by-slot simulation of one link with a fixed μ.
///
/// Each frame the source wakes with probability η, picks a slot uniformly,
/// and the update is delivered with probability μ. AoI starts at 1, grows
/// by one per slot and equals 1 in the slot after a delivery. The first 100
/// deliveries are discarded, then `num_slots` slots are averaged.
pub fn simulate_renewal(
    p: ProtocolParams,
    mu: CondSuccessProb,
    num_slots: u64,
    seed: u64,
) -> Result<RenewalRun> {
    let f = p.frame_size() as u64;
    let min_slots = (10.0 * p.f() / (p.eta() * mu.get())).ceil() as u64;
    if num_slots < min_slots.max(BATCHES as u64) {
        return Err(Error::InvalidParameter(format!(
            "num_slots = {num_slots} is below the minimum {}",
            min_slots.max(BATCHES as u64)
        )));
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let (eta, mu) = (p.eta(), mu.get());

    let mut age: u64 = 1;
    let mut burned = 0u64;
    // burn-in, frame by frame
    while burned < BURN_IN_SUCCESSES {
        if rng.random::<f64>() < eta {
            let slot = rng.random_range(0..f);
            let ok = rng.random::<f64>() < mu;
            if ok {
                burned += 1;
                age = f - slot; // slot after delivery has age 1
            } else {
                age += f;
            }
        } else {
            age += f;
        }
    }

    let batch_len = num_slots / BATCHES as u64;
    let measured = batch_len * BATCHES as u64;
    let mut batch_sum = [0.0f64; BATCHES];
    let mut batch_sq = [0.0f64; BATCHES];
    let mut t: u64 = 0;
    let mut successes = 0u64;
    let mut last_success: Option<u64> = None;
    let mut interval_sum = 0u64;
    let mut interval_count = 0u64;
    while t < measured {
        let tx_slot = if rng.random::<f64>() < eta {
            let s = rng.random_range(0..f);
            let ok = rng.random::<f64>() < mu;
            ok.then_some(s)
        } else {
            None
        };
        for s in 0..f {
            if t >= measured {
                break;
            }
            let b = (t / batch_len) as usize;
            let a = age as f64;
            batch_sum[b] += a;
            batch_sq[b] += a * a;
            if tx_slot == Some(s) {
                successes += 1;
                if let Some(prev) = last_success {
                    interval_sum += t - prev;
                    interval_count += 1;
                }
                last_success = Some(t);
                age = 1;
            } else {
                age += 1;
            }
            t += 1;
        }
    }

    let n = batch_len as f64;
    let means: Vec<f64> = batch_sum.iter().map(|s| s / n).collect();
    let sqs: Vec<f64> = batch_sq.iter().map(|s| s / n).collect();
    let mean = means.iter().sum::<f64>() / BATCHES as f64;
    let second = sqs.iter().sum::<f64>() / BATCHES as f64;
    let vars: Vec<f64> = means.iter().zip(&sqs).map(|(m, q)| q - m * m).collect();
    let stats = AoiStats {
        mean,
        second_moment: second,
        variance: second - mean * mean,
        ci_halfwidth_mean: Some(ci_halfwidth(&means)),
        ci_halfwidth_variance: Some(ci_halfwidth(&vars)),
        sample_count: Some(measured),
        low_sample: successes < BURN_IN_SUCCESSES,
    };
    let mean_interval = if interval_count > 0 {
        interval_sum as f64 / interval_count as f64
    } else {
        f64::INFINITY
    };
    Ok(RenewalRun {
        stats,
        successes,
        mean_interval,
    })
}

/// Time-average AoI statistics of the simulated renewal process.
pub fn renewal_oracle_sim(
    p: ProtocolParams,
    mu: CondSuccessProb,
    num_slots: u64,
    seed: u64,
) -> Result<AoiStats> {
    simulate_renewal(p, mu, num_slots, seed).map(|r| r.stats)
}

/// 1.96 standard errors of the mean of `xs`.
pub(crate) fn ci_halfwidth(xs: &[f64]) -> f64 {
    let n = xs.len() as f64;
    if xs.len() < 2 {
        return f64::INFINITY;
    }
    let m = xs.iter().sum::<f64>() / n;
    let v = xs.iter().map(|x| (x - m) * (x - m)).sum::<f64>() / (n - 1.0);
    1.96 * (v / n).sqrt()
}
