//! Discrete-time Monte Carlo of the protocol over sampled Poisson networks.
//!
//! Each realization samples a topology around a typical link (Slivnyak's
//! reduced Palm picture for the bipolar model, a uniformly chosen sensor of a
//! center at the origin for the cellular model), runs the protocol slot by
//! slot with Rayleigh fading, and estimates the time-average AoI of the
//! typical link from its renewal cycles. Spatial averages are taken over
//! independent realizations.

mod topology;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, Exp1};
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::bipolar::BipolarConfig;
use crate::cellular::CellularConfig;
use crate::error::{Error, Result};
use crate::renewal::{ci_halfwidth, AoiStats, ProtocolParams};

pub use topology::{
    default_window_bipolar, default_window_cellular, sample_bipolar, sample_cellular, NetworkKind,
    NetworkRealization, DEFAULT_WINDOW_SPACINGS, SMALL_WINDOW_COUNT,
};
use topology::{sample_bipolar_with, sample_cellular_with};

/// Network model and its parameters.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub enum NetworkConfig {
    Bipolar(BipolarConfig),
    Cellular(CellularConfig),
}

impl From<BipolarConfig> for NetworkConfig {
    fn from(c: BipolarConfig) -> Self {
        NetworkConfig::Bipolar(c)
    }
}

impl From<CellularConfig> for NetworkConfig {
    fn from(c: CellularConfig) -> Self {
        NetworkConfig::Cellular(c)
    }
}

impl NetworkConfig {
    fn alpha(&self) -> f64 {
        match self {
            NetworkConfig::Bipolar(c) => c.alpha,
            NetworkConfig::Cellular(c) => c.alpha,
        }
    }

    fn theta(&self) -> f64 {
        match self {
            NetworkConfig::Bipolar(c) => c.theta,
            NetworkConfig::Cellular(c) => c.theta,
        }
    }

    fn kind(&self) -> NetworkKind {
        match self {
            NetworkConfig::Bipolar(_) => NetworkKind::Bipolar,
            NetworkConfig::Cellular(_) => NetworkKind::Cellular,
        }
    }

    pub fn default_window(&self) -> f64 {
        match self {
            NetworkConfig::Bipolar(c) => default_window_bipolar(c),
            NetworkConfig::Cellular(c) => default_window_cellular(c),
        }
    }
}

/// Transmit power of a sensor with link distance R, relative to P_tx.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub enum PowerModel {
    Constant,
    /// R^{αε}.
    Fractional(f64),
    /// min(R^{αε}, p).
    Capped(f64, f64),
}

impl PowerModel {
    /// The model implied by a cellular configuration.
    pub fn of(cfg: &CellularConfig) -> Self {
        match cfg.p_max_ratio {
            Some(p) => PowerModel::Capped(cfg.epsilon, p),
            None if cfg.epsilon == 0.0 => PowerModel::Constant,
            None => PowerModel::Fractional(cfg.epsilon),
        }
    }

    pub fn power(&self, link_distance: f64, alpha: f64) -> f64 {
        match *self {
            PowerModel::Constant => 1.0,
            PowerModel::Fractional(e) => link_distance.powf(alpha * e),
            PowerModel::Capped(e, p) => link_distance.powf(alpha * e).min(p),
        }
    }
}

/// Small-scale fading model.
#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Serialize, Deserialize)]
pub enum Fading {
    /// Unit-mean exponential power gains, independent across slots and links.
    #[default]
    Rayleigh,
}

/// Which links of a realization are measured.
#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Serialize, Deserialize)]
pub enum SpatialAverage {
    /// One typical link per realization, receiver at the origin.
    #[default]
    TypicalLink,
    /// This many links drawn uniformly from all links of each realization,
    /// averaged within the realization.
    ManyLinks(u32),
}

/// How interferer activity is generated.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum ScheduleMode {
    /// Draw activity only in the slots where the typical source transmits.
    /// Each interferer is then active independently with probability η/F,
    /// which is exact in law for the typical link.
    ObservedSlot,
    /// Draw every source's slot choice in every frame.
    FullFrame,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SimSpec {
    pub num_realizations: u32,
    /// Slot budget per realization; must be a multiple of F.
    pub slots_per_realization: u64,
    /// Deliveries discarded before cycles are recorded (at least 1).
    pub burn_in_successes: u32,
    pub fading: Fading,
    /// Stop a realization after this many complete cycles; `None` runs the full slot budget.
    pub cycles_per_realization: Option<u32>,
    /// Frames at the start of each run over which energy and success rates are measured.
    pub rate_frames: u32,
    pub torus_wrap: bool,
    /// `None` uses [`NetworkConfig::default_window`].
    pub window_halfwidth: Option<f64>,
    /// `None` follows the cellular configuration; ignored for the bipolar model.
    pub power_model: Option<PowerModel>,
    pub schedule: ScheduleMode,
    pub spatial_average: SpatialAverage,
    /// Transmit power P_tx, used for the energy estimate.
    pub tx_power: f64,
    pub seed: u64,
}

impl Default for SimSpec {
    fn default() -> Self {
        SimSpec {
            num_realizations: 1000,
            slots_per_realization: 3_000_000,
            burn_in_successes: 100,
            fading: Fading::Rayleigh,
            cycles_per_realization: Some(100),
            rate_frames: 100,
            torus_wrap: true,
            window_halfwidth: None,
            power_model: None,
            schedule: ScheduleMode::ObservedSlot,
            spatial_average: SpatialAverage::TypicalLink,
            tx_power: 1.0,
            seed: 1,
        }
    }
}

impl SimSpec {
    pub fn validate(&self, p: ProtocolParams) -> Result<()> {
        let f = p.frame_size() as u64;
        if self.num_realizations == 0 || self.slots_per_realization == 0 {
            return Err(Error::InvalidParameter("need at least one realization and one slot".into()));
        }
        if self.slots_per_realization % f != 0 {
            return Err(Error::InvalidParameter(format!(
                "slots_per_realization ({}) must be a multiple of F = {f}",
                self.slots_per_realization
            )));
        }
        if self.burn_in_successes == 0 {
            return Err(Error::InvalidParameter("burn_in_successes must be at least 1".into()));
        }
        if self.rate_frames as u64 * f > self.slots_per_realization {
            return Err(Error::InvalidParameter("rate_frames exceeds the slot budget".into()));
        }
        if self.spatial_average == SpatialAverage::ManyLinks(0) {
            return Err(Error::InvalidParameter("ManyLinks needs at least one link".into()));
        }
        if !(self.tx_power > 0.0) {
            return Err(Error::InvalidParameter("tx_power must be positive".into()));
        }
        Ok(())
    }
}

/// The typical link as seen by the SIR test.
struct Channel {
    /// P_0 r^{−α}.
    signal: f64,
    /// P_i ‖x_i‖^{−α} for every interferer.
    gains: Vec<f64>,
    theta: f64,
    typical_power: f64,
}

impl Channel {
    /// Link `link` of the realization, measured at its own receiver.
    fn new(real: &NetworkRealization, cfg: &NetworkConfig, spec: &SimSpec, link: usize) -> Self {
        let alpha = cfg.alpha();
        let power = match (cfg, spec.power_model) {
            (NetworkConfig::Bipolar(_), _) => PowerModel::Constant,
            (NetworkConfig::Cellular(_), Some(m)) => m,
            (NetworkConfig::Cellular(c), None) => PowerModel::of(c),
        };
        let pw = |i: usize| power.power(real.link_distances[i], alpha);
        let typical_power = pw(link);
        let rx = real.receivers[real.association[link]];
        let gains = real
            .transmitters
            .iter()
            .enumerate()
            .filter(|(i, _)| *i != link)
            .map(|(i, &x)| pw(i) * real.distance(x, rx).powf(-alpha))
            .collect();
        Channel {
            signal: typical_power * real.link_distances[link].powf(-alpha),
            gains,
            theta: cfg.theta(),
            typical_power,
        }
    }

    fn decoded<R: Rng>(&self, interference: f64, rng: &mut R) -> bool {
        let h0: f64 = exp1(rng);
        h0 * self.signal > self.theta * interference
    }

    /// One attempt with each interferer independently active with probability β.
    fn attempt<R: Rng>(&self, act: &Activity, rng: &mut R) -> bool {
        let mut interference = 0.0;
        match *act {
            Activity::Dense { threshold } => {
                let mut chunks = self.gains.chunks_exact(2);
                for pair in &mut chunks {
                    let u = rng.next_u64();
                    if (u & 0xffff_ffff) < threshold {
                        interference += pair[0] * exp1(rng);
                    }
                    if (u >> 32) < threshold {
                        interference += pair[1] * exp1(rng);
                    }
                }
                if let [g] = chunks.remainder() {
                    if (rng.next_u64() >> 32) < threshold {
                        interference += g * exp1(rng);
                    }
                }
            }
            Activity::Sparse { log_q } => {
                let n = self.gains.len();
                let skip = |rng: &mut R| -> usize {
                    // inverse CDF of the number of idle nodes before the next active one
                    let u: f64 = 1.0 - rng.random::<f64>();
                    let k = (u.ln() / log_q).floor();
                    if k < n as f64 {
                        k as usize
                    } else {
                        n
                    }
                };
                let mut i = skip(rng);
                while i < n {
                    interference += self.gains[i] * exp1(rng);
                    i = i + 1 + skip(rng);
                }
            }
        }
        self.decoded(interference, rng)
    }

    /// One attempt against an explicit set of active interferers.
    fn attempt_with<R: Rng>(&self, active: &[usize], rng: &mut R) -> bool {
        let mut interference = 0.0;
        for &i in active {
            let h: f64 = exp1(rng);
            interference += self.gains[i] * h;
        }
        self.decoded(interference, rng)
    }
}

#[inline]
fn exp1<R: Rng>(rng: &mut R) -> f64 {
    Exp1.sample(rng)
}

/// Sampler for independent per-node activity with probability β.
#[derive(Clone, Copy)]
enum Activity {
    /// One 32-bit comparison per node.
    Dense { threshold: u64 },
    /// Jump straight to the next active node; ln(1 − β) is cached.
    Sparse { log_q: f64 },
}

impl Activity {
    fn new(beta: f64) -> Self {
        if beta >= 0.05 {
            Activity::Dense {
                threshold: (beta * 4_294_967_296.0).round() as u64,
            }
        } else {
            Activity::Sparse { log_q: (-beta).ln_1p() }
        }
    }
}

/// Slot chosen by each of `n` sources in one frame, or `None` when idle.
pub fn frame_schedule<R: Rng>(n: usize, p: ProtocolParams, rng: &mut R) -> Vec<Option<u32>> {
    (0..n)
        .map(|_| {
            if rng.random::<f64>() < p.eta() {
                Some(rng.random_range(0..p.frame_size()))
            } else {
                None
            }
        })
        .collect()
}

/// Outcome of one realization.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RealizationRun {
    /// Time-average statistics of the typical link, `None` without a complete cycle.
    pub stats: Option<AoiStats>,
    pub cycles: u64,
    pub slots: u64,
    /// The slot budget ran out before the requested number of cycles.
    pub truncated: bool,
    /// Transmissions, deliveries and energy during the first `rate_frames` frames.
    pub window_slots: u64,
    pub window_attempts: u64,
    pub window_successes: u64,
    pub window_energy: f64,
}

/// Ratio estimate ΣA/ΣI with first-order jackknife bias correction.
/// Returns (estimate, standard error).
fn jackknife_ratio(num: &[f64], den: &[f64]) -> (f64, f64) {
    let n = num.len();
    let (sa, si) = (num.iter().sum::<f64>(), den.iter().sum::<f64>());
    let full = sa / si;
    if n < 2 {
        return (full, f64::INFINITY);
    }
    let loo: Vec<f64> = num.iter().zip(den).map(|(a, i)| (sa - a) / (si - i)).collect();
    let nf = n as f64;
    let m = loo.iter().sum::<f64>() / nf;
    let se = ((nf - 1.0) / nf * loo.iter().map(|x| (x - m).powi(2)).sum::<f64>()).sqrt();
    (nf * full - (nf - 1.0) * m, se)
}

fn cycle_stats(intervals: &[u64]) -> Option<AoiStats> {
    if intervals.is_empty() {
        return None;
    }
    let den: Vec<f64> = intervals.iter().map(|&i| i as f64).collect();
    let a: Vec<f64> = den.iter().map(|i| i * (i + 1.0) / 2.0).collect();
    let b: Vec<f64> = den.iter().map(|i| i * (i + 1.0) * (2.0 * i + 1.0) / 6.0).collect();
    let (mean, se_mean) = jackknife_ratio(&a, &den);
    let (second, _) = jackknife_ratio(&b, &den);
    Some(AoiStats {
        mean,
        second_moment: second,
        variance: second - mean * mean,
        ci_halfwidth_mean: Some(1.96 * se_mean),
        ci_halfwidth_variance: None,
        sample_count: Some(intervals.len() as u64),
        low_sample: intervals.len() < 100,
    })
}

/// Runs the protocol on one realization and measures the typical link.
pub fn run_fsa(
    real: &NetworkRealization,
    p: ProtocolParams,
    cfg: &NetworkConfig,
    spec: &SimSpec,
) -> Result<RealizationRun> {
    spec.validate(p)?;
    if real.kind != cfg.kind() {
        return Err(Error::InvalidParameter("realization and configuration disagree on the network model".into()));
    }
    let mut rng = ChaCha8Rng::seed_from_u64(real.seed);
    rng.set_stream(1);
    run_with(real, real.typical_index, p, cfg, spec, &mut rng)
}

fn run_with<R: Rng>(
    real: &NetworkRealization,
    link: usize,
    p: ProtocolParams,
    cfg: &NetworkConfig,
    spec: &SimSpec,
    rng: &mut R,
) -> Result<RealizationRun> {
    let channel = Channel::new(real, cfg, spec, link);
    let f = p.frame_size() as u64;
    let eta = p.eta();
    let act = Activity::new(p.beta());
    let target = spec.cycles_per_realization.map(u64::from);
    let rate_frames = spec.rate_frames as u64;
    let n_int = channel.gains.len();

    let mut intervals: Vec<u64> = Vec::new();
    let mut burn_left = spec.burn_in_successes;
    let mut last_success = 0u64;
    let (mut w_att, mut w_succ, mut w_energy) = (0u64, 0u64, 0.0);
    let mut active = Vec::new();
    let mut frame = 0u64;
    loop {
        let base = frame * f;
        let done_cycles = target.is_some_and(|t| intervals.len() as u64 >= t);
        if base >= spec.slots_per_realization || (frame >= rate_frames && done_cycles) {
            break;
        }
        let slot = match spec.schedule {
            ScheduleMode::ObservedSlot => {
                if rng.random::<f64>() < eta {
                    Some(rng.random_range(0..f))
                } else {
                    None
                }
            }
            ScheduleMode::FullFrame => {
                let own = if rng.random::<f64>() < eta {
                    Some(rng.random_range(0..f))
                } else {
                    None
                };
                if let Some(j) = own {
                    active.clear();
                    for (i, s) in frame_schedule(n_int, p, rng).into_iter().enumerate() {
                        if s == Some(j as u32) {
                            active.push(i);
                        }
                    }
                }
                own
            }
        };
        if let Some(j) = slot {
            let ok = match spec.schedule {
                ScheduleMode::ObservedSlot => channel.attempt(&act, rng),
                ScheduleMode::FullFrame => channel.attempt_with(&active, rng),
            };
            if frame < rate_frames {
                w_att += 1;
                w_energy += channel.typical_power * spec.tx_power;
                if ok {
                    w_succ += 1;
                }
            }
            if ok && !done_cycles {
                let t = base + j;
                if burn_left > 0 {
                    burn_left -= 1;
                } else {
                    intervals.push(t - last_success);
                }
                last_success = t;
            }
        }
        frame += 1;
    }
    let slots = frame * f;
    let truncated = match target {
        Some(t) => (intervals.len() as u64) < t,
        None => intervals.is_empty(),
    };
    Ok(RealizationRun {
        stats: cycle_stats(&intervals),
        cycles: intervals.len() as u64,
        slots,
        truncated,
        window_slots: rate_frames.min(frame) * f,
        window_attempts: w_att,
        window_successes: w_succ,
        window_energy: w_energy,
    })
}

/// Spatial and temporal average over independent realizations.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SimEstimate {
    /// Mean, second moment and variance of AoI with 95% half-widths.
    pub stats: AoiStats,
    /// Deliveries per slot of the typical link.
    pub success_rate: f64,
    pub success_rate_ci: f64,
    /// Transmissions per slot times the transmit power.
    pub energy_per_slot: f64,
    pub energy_per_slot_ci: f64,
    /// Measured links whose slot budget ran out before the requested cycles.
    pub infinite_fraction: f64,
    /// False when more than 20% of realizations were truncated.
    pub comparable: bool,
    pub realizations: u32,
    /// Cellular draws rejected because the typical cell was empty.
    pub resamples: u64,
    pub window_halfwidth: f64,
}

/// Realization `i` of a run uses its own ChaCha8 stream derived from the master seed.
fn realization_rng(seed: u64, i: u32) -> ChaCha8Rng {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(i as u64);
    rng
}

/// Samples realization `i` of a run; the same rng then drives the protocol.
fn realization(cfg: &NetworkConfig, spec: &SimSpec, w: f64, i: u32) -> Result<(NetworkRealization, ChaCha8Rng)> {
    let mut rng = realization_rng(spec.seed, i);
    let mut real = match cfg {
        NetworkConfig::Bipolar(c) => sample_bipolar_with(c, w, spec.torus_wrap, &mut rng)?,
        NetworkConfig::Cellular(c) => sample_cellular_with(c, w, spec.torus_wrap, &mut rng)?,
    };
    real.seed = spec.seed;
    Ok((real, rng))
}

/// Applies `f` to every realization of a run, in parallel and in index order.
pub fn map_realizations<T, F>(cfg: &NetworkConfig, spec: &SimSpec, f: F) -> Result<Vec<T>>
where
    T: Send,
    F: Fn(&NetworkRealization, &mut ChaCha8Rng) -> Result<T> + Sync,
{
    let w = spec.window_halfwidth.unwrap_or_else(|| cfg.default_window());
    (0..spec.num_realizations)
        .into_par_iter()
        .map(|i| {
            let (real, mut rng) = realization(cfg, spec, w, i)?;
            f(&real, &mut rng)
        })
        .collect()
}

/// Per-realization summary fed to the spatial average.
struct RealizationSummary {
    moments: Option<(f64, f64)>,
    rate: f64,
    energy: f64,
    links: usize,
    truncated: usize,
    resamples: u32,
}

fn summarize(
    real: &NetworkRealization,
    p: ProtocolParams,
    cfg: &NetworkConfig,
    spec: &SimSpec,
    rng: &mut ChaCha8Rng,
) -> Result<RealizationSummary> {
    let links: Vec<usize> = match spec.spatial_average {
        SpatialAverage::TypicalLink => vec![real.typical_index],
        SpatialAverage::ManyLinks(k) => (0..k)
            .map(|_| rng.random_range(0..real.transmitters.len()))
            .collect(),
    };
    let mut sum = RealizationSummary {
        moments: None,
        rate: 0.0,
        energy: 0.0,
        links: links.len(),
        truncated: 0,
        resamples: real.resamples,
    };
    let (mut m, mut b, mut with_stats) = (0.0, 0.0, 0usize);
    for &link in &links {
        let run = run_with(real, link, p, cfg, spec, rng)?;
        if run.truncated {
            sum.truncated += 1;
        }
        if let Some(s) = run.stats {
            m += s.mean;
            b += s.second_moment;
            with_stats += 1;
        }
        sum.rate += run.window_successes as f64 / run.window_slots as f64;
        sum.energy += run.window_energy / run.window_slots as f64;
    }
    let k = links.len() as f64;
    sum.rate /= k;
    sum.energy /= k;
    if with_stats > 0 {
        sum.moments = Some((m / with_stats as f64, b / with_stats as f64));
    }
    Ok(sum)
}

/// Runs `spec.num_realizations` independent realizations and averages them.
pub fn estimate(cfg: &NetworkConfig, p: ProtocolParams, spec: &SimSpec) -> Result<SimEstimate> {
    spec.validate(p)?;
    let w = spec.window_halfwidth.unwrap_or_else(|| cfg.default_window());
    let runs = map_realizations(cfg, spec, |real, rng| summarize(real, p, cfg, spec, rng))?;

    let n = runs.len();
    let links: usize = runs.iter().map(|r| r.links).sum();
    let truncated: usize = runs.iter().map(|r| r.truncated).sum();
    let resamples = runs.iter().map(|r| r.resamples as u64).sum();
    let (means, seconds): (Vec<f64>, Vec<f64>) = runs.iter().filter_map(|r| r.moments).unzip();
    let k = means.len() as f64;
    let mean = means.iter().sum::<f64>() / k;
    let second = seconds.iter().sum::<f64>() / k;
    // influence of each realization on E[Δ²] − E[Δ]²
    let infl: Vec<f64> = means.iter().zip(&seconds).map(|(a, b)| b - 2.0 * mean * a).collect();
    let rates: Vec<f64> = runs.iter().map(|r| r.rate).collect();
    let energy: Vec<f64> = runs.iter().map(|r| r.energy).collect();
    let avg = |xs: &[f64]| xs.iter().sum::<f64>() / xs.len() as f64;
    let infinite_fraction = truncated as f64 / links as f64;
    Ok(SimEstimate {
        stats: AoiStats {
            mean,
            second_moment: second,
            variance: second - mean * mean,
            ci_halfwidth_mean: Some(ci_halfwidth(&means)),
            ci_halfwidth_variance: Some(ci_halfwidth(&infl)),
            sample_count: Some(means.len() as u64),
            low_sample: means.len() < 30,
        },
        success_rate: avg(&rates),
        success_rate_ci: ci_halfwidth(&rates),
        energy_per_slot: avg(&energy),
        energy_per_slot_ci: ci_halfwidth(&energy),
        infinite_fraction,
        comparable: infinite_fraction <= 0.2,
        realizations: n as u32,
        resamples,
        window_halfwidth: w,
    })
}
