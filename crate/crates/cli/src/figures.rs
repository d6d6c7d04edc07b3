//! Canned experiment configurations for the standard figure set.
//!
//! Figures sharing a number share one grid; the `a` and `b` tables differ only
//! in which columns a plotting script reads (mean or variance).

use fsa_aoi_core::renewal::{cond_avg_aoi, cond_quad_aoi, renewal_oracle_sim};
use fsa_aoi_core::{CondSuccessProb, ProtocolParams};

use crate::commands::{analytic, simulate};
use crate::config::{ExperimentConfig, Mode, NetworkKind, SweepAxis};
use crate::table::{Cell, Table};
use crate::CliError;

pub const FIGURE_IDS: [&str; 14] = ["2a", "2b", "4a", "4b", "5a", "5b", "6a", "6b", "8a", "8b", "9a", "9b", "10a", "10b"];

/// Slots per point of the renewal simulation in figures 2a and 2b.
const RENEWAL_SLOTS: u64 = 3_000_000;

fn etas() -> Vec<f64> {
    (1..=20).map(|k| k as f64 * 0.05).collect()
}

fn bipolar(lambda: f64, eta: f64) -> ExperimentConfig {
    let mut c = ExperimentConfig::default();
    c.network.kind = NetworkKind::Bipolar;
    c.network.lambda = Some(lambda);
    c.network.r = Some(10.0);
    c.protocol.eta = Some(eta);
    c
}

fn cellular(rho: f64, epsilon: f64, eta: f64) -> ExperimentConfig {
    let mut c = ExperimentConfig::default();
    c.network.kind = NetworkKind::Cellular;
    c.network.lambda_s = Some(rho);
    c.network.lambda_d = Some(1.0);
    c.network.epsilon = Some(epsilon);
    c.protocol.eta = Some(eta);
    c
}

/// The grid behind a network figure, or `None` for the conditional figures.
pub fn figure_config(id: &str) -> Result<Option<ExperimentConfig>, CliError> {
    let frames = || SweepAxis::new("frame_size", [1.0, 3.0, 5.0, 7.0]);
    let f_range = || SweepAxis::new("frame_size", (1..=20).map(f64::from));
    let cfg = match id.trim_end_matches(['a', 'b']) {
        "2" => return Ok(None),
        "4" => {
            let mut c = bipolar(1e-2, 0.8);
            c.sweep = vec![frames(), SweepAxis::new("eta", etas())];
            c
        }
        "5" => {
            let mut c = bipolar(1e-2, 0.8);
            c.sweep = vec![SweepAxis::new("lambda", [2e-2, 1e-2, 5e-3, 5e-5]), f_range()];
            c
        }
        "6" => {
            let mut c = bipolar(1e-2, 0.8);
            let lambdas = (0..=24).map(|k| 1e-4 * 200f64.powf(k as f64 / 24.0));
            c.sweep = vec![SweepAxis::new("frame_size", [1.0, 3.0]), SweepAxis::new("lambda", lambdas)];
            c
        }
        "8" => {
            let mut c = cellular(5.0, if id == "8a" { 0.0 } else { 1.0 }, 0.8);
            c.sweep = vec![frames(), SweepAxis::new("eta", etas())];
            c
        }
        "9" => {
            let mut c = cellular(5.0, 0.0, 0.4);
            c.sweep = vec![frames(), SweepAxis::new("epsilon", (0..=10).map(|k| k as f64 / 10.0))];
            c
        }
        "10" => {
            let mut c = cellular(2.0, if id == "10a" { 0.0 } else { 1.0 }, 0.4);
            c.sweep = vec![SweepAxis::new("rho", [2.0, 4.0, 6.0, 8.0]), f_range()];
            c
        }
        _ => return Err(CliError::Config(format!("unknown figure {id:?}; known: {}", FIGURE_IDS.join(", ")))),
    };
    Ok(Some(cfg))
}

/// Conditional mean and second moment against the renewal simulation, F = 3.
fn conditional_table(seed: u64) -> Result<Table, CliError> {
    let mut t = Table::default();
    for (i, mu) in [0.4, 0.6, 0.8].into_iter().enumerate() {
        for (j, eta) in etas().into_iter().enumerate() {
            let p = ProtocolParams::new(eta, 3)?;
            let m = CondSuccessProb::new(mu)?;
            let s = renewal_oracle_sim(p, m, RENEWAL_SLOTS, seed.wrapping_add((100 * i + j) as u64))?;
            t.push(vec![
                ("mu", "1", mu.into()),
                ("eta", "updates per frame", eta.into()),
                ("frame_size", "slots", 3.0.into()),
                ("mean_aoi", "slots", cond_avg_aoi(p, m).into()),
                ("second_moment_aoi", "slots^2", cond_quad_aoi(p, m).into()),
                ("sim_mean_aoi", "slots", s.mean.into()),
                ("sim_mean_aoi_ci95", "slots", Cell::opt(s.ci_halfwidth_mean)),
                ("sim_second_moment_aoi", "slots^2", s.second_moment.into()),
            ]);
        }
    }
    Ok(t)
}

/// Builds one figure's table. `sim` carries simulation settings; when given,
/// network figures also get simulated columns.
pub fn figure(id: &str, seed: u64, sim: Option<&ExperimentConfig>) -> Result<Table, CliError> {
    match figure_config(id)? {
        None => conditional_table(seed),
        Some(mut cfg) => {
            cfg.seed = Some(seed);
            match sim {
                None => analytic(&cfg),
                Some(s) => {
                    cfg.sim = s.sim.clone();
                    cfg.mode = Mode::Both;
                    simulate(&cfg)
                }
            }
        }
    }
}
