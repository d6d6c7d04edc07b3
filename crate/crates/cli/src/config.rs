//! Experiment configuration: a TOML file whose values command-line flags can override.
//!
//! ```toml
//! mode = "both"            # analytic | simulate | both
//! seed = 7
//!
//! [network]
//! kind = "bipolar"         # bipolar | cellular
//! lambda = 1e-2            # bipolar: transmitter density [m^-2]
//! r = 10.0                 # bipolar: link distance [m]
//! alpha = 3.5
//! theta = "0dB"            # linear number or a string with a dB suffix
//! # lambda_s, lambda_d, epsilon, p_max_ratio for kind = "cellular"
//!
//! [protocol]
//! eta = 0.8
//! frame_size = 3
//!
//! [[sweep]]                # grid axes, combined as a Cartesian product
//! axis = "frame_size"
//! values = [1, 3, 5, 7]
//!
//! [[sweep]]
//! axis = "eta"
//! start = 0.1
//! stop = 1.0
//! steps = 10
//!
//! [sim]
//! realizations = 500
//! spatial_average = "many:4"
//!
//! [output]
//! path = "out.csv"
//! format = "csv"           # csv | json
//! ```

use std::path::{Path, PathBuf};

use fsa_aoi_core::simulator::ScheduleMode;
use fsa_aoi_core::{BipolarConfig, CellularConfig, NetworkConfig, ProtocolParams, SimSpec, SpatialAverage};
use serde::Deserialize;

use crate::CliError;

#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum NetworkKind {
    #[default]
    Bipolar,
    Cellular,
}

#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Deserialize, clap::ValueEnum)]
#[serde(rename_all = "lowercase")]
pub enum Mode {
    #[default]
    Analytic,
    Simulate,
    Both,
}

#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Deserialize, clap::ValueEnum)]
#[serde(rename_all = "lowercase")]
pub enum Format {
    #[default]
    Csv,
    Json,
}

/// A number, or a string such as `"3dB"` or `"0.5"`.
#[derive(Debug, Clone, PartialEq, Deserialize)]
#[serde(untagged)]
pub enum ParamValue {
    Num(f64),
    Text(String),
}

impl ParamValue {
    /// Numeric value; a `dB` suffix is accepted only when `db_ok` is set.
    pub fn resolve(&self, name: &str, db_ok: bool) -> Result<f64, CliError> {
        match self {
            ParamValue::Num(x) => Ok(*x),
            ParamValue::Text(s) if db_ok => parse_theta(s),
            ParamValue::Text(s) => s
                .trim()
                .parse()
                .map_err(|_| CliError::Config(format!("{name}: cannot parse {s:?} as a number"))),
        }
    }
}

/// Parses a threshold given as a linear number or in decibels (`"3dB"`, `"-2 dB"`).
pub fn parse_theta(s: &str) -> Result<f64, CliError> {
    let t = s.trim();
    let lower = t.to_ascii_lowercase();
    let (num, db) = match lower.strip_suffix("db") {
        Some(n) => (n.trim(), true),
        None => (t, false),
    };
    let x: f64 = num
        .parse()
        .map_err(|_| CliError::Config(format!("theta: cannot parse {s:?}")))?;
    Ok(if db { 10f64.powf(x / 10.0) } else { x })
}

#[derive(Debug, Clone, Default, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct NetworkSection {
    #[serde(default)]
    pub kind: NetworkKind,
    pub lambda: Option<f64>,
    pub r: Option<f64>,
    pub alpha: Option<f64>,
    pub theta: Option<ParamValue>,
    pub lambda_s: Option<f64>,
    pub lambda_d: Option<f64>,
    pub epsilon: Option<f64>,
    pub p_max_ratio: Option<f64>,
}

#[derive(Debug, Clone, Default, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ProtocolSection {
    pub eta: Option<f64>,
    pub frame_size: Option<u32>,
}

/// One grid axis, given either as explicit values or as `start`/`stop`/`steps`.
#[derive(Debug, Clone, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SweepAxis {
    pub axis: String,
    pub values: Option<Vec<ParamValue>>,
    pub start: Option<f64>,
    pub stop: Option<f64>,
    pub steps: Option<usize>,
    /// Geometric rather than arithmetic spacing for `start`/`stop`/`steps`.
    #[serde(default)]
    pub log: bool,
}

#[derive(Debug, Clone, Default, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SimSection {
    pub realizations: Option<u32>,
    pub slots: Option<u64>,
    pub burn_in: Option<u32>,
    /// Cycles recorded per realization; 0 runs the whole slot budget.
    pub cycles: Option<u32>,
    pub rate_frames: Option<u32>,
    pub window_halfwidth: Option<f64>,
    pub torus_wrap: Option<bool>,
    /// `"typical"` or `"many:N"`.
    pub spatial_average: Option<String>,
    /// `"observed"` or `"full"`.
    pub schedule: Option<String>,
    pub tx_power: Option<f64>,
}

#[derive(Debug, Clone, Default, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct OutputSection {
    pub path: Option<PathBuf>,
    pub format: Option<Format>,
}

#[derive(Debug, Clone, Default, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ExperimentConfig {
    #[serde(default)]
    pub mode: Mode,
    pub seed: Option<u64>,
    #[serde(default)]
    pub network: NetworkSection,
    #[serde(default)]
    pub protocol: ProtocolSection,
    #[serde(default)]
    pub sweep: Vec<SweepAxis>,
    #[serde(default)]
    pub sim: SimSection,
    #[serde(default)]
    pub output: OutputSection,
}

impl ExperimentConfig {
    pub fn from_toml(text: &str) -> Result<Self, CliError> {
        toml::from_str(text).map_err(|e| CliError::Config(e.to_string()))
    }

    pub fn load(path: &Path) -> Result<Self, CliError> {
        let text = std::fs::read_to_string(path).map_err(|e| CliError::Io(format!("{}: {e}", path.display())))?;
        Self::from_toml(&text)
    }
}

/// Network and protocol parameters of one grid point.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Point {
    pub kind: NetworkKind,
    pub lambda: f64,
    pub r: f64,
    pub alpha: f64,
    pub theta: f64,
    pub lambda_s: f64,
    pub lambda_d: f64,
    pub epsilon: f64,
    pub p_max_ratio: Option<f64>,
    pub eta: f64,
    pub frame_size: u32,
}

impl Point {
    pub fn protocol(&self) -> Result<ProtocolParams, CliError> {
        Ok(ProtocolParams::new(self.eta, self.frame_size)?)
    }

    pub fn bipolar(&self) -> Result<BipolarConfig, CliError> {
        Ok(BipolarConfig::new(self.lambda, self.r, self.alpha, self.theta)?)
    }

    pub fn cellular(&self) -> Result<CellularConfig, CliError> {
        let c = CellularConfig::new(self.lambda_s, self.lambda_d, self.alpha, self.theta, self.epsilon)?;
        Ok(match self.p_max_ratio {
            Some(p) => c.with_max_power(p)?,
            None => c,
        })
    }

    pub fn network(&self) -> Result<NetworkConfig, CliError> {
        Ok(match self.kind {
            NetworkKind::Bipolar => self.bipolar()?.into(),
            NetworkKind::Cellular => self.cellular()?.into(),
        })
    }

    fn set(&mut self, axis: &str, v: &ParamValue) -> Result<(), CliError> {
        let bipolar_only = ["lambda", "r"];
        let cellular_only = ["lambda_s", "lambda_d", "rho", "epsilon", "p_max_ratio"];
        if self.kind == NetworkKind::Bipolar && cellular_only.contains(&axis)
            || self.kind == NetworkKind::Cellular && bipolar_only.contains(&axis)
        {
            return Err(CliError::Config(format!("sweep axis {axis:?} does not apply to this network")));
        }
        let x = v.resolve(axis, axis == "theta")?;
        match axis {
            "eta" => self.eta = x,
            "frame_size" | "F" => self.frame_size = integer(axis, x)?,
            "lambda" => self.lambda = x,
            "r" => self.r = x,
            "alpha" => self.alpha = x,
            "theta" => self.theta = x,
            "lambda_s" => self.lambda_s = x,
            "lambda_d" => self.lambda_d = x,
            "rho" => self.lambda_s = x * self.lambda_d,
            "epsilon" => self.epsilon = x,
            "p_max_ratio" => self.p_max_ratio = Some(x),
            _ => return Err(CliError::Config(format!("unknown sweep axis {axis:?}"))),
        }
        Ok(())
    }
}

fn integer(name: &str, x: f64) -> Result<u32, CliError> {
    if x >= 1.0 && x.fract() == 0.0 && x <= u32::MAX as f64 {
        Ok(x as u32)
    } else {
        Err(CliError::Config(format!("{name} must be a positive integer, got {x}")))
    }
}

impl SweepAxis {
    pub fn new(axis: &str, values: impl IntoIterator<Item = f64>) -> Self {
        SweepAxis {
            axis: axis.to_string(),
            values: Some(values.into_iter().map(ParamValue::Num).collect()),
            start: None,
            stop: None,
            steps: None,
            log: false,
        }
    }

    pub fn points(&self) -> Result<Vec<ParamValue>, CliError> {
        match (&self.values, self.start, self.stop, self.steps) {
            (Some(v), None, None, None) if !v.is_empty() => Ok(v.clone()),
            (None, Some(a), Some(b), Some(n)) if n >= 1 => {
                if self.log && !(a > 0.0 && b > 0.0) {
                    return Err(CliError::Config(format!("axis {}: log spacing needs positive bounds", self.axis)));
                }
                Ok((0..n)
                    .map(|i| {
                        let t = if n == 1 { 0.0 } else { i as f64 / (n - 1) as f64 };
                        ParamValue::Num(if self.log {
                            a * (b / a).powf(t)
                        } else {
                            a + (b - a) * t
                        })
                    })
                    .collect())
            }
            _ => Err(CliError::Config(format!(
                "axis {}: give either a non-empty `values` list or `start`, `stop` and `steps`",
                self.axis
            ))),
        }
    }
}

/// Values set on the command line; each replaces the corresponding file value.
#[derive(Debug, Clone, Default, clap::Args)]
pub struct Overrides {
    /// Network model.
    #[arg(long, value_parser = ["bipolar", "cellular"])]
    pub network: Option<String>,
    /// Bipolar transmitter density [m^-2].
    #[arg(long)]
    pub lambda: Option<f64>,
    /// Bipolar link distance [m].
    #[arg(long)]
    pub r: Option<f64>,
    /// Path-loss exponent.
    #[arg(long)]
    pub alpha: Option<f64>,
    /// Decoding threshold, linear or with a dB suffix.
    #[arg(long, allow_hyphen_values = true)]
    pub theta: Option<String>,
    /// Cellular sensor density.
    #[arg(long)]
    pub lambda_s: Option<f64>,
    /// Cellular center density.
    #[arg(long)]
    pub lambda_d: Option<f64>,
    /// Cellular power-control exponent.
    #[arg(long)]
    pub epsilon: Option<f64>,
    /// Update rate.
    #[arg(long)]
    pub eta: Option<f64>,
    /// Frame size F.
    #[arg(long = "frame-size", short = 'F')]
    pub frame_size: Option<u32>,
    #[arg(long, value_enum)]
    pub mode: Option<Mode>,
    #[arg(long)]
    pub seed: Option<u64>,
    /// Simulated realizations per grid point.
    #[arg(long)]
    pub realizations: Option<u32>,
    /// Slot budget per realization (rounded down to a multiple of F).
    #[arg(long)]
    pub slots: Option<u64>,
    /// `typical` or `many:N`.
    #[arg(long)]
    pub spatial_average: Option<String>,
    /// Output file; standard output when absent.
    #[arg(long, short = 'o')]
    pub output: Option<PathBuf>,
    #[arg(long, value_enum)]
    pub format: Option<Format>,
}

impl ExperimentConfig {
    pub fn apply(&mut self, o: &Overrides) -> Result<(), CliError> {
        if let Some(k) = &o.network {
            self.network.kind = if k == "cellular" {
                NetworkKind::Cellular
            } else {
                NetworkKind::Bipolar
            };
        }
        let n = &mut self.network;
        macro_rules! set {
            ($dst:expr, $src:expr) => {
                if let Some(v) = $src {
                    $dst = Some(v.clone());
                }
            };
        }
        set!(n.lambda, &o.lambda);
        set!(n.r, &o.r);
        set!(n.alpha, &o.alpha);
        set!(n.lambda_s, &o.lambda_s);
        set!(n.lambda_d, &o.lambda_d);
        set!(n.epsilon, &o.epsilon);
        if let Some(t) = &o.theta {
            n.theta = Some(ParamValue::Text(t.clone()));
        }
        set!(self.protocol.eta, &o.eta);
        set!(self.protocol.frame_size, &o.frame_size);
        set!(self.seed, &o.seed);
        set!(self.sim.realizations, &o.realizations);
        set!(self.sim.slots, &o.slots);
        set!(self.sim.spatial_average, &o.spatial_average);
        set!(self.output.path, &o.output);
        set!(self.output.format, &o.format);
        if let Some(m) = o.mode {
            self.mode = m;
        }
        Ok(())
    }

    /// The base point before any sweep is applied.
    pub fn base_point(&self) -> Result<Point, CliError> {
        let n = &self.network;
        let (bip, cell) = (
            [("lambda", n.lambda), ("r", n.r)],
            [("lambda_s", n.lambda_s), ("lambda_d", n.lambda_d), ("epsilon", n.epsilon), ("p_max_ratio", n.p_max_ratio)],
        );
        let stray: Vec<&str> = match n.kind {
            NetworkKind::Bipolar => cell.iter().filter(|(_, v)| v.is_some()).map(|(k, _)| *k).collect(),
            NetworkKind::Cellular => bip.iter().filter(|(_, v)| v.is_some()).map(|(k, _)| *k).collect(),
        };
        if !stray.is_empty() {
            return Err(CliError::Config(format!("keys {stray:?} do not apply to this network")));
        }
        let theta = match &n.theta {
            Some(t) => t.resolve("theta", true)?,
            None => 1.0,
        };
        Ok(Point {
            kind: n.kind,
            lambda: n.lambda.unwrap_or(1e-2),
            r: n.r.unwrap_or(10.0),
            alpha: n.alpha.unwrap_or(3.5),
            theta,
            lambda_s: n.lambda_s.unwrap_or(5.0),
            lambda_d: n.lambda_d.unwrap_or(1.0),
            epsilon: n.epsilon.unwrap_or(0.0),
            p_max_ratio: n.p_max_ratio,
            eta: self.protocol.eta.unwrap_or(0.8),
            frame_size: self.protocol.frame_size.unwrap_or(3),
        })
    }

    /// Every grid point, the last sweep axis varying fastest.
    pub fn points(&self) -> Result<Vec<Point>, CliError> {
        let mut pts = vec![self.base_point()?];
        for ax in &self.sweep {
            let values = ax.points()?;
            let mut next = Vec::with_capacity(pts.len() * values.len());
            for p in &pts {
                for v in &values {
                    let mut q = *p;
                    q.set(&ax.axis, v)?;
                    next.push(q);
                }
            }
            pts = next;
        }
        for p in &pts {
            p.protocol()?;
            p.network()?;
        }
        Ok(pts)
    }

    /// Simulation settings; the slot budget is rounded down to a multiple of `frame_size`.
    pub fn sim_spec(&self, frame_size: u32) -> Result<SimSpec, CliError> {
        let s = &self.sim;
        let d = SimSpec::default();
        let slots = s.slots.unwrap_or(d.slots_per_realization);
        let slots = slots - slots % frame_size as u64;
        Ok(SimSpec {
            num_realizations: s.realizations.unwrap_or(d.num_realizations),
            slots_per_realization: slots,
            burn_in_successes: s.burn_in.unwrap_or(d.burn_in_successes),
            cycles_per_realization: match s.cycles {
                Some(0) => None,
                Some(c) => Some(c),
                None => d.cycles_per_realization,
            },
            rate_frames: s.rate_frames.unwrap_or(d.rate_frames),
            window_halfwidth: s.window_halfwidth.or(d.window_halfwidth),
            torus_wrap: s.torus_wrap.unwrap_or(d.torus_wrap),
            spatial_average: match &s.spatial_average {
                Some(a) => parse_spatial_average(a)?,
                None => d.spatial_average,
            },
            schedule: match s.schedule.as_deref() {
                None | Some("observed") => ScheduleMode::ObservedSlot,
                Some("full") => ScheduleMode::FullFrame,
                Some(x) => return Err(CliError::Config(format!("unknown schedule {x:?}"))),
            },
            tx_power: s.tx_power.unwrap_or(d.tx_power),
            seed: self.seed.unwrap_or(d.seed),
            ..d
        })
    }

    pub fn format(&self) -> Format {
        self.output.format.unwrap_or_default()
    }
}

pub fn parse_spatial_average(s: &str) -> Result<SpatialAverage, CliError> {
    let t = s.trim();
    if t == "typical" {
        return Ok(SpatialAverage::TypicalLink);
    }
    match t.strip_prefix("many:").map(|n| n.trim().parse::<u32>()) {
        Some(Ok(n)) if n > 0 => Ok(SpatialAverage::ManyLinks(n)),
        _ => Err(CliError::Config(format!("spatial_average must be \"typical\" or \"many:N\" with N >= 1, got {s:?}"))),
    }
}
