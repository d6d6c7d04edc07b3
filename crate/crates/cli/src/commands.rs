//! The work behind each subcommand, returning tables rather than printing.

use std::fmt::Write as _;
use std::fs::File;
use std::io::{BufWriter, Write};

use fsa_aoi_core::bipolar::{
    aoi_lower_bound, avg_aoi_bipolar, avg_aoi_sa, mean_mu, optimal_frame, q1, quad_aoi_bipolar, spatial_throughput,
    tx_power, var_aoi_bipolar, y_of_f,
};
use fsa_aoi_core::cellular::{aoi_cellular, avg_aoi_cellular, avg_aoi_sa_cellular, q2_cellular};
use fsa_aoi_core::numerics::find_root_bracketed;
use fsa_aoi_core::simulator::estimate;
use fsa_aoi_core::{AoiValue, ProtocolParams, QuadratureSpec, SeriesSpec};
use rayon::prelude::*;

use crate::config::{ExperimentConfig, Format, Mode, NetworkKind, Point};
use crate::table::{Cell, Record, Table};
use crate::CliError;

/// Largest frame size searched by `optimal_frame` in sweep rows.
pub const F_SEARCH_MAX: u32 = 200;

/// Parameter columns shared by every row.
pub fn point_record(p: &Point) -> Record {
    let mut r: Record = vec![(
        "network",
        "-",
        Cell::Text(match p.kind {
            NetworkKind::Bipolar => "bipolar".into(),
            NetworkKind::Cellular => "cellular".into(),
        }),
    )];
    match p.kind {
        NetworkKind::Bipolar => {
            r.push(("lambda", "m^-2", p.lambda.into()));
            r.push(("r", "m", p.r.into()));
        }
        NetworkKind::Cellular => {
            r.push(("lambda_s", "m^-2", p.lambda_s.into()));
            r.push(("lambda_d", "m^-2", p.lambda_d.into()));
            r.push(("rho", "sensors per center", (p.lambda_s / p.lambda_d).into()));
            r.push(("epsilon", "1", p.epsilon.into()));
            r.push(("p_max_ratio", "1", Cell::opt(p.p_max_ratio)));
        }
    }
    r.push(("alpha", "1", p.alpha.into()));
    r.push(("theta", "linear", p.theta.into()));
    r.push(("eta", "updates per frame", p.eta.into()));
    r.push(("frame_size", "slots", (p.frame_size as f64).into()));
    r
}

/// Analytic statistics at one point.
pub fn analytic_record(p: &Point, tx: f64) -> Result<Record, CliError> {
    let pp = p.protocol()?;
    let series = SeriesSpec::default();
    let quad = QuadratureSpec::default();
    let mut r: Record = vec![];
    match p.kind {
        NetworkKind::Bipolar => {
            let c = p.bipolar()?;
            r.push(("mean_aoi", "slots", avg_aoi_bipolar(&c, pp).into()));
            r.push(("second_moment_aoi", "slots^2", quad_aoi_bipolar(&c, pp, &series)?.into()));
            r.push(("var_aoi", "slots^2", var_aoi_bipolar(&c, pp, &series)?.into()));
            r.push(("sa_mean_aoi_same_rate", "slots", avg_aoi_sa(&c, pp.beta())?.into()));
            r.push(("q_gap", "slots", q1(&c, pp).into()));
            r.push(("mean_success_prob", "1", mean_mu(&c, pp).into()));
            r.push(("throughput", "nats per slot", spatial_throughput(&c, pp).into()));
            r.push(("optimal_frame_size", "slots", (optimal_frame(&c, p.eta, F_SEARCH_MAX)? as f64).into()));
        }
        NetworkKind::Cellular => {
            let c = p.cellular()?;
            let a = aoi_cellular(&c, pp, &quad)?;
            r.push(("mean_aoi", "slots", a.mean.into()));
            r.push(("second_moment_aoi", "slots^2", a.second_moment.into()));
            r.push(("var_aoi", "slots^2", a.variance.into()));
            r.push(("sa_mean_aoi_same_rate", "slots", avg_aoi_sa_cellular(&c, pp.beta(), &quad)?.into()));
            r.push(("q_gap", "slots", a.q2.into()));
            r.push(("mean_success_prob", "1", a.mean_mu.into()));
        }
    }
    r.push(("lower_bound", "slots", aoi_lower_bound(p.frame_size).into()));
    r.push(("energy_per_slot", "P_tx per slot", tx_power(pp, tx).into()));
    Ok(r)
}

/// Simulated statistics at one point, with agreement columns when `analytic_mean` is given.
pub fn simulated_record(cfg: &ExperimentConfig, p: &Point, analytic_mean: Option<AoiValue>) -> Result<Record, CliError> {
    let spec = cfg.sim_spec(p.frame_size)?;
    let e = estimate(&p.network()?, p.protocol()?, &spec)?;
    let s = &e.stats;
    let mut r: Record = vec![
        ("sim_mean_aoi", "slots", s.mean.into()),
        ("sim_mean_aoi_ci95", "slots", Cell::opt(s.ci_halfwidth_mean)),
        ("sim_var_aoi", "slots^2", s.variance.into()),
        ("sim_var_aoi_ci95", "slots^2", Cell::opt(s.ci_halfwidth_variance)),
        ("sim_success_rate", "deliveries per slot", e.success_rate.into()),
        ("sim_success_rate_ci95", "deliveries per slot", e.success_rate_ci.into()),
        ("sim_energy_per_slot", "P_tx per slot", e.energy_per_slot.into()),
        ("sim_energy_per_slot_ci95", "P_tx per slot", e.energy_per_slot_ci.into()),
        ("sim_infinite_fraction", "1", e.infinite_fraction.into()),
        ("sim_comparable", "bool", Cell::flag(e.comparable)),
        ("sim_realizations", "1", (e.realizations as f64).into()),
    ];
    if let Some(a) = analytic_mean {
        let rel = match a {
            AoiValue::Finite(x) if e.comparable => Cell::num((s.mean - x).abs() / x),
            _ => Cell::Missing,
        };
        let agree = match rel {
            Cell::Num(x) => Cell::flag(x <= 0.03),
            _ => Cell::flag(false),
        };
        r.push(("rel_err_mean", "1", rel));
        r.push(("agree_3pct", "bool", agree));
    }
    Ok(r)
}

/// Analytic sweep over the configured grid, points evaluated in parallel.
pub fn analytic(cfg: &ExperimentConfig) -> Result<Table, CliError> {
    let tx = cfg.sim.tx_power.unwrap_or(1.0);
    let points = cfg.points()?;
    let records: Vec<Record> = points
        .par_iter()
        .map(|p| {
            let mut r = point_record(p);
            r.extend(analytic_record(p, tx)?);
            Ok(r)
        })
        .collect::<Result<_, CliError>>()?;
    let mut t = Table::default();
    records.into_iter().for_each(|r| t.push(r));
    Ok(t)
}

/// Simulation sweep; with `mode = "both"` the analytic columns and a 3% agreement flag are added.
pub fn simulate(cfg: &ExperimentConfig) -> Result<Table, CliError> {
    let both = cfg.mode == Mode::Both;
    let tx = cfg.sim.tx_power.unwrap_or(1.0);
    let mut t = Table::default();
    for p in cfg.points()? {
        let mut r = point_record(&p);
        let mut mean = None;
        if both {
            let a = analytic_record(&p, tx)?;
            mean = a.iter().find(|(n, _, _)| *n == "mean_aoi").and_then(|(_, _, c)| c.as_aoi());
            r.extend(a);
        }
        r.extend(simulated_record(cfg, &p, mean)?);
        t.push(r);
    }
    Ok(t)
}

/// Continuous stationary point of the average AoI in F, where y changes sign from negative to positive.
pub fn continuous_optimum(c: &fsa_aoi_core::BipolarConfig, eta: f64, f_max: u32) -> Result<Option<f64>, CliError> {
    let y = |f: f64| y_of_f(c, eta, f);
    let mut a = 1.0 + 1e-6;
    for k in 2..=f_max {
        let b = k as f64;
        let (ya, yb) = (y(a), y(b));
        if ya.is_finite() && ya < 0.0 && yb >= 0.0 {
            return Ok(Some(find_root_bracketed(y, a, b, 1e-10)?));
        }
        a = b;
    }
    Ok(None)
}

/// Optimal frame size per grid point, with the y(F) curve in the table.
pub fn optimal_f(cfg: &ExperimentConfig, f_max: u32) -> Result<(Table, String), CliError> {
    let mut t = Table::default();
    let mut report = String::new();
    let mut seen = vec![];
    for p in cfg.points()? {
        if p.kind != NetworkKind::Bipolar {
            return Err(CliError::Config("optimal-f is defined for the bipolar network".into()));
        }
        let key = Point { frame_size: 1, ..p };
        if seen.contains(&key) {
            continue;
        }
        seen.push(key);
        let c = p.bipolar()?;
        let best = optimal_frame(&c, p.eta, f_max)?;
        let star = continuous_optimum(&c, p.eta, f_max)?;
        let aoi = avg_aoi_bipolar(&c, ProtocolParams::new(p.eta, best)?);
        let _ = writeln!(
            report,
            "lambda={} r={} alpha={} theta={} eta={}: F*={} optimal F={best} mean AoI={}",
            p.lambda,
            p.r,
            p.alpha,
            p.theta,
            p.eta,
            star.map_or("none".to_string(), |s| format!("{s:.4}")),
            fmt_aoi(aoi)
        );
        for f in 1..=f_max {
            let q = Point { frame_size: f, ..p };
            let mut r = point_record(&q);
            r.push(("y", "1", y_of_f(&c, p.eta, f as f64).into()));
            r.push(("mean_aoi", "slots", avg_aoi_bipolar(&c, q.protocol()?).into()));
            r.push(("is_optimal", "bool", Cell::flag(f == best)));
            r.push(("f_star", "slots", Cell::opt(star)));
            t.push(r);
        }
    }
    Ok((t, report))
}

fn fmt_aoi(v: AoiValue) -> String {
    match v {
        AoiValue::Finite(x) => format!("{x:.6}"),
        AoiValue::Infinite(d) => format!("inf ({d})"),
    }
}

/// Both conversions of slotted ALOHA at rate `eta` into frame slotted ALOHA at the same effective rate.
pub fn compare(cfg: &ExperimentConfig) -> Result<(Table, String), CliError> {
    let quad = QuadratureSpec::default();
    let mut t = Table::default();
    let mut report = String::new();
    let mut seen = vec![];
    for p in cfg.points()? {
        let key = Point { frame_size: 1, ..p };
        if seen.contains(&key) {
            continue;
        }
        seen.push(key);
        let eta = p.eta;
        let eval = |pp: ProtocolParams| -> Result<(AoiValue, f64), CliError> {
            Ok(match p.kind {
                NetworkKind::Bipolar => {
                    let c = p.bipolar()?;
                    (avg_aoi_bipolar(&c, pp), q1(&c, pp))
                }
                NetworkKind::Cellular => {
                    let c = p.cellular()?;
                    (avg_aoi_cellular(&c, pp, &quad)?, q2_cellular(&c, pp, &quad)?)
                }
            })
        };
        let (sa, _) = eval(ProtocolParams::slotted(eta)?)?;
        let scheme_a = if eta <= 0.5 {
            Some((2u32, eval(ProtocolParams::new(2.0 * eta, 2)?)?))
        } else {
            None
        };
        let inv = 1.0 / eta;
        let scheme_b = if (inv - inv.round()).abs() <= 1e-9 * inv && inv.round() >= 2.0 {
            let f = inv.round() as u32;
            Some((f, eval(ProtocolParams::new(1.0, f)?)?))
        } else {
            None
        };
        let mut r = point_record(&Point { frame_size: 1, ..p });
        r.push(("sa_mean_aoi", "slots", sa.into()));
        let _ = write!(report, "eta_SA={eta}: SA mean AoI={}", fmt_aoi(sa));
        for (label, s, cols) in [
            ("(a) F=2, eta=2 eta_SA", scheme_a, ["a_frame_size", "a_mean_aoi", "a_q_gap", "a_delta"]),
            ("(b) eta=1, F=1/eta_SA", scheme_b, ["b_frame_size", "b_mean_aoi", "b_q_gap", "b_delta"]),
        ] {
            match s {
                Some((f, (m, q))) => {
                    let delta = m.as_f64() - sa.as_f64();
                    r.push((cols[0], "slots", (f as f64).into()));
                    r.push((cols[1], "slots", m.into()));
                    r.push((cols[2], "slots", q.into()));
                    r.push((cols[3], "slots", Cell::num(delta)));
                    let _ = write!(report, "; {label}: F={f} mean AoI={} gap={q:.6} change={delta:.6}", fmt_aoi(m));
                }
                None => {
                    for c in cols {
                        r.push((c, "slots", Cell::Missing));
                    }
                    let _ = write!(report, "; {label}: not applicable");
                }
            }
        }
        report.push('\n');
        t.push(r);
    }
    Ok((t, report))
}

/// Writes a table to the configured path, or to standard output.
pub fn write_table(t: &Table, cfg: &ExperimentConfig) -> Result<(), CliError> {
    match &cfg.output.path {
        Some(path) => {
            let f = File::create(path).map_err(|e| CliError::Io(format!("{}: {e}", path.display())))?;
            let mut w = BufWriter::new(f);
            write_format(t, cfg.format(), &mut w)?;
            w.flush()?;
        }
        None => write_format(t, cfg.format(), std::io::stdout().lock())?,
    }
    Ok(())
}

pub fn write_format<W: Write>(t: &Table, format: Format, w: W) -> Result<(), CliError> {
    match format {
        Format::Csv => t.write_csv(w),
        Format::Json => t.write_json(w),
    }
}
