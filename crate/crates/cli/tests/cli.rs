use std::path::Path;
use std::process::Command;

use fsa_aoi_cli::commands::{analytic, compare, optimal_f, simulate};
use fsa_aoi_cli::config::{parse_theta, ExperimentConfig, Mode};
use fsa_aoi_cli::figures::{figure, figure_config};
use fsa_aoi_cli::table::{Cell, Table};
use fsa_aoi_cli::CliError;
use fsa_aoi_core::bipolar::{avg_aoi_bipolar, optimal_frame};
use fsa_aoi_core::renewal::{cond_avg_aoi, cond_var_aoi};
use fsa_aoi_core::{BipolarConfig, CondSuccessProb, ProtocolParams};
use proptest::prelude::*;

fn bin() -> Command {
    Command::new(env!("CARGO_BIN_EXE_fsa-aoi"))
}

fn num(t: &Table, row: usize, col: &str) -> f64 {
    t.get(row, col).and_then(Cell::as_f64).unwrap_or_else(|| panic!("no number in {col} row {row}"))
}

fn roundtrip(t: &Table) -> Table {
    let mut buf = vec![];
    t.write_csv(&mut buf).unwrap();
    Table::read_csv(buf.as_slice()).unwrap()
}

fn cell() -> impl Strategy<Value = Cell> {
    prop_oneof![
        any::<f64>().prop_filter("finite", |x| x.is_finite()).prop_map(Cell::Num),
        (-1e6..1e6f64).prop_map(Cell::Num),
        (-1000i64..1000).prop_map(|k| Cell::Num(k as f64)),
        Just(Cell::Inf),
        Just(Cell::Missing),
        "[a-z][a-z_]{0,8}".prop_filter("not the inf token", |s| s != "inf").prop_map(Cell::Text),
    ]
}

proptest! {
    #[test]
    fn csv_round_trip_is_lossless(rows in prop::collection::vec(prop::collection::vec(cell(), 3), 1..20)) {
        let mut t = Table::default();
        for r in rows {
            t.push(vec![("a", "slots", r[0].clone()), ("b", "m^-2", r[1].clone()), ("c", "1", r[2].clone())]);
        }
        prop_assert_eq!(roundtrip(&t), t);
    }

    #[test]
    fn theta_in_decibels_converts_to_linear(db in -30.0..30.0f64) {
        let lin = parse_theta(&format!("{db}dB")).unwrap();
        prop_assert!((lin - 10f64.powf(db / 10.0)).abs() <= 1e-12 * lin);
        let spaced = parse_theta(&format!("{db} dB")).unwrap();
        prop_assert!((spaced - lin).abs() <= 1e-12 * lin);
    }
}

#[test]
fn theta_accepts_linear_and_decibel_forms() {
    assert_eq!(parse_theta("0dB").unwrap(), 1.0);
    assert_eq!(parse_theta("10 dB").unwrap(), 10.0);
    assert_eq!(parse_theta("2.5").unwrap(), 2.5);
    assert!(matches!(parse_theta("3 decibel"), Err(CliError::Config(_))));
}

#[test]
fn analytic_sweep_round_trips_through_csv() {
    let cfg = ExperimentConfig::from_toml(
        r#"
        [network]
        kind = "bipolar"
        lambda = 2e-2
        theta = "0dB"
        [[sweep]]
        axis = "eta"
        start = 0.1
        stop = 1.0
        steps = 7
        [[sweep]]
        axis = "frame_size"
        values = [1, 4]
        "#,
    )
    .unwrap();
    let t = analytic(&cfg).unwrap();
    assert_eq!(t.rows.len(), 14);
    let back = roundtrip(&t);
    assert_eq!(back, t);
    assert!(back.columns.iter().all(|c| !c.unit.is_empty()));
    let c = BipolarConfig::new(2e-2, 10.0, 3.5, 1.0).unwrap();
    for i in 0..t.rows.len() {
        let p = ProtocolParams::new(num(&back, i, "eta"), num(&back, i, "frame_size") as u32).unwrap();
        assert_eq!(back.get(i, "mean_aoi").unwrap().as_aoi().unwrap().as_f64(), avg_aoi_bipolar(&c, p).as_f64());
    }
}

#[test]
fn frame_and_density_sweep_has_one_row_per_point() {
    let t = figure("5a", 1, None).unwrap();
    assert_eq!(t.rows.len(), 80);
    let cfg = figure_config("5b").unwrap().unwrap();
    assert_eq!(cfg.points().unwrap().len(), 80);
}

#[test]
fn interference_free_rows_match_the_renewal_formula() {
    let cfg = ExperimentConfig::from_toml(
        r#"
        [network]
        lambda = 0.0
        [[sweep]]
        axis = "eta"
        values = [0.2, 0.5, 1.0]
        [[sweep]]
        axis = "F"
        values = [1, 3, 8]
        "#,
    )
    .unwrap();
    let t = analytic(&cfg).unwrap();
    let one = CondSuccessProb::new(1.0).unwrap();
    for i in 0..t.rows.len() {
        let p = ProtocolParams::new(num(&t, i, "eta"), num(&t, i, "frame_size") as u32).unwrap();
        assert!((num(&t, i, "mean_aoi") - cond_avg_aoi(p, one)).abs() <= 1e-12 * cond_avg_aoi(p, one));
        assert!((num(&t, i, "var_aoi") - cond_var_aoi(p, one)).abs() <= 1e-9 * cond_var_aoi(p, one).max(1.0));
    }
}

#[test]
fn infinite_ages_are_written_as_inf() {
    let cfg = ExperimentConfig::from_toml(
        r#"
        [network]
        kind = "cellular"
        lambda_s = 5.0
        epsilon = 0.0
        [protocol]
        eta = 0.9
        frame_size = 1
        "#,
    )
    .unwrap();
    let t = analytic(&cfg).unwrap();
    assert_eq!(t.get(0, "mean_aoi"), Some(&Cell::Inf));
    let mut buf = vec![];
    t.write_csv(&mut buf).unwrap();
    let text = String::from_utf8(buf).unwrap();
    assert!(text.lines().nth(1).unwrap().split(',').any(|f| f == "inf"));
    assert!(roundtrip(&t).get(0, "mean_aoi").unwrap().as_aoi().unwrap().is_infinite());
    let mut json = vec![];
    t.write_json(&mut json).unwrap();
    let v: serde_json::Value = serde_json::from_slice(&json).unwrap();
    assert_eq!(v["rows"][0]["mean_aoi"], "inf");
    assert_eq!(v["units"]["mean_aoi"], "slots");
}

#[test]
fn config_errors_are_typed() {
    let bad_axis = ExperimentConfig::from_toml("[[sweep]]\naxis = \"colour\"\nvalues = [1]").unwrap();
    assert!(matches!(bad_axis.points(), Err(CliError::Config(_))));
    let wrong_net = ExperimentConfig::from_toml("[[sweep]]\naxis = \"epsilon\"\nvalues = [0.5]").unwrap();
    assert!(matches!(wrong_net.points(), Err(CliError::Config(_))));
    assert!(matches!(ExperimentConfig::from_toml("[network]\nlamda = 1"), Err(CliError::Config(_))));
    let fractional_f = ExperimentConfig::from_toml("[[sweep]]\naxis = \"frame_size\"\nvalues = [2.5]").unwrap();
    assert!(matches!(fractional_f.points(), Err(CliError::Config(_))));
    let no_values = ExperimentConfig::from_toml("[[sweep]]\naxis = \"eta\"\nstart = 0.1").unwrap();
    assert!(matches!(no_values.points(), Err(CliError::Config(_))));
    let many = ExperimentConfig::from_toml("[sim]\nspatial_average = \"many:0\"").unwrap();
    assert!(matches!(many.sim_spec(3), Err(CliError::Config(_))));
}

#[test]
fn simulation_is_reproducible_and_reports_agreement() {
    let cfg = ExperimentConfig::from_toml(
        r#"
        mode = "both"
        seed = 11
        [network]
        lambda = 1e-2
        [protocol]
        eta = 0.8
        frame_size = 5
        [sim]
        realizations = 40
        slots = 200000
        burn_in = 1
        "#,
    )
    .unwrap();
    let a = simulate(&cfg).unwrap();
    let b = simulate(&cfg).unwrap();
    assert_eq!(a, b);
    assert_eq!(a.rows.len(), 1);
    for col in ["mean_aoi", "sim_mean_aoi", "sim_mean_aoi_ci95", "sim_infinite_fraction", "rel_err_mean", "agree_3pct"] {
        assert!(a.get(0, col).unwrap().as_f64().is_some(), "{col}");
    }
    let rel = num(&a, 0, "rel_err_mean");
    assert!(rel < 0.15, "relative error {rel}");
    assert_eq!(num(&a, 0, "agree_3pct") == 1.0, rel <= 0.03);
    let mut only_sim = cfg.clone();
    only_sim.mode = Mode::Simulate;
    assert!(simulate(&only_sim).unwrap().column("mean_aoi").is_none());
}

#[test]
fn simulation_rounds_the_slot_budget_to_whole_frames() {
    let cfg = ExperimentConfig::from_toml("[sim]\nslots = 1000").unwrap();
    assert_eq!(cfg.sim_spec(7).unwrap().slots_per_realization, 994);
    let many = ExperimentConfig::from_toml("[sim]\nspatial_average = \"many:3\"").unwrap();
    assert_eq!(many.sim_spec(1).unwrap().spatial_average, fsa_aoi_core::SpatialAverage::ManyLinks(3));
}

#[test]
fn optimal_frame_rows_mark_the_library_optimum() {
    let cfg = ExperimentConfig::from_toml("[network]\nlambda = 1e-2\nr = 15.0\n[protocol]\neta = 0.8").unwrap();
    let (t, report) = optimal_f(&cfg, 30).unwrap();
    assert_eq!(t.rows.len(), 30);
    let c = BipolarConfig::new(1e-2, 15.0, 3.5, 1.0).unwrap();
    let best = optimal_frame(&c, 0.8, 30).unwrap();
    let marked: Vec<usize> = (0..30).filter(|&i| num(&t, i, "is_optimal") == 1.0).collect();
    assert_eq!(marked, vec![best as usize - 1]);
    assert!(report.contains(&format!("optimal F={best}")));
    let cellular = ExperimentConfig::from_toml("[network]\nkind = \"cellular\"").unwrap();
    assert!(matches!(optimal_f(&cellular, 10), Err(CliError::Config(_))));
}

#[test]
fn compare_reports_both_conversions() {
    let cfg = ExperimentConfig::from_toml("[protocol]\neta = 0.25").unwrap();
    let (t, _) = compare(&cfg).unwrap();
    assert_eq!(num(&t, 0, "a_frame_size"), 2.0);
    assert_eq!(num(&t, 0, "b_frame_size"), 4.0);
    assert!(num(&t, 0, "a_q_gap") < 0.0 && num(&t, 0, "b_q_gap") < 0.0);
    let sa = num(&t, 0, "sa_mean_aoi");
    assert!((num(&t, 0, "a_delta") - (num(&t, 0, "a_mean_aoi") - sa)).abs() < 1e-12);
    let odd = ExperimentConfig::from_toml("[protocol]\neta = 0.3").unwrap();
    let (t, report) = compare(&odd).unwrap();
    assert_eq!(t.get(0, "b_frame_size"), Some(&Cell::Missing));
    assert!(report.contains("not applicable"));
}

#[test]
fn conditional_figure_tracks_its_simulation() {
    let t = figure("2a", 3, None).unwrap();
    assert_eq!(t.rows.len(), 60);
    for i in 0..t.rows.len() {
        let (a, s, hw) = (num(&t, i, "mean_aoi"), num(&t, i, "sim_mean_aoi"), num(&t, i, "sim_mean_aoi_ci95"));
        assert!((a - s).abs() <= 4.0 * hw + 1e-3 * a, "row {i}: {s} +/- {hw} vs {a}");
    }
    assert!(matches!(figure("3a", 1, None), Err(CliError::Config(_))));
}

fn write(dir: &Path, name: &str, text: &str) -> std::path::PathBuf {
    let p = dir.join(name);
    std::fs::write(&p, text).unwrap();
    p
}

#[test]
fn binary_writes_files_and_uses_exit_codes() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = write(
        dir.path(),
        "exp.toml",
        "[network]\nlambda = 1e-2\ntheta = \"0dB\"\n[protocol]\neta = 0.5\n[[sweep]]\naxis = \"frame_size\"\nvalues = [1, 2, 3]\n",
    );
    let out = dir.path().join("out.csv");
    let st = bin()
        .args(["analytic", "-c"])
        .arg(&cfg)
        .args(["--eta", "0.7", "-o"])
        .arg(&out)
        .env("FSA_AOI_THREADS", "2")
        .status()
        .unwrap();
    assert_eq!(st.code(), Some(0));
    let t = Table::read_csv(std::fs::File::open(&out).unwrap()).unwrap();
    assert_eq!(t.rows.len(), 3);
    assert!((0..3).all(|i| num(&t, i, "eta") == 0.7));

    let json = bin().args(["analytic", "--format", "json", "--lambda", "0"]).output().unwrap();
    assert_eq!(json.status.code(), Some(0));
    let v: serde_json::Value = serde_json::from_slice(&json.stdout).unwrap();
    assert_eq!(v["rows"][0]["lambda"], 0.0);

    let bad = write(dir.path(), "bad.toml", "[network]\nkind = \"mesh\"\n");
    assert_eq!(bin().args(["analytic", "-c"]).arg(&bad).output().unwrap().status.code(), Some(2));
    assert_eq!(bin().args(["analytic", "--eta", "2"]).output().unwrap().status.code(), Some(2));
    assert_eq!(bin().args(["analytic", "--threads", "0"]).output().unwrap().status.code(), Some(2));
    assert_eq!(bin().args(["analytic", "--bogus"]).output().unwrap().status.code(), Some(2));
    let missing = dir.path().join("missing.toml");
    assert_eq!(bin().args(["analytic", "-c"]).arg(&missing).output().unwrap().status.code(), Some(4));
    let unwritable = dir.path().join("no_such_dir").join("x.csv");
    assert_eq!(bin().args(["analytic", "-o"]).arg(&unwritable).output().unwrap().status.code(), Some(4));

    let figs = dir.path().join("figs");
    let st = bin().args(["figures", "5a", "6b", "--out-dir"]).arg(&figs).status().unwrap();
    assert_eq!(st.code(), Some(0));
    assert!(figs.join("figure_5a.csv").exists() && figs.join("figure_6b.csv").exists());
}

#[test]
fn core_errors_map_to_exit_codes() {
    let cfg: CliError = fsa_aoi_core::Error::InvalidParameter("x".into()).into();
    assert_eq!(cfg.exit_code(), 2);
    let num: CliError = fsa_aoi_core::Error::QuadratureFailed { value: 1.0, abs_err: 1.0 }.into();
    assert_eq!(num.exit_code(), 3);
    let io: CliError = std::io::Error::other("disk").into();
    assert_eq!(io.exit_code(), 4);
}
