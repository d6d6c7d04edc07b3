use approx::assert_relative_eq;
use fsa_aoi_core::renewal::*;

/// Time-average moments from the cycle law: I = K·F + j' − j with K ≥ 1
/// geometric over frames (success probability ημ per frame) and j, j'
/// uniform slot offsets. Summed exhaustively until the tail is negligible.
fn cycle_oracle(eta: f64, f: u32, mu: f64) -> (f64, f64) {
    let p = eta * mu;
    let fw = 1.0 / (f as f64 * f as f64);
    let (mut ei, mut ea, mut eb) = (0.0, 0.0, 0.0);
    let mut pk = p;
    let mut k = 1u64;
    while pk > 1e-18 || k < 10 {
        for j in 0..f {
            for j2 in 0..f {
                let i = (k * f as u64 + j2 as u64 - j as u64) as f64;
                let w = pk * fw;
                ei += w * i;
                ea += w * i * (i + 1.0) / 2.0;
                eb += w * i * (i + 1.0) * (2.0 * i + 1.0) / 6.0;
            }
        }
        pk *= 1.0 - p;
        k += 1;
        if p == 1.0 {
            break;
        }
    }
    (ea / ei, eb / ei)
}

fn params(eta: f64, f: u32) -> ProtocolParams {
    ProtocolParams::new(eta, f).unwrap()
}

fn mu(x: f64) -> CondSuccessProb {
    CondSuccessProb::new(x).unwrap()
}

#[test]
fn closed_forms_match_cycle_enumeration() {
    for &eta in &[0.1, 0.35, 0.6, 1.0] {
        for f in [1u32, 2, 3, 5, 8] {
            for &m in &[0.25, 0.5, 0.8, 1.0] {
                let (mean, second) = cycle_oracle(eta, f, m);
                let p = params(eta, f);
                assert_relative_eq!(cond_avg_aoi(p, mu(m)), mean, max_relative = 1e-10);
                assert_relative_eq!(cond_quad_aoi(p, mu(m)), second, max_relative = 1e-10);
            }
        }
    }
}

#[test]
fn reference_values() {
    let p = params(0.5, 3);
    let m = mu(0.8);
    assert_relative_eq!(cond_avg_aoi(p, m), 8.0 / 36.0 * 0.4 + 3.0 / 0.4 - 1.0, max_relative = 1e-14);
    assert_relative_eq!(cond_avg_aoi(p, m), 6.5889, max_relative = 1e-5);
    assert_relative_eq!(cond_quad_aoi(p, m), 78.0889, max_relative = 1e-5);
    assert_relative_eq!(cond_var_aoi(p, m), 34.67, max_relative = 1e-3);

    let sa = params(0.5, 1);
    assert_relative_eq!(cond_avg_aoi(sa, m), 2.5, max_relative = 1e-14);
    assert_relative_eq!(cond_quad_aoi(sa, m), 10.0, max_relative = 1e-14);
    assert_relative_eq!(cond_var_aoi(sa, m), 3.75, max_relative = 1e-13);

    let det = params(1.0, 1);
    assert_eq!(cond_avg_aoi(det, mu(1.0)), 1.0);
    assert_eq!(cond_quad_aoi(det, mu(1.0)), 1.0);
    assert_eq!(cond_var_aoi(det, mu(1.0)), 0.0);
}

#[test]
fn geometric_moments_by_summation() {
    for &p in &[0.4, 0.5, 0.9, 1.0] {
        let (mut m1, mut m2, mut m3) = (0.0, 0.0, 0.0);
        for k in 1..=10_000u32 {
            let w = p * (1.0f64 - p).powi(k as i32 - 1);
            let k = k as f64;
            m1 += w * k;
            m2 += w * k * k;
            m3 += w * k * k * k;
        }
        let (a, b, c) = geometric_moments(p);
        assert_relative_eq!(a, m1, max_relative = 1e-12);
        assert_relative_eq!(b, m2, max_relative = 1e-12);
        assert_relative_eq!(c, m3, max_relative = 1e-12);
    }
    assert_eq!(geometric_moments(1.0), (1.0, 1.0, 1.0));
    assert_relative_eq!(geometric_moments(0.4).2, 58.75, max_relative = 1e-14);
    let (a, b, _) = geometric_moments(0.5);
    assert_eq!((a, b), (2.0, 6.0));
}

#[test]
fn uniform_slot_moments() {
    for f in 1..=16u64 {
        let n = f as f64;
        let e1 = (1..=f).sum::<u64>() as f64 / n;
        let e2 = (1..=f).map(|k| k * k).sum::<u64>() as f64 / n;
        assert_relative_eq!(e1, (n + 1.0) / 2.0, max_relative = 1e-15);
        assert_relative_eq!(e2, (n + 1.0) * (2.0 * n + 1.0) / 6.0, max_relative = 1e-15);
    }
}

#[test]
fn simulation_agrees_with_closed_forms() {
    let p = params(0.5, 3);
    let run = simulate_renewal(p, mu(0.8), 4_000_000, 11).unwrap();
    let s = run.stats;
    let exact = cond_avg_aoi(p, mu(0.8));
    assert_relative_eq!(s.mean, exact, max_relative = 0.01);
    let se = s.ci_halfwidth_mean.unwrap() / 1.96;
    assert!((s.mean - exact).abs() < 3.0 * se, "{} vs {exact} (se {se})", s.mean);
    assert_relative_eq!(s.second_moment, cond_quad_aoi(p, mu(0.8)), max_relative = 0.02);
    // mean inter-delivery time F/(ημ)
    assert_relative_eq!(run.mean_interval, 3.0 / 0.4, max_relative = 0.01);
    assert!(!s.low_sample);
}

#[test]
fn simulation_grid_within_three_standard_errors() {
    let mut seed = 100;
    for &eta in &[0.3, 0.7, 1.0] {
        for f in [1u32, 3, 6] {
            for &m in &[0.4, 0.9] {
                let p = params(eta, f);
                let s = renewal_oracle_sim(p, mu(m), 400_000, seed).unwrap();
                seed += 1;
                let exact = cond_avg_aoi(p, mu(m));
                let se = s.ci_halfwidth_mean.unwrap() / 1.96;
                assert!((s.mean - exact).abs() < 3.0 * se + 1e-12, "({eta}, {f}, {m}): {} vs {exact}", s.mean);
            }
        }
    }
}

#[test]
fn deterministic_channel_simulates_exactly() {
    let s = renewal_oracle_sim(params(1.0, 1), mu(1.0), 10_000, 0).unwrap();
    assert_eq!(s.mean, 1.0);
    assert_eq!(s.variance, 0.0);
}

#[test]
fn simulation_is_reproducible() {
    let p = params(0.6, 4);
    let a = renewal_oracle_sim(p, mu(0.7), 50_000, 5).unwrap();
    let b = renewal_oracle_sim(p, mu(0.7), 50_000, 5).unwrap();
    assert_eq!(a, b);
}

#[test]
fn invalid_inputs_rejected() {
    assert!(ProtocolParams::new(0.0, 3).is_err());
    assert!(ProtocolParams::new(1.1, 3).is_err());
    assert!(ProtocolParams::new(0.5, 0).is_err());
    assert!(CondSuccessProb::new(0.0).is_err());
    assert!(CondSuccessProb::new(1.5).is_err());
    assert!(renewal_oracle_sim(params(0.1, 8), mu(0.1), 1000, 0).is_err());
}
