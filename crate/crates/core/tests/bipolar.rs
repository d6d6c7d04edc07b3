use std::f64::consts::PI;

use approx::assert_relative_eq;
use fsa_aoi_core::bipolar::*;
use fsa_aoi_core::numerics::gamma_fn;
use fsa_aoi_core::renewal::ProtocolParams;
use fsa_aoi_core::{AoiValue, Divergence, SeriesSpec};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, Exp1, Poisson};

fn cfg(lambda: f64, r: f64) -> BipolarConfig {
    BipolarConfig::new(lambda, r, 3.5, 1.0).unwrap()
}

fn pp(eta: f64, f: u32) -> ProtocolParams {
    ProtocolParams::new(eta, f).unwrap()
}

fn s() -> SeriesSpec {
    SeriesSpec::default()
}

/// ∫_0^∞ h(u) du by composite Simpson on [0, 10³] plus an algebraic tail
/// ∫_{10³}^∞ k u^{1−α} du supplied by the caller.
fn radial(h: impl Fn(f64) -> f64, tail_coeff: f64, alpha: f64) -> f64 {
    let (top, n) = (1e3, 2_000_000usize);
    let dx = top / n as f64;
    let mut acc = h(0.0) + h(top);
    for i in 1..n {
        acc += h(i as f64 * dx) * if i % 2 == 1 { 4.0 } else { 2.0 };
    }
    acc * dx / 3.0 + tail_coeff * top.powf(2.0 - alpha) / (alpha - 2.0)
}

/// PGFL exponents of E[μ], E[1/μ], E[1/μ²] in the normalized radius u = ‖x‖/(r θ^{1/α}).
fn pgfl_moments(c: &BipolarConfig, beta: f64) -> (f64, f64, f64) {
    let a = c.alpha;
    let scale = c.lambda * PI * c.r * c.r * c.theta.powf(2.0 / a);
    let factor = |u: f64| 1.0 - beta / (1.0 + u.powf(a));
    let e_mu = radial(|u| 2.0 * u * (1.0 - factor(u)), 2.0 * beta, a);
    let e_inv = radial(|u| 2.0 * u * (1.0 / factor(u) - 1.0), 2.0 * beta, a);
    let e_inv2 = radial(|u| 2.0 * u * (factor(u).powi(-2) - 1.0), 4.0 * beta, a);
    ((-scale * e_mu).exp(), (scale * e_inv).exp(), (scale * e_inv2).exp())
}

#[test]
fn contention_against_gamma_functions() {
    let c = cfg(1e-2, 10.0);
    let d = 2.0 / 3.5;
    let oracle = 1e-2 * PI * 100.0 * gamma_fn(1.0 - d).unwrap() * gamma_fn(1.0 + d).unwrap();
    assert_relative_eq!(contention(&c).0, oracle, max_relative = 1e-12);
    let c4 = BipolarConfig::new(1.0 / PI, 1.0, 4.0, 1.0).unwrap();
    assert_relative_eq!(contention(&c4).0, PI / 2.0, max_relative = 1e-14);
    assert_eq!(contention(&cfg(0.0, 10.0)).0, 0.0);
}

#[test]
fn success_probability_examples() {
    let c = cfg(1e-2, 10.0);
    let p = pp(0.8, 3);
    assert_eq!(cond_success_prob_bipolar(&[], p, &c).unwrap().get(), 1.0);
    let one = cond_success_prob_bipolar(&[10.0], p, &c).unwrap().get();
    assert_relative_eq!(one, 1.0 - p.beta() / 2.0, max_relative = 1e-15);
    assert!(cond_success_prob_bipolar(&[0.0], p, &c).is_err());
}

#[test]
fn success_probability_against_fading_monte_carlo() {
    let c = cfg(1e-2, 10.0);
    let p = pp(0.8, 3);
    let mut rng = ChaCha8Rng::seed_from_u64(7);
    let d: Vec<f64> = (0..50).map(|_| 10.0 + 60.0 * rng.random::<f64>().sqrt()).collect();
    let mu = cond_success_prob_bipolar(&d, p, &c).unwrap().get();
    let slots = 1_000_000;
    let mut ok = 0u64;
    for _ in 0..slots {
        let mut interference = 0.0;
        for &x in &d {
            if rng.random::<f64>() < p.beta() {
                let h: f64 = Exp1.sample(&mut rng);
                interference += h * x.powf(-3.5);
            }
        }
        let h0: f64 = Exp1.sample(&mut rng);
        if h0 * 10f64.powf(-3.5) > interference {
            ok += 1;
        }
    }
    let est = ok as f64 / slots as f64;
    let sd = (mu * (1.0 - mu) / slots as f64).sqrt();
    assert!((est - mu).abs() < 3.0 * sd, "{est} vs {mu}");
}

#[test]
fn moments_against_pgfl_quadrature() {
    for &(lambda, r, beta) in &[(1e-2, 10.0, 0.8 / 3.0), (2e-2, 15.0, 0.1), (5e-3, 10.0, 0.6)] {
        let c = cfg(lambda, r);
        let p = ProtocolParams::new(beta, 1).unwrap();
        let (m, m1, m2) = pgfl_moments(&c, beta);
        assert_relative_eq!(mean_mu(&c, p), m, max_relative = 1e-7);
        assert_relative_eq!(mean_inv_mu(&c, p).finite().unwrap(), m1, max_relative = 1e-7);
        assert_relative_eq!(mean_inv_mu_sq(&c, p, &s()).unwrap().finite().unwrap(), m2, max_relative = 1e-7);
    }
}

#[test]
fn second_inverse_moment_series_against_closed_form() {
    for &d in &[0.3, 4.0 / 7.0, 0.8] {
        for &b in &[0.01, 0.2, 0.5, 0.9] {
            let closed = 2.0 * b * f64::powf(1.0 - b, d - 1.0) + (1.0 - d) * b * b * f64::powf(1.0 - b, d - 2.0);
            assert_relative_eq!(-inv_mu_sq_series(d, b, &s()).unwrap(), closed, max_relative = 1e-10);
        }
    }
}

#[test]
fn second_inverse_moment_against_ppp_monte_carlo() {
    // C = 0.5, δ = 4/7, β = 0.2
    let d = 4.0 / 7.0;
    let omega = PI * d / (PI * d).sin();
    let c = BipolarConfig::new(0.5 / (PI * omega), 1.0, 3.5, 1.0).unwrap();
    assert_relative_eq!(contention(&c).0, 0.5, max_relative = 1e-12);
    let p = ProtocolParams::new(0.2, 1).unwrap();
    let exact = mean_inv_mu_sq(&c, p, &s()).unwrap().finite().unwrap();

    let radius: f64 = 100.0;
    let mut rng = ChaCha8Rng::seed_from_u64(3);
    let count = Poisson::new(c.lambda * PI * radius * radius).unwrap();
    let n = 10_000;
    let samples: Vec<f64> = (0..n)
        .map(|_| {
            let k = count.sample(&mut rng) as usize;
            let dist: Vec<f64> = (0..k).map(|_| radius * rng.random::<f64>().sqrt()).collect();
            cond_success_prob_bipolar(&dist, p, &c).unwrap().get().powi(-2)
        })
        .collect();
    let mean = samples.iter().sum::<f64>() / n as f64;
    let sd = (samples.iter().map(|x| (x - mean).powi(2)).sum::<f64>() / (n as f64 - 1.0)).sqrt();
    assert!((mean - exact).abs() < 3.0 * sd / (n as f64).sqrt(), "{mean} vs {exact}");
}

#[test]
fn average_aoi_examples() {
    let free = cfg(0.0, 10.0);
    assert_eq!(avg_aoi_bipolar(&free, pp(0.5, 1)), AoiValue::Finite(2.0));
    for f in 1..8u32 {
        let eta = 0.7;
        let fl = f as f64;
        let expected = fl / eta + (fl * fl - 1.0) * eta / (12.0 * fl) + (1.0 - fl) / 2.0;
        assert_relative_eq!(avg_aoi_bipolar(&free, pp(eta, f)).finite().unwrap(), expected, max_relative = 1e-14);
    }
    let c = cfg(1e-2, 10.0);
    assert_eq!(avg_aoi_bipolar(&c, pp(1.0, 1)), AoiValue::Infinite(Divergence::FullLoad));
    assert!(avg_aoi_sa(&c, 1.0).unwrap().is_infinite());
    assert_eq!(avg_aoi_sa(&free, 0.25).unwrap(), AoiValue::Finite(4.0));
    // lazy updating blows up
    let mut prev = 0.0;
    for k in 1..8 {
        let v = avg_aoi_sa(&c, 10f64.powi(-k)).unwrap().finite().unwrap();
        assert!(v > prev);
        prev = v;
    }
}

#[test]
fn fsa_decomposes_into_sa_plus_q1() {
    for &lambda in &[0.0, 5e-3, 1e-2, 2e-2] {
        for &r in &[5.0, 10.0, 15.0] {
            let c = cfg(lambda, r);
            for &eta in &[0.1, 0.4, 0.8, 1.0] {
                for f in 1..=12u32 {
                    let p = pp(eta, f);
                    let (lhs, sa) = (avg_aoi_bipolar(&c, p), avg_aoi_sa(&c, p.beta()).unwrap());
                    match (lhs, sa) {
                        (AoiValue::Finite(a), AoiValue::Finite(b)) => {
                            assert_relative_eq!(a, b + q1(&c, p), max_relative = 1e-9)
                        }
                        (a, b) => assert!(a.is_infinite() && b.is_infinite()),
                    }
                }
            }
        }
    }
    assert_eq!(q1(&cfg(1e-2, 10.0), pp(0.5, 1)), 0.0);
}

#[test]
fn conversion_schemes_favor_fsa() {
    let mut rng = ChaCha8Rng::seed_from_u64(42);
    for _ in 0..200 {
        let c_target: f64 = rng.random_range(0.0..10.0);
        let eta_sa: f64 = 1e-6 + (0.5 - 1e-6) * rng.random::<f64>();
        let c = BipolarConfig::new(c_target / (PI * 100.0 * contention(&cfg(1.0, 1.0)).0 / PI), 10.0, 3.5, 1.0).unwrap();
        assert!(q1(&c, pp(2.0 * eta_sa, 2)) < 0.0);
    }
    for f in 2..=20u32 {
        for k in 0..=10 {
            let c = cfg(k as f64 * 1e-3, 10.0);
            let v = q1(&c, pp(1.0, f));
            assert!(v < 0.0);
            if k == 0 {
                let fl = f as f64;
                assert_relative_eq!(v, -(5.0 * fl - 1.0) * (fl - 1.0) / (12.0 * fl), max_relative = 1e-12);
            }
        }
    }
}

#[test]
fn lower_bound_values_and_validity() {
    assert_eq!(aoi_lower_bound(1), 0.0);
    assert_relative_eq!(aoi_lower_bound(2), 0.5, max_relative = 1e-15);
    assert_relative_eq!(aoi_lower_bound(7), 1.0, max_relative = 1e-15);
    for &lambda in &[0.0, 1e-3, 1e-2, 5e-2] {
        for &r in &[2.0, 10.0, 20.0] {
            for &alpha in &[2.5, 3.5, 4.5] {
                for &theta in &[0.1, 1.0, 10.0] {
                    let c = BipolarConfig::new(lambda, r, alpha, theta).unwrap();
                    for &eta in &[0.05, 0.3, 0.7, 1.0] {
                        for f in [1u32, 2, 3, 5, 10, 30] {
                            if let AoiValue::Finite(v) = avg_aoi_bipolar(&c, pp(eta, f)) {
                                assert!(v >= aoi_lower_bound(f) - 1e-12);
                            }
                        }
                    }
                }
            }
        }
    }
}

#[test]
fn success_probability_decreases_with_load_and_geometry() {
    let base = (1e-2, 10.0, 1.0, 0.3);
    let m = |(l, r, th, b): (f64, f64, f64, f64)| mean_mu(&BipolarConfig::new(l, r, 3.5, th).unwrap(), ProtocolParams::new(b, 1).unwrap());
    let m0 = m(base);
    assert!(m((2e-2, base.1, base.2, base.3)) < m0);
    assert!(m((base.0, 12.0, base.2, base.3)) < m0);
    assert!(m((base.0, base.1, 2.0, base.3)) < m0);
    assert!(m((base.0, base.1, base.2, 0.4)) < m0);
}

#[test]
fn frame_derivative_increases_on_reference_configurations() {
    for &(lambda, r) in &[(1e-2, 10.0), (2e-2, 10.0), (1e-2, 15.0), (2e-2, 15.0)] {
        let c = cfg(lambda, r);
        let mut prev = f64::NEG_INFINITY;
        for i in 0..=490 {
            let f = 1.0 + i as f64 * 0.1;
            let y = y_of_f(&c, 0.8, f);
            assert!(y >= prev - 1e-12, "y decreased at F = {f}");
            prev = y;
        }
    }
}

#[test]
fn frame_derivative_matches_finite_difference() {
    // AoI as a function of real F
    let c = cfg(1e-2, 10.0);
    let eta = 0.8;
    let big_c = contention(&c).0;
    let d = c.delta();
    let aoi = |f: f64| {
        let b = eta / f;
        f / eta * (big_c * b * (1.0 - b).powf(d - 1.0)).exp() + (f * f - 1.0) * eta / (12.0 * f) * (-big_c * b).exp()
            + (1.0 - f) / 2.0
    };
    for &f in &[1.5, 3.0, 7.25, 20.0] {
        let h = 1e-5;
        let fd = (aoi(f + h) - aoi(f - h)) / (2.0 * h);
        assert_relative_eq!(y_of_f(&c, eta, f), fd, max_relative = 1e-6, epsilon = 1e-8);
    }
}

#[test]
fn optimal_frame_is_exhaustive_argmin() {
    for &(lambda, r) in &[(1e-2, 10.0), (2e-2, 10.0), (1e-2, 15.0), (2e-2, 15.0), (0.0, 10.0)] {
        let c = cfg(lambda, r);
        for &eta in &[0.4, 0.8, 1.0] {
            let best = (1..=50u32)
                .min_by(|&a, &b| {
                    let (x, y) = (avg_aoi_bipolar(&c, pp(eta, a)).as_f64(), avg_aoi_bipolar(&c, pp(eta, b)).as_f64());
                    x.total_cmp(&y)
                })
                .unwrap();
            assert_eq!(optimal_frame(&c, eta, 50).unwrap(), best, "λ={lambda}, r={r}, η={eta}");
        }
    }
    assert_eq!(optimal_frame(&cfg(0.0, 10.0), 0.8, 200).unwrap(), 1);
}

#[test]
fn throughput_and_power() {
    let c = BipolarConfig::new(0.0, 10.0, 3.5, std::f64::consts::E - 1.0).unwrap();
    assert_relative_eq!(spatial_throughput(&c, pp(1.0, 1)), 1.0, max_relative = 1e-15);
    assert_eq!(tx_power(pp(0.6, 1), 2.0), 1.2);
    assert_eq!(tx_power(pp(1.0, 4), 1.0), 0.25);
    // the maximizing rate is min(1, 1/C)
    for &lambda in &[2e-3, 1e-2, 3e-2] {
        let c = cfg(lambda, 10.0);
        let big_c = contention(&c).0;
        let n = 100_000;
        let best = (1..=n)
            .map(|i| i as f64 / n as f64)
            .max_by(|&a, &b| {
                let t = |x: f64| spatial_throughput(&c, ProtocolParams::new(x, 1).unwrap());
                t(a).total_cmp(&t(b))
            })
            .unwrap();
        assert!((best - (1.0 / big_c).min(1.0)).abs() < 2e-5, "{best} vs {}", 1.0 / big_c);
    }
}

#[test]
fn variance_assemblies_agree() {
    for &lambda in &[0.0, 5e-3, 1e-2, 2e-2] {
        let c = cfg(lambda, 10.0);
        for &eta in &[0.2, 0.5, 0.8] {
            for f in [1u32, 2, 3, 5, 9] {
                let p = pp(eta, f);
                let a = var_aoi_bipolar(&c, p, &s()).unwrap().finite().unwrap();
                let b = var_aoi_bipolar_expanded(&c, p, &s()).unwrap().finite().unwrap();
                assert_relative_eq!(a, b, max_relative = 1e-9);
                assert!(a >= 0.0);
                let sa = var_aoi_sa(&c, p.beta(), &s()).unwrap().finite().unwrap();
                assert_relative_eq!(a, sa + q2_bipolar(&c, p, &s()).unwrap(), max_relative = 1e-9, epsilon = 1e-9);
            }
        }
    }
}

#[test]
fn variance_examples() {
    let free = cfg(0.0, 10.0);
    assert_relative_eq!(var_aoi_bipolar(&free, pp(0.5, 1), &s()).unwrap().finite().unwrap(), 2.0, max_relative = 1e-14);
    assert_eq!(var_aoi_sa(&free, 1.0, &s()).unwrap().finite().unwrap(), 0.0);
    let c = cfg(1e-2, 10.0);
    for &eta in &[0.3, 0.6] {
        assert_eq!(var_aoi_bipolar(&c, pp(eta, 1), &s()).unwrap(), var_aoi_sa(&c, eta, &s()).unwrap());
        assert_eq!(avg_aoi_bipolar(&c, pp(eta, 1)), avg_aoi_sa(&c, eta).unwrap());
        assert_eq!(q2_bipolar(&c, pp(eta, 1), &s()).unwrap(), 0.0);
    }
    // a dense network favors framing for the variance too
    let dense = cfg(5e-2, 10.0);
    let p = pp(0.8, 3);
    let q = q2_bipolar(&dense, p, &s()).unwrap();
    assert!(q < 0.0);
    let diff = var_aoi_bipolar(&dense, p, &s()).unwrap().as_f64() - var_aoi_sa(&dense, p.beta(), &s()).unwrap().as_f64();
    assert_relative_eq!(q, diff, max_relative = 1e-9);
}
