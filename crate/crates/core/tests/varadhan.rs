use std::f64::consts::PI;

use nmhl_core::large_deviations::{Hamiltonian, RateConfig};
use nmhl_core::semigroup::{kernel_value, with_cutoff_for, TRUNCATION_THRESHOLD};
use nmhl_core::spectral::{build_symbol, FrequencyGrid, OperatorSpec, Symbol};
use nmhl_core::varadhan::*;

fn power(k: u32, cutoff: usize) -> Symbol {
    build_symbol(&OperatorSpec::pure_power(k), FrequencyGrid::new(1, cutoff).unwrap()).unwrap()
}

fn geometric(start: f64, stop: f64, per_decade: usize) -> Vec<f64> {
    let n = ((start / stop).log10() * per_decade as f64).round() as usize;
    (0..=n).map(|j| start * 10f64.powf(-(j as f64) / per_decade as f64)).collect()
}

/// Wrapped Gaussian `Σ_n (4πt)^{-1/2} exp(-(y + 2πn)²/4t)`.
fn wrapped_gaussian(t: f64, y: f64) -> f64 {
    (-50..=50)
        .map(|n| {
            let z = y + 2.0 * PI * n as f64;
            (-z * z / (4.0 * t)).exp()
        })
        .sum::<f64>()
        / (4.0 * PI * t).sqrt()
}

#[test]
fn heat_kernel_matches_wrapped_gaussian() {
    let s = power(1, 64);
    for t in [1.0, 1e-1, 1e-2] {
        let s = with_cutoff_for(&s, &[t], TRUNCATION_THRESHOLD).unwrap();
        let p = kernel_value(&s, t, &[0.0], &[1.0]).unwrap();
        let exact = wrapped_gaussian(t, 1.0);
        assert!((p - exact).abs() < 1e-12 * (1.0 + exact), "{t}: {p} vs {exact}");
    }
}

#[test]
fn closed_form_heat_kernel_at_small_time() {
    let t = 1e-3;
    let v = t * wrapped_gaussian(t, 1.0).ln();
    assert!(v <= -0.25 + slack(1, t, C_SLACK));
    assert!((v + 0.25).abs() < 0.01);
}

#[test]
fn second_order_curve() {
    let cfg = VaradhanConfig::default();
    let curve = varadhan_curve(&power(1, 64), 1, &[0.0], &[1.0], &geometric(1.0, 1e-2, 2), &cfg).unwrap();
    assert!((curve.target + 0.25).abs() < 1e-8);
    assert!(curve.pass, "{curve:?}");
    let limit = curve.limit.unwrap();
    assert!((limit + 0.25).abs() < 0.005, "{limit}");
}

#[test]
fn fourth_order_curve_holds_pointwise() {
    let cfg = VaradhanConfig::default();
    let curve = varadhan_curve(&power(2, 64), 2, &[0.0], &[1.0], &geometric(1e-1, 1e-3, 2), &cfg).unwrap();
    let l = 3.0 * 0.25f64.powf(4.0 / 3.0);
    assert!((curve.target + l).abs() < 1e-6);
    assert!(curve.points.iter().all(|p| p.pass), "{curve:?}");
}

#[test]
fn coincident_points_have_zero_target() {
    let cfg = VaradhanConfig::default();
    let curve = varadhan_curve(&power(1, 64), 1, &[0.5], &[0.5], &geometric(1.0, 1e-2, 2), &cfg).unwrap();
    assert_eq!(curve.target, 0.0);
    assert!(curve.points.iter().all(|p| p.pass));
}

#[test]
fn set_estimate_uses_nearest_point() {
    let cfg = VaradhanConfig::default();
    let region = Region::Interval {
        center: 1.0,
        radius: 0.1,
    };
    let curve = wf_set_estimate(&power(1, 64), 1, &[0.0], region, &geometric(1.0, 1e-2, 2), &cfg).unwrap();
    assert!((curve.target + 0.2025).abs() < 1e-6, "{}", curve.target);
    assert!(curve.pass, "{curve:?}");
}

#[test]
fn rejects_bad_time_grids() {
    let cfg = VaradhanConfig::default();
    assert!(varadhan_curve(&power(1, 32), 1, &[0.0], &[1.0], &[1.0, 0.1], &cfg).is_err());
    assert!(varadhan_curve(&power(1, 32), 1, &[0.0], &[1.0], &[0.01, 0.1, 1.0], &cfg).is_err());
}

#[test]
fn chernoff_closed_forms() {
    let c = chernoff_extremize(&Hamiltonian::power(1), 1.0, 1.0, 1.0).unwrap();
    assert!((c.xi_star - 0.5).abs() < 1e-7);
    assert!((c.exponent + 0.25).abs() < 1e-12);
    let c = chernoff_extremize(&Hamiltonian::power(2), 1.0, 1.0, 1.0).unwrap();
    assert!((c.exponent + 0.47247).abs() < 1e-5);
    assert_eq!(chernoff_extremize(&Hamiltonian::power(2), 0.0, 1.0, 1.0).unwrap().exponent, 0.0);
    // exponent scales as 1/ε
    let c2 = chernoff_extremize(&Hamiltonian::power(2), 1.0, 1.0, 0.5).unwrap();
    assert!((c2.exponent - 2.0 * c.exponent).abs() < 1e-12);
}

#[test]
fn chernoff_matches_rate_on_straight_paths() {
    for k in [1, 2] {
        for d in [0.3, 1.0, 2.0] {
            let c = chernoff_extremize(&Hamiltonian::power(k), d, 1.0, 1.0).unwrap();
            let lagrangian = nmhl_core::large_deviations::ClosedForm::Power { k }.legendre(d);
            assert!((c.exponent + lagrangian).abs() < 1e-8, "{k} {d}");
        }
    }
}

#[test]
fn second_order_exit_matches_chernoff() {
    let eps = geometric(0.1, 0.01, 4);
    let fit = exit_bound_check(&power(1, 32), 1, 1.0, 1.0, &eps).unwrap();
    assert!(fit.log_mass.iter().all(|m| *m < 0.0));
    assert!((fit.chernoff_c - 0.25).abs() < 1e-10);
    assert!(fit.r_squared > EXIT_FIT_R2);
    assert!((fit.c - fit.chernoff_c).abs() < 0.05 * fit.chernoff_c, "{fit:?}");
}

#[test]
fn tilted_bound_zero_tilt_and_heat() {
    let zero = tilted_bound_check(&power(1, 32), 1, [0.0, 0.0], 1.0, 0.1).unwrap();
    assert!((zero.measured - 1.0).abs() < 1e-10, "{zero:?}");
    assert!(zero.pass);
    // the quartic kernel changes sign, so its L¹ norm exceeds one at any scale
    let quartic = tilted_bound_check(&power(2, 32), 2, [0.0, 0.0], 1.0, 0.1).unwrap();
    assert!(quartic.measured > 1.2 && !quartic.pass, "{quartic:?}");
    // for ξ² the tilted kernel is a positive Gaussian of mass e^{s ξ²/ε}
    let heat = tilted_bound_check(&power(1, 32), 1, [1.0, 0.0], 1.0, 0.2).unwrap();
    assert!((heat.measured.ln() - heat.predicted.ln()).abs() < 1e-10, "{heat:?}");
    assert!(heat.pass);
}

#[test]
fn localized_estimate_of_zero_bump() {
    let cfg = VaradhanConfig::default();
    let mut bump = Bump::new([2.0, 0.0], 0.5);
    bump.amplitude = 0.0;
    let out = localized_estimate(&power(1, 64), 1, &[0.0], bump, &[[0, 0]], &geometric(1.0, 1e-2, 2), &cfg).unwrap();
    assert!(out[0].curve.points.iter().all(|p| p.v == f64::NEG_INFINITY));
    assert!(out[0].curve.pass);
}

#[test]
fn localized_estimate_of_heat_bump() {
    let cfg = VaradhanConfig::default();
    let bump = Bump::new([1.0, 0.0], 0.5);
    let out = localized_estimate(
        &power(1, 64),
        1,
        &[0.0],
        bump,
        &[[0, 0], [1, 0]],
        &geometric(1.0, 1e-2, 2),
        &cfg,
    )
    .unwrap();
    // nearest support point is 0.5
    assert!((out[0].curve.target + 0.95 * 0.5 * 0.5 / 4.0).abs() < 1e-6);
    assert!(out[0].r.abs() < 1e-9);
    assert!((out[1].r - 0.5).abs() < 0.02, "{}", out[1].r);
    assert!(out.iter().all(|c| c.curve.pass), "{out:?}");
}

#[test]
fn rate_config_defaults() {
    let cfg = VaradhanConfig::default();
    assert_eq!(cfg.c_slack, 0.5);
    assert_eq!(cfg.rate, RateConfig::default());
}
