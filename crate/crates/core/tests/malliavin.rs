use nmhl_core::fourier::GridFunction;
use nmhl_core::malliavin::*;
use nmhl_core::spectral::{build_symbol, FrequencyGrid, OperatorSpec, Symbol};
use nmhl_core::Error;

fn power(k: u32, n: usize) -> Symbol {
    build_symbol(&OperatorSpec::pure_power(k), FrequencyGrid::new(1, n).unwrap()).unwrap()
}

fn smooth() -> GridFunction {
    GridFunction::from_fn(1, 32, |y| y[0].cos() + 0.3 * (2.0 * y[0]).sin() + 0.1).unwrap()
}

#[test]
fn ibp_preset_grid() {
    for k in [1, 2] {
        for alpha in [0.25, 0.5] {
            for r in [0.0, 1.0] {
                for n in [0usize, 1] {
                    let op = AugmentedOperator::new(power(k, 16), n + 1, alpha, r, k).unwrap();
                    let v = vec![0.7; n];
                    let check = ibp_check(&op, &smooth(), 1.0, &v).unwrap();
                    assert!(check.rel_error < 1e-8, "k={k} α={alpha} r={r} n={n}: {}", check.rel_error);
                    let mut v_full = v.clone();
                    v_full.push(0.0);
                    let agreement = moment_path_agreement(&op, &smooth(), 1.0, &v_full).unwrap();
                    assert!(agreement < 1e-6, "k={k} α={alpha} r={r} n={n}: {agreement}");
                }
            }
        }
    }
}

#[test]
fn ibp_constant_function_vanishes() {
    let op = AugmentedOperator::new(power(2, 16), 1, 0.5, 1.0, 2).unwrap();
    let f = GridFunction::from_fn(1, 32, |_| 2.0).unwrap();
    let check = ibp_check(&op, &f, 1.0, &[]).unwrap();
    assert!(check.lhs.sup_norm() < 1e-15 && check.rhs.sup_norm() < 1e-15);
}

#[test]
fn augmented_multiplier_reduces_to_base() {
    let s = power(2, 16);
    let op = AugmentedOperator::new(s.clone(), 2, 0.5, 1.0, 1).unwrap();
    for xi in 0..5 {
        let m = augmented_multiplier(&op, 0.3, [xi as f64, 0.0], &[0.0, 0.0]).unwrap();
        assert_eq!(m, (-s.at([xi, 0]).unwrap() * 0.3).exp());
    }
}

#[test]
fn multiplier_derivative_matches_finite_difference() {
    let op = AugmentedOperator::new(power(2, 16), 1, 0.5, 1.0, 1).unwrap();
    let h = 1e-6;
    let d = augmented_multiplier_derivative(&op, 0.8, [1.0, 0.0], &[0.3], 0).unwrap();
    let fd = (augmented_multiplier(&op, 0.8, [1.0, 0.0], &[0.3 + h]).unwrap()
        - augmented_multiplier(&op, 0.8, [1.0, 0.0], &[0.3 - h]).unwrap())
        / (2.0 * h);
    assert!((d - fd).norm() < 1e-8);
}

#[test]
fn elementary_ibp_weights() {
    let s = power(2, 16);
    let h = smooth();
    for w in [CascadeWeight::Constant(1.0), CascadeWeight::Power(1.0)] {
        let r = elementary_ibp_check(&s, &[(0, w)], &h, 0.5).unwrap();
        assert!(r.rel_error < 1e-6, "{}", r.rel_error);
    }
    let constant = GridFunction::from_fn(1, 32, |_| 1.0).unwrap();
    let r = elementary_ibp_check(&s, &[(0, CascadeWeight::Constant(1.0))], &constant, 0.5).unwrap();
    assert!(r.lhs.sup_norm() < 1e-15 && r.rhs.sup_norm() < 1e-15);
}

#[test]
fn exponent_fits() {
    let times: Vec<f64> = (0..6).map(|j| 1e-4 * 10f64.powf(j as f64 / 5.0)).collect();
    let quartic = exponent_fit(&power(2, 16), 0.5, 1, &times).unwrap();
    assert!((quartic.r - 0.5).abs() < 0.025, "{}", quartic.r);
    let lap = exponent_fit(&power(1, 16), 0.5, 2, &times).unwrap();
    assert!((lap.r - 1.0).abs() < 0.05, "{}", lap.r);
    assert_eq!(exponent_fit(&power(1, 16), 0.5, 0, &times).unwrap().r, 0.0);
    assert!(matches!(
        exponent_fit(&power(1, 16), 0.5, 1, &[1e-3, 2e-3]),
        Err(Error::InvalidInput(_))
    ));
}

#[test]
fn bounded_moment_scaling_in_time() {
    let op = AugmentedOperator::new(power(2, 16), 1, 0.5, 0.0, 1).unwrap();
    let h = GridFunction::from_fn(1, 32, |_| 1.0).unwrap();
    let c1 = bounded_moment_check(&op, &h, 1.0).unwrap();
    let c2 = bounded_moment_check(&op, &h, 2.0).unwrap();
    // the auxiliary first absolute moment alone scales by 2^{1/2k}; the base
    // kernel's own spread only damps the growth
    let ratio = c2.constant / c1.constant;
    assert!(ratio > 1.0 && ratio < 2f64.sqrt(), "{ratio}");
    assert!(c1.doubling_drift < DOUBLING_TOLERANCE);
}
