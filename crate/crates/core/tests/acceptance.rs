//! One test per acceptance criterion. Each prints a `PASS`/`FAIL` line per
//! sub-check with the measured numbers, then asserts all of them.

use std::f64::consts::{PI, TAU};

use nmhl_core::fourier::GridFunction;
use nmhl_core::large_deviations::*;
use nmhl_core::malliavin::*;
use nmhl_core::semigroup::*;
use nmhl_core::spectral::{build_symbol, FrequencyGrid, Monomial, OperatorSpec, Symbol};
use nmhl_core::varadhan::*;

fn power(k: u32, cutoff: usize) -> Symbol {
    build_symbol(&OperatorSpec::pure_power(k), FrequencyGrid::new(1, cutoff).unwrap()).unwrap()
}

fn geometric(start: f64, stop: f64, per_decade: usize) -> Vec<f64> {
    let n = ((start / stop).log10() * per_decade as f64).round() as usize;
    (0..=n).map(|j| start * 10f64.powf(-(j as f64) / per_decade as f64)).collect()
}

fn wrapped_gaussian(t: f64, y: f64) -> f64 {
    (-50..=50)
        .map(|n| {
            let z = y + TAU * n as f64;
            (-z * z / (4.0 * t)).exp()
        })
        .sum::<f64>()
        / (4.0 * PI * t).sqrt()
}

fn smooth() -> GridFunction {
    GridFunction::from_fn(1, 32, |y| y[0].cos() + 0.3 * (2.0 * y[0]).sin() + 0.1).unwrap()
}

#[derive(Default)]
struct Report {
    failures: Vec<String>,
}

impl Report {
    fn check(&mut self, criterion: u32, label: &str, pass: bool, detail: String) {
        let verdict = if pass { "PASS" } else { "FAIL" };
        println!("criterion {criterion:>2} [{label}]: {verdict} {detail}");
        if !pass {
            self.failures.push(format!("{criterion} [{label}] {detail}"));
        }
    }

    fn finish(self) {
        assert!(self.failures.is_empty(), "failed: {:#?}", self.failures);
    }
}

#[test]
fn criterion_01_gaussian_ground_truth() {
    let mut r = Report::default();
    let mut worst = 0.0f64;
    for t in [0.01, 0.1, 1.0] {
        let s = with_cutoff_for(&power(1, 8), &[t], TRUNCATION_THRESHOLD).unwrap();
        let k = heat_kernel(&s, t, &[0.0], 256).unwrap();
        for (j, v) in k.values().iter().enumerate() {
            worst = worst.max((v - wrapped_gaussian(t, k.point(j)[0])).abs());
        }
    }
    r.check(1, "kernel", worst < 1e-8, format!("max abs error {worst:.3e}"));
    let l = rate_function(
        [0.0, 0.0],
        [1.0, 0.0],
        &Lagrangian::Exact(Hamiltonian::power(1)),
        &RateConfig::default(),
    )
    .unwrap()
    .value;
    r.check(1, "l(0,1)", (l - 0.25).abs() < 1e-6, format!("l = {l:.12}"));
    r.finish();
}

#[test]
fn criterion_02_non_markovian_witness() {
    let mut r = Report::default();
    let s = with_cutoff_for(&power(2, 8), &[0.01], TRUNCATION_THRESHOLD).unwrap();
    let min = heat_kernel(&s, 0.01, &[0.0], 1024).unwrap().min();
    r.check(2, "k=2 t=0.01", min < 0.0, format!("min p = {min:.6e}"));
    r.finish();
}

#[test]
fn criterion_03_ibp_identity() {
    let mut r = Report::default();
    let (mut worst_rel, mut worst_path) = (0.0f64, 0.0f64);
    for k in [1, 2] {
        for alpha in [0.25, 0.5] {
            for rr in [0.0, 1.0] {
                for n in [0usize, 1] {
                    let op = AugmentedOperator::new(power(k, 16), n + 1, alpha, rr, k).unwrap();
                    let v = vec![0.7; n];
                    worst_rel = worst_rel.max(ibp_check(&op, &smooth(), 1.0, &v).unwrap().rel_error);
                    let mut full = v;
                    full.push(0.0);
                    worst_path = worst_path.max(moment_path_agreement(&op, &smooth(), 1.0, &full).unwrap());
                }
            }
        }
    }
    r.check(3, "identity", worst_rel < 1e-8, format!("max rel error {worst_rel:.3e}"));
    r.check(3, "moment paths", worst_path < 1e-6, format!("max disagreement {worst_path:.3e}"));
    r.finish();
}

#[test]
fn criterion_04_elementary_ibp() {
    let mut r = Report::default();
    for (label, w) in [("weight 1", CascadeWeight::Constant(1.0)), ("weight s", CascadeWeight::Power(1.0))] {
        let e = elementary_ibp_check(&power(2, 16), &[(0, w)], &smooth(), 0.5).unwrap();
        r.check(4, label, e.rel_error < 1e-6, format!("rel error {:.3e}", e.rel_error));
    }
    r.finish();
}

#[test]
fn criterion_05_legendre_oracles() {
    let mut r = Report::default();
    let quad = Hamiltonian::power(1);
    let quart = Hamiltonian::power(2);
    let worst = [-2.0, -0.5, 0.3, 1.0, 3.0]
        .iter()
        .map(|&p| (legendre(&quad, [p, 0.0]).unwrap() - p * p / 4.0).abs())
        .fold(0.0, f64::max);
    r.check(5, "L = p²/4", worst < 1e-8, format!("max error {worst:.3e}"));
    let l4 = legendre(&quart, [4.0, 0.0]).unwrap();
    r.check(5, "L(4) = 3", (l4 - 3.0).abs() < 1e-8, format!("L(4) = {l4:.12}"));
    for (k, h) in [(1, quad), (2, quart)] {
        let table = LagrangianTable::build(h.clone(), 20.0, 400).unwrap();
        let worst = [-1.5, -0.4, 0.17, 0.8, 1.5]
            .iter()
            .map(|&xi| (table.biconjugate(xi).unwrap() - h.eval_1d(xi).unwrap()).abs())
            .fold(0.0, f64::max);
        r.check(5, &format!("biconjugate k={k}"), worst < 1e-6, format!("max error {worst:.3e}"));
        let g = table.growth_sandwich(0.1).unwrap();
        r.check(
            5,
            &format!("growth k={k}"),
            g.r_squared >= 0.99,
            format!("R² = {:.6}, q = {:.4}, A = {:.6}", g.r_squared, g.exponent, g.coefficient),
        );
    }
    r.finish();
}

#[test]
fn criterion_06_rate_optimizer() {
    let mut r = Report::default();
    let cfg = RateConfig::default();
    let quad = Lagrangian::Exact(Hamiltonian::power(1));
    let quart = Lagrangian::Table(LagrangianTable::build(Hamiltonian::power(2), 20.0, 400).unwrap());
    for (label, l, y, exact) in [
        ("k=1 y=1", &quad, 1.0, 0.25),
        ("k=1 y=5 winding", &quad, 5.0, (5.0 - TAU).powi(2) / 4.0),
        ("k=2 y=1", &quart, 1.0, ClosedForm::Power { k: 2 }.legendre(1.0)),
        ("k=2 y=4 winding", &quart, 4.0, ClosedForm::Power { k: 2 }.legendre(TAU - 4.0)),
    ] {
        let res = rate_function([0.0, 0.0], [y, 0.0], l, &cfg).unwrap();
        let err = (res.value - exact).abs();
        r.check(
            6,
            label,
            err < 1e-6,
            format!("l = {:.10}, oracle {exact:.10}, winding {:?}", res.value, res.winding),
        );
    }
    r.finish();
}

#[test]
fn criterion_07_varadhan_upper_bound() {
    let mut r = Report::default();
    let cfg = VaradhanConfig::default();
    for (k, times) in [(1, geometric(1.0, 1e-2, 2)), (2, geometric(1e-1, 1e-3, 2))] {
        let c = varadhan_curve(&power(k, 64), k, &[0.0], &[1.0], &times, &cfg).unwrap();
        let pointwise = c.points.iter().all(|p| p.pass);
        let worst = c.points.iter().map(|p| p.v - p.bound).fold(f64::NEG_INFINITY, f64::max);
        r.check(
            7,
            &format!("k={k} pointwise"),
            pointwise,
            format!("max v - bound = {worst:.4}"),
        );
        let limit = c.limit.unwrap_or(f64::NAN);
        let target = c.target;
        let ok = match k {
            1 => (limit - target).abs() <= 0.02 * target.abs(),
            _ => limit <= target + 0.02 * target.abs(),
        };
        r.check(7, &format!("k={k} limit"), ok, format!("limit {limit:.5}, -l = {target:.5}"));
    }
    r.finish();
}

#[test]
fn criterion_08_exit_lemma() {
    let mut r = Report::default();
    let eps = geometric(0.1, 0.01, 4);
    for k in [1, 2] {
        let (delta, s) = (1.0, 1.0);
        let fit = exit_bound_check(&power(k, 32), k, delta, s, &eps).unwrap();
        r.check(
            8,
            &format!("k={k} fit"),
            fit.c > 0.0 && fit.r_squared >= 0.99,
            format!("C = {:.5}, R² = {:.6}", fit.c, fit.r_squared),
        );
        let (reference, tol) = match k {
            1 => (delta * delta / (4.0 * s), 0.15),
            _ => (fit.chernoff_c, 0.20),
        };
        r.check(
            8,
            &format!("k={k} constant"),
            (fit.c - reference).abs() <= tol * reference,
            format!("C = {:.5}, reference {reference:.5}", fit.c),
        );
    }
    r.finish();
}

#[test]
fn criterion_09_tilted_bound() {
    let mut r = Report::default();
    let s = 1.0;
    for eps in [0.2, 0.1] {
        for tilt in [0.0, 0.25, 0.5, 1.0] {
            let heat = tilted_bound_check(&power(1, 32), 1, [tilt, 0.0], s, eps).unwrap();
            let exact = (heat.measured.ln() - s * tilt * tilt / eps).abs();
            r.check(
                9,
                &format!("k=1 ξ={tilt} ε={eps}"),
                heat.pass && exact < 1e-10,
                format!("log measured - sH/ε = {exact:.2e}"),
            );
            let quartic = tilted_bound_check(&power(2, 32), 2, [tilt, 0.0], s, eps).unwrap();
            r.check(
                9,
                &format!("k=2 ξ={tilt} ε={eps}"),
                quartic.pass,
                format!(
                    "log measured {:.5}, sH/ε = {:.5}",
                    quartic.measured.ln(),
                    quartic.predicted.ln()
                ),
            );
        }
    }
    r.finish();
}

#[test]
fn criterion_10_seminorm_exponents() {
    let mut r = Report::default();
    let times: Vec<f64> = (0..6).map(|j| 1e-4 * 10f64.powf(j as f64 / 5.0)).collect();
    let mut fitted = std::collections::HashMap::new();
    for (k, alpha, l) in [(1, 0.5, 1), (1, 0.5, 2), (2, 0.5, 1), (2, 0.5, 2), (2, 0.25, 1), (2, 0.25, 2)] {
        let fit = exponent_fit(&power(k, 16), alpha, l, &times).unwrap();
        let expected = alpha * l as f64;
        r.check(
            10,
            &format!("k={k} α={alpha} l={l}"),
            (fit.r - expected).abs() <= 0.05 * expected,
            format!("r = {:.5}, αl = {expected}", fit.r),
        );
        fitted.insert((k, (alpha * 100.0) as u32, l), fit.r);
    }
    for (k, a) in [(1, 50), (2, 50), (2, 25)] {
        let (r1, r2) = (fitted[&(k, a, 1)], fitted[&(k, a, 2)]);
        let tol = 0.05 * (a as f64 / 100.0) * 3.0;
        r.check(
            10,
            &format!("additivity k={k} α={}", a as f64 / 100.0),
            (r2 - 2.0 * r1).abs() <= tol,
            format!("r(2) - 2r(1) = {:.2e}", r2 - 2.0 * r1),
        );
    }
    r.finish();
}

#[test]
fn criterion_11_davies_gauge() {
    let mut r = Report::default();
    let table = gauge_conjugate(&GaugeFunction::default(), 20.0, 401).unwrap();
    r.check(
        11,
        "sup |C|",
        (table.sup[0] - 0.5).abs() < 1e-10,
        format!("sup |C| = {:.14}", table.sup[0]),
    );
    let h = GridFunction::from_fn(1, 32, |_| 1.0).unwrap();
    for (k, n) in [(1, 1), (2, 1), (2, 2)] {
        let op = AugmentedOperator::new(power(k, 16), n, 0.5, 0.0, k).unwrap();
        let b = bounded_moment_check(&op, &h, 1.0).unwrap();
        r.check(
            11,
            &format!("moment k={k} n={n}"),
            b.doubling_drift < 0.02,
            format!("C = {:.6}, doubling drift {:.2e}", b.constant, b.doubling_drift),
        );
    }
    r.finish();
}

#[test]
fn criterion_12_structural_suite() {
    let mut r = Report::default();
    for k in [1, 2] {
        let sym = with_cutoff_for(&power(k, 8), &[0.05], TRUNCATION_THRESHOLD).unwrap();
        let ck = chapman_kolmogorov_check(&sym, 0.1, 0.05, &[0.4]).unwrap();
        r.check(12, &format!("Chapman-Kolmogorov k={k}"), ck < 1e-8, format!("{ck:.3e}"));
        let sy = kernel_symmetry_check(&sym, 0.1).unwrap();
        r.check(12, &format!("symmetry k={k}"), sy < 1e-10, format!("{sy:.3e}"));
        let mass = heat_kernel(&sym, 0.05, &[0.0], 256).unwrap().mass();
        r.check(12, &format!("mass k={k}"), (mass - 1.0).abs() < 1e-12, format!("mass - 1 = {:.2e}", mass - 1.0));
    }
    let grid = FrequencyGrid::new(1, 16).unwrap();
    let base = build_symbol(&OperatorSpec::pure_power(2), grid).unwrap();
    let q = Symbol::polynomial(grid, &[Monomial::one_d(2, 0.1)]).unwrap();
    let res = duhamel_series(&base, &q, 1.0, &DuhamelConfig::default()).unwrap();
    let dev = duhamel_deviation(&res, &base, &q, 1.0);
    r.check(
        12,
        "Duhamel remainder",
        dev <= res.remainder_bound,
        format!("deviation {dev:.3e} ≤ bound {:.3e}", res.remainder_bound),
    );
    r.finish();
}
