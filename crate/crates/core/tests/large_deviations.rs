use std::f64::consts::TAU;

use nmhl_core::large_deviations::*;
use nmhl_core::spectral::{build_symbol, FrequencyGrid, LevyDensity, OperatorSpec};
use proptest::prelude::*;

/// Brute-force supremum over a fine grid, independent of the bracketing code.
fn grid_sup(h: &Hamiltonian, p: f64, radius: f64, points: usize) -> f64 {
    (0..=points)
        .map(|j| {
            let xi = -radius + 2.0 * radius * j as f64 / points as f64;
            p * xi - h.eval_1d(xi).unwrap()
        })
        .fold(f64::NEG_INFINITY, f64::max)
}

#[test]
fn legendre_oracles() {
    let quad = Hamiltonian::power(1);
    let quart = Hamiltonian::power(2);
    for p in [-3.0, -1.0, 0.5, 1.0, 2.0] {
        assert!((legendre(&quad, [p, 0.0]).unwrap() - p * p / 4.0).abs() < 1e-8);
        let oracle = grid_sup(&quad, p, 4.0, 200_000);
        assert!((legendre(&quad, [p, 0.0]).unwrap() - oracle).abs() < 1e-8);
    }
    assert!((legendre(&quart, [4.0, 0.0]).unwrap() - 3.0).abs() < 1e-8);
    let (_, argmax) = legendre_with_argmax(&quart, [4.0, 0.0]).unwrap();
    assert!((argmax[0] - 1.0).abs() < 1e-6);
    assert!((grid_sup(&quart, 4.0, 3.0, 300_000) - 3.0).abs() < 1e-8);
}

#[test]
fn biconjugate_and_growth() {
    for k in [1, 2] {
        let table = LagrangianTable::build(Hamiltonian::power(k), 40.0, 400).unwrap();
        for xi in [-1.5, -0.5, 0.0, 0.7, 1.4] {
            let h = Hamiltonian::power(k).eval_1d(xi).unwrap();
            assert!((table.biconjugate(xi).unwrap() - h).abs() < 1e-6, "k={k} ξ={xi}");
        }
        let g = table.growth_sandwich(0.05).unwrap();
        assert!(g.r_squared >= 0.99);
        let q = 2.0 * k as f64 / (2.0 * k as f64 - 1.0);
        assert!((g.exponent - q).abs() < 1e-15);
        for (&p, &l) in table.nodes().iter().zip(table.values()) {
            let x = p.abs().powf(q);
            assert!(l >= -g.lower_offset + g.lower_coeff * x - 1e-12);
            assert!(l <= g.upper_offset + g.upper_coeff * x + 1e-12);
        }
    }
}

#[test]
fn rate_function_straight_line_oracles() {
    let cfg = RateConfig::default();
    let quad = Lagrangian::Exact(Hamiltonian::power(1));
    let r = rate_function([0.0, 0.0], [1.0, 0.0], &quad, &cfg).unwrap();
    assert!((r.value - 0.25).abs() < 1e-6);
    assert_eq!(r.winding, [0, 0]);

    let quart = Lagrangian::Table(LagrangianTable::build(Hamiltonian::power(2), 20.0, 400).unwrap());
    let r = rate_function([0.0, 0.0], [1.0, 0.0], &quart, &cfg).unwrap();
    assert!((r.value - 3.0 * 0.25f64.powf(4.0 / 3.0)).abs() < 1e-6, "{}", r.value);

    let same = rate_function([2.0, 0.0], [2.0, 0.0], &quart, &cfg).unwrap();
    assert_eq!(same.value, 0.0);

    // displacement 5 > π: the class w = -1 wins
    let r = rate_function([0.0, 0.0], [5.0, 0.0], &quad, &cfg).unwrap();
    assert_eq!(r.winding, [-1, 0]);
    assert!((r.value - (5.0 - TAU).powi(2) / 4.0).abs() < 1e-6);
    assert_eq!(r.classes_searched, 5);
}

#[test]
fn optimizer_never_beats_straight_line() {
    let quart = Lagrangian::Table(LagrangianTable::build(Hamiltonian::power(2), 40.0, 400).unwrap());
    let cfg = RateConfig::default();
    let straight = PathPL::straight(1, [0.3, 0.0], [1.8, 0.0], [0, 0], 64).unwrap();
    let oracle = action(&straight, &quart).unwrap();
    let mut nodes = straight.nodes().to_vec();
    for (i, n) in nodes.iter_mut().enumerate().take(64).skip(1) {
        n[0] += 0.4 * (i as f64 * std::f64::consts::PI / 64.0).sin() * (i as f64 * 0.37).cos();
    }
    let start = PathPL::from_nodes(1, nodes, [0, 0]).unwrap();
    let r = minimize_action(&start, &quart, &cfg).unwrap();
    assert!(r.value >= oracle - 1e-8);
    assert!((r.value - oracle).abs() < 1e-6, "{} {}", r.value, oracle);
}

#[test]
fn x_dependent_lagrangian_runs() {
    // L(x, p) = p²/4 (1 + 0.5 cos x): the optimizer lingers where cos x < 0
    let l = Lagrangian::field(1, |x, p| 0.25 * p[0] * p[0] * (1.0 + 0.5 * x[0].cos()));
    let cfg = RateConfig {
        segments: 32,
        winding_max: 1,
        ..RateConfig::default()
    };
    let r = rate_function([0.0, 0.0], [2.0, 0.0], &l, &cfg).unwrap();
    let straight = action(&PathPL::straight(1, [0.0, 0.0], [2.0, 0.0], [0, 0], 32).unwrap(), &l).unwrap();
    assert!(r.value <= straight + 1e-12);
    assert!(r.residual <= 1e-6);
}

#[test]
fn rate_function_is_continuous() {
    let quad = Lagrangian::Exact(Hamiltonian::power(1));
    let cfg = RateConfig {
        segments: 8,
        ..RateConfig::default()
    };
    let mut jumps = Vec::new();
    for n in [16, 64] {
        let values: Vec<f64> = (0..=n)
            .map(|j| rate_function([0.0, 0.0], [TAU * j as f64 / n as f64, 0.0], &quad, &cfg).unwrap().value)
            .collect();
        let jump = values.windows(2).fold(0.0f64, |acc, w| acc.max((w[1] - w[0]).abs()));
        jumps.push(jump);
    }
    // Lipschitz: four times finer endpoints, a quarter of the jump
    assert!(jumps[1] < 0.3 * jumps[0], "{jumps:?}");
}

#[test]
fn maslov_levy_limit() {
    let spec = OperatorSpec::Levy {
        l: 1,
        alpha_levy: -0.5,
        density: LevyDensity::indicator(1.0),
    };
    let s = build_symbol(&spec, FrequencyGrid::new(1, 4).unwrap()).unwrap();
    for xi in [1i64, 2] {
        let limit = (xi as f64).powi(4) / 30.0;
        let mut previous = f64::NEG_INFINITY;
        for eps in [0.5, 0.25, 0.125, 0.0625] {
            let scaled = maslov_scaled_symbol(&s, 1, eps).unwrap();
            let v = scaled.at([xi, 0]).unwrap().re / eps.powi(3);
            assert!(v > previous && v < limit, "ξ={xi} ε={eps}: {v}");
            previous = v;
        }
        assert!((previous - limit).abs() < 2e-3 * limit, "{previous} {limit}");
    }
    assert_eq!(maslov_scaled_symbol(&s, 1, 1.0).unwrap().values(), s.values());
}

#[test]
fn scaling_identity() {
    let quad = build_symbol(&OperatorSpec::pure_power(1), FrequencyGrid::new(1, 64).unwrap()).unwrap();
    assert!(scaling_identity_check(&quad, 0.3).unwrap() < 1e-12);
    let quart = build_symbol(&OperatorSpec::pure_power(2), FrequencyGrid::new(1, 32).unwrap()).unwrap();
    assert!(scaling_identity_check(&quart, 0.1).unwrap() < 1e-12);
    let levy = OperatorSpec::Levy {
        l: 1,
        alpha_levy: -0.5,
        density: LevyDensity::indicator(1.0),
    };
    let levy = build_symbol(&levy, FrequencyGrid::new(1, 16).unwrap()).unwrap();
    assert!(scaling_identity_check(&levy, 0.5).unwrap() < 1e-12);
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(32))]

    #[test]
    fn legendre_duality(k in 1u32..=2, xi in -1.5f64..1.5) {
        let table = LagrangianTable::build(Hamiltonian::power(k), 40.0, 400).unwrap();
        let h = Hamiltonian::power(k).eval_1d(xi).unwrap();
        prop_assert!((table.biconjugate(xi).unwrap() - h).abs() < 1e-6);
    }

    #[test]
    fn straight_line_optimality(y in 0.0f64..TAU) {
        let quad = Lagrangian::Exact(Hamiltonian::power(1));
        let cfg = RateConfig { segments: 16, ..RateConfig::default() };
        let r = rate_function([0.0, 0.0], [y, 0.0], &quad, &cfg).unwrap();
        let oracle = (-2..=2).map(|w| (y + TAU * w as f64).powi(2) / 4.0).fold(f64::INFINITY, f64::min);
        prop_assert!(r.value >= oracle - 1e-8);
        prop_assert!((r.value - oracle).abs() < 1e-6);
        prop_assert!(r.value >= 0.0);
    }

    #[test]
    fn sampled_hamiltonians_are_convex(k in 1u32..=3) {
        prop_assert!(Hamiltonian::power(k).min_second_difference(2.0, 101).unwrap() >= -1e-10);
    }
}
