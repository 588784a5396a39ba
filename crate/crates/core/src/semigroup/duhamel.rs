//! Duhamel (Volterra) expansion of `e^{-t(A+Q)}` around `e^{-tA}` with
//! iterated simplex quadrature and an a priori remainder bound.

use num_complex::Complex64;
use rayon::prelude::*;
use statrs::function::gamma::ln_gamma;

use super::multiplier::Multiplier;
use crate::error::{invalid, Error, Result};
use crate::numerics::GaussLegendre;
use crate::spectral::Symbol;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct DuhamelConfig {
    /// Highest series order `L_max`.
    pub max_order: usize,
    /// Gauss–Legendre nodes per simplex coordinate.
    pub nodes_per_level: usize,
    /// Target for the remainder bound; not enforced, reported.
    pub tolerance: f64,
}

impl Default for DuhamelConfig {
    fn default() -> Self {
        Self {
            max_order: 8,
            nodes_per_level: 4,
            tolerance: 1e-8,
        }
    }
}

/// Truncated series and its bounds.
#[derive(Debug, Clone, PartialEq)]
pub struct DuhamelResult {
    /// Series multiplier `Σ_{l ≤ L} T_l(ξ)` on the base lattice.
    pub multiplier: Multiplier,
    /// Bound `B^l α_l t^{lγ}` on the sup over `ξ` of the order-`l` term.
    pub term_bounds: Vec<f64>,
    /// Bound on everything beyond `L_max`.
    pub remainder_bound: f64,
    /// Exponent `γ = 1 - deg(Q)/ord(A)` of the time gain per order.
    pub gamma: f64,
}

/// `α_l = Γ(γ)^l / Γ(lγ + 1)`, the Dirichlet integral of
/// `∏ (s_i - s_{i+1})^{-θ}` over the unit simplex; it obeys
/// `α_{l+1} = α_l B(lγ + 1, γ)`.
pub fn dirichlet_factor(gamma: f64, l: usize) -> f64 {
    (l as f64 * ln_gamma(gamma) - ln_gamma(l as f64 * gamma + 1.0)).exp()
}

/// `sup_{0 < s ≤ t} s^θ e^{-sA}`.
fn smoothing_gain(theta: f64, a: f64, t: f64) -> f64 {
    if theta == 0.0 {
        return if a >= 0.0 { 1.0 } else { (-t * a).exp() };
    }
    if a > 0.0 && theta / a <= t {
        (theta / (std::f64::consts::E * a)).powf(theta)
    } else {
        t.powf(theta) * (-t * a).exp()
    }
}

/// Iterated integral over `Δ_l(t) = {t ≥ s_1 ≥ … ≥ s_l ≥ 0}` of
/// `e^{-(t-s_1)a} q e^{-(s_1-s_2)a} q ⋯ q e^{-s_l a}` by the collapsed
/// (Duffy) map `s_j = s_{j-1} u_j` and a tensor Gauss–Legendre rule.
fn simplex_term(a: Complex64, q: Complex64, t: f64, l: usize, rule: &[(f64, f64)]) -> Complex64 {
    fn recurse(
        a: Complex64,
        q: Complex64,
        prev: f64,
        depth: usize,
        rule: &[(f64, f64)],
        acc: Complex64,
    ) -> Complex64 {
        if depth == 0 {
            return acc * (-a * prev).exp();
        }
        let mut sum = Complex64::new(0.0, 0.0);
        for &(u, w) in rule {
            let s = prev * u;
            // Jacobian ds = prev du
            let factor = (-a * (prev - s)).exp() * q * (w * prev);
            sum += recurse(a, q, s, depth - 1, rule, acc * factor);
        }
        sum
    }
    recurse(a, q, t, l, rule, Complex64::new(1.0, 0.0))
}

/// Evaluates `e^{-t(a+q)}` on the base lattice as `Σ_{l=0}^{L} (-1)^l T_l`.
pub fn duhamel_series(
    base: &Symbol,
    perturbation: &Symbol,
    t: f64,
    cfg: &DuhamelConfig,
) -> Result<DuhamelResult> {
    if cfg.max_order < 1 {
        return invalid("Duhamel series needs max_order >= 1");
    }
    if cfg.nodes_per_level < 1 {
        return invalid("Duhamel series needs at least one node per level");
    }
    if !(t > 0.0) {
        return invalid("Duhamel series needs t > 0");
    }
    if base.grid() != perturbation.grid() {
        return invalid("base and perturbation live on different lattices");
    }
    if perturbation.order() >= base.order() {
        return Err(Error::DegreeViolation {
            degree: perturbation.order(),
            order: base.order(),
        });
    }
    let theta = perturbation.order().max(0.0) / base.order();
    let gamma = 1.0 - theta;

    let b = base
        .values()
        .iter()
        .zip(perturbation.values())
        .map(|(a, q)| q.norm() * smoothing_gain(theta, a.re, t))
        .fold(0.0, f64::max);
    let term_bounds: Vec<f64> = (0..=cfg.max_order + 1)
        .map(|l| b.powi(l as i32) * dirichlet_factor(gamma, l) * t.powf(l as f64 * gamma))
        .collect();
    let last = cfg.max_order;
    let ratio = if term_bounds[last] > 0.0 {
        term_bounds[last + 1] / term_bounds[last]
    } else {
        0.0
    };
    if ratio >= 1.0 {
        return Err(Error::SeriesDiverged { order: last, ratio });
    }
    // terms beyond L_max: the ratio of successive bounds decreases in l
    let remainder_bound = term_bounds[last + 1] / (1.0 - ratio);

    let gl = GaussLegendre::new(cfg.nodes_per_level);
    let rule: Vec<(f64, f64)> = gl.mapped(0.0, 1.0).collect();
    let values: Vec<Complex64> = base
        .values()
        .par_iter()
        .zip(perturbation.values().par_iter())
        .map(|(&a, &q)| {
            let mut total = (-a * t).exp();
            let mut sign = -1.0;
            for l in 1..=cfg.max_order {
                total += simplex_term(a, q, t, l, &rule) * sign;
                sign = -sign;
            }
            total
        })
        .collect();
    Ok(DuhamelResult {
        multiplier: Multiplier::new(base.grid(), values)?,
        term_bounds: term_bounds[..=last].to_vec(),
        remainder_bound,
        gamma,
    })
}

/// `max_ξ |series(ξ) - e^{-t(a(ξ)+q(ξ))}|`.
pub fn duhamel_deviation(result: &DuhamelResult, base: &Symbol, perturbation: &Symbol, t: f64) -> f64 {
    result
        .multiplier
        .values()
        .iter()
        .zip(base.values().iter().zip(perturbation.values()))
        .map(|(s, (a, q))| (s - (-(a + q) * t).exp()).norm())
        .fold(0.0, f64::max)
}
