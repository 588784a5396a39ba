//! Exit-probability decay, its Chernoff prediction and tilted-semigroup
//! growth under the rescaled generator `ε^{2k-1} L`.

use std::f64::consts::{PI, TAU};

use rayon::prelude::*;

use crate::error::{invalid, Error, Result};
use crate::large_deviations::{maslov_scaled_symbol, Hamiltonian};
use crate::numerics::{golden_section_min, linear_fit, GaussLegendre};
use crate::semigroup::{
    quadrature_resolution, tilted_norm, with_cutoff_for, Multiplier, TiltSpec, TRUNCATION_THRESHOLD,
};
use crate::spectral::Symbol;

/// Minimal coefficient of determination of the exit fit.
pub const EXIT_FIT_R2: f64 = 0.99;
/// Relative allowance in the tilted bound's exponent.
pub const TILT_SLACK: f64 = 0.05;

const EXIT_PANELS: usize = 128;

fn hamiltonian_of(symbol: &Symbol) -> Result<Hamiltonian> {
    match symbol.operator() {
        Some(spec) => Hamiltonian::from_spec(spec, symbol.dim()),
        None => invalid("this estimate needs a symbol built from an operator"),
    }
}

/// Minimizer of `-δ ξ + s H(ξ)` over `ξ ≥ 0` and the exponent `min/ε`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Chernoff {
    pub xi_star: f64,
    pub exponent: f64,
}

pub fn chernoff_extremize(h: &Hamiltonian, delta: f64, s: f64, eps: f64) -> Result<Chernoff> {
    if !(s > 0.0 && eps > 0.0 && delta >= 0.0) {
        return invalid("Chernoff extremization needs δ ≥ 0, s > 0 and ε > 0");
    }
    let f = |xi: f64| -> Result<f64> { Ok(-delta * xi + s * h.eval_1d(xi)?) };
    let mut hi = 1.0;
    while f(hi)? < f(hi / 2.0)? {
        hi *= 2.0;
        if hi > crate::large_deviations::BRACKET_LIMIT {
            return Err(Error::SupUnbounded { momentum: delta / s });
        }
    }
    let mut failure = None;
    let (xi, value) = golden_section_min(
        |x| {
            f(x).unwrap_or_else(|e| {
                failure.get_or_insert(e);
                f64::NAN
            })
        },
        0.0,
        hi,
        1e-13,
    );
    if let Some(e) = failure {
        return Err(e);
    }
    let origin = f(0.0)?;
    let (xi_star, value) = if origin <= value { (0.0, origin) } else { (xi, value) };
    Ok(Chernoff {
        xi_star,
        exponent: value / eps,
    })
}

#[derive(Debug, Clone, PartialEq)]
pub struct ExitBoundFit {
    pub delta: f64,
    pub s: f64,
    pub eps: Vec<f64>,
    /// `log |P_s^ε|[1_{B(x,δ)^c}](x)` per `ε`.
    pub log_mass: Vec<f64>,
    /// `C` in `log mass ≈ -C/ε + const`.
    pub c: f64,
    pub r_squared: f64,
    /// `-min_ξ (-δξ + sH(ξ))`, the Chernoff prediction for `C`.
    pub chernoff_c: f64,
}

/// `∫_{|y - x| > δ} |p^ε_s(x, y)| dy` for the rescaled generator
/// `ε^{2k-1} L`, fitted against `1/ε`. On the circle the complement is
/// integrated by Gauss–Legendre; on the 2-torus by the rectangle rule on the
/// kernel grid.
pub fn exit_bound_check(symbol: &Symbol, k: u32, delta: f64, s: f64, eps: &[f64]) -> Result<ExitBoundFit> {
    if !(delta > 0.0 && delta < PI) {
        return invalid("δ must lie in (0, π)");
    }
    if !(s > 0.0) {
        return invalid("exit check needs s > 0");
    }
    if eps.len() < 2 || eps.iter().any(|e| !(*e > 0.0)) || eps.windows(2).any(|w| w[1] >= w[0]) {
        return invalid("ε values must be positive and strictly decreasing");
    }
    let dim = symbol.dim();
    let log_mass = eps
        .par_iter()
        .map(|&e| {
            let scaled = with_cutoff_for(&maslov_scaled_symbol(symbol, k, e)?, &[s], TRUNCATION_THRESHOLD)?;
            let mult = Multiplier::semigroup(&scaled, s);
            let mass = match dim {
                1 => {
                    let gl = GaussLegendre::new(8);
                    let w = (TAU - 2.0 * delta) / EXIT_PANELS as f64;
                    (0..EXIT_PANELS)
                        .map(|p| {
                            let a = delta + p as f64 * w;
                            gl.mapped(a, a + w)
                                .map(|(z, wt)| wt * mult.kernel_value(&[z]).re.abs())
                                .sum::<f64>()
                        })
                        .sum::<f64>()
                }
                _ => {
                    let m = quadrature_resolution(scaled.grid());
                    let kernel = mult.kernel(&[0.0, 0.0], m)?;
                    let h = TAU / m as f64;
                    let wrap = |j: usize| {
                        let z = j as f64 * h;
                        if z > PI {
                            z - TAU
                        } else {
                            z
                        }
                    };
                    kernel
                        .iter()
                        .enumerate()
                        .filter(|(idx, _)| wrap(idx / m).hypot(wrap(idx % m)) > delta)
                        .map(|(_, v)| v.abs() * h * h)
                        .sum()
                }
            };
            Ok(mass.ln())
        })
        .collect::<Result<Vec<_>>>()?;
    let inv: Vec<f64> = eps.iter().map(|e| 1.0 / e).collect();
    let fit = linear_fit(&inv, &log_mass)?;
    if fit.r_squared < EXIT_FIT_R2 {
        return Err(Error::FitUnstable {
            r_squared: fit.r_squared,
        });
    }
    let chernoff = chernoff_extremize(&hamiltonian_of(symbol)?, delta, s, 1.0)?;
    Ok(ExitBoundFit {
        delta,
        s,
        eps: eps.to_vec(),
        log_mass,
        c: -fit.slope,
        r_squared: fit.r_squared,
        chernoff_c: -chernoff.exponent,
    })
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct TiltedBound {
    /// `‖Q_s^ε‖ = ∫ |q_s^ε|`, the sup over `x` of `|Q_s^ε|[1](x)`.
    pub measured: f64,
    /// `exp[s H(ξ_tilt)/ε]`.
    pub predicted: f64,
    /// `measured ≤ exp[s H(ξ_tilt)/ε (1 + 0.05)]`.
    pub pass: bool,
}

/// Tilted semigroup of the rescaled generator `ε^{2k-1} L` by
/// `e^{ξ_tilt·x/ε}` against its real-phase prediction.
pub fn tilted_bound_check(symbol: &Symbol, k: u32, tilt: [f64; 2], s: f64, eps: f64) -> Result<TiltedBound> {
    let scaled = maslov_scaled_symbol(symbol, k, eps)?;
    let measured = tilted_norm(&scaled, &TiltSpec::new(tilt, eps)?, s)?;
    let exponent = s * hamiltonian_of(symbol)?.eval(tilt)? / eps;
    Ok(TiltedBound {
        measured,
        predicted: exponent.exp(),
        pass: measured.ln() <= exponent * (1.0 + TILT_SLACK) + 1e-10,
    })
}
