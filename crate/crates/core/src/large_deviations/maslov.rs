//! Small-parameter rescalings of generators.

use crate::error::{invalid, Result};
use crate::semigroup::{quadrature_resolution, Multiplier};
use crate::spectral::Symbol;

/// `ε^{2k-1} a(ξ)` for differential symbols and `(1/ε) a(εξ)` for symbols
/// built from a Lévy generator, the latter re-evaluated off the lattice.
pub fn maslov_scaled_symbol(symbol: &Symbol, k: u32, eps: f64) -> Result<Symbol> {
    if !(eps > 0.0) {
        return invalid(format!("ε must be positive, got {eps}"));
    }
    if symbol.operator().is_some_and(|s| s.contains_levy()) {
        return symbol.dilated(eps);
    }
    if k == 0 {
        return invalid("differential Maslov scaling needs k >= 1");
    }
    Ok(symbol.scaled(eps.powi(2 * k as i32 - 1)))
}

/// `max |p_t[a] - p_1[t·a]|` over the kernel quadrature grid.
pub fn scaling_identity_check(symbol: &Symbol, t: f64) -> Result<f64> {
    if !(t > 0.0) {
        return invalid("scaling identity needs t > 0");
    }
    let m = quadrature_resolution(symbol.grid());
    let origin = vec![0.0; symbol.dim()];
    let direct = Multiplier::semigroup(symbol, t).kernel_complex(&origin, m)?;
    let rescaled = Multiplier::semigroup(&symbol.scaled(t), 1.0).kernel_complex(&origin, m)?;
    Ok(direct
        .iter()
        .zip(&rescaled)
        .fold(0.0f64, |acc, (a, b)| acc.max((a - b).norm())))
}
