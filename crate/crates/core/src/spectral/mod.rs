//! Symbols of translation-invariant generators on the circle and 2-torus.

mod grid;
mod levy;
mod operator;
mod symbol;

pub use grid::FrequencyGrid;
pub use levy::{
    levy_hamiltonian, levy_symbol, levy_symbol_complex, DensityShape, LevyDensity,
    DEFAULT_LEVY_TOLERANCE,
};
pub use operator::{eval_polynomial, fractional_power, Monomial, OperatorSpec};
pub use symbol::{build_symbol, Symbol, SymbolExpr};

/// Fitted lower bound `|a(ξ)| ≥ C|ξ|^{m′}` at high frequency.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Ellipticity {
    pub constant: f64,
    pub order: f64,
    pub satisfied: bool,
}

/// Fitted upper bound `|a(ξ)| ≤ C(1 + |ξ|)^m` over the lattice.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Growth {
    pub constant: f64,
    pub order: f64,
    pub bounded: bool,
}

/// Largest `C` with `|a(ξ)| ≥ C|ξ|_∞^{m′}` over lattice points with
/// `|ξ|_∞ ≥ N/2` (all nonzero points when `N < 4`).
pub fn ellipticity_constants(symbol: &Symbol) -> Ellipticity {
    let grid = symbol.grid();
    let order = symbol.ellipticity_order();
    let threshold = if grid.cutoff() >= 4 {
        grid.cutoff() as f64 / 2.0
    } else {
        1.0
    };
    let constant = grid
        .points()
        .zip(symbol.values())
        .filter(|(p, _)| FrequencyGrid::max_norm(*p) as f64 >= threshold)
        .map(|(p, a)| a.norm() / (FrequencyGrid::max_norm(p) as f64).powf(order))
        .fold(f64::INFINITY, f64::min);
    let constant = if constant.is_finite() { constant } else { 0.0 };
    Ellipticity {
        constant,
        order,
        satisfied: constant > 0.0,
    }
}

/// Smallest `C` with `|a(ξ)| ≤ C(1 + |ξ|_∞)^m` over the whole lattice.
pub fn growth_check(symbol: &Symbol) -> Growth {
    let order = symbol.order();
    let constant = symbol
        .grid()
        .points()
        .zip(symbol.values())
        .map(|(p, a)| a.norm() / (1.0 + FrequencyGrid::max_norm(p) as f64).powf(order))
        .fold(0.0, f64::max);
    Growth {
        constant,
        order,
        bounded: constant.is_finite(),
    }
}
