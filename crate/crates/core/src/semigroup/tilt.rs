//! Exponentially tilted semigroups `e^{-⟨x,ξ⟩/ε} P_s [e^{⟨·,ξ⟩/ε} f]`.
//!
//! Conjugating by `e^{⟨x,ξ⟩/ε}` shifts frequencies into the complex plane:
//! the tilted operator is the multiplier `e^{-s a(η - iξ/ε)}`.

use num_complex::Complex64;

use super::kernel::{minimal_cutoff_for, TRUNCATION_THRESHOLD};
use super::multiplier::{quadrature_resolution, Multiplier};
use crate::error::{invalid, Error, Result};
use crate::spectral::{FrequencyGrid, OperatorSpec, Symbol, SymbolExpr};

/// Largest `|Im ζ| · C_supp` at which Lévy symbols are evaluated: beyond it
/// the factor `e^{|y Im ζ|}` in the quadrature exceeds `e^{30}`.
pub const LEVY_SHIFT_LIMIT: f64 = 30.0;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct TiltSpec {
    /// Tilt covector `ξ_tilt`; unused coordinates are zero.
    pub tilt: [f64; 2],
    /// Scale `ε > 0`.
    pub eps: f64,
}

impl TiltSpec {
    pub fn new(tilt: [f64; 2], eps: f64) -> Result<Self> {
        if !(eps > 0.0) {
            return invalid(format!("tilt scale must be positive, got {eps}"));
        }
        Ok(Self { tilt, eps })
    }

    /// Imaginary frequency shift `ξ_tilt / ε`.
    pub fn shift(&self) -> [f64; 2] {
        [self.tilt[0] / self.eps, self.tilt[1] / self.eps]
    }
}

fn operator_strip(spec: &OperatorSpec) -> f64 {
    match spec {
        OperatorSpec::Levy { density, .. } => LEVY_SHIFT_LIMIT / density.support(),
        OperatorSpec::FractionalPower { base, .. } | OperatorSpec::Perturbed { base, .. } => {
            operator_strip(base)
        }
        _ => f64::INFINITY,
    }
}

/// Half-width of the strip `|Im ζ| < w` where the symbol is evaluated.
pub fn analytic_strip(expr: &SymbolExpr) -> f64 {
    match expr {
        SymbolExpr::Operator(spec) => operator_strip(spec),
        SymbolExpr::Polynomial(_) => f64::INFINITY,
        SymbolExpr::Scaled { inner, .. } => analytic_strip(inner),
        SymbolExpr::Dilated { inner, eps } => analytic_strip(inner) / eps,
        SymbolExpr::Tabulated => 0.0,
    }
}

/// Multiplier `e^{-s a(η - iξ_tilt/ε)}` on a lattice large enough for the
/// cutoff rule (at least the symbol's own).
pub fn tilted_semigroup(symbol: &Symbol, tilt: &TiltSpec, s: f64) -> Result<Multiplier> {
    if !(s > 0.0) {
        return invalid("tilted semigroup needs s > 0");
    }
    let shift = tilt.shift();
    let size = shift[0].hypot(shift[1]);
    let limit = analytic_strip(symbol.expr());
    if size > limit {
        return Err(Error::TiltOutOfDomain { tilt: size, limit });
    }
    let eval = |p: [f64; 2]| {
        symbol.eval([Complex64::new(p[0], -shift[0]), Complex64::new(p[1], -shift[1])])
    };
    let n = if size == 0.0 {
        symbol.grid().cutoff()
    } else {
        minimal_cutoff_for(symbol.dim(), TRUNCATION_THRESHOLD, |p| Ok(-s * eval(p)?.re))?
            .max(symbol.grid().cutoff())
    };
    let grid = FrequencyGrid::new(symbol.dim(), n)?;
    if size == 0.0 {
        return Ok(Multiplier::semigroup(symbol, s));
    }
    Multiplier::from_fn(grid, |p| Ok((-eval([p[0] as f64, p[1] as f64])? * s).exp()))
}

/// `sup_x |Q_s|[1](x)`: the `L¹` norm of the tilted kernel.
pub fn tilted_norm(symbol: &Symbol, tilt: &TiltSpec, s: f64) -> Result<f64> {
    let q = tilted_semigroup(symbol, tilt, s)?;
    q.l1_norm(quadrature_resolution(q.grid()))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::spectral::{build_symbol, LevyDensity};

    #[test]
    fn zero_tilt_is_untilted() {
        let s = build_symbol(&OperatorSpec::pure_power(2), FrequencyGrid::new(1, 20).unwrap()).unwrap();
        let q = tilted_semigroup(&s, &TiltSpec::new([0.0, 0.0], 0.5).unwrap(), 0.3).unwrap();
        assert_eq!(q, Multiplier::semigroup(&s, 0.3));
    }

    #[test]
    fn gaussian_tilt_norm() {
        let s = build_symbol(&OperatorSpec::pure_power(1), FrequencyGrid::new(1, 10).unwrap()).unwrap();
        let tilt = TiltSpec::new([0.7, 0.0], 0.5).unwrap();
        let scaled = s.scaled(tilt.eps);
        let v = tilted_norm(&scaled, &tilt, 0.2).unwrap();
        let exact = (0.2f64 * 0.49 / 0.5).exp();
        assert!((v - exact).abs() < 1e-12 * exact, "{v} vs {exact}");
    }

    #[test]
    fn levy_tilt_domain() {
        let spec = OperatorSpec::Levy {
            l: 1,
            alpha_levy: -0.5,
            density: LevyDensity::indicator(1.0),
        };
        let s = build_symbol(&spec, FrequencyGrid::new(1, 4).unwrap()).unwrap();
        let far = TiltSpec::new([40.0, 0.0], 1.0).unwrap();
        assert!(matches!(
            tilted_semigroup(&s, &far, 0.1),
            Err(Error::TiltOutOfDomain { .. })
        ));
    }
}
