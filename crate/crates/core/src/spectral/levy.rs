//! Compensated Lévy-type symbols with a compactly supported even density.
//!
//! The generator
//!
//! ```text
//! L f(x) = (-1)^{l+1} ∫ (f(x+y) - Σ_{i=0}^{2l} <y^{⊗i}, D^i f(x)>/i!) h(y) |y|^{-(2l+1+α)} dy
//! ```
//!
//! has symbol `a(ζ) = (-1)^{l+1} ∫ E_{2l}(iyζ) h(y)|y|^{-(2l+1+α)} dy` where
//! `E_n(z) = e^z - Σ_{i≤n} z^i/i!`. Its real phase `a(-iξ)` is the
//! Hamiltonian. Both are evaluated by adaptive quadrature split at `y = 0`
//! with the substitution `y = C s²`, which turns the `|y|^{-α}` behaviour of
//! the compensated integrand at the origin into a smooth power of `s`.

use std::fmt;
use std::sync::Arc;

use num_complex::Complex64;

use crate::error::{invalid, Result};
use crate::numerics::adaptive_gauss_kronrod;

/// Quadrature tolerance used unless a density overrides it.
pub const DEFAULT_LEVY_TOLERANCE: f64 = 1e-8;

const REL_TOLERANCE: f64 = 1e-11;

#[derive(Clone)]
pub enum DensityShape {
    /// `h = 1` on `[-C, C]`.
    Indicator,
    /// `h(y) = exp(1 - 1/(1 - (y/C)²))`, smooth with `h(0) = 1`.
    Bump,
    Custom(Arc<dyn Fn(f64) -> f64 + Send + Sync>),
}

impl fmt::Debug for DensityShape {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Self::Indicator => write!(f, "Indicator"),
            Self::Bump => write!(f, "Bump"),
            Self::Custom(_) => write!(f, "Custom(..)"),
        }
    }
}

impl PartialEq for DensityShape {
    fn eq(&self, other: &Self) -> bool {
        match (self, other) {
            (Self::Indicator, Self::Indicator) | (Self::Bump, Self::Bump) => true,
            (Self::Custom(a), Self::Custom(b)) => Arc::ptr_eq(a, b),
            _ => false,
        }
    }
}

/// Jump density `h` of a generalized Lévy generator.
#[derive(Debug, Clone, PartialEq)]
pub struct LevyDensity {
    shape: DensityShape,
    support: f64,
    tolerance: f64,
}

impl LevyDensity {
    pub fn indicator(support: f64) -> Self {
        Self {
            shape: DensityShape::Indicator,
            support,
            tolerance: DEFAULT_LEVY_TOLERANCE,
        }
    }

    pub fn bump(support: f64) -> Self {
        Self {
            shape: DensityShape::Bump,
            support,
            tolerance: DEFAULT_LEVY_TOLERANCE,
        }
    }

    pub fn custom(f: impl Fn(f64) -> f64 + Send + Sync + 'static, support: f64) -> Self {
        Self {
            shape: DensityShape::Custom(Arc::new(f)),
            support,
            tolerance: DEFAULT_LEVY_TOLERANCE,
        }
    }

    pub fn with_tolerance(mut self, tolerance: f64) -> Self {
        self.tolerance = tolerance;
        self
    }

    pub fn shape(&self) -> &DensityShape {
        &self.shape
    }

    pub fn support(&self) -> f64 {
        self.support
    }

    pub fn tolerance(&self) -> f64 {
        self.tolerance
    }

    pub fn eval(&self, y: f64) -> f64 {
        if y.abs() > self.support {
            return 0.0;
        }
        match &self.shape {
            DensityShape::Indicator => 1.0,
            DensityShape::Bump => {
                let r = y / self.support;
                if r.abs() >= 1.0 {
                    0.0
                } else {
                    (1.0 - 1.0 / (1.0 - r * r)).exp()
                }
            }
            DensityShape::Custom(f) => f(y),
        }
    }

    /// Checks `h(0) = 1`, evenness, nonnegativity and compact support on a
    /// sample of points.
    pub fn validate(&self) -> Result<()> {
        if !(self.support > 0.0 && self.support.is_finite()) {
            return invalid(format!("Lévy support radius must be positive, got {}", self.support));
        }
        if !(self.tolerance > 0.0) {
            return invalid("Lévy quadrature tolerance must be positive");
        }
        if (self.eval(0.0) - 1.0).abs() > 1e-12 {
            return invalid("Lévy density must satisfy h(0) = 1");
        }
        for j in 1..=200 {
            let y = self.support * j as f64 / 160.0;
            let (hp, hm) = (self.eval(y), self.eval(-y));
            if hp < 0.0 || hm < 0.0 {
                return invalid(format!("Lévy density negative at y = {y}"));
            }
            if (hp - hm).abs() > 1e-12 * (1.0 + hp.abs()) {
                return invalid(format!("Lévy density not even at y = {y}"));
            }
        }
        Ok(())
    }
}

fn check_params(l: u32, alpha_levy: f64) -> Result<()> {
    if l == 0 {
        return invalid("Lévy compensation order l must be at least 1");
    }
    if !(alpha_levy > -1.0 && alpha_levy < 0.0) {
        return invalid(format!("alpha_levy must lie in (-1, 0), got {alpha_levy}"));
    }
    Ok(())
}

/// `e^z - Σ_{i=0}^{n} z^i/i!`, by its tail series near the origin.
fn compensated_exp(z: Complex64, n: u32) -> Complex64 {
    if z.norm() < 2.0 {
        let mut term = Complex64::new(1.0, 0.0);
        for i in 1..=n + 1 {
            term *= z / i as f64;
        }
        let mut sum = term;
        let mut i = n + 1;
        loop {
            i += 1;
            term *= z / i as f64;
            sum += term;
            if term.norm() <= 1e-18 * sum.norm() || i > n + 60 {
                break;
            }
        }
        sum
    } else {
        let mut poly = Complex64::new(0.0, 0.0);
        let mut term = Complex64::new(1.0, 0.0);
        for i in 0..=n {
            if i > 0 {
                term *= z / i as f64;
            }
            poly += term;
        }
        z.exp() - poly
    }
}

/// `cosh(x) - Σ_{j=0}^{l} x^{2j}/(2j)!`, stable near the origin.
fn compensated_cosh(x: f64, l: u32) -> f64 {
    if x.abs() < 2.0 {
        let x2 = x * x;
        let mut term = 1.0;
        for j in 1..=l + 1 {
            term *= x2 / ((2 * j - 1) as f64 * (2 * j) as f64);
        }
        let mut sum = term;
        let mut j = l + 1;
        loop {
            j += 1;
            term *= x2 / ((2 * j - 1) as f64 * (2 * j) as f64);
            sum += term;
            if term <= 1e-18 * sum || j > l + 60 {
                break;
            }
        }
        sum
    } else {
        let x2 = x * x;
        let mut poly = 0.0;
        let mut term = 1.0;
        for j in 0..=l {
            if j > 0 {
                term *= x2 / ((2 * j - 1) as f64 * (2 * j) as f64);
            }
            poly += term;
        }
        x.cosh() - poly
    }
}

fn sign(l: u32) -> f64 {
    if (l + 1).is_multiple_of(2) {
        1.0
    } else {
        -1.0
    }
}

/// Symbol at a complex frequency, integrating the half-lines `y > 0` and
/// `y < 0` separately.
pub fn levy_symbol_complex(
    density: &LevyDensity,
    l: u32,
    alpha_levy: f64,
    zeta: Complex64,
) -> Result<Complex64> {
    check_params(l, alpha_levy)?;
    if zeta == Complex64::new(0.0, 0.0) {
        return Ok(zeta);
    }
    let c = density.support;
    let gamma = (2 * l + 1) as f64 + alpha_levy;
    let i = Complex64::new(0.0, 1.0);
    let half_line = |side: f64| {
        adaptive_gauss_kronrod(
            |s| {
                let y = c * s * s;
                let weight = 2.0 * c * s * y.powf(-gamma) * density.eval(side * y);
                compensated_exp(i * side * y * zeta, 2 * l) * weight
            },
            0.0,
            1.0,
            0.5 * density.tolerance,
            REL_TOLERANCE,
            4000,
        )
    };
    let plus = half_line(1.0)?;
    let minus = half_line(-1.0)?;
    Ok((plus.value + minus.value) * sign(l))
}

/// Symbol of the generalized Lévy generator at a real frequency.
pub fn levy_symbol(density: &LevyDensity, l: u32, alpha_levy: f64, xi: f64) -> Result<Complex64> {
    levy_symbol_complex(density, l, alpha_levy, Complex64::new(xi, 0.0))
}

/// Real-phase symbol: `(-1)^{l+1} ∫ (e^{yξ} - Σ_{j=0}^{l} (yξ)^{2j}/(2j)!) h(y)|y|^{-(2l+1+α)} dy`.
///
/// The odd part of `e^{yξ}` is cancelled pointwise between `y` and `-y`
/// (it is not integrable on its own at the origin).
pub fn levy_hamiltonian(density: &LevyDensity, l: u32, alpha_levy: f64, xi: f64) -> Result<f64> {
    check_params(l, alpha_levy)?;
    if xi == 0.0 {
        return Ok(0.0);
    }
    let c = density.support;
    let gamma = (2 * l + 1) as f64 + alpha_levy;
    let value = adaptive_gauss_kronrod(
        |s| {
            let y = c * s * s;
            let weight = 2.0 * c * s * y.powf(-gamma);
            let (hp, hm) = (density.eval(y), density.eval(-y));
            let x = y * xi;
            let even = compensated_cosh(x, l) * (hp + hm);
            let odd = x.sinh() * (hp - hm);
            Complex64::new((even + odd) * weight, 0.0)
        },
        0.0,
        1.0,
        density.tolerance,
        REL_TOLERANCE,
        4000,
    )?;
    Ok(value.value.re * sign(l))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn compensated_exp_matches_direct_formula() {
        for &z in &[Complex64::new(0.3, 0.1), Complex64::new(0.0, 1.7), Complex64::new(2.5, -1.0)] {
            let direct = z.exp() - (Complex64::new(1.0, 0.0) + z + z * z / 2.0);
            assert!((compensated_exp(z, 2) - direct).norm() < 1e-13);
        }
        // tiny argument: leading terms z^3/6 + z^4/24
        let z = Complex64::new(0.0, 1e-4);
        let e = compensated_exp(z, 2);
        let leading = z * z * z / 6.0 + z * z * z * z / 24.0;
        assert!((e - leading).norm() < 1e-9 * leading.norm());
    }

    #[test]
    fn compensated_cosh_small_and_large() {
        assert!((compensated_cosh(1e-3, 1) - (1e-12 / 24.0 + 1e-18 / 720.0)).abs() < 1e-28);
        let x: f64 = 3.0;
        assert!((compensated_cosh(x, 1) - (x.cosh() - 1.0 - x * x / 2.0)).abs() < 1e-12);
    }

    #[test]
    fn symbol_vanishes_at_zero_and_is_real() {
        let h = LevyDensity::indicator(1.0);
        assert_eq!(levy_symbol(&h, 1, -0.5, 0.0).unwrap(), Complex64::new(0.0, 0.0));
        for xi in [0.5, 1.0, 3.0, 7.0] {
            let a = levy_symbol(&h, 1, -0.5, xi).unwrap();
            assert!(a.im.abs() < 1e-8, "imaginary part {} at {xi}", a.im);
            assert!(a.re > 0.0);
        }
    }

    #[test]
    fn rejects_out_of_range_parameters() {
        let h = LevyDensity::indicator(1.0);
        assert!(levy_symbol(&h, 1, 0.2, 1.0).is_err());
        assert!(levy_symbol(&h, 0, -0.5, 1.0).is_err());
        assert!(LevyDensity::custom(|y| 1.0 - y, 1.0).validate().is_err());
        assert!(LevyDensity::custom(|_| 0.5, 1.0).validate().is_err());
        assert!(LevyDensity::bump(1.0).validate().is_ok());
    }
}
