//! Small-time exponents of the derivative seminorms `‖(L^α)^l P_t‖ ~ t^{-r(l)}`.

use crate::error::{invalid, Error, Result};
use crate::numerics::linear_fit;
use crate::semigroup::{derivative_seminorm, with_cutoff_for, TRUNCATION_THRESHOLD};
use crate::spectral::Symbol;

/// Minimal coefficient of determination for an accepted fit.
pub const EXPONENT_FIT_R2: f64 = 0.99;

#[derive(Debug, Clone, PartialEq)]
pub struct ExponentFit {
    /// Fitted `r(l)`, minus the log-log slope.
    pub r: f64,
    pub r_squared: f64,
    pub times: Vec<f64>,
    pub seminorms: Vec<f64>,
}

/// Least-squares slope of `log ‖(L^α)^l P_t‖` against `log t`. The symbol
/// is retabulated so that every time in `times` meets the cutoff rule.
pub fn exponent_fit(symbol: &Symbol, frac_alpha: f64, l: u32, times: &[f64]) -> Result<ExponentFit> {
    if times.len() < 2 || times.iter().any(|t| !(*t > 0.0)) {
        return invalid("exponent fit needs at least two positive times");
    }
    let (lo, hi) = times
        .iter()
        .fold((f64::INFINITY, 0.0f64), |(lo, hi), &t| (lo.min(t), hi.max(t)));
    if hi / lo < 10.0 * (1.0 - 1e-12) {
        return invalid("exponent fit needs times spanning at least one decade");
    }
    if l == 0 {
        return Ok(ExponentFit {
            r: 0.0,
            r_squared: 1.0,
            times: times.to_vec(),
            seminorms: vec![1.0; times.len()],
        });
    }
    let symbol = with_cutoff_for(symbol, times, TRUNCATION_THRESHOLD)?;
    let seminorms = times
        .iter()
        .map(|&t| derivative_seminorm(&symbol, frac_alpha, l, t))
        .collect::<Result<Vec<_>>>()?;
    let xs: Vec<f64> = times.iter().map(|t| t.ln()).collect();
    let ys: Vec<f64> = seminorms.iter().map(|s| s.ln()).collect();
    let fit = linear_fit(&xs, &ys)?;
    if fit.r_squared < EXPONENT_FIT_R2 {
        return Err(Error::FitUnstable {
            r_squared: fit.r_squared,
        });
    }
    Ok(ExponentFit {
        r: -fit.slope,
        r_squared: fit.r_squared,
        times: times.to_vec(),
        seminorms,
    })
}
