//! Davies gauge transform on the auxiliary variables.
//!
//! Conjugating `∂/∂u` by a weight `g` gives `g^{-1} ∂(g ·) = ∂ + C` with
//! potential `C = g′/g`. For `g(u) = √(1 + u²)` the potential and its
//! derivatives are bounded, so the conjugated generator differs from the
//! original by bounded lower-order terms and the unbounded test functions
//! `u` become the bounded `u/g(u)`.

use crate::error::{invalid, Result};
use crate::numerics::golden_section_min;

/// Weight `g` with its first three derivatives.
#[derive(Debug, Clone, Copy)]
pub struct GaugeFunction {
    g: fn(f64) -> f64,
    dg: fn(f64) -> f64,
    d2g: fn(f64) -> f64,
    d3g: fn(f64) -> f64,
}

impl Default for GaugeFunction {
    fn default() -> Self {
        fn g(u: f64) -> f64 {
            (1.0 + u * u).sqrt()
        }
        fn dg(u: f64) -> f64 {
            u / g(u)
        }
        fn d2g(u: f64) -> f64 {
            g(u).powi(-3)
        }
        fn d3g(u: f64) -> f64 {
            -3.0 * u * g(u).powi(-5)
        }
        Self { g, dg, d2g, d3g }
    }
}

impl GaugeFunction {
    pub fn new(g: fn(f64) -> f64, dg: fn(f64) -> f64, d2g: fn(f64) -> f64, d3g: fn(f64) -> f64) -> Self {
        Self { g, dg, d2g, d3g }
    }

    pub fn g(&self, u: f64) -> f64 {
        (self.g)(u)
    }

    /// `C = g′/g`.
    pub fn potential(&self, u: f64) -> f64 {
        (self.dg)(u) / (self.g)(u)
    }

    /// `C′ = g″/g - C²`.
    pub fn potential_d1(&self, u: f64) -> f64 {
        let c = self.potential(u);
        (self.d2g)(u) / (self.g)(u) - c * c
    }

    /// `C″ = g‴/g - 3 g′g″/g² + 2C³`.
    pub fn potential_d2(&self, u: f64) -> f64 {
        let g = (self.g)(u);
        let c = self.potential(u);
        (self.d3g)(u) / g - 3.0 * (self.dg)(u) * (self.d2g)(u) / (g * g) + 2.0 * c * c * c
    }

    /// Bounded replacement `u/g(u)` of the test function `u`.
    pub fn bounded_test(&self, u: f64) -> f64 {
        u / (self.g)(u)
    }
}

/// Potential table on an auxiliary grid with its sup norms.
#[derive(Debug, Clone, PartialEq)]
pub struct GaugeConjugate {
    pub u: Vec<f64>,
    pub c: Vec<f64>,
    /// `sup |C|`, `sup |C′|`, `sup |C″|`.
    pub sup: [f64; 3],
    /// `sup |u/g(u)|` on the grid.
    pub sup_bounded_test: f64,
    /// Whether `C`, `C′`, `C″` stay finite on the grid.
    pub bounded: bool,
}

/// Samples `C` on `points` equispaced points of `[-half_width, half_width]`
/// and refines each sup by golden-section search around the best sample.
pub fn gauge_conjugate(gauge: &GaugeFunction, half_width: f64, points: usize) -> Result<GaugeConjugate> {
    if !(half_width > 0.0) || points < 3 {
        return invalid("gauge table needs a positive half-width and at least 3 points");
    }
    let h = 2.0 * half_width / (points - 1) as f64;
    let u: Vec<f64> = (0..points).map(|j| -half_width + j as f64 * h).collect();
    let c: Vec<f64> = u.iter().map(|&x| gauge.potential(x)).collect();
    let refine = |f: &dyn Fn(f64) -> f64| -> f64 {
        let (best, _) = u
            .iter()
            .map(|&x| (x, f(x).abs()))
            .fold((0.0, f64::NEG_INFINITY), |acc, p| if p.1 > acc.1 { p } else { acc });
        let lo = (best - h).max(-half_width);
        let hi = (best + h).min(half_width);
        let (_, v) = golden_section_min(|x| -f(x).abs(), lo, hi, 1e-14);
        (-v).max(f(best).abs())
    };
    let sup = [
        refine(&|x| gauge.potential(x)),
        refine(&|x| gauge.potential_d1(x)),
        refine(&|x| gauge.potential_d2(x)),
    ];
    let sup_bounded_test = u.iter().fold(0.0f64, |acc, &x| acc.max(gauge.bounded_test(x).abs()));
    Ok(GaugeConjugate {
        bounded: sup.iter().all(|s| s.is_finite()),
        u,
        c,
        sup,
        sup_bounded_test,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn default_gauge_closed_forms() {
        let g = GaugeFunction::default();
        for u in [-3.0, -0.4, 0.0, 1.0, 2.5] {
            let w: f64 = 1.0 + u * u;
            assert!((g.potential(u) - u / w).abs() < 1e-15);
            assert!((g.potential_d1(u) - (1.0 - u * u) / (w * w)).abs() < 1e-14);
            assert!((g.potential_d2(u) - 2.0 * u * (u * u - 3.0) / w.powi(3)).abs() < 1e-14);
        }
        assert_eq!(g.potential(0.0), 0.0);
    }

    #[test]
    fn sup_of_potential() {
        let table = gauge_conjugate(&GaugeFunction::default(), 20.0, 401).unwrap();
        assert!((table.sup[0] - 0.5).abs() < 1e-10);
        assert!((table.sup[1] - 1.0).abs() < 1e-10);
        assert!(table.sup_bounded_test <= 1.0);
    }
}
