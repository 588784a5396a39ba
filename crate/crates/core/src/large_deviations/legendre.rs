//! Legendre transforms `L(p) = sup_ξ (p·ξ - H(ξ))` and tabulated
//! Lagrangians.

use std::cell::RefCell;

use super::hamiltonian::Hamiltonian;
use crate::error::{invalid, Error, Result};
use crate::numerics::{golden_section_min, linear_fit};

/// Brackets are expanded up to this radius before the supremum is declared
/// infinite.
pub const BRACKET_LIMIT: f64 = 1e6;
/// Decades of momentum covered by the geometric part of a table.
pub const TABLE_DECADES: u32 = 6;
const GOLDEN_TOL: f64 = 1e-13;
const COARSE_SAMPLES: usize = 64;

/// Minimizes a convex `f` on the line. Brackets by doubling outward from
/// `[-1, 1]`, then golden-section search. `None` if the minimum escapes
/// [`BRACKET_LIMIT`].
fn minimize_convex<F: FnMut(f64) -> Result<f64>>(f: F) -> Result<Option<(f64, f64)>> {
    let f = RefCell::new(f);
    let failure = RefCell::new(None);
    let eval = |x: f64| -> f64 {
        match (f.borrow_mut())(x) {
            Ok(v) => v,
            Err(e) => {
                failure.borrow_mut().get_or_insert(e);
                f64::NAN
            }
        }
    };
    let mut hi = 1.0;
    while !(eval(hi) >= eval(hi / 2.0)) {
        hi *= 2.0;
        if hi > BRACKET_LIMIT {
            return failure.into_inner().map_or(Ok(None), Err);
        }
    }
    let mut lo = -1.0;
    while !(eval(lo) >= eval(lo / 2.0)) {
        lo *= 2.0;
        if lo < -BRACKET_LIMIT {
            return failure.into_inner().map_or(Ok(None), Err);
        }
    }
    let (x, fx) = golden_section_min(&eval, lo, hi, GOLDEN_TOL);
    // a coarse scan guards against non-convex input fooling the bracket
    let step = (hi - lo) / COARSE_SAMPLES as f64;
    let coarse = (0..=COARSE_SAMPLES)
        .map(|j| eval(lo + j as f64 * step))
        .fold(f64::INFINITY, f64::min);
    if let Some(e) = failure.into_inner() {
        return Err(e);
    }
    if coarse < fx - 1e-9 * (1.0 + fx.abs()) {
        return invalid(format!("Hamiltonian is not convex: grid value {coarse} below refined {fx}"));
    }
    Ok(Some((x, fx)))
}

/// `sup_ξ (p·ξ - H(ξ))` and the maximizing `ξ`.
pub fn legendre_with_argmax(h: &Hamiltonian, p: [f64; 2]) -> Result<(f64, [f64; 2])> {
    let unbounded = || Error::SupUnbounded {
        momentum: p[0].hypot(p[1]),
    };
    match h.dim() {
        1 => {
            let (x, fx) = minimize_convex(|x| Ok(h.eval_1d(x)? - p[0] * x))?.ok_or_else(unbounded)?;
            Ok(at_least_origin(h, -fx, [x, 0.0])?)
        }
        _ => {
            // partial minimization of a jointly convex function stays convex
            let inner = |x0: f64| -> Result<(f64, f64)> {
                minimize_convex(|x1| Ok(h.eval([x0, x1])? - p[0] * x0 - p[1] * x1))?.ok_or_else(unbounded)
            };
            let (x0, fx) = minimize_convex(|x0| inner(x0).map(|r| r.1))?.ok_or_else(unbounded)?;
            let (x1, _) = inner(x0)?;
            at_least_origin(h, -fx, [x0, x1])
        }
    }
}

/// The supremum is at least `-H(0)`; this pins `L(0) = 0` exactly when the
/// search lands a rounding error away from the origin.
fn at_least_origin(h: &Hamiltonian, value: f64, argmax: [f64; 2]) -> Result<(f64, [f64; 2])> {
    let origin = -h.eval([0.0, 0.0])?;
    Ok(if origin >= value { (origin, [0.0, 0.0]) } else { (value, argmax) })
}

pub fn legendre(h: &Hamiltonian, p: [f64; 2]) -> Result<f64> {
    legendre_with_argmax(h, p).map(|r| r.0)
}

/// One-dimensional Lagrangian tabulated on a symmetric momentum grid with
/// cubic Hermite interpolation. The slopes are the maximizers `ξ*(p)`, which
/// are exact derivatives of `L`. Beyond the table `L` is recomputed from
/// `H`.
#[derive(Debug, Clone)]
pub struct LagrangianTable {
    hamiltonian: Hamiltonian,
    p: Vec<f64>,
    values: Vec<f64>,
    slopes: Vec<f64>,
}

impl LagrangianTable {
    /// Nodes `0` and `±p_max r^{-j}` for `j < points_per_side`, spanning
    /// [`TABLE_DECADES`] decades below `p_max`.
    pub fn build(hamiltonian: Hamiltonian, p_max: f64, points_per_side: usize) -> Result<Self> {
        if hamiltonian.dim() != 1 {
            return invalid("Lagrangian tables are one-dimensional");
        }
        if !(p_max > 0.0) || points_per_side < 2 {
            return invalid("Lagrangian table needs p_max > 0 and at least 2 points per side");
        }
        let ratio = 10f64.powf(TABLE_DECADES as f64 / (points_per_side - 1) as f64);
        let positive: Vec<f64> = (0..points_per_side)
            .rev()
            .map(|j| p_max / ratio.powi(j as i32))
            .collect();
        let p: Vec<f64> = positive
            .iter()
            .rev()
            .map(|x| -x)
            .chain(std::iter::once(0.0))
            .chain(positive.iter().copied())
            .collect();
        let solved = p
            .iter()
            .map(|&q| legendre_with_argmax(&hamiltonian, [q, 0.0]))
            .collect::<Result<Vec<_>>>()?;
        Ok(Self {
            hamiltonian,
            p,
            values: solved.iter().map(|s| s.0).collect(),
            slopes: solved.iter().map(|s| s.1[0]).collect(),
        })
    }

    pub fn hamiltonian(&self) -> &Hamiltonian {
        &self.hamiltonian
    }

    pub fn p_max(&self) -> f64 {
        *self.p.last().expect("nonempty table")
    }

    pub fn nodes(&self) -> &[f64] {
        &self.p
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }

    pub fn eval(&self, p: f64) -> Result<f64> {
        if p.abs() > self.p_max() {
            return legendre(&self.hamiltonian, [p, 0.0]);
        }
        let j = self.p.partition_point(|&x| x <= p).clamp(1, self.p.len() - 1) - 1;
        let (x0, x1) = (self.p[j], self.p[j + 1]);
        let h = x1 - x0;
        let s = (p - x0) / h;
        let (h00, h10, h01, h11) = (
            (1.0 + 2.0 * s) * (1.0 - s) * (1.0 - s),
            s * (1.0 - s) * (1.0 - s),
            s * s * (3.0 - 2.0 * s),
            s * s * (s - 1.0),
        );
        Ok(h00 * self.values[j] + h10 * h * self.slopes[j] + h01 * self.values[j + 1] + h11 * h * self.slopes[j + 1])
    }

    /// Fits `L(p) ≈ A|p|^q + B` with `q = m/(m - 1)` for a Hamiltonian of
    /// order `m`, then derives constants of the sandwich
    /// `-C_lo + (A/2)|p|^q ≤ L(p) ≤ C_hi + A(1 + slack)|p|^q` on the table.
    pub fn growth_sandwich(&self, slack: f64) -> Result<GrowthSandwich> {
        let Some(order) = self.hamiltonian.order() else {
            return invalid("growth sandwich needs a Hamiltonian of known order");
        };
        if order <= 1.0 {
            return Err(Error::SupUnbounded { momentum: self.p_max() });
        }
        let q = order / (order - 1.0);
        let xs: Vec<f64> = self.p.iter().map(|p| p.abs().powf(q)).collect();
        let fit = linear_fit(&xs, &self.values)?;
        let a = fit.slope;
        let lower_coeff = 0.5 * a;
        let upper_coeff = a * (1.0 + slack);
        let mut lower_offset = 0.0f64;
        let mut upper_offset = 0.0f64;
        for (x, l) in xs.iter().zip(&self.values) {
            lower_offset = lower_offset.max(lower_coeff * x - l);
            upper_offset = upper_offset.max(l - upper_coeff * x);
        }
        Ok(GrowthSandwich {
            exponent: q,
            coefficient: a,
            intercept: fit.intercept,
            r_squared: fit.r_squared,
            lower_coeff,
            lower_offset,
            upper_coeff,
            upper_offset,
        })
    }

    /// `sup_p (ξ p - L(p))` over the table, which returns `H(ξ)` when the
    /// maximizer `H′(ξ)` lies inside it.
    pub fn biconjugate(&self, xi: f64) -> Result<f64> {
        let pm = self.p_max();
        let failure = RefCell::new(None);
        let (p, value) = golden_section_min(
            |p| match self.eval(p) {
                Ok(l) => l - xi * p,
                Err(e) => {
                    failure.borrow_mut().get_or_insert(e);
                    f64::NAN
                }
            },
            -pm,
            pm,
            GOLDEN_TOL,
        );
        if let Some(e) = failure.into_inner() {
            return Err(e);
        }
        if p.abs() > pm * (1.0 - 1e-6) {
            return Err(Error::SupUnbounded { momentum: xi });
        }
        Ok(-value)
    }
}

/// Constants of `-C_lo + c_lo|p|^q ≤ L(p) ≤ C_hi + c_hi|p|^q`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct GrowthSandwich {
    pub exponent: f64,
    /// Least-squares `A` in `L ≈ A|p|^q + B`.
    pub coefficient: f64,
    pub intercept: f64,
    pub r_squared: f64,
    pub lower_coeff: f64,
    pub lower_offset: f64,
    pub upper_coeff: f64,
    pub upper_offset: f64,
}
