//! Elementary integration by parts along coordinate fields:
//! `∫_0^t P_{t-s} Σ_i h_{s,i} ∂_i P_s h ds = P̃_t[u h](·, 0)`.

use num_complex::Complex64;

use super::augmented::CascadeWeight;
use crate::error::{invalid, Result};
use crate::fourier::{frequencies_of_flat, GridFunction};
use crate::numerics::GaussLegendre;
use crate::spectral::Symbol;

/// Gauss–Legendre nodes for the time integral.
pub const ELEMENTARY_NODES: usize = 48;

/// Both sides of the elementary identity on the grid.
#[derive(Debug, Clone, PartialEq)]
pub struct ElementaryIbp {
    pub lhs: GridFunction,
    pub rhs: GridFunction,
    pub rel_error: f64,
}

/// `weights` pairs a coordinate direction `i` with its coupling `h_{s,i}`.
///
/// The left side integrates `e^{-(t-s)a} (Σ_i h_{s,i} iξ_i) e^{-sa} ĥ` in `s`
/// by Gauss–Legendre; the right side is the `u`-moment of the augmented
/// semigroup with coupling `Σ_i h_{s,i} ∂_i ∂/∂u`, namely
/// `Σ_i W_i(t) iξ_i e^{-ta} ĥ` with `W_i(t) = ∫_0^t h_{s,i} ds`.
pub fn elementary_ibp_check(
    base: &Symbol,
    weights: &[(usize, CascadeWeight)],
    h: &GridFunction,
    t: f64,
) -> Result<ElementaryIbp> {
    if !(t > 0.0) {
        return invalid("elementary IBP needs t > 0");
    }
    if h.dim() != base.dim() {
        return invalid("test function and symbol dimensions differ");
    }
    if weights.iter().any(|(i, _)| *i >= base.dim()) {
        return invalid("direction index exceeds the dimension");
    }
    let m = h.resolution();
    let spectrum = h.spectrum();
    let integrals = weights
        .iter()
        .map(|(_, w)| w.integral(t))
        .collect::<Result<Vec<_>>>()?;
    let nodes: Vec<(f64, f64)> = GaussLegendre::new(ELEMENTARY_NODES).mapped(0.0, t).collect();
    let i = Complex64::new(0.0, 1.0);

    let mut lhs_spec = vec![Complex64::new(0.0, 0.0); spectrum.len()];
    let mut rhs_spec = vec![Complex64::new(0.0, 0.0); spectrum.len()];
    for (idx, c) in spectrum.iter().enumerate() {
        if c.norm() == 0.0 {
            continue;
        }
        let xi = frequencies_of_flat(h.dim(), m, idx);
        let Some(a) = base.at(xi) else {
            return invalid(format!("frequency {xi:?} of the test function lies outside the lattice"));
        };
        let field = |s: f64| -> Complex64 {
            weights
                .iter()
                .map(|(dir, w)| i * xi[*dir] as f64 * w.eval(s))
                .sum()
        };
        let mut lhs = Complex64::new(0.0, 0.0);
        for &(s, w) in &nodes {
            lhs += (-a * (t - s)).exp() * field(s) * (-a * s).exp() * w;
        }
        lhs_spec[idx] = lhs * c;
        let moment: Complex64 = weights
            .iter()
            .zip(&integrals)
            .map(|((dir, _), wi)| i * xi[*dir] as f64 * *wi)
            .sum();
        rhs_spec[idx] = moment * (-a * t).exp() * c;
    }
    let (lhs, _) = GridFunction::from_spectrum(h.dim(), m, lhs_spec)?;
    let (rhs, _) = GridFunction::from_spectrum(h.dim(), m, rhs_spec)?;
    let rel_error = lhs.max_abs_diff(&rhs) / (rhs.sup_norm() + f64::EPSILON);
    Ok(ElementaryIbp { lhs, rhs, rel_error })
}
