//! Absolute first moments of the augmented kernel,
//! `sup_x |P̃_t|[|h| ∏_j |u_j|](x, 0) ≤ C ‖h‖_∞`.
//!
//! Given `ξ`, the auxiliary kernel is `∏_j G_t(w_j - μ_j(ξ))`, so
//!
//! ```text
//! p̃_t(z, w) = (2π)^{-d} Σ_ξ e^{iξ·z} e^{-t a(ξ)} ∏_j G_t(w_j - μ_j(ξ)).
//! ```
//!
//! The absolute value prevents the `w` integral from factorizing; it is
//! done on a product Gauss–Legendre grid over `[-U, U]^n`.

use std::f64::consts::PI;

use num_complex::Complex64;
use rayon::prelude::*;

use super::augmented::{band_limited_spectrum, synthesize, AugmentedOperator};
use super::aux_kernel::AuxKernel;
use crate::error::{invalid, Error, Result};
use crate::fourier::GridFunction;
use crate::numerics::GaussLegendre;
use crate::spectral::fractional_power;

/// Largest relative change of the constant when `U` doubles.
pub const DOUBLING_TOLERANCE: f64 = 0.02;

/// Frequencies whose semigroup factor falls below this are dropped.
const NEGLIGIBLE: f64 = 1e-14;
const NODES_PER_PANEL: usize = 8;
const MAX_AUX: usize = 2;

#[derive(Debug, Clone, PartialEq)]
pub struct BoundedMoment {
    /// Constant on the doubled window `[-2U, 2U]`.
    pub constant: f64,
    /// Constant on `[-U, U]`.
    pub constant_half: f64,
    pub half_width: f64,
    /// `|C(2U) - C(U)| / C(2U)`.
    pub doubling_drift: f64,
}

struct Mode {
    xi: [i64; 2],
    weight: Complex64,
    mu: Vec<f64>,
}

/// Smallest `C` with `sup_x |P̃_t|[|h| ∏|u_j|](x, 0) ≤ C ‖h‖_∞`, for up to
/// two auxiliary variables. The window starts at [`AuxKernel::window`] for
/// the largest drift and the result must move by less than
/// [`DOUBLING_TOLERANCE`] when it doubles.
pub fn bounded_moment_check(op: &AugmentedOperator, h: &GridFunction, t: f64) -> Result<BoundedMoment> {
    if !(t > 0.0) {
        return invalid("bounded moment check needs t > 0");
    }
    if op.n_aux() > MAX_AUX {
        return invalid(format!("bounded moment check supports at most {MAX_AUX} auxiliary variables"));
    }
    if h.dim() != op.base().dim() {
        return invalid("test function and base symbol dimensions differ");
    }
    let sup_h = h.sup_norm();
    let g = AuxKernel::new(t, op.aux_k())?;
    let modes = retained_modes(op, t)?;
    let drift = modes
        .iter()
        .flat_map(|m| m.mu.iter())
        .fold(0.0f64, |acc, mu| acc.max(mu.abs()));
    let half_width = g.window(drift)?;
    if sup_h == 0.0 {
        return Ok(BoundedMoment {
            constant: 0.0,
            constant_half: 0.0,
            half_width,
            doubling_drift: 0.0,
        });
    }
    let abs_h = fine_abs(op, h, &modes)?;
    let constant_half = absolute_moment(&g, &modes, &abs_h, half_width)? / sup_h;
    let constant = absolute_moment(&g, &modes, &abs_h, 2.0 * half_width)? / sup_h;
    let doubling_drift = (constant - constant_half).abs() / constant.max(f64::MIN_POSITIVE);
    if doubling_drift >= DOUBLING_TOLERANCE {
        return Err(Error::AuxDomainTooSmall {
            half_width: 2.0 * half_width,
            drift: doubling_drift,
        });
    }
    Ok(BoundedMoment {
        constant,
        constant_half,
        half_width,
        doubling_drift,
    })
}

fn retained_modes(op: &AugmentedOperator, t: f64) -> Result<Vec<Mode>> {
    let base = op.base();
    let couplings = op.couplings(t)?;
    let mut modes = Vec::new();
    for (xi, &a) in base.grid().points().zip(base.values()) {
        let weight = (-a * t).exp();
        if weight.norm() <= NEGLIGIBLE {
            continue;
        }
        let a_frac = fractional_power(a, op.alpha_frac())?;
        if a_frac.im.abs() > 1e-12 * (1.0 + a_frac.norm()) {
            return invalid("bounded moment check needs a real symbol");
        }
        modes.push(Mode {
            xi,
            weight,
            mu: couplings.iter().map(|c| c * a_frac.re).collect(),
        });
    }
    Ok(modes)
}

/// `|h|` on a grid fine enough to resolve the kernel's retained modes.
fn fine_abs(op: &AugmentedOperator, h: &GridFunction, modes: &[Mode]) -> Result<GridFunction> {
    let top = modes
        .iter()
        .map(|m| m.xi[0].abs().max(m.xi[1].abs()))
        .max()
        .unwrap_or(0) as usize;
    let floor = if h.dim() == 1 { 128 } else { 32 };
    let target = (8 * top + 8).max(floor);
    let q = target.div_ceil(h.resolution());
    let m = h.resolution() * q;
    let spectrum = band_limited_spectrum(h, op.base().grid())?;
    Ok(synthesize(h.dim(), m, &spectrum)?.map(f64::abs))
}

/// `sup_x Σ_z A(z) |h|(x - z) dz^d` with
/// `A(z) = ∫_{[-U,U]^n} |p̃_t(z, w)| ∏|w_j| dw`.
fn absolute_moment(g: &AuxKernel, modes: &[Mode], abs_h: &GridFunction, half_width: f64) -> Result<f64> {
    let n = modes.first().map_or(1, |m| m.mu.len());
    let gl = GaussLegendre::new(NODES_PER_PANEL);
    // even panel count puts the kink of |w| at a panel edge
    let panel = if n == 1 { 0.25 } else { 0.5 } * g.scale();
    let panels = 2 * ((half_width / panel).ceil() as usize).max(4);
    let width = 2.0 * half_width / panels as f64;
    let nodes: Vec<(f64, f64)> = (0..panels)
        .flat_map(|p| {
            let a = -half_width + p as f64 * width;
            gl.mapped(a, a + width).collect::<Vec<_>>()
        })
        .collect();

    // G_t(w - μ_j(ξ)) for every node, mode and auxiliary index
    let table: Vec<Vec<Vec<f64>>> = modes
        .par_iter()
        .map(|mode| {
            mode.mu
                .iter()
                .map(|mu| nodes.iter().map(|(w, _)| g.value(w - mu)).collect::<Result<Vec<_>>>())
                .collect::<Result<Vec<_>>>()
        })
        .collect::<Result<Vec<_>>>()?;

    let dim = abs_h.dim();
    let m = abs_h.resolution();
    let cells = abs_h.len();
    let norm = (2.0 * PI).powi(dim as i32).recip();
    let phases: Vec<Vec<Complex64>> = modes
        .iter()
        .map(|mode| {
            (0..cells)
                .map(|idx| {
                    let z = abs_h.point(idx);
                    let arg: f64 = z.iter().zip(mode.xi).map(|(z, k)| z * k as f64).sum();
                    mode.weight * Complex64::from_polar(norm, arg)
                })
                .collect()
        })
        .collect();

    let combos: Vec<Vec<usize>> = match n {
        1 => (0..nodes.len()).map(|i| vec![i]).collect(),
        _ => (0..nodes.len())
            .flat_map(|i| (0..nodes.len()).map(move |j| vec![i, j]))
            .collect(),
    };
    let density = combos
        .par_iter()
        .fold(
            || vec![0.0f64; cells],
            |mut acc, combo| {
                let weight: f64 = combo.iter().map(|&i| nodes[i].1 * nodes[i].0.abs()).product();
                if weight == 0.0 {
                    return acc;
                }
                let coeffs: Vec<f64> = table
                    .iter()
                    .map(|per_aux| combo.iter().zip(per_aux).map(|(&i, col)| col[i]).product())
                    .collect();
                for (z, slot) in acc.iter_mut().enumerate() {
                    let k: Complex64 = phases.iter().zip(&coeffs).map(|(p, c)| p[z] * c).sum();
                    *slot += weight * k.norm();
                }
                acc
            },
        )
        .reduce(
            || vec![0.0f64; cells],
            |mut a, b| {
                a.iter_mut().zip(b).for_each(|(x, y)| *x += y);
                a
            },
        );

    let cell = abs_h.spacing().powi(dim as i32);
    let hv = abs_h.values();
    let shift = |x: usize, z: usize| -> usize {
        match dim {
            1 => (x + m - z) % m,
            _ => {
                let (x0, x1, z0, z1) = (x / m, x % m, z / m, z % m);
                ((x0 + m - z0) % m) * m + (x1 + m - z1) % m
            }
        }
    };
    let sup = (0..cells)
        .into_par_iter()
        .map(|x| (0..cells).map(|z| density[z] * hv[shift(x, z)]).sum::<f64>() * cell)
        .reduce(|| 0.0, f64::max);
    Ok(sup)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::spectral::{build_symbol, FrequencyGrid, OperatorSpec};

    fn quartic_op(r: f64) -> AugmentedOperator {
        let s = build_symbol(&OperatorSpec::pure_power(2), FrequencyGrid::new(1, 16).unwrap()).unwrap();
        AugmentedOperator::new(s, 1, 0.5, r, 1).unwrap()
    }

    #[test]
    fn zero_function() {
        let h = GridFunction::zeros(1, 32).unwrap();
        assert_eq!(bounded_moment_check(&quartic_op(1.0), &h, 1.0).unwrap().constant, 0.0);
    }

    #[test]
    fn finite_and_stable() {
        let h = GridFunction::from_fn(1, 32, |_| 1.0).unwrap();
        let b = bounded_moment_check(&quartic_op(1.0), &h, 1.0).unwrap();
        assert!(b.constant.is_finite() && b.constant > 0.0);
        assert!(b.doubling_drift < DOUBLING_TOLERANCE);
        // the ξ = 0 term alone gives E|W| = 2√(t/π) for the Gaussian auxiliary kernel
        assert!(b.constant >= 2.0 / PI.sqrt() * 0.99);
    }
}
