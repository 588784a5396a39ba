//! Structural checks on heat kernels: the semigroup law, symmetry, and
//! `L¹` norms of derivative kernels.

use std::f64::consts::PI;

use num_complex::Complex64;

use super::kernel::{ensure_cutoff, heat_kernel, TRUNCATION_THRESHOLD};
use super::multiplier::{quadrature_resolution, Multiplier};
use crate::error::{invalid, Result};
use crate::fourier::fft_nd;
use crate::spectral::{fractional_power, Symbol};

/// Grid resolution for exact trapezoid convolutions of band-limited kernels.
fn convolution_resolution(symbol: &Symbol) -> usize {
    (2 * symbol.grid().cutoff() + 2).next_power_of_two().max(16)
}

/// `max_y |p_{t+s}(x, y) - ∫ p_t(x, z) p_s(z, y) dz|`, with the `z`-integral
/// done by the periodic trapezoid rule (a discrete circular convolution).
pub fn chapman_kolmogorov_check(symbol: &Symbol, t: f64, s: f64, x: &[f64]) -> Result<f64> {
    if !(t > 0.0 && s > 0.0) {
        return invalid("Chapman-Kolmogorov check needs t, s > 0");
    }
    let m = convolution_resolution(symbol);
    let dim = symbol.dim();
    let pt = heat_kernel(symbol, t, x, m)?;
    let origin = vec![0.0; dim];
    // p_s(z, y) = K_s(y - z)
    let ks = heat_kernel(symbol, s, &origin, m)?;
    let pts = heat_kernel(symbol, t + s, x, m)?;

    let to_complex = |v: &[f64]| v.iter().map(|&r| Complex64::new(r, 0.0)).collect::<Vec<_>>();
    let mut a = to_complex(pt.values());
    let mut b = to_complex(ks.values());
    fft_nd(&mut a, dim, m, false);
    fft_nd(&mut b, dim, m, false);
    let mut conv: Vec<Complex64> = a.iter().zip(&b).map(|(u, v)| u * v).collect();
    fft_nd(&mut conv, dim, m, true);
    let cell = (2.0 * PI / m as f64).powi(dim as i32);
    let scale = cell / m.pow(dim as u32) as f64;
    Ok(conv
        .iter()
        .zip(pts.values())
        .map(|(c, p)| (c.re * scale - p).abs())
        .fold(0.0, f64::max))
}

/// `max |p_t(x, y) - p_t(y, x)|` over grid pairs. The kernel depends on
/// `y - x` only, so this compares `K(z)` with `K(-z)` on the grid.
pub fn kernel_symmetry_check(symbol: &Symbol, t: f64) -> Result<f64> {
    let m = convolution_resolution(symbol);
    let dim = symbol.dim();
    let k = heat_kernel(symbol, t, &vec![0.0; dim], m)?;
    let v = k.values();
    let neg = |j: usize| (m - j) % m;
    let mut worst = 0.0f64;
    for idx in 0..v.len() {
        let mirror = match dim {
            1 => neg(idx),
            _ => neg(idx / m) * m + neg(idx % m),
        };
        worst = worst.max((v[idx] - v[mirror]).abs());
    }
    Ok(worst)
}

/// `(2π)^{-d} ∫ |Σ_ξ a(ξ)^{αl} e^{-t a(ξ)} e^{iξ·z}| dz`, the `L∞ → L∞`
/// norm of `(L^α)^l e^{-tL}`.
pub fn derivative_seminorm(symbol: &Symbol, frac_alpha: f64, l: u32, t: f64) -> Result<f64> {
    if !(t > 0.0) {
        return invalid("derivative seminorm needs t > 0");
    }
    ensure_cutoff(symbol, t, TRUNCATION_THRESHOLD)?;
    let power = frac_alpha * l as f64;
    let factors = symbol
        .values()
        .iter()
        .map(|&a| if l == 0 { Ok(Complex64::new(1.0, 0.0)) } else { fractional_power(a, power) })
        .collect::<Result<Vec<_>>>()?;
    let base = Multiplier::semigroup(symbol, t);
    let mult = Multiplier::new(
        symbol.grid(),
        base.values().iter().zip(&factors).map(|(m, f)| m * f).collect(),
    )?;
    mult.l1_norm(quadrature_resolution(symbol.grid()))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::spectral::{build_symbol, FrequencyGrid, OperatorSpec};

    #[test]
    fn laplacian_kernel_is_markovian() {
        let s = build_symbol(&OperatorSpec::pure_power(1), FrequencyGrid::new(1, 40).unwrap()).unwrap();
        let v = derivative_seminorm(&s, 0.5, 0, 0.1).unwrap();
        assert!((v - 1.0).abs() < 1e-10);
    }

    #[test]
    fn semigroup_law_and_symmetry() {
        let s = build_symbol(&OperatorSpec::pure_power(2), FrequencyGrid::new(1, 30).unwrap()).unwrap();
        assert!(chapman_kolmogorov_check(&s, 0.05, 0.1, &[0.3]).unwrap() < 1e-10);
        assert!(kernel_symmetry_check(&s, 0.05).unwrap() < 1e-12);
    }
}
