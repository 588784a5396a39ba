//! Fourier multipliers on a frequency lattice and their convolution kernels.

use std::f64::consts::PI;

use num_complex::Complex64;
use rayon::prelude::*;

use crate::error::{invalid, Error, Result};
use crate::fourier::{fft_nd, frequencies_of_flat, index_of_frequency, GridFunction};
use crate::spectral::{FrequencyGrid, Symbol};

/// Largest imaginary residue, relative to the kernel size, accepted on
/// real-kernel paths.
pub const RESIDUE_TOLERANCE: f64 = 1e-10;

/// Operator `h ↦ Σ m(ξ) ĥ(ξ) e^{iξ·x}` with `m` known on a lattice and taken
/// to vanish outside it.
#[derive(Debug, Clone, PartialEq)]
pub struct Multiplier {
    grid: FrequencyGrid,
    values: Vec<Complex64>,
}

impl Multiplier {
    pub fn new(grid: FrequencyGrid, values: Vec<Complex64>) -> Result<Self> {
        if values.len() != grid.len() {
            return invalid("multiplier length does not match its lattice");
        }
        Ok(Self { grid, values })
    }

    /// Tabulates `f` in parallel; the result does not depend on the schedule.
    pub fn from_fn<F>(grid: FrequencyGrid, f: F) -> Result<Self>
    where
        F: Fn([i64; 2]) -> Result<Complex64> + Sync,
    {
        let values = (0..grid.len())
            .into_par_iter()
            .map(|i| f(grid.point(i)))
            .collect::<Result<Vec<_>>>()?;
        Ok(Self { grid, values })
    }

    /// `e^{-t a(ξ)}`.
    pub fn semigroup(symbol: &Symbol, t: f64) -> Self {
        Self {
            grid: symbol.grid(),
            values: symbol.values().iter().map(|a| (-a * t).exp()).collect(),
        }
    }

    pub fn grid(&self) -> FrequencyGrid {
        self.grid
    }

    pub fn dim(&self) -> usize {
        self.grid.dim()
    }

    pub fn values(&self) -> &[Complex64] {
        &self.values
    }

    pub fn at(&self, xi: [i64; 2]) -> Complex64 {
        self.grid
            .index_of(xi)
            .map_or(Complex64::new(0.0, 0.0), |i| self.values[i])
    }

    /// Pointwise product with another multiplier on the same lattice.
    pub fn compose(&self, other: &Self) -> Result<Self> {
        if self.grid != other.grid {
            return invalid("multipliers live on different lattices");
        }
        Ok(Self {
            grid: self.grid,
            values: self.values.iter().zip(&other.values).map(|(a, b)| a * b).collect(),
        })
    }

    /// `m(ξ) · g(ξ)` for a frequency-side factor `g`.
    pub fn weighted<F: Fn([i64; 2]) -> Complex64>(&self, g: F) -> Self {
        Self {
            grid: self.grid,
            values: self
                .values
                .iter()
                .enumerate()
                .map(|(i, m)| m * g(self.grid.point(i)))
                .collect(),
        }
    }

    /// `max |m(ξ)|` over the outer shell `|ξ|_∞ = N`.
    pub fn boundary_diagnostic(&self) -> f64 {
        (0..self.values.len())
            .filter(|&i| self.grid.on_boundary(i))
            .map(|i| self.values[i].norm())
            .fold(0.0, f64::max)
    }

    /// Multiplier at FFT index `idx` of an `m`-point grid. An even `m` makes
    /// the Nyquist coordinate ambiguous; the two candidates are averaged so
    /// that Hermitian multipliers keep real functions real.
    fn at_fft_index(&self, idx: usize, m: usize) -> Complex64 {
        let xi = frequencies_of_flat(self.dim(), m, idx);
        let nyq = m.is_multiple_of(2) as usize;
        let half = (m / 2) as i64;
        let flips = |v: i64| -> Vec<i64> {
            if nyq == 1 && v == half {
                vec![half, -half]
            } else {
                vec![v]
            }
        };
        let a = flips(xi[0]);
        let b = if self.dim() == 2 { flips(xi[1]) } else { vec![0] };
        let mut sum = Complex64::new(0.0, 0.0);
        for &p in &a {
            for &q in &b {
                sum += self.at([p, q]);
            }
        }
        sum / (a.len() * b.len()) as f64
    }

    /// Applies the multiplier to a real grid function.
    pub fn apply(&self, h: &GridFunction) -> Result<GridFunction> {
        if h.dim() != self.dim() {
            return invalid("grid function and multiplier dimensions differ");
        }
        let m = h.resolution();
        let mut spectrum = h.spectrum();
        for (idx, c) in spectrum.iter_mut().enumerate() {
            *c *= self.at_fft_index(idx, m);
        }
        let (out, residue) = GridFunction::from_spectrum(self.dim(), m, spectrum)?;
        check_residue(residue, out.sup_norm().max(h.sup_norm()))?;
        Ok(out)
    }

    /// Complex kernel `K(y_j - x) = (2π)^{-d} Σ_ξ m(ξ) e^{iξ·(x - y_j)}` on the
    /// `m`-point grid, so that the operator is `f ↦ ∫ K(y - x) f(y) dy`. Every lattice frequency is folded onto its residue
    /// class modulo `m`, so the samples are exact for any `m`.
    pub fn kernel_complex(&self, x: &[f64], m: usize) -> Result<Vec<Complex64>> {
        let dim = self.dim();
        if x.len() != dim {
            return invalid(format!("base point must have {dim} coordinates"));
        }
        if m < 2 {
            return invalid("kernel grid resolution must be at least 2");
        }
        let norm = (2.0 * PI).powi(dim as i32);
        let mut coeffs = vec![Complex64::new(0.0, 0.0); m.pow(dim as u32)];
        for (i, v) in self.values.iter().enumerate() {
            let p = self.grid.point(i);
            let phase = p[0] as f64 * x[0] + if dim == 2 { p[1] as f64 * x[1] } else { 0.0 };
            let flat = match dim {
                1 => index_of_frequency(-p[0], m),
                _ => index_of_frequency(-p[0], m) * m + index_of_frequency(-p[1], m),
            };
            coeffs[flat] += v * Complex64::from_polar(1.0, phase) / norm;
        }
        fft_nd(&mut coeffs, dim, m, true);
        Ok(coeffs)
    }

    /// Real kernel on the `m`-point grid; fails with `ComplexResidue` when
    /// the multiplier is not Hermitian.
    pub fn kernel(&self, x: &[f64], m: usize) -> Result<Vec<f64>> {
        let complex = self.kernel_complex(x, m)?;
        let residue = complex.iter().fold(0.0f64, |acc, c| acc.max(c.im.abs()));
        let size = complex.iter().fold(0.0f64, |acc, c| acc.max(c.re.abs()));
        check_residue(residue, size)?;
        Ok(complex.into_iter().map(|c| c.re).collect())
    }

    /// Kernel value at displacement `z = y - x` by direct summation in the
    /// lattice's fixed summation order (compensated).
    pub fn kernel_value(&self, z: &[f64]) -> Complex64 {
        let dim = self.dim();
        let norm = (2.0 * PI).powi(dim as i32);
        let mut re = Neumaier::default();
        let mut im = Neumaier::default();
        for i in self.grid.summation_order() {
            let p = self.grid.point(i);
            let phase = -(p[0] as f64 * z[0] + if dim == 2 { p[1] as f64 * z[1] } else { 0.0 });
            let term = self.values[i] * Complex64::from_polar(1.0, phase);
            re.add(term.re);
            im.add(term.im);
        }
        Complex64::new(re.sum(), im.sum()) / norm
    }

    /// `∫ |K(z)| dz` over the torus by the periodic trapezoid rule on an
    /// `m`-point grid.
    pub fn l1_norm(&self, m: usize) -> Result<f64> {
        let zero = vec![0.0; self.dim()];
        let k = self.kernel_complex(&zero, m)?;
        let h = (2.0 * PI / m as f64).powi(self.dim() as i32);
        Ok(k.iter().map(|c| c.norm()).sum::<f64>() * h)
    }
}

fn check_residue(residue: f64, size: f64) -> Result<()> {
    if residue > RESIDUE_TOLERANCE * (1.0 + size) {
        return Err(Error::ComplexResidue { residue });
    }
    Ok(())
}

/// Grid resolution used for kernel norms: a power of two with at least
/// eight samples per period of the highest lattice frequency.
pub fn quadrature_resolution(grid: FrequencyGrid) -> usize {
    (8 * grid.cutoff() + 8).next_power_of_two().max(256)
}

/// Neumaier's compensated summation.
#[derive(Debug, Default, Clone, Copy)]
pub(crate) struct Neumaier {
    sum: f64,
    carry: f64,
}

impl Neumaier {
    pub(crate) fn add(&mut self, x: f64) {
        let t = self.sum + x;
        if self.sum.abs() >= x.abs() {
            self.carry += (self.sum - t) + x;
        } else {
            self.carry += (x - t) + self.sum;
        }
        self.sum = t;
    }

    pub(crate) fn sum(&self) -> f64 {
        self.sum + self.carry
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::spectral::{build_symbol, OperatorSpec};

    #[test]
    fn kernel_samples_match_direct_sum() {
        let grid = FrequencyGrid::new(1, 20).unwrap();
        let s = build_symbol(&OperatorSpec::pure_power(1), grid).unwrap();
        let mult = Multiplier::semigroup(&s, 0.3);
        // deliberately coarse grid: folding keeps the samples exact
        let k = mult.kernel(&[0.4], 8).unwrap();
        for (j, v) in k.iter().enumerate() {
            let y = 2.0 * PI * j as f64 / 8.0;
            let direct = mult.kernel_value(&[y - 0.4]).re;
            assert!((v - direct).abs() < 1e-14, "{v} vs {direct}");
        }
    }

    #[test]
    fn non_hermitian_multiplier_rejected_on_real_path() {
        let grid = FrequencyGrid::new(1, 4).unwrap();
        let mult = Multiplier::from_fn(grid, |p| Ok(Complex64::new(0.0, p[0] as f64).exp() * (p[0] as f64 + 5.0))).unwrap();
        assert!(matches!(mult.kernel(&[0.0], 16), Err(Error::ComplexResidue { .. })));
    }

    #[test]
    fn compensated_sum() {
        let mut s = Neumaier::default();
        for x in [1.0, 1e100, 1.0, -1e100] {
            s.add(x);
        }
        assert_eq!(s.sum(), 2.0);
    }
}
