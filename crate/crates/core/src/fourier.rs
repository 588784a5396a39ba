//! Periodic grid functions on `[0, 2π)^d` and their discrete Fourier
//! coefficients.

use std::f64::consts::PI;

use num_complex::Complex64;
use rustfft::FftPlanner;

use crate::error::{invalid, Result};

/// Real samples of a function on the uniform grid `y_j = 2πj/M` in each of
/// `dim` coordinates, stored row-major (first coordinate slowest).
#[derive(Debug, Clone, PartialEq)]
pub struct GridFunction {
    dim: usize,
    m: usize,
    values: Vec<f64>,
}

impl GridFunction {
    pub fn new(dim: usize, m: usize, values: Vec<f64>) -> Result<Self> {
        if !(1..=2).contains(&dim) {
            return invalid(format!("grid dimension must be 1 or 2, got {dim}"));
        }
        if m < 2 {
            return invalid("grid resolution M must be at least 2");
        }
        if values.len() != m.pow(dim as u32) {
            return invalid(format!(
                "expected {} samples, got {}",
                m.pow(dim as u32),
                values.len()
            ));
        }
        Ok(Self { dim, m, values })
    }

    pub fn from_fn<F: Fn(&[f64]) -> f64>(dim: usize, m: usize, f: F) -> Result<Self> {
        let n = m.pow(dim as u32);
        let values = (0..n).map(|idx| f(&grid_point(dim, m, idx))).collect();
        Self::new(dim, m, values)
    }

    pub fn zeros(dim: usize, m: usize) -> Result<Self> {
        Self::new(dim, m, vec![0.0; m.pow(dim as u32)])
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn resolution(&self) -> usize {
        self.m
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }

    pub fn len(&self) -> usize {
        self.values.len()
    }

    pub fn is_empty(&self) -> bool {
        self.values.is_empty()
    }

    pub fn point(&self, idx: usize) -> Vec<f64> {
        grid_point(self.dim, self.m, idx)
    }

    /// Grid spacing `2π/M`.
    pub fn spacing(&self) -> f64 {
        2.0 * PI / self.m as f64
    }

    pub fn sup_norm(&self) -> f64 {
        self.values.iter().fold(0.0, |acc, v| acc.max(v.abs()))
    }

    /// Periodic trapezoid rule over the full torus.
    pub fn integral(&self) -> f64 {
        self.values.iter().sum::<f64>() * self.spacing().powi(self.dim as i32)
    }

    /// Normalized coefficients `ĥ` with `h(y) = Σ ĥ(ξ) e^{iξ·y}`, in FFT
    /// index order.
    pub fn spectrum(&self) -> Vec<Complex64> {
        let mut data: Vec<Complex64> = self.values.iter().map(|&v| Complex64::new(v, 0.0)).collect();
        fft_nd(&mut data, self.dim, self.m, false);
        let scale = 1.0 / self.len() as f64;
        data.iter_mut().for_each(|c| *c *= scale);
        data
    }

    /// Synthesizes `Σ ĥ(ξ) e^{iξ·y}` on the grid; returns the real part and
    /// the largest discarded imaginary part.
    pub fn from_spectrum(dim: usize, m: usize, mut spectrum: Vec<Complex64>) -> Result<(Self, f64)> {
        if spectrum.len() != m.pow(dim as u32) {
            return invalid("spectrum length does not match the grid");
        }
        fft_nd(&mut spectrum, dim, m, true);
        let residue = spectrum.iter().fold(0.0f64, |acc, c| acc.max(c.im.abs()));
        let values = spectrum.into_iter().map(|c| c.re).collect();
        Ok((Self::new(dim, m, values)?, residue))
    }

    pub fn max_abs_diff(&self, other: &Self) -> f64 {
        self.values
            .iter()
            .zip(&other.values)
            .fold(0.0, |acc, (a, b)| acc.max((a - b).abs()))
    }

    pub fn map<F: Fn(f64) -> f64>(&self, f: F) -> Self {
        Self {
            dim: self.dim,
            m: self.m,
            values: self.values.iter().map(|&v| f(v)).collect(),
        }
    }
}

pub(crate) fn grid_point(dim: usize, m: usize, idx: usize) -> Vec<f64> {
    let h = 2.0 * PI / m as f64;
    match dim {
        1 => vec![idx as f64 * h],
        _ => vec![(idx / m) as f64 * h, (idx % m) as f64 * h],
    }
}

/// Integer frequency of FFT index `j` on an `m`-point grid. The Nyquist
/// index `m/2` maps to `+m/2`.
pub fn frequency_of_index(j: usize, m: usize) -> i64 {
    if j <= m / 2 {
        j as i64
    } else {
        j as i64 - m as i64
    }
}

/// Whether FFT index `j` is the (ambiguous) Nyquist index.
pub fn is_nyquist(j: usize, m: usize) -> bool {
    m.is_multiple_of(2) && j == m / 2
}

/// FFT index holding frequency `xi` after aliasing onto an `m`-point grid.
pub fn index_of_frequency(xi: i64, m: usize) -> usize {
    xi.rem_euclid(m as i64) as usize
}

/// Frequencies `(ξ_1, ξ_2)` of a flat FFT index; unused coordinates are 0.
pub fn frequencies_of_flat(dim: usize, m: usize, idx: usize) -> [i64; 2] {
    match dim {
        1 => [frequency_of_index(idx, m), 0],
        _ => [frequency_of_index(idx / m, m), frequency_of_index(idx % m, m)],
    }
}

/// Unnormalized forward (`e^{-i}`) or inverse (`e^{+i}`) DFT in place.
pub fn fft_nd(data: &mut [Complex64], dim: usize, m: usize, inverse: bool) {
    let mut planner = FftPlanner::<f64>::new();
    let fft = if inverse {
        planner.plan_fft_inverse(m)
    } else {
        planner.plan_fft_forward(m)
    };
    match dim {
        1 => fft.process(data),
        _ => {
            for row in data.chunks_mut(m) {
                fft.process(row);
            }
            let mut column = vec![Complex64::new(0.0, 0.0); m];
            for c in 0..m {
                for r in 0..m {
                    column[r] = data[r * m + c];
                }
                fft.process(&mut column);
                for r in 0..m {
                    data[r * m + c] = column[r];
                }
            }
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn spectrum_of_cosine() {
        let f = GridFunction::from_fn(1, 16, |y| (2.0 * y[0]).cos()).unwrap();
        let s = f.spectrum();
        assert!((s[2].re - 0.5).abs() < 1e-14);
        assert!((s[14].re - 0.5).abs() < 1e-14);
        assert!(s[0].norm() < 1e-14);
    }

    #[test]
    fn spectrum_round_trip_2d() {
        let f = GridFunction::from_fn(2, 8, |y| (y[0]).sin() * (2.0 * y[1]).cos() + 0.3).unwrap();
        let (g, residue) = GridFunction::from_spectrum(2, 8, f.spectrum()).unwrap();
        assert!(residue < 1e-14);
        assert!(f.max_abs_diff(&g) < 1e-14);
    }

    #[test]
    fn frequency_index_mapping() {
        assert_eq!(frequency_of_index(0, 8), 0);
        assert_eq!(frequency_of_index(4, 8), 4);
        assert_eq!(frequency_of_index(5, 8), -3);
        assert_eq!(index_of_frequency(-3, 8), 5);
        assert_eq!(index_of_frequency(11, 8), 3);
        assert!(is_nyquist(4, 8));
    }

    #[test]
    fn rejects_bad_shapes() {
        assert!(GridFunction::new(3, 4, vec![0.0; 64]).is_err());
        assert!(GridFunction::new(1, 4, vec![0.0; 5]).is_err());
    }
}
