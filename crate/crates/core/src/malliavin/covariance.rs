//! Malliavin covariance of constant vector fields on the torus.

use nalgebra::DMatrix;

use crate::error::{invalid, Result};

/// `v_t = t Σ_i f_i f_iᵀ` with its spectrum.
#[derive(Debug, Clone, PartialEq)]
pub struct MalliavinCovariance {
    pub t: f64,
    pub matrix: DMatrix<f64>,
    pub min_eigenvalue: f64,
    /// Whether the fields span `ℝ^d` (`v_t` invertible).
    pub condition_satisfied: bool,
    /// `‖v_t^{-p}‖` (spectral norm) for `p = 1..=4` when invertible.
    pub inverse_norms: Option<[f64; 4]>,
}

/// Relative eigenvalue threshold below which `v_t` counts as singular.
const RANK_TOLERANCE: f64 = 1e-12;

pub fn malliavin_covariance(fields: &[Vec<f64>], t: f64) -> Result<MalliavinCovariance> {
    if !(t > 0.0) {
        return invalid("Malliavin covariance needs t > 0");
    }
    let Some(d) = fields.first().map(Vec::len) else {
        return invalid("at least one vector field is required");
    };
    if d == 0 || fields.iter().any(|f| f.len() != d) {
        return invalid("vector fields must share a positive dimension");
    }
    let mut matrix = DMatrix::zeros(d, d);
    for f in fields {
        let v = DMatrix::from_column_slice(d, 1, f);
        matrix += &v * v.transpose() * t;
    }
    let eig = matrix.clone().symmetric_eigen();
    let min_eigenvalue = eig.eigenvalues.min();
    let max_eigenvalue = eig.eigenvalues.max();
    let condition_satisfied = min_eigenvalue > RANK_TOLERANCE * max_eigenvalue.max(f64::MIN_POSITIVE);
    let inverse_norms = condition_satisfied.then(|| std::array::from_fn(|p| min_eigenvalue.powi(-(p as i32 + 1))));
    Ok(MalliavinCovariance {
        t,
        matrix,
        min_eigenvalue,
        condition_satisfied,
        inverse_norms,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn examples() {
        let one = malliavin_covariance(&[vec![1.0]], 2.0).unwrap();
        assert_eq!(one.matrix[(0, 0)], 2.0);
        assert_eq!(one.inverse_norms.unwrap()[0], 0.5);

        let degenerate = malliavin_covariance(&[vec![1.0, 0.0]], 1.0).unwrap();
        assert!(!degenerate.condition_satisfied);
        assert!(degenerate.inverse_norms.is_none());

        let pair = malliavin_covariance(&[vec![1.0, 0.0], vec![1.0, 1.0]], 1.0).unwrap();
        assert!((pair.min_eigenvalue - (3.0 - 5f64.sqrt()) / 2.0).abs() < 1e-14);
    }
}
