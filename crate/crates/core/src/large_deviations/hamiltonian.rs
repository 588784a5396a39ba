//! Real-phase Hamiltonians `H(ξ)`: the principal symbol evaluated on real
//! momenta, or the exponential-moment symbol of a Lévy generator.

use std::fmt;
use std::sync::Arc;

use crate::error::{invalid, Result};
use crate::spectral::{levy_hamiltonian, LevyDensity, OperatorSpec};

/// Where a Hamiltonian comes from.
#[derive(Clone)]
pub enum HamiltonianSource {
    /// Principal part of a differential or fractional operator.
    Operator(OperatorSpec),
    /// `(-1)^{l+1} ∫ (e^{yξ} - Σ_{j≤l} (yξ)^{2j}/(2j)!) h(y)|y|^{-(2l+1+α)} dy`.
    Levy {
        l: u32,
        alpha_levy: f64,
        density: LevyDensity,
    },
    Custom(Arc<dyn Fn([f64; 2]) -> f64 + Send + Sync>),
}

impl fmt::Debug for HamiltonianSource {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Self::Operator(spec) => f.debug_tuple("Operator").field(spec).finish(),
            Self::Levy { l, alpha_levy, .. } => write!(f, "Levy {{ l: {l}, alpha_levy: {alpha_levy} }}"),
            Self::Custom(_) => write!(f, "Custom(..)"),
        }
    }
}

/// Closed forms with a known Legendre transform.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum ClosedForm {
    /// `H(ξ) = ξ^{2k}` in one dimension.
    Power { k: u32 },
}

impl ClosedForm {
    /// `L(p) = (2k - 1) (|p|/2k)^{2k/(2k-1)}`.
    pub fn legendre(&self, p: f64) -> f64 {
        match *self {
            Self::Power { k } => {
                let k2 = 2.0 * k as f64;
                (k2 - 1.0) * (p.abs() / k2).powf(k2 / (k2 - 1.0))
            }
        }
    }
}

#[derive(Debug, Clone)]
pub struct Hamiltonian {
    dim: usize,
    source: HamiltonianSource,
    order: Option<f64>,
    closed_form: Option<ClosedForm>,
}

impl Hamiltonian {
    /// Real phase of the principal part of `spec`. Lower-order
    /// perturbations do not contribute; a fractional power `A^α` has phase
    /// `H_A^α`. Lévy generators need odd `l`, since for even `l` the
    /// compensated exponential moment is concave.
    pub fn from_spec(spec: &OperatorSpec, dim: usize) -> Result<Self> {
        spec.validate(dim)?;
        match spec {
            OperatorSpec::Perturbed { base, .. } => Self::from_spec(base, dim),
            OperatorSpec::Levy {
                l,
                alpha_levy,
                density,
            } => {
                if l % 2 == 0 {
                    return invalid(format!("Lévy order l = {l} is even; the real phase is concave"));
                }
                Ok(Self {
                    dim,
                    source: HamiltonianSource::Levy {
                        l: *l,
                        alpha_levy: *alpha_levy,
                        density: density.clone(),
                    },
                    order: None,
                    closed_form: None,
                })
            }
            OperatorSpec::FractionalPower { base, .. } if base.contains_levy() => {
                invalid("fractional powers of Lévy generators have no real phase here")
            }
            other => Ok(Self {
                dim,
                source: HamiltonianSource::Operator(other.clone()),
                order: Some(other.order()),
                closed_form: match other {
                    OperatorSpec::PurePower { k } if dim == 1 => Some(ClosedForm::Power { k: *k }),
                    _ => None,
                },
            }),
        }
    }

    /// `H(ξ) = ξ^{2k}` on the circle.
    pub fn power(k: u32) -> Self {
        Self::from_spec(&OperatorSpec::pure_power(k), 1).expect("pure powers are valid")
    }

    pub fn custom(dim: usize, f: impl Fn([f64; 2]) -> f64 + Send + Sync + 'static, order: Option<f64>) -> Self {
        Self {
            dim,
            source: HamiltonianSource::Custom(Arc::new(f)),
            order,
            closed_form: None,
        }
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn source(&self) -> &HamiltonianSource {
        &self.source
    }

    /// Homogeneity degree at infinity when known.
    pub fn order(&self) -> Option<f64> {
        self.order
    }

    pub fn closed_form(&self) -> Option<ClosedForm> {
        self.closed_form
    }

    pub fn eval(&self, xi: [f64; 2]) -> Result<f64> {
        let xi = if self.dim == 1 { [xi[0], 0.0] } else { xi };
        match &self.source {
            HamiltonianSource::Operator(spec) => spec.eval_real(xi).map(|v| v.re),
            HamiltonianSource::Levy {
                l,
                alpha_levy,
                density,
            } => levy_hamiltonian(density, *l, *alpha_levy, xi[0]),
            HamiltonianSource::Custom(f) => Ok(f(xi)),
        }
    }

    pub fn eval_1d(&self, xi: f64) -> Result<f64> {
        self.eval([xi, 0.0])
    }

    /// Smallest discrete second difference `H(ξ+h) - 2H(ξ) + H(ξ-h)` over
    /// `points` samples of `[-radius, radius]` along each axis; convexity
    /// requires it to be `≥ -1e-10`.
    pub fn min_second_difference(&self, radius: f64, points: usize) -> Result<f64> {
        if points < 3 {
            return invalid("convexity check needs at least 3 points");
        }
        let h = 2.0 * radius / (points - 1) as f64;
        let mut worst = f64::INFINITY;
        for axis in 0..self.dim {
            let at = |s: f64| {
                let mut xi = [0.0; 2];
                xi[axis] = s;
                self.eval(xi)
            };
            let samples = (0..points)
                .map(|j| at(-radius + j as f64 * h))
                .collect::<Result<Vec<_>>>()?;
            for w in samples.windows(3) {
                worst = worst.min(w[0] - 2.0 * w[1] + w[2]);
            }
        }
        Ok(worst)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use nalgebra::DMatrix;

    #[test]
    fn phases() {
        assert_eq!(Hamiltonian::power(2).eval_1d(2.0).unwrap(), 16.0);
        let q = OperatorSpec::QuadraticForm {
            k: 1,
            matrix: DMatrix::from_row_slice(2, 2, &[2.0, 0.5, 0.5, 1.0]),
        };
        let h = Hamiltonian::from_spec(&q, 2).unwrap();
        assert!((h.eval([1.0, 2.0]).unwrap() - 8.0).abs() < 1e-14);
        let frac = OperatorSpec::fractional(OperatorSpec::pure_power(2), 0.5);
        assert!((Hamiltonian::from_spec(&frac, 1).unwrap().eval_1d(3.0).unwrap() - 9.0).abs() < 1e-12);
        assert!(Hamiltonian::power(2).min_second_difference(3.0, 61).unwrap() >= 0.0);
    }

    #[test]
    fn even_levy_order_rejected() {
        let spec = OperatorSpec::Levy {
            l: 2,
            alpha_levy: -0.5,
            density: LevyDensity::indicator(1.0),
        };
        assert!(Hamiltonian::from_spec(&spec, 1).is_err());
    }

    #[test]
    fn closed_form_values() {
        let c = ClosedForm::Power { k: 2 };
        assert!((c.legendre(4.0) - 3.0).abs() < 1e-14);
        assert!((ClosedForm::Power { k: 1 }.legendre(1.0) - 0.25).abs() < 1e-15);
    }
}
