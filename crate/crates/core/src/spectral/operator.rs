//! Generator families and their symbols at arbitrary complex frequencies.

use nalgebra::DMatrix;
use num_complex::Complex64;

use super::levy::{levy_symbol_complex, LevyDensity};
use crate::error::{invalid, Error, Result};

/// Term `coeff · (iξ_1)^{p_1} (iξ_2)^{p_2}` of a perturbation polynomial.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Monomial {
    pub powers: [u32; 2],
    pub coeff: f64,
}

impl Monomial {
    pub fn new(powers: [u32; 2], coeff: f64) -> Self {
        Self { powers, coeff }
    }

    /// One-dimensional term `coeff · (iξ)^p`.
    pub fn one_d(power: u32, coeff: f64) -> Self {
        Self::new([power, 0], coeff)
    }

    pub fn degree(&self) -> u32 {
        self.powers[0] + self.powers[1]
    }

    pub fn eval(&self, zeta: [Complex64; 2]) -> Complex64 {
        let i = Complex64::new(0.0, 1.0);
        (i * zeta[0]).powu(self.powers[0]) * (i * zeta[1]).powu(self.powers[1]) * self.coeff
    }
}

/// Polynomial `Q(iξ)` given as a sum of monomials.
pub fn eval_polynomial(q: &[Monomial], zeta: [Complex64; 2]) -> Complex64 {
    q.iter().map(|m| m.eval(zeta)).sum()
}

/// A translation-invariant generator on the circle or the 2-torus, described
/// by its symbol. Signs are normalized so that `Re a ≥ 0` for the elliptic
/// families.
#[derive(Debug, Clone, PartialEq)]
pub enum OperatorSpec {
    /// `a(ξ) = Σ_i ξ_i^{2k}`.
    PurePower { k: u32 },
    /// `a(ξ) = Σ ξ^{(α)} A_{(α),(β)} ξ^{(β)}` over multi-indices of length
    /// `k`, with `A` of size `d^k × d^k`.
    QuadraticForm { k: u32, matrix: DMatrix<f64> },
    /// Compensated jump generator with density `h(y)|y|^{-(2l+1+α)}`.
    Levy {
        l: u32,
        alpha_levy: f64,
        density: LevyDensity,
    },
    /// `a(ξ) = a_base(ξ)^{α}` on the principal branch.
    FractionalPower {
        base: Box<OperatorSpec>,
        alpha_frac: f64,
    },
    /// `a(ξ) = a_base(ξ) + Q(iξ)`.
    Perturbed {
        base: Box<OperatorSpec>,
        q: Vec<Monomial>,
    },
}

impl OperatorSpec {
    pub fn pure_power(k: u32) -> Self {
        Self::PurePower { k }
    }

    pub fn fractional(base: OperatorSpec, alpha_frac: f64) -> Self {
        Self::FractionalPower {
            base: Box::new(base),
            alpha_frac,
        }
    }

    pub fn perturbed(base: OperatorSpec, q: Vec<Monomial>) -> Self {
        Self::Perturbed {
            base: Box::new(base),
            q,
        }
    }

    /// Order `m` of the symbol: `|a(ξ)| ≤ C(1 + |ξ|)^m`.
    pub fn order(&self) -> f64 {
        match self {
            Self::PurePower { k } | Self::QuadraticForm { k, .. } => 2.0 * *k as f64,
            // The compact-support compensation terms grow like |ξ|^{2l} and
            // dominate the |ξ|^{2l+α} contribution of the singularity.
            Self::Levy { l, .. } => 2.0 * *l as f64,
            Self::FractionalPower { base, alpha_frac } => alpha_frac * base.order(),
            Self::Perturbed { base, .. } => base.order(),
        }
    }

    /// Ellipticity order `m′`: `|a(ξ)| ≥ C|ξ|^{m′}` at high frequency.
    pub fn ellipticity_order(&self) -> f64 {
        self.order()
    }

    /// Parameter `k` of the leading `2k`-th order part, when it is an
    /// integer power.
    pub fn half_order(&self) -> Option<u32> {
        match self {
            Self::PurePower { k } | Self::QuadraticForm { k, .. } => Some(*k),
            Self::Perturbed { base, .. } => base.half_order(),
            _ => None,
        }
    }

    pub fn contains_levy(&self) -> bool {
        match self {
            Self::Levy { .. } => true,
            Self::FractionalPower { base, .. } | Self::Perturbed { base, .. } => base.contains_levy(),
            _ => false,
        }
    }

    pub fn contains_fractional(&self) -> bool {
        match self {
            Self::FractionalPower { .. } => true,
            Self::Perturbed { base, .. } => base.contains_fractional(),
            _ => false,
        }
    }

    /// Checks the structural invariants for use on a `dim`-torus.
    pub fn validate(&self, dim: usize) -> Result<()> {
        match self {
            Self::PurePower { k } => {
                if *k == 0 {
                    return invalid("k must be at least 1");
                }
            }
            Self::QuadraticForm { k, matrix } => {
                if *k == 0 {
                    return invalid("k must be at least 1");
                }
                let size = dim.pow(*k);
                if matrix.nrows() != size || matrix.ncols() != size {
                    return invalid(format!(
                        "quadratic-form matrix must be {size}x{size} for d={dim}, k={k}"
                    ));
                }
                let scale = matrix.iter().fold(0.0f64, |acc, v| acc.max(v.abs()));
                if (matrix - matrix.transpose()).iter().any(|v| v.abs() > 1e-12 * scale) {
                    return Err(Error::NonPositiveDefiniteForm);
                }
                if matrix.clone().cholesky().is_none() {
                    return Err(Error::NonPositiveDefiniteForm);
                }
            }
            Self::Levy {
                l,
                alpha_levy,
                density,
            } => {
                if dim != 1 {
                    return invalid("Lévy generators are implemented on the circle only");
                }
                if *l == 0 {
                    return invalid("l must be at least 1");
                }
                if !(*alpha_levy > -1.0 && *alpha_levy < 0.0) {
                    return invalid(format!("alpha_levy must lie in (-1, 0), got {alpha_levy}"));
                }
                density.validate()?;
            }
            Self::FractionalPower { base, alpha_frac } => {
                if !(*alpha_frac > 0.0 && *alpha_frac < 1.0) {
                    return invalid(format!("alpha_frac must lie in (0, 1), got {alpha_frac}"));
                }
                base.validate(dim)?;
            }
            Self::Perturbed { base, q } => {
                base.validate(dim)?;
                let order = base.order();
                for m in q {
                    if dim == 1 && m.powers[1] != 0 {
                        return invalid("perturbation uses a second coordinate on the circle");
                    }
                    if m.degree() as f64 >= order {
                        return Err(Error::DegreeViolation {
                            degree: m.degree() as f64,
                            order,
                        });
                    }
                }
            }
        }
        Ok(())
    }

    /// Symbol at a complex frequency; unused coordinates must be zero.
    pub fn eval(&self, zeta: [Complex64; 2]) -> Result<Complex64> {
        match self {
            Self::PurePower { k } => Ok(zeta[0].powu(2 * k) + zeta[1].powu(2 * k)),
            Self::QuadraticForm { k, matrix } => Ok(quadratic_form(*k, matrix, zeta)),
            Self::Levy {
                l,
                alpha_levy,
                density,
            } => levy_symbol_complex(density, *l, *alpha_levy, zeta[0]),
            Self::FractionalPower { base, alpha_frac } => {
                fractional_power(base.eval(zeta)?, *alpha_frac)
            }
            Self::Perturbed { base, q } => Ok(base.eval(zeta)? + eval_polynomial(q, zeta)),
        }
    }

    pub fn eval_real(&self, xi: [f64; 2]) -> Result<Complex64> {
        self.eval([Complex64::new(xi[0], 0.0), Complex64::new(xi[1], 0.0)])
    }
}

/// `z^α` on the principal branch, rejecting values with negative real part.
pub fn fractional_power(z: Complex64, alpha: f64) -> Result<Complex64> {
    if z.re < -1e-12 * z.norm().max(1.0) {
        return Err(Error::BranchCut { re: z.re, im: z.im });
    }
    if z.norm() == 0.0 {
        return Ok(Complex64::new(0.0, 0.0));
    }
    if z.im == 0.0 {
        return Ok(Complex64::new(z.re.max(0.0).powf(alpha), 0.0));
    }
    Ok(z.powf(alpha))
}

/// `Σ ξ^{(α)} A ξ^{(β)}` where `ξ^{(α)} = ξ_{α_1}⋯ξ_{α_k}` and multi-index
/// `(α_1, …, α_k)` is the base-`d` digit expansion of the row index.
fn quadratic_form(k: u32, matrix: &DMatrix<f64>, zeta: [Complex64; 2]) -> Complex64 {
    let size = matrix.nrows();
    let dim = if size == 1 { 1 } else { 2 };
    let monomials: Vec<Complex64> = (0..size)
        .map(|mut row| {
            let mut value = Complex64::new(1.0, 0.0);
            for _ in 0..k {
                value *= zeta[row % dim];
                row /= dim;
            }
            value
        })
        .collect();
    let mut sum = Complex64::new(0.0, 0.0);
    for (a, za) in monomials.iter().enumerate() {
        for (b, zb) in monomials.iter().enumerate() {
            sum += za * zb * matrix[(a, b)];
        }
    }
    sum
}

#[cfg(test)]
mod tests {
    use super::*;

    fn real(spec: &OperatorSpec, xi: f64) -> Complex64 {
        spec.eval_real([xi, 0.0]).unwrap()
    }

    #[test]
    fn pure_power_values() {
        assert_eq!(real(&OperatorSpec::pure_power(2), 3.0), Complex64::new(81.0, 0.0));
        let two_d = OperatorSpec::pure_power(1).eval_real([2.0, 3.0]).unwrap();
        assert_eq!(two_d, Complex64::new(13.0, 0.0));
    }

    #[test]
    fn fractional_square_root_of_quartic() {
        let spec = OperatorSpec::fractional(OperatorSpec::pure_power(2), 0.5);
        assert!((real(&spec, 2.0) - Complex64::new(4.0, 0.0)).norm() < 1e-14);
        assert!(matches!(
            fractional_power(Complex64::new(-1.0, 0.0), 0.5),
            Err(Error::BranchCut { .. })
        ));
    }

    #[test]
    fn perturbed_examples() {
        let minus = OperatorSpec::perturbed(OperatorSpec::pure_power(2), vec![Monomial::one_d(2, 1.0)]);
        assert!(real(&minus, 1.0).norm() < 1e-15);
        let plus = OperatorSpec::perturbed(OperatorSpec::pure_power(2), vec![Monomial::one_d(2, -1.0)]);
        assert!((real(&plus, 1.0) - Complex64::new(2.0, 0.0)).norm() < 1e-15);
    }

    #[test]
    fn degree_violation_rejected() {
        let spec = OperatorSpec::perturbed(OperatorSpec::pure_power(1), vec![Monomial::one_d(2, 1.0)]);
        assert!(matches!(spec.validate(1), Err(Error::DegreeViolation { .. })));
    }

    #[test]
    fn quadratic_form_identity_and_rejections() {
        let identity = OperatorSpec::QuadraticForm {
            k: 2,
            matrix: DMatrix::identity(1, 1),
        };
        identity.validate(1).unwrap();
        assert!((real(&identity, 3.0) - Complex64::new(81.0, 0.0)).norm() < 1e-12);

        // d = 2, k = 1: a(ξ) = ξᵀAξ
        let a = DMatrix::from_row_slice(2, 2, &[2.0, 1.0, 1.0, 1.0]);
        let form = OperatorSpec::QuadraticForm { k: 1, matrix: a };
        form.validate(2).unwrap();
        let v = form.eval_real([1.0, 2.0]).unwrap();
        assert!((v.re - (2.0 + 4.0 + 4.0)).abs() < 1e-12);

        let indefinite = OperatorSpec::QuadraticForm {
            k: 1,
            matrix: DMatrix::from_row_slice(2, 2, &[1.0, 2.0, 2.0, 1.0]),
        };
        assert_eq!(indefinite.validate(2), Err(Error::NonPositiveDefiniteForm));
        let wrong_size = OperatorSpec::QuadraticForm {
            k: 2,
            matrix: DMatrix::identity(2, 2),
        };
        assert!(wrong_size.validate(2).is_err());
    }

    #[test]
    fn orders() {
        assert_eq!(OperatorSpec::pure_power(3).order(), 6.0);
        assert_eq!(OperatorSpec::fractional(OperatorSpec::pure_power(2), 0.25).order(), 1.0);
    }
}
