use thiserror::Error;

/// Failures raised by the numerical operations of this crate.
#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    #[error("quadratic-form matrix is not symmetric positive definite")]
    NonPositiveDefiniteForm,

    #[error("perturbation degree {degree} is not strictly below the base order {order}")]
    DegreeViolation { degree: f64, order: f64 },

    #[error("fractional power undefined at symbol value {re} + {im}i (negative real part)")]
    BranchCut { re: f64, im: f64 },

    #[error("quadrature did not converge: error estimate {estimate:e} above tolerance {tolerance:e}")]
    QuadratureNonConverged { estimate: f64, tolerance: f64 },

    #[error(
        "frequency cutoff N={cutoff} too small: boundary-shell multiplier {diagnostic:e} \
         exceeds {threshold:e}; use N >= {suggested}"
    )]
    CutoffTooSmall {
        cutoff: usize,
        diagnostic: f64,
        threshold: f64,
        suggested: usize,
    },

    #[error("kernel has imaginary residue {residue:e}; symbol is not real and even")]
    ComplexResidue { residue: f64 },

    #[error("Duhamel remainder bound is not decreasing at order {order} (ratio {ratio})")]
    SeriesDiverged { order: usize, ratio: f64 },

    #[error("tilt {tilt} is outside the analyticity domain of the symbol (limit {limit})")]
    TiltOutOfDomain { tilt: f64, limit: f64 },

    #[error("auxiliary moment extraction failed: test function not band-limited (top band {tail:e})")]
    MomentDiverged { tail: f64 },

    #[error("auxiliary domain [-{half_width}, {half_width}] too small (relative drift {drift})")]
    AuxDomainTooSmall { half_width: f64, drift: f64 },

    #[error("Legendre supremum unbounded at momentum {momentum}")]
    SupUnbounded { momentum: f64 },

    #[error("path optimizer stalled: first-order residual {residual:e} after {iterations} iterations")]
    OptimizerStalled { residual: f64, iterations: usize },

    #[error("log-linear fit unstable: R^2 = {r_squared}")]
    FitUnstable { r_squared: f64 },

    #[error("invalid input: {0}")]
    InvalidInput(String),
}

pub type Result<T> = std::result::Result<T, Error>;

pub(crate) fn invalid<T>(msg: impl Into<String>) -> Result<T> {
    Err(Error::InvalidInput(msg.into()))
}
