//! Integration by parts for fractional powers through augmented semigroups,
//! with the gauge, moment and covariance checks around it.

mod augmented;
mod aux_kernel;
mod bounded;
mod covariance;
mod elementary;
mod exponent;
mod gauge;

pub use augmented::{
    augmented_moment, augmented_multiplier, augmented_multiplier_derivative, fractional_apply, ibp_check,
    ibp_check_with, moment_path_agreement, AugmentedOperator, CascadeWeight, IbpCheck, MomentPath,
};
pub use aux_kernel::{AuxKernel, AUX_TAIL_TOLERANCE};
pub use bounded::{bounded_moment_check, BoundedMoment, DOUBLING_TOLERANCE};
pub use covariance::{malliavin_covariance, MalliavinCovariance};
pub use elementary::{elementary_ibp_check, ElementaryIbp, ELEMENTARY_NODES};
pub use exponent::{exponent_fit, ExponentFit, EXPONENT_FIT_R2};
pub use gauge::{gauge_conjugate, GaugeConjugate, GaugeFunction};
