//! Heat kernels and semigroup actions computed exactly in frequency space.

mod checks;
mod duhamel;
mod kernel;
mod multiplier;
mod tilt;

pub use checks::{chapman_kolmogorov_check, derivative_seminorm, kernel_symmetry_check};
pub use duhamel::{dirichlet_factor, duhamel_deviation, duhamel_series, DuhamelConfig, DuhamelResult};
pub use kernel::{
    apply_semigroup, ensure_cutoff, heat_kernel, heat_kernel_with_threshold,
    kernel_derivative_value, kernel_value, minimal_cutoff, minimal_cutoff_for,
    truncation_diagnostic, with_cutoff_for, KernelField, TRUNCATION_THRESHOLD,
};
pub use multiplier::{quadrature_resolution, Multiplier, RESIDUE_TOLERANCE};
pub use tilt::{analytic_strip, tilted_norm, tilted_semigroup, TiltSpec, LEVY_SHIFT_LIMIT};
