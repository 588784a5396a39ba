//! Real-phase Hamiltonians, Legendre transforms, actions of torus paths and
//! the rate function `l(x, y)`.

mod hamiltonian;
mod legendre;
mod maslov;
mod path;

pub use hamiltonian::{ClosedForm, Hamiltonian, HamiltonianSource};
pub use legendre::{legendre, legendre_with_argmax, GrowthSandwich, LagrangianTable, BRACKET_LIMIT, TABLE_DECADES};
pub use maslov::{maslov_scaled_symbol, scaling_identity_check};
pub use path::{action, minimize_action, rate_function, Lagrangian, Minimized, DEFAULT_TABLE_POINTS, PathPL, RateConfig, RateResult};
