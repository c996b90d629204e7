//! Sparse bounded-variable revised simplex.
//!
//! [`to_standard_form`] canonicalizes an [`LpProblem`](crate::formulation::LpProblem),
//! [`solve`] runs the two-phase simplex on it, and [`check_kkt`] verifies a
//! primal/dual pair from the problem data alone.

mod kkt;
pub mod lu;
mod simplex;
pub mod sparse;
mod standard;

pub use kkt::{check_kkt, ResidualReport};
pub use simplex::{solve, IterateRecord, LpSolution, LpStatus, SolverError, SolverOptions};
pub use standard::{to_standard_form, StandardFormError, StandardLp};
