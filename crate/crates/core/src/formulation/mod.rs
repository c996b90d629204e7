//! Scenario to linear program and back.
//!
//! [`build_lp`] lays out the decision vector and emits the constraint rows
//! and objective; [`scale_problem`] equilibrates the result;
//! [`extract_solution`] turns an optimal point into capacities, dispatch and
//! cost; [`size_scenario`] runs the whole chain.

mod build;
mod extract;
mod mps;
mod problem;
mod scaling;

pub use build::{build_lp, layout_for};
pub use extract::{
    extract_solution, size_scenario, solve_problem, ExtractError, PlantCapacity, SizingError,
    SizingResult, SolveStats, COST_CONSISTENCY_TOL,
};
pub use mps::{row_name, write_mps};
pub use problem::{Capacity, LpProblem, LpRow, RowFamily, VariableLayout};
pub use scaling::{scale_problem, ScalingRecord};
