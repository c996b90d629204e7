//! Minimum-cost generation-mix sizing under an annual renewable-share target.
//!
//! A [`scenario::ScenarioConfig`] describes demand, existing conventional plants
//! and candidate renewable and storage plants. [`formulation::build_lp`] turns a
//! validated scenario into a sparse linear program, [`solver`] solves it with a
//! bounded-variable revised simplex, and [`formulation::extract_solution`] maps
//! the optimum back to capacities, dispatch and cost. [`sweep`] repeats this
//! over a grid of share targets and produces the reporting tables.

pub mod formulation;
pub mod io;
pub mod scenario;
pub mod solar_thermal;
pub mod solver;
pub mod sweep;
pub mod timeseries;

pub use scenario::{validate_scenario, ScenarioConfig, ValidatedScenario};
pub use timeseries::{TimeSeries, Unit};
