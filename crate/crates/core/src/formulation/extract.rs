use std::time::Instant;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use super::build::build_lp;
use super::problem::{Capacity, LpProblem};
use super::scaling::scale_problem;
use crate::scenario::{
    annual_cost, renewable_share, CostBreakdown, Dispatch, EvalError, PlantDispatch, Technology,
    ValidatedScenario,
};
use crate::solar_thermal::build_thermal_profile;
use crate::solver::{
    check_kkt, solve, to_standard_form, LpSolution, LpStatus, ResidualReport, SolverError,
    SolverOptions, StandardFormError,
};
use crate::timeseries::{TimeSeries, Unit};

/// Relative tolerance between the LP objective and the recomputed cost.
pub const COST_CONSISTENCY_TOL: f64 = 1e-6;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum ExtractError {
    #[error("solution has {got} entries, problem has {expected} variables")]
    Dimension { got: usize, expected: usize },
    #[error("problem carries no variable layout")]
    MissingLayout,
    #[error("recomputed cost {recomputed} differs from LP objective {objective}")]
    Consistency { recomputed: f64, objective: f64 },
    #[error(transparent)]
    Eval(#[from] EvalError),
}

#[derive(Debug, Error)]
pub enum SizingError {
    #[error(transparent)]
    StandardForm(#[from] StandardFormError),
    #[error(transparent)]
    Solver(#[from] SolverError),
    #[error(transparent)]
    Extract(#[from] ExtractError),
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PlantCapacity {
    pub name: String,
    pub technology: Technology,
    pub capacity_mw: f64,
    /// Pre-installed (not a decision variable).
    pub fixed: bool,
}

#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
pub struct SolveStats {
    pub rows: usize,
    pub cols: usize,
    pub iterations: usize,
    pub phase_one_iterations: usize,
    /// LP objective in money units.
    pub objective: f64,
    /// Largest row violation over `max(1, row scale)` in the unscaled problem.
    pub max_row_residual: f64,
    pub primal_residual: f64,
    pub dual_residual: f64,
    /// Residuals of the scaled standard-form pair.
    pub kkt: Option<ResidualReport>,
    pub seconds: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct SizingResult {
    pub scenario: String,
    pub alpha: f64,
    pub status: LpStatus,
    /// Empty unless optimal.
    pub capacities: Vec<PlantCapacity>,
    pub dispatch: Option<Dispatch>,
    /// Resource bound minus dispatch per renewable plant (MW) and per
    /// solar-thermal field (MW-thermal). Empty unless optimal.
    pub curtailment: Vec<(String, TimeSeries)>,
    pub cost: Option<CostBreakdown>,
    /// `None` when total demand is zero.
    pub achieved_share: Option<f64>,
    pub stats: SolveStats,
    /// Solar-thermal plants evaluated with an incidence factor of 1.
    pub assumed_normal_incidence: Vec<String>,
}

impl SizingResult {
    pub fn capacity(&self, name: &str) -> Option<f64> {
        self.capacities
            .iter()
            .find(|c| c.name == name)
            .map(|c| c.capacity_mw)
    }
}

fn series(s: &ValidatedScenario, x: &[f64], r: &std::ops::Range<usize>, unit: Unit) -> TimeSeries {
    let values = x[r.clone()].iter().map(|&v| v.max(0.0)).collect();
    TimeSeries::new(s.demand.start(), s.demand.step(), values, unit)
        .expect("non-negative finite values")
}

/// Slices an LP solution (original variables) into capacities, dispatch and
/// curtailment, and recomputes cost and share from the dispatch.
pub fn extract_solution(
    sol: &LpSolution,
    s: &ValidatedScenario,
    lp: &LpProblem,
) -> Result<SizingResult, ExtractError> {
    let layout = lp.layout.as_ref().ok_or(ExtractError::MissingLayout)?;
    let mut result = SizingResult {
        scenario: s.name.clone(),
        alpha: s.alpha,
        status: sol.status,
        capacities: Vec::new(),
        dispatch: None,
        curtailment: Vec::new(),
        cost: None,
        achieved_share: None,
        stats: SolveStats {
            rows: lp.num_rows(),
            cols: lp.num_vars,
            iterations: sol.iterations,
            phase_one_iterations: sol.phase_one_iterations,
            objective: sol.objective,
            primal_residual: sol.primal_residual,
            dual_residual: sol.dual_residual,
            ..SolveStats::default()
        },
        assumed_normal_incidence: s
            .solar_thermal
            .iter()
            .filter(|p| p.incidence_angle.is_none())
            .map(|p| p.name.clone())
            .collect(),
    };
    let x = &sol.x;
    if x.len() != lp.num_vars {
        return Err(ExtractError::Dimension {
            got: x.len(),
            expected: lp.num_vars,
        });
    }
    if sol.status != LpStatus::Optimal {
        return Ok(result);
    }
    result.stats.max_row_residual = lp.max_scaled_violation(x);
    let cap = |c: Capacity| c.value(x).max(0.0);
    let mut plants = Vec::new();
    let mut capacities = Vec::new();
    let mut curtailment = Vec::new();
    let mut push_cap = |name: &str, technology, c: Capacity| {
        capacities.push(PlantCapacity {
            name: name.to_string(),
            technology,
            capacity_mw: cap(c),
            fixed: matches!(c, Capacity::Fixed(_)),
        });
        cap(c)
    };

    for (p, r) in s.conventional.iter().zip(&layout.conventional) {
        let g = push_cap(&p.name, Technology::Conventional, Capacity::Fixed(p.installed_capacity));
        plants.push(PlantDispatch {
            name: p.name.clone(),
            technology: Technology::Conventional,
            capacity: g,
            generation: series(s, x, r, Unit::Mw),
            pumping: None,
            absorption: None,
            storage: None,
        });
    }
    for (k, p) in s.renewables.iter().enumerate() {
        let tech = Technology::from(p.technology);
        let g = push_cap(&p.name, tech, layout.renewable_capacity[k]);
        let generation = series(s, x, &layout.renewable_dispatch[k], Unit::Mw);
        let spill = p
            .availability
            .values()
            .iter()
            .zip(generation.values())
            .map(|(a, v)| (a * g - v).max(0.0))
            .collect();
        curtailment.push((p.name.clone(), generation.with_values(spill).expect("finite")));
        plants.push(PlantDispatch {
            name: p.name.clone(),
            technology: tech,
            capacity: g,
            generation,
            pumping: None,
            absorption: None,
            storage: None,
        });
    }
    for (k, p) in s.hydro.iter().enumerate() {
        let g = push_cap(&p.name, Technology::PumpedHydro, layout.hydro_capacity[k]);
        plants.push(PlantDispatch {
            name: p.name.clone(),
            technology: Technology::PumpedHydro,
            capacity: g,
            generation: series(s, x, &layout.hydro_generation[k], Unit::Mw),
            pumping: Some(series(s, x, &layout.hydro_pumping[k], Unit::Mw)),
            absorption: None,
            storage: Some(series(s, x, &layout.hydro_storage[k], Unit::Mwh)),
        });
    }
    for (k, p) in s.solar_thermal.iter().enumerate() {
        let g = push_cap(&p.name, Technology::SolarThermal, layout.solar_capacity[k]);
        let absorption = series(s, x, &layout.solar_absorption[k], Unit::Mw);
        let profile = build_thermal_profile(p).expect("incidence angles checked by validation");
        let spill = profile
            .max_thermal
            .values()
            .iter()
            .zip(absorption.values())
            .map(|(m, v)| (m * g - v).max(0.0))
            .collect();
        curtailment.push((p.name.clone(), absorption.with_values(spill).expect("finite")));
        plants.push(PlantDispatch {
            name: p.name.clone(),
            technology: Technology::SolarThermal,
            capacity: g,
            generation: series(s, x, &layout.solar_generation[k], Unit::Mw),
            pumping: None,
            absorption: Some(absorption),
            storage: Some(series(s, x, &layout.solar_storage[k], Unit::Mwh)),
        });
    }

    let dispatch = Dispatch::new(layout.horizon, plants)?;
    let cost = annual_cost(&dispatch, s)?;
    let scale = sol.objective.abs().max(1.0);
    if (cost.total - sol.objective).abs() > COST_CONSISTENCY_TOL * scale {
        return Err(ExtractError::Consistency {
            recomputed: cost.total,
            objective: sol.objective,
        });
    }
    result.achieved_share = match renewable_share(&dispatch, &s.demand) {
        Ok(v) => Some(v),
        Err(EvalError::DivisionByZero) => None,
        Err(e) => return Err(e.into()),
    };
    result.capacities = capacities;
    result.curtailment = curtailment;
    result.cost = Some(cost);
    result.dispatch = Some(dispatch);
    Ok(result)
}

/// Solves `lp` through equilibration and standard form; the returned
/// solution is in the original variables and rows. The residual report
/// refers to the scaled standard-form pair.
pub fn solve_problem(
    lp: &LpProblem,
    opts: &SolverOptions,
) -> Result<(LpSolution, ResidualReport), SizingError> {
    let (scaled, rec) = scale_problem(lp);
    let std = to_standard_form(&scaled)?;
    let sol = solve(&std, opts)?;
    let kkt = check_kkt(&std, &sol);
    let mut out = std.recover(&sol);
    out.x = rec.unscale_primal(&out.x);
    out.y = rec.unscale_duals(&out.y);
    out.objective = rec.unscale_objective(out.objective);
    if out.status == LpStatus::Optimal {
        // Recompute in unscaled terms to avoid carrying scaling round-off.
        out.objective = lp.objective_value(&out.x);
    }
    Ok((out, kkt))
}

/// Builds, solves and extracts the sizing of one scenario.
pub fn size_scenario(
    s: &ValidatedScenario,
    opts: &SolverOptions,
) -> Result<SizingResult, SizingError> {
    let start = Instant::now();
    let lp = build_lp(s);
    let (sol, kkt) = solve_problem(&lp, opts)?;
    let mut result = extract_solution(&sol, s, &lp)?;
    if sol.status == LpStatus::Optimal {
        result.stats.kkt = Some(kkt);
    }
    result.stats.seconds = start.elapsed().as_secs_f64();
    Ok(result)
}
