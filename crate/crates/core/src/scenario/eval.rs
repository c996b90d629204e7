//! Pure evaluation of a dispatch against a scenario: storage recurrence,
//! power balance, renewable share and cost.

use std::collections::HashMap;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use super::{Technology, ValidatedScenario};
use crate::timeseries::TimeSeries;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum EvalError {
    #[error("time index {t} out of range for horizon {horizon}")]
    Index { t: usize, horizon: usize },
    #[error("total demand is zero")]
    DivisionByZero,
    #[error("horizon mismatch: dispatch has {dispatch} steps, expected {expected}")]
    HorizonMismatch { dispatch: usize, expected: usize },
    #[error("plant {0:?} is not part of the scenario")]
    UnknownPlant(String),
    #[error("invalid dispatch for plant {plant:?}: {reason}")]
    InvalidDispatch { plant: String, reason: String },
}

/// Level after one hour of pumping `pump` MW and generating `gen` MW.
pub fn storage_step(level: f64, pump: f64, gen: f64, eta_pump: f64, eta_turbine: f64) -> f64 {
    storage_step_over(level, pump, gen, eta_pump, eta_turbine, 1.0)
}

/// Level after a step of `dt_hours`: `level + dt·(pump·η_P − gen/η_G)`.
pub fn storage_step_over(
    level: f64,
    pump: f64,
    gen: f64,
    eta_pump: f64,
    eta_turbine: f64,
    dt_hours: f64,
) -> f64 {
    level + dt_hours * (pump * eta_pump - gen / eta_turbine)
}

/// Trajectory of one plant.
#[derive(Debug, Clone, PartialEq)]
pub struct PlantDispatch {
    pub name: String,
    pub technology: Technology,
    /// Installed (fixed or sized) capacity, MW.
    pub capacity: f64,
    /// Electric output, MW.
    pub generation: TimeSeries,
    /// Pumping consumption, MW (pumped hydro only).
    pub pumping: Option<TimeSeries>,
    /// Thermal power absorbed by the solar field, MW-thermal (solar thermal only).
    pub absorption: Option<TimeSeries>,
    /// Stored energy at the start of each step, MWh (storage plants only).
    pub storage: Option<TimeSeries>,
}

impl PlantDispatch {
    pub fn series(&self) -> impl Iterator<Item = &TimeSeries> {
        std::iter::once(&self.generation)
            .chain(self.pumping.iter())
            .chain(self.absorption.iter())
            .chain(self.storage.iter())
    }
}

/// Every plant's trajectory over a common horizon.
#[derive(Debug, Clone, PartialEq)]
pub struct Dispatch {
    horizon: usize,
    plants: Vec<PlantDispatch>,
}

impl Dispatch {
    pub fn new(horizon: usize, plants: Vec<PlantDispatch>) -> Result<Self, EvalError> {
        for p in &plants {
            let bad = |reason: String| EvalError::InvalidDispatch {
                plant: p.name.clone(),
                reason,
            };
            if !(p.capacity >= 0.0 && p.capacity.is_finite()) {
                return Err(bad(format!("capacity {}", p.capacity)));
            }
            for s in p.series() {
                if s.len() != horizon {
                    return Err(bad(format!("series length {} != {horizon}", s.len())));
                }
                if let Some(t) = s.values().iter().position(|&v| v < 0.0) {
                    return Err(bad(format!("negative value at step {t}")));
                }
            }
        }
        Ok(Self { horizon, plants })
    }

    pub fn horizon(&self) -> usize {
        self.horizon
    }

    pub fn plants(&self) -> &[PlantDispatch] {
        &self.plants
    }

    pub fn plant(&self, name: &str) -> Option<&PlantDispatch> {
        self.plants.iter().find(|p| p.name == name)
    }

    pub fn capacities(&self) -> Vec<(&str, f64)> {
        self.plants
            .iter()
            .map(|p| (p.name.as_str(), p.capacity))
            .collect()
    }

    /// Total generation of all plants at step `t`, MW.
    pub fn total_generation(&self, t: usize) -> f64 {
        self.plants.iter().map(|p| p.generation.values()[t]).sum()
    }

    /// Total pumping consumption at step `t`, MW.
    pub fn total_pumping(&self, t: usize) -> f64 {
        self.plants
            .iter()
            .filter_map(|p| p.pumping.as_ref())
            .map(|s| s.values()[t])
            .sum()
    }
}

/// `Σ generation(t) − D_t − Σ pumping(t)`; zero when the balance holds.
pub fn energy_balance_residual(
    dispatch: &Dispatch,
    demand: &TimeSeries,
    t: usize,
) -> Result<f64, EvalError> {
    let horizon = demand.len().min(dispatch.horizon());
    if t >= horizon {
        return Err(EvalError::Index { t, horizon });
    }
    Ok(dispatch.total_generation(t) - demand.values()[t] - dispatch.total_pumping(t))
}

/// Delivered PV, wind and solar-thermal energy over total demand energy.
/// Pumped hydro and conventional output are not counted.
pub fn renewable_share(dispatch: &Dispatch, demand: &TimeSeries) -> Result<f64, EvalError> {
    if dispatch.horizon() != demand.len() {
        return Err(EvalError::HorizonMismatch {
            dispatch: dispatch.horizon(),
            expected: demand.len(),
        });
    }
    let total_demand = demand.sum();
    if total_demand == 0.0 {
        return Err(EvalError::DivisionByZero);
    }
    let renewable: f64 = dispatch
        .plants()
        .iter()
        .filter(|p| p.technology.counts_as_renewable())
        .map(|p| p.generation.sum())
        .sum();
    Ok(renewable / total_demand)
}

/// Cost terms of the objective, in money units over the horizon.
#[derive(Debug, Clone, Copy, Default, PartialEq, Serialize, Deserialize)]
pub struct CostBreakdown {
    pub opex_conventional: f64,
    pub capex_renewable: f64,
    pub opex_renewable: f64,
    pub total: f64,
}

impl CostBreakdown {
    pub fn new(opex_conventional: f64, capex_renewable: f64, opex_renewable: f64) -> Self {
        Self {
            opex_conventional,
            capex_renewable,
            opex_renewable,
            total: opex_conventional + capex_renewable + opex_renewable,
        }
    }
}

/// Operating cost of conventional and renewable generation plus capital cost
/// of newly sized capacity. Plants with a fixed capacity carry no CAPEX.
pub fn annual_cost(
    dispatch: &Dispatch,
    scenario: &ValidatedScenario,
) -> Result<CostBreakdown, EvalError> {
    if dispatch.horizon() != scenario.horizon() {
        return Err(EvalError::HorizonMismatch {
            dispatch: dispatch.horizon(),
            expected: scenario.horizon(),
        });
    }
    // name -> (opex per MWh, capex per MW if sized)
    let mut prices: HashMap<&str, (f64, Option<f64>)> = HashMap::new();
    for p in &scenario.conventional {
        prices.insert(&p.name, (p.opex, None));
    }
    for p in &scenario.renewables {
        prices.insert(&p.name, (p.opex, p.fixed_capacity.is_none().then_some(p.capex)));
    }
    for p in &scenario.hydro {
        prices.insert(&p.name, (p.opex, p.fixed_capacity.is_none().then_some(p.capex)));
    }
    for p in &scenario.solar_thermal {
        prices.insert(&p.name, (p.opex, p.fixed_capacity.is_none().then_some(p.capex)));
    }

    let dt = scenario.step_hours();
    let (mut opex_conv, mut capex, mut opex_ren) = (0.0, 0.0, 0.0);
    for p in dispatch.plants() {
        let &(opex, plant_capex) = prices
            .get(p.name.as_str())
            .ok_or_else(|| EvalError::UnknownPlant(p.name.clone()))?;
        let energy = p.generation.sum() * dt;
        if p.technology == Technology::Conventional {
            opex_conv += opex * energy;
        } else {
            opex_ren += opex * energy;
            if let Some(c) = plant_capex {
                capex += c * p.capacity * scenario.capex_annualization;
            }
        }
    }
    Ok(CostBreakdown::new(opex_conv, capex, opex_ren))
}
