//! Scenario and plant definitions, validation, and the pure evaluation
//! helpers shared by the LP formulation and the test oracles.
//!
//! Naming: decision capacities are called `capacity` (MW) throughout, and the
//! per-unit renewable resource bound is called `availability`.

mod eval;
mod validate;

use std::collections::BTreeMap;
use std::fmt;

use serde::{Deserialize, Serialize};

use crate::timeseries::TimeSeries;

pub use eval::{
    annual_cost, energy_balance_residual, renewable_share, storage_step, storage_step_over,
    CostBreakdown, Dispatch, EvalError, PlantDispatch,
};
pub use validate::{validate_scenario, ConfigError, ValidatedScenario, BUS_WEIGHT_TOL};

/// Default initial state of charge, as a fraction of the storage capacity.
pub const DEFAULT_INITIAL_FILL: f64 = 0.5;

/// Technology of a plant, used for reporting and for the renewable share.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Technology {
    Conventional,
    Pv,
    Wind,
    PumpedHydro,
    SolarThermal,
}

impl Technology {
    /// Whether generation of this technology counts toward the renewable share.
    /// Pumped hydro is excluded: its net contribution is zero or negative.
    pub fn counts_as_renewable(self) -> bool {
        matches!(self, Technology::Pv | Technology::Wind | Technology::SolarThermal)
    }

    pub fn as_str(self) -> &'static str {
        match self {
            Technology::Conventional => "conventional",
            Technology::Pv => "pv",
            Technology::Wind => "wind",
            Technology::PumpedHydro => "hydro",
            Technology::SolarThermal => "solar_thermal",
        }
    }

    pub const ALL: [Technology; 5] = [
        Technology::Conventional,
        Technology::Pv,
        Technology::Wind,
        Technology::PumpedHydro,
        Technology::SolarThermal,
    ];
}

impl fmt::Display for Technology {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum RenewableTech {
    Pv,
    Wind,
}

impl From<RenewableTech> for Technology {
    fn from(t: RenewableTech) -> Self {
        match t {
            RenewableTech::Pv => Technology::Pv,
            RenewableTech::Wind => Technology::Wind,
        }
    }
}

/// Already-installed dispatchable plant (coal, gas, ...). No capital cost.
#[derive(Debug, Clone, PartialEq)]
pub struct ConventionalPlant {
    pub name: String,
    /// MW
    pub installed_capacity: f64,
    /// money per MWh generated
    pub opex: f64,
}

/// PV or wind plant bounded by a per-unit availability profile.
#[derive(Debug, Clone, PartialEq)]
pub struct VariableRenewablePlant {
    pub name: String,
    pub technology: RenewableTech,
    pub availability: TimeSeries,
    /// money per MW of new capacity
    pub capex: f64,
    /// money per MWh generated
    pub opex: f64,
    /// Existing capacity; when set the capacity is not a decision variable
    /// and no capital cost is charged.
    pub fixed_capacity: Option<f64>,
}

/// Closed-loop pumped-storage plant with equal pump and turbine rating.
#[derive(Debug, Clone, PartialEq)]
pub struct PumpedStoragePlant {
    pub name: String,
    pub fixed_capacity: Option<f64>,
    /// Reservoir size in hours at rated power.
    pub storage_hours: f64,
    pub eta_pump: f64,
    pub eta_turbine: f64,
    /// Initial reservoir level as a fraction of the reservoir size.
    pub initial_fill: f64,
    pub capex: f64,
    /// money per MWh generated by the turbine
    pub opex: f64,
}

/// Parabolic-trough plant with a thermal storage tank.
#[derive(Debug, Clone, PartialEq)]
pub struct SolarThermalPlant {
    pub name: String,
    pub fixed_capacity: Option<f64>,
    /// Direct irradiance on the collector, kW/m².
    pub irradiance: TimeSeries,
    /// Angle of incidence in degrees. `None` means the incidence factor is
    /// taken as 1 everywhere (requires the scenario's explicit opt-in).
    pub incidence_angle: Option<TimeSeries>,
    /// Collector area per kW of electric rating, m²/kWe.
    pub field_ratio: f64,
    pub eta_optical_peak: f64,
    pub eta_factor: f64,
    pub eta_thermoelectric: f64,
    /// Tank size in hours at rated electric power.
    pub storage_hours: f64,
    pub initial_fill: f64,
    pub capex: f64,
    pub opex: f64,
}

/// Share of a plant's capacity assigned to a network bus (reporting only).
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BusShare {
    pub bus: u32,
    pub weight: f64,
}

pub type BusAllocation = BTreeMap<String, Vec<BusShare>>;

/// Complete description of one sizing problem.
#[derive(Debug, Clone, PartialEq)]
pub struct ScenarioConfig {
    pub name: String,
    pub demand: TimeSeries,
    pub conventional: Vec<ConventionalPlant>,
    pub renewables: Vec<VariableRenewablePlant>,
    pub hydro: Vec<PumpedStoragePlant>,
    pub solar_thermal: Vec<SolarThermalPlant>,
    /// Minimum annual renewable share of demand.
    pub alpha: f64,
    /// Multiplier applied to capital costs (1.0 charges the full CAPEX).
    pub capex_annualization: f64,
    /// Require every storage to end the horizon at least as full as it started.
    pub enforce_cyclic_storage: bool,
    /// Permit solar-thermal plants without incidence-angle data (factor 1).
    pub allow_missing_incidence: bool,
    pub bus_allocation: Option<BusAllocation>,
}

impl ScenarioConfig {
    /// Empty scenario over `demand` with default options.
    pub fn new(name: impl Into<String>, demand: TimeSeries, alpha: f64) -> Self {
        Self {
            name: name.into(),
            demand,
            conventional: Vec::new(),
            renewables: Vec::new(),
            hydro: Vec::new(),
            solar_thermal: Vec::new(),
            alpha,
            capex_annualization: 1.0,
            enforce_cyclic_storage: true,
            allow_missing_incidence: false,
            bus_allocation: None,
        }
    }

    /// Plant names with their technology, in layout order.
    pub fn plants(&self) -> Vec<(&str, Technology)> {
        let mut out = Vec::new();
        out.extend(
            self.conventional
                .iter()
                .map(|p| (p.name.as_str(), Technology::Conventional)),
        );
        out.extend(
            self.renewables
                .iter()
                .map(|p| (p.name.as_str(), Technology::from(p.technology))),
        );
        out.extend(
            self.hydro
                .iter()
                .map(|p| (p.name.as_str(), Technology::PumpedHydro)),
        );
        out.extend(
            self.solar_thermal
                .iter()
                .map(|p| (p.name.as_str(), Technology::SolarThermal)),
        );
        out
    }
}
