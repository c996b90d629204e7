use std::collections::BTreeSet;
use std::ops::Deref;

use thiserror::Error;

use super::ScenarioConfig;
use crate::timeseries::{TimeSeries, Unit};

/// Tolerance on bus weights summing to one.
pub const BUS_WEIGHT_TOL: f64 = 1e-9;

/// Invalid scenario input, located by a JSON-pointer style path.
#[derive(Debug, Clone, PartialEq, Eq, Error)]
#[error("{path}: {reason}")]
pub struct ConfigError {
    pub path: String,
    pub reason: String,
}

impl ConfigError {
    pub fn new(path: impl Into<String>, reason: impl Into<String>) -> Self {
        Self {
            path: path.into(),
            reason: reason.into(),
        }
    }
}

/// A scenario whose invariants have all been checked. The horizon is fixed
/// by the demand series.
#[derive(Debug, Clone, PartialEq)]
pub struct ValidatedScenario {
    config: ScenarioConfig,
}

impl ValidatedScenario {
    pub fn config(&self) -> &ScenarioConfig {
        &self.config
    }

    pub fn into_config(self) -> ScenarioConfig {
        self.config
    }

    /// Number of time steps T.
    pub fn horizon(&self) -> usize {
        self.config.demand.len()
    }

    /// Length of one step in hours.
    pub fn step_hours(&self) -> f64 {
        self.config.demand.step_hours()
    }

    /// Same scenario with a different renewable-share target.
    pub fn with_alpha(&self, alpha: f64) -> Result<Self, ConfigError> {
        let mut cfg = self.config.clone();
        cfg.alpha = alpha;
        validate_scenario(cfg)
    }
}

impl Deref for ValidatedScenario {
    type Target = ScenarioConfig;

    fn deref(&self) -> &ScenarioConfig {
        &self.config
    }
}

fn non_negative(path: String, value: f64) -> Result<(), ConfigError> {
    if !value.is_finite() || value < 0.0 {
        return Err(ConfigError::new(path, format!("must be finite and >= 0, got {value}")));
    }
    Ok(())
}

fn efficiency(path: String, value: f64) -> Result<(), ConfigError> {
    if !(value > 0.0 && value <= 1.0) {
        return Err(ConfigError::new(path, format!("efficiency must be in (0, 1], got {value}")));
    }
    Ok(())
}

fn fraction(path: String, value: f64) -> Result<(), ConfigError> {
    if !(0.0..=1.0).contains(&value) {
        return Err(ConfigError::new(path, format!("must be in [0, 1], got {value}")));
    }
    Ok(())
}

fn aligned(
    path: String,
    series: &TimeSeries,
    unit: Unit,
    demand: &TimeSeries,
) -> Result<(), ConfigError> {
    if series.unit() != unit {
        return Err(ConfigError::new(
            path,
            format!("expected unit {unit}, got {}", series.unit()),
        ));
    }
    if series.len() != demand.len() {
        return Err(ConfigError::new(
            path,
            format!(
                "length mismatch: {} steps vs {} demand steps",
                series.len(),
                demand.len()
            ),
        ));
    }
    if series.start() != demand.start() || series.step() != demand.step() {
        return Err(ConfigError::new(path, "start/step mismatch with demand"));
    }
    Ok(())
}

/// Checks every scenario invariant and fixes the horizon.
pub fn validate_scenario(cfg: ScenarioConfig) -> Result<ValidatedScenario, ConfigError> {
    if !(0.0..=1.0).contains(&cfg.alpha) {
        return Err(ConfigError::new(
            "/alpha",
            format!("alpha out of range: {}", cfg.alpha),
        ));
    }
    non_negative("/options/capex_annualization".into(), cfg.capex_annualization)?;

    let demand = &cfg.demand;
    if demand.unit() != Unit::Mw {
        return Err(ConfigError::new("/demand_csv", "demand must be in MW"));
    }
    if let Some(t) = demand.values().iter().position(|&d| d < 0.0) {
        return Err(ConfigError::new(
            "/demand_csv",
            format!("negative demand at step {t}"),
        ));
    }

    for (i, p) in cfg.conventional.iter().enumerate() {
        let at = |f: &str| format!("/conventional/{i}/{f}");
        non_negative(at("capacity_mw"), p.installed_capacity)?;
        non_negative(at("opex_per_mwh"), p.opex)?;
    }

    for (j, p) in cfg.renewables.iter().enumerate() {
        let at = |f: &str| format!("/renewables/{j}/{f}");
        non_negative(at("capex_per_mw"), p.capex)?;
        non_negative(at("opex_per_mwh"), p.opex)?;
        if let Some(g) = p.fixed_capacity {
            non_negative(at("fixed_capacity_mw"), g)?;
        }
        aligned(at("availability_csv"), &p.availability, Unit::PerUnit, demand)?;
    }

    for (k, p) in cfg.hydro.iter().enumerate() {
        let at = |f: &str| format!("/hydro/{k}/{f}");
        if let Some(g) = p.fixed_capacity {
            non_negative(at("fixed_capacity_mw"), g)?;
        }
        if !(p.storage_hours > 0.0 && p.storage_hours.is_finite()) {
            return Err(ConfigError::new(at("storage_hours"), "must be > 0"));
        }
        efficiency(at("eta_pump"), p.eta_pump)?;
        efficiency(at("eta_turbine"), p.eta_turbine)?;
        fraction(at("initial_fill"), p.initial_fill)?;
        non_negative(at("capex_per_mw"), p.capex)?;
        non_negative(at("opex_per_mwh"), p.opex)?;
    }

    for (l, p) in cfg.solar_thermal.iter().enumerate() {
        let at = |f: &str| format!("/solar_thermal/{l}/{f}");
        if let Some(g) = p.fixed_capacity {
            non_negative(at("fixed_capacity_mw"), g)?;
        }
        if !(p.field_ratio > 0.0 && p.field_ratio.is_finite()) {
            return Err(ConfigError::new(at("field_ratio_m2_per_kwe"), "must be > 0"));
        }
        efficiency(at("eta_optical_peak"), p.eta_optical_peak)?;
        efficiency(at("eta_factor"), p.eta_factor)?;
        efficiency(at("eta_thermoelectric"), p.eta_thermoelectric)?;
        non_negative(at("storage_hours"), p.storage_hours)?;
        fraction(at("initial_fill"), p.initial_fill)?;
        non_negative(at("capex_per_mw"), p.capex)?;
        non_negative(at("opex_per_mwh"), p.opex)?;
        aligned(at("irradiance_csv"), &p.irradiance, Unit::KwPerM2, demand)?;
        if let Some(k) = p.irradiance.values().iter().position(|&v| v < 0.0) {
            return Err(ConfigError::new(
                at("irradiance_csv"),
                format!("negative irradiance at step {k}"),
            ));
        }
        match &p.incidence_angle {
            Some(theta) => {
                aligned(at("incidence_angle_csv"), theta, Unit::Degrees, demand)?;
                let grazing = theta
                    .values()
                    .iter()
                    .zip(p.irradiance.values())
                    .position(|(&a, &i)| a >= 90.0 && i > 0.0);
                if let Some(k) = grazing {
                    return Err(ConfigError::new(
                        at("incidence_angle_csv"),
                        format!("angle of 90 degrees with positive irradiance at step {k}"),
                    ));
                }
            }
            None if cfg.allow_missing_incidence => {}
            None => {
                return Err(ConfigError::new(
                    at("incidence_angle_csv"),
                    "missing incidence angles (set options.allow_missing_incidence to assume factor 1)",
                ))
            }
        }
    }

    let mut names = BTreeSet::new();
    for (name, _) in cfg.plants() {
        if !names.insert(name) {
            return Err(ConfigError::new(
                "/",
                format!("duplicate plant name {name:?}"),
            ));
        }
    }

    if let Some(alloc) = &cfg.bus_allocation {
        for (plant, shares) in alloc {
            let path = format!("/bus_allocation/{plant}");
            if !names.contains(plant.as_str()) {
                return Err(ConfigError::new(path, "unknown plant"));
            }
            if shares.is_empty() {
                return Err(ConfigError::new(path, "no buses listed"));
            }
            for s in shares {
                non_negative(path.clone(), s.weight)?;
            }
            let total: f64 = shares.iter().map(|s| s.weight).sum();
            if (total - 1.0).abs() > BUS_WEIGHT_TOL {
                return Err(ConfigError::new(
                    path,
                    format!("bus weights sum to {total}, expected 1"),
                ));
            }
        }
    }

    Ok(ValidatedScenario { config: cfg })
}
