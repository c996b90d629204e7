//! Small synthetic scenarios.

use chrono::{DateTime, TimeZone, Utc};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use ressize_core::scenario::{
    ConventionalPlant, PumpedStoragePlant, RenewableTech, ScenarioConfig, SolarThermalPlant,
    VariableRenewablePlant,
};
use ressize_core::{validate_scenario, TimeSeries, Unit, ValidatedScenario};

pub fn t0() -> DateTime<Utc> {
    Utc.with_ymd_and_hms(2019, 1, 1, 0, 0, 0).unwrap()
}

pub fn hourly(values: Vec<f64>, unit: Unit) -> TimeSeries {
    TimeSeries::hourly(t0(), values, unit).unwrap()
}

pub fn coal(capacity: f64, opex: f64) -> ConventionalPlant {
    ConventionalPlant {
        name: "coal".into(),
        installed_capacity: capacity,
        opex,
    }
}

pub fn renewable(
    name: &str,
    tech: RenewableTech,
    availability: Vec<f64>,
    capex: f64,
    opex: f64,
) -> VariableRenewablePlant {
    VariableRenewablePlant {
        name: name.into(),
        technology: tech,
        availability: hourly(availability, Unit::PerUnit),
        capex,
        opex,
        fixed_capacity: None,
    }
}

pub fn hydro(name: &str, fixed: Option<f64>, hours: f64) -> PumpedStoragePlant {
    PumpedStoragePlant {
        name: name.into(),
        fixed_capacity: fixed,
        storage_hours: hours,
        eta_pump: 0.9,
        eta_turbine: 0.85,
        initial_fill: 0.5,
        capex: 5_316_000.0,
        opex: 1.0,
    }
}

pub fn solar_thermal(name: &str, irradiance: Vec<f64>, angles: Vec<f64>) -> SolarThermalPlant {
    SolarThermalPlant {
        name: name.into(),
        fixed_capacity: None,
        irradiance: hourly(irradiance, Unit::KwPerM2),
        incidence_angle: Some(hourly(angles, Unit::Degrees)),
        field_ratio: 5.0,
        eta_optical_peak: 0.75,
        eta_factor: 0.9,
        eta_thermoelectric: 0.38,
        storage_hours: 7.5,
        initial_fill: 0.5,
        capex: 7_221_000.0,
        opex: 3.0,
    }
}

/// Random scenario with every plant type. Conventional capacity covers peak
/// demand plus full pumping, so every α ≤ `alpha_cap` stays feasible when
/// the renewable resource is positive somewhere.
pub fn random_scenario(seed: u64, t: usize, alpha: f64) -> ValidatedScenario {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let demand: Vec<f64> = (0..t).map(|_| rng.gen_range(50.0..150.0)).collect();
    let pv: Vec<f64> = (0..t).map(|_| rng.gen_range(0.0..1.0)).collect();
    let wind: Vec<f64> = (0..t).map(|_| rng.gen_range(0.05..1.0)).collect();
    let irr: Vec<f64> = (0..t)
        .map(|_| if rng.gen_bool(0.6) { rng.gen_range(0.1..1.0) } else { 0.0 })
        .collect();
    let ang: Vec<f64> = (0..t).map(|_| rng.gen_range(0.0..70.0)).collect();
    let mut cfg = ScenarioConfig::new("random", hourly(demand, Unit::Mw), alpha);
    cfg.conventional.push(coal(400.0, rng.gen_range(20.0..80.0)));
    cfg.renewables.push(renewable("pv", RenewableTech::Pv, pv, rng.gen_range(1e3..1e4), 0.5));
    cfg.renewables.push(renewable("wind", RenewableTech::Wind, wind, rng.gen_range(1e3..1e4), 1.0));
    let mut h = hydro("ps", Some(rng.gen_range(10.0..60.0)), rng.gen_range(1.0..6.0));
    h.initial_fill = rng.gen_range(0.0..1.0);
    cfg.hydro.push(h);
    let mut st = solar_thermal("st", irr, ang);
    st.capex = rng.gen_range(1e3..2e4);
    cfg.solar_thermal.push(st);
    cfg.capex_annualization = rng.gen_range(0.05..1.0);
    cfg.enforce_cyclic_storage = rng.gen_bool(0.7);
    validate_scenario(cfg).unwrap()
}
