//! Scenario JSON: reader with JSON-pointer error paths, and a deterministic
//! writer that stores every series as a sibling CSV file.

use std::fs;
use std::num::NonZeroUsize;
use std::path::{Path, PathBuf};

use serde::Serialize;
use serde_json::{Map, Value};

use super::series::{read_timeseries_csv, resample, save_timeseries_csv, ResampleMode};
use super::IoError;
use crate::scenario::{
    BusAllocation, ConfigError, ConventionalPlant, PumpedStoragePlant, RenewableTech,
    ScenarioConfig, SolarThermalPlant, VariableRenewablePlant, DEFAULT_INITIAL_FILL,
};
use crate::timeseries::{SeriesError, TimeSeries, Unit};

const TOP_KEYS: &[&str] = &[
    "name",
    "alpha",
    "demand_csv",
    "conventional",
    "renewables",
    "hydro",
    "solar_thermal",
    "options",
    "bus_allocation",
];
const CONVENTIONAL_KEYS: &[&str] = &["name", "capacity_mw", "opex_per_mwh"];
const RENEWABLE_KEYS: &[&str] = &[
    "name",
    "technology",
    "availability_csv",
    "capex_per_mw",
    "opex_per_mwh",
    "fixed_capacity_mw",
];
const HYDRO_KEYS: &[&str] = &[
    "name",
    "fixed_capacity_mw",
    "storage_hours",
    "eta_pump",
    "eta_turbine",
    "initial_fill",
    "capex_per_mw",
    "opex_per_mwh",
];
const SOLAR_KEYS: &[&str] = &[
    "name",
    "irradiance_csv",
    "incidence_angle_csv",
    "field_ratio_m2_per_kwe",
    "eta_optical_peak",
    "eta_factor",
    "eta_thermoelectric",
    "storage_hours",
    "initial_fill",
    "fixed_capacity_mw",
    "capex_per_mw",
    "opex_per_mwh",
];
const OPTION_KEYS: &[&str] = &[
    "capex_annualization",
    "enforce_cyclic_storage",
    "allow_missing_incidence",
];

/// A JSON object together with its pointer, for located errors.
struct Obj<'a> {
    ptr: String,
    map: &'a Map<String, Value>,
}

impl<'a> Obj<'a> {
    fn new(value: &'a Value, ptr: String, allowed: &[&str]) -> Result<Self, ConfigError> {
        let map = value
            .as_object()
            .ok_or_else(|| ConfigError::new(ptr.clone(), "expected an object"))?;
        if let Some(k) = map.keys().find(|k| !allowed.contains(&k.as_str())) {
            return Err(ConfigError::new(format!("{ptr}/{k}"), "unknown field"));
        }
        Ok(Self { ptr, map })
    }

    fn at(&self, key: &str) -> String {
        format!("{}/{key}", self.ptr)
    }

    fn get(&self, key: &str) -> Option<&'a Value> {
        self.map.get(key).filter(|v| !v.is_null())
    }

    fn req(&self, key: &str) -> Result<&'a Value, ConfigError> {
        self.get(key).ok_or_else(|| ConfigError::new(self.at(key), "missing"))
    }

    fn f64_of(&self, key: &str, v: &Value) -> Result<f64, ConfigError> {
        v.as_f64()
            .ok_or_else(|| ConfigError::new(self.at(key), "expected a number"))
    }

    fn num(&self, key: &str) -> Result<f64, ConfigError> {
        self.f64_of(key, self.req(key)?)
    }

    fn opt_num(&self, key: &str) -> Result<Option<f64>, ConfigError> {
        self.get(key).map(|v| self.f64_of(key, v)).transpose()
    }

    fn opt_bool(&self, key: &str) -> Result<Option<bool>, ConfigError> {
        self.get(key)
            .map(|v| {
                v.as_bool()
                    .ok_or_else(|| ConfigError::new(self.at(key), "expected true or false"))
            })
            .transpose()
    }

    fn str_of(&self, key: &str, v: &'a Value) -> Result<&'a str, ConfigError> {
        v.as_str()
            .ok_or_else(|| ConfigError::new(self.at(key), "expected a string"))
    }

    fn string(&self, key: &str) -> Result<&'a str, ConfigError> {
        self.str_of(key, self.req(key)?)
    }

    fn opt_string(&self, key: &str) -> Result<Option<&'a str>, ConfigError> {
        self.get(key).map(|v| self.str_of(key, v)).transpose()
    }

    /// Elements of an optional array, each with its pointer.
    fn array(&self, key: &str) -> Result<Vec<(String, &'a Value)>, ConfigError> {
        match self.get(key) {
            None => Ok(Vec::new()),
            Some(Value::Array(items)) => Ok(items
                .iter()
                .enumerate()
                .map(|(i, v)| (format!("{}/{i}", self.at(key)), v))
                .collect()),
            Some(_) => Err(ConfigError::new(self.at(key), "expected an array")),
        }
    }

    fn series(&self, key: &str, dir: &Path, unit: Unit) -> Result<TimeSeries, ConfigError> {
        let rel = self.string(key)?;
        load_series(dir, rel, unit, self.at(key))
    }

    fn opt_series(&self, key: &str, dir: &Path, unit: Unit) -> Result<Option<TimeSeries>, ConfigError> {
        self.opt_string(key)?
            .map(|rel| load_series(dir, rel, unit, self.at(key)))
            .transpose()
    }
}

fn load_series(dir: &Path, rel: &str, unit: Unit, ptr: String) -> Result<TimeSeries, ConfigError> {
    read_timeseries_csv(&dir.join(rel), unit).map_err(|e| ConfigError::new(ptr, e.to_string()))
}

/// Reads a scenario file. Series paths are resolved against the directory of
/// `path`. Defaults: `initial_fill` 0.5, `capex_annualization` 1,
/// `enforce_cyclic_storage` true, `allow_missing_incidence` false. The
/// result is not validated; see [`crate::validate_scenario`].
pub fn read_scenario(path: &Path) -> Result<ScenarioConfig, ConfigError> {
    let text = fs::read_to_string(path)
        .map_err(|e| ConfigError::new("", format!("{}: {e}", path.display())))?;
    let doc: Value = serde_json::from_str(&text)
        .map_err(|e| ConfigError::new("", format!("{}: invalid JSON: {e}", path.display())))?;
    let dir = path.parent().unwrap_or(Path::new("."));
    parse_scenario(&doc, dir)
}

fn parse_scenario(doc: &Value, dir: &Path) -> Result<ScenarioConfig, ConfigError> {
    let top = Obj::new(doc, String::new(), TOP_KEYS)?;
    let name = top.string("name")?;
    let alpha = top.num("alpha")?;
    let demand = top.series("demand_csv", dir, Unit::Mw)?;
    let mut cfg = ScenarioConfig::new(name, demand, alpha);

    for (ptr, v) in top.array("conventional")? {
        let o = Obj::new(v, ptr, CONVENTIONAL_KEYS)?;
        cfg.conventional.push(ConventionalPlant {
            name: o.string("name")?.into(),
            installed_capacity: o.num("capacity_mw")?,
            opex: o.num("opex_per_mwh")?,
        });
    }

    for (ptr, v) in top.array("renewables")? {
        let o = Obj::new(v, ptr, RENEWABLE_KEYS)?;
        let technology = match o.string("technology")? {
            "pv" => RenewableTech::Pv,
            "wind" => RenewableTech::Wind,
            other => {
                return Err(ConfigError::new(
                    o.at("technology"),
                    format!("expected \"pv\" or \"wind\", got {other:?}"),
                ))
            }
        };
        cfg.renewables.push(VariableRenewablePlant {
            name: o.string("name")?.into(),
            technology,
            availability: o.series("availability_csv", dir, Unit::PerUnit)?,
            capex: o.num("capex_per_mw")?,
            opex: o.num("opex_per_mwh")?,
            fixed_capacity: o.opt_num("fixed_capacity_mw")?,
        });
    }

    for (ptr, v) in top.array("hydro")? {
        let o = Obj::new(v, ptr, HYDRO_KEYS)?;
        let fixed_capacity = o.opt_num("fixed_capacity_mw")?;
        let capex = match (o.opt_num("capex_per_mw")?, fixed_capacity) {
            (Some(c), _) => c,
            (None, Some(_)) => 0.0,
            (None, None) => {
                return Err(ConfigError::new(
                    o.at("capex_per_mw"),
                    "missing (required when fixed_capacity_mw is absent)",
                ))
            }
        };
        cfg.hydro.push(PumpedStoragePlant {
            name: o.string("name")?.into(),
            fixed_capacity,
            storage_hours: o.num("storage_hours")?,
            eta_pump: o.num("eta_pump")?,
            eta_turbine: o.num("eta_turbine")?,
            initial_fill: o.opt_num("initial_fill")?.unwrap_or(DEFAULT_INITIAL_FILL),
            capex,
            opex: o.num("opex_per_mwh")?,
        });
    }

    for (ptr, v) in top.array("solar_thermal")? {
        let o = Obj::new(v, ptr, SOLAR_KEYS)?;
        cfg.solar_thermal.push(SolarThermalPlant {
            name: o.string("name")?.into(),
            fixed_capacity: o.opt_num("fixed_capacity_mw")?,
            irradiance: o.series("irradiance_csv", dir, Unit::KwPerM2)?,
            incidence_angle: o.opt_series("incidence_angle_csv", dir, Unit::Degrees)?,
            field_ratio: o.num("field_ratio_m2_per_kwe")?,
            eta_optical_peak: o.num("eta_optical_peak")?,
            eta_factor: o.num("eta_factor")?,
            eta_thermoelectric: o.num("eta_thermoelectric")?,
            storage_hours: o.num("storage_hours")?,
            initial_fill: o.opt_num("initial_fill")?.unwrap_or(DEFAULT_INITIAL_FILL),
            capex: o.num("capex_per_mw")?,
            opex: o.num("opex_per_mwh")?,
        });
    }

    if let Some(v) = top.get("options") {
        let o = Obj::new(v, top.at("options"), OPTION_KEYS)?;
        if let Some(a) = o.opt_num("capex_annualization")? {
            cfg.capex_annualization = a;
        }
        if let Some(c) = o.opt_bool("enforce_cyclic_storage")? {
            cfg.enforce_cyclic_storage = c;
        }
        if let Some(m) = o.opt_bool("allow_missing_incidence")? {
            cfg.allow_missing_incidence = m;
        }
    }

    if let Some(v) = top.get("bus_allocation") {
        let ptr = top.at("bus_allocation");
        let alloc: BusAllocation = serde_json::from_value(v.clone()).map_err(|e| {
            ConfigError::new(ptr, format!("expected {{plant: [{{bus, weight}}]}}: {e}"))
        })?;
        cfg.bus_allocation = Some(alloc);
    }
    Ok(cfg)
}

#[derive(Serialize)]
struct ScenarioDoc<'a> {
    name: &'a str,
    alpha: f64,
    demand_csv: String,
    conventional: Vec<ConventionalDoc<'a>>,
    renewables: Vec<RenewableDoc<'a>>,
    hydro: Vec<HydroDoc<'a>>,
    solar_thermal: Vec<SolarDoc<'a>>,
    options: OptionsDoc,
    #[serde(skip_serializing_if = "Option::is_none")]
    bus_allocation: Option<&'a BusAllocation>,
}

#[derive(Serialize)]
struct ConventionalDoc<'a> {
    name: &'a str,
    capacity_mw: f64,
    opex_per_mwh: f64,
}

#[derive(Serialize)]
struct RenewableDoc<'a> {
    name: &'a str,
    technology: RenewableTech,
    availability_csv: String,
    capex_per_mw: f64,
    opex_per_mwh: f64,
    #[serde(skip_serializing_if = "Option::is_none")]
    fixed_capacity_mw: Option<f64>,
}

#[derive(Serialize)]
struct HydroDoc<'a> {
    name: &'a str,
    #[serde(skip_serializing_if = "Option::is_none")]
    fixed_capacity_mw: Option<f64>,
    storage_hours: f64,
    eta_pump: f64,
    eta_turbine: f64,
    initial_fill: f64,
    capex_per_mw: f64,
    opex_per_mwh: f64,
}

#[derive(Serialize)]
struct SolarDoc<'a> {
    name: &'a str,
    irradiance_csv: String,
    #[serde(skip_serializing_if = "Option::is_none")]
    incidence_angle_csv: Option<String>,
    field_ratio_m2_per_kwe: f64,
    eta_optical_peak: f64,
    eta_factor: f64,
    eta_thermoelectric: f64,
    storage_hours: f64,
    initial_fill: f64,
    #[serde(skip_serializing_if = "Option::is_none")]
    fixed_capacity_mw: Option<f64>,
    capex_per_mw: f64,
    opex_per_mwh: f64,
}

#[derive(Serialize)]
struct OptionsDoc {
    capex_annualization: f64,
    enforce_cyclic_storage: bool,
    allow_missing_incidence: bool,
}

/// Writes `cfg` to `path` as JSON, with each series stored next to it as
/// `<stem>.<key>.csv`. Output depends only on `cfg`, so reading the files
/// back and writing again reproduces them byte for byte.
pub fn write_scenario(cfg: &ScenarioConfig, path: &Path) -> Result<(), IoError> {
    let dir = path.parent().unwrap_or(Path::new("."));
    let stem = path
        .file_stem()
        .map(|s| s.to_string_lossy().into_owned())
        .unwrap_or_else(|| "scenario".into());
    let mut pending: Vec<(PathBuf, &TimeSeries)> = Vec::new();
    let mut series = |key: String, ts| -> String {
        let file = format!("{stem}.{key}.csv");
        pending.push((dir.join(&file), ts));
        file
    };

    let doc = ScenarioDoc {
        name: &cfg.name,
        alpha: cfg.alpha,
        demand_csv: series("demand".into(), &cfg.demand),
        conventional: cfg
            .conventional
            .iter()
            .map(|p| ConventionalDoc {
                name: &p.name,
                capacity_mw: p.installed_capacity,
                opex_per_mwh: p.opex,
            })
            .collect(),
        renewables: cfg
            .renewables
            .iter()
            .enumerate()
            .map(|(j, p)| RenewableDoc {
                name: &p.name,
                technology: p.technology,
                availability_csv: series(format!("renewables{j}.availability"), &p.availability),
                capex_per_mw: p.capex,
                opex_per_mwh: p.opex,
                fixed_capacity_mw: p.fixed_capacity,
            })
            .collect(),
        hydro: cfg
            .hydro
            .iter()
            .map(|p| HydroDoc {
                name: &p.name,
                fixed_capacity_mw: p.fixed_capacity,
                storage_hours: p.storage_hours,
                eta_pump: p.eta_pump,
                eta_turbine: p.eta_turbine,
                initial_fill: p.initial_fill,
                capex_per_mw: p.capex,
                opex_per_mwh: p.opex,
            })
            .collect(),
        solar_thermal: cfg
            .solar_thermal
            .iter()
            .enumerate()
            .map(|(l, p)| SolarDoc {
                name: &p.name,
                irradiance_csv: series(format!("solar_thermal{l}.irradiance"), &p.irradiance),
                incidence_angle_csv: p
                    .incidence_angle
                    .as_ref()
                    .map(|a| series(format!("solar_thermal{l}.incidence_angle"), a)),
                field_ratio_m2_per_kwe: p.field_ratio,
                eta_optical_peak: p.eta_optical_peak,
                eta_factor: p.eta_factor,
                eta_thermoelectric: p.eta_thermoelectric,
                storage_hours: p.storage_hours,
                initial_fill: p.initial_fill,
                fixed_capacity_mw: p.fixed_capacity,
                capex_per_mw: p.capex,
                opex_per_mwh: p.opex,
            })
            .collect(),
        options: OptionsDoc {
            capex_annualization: cfg.capex_annualization,
            enforce_cyclic_storage: cfg.enforce_cyclic_storage,
            allow_missing_incidence: cfg.allow_missing_incidence,
        },
        bus_allocation: cfg.bus_allocation.as_ref(),
    };
    let mut text = serde_json::to_string_pretty(&doc).expect("scenario serializes");
    text.push('\n');
    for (p, ts) in pending {
        save_timeseries_csv(ts, &p)?;
    }
    fs::write(path, text).map_err(|e| IoError::io(path, e))
}

/// Mean-resamples every series of `cfg` by `factor` (see [`resample`]).
pub fn resample_scenario(
    cfg: &ScenarioConfig,
    factor: NonZeroUsize,
) -> Result<ScenarioConfig, SeriesError> {
    let r = |ts: &TimeSeries| resample(ts, factor, ResampleMode::Mean);
    let mut out = cfg.clone();
    out.demand = r(&cfg.demand)?;
    for p in &mut out.renewables {
        p.availability = r(&p.availability)?;
    }
    for p in &mut out.solar_thermal {
        p.irradiance = r(&p.irradiance)?;
        p.incidence_angle = p.incidence_angle.as_ref().map(r).transpose()?;
    }
    Ok(out)
}
