//! Regenerates the synthetic scenarios under `data/`.
//!
//! Everything is derived from fixed seeds, so rerunning reproduces the
//! committed files byte for byte:
//!
//! ```text
//! cargo run -p ressize-core --example generate_data
//! ```

use std::f64::consts::PI;
use std::fs;
use std::path::{Path, PathBuf};

use chrono::{DateTime, Datelike, TimeDelta, TimeZone, Timelike, Utc};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use ressize_core::io::save_timeseries_csv;
use ressize_core::{TimeSeries, Unit};
use serde_json::json;

const HOURS: usize = 8760;

/// Zero-mean, unit-variance innovation for the AR processes below.
fn shock(rng: &mut ChaCha8Rng) -> f64 {
    rng.gen_range(-3f64.sqrt()..3f64.sqrt())
}

struct Site {
    lat: f64,
    lon: f64,
    /// Mean wind speed at hub height, m/s.
    wind_mean: f64,
    /// Probability that a day is overcast.
    overcast: f64,
}

fn start() -> DateTime<Utc> {
    Utc.with_ymd_and_hms(2019, 1, 1, 0, 0, 0).unwrap()
}

/// Cosine of the solar zenith angle and the cosine of the incidence angle on
/// a north-south trough tracking east-west.
fn sun(site: &Site, t: DateTime<Utc>) -> (f64, f64) {
    let day = t.ordinal() as f64;
    let decl = (23.45 * (2.0 * PI * (284.0 + day) / 365.0).sin()).to_radians();
    let solar_hour = t.hour() as f64 + 0.5 + site.lon / 15.0;
    let omega = (15.0 * (solar_hour - 12.0)).to_radians();
    let phi = site.lat.to_radians();
    let cos_z = phi.sin() * decl.sin() + phi.cos() * decl.cos() * omega.cos();
    let cos_theta = (cos_z * cos_z + (decl.cos() * omega.sin()).powi(2)).sqrt();
    (cos_z, cos_theta.min(1.0))
}

/// Clear-sky beam irradiance in kW/m² for a zenith cosine.
fn clear_beam(cos_z: f64) -> f64 {
    if cos_z <= 0.02 {
        return 0.0;
    }
    let air_mass = 1.0 / cos_z;
    1.353 * 0.7f64.powf(air_mass.powf(0.678))
}

/// Daily sky clearness, persistent from one day to the next.
fn clearness(site: &Site, rng: &mut ChaCha8Rng) -> Vec<f64> {
    let mut state: f64 = 0.0;
    (0..365)
        .map(|_| {
            state = 0.6 * state + 0.8 * shock(rng);
            let p = 0.5 * (1.0 + (state / 2f64.sqrt()).tanh());
            if p < site.overcast {
                0.25 + 0.3 * p
            } else {
                0.85 + 0.15 * p
            }
        })
        .collect()
}

struct Resource {
    pv: Vec<f64>,
    wind: Vec<f64>,
    dni: Vec<f64>,
    incidence: Vec<f64>,
}

fn resource(site: &Site, seed: u64) -> Resource {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let clear = clearness(site, &mut rng);
    // Rayleigh-distributed speed from two AR(1) components.
    let sigma = site.wind_mean / (PI / 2.0).sqrt();
    let (mut x, mut y) = (0.0f64, 0.0f64);
    let rho: f64 = 0.97;
    let innov = (1.0 - rho * rho).sqrt();
    let mut out = Resource {
        pv: Vec::with_capacity(HOURS),
        wind: Vec::with_capacity(HOURS),
        dni: Vec::with_capacity(HOURS),
        incidence: Vec::with_capacity(HOURS),
    };
    for h in 0..HOURS {
        let t = start() + TimeDelta::hours(h as i64);
        let (cos_z, cos_theta) = sun(site, t);
        let k = clear[(h / 24).min(364)];
        let beam = clear_beam(cos_z) * k;
        let diffuse = 0.1 * cos_z * (1.3 - k);
        let ghi = if beam > 0.0 { beam * cos_z + diffuse } else { 0.0 };
        out.pv.push(round(ghi.min(1.0) * 0.85, 4));
        out.dni.push(round(beam, 4));
        let theta = if beam > 0.0 { cos_theta.acos().to_degrees().min(89.9) } else { 90.0 };
        out.incidence.push(round(theta, 3));

        x = rho * x + innov * shock(&mut rng);
        y = rho * y + innov * shock(&mut rng);
        let season = 1.0 + 0.15 * (2.0 * PI * (t.ordinal() as f64 - 200.0) / 365.0).cos();
        let v = sigma * season * (x * x + y * y).sqrt();
        out.wind.push(round(power_curve(v), 4));
    }
    out
}

/// Generic 2 MW turbine: cut-in 3 m/s, rated 12 m/s, cut-out 25 m/s.
fn power_curve(v: f64) -> f64 {
    if !(3.0..25.0).contains(&v) {
        0.0
    } else if v >= 12.0 {
        1.0
    } else {
        (v.powi(3) - 27.0) / (1728.0 - 27.0)
    }
}

fn round(v: f64, digits: i32) -> f64 {
    let s = 10f64.powi(digits);
    (v * s).round() / s
}

/// Hourly demand with daily, weekly and seasonal shape, scaled to `[lo, hi]`.
fn demand(seed: u64, lo: f64, hi: f64, winter_peak: bool) -> Vec<f64> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut ar = 0.0f64;
    let raw: Vec<f64> = (0..HOURS)
        .map(|h| {
            let t = start() + TimeDelta::hours(h as i64);
            let hr = t.hour() as f64;
            let daily = 0.55 * (-((hr - 20.0) / 3.0).powi(2)).exp()
                + 0.35 * (-((hr - 12.0) / 4.0).powi(2)).exp()
                - 0.35 * (-((hr - 4.0) / 3.0).powi(2)).exp();
            let weekend = if t.weekday().num_days_from_monday() >= 5 { -0.12 } else { 0.0 };
            let phase = if winter_peak { 15.0 } else { 220.0 };
            let season = 0.15 * (2.0 * PI * (t.ordinal() as f64 - phase) / 365.0).cos();
            ar = 0.9 * ar + 0.03 * shock(&mut rng);
            1.0 + daily + weekend + season + ar
        })
        .collect();
    let (mn, mx) = raw.iter().fold((f64::INFINITY, f64::NEG_INFINITY), |a, &v| (a.0.min(v), a.1.max(v)));
    raw.iter().map(|v| round(lo + (v - mn) / (mx - mn) * (hi - lo), 2)).collect()
}

fn save(dir: &Path, name: &str, values: &[f64], unit: Unit) -> String {
    save_from(dir, name, 0, values, unit)
}

/// Saves `values` as hours `offset..` of the year.
fn save_from(dir: &Path, name: &str, offset: usize, values: &[f64], unit: Unit) -> String {
    let t0 = start() + TimeDelta::hours(offset as i64);
    let ts = TimeSeries::hourly(t0, values.to_vec(), unit).unwrap();
    let rel = format!("series/{name}.csv");
    save_timeseries_csv(&ts, &dir.join(&rel)).unwrap();
    rel
}

fn write_json(path: PathBuf, value: serde_json::Value) {
    let mut text = serde_json::to_string_pretty(&value).unwrap();
    text.push('\n');
    fs::write(path, text).unwrap();
}

// CAPEX in $/MW from published cost data; OPEX converted to $/MWh at typical capacity factors.
const PV_CAPEX: f64 = 1_313_000.0;
const WIND_CAPEX: f64 = 1_265_000.0;
const ST_CAPEX: f64 = 7_221_000.0;
const HYDRO_CAPEX: f64 = 5_316_000.0;
const PV_OPEX: f64 = 8.7;
const WIND_OPEX: f64 = 8.6;
const ST_OPEX: f64 = 27.9;
const HYDRO_OPEX: f64 = 17.0;
const COAL_OPEX: f64 = 45.0;

fn main() {
    let dir = Path::new(env!("CARGO_MANIFEST_DIR")).join("../../data");
    fs::create_dir_all(dir.join("series")).unwrap();

    let tenerife = Site { lat: 28.3, lon: -16.5, wind_mean: 7.0, overcast: 0.15 };
    let res = resource(&tenerife, 2019);
    let d = demand(11, 300.0, 550.0, false);
    let demand_csv = save(&dir, "tenerife_demand", &d, Unit::Mw);
    let pv_csv = save(&dir, "tenerife_pv", &res.pv, Unit::PerUnit);
    let wind_csv = save(&dir, "tenerife_wind", &res.wind, Unit::PerUnit);
    let dni_csv = save(&dir, "tenerife_dni", &res.dni, Unit::KwPerM2);
    let inc_csv = save(&dir, "tenerife_incidence", &res.incidence, Unit::Degrees);

    let coal = json!([{"name": "coal", "capacity_mw": 600.0, "opex_per_mwh": COAL_OPEX}]);
    let renewables = |pv: &str, wind: &str| {
        json!([
            {"name": "pv", "technology": "pv", "availability_csv": pv,
             "capex_per_mw": PV_CAPEX, "opex_per_mwh": PV_OPEX},
            {"name": "wind", "technology": "wind", "availability_csv": wind,
             "capex_per_mw": WIND_CAPEX, "opex_per_mwh": WIND_OPEX}
        ])
    };
    write_json(
        dir.join("tenerife_like.json"),
        json!({
            "name": "tenerife_like",
            "alpha": 0.74,
            "demand_csv": demand_csv,
            "conventional": coal,
            "renewables": renewables(&pv_csv, &wind_csv),
            "bus_allocation": {
                "pv": [{"bus": 1, "weight": 0.5}, {"bus": 3, "weight": 0.5}],
                "wind": [{"bus": 2, "weight": 0.6}, {"bus": 5, "weight": 0.4}]
            }
        }),
    );
    write_json(
        dir.join("tenerife_st.json"),
        json!({
            "name": "tenerife_st",
            "alpha": 0.9,
            "demand_csv": demand_csv,
            "conventional": coal,
            "renewables": renewables(&pv_csv, &wind_csv),
            "solar_thermal": [{
                "name": "st", "irradiance_csv": dni_csv, "incidence_angle_csv": inc_csv,
                "field_ratio_m2_per_kwe": 5.0, "eta_optical_peak": 0.75, "eta_factor": 0.9,
                "eta_thermoelectric": 0.38, "storage_hours": 7.5,
                "capex_per_mw": ST_CAPEX, "opex_per_mwh": ST_OPEX
            }],
            "bus_allocation": {
                "st": [{"bus": 4, "weight": 0.5}, {"bus": 6, "weight": 0.5}]
            }
        }),
    );

    // One March week with a forced calm night hour: no resource at all at
    // 02:00 on its first day.
    let (w0, week) = (24 * 66, 168);
    let wk = w0..w0 + week;
    let mut week_wind = res.wind[wk.clone()].to_vec();
    week_wind[2] = 0.0;
    assert_eq!(res.pv[w0 + 2], 0.0);
    write_json(
        dir.join("nostorage.json"),
        json!({
            "name": "nostorage",
            "alpha": 0.5,
            "demand_csv": save_from(&dir, "week_demand", w0, &d[wk.clone()], Unit::Mw),
            "conventional": coal,
            "renewables": renewables(
                &save_from(&dir, "week_pv", w0, &res.pv[wk.clone()], Unit::PerUnit),
                &save_from(&dir, "week_wind", w0, &week_wind, Unit::PerUnit),
            ),
        }),
    );

    let nl = Site { lat: 52.1, lon: 5.2, wind_mean: 8.0, overcast: 0.45 };
    let res = resource(&nl, 2020);
    let d = demand(12, 2600.0, 5000.0, true);
    write_json(
        dir.join("nl_like.json"),
        json!({
            "name": "nl_like",
            "alpha": 0.5,
            "demand_csv": save(&dir, "nl_demand", &d, Unit::Mw),
            "conventional": [{"name": "gas", "capacity_mw": 5500.0, "opex_per_mwh": COAL_OPEX}],
            "renewables": renewables(
                &save(&dir, "nl_pv", &res.pv, Unit::PerUnit),
                &save(&dir, "nl_wind", &res.wind, Unit::PerUnit),
            ),
            "hydro": [{
                "name": "ps", "fixed_capacity_mw": 500.0, "storage_hours": 8.0,
                "eta_pump": 0.9, "eta_turbine": 0.9, "capex_per_mw": HYDRO_CAPEX,
                "opex_per_mwh": HYDRO_OPEX
            }]
        }),
    );
}
