//! Result files: `sizing.json`, `dispatch.csv` and `curtailment.csv`.

use std::fs;
use std::path::{Path, PathBuf};

use chrono::{DateTime, TimeDelta, Utc};
use serde::{Deserialize, Serialize};

use super::series::{format_number, format_timestamp, parse_number, parse_timestamp};
use super::IoError;
use crate::formulation::{PlantCapacity, SizingResult, SolveStats};
use crate::scenario::{CostBreakdown, Dispatch, PlantDispatch};
use crate::solver::LpStatus;
use crate::timeseries::{TimeSeries, Unit};

pub const SIZING_FILE: &str = "sizing.json";
pub const DISPATCH_FILE: &str = "dispatch.csv";
pub const CURTAILMENT_FILE: &str = "curtailment.csv";

/// Contents of `sizing.json`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SizingSummary {
    pub scenario: String,
    pub alpha: f64,
    pub status: LpStatus,
    pub achieved_share: Option<f64>,
    pub cost: Option<CostBreakdown>,
    pub capacities: Vec<PlantCapacity>,
    pub assumed_normal_incidence: Vec<String>,
    pub solver: SolveStats,
}

impl From<&SizingResult> for SizingSummary {
    fn from(r: &SizingResult) -> Self {
        Self {
            scenario: r.scenario.clone(),
            alpha: r.alpha,
            status: r.status,
            achieved_share: r.achieved_share,
            cost: r.cost,
            capacities: r.capacities.clone(),
            assumed_normal_incidence: r.assumed_normal_incidence.clone(),
            solver: r.stats.clone(),
        }
    }
}

fn csv_err(path: &Path, e: csv::Error) -> IoError {
    let line = e.position().map(|p| p.line() as usize).unwrap_or(0);
    match e.into_kind() {
        csv::ErrorKind::Io(source) => IoError::io(path, source),
        kind => IoError::parse(line, format!("{kind:?}")).in_file(path),
    }
}

fn write_table(
    path: &Path,
    header: &[String],
    timestamps: &[DateTime<Utc>],
    columns: &[&[f64]],
) -> Result<(), IoError> {
    let mut w = csv::Writer::from_path(path).map_err(|e| csv_err(path, e))?;
    w.write_record(header).map_err(|e| csv_err(path, e))?;
    let mut row = Vec::with_capacity(header.len());
    for (t, ts) in timestamps.iter().enumerate() {
        row.clear();
        row.push(format_timestamp(*ts));
        row.extend(columns.iter().map(|c| format_number(c[t])));
        w.write_record(&row).map_err(|e| csv_err(path, e))?;
    }
    w.flush().map_err(|e| IoError::io(path, e))
}

/// Writes the result files into `dir` (created if needed) and returns their
/// paths. Non-optimal results produce only `sizing.json`; stale dispatch and
/// curtailment files from an earlier run are removed.
pub fn write_results(result: &SizingResult, dir: &Path) -> Result<Vec<PathBuf>, IoError> {
    fs::create_dir_all(dir).map_err(|e| IoError::io(dir, e))?;
    let sizing = dir.join(SIZING_FILE);
    let mut text = serde_json::to_string_pretty(&SizingSummary::from(result))
        .expect("summary serializes");
    text.push('\n');
    fs::write(&sizing, text).map_err(|e| IoError::io(&sizing, e))?;
    let mut written = vec![sizing];

    let dispatch_path = dir.join(DISPATCH_FILE);
    let curtail_path = dir.join(CURTAILMENT_FILE);
    let Some(dispatch) = &result.dispatch else {
        for p in [&dispatch_path, &curtail_path] {
            if p.exists() {
                fs::remove_file(p).map_err(|e| IoError::io(p, e))?;
            }
        }
        return Ok(written);
    };

    let timestamps: Vec<DateTime<Utc>> = dispatch
        .plants()
        .first()
        .map(|p| p.generation.timestamps().collect())
        .unwrap_or_default();
    let mut header = vec!["timestamp".to_string()];
    let mut columns: Vec<&[f64]> = Vec::new();
    for p in dispatch.plants() {
        header.push(p.name.clone());
        columns.push(p.generation.values());
        for (suffix, s) in [
            ("pump", &p.pumping),
            ("absorption", &p.absorption),
            ("soc", &p.storage),
        ] {
            if let Some(s) = s {
                header.push(format!("{}.{suffix}", p.name));
                columns.push(s.values());
            }
        }
    }
    write_table(&dispatch_path, &header, &timestamps, &columns)?;
    written.push(dispatch_path);

    let mut header = vec!["timestamp".to_string()];
    header.extend(result.curtailment.iter().map(|(n, _)| n.clone()));
    let columns: Vec<&[f64]> = result.curtailment.iter().map(|(_, s)| s.values()).collect();
    let timestamps = if columns.is_empty() { Vec::new() } else { timestamps };
    write_table(&curtail_path, &header, &timestamps, &columns)?;
    written.push(curtail_path);
    Ok(written)
}

/// Reads `sizing.json`.
pub fn read_sizing_json(path: &Path) -> Result<SizingSummary, IoError> {
    let text = fs::read_to_string(path).map_err(|e| IoError::io(path, e))?;
    serde_json::from_str(&text).map_err(|e| IoError::parse(e.line(), e.to_string()).in_file(path))
}

/// Reads `dispatch.csv` back into a [`Dispatch`]. `plants` supplies names,
/// technologies and capacities (as stored in `sizing.json`); every column
/// must belong to one of them.
pub fn read_dispatch_csv(path: &Path, plants: &[PlantCapacity]) -> Result<Dispatch, IoError> {
    let mut r = csv::Reader::from_path(path).map_err(|e| csv_err(path, e))?;
    let header: Vec<String> = r
        .headers()
        .map_err(|e| csv_err(path, e))?
        .iter()
        .map(str::to_string)
        .collect();
    let bad = |line: usize, reason: String| IoError::parse(line, reason).in_file(path);
    if header.first().map(String::as_str) != Some("timestamp") {
        return Err(bad(1, "first column must be `timestamp`".into()));
    }
    let col = |name: &str| header.iter().position(|h| h == name);

    let mut timestamps = Vec::new();
    let mut rows: Vec<Vec<f64>> = Vec::new();
    for rec in r.records() {
        let rec = rec.map_err(|e| csv_err(path, e))?;
        let line = rec.position().map(|p| p.line() as usize).unwrap_or(0);
        if rec.len() != header.len() {
            return Err(bad(line, format!("expected {} fields, got {}", header.len(), rec.len())));
        }
        timestamps.push(parse_timestamp(&rec[0]).map_err(|e| bad(line, e))?);
        let mut v = Vec::with_capacity(rec.len() - 1);
        for f in rec.iter().skip(1) {
            v.push(parse_number(f).map_err(|e| bad(line, e))?);
        }
        rows.push(v);
    }
    let horizon = rows.len();
    let (start, step) = match timestamps.as_slice() {
        [] => (DateTime::<Utc>::UNIX_EPOCH, TimeDelta::hours(1)),
        [t] => (*t, TimeDelta::hours(1)),
        [t0, t1, ..] => (*t0, *t1 - *t0),
    };
    for (k, w) in timestamps.windows(2).enumerate() {
        if w[1] - w[0] != step || step <= TimeDelta::zero() {
            return Err(IoError::gap(k + 3, "non-uniform timestamps").in_file(path));
        }
    }

    let mut used = vec![false; header.len()];
    used[0] = true;
    let mut series = |name: &str, unit: Unit| -> Result<Option<TimeSeries>, IoError> {
        let Some(c) = col(name) else { return Ok(None) };
        used[c] = true;
        if horizon == 0 {
            return Ok(None);
        }
        let values = rows.iter().map(|r| r[c - 1]).collect();
        TimeSeries::new(start, step, values, unit)
            .map(Some)
            .map_err(|e| bad(0, format!("column {name}: {e}")))
    };
    let mut out = Vec::new();
    for p in plants {
        let generation = series(&p.name, Unit::Mw)?;
        let pumping = series(&format!("{}.pump", p.name), Unit::Mw)?;
        let absorption = series(&format!("{}.absorption", p.name), Unit::Mw)?;
        let storage = series(&format!("{}.soc", p.name), Unit::Mwh)?;
        if horizon == 0 {
            continue;
        }
        let generation =
            generation.ok_or_else(|| bad(1, format!("missing column for plant {}", p.name)))?;
        out.push(PlantDispatch {
            name: p.name.clone(),
            technology: p.technology,
            capacity: p.capacity_mw,
            generation,
            pumping,
            absorption,
            storage,
        });
    }
    if let Some(c) = used.iter().position(|u| !u) {
        return Err(bad(1, format!("unexpected column {:?}", header[c])));
    }
    if horizon == 0 && !plants.is_empty() && header.len() > 1 {
        return Err(bad(2, "no data rows".into()));
    }
    Dispatch::new(horizon, out).map_err(|e| bad(0, e.to_string()))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::scenario::Technology;
    use chrono::TimeZone;
    use proptest::prelude::*;

    fn series(values: Vec<f64>, unit: Unit) -> TimeSeries {
        let t0 = Utc.with_ymd_and_hms(2019, 6, 1, 0, 0, 0).unwrap();
        TimeSeries::hourly(t0, values, unit).unwrap()
    }

    fn result(dispatch: Option<Dispatch>) -> SizingResult {
        let capacities = dispatch
            .iter()
            .flat_map(|d| d.plants())
            .map(|p| PlantCapacity {
                name: p.name.clone(),
                technology: p.technology,
                capacity_mw: p.capacity,
                fixed: false,
            })
            .collect();
        let curtailment = dispatch
            .iter()
            .flat_map(|d| d.plants())
            .filter(|p| p.technology == Technology::Wind)
            .map(|p| (p.name.clone(), p.generation.clone()))
            .collect();
        SizingResult {
            scenario: "t".into(),
            alpha: 0.5,
            status: if dispatch.is_some() { LpStatus::Optimal } else { LpStatus::Infeasible },
            capacities,
            dispatch,
            curtailment,
            cost: None,
            achieved_share: None,
            stats: SolveStats::default(),
            assumed_normal_incidence: Vec::new(),
        }
    }

    fn mixed(values: &[f64]) -> Dispatch {
        let n = values.len();
        let s = |f: f64| series(values.iter().map(|v| v * f).collect(), Unit::Mw);
        Dispatch::new(
            n,
            vec![
                PlantDispatch {
                    name: "coal, unit 1".into(),
                    technology: Technology::Conventional,
                    capacity: 600.0,
                    generation: s(1.0),
                    pumping: None,
                    absorption: None,
                    storage: None,
                },
                PlantDispatch {
                    name: "wind".into(),
                    technology: Technology::Wind,
                    capacity: 785.25,
                    generation: s(0.3),
                    pumping: None,
                    absorption: None,
                    storage: None,
                },
                PlantDispatch {
                    name: "ps".into(),
                    technology: Technology::PumpedHydro,
                    capacity: 1.0 / 3.0,
                    generation: s(0.1),
                    pumping: Some(s(0.2)),
                    absorption: None,
                    storage: Some(series(values.iter().map(|v| v * 4.0).collect(), Unit::Mwh)),
                },
                PlantDispatch {
                    name: "st".into(),
                    technology: Technology::SolarThermal,
                    capacity: 50.0,
                    generation: s(0.05),
                    pumping: None,
                    absorption: Some(s(0.07)),
                    storage: Some(series(values.to_vec(), Unit::Mwh)),
                },
            ],
        )
        .unwrap()
    }

    #[test]
    fn infeasible_writes_only_sizing() {
        let dir = tempfile::tempdir().unwrap();
        write_results(&result(Some(mixed(&[1.0, 2.0]))), dir.path()).unwrap();
        let files = write_results(&result(None), dir.path()).unwrap();
        assert_eq!(files.len(), 1);
        assert!(!dir.path().join(DISPATCH_FILE).exists());
        let s = read_sizing_json(&dir.path().join(SIZING_FILE)).unwrap();
        assert_eq!(s.status, LpStatus::Infeasible);
        let raw = fs::read_to_string(dir.path().join(SIZING_FILE)).unwrap();
        assert!(raw.contains("\"status\": \"infeasible\""));
    }

    #[test]
    fn zero_plants_give_header_only() {
        let dir = tempfile::tempdir().unwrap();
        let d = Dispatch::new(3, Vec::new()).unwrap();
        write_results(&result(Some(d)), dir.path()).unwrap();
        let text = fs::read_to_string(dir.path().join(DISPATCH_FILE)).unwrap();
        assert_eq!(text, "timestamp\n");
        let back = read_dispatch_csv(&dir.path().join(DISPATCH_FILE), &[]).unwrap();
        assert!(back.plants().is_empty());
    }

    #[test]
    fn column_names() {
        let dir = tempfile::tempdir().unwrap();
        write_results(&result(Some(mixed(&[1.0]))), dir.path()).unwrap();
        let text = fs::read_to_string(dir.path().join(DISPATCH_FILE)).unwrap();
        assert_eq!(
            text.lines().next().unwrap(),
            "timestamp,\"coal, unit 1\",wind,ps,ps.pump,ps.soc,st,st.absorption,st.soc"
        );
        let text = fs::read_to_string(dir.path().join(CURTAILMENT_FILE)).unwrap();
        assert_eq!(text.lines().next().unwrap(), "timestamp,wind");
    }

    #[test]
    fn unexpected_or_malformed_columns_rejected() {
        let dir = tempfile::tempdir().unwrap();
        let r = result(Some(mixed(&[1.0, 2.0])));
        write_results(&r, dir.path()).unwrap();
        let p = dir.path().join(DISPATCH_FILE);
        let plants = &r.capacities[..2];
        assert!(read_dispatch_csv(&p, plants).is_err());
        let text = fs::read_to_string(&p).unwrap();
        fs::write(&p, text.replace("wind,", "wnd,")).unwrap();
        assert!(read_dispatch_csv(&p, &r.capacities).is_err());
        fs::write(&p, text.replacen(",0.3", ",-0.3", 1)).unwrap();
        assert!(read_dispatch_csv(&p, &r.capacities).is_err());
    }

    proptest! {
        #![proptest_config(ProptestConfig::with_cases(64))]
        #[test]
        fn dispatch_round_trip(values in prop::collection::vec(0.0f64..1e4, 1..40)) {
            let dir = tempfile::tempdir().unwrap();
            let r = result(Some(mixed(&values)));
            write_results(&r, dir.path()).unwrap();
            let p = dir.path().join(DISPATCH_FILE);
            let first = fs::read(&p).unwrap();
            let back = read_dispatch_csv(&p, &r.capacities).unwrap();
            let orig = r.dispatch.as_ref().unwrap();
            for (a, b) in orig.plants().iter().zip(back.plants()) {
                prop_assert_eq!(&a.name, &b.name);
                for (x, y) in a.series().zip(b.series()) {
                    prop_assert_eq!(x.len(), y.len());
                    for (u, v) in x.values().iter().zip(y.values()) {
                        prop_assert!((u - v).abs() <= 1e-9 * u.abs().max(1.0));
                    }
                }
            }
            let mut again = r.clone();
            again.dispatch = Some(back);
            write_results(&again, dir.path()).unwrap();
            prop_assert_eq!(fs::read(&p).unwrap(), first);
        }
    }
}
