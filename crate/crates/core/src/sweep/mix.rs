use std::path::Path;

use chrono::{DateTime, Datelike, Months, NaiveDate, TimeDelta, Timelike, Utc};
use serde::Serialize;

use crate::io::{format_number, format_timestamp, IoError};
use crate::scenario::{Dispatch, Technology};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum Granularity {
    Hourly,
    Daily,
    /// Calendar months.
    Monthly,
}

impl std::str::FromStr for Granularity {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, String> {
        match s {
            "hourly" => Ok(Granularity::Hourly),
            "daily" => Ok(Granularity::Daily),
            "monthly" => Ok(Granularity::Monthly),
            _ => Err(format!("unknown granularity {s:?} (hourly, daily, monthly)")),
        }
    }
}

impl Granularity {
    fn period(self, t: DateTime<Utc>) -> (DateTime<Utc>, DateTime<Utc>, String) {
        let day = |d: NaiveDate| d.and_hms_opt(0, 0, 0).unwrap().and_utc();
        match self {
            Granularity::Hourly => {
                let s = t.with_minute(0).unwrap().with_second(0).unwrap().with_nanosecond(0).unwrap();
                (s, s + TimeDelta::hours(1), format_timestamp(s))
            }
            Granularity::Daily => {
                let s = day(t.date_naive());
                (s, s + TimeDelta::days(1), s.format("%Y-%m-%d").to_string())
            }
            Granularity::Monthly => {
                let s = day(NaiveDate::from_ymd_opt(t.year(), t.month(), 1).unwrap());
                (s, s + Months::new(1), s.format("%Y-%m").to_string())
            }
        }
    }
}

/// Energy per period of a [`MixTable`].
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct MixRow {
    pub period: String,
    pub start: DateTime<Utc>,
    /// The horizon covers only part of the period.
    pub partial: bool,
    /// MWh, aligned with [`MixTable::columns`].
    pub energy: Vec<f64>,
}

/// Generation mix per period: one column per technology present, then
/// `pumping` (negative) when any plant pumps, then `net`, which equals the
/// demand served.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct MixTable {
    pub granularity: Granularity,
    pub columns: Vec<String>,
    pub rows: Vec<MixRow>,
}

impl MixTable {
    pub fn column(&self, name: &str) -> Option<usize> {
        self.columns.iter().position(|c| c == name)
    }

    /// Sum of a column over all periods.
    pub fn total(&self, name: &str) -> Option<f64> {
        let j = self.column(name)?;
        Some(self.rows.iter().map(|r| r.energy[j]).sum())
    }
}

/// Sums energy (`value · step`) per period and technology. Each sample is
/// assigned to the period containing its start time.
pub fn aggregate_dispatch(d: &Dispatch, granularity: Granularity) -> MixTable {
    let techs: Vec<Technology> = Technology::ALL
        .into_iter()
        .filter(|t| d.plants().iter().any(|p| p.technology == *t))
        .collect();
    let pumps = d.plants().iter().any(|p| p.pumping.is_some());
    let mut columns: Vec<String> = techs.iter().map(|t| t.as_str().to_string()).collect();
    if pumps {
        columns.push("pumping".into());
    }
    columns.push("net".into());
    let mut table = MixTable {
        granularity,
        columns,
        rows: Vec::new(),
    };
    let Some(first) = d.plants().first() else {
        return table;
    };
    let clock = &first.generation;
    let dt = clock.step_hours();
    let ncol = table.columns.len();
    let mut current: Option<(DateTime<Utc>, DateTime<Utc>)> = None;

    for t in 0..d.horizon() {
        let ts = clock.timestamp(t);
        let (start, end, label) = granularity.period(ts);
        if current.map(|c| c.0) != Some(start) {
            table.rows.push(MixRow {
                period: label,
                start,
                partial: ts > start,
                energy: vec![0.0; ncol],
            });
            current = Some((start, end));
        }
        let row = table.rows.last_mut().unwrap();
        let mut net = 0.0;
        for (j, tech) in techs.iter().enumerate() {
            let e: f64 = d
                .plants()
                .iter()
                .filter(|p| p.technology == *tech)
                .map(|p| p.generation.values()[t] * dt)
                .sum();
            row.energy[j] += e;
            net += e;
        }
        if pumps {
            let e: f64 = d
                .plants()
                .iter()
                .filter_map(|p| p.pumping.as_ref())
                .map(|s| s.values()[t] * dt)
                .sum();
            row.energy[techs.len()] -= e;
            net -= e;
        }
        row.energy[ncol - 1] += net;
    }
    if let (Some((_, end)), Some(row)) = (current, table.rows.last_mut()) {
        let horizon_end = clock.timestamp(d.horizon() - 1) + clock.step();
        row.partial |= horizon_end < end;
    }
    table
}

/// Writes `period,partial,<columns>` CSV.
pub fn write_mix_csv(table: &MixTable, path: &Path) -> Result<(), IoError> {
    let io = |e: csv::Error| match e.into_kind() {
        csv::ErrorKind::Io(source) => IoError::io(path, source),
        k => IoError::io(path, std::io::Error::other(format!("{k:?}"))),
    };
    let mut w = csv::Writer::from_path(path).map_err(io)?;
    let mut header = vec!["period".to_string(), "partial".to_string()];
    header.extend(table.columns.iter().cloned());
    w.write_record(&header).map_err(io)?;
    for r in &table.rows {
        let mut rec = vec![r.period.clone(), r.partial.to_string()];
        rec.extend(r.energy.iter().map(|v| format_number(*v)));
        w.write_record(&rec).map_err(io)?;
    }
    w.flush().map_err(|e| IoError::io(path, e))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::scenario::PlantDispatch;
    use crate::timeseries::{TimeSeries, Unit};
    use chrono::TimeZone;
    use proptest::prelude::*;

    fn plant(name: &str, tech: Technology, start: DateTime<Utc>, gen: Vec<f64>) -> PlantDispatch {
        PlantDispatch {
            name: name.into(),
            technology: tech,
            capacity: 10.0,
            generation: TimeSeries::hourly(start, gen, Unit::Mw).unwrap(),
            pumping: None,
            absorption: None,
            storage: None,
        }
    }

    fn t0() -> DateTime<Utc> {
        Utc.with_ymd_and_hms(2019, 1, 1, 0, 0, 0).unwrap()
    }

    #[test]
    fn constant_day() {
        let d = Dispatch::new(24, vec![plant("c", Technology::Conventional, t0(), vec![1.0; 24])]).unwrap();
        let m = aggregate_dispatch(&d, Granularity::Daily);
        assert_eq!(m.rows.len(), 1);
        assert_eq!(m.rows[0].energy, vec![24.0, 24.0]);
        assert_eq!(m.rows[0].period, "2019-01-01");
        assert!(!m.rows[0].partial);
    }

    #[test]
    fn alternating_two_days() {
        let g: Vec<f64> = (0..48).map(|h| if h % 2 == 0 { 0.0 } else { 2.0 }).collect();
        let d = Dispatch::new(48, vec![plant("w", Technology::Wind, t0(), g)]).unwrap();
        let m = aggregate_dispatch(&d, Granularity::Daily);
        assert_eq!(m.rows.len(), 2);
        assert_eq!(m.rows[0].energy[0], 24.0);
        assert_eq!(m.rows[1].energy[0], 24.0);
    }

    #[test]
    fn months_and_partial_flags() {
        let start = Utc.with_ymd_and_hms(2019, 1, 31, 12, 0, 0).unwrap();
        let n = 24 * 30;
        let d = Dispatch::new(n, vec![plant("c", Technology::Conventional, start, vec![1.0; n])]).unwrap();
        let m = aggregate_dispatch(&d, Granularity::Monthly);
        let labels: Vec<&str> = m.rows.iter().map(|r| r.period.as_str()).collect();
        assert_eq!(labels, ["2019-01", "2019-02", "2019-03"]);
        assert_eq!(m.rows.iter().map(|r| r.partial).collect::<Vec<_>>(), [true, false, true]);
        assert_eq!(m.rows[1].energy[0], 28.0 * 24.0);
        let full = Dispatch::new(744, vec![plant("c", Technology::Conventional, t0(), vec![1.0; 744])]).unwrap();
        let m = aggregate_dispatch(&full, Granularity::Monthly);
        assert_eq!(m.rows.len(), 1);
        assert!(!m.rows[0].partial);
    }

    #[test]
    fn pumping_is_negative_and_net_is_demand() {
        let mut ps = plant("ps", Technology::PumpedHydro, t0(), vec![0.0, 3.0]);
        ps.pumping = Some(TimeSeries::hourly(t0(), vec![2.0, 0.0], Unit::Mw).unwrap());
        let c = plant("c", Technology::Conventional, t0(), vec![7.0, 2.0]);
        let d = Dispatch::new(2, vec![c, ps]).unwrap();
        let m = aggregate_dispatch(&d, Granularity::Hourly);
        assert_eq!(m.columns, ["conventional", "hydro", "pumping", "net"]);
        assert_eq!(m.rows[0].energy, vec![7.0, 0.0, -2.0, 5.0]);
        assert_eq!(m.rows[1].energy, vec![2.0, 3.0, 0.0, 5.0]);
    }

    proptest! {
        #[test]
        fn periods_partition_the_horizon(
            gen in prop::collection::vec(0.0f64..100.0, 1..2000),
            offset in 0i64..(24 * 60),
            g in 0usize..3,
        ) {
            let start = t0() + TimeDelta::hours(offset);
            let n = gen.len();
            let wind: Vec<f64> = gen.iter().map(|v| v / 3.0).collect();
            let d = Dispatch::new(n, vec![
                plant("c", Technology::Conventional, start, gen.clone()),
                plant("w", Technology::Wind, start, wind.clone()),
            ]).unwrap();
            let gran = [Granularity::Hourly, Granularity::Daily, Granularity::Monthly][g];
            let m = aggregate_dispatch(&d, gran);
            let whole: f64 = gen.iter().sum();
            let total = m.total("conventional").unwrap();
            prop_assert!((total - whole).abs() <= 1e-12 * whole.max(1.0));
            let net = m.total("net").unwrap();
            let both = whole + wind.iter().sum::<f64>();
            prop_assert!((net - both).abs() <= 1e-12 * both.max(1.0));
            // Periods are distinct and in order.
            prop_assert!(m.rows.windows(2).all(|w| w[0].start < w[1].start));
        }
    }
}
