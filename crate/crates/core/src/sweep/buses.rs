use std::path::Path;

use serde::Serialize;

use super::SweepError;
use crate::formulation::SizingResult;
use crate::io::{format_number, IoError};
use crate::scenario::{BusAllocation, Technology, BUS_WEIGHT_TOL};

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct BusRow {
    pub bus: u32,
    pub plant: String,
    pub technology: Technology,
    pub mw: f64,
}

/// Capacity per bus and plant, sorted by bus then plant order. Reporting
/// only: the network itself is not modelled.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct BusTable {
    pub rows: Vec<BusRow>,
}

impl BusTable {
    pub fn bus_total(&self, bus: u32) -> f64 {
        self.rows.iter().filter(|r| r.bus == bus).map(|r| r.mw).sum()
    }
}

/// Splits each allocated plant's capacity over buses by weight. Weights of a
/// plant must be non-negative and sum to 1 within 1e-9.
pub fn allocate_to_buses(
    result: &SizingResult,
    allocation: &BusAllocation,
) -> Result<BusTable, SweepError> {
    let mut rows = Vec::new();
    for (plant, shares) in allocation {
        let sum: f64 = shares.iter().map(|s| s.weight).sum();
        if shares.iter().any(|s| !(s.weight >= 0.0)) || (sum - 1.0).abs() > BUS_WEIGHT_TOL {
            return Err(SweepError::WeightError {
                plant: plant.clone(),
                sum,
            });
        }
        let (order, cap) = result
            .capacities
            .iter()
            .enumerate()
            .find(|(_, c)| &c.name == plant)
            .ok_or_else(|| SweepError::UnknownPlant(plant.clone()))?;
        for s in shares {
            rows.push((
                order,
                BusRow {
                    bus: s.bus,
                    plant: plant.clone(),
                    technology: cap.technology,
                    mw: cap.capacity_mw * s.weight,
                },
            ));
        }
    }
    rows.sort_by_key(|(order, r)| (r.bus, *order));
    Ok(BusTable {
        rows: rows.into_iter().map(|r| r.1).collect(),
    })
}

/// Writes `bus,plant,technology,mw` CSV.
pub fn write_bus_csv(table: &BusTable, path: &Path) -> Result<(), IoError> {
    let io = |e: csv::Error| match e.into_kind() {
        csv::ErrorKind::Io(source) => IoError::io(path, source),
        k => IoError::io(path, std::io::Error::other(format!("{k:?}"))),
    };
    let mut w = csv::Writer::from_path(path).map_err(io)?;
    w.write_record(["bus", "plant", "technology", "mw"]).map_err(io)?;
    for r in &table.rows {
        w.write_record([
            r.bus.to_string(),
            r.plant.clone(),
            r.technology.as_str().to_string(),
            format_number(r.mw),
        ])
        .map_err(io)?;
    }
    w.flush().map_err(|e| IoError::io(path, e))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::formulation::{PlantCapacity, SolveStats};
    use crate::scenario::BusShare;
    use crate::solver::LpStatus;

    fn result() -> SizingResult {
        let cap = |name: &str, technology, capacity_mw| PlantCapacity {
            name: name.into(),
            technology,
            capacity_mw,
            fixed: false,
        };
        SizingResult {
            scenario: "b".into(),
            alpha: 0.8,
            status: LpStatus::Optimal,
            capacities: vec![
                cap("pv", Technology::Pv, 596.0),
                cap("wind", Technology::Wind, 785.0),
                cap("st", Technology::SolarThermal, 120.0),
            ],
            dispatch: None,
            curtailment: Vec::new(),
            cost: None,
            achieved_share: None,
            stats: SolveStats::default(),
            assumed_normal_incidence: Vec::new(),
        }
    }

    fn alloc(entries: &[(&str, &[(u32, f64)])]) -> BusAllocation {
        entries
            .iter()
            .map(|(p, s)| {
                let shares = s.iter().map(|&(bus, weight)| BusShare { bus, weight }).collect();
                (p.to_string(), shares)
            })
            .collect()
    }

    #[test]
    fn splits_by_weight() {
        let t = allocate_to_buses(&result(), &alloc(&[("wind", &[(2, 1.0)])])).unwrap();
        assert_eq!(t.rows.len(), 1);
        assert_eq!(t.bus_total(2), 785.0);
        let t = allocate_to_buses(&result(), &alloc(&[("pv", &[(1, 0.5), (3, 0.5)])])).unwrap();
        assert_eq!(t.bus_total(1), 298.0);
        assert_eq!(t.bus_total(3), 298.0);
        let t = allocate_to_buses(&result(), &alloc(&[("st", &[(4, 0.5), (6, 0.5)])])).unwrap();
        assert_eq!(t.rows[0].mw, t.rows[1].mw);
        assert_eq!((t.rows[0].bus, t.rows[1].bus), (4, 6));
    }

    #[test]
    fn sorted_by_bus_then_plant_order() {
        let t = allocate_to_buses(
            &result(),
            &alloc(&[("wind", &[(2, 0.25), (1, 0.75)]), ("pv", &[(2, 1.0)])]),
        )
        .unwrap();
        let keys: Vec<(u32, &str)> = t.rows.iter().map(|r| (r.bus, r.plant.as_str())).collect();
        assert_eq!(keys, [(1, "wind"), (2, "pv"), (2, "wind")]);
    }

    #[test]
    fn rejects_bad_weights_and_unknown_plants() {
        let bad = allocate_to_buses(&result(), &alloc(&[("pv", &[(1, 0.5), (2, 0.4)])]));
        assert!(matches!(bad, Err(SweepError::WeightError { .. })));
        let neg = allocate_to_buses(&result(), &alloc(&[("pv", &[(1, 1.5), (2, -0.5)])]));
        assert!(matches!(neg, Err(SweepError::WeightError { .. })));
        let ok = allocate_to_buses(&result(), &alloc(&[("pv", &[(1, 0.5), (2, 0.5 + 5e-10)])]));
        assert!(ok.is_ok());
        let unknown = allocate_to_buses(&result(), &alloc(&[("tidal", &[(1, 1.0)])]));
        assert!(matches!(unknown, Err(SweepError::UnknownPlant(_))));
    }
}
