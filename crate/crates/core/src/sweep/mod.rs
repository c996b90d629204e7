//! Share-target sweeps, cost normalization against a base case,
//! generation-mix tables and bus allocation.

mod buses;
mod mix;

use std::path::Path;

use rayon::prelude::*;
use serde::Serialize;
use thiserror::Error;

use crate::formulation::{size_scenario, SizingResult};
use crate::io::{format_number, IoError};
use crate::scenario::{Technology, ValidatedScenario};
use crate::solver::{LpStatus, SolverOptions};

pub use buses::{allocate_to_buses, write_bus_csv, BusRow, BusTable};
pub use mix::{aggregate_dispatch, write_mix_csv, Granularity, MixRow, MixTable};

#[derive(Debug, Error)]
pub enum SweepError {
    #[error("alpha grid must be strictly increasing values in [0, 1]: {0}")]
    InvalidGrid(String),
    #[error("alpha grids differ: {0}")]
    GridMismatch(String),
    #[error("base cost is zero at alpha {alpha}")]
    DivisionByZero { alpha: f64 },
    #[error("weights of {plant} sum to {sum}, expected 1")]
    WeightError { plant: String, sum: f64 },
    #[error("allocation names unknown plant {0}")]
    UnknownPlant(String),
    #[error("could not build worker pool: {0}")]
    Pool(String),
    #[error(transparent)]
    Io(#[from] IoError),
}

/// Outcome of one sweep point.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum PointStatus {
    Optimal,
    Infeasible,
    Unbounded,
    /// The solver gave up (iteration limit or numerical breakdown).
    Failed,
}

impl PointStatus {
    pub fn as_str(self) -> &'static str {
        match self {
            PointStatus::Optimal => "optimal",
            PointStatus::Infeasible => "infeasible",
            PointStatus::Unbounded => "unbounded",
            PointStatus::Failed => "failed",
        }
    }
}

impl From<LpStatus> for PointStatus {
    fn from(s: LpStatus) -> Self {
        match s {
            LpStatus::Optimal => PointStatus::Optimal,
            LpStatus::Infeasible => PointStatus::Infeasible,
            LpStatus::Unbounded => PointStatus::Unbounded,
        }
    }
}

/// One α of a sweep. Capacity and energy vectors follow the report's plant
/// and technology lists and are empty unless the point is optimal.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SweepRow {
    pub alpha: f64,
    pub status: PointStatus,
    /// Failure description for `Failed` rows.
    pub message: Option<String>,
    pub total_cost: Option<f64>,
    pub normalized_cost: Option<f64>,
    pub capacities_mw: Vec<f64>,
    pub energy_mwh: Vec<f64>,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SweepReport {
    pub scenario: String,
    pub plants: Vec<(String, Technology)>,
    pub technologies: Vec<Technology>,
    /// Sorted by strictly increasing α.
    pub rows: Vec<SweepRow>,
}

impl SweepReport {
    pub fn alphas(&self) -> Vec<f64> {
        self.rows.iter().map(|r| r.alpha).collect()
    }

    pub fn capacity(&self, row: usize, plant: &str) -> Option<f64> {
        let j = self.plants.iter().position(|p| p.0 == plant)?;
        self.rows[row].capacities_mw.get(j).copied()
    }

    pub fn energy(&self, row: usize, tech: Technology) -> Option<f64> {
        let j = self.technologies.iter().position(|t| *t == tech)?;
        self.rows[row].energy_mwh.get(j).copied()
    }
}

/// Evenly spaced grid from `start` to `end` inclusive. The last point is
/// `end` itself when it lies within a hundredth of a step of the grid.
pub fn alpha_grid(start: f64, end: f64, step: f64) -> Result<Vec<f64>, SweepError> {
    if !(step > 0.0) || !(start <= end) {
        return Err(SweepError::InvalidGrid(format!("start {start}, end {end}, step {step}")));
    }
    let n = ((end - start) / step + 0.01).floor() as usize;
    let mut out: Vec<f64> = (0..=n).map(|k| start + k as f64 * step).collect();
    if let Some(last) = out.last_mut() {
        if (*last - end).abs() <= 0.01 * step {
            *last = end;
        }
    }
    check_grid(&out)?;
    Ok(out)
}

fn check_grid(alphas: &[f64]) -> Result<(), SweepError> {
    if let Some(a) = alphas.iter().find(|a| !(0.0..=1.0).contains(*a)) {
        return Err(SweepError::InvalidGrid(format!("{a} outside [0, 1]")));
    }
    if alphas.windows(2).any(|w| w[0] >= w[1]) {
        return Err(SweepError::InvalidGrid("not strictly increasing".into()));
    }
    Ok(())
}

fn row_from(s: &ValidatedScenario, alpha: f64, techs: &[Technology], r: Result<SizingResult, String>) -> SweepRow {
    let mut row = SweepRow {
        alpha,
        status: PointStatus::Failed,
        message: None,
        total_cost: None,
        normalized_cost: None,
        capacities_mw: Vec::new(),
        energy_mwh: Vec::new(),
    };
    let r = match r {
        Ok(r) => r,
        Err(msg) => {
            row.message = Some(msg);
            return row;
        }
    };
    row.status = r.status.into();
    if let (Some(cost), Some(d)) = (r.cost, &r.dispatch) {
        row.total_cost = Some(cost.total);
        row.capacities_mw = s
            .plants()
            .iter()
            .map(|(n, _)| r.capacity(n).unwrap_or(0.0))
            .collect();
        let dt = s.step_hours();
        row.energy_mwh = techs
            .iter()
            .map(|t| {
                d.plants()
                    .iter()
                    .filter(|p| p.technology == *t)
                    .map(|p| p.generation.sum() * dt)
                    .sum()
            })
            .collect();
    }
    row
}

/// Solves `s` once per α. Points are independent, run on `jobs` worker
/// threads (`None`: all cores) and returned sorted by α. Non-optimal points
/// are kept as rows with their status; solver failures become `Failed` rows.
pub fn sweep_alpha(
    s: &ValidatedScenario,
    alphas: &[f64],
    opts: &SolverOptions,
    jobs: Option<usize>,
) -> Result<SweepReport, SweepError> {
    check_grid(alphas)?;
    let plants: Vec<(String, Technology)> =
        s.plants().into_iter().map(|(n, t)| (n.to_string(), t)).collect();
    let technologies: Vec<Technology> = Technology::ALL
        .into_iter()
        .filter(|t| plants.iter().any(|p| p.1 == *t))
        .collect();
    let solve_one = |&alpha: &f64| -> SweepRow {
        let r = s
            .with_alpha(alpha)
            .map_err(|e| e.to_string())
            .and_then(|sa| size_scenario(&sa, opts).map_err(|e| e.to_string()));
        if let Err(e) = &r {
            log::warn!("alpha {alpha}: {e}");
        }
        row_from(s, alpha, &technologies, r)
    };
    let mut pool = rayon::ThreadPoolBuilder::new();
    if let Some(j) = jobs {
        pool = pool.num_threads(j.max(1));
    }
    let pool = pool.build().map_err(|e| SweepError::Pool(e.to_string()))?;
    let mut rows: Vec<SweepRow> = pool.install(|| alphas.par_iter().map(solve_one).collect());
    rows.sort_by(|a, b| a.alpha.total_cmp(&b.alpha));
    Ok(SweepReport {
        scenario: s.name.clone(),
        plants,
        technologies,
        rows,
    })
}

/// Divides each optimal row's total cost by `base`'s at the same α. Rows
/// where either side is not optimal get no normalized cost.
pub fn normalize_costs(report: &SweepReport, base: &SweepReport) -> Result<SweepReport, SweepError> {
    let (a, b) = (report.alphas(), base.alphas());
    if a != b {
        return Err(SweepError::GridMismatch(format!("{a:?} vs {b:?}")));
    }
    let mut out = report.clone();
    for (row, brow) in out.rows.iter_mut().zip(&base.rows) {
        row.normalized_cost = match (row.total_cost, brow.total_cost) {
            (Some(c), Some(c0)) => {
                if c0 == 0.0 {
                    return Err(SweepError::DivisionByZero { alpha: row.alpha });
                }
                Some(c / c0)
            }
            _ => None,
        };
    }
    Ok(out)
}

/// Writes `sweep.csv`: `alpha,status,total_cost,normalized_cost`, then one
/// `<plant>_mw` column per plant and one `<technology>_mwh` column per
/// technology. Missing values are empty fields.
pub fn write_sweep_csv(report: &SweepReport, path: &Path) -> Result<(), IoError> {
    let io = |e: csv::Error| match e.into_kind() {
        csv::ErrorKind::Io(source) => IoError::io(path, source),
        k => IoError::io(path, std::io::Error::other(format!("{k:?}"))),
    };
    let mut w = csv::Writer::from_path(path).map_err(io)?;
    let mut header: Vec<String> = ["alpha", "status", "total_cost", "normalized_cost"]
        .map(String::from)
        .to_vec();
    header.extend(report.plants.iter().map(|(n, _)| format!("{n}_mw")));
    header.extend(report.technologies.iter().map(|t| format!("{}_mwh", t.as_str())));
    w.write_record(&header).map_err(io)?;
    let opt = |v: Option<f64>| v.map(format_number).unwrap_or_default();
    for r in &report.rows {
        let mut rec = vec![
            format_number(r.alpha),
            r.status.as_str().to_string(),
            opt(r.total_cost),
            opt(r.normalized_cost),
        ];
        for j in 0..report.plants.len() {
            rec.push(opt(r.capacities_mw.get(j).copied()));
        }
        for j in 0..report.technologies.len() {
            rec.push(opt(r.energy_mwh.get(j).copied()));
        }
        w.write_record(&rec).map_err(io)?;
    }
    w.flush().map_err(|e| IoError::io(path, e))
}
