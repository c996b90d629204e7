use std::collections::BTreeMap;
use std::fmt;
use std::ops::Range;

use serde::Serialize;

/// Equation family a constraint row belongs to, kept for residual reporting.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum RowFamily {
    ConventionalCap,
    RenewableCap,
    HydroGenerationCap,
    HydroPumpingCap,
    HydroStorageBalance,
    HydroInitialLevel,
    HydroTerminalLevel,
    HydroReservoirCap,
    ThermalAbsorptionCap,
    ThermalElectricCap,
    ThermalStorageBalance,
    ThermalInitialLevel,
    ThermalTerminalLevel,
    ThermalTankCap,
    PowerBalance,
    RenewableShare,
    Generic,
}

impl fmt::Display for RowFamily {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let s = serde_json::to_value(self).ok();
        let s = s.as_ref().and_then(|v| v.as_str()).unwrap_or("row");
        f.write_str(s)
    }
}

/// Sparse constraint row `Σ coeff·x (= or ≤) rhs`.
#[derive(Debug, Clone, PartialEq)]
pub struct LpRow {
    pub coeffs: Vec<(usize, f64)>,
    pub rhs: f64,
    pub family: RowFamily,
}

impl LpRow {
    pub fn new(coeffs: Vec<(usize, f64)>, rhs: f64, family: RowFamily) -> Self {
        Self {
            coeffs,
            rhs,
            family,
        }
    }

    pub fn activity(&self, x: &[f64]) -> f64 {
        self.coeffs.iter().map(|&(j, a)| a * x[j]).sum()
    }

    /// Largest magnitude among the row's coefficients and right-hand side.
    pub fn scale(&self) -> f64 {
        self.coeffs
            .iter()
            .map(|c| c.1.abs())
            .fold(self.rhs.abs(), f64::max)
    }
}

/// Sparse linear program: minimize `objective·x` subject to equality rows,
/// `≤` rows and variable bounds.
#[derive(Debug, Clone, PartialEq)]
pub struct LpProblem {
    pub num_vars: usize,
    pub objective: Vec<f64>,
    pub eq_rows: Vec<LpRow>,
    pub ineq_rows: Vec<LpRow>,
    pub lower: Vec<f64>,
    pub upper: Vec<f64>,
    /// Present when the problem was built from a scenario.
    pub layout: Option<VariableLayout>,
}

impl LpProblem {
    /// `num_vars` non-negative variables, zero objective, no rows.
    pub fn new(num_vars: usize) -> Self {
        Self {
            num_vars,
            objective: vec![0.0; num_vars],
            eq_rows: Vec::new(),
            ineq_rows: Vec::new(),
            lower: vec![0.0; num_vars],
            upper: vec![f64::INFINITY; num_vars],
            layout: None,
        }
    }

    pub fn num_rows(&self) -> usize {
        self.eq_rows.len() + self.ineq_rows.len()
    }

    /// All rows, equality rows first; the flag is true for `≤` rows.
    pub fn rows(&self) -> impl Iterator<Item = (&LpRow, bool)> {
        self.eq_rows
            .iter()
            .map(|r| (r, false))
            .chain(self.ineq_rows.iter().map(|r| (r, true)))
    }

    pub fn objective_value(&self, x: &[f64]) -> f64 {
        self.objective.iter().zip(x).map(|(c, v)| c * v).sum()
    }

    /// Largest violation per row family, each divided by
    /// `max(1, row scale)`; bound violations are reported under `Generic`.
    pub fn scaled_violations(&self, x: &[f64]) -> BTreeMap<RowFamily, f64> {
        let mut out = BTreeMap::new();
        for (row, is_ineq) in self.rows() {
            let r = row.activity(x) - row.rhs;
            let v = if is_ineq { r.max(0.0) } else { r.abs() };
            let e = out.entry(row.family).or_insert(0.0f64);
            *e = e.max(v / row.scale().max(1.0));
        }
        let mut bound: f64 = 0.0;
        for j in 0..self.num_vars {
            bound = bound.max(self.lower[j] - x[j]).max(x[j] - self.upper[j]);
        }
        if bound > 0.0 {
            let e = out.entry(RowFamily::Generic).or_insert(0.0f64);
            *e = e.max(bound);
        }
        out
    }

    pub fn max_scaled_violation(&self, x: &[f64]) -> f64 {
        self.scaled_violations(x).values().copied().fold(0.0, f64::max)
    }

    /// Checks index ranges, bound ordering and finiteness.
    pub fn check(&self) -> Result<(), String> {
        if self.objective.len() != self.num_vars
            || self.lower.len() != self.num_vars
            || self.upper.len() != self.num_vars
        {
            return Err("vector lengths differ from num_vars".into());
        }
        if let Some(j) = self.objective.iter().position(|c| !c.is_finite()) {
            return Err(format!("objective coefficient {j} not finite"));
        }
        for j in 0..self.num_vars {
            if self.lower[j] > self.upper[j] || self.lower[j].is_nan() || self.upper[j].is_nan() {
                return Err(format!("bounds of variable {j} out of order"));
            }
        }
        for (k, (row, _)) in self.rows().enumerate() {
            if !row.rhs.is_finite() {
                return Err(format!("row {k} rhs not finite"));
            }
            for &(j, a) in &row.coeffs {
                if j >= self.num_vars || !a.is_finite() {
                    return Err(format!("row {k} has invalid entry ({j}, {a})"));
                }
            }
        }
        if let Some(layout) = &self.layout {
            if layout.num_vars != self.num_vars {
                return Err("layout size differs from num_vars".into());
            }
        }
        Ok(())
    }
}

/// Capacity of a plant inside the LP: a constant or a decision variable.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum Capacity {
    Fixed(f64),
    Var(usize),
}

impl Capacity {
    pub fn value(&self, x: &[f64]) -> f64 {
        match *self {
            Capacity::Fixed(g) => g,
            Capacity::Var(j) => x[j],
        }
    }

    pub fn var(&self) -> Option<usize> {
        match *self {
            Capacity::Var(j) => Some(j),
            Capacity::Fixed(_) => None,
        }
    }
}

/// Position of every decision variable in the LP vector.
///
/// Blocks, in order: conventional dispatch, renewable capacities (sized
/// plants only), renewable dispatch, hydro capacities, hydro generation and
/// pumping (per plant: T generation then T pumping), hydro storage levels,
/// solar-thermal capacities, thermal absorption, thermal-electric dispatch,
/// thermal storage levels.
#[derive(Debug, Clone, PartialEq, Default)]
pub struct VariableLayout {
    pub horizon: usize,
    pub num_vars: usize,
    pub conventional: Vec<Range<usize>>,
    pub renewable_capacity: Vec<Capacity>,
    pub renewable_dispatch: Vec<Range<usize>>,
    pub hydro_capacity: Vec<Capacity>,
    pub hydro_generation: Vec<Range<usize>>,
    pub hydro_pumping: Vec<Range<usize>>,
    pub hydro_storage: Vec<Range<usize>>,
    pub solar_capacity: Vec<Capacity>,
    pub solar_absorption: Vec<Range<usize>>,
    pub solar_generation: Vec<Range<usize>>,
    pub solar_storage: Vec<Range<usize>>,
}

impl VariableLayout {
    /// Named contiguous blocks in vector order.
    pub fn blocks(&self) -> Vec<(&'static str, Range<usize>)> {
        fn span(ranges: &[Range<usize>]) -> Option<Range<usize>> {
            Some(ranges.first()?.start..ranges.last()?.end)
        }
        fn cap_span(caps: &[Capacity]) -> Option<Range<usize>> {
            let vars: Vec<usize> = caps.iter().filter_map(Capacity::var).collect();
            Some(*vars.first()?..*vars.last()? + 1)
        }
        let hydro_flows: Vec<Range<usize>> = self
            .hydro_generation
            .iter()
            .chain(&self.hydro_pumping)
            .cloned()
            .collect();
        let hydro_flows = hydro_flows
            .iter()
            .map(|r| r.start)
            .min()
            .zip(hydro_flows.iter().map(|r| r.end).max())
            .map(|(a, b)| a..b);
        [
            ("conventional_dispatch", span(&self.conventional)),
            ("renewable_capacity", cap_span(&self.renewable_capacity)),
            ("renewable_dispatch", span(&self.renewable_dispatch)),
            ("hydro_capacity", cap_span(&self.hydro_capacity)),
            ("hydro_flows", hydro_flows),
            ("hydro_storage", span(&self.hydro_storage)),
            ("solar_capacity", cap_span(&self.solar_capacity)),
            ("thermal_absorption", span(&self.solar_absorption)),
            ("thermal_dispatch", span(&self.solar_generation)),
            ("thermal_storage", span(&self.solar_storage)),
        ]
        .into_iter()
        .filter_map(|(name, r)| r.map(|r| (name, r)))
        .collect()
    }
}
