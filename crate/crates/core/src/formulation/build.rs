use super::problem::{Capacity, LpProblem, LpRow, RowFamily, VariableLayout};
use crate::scenario::ValidatedScenario;
use crate::solar_thermal::build_thermal_profile;

struct Alloc {
    next: usize,
}

impl Alloc {
    fn block(&mut self, len: usize) -> std::ops::Range<usize> {
        let r = self.next..self.next + len;
        self.next += len;
        r
    }

    fn capacity(&mut self, fixed: Option<f64>) -> Capacity {
        match fixed {
            Some(g) => Capacity::Fixed(g),
            None => {
                self.next += 1;
                Capacity::Var(self.next - 1)
            }
        }
    }
}

/// Assigns every decision variable its index.
pub fn layout_for(s: &ValidatedScenario) -> VariableLayout {
    let t = s.horizon();
    let mut a = Alloc { next: 0 };
    let conventional = s.conventional.iter().map(|_| a.block(t)).collect();
    let renewable_capacity = s.renewables.iter().map(|p| a.capacity(p.fixed_capacity)).collect();
    let renewable_dispatch = s.renewables.iter().map(|_| a.block(t)).collect();
    let hydro_capacity = s.hydro.iter().map(|p| a.capacity(p.fixed_capacity)).collect();
    let mut hydro_generation = Vec::new();
    let mut hydro_pumping = Vec::new();
    for _ in &s.hydro {
        hydro_generation.push(a.block(t));
        hydro_pumping.push(a.block(t));
    }
    let hydro_storage = s.hydro.iter().map(|_| a.block(t)).collect();
    let solar_capacity = s.solar_thermal.iter().map(|p| a.capacity(p.fixed_capacity)).collect();
    let solar_absorption = s.solar_thermal.iter().map(|_| a.block(t)).collect();
    let solar_generation = s.solar_thermal.iter().map(|_| a.block(t)).collect();
    let solar_storage = s.solar_thermal.iter().map(|_| a.block(t)).collect();
    VariableLayout {
        horizon: t,
        num_vars: a.next,
        conventional,
        renewable_capacity,
        renewable_dispatch,
        hydro_capacity,
        hydro_generation,
        hydro_pumping,
        hydro_storage,
        solar_capacity,
        solar_absorption,
        solar_generation,
        solar_storage,
    }
}

/// `lhs + coef·G ≤ 0` for a variable capacity, `lhs ≤ −coef·G` for a fixed one.
fn with_capacity(mut coeffs: Vec<(usize, f64)>, cap: Capacity, coef: f64, family: RowFamily) -> LpRow {
    match cap {
        Capacity::Var(j) => {
            coeffs.push((j, coef));
            LpRow::new(coeffs, 0.0, family)
        }
        Capacity::Fixed(g) => LpRow::new(coeffs, -coef * g, family),
    }
}

struct StorageRows {
    level: std::ops::Range<usize>,
    /// (variable range, rate into storage per MW) for each flow.
    flows: Vec<(std::ops::Range<usize>, f64)>,
    cap: Capacity,
    hours: f64,
    fill: f64,
    dt: f64,
    cyclic: bool,
    balance: RowFamily,
    initial: RowFamily,
    terminal: RowFamily,
    bound: RowFamily,
}

impl StorageRows {
    fn emit(&self, lp: &mut LpProblem) {
        let t_len = self.level.len();
        let at = |r: &std::ops::Range<usize>, t: usize| r.start + t;
        // x_{t+1} − x_t − Δt·Σ rate·flow_t = 0
        for t in 0..t_len - 1 {
            let mut c = vec![(at(&self.level, t + 1), 1.0), (at(&self.level, t), -1.0)];
            for (r, rate) in &self.flows {
                c.push((at(r, t), -self.dt * rate));
            }
            lp.eq_rows.push(LpRow::new(c, 0.0, self.balance));
        }
        // x_1 = fill·h·G
        lp.eq_rows.push(with_capacity(
            vec![(self.level.start, 1.0)],
            self.cap,
            -self.fill * self.hours,
            self.initial,
        ));
        // End-of-horizon level e = x_T + Δt·Σ rate·flow_T.
        let end = |sign: f64| -> Vec<(usize, f64)> {
            let mut c = vec![(at(&self.level, t_len - 1), sign)];
            for (r, rate) in &self.flows {
                c.push((at(r, t_len - 1), sign * self.dt * rate));
            }
            c
        };
        // −e + x_1 ≤ 0 (cyclic) or −e ≤ 0.
        let mut lower = end(-1.0);
        if self.cyclic {
            lower.push((self.level.start, 1.0));
        }
        lp.ineq_rows.push(LpRow::new(lower, 0.0, self.terminal));
        // e − h·G ≤ 0
        lp.ineq_rows.push(with_capacity(end(1.0), self.cap, -self.hours, self.bound));
        // x_t − h·G ≤ 0
        for t in 0..t_len {
            lp.ineq_rows.push(with_capacity(
                vec![(at(&self.level, t), 1.0)],
                self.cap,
                -self.hours,
                self.bound,
            ));
        }
    }
}

/// Builds the sizing LP of a validated scenario.
///
/// Rows: generation limits of every plant at every step, storage
/// recurrences with a fixed initial level and an end-of-horizon level at
/// least the initial one (or non-negative when storage is not cyclic),
/// reservoir and tank limits, one power balance per step and one annual
/// renewable-share row. Fixed capacities enter as constants.
pub fn build_lp(s: &ValidatedScenario) -> LpProblem {
    let layout = layout_for(s);
    let t_len = layout.horizon;
    let dt = s.step_hours();
    let mut lp = LpProblem::new(layout.num_vars);
    let ann = s.capex_annualization;

    for (p, r) in s.conventional.iter().zip(&layout.conventional) {
        for j in r.clone() {
            lp.objective[j] = p.opex * dt;
            lp.ineq_rows.push(LpRow::new(
                vec![(j, 1.0)],
                p.installed_capacity,
                RowFamily::ConventionalCap,
            ));
        }
    }

    for (k, p) in s.renewables.iter().enumerate() {
        let cap = layout.renewable_capacity[k];
        if let Capacity::Var(j) = cap {
            lp.objective[j] = p.capex * ann;
        }
        let r = &layout.renewable_dispatch[k];
        for (t, &a) in p.availability.values().iter().enumerate() {
            lp.objective[r.start + t] = p.opex * dt;
            lp.ineq_rows.push(with_capacity(
                vec![(r.start + t, 1.0)],
                cap,
                -a,
                RowFamily::RenewableCap,
            ));
        }
    }

    for (k, p) in s.hydro.iter().enumerate() {
        let cap = layout.hydro_capacity[k];
        if let Capacity::Var(j) = cap {
            lp.objective[j] = p.capex * ann;
        }
        let (gen, pump) = (&layout.hydro_generation[k], &layout.hydro_pumping[k]);
        for t in 0..t_len {
            lp.objective[gen.start + t] = p.opex * dt;
            lp.ineq_rows.push(with_capacity(
                vec![(gen.start + t, 1.0)],
                cap,
                -1.0,
                RowFamily::HydroGenerationCap,
            ));
            lp.ineq_rows.push(with_capacity(
                vec![(pump.start + t, 1.0)],
                cap,
                -1.0,
                RowFamily::HydroPumpingCap,
            ));
        }
        StorageRows {
            level: layout.hydro_storage[k].clone(),
            flows: vec![(pump.clone(), p.eta_pump), (gen.clone(), -1.0 / p.eta_turbine)],
            cap,
            hours: p.storage_hours,
            fill: p.initial_fill,
            dt,
            cyclic: s.enforce_cyclic_storage,
            balance: RowFamily::HydroStorageBalance,
            initial: RowFamily::HydroInitialLevel,
            terminal: RowFamily::HydroTerminalLevel,
            bound: RowFamily::HydroReservoirCap,
        }
        .emit(&mut lp);
    }

    for (k, p) in s.solar_thermal.iter().enumerate() {
        let cap = layout.solar_capacity[k];
        if let Capacity::Var(j) = cap {
            lp.objective[j] = p.capex * ann;
        }
        let profile = build_thermal_profile(p).expect("incidence angles checked by validation");
        let (abs, gen) = (&layout.solar_absorption[k], &layout.solar_generation[k]);
        for (t, &m) in profile.max_thermal.values().iter().enumerate() {
            lp.objective[gen.start + t] = p.opex * dt;
            lp.ineq_rows.push(with_capacity(
                vec![(abs.start + t, 1.0)],
                cap,
                -m,
                RowFamily::ThermalAbsorptionCap,
            ));
            lp.ineq_rows.push(with_capacity(
                vec![(gen.start + t, 1.0)],
                cap,
                -1.0,
                RowFamily::ThermalElectricCap,
            ));
        }
        StorageRows {
            level: layout.solar_storage[k].clone(),
            flows: vec![(abs.clone(), 1.0), (gen.clone(), -1.0 / p.eta_thermoelectric)],
            cap,
            hours: p.storage_hours,
            fill: p.initial_fill,
            dt,
            cyclic: s.enforce_cyclic_storage,
            balance: RowFamily::ThermalStorageBalance,
            initial: RowFamily::ThermalInitialLevel,
            terminal: RowFamily::ThermalTerminalLevel,
            bound: RowFamily::ThermalTankCap,
        }
        .emit(&mut lp);
    }

    // Σ generation − Σ pumping = D_t
    let demand = s.demand.values();
    for (t, &d) in demand.iter().enumerate() {
        let mut c = Vec::new();
        let gens = layout
            .conventional
            .iter()
            .chain(&layout.renewable_dispatch)
            .chain(&layout.hydro_generation)
            .chain(&layout.solar_generation);
        c.extend(gens.map(|r| (r.start + t, 1.0)));
        c.extend(layout.hydro_pumping.iter().map(|r| (r.start + t, -1.0)));
        lp.eq_rows.push(LpRow::new(c, d, RowFamily::PowerBalance));
    }

    // −Σ_t (renewable + solar-thermal electric) ≤ −α·Σ_t D_t
    let mut share = Vec::new();
    for r in layout.renewable_dispatch.iter().chain(&layout.solar_generation) {
        share.extend(r.clone().map(|j| (j, -1.0)));
    }
    let total: f64 = demand.iter().sum();
    lp.ineq_rows.push(LpRow::new(share, -s.alpha * total, RowFamily::RenewableShare));

    lp.layout = Some(layout);
    lp
}
