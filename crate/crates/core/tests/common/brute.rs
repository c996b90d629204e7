//! Exhaustive grid oracle for one conventional plus one renewable plant.
//!
//! Every quantity is an integer number of grid cells (0.01 MW). The oracle
//! walks every capacity on the grid and, for each, every combination of
//! per-step renewable output on the grid; conventional output is whatever
//! closes the balance. No dominance pruning is used.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use ressize_core::scenario::{RenewableTech, ScenarioConfig};
use ressize_core::{validate_scenario, Unit, ValidatedScenario};

use super::scenarios::{coal, hourly, renewable};

pub const CELL: f64 = 0.01;

#[derive(Debug, Clone)]
pub struct GridInstance {
    /// Demand per step, in cells.
    pub demand: Vec<i64>,
    pub availability: Vec<f64>,
    /// Conventional capacity, in cells.
    pub conv_cap: i64,
    pub conv_opex: f64,
    pub capex: f64,
    pub opex: f64,
    pub alpha: f64,
    /// Largest capacity enumerated, in cells.
    pub max_capacity: i64,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct GridOptimum {
    pub cost: f64,
    pub capacity: f64,
    pub combinations: u64,
}

impl GridInstance {
    pub fn scenario(&self) -> ValidatedScenario {
        let demand = self.demand.iter().map(|&d| d as f64 * CELL).collect();
        let mut cfg = ScenarioConfig::new("grid", hourly(demand, Unit::Mw), self.alpha);
        cfg.conventional.push(coal(self.conv_cap as f64 * CELL, self.conv_opex));
        cfg.renewables.push(renewable(
            "wind",
            RenewableTech::Wind,
            self.availability.clone(),
            self.capex,
            self.opex,
        ));
        validate_scenario(cfg).expect("grid instance is well formed")
    }

    fn cost(&self, capacity: i64, output: &[i64]) -> f64 {
        let mut c = self.capex * capacity as f64 * CELL;
        for (&x, &d) in output.iter().zip(&self.demand) {
            c += self.opex * x as f64 * CELL + self.conv_opex * (d - x) as f64 * CELL;
        }
        c
    }

    /// Minimum cost over the grid, or `None` when no grid point is feasible.
    pub fn solve(&self) -> Option<GridOptimum> {
        let total: i64 = self.demand.iter().sum();
        // Share in cells; the small slack absorbs the rounding of α·ΣD.
        let need = (self.alpha * total as f64 - 1e-6).ceil() as i64;
        let mut best: Option<GridOptimum> = None;
        let mut combinations = 0u64;
        let mut output = vec![0i64; self.demand.len()];
        for g in 0..=self.max_capacity {
            let hi: Vec<i64> = self
                .availability
                .iter()
                .zip(&self.demand)
                .map(|(&a, &d)| ((a * g as f64) + 1e-9).floor().min(d as f64) as i64)
                .collect();
            let lo: Vec<i64> = self.demand.iter().map(|&d| (d - self.conv_cap).max(0)).collect();
            if lo.iter().zip(&hi).any(|(l, h)| l > h) {
                continue;
            }
            output.copy_from_slice(&lo);
            loop {
                combinations += 1;
                if output.iter().sum::<i64>() >= need {
                    let c = self.cost(g, &output);
                    if best.map_or(true, |b| c < b.cost) {
                        best = Some(GridOptimum {
                            cost: c,
                            capacity: g as f64 * CELL,
                            combinations: 0,
                        });
                    }
                }
                // Odometer increment over the per-step ranges.
                let mut t = 0;
                while t < output.len() && output[t] == hi[t] {
                    output[t] = lo[t];
                    t += 1;
                }
                if t == output.len() {
                    break;
                }
                output[t] += 1;
            }
        }
        best.map(|b| GridOptimum { combinations, ..b })
    }
}

/// Instance whose LP optimum lies on the grid: demands are multiples of
/// 0.12 MW and availabilities multiples of 1/4, so every breakpoint
/// `D/a` is a multiple of 0.01 MW, and α is set so the share row binds at
/// a capacity `G0` that is a multiple of 0.04 MW.
pub fn aligned_instance(seed: u64) -> GridInstance {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let t = rng.gen_range(2..=4);
    let demand: Vec<i64> = (0..t).map(|_| 12 * rng.gen_range(1..=3)).collect();
    let mut availability: Vec<f64> = (0..t).map(|_| rng.gen_range(0..=4) as f64 / 4.0).collect();
    if availability.iter().all(|&a| a == 0.0) {
        availability[0] = 0.5;
    }
    let reach = demand
        .iter()
        .zip(&availability)
        .filter(|(_, &a)| a > 0.0)
        .map(|(&d, &a)| (d as f64 / a).round() as i64)
        .max()
        .unwrap();
    let g0 = 4 * rng.gen_range(0..=reach / 4);
    let produced: i64 = demand
        .iter()
        .zip(&availability)
        .map(|(&d, &a)| ((a * g0 as f64).round() as i64).min(d))
        .sum();
    let total: i64 = demand.iter().sum();
    GridInstance {
        demand,
        availability,
        conv_cap: 100,
        conv_opex: rng.gen_range(30.0..60.0),
        capex: rng.gen_range(5.0..80.0),
        opex: rng.gen_range(0.0..10.0),
        alpha: produced as f64 / total as f64,
        max_capacity: reach + 20,
    }
}

/// Instance with arbitrary availabilities and α; its LP optimum is
/// generally off the grid.
pub fn free_instance(seed: u64) -> GridInstance {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let t = rng.gen_range(2..=4);
    let demand: Vec<i64> = (0..t).map(|_| rng.gen_range(5..=30)).collect();
    let availability: Vec<f64> = (0..t).map(|_| rng.gen_range(0.1..1.0)).collect();
    let reach = demand
        .iter()
        .zip(&availability)
        .map(|(&d, &a)| (d as f64 / a).ceil() as i64)
        .max()
        .unwrap();
    GridInstance {
        demand,
        availability,
        conv_cap: 100,
        conv_opex: rng.gen_range(30.0..60.0),
        capex: rng.gen_range(5.0..80.0),
        opex: rng.gen_range(0.0..10.0),
        alpha: rng.gen_range(0.0..0.9),
        max_capacity: reach + 20,
    }
}
