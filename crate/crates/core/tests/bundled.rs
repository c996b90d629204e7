//! Checks on the bundled synthetic scenarios.

use std::path::{Path, PathBuf};

use ressize_core::io::read_scenario;
use ressize_core::solver::SolverOptions;
use ressize_core::sweep::{alpha_grid, sweep_alpha, PointStatus};
use ressize_core::{validate_scenario, ValidatedScenario};

fn data(name: &str) -> PathBuf {
    Path::new(env!("CARGO_MANIFEST_DIR")).join("../../data").join(name)
}

fn load(name: &str) -> ValidatedScenario {
    validate_scenario(read_scenario(&data(name)).unwrap()).unwrap()
}

#[test]
fn tenerife_like_plant_counts() {
    let s = load("tenerife_like.json");
    assert_eq!(s.conventional.len(), 1);
    assert_eq!(s.renewables.len(), 2);
    assert_eq!(s.horizon(), 8760);
    assert_eq!(s.alpha, 0.74);
}

#[test]
fn nl_like_has_fixed_pumped_storage() {
    let s = load("nl_like.json");
    assert_eq!(s.hydro.len(), 1);
    assert_eq!(s.hydro[0].fixed_capacity, Some(500.0));
    assert!((s.demand.max() - 5000.0).abs() < 1e-9);
}

#[test]
fn no_storage_sweep_is_monotone_and_deterministic() {
    let s = load("nostorage.json");
    let alphas = alpha_grid(0.0, 1.0, 0.1).unwrap();
    let opts = SolverOptions::default();
    let serial = sweep_alpha(&s, &alphas, &opts, Some(1)).unwrap();
    let reversed: Vec<f64> = alphas.iter().rev().copied().collect();
    let parallel = sweep_alpha(&s, &reversed, &opts, Some(3));
    // Grids must be sorted; the reversed one is rejected.
    assert!(parallel.is_err());
    let parallel = sweep_alpha(&s, &alphas, &opts, Some(3)).unwrap();
    assert_eq!(serial, parallel);

    let last = serial.rows.last().unwrap();
    assert_eq!(last.status, PointStatus::Infeasible);
    let optimal: Vec<_> = serial.rows.iter().filter(|r| r.status == PointStatus::Optimal).collect();
    assert!(optimal.len() >= 9);
    for w in optimal.windows(2) {
        for (j, (a, b)) in w[0].capacities_mw.iter().zip(&w[1].capacities_mw).enumerate() {
            assert!(
                *b >= a - 1e-6 * a.max(1.0),
                "{} falls from {a} to {b} at alpha {}",
                serial.plants[j].0,
                w[1].alpha
            );
        }
        let (c0, c1) = (w[0].total_cost.unwrap(), w[1].total_cost.unwrap());
        assert!(c1 >= c0 - 1e-6 * c0.abs());
    }
}
