//! Classic small LPs with known optima.

use ressize_core::formulation::{LpProblem, LpRow, RowFamily};

fn row(coeffs: Vec<(usize, f64)>, rhs: f64) -> LpRow {
    LpRow::new(coeffs, rhs, RowFamily::Generic)
}

/// Beale's example, which cycles under the textbook largest-coefficient rule.
pub fn beale() -> LpProblem {
    let mut lp = LpProblem::new(4);
    lp.objective = vec![-0.75, 20.0, -0.5, 6.0];
    lp.ineq_rows.push(row(vec![(0, 0.25), (1, -8.0), (2, -1.0), (3, 9.0)], 0.0));
    lp.ineq_rows.push(row(vec![(0, 0.5), (1, -12.0), (2, -0.5), (3, 3.0)], 0.0));
    lp.ineq_rows.push(row(vec![(2, 1.0), (3, 0.0)], 1.0));
    lp
}

/// Kuhn's example, also cycling under the largest-coefficient rule. The
/// objective equals the third row, so the optimum is −2.
pub fn kuhn() -> LpProblem {
    let mut lp = LpProblem::new(4);
    lp.objective = vec![-2.0, -3.0, 1.0, 12.0];
    lp.ineq_rows.push(row(vec![(0, -2.0), (1, -9.0), (2, 1.0), (3, 9.0)], 0.0));
    lp.ineq_rows.push(row(vec![(0, 1.0 / 3.0), (1, 1.0), (2, -1.0 / 3.0), (3, -2.0)], 0.0));
    lp.ineq_rows.push(row(vec![(0, 2.0), (1, 3.0), (2, -1.0), (3, -12.0)], 2.0));
    lp
}

/// Klee–Minty cube: max Σ 2^(n−j)·x_j s.t. 2·Σ_{j<i} 2^(i−j)·x_j + x_i ≤ 5^i.
pub fn klee_minty(n: usize) -> LpProblem {
    let mut lp = LpProblem::new(n);
    for j in 0..n {
        lp.objective[j] = -(2f64.powi((n - 1 - j) as i32));
    }
    for i in 0..n {
        let mut coeffs: Vec<(usize, f64)> = (0..i)
            .map(|j| (j, 2.0 * 2f64.powi((i - j) as i32)))
            .collect();
        coeffs.push((i, 1.0));
        lp.ineq_rows.push(row(coeffs, 5f64.powi(i as i32 + 1)));
    }
    lp
}
