//! Optimality and feasibility residuals of a standard-form primal/dual pair,
//! computed from the problem data alone.

use serde::{Deserialize, Serialize};

use super::standard::StandardLp;
use super::LpSolution;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ResidualReport {
    /// `‖A·x − b‖∞`
    pub primal_residual: f64,
    /// Largest `|A_i·x − b_i| / max(1, max_j |a_ij|, |b_i|)`.
    pub primal_residual_scaled: f64,
    /// `min_j x_j` (negative means a lower-bound violation).
    pub min_x: f64,
    /// `max_j (x_j − u_j)` over finite upper bounds, floored at 0.
    pub upper_violation: f64,
    /// `min_j d_j` over columns strictly below their upper bound, `d = c − Aᵀy`.
    pub min_reduced_cost: f64,
    /// Largest sign violation of `d` given where each `x_j` sits in its range.
    pub dual_infeasibility: f64,
    /// `Σ_j x_j·max(d_j, 0) + (u_j − x_j)·max(−d_j, 0)`.
    pub complementarity_gap: f64,
    /// `|c·x − (b·y + Σ_j u_j·min(d_j, 0))|`.
    pub duality_gap: f64,
}

impl ResidualReport {
    /// True when every residual is within `tol`.
    pub fn within(&self, tol: f64) -> bool {
        self.primal_residual_scaled <= tol
            && self.min_x >= -tol
            && self.upper_violation <= tol
            && self.dual_infeasibility <= tol
            && self.complementarity_gap <= tol
    }
}

pub fn check_kkt(lp: &StandardLp, sol: &LpSolution) -> ResidualReport {
    let a = &lp.matrix;
    let (x, y) = (&sol.x, &sol.y);
    let mut row_act = vec![0.0; a.nrows()];
    let mut row_scale: Vec<f64> = lp.rhs.iter().map(|b| b.abs().max(1.0)).collect();
    for j in 0..a.ncols() {
        let (rows, vals) = a.col(j);
        for (&i, &v) in rows.iter().zip(vals) {
            row_act[i] += v * x[j];
            row_scale[i] = row_scale[i].max(v.abs());
        }
    }
    let mut primal_residual: f64 = 0.0;
    let mut primal_residual_scaled: f64 = 0.0;
    for i in 0..a.nrows() {
        let r = (row_act[i] - lp.rhs[i]).abs();
        primal_residual = primal_residual.max(r);
        primal_residual_scaled = primal_residual_scaled.max(r / row_scale[i]);
    }

    let tol = 1e-9;
    let mut min_x = f64::INFINITY;
    let mut upper_violation: f64 = 0.0;
    let mut min_reduced_cost = f64::INFINITY;
    let mut dual_infeasibility: f64 = 0.0;
    let mut complementarity_gap = 0.0;
    let mut primal_obj = 0.0;
    let mut dual_obj: f64 = lp.rhs.iter().zip(y).map(|(b, v)| b * v).sum();
    for j in 0..a.ncols() {
        let (rows, vals) = a.col(j);
        let d = lp.cost[j] - rows.iter().zip(vals).map(|(&i, &v)| v * y[i]).sum::<f64>();
        let u = lp.upper[j];
        min_x = min_x.min(x[j]);
        primal_obj += lp.cost[j] * x[j];
        if u.is_finite() {
            upper_violation = upper_violation.max(x[j] - u);
            dual_obj += u * d.min(0.0);
            complementarity_gap += (u - x[j]).abs() * (-d).max(0.0);
        } else if d < -tol {
            dual_obj = f64::NEG_INFINITY;
        }
        complementarity_gap += x[j].abs() * d.max(0.0);
        let below_upper = !u.is_finite() || x[j] < u - tol * (1.0 + u.abs());
        let above_lower = x[j] > tol;
        if below_upper {
            min_reduced_cost = min_reduced_cost.min(d);
            dual_infeasibility = dual_infeasibility.max(-d);
        }
        if above_lower {
            dual_infeasibility = dual_infeasibility.max(d);
        }
    }
    if min_x == f64::INFINITY {
        min_x = 0.0;
    }
    if min_reduced_cost == f64::INFINITY {
        min_reduced_cost = 0.0;
    }
    ResidualReport {
        primal_residual,
        primal_residual_scaled,
        min_x,
        upper_violation,
        min_reduced_cost,
        dual_infeasibility,
        complementarity_gap,
        duality_gap: (primal_obj - dual_obj).abs(),
    }
}
