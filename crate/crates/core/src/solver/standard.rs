//! Conversion of a general LP into `min c·x, A·x = b, 0 ≤ x ≤ u, b ≥ 0`
//! and the inverse maps for primal and dual values.

use thiserror::Error;

use super::sparse::CscMatrix;
use super::LpSolution;
use crate::formulation::LpProblem;

/// Tolerance for dropping empty rows and for presolve bound conflicts.
const PRESOLVE_TOL: f64 = 1e-9;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum StandardFormError {
    #[error("variable {var} is free in both directions and appears in no row")]
    UnboundedDomain { var: usize },
    #[error("invalid problem: {0}")]
    Invalid(String),
}

/// How an original variable is expressed through standard-form columns.
#[derive(Debug, Clone, Copy, PartialEq)]
enum VarMap {
    /// `x = lower + col`
    Shifted { col: usize, lower: f64 },
    /// `x = upper − col`
    Negated { col: usize, upper: f64 },
    /// `x = pos − neg`
    Split { pos: usize, neg: usize },
}

/// Where an original row went.
#[derive(Debug, Clone, Copy, PartialEq)]
enum RowMap {
    /// Standard row `index`, multiplied by `sign` (±1).
    Row { index: usize, sign: f64 },
    /// Single-variable row folded into the bounds of `var` with coefficient `coef`.
    Bound { var: usize, coef: f64 },
    /// No nonzero coefficients and satisfied.
    Dropped,
}

/// Standard-form LP. Columns are the mapped original variables followed by
/// one slack per kept `≤` row.
#[derive(Debug, Clone, PartialEq)]
pub struct StandardLp {
    pub matrix: CscMatrix,
    pub rhs: Vec<f64>,
    pub cost: Vec<f64>,
    /// Upper bound per column; `f64::INFINITY` when absent.
    pub upper: Vec<f64>,
    /// Constant added to `cost·x` to obtain the original objective.
    pub cost_offset: f64,
    /// Set when presolve alone proves the problem infeasible.
    pub infeasible: Option<String>,
    orig_vars: usize,
    num_eq: usize,
    var_map: Vec<VarMap>,
    row_map: Vec<RowMap>,
    /// Per original variable: the rows that supplied its lower and upper bound.
    bound_src: Vec<(Option<usize>, Option<usize>)>,
}

impl StandardLp {
    pub fn num_rows(&self) -> usize {
        self.matrix.nrows()
    }

    pub fn num_cols(&self) -> usize {
        self.matrix.ncols()
    }

    pub fn original_vars(&self) -> usize {
        self.orig_vars
    }

    /// Maps a standard-form point to the original variables.
    pub fn recover_primal(&self, x: &[f64]) -> Vec<f64> {
        self.var_map
            .iter()
            .map(|m| match *m {
                VarMap::Shifted { col, lower } => lower + x[col],
                VarMap::Negated { col, upper } => upper - x[col],
                VarMap::Split { pos, neg } => x[pos] - x[neg],
            })
            .collect()
    }

    /// Maps an original point into standard form, filling slacks from the
    /// row activities. Inverse of [`recover_primal`](Self::recover_primal) for
    /// points within the original bounds.
    pub fn to_standard_point(&self, lp: &LpProblem, x: &[f64]) -> Vec<f64> {
        let mut out = vec![0.0; self.num_cols()];
        for (j, m) in self.var_map.iter().enumerate() {
            match *m {
                VarMap::Shifted { col, lower } => out[col] = x[j] - lower,
                VarMap::Negated { col, upper } => out[col] = upper - x[j],
                VarMap::Split { pos, neg } => {
                    out[pos] = x[j].max(0.0);
                    out[neg] = (-x[j]).max(0.0);
                }
            }
        }
        let first_slack = self.num_cols() - (self.num_rows() - self.num_eq);
        let mut slack = first_slack;
        for (k, (row, is_ineq)) in lp.rows().enumerate() {
            if let RowMap::Row { .. } = self.row_map[k] {
                if is_ineq {
                    out[slack] = row.rhs - row.activity(x);
                    slack += 1;
                }
            }
        }
        out
    }

    /// Maps standard-form duals to one multiplier per original row
    /// (equality rows first). Multipliers of `≤` rows are `≤ 0`.
    pub fn recover_duals(&self, x: &[f64], y: &[f64]) -> Vec<f64> {
        let orig_x = self.recover_primal(x);
        let reduced = self.reduced_costs(y);
        self.row_map
            .iter()
            .enumerate()
            .map(|(k, m)| match *m {
                RowMap::Row { index, sign } => sign * y[index],
                RowMap::Dropped => 0.0,
                RowMap::Bound { var, coef } => {
                    let (lo_src, up_src) = self.bound_src[var];
                    let d = match self.var_map[var] {
                        VarMap::Shifted { col, .. } => reduced[col],
                        VarMap::Negated { col, .. } => -reduced[col],
                        VarMap::Split { pos, .. } => reduced[pos],
                    };
                    let bound = self.bound_value(var);
                    let at_lo = lo_src == Some(k) && (orig_x[var] - bound.0).abs() <= 1e-9 * (1.0 + bound.0.abs());
                    let at_up = up_src == Some(k) && (orig_x[var] - bound.1).abs() <= 1e-9 * (1.0 + bound.1.abs());
                    if at_lo || at_up {
                        d / coef
                    } else {
                        0.0
                    }
                }
            })
            .collect()
    }

    fn bound_value(&self, var: usize) -> (f64, f64) {
        match self.var_map[var] {
            VarMap::Shifted { col, lower } => (lower, lower + self.upper[col]),
            VarMap::Negated { col, upper } => (upper - self.upper[col], upper),
            VarMap::Split { .. } => (f64::NEG_INFINITY, f64::INFINITY),
        }
    }

    /// `c − Aᵀ·y` for every standard column.
    pub fn reduced_costs(&self, y: &[f64]) -> Vec<f64> {
        (0..self.num_cols())
            .map(|j| self.cost[j] - self.matrix.col_dot(j, y))
            .collect()
    }

    /// Expresses a standard-form solution in the original variables and rows.
    pub fn recover(&self, sol: &LpSolution) -> LpSolution {
        let mut out = sol.clone();
        out.x = self.recover_primal(&sol.x);
        out.y = self.recover_duals(&sol.x, &sol.y);
        out.objective = sol.objective + self.cost_offset;
        out.ray = sol.ray.as_ref().map(|r| {
            self.var_map
                .iter()
                .map(|m| match *m {
                    VarMap::Shifted { col, .. } => r[col],
                    VarMap::Negated { col, .. } => -r[col],
                    VarMap::Split { pos, neg } => r[pos] - r[neg],
                })
                .collect()
        });
        out
    }
}

/// Converts `lp` into standard form.
///
/// Single-variable rows become bounds, bounded variables are shifted to a
/// zero lower bound, variables bounded only above are negated, free
/// variables are split, and every kept `≤` row gains a slack. Rows are
/// negated where needed so that `b ≥ 0`.
pub fn to_standard_form(lp: &LpProblem) -> Result<StandardLp, StandardFormError> {
    lp.check().map_err(StandardFormError::Invalid)?;
    let n = lp.num_vars;
    let mut lower = lp.lower.clone();
    let mut upper = lp.upper.clone();
    let mut bound_src: Vec<(Option<usize>, Option<usize>)> = vec![(None, None); n];
    let mut infeasible: Option<String> = None;
    let mut row_map = Vec::with_capacity(lp.num_rows());
    let mut used = vec![false; n];

    // Merge duplicate coefficients and classify rows.
    let rows: Vec<(Vec<(usize, f64)>, f64, bool)> = lp
        .rows()
        .map(|(row, is_ineq)| {
            let mut c = row.coeffs.clone();
            c.sort_by_key(|e| e.0);
            let mut merged: Vec<(usize, f64)> = Vec::with_capacity(c.len());
            for (j, a) in c {
                match merged.last_mut() {
                    Some(last) if last.0 == j => last.1 += a,
                    _ => merged.push((j, a)),
                }
            }
            merged.retain(|e| e.1 != 0.0);
            (merged, row.rhs, is_ineq)
        })
        .collect();

    let mut kept: Vec<usize> = Vec::new();
    for (k, (coeffs, rhs, is_ineq)) in rows.iter().enumerate() {
        match coeffs.len() {
            0 => {
                let ok = if *is_ineq {
                    *rhs >= -PRESOLVE_TOL
                } else {
                    rhs.abs() <= PRESOLVE_TOL
                };
                if !ok && infeasible.is_none() {
                    infeasible = Some(format!("row {k} has no coefficients but rhs {rhs}"));
                }
                row_map.push(RowMap::Dropped);
            }
            1 => {
                let (j, a) = coeffs[0];
                let v = rhs / a;
                used[j] = true;
                let tighten_up = !is_ineq || a > 0.0;
                let tighten_lo = !is_ineq || a < 0.0;
                if tighten_up && v < upper[j] {
                    upper[j] = v;
                    bound_src[j].1 = Some(k);
                }
                if tighten_lo && v > lower[j] {
                    lower[j] = v;
                    bound_src[j].0 = Some(k);
                }
                // An equality whose value coincides with an existing bound still owns it.
                if !is_ineq {
                    bound_src[j] = (Some(k), Some(k));
                }
                row_map.push(RowMap::Bound { var: j, coef: a });
            }
            _ => {
                for &(j, _) in coeffs {
                    used[j] = true;
                }
                row_map.push(RowMap::Row {
                    index: kept.len(),
                    sign: 1.0,
                });
                kept.push(k);
            }
        }
    }
    for j in 0..n {
        if lower[j] > upper[j] {
            let gap = lower[j] - upper[j];
            if gap <= PRESOLVE_TOL * (1.0 + lower[j].abs().max(upper[j].abs())) {
                upper[j] = lower[j];
            } else if infeasible.is_none() {
                infeasible = Some(format!(
                    "variable {j} has lower bound {} above upper bound {}",
                    lower[j], upper[j]
                ));
            }
        }
    }

    // Columns for the original variables.
    let mut var_map = Vec::with_capacity(n);
    let mut col_upper = Vec::with_capacity(n);
    let mut cost = Vec::with_capacity(n);
    let mut cost_offset = 0.0;
    for j in 0..n {
        let c = lp.objective[j];
        if lower[j].is_finite() {
            var_map.push(VarMap::Shifted {
                col: col_upper.len(),
                lower: lower[j],
            });
            col_upper.push((upper[j] - lower[j]).max(0.0));
            cost.push(c);
            cost_offset += c * lower[j];
        } else if upper[j].is_finite() {
            var_map.push(VarMap::Negated {
                col: col_upper.len(),
                upper: upper[j],
            });
            col_upper.push(f64::INFINITY);
            cost.push(-c);
            cost_offset += c * upper[j];
        } else {
            if !used[j] {
                return Err(StandardFormError::UnboundedDomain { var: j });
            }
            let pos = col_upper.len();
            var_map.push(VarMap::Split { pos, neg: pos + 1 });
            col_upper.extend([f64::INFINITY, f64::INFINITY]);
            cost.extend([c, -c]);
        }
    }

    // Kept rows: substitute the variable maps, add slacks, normalize signs.
    let m = kept.len();
    let num_eq = kept.iter().filter(|&&k| !rows[k].2).count();
    let num_slacks = m - num_eq;
    let ncols = col_upper.len() + num_slacks;
    let mut triplets = Vec::new();
    let mut rhs = Vec::with_capacity(m);
    let mut slack_col = col_upper.len();
    // Equality rows occupy the first indices, matching LpProblem::rows order.
    for (i, &k) in kept.iter().enumerate() {
        let (coeffs, r, is_ineq) = &rows[k];
        let mut b = *r;
        let mut entries: Vec<(usize, f64)> = Vec::with_capacity(coeffs.len() + 1);
        for &(j, a) in coeffs {
            match var_map[j] {
                VarMap::Shifted { col, lower } => {
                    b -= a * lower;
                    entries.push((col, a));
                }
                VarMap::Negated { col, upper } => {
                    b -= a * upper;
                    entries.push((col, -a));
                }
                VarMap::Split { pos, neg } => {
                    entries.push((pos, a));
                    entries.push((neg, -a));
                }
            }
        }
        if *is_ineq {
            entries.push((slack_col, 1.0));
            slack_col += 1;
        }
        let sign = if b < 0.0 { -1.0 } else { 1.0 };
        for (col, a) in entries {
            triplets.push((i, col, sign * a));
        }
        rhs.push(sign * b);
        if sign < 0.0 {
            row_map[k] = RowMap::Row { index: i, sign };
        }
    }
    col_upper.extend(std::iter::repeat(f64::INFINITY).take(num_slacks));
    cost.extend(std::iter::repeat(0.0).take(num_slacks));

    Ok(StandardLp {
        matrix: CscMatrix::from_triplets(m, ncols, &triplets),
        rhs,
        cost,
        upper: col_upper,
        cost_offset,
        infeasible,
        orig_vars: n,
        num_eq,
        var_map,
        row_map,
        bound_src,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::formulation::{LpRow, RowFamily};
    use proptest::prelude::*;

    fn row(coeffs: Vec<(usize, f64)>, rhs: f64) -> LpRow {
        LpRow::new(coeffs, rhs, RowFamily::Generic)
    }

    #[test]
    fn inequality_gains_slack() {
        // x + y ≤ 2 keeps a row; the slack is the last column.
        let mut lp = LpProblem::new(2);
        lp.ineq_rows.push(row(vec![(0, 1.0), (1, 1.0)], 2.0));
        let s = to_standard_form(&lp).unwrap();
        assert_eq!(s.num_rows(), 1);
        assert_eq!(s.num_cols(), 3);
        assert_eq!(s.matrix.to_dense(), vec![vec![1.0, 1.0, 1.0]]);
        assert_eq!(s.rhs, vec![2.0]);
    }

    #[test]
    fn single_variable_row_becomes_bound() {
        // x ≤ 2 is held as the column bound 0 ≤ x ≤ 2.
        let mut lp = LpProblem::new(1);
        lp.ineq_rows.push(row(vec![(0, 1.0)], 2.0));
        let s = to_standard_form(&lp).unwrap();
        assert_eq!(s.num_rows(), 0);
        assert_eq!(s.upper, vec![2.0]);
    }

    #[test]
    fn equality_only_unchanged() {
        let mut lp = LpProblem::new(3);
        lp.objective = vec![1.0, 2.0, 3.0];
        lp.eq_rows.push(row(vec![(0, 1.0), (1, 2.0)], 4.0));
        lp.eq_rows.push(row(vec![(1, 1.0), (2, -1.0)], 1.0));
        let s = to_standard_form(&lp).unwrap();
        assert_eq!(
            s.matrix.to_dense(),
            vec![vec![1.0, 2.0, 0.0], vec![0.0, 1.0, -1.0]]
        );
        assert_eq!(s.rhs, vec![4.0, 1.0]);
        assert_eq!(s.cost, vec![1.0, 2.0, 3.0]);
        assert_eq!(s.cost_offset, 0.0);
    }

    #[test]
    fn negative_rhs_flips_row() {
        let mut lp = LpProblem::new(2);
        lp.eq_rows.push(row(vec![(0, 1.0), (1, 1.0)], -1.0));
        let s = to_standard_form(&lp).unwrap();
        assert_eq!(s.rhs, vec![1.0]);
        assert_eq!(s.matrix.to_dense(), vec![vec![-1.0, -1.0]]);
    }

    #[test]
    fn free_unused_variable_rejected() {
        let mut lp = LpProblem::new(2);
        lp.lower[1] = f64::NEG_INFINITY;
        lp.eq_rows.push(row(vec![(0, 1.0)], 1.0));
        assert_eq!(
            to_standard_form(&lp),
            Err(StandardFormError::UnboundedDomain { var: 1 })
        );
    }

    #[test]
    fn conflicting_bounds_flagged() {
        let mut lp = LpProblem::new(1);
        lp.ineq_rows.push(row(vec![(0, 1.0)], -1.0));
        let s = to_standard_form(&lp).unwrap();
        assert!(s.infeasible.is_some());
    }

    #[test]
    fn shifted_negated_and_split_columns() {
        // x0 ∈ [1, 3], x1 ≤ 5 (no lower), x2 free.
        let mut lp = LpProblem::new(3);
        lp.objective = vec![1.0, 1.0, 1.0];
        lp.lower = vec![1.0, f64::NEG_INFINITY, f64::NEG_INFINITY];
        lp.upper = vec![3.0, 5.0, f64::INFINITY];
        lp.eq_rows.push(row(vec![(0, 1.0), (1, 1.0), (2, 1.0)], 0.0));
        let s = to_standard_form(&lp).unwrap();
        assert_eq!(s.num_cols(), 4);
        assert_eq!(s.upper[0], 2.0);
        // x0 = 1 + c0, x1 = 5 − c1, x2 = c2 − c3: c0 − c1 + c2 − c3 = −6 → negated.
        assert_eq!(s.rhs, vec![6.0]);
        assert_eq!(s.matrix.to_dense(), vec![vec![-1.0, 1.0, -1.0, 1.0]]);
        assert_eq!(s.cost_offset, 6.0);
        let x = s.recover_primal(&[0.5, 2.0, 0.0, 4.5]);
        assert_eq!(x, vec![1.5, 3.0, -4.5]);
    }

    fn random_lp(seed: u64) -> (LpProblem, Vec<f64>) {
        use rand::{Rng, SeedableRng};
        let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(seed);
        let n = rng.gen_range(2..8);
        let mut lp = LpProblem::new(n);
        let x: Vec<f64> = (0..n).map(|_| rng.gen_range(-5.0..5.0)).collect();
        for j in 0..n {
            match rng.gen_range(0..4) {
                0 => lp.lower[j] = x[j] - rng.gen_range(0.0..2.0),
                1 => {
                    lp.lower[j] = f64::NEG_INFINITY;
                    lp.upper[j] = x[j] + rng.gen_range(0.0..2.0);
                }
                2 => lp.lower[j] = f64::NEG_INFINITY,
                _ => {
                    lp.lower[j] = x[j] - 1.0;
                    lp.upper[j] = x[j] + 1.0;
                }
            }
            lp.objective[j] = rng.gen_range(-1.0..1.0);
        }
        for _ in 0..rng.gen_range(1..6) {
            let mut coeffs: Vec<(usize, f64)> = Vec::new();
            for j in 0..n {
                if rng.gen_bool(0.6) {
                    coeffs.push((j, rng.gen_range(-3.0..3.0)));
                }
            }
            let act: f64 = coeffs.iter().map(|&(j, a)| a * x[j]).sum();
            if rng.gen_bool(0.5) {
                lp.eq_rows.push(row(coeffs, act));
            } else {
                lp.ineq_rows.push(row(coeffs, act + rng.gen_range(0.0..1.0)));
            }
        }
        // Every variable in some row, so none is free and unused.
        lp.eq_rows
            .push(row((0..n).map(|j| (j, 1.0)).collect(), x.iter().sum()));
        (lp, x)
    }

    proptest! {
        #[test]
        fn round_trip_preserves_point_and_residuals(seed in 0u64..10_000) {
            let (lp, x) = random_lp(seed);
            let s = to_standard_form(&lp).unwrap();
            prop_assert!(s.rhs.iter().all(|&b| b >= 0.0));
            let xs = s.to_standard_point(&lp, &x);
            let back = s.recover_primal(&xs);
            for (a, b) in back.iter().zip(&x) {
                prop_assert!((a - b).abs() <= 1e-12 * (1.0 + b.abs()));
            }
            // Standard residuals equal original ones row by row.
            let ax = s.matrix.mul_vec(&xs);
            let std_res: f64 = ax.iter().zip(&s.rhs).map(|(a, b)| (a - b).abs()).fold(0.0, f64::max);
            let orig_res = lp.eq_rows.iter().map(|r| (r.activity(&back) - r.rhs).abs())
                .chain(lp.ineq_rows.iter().map(|r| (r.activity(&back) - r.rhs).max(0.0)))
                .fold(0.0, f64::max);
            prop_assert!(std_res <= 1e-12 * 100.0);
            prop_assert!(orig_res <= 1e-12 * 100.0);
            prop_assert!((s.cost.iter().zip(&xs).map(|(c, v)| c * v).sum::<f64>() + s.cost_offset
                - lp.objective_value(&back)).abs() <= 1e-12 * 100.0);
        }
    }
}
