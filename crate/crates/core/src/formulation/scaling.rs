use super::problem::LpProblem;

/// Geometric-mean equilibration passes.
const PASSES: usize = 20;

/// Power-of-two factors applied by [`scale_problem`]. Scaled variables are
/// `x' = x / col`, scaled rows are `row·(Σ a·x ≤ b)`, and the scaled
/// objective is `objective·c·x`. Powers of two make every map exact.
#[derive(Debug, Clone, PartialEq)]
pub struct ScalingRecord {
    /// One factor per row, equality rows first.
    pub row: Vec<f64>,
    pub col: Vec<f64>,
    pub objective: f64,
}

impl ScalingRecord {
    pub fn identity(lp: &LpProblem) -> Self {
        Self {
            row: vec![1.0; lp.num_rows()],
            col: vec![1.0; lp.num_vars],
            objective: 1.0,
        }
    }

    pub fn scale_primal(&self, x: &[f64]) -> Vec<f64> {
        x.iter().zip(&self.col).map(|(v, s)| v / s).collect()
    }

    pub fn unscale_primal(&self, x: &[f64]) -> Vec<f64> {
        x.iter().zip(&self.col).map(|(v, s)| v * s).collect()
    }

    pub fn unscale_duals(&self, y: &[f64]) -> Vec<f64> {
        y.iter()
            .zip(&self.row)
            .map(|(v, r)| v * r / self.objective)
            .collect()
    }

    pub fn unscale_objective(&self, value: f64) -> f64 {
        value / self.objective
    }
}

fn pow2(v: f64) -> f64 {
    if v.is_finite() && v > 0.0 {
        2f64.powi(v.log2().round() as i32)
    } else {
        1.0
    }
}

/// Alternating column/row geometric-mean equilibration of the constraint
/// matrix, followed by an objective factor bringing the largest cost
/// coefficient near 1. Factors are rounded to powers of two.
pub fn scale_problem(lp: &LpProblem) -> (LpProblem, ScalingRecord) {
    let n = lp.num_vars;
    let rows: Vec<&[(usize, f64)]> = lp.rows().map(|(r, _)| r.coeffs.as_slice()).collect();
    let m = rows.len();
    let mut row = vec![1.0f64; m];
    let mut col = vec![1.0f64; n];

    for _ in 0..PASSES {
        let mut lo = vec![f64::INFINITY; n];
        let mut hi = vec![0.0f64; n];
        for (i, coeffs) in rows.iter().enumerate() {
            for &(j, a) in coeffs.iter() {
                let v = (a * row[i]).abs();
                if v > 0.0 {
                    lo[j] = lo[j].min(v);
                    hi[j] = hi[j].max(v);
                }
            }
        }
        let mut change: f64 = 0.0;
        for j in 0..n {
            if hi[j] > 0.0 {
                let s = 1.0 / (lo[j] * hi[j]).sqrt();
                change = change.max((s / col[j]).ln().abs());
                col[j] = s;
            }
        }
        for (i, coeffs) in rows.iter().enumerate() {
            let (mut lo, mut hi) = (f64::INFINITY, 0.0f64);
            for &(j, a) in coeffs.iter() {
                let v = (a * col[j]).abs();
                if v > 0.0 {
                    lo = lo.min(v);
                    hi = hi.max(v);
                }
            }
            if hi > 0.0 {
                let r = 1.0 / (lo * hi).sqrt();
                change = change.max((r / row[i]).ln().abs());
                row[i] = r;
            }
        }
        if change < 0.01 {
            break;
        }
    }
    row.iter_mut().for_each(|v| *v = pow2(*v));
    col.iter_mut().for_each(|v| *v = pow2(*v));

    let cmax = lp
        .objective
        .iter()
        .zip(&col)
        .map(|(c, s)| (c * s).abs())
        .fold(0.0, f64::max);
    let objective = if cmax > 0.0 { pow2(1.0 / cmax) } else { 1.0 };

    let mut out = lp.clone();
    for (j, c) in out.objective.iter_mut().enumerate() {
        *c *= col[j] * objective;
    }
    for j in 0..n {
        out.lower[j] /= col[j];
        out.upper[j] /= col[j];
    }
    for (i, r) in out.eq_rows.iter_mut().chain(out.ineq_rows.iter_mut()).enumerate() {
        for (j, a) in r.coeffs.iter_mut() {
            *a *= row[i] * col[*j];
        }
        r.rhs *= row[i];
    }
    (out, ScalingRecord { row, col, objective })
}
