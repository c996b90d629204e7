//! Two-phase bounded-variable revised simplex.
//!
//! Every row owns an artificial column fixed to `[0, 0]`. Phase I minimizes
//! the sum of bound violations of the basic variables (a composite phase I),
//! so a basis that drifts out of feasibility during phase II is repaired
//! without restarting. Pricing is Dantzig's rule; after a run of degenerate
//! pivots the solver switches to Bland's rule until the objective moves.

use log::debug;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use super::lu::{ColRef, LuFactors};
use super::standard::StandardLp;

const NONE: usize = usize::MAX;
/// Smallest |α_i| accepted as a pivot in the ratio test.
const PIVOT_TOL: f64 = 1e-9;

#[derive(Debug, Clone, PartialEq)]
pub struct SolverOptions {
    /// Primal feasibility tolerance.
    pub feas_tol: f64,
    /// Reduced-cost tolerance.
    pub opt_tol: f64,
    /// Pivot limit; `None` means `50·(rows + cols)`.
    pub max_iters: Option<usize>,
    /// Eta updates between refactorizations.
    pub refactor_interval: usize,
    /// Consecutive degenerate pivots before switching to Bland's rule.
    pub stall_window: usize,
    /// Emit one debug log line per pivot.
    pub trace: bool,
    /// Keep an [`IterateRecord`] per pivot in the solution.
    pub record_iterates: bool,
}

impl Default for SolverOptions {
    fn default() -> Self {
        Self {
            feas_tol: 1e-7,
            opt_tol: 1e-9,
            max_iters: None,
            refactor_interval: 100,
            stall_window: 50,
            trace: false,
            record_iterates: false,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum LpStatus {
    Optimal,
    Infeasible,
    Unbounded,
}

/// One pivot of the solve.
#[derive(Debug, Clone, PartialEq)]
pub struct IterateRecord {
    pub phase: u8,
    pub entering: usize,
    /// Column that left the basis; `None` for a bound flip.
    pub leaving: Option<usize>,
    pub bland: bool,
    /// Phase objective after the pivot.
    pub objective: f64,
    /// Lagrangian lower bound `b·y + Σ min(0, d_j)·u_j` from the pricing
    /// duals; `-∞` in phase I or when a column with unbounded range prices out.
    pub dual_bound: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct LpSolution {
    pub status: LpStatus,
    /// Primal point (standard-form columns, or original variables after recovery).
    pub x: Vec<f64>,
    /// One multiplier per row.
    pub y: Vec<f64>,
    pub objective: f64,
    pub iterations: usize,
    pub phase_one_iterations: usize,
    /// `‖A·x − b‖∞` over the structural columns.
    pub primal_residual: f64,
    /// Largest reduced-cost sign violation.
    pub dual_residual: f64,
    /// Sum of bound violations when phase I stopped (infeasibility certificate).
    pub infeasibility: f64,
    /// Improving direction when unbounded.
    pub ray: Option<Vec<f64>>,
    pub iterates: Vec<IterateRecord>,
}

#[derive(Debug, Clone, PartialEq, Error)]
pub enum SolverError {
    #[error("iteration limit {iterations} reached (phase {phase})")]
    IterationLimit {
        iterations: usize,
        phase: u8,
        /// Last iterate, in standard-form columns.
        best_x: Vec<f64>,
        objective: f64,
    },
    #[error("numerical breakdown: {0}")]
    NumericalBreakdown(String),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
enum State {
    Basic,
    Lower,
    Upper,
}

struct Step {
    theta: f64,
    /// Basis position leaving and whether it leaves at its upper bound.
    leave: Option<(usize, bool)>,
}

struct Engine<'a> {
    lp: &'a StandardLp,
    opts: &'a SolverOptions,
    m: usize,
    n: usize,
    cost: Vec<f64>,
    upper: Vec<f64>,
    x: Vec<f64>,
    state: Vec<State>,
    basis: Vec<usize>,
    lu: LuFactors,
    unit_idx: Vec<usize>,
    ones: Vec<f64>,
    y: Vec<f64>,
    alpha: Vec<f64>,
    phase_cost: Vec<f64>,
}

/// Solves a standard-form LP.
pub fn solve(lp: &StandardLp, opts: &SolverOptions) -> Result<LpSolution, SolverError> {
    let m = lp.num_rows();
    let n = lp.num_cols();
    if let Some(reason) = &lp.infeasible {
        debug!("presolve infeasible: {reason}");
        return Ok(LpSolution {
            status: LpStatus::Infeasible,
            x: vec![0.0; n],
            y: vec![0.0; m],
            objective: f64::NAN,
            iterations: 0,
            phase_one_iterations: 0,
            primal_residual: f64::INFINITY,
            dual_residual: 0.0,
            infeasibility: f64::INFINITY,
            ray: None,
            iterates: Vec::new(),
        });
    }
    let mut e = Engine::new(lp, opts)?;
    e.run()
}

impl<'a> Engine<'a> {
    fn new(lp: &'a StandardLp, opts: &'a SolverOptions) -> Result<Self, SolverError> {
        let m = lp.num_rows();
        let n = lp.num_cols();
        let mut cost = lp.cost.clone();
        cost.extend(std::iter::repeat(0.0).take(m));
        let mut upper = lp.upper.clone();
        upper.extend(std::iter::repeat(0.0).take(m));
        let mut e = Self {
            lp,
            opts,
            m,
            n,
            cost,
            upper,
            x: vec![0.0; n + m],
            state: vec![State::Lower; n + m],
            basis: vec![NONE; m],
            lu: LuFactors::factorize(0, &[]).expect("empty factorization"),
            unit_idx: (0..m).collect(),
            ones: vec![1.0; m],
            y: vec![0.0; m],
            alpha: vec![0.0; m],
            phase_cost: vec![0.0; m],
        };
        e.crash();
        e.refactor()?;
        e.compute_primal();
        Ok(e)
    }

    fn column(&self, j: usize) -> ColRef<'_> {
        if j < self.n {
            self.lp.matrix.col(j)
        } else {
            let r = j - self.n;
            (&self.unit_idx[r..r + 1], &self.ones[r..r + 1])
        }
    }

    /// Initial basis: a column singleton per row when its implied value lies
    /// within bounds, the row's artificial otherwise.
    fn crash(&mut self) {
        let (m, n) = (self.m, self.n);
        for j in (0..n).rev() {
            let (rows, vals) = self.lp.matrix.col(j);
            if rows.len() != 1 {
                continue;
            }
            let i = rows[0];
            if self.basis[i] != NONE {
                continue;
            }
            let v = self.lp.rhs[i] / vals[0];
            if v >= 0.0 && v <= self.upper[j] {
                self.basis[i] = j;
                self.state[j] = State::Basic;
            }
        }
        for i in 0..m {
            if self.basis[i] == NONE {
                self.basis[i] = n + i;
                self.state[n + i] = State::Basic;
            }
        }
    }

    fn refactor(&mut self) -> Result<(), SolverError> {
        let started = std::time::Instant::now();
        for attempt in 0..3 {
            let cols: Vec<ColRef<'_>> = self.basis.iter().map(|&j| self.column(j)).collect();
            match LuFactors::factorize(self.m, &cols) {
                Ok(lu) => {
                    debug!(
                        "refactor: {} rows, {} factor nonzeros, {:.3} s",
                        self.m,
                        lu.fill(),
                        started.elapsed().as_secs_f64()
                    );
                    self.lu = lu;
                    return Ok(());
                }
                Err(sing) => {
                    debug!(
                        "singular basis ({} positions), repair attempt {attempt}",
                        sing.positions.len()
                    );
                    for (&pos, &row) in sing.positions.iter().zip(&sing.rows) {
                        let out = self.basis[pos];
                        let (st, val) = if self.upper[out].is_finite()
                            && self.x[out] > 0.5 * self.upper[out]
                        {
                            (State::Upper, self.upper[out])
                        } else {
                            (State::Lower, 0.0)
                        };
                        self.state[out] = st;
                        self.x[out] = val;
                        let art = self.n + row;
                        self.basis[pos] = art;
                        self.state[art] = State::Basic;
                    }
                }
            }
        }
        Err(SolverError::NumericalBreakdown(
            "basis remains singular after repair".into(),
        ))
    }

    /// Recomputes the basic values from the nonbasic ones.
    fn compute_primal(&mut self) {
        let mut r = self.lp.rhs.clone();
        for j in 0..self.n + self.m {
            if self.state[j] != State::Basic && self.x[j] != 0.0 {
                let (rows, vals) = self.column(j);
                for (&i, &a) in rows.iter().zip(vals) {
                    r[i] -= a * self.x[j];
                }
            }
        }
        let mut xb = vec![0.0; self.m];
        self.lu.ftran(&mut r, &mut xb);
        for (p, &j) in self.basis.iter().enumerate() {
            self.x[j] = xb[p];
        }
    }

    /// Phase-I cost of a basic value: −1 below zero, +1 above its upper bound.
    fn violation_cost(&self, j: usize) -> f64 {
        let tol = self.opts.feas_tol;
        if self.x[j] < -tol {
            -1.0
        } else if self.x[j] > self.upper[j] + tol {
            1.0
        } else {
            0.0
        }
    }

    fn infeasibility(&self) -> f64 {
        self.basis
            .iter()
            .map(|&j| (-self.x[j]).max(0.0) + (self.x[j] - self.upper[j]).max(0.0))
            .sum()
    }

    fn phase_objective(&self, phase: u8) -> f64 {
        if phase == 1 {
            self.infeasibility()
        } else {
            (0..self.n).map(|j| self.cost[j] * self.x[j]).sum()
        }
    }

    /// Pricing duals for the given phase; fills `self.y`.
    fn compute_duals(&mut self, phase: u8) {
        for p in 0..self.m {
            let j = self.basis[p];
            self.phase_cost[p] = if phase == 1 {
                self.violation_cost(j)
            } else {
                self.cost[j]
            };
        }
        let mut c = self.phase_cost.clone();
        self.lu.btran(&mut c, &mut self.y);
    }

    fn reduced_cost(&self, j: usize, phase: u8) -> f64 {
        let c = if phase == 1 { 0.0 } else { self.cost[j] };
        let (rows, vals) = self.column(j);
        c - rows
            .iter()
            .zip(vals)
            .map(|(&i, &a)| a * self.y[i])
            .sum::<f64>()
    }

    /// Entering column and its reduced cost.
    fn price(&self, phase: u8, bland: bool) -> Option<(usize, f64)> {
        let tol = self.opts.opt_tol;
        let mut best: Option<(usize, f64)> = None;
        for j in 0..self.n + self.m {
            let st = self.state[j];
            if st == State::Basic || self.upper[j] == 0.0 {
                continue;
            }
            let d = self.reduced_cost(j, phase);
            let eligible = match st {
                State::Lower => d < -tol,
                State::Upper => d > tol,
                State::Basic => false,
            };
            if !eligible {
                continue;
            }
            if bland {
                return Some((j, d));
            }
            if best.map_or(true, |(_, bd)| d.abs() > bd.abs()) {
                best = Some((j, d));
            }
        }
        best
    }

    /// Breakpoint of basic position `p` when the entering variable moves by
    /// `θ` and the basic one changes at rate `delta`: (exact, relaxed, to_upper).
    fn breakpoint(&self, p: usize, delta: f64, phase: u8) -> Option<(f64, f64, bool)> {
        let j = self.basis[p];
        let (xv, up, tol) = (self.x[j], self.upper[j], self.opts.feas_tol);
        let rate = delta.abs();
        if delta < 0.0 {
            if phase == 1 && xv > up + tol {
                Some(((xv - up) / rate, (xv - up + tol) / rate, true))
            } else if phase == 2 || xv >= -tol {
                Some((xv.max(0.0) / rate, (xv + tol).max(0.0) / rate, false))
            } else {
                None
            }
        } else if phase == 1 && xv < -tol {
            Some((-xv / rate, (-xv + tol) / rate, false))
        } else if up.is_finite() && (phase == 2 || xv <= up + tol) {
            Some(((up - xv).max(0.0) / rate, (up - xv + tol).max(0.0) / rate, true))
        } else {
            None
        }
    }

    /// Ratio test along `alpha` for entering column `q` moving in direction `dir`.
    fn ratio_test(&self, q: usize, dir: f64, phase: u8, bland: bool) -> Option<Step> {
        let mut cand: Vec<(usize, f64, f64, bool)> = Vec::new();
        for p in 0..self.m {
            let a = self.alpha[p];
            if a.abs() <= PIVOT_TOL {
                continue;
            }
            if let Some((exact, relaxed, up)) = self.breakpoint(p, -dir * a, phase) {
                cand.push((p, exact, relaxed, up));
            }
        }
        let flip = self.upper[q];
        let chosen = if bland {
            let min = cand.iter().map(|c| c.1).fold(f64::INFINITY, f64::min);
            cand.iter()
                .filter(|c| c.1 <= min)
                .min_by_key(|c| self.basis[c.0])
                .copied()
        } else {
            let bound = cand.iter().map(|c| c.2).fold(f64::INFINITY, f64::min);
            cand.iter()
                .filter(|c| c.1 <= bound)
                .max_by(|a, b| {
                    self.alpha[a.0]
                        .abs()
                        .partial_cmp(&self.alpha[b.0].abs())
                        .unwrap()
                        .then(self.basis[b.0].cmp(&self.basis[a.0]))
                })
                .copied()
        };
        match chosen {
            Some((p, theta, _, up)) if theta < flip => Some(Step {
                theta,
                leave: Some((p, up)),
            }),
            _ if flip.is_finite() => Some(Step {
                theta: flip,
                leave: None,
            }),
            _ => None,
        }
    }

    fn dual_bound(&self, phase: u8) -> f64 {
        if phase == 1 {
            return f64::NEG_INFINITY;
        }
        let mut bound: f64 = self.lp.rhs.iter().zip(&self.y).map(|(b, y)| b * y).sum();
        for j in 0..self.n {
            let d = self.reduced_cost(j, 2);
            if d < 0.0 {
                if self.upper[j].is_finite() {
                    bound += d * self.upper[j];
                } else if d < -self.opts.opt_tol {
                    return f64::NEG_INFINITY;
                }
            }
        }
        bound
    }

    fn run(&mut self) -> Result<LpSolution, SolverError> {
        let max_iters = self
            .opts
            .max_iters
            .unwrap_or(50 * (self.m + self.n).max(1));
        let mut iters = 0usize;
        let mut phase_one_iters = 0usize;
        let mut degenerate = 0usize;
        let mut bland = false;
        let mut fresh = true;
        let mut last_phase = 0u8;
        let mut iterates = Vec::new();

        loop {
            if self.lu.num_updates() >= self.opts.refactor_interval {
                self.refactor()?;
                self.compute_primal();
                fresh = true;
            }
            let phase = if self.basis.iter().any(|&j| self.violation_cost(j) != 0.0) {
                1
            } else {
                2
            };
            if phase != last_phase {
                degenerate = 0;
                bland = false;
                last_phase = phase;
            }
            self.compute_duals(phase);
            let Some((q, d)) = self.price(phase, bland) else {
                if !fresh {
                    self.refactor()?;
                    self.compute_primal();
                    fresh = true;
                    continue;
                }
                let status = if phase == 1 {
                    LpStatus::Infeasible
                } else {
                    LpStatus::Optimal
                };
                return Ok(self.finish(status, iters, phase_one_iters, None, iterates));
            };

            let dir = if self.state[q] == State::Lower { 1.0 } else { -1.0 };
            let mut col = vec![0.0; self.m];
            {
                let (rows, vals) = self.column(q);
                for (&i, &a) in rows.iter().zip(vals) {
                    col[i] = a;
                }
            }
            let mut alpha = std::mem::take(&mut self.alpha);
            self.lu.ftran(&mut col, &mut alpha);
            self.alpha = alpha;

            let Some(step) = self.ratio_test(q, dir, phase, bland) else {
                if phase == 1 || !fresh {
                    if fresh {
                        return Err(SolverError::NumericalBreakdown(
                            "unbounded direction in phase I".into(),
                        ));
                    }
                    self.refactor()?;
                    self.compute_primal();
                    fresh = true;
                    continue;
                }
                let mut ray = vec![0.0; self.n];
                ray[q] = dir;
                for (p, &j) in self.basis.iter().enumerate() {
                    if j < self.n {
                        ray[j] = -dir * self.alpha[p];
                    }
                }
                return Ok(self.finish(
                    LpStatus::Unbounded,
                    iters,
                    phase_one_iters,
                    Some(ray),
                    iterates,
                ));
            };

            let theta = step.theta;
            if theta != 0.0 {
                self.x[q] += dir * theta;
                for p in 0..self.m {
                    let a = self.alpha[p];
                    if a != 0.0 {
                        self.x[self.basis[p]] -= dir * theta * a;
                    }
                }
            }
            let leaving = match step.leave {
                None => {
                    self.state[q] = if dir > 0.0 { State::Upper } else { State::Lower };
                    self.x[q] = if dir > 0.0 { self.upper[q] } else { 0.0 };
                    None
                }
                Some((p, to_upper)) => {
                    let out = self.basis[p];
                    self.state[out] = if to_upper { State::Upper } else { State::Lower };
                    self.x[out] = if to_upper { self.upper[out] } else { 0.0 };
                    self.basis[p] = q;
                    self.state[q] = State::Basic;
                    let alpha = std::mem::take(&mut self.alpha);
                    self.lu.update(p, &alpha);
                    self.alpha = alpha;
                    Some(out)
                }
            };
            fresh = false;
            iters += 1;
            if phase == 1 {
                phase_one_iters += 1;
            }

            let progress = theta * d.abs();
            if progress <= 1e-12 {
                degenerate += 1;
                if degenerate >= self.opts.stall_window && !bland {
                    debug!("stall after {degenerate} degenerate pivots, switching to Bland's rule");
                    bland = true;
                }
            } else {
                degenerate = 0;
                bland = false;
            }

            if self.opts.trace || self.opts.record_iterates {
                let obj = self.phase_objective(phase);
                if self.opts.trace {
                    debug!(
                        "iter {iters} phase {phase} enter {q} leave {} theta {theta:.3e} obj {obj:.9e}{}",
                        leaving.map_or("flip".to_string(), |l| l.to_string()),
                        if bland { " bland" } else { "" }
                    );
                }
                if self.opts.record_iterates {
                    // Duals priced with the pre-pivot basis give a valid bound.
                    let dual_bound = self.dual_bound(phase);
                    iterates.push(IterateRecord {
                        phase,
                        entering: q,
                        leaving,
                        bland,
                        objective: obj,
                        dual_bound,
                    });
                }
            }

            if iters >= max_iters {
                return Err(SolverError::IterationLimit {
                    iterations: iters,
                    phase,
                    best_x: self.x[..self.n].to_vec(),
                    objective: self.phase_objective(2),
                });
            }
            if self.x.iter().any(|v| !v.is_finite()) {
                return Err(SolverError::NumericalBreakdown(
                    "non-finite primal value".into(),
                ));
            }
        }
    }

    fn finish(
        &mut self,
        status: LpStatus,
        iterations: usize,
        phase_one_iterations: usize,
        ray: Option<Vec<f64>>,
        iterates: Vec<IterateRecord>,
    ) -> LpSolution {
        let infeasibility = self.infeasibility();
        self.compute_duals(2);
        let x: Vec<f64> = self.x[..self.n].to_vec();
        let ax = self.lp.matrix.mul_vec(&x);
        let primal_residual = ax
            .iter()
            .zip(&self.lp.rhs)
            .map(|(a, b)| (a - b).abs())
            .fold(0.0, f64::max);
        let mut dual_residual: f64 = 0.0;
        for j in 0..self.n {
            let d = self.reduced_cost(j, 2);
            let v = match self.state[j] {
                State::Basic => d.abs(),
                State::Lower if self.upper[j] > 0.0 => (-d).max(0.0),
                State::Upper => d.max(0.0),
                State::Lower => 0.0,
            };
            dual_residual = dual_residual.max(v);
        }
        LpSolution {
            status,
            objective: self.phase_objective(2),
            x,
            y: self.y.clone(),
            iterations,
            phase_one_iterations,
            primal_residual,
            dual_residual,
            infeasibility,
            ray,
            iterates,
        }
    }
}
