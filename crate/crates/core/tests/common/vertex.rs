//! Dense vertex enumeration for `min c·x, A·x = b, x ≥ 0`.

use std::collections::{HashSet, VecDeque};

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use ressize_core::formulation::{LpProblem, LpRow, RowFamily};

/// Dense standard-form instance with a known feasible basis.
pub struct DenseLp {
    pub a: Vec<Vec<f64>>,
    pub b: Vec<f64>,
    pub c: Vec<f64>,
    pub planted: Vec<usize>,
}

impl DenseLp {
    /// Entries of `A` uniform in `[0, 1)`, costs in `[0.1, 1)` (so the
    /// problem is bounded), and `b = A_B·x_B` for a random basis `B` with
    /// `x_B` in `[0.1, 1)`.
    pub fn random(m: usize, n: usize, seed: u64) -> Self {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let a: Vec<Vec<f64>> = (0..m)
            .map(|_| (0..n).map(|_| rng.gen_range(0.0..1.0)).collect())
            .collect();
        let c: Vec<f64> = (0..n).map(|_| rng.gen_range(0.1..1.0)).collect();
        let mut cols: Vec<usize> = (0..n).collect();
        for i in 0..n {
            let j = rng.gen_range(i..n);
            cols.swap(i, j);
        }
        let mut planted = cols[..m].to_vec();
        planted.sort_unstable();
        let xb: Vec<f64> = (0..m).map(|_| rng.gen_range(0.1..1.0)).collect();
        let b = (0..m)
            .map(|i| planted.iter().zip(&xb).map(|(&j, &v)| a[i][j] * v).sum())
            .collect();
        Self { a, b, c, planted }
    }

    pub fn to_problem(&self) -> LpProblem {
        let n = self.c.len();
        let mut lp = LpProblem::new(n);
        lp.objective = self.c.clone();
        for (row, &rhs) in self.a.iter().zip(&self.b) {
            let coeffs = row.iter().copied().enumerate().filter(|e| e.1 != 0.0).collect();
            lp.eq_rows.push(LpRow::new(coeffs, rhs, RowFamily::Generic));
        }
        lp
    }

    /// Reduced row-echelon tableau `[B⁻¹A | B⁻¹b]` for `basis`; row `k`
    /// carries the pivot of `basis[k]`. `None` if the basis is singular.
    fn tableau(&self, basis: &[usize]) -> Option<Vec<Vec<f64>>> {
        let (m, n) = (self.a.len(), self.c.len());
        let mut t: Vec<Vec<f64>> = (0..m)
            .map(|i| {
                let mut r = self.a[i].clone();
                r.push(self.b[i]);
                r
            })
            .collect();
        for (k, &j) in basis.iter().enumerate() {
            let p = (k..m).max_by(|&x, &y| t[x][j].abs().total_cmp(&t[y][j].abs()))?;
            if t[p][j].abs() < 1e-10 {
                return None;
            }
            t.swap(k, p);
            let piv = t[k][j];
            t[k].iter_mut().for_each(|v| *v /= piv);
            let rk = t[k].clone();
            for (i, row) in t.iter_mut().enumerate() {
                let f = row[j];
                if i != k && f != 0.0 {
                    for col in 0..=n {
                        row[col] -= f * rk[col];
                    }
                }
            }
        }
        Some(t)
    }

    fn basis_value(&self, basis: &[usize], t: &[Vec<f64>]) -> f64 {
        let n = self.c.len();
        basis.iter().zip(t).map(|(&j, r)| self.c[j] * r[n]).sum()
    }

    /// Minimum over every `m`-subset of columns that forms a feasible basis.
    pub fn min_over_all_subsets(&self) -> Option<f64> {
        let (m, n) = (self.a.len(), self.c.len());
        let mut best: Option<f64> = None;
        let mut subset: Vec<usize> = (0..m).collect();
        loop {
            if let Some(t) = self.tableau(&subset) {
                if t.iter().all(|r| r[n] >= -1e-9) {
                    let v = self.basis_value(&subset, &t);
                    best = Some(best.map_or(v, |b: f64| b.min(v)));
                }
            }
            // Next combination in lexicographic order.
            let mut i = m;
            while i > 0 && subset[i - 1] == i - 1 + n - m {
                i -= 1;
            }
            if i == 0 {
                return best;
            }
            subset[i - 1] += 1;
            for k in i..m {
                subset[k] = subset[k - 1] + 1;
            }
        }
    }

    /// Visits every feasible basis reachable by simplex pivots from the
    /// planted one (the feasible-basis graph is connected) and returns the
    /// minimum objective and the number of bases visited. Requires `n ≤ 64`.
    pub fn min_over_feasible_bases(&self) -> (f64, usize) {
        let (m, n) = (self.a.len(), self.c.len());
        assert!(n <= 64);
        let mask_of = |cols: &[usize]| cols.iter().fold(0u64, |acc, &j| acc | 1 << j);
        let start = mask_of(&self.planted);
        let mut seen = HashSet::from([start]);
        let mut queue = VecDeque::from([start]);
        let mut best = f64::INFINITY;
        while let Some(mask) = queue.pop_front() {
            let basis: Vec<usize> = (0..n).filter(|j| mask >> j & 1 == 1).collect();
            let t = self.tableau(&basis).expect("feasible basis is nonsingular");
            best = best.min(self.basis_value(&basis, &t));
            for q in (0..n).filter(|j| mask >> j & 1 == 0) {
                let mut ratio = f64::INFINITY;
                let mut leaving = Vec::new();
                for k in 0..m {
                    let v = t[k][q];
                    if v > 1e-9 {
                        let r = t[k][n].max(0.0) / v;
                        if r < ratio - 1e-12 {
                            ratio = r;
                            leaving.clear();
                            leaving.push(k);
                        } else if (r - ratio).abs() <= 1e-12 {
                            leaving.push(k);
                        }
                    }
                }
                for k in leaving {
                    let next = mask ^ (1 << q) ^ (1 << basis[k]);
                    if seen.insert(next) {
                        queue.push_back(next);
                    }
                }
            }
        }
        (best, seen.len())
    }
}
