//! Sparse LU factorization of a simplex basis with Markowitz pivot selection
//! and threshold partial pivoting, plus a product-form eta file for
//! rank-one basis updates between refactorizations.

use thiserror::Error;

const NONE: usize = usize::MAX;
/// Relative threshold for accepting a pivot within its column.
const PIVOT_THRESHOLD: f64 = 0.1;
/// Absolute magnitude below which a candidate pivot is treated as zero.
const PIVOT_ZERO: f64 = 1e-11;
/// Columns/rows examined by the Markowitz search once a candidate exists,
/// and rows without an acceptable entry skipped per count bucket.
const SEARCH_LIMIT: usize = 4;

#[derive(Debug, Clone, PartialEq, Error)]
#[error("singular basis: {} positions could not be pivoted", .positions.len())]
pub struct Singular {
    /// Basis positions left without a pivot.
    pub positions: Vec<usize>,
    /// Rows left without a pivot (same length as `positions`).
    pub rows: Vec<usize>,
}

/// Sparse column given as parallel index/value slices.
pub type ColRef<'a> = (&'a [usize], &'a [f64]);

/// Doubly linked lists of items keyed by their nonzero count.
struct Buckets {
    head: Vec<usize>,
    next: Vec<usize>,
    prev: Vec<usize>,
    count: Vec<usize>,
}

impl Buckets {
    fn new(items: usize, max_count: usize) -> Self {
        Self {
            head: vec![NONE; max_count + 2],
            next: vec![NONE; items],
            prev: vec![NONE; items],
            count: vec![NONE; items],
        }
    }

    fn insert(&mut self, item: usize, count: usize) {
        let count = count.min(self.head.len() - 1);
        self.count[item] = count;
        self.prev[item] = NONE;
        self.next[item] = self.head[count];
        if self.head[count] != NONE {
            self.prev[self.head[count]] = item;
        }
        self.head[count] = item;
    }

    fn remove(&mut self, item: usize) {
        let c = self.count[item];
        if c == NONE {
            return;
        }
        let (p, n) = (self.prev[item], self.next[item]);
        if p != NONE {
            self.next[p] = n;
        } else {
            self.head[c] = n;
        }
        if n != NONE {
            self.prev[n] = p;
        }
        self.count[item] = NONE;
    }

    fn update(&mut self, item: usize, count: usize) {
        self.remove(item);
        self.insert(item, count);
    }
}

/// `B = P·L·U·Q` in elimination form, with an appended eta file.
#[derive(Debug, Clone)]
pub struct LuFactors {
    m: usize,
    prow: Vec<usize>,
    pcol: Vec<usize>,
    l_start: Vec<usize>,
    l_idx: Vec<usize>,
    l_val: Vec<f64>,
    u_diag: Vec<f64>,
    ur_start: Vec<usize>,
    ur_idx: Vec<usize>,
    ur_val: Vec<f64>,
    uc_start: Vec<usize>,
    uc_idx: Vec<usize>,
    uc_val: Vec<f64>,
    etas: Vec<Eta>,
}

#[derive(Debug, Clone)]
struct Eta {
    pos: usize,
    pivot: f64,
    idx: Vec<usize>,
    val: Vec<f64>,
}

impl LuFactors {
    /// Factorizes the `m × m` matrix whose column `k` is `cols[k]`.
    pub fn factorize(m: usize, cols: &[ColRef<'_>]) -> Result<Self, Singular> {
        assert_eq!(cols.len(), m);
        let mut col_entries: Vec<Vec<(usize, f64)>> = cols
            .iter()
            .map(|(idx, val)| {
                idx.iter()
                    .zip(val.iter())
                    .filter(|(_, v)| **v != 0.0)
                    .map(|(&i, &v)| (i, v))
                    .collect()
            })
            .collect();
        let mut row_cols: Vec<Vec<usize>> = vec![Vec::new(); m];
        for (j, entries) in col_entries.iter().enumerate() {
            for &(i, _) in entries {
                row_cols[i].push(j);
            }
        }

        let mut col_b = Buckets::new(m, m);
        let mut row_b = Buckets::new(m, m);
        for j in 0..m {
            col_b.insert(j, col_entries[j].len());
        }
        for i in 0..m {
            row_b.insert(i, row_cols[i].len());
        }
        let mut row_active = vec![true; m];
        let mut col_active = vec![true; m];

        let mut f = LuFactors {
            m,
            prow: Vec::with_capacity(m),
            pcol: Vec::with_capacity(m),
            l_start: vec![0],
            l_idx: Vec::new(),
            l_val: Vec::new(),
            u_diag: Vec::with_capacity(m),
            ur_start: vec![0],
            ur_idx: Vec::new(),
            ur_val: Vec::new(),
            uc_start: Vec::new(),
            uc_idx: Vec::new(),
            uc_val: Vec::new(),
            etas: Vec::new(),
        };

        let mut slot = vec![NONE; m];
        let mut mult: Vec<(usize, f64)> = Vec::new();
        let mut urow: Vec<(usize, f64)> = Vec::new();

        for _ in 0..m {
            let Some((pi, pj)) = choose_pivot(&col_entries, &row_cols, &col_b, &row_b) else {
                break;
            };
            let pivot = col_entries[pj]
                .iter()
                .find(|e| e.0 == pi)
                .map(|e| e.1)
                .expect("pivot entry present");

            mult.clear();
            mult.extend(
                col_entries[pj]
                    .iter()
                    .filter(|e| e.0 != pi)
                    .map(|&(r, v)| (r, v / pivot)),
            );
            urow.clear();
            for &c in &row_cols[pi] {
                if c == pj {
                    continue;
                }
                let v = col_entries[c]
                    .iter()
                    .find(|e| e.0 == pi)
                    .map(|e| e.1)
                    .expect("row pattern consistent with columns");
                urow.push((c, v));
            }

            // Remove the pivot row from its columns and the pivot column from its rows.
            for &c in &row_cols[pi] {
                if c == pj {
                    continue;
                }
                let entries = &mut col_entries[c];
                let k = entries.iter().position(|e| e.0 == pi).unwrap();
                entries.swap_remove(k);
            }
            for &(r, _) in &mult {
                let rc = &mut row_cols[r];
                let k = rc.iter().position(|&c| c == pj).unwrap();
                rc.swap_remove(k);
            }
            row_cols[pi].clear();
            col_entries[pj].clear();
            row_active[pi] = false;
            col_active[pj] = false;
            row_b.remove(pi);
            col_b.remove(pj);

            // Schur complement update of the columns touched by the pivot row.
            if !mult.is_empty() {
                for &(c, u) in &urow {
                    let entries = &mut col_entries[c];
                    for (k, e) in entries.iter().enumerate() {
                        slot[e.0] = k;
                    }
                    for &(r, l) in &mult {
                        let delta = -l * u;
                        if slot[r] != NONE {
                            entries[slot[r]].1 += delta;
                        } else {
                            slot[r] = entries.len();
                            entries.push((r, delta));
                            row_cols[r].push(c);
                        }
                    }
                    for e in entries.iter() {
                        slot[e.0] = NONE;
                    }
                }
            }
            for &(c, _) in &urow {
                col_b.update(c, col_entries[c].len());
            }
            for &(r, _) in &mult {
                row_b.update(r, row_cols[r].len());
            }

            f.prow.push(pi);
            f.pcol.push(pj);
            for &(r, l) in &mult {
                f.l_idx.push(r);
                f.l_val.push(l);
            }
            f.l_start.push(f.l_idx.len());
            f.u_diag.push(pivot);
            for &(c, v) in &urow {
                f.ur_idx.push(c);
                f.ur_val.push(v);
            }
            f.ur_start.push(f.ur_idx.len());
        }

        if f.prow.len() < m {
            let positions: Vec<usize> = (0..m).filter(|&j| col_active[j]).collect();
            let rows: Vec<usize> = (0..m).filter(|&i| row_active[i]).collect();
            return Err(Singular { positions, rows });
        }

        // Column-wise copy of U keyed by basis position.
        let mut counts = vec![0usize; m + 1];
        for &c in &f.ur_idx {
            counts[c + 1] += 1;
        }
        for c in 0..m {
            counts[c + 1] += counts[c];
        }
        let mut next = counts.clone();
        f.uc_idx = vec![0; f.ur_idx.len()];
        f.uc_val = vec![0.0; f.ur_idx.len()];
        for k in 0..m {
            for e in f.ur_start[k]..f.ur_start[k + 1] {
                let c = f.ur_idx[e];
                f.uc_idx[next[c]] = k;
                f.uc_val[next[c]] = f.ur_val[e];
                next[c] += 1;
            }
        }
        f.uc_start = counts;
        Ok(f)
    }

    pub fn dim(&self) -> usize {
        self.m
    }

    /// Number of eta updates applied since factorization.
    pub fn num_updates(&self) -> usize {
        self.etas.len()
    }

    /// Nonzeros in L and U.
    pub fn fill(&self) -> usize {
        self.l_idx.len() + self.ur_idx.len() + self.m
    }

    /// Solves `B·x = b`. `b` is indexed by row and is consumed as workspace;
    /// the result is indexed by basis position.
    pub fn ftran(&self, b: &mut [f64], x: &mut [f64]) {
        let m = self.m;
        for k in 0..m {
            let v = b[self.prow[k]];
            if v != 0.0 {
                for e in self.l_start[k]..self.l_start[k + 1] {
                    b[self.l_idx[e]] -= self.l_val[e] * v;
                }
            }
        }
        for k in (0..m).rev() {
            let c = self.pcol[k];
            let v = b[self.prow[k]] / self.u_diag[k];
            x[c] = v;
            if v != 0.0 {
                for e in self.uc_start[c]..self.uc_start[c + 1] {
                    b[self.prow[self.uc_idx[e]]] -= self.uc_val[e] * v;
                }
            }
        }
        for eta in &self.etas {
            let v = x[eta.pos] / eta.pivot;
            x[eta.pos] = v;
            if v != 0.0 {
                for (&i, &a) in eta.idx.iter().zip(&eta.val) {
                    x[i] -= a * v;
                }
            }
        }
    }

    /// Solves `Bᵀ·y = c`. `c` is indexed by basis position and is consumed
    /// as workspace; the result is indexed by row.
    pub fn btran(&self, c: &mut [f64], y: &mut [f64]) {
        let m = self.m;
        for eta in self.etas.iter().rev() {
            let s: f64 = eta.idx.iter().zip(&eta.val).map(|(&i, &a)| a * c[i]).sum();
            c[eta.pos] = (c[eta.pos] - s) / eta.pivot;
        }
        for k in 0..m {
            let v = c[self.pcol[k]] / self.u_diag[k];
            y[self.prow[k]] = v;
            if v != 0.0 {
                for e in self.ur_start[k]..self.ur_start[k + 1] {
                    c[self.ur_idx[e]] -= self.ur_val[e] * v;
                }
            }
        }
        for k in (0..m).rev() {
            let mut s = 0.0;
            for e in self.l_start[k]..self.l_start[k + 1] {
                s += self.l_val[e] * y[self.l_idx[e]];
            }
            y[self.prow[k]] -= s;
        }
    }

    /// Records the replacement of the column at basis position `pos` by a
    /// column whose FTRAN image is `alpha` (indexed by basis position).
    pub fn update(&mut self, pos: usize, alpha: &[f64]) {
        let mut idx = Vec::new();
        let mut val = Vec::new();
        for (i, &a) in alpha.iter().enumerate() {
            if i != pos && a != 0.0 {
                idx.push(i);
                val.push(a);
            }
        }
        self.etas.push(Eta {
            pos,
            pivot: alpha[pos],
            idx,
            val,
        });
    }
}

fn choose_pivot(
    col_entries: &[Vec<(usize, f64)>],
    row_cols: &[Vec<usize>],
    col_b: &Buckets,
    row_b: &Buckets,
) -> Option<(usize, usize)> {
    if col_b.head[0] != NONE || row_b.head[0] != NONE {
        return None;
    }
    let col_max = |j: usize| {
        col_entries[j]
            .iter()
            .fold(0.0f64, |m, e| m.max(e.1.abs()))
    };

    // Column singletons.
    let mut j = col_b.head[1];
    while j != NONE {
        let (i, v) = col_entries[j][0];
        if v.abs() > PIVOT_ZERO {
            return Some((i, j));
        }
        j = col_b.next[j];
    }

    let mut best: Option<(usize, usize, usize, f64)> = None; // (i, j, cost, |v|)
    let consider = |i: usize, j: usize, cost: usize, v: f64, best: &mut Option<_>| {
        let better = match *best {
            None => true,
            Some((_, _, bc, bv)) => cost < bc || (cost == bc && v > bv),
        };
        if better {
            *best = Some((i, j, cost, v));
        }
    };

    let mut searched = 0usize;
    let max_count = col_b.head.len() - 1;
    for cnt in 1..=max_count {
        // Rows with `cnt` entries.
        let mut i = row_b.head[cnt];
        // Rows whose entries all fail the threshold stay in their bucket;
        // capping the misses keeps the search from rescanning them every pivot.
        let mut misses = 0usize;
        while i != NONE && misses < SEARCH_LIMIT {
            let before = best;
            for &j in &row_cols[i] {
                let v = col_entries[j]
                    .iter()
                    .find(|e| e.0 == i)
                    .map_or(0.0, |e| e.1.abs());
                let cmax = col_max(j);
                if v > PIVOT_ZERO && v >= PIVOT_THRESHOLD * cmax {
                    let cost = (cnt - 1) * (col_entries[j].len() - 1);
                    consider(i, j, cost, v, &mut best);
                }
            }
            searched += 1;
            if best == before {
                misses += 1;
            }
            if let Some(b) = best {
                if b.2 == 0 || (searched >= SEARCH_LIMIT) {
                    return Some((b.0, b.1));
                }
            }
            i = row_b.next[i];
        }
        if cnt < 2 {
            continue;
        }
        // Columns with `cnt` entries.
        let mut j = col_b.head[cnt];
        while j != NONE {
            let cmax = col_max(j);
            for &(i, v) in &col_entries[j] {
                let v = v.abs();
                if v > PIVOT_ZERO && v >= PIVOT_THRESHOLD * cmax {
                    let cost = (row_cols[i].len() - 1) * (cnt - 1);
                    consider(i, j, cost, v, &mut best);
                }
            }
            searched += 1;
            if let Some(b) = best {
                if searched >= SEARCH_LIMIT {
                    return Some((b.0, b.1));
                }
            }
            j = col_b.next[j];
        }
        if let Some(b) = best {
            // Every unexamined entry has row and column counts above cnt.
            if b.2 <= cnt * cnt {
                return Some((b.0, b.1));
            }
        }
    }
    best.map(|b| (b.0, b.1))
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    fn dense_cols(a: &[Vec<f64>]) -> Vec<(Vec<usize>, Vec<f64>)> {
        let m = a.len();
        (0..m)
            .map(|j| {
                let mut idx = Vec::new();
                let mut val = Vec::new();
                for i in 0..m {
                    if a[i][j] != 0.0 {
                        idx.push(i);
                        val.push(a[i][j]);
                    }
                }
                (idx, val)
            })
            .collect()
    }

    fn factor(cols: &[(Vec<usize>, Vec<f64>)]) -> Result<LuFactors, Singular> {
        let refs: Vec<ColRef<'_>> = cols.iter().map(|(i, v)| (i.as_slice(), v.as_slice())).collect();
        LuFactors::factorize(cols.len(), &refs)
    }

    fn matvec(a: &[Vec<f64>], x: &[f64]) -> Vec<f64> {
        a.iter().map(|r| r.iter().zip(x).map(|(p, q)| p * q).sum()).collect()
    }

    fn tmatvec(a: &[Vec<f64>], y: &[f64]) -> Vec<f64> {
        let m = a.len();
        (0..m).map(|j| (0..m).map(|i| a[i][j] * y[i]).sum()).collect()
    }

    fn random_sparse(rng: &mut ChaCha8Rng, m: usize, density: f64) -> Vec<Vec<f64>> {
        let mut a = vec![vec![0.0; m]; m];
        for (i, row) in a.iter_mut().enumerate() {
            row[i] = rng.gen_range(1.0..3.0) * if rng.gen_bool(0.5) { 1.0 } else { -1.0 };
            for v in row.iter_mut() {
                if rng.gen_bool(density) {
                    *v = rng.gen_range(-2.0..2.0);
                }
            }
        }
        a
    }

    #[test]
    fn solves_match_dense_products() {
        let mut rng = ChaCha8Rng::seed_from_u64(7);
        for &(m, density) in &[(1, 0.0), (5, 0.5), (30, 0.1), (120, 0.03)] {
            let a = random_sparse(&mut rng, m, density);
            let lu = factor(&dense_cols(&a)).unwrap();
            let x_true: Vec<f64> = (0..m).map(|_| rng.gen_range(-1.0..1.0)).collect();
            let mut b = matvec(&a, &x_true);
            let mut x = vec![0.0; m];
            lu.ftran(&mut b, &mut x);
            for (p, q) in x.iter().zip(&x_true) {
                assert!((p - q).abs() < 1e-9, "ftran m={m}");
            }
            let mut c = tmatvec(&a, &x_true);
            let mut y = vec![0.0; m];
            lu.btran(&mut c, &mut y);
            for (p, q) in y.iter().zip(&x_true) {
                assert!((p - q).abs() < 1e-9, "btran m={m}");
            }
        }
    }

    #[test]
    fn eta_updates_track_column_replacement() {
        let mut rng = ChaCha8Rng::seed_from_u64(11);
        let m = 25;
        let mut a = random_sparse(&mut rng, m, 0.1);
        let mut lu = factor(&dense_cols(&a)).unwrap();
        for step in 0..10 {
            let pos = (step * 7) % m;
            let new_col: Vec<f64> = (0..m)
                .map(|i| if i == pos { 4.0 } else if rng.gen_bool(0.2) { rng.gen_range(-1.0..1.0) } else { 0.0 })
                .collect();
            let mut b = new_col.clone();
            let mut alpha = vec![0.0; m];
            lu.ftran(&mut b, &mut alpha);
            lu.update(pos, &alpha);
            for i in 0..m {
                a[i][pos] = new_col[i];
            }
            let x_true: Vec<f64> = (0..m).map(|_| rng.gen_range(-1.0..1.0)).collect();
            let mut b = matvec(&a, &x_true);
            let mut x = vec![0.0; m];
            lu.ftran(&mut b, &mut x);
            let mut c = tmatvec(&a, &x_true);
            let mut y = vec![0.0; m];
            lu.btran(&mut c, &mut y);
            for k in 0..m {
                assert!((x[k] - x_true[k]).abs() < 1e-8);
                assert!((y[k] - x_true[k]).abs() < 1e-8);
            }
        }
        assert_eq!(lu.num_updates(), 10);
    }

    #[test]
    fn reports_singular_columns() {
        let a = vec![
            vec![1.0, 2.0, 0.0],
            vec![2.0, 4.0, 0.0],
            vec![0.0, 0.0, 1.0],
        ];
        let err = factor(&dense_cols(&a)).unwrap_err();
        assert_eq!(err.positions.len(), 1);
        assert_eq!(err.rows.len(), 1);
    }

    #[test]
    fn permuted_identity_has_no_fill() {
        let m = 50;
        let cols: Vec<(Vec<usize>, Vec<f64>)> = (0..m).map(|j| (vec![(j * 17) % m], vec![2.0])).collect();
        let lu = factor(&cols).unwrap();
        assert_eq!(lu.fill(), m);
    }
}
