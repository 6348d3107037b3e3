//! Sparse LU factorization of a simplex basis with product-form updates.
//!
//! Pivots are chosen by a Markowitz search with threshold partial pivoting;
//! singletons come out first, which is most of a typical basis. Basis
//! columns that cannot be pivoted are reported back so the caller can swap
//! in the logical column of an unpivoted row.

use std::cmp::Reverse;
use std::collections::BinaryHeap;

const PIVOT_THRESHOLD: f64 = 0.01;
const ABS_PIVOT_TOL: f64 = 1e-11;
const SEARCH_COLUMNS: usize = 4;

#[derive(Clone, Debug, Default)]
pub(crate) struct Factor {
    // L: per step, the pivot row and the multipliers below it.
    l_row: Vec<u32>,
    l_start: Vec<usize>,
    l_idx: Vec<u32>,
    l_val: Vec<f64>,
    // U: per step, pivot row, pivot position, diagonal and the entries in
    // positions pivoted later.
    u_row: Vec<u32>,
    u_pos: Vec<u32>,
    u_diag: Vec<f64>,
    u_start: Vec<usize>,
    u_idx: Vec<u32>,
    u_val: Vec<f64>,
    // Transposed copies for sparse solves: U by position, L by row.
    uc_start: Vec<usize>,
    uc_row: Vec<u32>,
    uc_val: Vec<f64>,
    lr_start: Vec<usize>,
    lr_row: Vec<u32>,
    lr_val: Vec<f64>,
    // Product-form updates since the last factorization.
    eta_pos: Vec<u32>,
    eta_pivot: Vec<f64>,
    eta_start: Vec<usize>,
    eta_idx: Vec<u32>,
    eta_val: Vec<f64>,
}

/// Basis positions that had to be replaced by the logical of `row`.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub(crate) struct Replacement {
    pub position: usize,
    pub row: usize,
}

impl Factor {
    /// Factorizes the `m x m` matrix whose column `pos` is `columns(pos)`.
    /// Rank deficiency is repaired with unit columns `-e_row`; the affected
    /// positions are returned.
    pub fn new<I>(m: usize, mut columns: impl FnMut(usize) -> I) -> (Factor, Vec<Replacement>)
    where
        I: Iterator<Item = (usize, f64)>,
    {
        let mut cols: Vec<Vec<(u32, f64)>> = (0..m)
            .map(|p| {
                let mut c: Vec<(u32, f64)> = columns(p).filter(|&(_, v)| v != 0.0).map(|(r, v)| (r as u32, v)).collect();
                c.sort_unstable_by_key(|e| e.0);
                c
            })
            .collect();
        let mut rows: Vec<Vec<u32>> = vec![Vec::new(); m];
        for (p, c) in cols.iter().enumerate() {
            for &(r, _) in c {
                rows[r as usize].push(p as u32);
            }
        }
        let mut f = Factor {
            l_start: vec![0],
            u_start: vec![0],
            eta_start: vec![0],
            ..Default::default()
        };
        let mut row_done = vec![false; m];
        let mut col_done = vec![false; m];
        let mut deficient = Vec::new();
        let mut col_heap: BinaryHeap<Reverse<(usize, u32)>> =
            (0..m).map(|p| Reverse((cols[p].len(), p as u32))).collect();
        let mut row_heap: BinaryHeap<Reverse<(usize, u32)>> =
            (0..m).map(|r| Reverse((rows[r].len(), r as u32))).collect();
        // Scatter map: row -> slot in the column being updated.
        let mut slot = vec![u32::MAX; m];
        let mut remaining = m;

        while remaining > 0 {
            let Some(c) = pop_valid(&mut col_heap, &col_done, |p| cols[p].len()) else {
                break;
            };
            let count = cols[c].len();
            let mut choice: Option<(usize, usize)> = None;
            if count == 0 {
                col_done[c] = true;
                deficient.push(c);
                remaining -= 1;
                continue;
            }
            if count == 1 {
                let (r, v) = cols[c][0];
                if v.abs() > ABS_PIVOT_TOL {
                    choice = Some((r as usize, c));
                }
            }
            if choice.is_none() {
                // Row singletons never cause growth.
                if let Some(r) = peek_valid(&mut row_heap, &row_done, |r| rows[r].len()) {
                    if rows[r].len() == 1 {
                        let p = rows[r][0] as usize;
                        let v = value_at(&cols[p], r);
                        let cmax = cols[p].iter().fold(0.0f64, |a, e| a.max(e.1.abs()));
                        if v.abs() > ABS_PIVOT_TOL && v.abs() >= PIVOT_THRESHOLD * cmax {
                            choice = Some((r, p));
                        }
                    }
                }
            }
            if choice.is_none() {
                // Markowitz search over the sparsest few columns.
                let mut candidates = vec![c];
                let mut popped = Vec::new();
                while candidates.len() < SEARCH_COLUMNS {
                    match pop_valid(&mut col_heap, &col_done, |p| cols[p].len()) {
                        Some(p) => {
                            candidates.push(p);
                            popped.push(p);
                        }
                        None => break,
                    }
                }
                let mut best: Option<(usize, f64, usize, usize)> = None;
                for &p in &candidates {
                    let cmax = cols[p].iter().fold(0.0f64, |a, e| a.max(e.1.abs()));
                    if cmax <= ABS_PIVOT_TOL {
                        continue;
                    }
                    for &(r, v) in &cols[p] {
                        if v.abs() < PIVOT_THRESHOLD * cmax || v.abs() <= ABS_PIVOT_TOL {
                            continue;
                        }
                        let merit = (rows[r as usize].len() - 1) * (cols[p].len() - 1);
                        let better = match best {
                            None => true,
                            Some((bm, bv, _, _)) => merit < bm || (merit == bm && v.abs() > bv),
                        };
                        if better {
                            best = Some((merit, v.abs(), r as usize, p));
                        }
                    }
                }
                for p in popped {
                    col_heap.push(Reverse((cols[p].len(), p as u32)));
                }
                match best {
                    Some((_, _, r, p)) => choice = Some((r, p)),
                    None => {
                        // Every candidate is numerically empty; the first is
                        // the sparsest, so give it up.
                        col_done[c] = true;
                        deficient.push(c);
                        remaining -= 1;
                        for &(r, _) in &cols[c] {
                            let list = &mut rows[r as usize];
                            if let Some(k) = list.iter().position(|&q| q as usize == c) {
                                list.swap_remove(k);
                                row_heap.push(Reverse((list.len(), r)));
                            }
                        }
                        cols[c].clear();
                        continue;
                    }
                }
                // `c` itself was popped; put it back unless it is the pivot.
                if choice.map(|(_, p)| p) != Some(c) {
                    col_heap.push(Reverse((cols[c].len(), c as u32)));
                }
            } else if choice.map(|(_, p)| p) != Some(c) {
                col_heap.push(Reverse((cols[c].len(), c as u32)));
            }

            let (r, p) = choice.expect("pivot chosen");
            f.eliminate(r, p, &mut cols, &mut rows, &mut slot, &mut col_heap, &mut row_heap, &col_done);
            row_done[r] = true;
            col_done[p] = true;
            remaining -= 1;
        }

        let free_rows: Vec<usize> = (0..m).filter(|&r| !row_done[r]).collect();
        debug_assert_eq!(free_rows.len(), deficient.len());
        let mut replaced = Vec::with_capacity(deficient.len());
        deficient.sort_unstable();
        if !deficient.is_empty() {
            // The unit replacements are zero in every pivoted row.
            let mut gone = vec![false; m];
            for &p in &deficient {
                gone[p] = true;
            }
            for (e, &q) in f.u_idx.iter().enumerate() {
                if gone[q as usize] {
                    f.u_val[e] = 0.0;
                }
            }
        }
        for (&position, &row) in deficient.iter().zip(&free_rows) {
            f.l_row.push(row as u32);
            f.l_start.push(f.l_idx.len());
            f.u_row.push(row as u32);
            f.u_pos.push(position as u32);
            f.u_diag.push(-1.0);
            f.u_start.push(f.u_idx.len());
            replaced.push(Replacement { position, row });
        }
        f.transpose(m);
        (f, replaced)
    }

    #[allow(clippy::too_many_arguments)]
    fn eliminate(
        &mut self,
        r: usize,
        p: usize,
        cols: &mut [Vec<(u32, f64)>],
        rows: &mut [Vec<u32>],
        slot: &mut [u32],
        col_heap: &mut BinaryHeap<Reverse<(usize, u32)>>,
        row_heap: &mut BinaryHeap<Reverse<(usize, u32)>>,
        col_done: &[bool],
    ) {
        let pivot = value_at(&cols[p], r);
        // U row: pull row r out of every other active column.
        let row_r = std::mem::take(&mut rows[r]);
        let mut u_entries: Vec<(u32, f64)> = Vec::with_capacity(row_r.len());
        for &q in &row_r {
            let q = q as usize;
            if q == p || col_done[q] {
                continue;
            }
            let col = &mut cols[q];
            if let Some(k) = col.iter().position(|e| e.0 as usize == r) {
                let (_, v) = col.swap_remove(k);
                u_entries.push((q as u32, v));
            }
        }
        // L column: multipliers of the other rows in column p.
        let col_p = std::mem::take(&mut cols[p]);
        let mut l_entries: Vec<(u32, f64)> = Vec::with_capacity(col_p.len());
        for &(i, v) in &col_p {
            if i as usize == r {
                continue;
            }
            l_entries.push((i, v / pivot));
            let list = &mut rows[i as usize];
            if let Some(k) = list.iter().position(|&q| q as usize == p) {
                list.swap_remove(k);
            }
        }
        // Schur complement update.
        for &(q, urv) in &u_entries {
            let q = q as usize;
            let col = &mut cols[q];
            for (k, &(i, _)) in col.iter().enumerate() {
                slot[i as usize] = k as u32;
            }
            for &(i, l) in &l_entries {
                let delta = l * urv;
                let s = slot[i as usize];
                if s != u32::MAX {
                    col[s as usize].1 -= delta;
                } else {
                    col.push((i, -delta));
                    rows[i as usize].push(q as u32);
                    slot[i as usize] = (col.len() - 1) as u32;
                }
            }
            for &(i, _) in col.iter() {
                slot[i as usize] = u32::MAX;
            }
            col_heap.push(Reverse((col.len(), q as u32)));
        }
        for &(i, _) in &l_entries {
            row_heap.push(Reverse((rows[i as usize].len(), i)));
        }

        self.l_row.push(r as u32);
        for (i, l) in l_entries {
            self.l_idx.push(i);
            self.l_val.push(l);
        }
        self.l_start.push(self.l_idx.len());
        self.u_row.push(r as u32);
        self.u_pos.push(p as u32);
        self.u_diag.push(pivot);
        for (q, v) in u_entries {
            self.u_idx.push(q);
            self.u_val.push(v);
        }
        self.u_start.push(self.u_idx.len());
    }

    fn transpose(&mut self, m: usize) {
        let mut start = vec![0usize; m + 1];
        for &q in &self.u_idx {
            start[q as usize + 1] += 1;
        }
        for i in 0..m {
            start[i + 1] += start[i];
        }
        let mut fill = start.clone();
        self.uc_row = vec![0; self.u_idx.len()];
        self.uc_val = vec![0.0; self.u_idx.len()];
        for k in 0..self.u_row.len() {
            for e in self.u_start[k]..self.u_start[k + 1] {
                let q = self.u_idx[e] as usize;
                self.uc_row[fill[q]] = self.u_row[k];
                self.uc_val[fill[q]] = self.u_val[e];
                fill[q] += 1;
            }
        }
        self.uc_start = start;

        let mut start = vec![0usize; m + 1];
        for &i in &self.l_idx {
            start[i as usize + 1] += 1;
        }
        for i in 0..m {
            start[i + 1] += start[i];
        }
        let mut fill = start.clone();
        self.lr_row = vec![0; self.l_idx.len()];
        self.lr_val = vec![0.0; self.l_idx.len()];
        for k in 0..self.l_row.len() {
            for e in self.l_start[k]..self.l_start[k + 1] {
                let i = self.l_idx[e] as usize;
                self.lr_row[fill[i]] = self.l_row[k];
                self.lr_val[fill[i]] = self.l_val[e];
                fill[i] += 1;
            }
        }
        self.lr_start = start;
    }

    pub fn eta_count(&self) -> usize {
        self.eta_pos.len()
    }

    /// Nonzeros held by the factors and the update file.
    pub fn fill(&self) -> usize {
        self.l_idx.len() + self.u_idx.len() + self.eta_idx.len()
    }

    /// Solves `B x = b` in place: `rhs` is indexed by row on entry and by
    /// basis position on return.
    pub fn ftran(&self, rhs: &mut [f64], work: &mut [f64]) {
        for k in 0..self.l_row.len() {
            let xr = rhs[self.l_row[k] as usize];
            if xr != 0.0 {
                for e in self.l_start[k]..self.l_start[k + 1] {
                    rhs[self.l_idx[e] as usize] -= self.l_val[e] * xr;
                }
            }
        }
        for k in (0..self.u_row.len()).rev() {
            let p = self.u_pos[k] as usize;
            let v = rhs[self.u_row[k] as usize] / self.u_diag[k];
            work[p] = v;
            if v != 0.0 {
                for e in self.uc_start[p]..self.uc_start[p + 1] {
                    rhs[self.uc_row[e] as usize] -= self.uc_val[e] * v;
                }
            }
        }
        for k in 0..self.eta_pos.len() {
            let p = self.eta_pos[k] as usize;
            let xp = work[p] / self.eta_pivot[k];
            work[p] = xp;
            if xp != 0.0 {
                for e in self.eta_start[k]..self.eta_start[k + 1] {
                    work[self.eta_idx[e] as usize] -= self.eta_val[e] * xp;
                }
            }
        }
        rhs.copy_from_slice(work);
    }

    /// Solves `B^T y = c` in place: `rhs` is indexed by basis position on
    /// entry and by row on return.
    pub fn btran(&self, rhs: &mut [f64], work: &mut [f64]) {
        for k in (0..self.eta_pos.len()).rev() {
            let p = self.eta_pos[k] as usize;
            let mut v = rhs[p];
            for e in self.eta_start[k]..self.eta_start[k + 1] {
                v -= self.eta_val[e] * rhs[self.eta_idx[e] as usize];
            }
            rhs[p] = v / self.eta_pivot[k];
        }
        for k in 0..self.u_row.len() {
            let t = rhs[self.u_pos[k] as usize] / self.u_diag[k];
            work[self.u_row[k] as usize] = t;
            if t != 0.0 {
                for e in self.u_start[k]..self.u_start[k + 1] {
                    rhs[self.u_idx[e] as usize] -= self.u_val[e] * t;
                }
            }
        }
        for k in (0..self.l_row.len()).rev() {
            let r = self.l_row[k] as usize;
            let v = work[r];
            if v != 0.0 {
                for e in self.lr_start[r]..self.lr_start[r + 1] {
                    work[self.lr_row[e] as usize] -= self.lr_val[e] * v;
                }
            }
        }
        rhs.copy_from_slice(work);
    }

    /// Records the replacement of basis column `position` by a column whose
    /// representation in the current basis is `alpha` (indexed by position).
    pub fn update(&mut self, position: usize, alpha: &[f64]) {
        self.eta_pos.push(position as u32);
        self.eta_pivot.push(alpha[position]);
        for (i, &a) in alpha.iter().enumerate() {
            if i != position && a.abs() > 1e-14 {
                self.eta_idx.push(i as u32);
                self.eta_val.push(a);
            }
        }
        self.eta_start.push(self.eta_idx.len());
    }
}

fn value_at(col: &[(u32, f64)], row: usize) -> f64 {
    col.iter().find(|e| e.0 as usize == row).map_or(0.0, |e| e.1)
}

fn pop_valid(
    heap: &mut BinaryHeap<Reverse<(usize, u32)>>,
    done: &[bool],
    count: impl Fn(usize) -> usize,
) -> Option<usize> {
    while let Some(Reverse((c, i))) = heap.pop() {
        let i = i as usize;
        if !done[i] && count(i) == c {
            return Some(i);
        }
    }
    None
}

fn peek_valid(
    heap: &mut BinaryHeap<Reverse<(usize, u32)>>,
    done: &[bool],
    count: impl Fn(usize) -> usize,
) -> Option<usize> {
    while let Some(&Reverse((c, i))) = heap.peek() {
        let i = i as usize;
        if !done[i] && count(i) == c {
            return Some(i);
        }
        heap.pop();
    }
    None
}
