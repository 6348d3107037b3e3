//! Bound-driven reductions: fixed and forced columns, singleton, empty and
//! redundant rows. Reductions only remove what the bounds and rows already
//! imply, so primal points map back and forth exactly.

use super::LpProblem;

const TOL: f64 = 1e-9;
const MAX_PASSES: usize = 20;

/// A reduced problem and the map back to the original columns.
#[derive(Clone, Debug)]
pub struct Reduction {
    pub lp: LpProblem,
    /// Original index of each kept column.
    kept: Vec<usize>,
    /// Values of the removed columns, by original index.
    fixed: Vec<f64>,
    /// Objective contribution of the removed columns.
    pub offset: f64,
    pub removed_rows: usize,
}

impl Reduction {
    /// Original index of each reduced column.
    pub fn kept_columns(&self) -> &[usize] {
        &self.kept
    }

    /// Full point from a reduced one.
    pub fn expand(&self, x: &[f64]) -> Vec<f64> {
        let mut full = self.fixed.clone();
        for (k, &c) in self.kept.iter().enumerate() {
            full[c] = x[k];
        }
        full
    }

    /// Reduced point from a full one.
    pub fn restrict(&self, x: &[f64]) -> Vec<f64> {
        self.kept.iter().map(|&c| x[c]).collect()
    }
}

/// Reduces `lp`; integer columns get their derived bounds rounded inwards.
/// Returns `None` when the reductions prove the problem infeasible.
pub fn presolve(lp: &LpProblem, integer: &[bool]) -> Option<Reduction> {
    let n = lp.columns();
    let m = lp.rows();
    let mut lo = lp.col_lower().to_vec();
    let mut up = lp.col_upper().to_vec();
    let mut alive = vec![true; m];

    let tighten = |c: usize, new_lo: f64, new_up: f64, lo: &mut [f64], up: &mut [f64]| -> Option<bool> {
        let (mut a, mut b) = (new_lo, new_up);
        if integer[c] {
            a = (a - 1e-6).ceil();
            b = (b + 1e-6).floor();
        }
        let mut changed = false;
        if a > lo[c] + TOL {
            lo[c] = a;
            changed = true;
        }
        if b < up[c] - TOL {
            up[c] = b;
            changed = true;
        }
        if lo[c] > up[c] + 1e-7 {
            return None;
        }
        if lo[c] > up[c] {
            up[c] = lo[c];
        }
        Some(changed)
    };

    for _ in 0..MAX_PASSES {
        let mut changed = false;
        for r in 0..m {
            if !alive[r] {
                continue;
            }
            let (rlo, rup) = (lp.row_lower()[r], lp.row_upper()[r]);
            let mut constant = 0.0;
            let mut free = 0usize;
            let mut single = None;
            let (mut min_act, mut max_act) = (0.0, 0.0);
            for (c, a) in lp.row(r) {
                if lo[c] == up[c] {
                    constant += a * lo[c];
                    continue;
                }
                free += 1;
                single = Some((c, a));
                let (l, u) = if a > 0.0 { (a * lo[c], a * up[c]) } else { (a * up[c], a * lo[c]) };
                min_act += l;
                max_act += u;
            }
            min_act += constant;
            max_act += constant;
            let slack = TOL * (1.0 + rlo.abs().min(rup.abs()).min(1e9));
            if min_act > rup + slack.max(1e-7) || max_act < rlo - slack.max(1e-7) {
                return None;
            }
            if free == 0 {
                alive[r] = false;
                changed = true;
                continue;
            }
            if free == 1 {
                let (c, a) = single.expect("one free entry");
                let (l, u) = ((rlo - constant) / a, (rup - constant) / a);
                let (l, u) = if a > 0.0 { (l, u) } else { (u, l) };
                tighten(c, l, u, &mut lo, &mut up)?;
                alive[r] = false;
                changed = true;
                continue;
            }
            if min_act >= rlo - slack && max_act <= rup + slack {
                alive[r] = false;
                changed = true;
                continue;
            }
            // Forcing rows: the row bound equals the extreme activity, so
            // every free column sits at the bound producing it.
            let force_min = min_act.is_finite() && (min_act - rup).abs() <= slack;
            let force_max = max_act.is_finite() && (max_act - rlo).abs() <= slack;
            if force_min || force_max {
                for (c, a) in lp.row(r) {
                    if lo[c] == up[c] {
                        continue;
                    }
                    let at_lower = (a > 0.0) == force_min;
                    if at_lower {
                        up[c] = lo[c];
                    } else {
                        lo[c] = up[c];
                    }
                }
                alive[r] = false;
                changed = true;
            }
        }
        if !changed {
            break;
        }
    }

    let mut index = vec![usize::MAX; n];
    let mut kept = Vec::new();
    let mut fixed = vec![0.0; n];
    let mut offset = 0.0;
    for c in 0..n {
        if lo[c] == up[c] {
            fixed[c] = lo[c];
            offset += lp.cost()[c] * lo[c];
        } else {
            index[c] = kept.len();
            kept.push(c);
        }
    }
    let mut reduced = LpProblem::new(kept.len());
    for (k, &c) in kept.iter().enumerate() {
        reduced.set_column(k, lp.cost()[c], lo[c], up[c]);
    }
    let mut removed_rows = 0;
    let mut entries = Vec::new();
    for r in 0..m {
        if !alive[r] {
            removed_rows += 1;
            continue;
        }
        entries.clear();
        let mut constant = 0.0;
        for (c, a) in lp.row(r) {
            if index[c] == usize::MAX {
                constant += a * fixed[c];
            } else {
                entries.push((index[c], a));
            }
        }
        reduced.add_row(lp.row_lower()[r] - constant, lp.row_upper()[r] - constant, &entries);
    }
    Some(Reduction {
        lp: reduced,
        kept,
        fixed,
        offset,
        removed_rows,
    })
}
