//! Model reductions applied before branch-and-bound.
//!
//! Three reductions: singleton rows turn into bounds, fixed columns are
//! eliminated, and dual fixing pins a column whose movement in one direction
//! can neither violate a row nor raise the objective. All keep at least one
//! optimal solution.

use crate::model::{Model, Row, Sense, VarId, VarKind};

#[derive(Clone, Debug)]
pub struct Presolved {
    /// Reduced model over the surviving columns.
    pub model: Model,
    /// Original index of each reduced column.
    pub kept: Vec<VarId>,
    /// Value of every eliminated original column.
    pub fixed: Vec<Option<f64>>,
    /// Number of columns pinned by dual fixing.
    pub dual_fixed: usize,
    /// An emptied row turned out violated.
    pub infeasible: bool,
}

impl Presolved {
    /// Maps a reduced solution back to the original columns.
    pub fn expand(&self, reduced: &[f64]) -> Vec<f64> {
        let mut out: Vec<f64> = self.fixed.iter().map(|v| v.unwrap_or(0.0)).collect();
        for (k, &j) in self.kept.iter().enumerate() {
            out[j] = reduced[k];
        }
        out
    }
}

struct WorkRow {
    terms: Vec<(VarId, f64)>,
    sense: Sense,
    rhs: f64,
    alive: bool,
}

fn locks(rows: &[WorkRow], n: usize) -> (Vec<bool>, Vec<bool>) {
    // up_free[j]: raising x_j can never violate a row; down_free likewise.
    let mut up_free = vec![true; n];
    let mut down_free = vec![true; n];
    for row in rows.iter().filter(|r| r.alive) {
        for &(j, a) in &row.terms {
            match row.sense {
                Sense::Eq => {
                    up_free[j] = false;
                    down_free[j] = false;
                }
                Sense::Le => {
                    if a > 0.0 {
                        up_free[j] = false;
                    } else {
                        down_free[j] = false;
                    }
                }
                Sense::Ge => {
                    if a > 0.0 {
                        down_free[j] = false;
                    } else {
                        up_free[j] = false;
                    }
                }
            }
        }
    }
    (up_free, down_free)
}

const TOL: f64 = 1e-9;

/// Reductions: singleton rows become bounds, fixed columns leave their rows,
/// and (optionally) dual fixing. Repeated until nothing changes.
pub fn presolve(model: &Model, dual_fixing: bool) -> Presolved {
    let n = model.num_vars();
    let mut lower = model.lower_bounds();
    let mut upper = model.upper_bounds();
    let binary: Vec<bool> = model.vars.iter().map(|v| v.kind == VarKind::Binary).collect();
    let mut rows: Vec<WorkRow> = model
        .rows
        .iter()
        .map(|r| WorkRow {
            terms: r.terms.clone(),
            sense: r.sense,
            rhs: r.rhs,
            alive: true,
        })
        .collect();
    let mut dual_fixed = 0;
    let mut infeasible = false;

    loop {
        let mut changed = false;
        for row in rows.iter_mut().filter(|r| r.alive) {
            let before = row.terms.len();
            let mut shift = 0.0;
            row.terms.retain(|&(j, a)| {
                if lower[j] == upper[j] {
                    shift += a * lower[j];
                    false
                } else {
                    true
                }
            });
            row.rhs -= shift;
            if row.terms.len() != before {
                changed = true;
            }
            match row.terms.as_slice() {
                [] => {
                    let empty = Row {
                        name: String::new(),
                        terms: Vec::new(),
                        sense: row.sense,
                        rhs: row.rhs,
                    };
                    if empty.violation(&[]) > TOL {
                        infeasible = true;
                    }
                    row.alive = false;
                    changed = true;
                }
                &[(j, a)] => {
                    let v = row.rhs / a;
                    let (tighten_up, tighten_down) = match (row.sense, a > 0.0) {
                        (Sense::Eq, _) => (true, true),
                        (Sense::Le, true) | (Sense::Ge, false) => (true, false),
                        (Sense::Le, false) | (Sense::Ge, true) => (false, true),
                    };
                    if tighten_up {
                        let v = if binary[j] { (v + TOL).floor() } else { v };
                        upper[j] = upper[j].min(v);
                    }
                    if tighten_down {
                        let v = if binary[j] { (v - TOL).ceil() } else { v };
                        lower[j] = lower[j].max(v);
                    }
                    if lower[j] > upper[j] {
                        if lower[j] > upper[j] + TOL {
                            infeasible = true;
                        }
                        lower[j] = upper[j];
                    }
                    row.alive = false;
                    changed = true;
                }
                _ => {}
            }
        }
        if dual_fixing {
            let (up_free, down_free) = locks(&rows, n);
            for j in 0..n {
                if lower[j] == upper[j] {
                    continue;
                }
                let c = model.vars[j].objective;
                let target = if down_free[j] && c >= 0.0 && lower[j].is_finite() {
                    Some(lower[j])
                } else if up_free[j] && c <= 0.0 && upper[j].is_finite() {
                    Some(upper[j])
                } else {
                    None
                };
                if let Some(v) = target {
                    lower[j] = v;
                    upper[j] = v;
                    dual_fixed += 1;
                    changed = true;
                }
            }
        }
        if !changed || infeasible {
            break;
        }
    }

    let mut fixed = vec![None; n];
    let mut kept = Vec::new();
    let mut new_index = vec![usize::MAX; n];
    let mut reduced = Model::new();
    for j in 0..n {
        if lower[j] == upper[j] {
            fixed[j] = Some(lower[j]);
        } else {
            let v = &model.vars[j];
            new_index[j] = reduced
                .add_var(v.name.clone(), lower[j], upper[j], v.objective, v.kind)
                .expect("names are unique in the source model");
            kept.push(j);
        }
    }
    for (row, orig) in rows.iter().zip(&model.rows) {
        if !row.alive {
            continue;
        }
        let mut rhs = row.rhs;
        let mut terms = Vec::with_capacity(row.terms.len());
        for &(j, a) in &row.terms {
            match fixed[j] {
                Some(v) => rhs -= a * v,
                None => terms.push((new_index[j], a)),
            }
        }
        if terms.is_empty() {
            let empty = Row {
                name: String::new(),
                terms: Vec::new(),
                sense: row.sense,
                rhs,
            };
            if empty.violation(&[]) > TOL {
                infeasible = true;
            }
            continue;
        }
        reduced
            .add_row(orig.name.clone(), terms, row.sense, rhs)
            .expect("terms reference surviving columns");
    }

    Presolved {
        model: reduced,
        kept,
        fixed,
        dual_fixed,
        infeasible,
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn free_capacity_selector_is_fixed_on() {
        // f <= s with s costless: s can always be raised.
        let mut m = Model::new();
        let s = m.add_binary("s", 0.0).unwrap();
        let f = m.add_continuous("f", 0.0, 1.0, 0.0).unwrap();
        let t = m.add_binary("t", 2.0).unwrap();
        m.add_row("cap", [(f, 1.0), (s, -1.0)], Sense::Le, 0.0).unwrap();
        m.add_row("cap2", [(f, 1.0), (t, -1.0)], Sense::Le, 0.0).unwrap();
        m.add_row("need", [(f, 1.0)], Sense::Eq, 1.0).unwrap();
        let p = presolve(&m, true);
        assert_eq!(p.fixed[s], Some(1.0));
        assert_eq!(p.dual_fixed, 1);
        // f = 1 then forces t = 1 through the remaining singleton row.
        assert_eq!(p.fixed[t], Some(1.0));
        assert_eq!(p.model.num_vars(), 0);
        assert_eq!(p.expand(&[]), vec![1.0, 1.0, 1.0]);
        assert!(!p.infeasible);
    }

    #[test]
    fn fixed_columns_leave_and_shift_rhs() {
        let mut m = Model::new();
        let x = m.add_continuous("x", 2.0, 2.0, 1.0).unwrap();
        let y = m.add_continuous("y", 0.0, 5.0, 1.0).unwrap();
        m.add_row("r", [(x, 1.0), (y, 1.0)], Sense::Ge, 3.0).unwrap();
        let p = presolve(&m, false);
        assert_eq!(p.model.num_vars(), 1);
        assert_eq!(p.model.num_rows(), 0);
        assert_eq!(p.model.vars[0].lower, 1.0);
        let _ = y;
    }

    #[test]
    fn binary_singleton_bounds_are_rounded() {
        let mut m = Model::new();
        let b = m.add_binary("b", 1.0).unwrap();
        let c = m.add_binary("c", 1.0).unwrap();
        m.add_row("lo", [(b, 2.0)], Sense::Ge, 0.5).unwrap();
        m.add_row("hi", [(c, 4.0)], Sense::Le, 3.0).unwrap();
        let p = presolve(&m, false);
        assert_eq!(p.fixed[b], Some(1.0));
        assert_eq!(p.fixed[c], Some(0.0));
        let mut m2 = Model::new();
        let d = m2.add_binary("d", 0.0).unwrap();
        m2.add_row("both", [(d, 4.0)], Sense::Eq, 2.0).unwrap();
        assert!(presolve(&m2, false).infeasible);
    }

    #[test]
    fn emptied_violated_row_is_infeasible() {
        let mut m = Model::new();
        let x = m.add_continuous("x", 0.0, 0.0, 0.0).unwrap();
        m.add_row("r", [(x, 1.0)], Sense::Eq, 1.0).unwrap();
        assert!(presolve(&m, false).infeasible);
    }
}
