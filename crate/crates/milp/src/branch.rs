//! Best-first branch-and-bound over binary variables.

use std::cmp::Ordering;
use std::collections::BinaryHeap;
use std::rc::Rc;
use std::time::{Duration, Instant};

use crate::error::MilpError;
use crate::lp::{EngineChoice, LpStatus};
use crate::model::{Model, VarKind};
use crate::presolve::{presolve, Presolved};

#[derive(Clone, Debug)]
pub struct MilpParams {
    pub time_limit: Duration,
    pub abs_gap: f64,
    pub int_tol: f64,
    pub presolve: bool,
    pub engine: EngineChoice,
    pub node_limit: Option<usize>,
    /// Keep a [`NodeRecord`] for every evaluated node.
    pub record_tree: bool,
}

impl Default for MilpParams {
    fn default() -> Self {
        Self {
            time_limit: Duration::from_secs(300),
            abs_gap: 1e-6,
            int_tol: 1e-6,
            presolve: true,
            engine: EngineChoice::Auto,
            node_limit: None,
            record_tree: false,
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum MilpStatus {
    Optimal,
    Infeasible,
    /// Time or node limit hit; the best incumbent (if any) is returned.
    Timeout,
    Unbounded,
}

impl MilpStatus {
    pub fn as_str(self) -> &'static str {
        match self {
            MilpStatus::Optimal => "optimal",
            MilpStatus::Infeasible => "infeasible",
            MilpStatus::Timeout => "timeout",
            MilpStatus::Unbounded => "unbounded",
        }
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct Incumbent {
    pub node: usize,
    pub objective: f64,
    pub elapsed: Duration,
}

#[derive(Clone, Debug, PartialEq)]
pub struct NodeRecord {
    pub id: usize,
    pub parent: Option<usize>,
    pub depth: usize,
    /// `None` when the node relaxation was infeasible.
    pub lp_objective: Option<f64>,
    pub integral: bool,
}

#[derive(Clone, Debug)]
pub struct MilpSolution {
    pub status: MilpStatus,
    /// Objective of the best incumbent, `+inf` without one.
    pub objective: f64,
    /// Values of every original variable; empty without an incumbent.
    pub values: Vec<f64>,
    /// Proven lower bound on the optimum.
    pub bound: f64,
    pub nodes: usize,
    pub incumbents: Vec<Incumbent>,
    pub tree: Vec<NodeRecord>,
    pub elapsed: Duration,
}

impl MilpSolution {
    pub fn has_incumbent(&self) -> bool {
        !self.values.is_empty()
    }
}

struct Fixing {
    var: usize,
    value: f64,
    parent: Option<Rc<Fixing>>,
}

struct OpenNode {
    bound: f64,
    depth: usize,
    id: usize,
    parent: Option<usize>,
    fixings: Option<Rc<Fixing>>,
}

impl PartialEq for OpenNode {
    fn eq(&self, other: &Self) -> bool {
        self.cmp(other) == Ordering::Equal
    }
}
impl Eq for OpenNode {}
impl PartialOrd for OpenNode {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}
impl Ord for OpenNode {
    // BinaryHeap is a max-heap: "greater" pops first.
    fn cmp(&self, other: &Self) -> Ordering {
        other
            .bound
            .total_cmp(&self.bound)
            .then(self.depth.cmp(&other.depth))
            .then(other.id.cmp(&self.id))
    }
}

fn identity(model: &Model) -> Presolved {
    Presolved {
        model: model.clone(),
        kept: (0..model.num_vars()).collect(),
        fixed: vec![None; model.num_vars()],
        dual_fixed: 0,
        infeasible: false,
    }
}

/// Most fractional binary (closest to 1/2), lowest index on ties.
pub(crate) fn branching_variable(values: &[f64], binaries: &[usize], int_tol: f64) -> Option<usize> {
    let mut best: Option<(usize, f64)> = None;
    for &j in binaries {
        let x = values[j];
        let frac = (x - x.floor()).min(x.ceil() - x);
        if frac <= int_tol {
            continue;
        }
        if best.map_or(true, |(_, f)| frac > f + 1e-12) {
            best = Some((j, frac));
        }
    }
    best.map(|(j, _)| j)
}

/// Solves `model` to optimality (within `abs_gap`) or until a limit fires.
pub fn solve_milp(model: &Model, params: &MilpParams) -> Result<MilpSolution, MilpError> {
    let start = Instant::now();
    let deadline = start + params.time_limit;
    let pre = if params.presolve {
        presolve(model, true)
    } else {
        identity(model)
    };

    let mut out = MilpSolution {
        status: MilpStatus::Infeasible,
        objective: f64::INFINITY,
        values: Vec::new(),
        bound: f64::INFINITY,
        nodes: 0,
        incumbents: Vec::new(),
        tree: Vec::new(),
        elapsed: Duration::ZERO,
    };
    if pre.infeasible {
        out.elapsed = start.elapsed();
        return Ok(out);
    }

    let red = &pre.model;
    let binaries: Vec<usize> = (0..red.num_vars())
        .filter(|&j| red.vars[j].kind == VarKind::Binary)
        .collect();
    let base_lo = red.lower_bounds();
    let base_hi = red.upper_bounds();
    let engine = params.engine.resolve(red);

    let mut heap = BinaryHeap::new();
    heap.push(OpenNode {
        bound: f64::NEG_INFINITY,
        depth: 0,
        id: 0,
        parent: None,
        fixings: None,
    });
    let mut next_id = 1;
    let mut best: Option<(f64, Vec<f64>)> = None;
    let mut hit_limit = false;

    while let Some(node) = heap.pop() {
        let cutoff = best.as_ref().map_or(f64::INFINITY, |b| b.0 - params.abs_gap);
        if node.bound >= cutoff {
            // Best-first: every remaining node is at least as bad.
            heap.clear();
            break;
        }
        if Instant::now() >= deadline || params.node_limit.is_some_and(|l| out.nodes >= l) {
            heap.push(node);
            hit_limit = true;
            break;
        }

        let mut lo = base_lo.clone();
        let mut hi = base_hi.clone();
        let mut fx = node.fixings.as_deref();
        while let Some(f) = fx {
            lo[f.var] = f.value;
            hi[f.var] = f.value;
            fx = f.parent.as_deref();
        }

        let lp = match engine.solve(red, &lo, &hi, Some(deadline)) {
            Ok(lp) => lp,
            Err(MilpError::Deadline) => {
                heap.push(node);
                hit_limit = true;
                break;
            }
            Err(e) => return Err(e),
        };
        out.nodes += 1;

        let mut record = NodeRecord {
            id: node.id,
            parent: node.parent,
            depth: node.depth,
            lp_objective: None,
            integral: false,
        };
        match lp.status {
            LpStatus::Infeasible => {
                if params.record_tree {
                    out.tree.push(record);
                }
                continue;
            }
            LpStatus::Unbounded => {
                out.status = MilpStatus::Unbounded;
                out.objective = f64::NEG_INFINITY;
                out.bound = f64::NEG_INFINITY;
                out.elapsed = start.elapsed();
                return Ok(out);
            }
            LpStatus::Optimal => {}
        }
        record.lp_objective = Some(lp.objective);

        if lp.objective >= cutoff {
            if params.record_tree {
                out.tree.push(record);
            }
            continue;
        }

        match branching_variable(&lp.values, &binaries, params.int_tol) {
            None => {
                let mut values = lp.values;
                for &j in &binaries {
                    values[j] = values[j].round();
                }
                let objective = red.objective_value(&values);
                record.integral = true;
                if best.as_ref().map_or(true, |b| objective < b.0) {
                    out.incumbents.push(Incumbent {
                        node: node.id,
                        objective,
                        elapsed: start.elapsed(),
                    });
                    best = Some((objective, values));
                }
            }
            Some(j) => {
                let parent = node.fixings.clone();
                for value in [1.0, 0.0] {
                    heap.push(OpenNode {
                        bound: lp.objective,
                        depth: node.depth + 1,
                        id: next_id,
                        parent: Some(node.id),
                        fixings: Some(Rc::new(Fixing {
                            var: j,
                            value,
                            parent: parent.clone(),
                        })),
                    });
                    next_id += 1;
                }
            }
        }
        if params.record_tree {
            out.tree.push(record);
        }
    }

    let open_bound = heap
        .iter()
        .map(|n| n.bound)
        .fold(f64::INFINITY, f64::min);
    match best {
        Some((_, values)) => {
            let full = pre.expand(&values);
            out.objective = model.objective_value(&full);
            out.values = full;
            if hit_limit {
                out.status = MilpStatus::Timeout;
                out.bound = open_bound.min(out.objective);
            } else {
                out.status = MilpStatus::Optimal;
                out.bound = out.objective;
            }
        }
        None => {
            out.status = if hit_limit {
                MilpStatus::Timeout
            } else {
                MilpStatus::Infeasible
            };
            out.bound = open_bound;
        }
    }
    out.elapsed = start.elapsed();
    Ok(out)
}
