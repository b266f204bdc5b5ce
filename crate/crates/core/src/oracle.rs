//! Solver-independent ground truth: exhaustive layout search over a
//! reachability graph, row-by-row solution checks, and numeric gradients.

use std::collections::VecDeque;

use layout_milp::VarKind;
use serde::Serialize;
use thiserror::Error;

use crate::layout::JunctionKind;
use crate::netmodel::{Family, MilpModel};
use crate::reach::{ReachGraph, VertexKind};
use crate::scene::Scene;

pub const DEFAULT_CAP: usize = 14;

#[derive(Clone, Debug, PartialEq, Eq, Error)]
pub enum OracleError {
    #[error("cap exceeded: {candidates} candidates > {cap}")]
    CapExceeded { candidates: usize, cap: usize },
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct OracleReport {
    pub candidates: usize,
    /// Subsets visited: the product over slots of (choices + 1).
    pub enumerated: u64,
    /// Minimum cost, `None` when no subset connects every output.
    pub cost: Option<f64>,
    /// One optimal set of placements, ascending vertex ids.
    pub elements: Vec<usize>,
    /// Junctions of that optimum as `(grid point, kind)`.
    pub junctions: Vec<(usize, JunctionKind)>,
}

impl OracleReport {
    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("report serialization is infallible")
    }
}

#[derive(Clone, Copy, Debug, PartialEq)]
enum JunctionChoice {
    None,
    MultiWay,
    Turning(usize, usize),
}

struct Search<'a> {
    g: &'a ReachGraph,
    scene: &'a Scene,
    best: Option<(f64, Vec<usize>, Vec<(usize, JunctionKind)>)>,
}

fn midpoint_key(g: &ReachGraph, v: usize) -> Option<(i64, i64)> {
    let (a, b) = g.belt_ends(v)?;
    let (ai, aj) = g.point_coords(a);
    let (bi, bj) = g.point_coords(b);
    Some((ai + bi, aj + bj))
}

impl Search<'_> {
    /// Placement rules: no arm on a belt end, no two belts over one midpoint.
    fn compatible(&self, chosen: &[usize]) -> bool {
        let g = self.g;
        let mut arm_points = Vec::new();
        let mut mids = Vec::new();
        for &v in chosen {
            match g.vertices[v].kind {
                VertexKind::Arm { point, .. } => arm_points.push(point),
                VertexKind::Belt { .. } => mids.push(midpoint_key(g, v).unwrap()),
                _ => {}
            }
        }
        mids.sort_unstable();
        if mids.windows(2).any(|w| w[0] == w[1]) {
            return false;
        }
        chosen.iter().all(|&v| match g.belt_ends(v) {
            Some((a, b)) => !arm_points.contains(&a) && !arm_points.contains(&b),
            None => true,
        })
    }

    fn connected(&self, chosen: &[usize], transfers: &[(usize, usize)]) -> bool {
        let g = self.g;
        let n = g.num_vertices();
        (0..self.scene.outputs.len()).all(|i| {
            let w = self.scene.outputs[i].weight;
            let mut allowed = vec![false; n];
            allowed[ReachGraph::INPUT] = true;
            allowed[g.output(i)] = true;
            for &v in chosen {
                allowed[v] = g.vertices[v].payload >= w;
            }
            let mut seen = vec![false; n];
            seen[ReachGraph::INPUT] = true;
            let mut queue = VecDeque::from([ReachGraph::INPUT]);
            while let Some(u) = queue.pop_front() {
                if u == g.output(i) {
                    return true;
                }
                let next = g
                    .successors(u)
                    .chain(transfers.iter().filter(|t| t.0 == u).map(|t| t.1));
                for v in next.collect::<Vec<_>>() {
                    if allowed[v] && !seen[v] {
                        seen[v] = true;
                        queue.push_back(v);
                    }
                }
            }
            false
        })
    }

    fn evaluate(&mut self, chosen: &[usize]) {
        if !self.compatible(chosen) {
            return;
        }
        let g = self.g;
        let costs = self.scene.costs;
        let mut base: f64 = chosen.iter().map(|&v| g.vertices[v].cost).sum();
        let belts: Vec<usize> = chosen.iter().copied().filter(|&v| g.vertices[v].is_belt()).collect();
        let mut transfers = Vec::new();
        let mut inline_points = Vec::new();
        for &b1 in &belts {
            for &b2 in &belts {
                let (_, p) = g.belt_ends(b1).unwrap();
                let (q, _) = g.belt_ends(b2).unwrap();
                if p == q && g.belt_dir(b1) == g.belt_dir(b2) {
                    base -= costs.motor;
                    transfers.push((b1, b2));
                    inline_points.push(p);
                }
            }
        }
        if self.best.as_ref().is_some_and(|b| base >= b.0 - 1e-12) {
            return;
        }
        let arm_points: Vec<usize> = chosen
            .iter()
            .filter_map(|&v| match g.vertices[v].kind {
                VertexKind::Arm { point, .. } => Some(point),
                _ => None,
            })
            .collect();
        // Junction sites: a selected belt arrives, another leaves, no arm.
        let mut sites: Vec<(usize, Vec<JunctionChoice>)> = Vec::new();
        for p in 0..g.points.len() {
            if arm_points.contains(&p) {
                continue;
            }
            let ins: Vec<usize> = belts.iter().copied().filter(|&b| g.belt_ends(b).unwrap().1 == p).collect();
            let outs: Vec<usize> = belts.iter().copied().filter(|&b| g.belt_ends(b).unwrap().0 == p).collect();
            if ins.is_empty() || outs.is_empty() {
                continue;
            }
            let mut options = vec![JunctionChoice::None, JunctionChoice::MultiWay];
            for &a in &ins {
                for &b in &outs {
                    options.push(JunctionChoice::Turning(a, b));
                }
            }
            sites.push((p, options));
        }
        let mut pick = vec![0usize; sites.len()];
        loop {
            // A junction interrupts the belts at its point: no inline merge there.
            let junction_at = |p: usize| {
                sites
                    .iter()
                    .zip(&pick)
                    .any(|((q, options), &k)| *q == p && options[k] != JunctionChoice::None)
            };
            let mut cost = base;
            let mut t = Vec::new();
            let mut junctions: Vec<(usize, JunctionKind)> = Vec::new();
            for (&tr, &p) in transfers.iter().zip(&inline_points) {
                if junction_at(p) {
                    cost += costs.motor;
                } else {
                    t.push(tr);
                    junctions.push((p, JunctionKind::Inline));
                }
            }
            for (k, (p, options)) in sites.iter().enumerate() {
                match options[pick[k]] {
                    JunctionChoice::None => {}
                    JunctionChoice::MultiWay => {
                        cost += costs.multiway;
                        junctions.push((*p, JunctionKind::MultiWay));
                        for &a in &belts {
                            for &b in &belts {
                                if a != b && g.belt_ends(a).unwrap().1 == *p && g.belt_ends(b).unwrap().0 == *p {
                                    t.push((a, b));
                                }
                            }
                        }
                    }
                    JunctionChoice::Turning(a, b) => {
                        cost += costs.turning;
                        junctions.push((*p, JunctionKind::Turning));
                        t.push((a, b));
                    }
                }
            }
            let better = self.best.as_ref().map_or(true, |b| cost < b.0 - 1e-12);
            if better && self.connected(chosen, &t) {
                junctions.sort_unstable();
                self.best = Some((cost, chosen.to_vec(), junctions));
            }
            // Next junction assignment (odometer order).
            let mut k = 0;
            loop {
                if k == sites.len() {
                    return;
                }
                pick[k] += 1;
                if pick[k] < sites[k].1.len() {
                    break;
                }
                pick[k] = 0;
                k += 1;
            }
        }
    }
}

/// Exhaustive minimum-cost layout over every placement subset with at most
/// one arm per grid point.
pub fn brute_force_layout(g: &ReachGraph, scene: &Scene, cap: usize) -> Result<OracleReport, OracleError> {
    let candidates = g.placements().len();
    if candidates > cap {
        return Err(OracleError::CapExceeded { candidates, cap });
    }
    // Slots: each grid point picks none or one arm; each belt is in or out.
    let mut slots: Vec<Vec<usize>> = g.arms_at.iter().filter(|a| !a.is_empty()).cloned().collect();
    slots.extend(g.placements().filter(|&v| g.vertices[v].is_belt()).map(|v| vec![v]));
    let mut search = Search {
        g,
        scene,
        best: None,
    };
    let mut pick = vec![0usize; slots.len()];
    let mut enumerated = 0u64;
    loop {
        enumerated += 1;
        let mut chosen: Vec<usize> = slots
            .iter()
            .zip(&pick)
            .filter(|(_, &k)| k > 0)
            .map(|(s, &k)| s[k - 1])
            .collect();
        chosen.sort_unstable();
        search.evaluate(&chosen);
        let mut k = 0;
        loop {
            if k == slots.len() {
                let (cost, elements, junctions) = match search.best {
                    Some((c, e, j)) => (Some(c), e, j),
                    None => (None, Vec::new(), Vec::new()),
                };
                return Ok(OracleReport {
                    candidates,
                    enumerated,
                    cost,
                    elements,
                    junctions,
                });
            }
            pick[k] += 1;
            if pick[k] <= slots[k].len() {
                break;
            }
            pick[k] = 0;
            k += 1;
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct Verdict {
    pub family: Family,
    pub max_violation: f64,
    /// Row or variable with the largest violation.
    pub worst: Option<String>,
    /// Network node of the worst conservation row.
    pub node: Option<usize>,
    pub commodity: Option<usize>,
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct Verdicts {
    pub families: Vec<Verdict>,
}

impl Verdicts {
    pub fn get(&self, family: Family) -> &Verdict {
        self.families
            .iter()
            .find(|v| v.family == family)
            .expect("every family is reported")
    }

    pub fn max_violation(&self) -> f64 {
        self.families.iter().map(|v| v.max_violation).fold(0.0, f64::max)
    }

    pub fn passes(&self, tol: f64) -> bool {
        self.max_violation() <= tol
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("verdict serialization is infallible")
    }
}

/// Recomputes every row residual, bound and integrality gap from scratch.
pub fn verify_solution(mm: &MilpModel, values: &[f64]) -> Verdicts {
    let mut verdicts: Vec<Verdict> = Family::ALL
        .iter()
        .map(|&family| Verdict {
            family,
            max_violation: 0.0,
            worst: None,
            node: None,
            commodity: None,
        })
        .collect();
    let mut record = |family: Family, amount: f64, name: &str, node: Option<usize>, commodity: Option<usize>| {
        let v = &mut verdicts[family as usize];
        if amount > v.max_violation || (amount.is_nan() && !v.max_violation.is_nan()) {
            v.max_violation = amount;
            v.worst = Some(name.to_string());
            v.node = node;
            v.commodity = commodity;
        }
    };
    let value = |j: usize| values.get(j).copied().unwrap_or(f64::NAN);
    for (r, row) in mm.model.rows.iter().enumerate() {
        let activity: f64 = row.terms.iter().map(|&(j, a)| a * value(j)).sum();
        let violation = match row.sense {
            layout_milp::Sense::Le => (activity - row.rhs).max(0.0),
            layout_milp::Sense::Ge => (row.rhs - activity).max(0.0),
            layout_milp::Sense::Eq => (activity - row.rhs).abs(),
        };
        let meta = mm.rows[r];
        record(meta.family, violation, &row.name, meta.node, meta.commodity);
    }
    let fixed: std::collections::HashSet<usize> = mm.payload_fixings.iter().copied().collect();
    for (j, var) in mm.model.vars.iter().enumerate() {
        let x = value(j);
        let bound = (var.lower - x).max(x - var.upper).max(0.0);
        if fixed.contains(&j) {
            record(Family::Payload, x.abs(), &var.name, None, None);
        } else if var.kind == VarKind::Binary {
            let gap = (x - x.round()).abs();
            record(Family::Integrality, gap.max(bound), &var.name, None, None);
        } else {
            record(Family::Capacity, bound, &var.name, None, None);
        }
    }
    Verdicts { families: verdicts }
}

/// Central differences with step `h` in every coordinate.
pub fn finite_diff_gradient(f: &dyn Fn(&[f64]) -> f64, x: &[f64], h: f64) -> Vec<f64> {
    let mut p = x.to_vec();
    (0..x.len())
        .map(|k| {
            p[k] = x[k] + h;
            let up = f(&p);
            p[k] = x[k] - h;
            let down = f(&p);
            p[k] = x[k];
            (up - down) / (2.0 * h)
        })
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::geometry::Point;
    use crate::netmodel::optimize;
    use crate::reach::build_reachability_graph;
    use crate::scene::{Output, RobotType};
    use layout_milp::MilpParams;

    fn scene(floor_max: Point, spacing: f64, input: Point, out: Point) -> Scene {
        Scene::new(
            Point::new(0.0, 0.0),
            floor_max,
            spacing,
            input,
            vec![Output { pos: out, weight: 1.0 }],
        )
    }

    #[test]
    fn chain_instance() {
        let s = scene(Point::new(1.0, 0.0), 2.0, Point::new(-0.5, 0.0), Point::new(0.5, 0.0));
        let g = build_reachability_graph(&s);
        let r = brute_force_layout(&g, &s, DEFAULT_CAP).unwrap();
        assert_eq!(r.cost, Some(1.0));
        assert_eq!(r.enumerated, 2);
        assert_eq!(r.elements, vec![2]);
    }

    #[test]
    fn cheaper_of_two_paths() {
        // Either type serves from either point; the UR5e is cheaper.
        let mut s = scene(Point::new(1.0, 0.0), 1.0, Point::new(0.5, 0.6), Point::new(0.5, 0.0));
        s.catalog = vec![RobotType::ur5e(), RobotType::irb4600()];
        s.catalog[1].reach_min = 0.0;
        let g = build_reachability_graph(&s);
        let r = brute_force_layout(&g, &s, DEFAULT_CAP).unwrap();
        assert_eq!(r.cost, Some(1.0));
        assert_eq!(r.enumerated, 9);
    }

    #[test]
    fn infeasible_and_capped() {
        let s = scene(Point::new(3.0, 0.0), 1.0, Point::new(-2.0, 0.0), Point::new(3.0, 0.0));
        let g = build_reachability_graph(&s);
        let r = brute_force_layout(&g, &s, DEFAULT_CAP).unwrap();
        assert_eq!(r.cost, None);
        assert!(matches!(brute_force_layout(&g, &s, 2), Err(OracleError::CapExceeded { candidates: 4, cap: 2 })));
    }

    #[test]
    fn verifier_flags_injected_faults() {
        let s = scene(Point::new(2.0, 0.0), 0.5, Point::new(0.0, 0.3), Point::new(2.0, 0.0));
        let o = optimize(&s, &MilpParams::default()).unwrap();
        let v = verify_solution(&o.milp, &o.solution.values);
        assert!(v.passes(1e-6), "{}", v.to_json());

        // Corrupt the flow on one used reach arc.
        let mm = &o.milp;
        let used = (0..o.net.arcs.len())
            .find(|&a| matches!(o.net.arcs[a].kind, crate::netmodel::ArcKind::Reach { .. }) && o.solution.values[mm.f[a][0]] > 0.5)
            .unwrap();
        let mut bad = o.solution.values.clone();
        bad[mm.f[used][0]] = 0.5;
        let v = verify_solution(mm, &bad);
        let c = v.get(Family::Conservation);
        assert!((c.max_violation - 0.5).abs() < 1e-12);
        let node = c.node.unwrap();
        let arc = &o.net.arcs[used];
        assert!(node == arc.tail || node == arc.head);

        let mut bad = o.solution.values.clone();
        bad[mm.s[used]] = 0.0;
        let v = verify_solution(mm, &bad);
        assert_eq!(v.get(Family::Capacity).max_violation, 1.0);
        assert_eq!(v.get(Family::Capacity).worst.as_deref(), Some(format!("cap_{used}_0").as_str()));
    }

    #[test]
    fn gradients() {
        let g = finite_diff_gradient(&|x: &[f64]| x[0] * x[0], &[3.0], 1e-6);
        assert!((g[0] - 6.0).abs() < 1e-6);
        let g = finite_diff_gradient(&|_: &[f64]| 4.0, &[1.0, 2.0], 1e-6);
        assert_eq!(g, vec![0.0, 0.0]);
    }
}
