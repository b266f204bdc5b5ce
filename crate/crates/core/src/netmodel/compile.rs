use layout_milp::{Model, Sense, VarId};
use serde::Serialize;

use super::network::{ArcKind, Coupling, FlowNetwork};
use crate::reach::{Direction, ReachGraph};
use crate::scene::Scene;

/// Constraint family of a row, used when reporting violations.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum Family {
    Occupancy,
    Capacity,
    Conservation,
    Junction,
    Payload,
    Integrality,
}

impl Family {
    pub const ALL: [Family; 6] = [
        Family::Occupancy,
        Family::Capacity,
        Family::Conservation,
        Family::Junction,
        Family::Payload,
        Family::Integrality,
    ];

    pub fn as_str(self) -> &'static str {
        match self {
            Family::Occupancy => "occupancy",
            Family::Capacity => "capacity",
            Family::Conservation => "conservation",
            Family::Junction => "junction",
            Family::Payload => "payload",
            Family::Integrality => "integrality",
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct RowMeta {
    pub family: Family,
    /// Network node of a conservation row.
    pub node: Option<usize>,
    /// Box index of a per-commodity row.
    pub commodity: Option<usize>,
}

/// The compiled flow MILP with maps back to network arcs.
#[derive(Clone, Debug)]
pub struct MilpModel {
    pub model: Model,
    /// Selection variable of each network arc.
    pub s: Vec<VarId>,
    /// Flow variable of each network arc and box.
    pub f: Vec<Vec<VarId>>,
    pub rows: Vec<RowMeta>,
    /// Flow variables fixed to zero because the box is too heavy.
    pub payload_fixings: Vec<VarId>,
    pub n_boxes: usize,
}

impl MilpModel {
    pub fn rows_of(&self, family: Family) -> impl Iterator<Item = usize> + '_ {
        self.rows
            .iter()
            .enumerate()
            .filter(move |(_, m)| m.family == family)
            .map(|(r, _)| r)
    }
}

struct Builder {
    model: Model,
    rows: Vec<RowMeta>,
}

impl Builder {
    fn row(
        &mut self,
        name: String,
        terms: Vec<(VarId, f64)>,
        sense: Sense,
        rhs: f64,
        meta: RowMeta,
    ) {
        self.model
            .add_row(name, terms, sense, rhs)
            .expect("rows reference declared variables");
        self.rows.push(meta);
    }
}

fn meta(family: Family) -> RowMeta {
    RowMeta {
        family,
        node: None,
        commodity: None,
    }
}

pub fn compile_milp(net: &FlowNetwork, g: &ReachGraph, scene: &Scene) -> MilpModel {
    let n_boxes = scene.outputs.len();
    let mut model = Model::new();
    let s: Vec<VarId> = net
        .arcs
        .iter()
        .enumerate()
        .map(|(a, arc)| model.add_binary(format!("s_{a}"), arc.weight).expect("unique name"))
        .collect();
    let mut payload_fixings = Vec::new();
    let f: Vec<Vec<VarId>> = net
        .arcs
        .iter()
        .enumerate()
        .map(|(a, arc)| {
            (0..n_boxes)
                .map(|i| {
                    let heavy = arc.payload < scene.outputs[i].weight;
                    let hi = if heavy { 0.0 } else { 1.0 };
                    let v = model
                        .add_continuous(format!("f_{a}_{i}"), 0.0, hi, 0.0)
                        .expect("unique name");
                    if heavy {
                        payload_fixings.push(v);
                    }
                    v
                })
                .collect()
        })
        .collect();
    let mut b = Builder {
        model,
        rows: Vec::new(),
    };

    // Occupancy: arms and junction gadgets share a grid point.
    let mut at_point: Vec<Vec<usize>> = vec![Vec::new(); g.points.len()];
    for (a, arc) in net.arcs.iter().enumerate() {
        let arm_or_core = match arc.kind {
            ArcKind::Element { vertex } => g.vertices[vertex].is_arm(),
            ArcKind::Core { .. } => true,
            _ => false,
        };
        if arm_or_core {
            at_point[arc.coor.expect("costed arcs have a grid point")].push(a);
        }
    }
    for (p, arcs) in at_point.iter().enumerate() {
        if !arcs.is_empty() {
            let terms = arcs.iter().map(|&a| (s[a], 1.0)).collect();
            b.row(format!("occ_{p}"), terms, Sense::Le, 1.0, meta(Family::Occupancy));
        }
    }
    let elem = |v: usize| s[net.element_arc[v].expect("placement")];
    for v in g.placements() {
        let Some((from, to)) = g.belt_ends(v) else { continue };
        let dir = g.belt_dir(v).expect("belt");
        // A segment and its reverse cover the same span.
        if let Some(r) = g.belt(to, dir.opposite()) {
            if v < r {
                b.row(
                    format!("span_{v}_{r}"),
                    vec![(elem(v), 1.0), (elem(r), 1.0)],
                    Sense::Le,
                    1.0,
                    meta(Family::Occupancy),
                );
            }
        }
        // Belts keep clear of arm bases at both ends.
        for q in [from, to] {
            if !g.arms_at[q].is_empty() {
                let mut terms: Vec<(VarId, f64)> = g.arms_at[q].iter().map(|&a| (elem(a), 1.0)).collect();
                terms.push((elem(v), 1.0));
                b.row(format!("clear_{v}_{q}"), terms, Sense::Le, 1.0, meta(Family::Occupancy));
            }
        }
    }
    // Crossing diagonals inside a grid cell.
    let (nx, ny) = g.shape;
    for j in 0..ny.saturating_sub(1) {
        for i in 0..nx.saturating_sub(1) {
            let p = |di: usize, dj: usize| (j + dj) * nx + i + di;
            let diagonals = [
                g.belt(p(0, 0), Direction::NE),
                g.belt(p(1, 1), Direction::SW),
                g.belt(p(1, 0), Direction::NW),
                g.belt(p(0, 1), Direction::SE),
            ];
            let terms: Vec<(VarId, f64)> = diagonals.iter().flatten().map(|&v| (elem(v), 1.0)).collect();
            if terms.len() > 1 {
                b.row(format!("cross_{}", p(0, 0)), terms, Sense::Le, 1.0, meta(Family::Occupancy));
            }
        }
    }

    for (a, row) in f.iter().enumerate() {
        for (i, &fv) in row.iter().enumerate() {
            b.row(
                format!("cap_{a}_{i}"),
                vec![(fv, 1.0), (s[a], -1.0)],
                Sense::Le,
                0.0,
                RowMeta {
                    family: Family::Capacity,
                    node: None,
                    commodity: Some(i),
                },
            );
        }
    }

    let (ins, outs) = net.incidence();
    let input = net.input_node();
    for i in 0..n_boxes {
        let target = net.output_node(i);
        for v in 0..net.nodes.len() {
            let rhs = if v == input {
                -1.0
            } else if v == target {
                1.0
            } else {
                0.0
            };
            let terms: Vec<(VarId, f64)> = ins[v]
                .iter()
                .map(|&a| (f[a][i], 1.0))
                .chain(outs[v].iter().map(|&a| (f[a][i], -1.0)))
                .collect();
            b.row(
                format!("flow_{v}_{i}"),
                terms,
                Sense::Eq,
                rhs,
                RowMeta {
                    family: Family::Conservation,
                    node: Some(v),
                    commodity: Some(i),
                },
            );
        }
    }

    for (name, c) in &net.couplings {
        let (terms, sense, rhs) = match c {
            Coupling::AtMost { arc, by } => (vec![(s[*arc], 1.0), (s[*by], -1.0)], Sense::Le, 0.0),
            Coupling::AtMostOne(arcs) => (arcs.iter().map(|&a| (s[a], 1.0)).collect(), Sense::Le, 1.0),
            Coupling::SumEquals { arcs, target } => {
                let mut t: Vec<(VarId, f64)> = arcs.iter().map(|&a| (s[a], 1.0)).collect();
                t.push((s[*target], -1.0));
                (t, Sense::Eq, 0.0)
            }
        };
        b.row(name.clone(), terms, sense, rhs, meta(Family::Junction));
    }

    MilpModel {
        model: b.model,
        s,
        f,
        rows: b.rows,
        payload_fixings,
        n_boxes,
    }
}
