use std::collections::VecDeque;

use thiserror::Error;

use super::compile::MilpModel;
use super::network::{ArcKind, FlowNetwork};
use crate::layout::{JunctionKind, Layout, PlacedBelt, PlacedJunction, PlacedRobot};
use crate::reach::{ReachGraph, VertexKind};
use crate::scene::Scene;

#[derive(Clone, Debug, PartialEq, Eq, Error)]
pub enum ExtractError {
    #[error("disconnected output {0}")]
    DisconnectedOutput(usize),
    #[error("solution has {got} values, model has {want} variables")]
    WrongLength { got: usize, want: usize },
}

/// Elements chosen by a solution, expressed on the reachability graph.
#[derive(Clone, Debug, Default, PartialEq)]
pub struct Selection {
    /// Selected placement vertices, ascending.
    pub elements: Vec<usize>,
    /// `(point, kind)` of every selected multi-way or turning gadget, and of
    /// every inline link (at the shared grid point).
    pub junctions: Vec<(usize, JunctionKind)>,
    /// Belt-to-belt transfers `(from, to)` available to boxes.
    pub transfers: Vec<(usize, usize)>,
    pub cost: f64,
}

impl Selection {
    pub fn from_values(net: &FlowNetwork, mm: &MilpModel, values: &[f64]) -> Self {
        let on = |a: usize| values[mm.s[a]] > 0.5;
        let mut sel = Selection::default();
        let mut core_at = std::collections::HashMap::new();
        for (a, arc) in net.arcs.iter().enumerate() {
            if !on(a) {
                continue;
            }
            if arc.is_costed() {
                sel.cost += arc.weight;
            }
            match arc.kind {
                ArcKind::Element { vertex } => sel.elements.push(vertex),
                ArcKind::Inline { from, to } => {
                    sel.junctions.push((arc.coor.expect("inline point"), JunctionKind::Inline));
                    sel.transfers.push((from, to));
                }
                ArcKind::Core { kind } => {
                    let p = arc.coor.expect("core point");
                    sel.junctions.push((p, kind));
                    core_at.insert((p, kind), true);
                }
                _ => {}
            }
        }
        // Entry/exit pairs of a selected gadget.
        let mut entries: Vec<(usize, JunctionKind, usize)> = Vec::new();
        let mut exits: Vec<(usize, JunctionKind, usize)> = Vec::new();
        for (a, arc) in net.arcs.iter().enumerate() {
            if !on(a) {
                continue;
            }
            match arc.kind {
                ArcKind::Entry { kind, belt } => entries.push((arc.coor.unwrap(), kind, belt)),
                ArcKind::Exit { kind, belt } => exits.push((arc.coor.unwrap(), kind, belt)),
                _ => {}
            }
        }
        for &(p, k, b1) in &entries {
            if !core_at.contains_key(&(p, k)) {
                continue;
            }
            for &(q, k2, b2) in &exits {
                if q == p && k2 == k && b1 != b2 {
                    sel.transfers.push((b1, b2));
                }
            }
        }
        sel.elements.sort_unstable();
        sel.transfers.sort_unstable();
        sel.transfers.dedup();
        sel.junctions.sort_unstable();
        sel
    }

    /// Fewest-hop path for box `i` through selected, payload-sufficient
    /// elements; ties go to the lexicographically smallest vertex sequence.
    pub fn path(&self, g: &ReachGraph, weight: f64, i: usize) -> Option<Vec<usize>> {
        let n = g.num_vertices();
        let mut allowed = vec![false; n];
        allowed[ReachGraph::INPUT] = true;
        allowed[g.output(i)] = true;
        for &v in &self.elements {
            allowed[v] = g.vertices[v].payload >= weight;
        }
        let mut succ: Vec<Vec<usize>> = vec![Vec::new(); n];
        for &(u, v) in &g.arcs {
            if allowed[u] && allowed[v] {
                succ[u].push(v);
            }
        }
        for &(u, v) in &self.transfers {
            if allowed[u] && allowed[v] {
                succ[u].push(v);
            }
        }
        shortest_lexicographic(&succ, ReachGraph::INPUT, g.output(i))
    }
}

/// Lexicographically smallest among the fewest-hop paths.
pub fn shortest_lexicographic(succ: &[Vec<usize>], source: usize, target: usize) -> Option<Vec<usize>> {
    let n = succ.len();
    let mut pred: Vec<Vec<usize>> = vec![Vec::new(); n];
    for (u, list) in succ.iter().enumerate() {
        for &v in list {
            pred[v].push(u);
        }
    }
    let mut dist = vec![usize::MAX; n];
    dist[target] = 0;
    let mut queue = VecDeque::from([target]);
    while let Some(v) = queue.pop_front() {
        for &u in &pred[v] {
            if dist[u] == usize::MAX {
                dist[u] = dist[v] + 1;
                queue.push_back(u);
            }
        }
    }
    if dist[source] == usize::MAX {
        return None;
    }
    let mut path = vec![source];
    let mut cur = source;
    while cur != target {
        cur = *succ[cur]
            .iter()
            .filter(|&&v| dist[v].checked_add(1) == Some(dist[cur]))
            .min()
            .expect("a shortest-path successor exists");
        path.push(cur);
    }
    Some(path)
}

pub fn layout_from_selection(sel: &Selection, g: &ReachGraph, scene: &Scene) -> Result<Layout, ExtractError> {
    let mut robots = Vec::new();
    let mut belts = Vec::new();
    for &v in &sel.elements {
        let vx = &g.vertices[v];
        match vx.kind {
            VertexKind::Arm { robot, .. } => robots.push(PlacedRobot {
                id: v,
                robot_type: scene.catalog[robot].id.clone(),
                x: vx.pos.x,
                y: vx.pos.y,
            }),
            VertexKind::Belt { end, dir, .. } => belts.push(PlacedBelt {
                id: v,
                from: vx.pos,
                to: g.points[end],
                dir,
            }),
            _ => {}
        }
    }
    let junctions = sel
        .junctions
        .iter()
        .map(|&(p, kind)| PlacedJunction {
            kind,
            x: g.points[p].x,
            y: g.points[p].y,
        })
        .collect();
    let paths = (0..scene.outputs.len())
        .map(|i| {
            sel.path(g, scene.outputs[i].weight, i)
                .ok_or(ExtractError::DisconnectedOutput(i))
        })
        .collect::<Result<Vec<_>, _>>()?;
    Ok(Layout {
        robots,
        belts,
        junctions,
        paths,
        total_cost: sel.cost,
    })
}

pub fn extract_layout(
    net: &FlowNetwork,
    mm: &MilpModel,
    g: &ReachGraph,
    scene: &Scene,
    values: &[f64],
) -> Result<Layout, ExtractError> {
    if values.len() != mm.model.num_vars() {
        return Err(ExtractError::WrongLength {
            got: values.len(),
            want: mm.model.num_vars(),
        });
    }
    let sel = Selection::from_values(net, mm, values);
    layout_from_selection(&sel, g, scene)
}
