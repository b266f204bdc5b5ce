//! A* over sets of arm placements: the baseline the MILP is compared with.

use std::cmp::Ordering;
use std::collections::{BinaryHeap, HashSet};
use std::time::{Duration, Instant};

use thiserror::Error;

use crate::geometry::Point;
use crate::layout::{Layout, PlacedRobot};
use crate::netmodel::shortest_lexicographic;
use crate::reach::{ReachGraph, VertexKind};
use crate::scene::Scene;

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct AstarParams {
    pub time_limit: Duration,
    /// Most distinct states kept in memory before giving up.
    pub max_states: usize,
}

impl Default for AstarParams {
    fn default() -> Self {
        AstarParams {
            time_limit: Duration::from_secs(300),
            max_states: 2_000_000,
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Error)]
pub enum AstarFailure {
    #[error("timeout")]
    Timeout,
    #[error("out of memory")]
    OutOfMemory,
    #[error("infeasible")]
    Infeasible,
}

impl AstarFailure {
    pub fn as_str(self) -> &'static str {
        match self {
            AstarFailure::Timeout => "timeout",
            AstarFailure::OutOfMemory => "out_of_memory",
            AstarFailure::Infeasible => "infeasible",
        }
    }
}

#[derive(Clone, Copy, Debug, Default, PartialEq)]
pub struct AstarStats {
    pub expanded: usize,
    pub generated: usize,
    pub elapsed: Duration,
}

#[derive(Clone, Debug, PartialEq, Error)]
#[error("{failure} after {} expansions", stats.expanded)]
pub struct AstarError {
    pub failure: AstarFailure,
    pub stats: AstarStats,
}

#[derive(Clone, Debug, PartialEq)]
pub struct AstarResult {
    pub layout: Layout,
    pub stats: AstarStats,
}

/// Lower bound on the arms still needed: each output must be reached by a
/// chain starting at the input (first hop `l`, later hops `2l`) or at a
/// selected arm (every hop `2l`, last one `l`). The largest count over the
/// outputs is returned.
pub fn heuristic(q: &[Point], scene: &Scene, l: f64) -> u32 {
    scene
        .outputs
        .iter()
        .map(|o| {
            let from_input = scene.input.dist(o.pos);
            let from_q = q
                .iter()
                .map(|p| p.dist(o.pos) - l)
                .fold(f64::INFINITY, f64::min);
            let d = from_input.min(from_q).max(0.0);
            (d / (2.0 * l) - 1e-9).ceil().max(0.0) as u32
        })
        .max()
        .unwrap_or(0)
}

struct Entry {
    f: f64,
    h: u32,
    seq: u64,
    state: Vec<u32>,
    g: f64,
}

impl PartialEq for Entry {
    fn eq(&self, other: &Self) -> bool {
        self.cmp(other) == Ordering::Equal
    }
}
impl Eq for Entry {}
impl PartialOrd for Entry {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}
impl Ord for Entry {
    // Max-heap: smaller f, then smaller h, then earlier insertion pops first.
    fn cmp(&self, other: &Self) -> Ordering {
        other
            .f
            .total_cmp(&self.f)
            .then(other.h.cmp(&self.h))
            .then(other.seq.cmp(&self.seq))
    }
}

fn induced_successors(g: &ReachGraph, state: &[u32], weight: f64, i: usize) -> Vec<Vec<usize>> {
    let n = g.num_vertices();
    let mut allowed = vec![false; n];
    allowed[ReachGraph::INPUT] = true;
    allowed[g.output(i)] = true;
    for &v in state {
        allowed[v as usize] = g.vertices[v as usize].payload >= weight;
    }
    let mut succ = vec![Vec::new(); n];
    for &(u, v) in &g.arcs {
        if allowed[u] && allowed[v] {
            succ[u].push(v);
        }
    }
    succ
}

fn paths(g: &ReachGraph, scene: &Scene, state: &[u32]) -> Option<Vec<Vec<usize>>> {
    (0..scene.outputs.len())
        .map(|i| {
            let succ = induced_successors(g, state, scene.outputs[i].weight, i);
            shortest_lexicographic(&succ, ReachGraph::INPUT, g.output(i))
        })
        .collect()
}

pub fn astar_layout(scene: &Scene, g: &ReachGraph, params: &AstarParams) -> Result<AstarResult, AstarError> {
    let start = Instant::now();
    let mut stats = AstarStats::default();
    let fail = |failure, mut stats: AstarStats| {
        stats.elapsed = start.elapsed();
        Err(AstarError { failure, stats })
    };
    let arms: Vec<usize> = g.placements().filter(|&v| g.vertices[v].is_arm()).collect();
    let Some(l) = arms.iter().map(|&v| scene.catalog[g.vertices[v].robot().unwrap()].reach_max).reduce(f64::max) else {
        return fail(AstarFailure::Infeasible, stats);
    };
    let unit = arms.iter().map(|&v| g.vertices[v].cost).fold(f64::INFINITY, f64::min);
    let point_of = |v: u32| g.vertices[v as usize].point().unwrap();

    let mut heap = BinaryHeap::new();
    let mut seen: HashSet<Vec<u32>> = HashSet::new();
    let mut seq = 0u64;
    let h0 = heuristic(&[], scene, l);
    heap.push(Entry {
        f: h0 as f64 * unit,
        h: h0,
        seq,
        state: Vec::new(),
        g: 0.0,
    });
    seen.insert(Vec::new());

    while let Some(entry) = heap.pop() {
        if stats.expanded % 256 == 0 && start.elapsed() >= params.time_limit {
            return fail(AstarFailure::Timeout, stats);
        }
        stats.expanded += 1;
        if entry.h == 0 {
            if let Some(paths) = paths(g, scene, &entry.state) {
                let robots = entry
                    .state
                    .iter()
                    .map(|&v| {
                        let vx = &g.vertices[v as usize];
                        let VertexKind::Arm { robot, .. } = vx.kind else { unreachable!() };
                        PlacedRobot {
                            id: v as usize,
                            robot_type: scene.catalog[robot].id.clone(),
                            x: vx.pos.x,
                            y: vx.pos.y,
                        }
                    })
                    .collect();
                stats.elapsed = start.elapsed();
                return Ok(AstarResult {
                    layout: Layout {
                        robots,
                        belts: Vec::new(),
                        junctions: Vec::new(),
                        paths,
                        total_cost: entry.g,
                    },
                    stats,
                });
            }
        }
        let occupied: Vec<usize> = entry.state.iter().map(|&v| point_of(v)).collect();
        let mut frontier: Vec<u32> = std::iter::once(ReachGraph::INPUT)
            .chain(entry.state.iter().map(|&v| v as usize))
            .flat_map(|u| g.successors(u))
            .filter(|&v| g.vertices[v].is_arm())
            .map(|v| v as u32)
            .filter(|v| !occupied.contains(&point_of(*v)))
            .collect();
        frontier.sort_unstable();
        frontier.dedup();
        for v in frontier {
            let mut next = entry.state.clone();
            let pos = next.binary_search(&v).unwrap_err();
            next.insert(pos, v);
            if !seen.insert(next.clone()) {
                continue;
            }
            if seen.len() > params.max_states {
                return fail(AstarFailure::OutOfMemory, stats);
            }
            stats.generated += 1;
            let pts: Vec<Point> = next.iter().map(|&u| g.vertices[u as usize].pos).collect();
            let h = heuristic(&pts, scene, l);
            let gv = entry.g + g.vertices[v as usize].cost;
            seq += 1;
            heap.push(Entry {
                f: gv + h as f64 * unit,
                h,
                seq,
                state: next,
                g: gv,
            });
        }
    }
    fail(AstarFailure::Infeasible, stats)
}
