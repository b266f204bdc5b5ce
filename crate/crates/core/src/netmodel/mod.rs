//! Vertex-split flow network, junction gadgets, MILP compilation and layout
//! extraction.

mod compile;
mod extract;
mod network;

pub use compile::{compile_milp, Family, MilpModel, RowMeta};
pub use extract::{extract_layout, layout_from_selection, shortest_lexicographic, ExtractError, Selection};
pub use network::{
    add_junction_gadgets, build_network, split_vertices, ArcKind, Coupling, FlowNetwork, NetArc, NodeKind,
};

use layout_milp::{solve_milp, MilpError, MilpParams, MilpSolution};

use crate::layout::Layout;
use crate::reach::{build_reachability_graph, ReachGraph};
use crate::scene::Scene;

/// Everything produced by one optimization run.
#[derive(Clone, Debug)]
pub struct Optimized {
    pub graph: ReachGraph,
    pub net: FlowNetwork,
    pub milp: MilpModel,
    pub solution: MilpSolution,
    /// Present whenever the solver returned an incumbent.
    pub layout: Option<Layout>,
}

#[derive(Debug, thiserror::Error)]
pub enum OptimizeError {
    #[error(transparent)]
    Solver(#[from] MilpError),
    #[error(transparent)]
    Extract(#[from] ExtractError),
}

/// Reachability graph, network, MILP, branch-and-bound and extraction.
pub fn optimize(scene: &Scene, params: &MilpParams) -> Result<Optimized, OptimizeError> {
    let graph = build_reachability_graph(scene);
    let net = build_network(&graph, scene);
    let milp = compile_milp(&net, &graph, scene);
    let solution = solve_milp(&milp.model, params)?;
    let layout = if solution.has_incumbent() {
        Some(extract_layout(&net, &milp, &graph, scene, &solution.values)?)
    } else {
        None
    };
    Ok(Optimized {
        graph,
        net,
        milp,
        solution,
        layout,
    })
}

#[cfg(test)]
mod tests;
