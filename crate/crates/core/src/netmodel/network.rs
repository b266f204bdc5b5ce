use serde::Serialize;

use crate::layout::JunctionKind;
use crate::reach::ReachGraph;
use crate::scene::Scene;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
pub enum NodeKind {
    /// Unsplit input or output port (reach vertex id).
    Port(usize),
    /// In-copy of a placement vertex.
    In(usize),
    /// Out-copy of a placement vertex.
    Out(usize),
    JunctionIn { point: usize, kind: JunctionKind },
    JunctionOut { point: usize, kind: JunctionKind },
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
pub enum ArcKind {
    /// A reachability arc between reach vertices.
    Reach { from: usize, to: usize },
    /// Selection arc joining the two copies of a placement.
    Element { vertex: usize },
    /// Motor-sharing link between two collinear belts.
    Inline { from: usize, to: usize },
    /// Costed arc of a multi-way or turning gadget.
    Core { kind: JunctionKind },
    /// Belt (ending at the junction) into the gadget.
    Entry { kind: JunctionKind, belt: usize },
    /// Gadget out to a belt starting at the junction.
    Exit { kind: JunctionKind, belt: usize },
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct NetArc {
    pub tail: usize,
    pub head: usize,
    pub kind: ArcKind,
    pub weight: f64,
    /// Heaviest box this arc may carry.
    pub payload: f64,
    /// Grid point of the element behind a costed arc.
    pub coor: Option<usize>,
}

impl NetArc {
    pub fn is_costed(&self) -> bool {
        matches!(
            self.kind,
            ArcKind::Element { .. } | ArcKind::Inline { .. } | ArcKind::Core { .. }
        )
    }
}

/// Linear side conditions on selection variables added by the gadgets.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub enum Coupling {
    /// `s[arc] <= s[by]`.
    AtMost { arc: usize, by: usize },
    /// `sum s[arcs] <= 1`.
    AtMostOne(Vec<usize>),
    /// `sum s[arcs] = s[target]`.
    SumEquals { arcs: Vec<usize>, target: usize },
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct FlowNetwork {
    pub nodes: Vec<NodeKind>,
    pub arcs: Vec<NetArc>,
    /// Node receiving inbound arcs of each reach vertex.
    pub in_node: Vec<usize>,
    /// Node emitting outbound arcs of each reach vertex.
    pub out_node: Vec<usize>,
    /// Element arc of each placement vertex.
    pub element_arc: Vec<Option<usize>>,
    pub couplings: Vec<(String, Coupling)>,
    pub n_outputs: usize,
}

impl FlowNetwork {
    pub fn input_node(&self) -> usize {
        self.out_node[ReachGraph::INPUT]
    }

    pub fn output_node(&self, i: usize) -> usize {
        self.in_node[1 + i]
    }

    pub fn num_aux(&self) -> usize {
        self.element_arc.iter().flatten().count()
    }

    fn add_node(&mut self, kind: NodeKind) -> usize {
        self.nodes.push(kind);
        self.nodes.len() - 1
    }

    fn add_arc(&mut self, arc: NetArc) -> usize {
        self.arcs.push(arc);
        self.arcs.len() - 1
    }

    /// Incoming and outgoing arc lists per node.
    pub fn incidence(&self) -> (Vec<Vec<usize>>, Vec<Vec<usize>>) {
        let mut ins = vec![Vec::new(); self.nodes.len()];
        let mut outs = vec![Vec::new(); self.nodes.len()];
        for (a, arc) in self.arcs.iter().enumerate() {
            outs[arc.tail].push(a);
            ins[arc.head].push(a);
        }
        (ins, outs)
    }
}

/// Replaces every placement by an in-copy and an out-copy joined by an
/// element arc weighted with the placement's cost.
pub fn split_vertices(g: &ReachGraph) -> FlowNetwork {
    let mut net = FlowNetwork {
        nodes: Vec::new(),
        arcs: Vec::new(),
        in_node: Vec::with_capacity(g.num_vertices()),
        out_node: Vec::with_capacity(g.num_vertices()),
        element_arc: vec![None; g.num_vertices()],
        couplings: Vec::new(),
        n_outputs: g.n_outputs,
    };
    for (v, vx) in g.vertices.iter().enumerate() {
        if vx.is_io() {
            let n = net.add_node(NodeKind::Port(v));
            net.in_node.push(n);
            net.out_node.push(n);
        } else {
            let i = net.add_node(NodeKind::In(v));
            let o = net.add_node(NodeKind::Out(v));
            net.in_node.push(i);
            net.out_node.push(o);
        }
    }
    for &(u, v) in &g.arcs {
        let arc = NetArc {
            tail: net.out_node[u],
            head: net.in_node[v],
            kind: ArcKind::Reach { from: u, to: v },
            weight: 0.0,
            payload: f64::INFINITY,
            coor: None,
        };
        net.add_arc(arc);
    }
    for v in g.placements() {
        let vx = &g.vertices[v];
        let a = net.add_arc(NetArc {
            tail: net.in_node[v],
            head: net.out_node[v],
            kind: ArcKind::Element { vertex: v },
            weight: vx.cost,
            payload: vx.payload,
            coor: vx.point(),
        });
        net.element_arc[v] = Some(a);
    }
    net
}

/// Adds inline links, multi-way gadgets and turning gadgets at every grid
/// point that has belt candidates.
pub fn add_junction_gadgets(mut net: FlowNetwork, g: &ReachGraph, scene: &Scene) -> FlowNetwork {
    let Some((_, belt)) = scene.belt_type() else {
        return net;
    };
    let payload = belt.payload;
    let costs = scene.costs;
    let mut inline_from: Vec<Vec<usize>> = vec![Vec::new(); g.num_vertices()];
    let mut inline_to: Vec<Vec<usize>> = vec![Vec::new(); g.num_vertices()];

    for p in 0..g.points.len() {
        let mut inline_here = Vec::new();
        for &b1 in &g.belts_to[p] {
            let dir = g.belt_dir(b1).expect("belt vertex");
            let Some(b2) = g.belt(p, dir) else { continue };
            let a = net.add_arc(NetArc {
                tail: net.out_node[b1],
                head: net.in_node[b2],
                kind: ArcKind::Inline { from: b1, to: b2 },
                weight: -costs.motor,
                payload,
                coor: Some(p),
            });
            for b in [b1, b2] {
                let by = net.element_arc[b].expect("belt element arc");
                net.couplings.push((format!("inl_{a}_{b}"), Coupling::AtMost { arc: a, by }));
            }
            inline_here.push(a);
            inline_from[b1].push(a);
            inline_to[b2].push(a);
        }

        if g.belts_to[p].is_empty() || g.belts_from[p].is_empty() {
            continue;
        }
        for (kind, weight) in [
            (JunctionKind::MultiWay, costs.multiway),
            (JunctionKind::Turning, costs.turning),
        ] {
            let vin = net.add_node(NodeKind::JunctionIn { point: p, kind });
            let vout = net.add_node(NodeKind::JunctionOut { point: p, kind });
            let core = net.add_arc(NetArc {
                tail: vin,
                head: vout,
                kind: ArcKind::Core { kind },
                weight,
                payload,
                coor: Some(p),
            });
            let entries: Vec<usize> = g.belts_to[p]
                .iter()
                .map(|&b| {
                    net.add_arc(NetArc {
                        tail: net.out_node[b],
                        head: vin,
                        kind: ArcKind::Entry { kind, belt: b },
                        weight: 0.0,
                        payload,
                        coor: Some(p),
                    })
                })
                .collect();
            let exits: Vec<usize> = g.belts_from[p]
                .iter()
                .map(|&b| {
                    net.add_arc(NetArc {
                        tail: vout,
                        head: net.in_node[b],
                        kind: ArcKind::Exit { kind, belt: b },
                        weight: 0.0,
                        payload,
                        coor: Some(p),
                    })
                })
                .collect();
            // A junction interrupts the belts at its point.
            for &a in &inline_here {
                net.couplings.push((format!("inl_jn_{a}_{core}"), Coupling::AtMostOne(vec![a, core])));
            }
            match kind {
                JunctionKind::Turning => {
                    net.couplings.push((
                        format!("turn_in_{p}"),
                        Coupling::SumEquals { arcs: entries, target: core },
                    ));
                    net.couplings.push((
                        format!("turn_out_{p}"),
                        Coupling::SumEquals { arcs: exits, target: core },
                    ));
                }
                _ => {
                    for a in entries.into_iter().chain(exits) {
                        net.couplings.push((format!("mw_{a}"), Coupling::AtMost { arc: a, by: core }));
                    }
                }
            }
        }
    }
    for b in g.placements() {
        if !inline_from[b].is_empty() {
            net.couplings.push((format!("inl_out_{b}"), Coupling::AtMostOne(inline_from[b].clone())));
        }
        if !inline_to[b].is_empty() {
            net.couplings.push((format!("inl_in_{b}"), Coupling::AtMostOne(inline_to[b].clone())));
        }
    }
    net
}

/// Full network: split vertices plus junction gadgets.
pub fn build_network(g: &ReachGraph, scene: &Scene) -> FlowNetwork {
    add_junction_gadgets(split_vertices(g), g, scene)
}
