//! Candidate placements and the directed handover graph between them.

use serde::{Deserialize, Serialize};

use crate::geometry::{segment_distance, segment_distance_range, Point};
use crate::scene::{grid_points, RobotKind, RobotType, Scene};

/// The eight belt travel directions, counter-clockwise from east.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub enum Direction {
    E,
    NE,
    N,
    NW,
    W,
    SW,
    S,
    SE,
}

impl Direction {
    pub const ALL: [Direction; 8] = [
        Direction::E,
        Direction::NE,
        Direction::N,
        Direction::NW,
        Direction::W,
        Direction::SW,
        Direction::S,
        Direction::SE,
    ];

    /// Grid offset `(di, dj)` of one step.
    pub fn delta(self) -> (i64, i64) {
        match self {
            Direction::E => (1, 0),
            Direction::NE => (1, 1),
            Direction::N => (0, 1),
            Direction::NW => (-1, 1),
            Direction::W => (-1, 0),
            Direction::SW => (-1, -1),
            Direction::S => (0, -1),
            Direction::SE => (1, -1),
        }
    }

    pub fn is_diagonal(self) -> bool {
        let (a, b) = self.delta();
        a != 0 && b != 0
    }

    pub fn opposite(self) -> Direction {
        Direction::ALL[(self as usize + 4) % 8]
    }

    pub fn angle(self) -> f64 {
        self as usize as f64 * std::f64::consts::FRAC_PI_4
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
#[serde(tag = "kind", rename_all = "lowercase")]
pub enum VertexKind {
    Input,
    Output { index: usize },
    Arm { point: usize, robot: usize },
    /// A directed belt segment from grid point `point` to grid point `end`.
    Belt {
        point: usize,
        end: usize,
        robot: usize,
        dir: Direction,
    },
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct Vertex {
    pub kind: VertexKind,
    /// Port location, arm base, or belt anchor.
    pub pos: Point,
    /// Hardware cost of the element (zero for ports).
    pub cost: f64,
    /// Heaviest box the element can carry (infinite for ports).
    #[serde(skip)]
    pub payload: f64,
}

impl Vertex {
    pub fn is_io(&self) -> bool {
        matches!(self.kind, VertexKind::Input | VertexKind::Output { .. })
    }

    pub fn is_belt(&self) -> bool {
        matches!(self.kind, VertexKind::Belt { .. })
    }

    pub fn is_arm(&self) -> bool {
        matches!(self.kind, VertexKind::Arm { .. })
    }

    /// Grid point index of a placement.
    pub fn point(&self) -> Option<usize> {
        match self.kind {
            VertexKind::Arm { point, .. } | VertexKind::Belt { point, .. } => Some(point),
            _ => None,
        }
    }

    pub fn robot(&self) -> Option<usize> {
        match self.kind {
            VertexKind::Arm { robot, .. } | VertexKind::Belt { robot, .. } => Some(robot),
            _ => None,
        }
    }
}

/// Geometry of one handover partner.
#[derive(Clone, Copy, Debug)]
pub enum Entity<'a> {
    Port(Point),
    Arm { base: Point, robot: &'a RobotType },
    Belt { from: Point, to: Point },
}

/// Decides whether a box can pass between two entities.
pub trait HandoverModel {
    fn can_hand_over(&self, a: &Entity, b: &Entity) -> bool;
}

/// Closed-form planar model: reach annuli, belt centerlines and base
/// clearance discs.
#[derive(Clone, Copy, Debug, Default)]
pub struct PlanarAnnulus;

impl HandoverModel for PlanarAnnulus {
    fn can_hand_over(&self, a: &Entity, b: &Entity) -> bool {
        can_hand_over(a, b)
    }
}

fn arm_port(base: Point, r: &RobotType, port: Point) -> bool {
    let d = base.dist(port);
    d >= r.clearance && d >= r.reach_min && d <= r.reach_max
}

fn arm_belt(base: Point, r: &RobotType, from: Point, to: Point) -> bool {
    let (lo, hi) = segment_distance_range(base, from, to);
    lo <= r.reach_max && hi >= r.reach_min && segment_distance(base, from, to) >= r.clearance
}

pub fn can_hand_over(a: &Entity, b: &Entity) -> bool {
    match (a, b) {
        (Entity::Arm { base: p, robot: r }, Entity::Arm { base: q, robot: s }) => {
            let d = p.dist(*q);
            d >= r.clearance + s.clearance
                && d <= r.reach_max + s.reach_max
                && d >= r.reach_min - s.reach_max
                && d >= s.reach_min - r.reach_max
        }
        (Entity::Arm { base, robot }, Entity::Port(port))
        | (Entity::Port(port), Entity::Arm { base, robot }) => arm_port(*base, robot, *port),
        (Entity::Arm { base, robot }, Entity::Belt { from, to })
        | (Entity::Belt { from, to }, Entity::Arm { base, robot }) => arm_belt(*base, robot, *from, *to),
        _ => false,
    }
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct ReachGraph {
    pub vertices: Vec<Vertex>,
    pub arcs: Vec<(usize, usize)>,
    #[serde(skip)]
    pub out_arcs: Vec<Vec<usize>>,
    #[serde(skip)]
    pub in_arcs: Vec<Vec<usize>>,
    pub points: Vec<Point>,
    /// Grid columns and rows.
    pub shape: (usize, usize),
    pub spacing: f64,
    pub n_outputs: usize,
    #[serde(skip)]
    pub arms_at: Vec<Vec<usize>>,
    #[serde(skip)]
    pub belts_from: Vec<Vec<usize>>,
    #[serde(skip)]
    pub belts_to: Vec<Vec<usize>>,
    pub warnings: Vec<String>,
}

impl ReachGraph {
    pub const INPUT: usize = 0;

    pub fn output(&self, i: usize) -> usize {
        1 + i
    }

    pub fn num_vertices(&self) -> usize {
        self.vertices.len()
    }

    /// Ids of all placement vertices.
    pub fn placements(&self) -> std::ops::Range<usize> {
        1 + self.n_outputs..self.vertices.len()
    }

    pub fn successors(&self, v: usize) -> impl Iterator<Item = usize> + '_ {
        self.out_arcs[v].iter().map(move |&a| self.arcs[a].1)
    }

    pub fn predecessors(&self, v: usize) -> impl Iterator<Item = usize> + '_ {
        self.in_arcs[v].iter().map(move |&a| self.arcs[a].0)
    }

    pub fn has_arc(&self, u: usize, v: usize) -> bool {
        self.out_arcs[u].iter().any(|&a| self.arcs[a].1 == v)
    }

    /// Grid point `(i, j)` → index, if inside the grid.
    pub fn point_index(&self, i: i64, j: i64) -> Option<usize> {
        let (nx, ny) = self.shape;
        (i >= 0 && j >= 0 && (i as usize) < nx && (j as usize) < ny).then(|| j as usize * nx + i as usize)
    }

    pub fn point_coords(&self, p: usize) -> (i64, i64) {
        ((p % self.shape.0) as i64, (p / self.shape.0) as i64)
    }

    /// The belt vertex with the given anchor and direction, if it exists.
    pub fn belt(&self, from: usize, dir: Direction) -> Option<usize> {
        self.belts_from[from].iter().copied().find(|&b| match self.vertices[b].kind {
            VertexKind::Belt { dir: d, .. } => d == dir,
            _ => false,
        })
    }

    /// Belt endpoints `(from, to)` as grid points.
    pub fn belt_ends(&self, v: usize) -> Option<(usize, usize)> {
        match self.vertices[v].kind {
            VertexKind::Belt { point, end, .. } => Some((point, end)),
            _ => None,
        }
    }

    pub fn belt_dir(&self, v: usize) -> Option<Direction> {
        match self.vertices[v].kind {
            VertexKind::Belt { dir, .. } => Some(dir),
            _ => None,
        }
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("graph serialization is infallible")
    }

    fn entity<'a>(&self, v: usize, scene: &'a Scene) -> Entity<'a> {
        let vx = &self.vertices[v];
        match vx.kind {
            VertexKind::Input | VertexKind::Output { .. } => Entity::Port(vx.pos),
            VertexKind::Arm { robot, .. } => Entity::Arm {
                base: vx.pos,
                robot: &scene.catalog[robot],
            },
            VertexKind::Belt { end, .. } => Entity::Belt {
                from: vx.pos,
                to: self.points[end],
            },
        }
    }
}

pub fn belt_length(spacing: f64, dir: Direction) -> f64 {
    if dir.is_diagonal() {
        spacing * std::f64::consts::SQRT_2
    } else {
        spacing
    }
}

pub fn build_reachability_graph(scene: &Scene) -> ReachGraph {
    build_with(scene, &PlanarAnnulus)
}

pub fn build_with(scene: &Scene, model: &dyn HandoverModel) -> ReachGraph {
    let points = grid_points(scene);
    let shape = scene.grid_shape();
    let np = points.len();
    let mut vertices = vec![Vertex {
        kind: VertexKind::Input,
        pos: scene.input,
        cost: 0.0,
        payload: f64::INFINITY,
    }];
    for (index, o) in scene.outputs.iter().enumerate() {
        vertices.push(Vertex {
            kind: VertexKind::Output { index },
            pos: o.pos,
            cost: 0.0,
            payload: f64::INFINITY,
        });
    }
    let mut arms_at = vec![Vec::new(); np];
    let mut belts_from = vec![Vec::new(); np];
    let mut belts_to = vec![Vec::new(); np];
    for (p, &pos) in points.iter().enumerate() {
        for (robot, r) in scene.arm_types() {
            arms_at[p].push(vertices.len());
            vertices.push(Vertex {
                kind: VertexKind::Arm { point: p, robot },
                pos,
                cost: r.cost,
                payload: r.payload,
            });
        }
    }
    if let Some((robot, belt)) = scene.belt_type() {
        debug_assert_eq!(belt.kind, RobotKind::Belt);
        for (p, &pos) in points.iter().enumerate() {
            let (i, j) = ((p % shape.0) as i64, (p / shape.0) as i64);
            for dir in Direction::ALL {
                let (di, dj) = dir.delta();
                let (ei, ej) = (i + di, j + dj);
                if ei < 0 || ej < 0 || ei as usize >= shape.0 || ej as usize >= shape.1 {
                    continue;
                }
                let end = ej as usize * shape.0 + ei as usize;
                belts_from[p].push(vertices.len());
                belts_to[end].push(vertices.len());
                vertices.push(Vertex {
                    kind: VertexKind::Belt {
                        point: p,
                        end,
                        robot,
                        dir,
                    },
                    pos,
                    cost: belt.cost * belt_length(scene.spacing, dir) + scene.costs.motor,
                    payload: belt.payload,
                });
            }
        }
    }

    let n = vertices.len();
    let mut g = ReachGraph {
        vertices,
        arcs: Vec::new(),
        out_arcs: vec![Vec::new(); n],
        in_arcs: vec![Vec::new(); n],
        points,
        shape,
        spacing: scene.spacing,
        n_outputs: scene.outputs.len(),
        arms_at,
        belts_from,
        belts_to,
        warnings: Vec::new(),
    };
    let entities: Vec<Entity> = (0..n).map(|v| g.entity(v, scene)).collect();
    for u in 0..n {
        if matches!(g.vertices[u].kind, VertexKind::Output { .. }) {
            continue;
        }
        for v in 0..n {
            if u == v || v == ReachGraph::INPUT {
                continue;
            }
            if g.vertices[u].is_io() && g.vertices[v].is_io() {
                continue;
            }
            if model.can_hand_over(&entities[u], &entities[v]) {
                let a = g.arcs.len();
                g.arcs.push((u, v));
                g.out_arcs[u].push(a);
                g.in_arcs[v].push(a);
            }
        }
    }
    if g.out_arcs[ReachGraph::INPUT].is_empty() {
        g.warnings.push("input isolated".into());
    }
    g
}
