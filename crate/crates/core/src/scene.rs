//! Scene documents, the robot catalog and the placement grid.

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::geometry::Point;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum RobotKind {
    Arm,
    Belt,
}

/// A robot or conveyor type. For belts `cost` is the price per meter and the
/// reach fields are unused (kept at zero).
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct RobotType {
    pub id: String,
    pub kind: RobotKind,
    pub cost: f64,
    pub reach_min: f64,
    pub reach_max: f64,
    pub clearance: f64,
    pub payload: f64,
}

impl RobotType {
    pub fn ur5e() -> Self {
        RobotType {
            id: "UR5e".into(),
            kind: RobotKind::Arm,
            cost: 1.0,
            reach_min: 0.18,
            reach_max: 0.85,
            clearance: 0.15,
            payload: 5.0,
        }
    }

    pub fn irb4600() -> Self {
        RobotType {
            id: "IRB4600".into(),
            kind: RobotKind::Arm,
            cost: 3.0,
            reach_min: 0.4,
            reach_max: 2.05,
            clearance: 0.35,
            payload: 60.0,
        }
    }

    pub fn belt(costs: &CostTable) -> Self {
        RobotType {
            id: "belt".into(),
            kind: RobotKind::Belt,
            cost: costs.belt_per_meter,
            reach_min: 0.0,
            reach_max: 0.0,
            clearance: 0.05,
            payload: 25.0,
        }
    }

    /// Built-in type with the given id, if any.
    pub fn builtin(id: &str, costs: &CostTable) -> Option<Self> {
        match id {
            "UR5e" => Some(Self::ur5e()),
            "IRB4600" => Some(Self::irb4600()),
            "belt" => Some(Self::belt(costs)),
            _ => None,
        }
    }

    pub fn is_arm(&self) -> bool {
        self.kind == RobotKind::Arm
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct CostTable {
    pub belt_per_meter: f64,
    pub motor: f64,
    pub multiway: f64,
    pub turning: f64,
}

impl Default for CostTable {
    fn default() -> Self {
        CostTable {
            belt_per_meter: 0.2,
            motor: 0.1,
            multiway: 0.1,
            turning: 0.05,
        }
    }
}

impl CostTable {
    /// Multiplies every junction cost by `k`.
    pub fn with_junction_factor(mut self, k: f64) -> Self {
        self.multiway *= k;
        self.turning *= k;
        self
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct Floor {
    pub min: Point,
    pub max: Point,
}

impl Floor {
    pub fn contains(&self, p: Point) -> bool {
        const EPS: f64 = 1e-9;
        p.x >= self.min.x - EPS
            && p.x <= self.max.x + EPS
            && p.y >= self.min.y - EPS
            && p.y <= self.max.y + EPS
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct Output {
    pub pos: Point,
    pub weight: f64,
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct Scene {
    pub floor: Floor,
    pub spacing: f64,
    pub input: Point,
    pub outputs: Vec<Output>,
    pub catalog: Vec<RobotType>,
    pub costs: CostTable,
}

/// Largest grid accepted by [`parse_scene`].
pub const MAX_GRID_POINTS: usize = 100_000;

#[derive(Clone, Debug, PartialEq, Eq, Error)]
pub enum SceneErrorKind {
    #[error("malformed document: {0}")]
    Malformed(String),
    #[error("missing {0}")]
    Missing(&'static str),
    #[error("missing input")]
    MissingInput,
    #[error("zero outputs")]
    ZeroOutputs,
    #[error("output outside floor")]
    OutputOutsideFloor,
    #[error("nonpositive spacing")]
    NonpositiveSpacing,
    #[error("floor min exceeds max")]
    InvalidFloor,
    #[error("non-finite value")]
    NonFinite,
    #[error("negative weight")]
    NegativeWeight,
    #[error("invalid robot type: {0}")]
    InvalidRobot(String),
    #[error("duplicate robot id")]
    DuplicateRobot,
    #[error("more than one belt type")]
    MultipleBelts,
    #[error("negative cost")]
    NegativeCost,
    #[error("grid exceeds {MAX_GRID_POINTS} points")]
    GridTooLarge,
}

#[derive(Clone, Debug, PartialEq, Eq, Error)]
#[error("{path}: {kind}")]
pub struct SceneError {
    pub path: String,
    pub kind: SceneErrorKind,
}

impl SceneError {
    fn at(path: impl Into<String>, kind: SceneErrorKind) -> Self {
        SceneError {
            path: path.into(),
            kind,
        }
    }
}

#[derive(Deserialize)]
#[serde(deny_unknown_fields)]
struct RawScene {
    floor: Option<Floor>,
    spacing: Option<f64>,
    input: Option<Point>,
    outputs: Option<Vec<Output>>,
    catalog: Option<Vec<RawRobot>>,
    costs: Option<RawCosts>,
}

#[derive(Deserialize)]
#[serde(deny_unknown_fields)]
struct RawRobot {
    id: String,
    kind: Option<RobotKind>,
    cost: Option<f64>,
    reach_min: Option<f64>,
    reach_max: Option<f64>,
    clearance: Option<f64>,
    payload: Option<f64>,
}

#[derive(Deserialize)]
#[serde(deny_unknown_fields)]
struct RawCosts {
    belt_per_meter: Option<f64>,
    motor: Option<f64>,
    multiway: Option<f64>,
    turning: Option<f64>,
}

fn finite(v: f64, path: &str) -> Result<f64, SceneError> {
    if v.is_finite() {
        Ok(v)
    } else {
        Err(SceneError::at(path, SceneErrorKind::NonFinite))
    }
}

fn finite_point(p: Point, path: &str) -> Result<Point, SceneError> {
    if p.is_finite() {
        Ok(p)
    } else {
        Err(SceneError::at(path, SceneErrorKind::NonFinite))
    }
}

fn resolve_costs(raw: Option<RawCosts>) -> Result<CostTable, SceneError> {
    let d = CostTable::default();
    let Some(raw) = raw else { return Ok(d) };
    let mut out = d;
    for (slot, given, name) in [
        (&mut out.belt_per_meter, raw.belt_per_meter, "belt_per_meter"),
        (&mut out.motor, raw.motor, "motor"),
        (&mut out.multiway, raw.multiway, "multiway"),
        (&mut out.turning, raw.turning, "turning"),
    ] {
        if let Some(v) = given {
            let path = format!("costs.{name}");
            finite(v, &path)?;
            if v < 0.0 {
                return Err(SceneError::at(path, SceneErrorKind::NegativeCost));
            }
            *slot = v;
        }
    }
    Ok(out)
}

fn resolve_robot(raw: RawRobot, index: usize, costs: &CostTable) -> Result<RobotType, SceneError> {
    let path = format!("catalog[{index}]");
    let base = RobotType::builtin(&raw.id, costs);
    let field = |given: Option<f64>, default: Option<f64>, name: &'static str| -> Result<f64, SceneError> {
        let p = format!("{path}.{name}");
        match given.or(default) {
            Some(v) => finite(v, &p),
            None => Err(SceneError::at(p, SceneErrorKind::Missing(name))),
        }
    };
    let kind = match (raw.kind, &base) {
        (Some(k), _) => k,
        (None, Some(b)) => b.kind,
        (None, None) => return Err(SceneError::at(format!("{path}.kind"), SceneErrorKind::Missing("kind"))),
    };
    // A builtin id with an overridden kind keeps no defaults.
    let base = base.filter(|b| b.kind == kind);
    let pick = |f: fn(&RobotType) -> f64| base.as_ref().map(f);
    let is_belt = kind == RobotKind::Belt;
    let robot = RobotType {
        id: raw.id,
        kind,
        cost: field(raw.cost, pick(|b| b.cost).or(is_belt.then_some(costs.belt_per_meter)), "cost")?,
        reach_min: field(raw.reach_min, pick(|b| b.reach_min).or(is_belt.then_some(0.0)), "reach_min")?,
        reach_max: field(raw.reach_max, pick(|b| b.reach_max).or(is_belt.then_some(0.0)), "reach_max")?,
        clearance: field(raw.clearance, pick(|b| b.clearance), "clearance")?,
        payload: field(raw.payload, pick(|b| b.payload), "payload")?,
    };
    let bad = |msg: &str| Err(SceneError::at(path.clone(), SceneErrorKind::InvalidRobot(msg.into())));
    if robot.cost < 0.0 {
        return Err(SceneError::at(format!("{path}.cost"), SceneErrorKind::NegativeCost));
    }
    if robot.clearance <= 0.0 {
        return bad("clearance must be positive");
    }
    if robot.payload <= 0.0 {
        return bad("payload must be positive");
    }
    if robot.is_arm() && !(robot.reach_min >= 0.0 && robot.reach_min < robot.reach_max) {
        return bad("reach must satisfy 0 <= reach_min < reach_max");
    }
    Ok(robot)
}

/// Parses and validates a JSON scene document.
pub fn parse_scene(text: &str) -> Result<Scene, SceneError> {
    let de = &mut serde_json::Deserializer::from_str(text);
    let raw: RawScene = serde_path_to_error::deserialize(de).map_err(|e| {
        let path = e.path().to_string();
        SceneError::at(path, SceneErrorKind::Malformed(e.into_inner().to_string()))
    })?;
    scene_from_raw(raw)
}

fn scene_from_raw(raw: RawScene) -> Result<Scene, SceneError> {
    let floor = raw
        .floor
        .ok_or_else(|| SceneError::at("floor", SceneErrorKind::Missing("floor")))?;
    finite_point(floor.min, "floor.min")?;
    finite_point(floor.max, "floor.max")?;
    if floor.min.x > floor.max.x || floor.min.y > floor.max.y {
        return Err(SceneError::at("floor", SceneErrorKind::InvalidFloor));
    }
    let spacing = raw
        .spacing
        .ok_or_else(|| SceneError::at("spacing", SceneErrorKind::Missing("spacing")))?;
    finite(spacing, "spacing")?;
    if spacing <= 0.0 {
        return Err(SceneError::at("spacing", SceneErrorKind::NonpositiveSpacing));
    }
    let (nx, ny) = axis_counts(&floor, spacing);
    if nx.saturating_mul(ny) > MAX_GRID_POINTS {
        return Err(SceneError::at("spacing", SceneErrorKind::GridTooLarge));
    }
    let input = raw
        .input
        .ok_or_else(|| SceneError::at("input", SceneErrorKind::MissingInput))?;
    finite_point(input, "input")?;
    let outputs = raw.outputs.unwrap_or_default();
    if outputs.is_empty() {
        return Err(SceneError::at("outputs", SceneErrorKind::ZeroOutputs));
    }
    for (i, o) in outputs.iter().enumerate() {
        finite_point(o.pos, &format!("outputs[{i}].pos"))?;
        finite(o.weight, &format!("outputs[{i}].weight"))?;
        if o.weight < 0.0 {
            return Err(SceneError::at(format!("outputs[{i}].weight"), SceneErrorKind::NegativeWeight));
        }
        if !floor.contains(o.pos) {
            return Err(SceneError::at(format!("outputs[{i}].pos"), SceneErrorKind::OutputOutsideFloor));
        }
    }
    let costs = resolve_costs(raw.costs)?;
    let catalog = match raw.catalog {
        None => vec![RobotType::ur5e()],
        Some(list) => list
            .into_iter()
            .enumerate()
            .map(|(i, r)| resolve_robot(r, i, &costs))
            .collect::<Result<Vec<_>, _>>()?,
    };
    let mut belts = 0;
    for (i, r) in catalog.iter().enumerate() {
        if catalog[..i].iter().any(|o| o.id == r.id) {
            return Err(SceneError::at(format!("catalog[{i}].id"), SceneErrorKind::DuplicateRobot));
        }
        if r.kind == RobotKind::Belt {
            belts += 1;
            if belts > 1 {
                return Err(SceneError::at(format!("catalog[{i}]"), SceneErrorKind::MultipleBelts));
            }
        }
    }
    Ok(Scene {
        floor,
        spacing,
        input,
        outputs,
        catalog,
        costs,
    })
}

fn axis_counts(floor: &Floor, spacing: f64) -> (usize, usize) {
    let count = |w: f64| {
        let n = (w / spacing + 1e-9).floor();
        if n.is_finite() && n < 1e9 {
            n as usize + 1
        } else {
            usize::MAX
        }
    };
    (
        count(floor.max.x - floor.min.x),
        count(floor.max.y - floor.min.y),
    )
}

impl Scene {
    /// A scene with the given geometry, default costs and a UR5e-only catalog.
    pub fn new(floor_min: Point, floor_max: Point, spacing: f64, input: Point, outputs: Vec<Output>) -> Self {
        Scene {
            floor: Floor {
                min: floor_min,
                max: floor_max,
            },
            spacing,
            input,
            outputs,
            catalog: vec![RobotType::ur5e()],
            costs: CostTable::default(),
        }
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("scene serialization is infallible")
    }

    /// Re-runs document validation on an in-memory scene.
    pub fn validate(&self) -> Result<(), SceneError> {
        parse_scene(&self.to_json()).map(|_| ())
    }

    pub fn num_outputs(&self) -> usize {
        self.outputs.len()
    }

    /// `(columns, rows)` of the placement grid.
    pub fn grid_shape(&self) -> (usize, usize) {
        axis_counts(&self.floor, self.spacing)
    }

    pub fn arm_types(&self) -> impl Iterator<Item = (usize, &RobotType)> {
        self.catalog.iter().enumerate().filter(|(_, r)| r.is_arm())
    }

    pub fn belt_type(&self) -> Option<(usize, &RobotType)> {
        self.catalog.iter().enumerate().find(|(_, r)| r.kind == RobotKind::Belt)
    }

    pub fn robot(&self, id: &str) -> Option<&RobotType> {
        self.catalog.iter().find(|r| r.id == id)
    }
}

/// Row-major lattice points (y outer, x inner), both boundaries included.
pub fn grid_points(scene: &Scene) -> Vec<Point> {
    let (nx, ny) = scene.grid_shape();
    let mut pts = Vec::with_capacity(nx * ny);
    for j in 0..ny {
        for i in 0..nx {
            pts.push(Point::new(
                scene.floor.min.x + i as f64 * scene.spacing,
                scene.floor.min.y + j as f64 * scene.spacing,
            ));
        }
    }
    pts
}
