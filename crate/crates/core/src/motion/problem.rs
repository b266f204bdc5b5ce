use std::collections::BTreeMap;
use std::fmt;

use crate::geometry::{wrap_angle, Point};
use crate::layout::{Element, Layout};
use crate::scene::{RobotKind, Scene};
use crate::sched::Schedule;

use super::kinematics::{PlanarArm, Pose};
use super::MotionError;

/// Conveyor modelled as a prismatic joint moving at constant speed.
#[derive(Clone, Debug, PartialEq)]
pub struct BeltTrack {
    pub vertex: usize,
    pub from: Point,
    pub to: Point,
    pub length: f64,
    /// Boxes carried by the belt; a box's position here is its grasp slot.
    pub boxes: Vec<usize>,
}

impl BeltTrack {
    pub fn new(vertex: usize, from: Point, to: Point) -> Self {
        BeltTrack {
            vertex,
            from,
            to,
            length: from.dist(to),
            boxes: Vec::new(),
        }
    }

    pub fn center(&self) -> Point {
        (self.from + self.to).scale(0.5)
    }

    pub fn axis(&self) -> Point {
        (self.to - self.from).scale(1.0 / self.length)
    }

    pub fn slot(&self, box_index: usize) -> Option<usize> {
        self.boxes.iter().position(|&b| b == box_index)
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum Actor {
    Arm(usize),
    Belt(usize),
}

/// End effector must match `target` at `step`.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct PoseEvent {
    pub actor: Actor,
    pub step: usize,
    pub box_index: usize,
    pub target: Pose,
}

/// Giver and taker meet with opposite headings at `step`.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct HandEvent {
    pub giver: Actor,
    pub taker: Actor,
    pub step: usize,
    pub box_index: usize,
}

/// Box `box_index` lies within belt `belt` at `step`.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct OnBelt {
    pub belt: usize,
    pub box_index: usize,
    pub step: usize,
}

/// Disc centered at fraction `frac` of link `link` of arm `arm`.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct Disc {
    pub arm: usize,
    pub link: usize,
    pub frac: f64,
    pub radius: f64,
}

pub const DISC_FRACTIONS: [f64; 2] = [0.25, 0.75];

/// Identity of one scalar constraint group, used in failure reports.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum ConstraintId {
    Pick { box_index: usize },
    Place { box_index: usize },
    Hand { box_index: usize, step: usize },
    Collision { pair: usize, step: usize },
    JointLimit { arm: usize, step: usize, joint: usize },
    OnBelt { belt: usize, box_index: usize, step: usize },
}

impl fmt::Display for ConstraintId {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match *self {
            ConstraintId::Pick { box_index } => write!(f, "C_pick box {box_index}"),
            ConstraintId::Place { box_index } => write!(f, "C_place box {box_index}"),
            ConstraintId::Hand { box_index, step } => {
                write!(f, "C_hand box {box_index} step {step}")
            }
            ConstraintId::Collision { pair, step } => {
                write!(f, "C_collision pair {pair} step {step}")
            }
            ConstraintId::JointLimit { arm, step, joint } => {
                write!(f, "joint limit arm {arm} joint {joint} step {step}")
            }
            ConstraintId::OnBelt {
                belt,
                box_index,
                step,
            } => write!(f, "on-belt belt {belt} box {box_index} step {step}"),
        }
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct MotionProblem {
    /// Number of time steps; states are indexed `0..n`.
    pub n: usize,
    pub steps_per_dt: usize,
    pub arms: Vec<PlanarArm>,
    pub belts: Vec<BeltTrack>,
    pub picks: Vec<PoseEvent>,
    pub places: Vec<PoseEvent>,
    pub hands: Vec<HandEvent>,
    pub on_belt: Vec<OnBelt>,
    /// Disc pairs checked at every step.
    pub collisions: Vec<(Disc, Disc)>,
    pub beta_v: f64,
    pub beta_a: f64,
    /// Required gap between colliding discs.
    pub margin: f64,
}

pub const BETA_V: f64 = 1.0;
pub const BETA_A: f64 = 0.1;
pub const COLLISION_MARGIN: f64 = 1e-3;

fn step_of(t: f64, dt: f64, steps_per_dt: usize) -> usize {
    (t / dt * steps_per_dt as f64).round().max(0.0) as usize
}

fn bearing(from: Point, to: Point) -> f64 {
    let d = to - from;
    if d.norm() < 1e-12 {
        0.0
    } else {
        d.angle()
    }
}

impl MotionProblem {
    /// Problem with the given robots and no events.
    pub fn empty(n: usize, steps_per_dt: usize, arms: Vec<PlanarArm>, belts: Vec<BeltTrack>) -> Self {
        MotionProblem {
            n,
            steps_per_dt,
            arms,
            belts,
            picks: Vec::new(),
            places: Vec::new(),
            hands: Vec::new(),
            on_belt: Vec::new(),
            collisions: Vec::new(),
            beta_v: BETA_V,
            beta_a: BETA_A,
            margin: COLLISION_MARGIN,
        }
    }

    /// Fills `collisions` with all disc pairs between arms that can come
    /// close, except tool link against tool link, plus first against last
    /// link within one arm.
    pub fn add_collision_pairs(&mut self) {
        self.collisions.clear();
        let discs = |arm: usize, a: &PlanarArm| -> Vec<Disc> {
            (0..3)
                .flat_map(|link| {
                    DISC_FRACTIONS.iter().map(move |&frac| Disc {
                        arm,
                        link,
                        frac,
                        radius: a.clearance / 2.0,
                    })
                })
                .collect()
        };
        for (i, a) in self.arms.iter().enumerate() {
            let da = discs(i, a);
            for x in da.iter().filter(|d| d.link == 0) {
                for y in da.iter().filter(|d| d.link == 2) {
                    self.collisions.push((*x, *y));
                }
            }
            for (j, b) in self.arms.iter().enumerate().skip(i + 1) {
                let reach = a.reach() + b.reach() + (a.clearance + b.clearance) / 2.0;
                if a.base.dist(b.base) > reach {
                    continue;
                }
                let db = discs(j, b);
                for x in &da {
                    for y in &db {
                        if x.link == 2 && y.link == 2 {
                            continue;
                        }
                        self.collisions.push((*x, *y));
                    }
                }
            }
        }
    }

    pub fn num_arm_vars(&self) -> usize {
        self.arms.len() * self.n * 3
    }

    pub fn num_vars(&self) -> usize {
        self.num_arm_vars() + self.belts.iter().map(|b| 2 + 2 * b.boxes.len()).sum::<usize>()
    }

    pub fn joint_index(&self, arm: usize, step: usize, joint: usize) -> usize {
        (arm * self.n + step) * 3 + joint
    }

    /// Index of a belt's offset and speed; grasp offset and yaw of slot `k`
    /// follow at `+ 2 + 2k`.
    pub fn belt_index(&self, belt: usize) -> usize {
        self.num_arm_vars()
            + self.belts[..belt]
                .iter()
                .map(|b| 2 + 2 * b.boxes.len())
                .sum::<usize>()
    }

    pub fn events_at(&self, actor: Actor) -> usize {
        self.picks.iter().filter(|e| e.actor == actor).count()
            + self.places.iter().filter(|e| e.actor == actor).count()
            + self
                .hands
                .iter()
                .filter(|h| h.giver == actor || h.taker == actor)
                .count()
    }
}

fn nearest_on_belt(belt: &BeltTrack, score: impl Fn(Point) -> f64) -> Point {
    const SAMPLES: usize = 40;
    (0..=SAMPLES)
        .map(|k| belt.from + (belt.to - belt.from).scale(k as f64 / SAMPLES as f64))
        .min_by(|a, b| score(*a).total_cmp(&score(*b)))
        .expect("sample set is non-empty")
}

/// Turns a schedule into pick, place, handover and on-belt events over a
/// time grid with `steps_per_dt` steps per slot.
pub fn build_motion_problem(
    schedule: &Schedule,
    layout: &Layout,
    scene: &Scene,
    steps_per_dt: usize,
) -> Result<MotionProblem, MotionError> {
    if steps_per_dt == 0 {
        return Err(MotionError::Unsupported("steps per slot must be positive".into()));
    }
    if !(schedule.dt > 0.0) {
        return Err(MotionError::Unsupported("slot length must be positive".into()));
    }
    let mut actors: BTreeMap<usize, Actor> = BTreeMap::new();
    let mut arms = Vec::new();
    let mut belts = Vec::new();
    for b in &schedule.boxes {
        for task in &b.tasks {
            if actors.contains_key(&task.robot) {
                continue;
            }
            let actor = match layout.element(task.robot) {
                Some(Element::Robot(r)) => {
                    let ty = scene
                        .robot(&r.robot_type)
                        .ok_or_else(|| MotionError::Unsupported(format!("unknown robot type {}", r.robot_type)))?;
                    if ty.kind != RobotKind::Arm {
                        return Err(MotionError::Unsupported(format!("robot {} is not an arm", r.id)));
                    }
                    arms.push(PlanarArm::new(r.id, r.pos(), ty));
                    Actor::Arm(arms.len() - 1)
                }
                Some(Element::Belt(bl)) => {
                    belts.push(BeltTrack::new(bl.id, bl.from, bl.to));
                    Actor::Belt(belts.len() - 1)
                }
                None => {
                    return Err(MotionError::Unsupported(format!(
                        "schedule names element {} missing from the layout",
                        task.robot
                    )))
                }
            };
            actors.insert(task.robot, actor);
        }
    }
    let last = step_of(schedule.makespan(), schedule.dt, steps_per_dt);
    let mut p = MotionProblem::empty(last + 1, steps_per_dt, arms, belts);

    for b in &schedule.boxes {
        let i = b.box_index;
        let path = layout
            .paths
            .get(i)
            .ok_or_else(|| MotionError::Unsupported(format!("box {i} has no path")))?;
        let (Some(first), Some(last)) = (b.tasks.first(), b.tasks.last()) else {
            continue;
        };
        let input = scene.input;
        let output = scene
            .outputs
            .get(path.last().copied().unwrap_or(0).wrapping_sub(1))
            .map(|o| o.pos)
            .ok_or_else(|| MotionError::Unsupported(format!("box {i} does not end at an output")))?;
        let pick_actor = actors[&first.robot];
        let place_actor = actors[&last.robot];
        let (Actor::Arm(pa), Actor::Arm(qa)) = (pick_actor, place_actor) else {
            return Err(MotionError::Unsupported(format!("box {i} is picked or placed by a belt")));
        };
        p.picks.push(PoseEvent {
            actor: pick_actor,
            step: step_of(first.start, schedule.dt, steps_per_dt),
            box_index: i,
            target: Pose::new(input, bearing(p.arms[pa].base, input)),
        });
        p.places.push(PoseEvent {
            actor: place_actor,
            step: step_of(last.end, schedule.dt, steps_per_dt),
            box_index: i,
            target: Pose::new(output, bearing(p.arms[qa].base, output)),
        });
        for w in b.tasks.windows(2) {
            p.hands.push(HandEvent {
                giver: actors[&w[0].robot],
                taker: actors[&w[1].robot],
                step: step_of(w[0].end, schedule.dt, steps_per_dt),
                box_index: i,
            });
        }
        for task in &b.tasks {
            if let Actor::Belt(k) = actors[&task.robot] {
                if !p.belts[k].boxes.contains(&i) {
                    p.belts[k].boxes.push(i);
                }
                let s0 = step_of(task.start, schedule.dt, steps_per_dt);
                let s1 = step_of(task.end, schedule.dt, steps_per_dt);
                for step in s0..=s1 {
                    p.on_belt.push(OnBelt {
                        belt: k,
                        box_index: i,
                        step,
                    });
                }
            }
        }
    }
    p.add_collision_pairs();
    Ok(p)
}

impl MotionProblem {
    /// Starting point: inverse kinematics at every event, joint-space
    /// interpolation between events and a belt speed matching the first box.
    pub fn initial_guess(&self) -> Vec<f64> {
        let mut x = vec![0.0; self.num_vars()];
        let mut arm_events: Vec<Vec<(usize, Pose)>> = vec![Vec::new(); self.arms.len()];
        // (box, step, coordinate along the belt) at entry and exit.
        let mut belt_entry: Vec<Vec<(usize, usize, f64, f64)>> = vec![Vec::new(); self.belts.len()];
        let mut belt_exit: Vec<Vec<(usize, usize, f64)>> = vec![Vec::new(); self.belts.len()];
        let mut box_heading: BTreeMap<usize, f64> = BTreeMap::new();

        for e in self.picks.iter().chain(&self.places) {
            if let Actor::Arm(a) = e.actor {
                arm_events[a].push((e.step, e.target));
            }
        }
        let mut hands: Vec<&HandEvent> = self.hands.iter().collect();
        hands.sort_by_key(|h| (h.step, h.box_index));
        for h in hands {
            match (h.giver, h.taker) {
                (Actor::Arm(a), Actor::Arm(b)) => {
                    let (pa, pb) = (self.arms[a].base, self.arms[b].base);
                    let (ra, rb) = (self.arms[a].reach(), self.arms[b].reach());
                    let d = pa.dist(pb);
                    let meet = if d < 1e-12 {
                        pa
                    } else {
                        pa + (pb - pa).scale(ra / (ra + rb))
                    };
                    let ha = bearing(pa, meet);
                    arm_events[a].push((h.step, Pose::new(meet, ha)));
                    arm_events[b].push((h.step, Pose::new(meet, wrap_angle(ha + std::f64::consts::PI))));
                }
                (Actor::Arm(a), Actor::Belt(k)) => {
                    let arm = &self.arms[a];
                    let belt = &self.belts[k];
                    let meet = nearest_on_belt(belt, |q| (q.dist(arm.base) - 0.6 * arm.reach()).abs());
                    let ha = bearing(arm.base, meet);
                    arm_events[a].push((h.step, Pose::new(meet, ha)));
                    let box_h = wrap_angle(ha + std::f64::consts::PI);
                    box_heading.insert(h.box_index, box_h);
                    let along = (meet - belt.center()).dot(belt.axis());
                    let yaw = wrap_angle(box_h - belt.axis().angle());
                    belt_entry[k].push((h.box_index, h.step, along, yaw));
                }
                (Actor::Belt(k), Actor::Arm(b)) => {
                    let arm = &self.arms[b];
                    let belt = &self.belts[k];
                    let box_h = box_heading
                        .get(&h.box_index)
                        .copied()
                        .unwrap_or_else(|| belt.axis().angle());
                    let hb = wrap_angle(box_h + std::f64::consts::PI);
                    let tool = Point::from_angle(hb).scale(arm.links[2]);
                    let target = 0.6 * (arm.links[0] + arm.links[1]);
                    let meet = nearest_on_belt(belt, |q| ((q - tool).dist(arm.base) - target).abs());
                    arm_events[b].push((h.step, Pose::new(meet, hb)));
                    let along = (meet - belt.center()).dot(belt.axis());
                    belt_exit[k].push((h.box_index, h.step, along));
                }
                (Actor::Belt(_), Actor::Belt(_)) => {}
            }
        }

        for (a, events) in arm_events.iter_mut().enumerate() {
            events.sort_by_key(|e| e.0);
            let arm = &self.arms[a];
            let configs: Vec<(usize, [f64; 3])> = events.iter().map(|&(s, pose)| (s, arm.inverse(pose))).collect();
            for t in 0..self.n {
                let q = match configs.iter().position(|&(s, _)| s >= t) {
                    None => configs.last().map(|c| c.1).unwrap_or([0.0; 3]),
                    Some(0) => configs[0].1,
                    Some(k) => {
                        let (s0, q0) = configs[k - 1];
                        let (s1, q1) = configs[k];
                        let w = if s1 == s0 { 1.0 } else { (t - s0) as f64 / (s1 - s0) as f64 };
                        [0, 1, 2].map(|j| q0[j] + w * (q1[j] - q0[j]))
                    }
                };
                for (j, v) in q.iter().enumerate() {
                    x[self.joint_index(a, t, j)] = *v;
                }
            }
        }

        for (k, belt) in self.belts.iter().enumerate() {
            let base = self.belt_index(k);
            let first = belt_entry[k].first().copied();
            let (p0, v) = match first {
                Some((bx, s_in, e_in, _)) => {
                    match belt_exit[k].iter().find(|e| e.0 == bx) {
                        Some(&(_, s_out, e_out)) if s_out > s_in => {
                            let v = (e_out - e_in) / (s_out - s_in) as f64;
                            (e_in - v * s_in as f64, v)
                        }
                        _ => (e_in, 0.0),
                    }
                }
                None => (0.0, 0.0),
            };
            x[base] = p0;
            x[base + 1] = v;
            for (slot, &bx) in belt.boxes.iter().enumerate() {
                if let Some(&(_, s_in, e_in, yaw)) = belt_entry[k].iter().find(|e| e.0 == bx) {
                    x[base + 2 + 2 * slot] = e_in - (p0 + v * s_in as f64);
                    x[base + 3 + 2 * slot] = yaw;
                }
            }
        }
        x
    }
}
