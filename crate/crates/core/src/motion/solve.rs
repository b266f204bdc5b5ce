use nalgebra::{DMatrix, DVector};

use crate::geometry::Point;

use super::kinematics::Pose;
use super::problem::{Actor, ConstraintId, Disc, MotionProblem};
use super::{MotionError, Trajectories};

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct MotionParams {
    /// Penalty weight of the first round.
    pub mu0: f64,
    pub growth: f64,
    pub rounds: usize,
    /// Largest constraint residual accepted at the end.
    pub tolerance: f64,
    pub max_iterations: usize,
    pub step_tolerance: f64,
    pub max_halvings: usize,
    pub armijo: f64,
}

impl Default for MotionParams {
    fn default() -> Self {
        MotionParams {
            mu0: 100.0,
            growth: 10.0,
            rounds: 8,
            tolerance: 1e-3,
            max_iterations: 200,
            step_tolerance: 1e-8,
            max_halvings: 30,
            armijo: 1e-4,
        }
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct SolveReport {
    /// Smoothness objective without penalties.
    pub objective: f64,
    /// Penalized objective at the final weight.
    pub penalized: f64,
    pub max_residual: f64,
    pub worst: Option<ConstraintId>,
    pub rounds: usize,
    pub iterations: usize,
    /// Penalized objective after every accepted step, one list per round,
    /// starting with the value at the round's initial point.
    pub history: Vec<Vec<f64>>,
}

#[derive(Clone, Copy, Debug, PartialEq)]
enum Group {
    Objective,
    Equality(ConstraintId),
    /// Raw value is the slack `g`, feasible when `g >= 0`.
    Inequality(ConstraintId),
}

/// Raw constraint and objective terms with optional sparse gradients.
struct Terms {
    want_jac: bool,
    group: Vec<Group>,
    value: Vec<f64>,
    start: Vec<usize>,
    idx: Vec<usize>,
    val: Vec<f64>,
}

impl Terms {
    fn new(want_jac: bool) -> Self {
        Terms {
            want_jac,
            group: Vec::new(),
            value: Vec::new(),
            start: vec![0],
            idx: Vec::new(),
            val: Vec::new(),
        }
    }

    fn push(&mut self, group: Group, value: f64, jac: impl IntoIterator<Item = (usize, f64)>) {
        self.group.push(group);
        self.value.push(value);
        if self.want_jac {
            for (i, v) in jac {
                self.idx.push(i);
                self.val.push(v);
            }
        }
        self.start.push(self.idx.len());
    }

    fn len(&self) -> usize {
        self.value.len()
    }

    fn jac(&self, k: usize) -> impl Iterator<Item = (usize, f64)> + '_ {
        let r = self.start[k]..self.start[k + 1];
        self.idx[r.clone()].iter().copied().zip(self.val[r].iter().copied())
    }
}

type PoseJac = Vec<(usize, [f64; 3])>;

fn disc_center(p: &MotionProblem, x: &[f64], d: &Disc, step: usize) -> (Point, [(usize, Point); 3]) {
    let i0 = p.joint_index(d.arm, step, 0);
    let (c, dq) = p.arms[d.arm].link_point(&x[i0..i0 + 3], d.link, d.frac);
    (c, [(i0, dq[0]), (i0 + 1, dq[1]), (i0 + 2, dq[2])])
}

impl MotionProblem {
    fn actor_pose(&self, x: &[f64], actor: Actor, step: usize, box_index: usize) -> (Pose, PoseJac) {
        match actor {
            Actor::Arm(a) => {
                let i0 = self.joint_index(a, step, 0);
                let q = &x[i0..i0 + 3];
                let arm = &self.arms[a];
                let (pos, d) = arm.link_point(q, 2, 1.0);
                let jac = (0..3).map(|j| (i0 + j, [d[j].x, d[j].y, 1.0])).collect();
                (Pose::new(pos, q[0] + q[1] + q[2]), jac)
            }
            Actor::Belt(k) => {
                let belt = &self.belts[k];
                let base = self.belt_index(k);
                let slot = belt.slot(box_index).expect("belt carries the box");
                let (gi, yi) = (base + 2 + 2 * slot, base + 3 + 2 * slot);
                let u = belt.axis();
                let t = step as f64;
                let along = x[base] + x[base + 1] * t + x[gi];
                let pose = Pose::new(belt.center() + u.scale(along), u.angle() + x[yi]);
                let jac = vec![
                    (base, [u.x, u.y, 0.0]),
                    (base + 1, [u.x * t, u.y * t, 0.0]),
                    (gi, [u.x, u.y, 0.0]),
                    (yi, [0.0, 0.0, 1.0]),
                ];
                (pose, jac)
            }
        }
    }

    fn terms(&self, x: &[f64], want_jac: bool) -> Terms {
        let mut out = Terms::new(want_jac);
        let (sv, sa) = (self.beta_v.sqrt(), self.beta_a.sqrt());
        for a in 0..self.arms.len() {
            for j in 0..3 {
                for t in 0..self.n.saturating_sub(1) {
                    let (i0, i1) = (self.joint_index(a, t, j), self.joint_index(a, t + 1, j));
                    out.push(Group::Objective, sv * (x[i1] - x[i0]), [(i1, sv), (i0, -sv)]);
                }
                for t in 1..self.n.saturating_sub(1) {
                    let (im, i0, ip) = (
                        self.joint_index(a, t - 1, j),
                        self.joint_index(a, t, j),
                        self.joint_index(a, t + 1, j),
                    );
                    out.push(
                        Group::Objective,
                        sa * (x[ip] - 2.0 * x[i0] + x[im]),
                        [(ip, sa), (i0, -2.0 * sa), (im, sa)],
                    );
                }
            }
        }
        for k in 0..self.belts.len() {
            // Constant speed: every step has the same velocity, no acceleration.
            let w = (self.beta_v * self.n.saturating_sub(1) as f64).sqrt();
            let vi = self.belt_index(k) + 1;
            out.push(Group::Objective, w * x[vi], [(vi, w)]);
        }

        for (events, place) in [(&self.picks, false), (&self.places, true)] {
            for e in events {
                let id = if place {
                    ConstraintId::Place { box_index: e.box_index }
                } else {
                    ConstraintId::Pick { box_index: e.box_index }
                };
                let (pose, jac) = self.actor_pose(x, e.actor, e.step, e.box_index);
                let (c, s) = (pose.heading.cos(), pose.heading.sin());
                let rows = [
                    pose.pos.x - e.target.pos.x,
                    pose.pos.y - e.target.pos.y,
                    c - e.target.heading.cos(),
                    s - e.target.heading.sin(),
                ];
                for (r, value) in rows.iter().enumerate() {
                    out.push(
                        Group::Equality(id),
                        *value,
                        jac.iter().map(|&(i, d)| (i, pose_row(r, d, c, s))),
                    );
                }
            }
        }
        for h in &self.hands {
            let id = ConstraintId::Hand {
                box_index: h.box_index,
                step: h.step,
            };
            let (pg, jg) = self.actor_pose(x, h.giver, h.step, h.box_index);
            let (pt, jt) = self.actor_pose(x, h.taker, h.step, h.box_index);
            let (cg, sg) = (pg.heading.cos(), pg.heading.sin());
            let (ct, st) = (pt.heading.cos(), pt.heading.sin());
            let rows = [pg.pos.x - pt.pos.x, pg.pos.y - pt.pos.y, cg + ct, sg + st];
            for (r, value) in rows.iter().enumerate() {
                let sign = if r < 2 { -1.0 } else { 1.0 };
                out.push(
                    Group::Equality(id),
                    *value,
                    jg.iter()
                        .map(|&(i, d)| (i, pose_row(r, d, cg, sg)))
                        .chain(jt.iter().map(|&(i, d)| (i, sign * pose_row(r, d, ct, st)))),
                );
            }
        }

        for a in 0..self.arms.len() {
            let arm = &self.arms[a];
            for t in 0..self.n {
                for j in 0..3 {
                    let i = self.joint_index(a, t, j);
                    let id = ConstraintId::JointLimit { arm: a, step: t, joint: j };
                    out.push(Group::Inequality(id), x[i] - arm.lower[j], [(i, 1.0)]);
                    out.push(Group::Inequality(id), arm.upper[j] - x[i], [(i, -1.0)]);
                }
            }
        }
        for ob in &self.on_belt {
            let belt = &self.belts[ob.belt];
            let base = self.belt_index(ob.belt);
            let gi = base + 2 + 2 * belt.slot(ob.box_index).expect("belt carries the box");
            let t = ob.step as f64;
            let along = x[base] + x[base + 1] * t + x[gi];
            let half = belt.length / 2.0;
            let id = ConstraintId::OnBelt {
                belt: ob.belt,
                box_index: ob.box_index,
                step: ob.step,
            };
            out.push(
                Group::Inequality(id),
                half - along,
                [(base, -1.0), (base + 1, -t), (gi, -1.0)],
            );
            out.push(
                Group::Inequality(id),
                along + half,
                [(base, 1.0), (base + 1, t), (gi, 1.0)],
            );
        }
        for t in 0..self.n {
            for (pair, (d1, d2)) in self.collisions.iter().enumerate() {
                let (c1, j1) = disc_center(self, x, d1, t);
                let (c2, j2) = disc_center(self, x, d2, t);
                let diff = c1 - c2;
                let dist = diff.norm();
                let g = dist - d1.radius - d2.radius - self.margin;
                let e = if dist > 1e-12 { diff.scale(1.0 / dist) } else { Point::new(1.0, 0.0) };
                out.push(
                    Group::Inequality(ConstraintId::Collision { pair, step: t }),
                    g,
                    j1.iter()
                        .map(|&(i, d)| (i, e.dot(d)))
                        .chain(j2.iter().map(|&(i, d)| (i, -e.dot(d)))),
                );
            }
        }
        out
    }

    /// Smoothness objective: squared joint velocities and accelerations.
    pub fn objective(&self, x: &[f64]) -> f64 {
        let t = self.terms(x, false);
        (0..t.len())
            .filter(|&k| t.group[k] == Group::Objective)
            .map(|k| t.value[k] * t.value[k])
            .sum()
    }

    /// Largest constraint residual and the constraint it belongs to.
    pub fn max_residual(&self, x: &[f64]) -> (f64, Option<ConstraintId>) {
        let t = self.terms(x, false);
        let mut worst = (0.0, None);
        for k in 0..t.len() {
            let (v, id) = match t.group[k] {
                Group::Objective => continue,
                Group::Equality(id) => (t.value[k].abs(), id),
                Group::Inequality(id) => ((-t.value[k]).max(0.0), id),
            };
            if v > worst.0 {
                worst = (v, Some(id));
            }
        }
        worst
    }

    /// Penalty residual vector with its sparse Jacobian rows.
    fn residuals(&self, x: &[f64], mu: f64, want_jac: bool) -> (Vec<f64>, Vec<Vec<(usize, f64)>>) {
        let t = self.terms(x, want_jac);
        let sm = mu.sqrt();
        let mut r = Vec::with_capacity(t.len());
        let mut rows = Vec::new();
        for k in 0..t.len() {
            let (value, scale) = match t.group[k] {
                Group::Objective => (t.value[k], 1.0),
                Group::Equality(_) => (sm * t.value[k], sm),
                Group::Inequality(_) => {
                    let viol = (-t.value[k]).max(0.0);
                    if viol == 0.0 {
                        continue;
                    }
                    (sm * viol.powf(1.5), -1.5 * sm * viol.sqrt())
                }
            };
            r.push(value);
            if want_jac {
                rows.push(t.jac(k).map(|(i, d)| (i, scale * d)).collect());
            }
        }
        (r, rows)
    }

    /// Penalized objective: smoothness plus `mu` times squared equality
    /// residuals and cubed inequality violations.
    pub fn penalized(&self, x: &[f64], mu: f64) -> f64 {
        self.residuals(x, mu, false).0.iter().map(|r| r * r).sum()
    }

    pub fn gradient(&self, x: &[f64], mu: f64) -> Vec<f64> {
        let (r, rows) = self.residuals(x, mu, true);
        let mut g = vec![0.0; x.len()];
        for (rk, row) in r.iter().zip(&rows) {
            for &(i, d) in row {
                g[i] += 2.0 * rk * d;
            }
        }
        g
    }

    /// Runs Gauss-Newton from `x` at fixed `mu`; returns the accepted
    /// penalized values and the iteration count.
    fn gauss_newton(&self, x: &mut Vec<f64>, mu: f64, params: &MotionParams) -> (Vec<f64>, usize) {
        let n = x.len();
        let mut history = vec![self.penalized(x, mu)];
        let mut iterations = 0;
        for _ in 0..params.max_iterations {
            iterations += 1;
            let (r, rows) = self.residuals(x, mu, true);
            let f0: f64 = r.iter().map(|v| v * v).sum();
            let mut jtj = DMatrix::<f64>::zeros(n, n);
            let mut jtr = DVector::<f64>::zeros(n);
            for (rk, row) in r.iter().zip(&rows) {
                for &(i, a) in row {
                    jtr[i] += a * rk;
                    for &(k, b) in row {
                        jtj[(i, k)] += a * b;
                    }
                }
            }
            if jtr.norm() == 0.0 {
                break;
            }
            let scale = (0..n).map(|i| jtj[(i, i)]).fold(0.0, f64::max).max(1.0);
            let mut damping = 1e-10 * scale;
            let delta = loop {
                let mut m = jtj.clone();
                for i in 0..n {
                    m[(i, i)] += damping;
                }
                if let Some(ch) = m.cholesky() {
                    break -ch.solve(&jtr);
                }
                damping *= 100.0;
            };
            let slope = 2.0 * jtr.dot(&delta);
            if slope >= 0.0 {
                break;
            }
            let mut alpha = 1.0;
            let mut accepted = None;
            for _ in 0..=params.max_halvings {
                let trial: Vec<f64> = x.iter().zip(delta.iter()).map(|(a, d)| a + alpha * d).collect();
                let f = self.penalized(&trial, mu);
                if f <= f0 + params.armijo * alpha * slope {
                    accepted = Some((trial, f));
                    break;
                }
                alpha *= 0.5;
            }
            let Some((trial, f)) = accepted else {
                break;
            };
            *x = trial;
            history.push(f);
            if alpha * delta.norm() < params.step_tolerance {
                break;
            }
        }
        (history, iterations)
    }
}

fn pose_row(r: usize, d: [f64; 3], c: f64, s: f64) -> f64 {
    match r {
        0 => d[0],
        1 => d[1],
        2 => -s * d[2],
        _ => c * d[2],
    }
}

/// Penalty method with Gauss-Newton inner solves. Fails with the worst
/// residual when the tolerance is not met after the last round.
pub fn solve_trajectories(problem: &MotionProblem, params: &MotionParams) -> Result<Trajectories, MotionError> {
    let mut x = problem.initial_guess();
    solve_from(problem, params, &mut x)
}

pub fn solve_from(problem: &MotionProblem, params: &MotionParams, x: &mut Vec<f64>) -> Result<Trajectories, MotionError> {
    let mut mu = params.mu0;
    let mut history = Vec::new();
    let mut iterations = 0;
    let mut rounds = 0;
    let (mut worst, mut id) = (f64::INFINITY, None);
    for round in 0..params.rounds.max(1) {
        if round > 0 {
            mu *= params.growth;
        }
        let (h, it) = problem.gauss_newton(x, mu, params);
        history.push(h);
        iterations += it;
        rounds += 1;
        (worst, id) = problem.max_residual(x);
        if worst < params.tolerance {
            break;
        }
    }
    let report = SolveReport {
        objective: problem.objective(x),
        penalized: problem.penalized(x, mu),
        max_residual: worst,
        worst: id,
        rounds,
        iterations,
        history,
    };
    let traj = Trajectories::from_vector(problem, x, report);
    if worst < params.tolerance {
        Ok(traj)
    } else {
        Err(MotionError::ResidualFailure {
            residual: worst,
            constraint: id.map(|c| c.to_string()).unwrap_or_default(),
            trajectories: Box::new(traj),
        })
    }
}
