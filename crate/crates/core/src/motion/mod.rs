//! Planar trajectory optimization that replays a schedule on a layout.

mod kinematics;
mod problem;
mod solve;

use thiserror::Error;

pub use kinematics::{forward_kinematics, PlanarArm, Pose};
pub use problem::{
    build_motion_problem, Actor, BeltTrack, ConstraintId, Disc, HandEvent, MotionProblem, OnBelt, PoseEvent,
};
pub use solve::{solve_from, solve_trajectories, MotionParams, SolveReport};

#[derive(Clone, Debug, PartialEq)]
pub struct ArmTrajectory {
    pub vertex: usize,
    pub joints: Vec<[f64; 3]>,
}

#[derive(Clone, Debug, PartialEq)]
pub struct BeltTrajectory {
    pub vertex: usize,
    /// Prismatic value at every step.
    pub prismatic: Vec<f64>,
    /// `(box, grasp offset, yaw)` per carried box.
    pub grasps: Vec<(usize, f64, f64)>,
}

#[derive(Clone, Debug, PartialEq)]
pub struct Trajectories {
    pub steps: usize,
    pub steps_per_dt: usize,
    pub arms: Vec<ArmTrajectory>,
    pub belts: Vec<BeltTrajectory>,
    pub report: SolveReport,
}

impl Trajectories {
    pub fn from_vector(problem: &MotionProblem, x: &[f64], report: SolveReport) -> Self {
        let arms = problem
            .arms
            .iter()
            .enumerate()
            .map(|(a, arm)| ArmTrajectory {
                vertex: arm.vertex,
                joints: (0..problem.n)
                    .map(|t| {
                        let i = problem.joint_index(a, t, 0);
                        [x[i], x[i + 1], x[i + 2]]
                    })
                    .collect(),
            })
            .collect();
        let belts = problem
            .belts
            .iter()
            .enumerate()
            .map(|(k, belt)| {
                let base = problem.belt_index(k);
                BeltTrajectory {
                    vertex: belt.vertex,
                    prismatic: (0..problem.n).map(|t| x[base] + x[base + 1] * t as f64).collect(),
                    grasps: belt
                        .boxes
                        .iter()
                        .enumerate()
                        .map(|(s, &b)| (b, x[base + 2 + 2 * s], x[base + 3 + 2 * s]))
                        .collect(),
                }
            })
            .collect();
        Trajectories {
            steps: problem.n,
            steps_per_dt: problem.steps_per_dt,
            arms,
            belts,
            report,
        }
    }

    /// Wide rows `(robot, kind, step, values)`: three joints for an arm; the
    /// prismatic value then `(offset, yaw)` per box for a belt.
    pub fn rows(&self) -> Vec<(usize, &'static str, usize, Vec<f64>)> {
        let mut out = Vec::new();
        for a in &self.arms {
            for (t, q) in a.joints.iter().enumerate() {
                out.push((a.vertex, "arm", t, q.to_vec()));
            }
        }
        for b in &self.belts {
            for (t, p) in b.prismatic.iter().enumerate() {
                let mut v = vec![*p];
                for &(_, s, yaw) in &b.grasps {
                    v.push(s);
                    v.push(yaw);
                }
                out.push((b.vertex, "belt", t, v));
            }
        }
        out
    }

    /// Tool point of every arm at `step`.
    pub fn arm_poses(&self, problem: &MotionProblem, step: usize) -> Vec<Pose> {
        problem
            .arms
            .iter()
            .zip(&self.arms)
            .map(|(arm, tr)| arm.forward(&tr.joints[step.min(tr.joints.len() - 1)]))
            .collect()
    }
}

#[derive(Clone, Debug, PartialEq, Error)]
pub enum MotionError {
    #[error("unsupported motion problem: {0}")]
    Unsupported(String),
    #[error("residual failure: {residual:.3e} on {constraint}")]
    ResidualFailure {
        residual: f64,
        constraint: String,
        trajectories: Box<Trajectories>,
    },
}
