use std::f64::consts::PI;

use crate::geometry::{wrap_angle, Point};
use crate::scene::RobotType;

/// Planar end-effector pose.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct Pose {
    pub pos: Point,
    pub heading: f64,
}

impl Pose {
    pub fn new(pos: Point, heading: f64) -> Self {
        Pose { pos, heading }
    }

    /// The same point with the heading flipped, as seen by the receiving side
    /// of a handover.
    pub fn reversed(self) -> Pose {
        Pose::new(self.pos, wrap_angle(self.heading + PI))
    }
}

/// Three-link planar arm with revolute joints.
#[derive(Clone, Debug, PartialEq)]
pub struct PlanarArm {
    /// Reach graph vertex of the arm.
    pub vertex: usize,
    pub base: Point,
    pub links: [f64; 3],
    pub lower: [f64; 3],
    pub upper: [f64; 3],
    pub clearance: f64,
}

/// Fraction of the total reach given to the last link.
const WRIST_SHARE: f64 = 0.15 / 0.85;

fn perp(theta: f64) -> Point {
    Point::new(-theta.sin(), theta.cos())
}

impl PlanarArm {
    pub fn new(vertex: usize, base: Point, robot: &RobotType) -> Self {
        let l3 = robot.reach_max * WRIST_SHARE;
        let l12 = (robot.reach_max - l3) / 2.0;
        PlanarArm {
            vertex,
            base,
            links: [l12, l12, l3],
            lower: [-PI; 3],
            upper: [PI; 3],
            clearance: robot.clearance,
        }
    }

    pub fn reach(&self) -> f64 {
        self.links.iter().sum()
    }

    /// Cumulative link angles.
    fn angles(q: &[f64]) -> [f64; 3] {
        [q[0], q[0] + q[1], q[0] + q[1] + q[2]]
    }

    /// Point at fraction `t` along link `k`, with its derivative in each joint.
    pub fn link_point(&self, q: &[f64], k: usize, t: f64) -> (Point, [Point; 3]) {
        let th = Self::angles(q);
        let mut p = self.base;
        let mut d = [Point::default(); 3];
        for m in 0..=k {
            let len = if m == k { t * self.links[m] } else { self.links[m] };
            p = p + Point::from_angle(th[m]).scale(len);
            let dp = perp(th[m]).scale(len);
            for dj in d.iter_mut().take(m + 1) {
                *dj = *dj + dp;
            }
        }
        (p, d)
    }

    pub fn forward(&self, q: &[f64]) -> Pose {
        let (p, _) = self.link_point(q, 2, 1.0);
        Pose::new(p, q[0] + q[1] + q[2])
    }

    /// Base, elbow, wrist and tool points.
    pub fn joint_points(&self, q: &[f64]) -> [Point; 4] {
        [
            self.base,
            self.link_point(q, 0, 1.0).0,
            self.link_point(q, 1, 1.0).0,
            self.link_point(q, 2, 1.0).0,
        ]
    }

    /// Closed-form inverse kinematics (elbow sign +). Unreachable targets are
    /// approached as closely as the wrist circle allows.
    pub fn inverse(&self, target: Pose) -> [f64; 3] {
        let [l1, l2, l3] = self.links;
        let w = target.pos - Point::from_angle(target.heading).scale(l3) - self.base;
        let r = w.norm();
        let c2 = ((r * r - l1 * l1 - l2 * l2) / (2.0 * l1 * l2)).clamp(-1.0, 1.0);
        let q2 = c2.acos();
        let q1 = w.angle() - (l2 * q2.sin()).atan2(l1 + l2 * q2.cos());
        let q1 = wrap_angle(q1);
        let q3 = wrap_angle(target.heading - q1 - q2);
        [q1, q2, q3]
    }
}

pub fn forward_kinematics(arm: &PlanarArm, joints: &[f64]) -> Pose {
    arm.forward(joints)
}
