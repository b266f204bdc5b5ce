//! Layout optimization for stationary robot arms, conveyor belts and
//! junctions on a floor grid.

pub mod astar;
pub mod bench;
pub mod geometry;
pub mod layout;
pub mod motion;
pub mod netmodel;
pub mod oracle;
pub mod reach;
pub mod scene;
pub mod sched;

pub use geometry::Point;
pub use layout::{parse_layout, JunctionKind, Layout};
pub use reach::{build_reachability_graph, can_hand_over, Direction, Entity, ReachGraph};
pub use scene::{grid_points, parse_scene, CostTable, Output, RobotKind, RobotType, Scene, SceneError};
pub use sched::{parse_schedule, schedule_layout, Schedule};
