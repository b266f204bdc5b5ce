//! Layout documents: selected robots, belts and junctions plus per-box paths.

use std::collections::HashSet;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::geometry::Point;
use crate::reach::Direction;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum JunctionKind {
    #[serde(rename = "multi-way")]
    MultiWay,
    Turning,
    Inline,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct PlacedRobot {
    pub id: usize,
    #[serde(rename = "type")]
    pub robot_type: String,
    pub x: f64,
    pub y: f64,
}

impl PlacedRobot {
    pub fn pos(&self) -> Point {
        Point::new(self.x, self.y)
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct PlacedBelt {
    pub id: usize,
    pub from: Point,
    pub to: Point,
    pub dir: Direction,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct PlacedJunction {
    pub kind: JunctionKind,
    pub x: f64,
    pub y: f64,
}

/// Vertex ids follow the reachability graph: 0 is the input, `1..=N` the
/// outputs, larger ids are robots and belts.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Layout {
    pub robots: Vec<PlacedRobot>,
    pub belts: Vec<PlacedBelt>,
    pub junctions: Vec<PlacedJunction>,
    pub paths: Vec<Vec<usize>>,
    pub total_cost: f64,
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub enum Element<'a> {
    Robot(&'a PlacedRobot),
    Belt(&'a PlacedBelt),
}

#[derive(Clone, Debug, PartialEq, Eq, Error)]
pub enum LayoutError {
    #[error("malformed layout at {path}: {message}")]
    Malformed { path: String, message: String },
    #[error("duplicate element id {0}")]
    DuplicateId(usize),
    #[error("element id {0} collides with a port id")]
    PortId(usize),
    #[error("path {0} is invalid: {1}")]
    BadPath(usize, String),
    #[error("non-finite value in {0}")]
    NonFinite(String),
}

impl Layout {
    pub fn num_boxes(&self) -> usize {
        self.paths.len()
    }

    /// Number of placed elements (robots, belts and junctions).
    pub fn element_count(&self) -> usize {
        self.robots.len() + self.belts.len() + self.junctions.len()
    }

    pub fn element(&self, id: usize) -> Option<Element<'_>> {
        if let Some(r) = self.robots.iter().find(|r| r.id == id) {
            return Some(Element::Robot(r));
        }
        self.belts.iter().find(|b| b.id == id).map(Element::Belt)
    }

    pub fn count_junctions(&self, kind: JunctionKind) -> usize {
        self.junctions.iter().filter(|j| j.kind == kind).count()
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("layout serialization is infallible")
    }

    pub fn validate(&self) -> Result<(), LayoutError> {
        let n = self.paths.len();
        let mut ids = HashSet::new();
        for (k, r) in self.robots.iter().enumerate() {
            if !(r.x.is_finite() && r.y.is_finite()) {
                return Err(LayoutError::NonFinite(format!("robots[{k}]")));
            }
        }
        for (k, b) in self.belts.iter().enumerate() {
            if !(b.from.is_finite() && b.to.is_finite()) {
                return Err(LayoutError::NonFinite(format!("belts[{k}]")));
            }
        }
        for (k, j) in self.junctions.iter().enumerate() {
            if !(j.x.is_finite() && j.y.is_finite()) {
                return Err(LayoutError::NonFinite(format!("junctions[{k}]")));
            }
        }
        if !self.total_cost.is_finite() {
            return Err(LayoutError::NonFinite("total_cost".into()));
        }
        for id in self.robots.iter().map(|r| r.id).chain(self.belts.iter().map(|b| b.id)) {
            if id <= n {
                return Err(LayoutError::PortId(id));
            }
            if !ids.insert(id) {
                return Err(LayoutError::DuplicateId(id));
            }
        }
        for (i, path) in self.paths.iter().enumerate() {
            let bad = |m: &str| Err(LayoutError::BadPath(i, m.into()));
            if path.len() < 2 || path[0] != 0 || path[path.len() - 1] != i + 1 {
                return bad("must run from the input to its output");
            }
            let mut seen = HashSet::new();
            for &v in &path[1..path.len() - 1] {
                if !ids.contains(&v) {
                    return bad("references an unknown element");
                }
                if !seen.insert(v) {
                    return bad("repeats an element");
                }
            }
        }
        Ok(())
    }
}

pub fn parse_layout(text: &str) -> Result<Layout, LayoutError> {
    let de = &mut serde_json::Deserializer::from_str(text);
    let layout: Layout = serde_path_to_error::deserialize(de).map_err(|e| LayoutError::Malformed {
        path: e.path().to_string(),
        message: e.into_inner().to_string(),
    })?;
    layout.validate()?;
    Ok(layout)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn sample() -> Layout {
        Layout {
            robots: vec![PlacedRobot {
                id: 4,
                robot_type: "UR5e".into(),
                x: 0.5,
                y: 0.0,
            }],
            belts: vec![PlacedBelt {
                id: 9,
                from: Point::new(1.0, 0.0),
                to: Point::new(1.5, 0.0),
                dir: Direction::E,
            }],
            junctions: vec![PlacedJunction {
                kind: JunctionKind::MultiWay,
                x: 1.0,
                y: 0.0,
            }],
            paths: vec![vec![0, 4, 1], vec![0, 4, 9, 2]],
            total_cost: 1.3,
        }
    }

    #[test]
    fn round_trip() {
        let l = sample();
        let text = l.to_json();
        assert!(text.contains("\"multi-way\""));
        assert_eq!(parse_layout(&text).unwrap(), l);
        assert_eq!(l.element_count(), 3);
    }

    #[test]
    fn rejects_inconsistent_paths() {
        let mut l = sample();
        l.paths[0] = vec![0, 5, 1];
        assert!(matches!(parse_layout(&l.to_json()), Err(LayoutError::BadPath(0, _))));
        let mut l = sample();
        l.robots[0].id = 2;
        assert!(matches!(parse_layout(&l.to_json()), Err(LayoutError::PortId(2))));
        assert!(matches!(parse_layout("{\"robots\":3}"), Err(LayoutError::Malformed { .. })));
    }
}
