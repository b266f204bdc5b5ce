//! Per-box robot sequences, delivery order and conflict-free task intervals.

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::layout::Layout;

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Task {
    pub robot: usize,
    pub start: f64,
    pub end: f64,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct BoxSchedule {
    #[serde(rename = "box")]
    pub box_index: usize,
    pub tasks: Vec<Task>,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Schedule {
    pub dt: f64,
    /// Boxes in delivery order.
    pub boxes: Vec<BoxSchedule>,
}

/// Robot sequence of each box: its path without the two ports.
pub fn assign_paths(layout: &Layout) -> Vec<Vec<usize>> {
    layout
        .paths
        .iter()
        .map(|p| {
            if p.len() >= 2 {
                p[1..p.len() - 1].to_vec()
            } else {
                Vec::new()
            }
        })
        .collect()
}

/// Longer sequences first; ties by box index.
pub fn order_deliveries(sequences: &[Vec<usize>]) -> Vec<usize> {
    let mut order: Vec<usize> = (0..sequences.len()).collect();
    order.sort_by(|&a, &b| sequences[b].len().cmp(&sequences[a].len()).then(a.cmp(&b)));
    order
}

/// Starts every box at time zero and delays a whole box by `dt` while any
/// of its tasks overlaps an earlier box's task on the same robot.
pub fn build_schedule(sequences: &[Vec<usize>], order: &[usize], dt: f64) -> Schedule {
    // Slot k of a box starting at s is [s + k, s + k + 1) in units of dt.
    let mut busy: std::collections::HashMap<usize, Vec<u64>> = std::collections::HashMap::new();
    let mut boxes = Vec::with_capacity(order.len());
    for &b in order {
        let seq = &sequences[b];
        let mut start = 0u64;
        while seq
            .iter()
            .enumerate()
            .any(|(k, r)| busy.get(r).is_some_and(|slots| slots.contains(&(start + k as u64))))
        {
            start += 1;
        }
        for (k, &r) in seq.iter().enumerate() {
            busy.entry(r).or_default().push(start + k as u64);
        }
        boxes.push(BoxSchedule {
            box_index: b,
            tasks: seq
                .iter()
                .enumerate()
                .map(|(k, &robot)| Task {
                    robot,
                    start: (start + k as u64) as f64 * dt,
                    end: (start + k as u64 + 1) as f64 * dt,
                })
                .collect(),
        });
    }
    Schedule { dt, boxes }
}

/// `assign_paths`, `order_deliveries` and `build_schedule` in sequence.
pub fn schedule_layout(layout: &Layout, dt: f64) -> Schedule {
    let seqs = assign_paths(layout);
    let order = order_deliveries(&seqs);
    build_schedule(&seqs, &order, dt)
}

impl Schedule {
    pub fn makespan(&self) -> f64 {
        self.boxes
            .iter()
            .flat_map(|b| b.tasks.iter().map(|t| t.end))
            .fold(0.0, f64::max)
    }

    /// Earliest pair of overlapping tasks on one robot, if any.
    pub fn first_conflict(&self) -> Option<(usize, &Task, &Task)> {
        let mut all: Vec<(usize, &Task)> = self
            .boxes
            .iter()
            .flat_map(|b| b.tasks.iter().map(|t| (t.robot, t)))
            .collect();
        all.sort_by(|a, b| a.0.cmp(&b.0).then(a.1.start.total_cmp(&b.1.start)));
        all.windows(2)
            .find(|w| w[0].0 == w[1].0 && w[1].1.start < w[0].1.end)
            .map(|w| (w[0].0, w[0].1, w[1].1))
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("schedule serialization is infallible")
    }

    pub fn for_box(&self, b: usize) -> Option<&BoxSchedule> {
        self.boxes.iter().find(|x| x.box_index == b)
    }
}

#[derive(Clone, Debug, PartialEq, Eq, Error)]
pub enum ScheduleError {
    #[error("malformed schedule at {path}: {message}")]
    Malformed { path: String, message: String },
    #[error("invalid schedule: {0}")]
    Invalid(String),
}

pub fn parse_schedule(text: &str) -> Result<Schedule, ScheduleError> {
    let de = &mut serde_json::Deserializer::from_str(text);
    let s: Schedule = serde_path_to_error::deserialize(de).map_err(|e| ScheduleError::Malformed {
        path: e.path().to_string(),
        message: e.into_inner().to_string(),
    })?;
    if !(s.dt.is_finite() && s.dt > 0.0) {
        return Err(ScheduleError::Invalid("dt must be positive".into()));
    }
    let mut seen = std::collections::HashSet::new();
    for b in &s.boxes {
        if !seen.insert(b.box_index) {
            return Err(ScheduleError::Invalid(format!("box {} listed twice", b.box_index)));
        }
        for w in b.tasks.windows(2) {
            if w[0].end != w[1].start {
                return Err(ScheduleError::Invalid(format!("box {} has a gap between tasks", b.box_index)));
            }
        }
        if b.tasks.iter().any(|t| !(t.start.is_finite() && t.end.is_finite() && t.start < t.end)) {
            return Err(ScheduleError::Invalid(format!("box {} has an empty task", b.box_index)));
        }
    }
    Ok(s)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn sequences_from_paths() {
        let layout = Layout {
            robots: Vec::new(),
            belts: Vec::new(),
            junctions: Vec::new(),
            paths: vec![vec![0, 5, 7, 1], vec![0, 5, 2], vec![0, 5, 40, 8, 3]],
            total_cost: 0.0,
        };
        assert_eq!(assign_paths(&layout), vec![vec![5, 7], vec![5], vec![5, 40, 8]]);
    }

    #[test]
    fn delivery_order() {
        let seqs = |lens: &[usize]| lens.iter().map(|&n| vec![0; n]).collect::<Vec<_>>();
        assert_eq!(order_deliveries(&seqs(&[2, 5, 3])), vec![1, 2, 0]);
        assert_eq!(order_deliveries(&seqs(&[3, 3])), vec![0, 1]);
        assert_eq!(order_deliveries(&seqs(&[4])), vec![0]);
    }

    #[test]
    fn conflict_shifts() {
        let s = build_schedule(&[vec![1, 2], vec![3, 4]], &[0, 1], 1.0);
        assert!(s.boxes.iter().all(|b| b.tasks[0].start == 0.0));

        let s = build_schedule(&[vec![1, 2], vec![1, 4]], &[0, 1], 1.0);
        assert_eq!(s.boxes[1].tasks[0].start, 1.0);

        let s = build_schedule(&[vec![7], vec![7], vec![7]], &[0, 1, 2], 0.5);
        let starts: Vec<f64> = s.boxes.iter().map(|b| b.tasks[0].start).collect();
        assert_eq!(starts, vec![0.0, 0.5, 1.0]);
        assert!(s.first_conflict().is_none());
        assert_eq!(s.makespan(), 1.5);
    }

    #[test]
    fn schedule_document_round_trip() {
        let s = build_schedule(&[vec![1, 2], vec![1, 4]], &[0, 1], 1.0);
        assert_eq!(parse_schedule(&s.to_json()).unwrap(), s);
        assert!(parse_schedule(r#"{"dt":0,"boxes":[]}"#).is_err());
        assert!(parse_schedule(r#"{"dt":1,"boxes":[{"box":0,"tasks":[{"robot":1,"start":0,"end":1},{"robot":2,"start":2,"end":3}]}]}"#).is_err());
    }
}
