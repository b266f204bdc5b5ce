//! Plain-text solution files: a few `# key value` header lines followed by
//! one `name value` pair per variable.

use std::fmt::Write as _;

use crate::branch::{MilpSolution, MilpStatus};
use crate::error::MilpError;
use crate::model::Model;

#[derive(Clone, Debug, Default, PartialEq)]
pub struct SolutionText {
    pub status: Option<String>,
    pub objective: Option<f64>,
    pub nodes: Option<usize>,
    pub values: Vec<(String, f64)>,
}

impl MilpStatus {
    pub fn parse(s: &str) -> Option<MilpStatus> {
        Some(match s {
            "optimal" => MilpStatus::Optimal,
            "infeasible" => MilpStatus::Infeasible,
            "timeout" => MilpStatus::Timeout,
            "unbounded" => MilpStatus::Unbounded,
            _ => return None,
        })
    }
}

pub fn write_solution(model: &Model, sol: &MilpSolution) -> String {
    let mut out = String::new();
    let _ = writeln!(out, "# status {}", sol.status.as_str());
    if sol.has_incumbent() {
        let _ = writeln!(out, "# objective {}", sol.objective);
    }
    let _ = writeln!(out, "# nodes {}", sol.nodes);
    if sol.has_incumbent() {
        for (v, x) in model.vars.iter().zip(&sol.values) {
            let _ = writeln!(out, "{} {}", v.name, x);
        }
    }
    out
}

pub fn parse_solution(text: &str) -> Result<SolutionText, MilpError> {
    let mut out = SolutionText::default();
    let mut seen = std::collections::HashSet::new();
    for (k, line) in text.lines().enumerate() {
        let lineno = k + 1;
        let line = line.trim();
        if line.is_empty() {
            continue;
        }
        if let Some(header) = line.strip_prefix('#') {
            let mut parts = header.split_whitespace();
            let (Some(key), Some(value), None) = (parts.next(), parts.next(), parts.next()) else {
                continue;
            };
            match key {
                "status" => {
                    if MilpStatus::parse(value).is_none() {
                        return Err(MilpError::parse(lineno, format!("unknown status `{value}`")));
                    }
                    out.status = Some(value.to_string());
                }
                "objective" => {
                    out.objective = Some(parse_value(value, lineno)?);
                }
                "nodes" => {
                    out.nodes = Some(
                        value
                            .parse()
                            .map_err(|_| MilpError::parse(lineno, "bad node count"))?,
                    );
                }
                _ => {}
            }
            continue;
        }
        let mut parts = line.split_whitespace();
        let (Some(name), Some(value), None) = (parts.next(), parts.next(), parts.next()) else {
            return Err(MilpError::parse(lineno, "expected `name value`"));
        };
        let v = parse_value(value, lineno)?;
        if !seen.insert(name.to_string()) {
            return Err(MilpError::parse(lineno, format!("`{name}` assigned twice")));
        }
        out.values.push((name.to_string(), v));
    }
    Ok(out)
}

fn parse_value(s: &str, line: usize) -> Result<f64, MilpError> {
    match s.parse::<f64>() {
        Ok(v) if v.is_finite() => Ok(v),
        _ => Err(MilpError::parse(line, format!("bad number `{s}`"))),
    }
}

impl SolutionText {
    pub fn status(&self) -> Option<MilpStatus> {
        self.status.as_deref().and_then(MilpStatus::parse)
    }

    /// Dense value vector in model order. Every variable must be assigned.
    pub fn to_values(&self, model: &Model) -> Result<Vec<f64>, MilpError> {
        let mut values = vec![None; model.num_vars()];
        for (name, v) in &self.values {
            let j = model
                .var_id(name)
                .ok_or_else(|| MilpError::UnknownVariable(name.clone()))?;
            values[j] = Some(*v);
        }
        values
            .into_iter()
            .enumerate()
            .map(|(j, v)| v.ok_or_else(|| MilpError::UnknownVariable(format!("{} (unassigned)", model.vars[j].name))))
            .collect()
    }
}
