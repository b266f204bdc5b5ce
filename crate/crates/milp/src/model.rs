use std::collections::HashMap;

use crate::error::MilpError;

/// Index of a variable inside a [`Model`].
pub type VarId = usize;
/// Index of a row inside a [`Model`].
pub type RowId = usize;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum VarKind {
    Continuous,
    Binary,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum Sense {
    Le,
    Ge,
    Eq,
}

impl Sense {
    pub fn symbol(self) -> &'static str {
        match self {
            Sense::Le => "<=",
            Sense::Ge => ">=",
            Sense::Eq => "=",
        }
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct Variable {
    pub name: String,
    pub lower: f64,
    pub upper: f64,
    pub objective: f64,
    pub kind: VarKind,
}

#[derive(Clone, Debug, PartialEq)]
pub struct Row {
    pub name: String,
    pub terms: Vec<(VarId, f64)>,
    pub sense: Sense,
    pub rhs: f64,
}

impl Row {
    pub fn activity(&self, values: &[f64]) -> f64 {
        self.terms.iter().map(|&(j, a)| a * values[j]).sum()
    }

    /// Amount by which `values` violates this row (0 when satisfied).
    pub fn violation(&self, values: &[f64]) -> f64 {
        let lhs = self.activity(values);
        match self.sense {
            Sense::Le => (lhs - self.rhs).max(0.0),
            Sense::Ge => (self.rhs - lhs).max(0.0),
            Sense::Eq => (lhs - self.rhs).abs(),
        }
    }
}

/// A minimization MILP: `min c'x` subject to linear rows and variable bounds.
///
/// Binary variables carry their own bounds (normally `[0, 1]`, tightened when
/// fixed); integrality is only enforced by [`crate::solve_milp`].
#[derive(Clone, Debug, Default, PartialEq)]
pub struct Model {
    pub vars: Vec<Variable>,
    pub rows: Vec<Row>,
    var_index: HashMap<String, VarId>,
}

impl Model {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn num_vars(&self) -> usize {
        self.vars.len()
    }

    pub fn num_rows(&self) -> usize {
        self.rows.len()
    }

    pub fn num_binaries(&self) -> usize {
        self.vars
            .iter()
            .filter(|v| v.kind == VarKind::Binary)
            .count()
    }

    pub fn add_var(
        &mut self,
        name: impl Into<String>,
        lower: f64,
        upper: f64,
        objective: f64,
        kind: VarKind,
    ) -> Result<VarId, MilpError> {
        let name = name.into();
        if self.var_index.contains_key(&name) {
            return Err(MilpError::DuplicateVariable(name));
        }
        if lower.is_nan() || upper.is_nan() || lower > upper {
            return Err(MilpError::InvalidBounds { name, lower, upper });
        }
        if !objective.is_finite() {
            return Err(MilpError::InvalidCoefficient(name));
        }
        let id = self.vars.len();
        self.var_index.insert(name.clone(), id);
        self.vars.push(Variable {
            name,
            lower,
            upper,
            objective,
            kind,
        });
        Ok(id)
    }

    pub fn add_continuous(
        &mut self,
        name: impl Into<String>,
        lower: f64,
        upper: f64,
        objective: f64,
    ) -> Result<VarId, MilpError> {
        self.add_var(name, lower, upper, objective, VarKind::Continuous)
    }

    pub fn add_binary(&mut self, name: impl Into<String>, objective: f64) -> Result<VarId, MilpError> {
        self.add_var(name, 0.0, 1.0, objective, VarKind::Binary)
    }

    /// Adds a row. Repeated variables in `terms` are merged and zero
    /// coefficients dropped.
    pub fn add_row(
        &mut self,
        name: impl Into<String>,
        terms: impl IntoIterator<Item = (VarId, f64)>,
        sense: Sense,
        rhs: f64,
    ) -> Result<RowId, MilpError> {
        let name = name.into();
        let mut merged: Vec<(VarId, f64)> = Vec::new();
        for (j, a) in terms {
            if j >= self.vars.len() {
                return Err(MilpError::UnknownVariable(format!("#{j} in row {name}")));
            }
            if !a.is_finite() {
                return Err(MilpError::InvalidCoefficient(name));
            }
            match merged.iter_mut().find(|(k, _)| *k == j) {
                Some(slot) => slot.1 += a,
                None => merged.push((j, a)),
            }
        }
        merged.retain(|&(_, a)| a != 0.0);
        if !rhs.is_finite() {
            return Err(MilpError::InvalidCoefficient(name));
        }
        let id = self.rows.len();
        self.rows.push(Row {
            name,
            terms: merged,
            sense,
            rhs,
        });
        Ok(id)
    }

    pub fn var_id(&self, name: &str) -> Option<VarId> {
        self.var_index.get(name).copied()
    }

    pub fn set_bounds(&mut self, var: VarId, lower: f64, upper: f64) {
        self.vars[var].lower = lower;
        self.vars[var].upper = upper;
    }

    pub fn objective_value(&self, values: &[f64]) -> f64 {
        self.vars
            .iter()
            .zip(values)
            .map(|(v, x)| v.objective * x)
            .sum()
    }

    pub fn lower_bounds(&self) -> Vec<f64> {
        self.vars.iter().map(|v| v.lower).collect()
    }

    pub fn upper_bounds(&self) -> Vec<f64> {
        self.vars.iter().map(|v| v.upper).collect()
    }

    /// Largest row violation and largest bound violation of `values`.
    pub fn max_violations(&self, values: &[f64]) -> (f64, f64) {
        let rows = self
            .rows
            .iter()
            .map(|r| r.violation(values))
            .fold(0.0, f64::max);
        let bounds = self
            .vars
            .iter()
            .zip(values)
            .map(|(v, &x)| (v.lower - x).max(x - v.upper).max(0.0))
            .fold(0.0, f64::max);
        (rows, bounds)
    }

    /// Column-wise view: for each variable, the rows it appears in.
    pub fn columns(&self) -> Vec<Vec<(RowId, f64)>> {
        let mut cols = vec![Vec::new(); self.vars.len()];
        for (i, row) in self.rows.iter().enumerate() {
            for &(j, a) in &row.terms {
                cols[j].push((i, a));
            }
        }
        cols
    }
}
