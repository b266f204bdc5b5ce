use std::time::Instant;

use microlp::{ComparisonOp, OptimizationDirection, Problem};

use crate::error::MilpError;
use crate::model::{Model, Sense};
use crate::simplex::DenseSimplex;

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum LpStatus {
    Optimal,
    Infeasible,
    Unbounded,
}

#[derive(Clone, Debug, PartialEq)]
pub struct LpSolution {
    pub status: LpStatus,
    pub objective: f64,
    pub values: Vec<f64>,
    pub pivots: usize,
}

impl LpSolution {
    pub(crate) fn infeasible(n: usize) -> Self {
        LpSolution {
            status: LpStatus::Infeasible,
            objective: f64::INFINITY,
            values: vec![0.0; n],
            pivots: 0,
        }
    }
}

/// Something that solves the continuous relaxation of a [`Model`] under
/// overridden variable bounds.
pub trait LpEngine {
    fn solve_bounded(
        &self,
        model: &Model,
        lower: &[f64],
        upper: &[f64],
        deadline: Option<Instant>,
    ) -> Result<LpSolution, MilpError>;
}

/// Sparse revised simplex from the `microlp` crate, used for models too large
/// for a dense tableau.
#[derive(Clone, Copy, Debug, Default)]
pub struct SparseSimplex;

impl LpEngine for SparseSimplex {
    fn solve_bounded(
        &self,
        model: &Model,
        lower: &[f64],
        upper: &[f64],
        deadline: Option<Instant>,
    ) -> Result<LpSolution, MilpError> {
        let n = model.num_vars();
        if lower.iter().zip(upper).any(|(l, u)| l > u) {
            return Ok(LpSolution::infeasible(n));
        }
        let mut problem = Problem::new(OptimizationDirection::Minimize);
        let vars: Vec<_> = model
            .vars
            .iter()
            .enumerate()
            .map(|(j, v)| problem.add_var(v.objective, (lower[j], upper[j])))
            .collect();
        for row in &model.rows {
            if row.terms.is_empty() {
                if row.violation(&[]) > 1e-9 {
                    return Ok(LpSolution::infeasible(n));
                }
                continue;
            }
            let op = match row.sense {
                Sense::Le => ComparisonOp::Le,
                Sense::Ge => ComparisonOp::Ge,
                Sense::Eq => ComparisonOp::Eq,
            };
            problem.add_constraint(
                row.terms.iter().map(|&(j, a)| (vars[j], a)),
                op,
                row.rhs,
            );
        }
        if let Some(d) = deadline {
            let left = d.saturating_duration_since(Instant::now());
            if left.is_zero() {
                return Err(MilpError::Deadline);
            }
            problem.set_time_limit(left);
        }
        match problem.solve() {
            Ok(outcome) => match outcome.into_solution() {
                Ok(sol) => {
                    let mut values: Vec<f64> =
                        vars.iter().map(|&v| sol.var_value_raw(v)).collect();
                    for (j, v) in values.iter_mut().enumerate() {
                        *v = v.clamp(lower[j], upper[j]);
                    }
                    Ok(LpSolution {
                        status: LpStatus::Optimal,
                        objective: model.objective_value(&values),
                        values,
                        pivots: 0,
                    })
                }
                Err(_) => Err(MilpError::Deadline),
            },
            Err(microlp::Error::Infeasible) => Ok(LpSolution::infeasible(n)),
            Err(microlp::Error::Unbounded) => Ok(LpSolution {
                status: LpStatus::Unbounded,
                objective: f64::NEG_INFINITY,
                values: vec![0.0; n],
                pivots: 0,
            }),
            Err(e) => Err(MilpError::Engine(e.to_string())),
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Default)]
pub enum EngineChoice {
    /// Dense tableau below [`DENSE_LIMIT`] tableau cells, sparse above.
    #[default]
    Auto,
    Dense,
    Sparse,
}

/// Tableau cell count above which `Auto` switches to the sparse engine.
pub const DENSE_LIMIT: usize = 400_000;

impl EngineChoice {
    pub fn resolve(self, model: &Model) -> EngineChoice {
        match self {
            EngineChoice::Auto => {
                let m = model.num_rows();
                let cols = model.num_vars() + 2 * m;
                if m.saturating_mul(cols) <= DENSE_LIMIT {
                    EngineChoice::Dense
                } else {
                    EngineChoice::Sparse
                }
            }
            other => other,
        }
    }

    pub(crate) fn solve(
        self,
        model: &Model,
        lower: &[f64],
        upper: &[f64],
        deadline: Option<Instant>,
    ) -> Result<LpSolution, MilpError> {
        match self.resolve(model) {
            EngineChoice::Sparse => SparseSimplex.solve_bounded(model, lower, upper, deadline),
            _ => DenseSimplex::default().solve_bounded(model, lower, upper, deadline),
        }
    }
}

/// Solves the continuous relaxation of `model` (binaries relaxed to their
/// bounds). Infeasibility and unboundedness are reported in the status.
pub fn solve_lp(model: &Model) -> Result<LpSolution, MilpError> {
    solve_lp_with(model, EngineChoice::Auto)
}

pub fn solve_lp_with(model: &Model, engine: EngineChoice) -> Result<LpSolution, MilpError> {
    engine.solve(model, &model.lower_bounds(), &model.upper_bounds(), None)
}
