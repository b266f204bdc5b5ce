//! Mixed-integer linear programming: model building, LP relaxations,
//! best-first branch-and-bound, and plain-text model/solution files.

pub mod branch;
pub mod error;
pub mod lp;
pub mod lpformat;
pub mod model;
pub mod presolve;
pub mod simplex;
pub mod solution;

pub use branch::{solve_milp, Incumbent, MilpParams, MilpSolution, MilpStatus, NodeRecord};
pub use error::MilpError;
pub use lp::{solve_lp, solve_lp_with, EngineChoice, LpEngine, LpSolution, LpStatus, SparseSimplex};
pub use lpformat::{parse_lp, write_lp};
pub use model::{Model, Row, RowId, Sense, VarId, VarKind, Variable};
pub use presolve::{presolve, Presolved};
pub use simplex::DenseSimplex;
pub use solution::{parse_solution, write_solution, SolutionText};
