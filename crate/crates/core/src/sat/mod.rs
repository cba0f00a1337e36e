//! Satisfiability for clause sets mixing propositional atoms with integer
//! difference constraints.

mod graph;
mod solver;

pub use graph::{DiffGraph, Edge};
pub use solver::{solve, try_solve, BudgetExceeded, SatResult, SolveStats, Solver, Status, DEFAULT_DECISION_BUDGET};
