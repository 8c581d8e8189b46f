//! Solver for quantified constraints
//! `exists x. AND_i forall y in B_i. phi_i(x, y)` where each `phi_i` is a
//! positive Boolean combination of inequalities and exactly one inequality
//! per branch mentions `x`, linearly.
//!
//! The solver evaluates guards and coefficients over boxes with interval
//! arithmetic, turns the resulting interval linear system into a residual
//! LP, and splits boxes guided by the LP minimizer until the residual
//! certifies a solution.

pub mod benchmarks;
pub mod boxes;
pub mod error;
pub mod expr;
pub mod heuristics;
pub mod interval;
pub mod model;
pub mod parser;
pub mod relaxation;
pub mod report;
pub mod simplex;
pub mod simplify;
pub mod solver;
pub mod verify;

pub use boxes::{split_box, IntervalBox};
pub use error::{Error, Result};
pub use expr::{eval_on_box, Expr};
pub use heuristics::{HeuristicConfig, Strategy};
pub use interval::Interval;
pub use model::{validate_problem, Branch, Formula, GuardAtom, LinearAtom, Problem, Violation};
pub use parser::parse_problem;
pub use report::RunReport;
pub use solver::{solve, SolveConfig, SolveOutcome};
pub use verify::{verify_solution, VerifyResult};
