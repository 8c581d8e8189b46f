//! Machine-readable summary of one solver run.

use serde::{Deserialize, Serialize};

use crate::heuristics::Strategy;
use crate::solver::{SolveConfig, SolveOutcome};

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct RunReport {
    pub instance: String,
    /// `solution`, `infeasible` or `budget-exhausted`.
    pub outcome: String,
    /// Present for solutions only.
    pub x: Option<Vec<f64>>,
    pub splits: usize,
    pub split_rounds: usize,
    pub lp_solves: usize,
    pub wall_time_ms: f64,
    pub strategy: Strategy,
    pub epsilon: f64,
    pub kappa: f64,
    /// True only when the verifier ran and proved the solution.
    pub verified: bool,
}

impl RunReport {
    pub fn from_outcome(instance: &str, cfg: &SolveConfig, out: &SolveOutcome) -> Self {
        RunReport {
            instance: instance.to_string(),
            outcome: out.outcome.kind().to_string(),
            x: out.outcome.solution().map(<[f64]>::to_vec),
            splits: out.stats.splits,
            split_rounds: out.stats.split_rounds,
            lp_solves: out.stats.lp_solves,
            wall_time_ms: out.stats.wall_time_ms.max(0.0),
            strategy: cfg.heuristic.strategy,
            epsilon: cfg.heuristic.epsilon,
            kappa: cfg.heuristic.aging_kappa,
            verified: out.verification.as_ref().is_some_and(|v| v.is_verified()),
        }
    }
}
