//! The main loop: simplify every live branch, stop on a false branch, split
//! undecided branches, otherwise solve the residual LP and either return its
//! point or split the boxes it blames.

use std::time::{Duration, Instant};

use serde::{Deserialize, Serialize};

use crate::boxes::{split_box, IntervalBox};
use crate::error::{Error, Result};
use crate::expr::Expr;
use crate::heuristics::{
    round_robin_var, select_targets, splitheur, AgeTable, Coefficient, ExprKey, HeuristicConfig, Sign, SplitTarget,
    Strategy, ACCEPT_TOLERANCE,
};
use crate::interval::Interval;
use crate::model::{validate_problem, Problem};
use crate::relaxation::{residual_vector, rohn_transform, solve_feasibility, IntervalLinearSystem, LpStatus};
use crate::simplify::{simplify_on_box, BranchStatus, Decision, Simplified};
use crate::verify::{verify_solution, VerifyResult, DEFAULT_DEPTH};

#[derive(Clone, Debug, PartialEq)]
pub struct SolveConfig {
    pub heuristic: HeuristicConfig,
    pub max_splits: usize,
    pub time_budget: Option<Duration>,
    /// Run the verifier on a returned solution.
    pub verify: bool,
    /// Record one entry per iteration in `SolveOutcome::trace`.
    pub trace: bool,
}

impl Default for SolveConfig {
    fn default() -> Self {
        SolveConfig {
            heuristic: HeuristicConfig::default(),
            max_splits: 100_000,
            time_budget: None,
            verify: false,
            trace: false,
        }
    }
}

#[derive(Clone, Debug, Default, PartialEq, Serialize, Deserialize)]
pub struct SolveStats {
    /// Box bisections.
    pub splits: usize,
    /// Iterations that bisected at least one box.
    pub split_rounds: usize,
    pub lp_solves: usize,
    pub iterations: usize,
    pub wall_time_ms: f64,
}

/// Worst-case check of one row at the returned point.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct RowCertificate {
    /// Index of the input branch the box descends from.
    pub branch: usize,
    /// `sum_j max over p_j of p_j * x_j`.
    pub lhs_upper: f64,
    pub rhs_lower: f64,
}

#[derive(Clone, Debug, Default, PartialEq, Serialize, Deserialize)]
pub struct Certificate {
    pub rho: Option<f64>,
    pub rows: Vec<RowCertificate>,
    /// Boxes whose formula was decided true by interval evaluation alone.
    pub proved_true_boxes: usize,
}

#[derive(Clone, Debug, PartialEq)]
pub enum Infeasibility {
    /// The formula of input branch `branch` is false on all of `bbox`.
    Branch {
        branch: usize,
        bbox: IntervalBox,
    },
    Equalities,
    /// Every row of the relaxation is exact and the system has no solution.
    ExactRows,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Limit {
    Splits,
    Time,
    /// A box that still needed splitting has reached floating-point resolution.
    Resolution,
}

#[derive(Clone, Debug, PartialEq)]
pub enum Outcome {
    Solution { x: Vec<f64>, certificate: Certificate },
    Infeasible(Infeasibility),
    BudgetExhausted(Limit),
}

impl Outcome {
    pub fn kind(&self) -> &'static str {
        match self {
            Outcome::Solution { .. } => "solution",
            Outcome::Infeasible(_) => "infeasible",
            Outcome::BudgetExhausted(_) => "budget-exhausted",
        }
    }

    pub fn solution(&self) -> Option<&[f64]> {
        match self {
            Outcome::Solution { x, .. } => Some(x),
            _ => None,
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct IterationRecord {
    /// Residual of the relaxation, absent when an undecided branch was split.
    pub rho: Option<f64>,
    pub targets: Vec<SplitTarget>,
}

#[derive(Clone, Debug, PartialEq)]
pub struct SolveOutcome {
    pub outcome: Outcome,
    pub stats: SolveStats,
    pub trace: Vec<IterationRecord>,
    pub verification: Option<VerifyResult>,
}

struct Live {
    id: usize,
    origin: usize,
    bbox: IntervalBox,
    simplified: Option<Simplified>,
    rr_counter: usize,
}

impl Live {
    fn status(&self) -> &BranchStatus {
        &self.simplified.as_ref().expect("simplified before use").status
    }
}

struct State<'a> {
    p: &'a Problem,
    cfg: &'a SolveConfig,
    live: Vec<Live>,
    next_id: usize,
    ages: AgeTable,
    stats: SolveStats,
    last_split_iteration: usize,
}

enum SplitResult {
    Done,
    Stop(Limit),
}

impl State<'_> {
    fn position(&self, id: usize) -> usize {
        self.live.iter().position(|b| b.id == id).expect("live branch id")
    }

    /// Replaces branch `id` by its two halves along `var`. Children get
    /// fresh ids and inherit the parent's ages.
    fn split(&mut self, id: usize, var: usize, key: Option<ExprKey>) -> Result<SplitResult> {
        if self.stats.splits >= self.cfg.max_splits {
            return Ok(SplitResult::Stop(Limit::Splits));
        }
        let idx = self.position(id);
        let parent = self.live.remove(idx);
        let (l, r) = split_box(&parent.bbox, var)?;
        if let Some(key) = key {
            self.ages.record_split(parent.id, key, parent.bbox.len(), var, self.stats.iterations as u64);
        }
        let ids = [self.next_id, self.next_id + 1];
        self.next_id += 2;
        self.ages.inherit(parent.id, &ids);
        for (id, bbox) in ids.into_iter().zip([l, r]) {
            self.live.push(Live {
                id,
                origin: parent.origin,
                bbox,
                simplified: None,
                rr_counter: parent.rr_counter + 1,
            });
        }
        self.stats.splits += 1;
        if self.last_split_iteration != self.stats.iterations {
            self.last_split_iteration = self.stats.iterations;
            self.stats.split_rounds += 1;
        }
        Ok(SplitResult::Done)
    }

    fn choose_variable(&self, b: &Live, t: &Expr, sign: Sign, key: ExprKey) -> Result<usize> {
        if self.cfg.heuristic.strategy == Strategy::RoundRobin {
            round_robin_var(&b.bbox, b.rr_counter)
        } else {
            let ages = self.ages.ages(b.id, key, b.bbox.len(), self.stats.iterations as u64);
            splitheur(t, &b.bbox, sign, &ages, self.cfg.heuristic.aging_kappa)
        }
    }

    /// The undecided branch whose widest straddling guard is widest overall,
    /// with that guard's index and enclosure.
    fn pick_undecided(&self) -> Option<(usize, usize, Interval)> {
        let mut best: Option<(usize, usize, Interval)> = None;
        for b in &self.live {
            let BranchStatus::Undecided(residual) = b.status() else { continue };
            let originals = self.p.branches[b.origin].formula.guards();
            let retained = residual.guards();
            for g in &b.simplified.as_ref().expect("simplified").guards {
                if g.decision != Decision::Undecided || !retained.contains(&originals[g.index]) {
                    continue;
                }
                if best.is_none_or(|(_, _, iv)| g.enclosure.width() > iv.width()) {
                    best = Some((b.id, g.index, g.enclosure));
                }
            }
        }
        best
    }

    fn coefficient_expr(&self, origin: usize, c: Coefficient) -> Expr {
        let atom = self.p.branches[origin].formula.linear_atom().expect("linear row has an atom");
        match c {
            Coefficient::X(j) => atom.coefficient(&self.p.x_vars[j]).cloned().unwrap_or(Expr::Const(0.0)),
            Coefficient::Rhs => atom.rhs.clone(),
        }
    }
}

fn degenerate_to_limit(e: Error) -> Result<SplitResult> {
    match e {
        Error::AllDimensionsDegenerate | Error::SplitDegenerate(_) => Ok(SplitResult::Stop(Limit::Resolution)),
        other => Err(other),
    }
}

/// Runs the solver. Structural problems and evaluation errors (such as a
/// division by an interval containing zero) are returned as `Err`.
pub fn solve(p: &Problem, cfg: &SolveConfig) -> Result<SolveOutcome> {
    cfg.heuristic.validate()?;
    let violations = validate_problem(p);
    if !violations.is_empty() {
        let text: Vec<String> = violations.iter().map(|v| v.to_string()).collect();
        return Err(Error::InvalidProblem(text.join("; ")));
    }
    let start = Instant::now();
    let mut st = State {
        p,
        cfg,
        live: p
            .branches
            .iter()
            .enumerate()
            .map(|(i, br)| Live { id: i, origin: i, bbox: br.bbox.clone(), simplified: None, rr_counter: 0 })
            .collect(),
        next_id: p.branches.len(),
        ages: AgeTable::default(),
        stats: SolveStats::default(),
        last_split_iteration: 0,
    };
    let mut trace = Vec::new();
    let mut proved_true_boxes = 0usize;

    let outcome = 'main: loop {
        if let Some(budget) = cfg.time_budget {
            if start.elapsed() > budget {
                break Outcome::BudgetExhausted(Limit::Time);
            }
        }
        st.stats.iterations += 1;

        for b in st.live.iter_mut().filter(|b| b.simplified.is_none()) {
            b.simplified = Some(simplify_on_box(&p.branches[b.origin].formula, &b.bbox, &p.x_vars)?);
        }
        if let Some(b) = st.live.iter().find(|b| *b.status() == BranchStatus::ProvedFalse) {
            break Outcome::Infeasible(Infeasibility::Branch { branch: b.origin, bbox: b.bbox.clone() });
        }
        let before = st.live.len();
        st.live.retain(|b| *b.status() != BranchStatus::ProvedTrue);
        proved_true_boxes += before - st.live.len();

        if st.live.is_empty() {
            if p.num_equalities() == 0 {
                break Outcome::Solution {
                    x: vec![0.0; p.num_x()],
                    certificate: Certificate { rho: None, rows: vec![], proved_true_boxes },
                };
            }
            st.stats.lp_solves += 1;
            let lp = rohn_transform(&IntervalLinearSystem::new(p.num_x()), &p.eq_matrix, &p.eq_rhs);
            match solve_feasibility(&lp) {
                Ok(sol) => {
                    break Outcome::Solution {
                        x: sol.x(),
                        certificate: Certificate { rho: None, rows: vec![], proved_true_boxes },
                    }
                }
                Err(Error::EqualitiesInfeasible) => break Outcome::Infeasible(Infeasibility::Equalities),
                Err(e) => return Err(e),
            }
        }

        if let Some((id, guard_index, enclosure)) = st.pick_undecided() {
            let b = &st.live[st.position(id)];
            let guard = p.branches[b.origin].formula.guards()[guard_index].clone();
            let sign = if enclosure.hi().abs() < enclosure.lo().abs() { Sign::Plus } else { Sign::Minus };
            let key = ExprKey::Guard(guard_index);
            let step = match st.choose_variable(b, &guard.body, sign, key) {
                Ok(var) => {
                    if cfg.trace {
                        trace.push(IterationRecord {
                            rho: None,
                            targets: vec![SplitTarget { branch: id, coefficient: None, sign, variable: Some(var) }],
                        });
                    }
                    st.split(id, var, Some(key)).or_else(degenerate_to_limit)?
                }
                Err(e) => degenerate_to_limit(e)?,
            };
            if let SplitResult::Stop(limit) = step {
                break Outcome::BudgetExhausted(limit);
            }
            continue;
        }

        let mut sys = IntervalLinearSystem::new(p.num_x());
        for b in &st.live {
            if let BranchStatus::LinearRow { p: coeffs, q } = b.status() {
                sys.push(b.id, coeffs.clone(), *q)?;
            }
        }
        let lp = rohn_transform(&sys, &p.eq_matrix, &p.eq_rhs);
        st.stats.lp_solves += 1;
        let sol = match solve_feasibility(&lp) {
            Ok(sol) => sol,
            Err(Error::EqualitiesInfeasible) => break Outcome::Infeasible(Infeasibility::Equalities),
            Err(e) => return Err(e),
        };
        if sol.status == LpStatus::Unbounded || sol.rho <= -ACCEPT_TOLERANCE {
            let x = sol.x();
            let rows = sys
                .rows
                .iter()
                .map(|row| {
                    let lhs_upper =
                        row.p.iter().zip(&x).map(|(pj, &xj)| if xj >= 0.0 { pj.hi() * xj } else { pj.lo() * xj }).sum();
                    RowCertificate { branch: st.live[st.position(row.branch)].origin, lhs_upper, rhs_lower: row.q.lo() }
                })
                .collect();
            break Outcome::Solution { x, certificate: Certificate { rho: Some(sol.rho), rows, proved_true_boxes } };
        }

        let d = residual_vector(&lp, &sol);
        let mut targets = select_targets(&sys, &lp, &sol, &d, &cfg.heuristic)?;
        if targets.is_empty() {
            break Outcome::Infeasible(Infeasibility::ExactRows);
        }
        for t in targets.iter_mut() {
            let b = &st.live[st.position(t.branch)];
            let (expr, key) = match t.coefficient {
                Some(c) => (st.coefficient_expr(b.origin, c), ExprKey::from(c)),
                None => (Expr::Const(0.0), ExprKey::Rhs),
            };
            match st.choose_variable(b, &expr, t.sign, key) {
                Ok(var) => t.variable = Some(var),
                Err(e) => {
                    if let SplitResult::Stop(limit) = degenerate_to_limit(e)? {
                        break 'main Outcome::BudgetExhausted(limit);
                    }
                }
            }
        }
        if cfg.trace {
            trace.push(IterationRecord { rho: Some(sol.rho), targets: targets.clone() });
        }
        for t in &targets {
            let key = t.coefficient.map(ExprKey::from);
            let var = t.variable.expect("variable chosen above");
            if let SplitResult::Stop(limit) = st.split(t.branch, var, key).or_else(degenerate_to_limit)? {
                break 'main Outcome::BudgetExhausted(limit);
            }
        }
    };

    st.stats.wall_time_ms = start.elapsed().as_secs_f64() * 1e3;
    let verification = match (&outcome, cfg.verify) {
        (Outcome::Solution { x, .. }, true) => Some(verify_solution(p, x, DEFAULT_DEPTH)),
        _ => None,
    };
    Ok(SolveOutcome { outcome, stats: st.stats, trace, verification })
}
