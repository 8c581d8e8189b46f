//! Split selection: which rows to split, which coefficient to tighten, and
//! which box variable to cut.

use std::collections::BTreeMap;
use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::boxes::{split_box, IntervalBox};
use crate::error::{Error, Result};
use crate::expr::{eval_on_box, Expr};
use crate::interval::Interval;
use crate::relaxation::{FeasibilityLP, IntervalLinearSystem, LPSolution, LpStatus};

/// Residuals at or below `-ACCEPT_TOLERANCE` certify solvability.
pub const ACCEPT_TOLERANCE: f64 = 1e-9;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Strategy {
    RoundRobin,
    SplitWorst,
    SplitAll,
}

impl Strategy {
    pub const ALL: [Strategy; 3] = [Strategy::RoundRobin, Strategy::SplitWorst, Strategy::SplitAll];

    pub fn name(&self) -> &'static str {
        match self {
            Strategy::RoundRobin => "round-robin",
            Strategy::SplitWorst => "split-worst",
            Strategy::SplitAll => "split-all",
        }
    }
}

impl fmt::Display for Strategy {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for Strategy {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        Strategy::ALL
            .into_iter()
            .find(|st| st.name() == s)
            .ok_or_else(|| Error::InvalidConfig(format!("unknown strategy `{s}`")))
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct HeuristicConfig {
    pub epsilon: f64,
    pub aging_kappa: f64,
    pub strategy: Strategy,
}

impl Default for HeuristicConfig {
    fn default() -> Self {
        HeuristicConfig { epsilon: 0.001, aging_kappa: 0.1, strategy: Strategy::SplitAll }
    }
}

impl HeuristicConfig {
    /// `epsilon = 0` is accepted so the uncorrected score can be exercised;
    /// termination needs `epsilon > 0`.
    pub fn validate(&self) -> Result<()> {
        if !(self.epsilon.is_finite() && self.epsilon >= 0.0) {
            return Err(Error::InvalidConfig(format!("epsilon must be finite and >= 0, got {}", self.epsilon)));
        }
        if !(self.aging_kappa.is_finite() && self.aging_kappa >= 0.0) {
            return Err(Error::InvalidConfig(format!("kappa must be finite and >= 0, got {}", self.aging_kappa)));
        }
        Ok(())
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub enum Sign {
    /// Shrink the upper bound.
    Plus,
    /// Raise the lower bound.
    Minus,
}

impl Sign {
    pub fn bound(&self, iv: Interval) -> f64 {
        match self {
            Sign::Plus => iv.hi(),
            Sign::Minus => iv.lo(),
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub enum Coefficient {
    X(usize),
    Rhs,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct SplitTarget {
    pub branch: usize,
    /// `None` for round-robin targets.
    pub coefficient: Option<Coefficient>,
    pub sign: Sign,
    pub variable: Option<usize>,
}

pub fn coeff_score(p: Interval, x1j: f64, x2j: f64, epsilon: f64) -> f64 {
    p.width() * (x1j.max(x2j) + epsilon)
}

fn best_coefficient(p: &[Interval], q: Interval, sol: &LPSolution, epsilon: f64) -> (Coefficient, Sign) {
    let mut best = (Coefficient::X(0), f64::NEG_INFINITY);
    for (j, pj) in p.iter().enumerate() {
        let h = coeff_score(*pj, sol.x1[j], sol.x2[j], epsilon);
        if h > best.1 {
            best = (Coefficient::X(j), h);
        }
    }
    // The right-hand side enters as the coefficient of the constant -1.
    if q.width() * (1.0 + epsilon) > best.1 {
        best = (Coefficient::Rhs, f64::INFINITY);
    }
    match best.0 {
        Coefficient::X(j) => (best.0, if sol.x1[j] - sol.x2[j] >= 0.0 { Sign::Plus } else { Sign::Minus }),
        Coefficient::Rhs => (Coefficient::Rhs, Sign::Minus),
    }
}

/// Rows to split for an unsolved relaxation. Rows whose entries are all
/// points are skipped since no split can tighten them; an empty result means
/// every row is exact.
pub fn select_targets(
    sys: &IntervalLinearSystem,
    _lp: &FeasibilityLP,
    sol: &LPSolution,
    d: &[f64],
    cfg: &HeuristicConfig,
) -> Result<Vec<SplitTarget>> {
    if sol.status == LpStatus::Unbounded || sol.rho <= -ACCEPT_TOLERANCE {
        return Err(Error::NoPositiveResidual);
    }
    let candidates: Vec<usize> = (0..sys.rows.len()).filter(|&i| !sys.rows[i].is_exact()).collect();
    // Residuals within rounding noise of the maximum count as tied.
    let dmax = candidates.iter().map(|&i| d[i]).fold(f64::NEG_INFINITY, f64::max);
    let tied = |i: usize| d[i] >= dmax - ACCEPT_TOLERANCE * dmax.abs();
    let worst = candidates.iter().copied().filter(|&i| tied(i)).min_by_key(|&i| sys.rows[i].branch);
    let Some(worst) = worst else { return Ok(Vec::new()) };

    let rows: Vec<usize> = match cfg.strategy {
        Strategy::SplitAll => {
            let positive: Vec<usize> = candidates.iter().copied().filter(|&i| d[i] > 0.0).collect();
            if positive.is_empty() {
                vec![worst]
            } else {
                positive
            }
        }
        Strategy::SplitWorst | Strategy::RoundRobin => vec![worst],
    };
    Ok(rows
        .into_iter()
        .map(|i| {
            let row = &sys.rows[i];
            if cfg.strategy == Strategy::RoundRobin {
                SplitTarget { branch: row.branch, coefficient: None, sign: Sign::Plus, variable: None }
            } else {
                let (coefficient, sign) = best_coefficient(&row.p, row.q, sol, cfg.epsilon);
                SplitTarget { branch: row.branch, coefficient: Some(coefficient), sign, variable: None }
            }
        })
        .collect())
}

/// Trial-split variable choice: maximizes `kappa * width(t(B)) * age(i)`
/// plus the smaller of the two children's bound improvements. Exact ties go
/// to the larger of the two improvements, then to the lowest index.
pub fn splitheur(t: &Expr, bx: &IntervalBox, sign: Sign, ages: &[u32], kappa: f64) -> Result<usize> {
    let base = eval_on_box(t, bx)?;
    let w = if base.width() > 0.0 && base.width().is_finite() { base.width() } else { 1.0 };
    let b0 = sign.bound(base);
    let mut best: Option<(usize, f64, f64)> = None;
    for i in 0..bx.len() {
        if !bx.is_splittable(i) {
            continue;
        }
        let (l, r) = split_box(bx, i)?;
        let gl = (b0 - sign.bound(eval_on_box(t, &l)?)).abs();
        let gr = (b0 - sign.bound(eval_on_box(t, &r)?)).abs();
        let age = ages.get(i).copied().unwrap_or(0) as f64;
        let score = kappa * w * age + gl.min(gr);
        let tie_break = gl.max(gr);
        let better = match best {
            None => true,
            Some((_, s, tb)) => score > s || (score == s && tie_break > tb),
        };
        if better {
            best = Some((i, score, tie_break));
        }
    }
    best.map(|(i, _, _)| i).ok_or(Error::AllDimensionsDegenerate)
}

/// Dimension `counter mod s`, advancing past dimensions that cannot be split.
pub fn round_robin_var(bx: &IntervalBox, counter: usize) -> Result<usize> {
    let s = bx.len();
    (0..s).map(|k| (counter + k) % s).find(|&i| bx.is_splittable(i)).ok_or(Error::AllDimensionsDegenerate)
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
pub enum ExprKey {
    Coef(usize),
    Rhs,
    Guard(usize),
}

impl From<Coefficient> for ExprKey {
    fn from(c: Coefficient) -> Self {
        match c {
            Coefficient::X(j) => ExprKey::Coef(j),
            Coefficient::Rhs => ExprKey::Rhs,
        }
    }
}

/// Per (branch, expression, variable): the solver iteration at which the
/// variable was last split for that expression in the branch's lineage
/// (iteration 0 if never). Ages are measured against the current iteration.
#[derive(Clone, Debug, Default, PartialEq)]
pub struct AgeTable {
    last_split: BTreeMap<(usize, ExprKey), Vec<u64>>,
}

impl AgeTable {
    pub fn ages(&self, branch: usize, key: ExprKey, s: usize, now: u64) -> Vec<u32> {
        let age = |last: u64| u32::try_from(now.saturating_sub(last)).unwrap_or(u32::MAX);
        match self.last_split.get(&(branch, key)) {
            Some(v) => v.iter().map(|&l| age(l)).collect(),
            None => vec![age(0); s],
        }
    }

    pub fn record_split(&mut self, branch: usize, key: ExprKey, s: usize, chosen: usize, now: u64) {
        let last = self.last_split.entry((branch, key)).or_insert_with(|| vec![0; s]);
        last[chosen] = now;
    }

    /// Moves the parent's entries to each child.
    pub fn inherit(&mut self, parent: usize, children: &[usize]) {
        let keys: Vec<(usize, ExprKey)> = self
            .last_split
            .range((parent, ExprKey::Coef(0))..)
            .take_while(|(k, _)| k.0 == parent)
            .map(|(k, _)| *k)
            .collect();
        for key in keys {
            let last = self.last_split.remove(&key).expect("key just listed");
            for &c in children {
                self.last_split.insert((c, key.1), last.clone());
            }
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::relaxation::{residual_vector, rohn_transform, solve_feasibility};

    fn bx(dims: &[(&str, f64, f64)]) -> IntervalBox {
        IntervalBox::new(dims.iter().map(|(n, a, b)| (n.to_string(), Interval::new(*a, *b))).collect()).unwrap()
    }

    #[test]
    fn score_values() {
        assert_eq!(coeff_score(Interval::new(-1.0, 3.0), 0.0, 0.0, 0.0), 0.0);
        assert!((coeff_score(Interval::new(-1.0, 3.0), 0.0, 0.0, 0.001) - 0.004).abs() < 1e-15);
        assert_eq!(coeff_score(Interval::new(2.0, 2.0), 5.0, 0.0, 0.001), 0.0);
    }

    fn motivating() -> (IntervalLinearSystem, FeasibilityLP, LPSolution, Vec<f64>) {
        let mut sys = IntervalLinearSystem::new(2);
        sys.push(0, vec![Interval::new(-1.0, 3.0), Interval::new(-3.0, 1.0)], Interval::point(-2.0)).unwrap();
        let lp = rohn_transform(&sys, &[], &[]);
        let sol = solve_feasibility(&lp).unwrap();
        let d = residual_vector(&lp, &sol);
        (sys, lp, sol, d)
    }

    #[test]
    fn tie_goes_to_first_coefficient() {
        let (sys, lp, sol, d) = motivating();
        let t = select_targets(&sys, &lp, &sol, &d, &HeuristicConfig::default()).unwrap();
        assert_eq!(
            t,
            vec![SplitTarget { branch: 0, coefficient: Some(Coefficient::X(0)), sign: Sign::Plus, variable: None }]
        );
    }

    #[test]
    fn worst_versus_all() {
        let mut sys = IntervalLinearSystem::new(1);
        sys.push(0, vec![Interval::new(0.0, 1.0)], Interval::point(-0.5)).unwrap();
        sys.push(1, vec![Interval::new(0.0, 1.0)], Interval::point(-2.0)).unwrap();
        let lp = rohn_transform(&sys, &[], &[]);
        let sol = LPSolution { x1: vec![0.0], x2: vec![0.0], rho: 2.0, status: LpStatus::Optimal };
        let d = residual_vector(&lp, &sol);
        assert_eq!(d, vec![0.5, 2.0]);
        let mut cfg = HeuristicConfig { strategy: Strategy::SplitWorst, ..Default::default() };
        let rows: Vec<usize> = select_targets(&sys, &lp, &sol, &d, &cfg).unwrap().iter().map(|t| t.branch).collect();
        assert_eq!(rows, vec![1]);
        cfg.strategy = Strategy::SplitAll;
        let rows: Vec<usize> = select_targets(&sys, &lp, &sol, &d, &cfg).unwrap().iter().map(|t| t.branch).collect();
        assert_eq!(rows, vec![0, 1]);
    }

    #[test]
    fn solved_relaxation_has_no_targets() {
        let (sys, lp, mut sol, d) = motivating();
        sol.rho = -1.0;
        assert_eq!(select_targets(&sys, &lp, &sol, &d, &HeuristicConfig::default()), Err(Error::NoPositiveResidual));
    }

    #[test]
    fn wide_rhs_is_a_candidate() {
        let mut sys = IntervalLinearSystem::new(1);
        sys.push(0, vec![Interval::new(1.0, 1.0)], Interval::new(-3.0, 1.0)).unwrap();
        let lp = rohn_transform(&sys, &[vec![1.0]], &[1.0]);
        let sol = solve_feasibility(&lp).unwrap();
        let d = residual_vector(&lp, &sol);
        let t = select_targets(&sys, &lp, &sol, &d, &HeuristicConfig::default()).unwrap();
        assert_eq!(t[0].coefficient, Some(Coefficient::Rhs));
        assert_eq!(t[0].sign, Sign::Minus);
    }

    #[test]
    fn exact_rows_are_skipped() {
        let mut sys = IntervalLinearSystem::new(1);
        sys.push(0, vec![Interval::point(1.0)], Interval::point(-1.0)).unwrap();
        let lp = rohn_transform(&sys, &[vec![1.0]], &[1.0]);
        let sol = solve_feasibility(&lp).unwrap();
        let d = residual_vector(&lp, &sol);
        assert!(select_targets(&sys, &lp, &sol, &d, &HeuristicConfig::default()).unwrap().is_empty());
    }

    #[test]
    fn trial_splits_pick_improving_variable() {
        let t = Expr::var("y1").pow(2).add(Expr::var("y2"));
        let b = bx(&[("y1", -1.0, 1.0), ("y2", 0.0, 2.0)]);
        assert_eq!(splitheur(&t, &b, Sign::Plus, &[0, 0], 0.1).unwrap(), 1);
        assert_eq!(splitheur(&t, &b, Sign::Plus, &[1000, 0], 0.1).unwrap(), 0);
        let b = bx(&[("y1", 0.0, 4.0), ("y2", 0.0, 4.0)]);
        assert_eq!(splitheur(&Expr::var("y1"), &b, Sign::Minus, &[0, 0], 0.1).unwrap(), 0);
    }

    #[test]
    fn dependency_overestimate_scores_on_both_children() {
        // y1 - y1 over [0, 1] evaluates to [-1, 1]; each half gives [-0.5, 0.5].
        let t = Expr::var("y1").sub(Expr::var("y1")).add(Expr::var("y2"));
        let b = bx(&[("y1", 0.0, 1.0), ("y2", 0.0, 1.0)]);
        assert_eq!(splitheur(&t, &b, Sign::Plus, &[0, 0], 0.0).unwrap(), 0);
    }

    #[test]
    fn degenerate_boxes() {
        let b = bx(&[("y1", 1.0, 1.0)]);
        assert_eq!(splitheur(&Expr::var("y1"), &b, Sign::Plus, &[0], 0.1), Err(Error::AllDimensionsDegenerate));
        assert_eq!(round_robin_var(&b, 0), Err(Error::AllDimensionsDegenerate));
    }

    #[test]
    fn round_robin_cycles_and_skips() {
        let b = bx(&[("y1", 0.0, 1.0), ("y2", 0.0, 1.0)]);
        assert_eq!(round_robin_var(&b, 0).unwrap(), 0);
        assert_eq!(round_robin_var(&b, 3).unwrap(), 1);
        let b = bx(&[("y1", 0.0, 1.0), ("y2", 2.0, 2.0), ("y3", 0.0, 1.0)]);
        assert_eq!(round_robin_var(&b, 1).unwrap(), 2);
    }

    #[test]
    fn ages_reset_increment_and_inherit() {
        let mut a = AgeTable::default();
        assert_eq!(a.ages(3, ExprKey::Coef(1), 3, 4), vec![4, 4, 4]);
        a.record_split(3, ExprKey::Coef(1), 3, 0, 5);
        a.record_split(3, ExprKey::Coef(1), 3, 2, 7);
        assert_eq!(a.ages(3, ExprKey::Coef(1), 3, 7), vec![2, 7, 0]);
        a.record_split(3, ExprKey::Guard(0), 3, 1, 7);
        a.inherit(3, &[8, 9]);
        assert_eq!(a.ages(3, ExprKey::Coef(1), 3, 9), vec![9, 9, 9]);
        assert_eq!(a.ages(9, ExprKey::Coef(1), 3, 9), vec![4, 9, 2]);
        assert_eq!(a.ages(8, ExprKey::Guard(0), 3, 9), vec![9, 2, 9]);
    }

    #[test]
    fn strategy_names_round_trip() {
        for s in Strategy::ALL {
            assert_eq!(s.name().parse::<Strategy>().unwrap(), s);
        }
        assert!("greedy".parse::<Strategy>().is_err());
    }
}
