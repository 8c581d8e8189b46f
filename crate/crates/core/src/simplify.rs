//! Interval evaluation of guards over a branch box, Boolean simplification,
//! and classification of the branch.

use crate::boxes::IntervalBox;
use crate::error::Result;
use crate::expr::eval_on_box;
use crate::interval::Interval;
use crate::model::{Branch, Formula, GuardAtom};

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Decision {
    True,
    False,
    Undecided,
}

/// Decision rule for an enclosure `iv` of a guard body.
pub fn decide(iv: Interval, strict: bool) -> Decision {
    if strict {
        if iv.hi() < 0.0 {
            Decision::True
        } else if iv.lo() >= 0.0 {
            Decision::False
        } else {
            Decision::Undecided
        }
    } else if iv.hi() <= 0.0 {
        Decision::True
    } else if iv.lo() > 0.0 {
        Decision::False
    } else {
        Decision::Undecided
    }
}

pub fn classify_guard(g: &GuardAtom, bx: &IntervalBox) -> Result<Decision> {
    Ok(decide(eval_on_box(&g.body, bx)?, g.strict))
}

/// Constant propagation through `And`/`Or`, flattening nested connectives of
/// the same kind and unwrapping single-element lists.
pub fn bool_simplify(f: Formula) -> Formula {
    match f {
        Formula::And(items) => {
            let mut out = Vec::new();
            for item in items {
                match bool_simplify(item) {
                    Formula::True => {}
                    Formula::False => return Formula::False,
                    Formula::And(inner) => out.extend(inner),
                    other => out.push(other),
                }
            }
            match out.len() {
                0 => Formula::True,
                1 => out.pop().unwrap(),
                _ => Formula::And(out),
            }
        }
        Formula::Or(items) => {
            let mut out = Vec::new();
            for item in items {
                match bool_simplify(item) {
                    Formula::False => {}
                    Formula::True => return Formula::True,
                    Formula::Or(inner) => out.extend(inner),
                    other => out.push(other),
                }
            }
            match out.len() {
                0 => Formula::False,
                1 => out.pop().unwrap(),
                _ => Formula::Or(out),
            }
        }
        other => other,
    }
}

#[derive(Clone, Debug, PartialEq)]
pub enum BranchStatus {
    ProvedTrue,
    ProvedFalse,
    /// `sum_j p[j] x_j <= q` must hold for all values in the intervals.
    LinearRow {
        p: Vec<Interval>,
        q: Interval,
    },
    Undecided(Formula),
}

/// Enclosure and decision of one guard leaf; `index` is the guard's
/// depth-first position in the original formula.
#[derive(Clone, Debug, PartialEq)]
pub struct GuardEval {
    pub index: usize,
    pub enclosure: Interval,
    pub decision: Decision,
}

#[derive(Clone, Debug, PartialEq)]
pub struct Simplified {
    pub status: BranchStatus,
    pub guards: Vec<GuardEval>,
}

fn substitute(f: &Formula, bx: &IntervalBox, counter: &mut usize, evals: &mut Vec<GuardEval>) -> Result<Formula> {
    Ok(match f {
        Formula::Guard(g) => {
            let index = *counter;
            *counter += 1;
            let enclosure = eval_on_box(&g.body, bx)?;
            let decision = decide(enclosure, g.strict);
            evals.push(GuardEval { index, enclosure, decision });
            match decision {
                Decision::True => Formula::True,
                Decision::False => Formula::False,
                Decision::Undecided => f.clone(),
            }
        }
        Formula::And(items) => {
            Formula::And(items.iter().map(|i| substitute(i, bx, counter, evals)).collect::<Result<_>>()?)
        }
        Formula::Or(items) => {
            Formula::Or(items.iter().map(|i| substitute(i, bx, counter, evals)).collect::<Result<_>>()?)
        }
        other => other.clone(),
    })
}

/// Simplifies `formula` over `bx`. Coefficients are ordered by `x_vars`;
/// variables without a coefficient get `[0, 0]`.
pub fn simplify_on_box(formula: &Formula, bx: &IntervalBox, x_vars: &[String]) -> Result<Simplified> {
    let mut guards = Vec::new();
    let reduced = bool_simplify(substitute(formula, bx, &mut 0, &mut guards)?);
    let status = match reduced {
        Formula::True => BranchStatus::ProvedTrue,
        Formula::False => BranchStatus::ProvedFalse,
        Formula::Linear(atom) => {
            let p = x_vars
                .iter()
                .map(|x| match atom.coefficient(x) {
                    Some(t) => eval_on_box(t, bx),
                    None => Ok(Interval::point(0.0)),
                })
                .collect::<Result<Vec<_>>>()?;
            let q = eval_on_box(&atom.rhs, bx)?;
            BranchStatus::LinearRow { p, q }
        }
        other => BranchStatus::Undecided(other),
    };
    Ok(Simplified { status, guards })
}

pub fn simplify_branch(br: &Branch, x_vars: &[String]) -> Result<BranchStatus> {
    Ok(simplify_on_box(&br.formula, &br.bbox, x_vars)?.status)
}
