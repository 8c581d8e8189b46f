//! Independent check of a candidate `x`: each branch is proved by interval
//! branch-and-bound over its original box, and the equalities are checked
//! numerically.

use serde::{Deserialize, Serialize};

use crate::boxes::IntervalBox;
use crate::expr::eval_on_box;
use crate::interval::Interval;
use crate::model::{Formula, LinearAtom, Problem};
use crate::simplify::{decide, Decision};

pub const EQUALITY_TOLERANCE: f64 = 1e-7;
pub const DEFAULT_DEPTH: usize = 25;
const NODE_LIMIT: usize = 2_000_000;

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub enum Counterexample {
    /// A point of the branch box where the formula is rigorously false.
    Branch {
        branch: usize,
        point: Vec<(String, f64)>,
    },
    Equality {
        row: usize,
        residual: f64,
    },
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub enum VerifyResult {
    Verified,
    Counterexample(Counterexample),
    /// Some box of `branch` stayed undecided at the depth (or node) limit.
    Unknown {
        branch: usize,
        depth: usize,
    },
}

impl VerifyResult {
    pub fn is_verified(&self) -> bool {
        matches!(self, VerifyResult::Verified)
    }
}

fn linear_on_box(atom: &LinearAtom, bx: &IntervalBox, x_vars: &[String], x: &[f64]) -> Option<Interval> {
    let mut sum = Interval::point(0.0);
    for (name, t) in &atom.coeffs {
        let j = x_vars.iter().position(|v| v == name)?;
        sum = sum.add(&eval_on_box(t, bx).ok()?.mul(&Interval::point(x[j])));
    }
    Some(sum.sub(&eval_on_box(&atom.rhs, bx).ok()?))
}

/// Three-valued truth of `f` at `x` over `bx`; evaluation errors count as
/// undecided.
fn kleene(f: &Formula, bx: &IntervalBox, x_vars: &[String], x: &[f64]) -> Decision {
    match f {
        Formula::True => Decision::True,
        Formula::False => Decision::False,
        Formula::Guard(g) => eval_on_box(&g.body, bx).map_or(Decision::Undecided, |iv| decide(iv, g.strict)),
        Formula::Linear(atom) => linear_on_box(atom, bx, x_vars, x).map_or(Decision::Undecided, |iv| decide(iv, false)),
        Formula::And(items) => {
            let mut out = Decision::True;
            for item in items {
                match kleene(item, bx, x_vars, x) {
                    Decision::False => return Decision::False,
                    Decision::Undecided => out = Decision::Undecided,
                    Decision::True => {}
                }
            }
            out
        }
        Formula::Or(items) => {
            let mut out = Decision::False;
            for item in items {
                match kleene(item, bx, x_vars, x) {
                    Decision::True => return Decision::True,
                    Decision::Undecided => out = Decision::Undecided,
                    Decision::False => {}
                }
            }
            out
        }
    }
}

fn point_box(bx: &IntervalBox) -> IntervalBox {
    IntervalBox::new(bx.dims().iter().map(|(n, iv)| (n.clone(), Interval::point(iv.midpoint()))).collect())
        .expect("same names as a valid box")
}

enum BranchCheck {
    Proved,
    Falsified(Vec<(String, f64)>),
    Unknown,
}

fn check_branch(f: &Formula, root: &IntervalBox, x_vars: &[String], x: &[f64], depth: usize) -> BranchCheck {
    let mut stack = vec![(root.clone(), 0usize)];
    let mut unknown = false;
    let mut nodes = 0usize;
    while let Some((bx, level)) = stack.pop() {
        nodes += 1;
        if nodes > NODE_LIMIT {
            return BranchCheck::Unknown;
        }
        match kleene(f, &bx, x_vars, x) {
            Decision::True => continue,
            decision => {
                let mid = point_box(&bx);
                if decision == Decision::False || kleene(f, &mid, x_vars, x) == Decision::False {
                    let point = mid.dims().iter().map(|(n, iv)| (n.clone(), iv.lo())).collect();
                    return BranchCheck::Falsified(point);
                }
            }
        }
        let k = bx.widest_dimension();
        if level >= depth || !bx.is_splittable(k) {
            unknown = true;
            continue;
        }
        let (l, r) = bx.split(k, None).expect("splittable dimension");
        stack.push((r, level + 1));
        stack.push((l, level + 1));
    }
    if unknown {
        BranchCheck::Unknown
    } else {
        BranchCheck::Proved
    }
}

/// Checks `x` against every branch of `p` (bisecting to at most `depth`
/// levels) and against the equalities.
pub fn verify_solution(p: &Problem, x: &[f64], depth: usize) -> VerifyResult {
    for (row, (c, d)) in p.eq_matrix.iter().zip(&p.eq_rhs).enumerate() {
        let residual: f64 = c.iter().zip(x).map(|(a, b)| a * b).sum::<f64>() - d;
        if !(residual.abs() <= EQUALITY_TOLERANCE) {
            return VerifyResult::Counterexample(Counterexample::Equality { row, residual });
        }
    }
    let mut first_unknown = None;
    for (branch, br) in p.branches.iter().enumerate() {
        match check_branch(&br.formula, &br.bbox, &p.x_vars, x, depth) {
            BranchCheck::Proved => {}
            BranchCheck::Falsified(point) => {
                return VerifyResult::Counterexample(Counterexample::Branch { branch, point });
            }
            BranchCheck::Unknown => {
                first_unknown.get_or_insert(VerifyResult::Unknown { branch, depth });
            }
        }
    }
    first_unknown.unwrap_or(VerifyResult::Verified)
}
