//! Exists-forall problems: branches of (box, Boolean formula) plus linear
//! equalities over the existential variables.

use std::fmt;

use crate::boxes::IntervalBox;
use crate::expr::Expr;

/// `body <= 0`, or `body < 0` when `strict`. The body ranges over the
/// universal variables only.
#[derive(Clone, Debug, PartialEq)]
pub struct GuardAtom {
    pub body: Expr,
    pub strict: bool,
}

/// `sum_j coeff_j(y) * x_j <= rhs(y)`.
#[derive(Clone, Debug, PartialEq)]
pub struct LinearAtom {
    pub coeffs: Vec<(String, Expr)>,
    pub rhs: Expr,
}

impl LinearAtom {
    pub fn coefficient(&self, x: &str) -> Option<&Expr> {
        self.coeffs.iter().find(|(name, _)| name == x).map(|(_, e)| e)
    }
}

#[derive(Clone, Debug, PartialEq)]
pub enum Formula {
    True,
    False,
    Guard(GuardAtom),
    Linear(LinearAtom),
    And(Vec<Formula>),
    Or(Vec<Formula>),
}

impl Formula {
    /// Guard leaves in depth-first order. A guard's position in this list is
    /// its stable index within the branch.
    pub fn guards(&self) -> Vec<&GuardAtom> {
        let mut out = Vec::new();
        self.visit(&mut |f| {
            if let Formula::Guard(g) = f {
                out.push(g);
            }
        });
        out
    }

    pub fn linear_atoms(&self) -> Vec<&LinearAtom> {
        let mut out = Vec::new();
        self.visit(&mut |f| {
            if let Formula::Linear(l) = f {
                out.push(l);
            }
        });
        out
    }

    pub fn linear_atom(&self) -> Option<&LinearAtom> {
        self.linear_atoms().into_iter().next()
    }

    fn visit<'a, F: FnMut(&'a Formula)>(&'a self, f: &mut F) {
        f(self);
        if let Formula::And(items) | Formula::Or(items) = self {
            for item in items {
                item.visit(f);
            }
        }
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct Branch {
    pub bbox: IntervalBox,
    pub formula: Formula,
}

#[derive(Clone, Debug, PartialEq, Default)]
pub struct Problem {
    pub x_vars: Vec<String>,
    pub y_vars: Vec<String>,
    pub branches: Vec<Branch>,
    /// Rows of C in `C x = d`; each row has one entry per existential variable.
    pub eq_matrix: Vec<Vec<f64>>,
    pub eq_rhs: Vec<f64>,
}

impl Problem {
    pub fn num_x(&self) -> usize {
        self.x_vars.len()
    }

    pub fn num_equalities(&self) -> usize {
        self.eq_rhs.len()
    }
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub enum Violation {
    NoExistentialVariables,
    NoBranches,
    MultipleLinearAtoms { branch: usize },
    ExistentialInGuard { branch: usize },
    ExistentialInCoefficient { branch: usize, variable: String },
    ExistentialInRhs { branch: usize },
    UnknownExistential { branch: usize, variable: String },
    BoxMismatch { branch: usize },
    UndeclaredVariable { branch: usize, name: String },
    EqualityColumnMismatch { row: usize, expected: usize, found: usize },
    EqualityRowMismatch { rows: usize, rhs: usize },
}

impl fmt::Display for Violation {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Violation::NoExistentialVariables => write!(f, "no existential variables declared"),
            Violation::NoBranches => write!(f, "problem has no branches"),
            Violation::MultipleLinearAtoms { branch } => {
                write!(f, "branch {branch}: more than one atom mentions existential variables")
            }
            Violation::ExistentialInGuard { branch } => {
                write!(f, "branch {branch}: a guard mentions an existential variable")
            }
            Violation::ExistentialInCoefficient { branch, variable } => {
                write!(f, "branch {branch}: coefficient of `{variable}` mentions an existential variable")
            }
            Violation::ExistentialInRhs { branch } => {
                write!(f, "branch {branch}: right-hand side mentions an existential variable")
            }
            Violation::UnknownExistential { branch, variable } => {
                write!(f, "branch {branch}: `{variable}` is not an existential variable")
            }
            Violation::BoxMismatch { branch } => {
                write!(f, "branch {branch}: box does not cover exactly the universal variables")
            }
            Violation::UndeclaredVariable { branch, name } => {
                write!(f, "branch {branch}: `{name}` is not a universal variable of the box")
            }
            Violation::EqualityColumnMismatch { row, expected, found } => {
                write!(f, "equality {row}: expected {expected} coefficients, found {found}")
            }
            Violation::EqualityRowMismatch { rows, rhs } => {
                write!(f, "equalities: {rows} coefficient rows but {rhs} right-hand sides")
            }
        }
    }
}

/// Structural checks; an empty result means the problem is well-formed.
pub fn validate_problem(p: &Problem) -> Vec<Violation> {
    let mut out = Vec::new();
    if p.x_vars.is_empty() {
        out.push(Violation::NoExistentialVariables);
    }
    if p.branches.is_empty() {
        out.push(Violation::NoBranches);
    }
    let is_x = |name: &str| p.x_vars.iter().any(|x| x == name);
    let mentions_x = |e: &Expr| e.variables().into_iter().any(is_x);

    for (bi, br) in p.branches.iter().enumerate() {
        let names: Vec<&str> = br.bbox.dims().iter().map(|(n, _)| n.as_str()).collect();
        if names.len() != p.y_vars.len() || p.y_vars.iter().any(|y| !names.contains(&y.as_str())) {
            out.push(Violation::BoxMismatch { branch: bi });
        }

        let linear = br.formula.linear_atoms();
        if linear.len() > 1 {
            out.push(Violation::MultipleLinearAtoms { branch: bi });
        }

        let mut undeclared = Vec::new();
        let mut check_y = |e: &Expr| {
            for v in e.variables() {
                if !is_x(v) && br.bbox.index_of(v).is_none() && !undeclared.contains(&v.to_string()) {
                    undeclared.push(v.to_string());
                }
            }
        };

        let guards = br.formula.guards();
        if guards.iter().any(|g| mentions_x(&g.body)) {
            out.push(Violation::ExistentialInGuard { branch: bi });
        }
        for g in &guards {
            check_y(&g.body);
        }
        for atom in &linear {
            for (x, t) in &atom.coeffs {
                if !is_x(x) {
                    out.push(Violation::UnknownExistential { branch: bi, variable: x.clone() });
                }
                if mentions_x(t) {
                    out.push(Violation::ExistentialInCoefficient { branch: bi, variable: x.clone() });
                }
                check_y(t);
            }
            if mentions_x(&atom.rhs) {
                out.push(Violation::ExistentialInRhs { branch: bi });
            }
            check_y(&atom.rhs);
        }
        for name in undeclared {
            out.push(Violation::UndeclaredVariable { branch: bi, name });
        }
    }

    if p.eq_matrix.len() != p.eq_rhs.len() {
        out.push(Violation::EqualityRowMismatch { rows: p.eq_matrix.len(), rhs: p.eq_rhs.len() });
    }
    for (row, c) in p.eq_matrix.iter().enumerate() {
        if c.len() != p.x_vars.len() {
            out.push(Violation::EqualityColumnMismatch { row, expected: p.x_vars.len(), found: c.len() });
        }
    }
    out
}
