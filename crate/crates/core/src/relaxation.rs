//! Interval linear systems `P x <= q`, their Rohn/Kreslová form
//! `P_hi x1 - P_lo x2 <= q_lo`, and the residual LP
//! `min rho  s.t.  P_hi x1 - P_lo x2 - b <= rho, C (x1 - x2) = d, x1, x2 >= 0`.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::interval::Interval;
use crate::simplex::{simplex_solve, LinearProgram};

#[derive(Clone, Debug, PartialEq)]
pub struct IlsRow {
    pub branch: usize,
    pub p: Vec<Interval>,
    pub q: Interval,
}

impl IlsRow {
    /// True when every coefficient and the right-hand side are points, so
    /// no split can tighten the row.
    pub fn is_exact(&self) -> bool {
        self.q.width() == 0.0 && self.p.iter().all(|p| p.width() == 0.0)
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct IntervalLinearSystem {
    pub num_x: usize,
    pub rows: Vec<IlsRow>,
}

impl IntervalLinearSystem {
    pub fn new(num_x: usize) -> Self {
        IntervalLinearSystem { num_x, rows: Vec::new() }
    }

    pub fn push(&mut self, branch: usize, p: Vec<Interval>, q: Interval) -> Result<()> {
        if p.len() != self.num_x {
            return Err(Error::InvalidProblem(format!(
                "row for branch {branch} has {} coefficients, expected {}",
                p.len(),
                self.num_x
            )));
        }
        self.rows.push(IlsRow { branch, p, q });
        Ok(())
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub enum BoundSide {
    /// Column carries `x1_j` with coefficient `hi(p_j)`.
    Upper,
    /// Column carries `x2_j` with coefficient `-lo(p_j)`.
    Lower,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct ColumnSource {
    pub column: usize,
    pub side: BoundSide,
}

#[derive(Clone, Debug, PartialEq)]
pub struct FeasibilityLP {
    pub num_x: usize,
    pub p_hi: Vec<Vec<f64>>,
    pub p_lo: Vec<Vec<f64>>,
    pub b: Vec<f64>,
    pub c: Vec<Vec<f64>>,
    pub d: Vec<f64>,
    /// LP column `2j` is `x1_j`, column `2j + 1` is `x2_j`.
    pub col_map: Vec<ColumnSource>,
}

impl FeasibilityLP {
    pub fn num_rows(&self) -> usize {
        self.b.len()
    }

    /// Coefficients of row `i` over the LP columns, in `col_map` order.
    pub fn row_coefficients(&self, i: usize) -> Vec<f64> {
        self.col_map
            .iter()
            .map(|src| match src.side {
                BoundSide::Upper => self.p_hi[i][src.column],
                BoundSide::Lower => -self.p_lo[i][src.column],
            })
            .collect()
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub enum LpStatus {
    Optimal,
    /// `rho` has no lower bound; the point reported satisfies every row
    /// with margin at least 1.
    Unbounded,
}

#[derive(Clone, Debug, PartialEq)]
pub struct LPSolution {
    pub x1: Vec<f64>,
    pub x2: Vec<f64>,
    pub rho: f64,
    pub status: LpStatus,
}

impl LPSolution {
    pub fn x(&self) -> Vec<f64> {
        self.x1.iter().zip(&self.x2).map(|(a, b)| a - b).collect()
    }
}

pub fn rohn_transform(sys: &IntervalLinearSystem, c: &[Vec<f64>], d: &[f64]) -> FeasibilityLP {
    let r = sys.num_x;
    FeasibilityLP {
        num_x: r,
        p_hi: sys.rows.iter().map(|row| row.p.iter().map(|p| p.hi()).collect()).collect(),
        p_lo: sys.rows.iter().map(|row| row.p.iter().map(|p| p.lo()).collect()).collect(),
        b: sys.rows.iter().map(|row| row.q.lo()).collect(),
        c: c.to_vec(),
        d: d.to_vec(),
        col_map: (0..r)
            .flat_map(|j| {
                [ColumnSource { column: j, side: BoundSide::Upper }, ColumnSource { column: j, side: BoundSide::Lower }]
            })
            .collect(),
    }
}

fn build(lp: &FeasibilityLP, rho_floor: Option<f64>) -> LinearProgram {
    let r = lp.num_x;
    let nvars = 2 * r + 1;
    let rho = 2 * r;
    let mut objective = vec![0.0; nvars];
    objective[rho] = 1.0;
    let mut free = vec![false; nvars];
    free[rho] = true;
    let mut le: Vec<(Vec<f64>, f64)> = (0..lp.num_rows())
        .map(|i| {
            let mut a = lp.row_coefficients(i);
            a.push(-1.0);
            (a, lp.b[i])
        })
        .collect();
    if let Some(floor) = rho_floor {
        let mut a = vec![0.0; nvars];
        a[rho] = -1.0;
        le.push((a, -floor));
    }
    let eq =
        lp.c.iter()
            .zip(&lp.d)
            .map(|(row, &di)| {
                let mut a = Vec::with_capacity(nvars);
                for &cj in row {
                    a.push(cj);
                    a.push(-cj);
                }
                a.push(0.0);
                (a, di)
            })
            .collect();
    LinearProgram { objective, free, le, eq }
}

/// Minimizes the residual. An unbounded residual is re-solved with
/// `rho >= -1` and reported as `Unbounded`, with `rho` set to the largest
/// residual entry of the returned point (or -1 without inequality rows).
pub fn solve_feasibility(lp: &FeasibilityLP) -> Result<LPSolution> {
    let r = lp.num_x;
    let unpack = |w: &[f64], status| {
        let x1: Vec<f64> = (0..r).map(|j| w[2 * j]).collect();
        let x2: Vec<f64> = (0..r).map(|j| w[2 * j + 1]).collect();
        LPSolution { x1, x2, rho: w[2 * r], status }
    };
    match simplex_solve(&build(lp, None)) {
        Ok(opt) => Ok(unpack(&opt.w, LpStatus::Optimal)),
        Err(Error::LpInfeasible) => Err(Error::EqualitiesInfeasible),
        Err(Error::LpUnbounded) => {
            let opt = simplex_solve(&build(lp, Some(-1.0))).map_err(|e| match e {
                Error::LpInfeasible => Error::EqualitiesInfeasible,
                other => other,
            })?;
            let mut sol = unpack(&opt.w, LpStatus::Unbounded);
            sol.rho = if lp.num_rows() > 0 {
                residual_vector(lp, &sol).into_iter().fold(f64::NEG_INFINITY, f64::max)
            } else {
                -1.0
            };
            Ok(sol)
        }
        Err(e) => Err(e),
    }
}

pub fn residual_vector(lp: &FeasibilityLP, sol: &LPSolution) -> Vec<f64> {
    (0..lp.num_rows())
        .map(|i| {
            let mut s = -lp.b[i];
            for j in 0..lp.num_x {
                s += lp.p_hi[i][j] * sol.x1[j] - lp.p_lo[i][j] * sol.x2[j];
            }
            s
        })
        .collect()
}
