//! Dense two-phase primal simplex in dictionary form with Bland's rule.
//!
//! The dictionary keeps one row per constraint and one column per nonbasic
//! variable, so a pivot costs `O(rows * vars)`.

use crate::error::{Error, Result};

pub const TOLERANCE: f64 = 1e-9;

/// `min objective . w` subject to `le` rows (`a . w <= b`), `eq` rows
/// (`a . w = b`), and `w_j >= 0` unless `free[j]`.
#[derive(Clone, Debug, Default, PartialEq)]
pub struct LinearProgram {
    pub objective: Vec<f64>,
    pub free: Vec<bool>,
    pub le: Vec<(Vec<f64>, f64)>,
    pub eq: Vec<(Vec<f64>, f64)>,
}

#[derive(Clone, Debug, PartialEq)]
pub struct LpOptimum {
    pub w: Vec<f64>,
    pub objective: f64,
    pub pivots: usize,
}

struct Dictionary {
    cols: usize,
    // x_basis[i] = b[i] - sum_k a[i][k] x_nonbasic[k]
    a: Vec<f64>,
    b: Vec<f64>,
    // z = z0 + sum_k c[k] x_nonbasic[k]  (maximized)
    c: Vec<f64>,
    z0: f64,
    basis: Vec<usize>,
    nonbasic: Vec<usize>,
    pivots: usize,
}

enum Step {
    Optimal,
    Unbounded,
    Pivoted,
}

impl Dictionary {
    fn at(&self, i: usize, k: usize) -> f64 {
        self.a[i * self.cols + k]
    }

    fn pivot(&mut self, l: usize, e: usize) {
        let cols = self.cols;
        let piv = self.at(l, e);
        let row_l: Vec<f64> = (0..cols).map(|k| if k == e { 1.0 / piv } else { self.at(l, k) / piv }).collect();
        let b_l = self.b[l] / piv;
        for i in 0..self.b.len() {
            if i == l {
                continue;
            }
            let f = self.at(i, e);
            if f == 0.0 {
                continue;
            }
            let row = &mut self.a[i * cols..(i + 1) * cols];
            for k in 0..cols {
                row[k] = if k == e { -f * row_l[k] } else { row[k] - f * row_l[k] };
            }
            self.b[i] -= f * b_l;
            if self.b[i] < 0.0 && self.b[i] > -TOLERANCE {
                self.b[i] = 0.0;
            }
        }
        let f = self.c[e];
        if f != 0.0 {
            for k in 0..cols {
                self.c[k] = if k == e { -f * row_l[k] } else { self.c[k] - f * row_l[k] };
            }
            self.z0 += f * b_l;
        }
        self.a[l * cols..(l + 1) * cols].copy_from_slice(&row_l);
        self.b[l] = b_l;
        std::mem::swap(&mut self.basis[l], &mut self.nonbasic[e]);
        self.pivots += 1;
    }

    fn step(&mut self) -> Step {
        let mut entering: Option<usize> = None;
        for k in 0..self.cols {
            if self.c[k] > TOLERANCE && entering.is_none_or(|e| self.nonbasic[k] < self.nonbasic[e]) {
                entering = Some(k);
            }
        }
        let Some(e) = entering else { return Step::Optimal };
        let mut leaving: Option<(usize, f64)> = None;
        for i in 0..self.b.len() {
            let a = self.at(i, e);
            if a <= TOLERANCE {
                continue;
            }
            let ratio = self.b[i].max(0.0) / a;
            leaving = match leaving {
                None => Some((i, ratio)),
                Some((l, best)) => {
                    let tie = (ratio - best).abs() <= 1e-12 * (1.0 + best.abs());
                    if (!tie && ratio < best) || (tie && self.basis[i] < self.basis[l]) {
                        Some((i, ratio))
                    } else {
                        Some((l, best))
                    }
                }
            };
        }
        match leaving {
            None => Step::Unbounded,
            Some((l, _)) => {
                self.pivot(l, e);
                Step::Pivoted
            }
        }
    }

    fn run(&mut self) -> Result<()> {
        let limit = 50_000 + 50 * (self.b.len() + self.cols);
        loop {
            if self.pivots > limit {
                return Err(Error::Domain("simplex iteration limit reached".into()));
            }
            match self.step() {
                Step::Optimal => return Ok(()),
                Step::Unbounded => return Err(Error::LpUnbounded),
                Step::Pivoted => {}
            }
        }
    }

    fn remove_column(&mut self, k: usize) {
        let cols = self.cols;
        let mut a = Vec::with_capacity(self.b.len() * (cols - 1));
        for i in 0..self.b.len() {
            for j in 0..cols {
                if j != k {
                    a.push(self.a[i * cols + j]);
                }
            }
        }
        self.a = a;
        self.c.remove(k);
        self.nonbasic.remove(k);
        self.cols -= 1;
    }

    fn remove_row(&mut self, l: usize) {
        let cols = self.cols;
        self.a.drain(l * cols..(l + 1) * cols);
        self.b.remove(l);
        self.basis.remove(l);
    }
}

/// Solves `lp`. Returns `LpInfeasible` or `LpUnbounded` when no optimum exists.
pub fn simplex_solve(lp: &LinearProgram) -> Result<LpOptimum> {
    let n = lp.objective.len();
    if lp.free.len() != n || lp.le.iter().chain(&lp.eq).any(|(a, _)| a.len() != n) {
        return Err(Error::InvalidProblem("linear program dimensions disagree".into()));
    }

    // Standard form: free variables become differences of two nonnegative ones,
    // equalities become pairs of opposite inequalities.
    let mut split_of = Vec::with_capacity(n);
    let mut std_n = 0;
    for &f in &lp.free {
        split_of.push((std_n, f));
        std_n += if f { 2 } else { 1 };
    }
    let expand = |a: &[f64], sign: f64| {
        let mut row = vec![0.0; std_n];
        for (j, &(col, f)) in split_of.iter().enumerate() {
            row[col] = sign * a[j];
            if f {
                row[col + 1] = -sign * a[j];
            }
        }
        row
    };
    let mut rows: Vec<(Vec<f64>, f64)> = lp.le.iter().map(|(a, b)| (expand(a, 1.0), *b)).collect();
    for (a, b) in &lp.eq {
        rows.push((expand(a, 1.0), *b));
        rows.push((expand(a, -1.0), -*b));
    }
    let m = rows.len();
    let aux = std_n + m;
    let needs_phase_one = rows.iter().any(|(_, b)| *b < 0.0);
    let cols = std_n + usize::from(needs_phase_one);

    let mut a = Vec::with_capacity(m * cols);
    for (row, _) in &rows {
        a.extend_from_slice(row);
        if needs_phase_one {
            a.push(-1.0);
        }
    }
    let mut nonbasic: Vec<usize> = (0..std_n).collect();
    if needs_phase_one {
        nonbasic.push(aux);
    }
    let mut d = Dictionary {
        cols,
        a,
        b: rows.iter().map(|(_, b)| *b).collect(),
        c: vec![0.0; cols],
        z0: 0.0,
        basis: (std_n..std_n + m).collect(),
        nonbasic,
        pivots: 0,
    };

    if needs_phase_one {
        let aux_col = cols - 1;
        d.c[aux_col] = -1.0;
        let mut l = 0;
        for i in 1..m {
            if d.b[i] < d.b[l] {
                l = i;
            }
        }
        d.pivot(l, aux_col);
        match d.run() {
            Ok(()) => {}
            Err(Error::LpUnbounded) => unreachable!("phase one objective is bounded by zero"),
            Err(e) => return Err(e),
        }
        let scale = rows.iter().fold(1.0f64, |s, (_, b)| s.max(b.abs()));
        if d.z0 < -TOLERANCE * scale {
            return Err(Error::LpInfeasible);
        }
        if let Some(l) = d.basis.iter().position(|&v| v == aux) {
            let mut e: Option<usize> = None;
            for k in 0..d.cols {
                if d.nonbasic[k] != aux
                    && d.at(l, k).abs() > TOLERANCE
                    && e.is_none_or(|e| d.nonbasic[k] < d.nonbasic[e])
                {
                    e = Some(k);
                }
            }
            match e {
                Some(e) => d.pivot(l, e),
                None => d.remove_row(l),
            }
        }
        if let Some(k) = d.nonbasic.iter().position(|&v| v == aux) {
            d.remove_column(k);
        }
    }

    // Phase two objective, maximizing -c . w over the current dictionary.
    let mut std_c = vec![0.0; std_n];
    for (j, &(col, f)) in split_of.iter().enumerate() {
        std_c[col] = -lp.objective[j];
        if f {
            std_c[col + 1] = lp.objective[j];
        }
    }
    d.c = vec![0.0; d.cols];
    d.z0 = 0.0;
    for (k, &v) in d.nonbasic.iter().enumerate() {
        if v < std_n {
            d.c[k] += std_c[v];
        }
    }
    for i in 0..d.b.len() {
        let v = d.basis[i];
        if v < std_n && std_c[v] != 0.0 {
            d.z0 += std_c[v] * d.b[i];
            for k in 0..d.cols {
                d.c[k] -= std_c[v] * d.a[i * d.cols + k];
            }
        }
    }
    d.run()?;

    let mut std_w = vec![0.0; std_n];
    for (i, &v) in d.basis.iter().enumerate() {
        if v < std_n {
            std_w[v] = d.b[i].max(0.0);
        }
    }
    let w: Vec<f64> =
        split_of.iter().map(|&(col, f)| if f { std_w[col] - std_w[col + 1] } else { std_w[col] }).collect();
    let objective = w.iter().zip(&lp.objective).map(|(x, c)| x * c).sum();
    Ok(LpOptimum { w, objective, pivots: d.pivots })
}
