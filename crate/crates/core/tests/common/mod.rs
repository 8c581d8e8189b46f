#![allow(dead_code)]

use efsolver::interval::Interval;
use efsolver::relaxation::{rohn_transform, solve_feasibility, FeasibilityLP, IntervalLinearSystem, LPSolution};
use efsolver::{eval_on_box, Expr, Formula, IntervalBox, Problem};
use proptest::prelude::*;
use rand::Rng;

pub const Y: [&str; 2] = ["y1", "y2"];

/// Nonnegative, as in parsed text; negative values arise through `Neg`.
fn constant() -> impl Strategy<Value = Expr> {
    (0i32..=200).prop_map(|k| Expr::Const(f64::from(k) / 100.0))
}

/// Expressions over `y1`, `y2` without division, in the shape the parser
/// produces.
pub fn expr() -> impl Strategy<Value = Expr> {
    let leaf = prop_oneof![constant(), prop::sample::select(&Y[..]).prop_map(Expr::var)];
    leaf.prop_recursive(4, 24, 2, |inner| {
        prop_oneof![
            inner.clone().prop_map(Expr::neg),
            (inner.clone(), inner.clone()).prop_map(|(a, b)| a.add(b)),
            (inner.clone(), inner.clone()).prop_map(|(a, b)| a.sub(b)),
            (inner.clone(), inner.clone()).prop_map(|(a, b)| a.mul(b)),
            (inner.clone(), 1u32..=3).prop_map(|(a, n)| a.pow(n)),
            inner.clone().prop_map(Expr::sin),
            inner.prop_map(Expr::cos),
        ]
    })
}

pub fn interval(lo: f64, width: f64) -> Interval {
    Interval::new(lo, lo + width)
}

/// A box over `y1`, `y2` with corners in `[-2, 4]`; widths may be zero.
pub fn ybox() -> impl Strategy<Value = IntervalBox> {
    prop::collection::vec((-2.0f64..2.0, prop_oneof![1 => Just(0.0), 9 => 0.0f64..2.0]), 2).prop_map(|d| {
        IntervalBox::new(Y.iter().zip(d).map(|(n, (lo, w))| (n.to_string(), interval(lo, w))).collect()).unwrap()
    })
}

pub fn sample_point<R: Rng>(bx: &IntervalBox, rng: &mut R) -> Vec<f64> {
    bx.dims().iter().map(|(_, iv)| if iv.width() > 0.0 { rng.gen_range(iv.lo()..=iv.hi()) } else { iv.lo() }).collect()
}

/// Sub-box with each side cut at the given fractions of the parent.
pub fn sub_box(bx: &IntervalBox, cuts: &[(f64, f64)]) -> IntervalBox {
    IntervalBox::new(
        bx.dims()
            .iter()
            .zip(cuts)
            .map(|((n, iv), &(a, b))| {
                let (a, b) = if a <= b { (a, b) } else { (b, a) };
                let lo = (iv.lo() + a * iv.width()).clamp(iv.lo(), iv.hi());
                let hi = (iv.lo() + b * iv.width()).clamp(lo, iv.hi());
                (n.clone(), Interval::new(lo, hi))
            })
            .collect(),
    )
    .unwrap()
}

/// Slack for comparing plain floating point evaluation against an
/// enclosure.
pub fn slack(iv: Interval) -> f64 {
    1e-9 * (1.0 + iv.lo().abs().max(iv.hi().abs()))
}

/// Random interval system `P x <= q` with `rows` rows over `r` unknowns.
/// Coefficient widths are at least `min_width`.
pub fn random_system<R: Rng>(rng: &mut R, rows: usize, r: usize, min_width: f64) -> IntervalLinearSystem {
    let mut sys = IntervalLinearSystem::new(r);
    for i in 0..rows {
        let p = (0..r)
            .map(|_| {
                let lo = rng.gen_range(-3.0..3.0);
                interval(lo, rng.gen_range(min_width..=min_width.max(2.0)))
            })
            .collect();
        let q = interval(rng.gen_range(-3.0..3.0), if rng.gen_bool(0.5) { 0.0 } else { rng.gen_range(0.0..1.0) });
        sys.push(i, p, q).unwrap();
    }
    sys
}

/// Adds the exact rows `x_j <= 5` and `-x_j <= 5`, so that the relaxation
/// ranges over the same box as [`grid_min_violation`].
pub fn bound_to_grid(sys: &mut IntervalLinearSystem) {
    let r = sys.num_x;
    let next = sys.rows.len();
    for j in 0..r {
        for (k, s) in [1.0, -1.0].into_iter().enumerate() {
            let p = (0..r).map(|c| Interval::point(if c == j { s } else { 0.0 })).collect();
            sys.push(next + 2 * j + k, p, Interval::point(5.0)).unwrap();
        }
    }
}

pub fn solve_system(sys: &IntervalLinearSystem) -> (FeasibilityLP, LPSolution) {
    let lp = rohn_transform(sys, &[], &[]);
    let sol = solve_feasibility(&lp).expect("no equalities, so the LP is feasible");
    (lp, sol)
}

/// Worst case of row `p x - q` over the interval data at a point `x`.
pub fn worst_row(p: &[Interval], q: Interval, x: &[f64]) -> f64 {
    p.iter().zip(x).map(|(pj, &xj)| if xj >= 0.0 { pj.hi() * xj } else { pj.lo() * xj }).sum::<f64>() - q.lo()
}

/// Smallest worst-case violation over the grid `[-5, 5]^r` with step 0.05.
pub fn grid_min_violation(sys: &IntervalLinearSystem) -> f64 {
    let r = sys.num_x;
    let n = 201usize;
    let coord = |k: usize| -5.0 + 0.05 * k as f64;
    let mut best = f64::INFINITY;
    let mut idx = vec![0usize; r];
    let mut x = vec![0.0; r];
    loop {
        for j in 0..r {
            x[j] = coord(idx[j]);
        }
        let v = sys.rows.iter().map(|row| worst_row(&row.p, row.q, &x)).fold(f64::NEG_INFINITY, f64::max);
        best = best.min(v);
        let mut j = 0;
        loop {
            if j == r {
                return best;
            }
            idx[j] += 1;
            if idx[j] < n {
                break;
            }
            idx[j] = 0;
            j += 1;
        }
    }
}

fn monomial<R: Rng>(rng: &mut R, ys: &[String]) -> Expr {
    let mut e = Expr::constant((rng.gen_range(1..=200) as f64) / 100.0);
    if rng.gen_bool(0.5) {
        e = e.neg();
    }
    let mut degree = rng.gen_range(0..=3);
    for y in ys {
        let a = rng.gen_range(0..=degree);
        degree -= a;
        if a > 0 {
            e = e.mul(Expr::var(y).pow(a));
        }
    }
    e
}

/// Random polynomial of degree at most 3 with one to four terms.
pub fn polynomial<R: Rng>(rng: &mut R, ys: &[String]) -> Expr {
    let mut e = monomial(rng, ys);
    for _ in 0..rng.gen_range(0..4) {
        e = e.add(monomial(rng, ys));
    }
    e
}

/// Instance with `r <= 3` unknowns, `s <= 2` universal variables and cubic
/// coefficients, built around a point `x*` (with `x*_1 = 1`) at which every
/// branch holds with margin at least 0.5 against the right-hand side
/// `-0.001`. Returns the text and `x*`.
pub fn robust_instance<R: Rng>(rng: &mut R) -> (String, Vec<f64>) {
    let r = rng.gen_range(1..=3);
    let s = rng.gen_range(1..=2);
    let xs: Vec<String> = (1..=r).map(|j| format!("x{j}")).collect();
    let ys: Vec<String> = (1..=s).map(|k| format!("y{k}")).collect();
    let mut star = vec![1.0];
    star.extend((1..r).map(|_| (rng.gen_range(-100..=100) as f64) / 100.0));
    let mut text = format!("exists {};\nforall-vars {};\n", xs.join(" "), ys.join(" "));
    for _ in 0..rng.gen_range(1..=3) {
        let dims: Vec<(String, Interval)> = ys
            .iter()
            .map(|y| {
                let lo = (rng.gen_range(-100..=50) as f64) / 100.0;
                (y.clone(), Interval::new(lo, lo + (rng.gen_range(5..=100) as f64) / 100.0))
            })
            .collect();
        let bx = IntervalBox::new(dims).unwrap();
        let others: Vec<Expr> = (1..r).map(|_| polynomial(rng, &ys)).collect();
        let mut bound = Interval::point(0.0);
        for (t, &x) in others.iter().zip(&star[1..]) {
            bound = bound.add(&eval_on_box(t, &bx).unwrap().mul(&Interval::point(x)));
        }
        let shift = (bound.hi().max(0.0) * 100.0).ceil() / 100.0 + 0.5;
        let lin =
            Expr::constant((rng.gen_range(0..=100) as f64) / 100.0).mul(Expr::var(&ys[0])).add(Expr::constant(0.25));
        let first = Expr::constant(shift).add(lin.pow(2)).neg();
        let mut lhs = format!("x1*({first})");
        for (j, t) in others.iter().enumerate() {
            lhs += &format!(" + x{}*({t})", j + 2);
        }
        let boxes: Vec<String> = bx.dims().iter().map(|(n, iv)| format!("{n} in [{}, {}]", iv.lo(), iv.hi())).collect();
        let body =
            if rng.gen_bool(0.3) { format!("{} > 5 or {lhs} <= -0.001", ys[0]) } else { format!("{lhs} <= -0.001") };
        text += &format!("branch {} : {body};\n", boxes.join(", "));
    }
    if rng.gen_bool(0.5) {
        text += "eq x1 = 1;\n";
    }
    (text, star)
}

/// Point truth value of a formula.
pub fn formula_holds(f: &Formula, p: &Problem, bx: &IntervalBox, y: &[f64], x: &[f64]) -> bool {
    match f {
        Formula::True => true,
        Formula::False => false,
        Formula::Guard(g) => {
            let v = g.body.eval_at(bx, y).unwrap();
            if g.strict {
                v < 0.0
            } else {
                v <= 0.0
            }
        }
        Formula::Linear(atom) => {
            let lhs: f64 = atom
                .coeffs
                .iter()
                .map(|(name, t)| t.eval_at(bx, y).unwrap() * x[p.x_vars.iter().position(|v| v == name).unwrap()])
                .sum();
            lhs <= atom.rhs.eval_at(bx, y).unwrap()
        }
        Formula::And(items) => items.iter().all(|i| formula_holds(i, p, bx, y, x)),
        Formula::Or(items) => items.iter().any(|i| formula_holds(i, p, bx, y, x)),
    }
}
