//! Arithmetic expression trees over named variables.

use std::collections::BTreeSet;
use std::fmt;

use crate::boxes::IntervalBox;
use crate::error::{Error, Result};
use crate::interval::Interval;

#[derive(Clone, Debug, PartialEq)]
pub enum Expr {
    Const(f64),
    Var(String),
    Neg(Box<Expr>),
    Add(Box<Expr>, Box<Expr>),
    Sub(Box<Expr>, Box<Expr>),
    Mul(Box<Expr>, Box<Expr>),
    Div(Box<Expr>, Box<Expr>),
    /// Exponent is at least 1.
    Pow(Box<Expr>, u32),
    Sin(Box<Expr>),
    Cos(Box<Expr>),
}

impl Expr {
    pub fn var(name: &str) -> Expr {
        Expr::Var(name.to_string())
    }

    pub fn constant(v: f64) -> Expr {
        Expr::Const(v)
    }

    #[allow(clippy::should_implement_trait)]
    pub fn neg(self) -> Expr {
        Expr::Neg(Box::new(self))
    }

    #[allow(clippy::should_implement_trait)]
    pub fn add(self, rhs: Expr) -> Expr {
        Expr::Add(Box::new(self), Box::new(rhs))
    }

    #[allow(clippy::should_implement_trait)]
    pub fn sub(self, rhs: Expr) -> Expr {
        Expr::Sub(Box::new(self), Box::new(rhs))
    }

    #[allow(clippy::should_implement_trait)]
    pub fn mul(self, rhs: Expr) -> Expr {
        Expr::Mul(Box::new(self), Box::new(rhs))
    }

    #[allow(clippy::should_implement_trait)]
    pub fn div(self, rhs: Expr) -> Expr {
        Expr::Div(Box::new(self), Box::new(rhs))
    }

    pub fn pow(self, n: u32) -> Expr {
        Expr::Pow(Box::new(self), n)
    }

    pub fn sin(self) -> Expr {
        Expr::Sin(Box::new(self))
    }

    pub fn cos(self) -> Expr {
        Expr::Cos(Box::new(self))
    }

    pub fn variables(&self) -> BTreeSet<&str> {
        let mut out = BTreeSet::new();
        self.collect_vars(&mut out);
        out
    }

    fn collect_vars<'a>(&'a self, out: &mut BTreeSet<&'a str>) {
        match self {
            Expr::Const(_) => {}
            Expr::Var(v) => {
                out.insert(v);
            }
            Expr::Neg(a) | Expr::Pow(a, _) | Expr::Sin(a) | Expr::Cos(a) => a.collect_vars(out),
            Expr::Add(a, b) | Expr::Sub(a, b) | Expr::Mul(a, b) | Expr::Div(a, b) => {
                a.collect_vars(out);
                b.collect_vars(out);
            }
        }
    }

    pub fn mentions(&self, name: &str) -> bool {
        match self {
            Expr::Const(_) => false,
            Expr::Var(v) => v == name,
            Expr::Neg(a) | Expr::Pow(a, _) | Expr::Sin(a) | Expr::Cos(a) => a.mentions(name),
            Expr::Add(a, b) | Expr::Sub(a, b) | Expr::Mul(a, b) | Expr::Div(a, b) => {
                a.mentions(name) || b.mentions(name)
            }
        }
    }

    /// Plain floating point evaluation; `lookup` resolves variable values.
    pub fn eval_point<F>(&self, lookup: &F) -> Result<f64>
    where
        F: Fn(&str) -> Option<f64>,
    {
        let v = match self {
            Expr::Const(c) => *c,
            Expr::Var(name) => lookup(name).ok_or_else(|| unbound(name))?,
            Expr::Neg(a) => -a.eval_point(lookup)?,
            Expr::Add(a, b) => a.eval_point(lookup)? + b.eval_point(lookup)?,
            Expr::Sub(a, b) => a.eval_point(lookup)? - b.eval_point(lookup)?,
            Expr::Mul(a, b) => a.eval_point(lookup)? * b.eval_point(lookup)?,
            Expr::Div(a, b) => {
                let d = b.eval_point(lookup)?;
                if d == 0.0 {
                    return Err(Error::Domain("division by zero".into()));
                }
                a.eval_point(lookup)? / d
            }
            Expr::Pow(a, n) => a.eval_point(lookup)?.powi(*n as i32),
            Expr::Sin(a) => a.eval_point(lookup)?.sin(),
            Expr::Cos(a) => a.eval_point(lookup)?.cos(),
        };
        Ok(v)
    }

    /// Evaluates at a point given as values aligned with `bx`'s dimensions.
    pub fn eval_at(&self, bx: &IntervalBox, point: &[f64]) -> Result<f64> {
        self.eval_point(&|name: &str| bx.index_of(name).map(|i| point[i]))
    }
}

fn unbound(name: &str) -> Error {
    Error::Domain(format!("variable `{name}` has no value"))
}

/// Conservative interval enclosure of `t` over `bx` by recursive interval
/// arithmetic.
pub fn eval_on_box(t: &Expr, bx: &IntervalBox) -> Result<Interval> {
    Ok(match t {
        Expr::Const(c) => Interval::point(*c),
        Expr::Var(name) => bx.get(name).ok_or_else(|| unbound(name))?,
        Expr::Neg(a) => eval_on_box(a, bx)?.neg(),
        Expr::Add(a, b) => eval_on_box(a, bx)?.add(&eval_on_box(b, bx)?),
        Expr::Sub(a, b) => eval_on_box(a, bx)?.sub(&eval_on_box(b, bx)?),
        Expr::Mul(a, b) => eval_on_box(a, bx)?.mul(&eval_on_box(b, bx)?),
        Expr::Div(a, b) => eval_on_box(a, bx)?.div(&eval_on_box(b, bx)?)?,
        Expr::Pow(a, n) => eval_on_box(a, bx)?.powi(*n)?,
        Expr::Sin(a) => eval_on_box(a, bx)?.sin(),
        Expr::Cos(a) => eval_on_box(a, bx)?.cos(),
    })
}

// Printing precedence levels; parenthesization is chosen so that the parser
// reads the printed text back into the same tree.
const PREC_ADD: u8 = 1;
const PREC_MUL: u8 = 2;
const PREC_UNARY: u8 = 3;
const PREC_POW: u8 = 4;
const PREC_ATOM: u8 = 5;

impl Expr {
    fn precedence(&self) -> u8 {
        match self {
            Expr::Const(c) if *c < 0.0 || c.is_sign_negative() => PREC_UNARY,
            Expr::Const(_) | Expr::Var(_) | Expr::Sin(_) | Expr::Cos(_) => PREC_ATOM,
            Expr::Neg(_) => PREC_UNARY,
            Expr::Add(..) | Expr::Sub(..) => PREC_ADD,
            Expr::Mul(..) | Expr::Div(..) => PREC_MUL,
            Expr::Pow(..) => PREC_POW,
        }
    }
}

struct Wrapped<'a>(&'a Expr, bool);

impl fmt::Display for Wrapped<'_> {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.1 {
            write!(f, "({})", self.0)
        } else {
            write!(f, "{}", self.0)
        }
    }
}

impl fmt::Display for Expr {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let p = self.precedence();
        match self {
            Expr::Const(c) => write!(f, "{c}"),
            Expr::Var(v) => write!(f, "{v}"),
            Expr::Neg(a) => write!(f, "-{}", Wrapped(a, a.precedence() < PREC_POW)),
            Expr::Add(a, b) | Expr::Sub(a, b) | Expr::Mul(a, b) | Expr::Div(a, b) => {
                let op = match self {
                    Expr::Add(..) => "+",
                    Expr::Sub(..) => "-",
                    Expr::Mul(..) => "*",
                    _ => "/",
                };
                // unary operands are always bracketed to keep `a - -b` out of the output
                let left_paren = a.precedence() < p || a.precedence() == PREC_UNARY;
                let right_paren = b.precedence() <= p || b.precedence() == PREC_UNARY;
                write!(f, "{} {op} {}", Wrapped(a, left_paren), Wrapped(b, right_paren))
            }
            Expr::Pow(a, n) => write!(f, "{}^{n}", Wrapped(a, a.precedence() < PREC_ATOM)),
            Expr::Sin(a) => write!(f, "sin({a})"),
            Expr::Cos(a) => write!(f, "cos({a})"),
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn y(n: &str) -> Expr {
        Expr::var(n)
    }

    fn c(v: f64) -> Expr {
        Expr::constant(v)
    }

    #[test]
    fn product_range_on_box() {
        let bx =
            IntervalBox::new(vec![("y1".into(), Interval::new(0.0, 1.0)), ("y2".into(), Interval::new(-1.0, 1.0))])
                .unwrap();
        let t = y("y1").mul(y("y2"));
        assert_eq!(eval_on_box(&t, &bx).unwrap(), Interval::new(-1.0, 1.0));
    }

    #[test]
    fn degenerate_point_box() {
        let bx = IntervalBox::new(vec![("y".into(), Interval::point(0.0))]).unwrap();
        let t = y("y").pow(2).add(y("y"));
        assert_eq!(eval_on_box(&t, &bx).unwrap(), Interval::point(0.0));
    }

    #[test]
    fn polynomial_encloses_dense_grid() {
        // 2 y1^3 y2 - 2 y1^2 + y1 over [0.8,1.2] x [0.3,0.49]
        let t = c(2.0).mul(y("y1").pow(3)).mul(y("y2")).sub(c(2.0).mul(y("y1").pow(2))).add(y("y1"));
        let bx =
            IntervalBox::new(vec![("y1".into(), Interval::new(0.8, 1.2)), ("y2".into(), Interval::new(0.3, 0.49))])
                .unwrap();
        let r = eval_on_box(&t, &bx).unwrap();
        let mut seen_lo = f64::INFINITY;
        let mut seen_hi = f64::NEG_INFINITY;
        for i in 0..=200 {
            for j in 0..=200 {
                let p = [0.8 + 0.4 * i as f64 / 200.0, 0.3 + 0.19 * j as f64 / 200.0];
                let v = t.eval_at(&bx, &p).unwrap();
                seen_lo = seen_lo.min(v);
                seen_hi = seen_hi.max(v);
            }
        }
        assert!(r.lo() <= seen_lo && seen_hi <= r.hi(), "{r} vs [{seen_lo}, {seen_hi}]");
        // the naive enclosure: 2*[0.512,1.728]*[0.3,0.49] - 2*[0.64,1.44] + [0.8,1.2]
        assert!((r.lo() - (0.3072 - 2.88 + 0.8)).abs() < 1e-12);
        assert!((r.hi() - (1.69344 - 1.28 + 1.2)).abs() < 1e-12);
    }

    #[test]
    fn unknown_variable_is_an_error() {
        let bx = IntervalBox::new(vec![("y".into(), Interval::new(0.0, 1.0))]).unwrap();
        assert!(eval_on_box(&y("z"), &bx).is_err());
    }

    #[test]
    fn display_brackets_by_precedence() {
        let t = y("a").sub(y("b").sub(y("c")));
        assert_eq!(t.to_string(), "a - (b - c)");
        let t = y("a").neg().pow(2);
        assert_eq!(t.to_string(), "(-a)^2");
        let t = y("a").pow(2).neg();
        assert_eq!(t.to_string(), "-a^2");
        let t = c(2.0).mul(y("a").add(y("b")).sin());
        assert_eq!(t.to_string(), "2 * sin(a + b)");
    }
}
