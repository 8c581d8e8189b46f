//! Text format for problems, and the matching pretty-printer.
//!
//! ```text
//! # comment
//! exists x1 x2;
//! forall-vars y1 y2;
//! branch y1 in [0, 1], y2 in [-1, 1] : y1 >= y2 or x1*sin(y1)*y2 + x2*y1^2*y2 <= 0;
//! eq 1*x1 = 1;
//! ```
//!
//! `or` binds tighter than `and`. Atoms whose sides mention no existential
//! variable become guards normalized to `body <= 0` / `body < 0`; the single
//! atom that does mention them is decomposed into coefficient expressions.

use std::fmt;

use crate::boxes::IntervalBox;
use crate::error::{Error, Result};
use crate::expr::Expr;
use crate::interval::Interval;
use crate::model::{Branch, Formula, GuardAtom, LinearAtom, Problem};

#[derive(Clone, Debug, PartialEq)]
enum Tok {
    Ident(String),
    Num(f64),
    Sym(&'static str),
    Eof,
}

#[derive(Clone, Debug)]
struct Token {
    tok: Tok,
    line: usize,
    col: usize,
}

const SYMBOLS: [&str; 17] = ["<=", ">=", "<", ">", "=", "(", ")", "[", "]", ",", ";", ":", "+", "-", "*", "/", "^"];

fn lex(text: &str) -> Result<Vec<Token>> {
    let chars: Vec<char> = text.chars().collect();
    let mut out = Vec::new();
    let (mut i, mut line, mut col) = (0usize, 1usize, 1usize);
    while i < chars.len() {
        let c = chars[i];
        if c == '\n' {
            i += 1;
            line += 1;
            col = 1;
            continue;
        }
        if c.is_whitespace() {
            i += 1;
            col += 1;
            continue;
        }
        if c == '#' {
            while i < chars.len() && chars[i] != '\n' {
                i += 1;
            }
            continue;
        }
        let start_col = col;
        if c.is_ascii_alphabetic() || c == '_' {
            let start = i;
            while i < chars.len() && (chars[i].is_ascii_alphanumeric() || chars[i] == '_') {
                i += 1;
            }
            let mut word: String = chars[start..i].iter().collect();
            if word == "forall" && chars[i..].starts_with(&['-', 'v', 'a', 'r', 's']) {
                i += 5;
                word.push_str("-vars");
            }
            col += i - start;
            out.push(Token { tok: Tok::Ident(word), line, col: start_col });
            continue;
        }
        if c.is_ascii_digit() || (c == '.' && chars.get(i + 1).is_some_and(|d| d.is_ascii_digit())) {
            let start = i;
            while i < chars.len() && (chars[i].is_ascii_digit() || chars[i] == '.') {
                i += 1;
            }
            if i < chars.len() && (chars[i] == 'e' || chars[i] == 'E') {
                let mut j = i + 1;
                if j < chars.len() && (chars[j] == '+' || chars[j] == '-') {
                    j += 1;
                }
                if j < chars.len() && chars[j].is_ascii_digit() {
                    i = j;
                    while i < chars.len() && chars[i].is_ascii_digit() {
                        i += 1;
                    }
                }
            }
            let lit: String = chars[start..i].iter().collect();
            let v: f64 = lit.parse().map_err(|_| Error::Parse {
                line,
                column: start_col,
                message: format!("malformed number `{lit}`"),
            })?;
            col += i - start;
            out.push(Token { tok: Tok::Num(v), line, col: start_col });
            continue;
        }
        let rest: String = chars[i..(i + 2).min(chars.len())].iter().collect();
        match SYMBOLS.iter().find(|s| rest.starts_with(**s)) {
            Some(s) => {
                i += s.len();
                col += s.len();
                out.push(Token { tok: Tok::Sym(s), line, col: start_col });
            }
            None => {
                return Err(Error::Parse { line, column: col, message: format!("unexpected character `{c}`") });
            }
        }
    }
    out.push(Token { tok: Tok::Eof, line, col });
    Ok(out)
}

const KEYWORDS: [&str; 9] = ["exists", "forall-vars", "branch", "in", "eq", "and", "or", "true", "false"];

struct Parser {
    toks: Vec<Token>,
    pos: usize,
    x_vars: Vec<String>,
    y_vars: Vec<String>,
}

// Coefficient of an existential variable during linear decomposition;
// `One` is the implicit unit in a bare `x1`.
#[derive(Clone, Debug)]
enum Coef {
    One,
    E(Expr),
}

impl Coef {
    fn into_expr(self) -> Expr {
        match self {
            Coef::One => Expr::constant(1.0),
            Coef::E(e) => e,
        }
    }

    fn negate(self) -> Coef {
        Coef::E(self.into_expr().neg())
    }
}

#[derive(Default, Debug)]
struct Lin {
    coeffs: Vec<(String, Coef)>,
    konst: Option<Expr>,
}

impl Lin {
    fn negate(self) -> Lin {
        Lin {
            coeffs: self.coeffs.into_iter().map(|(x, c)| (x, c.negate())).collect(),
            konst: self.konst.map(Expr::neg),
        }
    }

    fn combine(self, other: Lin, subtract: bool) -> Lin {
        let mut coeffs = self.coeffs;
        for (x, c) in other.coeffs {
            match coeffs.iter_mut().find(|(n, _)| *n == x) {
                Some((_, existing)) => {
                    let a = std::mem::replace(existing, Coef::One).into_expr();
                    let b = c.into_expr();
                    *existing = Coef::E(if subtract { a.sub(b) } else { a.add(b) });
                }
                None => coeffs.push((x, if subtract { c.negate() } else { c })),
            }
        }
        let konst = match (self.konst, other.konst) {
            (a, None) => a,
            (None, Some(b)) => Some(if subtract { b.neg() } else { b }),
            (Some(a), Some(b)) => Some(if subtract { a.sub(b) } else { a.add(b) }),
        };
        Lin { coeffs, konst }
    }

    fn scale(self, factor: &Expr, factor_on_left: bool) -> Lin {
        let mul = |e: Expr| if factor_on_left { factor.clone().mul(e) } else { e.mul(factor.clone()) };
        Lin {
            coeffs: self
                .coeffs
                .into_iter()
                .map(|(x, c)| {
                    let c = match c {
                        Coef::One => Coef::E(factor.clone()),
                        Coef::E(t) => Coef::E(mul(t)),
                    };
                    (x, c)
                })
                .collect(),
            konst: self.konst.map(mul),
        }
    }
}

impl Parser {
    fn peek(&self) -> &Token {
        &self.toks[self.pos]
    }

    fn next(&mut self) -> Token {
        let t = self.toks[self.pos].clone();
        if self.pos + 1 < self.toks.len() {
            self.pos += 1;
        }
        t
    }

    fn err_at<T>(&self, t: &Token, message: impl Into<String>) -> Result<T> {
        Err(Error::Parse { line: t.line, column: t.col, message: message.into() })
    }

    fn is_sym(&self, s: &str) -> bool {
        matches!(&self.peek().tok, Tok::Sym(x) if *x == s)
    }

    fn is_word(&self, w: &str) -> bool {
        matches!(&self.peek().tok, Tok::Ident(x) if x == w)
    }

    fn expect_sym(&mut self, s: &str) -> Result<()> {
        if self.is_sym(s) {
            self.next();
            Ok(())
        } else {
            let t = self.peek().clone();
            self.err_at(&t, format!("expected `{s}`, found {}", describe(&t.tok)))
        }
    }

    fn expect_ident(&mut self) -> Result<(String, Token)> {
        let t = self.next();
        match &t.tok {
            Tok::Ident(name) if !KEYWORDS.contains(&name.as_str()) => Ok((name.clone(), t)),
            other => self.err_at(&t, format!("expected identifier, found {}", describe(other))),
        }
    }

    fn is_x(&self, name: &str) -> bool {
        self.x_vars.iter().any(|x| x == name)
    }

    fn mentions_x(&self, e: &Expr) -> bool {
        e.variables().into_iter().any(|v| self.is_x(v))
    }

    fn problem(&mut self) -> Result<Problem> {
        let mut p = Problem::default();
        let mut equalities: Vec<(Vec<f64>, f64)> = Vec::new();
        loop {
            let t = self.peek().clone();
            match &t.tok {
                Tok::Eof => break,
                Tok::Ident(w) if w == "exists" => {
                    self.next();
                    while !self.is_sym(";") {
                        let (name, tok) = self.expect_ident()?;
                        self.declare(&name, &tok)?;
                        self.x_vars.push(name);
                    }
                    self.next();
                }
                Tok::Ident(w) if w == "forall-vars" => {
                    self.next();
                    while !self.is_sym(";") {
                        let (name, tok) = self.expect_ident()?;
                        self.declare(&name, &tok)?;
                        self.y_vars.push(name);
                    }
                    self.next();
                }
                Tok::Ident(w) if w == "branch" => {
                    self.next();
                    let bbox = self.box_decl()?;
                    self.expect_sym(":")?;
                    let formula = self.formula()?;
                    self.expect_sym(";")?;
                    p.branches.push(Branch { bbox, formula });
                }
                Tok::Ident(w) if w == "eq" => {
                    self.next();
                    equalities.push(self.equality()?);
                    self.expect_sym(";")?;
                }
                other => return self.err_at(&t, format!("expected a statement, found {}", describe(other))),
            }
        }
        p.x_vars = self.x_vars.clone();
        p.y_vars = self.y_vars.clone();
        for (row, d) in equalities {
            p.eq_matrix.push(row);
            p.eq_rhs.push(d);
        }
        Ok(p)
    }

    fn declare(&self, name: &str, tok: &Token) -> Result<()> {
        if self.is_x(name) || self.y_vars.iter().any(|y| y == name) {
            return self.err_at(tok, format!("variable `{name}` declared twice"));
        }
        Ok(())
    }

    fn signed_number(&mut self) -> Result<f64> {
        let negative = if self.is_sym("-") {
            self.next();
            true
        } else {
            false
        };
        let t = self.next();
        match &t.tok {
            Tok::Num(v) => Ok(if negative { -*v } else { *v }),
            other => self.err_at(&t, format!("expected a number, found {}", describe(other))),
        }
    }

    fn box_decl(&mut self) -> Result<IntervalBox> {
        let start = self.peek().clone();
        let mut dims: Vec<(String, Interval)> = Vec::new();
        loop {
            let (name, tok) = self.expect_ident()?;
            if !self.y_vars.contains(&name) {
                return Err(Error::UndeclaredVariable { name, line: tok.line, column: tok.col });
            }
            if dims.iter().any(|(n, _)| *n == name) {
                return self.err_at(&tok, format!("`{name}` bounded twice in one box"));
            }
            if !self.is_word("in") {
                let t = self.peek().clone();
                return self.err_at(&t, "expected `in`");
            }
            self.next();
            self.expect_sym("[")?;
            let lo = self.signed_number()?;
            self.expect_sym(",")?;
            let hi = self.signed_number()?;
            let close = self.peek().clone();
            self.expect_sym("]")?;
            let iv = Interval::try_new(lo, hi).or_else(|e| self.err_at(&close, e.to_string()))?;
            dims.push((name, iv));
            if self.is_sym(",") {
                self.next();
            } else {
                break;
            }
        }
        if dims.len() != self.y_vars.len() {
            return self.err_at(&start, "a box must bound every universal variable exactly once");
        }
        let ordered =
            self.y_vars.iter().map(|y| dims.iter().find(|(n, _)| n == y).cloned().expect("checked above")).collect();
        IntervalBox::new(ordered)
    }

    fn formula(&mut self) -> Result<Formula> {
        let mut items = vec![self.disjunction()?];
        while self.is_word("and") {
            self.next();
            items.push(self.disjunction()?);
        }
        Ok(if items.len() == 1 { items.pop().unwrap() } else { Formula::And(items) })
    }

    fn disjunction(&mut self) -> Result<Formula> {
        let mut items = vec![self.primary()?];
        while self.is_word("or") {
            self.next();
            items.push(self.primary()?);
        }
        Ok(if items.len() == 1 { items.pop().unwrap() } else { Formula::Or(items) })
    }

    fn primary(&mut self) -> Result<Formula> {
        if self.is_word("true") {
            self.next();
            return Ok(Formula::True);
        }
        if self.is_word("false") {
            self.next();
            return Ok(Formula::False);
        }
        if self.is_sym("(") {
            // Either a parenthesized formula or an atom whose left side
            // starts with a parenthesized expression.
            let save = self.pos;
            self.next();
            let attempt = self.formula().and_then(|f| self.expect_sym(")").map(|_| f));
            match attempt {
                Ok(f) if !self.starts_comparison_tail() => return Ok(f),
                Err(e @ Error::UndeclaredVariable { .. }) => return Err(e),
                _ => self.pos = save,
            }
        }
        self.atom()
    }

    fn starts_comparison_tail(&self) -> bool {
        ["<=", ">=", "<", ">", "+", "-", "*", "/", "^"].iter().any(|s| self.is_sym(s))
    }

    fn atom(&mut self) -> Result<Formula> {
        let lhs = self.expr()?;
        let t = self.next();
        let op = match t.tok {
            Tok::Sym(s @ ("<=" | "<" | ">=" | ">")) => s,
            ref other => return self.err_at(&t, format!("expected a comparison, found {}", describe(other))),
        };
        let rhs = self.expr()?;
        let strict = matches!(op, "<" | ">");
        // normalize to `small <= big`
        let (small, big) = if matches!(op, "<=" | "<") { (lhs, rhs) } else { (rhs, lhs) };

        if self.mentions_x(&small) || self.mentions_x(&big) {
            if strict {
                return self.err_at(&t, "the atom with existential variables must use `<=` or `>=`");
            }
            let l = self.decompose(&small).or_else(|m| self.err_at(&t, m))?;
            let r = self.decompose(&big).or_else(|m| self.err_at(&t, m))?;
            let coeffs = l.coeffs.into_iter().map(|(x, c)| (x, c.into_expr())).collect::<Vec<_>>();
            let mut atom = LinearAtom { coeffs, rhs: Expr::constant(0.0) };
            for (x, c) in r.coeffs {
                let c = c.into_expr();
                match atom.coeffs.iter_mut().find(|(n, _)| *n == x) {
                    Some((_, existing)) => *existing = existing.clone().sub(c),
                    None => atom.coeffs.push((x, c.neg())),
                }
            }
            atom.rhs = match (r.konst, l.konst) {
                (Some(kr), None) => kr,
                (None, None) => Expr::constant(0.0),
                (None, Some(kl)) => kl.neg(),
                (Some(kr), Some(kl)) => kr.sub(kl),
            };
            return Ok(Formula::Linear(atom));
        }

        let body = if is_zero_literal(&big) {
            small
        } else if is_zero_literal(&small) {
            big.neg()
        } else {
            small.sub(big)
        };
        Ok(Formula::Guard(GuardAtom { body, strict }))
    }

    fn decompose(&self, e: &Expr) -> std::result::Result<Lin, String> {
        if !self.mentions_x(e) {
            return Ok(Lin { coeffs: vec![], konst: Some(e.clone()) });
        }
        match e {
            Expr::Var(x) => Ok(Lin { coeffs: vec![(x.clone(), Coef::One)], konst: None }),
            Expr::Neg(a) => Ok(self.decompose(a)?.negate()),
            Expr::Add(a, b) => Ok(self.decompose(a)?.combine(self.decompose(b)?, false)),
            Expr::Sub(a, b) => Ok(self.decompose(a)?.combine(self.decompose(b)?, true)),
            Expr::Mul(a, b) => {
                if !self.mentions_x(a) {
                    Ok(self.decompose(b)?.scale(a, true))
                } else if !self.mentions_x(b) {
                    Ok(self.decompose(a)?.scale(b, false))
                } else {
                    Err("product of existential variables is not linear".into())
                }
            }
            Expr::Div(a, b) if !self.mentions_x(b) => {
                let lin = self.decompose(a)?;
                Ok(Lin {
                    coeffs: lin
                        .coeffs
                        .into_iter()
                        .map(|(x, c)| (x, Coef::E(c.into_expr().div((**b).clone()))))
                        .collect(),
                    konst: lin.konst.map(|k| k.div((**b).clone())),
                })
            }
            _ => Err("existential variables may only appear linearly".into()),
        }
    }

    fn equality(&mut self) -> Result<(Vec<f64>, f64)> {
        let start = self.peek().clone();
        let lhs = self.expr()?;
        self.expect_sym("=")?;
        let rhs = self.expr()?;
        for e in [&lhs, &rhs] {
            if e.variables().into_iter().any(|v| !self.is_x(v)) {
                return self.err_at(&start, "equalities may only mention existential variables");
            }
        }
        let l = self.decompose(&lhs).or_else(|m| self.err_at(&start, m))?;
        let r = self.decompose(&rhs).or_else(|m| self.err_at(&start, m))?;
        let lin = l.combine(r, true);
        let no_vars = |_: &str| None;
        let mut row = vec![0.0; self.x_vars.len()];
        for (x, c) in lin.coeffs {
            let j = self.x_vars.iter().position(|n| *n == x).expect("decomposed variables are declared");
            row[j] = c.into_expr().eval_point(&no_vars).or_else(|e| self.err_at(&start, e.to_string()))?;
        }
        let k = match lin.konst {
            Some(k) => k.eval_point(&no_vars).or_else(|e| self.err_at(&start, e.to_string()))?,
            None => 0.0,
        };
        Ok((row, -k))
    }

    fn expr(&mut self) -> Result<Expr> {
        let mut acc = self.term()?;
        loop {
            if self.is_sym("+") {
                self.next();
                acc = acc.add(self.term()?);
            } else if self.is_sym("-") {
                self.next();
                acc = acc.sub(self.term()?);
            } else {
                return Ok(acc);
            }
        }
    }

    fn term(&mut self) -> Result<Expr> {
        let mut acc = self.unary()?;
        loop {
            if self.is_sym("*") {
                self.next();
                acc = acc.mul(self.unary()?);
            } else if self.is_sym("/") {
                self.next();
                acc = acc.div(self.unary()?);
            } else {
                return Ok(acc);
            }
        }
    }

    fn unary(&mut self) -> Result<Expr> {
        if self.is_sym("-") {
            self.next();
            return Ok(self.unary()?.neg());
        }
        self.power()
    }

    fn power(&mut self) -> Result<Expr> {
        let base = self.atom_expr()?;
        if self.is_sym("^") {
            self.next();
            let t = self.next();
            return match t.tok {
                Tok::Num(n) if n >= 1.0 && n.fract() == 0.0 && n <= u32::MAX as f64 => Ok(base.pow(n as u32)),
                ref other => self.err_at(&t, format!("exponent must be a positive integer, found {}", describe(other))),
            };
        }
        Ok(base)
    }

    fn atom_expr(&mut self) -> Result<Expr> {
        let t = self.next();
        match &t.tok {
            Tok::Num(v) => Ok(Expr::constant(*v)),
            Tok::Sym("(") => {
                let e = self.expr()?;
                self.expect_sym(")")?;
                Ok(e)
            }
            Tok::Ident(f) if (f == "sin" || f == "cos") && self.is_sym("(") => {
                self.next();
                let arg = self.expr()?;
                self.expect_sym(")")?;
                Ok(if f == "sin" { arg.sin() } else { arg.cos() })
            }
            Tok::Ident(name) if !KEYWORDS.contains(&name.as_str()) => {
                if self.is_x(name) || self.y_vars.contains(name) {
                    Ok(Expr::Var(name.clone()))
                } else {
                    Err(Error::UndeclaredVariable { name: name.clone(), line: t.line, column: t.col })
                }
            }
            other => self.err_at(&t, format!("expected an expression, found {}", describe(other))),
        }
    }
}

fn is_zero_literal(e: &Expr) -> bool {
    matches!(e, Expr::Const(c) if *c == 0.0)
}

fn describe(t: &Tok) -> String {
    match t {
        Tok::Ident(s) => format!("`{s}`"),
        Tok::Num(v) => format!("number {v}"),
        Tok::Sym(s) => format!("`{s}`"),
        Tok::Eof => "end of input".into(),
    }
}

/// Parses the problem text format. Variables must be declared before use.
pub fn parse_problem(text: &str) -> Result<Problem> {
    let toks = lex(text)?;
    let mut p = Parser { toks, pos: 0, x_vars: vec![], y_vars: vec![] };
    p.problem()
}

struct FormulaDisplay<'a>(&'a Formula);

impl fmt::Display for FormulaDisplay<'_> {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self.0 {
            Formula::True => write!(f, "true"),
            Formula::False => write!(f, "false"),
            Formula::Guard(g) => write!(f, "{} {} 0", g.body, if g.strict { "<" } else { "<=" }),
            Formula::Linear(atom) => {
                let mut sum: Option<Expr> = None;
                for (x, t) in &atom.coeffs {
                    let term = t.clone().mul(Expr::var(x));
                    sum = Some(match sum {
                        None => term,
                        Some(s) => s.add(term),
                    });
                }
                match sum {
                    Some(s) => write!(f, "{s} <= {}", atom.rhs),
                    None => write!(f, "0 <= {}", atom.rhs),
                }
            }
            Formula::And(items) | Formula::Or(items) => {
                let sep = if matches!(self.0, Formula::And(_)) { " and " } else { " or " };
                for (k, item) in items.iter().enumerate() {
                    if k > 0 {
                        write!(f, "{sep}")?;
                    }
                    if matches!(item, Formula::And(_) | Formula::Or(_)) {
                        write!(f, "({})", FormulaDisplay(item))?;
                    } else {
                        write!(f, "{}", FormulaDisplay(item))?;
                    }
                }
                Ok(())
            }
        }
    }
}

impl fmt::Display for Formula {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        FormulaDisplay(self).fmt(f)
    }
}

impl fmt::Display for Problem {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        writeln!(f, "exists {};", self.x_vars.join(" "))?;
        writeln!(f, "forall-vars {};", self.y_vars.join(" "))?;
        for br in &self.branches {
            writeln!(f, "branch {} : {};", br.bbox, br.formula)?;
        }
        for (row, d) in self.eq_matrix.iter().zip(&self.eq_rhs) {
            let mut sum: Option<Expr> = None;
            for (c, x) in row.iter().zip(&self.x_vars) {
                let term = Expr::constant(*c).mul(Expr::var(x));
                sum = Some(match sum {
                    None => term,
                    Some(s) => s.add(term),
                });
            }
            if let Some(s) = sum {
                writeln!(f, "eq {s} = {};", Expr::constant(*d))?;
            }
        }
        Ok(())
    }
}
