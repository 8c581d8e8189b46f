//! Closed real intervals with outward-rounded arithmetic.
//!
//! Addition, subtraction, multiplication and division detect whether the
//! floating point result is exact (two-sum / fused multiply-add residuals) and
//! move the endpoint one ulp outward only when it is not. `sin` and `cos`
//! come from the platform libm, which gives no exactness information, so their
//! endpoints are widened by [`TRANSCENDENTAL_ULPS`].

use std::f64::consts::{FRAC_PI_2, PI, TAU};
use std::fmt;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Outward inflation applied to endpoints produced by `sin`/`cos`.
pub const TRANSCENDENTAL_ULPS: u32 = 1;

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct Interval {
    lo: f64,
    hi: f64,
}

impl Interval {
    /// Panics if `lo > hi` or an endpoint is not finite.
    pub fn new(lo: f64, hi: f64) -> Self {
        Self::try_new(lo, hi).expect("invalid interval endpoints")
    }

    pub fn try_new(lo: f64, hi: f64) -> Result<Self> {
        if !lo.is_finite() || !hi.is_finite() {
            return Err(Error::Domain(format!("non-finite interval endpoint [{lo}, {hi}]")));
        }
        if lo > hi {
            return Err(Error::Domain(format!("empty interval [{lo}, {hi}]")));
        }
        Ok(Interval { lo, hi })
    }

    pub fn point(v: f64) -> Self {
        Self::new(v, v)
    }

    pub fn lo(&self) -> f64 {
        self.lo
    }

    pub fn hi(&self) -> f64 {
        self.hi
    }

    pub fn width(&self) -> f64 {
        self.hi - self.lo
    }

    pub fn radius(&self) -> f64 {
        0.5 * self.width()
    }

    pub fn midpoint(&self) -> f64 {
        let m = 0.5 * (self.lo + self.hi);
        m.clamp(self.lo, self.hi)
    }

    pub fn contains(&self, v: f64) -> bool {
        self.lo <= v && v <= self.hi
    }

    pub fn contains_zero(&self) -> bool {
        self.contains(0.0)
    }

    pub fn is_subset_of(&self, other: &Interval) -> bool {
        other.lo <= self.lo && self.hi <= other.hi
    }

    pub fn hull(&self, other: &Interval) -> Interval {
        Interval { lo: self.lo.min(other.lo), hi: self.hi.max(other.hi) }
    }

    /// Widens both endpoints by `ulps` units in the last place.
    pub fn inflate(&self, ulps: u32) -> Interval {
        let mut lo = self.lo;
        let mut hi = self.hi;
        for _ in 0..ulps {
            lo = lo.next_down();
            hi = hi.next_up();
        }
        Interval { lo, hi }
    }

    pub fn neg(&self) -> Interval {
        Interval { lo: -self.hi, hi: -self.lo }
    }

    pub fn add(&self, other: &Interval) -> Interval {
        Interval { lo: add_down(self.lo, other.lo), hi: add_up(self.hi, other.hi) }
    }

    pub fn sub(&self, other: &Interval) -> Interval {
        Interval { lo: add_down(self.lo, -other.hi), hi: add_up(self.hi, -other.lo) }
    }

    pub fn mul(&self, other: &Interval) -> Interval {
        let (a, b) = (self, other);
        let pairs = [(a.lo, b.lo), (a.lo, b.hi), (a.hi, b.lo), (a.hi, b.hi)];
        let mut lo = f64::INFINITY;
        let mut hi = f64::NEG_INFINITY;
        for (x, y) in pairs {
            lo = lo.min(mul_down(x, y));
            hi = hi.max(mul_up(x, y));
        }
        Interval { lo, hi }
    }

    pub fn div(&self, other: &Interval) -> Result<Interval> {
        if other.contains_zero() {
            return Err(Error::Domain(format!("division by interval {other} containing zero")));
        }
        let (a, b) = (self, other);
        let pairs = [(a.lo, b.lo), (a.lo, b.hi), (a.hi, b.lo), (a.hi, b.hi)];
        let mut lo = f64::INFINITY;
        let mut hi = f64::NEG_INFINITY;
        for (x, y) in pairs {
            lo = lo.min(div_down(x, y));
            hi = hi.max(div_up(x, y));
        }
        Ok(Interval { lo, hi })
    }

    /// Integer power, evaluated piecewise-monotonically (not as repeated
    /// interval multiplication).
    pub fn powi(&self, n: u32) -> Result<Interval> {
        if n == 0 {
            return Err(Error::Domain("power exponent must be at least 1".into()));
        }
        let (lo, hi) = (self.lo, self.hi);
        let r = if n % 2 == 1 {
            Interval { lo: signed_pow_down(lo, n), hi: signed_pow_up(hi, n) }
        } else if lo >= 0.0 {
            Interval { lo: pow_down(lo, n), hi: pow_up(hi, n) }
        } else if hi <= 0.0 {
            Interval { lo: pow_down(-hi, n), hi: pow_up(-lo, n) }
        } else {
            Interval { lo: 0.0, hi: pow_up(lo.abs().max(hi), n) }
        };
        Ok(r)
    }

    pub fn sin(&self) -> Interval {
        // sin has its maxima at pi/2 + 2k pi and minima at -pi/2 + 2k pi.
        periodic_range(self, f64::sin, FRAC_PI_2, -FRAC_PI_2)
    }

    pub fn cos(&self) -> Interval {
        periodic_range(self, f64::cos, 0.0, PI)
    }
}

impl fmt::Display for Interval {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "[{}, {}]", self.lo, self.hi)
    }
}

fn periodic_range(x: &Interval, f: fn(f64) -> f64, max_at: f64, min_at: f64) -> Interval {
    if x.width() >= TAU {
        return Interval { lo: -1.0, hi: 1.0 };
    }
    let mut lo = endpoint_down(f, x.lo).min(endpoint_down(f, x.hi));
    let mut hi = endpoint_up(f, x.lo).max(endpoint_up(f, x.hi));
    if hits_critical_point(x, max_at) {
        hi = 1.0;
    }
    if hits_critical_point(x, min_at) {
        lo = -1.0;
    }
    Interval { lo: lo.max(-1.0), hi: hi.min(1.0) }
}

// Whether `x` may contain `base + 2k pi` for some integer k. The floating
// point representation of pi is inexact, so candidates just outside the
// interval are counted as hits.
fn hits_critical_point(x: &Interval, base: f64) -> bool {
    let slack = 1e-12 * (1.0 + x.lo.abs().max(x.hi.abs()));
    let k = ((x.lo - slack - base) / TAU).ceil();
    let c = base + k * TAU;
    c <= x.hi + slack
}

fn endpoint_down(f: fn(f64) -> f64, v: f64) -> f64 {
    let y = f(v);
    if v == 0.0 {
        // sin(0) = 0 and cos(0) = 1 are exact in every libm.
        return y;
    }
    let mut y = y;
    for _ in 0..TRANSCENDENTAL_ULPS {
        y = y.next_down();
    }
    y
}

fn endpoint_up(f: fn(f64) -> f64, v: f64) -> f64 {
    let y = f(v);
    if v == 0.0 {
        return y;
    }
    let mut y = y;
    for _ in 0..TRANSCENDENTAL_ULPS {
        y = y.next_up();
    }
    y
}

// Rounding error of a + b via Knuth's two-sum.
fn two_sum_err(a: f64, b: f64, s: f64) -> f64 {
    let bb = s - a;
    (a - (s - bb)) + (b - bb)
}

pub(crate) fn add_down(a: f64, b: f64) -> f64 {
    let s = a + b;
    if two_sum_err(a, b, s) < 0.0 {
        s.next_down()
    } else {
        s
    }
}

pub(crate) fn add_up(a: f64, b: f64) -> f64 {
    let s = a + b;
    if two_sum_err(a, b, s) > 0.0 {
        s.next_up()
    } else {
        s
    }
}

pub(crate) fn mul_down(a: f64, b: f64) -> f64 {
    let p = a * b;
    if a.mul_add(b, -p) < 0.0 {
        p.next_down()
    } else {
        p
    }
}

pub(crate) fn mul_up(a: f64, b: f64) -> f64 {
    let p = a * b;
    if a.mul_add(b, -p) > 0.0 {
        p.next_up()
    } else {
        p
    }
}

// Sign of the true quotient's deviation from q = fl(a / b).
fn div_err_sign(a: f64, b: f64, q: f64) -> f64 {
    let r = (-q).mul_add(b, a);
    if r == 0.0 {
        0.0
    } else {
        r.signum() * b.signum()
    }
}

fn div_down(a: f64, b: f64) -> f64 {
    let q = a / b;
    if div_err_sign(a, b, q) < 0.0 {
        q.next_down()
    } else {
        q
    }
}

fn div_up(a: f64, b: f64) -> f64 {
    let q = a / b;
    if div_err_sign(a, b, q) > 0.0 {
        q.next_up()
    } else {
        q
    }
}

// x >= 0
fn pow_down(x: f64, n: u32) -> f64 {
    (1..n).fold(x, |acc, _| mul_down(acc, x))
}

fn pow_up(x: f64, n: u32) -> f64 {
    (1..n).fold(x, |acc, _| mul_up(acc, x))
}

// odd n, any sign
fn signed_pow_down(x: f64, n: u32) -> f64 {
    if x >= 0.0 {
        pow_down(x, n)
    } else {
        -pow_up(-x, n)
    }
}

fn signed_pow_up(x: f64, n: u32) -> f64 {
    if x >= 0.0 {
        pow_up(x, n)
    } else {
        -pow_down(-x, n)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn iv(lo: f64, hi: f64) -> Interval {
        Interval::new(lo, hi)
    }

    #[test]
    fn mul_takes_extreme_endpoint_products() {
        assert_eq!(iv(-1.0, 3.0).mul(&iv(-3.0, 1.0)), iv(-9.0, 3.0));
    }

    #[test]
    fn sin_over_zero_to_pi() {
        let r = iv(0.0, PI).sin();
        assert_eq!(r, iv(0.0, 1.0));
    }

    #[test]
    fn even_power_of_symmetric_interval() {
        assert_eq!(iv(-1.0, 1.0).powi(2).unwrap(), iv(0.0, 1.0));
        assert_eq!(iv(-2.0, 1.0).powi(3).unwrap(), iv(-8.0, 1.0));
        assert_eq!(iv(-3.0, -2.0).powi(2).unwrap(), iv(4.0, 9.0));
    }

    #[test]
    fn division_by_zero_containing_interval_is_domain_error() {
        assert!(matches!(iv(1.0, 2.0).div(&iv(-1.0, 1.0)), Err(Error::Domain(_))));
        assert!(matches!(iv(1.0, 2.0).powi(0), Err(Error::Domain(_))));
        let q = iv(1.0, 2.0).div(&iv(4.0, 8.0)).unwrap();
        assert_eq!(q, iv(0.125, 0.5));
    }

    #[test]
    fn inexact_sums_are_rounded_outward() {
        let r = iv(0.1, 0.1).add(&iv(0.2, 0.2));
        assert!(r.lo() < r.hi());
        assert!(r.lo() <= 0.30000000000000004 && r.hi() >= 0.30000000000000004);
        // exact sums stay points
        assert_eq!(iv(0.5, 0.5).add(&iv(0.25, 0.25)), iv(0.75, 0.75));
    }

    #[test]
    fn cos_critical_points() {
        let r = iv(-0.5, 0.5).cos();
        assert_eq!(r.hi(), 1.0);
        assert!(r.lo() <= 0.5f64.cos());
        let r = iv(3.0, 3.5).cos();
        assert_eq!(r.lo(), -1.0);
        assert_eq!(iv(0.0, 7.0).sin(), iv(-1.0, 1.0));
    }

    #[test]
    fn rejects_bad_endpoints() {
        assert!(Interval::try_new(1.0, 0.0).is_err());
        assert!(Interval::try_new(f64::NAN, 0.0).is_err());
        assert!(Interval::try_new(0.0, f64::INFINITY).is_err());
    }
}
