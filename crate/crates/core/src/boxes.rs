use std::fmt;

use crate::error::{Error, Result};
use crate::interval::Interval;

/// Cartesian product of closed intervals, one per named variable.
#[derive(Clone, Debug, PartialEq)]
pub struct IntervalBox {
    dims: Vec<(String, Interval)>,
}

impl IntervalBox {
    pub fn new(dims: Vec<(String, Interval)>) -> Result<Self> {
        if dims.is_empty() {
            return Err(Error::InvalidProblem("box has no dimensions".into()));
        }
        for (i, (name, _)) in dims.iter().enumerate() {
            if dims[..i].iter().any(|(n, _)| n == name) {
                return Err(Error::InvalidProblem(format!("variable `{name}` appears twice in a box")));
            }
        }
        Ok(IntervalBox { dims })
    }

    pub fn dims(&self) -> &[(String, Interval)] {
        &self.dims
    }

    pub fn len(&self) -> usize {
        self.dims.len()
    }

    pub fn is_empty(&self) -> bool {
        self.dims.is_empty()
    }

    pub fn name(&self, i: usize) -> &str {
        &self.dims[i].0
    }

    pub fn interval(&self, i: usize) -> Interval {
        self.dims[i].1
    }

    pub fn index_of(&self, name: &str) -> Option<usize> {
        self.dims.iter().position(|(n, _)| n == name)
    }

    pub fn get(&self, name: &str) -> Option<Interval> {
        self.dims.iter().find(|(n, _)| n == name).map(|(_, iv)| *iv)
    }

    pub fn midpoint(&self) -> Vec<f64> {
        self.dims.iter().map(|(_, iv)| iv.midpoint()).collect()
    }

    pub fn widest_dimension(&self) -> usize {
        let mut best = 0;
        for (i, (_, iv)) in self.dims.iter().enumerate() {
            if iv.width() > self.dims[best].1.width() {
                best = i;
            }
        }
        best
    }

    pub fn is_subset_of(&self, other: &IntervalBox) -> bool {
        self.dims.len() == other.dims.len()
            && self.dims.iter().zip(&other.dims).all(|((n, a), (m, b))| n == m && a.is_subset_of(b))
    }

    /// Whether dimension `i` can be cut at its midpoint into two proper halves.
    pub fn is_splittable(&self, i: usize) -> bool {
        let iv = self.dims[i].1;
        let m = iv.midpoint();
        iv.lo() < m && m < iv.hi()
    }

    /// Splits dimension `i` at `at`, or at the midpoint when `at` is `None`.
    pub fn split(&self, i: usize, at: Option<f64>) -> Result<(IntervalBox, IntervalBox)> {
        let (_, iv) = self.dims.get(i).ok_or_else(|| Error::Domain(format!("dimension {i} out of range")))?;
        if iv.width() <= 0.0 {
            return Err(Error::SplitDegenerate(i));
        }
        let cut = at.unwrap_or_else(|| iv.midpoint());
        if !(iv.lo() < cut && cut < iv.hi()) {
            return Err(Error::SplitDegenerate(i));
        }
        let mut left = self.clone();
        let mut right = self.clone();
        left.dims[i].1 = Interval::new(iv.lo(), cut);
        right.dims[i].1 = Interval::new(cut, iv.hi());
        Ok((left, right))
    }
}

/// Midpoint split of dimension `i`.
pub fn split_box(bx: &IntervalBox, i: usize) -> Result<(IntervalBox, IntervalBox)> {
    bx.split(i, None)
}

impl fmt::Display for IntervalBox {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        for (k, (name, iv)) in self.dims.iter().enumerate() {
            if k > 0 {
                write!(f, ", ")?;
            }
            write!(f, "{name} in [{}, {}]", iv.lo(), iv.hi())?;
        }
        Ok(())
    }
}
