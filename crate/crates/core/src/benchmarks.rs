//! Bundled problem instances.

use crate::heuristics::Strategy;
use crate::model::Problem;
use crate::parser::parse_problem;

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct Benchmark {
    pub name: &'static str,
    pub source: &'static str,
    /// Reference split counts for round-robin, split-worst and split-all;
    /// `None` where the reference run did not finish.
    pub reference_splits: Option<[Option<usize>; 3]>,
}

impl Benchmark {
    pub fn problem(&self) -> Problem {
        parse_problem(self.source).unwrap_or_else(|e| panic!("bundled instance {} does not parse: {e}", self.name))
    }

    pub fn reference(&self, strategy: Strategy) -> Option<usize> {
        let idx = match strategy {
            Strategy::RoundRobin => 0,
            Strategy::SplitWorst => 1,
            Strategy::SplitAll => 2,
        };
        self.reference_splits.and_then(|r| r[idx])
    }
}

pub const LYAPUNOV: [Benchmark; 4] = [
    Benchmark {
        name: "A",
        source: include_str!("../benchmarks/A.efp"),
        reference_splits: Some([Some(48), Some(21), Some(5)]),
    },
    Benchmark {
        name: "B",
        source: include_str!("../benchmarks/B.efp"),
        reference_splits: Some([Some(545), Some(112), Some(6)]),
    },
    Benchmark {
        name: "C",
        source: include_str!("../benchmarks/C.efp"),
        reference_splits: Some([None, Some(20), Some(5)]),
    },
    Benchmark {
        name: "D",
        source: include_str!("../benchmarks/D.efp"),
        reference_splits: Some([None, Some(719), Some(10)]),
    },
];

pub const EQUALITY: [Benchmark; 3] = [
    Benchmark { name: "eq-shift", source: include_str!("../benchmarks/eq-shift.efp"), reference_splits: None },
    Benchmark { name: "eq-quadratic", source: include_str!("../benchmarks/eq-quadratic.efp"), reference_splits: None },
    Benchmark { name: "eq-trig", source: include_str!("../benchmarks/eq-trig.efp"), reference_splits: None },
];

/// One row on which the uncorrected coefficient score (`epsilon = 0`) keeps
/// choosing the same split.
pub const DEGENERATE: Benchmark =
    Benchmark { name: "degenerate", source: include_str!("../benchmarks/degenerate.efp"), reference_splits: None };

pub fn all() -> impl Iterator<Item = &'static Benchmark> {
    LYAPUNOV.iter().chain(EQUALITY.iter()).chain(std::iter::once(&DEGENERATE))
}

pub fn by_name(name: &str) -> Option<&'static Benchmark> {
    all().find(|b| b.name == name)
}
