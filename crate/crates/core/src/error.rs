use thiserror::Error;

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    #[error("domain error: {0}")]
    Domain(String),

    #[error("cannot split dimension {0}: zero width")]
    SplitDegenerate(usize),

    #[error("every candidate dimension has zero width")]
    AllDimensionsDegenerate,

    #[error("parse error at {line}:{column}: {message}")]
    Parse { line: usize, column: usize, message: String },

    #[error("undeclared variable `{name}` at {line}:{column}")]
    UndeclaredVariable { name: String, line: usize, column: usize },

    #[error("linear equalities are infeasible")]
    EqualitiesInfeasible,

    #[error("no row has a positive residual")]
    NoPositiveResidual,

    #[error("linear program is infeasible")]
    LpInfeasible,

    #[error("linear program is unbounded")]
    LpUnbounded,

    #[error("invalid problem: {0}")]
    InvalidProblem(String),

    #[error("invalid configuration: {0}")]
    InvalidConfig(String),
}
