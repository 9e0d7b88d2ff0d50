use thiserror::Error;

/// Errors raised by grid construction, transforms, measures and verifiers.
#[derive(Debug, Error, Clone, PartialEq)]
pub enum Error {
    #[error("invalid grid: {0}")]
    InvalidGrid(String),
    #[error("degenerate function")]
    DegenerateFunction,
    #[error("function is not convex: second difference {value:.3e} at index {index}")]
    NotConvex { index: usize, value: f64 },
    #[error("grids are not commensurable: steps {0} and {1}")]
    Incommensurable(f64, f64),
    #[error("point {0} lies outside the grid [{1}, {2}]")]
    OutOfGrid(f64, f64, f64),
    #[error("invalid parameter: {0}")]
    InvalidParameter(String),
    #[error("potential has no mass")]
    NoMass,
    #[error("infinite mass: {0}")]
    InfiniteMass(String),
    #[error("degenerate profile: {0}")]
    DegenerateProfile(String),
    #[error("measure is not essentially continuous")]
    NotEssentiallyContinuous,
    #[error("quantile tables are defined on different grids ({0} vs {1} points)")]
    MismatchedQuantiles(usize, usize),
    #[error("second moment not admissible: tail estimate {tail:.3e} exceeds 1e-4 of total {total:.3e}")]
    HeavyTail { tail: f64, total: f64 },
    #[error("invalid measure: {0}")]
    InvalidMeasure(String),
    #[error("transport problem too large: {0} atoms (limit 64)")]
    TooLarge(usize),
    #[error("tables have mixed monotonicity")]
    MixedMonotonicity,
    #[error("potential is not monotone in each coordinate")]
    NotMonotone,
    #[error("parse error: {0}")]
    Parse(String),
    #[error("numerical failure: {0}")]
    Numerical(String),
}

pub type Result<T> = std::result::Result<T, Error>;
