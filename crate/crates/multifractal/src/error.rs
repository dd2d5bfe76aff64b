use thiserror::Error;

/// Errors surfaced by the library.
#[derive(Debug, Error)]
pub enum Error {
    #[error("invalid system: {0}")]
    InvalidSystem(String),

    #[error("invalid potential: {0}")]
    InvalidPotential(String),

    #[error("word of length {got} too short: need at least {need} symbols")]
    WordTooShort { need: usize, got: usize },

    #[error("cylinder length n must be >= 1")]
    ZeroCylinderLength,

    #[error("q = {q} > 0 requested for a potential taking the value +inf; only q <= 0 is supported there")]
    SingularPositiveQ { q: f64 },

    #[error("support graph is reducible; communicating classes: {components:?}")]
    ReducibleSupport { components: Vec<Vec<usize>> },

    #[error("enumeration budget exceeded: ~{count:.3e} cylinders of length {n} > budget {budget:.3e}")]
    BudgetExceeded { n: usize, count: f64, budget: f64 },

    #[error("input is not convex within tolerance: {0}")]
    NonConvex(String),

    #[error("pressure is not strictly decreasing in t at q = {q}: expansivity assumption violated")]
    NonMonotoneSection { q: f64 },

    #[error("formula error: {0}")]
    Formula(String),

    #[error("{0}")]
    Unsupported(String),
}

pub type Result<T> = std::result::Result<T, Error>;
