//! Shared error type for all workbench operations.

use thiserror::Error;

#[derive(Debug, Error)]
pub enum Error {
    #[error("empty input")]
    EmptyInput,

    #[error("order is not a permutation of the vertex ids: {0}")]
    BadOrder(String),

    #[error("target interval has zero length")]
    DegenerateTarget,

    #[error("budget exceeded: {0}")]
    BudgetExceeded(String),

    #[error("invalid cap: {0}")]
    InvalidCap(String),

    #[error("layout is unembeddable: {0}")]
    Unembeddable(String),

    #[error("cap is not integral: {0}")]
    NonIntegral(String),

    #[error("strand sequence did not stop: {0}")]
    NotStopped(String),

    #[error("pipeline stalled: {0}")]
    Stalled(String),

    #[error("node {0} is present but its parent is missing")]
    MissingParent(String),

    #[error("refuter walked the whole cap without finding a failure; this contradicts the impossibility argument and indicates a bug")]
    Inconsistent,

    #[error("middle and largest roots are complex (negative discriminant)")]
    ComplexRoots,

    #[error("discriminant is zero (repeated root)")]
    DiscriminantZero,

    #[error("argument outside the domain: {0}")]
    OutOfDomain(String),

    #[error("invalid parameter: {0}")]
    InvalidParam(String),
}

pub type Result<T> = std::result::Result<T, Error>;
