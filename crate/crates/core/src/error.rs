use thiserror::Error;

/// Errors shared across the crate.
#[derive(Debug, Error)]
pub enum Error {
    #[error("generators {a} and {b} are not coprime")]
    NotCoprime { a: u64, b: u64 },

    #[error("generator {value} is smaller than 2")]
    ElementTooSmall { value: u64 },

    #[error("generator list is empty")]
    EmptySet,

    #[error("bad parameters: {0}")]
    BadParams(String),

    #[error("{m} does not factor over the composite generators (residual {residual})")]
    NotInSemigroup { m: u64, residual: u64 },

    #[error("arithmetic overflow in {context}")]
    Overflow { context: &'static str },

    #[error("moment arity {arity} exceeds the supported maximum {max}")]
    ArityTooLarge { arity: u32, max: u32 },

    #[error("range [{lo}, {hi}] exceeds the capacity of {capacity} entries")]
    RangeTooLarge { lo: u64, hi: u64, capacity: u64 },

    #[error("range end {hi} exceeds the set's materialization bound {bound}")]
    SetBoundExceeded { hi: u64, bound: u64 },

    #[error("degenerate correlation spec: a[{i}]*h[{j}] == a[{j}]*h[{i}]")]
    DegenerateSpec { i: usize, j: usize },

    #[error("count plane overflow at n = {n}")]
    CountOverflow { n: u64 },

    #[error(transparent)]
    Io(#[from] std::io::Error),
}

pub type Result<T> = std::result::Result<T, Error>;
