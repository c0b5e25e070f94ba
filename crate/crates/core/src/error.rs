use thiserror::Error;

/// Errors produced by the core library.
#[derive(Debug, Error)]
pub enum Error {
    #[error("{0} is not prime")]
    NotPrime(u64),

    #[error("{0} is not a prime power")]
    NotPrimePower(u64),

    #[error("extension degree must be at least 1")]
    ZeroExtensionDegree,

    #[error("field order {p}^{k} exceeds the supported maximum of 65536 elements")]
    FieldTooLarge { p: u64, k: u32 },

    #[error("field mismatch: F_{left} vs F_{right}")]
    FieldMismatch { left: u32, right: u32 },

    #[error("coefficient {value} is not an element of F_{q}")]
    BadCoefficient { value: u64, q: u32 },

    #[error("division by the zero polynomial")]
    DivisionByZero,

    #[error("expected a monic polynomial")]
    NotMonic,

    #[error("expected a polynomial of degree at least 1")]
    Constant,

    #[error("enumeration budget exceeded: {requested} polynomials requested, budget is {budget}")]
    BudgetExceeded { requested: u128, budget: u64 },

    #[error("arithmetic overflow while computing {0}")]
    Overflow(&'static str),

    #[error("irreducible table covers degree {have}, degree {need} is required")]
    TableTooShallow { have: usize, need: usize },

    #[error("cannot parse polynomial {input:?}: {reason}")]
    Parse { input: String, reason: String },

    #[error("invalid parameter: {0}")]
    InvalidParameter(String),

    #[error("interval quotient is not an interval: divisor degree {degree} exceeds radius + 1 = {}", .radius + 1)]
    QuotientNotInterval { degree: usize, radius: i64 },

    #[error("the set is empty")]
    EmptySet,

    #[error("the candidate subset is not contained in the parent set")]
    NotSubset,

    #[error("invariant violated: {0}")]
    Invariant(String),

    #[error(transparent)]
    Io(#[from] std::io::Error),

    #[error(transparent)]
    Csv(#[from] csv::Error),

    #[error(transparent)]
    Json(#[from] serde_json::Error),
}

pub type Result<T, E = Error> = std::result::Result<T, E>;
