use thiserror::Error;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum Error {
    #[error("invalid modulus {0}: {1}")]
    InvalidModulus(u64, &'static str),
    #[error("matrix not invertible modulo prime divisor {0}")]
    NotInvertible(u64),
    #[error("element {0} is not a unit modulo {1}")]
    NotUnit(u64, u64),
    #[error("duplicate prime {0} in CRT input")]
    DuplicatePrime(u64),
    #[error("even characteristic is not supported")]
    EvenPrime,
    #[error("zero polynomial")]
    ZeroPolynomial,
    #[error("matrix b is singular")]
    SingularB,
    #[error("form is not generic")]
    NotGeneric,
    #[error("matrix is not symmetric: {0}")]
    NotSymmetric(&'static str),
    #[error("symplectic relation violated: {0}")]
    NotSymplectic(String),
    #[error("D-block is singular; no DUL factorization")]
    NotFactorizable,
    #[error("theta must avoid 0 and -1")]
    BadTheta,
    #[error("dimension mismatch: {0}")]
    Dimension(String),
    #[error("group contexts differ")]
    ContextMismatch,
    #[error("budget exceeded: {0}")]
    Budget(String),
    #[error("precondition failed: {0}")]
    Precondition(String),
    #[error("no subgroup found")]
    NoSubgroupFound,
    #[error("form file: {0}")]
    Parse(String),
}

pub type Result<T> = std::result::Result<T, Error>;
