use thiserror::Error;

/// Errors raised by the numerical core.
#[derive(Debug, Clone, Error, PartialEq)]
pub enum Error {
    #[error("invalid precision: {bits} bits (supported range is {min}..={max})")]
    InvalidPrecision { bits: u32, min: u32, max: u32 },

    #[error("non-finite input at term {index}")]
    NonFinite { index: u64 },

    #[error("domain error: {0}")]
    Domain(String),

    #[error("invalid parameter: {0}")]
    InvalidParameter(String),

    #[error("near-singular product: factor n = {n} is within 2^-{threshold_bits} of zero")]
    NearSingularProduct { n: u64, threshold_bits: u32 },

    #[error(
        "no convergence after level {level}: best value {best}, error estimate {estimate}"
    )]
    NoConvergence {
        level: u32,
        best: String,
        estimate: String,
    },

    #[error("integrand is not finite at x = {x}")]
    BadIntegrand { x: String },

    #[error("invalid split: {0}")]
    InvalidSplit(String),

    #[error("parse error: {0}")]
    Parse(String),
}

pub type Result<T, E = Error> = std::result::Result<T, E>;
