//! Log-trigonometric definite integrals evaluated from trigonometric product
//! identities arranged as Riemann sums, with independent tanh-sinh quadrature
//! as a cross-check.
//!
//! * [`numerics`] — extended-precision reals, constants, compensated sums, ln Γ
//! * [`identities`] — the sine, tangent and cosine products at rational multiples of π
//! * [`riemann`] — log-sums of those products as Riemann sums, with exact residuals
//! * [`oracle`] — double-exponential quadrature of the same integrals
//! * [`cli`] — report envelopes and the command-line front end

pub mod cli;
pub mod error;
pub mod identities;
pub mod numerics;
pub mod oracle;
pub mod riemann;

pub use error::{Error, Result};
