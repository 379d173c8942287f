//! Precision contract, constants, compensated summation and ln Γ.
//!
//! All values are immutable [`ExtReal`]s; nothing here keeps mutable global
//! state, so every function is safe to call from concurrent tasks.

mod angles;
mod constants;
mod ext_real;
mod gamma;
mod sum;

pub use angles::{cos_pi_ratio, sin_pi_ratio, PiMultiples, ARG_GUARD_BITS};
pub use constants::{const_ln2, const_pi};
pub use ext_real::{ExtReal, Precision};
pub use gamma::{lngamma, lngamma_at};
pub use sum::{compensated_sum, SumAccumulator};
