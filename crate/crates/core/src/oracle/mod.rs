//! Independent quadrature of the registry integrals.
//!
//! The Riemann-sum route in [`crate::riemann`] relies on the product
//! identities; this module integrates the same functions directly with
//! tanh-sinh quadrature, so agreement between the two is a genuine check.
//!
//! `∫₀¹ ln|sin(πx + θ)| dx` is 1-periodic in x for any θ, so the integral over
//! one period does not depend on θ and equals the θ = 0 value −ln 2. For
//! generic θ the integrand has one logarithmic singularity inside (0, 1);
//! [`oracle_check`] locates it and integrates the two pieces separately.

mod integrands;
mod tanh_sinh;

pub use integrands::{integrand_for, locate_shifted_zero};
pub use tanh_sinh::{
    cutoff, integrate_pieces, node_bound, split_at_interior_singularity, tanh_sinh_integrate,
    tanh_sinh_levels, IntegrandSpec, Integrand, LevelEstimate, Node, QuadratureResult, SingularEnds,
    MAX_LEVEL, MIN_LEVEL, NODE_GUARD_BITS,
};

use crate::error::Result;
use crate::numerics::{ExtReal, Precision};
use crate::riemann::{IntegralTarget, TargetId};

/// The integrand of `target`, already split at any interior singularity.
pub fn oracle_pieces(target: &IntegralTarget, prec: Precision) -> Result<Vec<IntegrandSpec>> {
    let spec = integrand_for(target, prec)?;
    let cuts: Vec<ExtReal> = match (target.id(), target.theta()) {
        (TargetId::LogAbsSinShifted, Some(theta)) => locate_shifted_zero(theta, prec).into_iter().collect(),
        _ => Vec::new(),
    };
    split_at_interior_singularity(&spec, &cuts)
}

/// Integrates `target` and returns the result with `|value − closed_form|`.
pub fn oracle_check(target: &IntegralTarget, abs_tol: &ExtReal, prec: Precision) -> Result<(QuadratureResult, ExtReal)> {
    let pieces = oracle_pieces(target, prec)?;
    let result = integrate_pieces(&pieces, abs_tol, prec)?;
    let deviation = (&result.value - target.closed_form().with_precision(prec)).abs();
    Ok((result, deviation))
}
