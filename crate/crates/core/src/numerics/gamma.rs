//! ln Γ(x) for real x > 0 by the Stirling series after an upward shift.
//!
//! The argument is shifted by integer steps until it exceeds a threshold that
//! grows with the working precision, so the asymptotic series converges to the
//! requested accuracy without any fixed-precision coefficient tables. The
//! Bernoulli numbers are exact rationals computed once on first use.

use std::sync::OnceLock;

use rug::float::Constant;
use rug::{Float, Rational};

use super::{ExtReal, Precision};
use crate::error::{Error, Result};

/// Number of Stirling coefficients B_2k / (2k(2k-1)) kept in the table.
const STIRLING_TERMS: usize = 160;

/// Guard bits on top of the caller's precision.
const GUARD_BITS: u32 = 32;

fn stirling_coefficients() -> &'static [Rational] {
    static TABLE: OnceLock<Vec<Rational>> = OnceLock::new();
    TABLE.get_or_init(|| {
        let bernoulli = bernoulli_numbers(2 * STIRLING_TERMS);
        (1..=STIRLING_TERMS)
            .map(|k| {
                let two_k = 2 * k as u64;
                Rational::from(&bernoulli[2 * k] / Rational::from(two_k * (two_k - 1)))
            })
            .collect()
    })
}

/// B_0 ..= B_n by the Akiyama-Tanigawa recurrence (B_1 = +1/2, unused here).
fn bernoulli_numbers(n: usize) -> Vec<Rational> {
    let mut row: Vec<Rational> = Vec::with_capacity(n + 1);
    let mut out = Vec::with_capacity(n + 1);
    for m in 0..=n {
        row.push(Rational::from((1, m as u64 + 1)));
        for j in (1..=m).rev() {
            let diff = Rational::from(&row[j - 1] - &row[j]);
            row[j - 1] = diff * j as u64;
        }
        out.push(row[0].clone());
    }
    out
}

/// ln Γ(x) for x > 0, with relative error below 2^(8-p) at the precision of `x`.
pub fn lngamma(x: &ExtReal) -> Result<ExtReal> {
    lngamma_at(x, x.precision())
}

/// ln Γ(x) rounded to `prec`.
pub fn lngamma_at(x: &ExtReal, prec: Precision) -> Result<ExtReal> {
    if !x.is_finite() || x.is_zero() || x.is_sign_negative() {
        return Err(Error::Domain(format!("lngamma requires x > 0, got {}", x.to_f64())));
    }
    let xf = x.as_float();
    if *xf == 1 || *xf == 2 {
        return Ok(ExtReal::zero(prec));
    }

    // ln Γ vanishes at 1 and 2; near them the result is small and the shift
    // cancels, so carry extra bits proportional to the closeness.
    let near_zero_bits = [1, 2]
        .iter()
        .filter_map(|&root| Float::with_val(xf.prec() + 8, xf - root).get_exp())
        .map(|e| (-e).max(0) as u32)
        .max()
        .unwrap_or(0);
    let work = prec.bits() + GUARD_BITS + near_zero_bits;

    let mut threshold = f64::from(work / 4).max(12.0);
    loop {
        if let Some(v) = shifted_stirling(xf, work, threshold) {
            return Ok(ExtReal::from_float(Float::with_val(prec.bits(), v)));
        }
        threshold *= 2.0;
    }
}

/// Returns `None` when the coefficient table runs out before convergence.
fn shifted_stirling(x: &Float, work: u32, threshold: f64) -> Option<Float> {
    let mut z = Float::with_val(work, x);
    let mut shift_product = Float::with_val(work, 1);
    while z < threshold {
        shift_product *= &z;
        z += 1;
    }

    let ln_z = Float::with_val(work, z.ln_ref());
    let half_ln_two_pi = {
        let two_pi = Float::with_val(work, Constant::Pi) * 2u32;
        two_pi.ln() / 2u32
    };
    let mut sum = Float::with_val(work, &z - 0.5f64) * &ln_z;
    sum -= &z;
    sum += &half_ln_two_pi;

    let z_sq = Float::with_val(work, z.square_ref());
    let mut z_pow = z.clone();
    let tolerance = Float::with_val(work, sum.abs_ref()) >> work;
    let mut converged = false;
    for coefficient in stirling_coefficients() {
        let term = Float::with_val(work, coefficient) / &z_pow;
        sum += &term;
        if term.abs() < tolerance {
            converged = true;
            break;
        }
        z_pow *= &z_sq;
    }
    if !converged {
        return None;
    }
    sum -= shift_product.ln();
    Some(sum)
}
