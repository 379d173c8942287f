//! The registry integrands in a form safe to evaluate next to their
//! singularities.
//!
//! Trigonometric arguments are reduced against the same guarded π/2 that
//! produced the interval ends, so an end at π or π/2 reduces to exactly zero
//! and a node's tiny offset from it survives intact.

use rug::float::Constant;
use rug::{Float, Integer};

use super::tanh_sinh::{IntegrandSpec, Node, SingularEnds, NODE_GUARD_BITS};
use crate::error::{Error, Result};
use crate::numerics::{lngamma_at, ExtReal, Precision};
use crate::riemann::{IntegralTarget, TargetId};

#[derive(Clone, Debug)]
struct QuarterTurns {
    pi: Float,
    half_pi: Float,
}

impl QuarterTurns {
    fn new(wp: u32) -> Self {
        let pi = Float::with_val(wp, Constant::Pi);
        let half_pi = Float::with_val(wp, &pi / 2u32);
        QuarterTurns { pi, half_pi }
    }

    fn prec(&self) -> u32 {
        self.pi.prec()
    }

    /// sin(base + delta + quarter·π/2), with `base` reduced modulo π/2 first.
    fn sin_of_sum(&self, base: &Float, delta: &Float, quarter: i64) -> Float {
        let wp = self.prec();
        let k = Float::with_val(wp, base / &self.half_pi)
            .round()
            .to_integer()
            .expect("finite base");
        let rest = Float::with_val(wp, base - Float::with_val(wp, &self.half_pi * &k));
        let y = Float::with_val(wp, &rest + delta);
        let turn = (k + Integer::from(quarter)).mod_u(4);
        match turn {
            0 => y.sin(),
            1 => y.cos(),
            2 => -y.sin(),
            _ => -y.cos(),
        }
    }
}

fn ln_abs(v: Float) -> ExtReal {
    ExtReal::from_float(v.abs().ln())
}

/// The integrand of `target` on its registry interval, evaluated at `prec`
/// plus node guard bits.
pub fn integrand_for(target: &IntegralTarget, prec: Precision) -> Result<IntegrandSpec> {
    let wp = prec.with_guard(NODE_GUARD_BITS);
    let turns = QuarterTurns::new(wp.bits());
    let id = target.id();
    let zero = ExtReal::zero(wp);
    let one = ExtReal::one(wp);
    let pi = ExtReal::from_float(turns.pi.clone());
    let half_pi = ExtReal::from_float(turns.half_pi.clone());
    let label = id.name();
    match id {
        TargetId::LogSin0Pi | TargetId::LogSin0HalfPi => {
            let (upper, ends) = if id == TargetId::LogSin0Pi {
                (pi, SingularEnds::BOTH)
            } else {
                (half_pi, SingularEnds::LOWER)
            };
            IntegrandSpec::new(label, zero, upper, ends, move |n: &Node| {
                ln_abs(turns.sin_of_sum(n.anchor().as_float(), n.offset().as_float(), 0))
            })
        }
        TargetId::LogCos0HalfPi => IntegrandSpec::new(label, zero, half_pi, SingularEnds::UPPER, move |n: &Node| {
            ln_abs(turns.sin_of_sum(n.anchor().as_float(), n.offset().as_float(), 1))
        }),
        TargetId::LogTan0HalfPi => IntegrandSpec::new(label, zero, half_pi, SingularEnds::BOTH, move |n: &Node| {
            let (a, d) = (n.anchor().as_float(), n.offset().as_float());
            ln_abs(turns.sin_of_sum(a, d, 0)) - ln_abs(turns.sin_of_sum(a, d, 1))
        }),
        TargetId::LogGamma01 => IntegrandSpec::new(label, zero, one, SingularEnds::LOWER, move |n: &Node| {
            // never fails: nodes are strictly positive
            lngamma_at(n.x(), prec).unwrap_or_else(|_| nan())
        }),
        TargetId::LogAbsSinShifted => {
            let theta = target
                .theta()
                .ok_or_else(|| Error::InvalidParameter(format!("{id} requires theta")))?;
            let theta = Float::with_val(wp.bits(), theta.as_float());
            let ends = if Float::with_val(wp.bits(), theta.sin_ref()).is_zero() {
                SingularEnds::BOTH
            } else {
                SingularEnds::NONE
            };
            IntegrandSpec::new(label, zero, one, ends, move |n: &Node| {
                let w = turns.prec();
                let base = Float::with_val(w, &turns.pi * n.anchor().as_float()) + &theta;
                let delta = Float::with_val(w, &turns.pi * n.offset().as_float());
                ln_abs(turns.sin_of_sum(&base, &delta, 0))
            })
        }
    }
}

fn nan() -> ExtReal {
    ExtReal::from_float(Float::with_val(53, rug::float::Special::Nan))
}

/// The zero of `sin(πx + θ)` inside (0, 1), located by bisection to the
/// guarded working precision. `None` when the zeros sit on the ends.
pub fn locate_shifted_zero(theta: &ExtReal, prec: Precision) -> Option<ExtReal> {
    let wp = prec.with_guard(NODE_GUARD_BITS).bits();
    let turns = QuarterTurns::new(wp);
    let theta = Float::with_val(wp, theta.as_float());
    let zero = Float::new(wp);
    let g = |x: &Float| -> Float {
        let base = Float::with_val(wp, &turns.pi * x) + &theta;
        turns.sin_of_sum(&base, &zero, 0)
    };
    let mut lo = Float::with_val(wp, 0);
    let mut hi = Float::with_val(wp, 1);
    let g_lo = g(&lo);
    if g_lo.is_zero() {
        return None;
    }
    let lo_negative = g_lo.is_sign_negative();
    loop {
        let mid = Float::with_val(wp, &lo + &hi) / 2u32;
        if mid == lo || mid == hi {
            break;
        }
        let g_mid = g(&mid);
        if g_mid.is_zero() {
            lo = mid.clone();
            hi = mid;
            break;
        }
        if g_mid.is_sign_negative() == lo_negative {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    let root = Float::with_val(wp, &lo + &hi) / 2u32;
    (root > 0 && root < 1).then(|| ExtReal::from_float(root))
}

#[cfg(test)]
mod tests {
    use super::*;

    const P: Precision = Precision::DEFAULT;

    #[test]
    fn quarter_turn_reduction_is_exact_at_multiples() {
        let t = QuarterTurns::new(192);
        let tiny = Float::with_val(192, -300).exp2();
        // sin(π − 2^-300) = 2^-300 (to working precision)
        let s = t.sin_of_sum(&t.pi, &(-tiny.clone()), 0);
        assert_eq!(s, tiny);
        // cos(π/2 − 2^-300) = sin(2^-300)
        let c = t.sin_of_sum(&t.half_pi, &(-tiny.clone()), 1);
        assert_eq!(c, tiny);
        let neg = t.sin_of_sum(&t.pi, &tiny, 0);
        assert_eq!(neg, -tiny);
    }

    #[test]
    fn shifted_zero_for_theta_one() {
        let theta = ExtReal::one(P);
        let x0 = locate_shifted_zero(&theta, P).unwrap();
        // sin(πx + 1) = 0 at x = (π − 1)/π
        let pi = Float::with_val(400, Constant::Pi);
        let want = Float::with_val(400, &pi - 1u32) / &pi;
        let d = Float::with_val(400, x0.as_float() - &want).abs();
        assert!(d < Float::with_val(64, -180).exp2(), "{d}");
        assert!((x0.to_f64() - 0.6816901138162093).abs() < 1e-15);
    }

    #[test]
    fn no_interior_zero_when_theta_vanishes() {
        assert!(locate_shifted_zero(&ExtReal::zero(P), P).is_none());
    }

    #[test]
    fn interior_zero_for_negative_and_large_theta() {
        for theta in [-0.3f64, 2.5, 7.0, -11.2] {
            let x0 = locate_shifted_zero(&ExtReal::from_f64(theta, P).unwrap(), P).unwrap();
            let want = (-theta / std::f64::consts::PI).rem_euclid(1.0);
            assert!((x0.to_f64() - want).abs() < 1e-14, "theta {theta}");
        }
    }

    #[test]
    fn integrands_match_plain_evaluation_in_the_interior() {
        let x = ExtReal::from_ratio(3, 10, P);
        for id in TargetId::PRODUCT_BASED {
            let target = IntegralTarget::new(id, None, P).unwrap();
            let spec = integrand_for(&target, P).unwrap();
            let want = match id {
                TargetId::LogSin0Pi | TargetId::LogSin0HalfPi => x.sin().ln(),
                TargetId::LogCos0HalfPi => x.cos().ln(),
                TargetId::LogTan0HalfPi => x.tan().ln(),
                TargetId::LogGamma01 => ExtReal::from_float(Float::with_val(200, x.as_float()).ln_abs_gamma().0),
                TargetId::LogAbsSinShifted => unreachable!(),
            };
            let got = spec.evaluate_at(&x);
            assert!((got - want).abs() < ExtReal::one(P).mul_pow2(-120), "{id}");
        }
    }
}
