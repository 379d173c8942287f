//! Trigonometric functions at rational multiples of π.
//!
//! The rational `num/den` is reduced in exact integer arithmetic before π is
//! involved, so symmetric angles (`n/N` and `(N-n)/N`, or a sine and the
//! cosine of its complement) evaluate through the same code path and give
//! bit-identical results. Arguments are formed with [`ARG_GUARD_BITS`] extra
//! bits and the function value is rounded once to the working precision.

use rug::float::Constant;
use rug::{Float, Integer};

use super::{ExtReal, Precision};
use crate::error::{Error, Result};

/// Extra bits carried by the argument `π·num/den`.
pub const ARG_GUARD_BITS: u32 = 64;

fn gcd(mut a: u128, mut b: u128) -> u128 {
    while b != 0 {
        (a, b) = (b, a % b);
    }
    a
}

/// π at guarded precision, shared across many evaluations on one grid.
#[derive(Clone, Debug)]
pub struct PiMultiples {
    pi: Float,
    prec: Precision,
}

impl PiMultiples {
    pub fn new(prec: Precision) -> Self {
        PiMultiples {
            pi: Float::with_val(prec.with_guard(ARG_GUARD_BITS).bits(), Constant::Pi),
            prec,
        }
    }

    pub fn precision(&self) -> Precision {
        self.prec
    }

    /// π·num/den at guarded precision.
    pub fn angle(&self, num: i128, den: u128) -> Float {
        // operands must stay borrowed: `&Float * Float` would round to the
        // owned operand's precision
        let mut a = Float::with_val(self.pi.prec(), &self.pi * &Integer::from(num));
        a /= &Integer::from(den);
        a
    }

    /// π·num/den + offset at guarded precision.
    pub fn shifted_angle(&self, num: i128, den: u128, offset: &ExtReal) -> Float {
        let mut a = self.angle(num, den);
        a += offset.as_float();
        a
    }

    /// sin(π·num/den).
    pub fn sin(&self, num: i64, den: u64) -> ExtReal {
        assert!(den > 0, "zero denominator");
        self.sin_wide(num as i128, den as u128)
    }

    /// cos(π·num/den) = sin(π·(den - 2·num)/(2·den)).
    pub fn cos(&self, num: i64, den: u64) -> ExtReal {
        assert!(den > 0, "zero denominator");
        let d = den as i128;
        let k = d - 2 * num as i128;
        let e = 2 * d;
        self.sin_wide(k, e as u128)
    }

    /// tan(π·num/den); error at a pole.
    pub fn tan(&self, num: i64, den: u64) -> Result<ExtReal> {
        assert!(den > 0, "zero denominator");
        let d = den as i128;
        let mut r = (num as i128).rem_euclid(d);
        if 2 * r == d {
            return Err(Error::Domain(format!("tan pole at {num}π/{den}")));
        }
        if 2 * r > d {
            r -= d;
        }
        if r == 0 {
            return Ok(ExtReal::zero(self.prec));
        }
        let g = gcd(r.unsigned_abs(), d as u128) as i128;
        let arg = self.angle(r / g, (d / g) as u128);
        Ok(ExtReal::from_float(Float::with_val(self.prec.bits(), arg.tan_ref())))
    }

    fn sin_wide(&self, num: i128, den: u128) -> ExtReal {
        let d = den;
        // period 2: reduce num/den into [0, 2)
        let two_d = 2 * d as i128;
        let mut r = num.rem_euclid(two_d) as u128;
        let mut negative = false;
        if r >= d {
            r -= d;
            negative = true;
        }
        // sin(π - x) = sin(x): fold into [0, 1/2]
        if 2 * r > d {
            r = d - r;
        }
        let value = self.sin_first_quadrant(r, d);
        if negative {
            -value
        } else {
            value
        }
    }

    /// sin(π·r/d) for 0 <= r/d <= 1/2, reduced to lowest terms first.
    fn sin_first_quadrant(&self, r: u128, d: u128) -> ExtReal {
        let bits = self.prec.bits();
        if r == 0 {
            return ExtReal::zero(self.prec);
        }
        let g = gcd(r, d);
        let (r, d) = (r / g, d / g);
        if 4 * r <= d {
            let arg = self.angle(r as i128, d);
            ExtReal::from_float(Float::with_val(bits, arg.sin_ref()))
        } else {
            // sin(πr/d) = cos(π(d - 2r)/(2d)), argument below π/4
            let k = d - 2 * r;
            let e = 2 * d;
            let g = gcd(k, e);
            let arg = self.angle((k / g) as i128, e / g);
            ExtReal::from_float(Float::with_val(bits, arg.cos_ref()))
        }
    }
}

/// sin(π·num/den) at `prec`.
pub fn sin_pi_ratio(num: i64, den: u64, prec: Precision) -> ExtReal {
    PiMultiples::new(prec).sin(num, den)
}

/// cos(π·num/den) at `prec`.
pub fn cos_pi_ratio(num: i64, den: u64, prec: Precision) -> ExtReal {
    PiMultiples::new(prec).cos(num, den)
}
