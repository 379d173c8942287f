//! Extended-precision reals.
//!
//! [`ExtReal`] wraps an MPFR float and carries its significand width with it.
//! Binary operations between two values round to the wider of the two
//! precisions; operations with machine integers keep the operand's precision.

use std::cmp::Ordering;
use std::fmt;
use std::ops::{Add, Div, Mul, Neg, Sub};

use rug::float::Round;
use rug::Float;

use crate::error::{Error, Result};

/// Significand width in bits.
#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct Precision(u32);

impl Precision {
    pub const MIN_BITS: u32 = 53;
    pub const MAX_BITS: u32 = 1 << 16;

    /// IEEE double width, the smallest precision accepted.
    pub const DOUBLE: Precision = Precision(53);
    /// Working precision used unless a caller asks for something else.
    pub const DEFAULT: Precision = Precision(128);
    /// Precision used where residuals are probed near rounding noise.
    pub const HIGH: Precision = Precision(256);

    pub fn new(bits: u32) -> Result<Self> {
        if (Self::MIN_BITS..=Self::MAX_BITS).contains(&bits) {
            Ok(Precision(bits))
        } else {
            Err(Error::InvalidPrecision {
                bits,
                min: Self::MIN_BITS,
                max: Self::MAX_BITS,
            })
        }
    }

    pub fn bits(self) -> u32 {
        self.0
    }

    /// The same precision widened by `extra` guard bits.
    pub fn with_guard(self, extra: u32) -> Precision {
        Precision(self.0.saturating_add(extra))
    }

    /// Significant decimal digits used when serializing a value of this
    /// precision: `ceil(0.302 * bits) + 1`, enough for an exact
    /// binary -> decimal -> binary round trip.
    pub fn decimal_digits(self) -> usize {
        (self.0 as usize * 302).div_ceil(1000) + 1
    }
}

impl TryFrom<u32> for Precision {
    type Error = Error;

    fn try_from(bits: u32) -> Result<Self> {
        Precision::new(bits)
    }
}

impl fmt::Display for Precision {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{} bits", self.0)
    }
}

/// Extended-precision real number with an explicit significand width.
#[derive(Clone, Debug, PartialEq, PartialOrd)]
pub struct ExtReal(Float);

impl ExtReal {
    /// Wraps an MPFR float, widening it to 53 bits if it is narrower.
    pub fn from_float(mut value: Float) -> Self {
        if value.prec() < Precision::MIN_BITS {
            value.set_prec(Precision::MIN_BITS);
        }
        ExtReal(value)
    }

    pub fn zero(prec: Precision) -> Self {
        ExtReal(Float::new(prec.bits()))
    }

    pub fn one(prec: Precision) -> Self {
        Self::from_i64(1, prec)
    }

    pub fn from_i64(value: i64, prec: Precision) -> Self {
        ExtReal(Float::with_val(prec.bits(), value))
    }

    pub fn from_u64(value: u64, prec: Precision) -> Self {
        ExtReal(Float::with_val(prec.bits(), value))
    }

    /// `num / den` rounded once to `prec`.
    pub fn from_ratio(num: i64, den: u64, prec: Precision) -> Self {
        let mut q = rug::Rational::from(num);
        q /= den;
        ExtReal(Float::with_val(prec.bits(), &q))
    }

    pub fn from_f64(value: f64, prec: Precision) -> Result<Self> {
        if !value.is_finite() {
            return Err(Error::NonFinite { index: 0 });
        }
        Ok(ExtReal(Float::with_val(prec.bits(), value)))
    }

    /// Parses a decimal (or `inf`/`nan`-free scientific) string, rounding to `prec`.
    pub fn parse(text: &str, prec: Precision) -> Result<Self> {
        let parsed = Float::parse(text.trim()).map_err(|e| Error::Parse(format!("{text:?}: {e}")))?;
        let value = Float::with_val(prec.bits(), parsed);
        if !value.is_finite() {
            return Err(Error::Parse(format!("{text:?} is not finite")));
        }
        Ok(ExtReal(value))
    }

    pub fn precision(&self) -> Precision {
        Precision(self.0.prec())
    }

    pub fn precision_bits(&self) -> u32 {
        self.0.prec()
    }

    /// Rounds (or exactly widens) to a new precision.
    pub fn with_precision(&self, prec: Precision) -> Self {
        ExtReal(Float::with_val(prec.bits(), &self.0))
    }

    pub fn as_float(&self) -> &Float {
        &self.0
    }

    pub fn into_float(self) -> Float {
        self.0
    }

    pub fn to_f64(&self) -> f64 {
        self.0.to_f64()
    }

    pub fn is_finite(&self) -> bool {
        self.0.is_finite()
    }

    pub fn is_zero(&self) -> bool {
        self.0.is_zero()
    }

    pub fn is_sign_negative(&self) -> bool {
        self.0.is_sign_negative() && !self.0.is_zero()
    }

    /// Binary exponent `e` with `|x| = m * 2^e`, `0.5 <= m < 1`; `None` for zero.
    pub fn exponent(&self) -> Option<i32> {
        self.0.get_exp()
    }

    /// Unit in the last place at this value's precision. For zero, the ulp of
    /// the smallest normal magnitude is meaningless, so `2^(1-p)` (the ulp of
    /// one) is returned instead.
    pub fn ulp(&self) -> ExtReal {
        let p = self.0.prec() as i32;
        let e = self.0.get_exp().unwrap_or(1);
        let mut u = Float::with_val(self.0.prec(), 1);
        u <<= e - p;
        ExtReal(u)
    }

    /// `self * 2^k`, exact.
    pub fn mul_pow2(&self, k: i32) -> ExtReal {
        let mut v = self.0.clone();
        v <<= k;
        ExtReal(v)
    }

    pub fn abs(&self) -> ExtReal {
        ExtReal(self.0.clone().abs())
    }

    pub fn sqrt(&self) -> ExtReal {
        ExtReal(self.0.clone().sqrt())
    }

    pub fn square(&self) -> ExtReal {
        ExtReal(self.0.clone().square())
    }

    pub fn ln(&self) -> ExtReal {
        ExtReal(self.0.clone().ln())
    }

    pub fn exp(&self) -> ExtReal {
        ExtReal(self.0.clone().exp())
    }

    pub fn sin(&self) -> ExtReal {
        ExtReal(self.0.clone().sin())
    }

    pub fn cos(&self) -> ExtReal {
        ExtReal(self.0.clone().cos())
    }

    pub fn tan(&self) -> ExtReal {
        ExtReal(self.0.clone().tan())
    }

    pub fn sinh(&self) -> ExtReal {
        ExtReal(self.0.clone().sinh())
    }

    pub fn cosh(&self) -> ExtReal {
        ExtReal(self.0.clone().cosh())
    }

    pub fn max(self, other: ExtReal) -> ExtReal {
        if other > self {
            other
        } else {
            self
        }
    }

    /// Scientific decimal string with `digits` significant digits,
    /// e.g. `-2.1775860903036021e0`.
    pub fn to_decimal_string(&self, digits: usize) -> String {
        if self.0.is_zero() {
            return if self.0.is_sign_negative() { "-0".into() } else { "0".into() };
        }
        let raw = self.0.to_string_radix_round(10, Some(digits.max(1)), Round::Nearest);
        normalize_exponent(&raw)
    }

    /// Decimal string with the digit count implied by this value's precision.
    pub fn to_decimal(&self) -> String {
        self.to_decimal_string(self.precision().decimal_digits())
    }
}

/// rug renders `1.5e0` or `1.5`; always emit an explicit exponent.
fn normalize_exponent(raw: &str) -> String {
    if raw.contains('e') {
        raw.to_string()
    } else {
        format!("{raw}e0")
    }
}

impl fmt::Display for ExtReal {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match f.precision() {
            Some(digits) => f.write_str(&self.to_decimal_string(digits)),
            None => f.write_str(&self.to_decimal()),
        }
    }
}

impl PartialEq<f64> for ExtReal {
    fn eq(&self, other: &f64) -> bool {
        self.0 == *other
    }
}

impl PartialOrd<f64> for ExtReal {
    fn partial_cmp(&self, other: &f64) -> Option<Ordering> {
        self.0.partial_cmp(other)
    }
}

impl Neg for ExtReal {
    type Output = ExtReal;
    fn neg(self) -> ExtReal {
        ExtReal(-self.0)
    }
}

impl Neg for &ExtReal {
    type Output = ExtReal;
    fn neg(self) -> ExtReal {
        ExtReal(-self.0.clone())
    }
}

macro_rules! impl_binop {
    ($Trait:ident, $method:ident, $op:tt) => {
        impl $Trait<&ExtReal> for &ExtReal {
            type Output = ExtReal;
            fn $method(self, rhs: &ExtReal) -> ExtReal {
                let prec = self.0.prec().max(rhs.0.prec());
                ExtReal(Float::with_val(prec, &self.0 $op &rhs.0))
            }
        }
        impl $Trait<ExtReal> for ExtReal {
            type Output = ExtReal;
            fn $method(self, rhs: ExtReal) -> ExtReal {
                (&self).$method(&rhs)
            }
        }
        impl $Trait<&ExtReal> for ExtReal {
            type Output = ExtReal;
            fn $method(self, rhs: &ExtReal) -> ExtReal {
                (&self).$method(rhs)
            }
        }
        impl $Trait<ExtReal> for &ExtReal {
            type Output = ExtReal;
            fn $method(self, rhs: ExtReal) -> ExtReal {
                self.$method(&rhs)
            }
        }
    };
}

impl_binop!(Add, add, +);
impl_binop!(Sub, sub, -);
impl_binop!(Mul, mul, *);
impl_binop!(Div, div, /);

macro_rules! impl_scalar_op {
    ($Trait:ident, $method:ident, $op:tt, $($t:ty),*) => {$(
        impl $Trait<$t> for &ExtReal {
            type Output = ExtReal;
            fn $method(self, rhs: $t) -> ExtReal {
                ExtReal(Float::with_val(self.0.prec(), &self.0 $op rhs))
            }
        }
        impl $Trait<$t> for ExtReal {
            type Output = ExtReal;
            fn $method(self, rhs: $t) -> ExtReal {
                (&self).$method(rhs)
            }
        }
    )*};
}

impl_scalar_op!(Add, add, +, i64, u64);
impl_scalar_op!(Sub, sub, -, i64, u64);
impl_scalar_op!(Mul, mul, *, i64, u64);
impl_scalar_op!(Div, div, /, i64, u64);
