use rug::float::Constant;
use rug::Float;

use super::{ExtReal, Precision};

/// π correctly rounded to `prec`.
pub fn const_pi(prec: Precision) -> ExtReal {
    ExtReal::from_float(Float::with_val(prec.bits(), Constant::Pi))
}

/// ln 2 correctly rounded to `prec`.
pub fn const_ln2(prec: Precision) -> ExtReal {
    ExtReal::from_float(Float::with_val(prec.bits(), Constant::Log2))
}

#[cfg(test)]
mod tests {
    use super::*;
    use rug::ops::Pow;
    use rug::Integer;

    /// π·10^digits by Machin's formula in plain integer arithmetic.
    fn machin_pi_scaled(digits: u32) -> Integer {
        let guard = 10;
        let scale = Integer::from(10).pow(digits + guard);
        let arctan_inv = |x: u32| -> Integer {
            let x2 = Integer::from(x) * x;
            let mut power = scale.clone() / x;
            let mut sum = power.clone();
            let mut k = 1u32;
            loop {
                power /= &x2;
                if power == 0 {
                    break;
                }
                let term = power.clone() / (2 * k + 1);
                if k % 2 == 1 {
                    sum -= term;
                } else {
                    sum += term;
                }
                k += 1;
            }
            sum
        };
        let pi = arctan_inv(5) * 16 - arctan_inv(239) * 4;
        pi / Integer::from(10).pow(guard)
    }

    #[test]
    fn pi_at_double_matches_machin() {
        let machin = machin_pi_scaled(40);
        let reference = Float::with_val(300, &machin) / Float::with_val(300, Integer::from(10).pow(40));
        let nearest_double = reference.to_f64();
        assert_eq!(nearest_double, 3.141592653589793);
        assert_eq!(const_pi(Precision::DOUBLE).to_f64(), nearest_double);

        let pi256 = const_pi(Precision::HIGH);
        let diff = Float::with_val(300, pi256.as_float() - &reference).abs();
        assert!(diff < 1e-38, "{diff}");
    }

    #[test]
    fn pi_rounding_consistency() {
        let p113 = const_pi(Precision::new(113).unwrap());
        assert_eq!(p113.with_precision(Precision::DOUBLE), const_pi(Precision::DOUBLE));
    }

    #[test]
    fn pi_refinement_bound() {
        let d = (const_pi(Precision::HIGH) - const_pi(Precision::DEFAULT)).abs();
        let bound = ExtReal::one(Precision::HIGH).mul_pow2(-127) * 4u64;
        assert!(d < bound);
    }

    #[test]
    fn constants_agree_across_precisions() {
        for bits in [53u32, 64, 100, 128, 200, 256] {
            let lo = Precision::new(bits).unwrap();
            let hi = lo.with_guard(64);
            for (a, b) in [
                (const_pi(lo), const_pi(hi)),
                (const_ln2(lo), const_ln2(hi)),
            ] {
                let d = (&a - &b).abs();
                // p - 2 agreeing bits, relative to a value of order one
                let bound = ExtReal::one(hi).mul_pow2(-(bits as i32 - 2));
                assert!(d < bound, "bits={bits}");
            }
        }
    }

    #[test]
    fn ln2_at_double() {
        assert_eq!(const_ln2(Precision::DOUBLE).to_f64(), std::f64::consts::LN_2);
    }
}
