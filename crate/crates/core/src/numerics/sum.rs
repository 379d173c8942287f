//! Compensated (Neumaier) summation over [`ExtReal`].
//!
//! Terms are added in the order given. After `k` terms bounded by `B` the
//! accumulated rounding error stays below `2·k·ulp(B)`.

use std::borrow::Borrow;

use rug::Float;

use super::{ExtReal, Precision};
use crate::error::{Error, Result};

#[derive(Clone, Debug)]
pub struct SumAccumulator {
    running_total: ExtReal,
    compensation: ExtReal,
    term_count: u64,
}

impl SumAccumulator {
    pub fn new(prec: Precision) -> Self {
        SumAccumulator {
            running_total: ExtReal::zero(prec),
            compensation: ExtReal::zero(prec),
            term_count: 0,
        }
    }

    pub fn term_count(&self) -> u64 {
        self.term_count
    }

    pub fn precision(&self) -> Precision {
        self.running_total.precision()
    }

    pub fn add(&mut self, term: &ExtReal) -> Result<()> {
        if !term.is_finite() {
            return Err(Error::NonFinite {
                index: self.term_count,
            });
        }
        if term.precision() > self.precision() {
            self.running_total = self.running_total.with_precision(term.precision());
            self.compensation = self.compensation.with_precision(term.precision());
        }
        let bits = self.precision().bits();
        let total = self.running_total.as_float();
        let x = term.as_float();
        let t = Float::with_val(bits, total + x);
        // the branch keeps the two-sum exact: subtract the larger magnitude first
        let lost = if total.cmp_abs(x).is_some_and(|o| o.is_ge()) {
            Float::with_val(bits, total - &t) + x
        } else {
            Float::with_val(bits, x - &t) + total
        };
        self.compensation = &self.compensation + ExtReal::from_float(lost);
        self.running_total = ExtReal::from_float(t);
        self.term_count += 1;
        Ok(())
    }

    pub fn total(&self) -> ExtReal {
        &self.running_total + &self.compensation
    }
}

/// Sums `terms` in input order with compensation. The result carries the
/// widest precision among the terms (53 bits for an empty list).
pub fn compensated_sum<I>(terms: I) -> Result<ExtReal>
where
    I: IntoIterator,
    I::Item: Borrow<ExtReal>,
{
    let mut acc = SumAccumulator::new(Precision::DOUBLE);
    for term in terms {
        acc.add(term.borrow())?;
    }
    Ok(acc.total())
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;
    use rug::Rational;

    fn exact_sum(terms: &[ExtReal]) -> Rational {
        let mut q = Rational::new();
        for t in terms {
            q += t.as_float().to_rational().unwrap();
        }
        q
    }

    fn bound(terms: &[ExtReal]) -> Rational {
        let max = terms
            .iter()
            .map(|t| t.abs())
            .fold(ExtReal::zero(Precision::DOUBLE), ExtReal::max);
        let ulp = max.ulp().as_float().to_rational().unwrap();
        ulp * 2u32 * terms.len() as u32
    }

    #[test]
    fn empty_and_single() {
        let empty: [ExtReal; 0] = [];
        assert!(compensated_sum(empty).unwrap().is_zero());
        let x = ExtReal::from_ratio(1, 3, Precision::DEFAULT);
        assert_eq!(compensated_sum([&x]).unwrap(), x);
    }

    #[test]
    fn recovers_tiny_terms_lost_by_naive_summation() {
        let p = Precision::DOUBLE;
        let one = ExtReal::one(p);
        let tiny = ExtReal::one(p).mul_pow2(-60);
        let reps = 1_000_000u64;
        let mut terms = Vec::with_capacity(3 * reps as usize);
        for _ in 0..reps {
            terms.push(one.clone());
            terms.push(-&one);
            terms.push(tiny.clone());
        }
        let got = compensated_sum(&terms).unwrap();
        let exact = exact_sum(&terms);
        let expected = Rational::from(reps) / (Rational::from(1) << 60u32);
        assert_eq!(exact, expected);
        let rel = (got.as_float().to_rational().unwrap() - &exact).abs() / &exact;
        assert!(rel < Rational::from((1, 1u64 << 50)), "relative error {}", rel.to_f64());
    }

    #[test]
    fn non_finite_term_is_reported_with_index() {
        let p = Precision::DOUBLE;
        let bad = ExtReal::from_float(Float::with_val(53, rug::float::Special::Nan));
        let terms = vec![ExtReal::one(p), ExtReal::one(p), bad];
        assert_eq!(compensated_sum(&terms), Err(Error::NonFinite { index: 2 }));
    }

    #[test]
    fn precision_widens_to_widest_term() {
        let a = ExtReal::one(Precision::DOUBLE);
        let b = ExtReal::from_ratio(1, 3, Precision::HIGH);
        let s = compensated_sum([&a, &b]).unwrap();
        assert_eq!(s.precision(), Precision::HIGH);
        assert_eq!(s, ExtReal::from_ratio(4, 3, Precision::HIGH));
    }

    fn fixed_terms() -> Vec<ExtReal> {
        // deterministic mixed-magnitude list of 10^4 doubles
        let p = Precision::DOUBLE;
        (0..10_000u64)
            .map(|i| {
                let mantissa = ((i * 2_654_435_761) % 1_000_003) as i64 - 500_001;
                let shift = -(((i * 7919) % 80) as i32);
                ExtReal::from_i64(mantissa, p).mul_pow2(shift)
            })
            .collect()
    }

    proptest! {
        #![proptest_config(ProptestConfig::with_cases(64))]

        #[test]
        fn any_permutation_stays_within_bound(seed in any::<u64>()) {
            use rand::seq::SliceRandom;
            use rand::SeedableRng;
            let mut terms = fixed_terms();
            let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(seed);
            terms.shuffle(&mut rng);
            let got = compensated_sum(&terms).unwrap().as_float().to_rational().unwrap();
            let err = (got - exact_sum(&terms)).abs();
            prop_assert!(err < bound(&terms));
        }

        #[test]
        fn short_lists_stay_within_bound(values in prop::collection::vec(-1e6f64..1e6, 1..200)) {
            let terms: Vec<ExtReal> = values
                .iter()
                .map(|v| ExtReal::from_f64(*v, Precision::DOUBLE).unwrap())
                .collect();
            let got = compensated_sum(&terms).unwrap().as_float().to_rational().unwrap();
            let err = (got - exact_sum(&terms)).abs();
            prop_assert!(err <= bound(&terms));
        }
    }
}
