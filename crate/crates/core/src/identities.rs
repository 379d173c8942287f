//! Trigonometric products at rational multiples of π and their closed forms.
//!
//! | family       | product                              | closed form      |
//! |--------------|--------------------------------------|------------------|
//! | `tan`        | ∏_{n=1}^{N} tan(nπ/(2N+1))           | √(2N+1)          |
//! | `sin`        | ∏_{n=1}^{N-1} sin(nπ/N)              | N / 2^(N-1)      |
//! | `half-sin`   | ∏_{n=1}^{⌊N/2⌋} sin²(nπ/N)           | N / 2^(N-1)      |
//! | `cos`        | ∏_{n=1}^{⌊N/2⌋} cos²(π/2 − nπ/N)     | N / 2^(N-1)      |
//! | `shifted`    | ∏_{n=0}^{N-1} sin(nπ/N + θ)          | sin(Nθ) / 2^(N-1)|
//!
//! Products are accumulated by direct multiplication: [`ExtReal`] has an
//! unbounded binary exponent, so `N / 2^(N-1)` does not underflow and the
//! residual stays relative for every N.

use std::fmt;
use std::str::FromStr;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use rug::Float;

use crate::error::{Error, Result};
use crate::numerics::{ExtReal, PiMultiples, Precision, ARG_GUARD_BITS};

/// Product identity family.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum Family {
    TanProduct,
    SinProduct,
    HalfSinSqProduct,
    CosSqProduct,
    ShiftedSinProduct,
}

impl Family {
    pub const ALL: [Family; 5] = [
        Family::TanProduct,
        Family::SinProduct,
        Family::HalfSinSqProduct,
        Family::CosSqProduct,
        Family::ShiftedSinProduct,
    ];

    pub fn name(self) -> &'static str {
        match self {
            Family::TanProduct => "tan",
            Family::SinProduct => "sin",
            Family::HalfSinSqProduct => "half-sin",
            Family::CosSqProduct => "cos",
            Family::ShiftedSinProduct => "shifted",
        }
    }

    /// Smallest admissible N.
    pub fn min_n(self) -> u64 {
        match self {
            Family::TanProduct | Family::ShiftedSinProduct => 1,
            _ => 2,
        }
    }
}

impl fmt::Display for Family {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for Family {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        Family::ALL
            .into_iter()
            .find(|f| f.name() == s)
            .ok_or_else(|| Error::InvalidParameter(format!("unknown family {s:?}")))
    }
}

/// One instance of a product identity.
#[derive(Clone, Debug, PartialEq)]
pub struct IdentityCase {
    family: Family,
    n_param: u64,
    theta: Option<ExtReal>,
}

impl IdentityCase {
    pub fn new(family: Family, n_param: u64, theta: Option<ExtReal>) -> Result<Self> {
        if n_param < family.min_n() {
            return Err(Error::InvalidParameter(format!(
                "{family} product requires N >= {}, got {n_param}",
                family.min_n()
            )));
        }
        // N / 2^(N-1) must fit the exponent range
        if n_param > 1 << 29 {
            return Err(Error::InvalidParameter(format!("N = {n_param} is too large")));
        }
        match (family, &theta) {
            (Family::ShiftedSinProduct, None) => Err(Error::InvalidParameter(
                "shifted product requires theta".into(),
            )),
            (Family::ShiftedSinProduct, Some(t)) if !t.is_finite() => {
                Err(Error::InvalidParameter("theta must be finite".into()))
            }
            (Family::ShiftedSinProduct, Some(_)) | (_, None) => Ok(IdentityCase {
                family,
                n_param,
                theta,
            }),
            (_, Some(_)) => Err(Error::InvalidParameter(format!(
                "theta is only meaningful for the shifted product, not {family}"
            ))),
        }
    }

    pub fn family(&self) -> Family {
        self.family
    }

    pub fn n_param(&self) -> u64 {
        self.n_param
    }

    pub fn theta(&self) -> Option<&ExtReal> {
        self.theta.as_ref()
    }

    pub fn product(&self, prec: Precision) -> Result<ExtReal> {
        let n = self.n_param;
        match self.family {
            Family::TanProduct => tan_product(n, prec),
            Family::SinProduct => sin_product(n, prec),
            Family::HalfSinSqProduct => half_sin_sq_product(n, prec),
            Family::CosSqProduct => cos_sq_product(n, prec),
            Family::ShiftedSinProduct => {
                shifted_sin_product(n, self.theta.as_ref().expect("validated"), prec)
            }
        }
    }

    pub fn closed_form(&self, prec: Precision) -> ExtReal {
        let n = self.n_param;
        match self.family {
            Family::TanProduct => ExtReal::from_u64(2 * n + 1, prec).sqrt(),
            Family::SinProduct | Family::HalfSinSqProduct | Family::CosSqProduct => {
                n_over_pow2(n, prec)
            }
            Family::ShiftedSinProduct => {
                let theta = self.theta.as_ref().expect("validated");
                let arg = Float::with_val(
                    prec.with_guard(ARG_GUARD_BITS).bits(),
                    theta.as_float() * n,
                );
                ExtReal::from_float(Float::with_val(prec.bits(), arg.sin_ref()))
                    .mul_pow2(-(n as i32 - 1))
            }
        }
    }
}

/// Outcome of checking one identity case.
#[derive(Clone, Debug)]
pub struct IdentityCheckResult {
    pub case: IdentityCase,
    pub computed_product: ExtReal,
    pub closed_form: ExtReal,
    /// Relative residual, or absolute when the closed form is zero.
    pub relative_residual: ExtReal,
}

impl IdentityCheckResult {
    /// Residual contract: `2^(20 - p) · N`.
    pub fn threshold(&self) -> ExtReal {
        residual_threshold(self.case.n_param, self.computed_product.precision())
    }

    pub fn passes(&self) -> bool {
        self.relative_residual < self.threshold()
    }
}

pub fn residual_threshold(n_param: u64, prec: Precision) -> ExtReal {
    ExtReal::from_u64(n_param, prec).mul_pow2(20 - prec.bits() as i32)
}

fn n_over_pow2(n: u64, prec: Precision) -> ExtReal {
    ExtReal::from_u64(n, prec).mul_pow2(-(n as i32 - 1))
}

fn require_n(n: u64, min: u64, what: &str) -> Result<()> {
    if n < min {
        Err(Error::InvalidParameter(format!(
            "{what} requires N >= {min}, got {n}"
        )))
    } else {
        Ok(())
    }
}

fn multiply_all(prec: Precision, factors: impl Iterator<Item = Result<ExtReal>>) -> Result<ExtReal> {
    let mut product = Float::with_val(prec.bits(), 1);
    for factor in factors {
        product *= factor?.as_float();
    }
    Ok(ExtReal::from_float(product))
}

/// ∏_{n=1}^{N} tan(nπ/(2N+1)).
pub fn tan_product(n: u64, prec: Precision) -> Result<ExtReal> {
    require_n(n, 1, "tan product")?;
    let grid = PiMultiples::new(prec);
    let m = 2 * n + 1;
    multiply_all(prec, (1..=n).map(|k| grid.tan(k as i64, m)))
}

/// ∏_{n=1}^{N-1} sin(nπ/N).
pub fn sin_product(n: u64, prec: Precision) -> Result<ExtReal> {
    require_n(n, 2, "sin product")?;
    let grid = PiMultiples::new(prec);
    multiply_all(prec, (1..n).map(|k| Ok(grid.sin(k as i64, n))))
}

/// ∏_{n=1}^{⌊N/2⌋} sin²(nπ/N).
pub fn half_sin_sq_product(n: u64, prec: Precision) -> Result<ExtReal> {
    require_n(n, 2, "half-range squared sine product")?;
    let grid = PiMultiples::new(prec);
    multiply_all(prec, (1..=n / 2).map(|k| Ok(grid.sin(k as i64, n).square())))
}

/// ∏_{n=1}^{⌊N/2⌋} cos²(π/2 − nπ/N).
pub fn cos_sq_product(n: u64, prec: Precision) -> Result<ExtReal> {
    require_n(n, 2, "squared cosine product")?;
    let grid = PiMultiples::new(prec);
    // π/2 − nπ/N = π(N − 2n)/(2N)
    multiply_all(
        prec,
        (1..=n / 2).map(|k| Ok(grid.cos(n as i64 - 2 * k as i64, 2 * n).square())),
    )
}

/// ∏_{n=0}^{N-1} sin(nπ/N + θ).
///
/// Fails with [`Error::NearSingularProduct`] when a factor lies within
/// `2^(-p/2)` of zero.
pub fn shifted_sin_product(n: u64, theta: &ExtReal, prec: Precision) -> Result<ExtReal> {
    require_n(n, 1, "shifted sine product")?;
    let grid = PiMultiples::new(prec);
    let threshold_bits = prec.bits() / 2;
    let tiny = ExtReal::one(prec).mul_pow2(-(threshold_bits as i32));
    multiply_all(
        prec,
        (0..n).map(|k| {
            let arg = grid.shifted_angle(k as i128, n as u128, theta);
            let factor = ExtReal::from_float(Float::with_val(prec.bits(), arg.sin_ref()));
            if factor.abs() < tiny {
                Err(Error::NearSingularProduct {
                    n: k,
                    threshold_bits,
                })
            } else {
                Ok(factor)
            }
        }),
    )
}

pub fn check_identity(case: &IdentityCase, prec: Precision) -> Result<IdentityCheckResult> {
    let computed_product = case.product(prec)?;
    let closed_form = case.closed_form(prec);
    let diff = (&computed_product - &closed_form).abs();
    let relative_residual = if closed_form.is_zero() {
        diff
    } else {
        diff / closed_form.abs()
    };
    Ok(IdentityCheckResult {
        case: case.clone(),
        computed_product,
        closed_form,
        relative_residual,
    })
}

/// Checks `family` for every N in `n_range`, in ascending N. The shifted
/// family is excluded here because it needs θ; see [`check_shifted_sampled`].
pub fn check_family_range(
    family: Family,
    n_range: std::ops::RangeInclusive<u64>,
    prec: Precision,
) -> Result<Vec<IdentityCheckResult>> {
    if family == Family::ShiftedSinProduct {
        return Err(Error::InvalidParameter(
            "the shifted family needs theta values".into(),
        ));
    }
    let start = (*n_range.start()).max(family.min_n());
    let ns: Vec<u64> = (start..=*n_range.end()).collect();
    ns.into_par_iter()
        .map(|n| check_identity(&IdentityCase::new(family, n, None)?, prec))
        .collect()
}

/// Draws `count` angles θ in (−π, π) for which every factor of the shifted
/// product of order `n`, and sin(nθ), stay clear of zero: the fractional part
/// of nθ/π is kept in [0.05, 0.95]. Deterministic for a given seed.
pub fn sample_shifted_thetas(n: u64, count: usize, seed: u64, prec: Precision) -> Vec<ExtReal> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed ^ n.wrapping_mul(0x9e37_79b9_7f4a_7c15));
    let pi = std::f64::consts::PI;
    let mut out = Vec::with_capacity(count);
    while out.len() < count {
        let theta: f64 = rng.random_range(-pi..pi);
        let phase = (n as f64 * theta / pi).rem_euclid(1.0);
        if (0.05..=0.95).contains(&phase) {
            out.push(ExtReal::from_f64(theta, prec).expect("finite"));
        }
    }
    out
}

/// Checks the shifted product for every N in `n_range` against `per_n`
/// sampled angles each. Ordered by N, then by sample index.
pub fn check_shifted_sampled(
    n_range: std::ops::RangeInclusive<u64>,
    per_n: usize,
    seed: u64,
    prec: Precision,
) -> Result<Vec<IdentityCheckResult>> {
    let ns: Vec<u64> = (*n_range.start()..=*n_range.end()).filter(|&n| n >= 1).collect();
    let nested: Vec<Vec<IdentityCheckResult>> = ns
        .into_par_iter()
        .map(|n| {
            sample_shifted_thetas(n, per_n, seed, prec)
                .into_iter()
                .map(|theta| {
                    check_identity(
                        &IdentityCase::new(Family::ShiftedSinProduct, n, Some(theta))?,
                        prec,
                    )
                })
                .collect::<Result<Vec<_>>>()
        })
        .collect::<Result<_>>()?;
    Ok(nested.into_iter().flatten().collect())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::numerics::const_pi;

    const P: Precision = Precision::DEFAULT;
    const HI: Precision = Precision::HIGH;

    fn rel(a: &ExtReal, b: &ExtReal) -> ExtReal {
        ((a - b) / b).abs()
    }

    fn two_pow(k: i32, prec: Precision) -> ExtReal {
        ExtReal::one(prec).mul_pow2(k)
    }

    #[test]
    fn tan_small_cases() {
        let t1 = tan_product(1, P).unwrap();
        assert!(rel(&t1, &ExtReal::from_u64(3, P).sqrt()) < two_pow(-125, P));
        // both factors at 256 bits against √5
        let t2 = tan_product(2, HI).unwrap();
        assert!(rel(&t2, &ExtReal::from_u64(5, HI).sqrt()) < two_pow(-250, HI));
        let t12 = tan_product(12, P).unwrap();
        assert!(rel(&t12, &ExtReal::from_u64(5, P)) < two_pow(16 - 128, P));
        assert!(tan_product(0, P).is_err());
    }

    #[test]
    fn sin_small_cases() {
        assert_eq!(sin_product(2, P).unwrap(), ExtReal::one(P));
        let s3 = sin_product(3, P).unwrap();
        assert!(rel(&s3, &ExtReal::from_ratio(3, 4, P)) < two_pow(-125, P));
        let s6 = sin_product(6, P).unwrap();
        assert!(rel(&s6, &ExtReal::from_ratio(6, 32, P)) < two_pow(-124, P));
        assert!((s6.to_f64() - 0.1875).abs() < 1e-16);
        assert!(matches!(sin_product(1, P), Err(Error::InvalidParameter(_))));
    }

    #[test]
    fn half_sin_small_cases() {
        assert_eq!(half_sin_sq_product(2, P).unwrap(), ExtReal::one(P));
        let h3 = half_sin_sq_product(3, P).unwrap();
        assert!(rel(&h3, &ExtReal::from_ratio(3, 4, P)) < two_pow(-125, P));
        let h8 = half_sin_sq_product(8, P).unwrap();
        assert!(rel(&h8, &ExtReal::from_ratio(1, 16, P)) < two_pow(-123, P));
        assert!(half_sin_sq_product(1, P).is_err());
    }

    #[test]
    fn cos_small_cases() {
        // cos²(π/4)·cos²(0)
        let c4 = cos_sq_product(4, P).unwrap();
        assert!(rel(&c4, &ExtReal::from_ratio(1, 2, P)) < two_pow(-125, P));
        assert_eq!(cos_sq_product(2, P).unwrap(), ExtReal::one(P));
        let c5 = cos_sq_product(5, P).unwrap();
        assert!(rel(&c5, &ExtReal::from_ratio(5, 16, P)) < two_pow(-124, P));
        assert!(cos_sq_product(0, P).is_err());
    }

    #[test]
    fn shifted_small_cases() {
        let theta = ExtReal::from_ratio(7, 10, P);
        assert_eq!(shifted_sin_product(1, &theta, P).unwrap(), theta.sin());

        let quarter = const_pi(P).mul_pow2(-2);
        let s = shifted_sin_product(2, &quarter, P).unwrap();
        assert!(rel(&s, &ExtReal::from_ratio(1, 2, P)) < two_pow(-125, P));

        let eighth = const_pi(HI).mul_pow2(-3);
        let s = shifted_sin_product(4, &eighth, HI).unwrap();
        assert!(rel(&s, &ExtReal::from_ratio(1, 8, HI)) < two_pow(-250, HI));
    }

    #[test]
    fn shifted_reports_offending_factor() {
        // θ = 0 makes the n = 0 factor vanish
        let err = shifted_sin_product(5, &ExtReal::zero(P), P).unwrap_err();
        assert_eq!(err, Error::NearSingularProduct { n: 0, threshold_bits: 64 });
        // θ = -2π/5 hits n = 2
        let theta = -(const_pi(P) * 2u64 / 5u64);
        let err = shifted_sin_product(5, &theta, P).unwrap_err();
        assert!(matches!(err, Error::NearSingularProduct { n: 2, .. }));
    }

    #[test]
    fn check_identity_examples() {
        let tan3 = check_identity(&IdentityCase::new(Family::TanProduct, 3, None).unwrap(), P).unwrap();
        assert!(tan3.relative_residual < two_pow(-100, P));
        let oracle = tan_product(3, HI).unwrap();
        assert!(rel(&oracle, &ExtReal::from_u64(7, HI).sqrt()) < two_pow(-240, HI));

        let sin2 = check_identity(&IdentityCase::new(Family::SinProduct, 2, None).unwrap(), P).unwrap();
        assert!(sin2.relative_residual <= ExtReal::one(P).ulp());

        let theta = ExtReal::from_ratio(3, 10, P);
        let case = IdentityCase::new(Family::ShiftedSinProduct, 5, Some(theta)).unwrap();
        let r = check_identity(&case, P).unwrap();
        assert!(r.relative_residual < two_pow(-100, P));
        let closed = ExtReal::from_ratio(3, 2, HI).sin().mul_pow2(-4);
        assert!(rel(&r.closed_form.with_precision(HI), &closed) < two_pow(-120, HI));
        assert!(r.passes());
    }

    #[test]
    fn case_invariants() {
        let t = Some(ExtReal::one(P));
        assert!(IdentityCase::new(Family::SinProduct, 5, t.clone()).is_err());
        assert!(IdentityCase::new(Family::ShiftedSinProduct, 5, None).is_err());
        assert!(IdentityCase::new(Family::ShiftedSinProduct, 5, t).is_ok());
        assert!(IdentityCase::new(Family::HalfSinSqProduct, 1, None).is_err());
        assert!(IdentityCase::new(Family::TanProduct, 1, None).is_ok());
    }

    #[test]
    fn family_names_round_trip() {
        for f in Family::ALL {
            assert_eq!(f.name().parse::<Family>().unwrap(), f);
        }
        assert!("cot".parse::<Family>().is_err());
    }

    #[test]
    fn half_sin_equals_cos_bitwise_small_range() {
        for n in 2..300 {
            assert_eq!(half_sin_sq_product(n, P).unwrap(), cos_sq_product(n, P).unwrap());
        }
    }

    #[test]
    fn closed_form_survives_double_underflow() {
        // 2000 / 2^1999 is far below the smallest double
        let r = check_identity(&IdentityCase::new(Family::SinProduct, 2000, None).unwrap(), P).unwrap();
        assert_eq!(r.closed_form.to_f64(), 0.0);
        assert!(r.passes());
        assert!(r.relative_residual < two_pow(-100, P));
    }

    #[test]
    fn sampled_thetas_are_deterministic_and_clear_of_zeros() {
        let a = sample_shifted_thetas(37, 10, 7, P);
        let b = sample_shifted_thetas(37, 10, 7, P);
        assert_eq!(a, b);
        for t in &a {
            let phase = (37.0 * t.to_f64() / std::f64::consts::PI).rem_euclid(1.0);
            assert!((0.05..=0.95).contains(&phase));
        }
    }
}
