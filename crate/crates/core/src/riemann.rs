//! Log-sums of the trigonometric products read as Riemann sums.
//!
//! Every product identity turns, after taking logarithms, into a finite sum
//! whose value is known exactly for each N. Dividing by the grid spacing gives
//! a Riemann sum for an improper integral plus a residual that is also known
//! exactly, e.g. for the full-range sine
//!
//! ```text
//! Σ_{n=1}^{N-1} ln sin(π n/N) · 1/(N-1) = ln N/(N-1) − ln 2
//! ```
//!
//! The grid is `x_n = n/N` with spacing `1/(N-1)`; the points and the spacing
//! do not match as in a textbook partition, but this choice is what makes the
//! residual exact. Sums are scaled by the interval length so that
//! [`RiemannRecord::sum_value`] estimates the integral over θ directly.

use std::fmt;
use std::str::FromStr;

use rayon::prelude::*;

use crate::error::{Error, Result};
use crate::numerics::{const_ln2, const_pi, lngamma_at, ExtReal, PiMultiples, Precision, SumAccumulator};

/// The integrals evaluated by this crate.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum TargetId {
    /// ∫₀^π ln sin θ dθ
    LogSin0Pi,
    /// ∫₀^{π/2} ln sin θ dθ
    LogSin0HalfPi,
    /// ∫₀^{π/2} ln cos θ dθ
    LogCos0HalfPi,
    /// ∫₀^{π/2} ln tan θ dθ
    LogTan0HalfPi,
    /// ∫₀¹ ln Γ(x) dx
    LogGamma01,
    /// ∫₀¹ ln|sin(πx + θ)| dx
    LogAbsSinShifted,
}

impl TargetId {
    pub const ALL: [TargetId; 6] = [
        TargetId::LogSin0Pi,
        TargetId::LogSin0HalfPi,
        TargetId::LogCos0HalfPi,
        TargetId::LogTan0HalfPi,
        TargetId::LogGamma01,
        TargetId::LogAbsSinShifted,
    ];

    /// Targets with a Riemann-sum route; the shifted one is checked only by
    /// quadrature.
    pub const PRODUCT_BASED: [TargetId; 5] = [
        TargetId::LogSin0Pi,
        TargetId::LogSin0HalfPi,
        TargetId::LogCos0HalfPi,
        TargetId::LogTan0HalfPi,
        TargetId::LogGamma01,
    ];

    pub fn name(self) -> &'static str {
        match self {
            TargetId::LogSin0Pi => "log-sin-0-pi",
            TargetId::LogSin0HalfPi => "log-sin-0-halfpi",
            TargetId::LogCos0HalfPi => "log-cos-0-halfpi",
            TargetId::LogTan0HalfPi => "log-tan-0-halfpi",
            TargetId::LogGamma01 => "log-gamma-0-1",
            TargetId::LogAbsSinShifted => "log-abs-sin-shifted",
        }
    }

    pub fn is_product_based(self) -> bool {
        self != TargetId::LogAbsSinShifted
    }

    pub fn needs_theta(self) -> bool {
        self == TargetId::LogAbsSinShifted
    }
}

impl fmt::Display for TargetId {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for TargetId {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        TargetId::ALL
            .into_iter()
            .find(|t| t.name() == s)
            .ok_or_else(|| Error::InvalidParameter(format!("unknown target '{s}'")))
    }
}

/// An integral with its interval and closed-form value.
#[derive(Clone, Debug, PartialEq)]
pub struct IntegralTarget {
    id: TargetId,
    lower: ExtReal,
    upper: ExtReal,
    closed_form: ExtReal,
    theta: Option<ExtReal>,
}

impl IntegralTarget {
    /// Builds the registry entry for `id`. `theta` must be given for the
    /// shifted target and only for it.
    pub fn new(id: TargetId, theta: Option<ExtReal>, prec: Precision) -> Result<Self> {
        match (id.needs_theta(), &theta) {
            (true, None) => {
                return Err(Error::InvalidParameter(format!("{id} requires theta")));
            }
            (false, Some(_)) => {
                return Err(Error::InvalidParameter(format!("{id} takes no theta")));
            }
            (_, Some(t)) if !t.is_finite() => {
                return Err(Error::InvalidParameter("theta must be finite".into()));
            }
            _ => {}
        }
        let pi = const_pi(prec);
        let ln2 = const_ln2(prec);
        let zero = ExtReal::zero(prec);
        let one = ExtReal::one(prec);
        let half_pi = pi.mul_pow2(-1);
        let (lower, upper, closed_form) = match id {
            TargetId::LogSin0Pi => (zero, pi.clone(), -(&pi * &ln2)),
            TargetId::LogSin0HalfPi | TargetId::LogCos0HalfPi => {
                (zero, half_pi.clone(), -(&half_pi * &ln2))
            }
            TargetId::LogTan0HalfPi => (zero.clone(), half_pi, zero),
            TargetId::LogGamma01 => (zero, one, pi.mul_pow2(1).ln().mul_pow2(-1)),
            TargetId::LogAbsSinShifted => (zero, one, -ln2),
        };
        Ok(IntegralTarget {
            id,
            lower,
            upper,
            closed_form,
            theta,
        })
    }

    /// The shifted target for a given θ.
    pub fn shifted(theta: ExtReal, prec: Precision) -> Result<Self> {
        IntegralTarget::new(TargetId::LogAbsSinShifted, Some(theta), prec)
    }

    pub fn id(&self) -> TargetId {
        self.id
    }

    pub fn lower(&self) -> &ExtReal {
        &self.lower
    }

    pub fn upper(&self) -> &ExtReal {
        &self.upper
    }

    pub fn closed_form(&self) -> &ExtReal {
        &self.closed_form
    }

    pub fn theta(&self) -> Option<&ExtReal> {
        self.theta.as_ref()
    }

    pub fn precision(&self) -> Precision {
        self.closed_form.precision()
    }
}

/// One finite-N evaluation of a target's Riemann sum.
#[derive(Clone, Debug, PartialEq)]
pub struct RiemannRecord {
    pub n_param: u64,
    pub sum_value: ExtReal,
    pub predicted_residual: ExtReal,
    /// `sum_value − closed_form`.
    pub observed_error: ExtReal,
    /// Largest scaled summand, which sets the rounding scale of the sum.
    pub max_abs_term: ExtReal,
}

impl RiemannRecord {
    /// Allowed gap between observed and predicted residual:
    /// `2^(24-p) · N · max_abs_term`.
    pub fn residual_law_bound(&self) -> ExtReal {
        let p = self.sum_value.precision();
        (&self.max_abs_term * self.n_param).mul_pow2(24 - p.bits() as i32)
    }

    pub fn residual_gap(&self) -> ExtReal {
        (&self.observed_error - &self.predicted_residual).abs()
    }

    pub fn residual_law_holds(&self) -> bool {
        self.residual_gap() < self.residual_law_bound()
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct ConvergenceReport {
    pub target: IntegralTarget,
    /// Strictly increasing in `n_param`.
    pub records: Vec<RiemannRecord>,
    pub extrapolated_limit: ExtReal,
    /// `|extrapolated_limit − closed_form|`.
    pub extrapolation_error: ExtReal,
    /// False when only one record was available, in which case the limit is
    /// that record's `sum_value` unchanged.
    pub fitted: bool,
}

/// Terms are produced in parallel blocks of this size and then added in
/// ascending order, so the result does not depend on scheduling.
const BLOCK: u64 = 1 << 14;

/// Compensated sum of `term(n)` for n in `first..=last`, ascending, with the
/// largest |term|.
fn ordered_sum<F>(first: u64, last: u64, prec: Precision, term: F) -> Result<(ExtReal, ExtReal)>
where
    F: Fn(u64) -> ExtReal + Sync,
{
    let mut acc = SumAccumulator::new(prec);
    let mut largest = ExtReal::zero(prec);
    let mut start = first;
    while start <= last {
        let end = last.min(start.saturating_add(BLOCK - 1));
        let block: Vec<ExtReal> = (start..=end).into_par_iter().map(&term).collect();
        for t in &block {
            acc.add(t)?;
            largest = largest.max(t.abs());
        }
        if end == u64::MAX {
            break;
        }
        start = end + 1;
    }
    Ok((acc.total(), largest))
}

fn require(cond: bool, msg: impl FnOnce() -> String) -> Result<()> {
    if cond {
        Ok(())
    } else {
        Err(Error::InvalidParameter(msg()))
    }
}

fn check_grid_size(n: u64) -> Result<()> {
    require(n <= i64::MAX as u64 / 4, || format!("N = {n} is too large"))
}

/// Σ_{n=1}^{N-1} ln sin(πn/N) by compensated summation. Equals
/// `ln N − (N−1) ln 2` exactly.
pub fn log_sin_sum(n: u64, prec: Precision) -> Result<ExtReal> {
    require(n >= 2, || format!("log-sine sum requires N >= 2, got {n}"))?;
    check_grid_size(n)?;
    let grid = PiMultiples::new(prec);
    Ok(ordered_sum(1, n - 1, prec, |k| grid.sin(k as i64, n).ln())?.0)
}

/// `ln N − (N−1) ln 2`.
pub fn log_sin_sum_exact(n: u64, prec: Precision) -> ExtReal {
    ExtReal::from_u64(n, prec).ln() - const_ln2(prec) * (n - 1)
}

/// Σ_{n=1}^{N-1} ln(π / sin(πn/N)). Equals `(N−1) ln(2π) − ln N` exactly.
pub fn gamma_reflection_sum(n: u64, prec: Precision) -> Result<ExtReal> {
    require(n >= 3, || format!("reflection sum requires N >= 3, got {n}"))?;
    check_grid_size(n)?;
    let grid = PiMultiples::new(prec);
    let pi = const_pi(prec);
    Ok(ordered_sum(1, n - 1, prec, |k| reflection_term(&grid, &pi, k, n))?.0)
}

fn reflection_term(grid: &PiMultiples, pi: &ExtReal, k: u64, n: u64) -> ExtReal {
    (pi / grid.sin(k as i64, n)).ln()
}

/// The reflection sum evaluated through ln Γ instead of the sine:
/// Σ_{n=1}^{N-1} [ln Γ(n/N) + ln Γ(1 − n/N)].
pub fn gamma_reflection_sum_via_lngamma(n: u64, prec: Precision) -> Result<ExtReal> {
    require(n >= 3, || format!("reflection sum requires N >= 3, got {n}"))?;
    check_grid_size(n)?;
    let wide = prec.with_guard(32);
    let lg = |k: u64| -> Result<ExtReal> { lngamma_at(&ExtReal::from_ratio(k as i64, n, wide), prec) };
    let terms: Vec<ExtReal> = (1..n)
        .into_par_iter()
        .map(|k| Ok(lg(k)? + lg(n - k)?))
        .collect::<Result<_>>()?;
    let mut acc = SumAccumulator::new(prec);
    for t in &terms {
        acc.add(t)?;
    }
    Ok(acc.total())
}

/// Plain Riemann sum Σ_{n=1}^{N-1} ln Γ(n/N) / (N−1). By the n ↦ N−n pairing
/// it equals the half reflection sum used for [`TargetId::LogGamma01`].
pub fn lngamma_riemann_sum(n: u64, prec: Precision) -> Result<ExtReal> {
    require(n >= 3, || format!("ln-gamma sum requires N >= 3, got {n}"))?;
    check_grid_size(n)?;
    let wide = prec.with_guard(32);
    let terms: Vec<ExtReal> = (1..n)
        .into_par_iter()
        .map(|k| lngamma_at(&ExtReal::from_ratio(k as i64, n, wide), prec))
        .collect::<Result<_>>()?;
    let mut acc = SumAccumulator::new(prec);
    for t in &terms {
        acc.add(t)?;
    }
    Ok(acc.total() / (n - 1))
}

/// Shape of the residual as a function of the grid parameter:
/// `ln M / M` for the tangent target, `ln N / (N−1)` otherwise.
fn residual_shape(id: TargetId, n: u64, prec: Precision) -> ExtReal {
    let ln_n = ExtReal::from_u64(n, prec).ln();
    match id {
        TargetId::LogTan0HalfPi => ln_n / n,
        _ => ln_n / (n - 1),
    }
}

/// Evaluates the finite-N sum for a product-based target. For
/// [`TargetId::LogTan0HalfPi`] `n` is the odd grid size M.
pub fn riemann_sum(target: &IntegralTarget, n: u64, prec: Precision) -> Result<RiemannRecord> {
    let id = target.id();
    require(id.is_product_based(), || {
        format!("{id} has no Riemann-sum route; use the quadrature oracle")
    })?;
    require(n >= 3, || format!("{id} requires N >= 3, got {n}"))?;
    check_grid_size(n)?;
    if id == TargetId::LogTan0HalfPi {
        require(n % 2 == 1, || format!("{id} requires odd M, got {n}"))?;
    }

    let grid = PiMultiples::new(prec);
    let pi = const_pi(prec);
    let shape = residual_shape(id, n, prec);
    let (raw, largest, scale, predicted) = match id {
        TargetId::LogSin0Pi => {
            let (s, m) = ordered_sum(1, n - 1, prec, |k| grid.sin(k as i64, n).ln())?;
            (s, m, &pi / ExtReal::from_u64(n - 1, prec), &pi * &shape)
        }
        TargetId::LogSin0HalfPi => {
            let (s, m) = ordered_sum(1, n / 2, prec, |k| grid.sin(k as i64, n).ln())?;
            (s, m, &pi / ExtReal::from_u64(n - 1, prec), (&pi * &shape).mul_pow2(-1))
        }
        TargetId::LogCos0HalfPi => {
            // cos(π/2 − πk/N) = cos(π(N − 2k)/(2N))
            let (s, m) = ordered_sum(1, n / 2, prec, |k| {
                grid.cos(n as i64 - 2 * k as i64, 2 * n).ln()
            })?;
            (s, m, &pi / ExtReal::from_u64(n - 1, prec), (&pi * &shape).mul_pow2(-1))
        }
        TargetId::LogTan0HalfPi => {
            let (s, m) = ordered_sum(1, (n - 1) / 2, prec, |k| {
                grid.tan(k as i64, n).expect("k < M/2 is never a pole").ln()
            })?;
            (s, m, &pi / ExtReal::from_u64(n, prec), (&pi * &shape).mul_pow2(-1))
        }
        TargetId::LogGamma01 => {
            let (s, m) = ordered_sum(1, n - 1, prec, |k| reflection_term(&grid, &pi, k, n))?;
            let scale = ExtReal::one(prec) / ExtReal::from_u64(2 * (n - 1), prec);
            (s, m, scale, -shape.mul_pow2(-1))
        }
        TargetId::LogAbsSinShifted => unreachable!(),
    };
    let sum_value = &raw * &scale;
    let observed_error = &sum_value - target.closed_form().with_precision(prec);
    Ok(RiemannRecord {
        n_param: n,
        sum_value,
        predicted_residual: predicted,
        observed_error,
        max_abs_term: largest * scale.abs(),
    })
}

/// Runs [`riemann_sum`] over `n_list` and extrapolates the limit by fitting
/// `L + c·shape(N)` through the two largest grids, where `shape` is the
/// known residual form.
pub fn converge(target: &IntegralTarget, n_list: &[u64], prec: Precision) -> Result<ConvergenceReport> {
    require(!n_list.is_empty(), || "n_list must not be empty".into())?;
    require(n_list.windows(2).all(|w| w[0] < w[1]), || {
        format!("n_list must be strictly ascending, got {n_list:?}")
    })?;
    let mut records: Vec<RiemannRecord> = n_list
        .par_iter()
        .map(|&n| riemann_sum(target, n, prec))
        .collect::<Result<_>>()?;
    records.sort_by_key(|r| r.n_param);

    let (extrapolated_limit, fitted) = match records.as_slice() {
        [.., a, b] => {
            let ga = residual_shape(target.id(), a.n_param, prec);
            let gb = residual_shape(target.id(), b.n_param, prec);
            let slope = (&b.sum_value - &a.sum_value) / (&gb - &ga);
            (&b.sum_value - slope * &gb, true)
        }
        [only] => (only.sum_value.clone(), false),
        [] => unreachable!(),
    };
    let extrapolation_error = (&extrapolated_limit - target.closed_form().with_precision(prec)).abs();
    Ok(ConvergenceReport {
        target: target.clone(),
        records,
        extrapolated_limit,
        extrapolation_error,
        fitted,
    })
}
