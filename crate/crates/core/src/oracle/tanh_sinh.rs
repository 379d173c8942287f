//! Double-exponential (tanh-sinh) quadrature on a finite interval.
//!
//! With `x = c + r·tanh(π/2 · sinh t)` the integrand's endpoint behaviour is
//! pushed to doubly-exponentially small weights, so logarithmic endpoint
//! singularities cost nothing special. Level `ℓ` is the trapezoidal rule in
//! `t` with step `2^-ℓ`; each level reuses every node of the previous one.
//!
//! Nodes are never formed as absolute abscissas alone: each carries the
//! nearer interval end and the signed offset from it, computed without
//! cancellation, so an integrand can resolve distances far below the ulp of
//! the endpoint.

use std::fmt;
use std::sync::Arc;

use rayon::prelude::*;
use rug::float::Constant;
use rug::Float;

use crate::error::{Error, Result};
use crate::numerics::{ExtReal, Precision, SumAccumulator};

/// Bits carried by node geometry and integrand evaluation beyond the
/// caller's precision.
pub const NODE_GUARD_BITS: u32 = 64;

/// Refinement stops with an error after this level.
pub const MAX_LEVEL: u32 = 12;

/// Two successive levels must agree at or beyond this level before the
/// result is accepted; coarser steps can agree by accident.
pub const MIN_LEVEL: u32 = 3;

/// A quadrature node, seen from the nearer end of its interval.
#[derive(Clone, Debug)]
pub struct Node {
    anchor: ExtReal,
    offset: ExtReal,
    x: ExtReal,
}

impl Node {
    /// The interval end closest to this node.
    pub fn anchor(&self) -> &ExtReal {
        &self.anchor
    }

    /// Signed distance from [`Node::anchor`]: positive from the lower end,
    /// negative from the upper end.
    pub fn offset(&self) -> &ExtReal {
        &self.offset
    }

    /// `anchor + offset`, rounded.
    pub fn x(&self) -> &ExtReal {
        &self.x
    }
}

/// Which interval ends carry a singularity.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq)]
pub struct SingularEnds {
    pub lower: bool,
    pub upper: bool,
}

impl SingularEnds {
    pub const NONE: SingularEnds = SingularEnds { lower: false, upper: false };
    pub const BOTH: SingularEnds = SingularEnds { lower: true, upper: true };
    pub const LOWER: SingularEnds = SingularEnds { lower: true, upper: false };
    pub const UPPER: SingularEnds = SingularEnds { lower: false, upper: true };
}

pub type Integrand = Arc<dyn Fn(&Node) -> ExtReal + Send + Sync>;

/// An integrand on `[lower, upper]`. The evaluation must be finite at every
/// strict interior point.
#[derive(Clone)]
pub struct IntegrandSpec {
    label: String,
    lower: ExtReal,
    upper: ExtReal,
    singular_ends: SingularEnds,
    eval: Integrand,
}

impl fmt::Debug for IntegrandSpec {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("IntegrandSpec")
            .field("label", &self.label)
            .field("lower", &self.lower)
            .field("upper", &self.upper)
            .field("singular_ends", &self.singular_ends)
            .finish_non_exhaustive()
    }
}

impl IntegrandSpec {
    pub fn new(
        label: impl Into<String>,
        lower: ExtReal,
        upper: ExtReal,
        singular_ends: SingularEnds,
        eval: impl Fn(&Node) -> ExtReal + Send + Sync + 'static,
    ) -> Result<Self> {
        if !lower.is_finite() || !upper.is_finite() {
            return Err(Error::InvalidParameter("interval ends must be finite".into()));
        }
        if lower >= upper {
            return Err(Error::InvalidParameter(format!(
                "empty interval [{}, {}]",
                lower.to_f64(),
                upper.to_f64()
            )));
        }
        Ok(IntegrandSpec {
            label: label.into(),
            lower,
            upper,
            singular_ends,
            eval: Arc::new(eval),
        })
    }

    pub fn label(&self) -> &str {
        &self.label
    }

    pub fn lower(&self) -> &ExtReal {
        &self.lower
    }

    pub fn upper(&self) -> &ExtReal {
        &self.upper
    }

    pub fn singular_ends(&self) -> SingularEnds {
        self.singular_ends
    }

    /// Evaluates at an interior point given as an absolute abscissa,
    /// anchored at the nearer end.
    pub fn evaluate_at(&self, x: &ExtReal) -> ExtReal {
        let from_lower = x - &self.lower;
        let from_upper = x - &self.upper;
        let (anchor, offset) = if from_lower.abs() <= from_upper.abs() {
            (self.lower.clone(), from_lower)
        } else {
            (self.upper.clone(), from_upper)
        };
        (self.eval)(&Node {
            anchor,
            offset,
            x: x.clone(),
        })
    }

    /// Same integrand on a sub-interval. Ends that are new cut points are
    /// marked singular.
    fn restricted(&self, lower: ExtReal, upper: ExtReal) -> IntegrandSpec {
        let singular_ends = SingularEnds {
            lower: if lower == self.lower { self.singular_ends.lower } else { true },
            upper: if upper == self.upper { self.singular_ends.upper } else { true },
        };
        IntegrandSpec {
            label: self.label.clone(),
            lower,
            upper,
            singular_ends,
            eval: Arc::clone(&self.eval),
        }
    }
}

/// Splits `spec` at the given interior points. The pieces cover the
/// original interval in order; an empty list returns `spec` unchanged.
pub fn split_at_interior_singularity(spec: &IntegrandSpec, points: &[ExtReal]) -> Result<Vec<IntegrandSpec>> {
    for p in points {
        if !(p > spec.lower() && p < spec.upper()) {
            return Err(Error::InvalidSplit(format!(
                "split point {} is not strictly inside [{}, {}]",
                p.to_f64(),
                spec.lower().to_f64(),
                spec.upper().to_f64()
            )));
        }
    }
    if points.windows(2).any(|w| w[0] >= w[1]) {
        return Err(Error::InvalidSplit("split points must be strictly increasing".into()));
    }
    let mut ends: Vec<ExtReal> = Vec::with_capacity(points.len() + 2);
    ends.push(spec.lower.clone());
    ends.extend(points.iter().cloned());
    ends.push(spec.upper.clone());
    Ok(ends
        .windows(2)
        .map(|w| spec.restricted(w[0].clone(), w[1].clone()))
        .collect())
}

#[derive(Clone, Debug, PartialEq)]
pub struct QuadratureResult {
    pub value: ExtReal,
    /// Absolute; difference between the last two levels.
    pub error_estimate: ExtReal,
    pub node_count: u64,
    pub level: u32,
}

/// One refinement level: the estimate after it and its difference from the
/// previous level (zero reported for level 0, which has no predecessor).
#[derive(Clone, Debug, PartialEq)]
pub struct LevelEstimate {
    pub level: u32,
    pub value: ExtReal,
    pub error_estimate: ExtReal,
    pub node_count: u64,
}

/// Natural log of the transformed weight `π/2 · cosh t / cosh²(π/2 · sinh t)`.
fn ln_weight(t: f64) -> f64 {
    let ln_cosh = |y: f64| y.abs() + (-2.0 * y.abs()).exp().ln_1p() - std::f64::consts::LN_2;
    let u = std::f64::consts::FRAC_PI_2 * t.sinh();
    std::f64::consts::FRAC_PI_2.ln() + ln_cosh(t) - 2.0 * ln_cosh(u)
}

/// Largest `t` kept at precision `prec`: beyond it the transformed weight
/// is below `2^(-p-10)`.
pub fn cutoff(prec: Precision) -> f64 {
    let target = -(f64::from(prec.bits()) + 10.0) * std::f64::consts::LN_2;
    let (mut lo, mut hi) = (0.0f64, 1.0f64);
    while ln_weight(hi) >= target {
        hi *= 2.0;
    }
    for _ in 0..100 {
        let mid = 0.5 * (lo + hi);
        if ln_weight(mid) >= target {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    lo
}

/// Upper bound on nodes evaluated through `level` for one interval.
pub fn node_bound(level: u32, prec: Precision) -> u64 {
    (1u64 << (level + 1)) * cutoff(prec).ceil() as u64 + 1
}

struct Geometry {
    wp: u32,
    lower: Float,
    upper: Float,
    half_len: Float,
    half_pi: Float,
}

impl Geometry {
    fn new(spec: &IntegrandSpec, wp: u32) -> Self {
        let lower = Float::with_val(wp, spec.lower.as_float());
        let upper = Float::with_val(wp, spec.upper.as_float());
        let half_len = Float::with_val(wp, &upper - &lower) / 2u32;
        let half_pi = Float::with_val(wp, Constant::Pi) / 2u32;
        Geometry {
            wp,
            lower,
            upper,
            half_len,
            half_pi,
        }
    }

    /// The node at `t` and its weight (including the half length).
    fn node(&self, t: f64) -> (Node, Float) {
        let wp = self.wp;
        let tf = Float::with_val(wp, t);
        let u = Float::with_val(wp, tf.sinh_ref()) * &self.half_pi;
        // e = exp(-2|u|); distance to the nearer end is r·2e/(1+e)
        let e = Float::with_val(wp, -(u.abs() * 2u32)).exp();
        let one_plus = Float::with_val(wp, &e + 1u32);
        let near = Float::with_val(wp, &self.half_len * &e) * 2u32 / &one_plus;
        // r · π/2 · cosh t · sech² u, with sech² u = 4e/(1+e)²
        let weight = Float::with_val(wp, &self.half_len * &self.half_pi)
            * Float::with_val(wp, tf.cosh_ref())
            * (e * 4u32)
            / one_plus.square();
        let (anchor, offset) = if t > 0.0 {
            (self.upper.clone(), -near)
        } else if t < 0.0 {
            (self.lower.clone(), near)
        } else {
            (self.lower.clone(), self.half_len.clone())
        };
        let x = Float::with_val(wp, &anchor + &offset);
        let node = Node {
            anchor: ExtReal::from_float(anchor),
            offset: ExtReal::from_float(offset),
            x: ExtReal::from_float(x),
        };
        (node, weight)
    }
}

/// Level-by-level tanh-sinh refinement, yielding one estimate per level.
struct Refinement<'a> {
    spec: &'a IntegrandSpec,
    geometry: Geometry,
    t_max: f64,
    weighted_sum: SumAccumulator,
    level: u32,
    node_count: u64,
    previous: Option<ExtReal>,
    prec: Precision,
}

impl<'a> Refinement<'a> {
    fn new(spec: &'a IntegrandSpec, prec: Precision) -> Self {
        let wp = prec.with_guard(NODE_GUARD_BITS);
        Refinement {
            spec,
            geometry: Geometry::new(spec, wp.bits()),
            t_max: cutoff(prec),
            weighted_sum: SumAccumulator::new(wp),
            level: 0,
            node_count: 0,
            previous: None,
            prec,
        }
    }

    fn step(&mut self) -> Result<LevelEstimate> {
        let level = self.level;
        let h = (-(level as f64)).exp2();
        let k_max = (self.t_max / h).floor() as i64;
        // level 0 takes every integer k; later levels only the new odd ones
        let ks: Vec<i64> = if level == 0 {
            (-k_max..=k_max).collect()
        } else {
            (-k_max..=k_max).filter(|k| k % 2 != 0).collect()
        };
        let terms: Vec<Result<Float>> = ks
            .par_iter()
            .map(|&k| {
                let (node, weight) = self.geometry.node(k as f64 * h);
                let f = (self.spec.eval)(&node);
                if !f.is_finite() {
                    return Err(Error::BadIntegrand {
                        x: node.x.to_decimal_string(20),
                    });
                }
                Ok(weight * f.as_float())
            })
            .collect();
        for term in terms {
            self.weighted_sum.add(&ExtReal::from_float(term?))?;
        }
        self.node_count += ks.len() as u64;

        let value = self.weighted_sum.total().mul_pow2(-(level as i32));
        let error_estimate = match &self.previous {
            Some(prev) => (&value - prev).abs(),
            None => ExtReal::zero(value.precision()),
        };
        self.previous = Some(value.clone());
        self.level += 1;
        Ok(LevelEstimate {
            level,
            value: value.with_precision(self.prec),
            error_estimate: error_estimate.with_precision(self.prec),
            node_count: self.node_count,
        })
    }
}

fn check_tolerance(abs_tol: &ExtReal, prec: Precision) -> Result<()> {
    let floor = ExtReal::one(prec).mul_pow2(16 - prec.bits() as i32);
    if !abs_tol.is_finite() || *abs_tol <= floor {
        return Err(Error::InvalidParameter(format!(
            "abs_tol must exceed 2^(16-{}) at this precision",
            prec.bits()
        )));
    }
    Ok(())
}

/// Estimates for levels `0..=max_level` without any stopping rule.
pub fn tanh_sinh_levels(spec: &IntegrandSpec, max_level: u32, prec: Precision) -> Result<Vec<LevelEstimate>> {
    let mut refinement = Refinement::new(spec, prec);
    (0..=max_level).map(|_| refinement.step()).collect()
}

/// Integrates `spec` until two successive levels (the later at least
/// [`MIN_LEVEL`]) agree within `abs_tol`.
pub fn tanh_sinh_integrate(spec: &IntegrandSpec, abs_tol: &ExtReal, prec: Precision) -> Result<QuadratureResult> {
    check_tolerance(abs_tol, prec)?;
    let mut refinement = Refinement::new(spec, prec);
    loop {
        let est = refinement.step()?;
        if est.level >= MIN_LEVEL && est.error_estimate <= *abs_tol {
            return Ok(QuadratureResult {
                value: est.value,
                error_estimate: est.error_estimate,
                node_count: est.node_count,
                level: est.level,
            });
        }
        if est.level >= MAX_LEVEL {
            return Err(Error::NoConvergence {
                level: est.level,
                best: est.value.to_decimal(),
                estimate: est.error_estimate.to_decimal(),
            });
        }
    }
}

/// Integrates each piece with an equal share of `abs_tol` and adds the
/// results. Node counts add; the reported level is the deepest reached.
pub fn integrate_pieces(pieces: &[IntegrandSpec], abs_tol: &ExtReal, prec: Precision) -> Result<QuadratureResult> {
    if pieces.is_empty() {
        return Err(Error::InvalidParameter("nothing to integrate".into()));
    }
    check_tolerance(abs_tol, prec)?;
    let share = abs_tol / pieces.len() as u64;
    let mut value = SumAccumulator::new(prec);
    let mut error_estimate = ExtReal::zero(prec);
    let mut node_count = 0;
    let mut level = 0;
    for piece in pieces {
        let r = tanh_sinh_integrate(piece, &share, prec)?;
        value.add(&r.value)?;
        error_estimate = error_estimate + r.error_estimate;
        node_count += r.node_count;
        level = level.max(r.level);
    }
    Ok(QuadratureResult {
        value: value.total(),
        error_estimate,
        node_count,
        level,
    })
}
