//! Certified real arithmetic.
//!
//! [`CReal`] is a closed interval with exact dyadic endpoints; every
//! operation rounds outward, so an inequality decided on the endpoints holds
//! for the exact value. [`AlgebraicConstants`] collects the enclosures of the
//! characteristic roots and Binet coefficients that the rest of the crate
//! consumes.

mod constants;
mod dyadic;
mod elementary;
mod interval;
mod poly;

pub use constants::{AlgebraicConstants, RadicalCrossCheck};
pub use dyadic::{Dyadic, Round};
pub use elementary::ln2;
pub use interval::{parse_decimal, CReal, Enclosure, MIN_PREC};
pub use poly::{isolate_real_root, IntPoly};

use serde::{Deserialize, Serialize};
use thiserror::Error;

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum MpError {
    #[error("divisor enclosure contains zero")]
    DivisorStraddlesZero,
    #[error("{op}: argument outside the domain ({detail})")]
    Domain { op: &'static str, detail: String },
    #[error("polynomial has no sign change on the bracket")]
    NoSignChange,
    #[error("derivative may vanish on the bracket; root may not be simple or unique")]
    MultipleRootsSuspected,
    #[error("enclosure too wide to locate the nearest integer")]
    TooWide,
    #[error("target not reached at the maximum precision of {bits} bits (best width {best_width})")]
    PrecisionExhausted { bits: u32, best_width: String, best: Box<CReal> },
    #[error("cannot parse decimal literal {0:?}")]
    Parse(String),
}

/// Adaptive precision schedule: start at `initial` bits and multiply by
/// `factor` until a computation succeeds or `max` is exceeded.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct PrecisionPolicy {
    pub initial: u32,
    pub max: u32,
    pub factor: u32,
}

impl Default for PrecisionPolicy {
    fn default() -> Self {
        PrecisionPolicy { initial: 1024, max: 65536, factor: 2 }
    }
}

impl PrecisionPolicy {
    pub fn with_max(mut self, max: u32) -> Self {
        self.max = max.max(MIN_PREC);
        self.initial = self.initial.min(self.max);
        self
    }

    /// Precisions to try, in order: `initial`, `initial*factor`, ... up to `max`.
    pub fn schedule(&self) -> Vec<u32> {
        let mut out = Vec::new();
        let mut p = self.initial.clamp(MIN_PREC, self.max.max(MIN_PREC));
        let factor = self.factor.max(2);
        loop {
            out.push(p);
            if p >= self.max {
                break;
            }
            p = p.saturating_mul(factor).min(self.max);
        }
        out
    }
}

/// Distance from `x` to the nearest integer, as an enclosure in `[0, 1/2]`.
///
/// The map is piecewise linear, so its range over `[lo, hi]` is decided by
/// the endpoints plus any integer (minimum 0) or half-integer (maximum 1/2)
/// inside. All of this is exact dyadic arithmetic.
pub fn nearest_integer_distance(x: &CReal) -> Result<CReal, MpError> {
    if x.width() >= Dyadic::pow2(-2) {
        return Err(MpError::TooWide);
    }
    let dist = |d: &Dyadic| -> Dyadic {
        let f = Dyadic::from_int(d.floor());
        let down = d - &f;
        let up = &(&f + &Dyadic::one()) - d;
        std::cmp::min(down, up)
    };
    let (lo, hi) = (x.lo(), x.hi());
    let (dl, dh) = (dist(lo), dist(hi));
    let has_integer = lo.ceil() <= hi.floor();
    let half = Dyadic::pow2(-1);
    let has_half = {
        let shifted_lo = lo - &half;
        let shifted_hi = hi - &half;
        shifted_lo.ceil() <= shifted_hi.floor()
    };
    let min = if has_integer { Dyadic::zero() } else { std::cmp::min(&dl, &dh).clone() };
    let max = if has_half { half } else { std::cmp::max(&dl, &dh).clone() };
    Ok(CReal::new(min, max, x.prec()))
}

/// Result of [`refine`]: the enclosure and the precision that produced it.
#[derive(Debug, Clone)]
pub struct Refined {
    pub value: CReal,
    pub bits: u32,
}

/// Re-evaluates `computation` along the policy's precision schedule until
/// the enclosure width is certified `<= target_width`.
///
/// `computation` must be deterministic in its precision argument. Errors
/// other than insufficient precision are returned immediately.
pub fn refine<F>(computation: F, target_width: &CReal, policy: &PrecisionPolicy) -> Result<Refined, MpError>
where
    F: Fn(u32) -> Result<CReal, MpError>,
{
    let target = target_width.lo().clone();
    let mut best: Option<(CReal, u32)> = None;
    for bits in policy.schedule() {
        let value = match computation(bits) {
            Ok(v) => v,
            Err(MpError::DivisorStraddlesZero) | Err(MpError::TooWide) => continue,
            Err(e) => return Err(e),
        };
        if value.width() <= target {
            return Ok(Refined { value, bits });
        }
        best = Some((value, bits));
    }
    let (best, bits) = best.unwrap_or_else(|| (CReal::default(), policy.max));
    Err(MpError::PrecisionExhausted { bits, best_width: best.width().to_decimal(6, Round::Ceil), best: Box::new(best) })
}

#[cfg(test)]
mod tests {
    use super::*;
    use num_bigint::BigInt;

    #[test]
    fn distance_at_quarter_and_integer() {
        let d = nearest_integer_distance(&CReal::from_ratio(9, 4, 64)).unwrap();
        assert!(d.contains(&Dyadic::pow2(-2)) && d.is_point());
        let z = nearest_integer_distance(&CReal::from_integer(3, 64)).unwrap();
        assert_eq!(z, CReal::zero(64));
    }

    #[test]
    fn distance_folds_at_half_integer() {
        let x = CReal::new(
            Dyadic::from_rational(&parse_decimal("0.4999").unwrap(), 64, Round::Floor),
            Dyadic::from_rational(&parse_decimal("0.5001").unwrap(), 64, Round::Ceil),
            64,
        );
        let d = nearest_integer_distance(&x).unwrap();
        assert!(d.contains(&Dyadic::pow2(-1)));
        assert_eq!(d.hi(), &Dyadic::pow2(-1));
        assert!(d.width() <= x.width());
    }

    #[test]
    fn distance_straddling_integer_touches_zero() {
        let x = CReal::new(Dyadic::new((-1).into(), -4), Dyadic::new(1.into(), -3), 64);
        let d = nearest_integer_distance(&x).unwrap();
        assert_eq!(d.lo(), &Dyadic::zero());
        assert_eq!(d.hi(), &Dyadic::new(1.into(), -3));
    }

    #[test]
    fn distance_negative_argument() {
        let d = nearest_integer_distance(&CReal::from_ratio(-7, 4, 64)).unwrap();
        assert!(d.contains(&Dyadic::pow2(-2)));
    }

    #[test]
    fn distance_rejects_wide_input() {
        let x = CReal::new(Dyadic::zero(), Dyadic::pow2(-2), 64);
        assert_eq!(nearest_integer_distance(&x), Err(MpError::TooWide));
    }

    #[test]
    fn schedule_doubles_to_max() {
        let p = PrecisionPolicy::default();
        assert_eq!(p.schedule(), vec![1024, 2048, 4096, 8192, 16384, 32768, 65536]);
        assert_eq!(p.with_max(64).schedule(), vec![64]);
    }

    #[test]
    fn refine_returns_exact_input_unchanged() {
        let policy = PrecisionPolicy::default();
        let target = CReal::zero(64);
        let r = refine(|b| Ok(CReal::from_integer(BigInt::from(7), b)), &target, &policy).unwrap();
        assert_eq!(r.bits, 1024);
        assert!(r.value.is_point());
    }

    #[test]
    fn refine_exhausts_on_irrational_with_zero_target() {
        let policy = PrecisionPolicy { initial: 64, max: 512, factor: 2 };
        let err = refine(|b| CReal::from_integer(2, b).sqrt(), &CReal::zero(64), &policy).unwrap_err();
        match err {
            MpError::PrecisionExhausted { bits, best, .. } => {
                assert_eq!(bits, 512);
                assert!(best.mul(&best).contains_integer(&BigInt::from(2)));
            }
            other => panic!("unexpected {other:?}"),
        }
    }
}
