//! Certified continued-fraction expansion and exact convergents.
//!
//! A partial quotient is accepted only when both endpoints of the current
//! tail enclosure have the same floor. If the tail becomes ambiguous the
//! whole expansion restarts from a fresh enclosure at higher precision.

use std::fmt;
use std::sync::Arc;

use num_bigint::BigInt;
use num_traits::{One, Signed, Zero};
use serde::Serialize;

use crate::mpreal::{AlgebraicConstants, CReal, MpError, PrecisionPolicy};

/// Default number of partial quotients to expand.
pub const DEFAULT_TERMS: usize = 120;

/// A value that can be re-enclosed at any requested precision.
pub type Source = Arc<dyn Fn(u32) -> Result<CReal, MpError> + Send + Sync>;

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct Convergent {
    pub k: usize,
    #[serde(serialize_with = "crate::report::bigint_str")]
    pub a: BigInt,
    #[serde(serialize_with = "crate::report::bigint_str")]
    pub p: BigInt,
    #[serde(serialize_with = "crate::report::bigint_str")]
    pub q: BigInt,
}

impl fmt::Display for Convergent {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "k={} a={} p/q={}/{}", self.k, self.a, self.p, self.q)
    }
}

/// Result of an expansion attempt.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Expansion {
    pub quotients: Vec<BigInt>,
    /// The value was exact and its expansion ended before `count` terms.
    pub terminated: bool,
    /// Precision of the enclosure that certified the quotients.
    pub bits: u32,
}

/// Expands as far as one enclosure allows. Returns the certified quotients
/// and whether the tail reached an exact zero.
pub fn certified_prefix(x: &CReal, count: usize) -> (Vec<BigInt>, bool) {
    let mut out = Vec::with_capacity(count);
    let mut t = x.clone();
    while out.len() < count {
        let a = t.lo().floor();
        if t.hi().floor() != a {
            break;
        }
        let frac = t.add_int_big(&-&a);
        out.push(a);
        if frac.is_point() && frac.lo().is_zero() {
            return (out, true);
        }
        match frac.recip() {
            Ok(r) => t = r,
            Err(_) => break,
        }
    }
    (out, false)
}

/// First `count` partial quotients of the value produced by `source`,
/// escalating precision along `policy` until all of them are certified.
pub fn cf_expand(source: &Source, count: usize, policy: &PrecisionPolicy) -> Result<Expansion, MpError> {
    let mut best: Option<(CReal, u32, usize)> = None;
    for bits in policy.schedule() {
        let x = source(bits)?;
        let (quotients, terminated) = certified_prefix(&x, count);
        if terminated || quotients.len() == count {
            return Ok(Expansion { quotients, terminated, bits });
        }
        if best.as_ref().map_or(true, |b| quotients.len() >= b.2) {
            best = Some((x, bits, quotients.len()));
        }
    }
    let (x, bits, got) = best.expect("schedule is never empty");
    Err(MpError::PrecisionExhausted {
        bits,
        best_width: format!(
            "{} (certified {got} of {count} quotients)",
            x.width().to_decimal(6, crate::mpreal::Round::Ceil)
        ),
        best: Box::new(x),
    })
}

/// Exact convergents `p_k/q_k` for `k = 0..=upto` (clamped to the list).
pub fn convergents(quotients: &[BigInt], upto: usize) -> Vec<Convergent> {
    let mut out = Vec::new();
    let (mut p_prev, mut q_prev) = (BigInt::one(), BigInt::zero());
    let (mut p_prev2, mut q_prev2) = (BigInt::zero(), BigInt::one());
    for (k, a) in quotients.iter().enumerate().take(upto.saturating_add(1)) {
        let p = a * &p_prev + &p_prev2;
        let q = a * &q_prev + &q_prev2;
        out.push(Convergent { k, a: a.clone(), p: p.clone(), q: q.clone() });
        p_prev2 = std::mem::replace(&mut p_prev, p);
        q_prev2 = std::mem::replace(&mut q_prev, q);
    }
    out
}

/// A lazily extended expansion of one refinable value.
#[derive(Clone)]
pub struct ContinuedFraction {
    name: String,
    source: Source,
    policy: PrecisionPolicy,
    expansion: Expansion,
    convergents: Vec<Convergent>,
}

impl fmt::Debug for ContinuedFraction {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("ContinuedFraction")
            .field("name", &self.name)
            .field("terms", &self.expansion.quotients.len())
            .field("bits", &self.expansion.bits)
            .finish()
    }
}

impl ContinuedFraction {
    pub fn new(
        name: impl Into<String>,
        source: Source,
        terms: usize,
        policy: PrecisionPolicy,
    ) -> Result<Self, MpError> {
        let expansion = cf_expand(&source, terms.max(1), &policy)?;
        let convergents = convergents(&expansion.quotients, usize::MAX);
        Ok(ContinuedFraction { name: name.into(), source, policy, expansion, convergents })
    }

    /// `log alpha / log alpha_T`.
    pub fn tau(terms: usize, policy: PrecisionPolicy) -> Result<Self, MpError> {
        Self::new("tau", Arc::new(|b| Ok(AlgebraicConstants::new(b)?.tau)), terms, policy)
    }

    /// `log alpha_T / log alpha`, expanded independently of `tau`.
    pub fn tau_inv(terms: usize, policy: PrecisionPolicy) -> Result<Self, MpError> {
        Self::new("tau_inv", Arc::new(|b| Ok(AlgebraicConstants::new(b)?.tau_inv)), terms, policy)
    }

    pub fn sqrt(n: u32, terms: usize, policy: PrecisionPolicy) -> Result<Self, MpError> {
        Self::new(format!("sqrt{n}"), Arc::new(move |b| CReal::from_integer(n, b).sqrt()), terms, policy)
    }

    pub fn name(&self) -> &str {
        &self.name
    }

    pub fn quotients(&self) -> &[BigInt] {
        &self.expansion.quotients
    }

    pub fn convergents(&self) -> &[Convergent] {
        &self.convergents
    }

    pub fn bits(&self) -> u32 {
        self.expansion.bits
    }

    pub fn terminated(&self) -> bool {
        self.expansion.terminated
    }

    /// Makes sure at least `terms` quotients are available.
    pub fn extend_to(&mut self, terms: usize) -> Result<(), MpError> {
        if self.expansion.quotients.len() >= terms || self.expansion.terminated {
            return Ok(());
        }
        let target = terms.max(2 * self.expansion.quotients.len());
        let expansion = cf_expand(&self.source, target, &self.policy)?;
        debug_assert!(expansion.quotients.starts_with(&self.expansion.quotients));
        self.convergents = convergents(&expansion.quotients, usize::MAX);
        self.expansion = expansion;
        Ok(())
    }

    pub fn convergent(&mut self, k: usize) -> Result<Convergent, MpError> {
        self.extend_to(k + 1)?;
        self.convergents.get(k).cloned().ok_or_else(|| MpError::Domain {
            op: "convergent",
            detail: format!("{} has a finite expansion with {} terms", self.name, self.convergents.len()),
        })
    }

    /// Convergent of smallest index with `q_k > bound`.
    pub fn first_denominator_exceeding(&mut self, bound: &BigInt) -> Result<Convergent, MpError> {
        let mut k = 0;
        loop {
            let c = self.convergent(k)?;
            if &c.q > bound {
                return Ok(c);
            }
            k += 1;
        }
    }

    pub fn next_convergent_after(&mut self, k: usize) -> Result<Convergent, MpError> {
        self.convergent(k + 1)
    }
}

impl CReal {
    fn add_int_big(&self, z: &BigInt) -> CReal {
        self.add(&CReal::from_integer(z.clone(), self.prec()))
    }
}

/// Checks `p_k q_{k-1} - p_{k-1} q_k = (-1)^(k-1)` for every consecutive pair.
pub fn determinant_failures(cs: &[Convergent]) -> Vec<usize> {
    cs.windows(2)
        .filter(|w| {
            let det = &w[1].p * &w[0].q - &w[0].p * &w[1].q;
            let want = if w[1].k % 2 == 1 { BigInt::one() } else { -BigInt::one() };
            det != want
        })
        .map(|w| w[1].k)
        .chain(cs.iter().filter(|c| !c.q.is_positive()).map(|c| c.k))
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;

    fn ints(v: &[i64]) -> Vec<BigInt> {
        v.iter().map(|&x| BigInt::from(x)).collect()
    }

    #[test]
    fn sqrt2_classical() {
        let mut cf = ContinuedFraction::sqrt(2, 5, PrecisionPolicy { initial: 64, max: 1024, factor: 2 }).unwrap();
        assert_eq!(cf.quotients(), ints(&[1, 2, 2, 2, 2]).as_slice());
        let c = cf.first_denominator_exceeding(&BigInt::one()).unwrap();
        assert_eq!((c.k, c.q.clone()), (1, BigInt::from(2)));
        let c2 = cf.next_convergent_after(1).unwrap();
        assert_eq!((c2.p, c2.q), (BigInt::from(7), BigInt::from(5)));
    }

    #[test]
    fn exact_tail_terminates() {
        let src: Source = Arc::new(|b| Ok(CReal::from_ratio(1, 2, b)));
        let e = cf_expand(&src, 20, &PrecisionPolicy::default()).unwrap();
        assert!(e.terminated);
        assert_eq!(e.quotients, ints(&[0, 2]));
    }

    #[test]
    fn rational_prefix_matches_euclid() {
        // 13/8 = [1; 1, 1, 1, 2]; the tail 8/5 is no longer dyadic, so the
        // last quotient cannot be certified from a rounded enclosure.
        let (prefix, done) = certified_prefix(&CReal::from_ratio(13, 8, 256), 10);
        assert!(!done);
        assert_eq!(prefix, ints(&[1, 1, 1, 1]));
    }

    #[test]
    fn non_dyadic_rational_exhausts() {
        let src: Source = Arc::new(|b| Ok(CReal::from_ratio(7, 5, b)));
        let err = cf_expand(&src, 10, &PrecisionPolicy { initial: 64, max: 256, factor: 2 }).unwrap_err();
        assert!(matches!(err, MpError::PrecisionExhausted { bits: 256, .. }));
    }

    #[test]
    fn convergent_recurrence_and_determinant() {
        let cs = convergents(&ints(&[0, 1, 3, 1, 3, 13]), 10);
        assert_eq!(cs.len(), 6);
        assert_eq!((cs[0].p.clone(), cs[0].q.clone()), (BigInt::zero(), BigInt::one()));
        assert_eq!((cs[2].p.clone(), cs[2].q.clone()), (BigInt::from(3), BigInt::from(4)));
        assert!(determinant_failures(&cs).is_empty());
    }

    #[test]
    fn tau_leading_quotients() {
        let p = PrecisionPolicy::default();
        let mut t = ContinuedFraction::tau(12, p).unwrap();
        assert_eq!(t.quotients(), ints(&[0, 1, 3, 1, 3, 13, 2, 1, 8, 3, 1, 5]).as_slice());
        assert_eq!(t.next_convergent_after(0).unwrap().q, BigInt::one());
        let ti = ContinuedFraction::tau_inv(12, p).unwrap();
        assert_eq!(ti.quotients(), ints(&[1, 3, 1, 3, 13, 2, 1, 8, 3, 1, 5, 2]).as_slice());
    }
}
