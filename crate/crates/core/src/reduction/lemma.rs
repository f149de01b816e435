//! One application of the Dujella-Pethő reduction lemma.
//!
//! For a convergent `p/q` of `tau` with `q > 6M`, put
//! `eps = ||mu q|| - M ||tau q||`. If `eps > 0`, the inequality
//! `0 < m tau - n + mu < A B^-k` has no solution with `m <= M` and
//! `k >= log(A q / eps) / log B`.

use num_bigint::BigInt;
use num_traits::Signed;
use serde::Serialize;
use thiserror::Error;

use crate::mpreal::{nearest_integer_distance, CReal, Dyadic, MpError};

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum ReductionError {
    #[error("lemma hypothesis violated: {0}")]
    HypothesisViolated(String),
    #[error("epsilon is not certified positive")]
    NotPositive,
    #[error("campaign configuration: {0}")]
    Config(String),
    #[error(transparent)]
    Arithmetic(#[from] MpError),
}

#[derive(Debug, Clone)]
pub struct ReductionInstance {
    pub tau: CReal,
    pub mu: CReal,
    pub a: CReal,
    pub b: CReal,
    pub m: BigInt,
    pub q: BigInt,
}

impl ReductionInstance {
    pub fn new(tau: CReal, mu: CReal, a: CReal, b: CReal, m: BigInt, q: BigInt) -> Result<Self, ReductionError> {
        check_hypotheses(&a, &b, &m, &q)?;
        Ok(ReductionInstance { tau, mu, a, b, m, q })
    }
}

/// Checks `A > 0`, `B > 1`, `M >= 1` and `q > 6M`; the last one exactly.
pub fn check_hypotheses(a: &CReal, b: &CReal, m: &BigInt, q: &BigInt) -> Result<(), ReductionError> {
    if !a.is_positive() {
        return Err(ReductionError::HypothesisViolated(format!("A = {a} is not certified > 0")));
    }
    if !b.gt(&CReal::one(b.prec())) {
        return Err(ReductionError::HypothesisViolated(format!("B = {b} is not certified > 1")));
    }
    if !m.is_positive() {
        return Err(ReductionError::HypothesisViolated(format!("M = {m} is not a positive integer")));
    }
    let six_m = m * BigInt::from(6);
    if q <= &six_m {
        return Err(ReductionError::HypothesisViolated(format!("q = {q} is not > 6M = {six_m}")));
    }
    Ok(())
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum EpsilonStatus {
    Positive,
    Negative,
    Undecided,
}

#[derive(Debug, Clone)]
pub struct ReductionOutcome {
    pub epsilon: CReal,
    pub status: EpsilonStatus,
    pub k_bound: Option<BigInt>,
}

/// `||x||`, widened to the trivial `[0, 1/2]` when `x` is too wide to place.
pub fn distance_or_trivial(x: &CReal) -> CReal {
    nearest_integer_distance(x).unwrap_or_else(|_| CReal::new(Dyadic::zero(), Dyadic::pow2(-1), x.prec()))
}

/// `M ||tau q||`, shared by every instance that uses the same convergent.
pub fn scaled_tau_distance(tau: &CReal, q: &BigInt, m: &BigInt) -> CReal {
    distance_or_trivial(&tau.mul_int(q)).mul_int(m)
}

/// `||mu q|| - M ||tau q||` with the second term precomputed.
pub fn epsilon_with(mu: &CReal, q: &BigInt, m_tau_dist: &CReal) -> CReal {
    distance_or_trivial(&mu.mul_int(q)).sub(m_tau_dist)
}

pub fn classify(eps: &CReal) -> EpsilonStatus {
    if eps.is_positive() {
        EpsilonStatus::Positive
    } else if eps.is_negative() {
        EpsilonStatus::Negative
    } else {
        EpsilonStatus::Undecided
    }
}

pub fn dujella_epsilon(inst: &ReductionInstance) -> Result<ReductionOutcome, ReductionError> {
    check_hypotheses(&inst.a, &inst.b, &inst.m, &inst.q)?;
    let eps = epsilon_with(&inst.mu, &inst.q, &scaled_tau_distance(&inst.tau, &inst.q, &inst.m));
    let status = classify(&eps);
    let k_bound = match status {
        EpsilonStatus::Positive => Some(bound_for_epsilon(&inst.a, &inst.b, &inst.q, eps.lo())?),
        _ => None,
    };
    Ok(ReductionOutcome { epsilon: eps, status, k_bound })
}

/// Largest `k` the lemma does not exclude.
pub fn dujella_bound(inst: &ReductionInstance, outcome: &ReductionOutcome) -> Result<BigInt, ReductionError> {
    if outcome.status != EpsilonStatus::Positive {
        return Err(ReductionError::NotPositive);
    }
    Ok(bound_for_epsilon(&inst.a, &inst.b, &inst.q, outcome.epsilon.lo())?)
}

/// `ceil(log(A q / eps_lo) / log B) - 1`, using the upper end of the
/// quotient so the bound errs on the safe side. Smaller `eps_lo` can only
/// raise the bound.
pub fn bound_for_epsilon(a: &CReal, b: &CReal, q: &BigInt, eps_lo: &Dyadic) -> Result<BigInt, MpError> {
    let prec = a.prec().max(b.prec());
    let eps = CReal::from_dyadic(eps_lo.clone(), prec);
    let arg = a.mul_int(q).div(&eps)?;
    let t = arg.ln()?.div(&b.ln()?)?;
    Ok(t.ceil_hi() - 1)
}

/// Same as [`bound_for_epsilon`] with `log B` supplied by the caller.
pub fn bound_for_epsilon_log(a: &CReal, log_b: &CReal, q: &BigInt, eps_lo: &Dyadic) -> Result<BigInt, MpError> {
    let prec = a.prec().max(log_b.prec());
    let eps = CReal::from_dyadic(eps_lo.clone(), prec);
    let t = a.mul_int(q).div(&eps)?.ln()?.div(log_b)?;
    Ok(t.ceil_hi() - 1)
}
