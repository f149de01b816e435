//! Outward-rounded elementary functions on [`CReal`].
//!
//! `ln` and `exp` are evaluated by argument reduction (repeated square roots
//! or halvings) followed by a truncated series whose tail is added as an
//! explicit error interval. All intermediate work is itself interval
//! arithmetic, so the result is an enclosure by construction.

use num_bigint::BigInt;
use num_traits::Zero;

use super::dyadic::{Dyadic, Round};
use super::interval::CReal;
use super::MpError;

/// Series terms and square roots shrink the argument to about `2^-REDUCTION`.
fn reduction_steps(prec: u32) -> u32 {
    ((prec as f64).sqrt() / 2.0).ceil().max(4.0) as u32
}

fn bitlen(v: u64) -> u32 {
    64 - v.leading_zeros()
}

/// `floor` or `ceil` of `d^(1/n)` to `prec` bits, for `d >= 0`.
fn root_dyadic(d: &Dyadic, n: u32, prec: u32, dir: Round) -> Dyadic {
    if d.is_zero() {
        return Dyadic::zero();
    }
    let n64 = n as i64;
    let want = n64 * (prec as i64 + 2);
    let mut s = (want - d.bits() as i64).max(0);
    let e = d.exponent() - s;
    let adj = e.rem_euclid(n64);
    s += adj;
    let e = d.exponent() - s;
    debug_assert_eq!(e.rem_euclid(n64), 0);
    let m: BigInt = d.mantissa() << (s as u64);
    let r = m.nth_root(n);
    let r = if dir == Round::Ceil && num_traits::pow(r.clone(), n as usize) != m { r + 1 } else { r };
    Dyadic::new(r, e / n64).round(prec, dir)
}

/// `d^n` for `d >= 0`, rounded in `dir`; every partial product is rounded
/// the same way, which is monotone for non-negative operands.
fn pow_dyadic(d: &Dyadic, n: u64, prec: u32, dir: Round) -> Dyadic {
    let mut result = Dyadic::one();
    let mut base = d.clone();
    let mut e = n;
    while e > 0 {
        if e & 1 == 1 {
            result = (&result * &base).round(prec, dir);
        }
        e >>= 1;
        if e > 0 {
            base = (&base * &base).round(prec, dir);
        }
    }
    result
}

impl CReal {
    pub fn sqrt(&self) -> Result<CReal, MpError> {
        self.nth_root(2)
    }

    /// Principal `n`-th root of a non-negative enclosure.
    pub fn nth_root(&self, n: u32) -> Result<CReal, MpError> {
        if n == 0 {
            return Err(MpError::Domain { op: "nth_root", detail: "zeroth root".into() });
        }
        if self.lo().is_negative() {
            return Err(MpError::Domain { op: "nth_root", detail: format!("enclosure {self:?} is not non-negative") });
        }
        let p = self.prec();
        Ok(CReal::new(root_dyadic(self.lo(), n, p, Round::Floor), root_dyadic(self.hi(), n, p, Round::Ceil), p))
    }

    /// Integer power; negative exponents go through the reciprocal.
    pub fn pow_int(&self, n: i64) -> Result<CReal, MpError> {
        if n < 0 {
            return self.pow_int(-n)?.recip();
        }
        let p = self.prec();
        if n == 0 {
            return Ok(CReal::one(p));
        }
        let n = n as u64;
        let wp = p + bitlen(n) + 8;
        let pos = |lo: &Dyadic, hi: &Dyadic| {
            CReal::new(pow_dyadic(lo, n, wp, Round::Floor), pow_dyadic(hi, n, wp, Round::Ceil), p)
        };
        let even = n % 2 == 0;
        Ok(if !self.lo().is_negative() {
            pos(self.lo(), self.hi())
        } else if !self.hi().is_positive() {
            let r = pos(&self.hi().abs(), &self.lo().abs());
            if even {
                r
            } else {
                r.neg()
            }
        } else if even {
            let m = std::cmp::max(self.lo().abs(), self.hi().clone());
            pos(&Dyadic::zero(), &m)
        } else {
            let neg = pow_dyadic(&self.lo().abs(), n, wp, Round::Ceil);
            let up = pow_dyadic(self.hi(), n, wp, Round::Ceil);
            CReal::new(-neg, up, p)
        })
    }

    /// Natural logarithm of a strictly positive enclosure.
    pub fn ln(&self) -> Result<CReal, MpError> {
        if !self.lo().is_positive() {
            return Err(MpError::Domain { op: "ln", detail: format!("enclosure {self:?} is not strictly positive") });
        }
        let p = self.prec();
        let at_lo = ln_point(self.lo(), p);
        if self.is_point() {
            return Ok(at_lo);
        }
        // log(hi) - log(lo) <= (hi - lo) / lo
        let rel = Dyadic::div_round(&self.width(), self.lo(), 64, Round::Ceil);
        let upper = if rel < Dyadic::pow2(-16) {
            (at_lo.hi() + &rel).round(p, Round::Ceil)
        } else {
            ln_point(self.hi(), p).hi().clone()
        };
        Ok(CReal::new(at_lo.lo().clone(), upper, p))
    }

    pub fn exp(&self) -> CReal {
        let p = self.prec();
        let lo = exp_point(self.lo(), p);
        if self.is_point() {
            return lo;
        }
        let hi = exp_point(self.hi(), p);
        CReal::new(lo.lo().clone(), hi.hi().clone(), p)
    }
}

fn ln_point(d: &Dyadic, prec: u32) -> CReal {
    if *d == Dyadic::one() {
        return CReal::zero(prec);
    }
    let k0 = reduction_steps(prec);
    // |ln d| < (|msb| + 1) ln 2, so this many extra halvings bring it below 1.
    let kb = bitlen(d.msb().unsigned_abs() + 1);
    let k = k0 + kb;
    let w = prec + k + 24;

    let mut y = CReal::from_dyadic(d.clone(), w);
    for _ in 0..k {
        y = y.sqrt().expect("square root of a positive enclosure");
    }
    let one = CReal::one(w);
    let s = y.sub(&one).div(&y.add(&one)).expect("y + 1 > 0");
    let s2 = s.mul(&s);
    let cutoff = Dyadic::pow2(-(w as i64) - 4);
    let mut sum = s.clone();
    let mut power = s.clone();
    let mut j: i64 = 1;
    loop {
        power = power.mul(&s2);
        let term = power.div_int(2 * j + 1).expect("odd positive divisor");
        sum = sum.add(&term);
        let mag = term.abs();
        if mag.hi() < &cutoff {
            // Remaining terms shrink by a factor of at least s^2 < 1/2.
            let tail = mag.hi().mul_pow2(1);
            sum = sum.add(&CReal::new(-&tail, tail, w));
            break;
        }
        j += 1;
    }
    let r = sum.mul_pow2(k as i64 + 1);
    CReal::new(r.lo().clone(), r.hi().clone(), prec)
}

fn exp_point(d: &Dyadic, prec: u32) -> CReal {
    if d.is_zero() {
        return CReal::one(prec);
    }
    let k0 = reduction_steps(prec);
    let mag = d.abs().ceil();
    let kb = if mag.is_zero() { 0 } else { mag.bits() as u32 };
    let k = k0 + kb;
    // exp(d) may be huge or tiny; its binary exponent needs headroom too.
    let w = prec + k + 24;
    let r = CReal::from_dyadic(d.mul_pow2(-(k as i64)), w);
    let cutoff = Dyadic::pow2(-(w as i64) - 4);
    let mut sum = CReal::one(w);
    let mut term = CReal::one(w);
    let mut j: i64 = 1;
    loop {
        term = term.mul(&r).div_int(j).expect("positive divisor");
        sum = sum.add(&term);
        let mag = term.abs();
        if mag.hi() < &cutoff {
            // |r| < 1/2: the tail is bounded by the last term.
            let tail = mag.hi().clone();
            sum = sum.add(&CReal::new(-&tail, tail, w));
            break;
        }
        j += 1;
    }
    for _ in 0..k {
        sum = sum.mul(&sum);
    }
    CReal::new(sum.lo().clone(), sum.hi().clone(), prec)
}

/// Enclosure of `ln 2`, handy for callers that need it directly.
pub fn ln2(prec: u32) -> CReal {
    CReal::from_integer(2, prec).ln().expect("2 > 0")
}
