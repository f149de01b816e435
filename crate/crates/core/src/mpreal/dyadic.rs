//! Exact binary rationals `mant * 2^exp` with directed rounding.
//!
//! Every endpoint of a [`CReal`](super::CReal) is a `Dyadic`. Values are kept
//! normalized (odd mantissa, or zero with exponent 0) so that structural
//! equality coincides with numeric equality.

use std::cmp::Ordering;
use std::fmt;

use num_bigint::{BigInt, Sign};
use num_integer::Integer;
use num_rational::BigRational;
use num_traits::{One, Signed, ToPrimitive, Zero};

/// Rounding direction for an inexact operation.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Round {
    /// Toward negative infinity.
    Floor,
    /// Toward positive infinity.
    Ceil,
}

impl Round {
    pub fn flip(self) -> Round {
        match self {
            Round::Floor => Round::Ceil,
            Round::Ceil => Round::Floor,
        }
    }
}

#[derive(Clone, PartialEq, Eq, Hash)]
pub struct Dyadic {
    mant: BigInt,
    exp: i64,
}

/// `floor(m / 2^k)` for `k >= 0`.
fn shr_floor(m: &BigInt, k: u64) -> BigInt {
    if k == 0 {
        return m.clone();
    }
    if m.sign() != Sign::Minus {
        m >> k
    } else {
        let t: BigInt = -m - 1;
        -(t >> k) - 1
    }
}

fn shr_round(m: &BigInt, k: u64, dir: Round) -> BigInt {
    match dir {
        Round::Floor => shr_floor(m, k),
        Round::Ceil => -shr_floor(&-m, k),
    }
}

impl Dyadic {
    pub fn new(mant: BigInt, exp: i64) -> Self {
        let mut d = Dyadic { mant, exp };
        d.normalize();
        d
    }

    fn normalize(&mut self) {
        if self.mant.is_zero() {
            self.exp = 0;
            return;
        }
        let tz = self.mant.trailing_zeros().unwrap_or(0);
        if tz > 0 {
            self.mant >>= tz;
            self.exp += tz as i64;
        }
    }

    pub fn zero() -> Self {
        Dyadic { mant: BigInt::zero(), exp: 0 }
    }

    pub fn one() -> Self {
        Dyadic { mant: BigInt::one(), exp: 0 }
    }

    pub fn from_int<T: Into<BigInt>>(v: T) -> Self {
        Dyadic::new(v.into(), 0)
    }

    /// `2^e`
    pub fn pow2(e: i64) -> Self {
        Dyadic { mant: BigInt::one(), exp: e }
    }

    pub fn mantissa(&self) -> &BigInt {
        &self.mant
    }

    pub fn exponent(&self) -> i64 {
        self.exp
    }

    pub fn is_zero(&self) -> bool {
        self.mant.is_zero()
    }

    pub fn signum(&self) -> i32 {
        match self.mant.sign() {
            Sign::Minus => -1,
            Sign::NoSign => 0,
            Sign::Plus => 1,
        }
    }

    pub fn is_positive(&self) -> bool {
        self.mant.is_positive()
    }

    pub fn is_negative(&self) -> bool {
        self.mant.is_negative()
    }

    /// Number of significant bits of the mantissa.
    pub fn bits(&self) -> u64 {
        self.mant.bits()
    }

    /// Exponent of the leading bit: `2^msb <= |self| < 2^(msb+1)`.
    /// Meaningless for zero.
    pub fn msb(&self) -> i64 {
        self.exp + self.mant.bits() as i64 - 1
    }

    pub fn abs(&self) -> Self {
        Dyadic { mant: self.mant.abs(), exp: self.exp }
    }

    pub fn mul_pow2(&self, k: i64) -> Self {
        if self.is_zero() {
            return self.clone();
        }
        Dyadic { mant: self.mant.clone(), exp: self.exp + k }
    }

    pub fn is_integer(&self) -> bool {
        self.exp >= 0
    }

    pub fn floor(&self) -> BigInt {
        if self.exp >= 0 {
            &self.mant << (self.exp as u64)
        } else {
            shr_floor(&self.mant, (-self.exp) as u64)
        }
    }

    pub fn ceil(&self) -> BigInt {
        -(-self).floor()
    }

    /// Rounds to at most `prec` significant bits in the given direction.
    pub fn round(&self, prec: u32, dir: Round) -> Self {
        let bits = self.mant.bits();
        if bits <= prec as u64 {
            return self.clone();
        }
        let shift = bits - prec as u64;
        Dyadic::new(shr_round(&self.mant, shift, dir), self.exp + shift as i64)
    }

    /// Rounds to an integer multiple of `2^e`.
    pub fn round_to_exp(&self, e: i64, dir: Round) -> Self {
        if self.exp >= e {
            return self.clone();
        }
        Dyadic::new(shr_round(&self.mant, (e - self.exp) as u64, dir), e)
    }

    /// `num / den` rounded in `dir` to `prec` significant bits.
    ///
    /// Panics if `den` is zero.
    pub fn div_round(num: &Dyadic, den: &Dyadic, prec: u32, dir: Round) -> Dyadic {
        assert!(!den.is_zero(), "division by zero dyadic");
        if num.is_zero() {
            return Dyadic::zero();
        }
        // Scale so the integer quotient carries at least prec + 2 bits.
        let want = prec as i64 + 2;
        let s = (want + den.mant.bits() as i64 - num.mant.bits() as i64).max(0);
        let scaled = &num.mant << (s as u64);
        let (q, r) = scaled.div_mod_floor(&den.mant);
        let q = if dir == Round::Ceil && !r.is_zero() { q + 1 } else { q };
        Dyadic::new(q, num.exp - den.exp - s).round(prec, dir)
    }

    pub fn to_rational(&self) -> BigRational {
        if self.exp >= 0 {
            BigRational::from_integer(&self.mant << (self.exp as u64))
        } else {
            BigRational::new(self.mant.clone(), BigInt::one() << ((-self.exp) as u64))
        }
    }

    /// Dyadic approximation of a rational, rounded in `dir` to `prec` bits.
    pub fn from_rational(r: &BigRational, prec: u32, dir: Round) -> Self {
        Dyadic::div_round(&Dyadic::from_int(r.numer().clone()), &Dyadic::from_int(r.denom().clone()), prec, dir)
    }

    pub fn to_f64(&self) -> f64 {
        if self.is_zero() {
            return 0.0;
        }
        // Keep 64 leading bits so the f64 conversion never overflows the mantissa.
        let r = self.round(64, Round::Floor);
        let m = r.mant.to_f64().unwrap_or(f64::NAN);
        let e = r.exp.clamp(i32::MIN as i64, i32::MAX as i64) as i32;
        m * 2f64.powi(e)
    }

    /// Decimal scientific string with `digits` significant digits, rounded
    /// in `dir`, so that the printed value bounds `self` on the requested side.
    pub fn to_decimal(&self, digits: usize, dir: Round) -> String {
        if self.is_zero() {
            return "0".to_string();
        }
        let digits = digits.max(1);
        let r = self.to_rational();
        let abs = r.abs();
        // Decimal exponent estimate from the binary exponent, then fix up.
        let mut e10 = (self.msb() as f64 * std::f64::consts::LOG10_2).floor() as i64;
        let pow10 = |e: i64| -> BigRational {
            if e >= 0 {
                BigRational::from_integer(num_traits::pow(BigInt::from(10), e as usize))
            } else {
                BigRational::new(BigInt::one(), num_traits::pow(BigInt::from(10), (-e) as usize))
            }
        };
        while abs >= pow10(e10 + 1) {
            e10 += 1;
        }
        while abs < pow10(e10) {
            e10 -= 1;
        }
        let scale = e10 - digits as i64 + 1;
        let scaled = &r / pow10(scale);
        let mut m = match dir {
            Round::Floor => scaled.floor().to_integer(),
            Round::Ceil => scaled.ceil().to_integer(),
        };
        let mut scale = scale;
        // Rounding up can carry into an extra digit (e.g. 9.99 -> 10.0).
        if m.abs() >= num_traits::pow(BigInt::from(10), digits) {
            let (q, rem) = m.div_mod_floor(&BigInt::from(10));
            m = if dir == Round::Ceil && !rem.is_zero() { q + 1 } else { q };
            scale += 1;
        }
        let neg = m.is_negative();
        let s = m.abs().to_string();
        let (head, tail) = s.split_at(1);
        let tail = tail.trim_end_matches('0');
        let exp = scale + s.len() as i64 - 1;
        let mut out = String::new();
        if neg {
            out.push('-');
        }
        out.push_str(head);
        if !tail.is_empty() {
            out.push('.');
            out.push_str(tail);
        }
        if exp != 0 {
            out.push_str(&format!("e{exp}"));
        }
        out
    }
}

impl Ord for Dyadic {
    fn cmp(&self, other: &Self) -> Ordering {
        let (sa, sb) = (self.signum(), other.signum());
        if sa != sb {
            return sa.cmp(&sb);
        }
        if sa == 0 {
            return Ordering::Equal;
        }
        let e = self.exp.min(other.exp);
        let a = &self.mant << ((self.exp - e) as u64);
        let b = &other.mant << ((other.exp - e) as u64);
        a.cmp(&b)
    }
}

impl PartialOrd for Dyadic {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}

impl std::ops::Neg for &Dyadic {
    type Output = Dyadic;
    fn neg(self) -> Dyadic {
        Dyadic { mant: -&self.mant, exp: self.exp }
    }
}

impl std::ops::Neg for Dyadic {
    type Output = Dyadic;
    fn neg(self) -> Dyadic {
        Dyadic { mant: -self.mant, exp: self.exp }
    }
}

impl std::ops::Add for &Dyadic {
    type Output = Dyadic;
    fn add(self, rhs: &Dyadic) -> Dyadic {
        if self.is_zero() {
            return rhs.clone();
        }
        if rhs.is_zero() {
            return self.clone();
        }
        let e = self.exp.min(rhs.exp);
        let a = &self.mant << ((self.exp - e) as u64);
        let b = &rhs.mant << ((rhs.exp - e) as u64);
        Dyadic::new(a + b, e)
    }
}

impl std::ops::Sub for &Dyadic {
    type Output = Dyadic;
    fn sub(self, rhs: &Dyadic) -> Dyadic {
        self + &(-rhs)
    }
}

impl std::ops::Mul for &Dyadic {
    type Output = Dyadic;
    fn mul(self, rhs: &Dyadic) -> Dyadic {
        if self.is_zero() || rhs.is_zero() {
            return Dyadic::zero();
        }
        // Product of odd mantissas is odd: already normalized.
        Dyadic { mant: &self.mant * &rhs.mant, exp: self.exp + rhs.exp }
    }
}

impl From<i64> for Dyadic {
    fn from(v: i64) -> Self {
        Dyadic::from_int(v)
    }
}

impl From<BigInt> for Dyadic {
    fn from(v: BigInt) -> Self {
        Dyadic::from_int(v)
    }
}

impl fmt::Debug for Dyadic {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}*2^{}", self.mant, self.exp)
    }
}

impl fmt::Display for Dyadic {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.to_decimal(20, Round::Floor))
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn d(m: i64, e: i64) -> Dyadic {
        Dyadic::new(BigInt::from(m), e)
    }

    #[test]
    fn normalizes_trailing_zeros() {
        assert_eq!(d(12, 0), d(3, 2));
        assert_eq!(d(0, 17), Dyadic::zero());
    }

    #[test]
    fn floor_and_ceil_of_negative_halves() {
        assert_eq!(d(-3, -1).floor(), BigInt::from(-2));
        assert_eq!(d(-3, -1).ceil(), BigInt::from(-1));
        assert_eq!(d(3, -1).floor(), BigInt::from(1));
        assert_eq!(d(-1, -5).floor(), BigInt::from(-1));
    }

    #[test]
    fn directed_rounding_brackets_value() {
        let x = d(0b1011011, -3);
        let lo = x.round(3, Round::Floor);
        let hi = x.round(3, Round::Ceil);
        assert!(lo <= x && x <= hi);
        assert!(lo.bits() <= 3 && hi.bits() <= 3);
        let nx = -&x;
        assert!(nx.round(3, Round::Floor) <= nx && nx <= nx.round(3, Round::Ceil));
    }

    #[test]
    fn division_rounds_outward() {
        let one = Dyadic::one();
        let three = Dyadic::from_int(3);
        let lo = Dyadic::div_round(&one, &three, 80, Round::Floor);
        let hi = Dyadic::div_round(&one, &three, 80, Round::Ceil);
        let third = BigRational::new(1.into(), 3.into());
        assert!(lo.to_rational() < third && third < hi.to_rational());
        let nlo = Dyadic::div_round(&-&one, &three, 80, Round::Floor);
        assert!(nlo.to_rational() < -third);
    }

    #[test]
    fn decimal_strings_bound_the_value() {
        let x = Dyadic::div_round(&Dyadic::one(), &Dyadic::from_int(3), 100, Round::Floor);
        assert_eq!(x.to_decimal(5, Round::Floor), "3.3333e-1");
        assert_eq!(x.to_decimal(5, Round::Ceil), "3.3334e-1");
        assert_eq!(Dyadic::from_int(121393).to_decimal(30, Round::Floor), "1.21393e5");
        assert_eq!(Dyadic::from_int(-22).to_decimal(4, Round::Ceil), "-2.2e1");
        assert_eq!(d(9999, 0).to_decimal(2, Round::Ceil), "1e4");
    }
}
