//! Certified reals: closed intervals with dyadic endpoints.

use std::fmt;

use num_bigint::BigInt;
use num_rational::BigRational;

use serde::Serialize;

use super::dyadic::{Dyadic, Round};
use super::MpError;

/// Smallest working precision accepted anywhere in the crate.
pub const MIN_PREC: u32 = 64;

/// A closed interval `[lo, hi]` that is guaranteed to contain some exact
/// real number. All arithmetic rounds outward, so the guarantee propagates.
#[derive(Clone, PartialEq, Eq)]
pub struct CReal {
    lo: Dyadic,
    hi: Dyadic,
    prec: u32,
}

fn clamp_prec(prec: u32) -> u32 {
    prec.max(MIN_PREC)
}

impl CReal {
    /// Builds an interval from endpoints, rounding them outward to `prec` bits.
    ///
    /// Panics if `lo > hi`.
    pub fn new(lo: Dyadic, hi: Dyadic, prec: u32) -> Self {
        assert!(lo <= hi, "interval endpoints out of order: {lo:?} > {hi:?}");
        let prec = clamp_prec(prec);
        CReal { lo: lo.round(prec, Round::Floor), hi: hi.round(prec, Round::Ceil), prec }
    }

    /// Zero-width enclosure of an exact integer. The integer is kept exact
    /// even when it needs more than `prec` bits.
    pub fn from_integer<T: Into<BigInt>>(z: T, prec: u32) -> Self {
        let d = Dyadic::from_int(z);
        CReal { lo: d.clone(), hi: d, prec: clamp_prec(prec) }
    }

    pub fn from_dyadic(d: Dyadic, prec: u32) -> Self {
        CReal { lo: d.clone(), hi: d, prec: clamp_prec(prec) }
    }

    /// Tightest `prec`-bit enclosure of a rational.
    pub fn from_rational(r: &BigRational, prec: u32) -> Self {
        let prec = clamp_prec(prec);
        CReal {
            lo: Dyadic::from_rational(r, prec, Round::Floor),
            hi: Dyadic::from_rational(r, prec, Round::Ceil),
            prec,
        }
    }

    pub fn from_ratio(num: i64, den: i64, prec: u32) -> Self {
        CReal::from_rational(&BigRational::new(num.into(), den.into()), prec)
    }

    /// Enclosure of a decimal literal such as `"2.02e15"` or `"0.0000028"`.
    pub fn from_decimal(s: &str, prec: u32) -> Result<Self, MpError> {
        Ok(CReal::from_rational(&parse_decimal(s)?, prec))
    }

    pub fn zero(prec: u32) -> Self {
        CReal::from_integer(0, prec)
    }

    pub fn one(prec: u32) -> Self {
        CReal::from_integer(1, prec)
    }

    pub fn lo(&self) -> &Dyadic {
        &self.lo
    }

    pub fn hi(&self) -> &Dyadic {
        &self.hi
    }

    pub fn prec(&self) -> u32 {
        self.prec
    }

    /// Same enclosure, relabelled with a different working precision.
    pub fn with_prec(mut self, prec: u32) -> Self {
        self.prec = clamp_prec(prec);
        self
    }

    pub fn width(&self) -> Dyadic {
        &self.hi - &self.lo
    }

    pub fn is_point(&self) -> bool {
        self.lo == self.hi
    }

    pub fn midpoint(&self) -> Dyadic {
        (&self.lo + &self.hi).mul_pow2(-1)
    }

    pub fn to_f64(&self) -> f64 {
        self.midpoint().to_f64()
    }

    pub fn contains(&self, x: &Dyadic) -> bool {
        &self.lo <= x && x <= &self.hi
    }

    pub fn contains_zero(&self) -> bool {
        !self.lo.is_positive() && !self.hi.is_negative()
    }

    pub fn contains_integer(&self, z: &BigInt) -> bool {
        self.contains(&Dyadic::from_int(z.clone()))
    }

    pub fn contains_rational(&self, r: &BigRational) -> bool {
        &self.lo.to_rational() <= r && r <= &self.hi.to_rational()
    }

    /// `true` if every point of `self` lies inside `other`.
    pub fn is_subset_of(&self, other: &CReal) -> bool {
        other.lo <= self.lo && self.hi <= other.hi
    }

    pub fn overlaps(&self, other: &CReal) -> bool {
        self.lo <= other.hi && other.lo <= self.hi
    }

    /// Certified `self > 0`.
    pub fn is_positive(&self) -> bool {
        self.lo.is_positive()
    }

    /// Certified `self < 0`.
    pub fn is_negative(&self) -> bool {
        self.hi.is_negative()
    }

    /// Certified strict `self < other`.
    pub fn lt(&self, other: &CReal) -> bool {
        self.hi < other.lo
    }

    /// Certified `self <= other`.
    pub fn le(&self, other: &CReal) -> bool {
        self.hi <= other.lo
    }

    /// Certified strict `self > other`.
    pub fn gt(&self, other: &CReal) -> bool {
        other.lt(self)
    }

    pub fn ge(&self, other: &CReal) -> bool {
        other.le(self)
    }

    fn join_prec(&self, other: &CReal) -> u32 {
        self.prec.max(other.prec)
    }

    pub fn add(&self, other: &CReal) -> CReal {
        let prec = self.join_prec(other);
        CReal {
            lo: (&self.lo + &other.lo).round(prec, Round::Floor),
            hi: (&self.hi + &other.hi).round(prec, Round::Ceil),
            prec,
        }
    }

    pub fn sub(&self, other: &CReal) -> CReal {
        let prec = self.join_prec(other);
        CReal {
            lo: (&self.lo - &other.hi).round(prec, Round::Floor),
            hi: (&self.hi - &other.lo).round(prec, Round::Ceil),
            prec,
        }
    }

    pub fn neg(&self) -> CReal {
        CReal { lo: -&self.hi, hi: -&self.lo, prec: self.prec }
    }

    pub fn mul(&self, other: &CReal) -> CReal {
        let prec = self.join_prec(other);
        let (lo, hi) = if !self.lo.is_negative() && !other.lo.is_negative() {
            (&self.lo * &other.lo, &self.hi * &other.hi)
        } else {
            let c = [&self.lo * &other.lo, &self.lo * &other.hi, &self.hi * &other.lo, &self.hi * &other.hi];
            let lo = c.iter().min().cloned().unwrap_or_else(Dyadic::zero);
            let hi = c.iter().max().cloned().unwrap_or_else(Dyadic::zero);
            (lo, hi)
        };
        CReal { lo: lo.round(prec, Round::Floor), hi: hi.round(prec, Round::Ceil), prec }
    }

    pub fn mul_int(&self, z: &BigInt) -> CReal {
        self.mul(&CReal::from_integer(z.clone(), self.prec))
    }

    pub fn add_int(&self, z: i64) -> CReal {
        self.add(&CReal::from_integer(z, self.prec))
    }

    /// Exact scaling by `2^k`.
    pub fn mul_pow2(&self, k: i64) -> CReal {
        CReal { lo: self.lo.mul_pow2(k), hi: self.hi.mul_pow2(k), prec: self.prec }
    }

    pub fn div(&self, other: &CReal) -> Result<CReal, MpError> {
        if other.contains_zero() {
            return Err(MpError::DivisorStraddlesZero);
        }
        if other.is_negative() {
            return self.neg().div(&other.neg());
        }
        let prec = self.join_prec(other);
        // other > 0: pick the endpoint that makes each quotient extreme.
        let lo_den = if self.lo.is_negative() { &other.lo } else { &other.hi };
        let hi_den = if self.hi.is_negative() { &other.hi } else { &other.lo };
        Ok(CReal {
            lo: Dyadic::div_round(&self.lo, lo_den, prec, Round::Floor),
            hi: Dyadic::div_round(&self.hi, hi_den, prec, Round::Ceil),
            prec,
        })
    }

    pub fn recip(&self) -> Result<CReal, MpError> {
        CReal::one(self.prec).div(self)
    }

    pub fn div_int(&self, z: i64) -> Result<CReal, MpError> {
        self.div(&CReal::from_integer(z, self.prec))
    }

    pub fn abs(&self) -> CReal {
        if !self.lo.is_negative() {
            self.clone()
        } else if !self.hi.is_positive() {
            self.neg()
        } else {
            let m = std::cmp::max(self.lo.abs(), self.hi.clone());
            CReal { lo: Dyadic::zero(), hi: m, prec: self.prec }
        }
    }

    /// Interval enclosing `max(x, y)` for `x` in `self`, `y` in `other`.
    pub fn max(&self, other: &CReal) -> CReal {
        CReal {
            lo: std::cmp::max(&self.lo, &other.lo).clone(),
            hi: std::cmp::max(&self.hi, &other.hi).clone(),
            prec: self.join_prec(other),
        }
    }

    pub fn min(&self, other: &CReal) -> CReal {
        CReal {
            lo: std::cmp::min(&self.lo, &other.lo).clone(),
            hi: std::cmp::min(&self.hi, &other.hi).clone(),
            prec: self.join_prec(other),
        }
    }

    /// Smallest interval containing both.
    pub fn hull(&self, other: &CReal) -> CReal {
        CReal {
            lo: std::cmp::min(&self.lo, &other.lo).clone(),
            hi: std::cmp::max(&self.hi, &other.hi).clone(),
            prec: self.join_prec(other),
        }
    }

    /// Intersection, or `None` when disjoint.
    pub fn intersect(&self, other: &CReal) -> Option<CReal> {
        let lo = std::cmp::max(&self.lo, &other.lo).clone();
        let hi = std::cmp::min(&self.hi, &other.hi).clone();
        (lo <= hi).then(|| CReal { lo, hi, prec: self.join_prec(other) })
    }

    pub fn floor_lo(&self) -> BigInt {
        self.lo.floor()
    }

    pub fn ceil_hi(&self) -> BigInt {
        self.hi.ceil()
    }

    /// Serializable snapshot with decimal endpoints rounded outward.
    pub fn to_json(&self, digits: usize) -> Enclosure {
        Enclosure {
            lo: self.lo.to_decimal(digits, Round::Floor),
            hi: self.hi.to_decimal(digits, Round::Ceil),
            bits: self.prec,
        }
    }
}

/// JSON form of an enclosure: decimal strings bounding the interval outward.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, serde::Deserialize)]
pub struct Enclosure {
    pub lo: String,
    pub hi: String,
    pub bits: u32,
}

impl fmt::Debug for CReal {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "[{}, {}]@{}", self.lo.to_decimal(24, Round::Floor), self.hi.to_decimal(24, Round::Ceil), self.prec)
    }
}

impl fmt::Display for CReal {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let digits = f.precision().unwrap_or(20);
        write!(f, "[{}, {}]", self.lo.to_decimal(digits, Round::Floor), self.hi.to_decimal(digits, Round::Ceil))
    }
}

/// Parses an exact decimal literal (`-12`, `0.068`, `2.8e-6`, `8e51`).
pub fn parse_decimal(s: &str) -> Result<BigRational, MpError> {
    let bad = || MpError::Parse(s.to_string());
    let t = s.trim();
    let (mant, exp) = match t.find(['e', 'E']) {
        Some(i) => (&t[..i], t[i + 1..].parse::<i64>().map_err(|_| bad())?),
        None => (t, 0),
    };
    let (neg, mant) = match mant.strip_prefix('-') {
        Some(rest) => (true, rest),
        None => (false, mant.strip_prefix('+').unwrap_or(mant)),
    };
    let (int_part, frac_part) = match mant.find('.') {
        Some(i) => (&mant[..i], &mant[i + 1..]),
        None => (mant, ""),
    };
    if int_part.is_empty() && frac_part.is_empty() {
        return Err(bad());
    }
    if !int_part.chars().chain(frac_part.chars()).all(|c| c.is_ascii_digit()) {
        return Err(bad());
    }
    let digits = format!("{int_part}{frac_part}");
    let mut num: BigInt = digits.parse().map_err(|_| bad())?;
    if neg {
        num = -num;
    }
    let e = exp - frac_part.len() as i64;
    let ten = BigInt::from(10);
    Ok(if e >= 0 {
        BigRational::from_integer(num * num_traits::pow(ten, e as usize))
    } else {
        BigRational::new(num, num_traits::pow(ten, (-e) as usize))
    })
}

impl Default for CReal {
    fn default() -> Self {
        CReal { lo: Dyadic::zero(), hi: Dyadic::zero(), prec: MIN_PREC }
    }
}

impl From<&BigInt> for CReal {
    fn from(z: &BigInt) -> Self {
        CReal::from_integer(z.clone(), MIN_PREC)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn integers_are_exact_points() {
        for z in [0i64, 121393, -22] {
            let x = CReal::from_integer(z, 128);
            assert!(x.is_point());
            assert_eq!(x.lo(), &Dyadic::from_int(z));
        }
    }

    #[test]
    fn one_plus_two_encloses_three() {
        let s = CReal::one(64).add(&CReal::from_integer(2, 64));
        assert!(s.contains_integer(&BigInt::from(3)));
    }

    #[test]
    fn division_by_straddling_interval_fails() {
        let a = CReal::one(64);
        let b = CReal::new(Dyadic::from_int(-1), Dyadic::one(), 64);
        assert_eq!(a.div(&b), Err(MpError::DivisorStraddlesZero));
    }

    #[test]
    fn division_by_negative_interval() {
        let a = CReal::from_ratio(7, 3, 100);
        let b = CReal::from_integer(-2, 100);
        let q = a.div(&b).unwrap();
        assert!(q.contains_rational(&BigRational::new((-7).into(), 6.into())));
    }

    #[test]
    fn abs_of_straddling_interval() {
        let x = CReal::new(Dyadic::from_int(-3), Dyadic::from_int(2), 64);
        let a = x.abs();
        assert_eq!(a.lo(), &Dyadic::zero());
        assert_eq!(a.hi(), &Dyadic::from_int(3));
    }

    #[test]
    fn parses_decimal_literals() {
        assert_eq!(parse_decimal("0.068").unwrap(), BigRational::new(68.into(), 1000.into()));
        assert_eq!(
            parse_decimal("8e51").unwrap(),
            BigRational::from_integer(num_traits::pow(BigInt::from(10), 51) * 8)
        );
        assert_eq!(parse_decimal("-2.8e-6").unwrap(), BigRational::new((-28).into(), 10_000_000.into()));
        assert!(parse_decimal("1.2.3").is_err());
        assert!(parse_decimal("e5").is_err());
        assert_eq!(parse_decimal("3").unwrap(), BigRational::from_integer(3.into()));
        assert!(parse_decimal(".5").unwrap() == BigRational::new(1.into(), 2.into()));
    }
}
