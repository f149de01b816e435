//! Integer polynomials and certified isolation of simple real roots.

use std::fmt;

use num_bigint::BigInt;
use num_rational::BigRational;
use num_traits::{Signed, Zero};

use super::dyadic::{Dyadic, Round};
use super::interval::CReal;
use super::MpError;

/// Polynomial with integer coefficients, lowest degree first.
#[derive(Clone, PartialEq, Eq)]
pub struct IntPoly {
    coeffs: Vec<BigInt>,
}

impl IntPoly {
    pub fn new<T: Into<BigInt>>(coeffs: impl IntoIterator<Item = T>) -> Self {
        let mut coeffs: Vec<BigInt> = coeffs.into_iter().map(Into::into).collect();
        while coeffs.len() > 1 && coeffs.last().is_some_and(Zero::is_zero) {
            coeffs.pop();
        }
        IntPoly { coeffs }
    }

    pub fn coeffs(&self) -> &[BigInt] {
        &self.coeffs
    }

    pub fn degree(&self) -> usize {
        self.coeffs.len().saturating_sub(1)
    }

    pub fn derivative(&self) -> IntPoly {
        if self.coeffs.len() <= 1 {
            return IntPoly::new([0]);
        }
        IntPoly::new(self.coeffs.iter().enumerate().skip(1).map(|(i, c)| c * BigInt::from(i)))
    }

    /// Horner evaluation over intervals.
    pub fn eval(&self, x: &CReal) -> CReal {
        let prec = x.prec();
        let mut acc = CReal::zero(prec);
        for c in self.coeffs.iter().rev() {
            acc = acc.mul(x).add(&CReal::from_integer(c.clone(), prec));
        }
        acc
    }

    /// Exact evaluation at a dyadic point.
    pub fn eval_dyadic(&self, x: &Dyadic) -> Dyadic {
        let mut acc = Dyadic::zero();
        for c in self.coeffs.iter().rev() {
            acc = &(&acc * x) + &Dyadic::from_int(c.clone());
        }
        acc
    }

    pub fn eval_rational(&self, x: &BigRational) -> BigRational {
        let mut acc = BigRational::zero();
        for c in self.coeffs.iter().rev() {
            acc = acc * x + BigRational::from_integer(c.clone());
        }
        acc
    }
}

impl fmt::Debug for IntPoly {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let mut first = true;
        for (i, c) in self.coeffs.iter().enumerate().rev() {
            if c.is_zero() && self.coeffs.len() > 1 {
                continue;
            }
            let sign = if c.is_negative() { "-" } else { "+" };
            if first {
                if c.is_negative() {
                    f.write_str("-")?;
                }
            } else {
                write!(f, " {sign} ")?;
            }
            first = false;
            let a = c.abs();
            let show_coeff = i == 0 || a != BigInt::from(1);
            if show_coeff {
                write!(f, "{a}")?;
            }
            match i {
                0 => {}
                1 => f.write_str("x")?,
                _ => write!(f, "x^{i}")?,
            }
        }
        Ok(())
    }
}

impl fmt::Display for IntPoly {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        fmt::Debug::fmt(self, f)
    }
}

/// Encloses the unique root of `poly` in the open bracket `(a, b)`.
///
/// Uniqueness is certified, not assumed: the endpoint values must have
/// opposite signs (exact rational evaluation) and the interval extension of
/// the derivative over the whole bracket must exclude zero. The root is then
/// bisected at dyadic points until the enclosure is narrower than
/// `2^-prec`.
pub fn isolate_real_root(poly: &IntPoly, a: &BigRational, b: &BigRational, prec: u32) -> Result<CReal, MpError> {
    let (a, b) = if a <= b { (a, b) } else { (b, a) };
    let fa = poly.eval_rational(a);
    let fb = poly.eval_rational(b);
    if fa.is_zero() || fb.is_zero() || fa.is_positive() == fb.is_positive() {
        return Err(MpError::NoSignChange);
    }
    let wp = prec.max(64) + 16;
    let bracket = CReal::new(Dyadic::from_rational(a, wp, Round::Floor), Dyadic::from_rational(b, wp, Round::Ceil), wp);
    if poly.derivative().eval(&bracket).contains_zero() {
        return Err(MpError::MultipleRootsSuspected);
    }
    let rising = fb.is_positive();

    // Move the endpoints inward onto dyadics when that keeps the sign change;
    // from then on every midpoint is exact.
    let (mut lo, mut hi) = match (Dyadic::from_rational(a, wp, Round::Ceil), Dyadic::from_rational(b, wp, Round::Floor))
    {
        (l, h) if l < h && signs_split(poly, &l, &h, rising) => (l, h),
        _ => return bisect_rational(poly, a, b, prec, wp, rising),
    };
    let target = Dyadic::pow2(-(prec as i64) - 1);
    while &hi - &lo > target {
        let mid = (&lo + &hi).mul_pow2(-1);
        let fm = poly.eval_dyadic(&mid);
        if fm.is_zero() {
            return Ok(CReal::from_dyadic(mid, prec));
        }
        if fm.is_positive() == rising {
            hi = mid;
        } else {
            lo = mid;
        }
    }
    Ok(CReal::new(lo, hi, prec))
}

fn signs_split(poly: &IntPoly, lo: &Dyadic, hi: &Dyadic, rising: bool) -> bool {
    let fl = poly.eval_dyadic(lo);
    let fh = poly.eval_dyadic(hi);
    !fl.is_zero() && !fh.is_zero() && fl.is_negative() == rising && fh.is_positive() == rising
}

/// Slow path for brackets whose root sits within `2^-wp` of an endpoint.
fn bisect_rational(
    poly: &IntPoly,
    a: &BigRational,
    b: &BigRational,
    prec: u32,
    wp: u32,
    rising: bool,
) -> Result<CReal, MpError> {
    let mut lo = a.clone();
    let mut hi = b.clone();
    let two = BigRational::from_integer(2.into());
    let target = BigRational::new(1.into(), BigInt::from(1) << (prec as u64 + 1));
    while &hi - &lo > target {
        let mid = (&lo + &hi) / &two;
        let fm = poly.eval_rational(&mid);
        if fm.is_zero() {
            return Ok(CReal::from_rational(&mid, prec));
        }
        if fm.is_positive() == rising {
            hi = mid;
        } else {
            lo = mid;
        }
    }
    Ok(CReal::new(Dyadic::from_rational(&lo, wp, Round::Floor), Dyadic::from_rational(&hi, wp, Round::Ceil), prec))
}

#[cfg(test)]
mod tests {
    use super::*;

    fn q(n: i64, d: i64) -> BigRational {
        BigRational::new(n.into(), d.into())
    }

    #[test]
    fn golden_ratio_from_x2_minus_x_minus_1() {
        let p = IntPoly::new([-1, -1, 1]);
        let r = isolate_real_root(&p, &q(1, 1), &q(2, 1), 128).unwrap();
        assert!((r.to_f64() - 1.618_033_988_749_895).abs() < 1e-15);
        assert!(r.width() <= Dyadic::pow2(-128 + 4));
        assert!(p.eval(&r).contains_zero());
    }

    #[test]
    fn tribonacci_root_inside_stated_bracket() {
        let p = IntPoly::new([-1, -1, -1, 1]);
        let r = isolate_real_root(&p, &q(18, 10), &q(19, 10), 256).unwrap();
        assert!(r.is_subset_of(&CReal::new(
            Dyadic::from_rational(&q(1839, 1000), 64, Round::Floor),
            Dyadic::from_rational(&q(1840, 1000), 64, Round::Ceil),
            64
        )));
        assert!(r.lo().to_rational() > q(1839, 1000));
        assert!(r.hi().to_rational() < q(1840, 1000));
    }

    #[test]
    fn binet_coefficient_root() {
        let p = IntPoly::new([-1, -2, 0, 44]);
        let r = isolate_real_root(&p, &q(3, 10), &q(4, 10), 256).unwrap();
        assert!(r.lo().to_rational() > q(336, 1000));
        assert!(r.hi().to_rational() < q(337, 1000));
    }

    #[test]
    fn no_sign_change_is_rejected() {
        let p = IntPoly::new([-1, -1, 1]);
        assert_eq!(isolate_real_root(&p, &q(2, 1), &q(3, 1), 64), Err(MpError::NoSignChange));
    }

    #[test]
    fn non_monotone_bracket_is_rejected() {
        // x^3 - x has roots -1, 0, 1; (-2, 2) has a sign change but three roots.
        let p = IntPoly::new([0, -1, 0, 1]);
        assert_eq!(isolate_real_root(&p, &q(-3, 2), &q(3, 2), 64), Err(MpError::MultipleRootsSuspected));
    }

    #[test]
    fn dyadic_root_found_exactly() {
        let p = IntPoly::new([-1, 2]); // 2x - 1
        let r = isolate_real_root(&p, &q(0, 1), &q(1, 1), 64).unwrap();
        assert!(r.contains(&Dyadic::pow2(-1)));
    }

    #[test]
    fn display_is_readable() {
        assert_eq!(IntPoly::new([-1, -2, 0, 44]).to_string(), "44x^3 - 2x - 1");
        assert_eq!(IntPoly::new([-1, -1, 1]).derivative().to_string(), "2x - 1");
    }
}
