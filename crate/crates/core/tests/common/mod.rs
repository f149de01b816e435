//! Independent oracles shared by the acceptance and property suites.
//!
//! Nothing here goes through the interval arithmetic: sequences are summed
//! in machine integers, algebraic numbers live in `Z[alpha]` with a rational
//! root bracket, and the reduction lemma is checked by exact enumeration.

#![allow(dead_code)]

use std::collections::{BTreeMap, BTreeSet};

use num_bigint::BigInt;
use num_integer::Integer;
use num_rational::BigRational;
use num_traits::{One, Signed, Zero};

pub fn rat(n: i64, d: i64) -> BigRational {
    BigRational::new(n.into(), d.into())
}

// ---------------------------------------------------------------- search

pub fn fib_u128(n: usize) -> Vec<i128> {
    let mut v = vec![0i128, 1];
    while v.len() <= n {
        let k = v.len();
        v.push(v[k - 1] + v[k - 2]);
    }
    v
}

pub fn trib_u128(n: usize) -> Vec<i128> {
    let mut v = vec![0i128, 1, 1];
    while v.len() <= n {
        let k = v.len();
        v.push(v[k - 1] + v[k - 2] + v[k - 3]);
    }
    v
}

/// `c -> {(n, m)}` for every `c` with two or more representations.
pub fn naive_search(n_max: usize, m_max: usize) -> BTreeMap<i128, BTreeSet<(usize, usize)>> {
    let f = fib_u128(n_max);
    let t = trib_u128(m_max);
    let mut all: BTreeMap<i128, BTreeSet<(usize, usize)>> = BTreeMap::new();
    for (n, fv) in f.iter().enumerate().take(n_max).skip(2) {
        for (m, tv) in t.iter().enumerate().take(m_max).skip(2) {
            all.entry(fv - tv).or_default().insert((n, m));
        }
    }
    all.retain(|_, v| v.len() >= 2);
    all
}

// ------------------------------------------------------- exact Z[alpha]

/// `Z[x]/(x^d - r_{d-1} x^{d-1} - ... - r_0)` with a rational bracket for
/// the dominant real root.
pub struct Field {
    /// `x^d = sum r_i x^i`.
    pub rule: Vec<BigInt>,
    /// `x^-1` in the power basis.
    pub inverse: Vec<BigInt>,
    pub lo: BigRational,
    pub hi: BigRational,
}

fn eval_poly(c: &[BigInt], x: &BigRational) -> BigRational {
    c.iter().rev().fold(BigRational::zero(), |acc, ci| acc * x + BigRational::from_integer(ci.clone()))
}

impl Field {
    /// `rule` as above and `inverse` the power-basis form of `x^-1`. The
    /// root must be the only sign change of the minimal polynomial on `[1, 2]`.
    fn new(rule: Vec<i64>, inverse: Vec<i64>, bits: u32) -> Self {
        let rule: Vec<BigInt> = rule.into_iter().map(BigInt::from).collect();
        let mut minpoly: Vec<BigInt> = rule.iter().map(|r| -r).collect();
        minpoly.push(BigInt::one());
        let (mut lo, mut hi) = (rat(1, 1), rat(2, 1));
        assert!(eval_poly(&minpoly, &lo).is_negative() && eval_poly(&minpoly, &hi).is_positive());
        for _ in 0..bits {
            let mid = (&lo + &hi) / rat(2, 1);
            if eval_poly(&minpoly, &mid).is_negative() {
                lo = mid;
            } else {
                hi = mid;
            }
        }
        Field { rule, inverse: inverse.into_iter().map(BigInt::from).collect(), lo, hi }
    }

    pub fn golden(bits: u32) -> Self {
        Field::new(vec![1, 1], vec![-1, 1], bits)
    }

    pub fn tribonacci(bits: u32) -> Self {
        Field::new(vec![1, 1, 1], vec![-1, -1, 1], bits)
    }

    fn degree(&self) -> usize {
        self.rule.len()
    }

    pub fn mul(&self, a: &[BigInt], b: &[BigInt]) -> Vec<BigInt> {
        let d = self.degree();
        let mut prod = vec![BigInt::zero(); 2 * d - 1];
        for (i, x) in a.iter().enumerate() {
            for (j, y) in b.iter().enumerate() {
                prod[i + j] += x * y;
            }
        }
        for top in (d..prod.len()).rev() {
            let c = std::mem::take(&mut prod[top]);
            for (i, r) in self.rule.iter().enumerate() {
                prod[top - d + i] += &c * r;
            }
        }
        prod.truncate(d);
        prod
    }

    pub fn pow(&self, e: i64) -> Vec<BigInt> {
        let d = self.degree();
        let mut x = vec![BigInt::zero(); d];
        let step = if e >= 0 {
            x[1] = BigInt::one();
            x
        } else {
            self.inverse.clone()
        };
        let mut acc = vec![BigInt::zero(); d];
        acc[0] = BigInt::one();
        for _ in 0..e.unsigned_abs() {
            acc = self.mul(&acc, &step);
        }
        acc
    }

    /// Exact sign of `sum c_i alpha^i`.
    pub fn sign(&self, c: &[BigInt]) -> i32 {
        if c.iter().all(Zero::is_zero) {
            return 0;
        }
        let (mut lo_sum, mut hi_sum) = (BigRational::zero(), BigRational::zero());
        let (mut plo, mut phi) = (BigRational::one(), BigRational::one());
        for ci in c {
            let ci = BigRational::from_integer(ci.clone());
            let (a, b) = (&ci * &plo, &ci * &phi);
            if a <= b {
                lo_sum += a;
                hi_sum += b;
            } else {
                lo_sum += b;
                hi_sum += a;
            }
            plo *= &self.lo;
            phi *= &self.hi;
        }
        if lo_sum.is_positive() {
            1
        } else if hi_sum.is_negative() {
            -1
        } else {
            panic!("root bracket too wide to decide a sign");
        }
    }

    /// Sign of `alpha^e - v`.
    pub fn compare_power(&self, e: i64, v: &BigInt) -> i32 {
        let mut p = self.pow(e);
        p[0] -= v;
        self.sign(&p)
    }
}

/// Indices `1 <= k <= k_max` where `alpha^(k-2) <= v_k <= alpha^(k-1)` fails.
pub fn growth_violations(field: &Field, values: &[BigInt], k_max: usize) -> Vec<usize> {
    (1..=k_max)
        .filter(|&k| {
            let v = &values[k];
            let e = k as i64;
            !(field.compare_power(e - 2, v) <= 0 && field.compare_power(e - 1, v) >= 0)
        })
        .collect()
}

// ------------------------------------------------------ reduction lemma

/// Euclid on a rational.
pub fn rational_cf(x: &BigRational) -> Vec<BigInt> {
    let (mut a, mut b) = (x.numer().clone(), x.denom().clone());
    let mut out = Vec::new();
    while !b.is_zero() {
        let (q, r) = a.div_mod_floor(&b);
        out.push(q);
        a = std::mem::replace(&mut b, r);
    }
    out
}

pub fn frac_distance(x: &BigRational) -> BigRational {
    let f = x - x.floor();
    let g = BigRational::one() - &f;
    if f < g {
        f
    } else {
        g
    }
}

/// `||mu q|| - M ||tau q||`, exactly.
pub fn exact_epsilon(tau: &BigRational, mu: &BigRational, q: &BigInt, m: i64) -> BigRational {
    let q = BigRational::from_integer(q.clone());
    frac_distance(&(mu * &q)) - BigRational::from_integer(m.into()) * frac_distance(&(tau * &q))
}

/// Every `(m, n)` with `1 <= m <= M`, `n >= 1` and `0 < m tau - n + mu < A B^-k`.
pub fn solutions(
    tau: &BigRational,
    mu: &BigRational,
    a: &BigRational,
    b: &BigRational,
    m_max: i64,
    k: u32,
) -> Vec<(i64, BigInt)> {
    let bound = a / num_traits::pow(b.clone(), k as usize);
    let mut out = Vec::new();
    for m in 1..=m_max {
        let x = BigRational::from_integer(m.into()) * tau + mu;
        let mut n: BigInt = x.ceil().to_integer() - 1;
        while n >= BigInt::one() {
            let v = &x - BigRational::from_integer(n.clone());
            if v >= bound {
                break;
            }
            if v.is_positive() {
                out.push((m, n.clone()));
            }
            n -= 1;
        }
    }
    out
}

/// A small instance with rational `tau` and `mu`.
#[derive(Debug, Clone)]
pub struct Toy {
    pub tau: BigRational,
    pub mu: BigRational,
    pub a: i64,
    pub b: BigRational,
    pub m: i64,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum ToyVerdict {
    Excluded { k_bound: BigInt },
    NotPositive,
}

/// First convergent denominator of `x` above `bound`, by the plain recurrence.
pub fn first_q_above(x: &BigRational, bound: &BigInt) -> Option<BigInt> {
    let (mut q_prev, mut q) = (BigInt::one(), BigInt::zero());
    for a in rational_cf(x) {
        let next = &a * &q + &q_prev;
        q_prev = std::mem::replace(&mut q, next);
        if &q > bound {
            return Some(q);
        }
    }
    None
}

/// Runs the interval implementation of the lemma and checks it against
/// exact arithmetic: the enclosure must contain the exact epsilon, the
/// status must agree with its sign, `B^(K+1) eps >= A q` must hold, and no
/// solution may exist at `k = K + 1`.
pub fn check_toy(t: &Toy) -> Result<ToyVerdict, String> {
    use fibtrib::mpreal::CReal;
    use fibtrib::reduction::{dujella_epsilon, EpsilonStatus, ReductionInstance};

    let q = first_q_above(&t.tau, &BigInt::from(6 * t.m)).ok_or("no convergent above 6M")?;
    let p = 128;
    let inst = ReductionInstance::new(
        CReal::from_rational(&t.tau, p),
        CReal::from_rational(&t.mu, p),
        CReal::from_integer(t.a, p),
        CReal::from_rational(&t.b, p),
        t.m.into(),
        q.clone(),
    )
    .map_err(|e| e.to_string())?;
    let out = dujella_epsilon(&inst).map_err(|e| e.to_string())?;
    let exact = exact_epsilon(&t.tau, &t.mu, &q, t.m);
    if !out.epsilon.contains_rational(&exact) {
        return Err(format!("epsilon enclosure {} misses exact {exact}", out.epsilon));
    }
    match out.status {
        EpsilonStatus::Positive if !exact.is_positive() => return Err(format!("positive status, exact {exact}")),
        EpsilonStatus::Negative if !exact.is_negative() => return Err(format!("negative status, exact {exact}")),
        EpsilonStatus::Positive => {}
        _ => return Ok(ToyVerdict::NotPositive),
    }
    let k_bound = out.k_bound.ok_or("positive epsilon without a bound")?;
    let k: BigInt = (&k_bound + BigInt::one()).max(BigInt::one());
    let k: u32 = k.try_into().map_err(|_| "bound out of range")?;
    let lhs = num_traits::pow(t.b.clone(), k as usize) * &exact;
    let rhs = BigRational::from_integer(BigInt::from(t.a) * &q);
    if lhs < rhs {
        return Err(format!("k = {k} is not beyond log(Aq/eps)/log B"));
    }
    let sols = solutions(&t.tau, &t.mu, &rat(t.a, 1), &t.b, t.m, k);
    if !sols.is_empty() {
        return Err(format!("solutions at k = {k}: {sols:?}"));
    }
    Ok(ToyVerdict::Excluded { k_bound })
}
