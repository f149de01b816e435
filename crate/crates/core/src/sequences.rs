//! Fibonacci, Lucas and Tribonacci numbers.

use std::fmt;
use std::str::FromStr;

use num_bigint::BigInt;
use serde::Serialize;
use thiserror::Error;

use crate::mpreal::{AlgebraicConstants, CReal, MpError};

pub const DEFAULT_MAX_INDEX: usize = 1000;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum SequenceKind {
    Fibonacci,
    Lucas,
    Tribonacci,
}

impl fmt::Display for SequenceKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            SequenceKind::Fibonacci => "fibonacci",
            SequenceKind::Lucas => "lucas",
            SequenceKind::Tribonacci => "tribonacci",
        })
    }
}

impl FromStr for SequenceKind {
    type Err = SequenceError;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s.to_ascii_lowercase().as_str() {
            "fibonacci" | "fib" | "f" => Ok(SequenceKind::Fibonacci),
            "lucas" | "luc" | "l" => Ok(SequenceKind::Lucas),
            "tribonacci" | "trib" | "t" => Ok(SequenceKind::Tribonacci),
            _ => Err(SequenceError::UnknownKind(s.to_string())),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum SequenceError {
    #[error("index {k} exceeds the table maximum {max}")]
    IndexOutOfRange { k: usize, max: usize },
    #[error("unknown sequence {0:?}")]
    UnknownKind(String),
    #[error("no growth inequality is defined for {0}")]
    Unsupported(SequenceKind),
    #[error(transparent)]
    Arithmetic(#[from] MpError),
}

/// Exact values `v_0, ..., v_max_index` of one sequence.
#[derive(Debug, Clone)]
pub struct SequenceTable {
    kind: SequenceKind,
    values: Vec<BigInt>,
}

impl SequenceTable {
    pub fn new(kind: SequenceKind, max_index: usize) -> Self {
        let mut values: Vec<BigInt> = match kind {
            SequenceKind::Fibonacci => vec![0.into(), 1.into()],
            SequenceKind::Lucas => vec![2.into(), 1.into()],
            SequenceKind::Tribonacci => vec![0.into(), 1.into(), 1.into()],
        };
        while values.len() <= max_index {
            let n = values.len();
            let next = match kind {
                SequenceKind::Tribonacci => &values[n - 1] + &values[n - 2] + &values[n - 3],
                _ => &values[n - 1] + &values[n - 2],
            };
            values.push(next);
        }
        values.truncate(max_index + 1);
        SequenceTable { kind, values }
    }

    pub fn kind(&self) -> SequenceKind {
        self.kind
    }

    pub fn max_index(&self) -> usize {
        self.values.len() - 1
    }

    pub fn get(&self, k: usize) -> Result<&BigInt, SequenceError> {
        self.values.get(k).ok_or(SequenceError::IndexOutOfRange { k, max: self.max_index() })
    }

    pub fn values(&self) -> &[BigInt] {
        &self.values
    }
}

fn nth(kind: SequenceKind, k: usize) -> Result<BigInt, SequenceError> {
    if k > DEFAULT_MAX_INDEX {
        return Err(SequenceError::IndexOutOfRange { k, max: DEFAULT_MAX_INDEX });
    }
    Ok(SequenceTable::new(kind, k).values[k].clone())
}

pub fn fibonacci(k: usize) -> Result<BigInt, SequenceError> {
    nth(SequenceKind::Fibonacci, k)
}

pub fn lucas(k: usize) -> Result<BigInt, SequenceError> {
    nth(SequenceKind::Lucas, k)
}

pub fn tribonacci(k: usize) -> Result<BigInt, SequenceError> {
    nth(SequenceKind::Tribonacci, k)
}

/// Enclosure of the Binet expression for the `k`-th term.
///
/// For Tribonacci the conjugate pair contributes at most
/// `2 |c_beta| |beta_T|^k` in absolute value, which is added as a symmetric
/// error term around `c_alpha alpha_T^k`.
pub fn binet_check(kind: SequenceKind, k: usize, c: &AlgebraicConstants) -> Result<CReal, MpError> {
    let k = k as i64;
    Ok(match kind {
        SequenceKind::Fibonacci => c.alpha.pow_int(k)?.sub(&c.beta.pow_int(k)?).div(&c.sqrt5)?,
        SequenceKind::Lucas => c.alpha.pow_int(k)?.add(&c.beta.pow_int(k)?),
        SequenceKind::Tribonacci => {
            let main = c.c_alpha.mul(&c.alpha_t.pow_int(k)?);
            let tail = c.c_beta_abs.mul(&c.beta_t_abs.pow_int(k)?).mul_pow2(1);
            let r = tail.hi().clone();
            main.add(&CReal::new(-&r, r, main.prec()))
        }
    })
}

/// Indices `1 <= k <= k_max` at which `root^(k-2) <= v_k <= root^(k-1)`
/// could not be certified. `root` is alpha for Fibonacci, alpha_T for
/// Tribonacci.
pub fn growth_bounds_check(
    kind: SequenceKind,
    k_max: usize,
    c: &AlgebraicConstants,
) -> Result<Vec<usize>, SequenceError> {
    let root = match kind {
        SequenceKind::Fibonacci => &c.alpha,
        SequenceKind::Tribonacci => &c.alpha_t,
        SequenceKind::Lucas => return Err(SequenceError::Unsupported(kind)),
    };
    let table = SequenceTable::new(kind, k_max.max(1));
    let mut failures = Vec::new();
    for k in 1..=k_max {
        let v = CReal::from_integer(table.values[k].clone(), root.prec());
        let lower = root.pow_int(k as i64 - 2)?;
        let upper = root.pow_int(k as i64 - 1)?;
        if !(lower.le(&v) && v.le(&upper)) {
            failures.push(k);
        }
    }
    Ok(failures)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn quoted_values() {
        assert_eq!(fibonacci(0).unwrap(), 0.into());
        assert_eq!(fibonacci(12).unwrap(), 144.into());
        assert_eq!(fibonacci(26).unwrap(), 121393.into());
        assert_eq!(tribonacci(0).unwrap(), 0.into());
        assert_eq!(tribonacci(10).unwrap(), 149.into());
        assert_eq!(tribonacci(21).unwrap(), 121415.into());
        assert_eq!(lucas(0).unwrap(), 2.into());
        assert_eq!(lucas(1).unwrap(), 1.into());
        assert_eq!(lucas(5).unwrap(), 11.into());
    }

    #[test]
    fn out_of_range_index() {
        assert_eq!(fibonacci(1001), Err(SequenceError::IndexOutOfRange { k: 1001, max: 1000 }));
        let t = SequenceTable::new(SequenceKind::Tribonacci, 10);
        assert!(t.get(11).is_err());
        assert_eq!(t.get(10).unwrap(), &BigInt::from(149));
    }

    #[test]
    fn small_tables_are_truncated() {
        assert_eq!(SequenceTable::new(SequenceKind::Tribonacci, 0).values().len(), 1);
        assert_eq!(SequenceTable::new(SequenceKind::Fibonacci, 1).max_index(), 1);
    }

    #[test]
    fn lucas_fibonacci_identity() {
        let f = SequenceTable::new(SequenceKind::Fibonacci, 300);
        let l = SequenceTable::new(SequenceKind::Lucas, 300);
        for k in 0..=300 {
            let lhs = &l.values()[k] * &l.values()[k] - BigInt::from(5) * &f.values()[k] * &f.values()[k];
            let rhs = BigInt::from(if k % 2 == 0 { 4 } else { -4 });
            assert_eq!(lhs, rhs, "k = {k}");
        }
    }

    #[test]
    fn tribonacci_difference_identity() {
        let t = SequenceTable::new(SequenceKind::Tribonacci, 300);
        let v = t.values();
        for m in 3..=300 {
            assert_eq!(&v[m] - &v[m - 1], &v[m - 2] + &v[m - 3]);
        }
    }

    #[test]
    fn binet_examples() {
        let c = AlgebraicConstants::new(256).unwrap();
        assert!(binet_check(SequenceKind::Fibonacci, 10, &c).unwrap().contains_integer(&55.into()));
        assert!(binet_check(SequenceKind::Tribonacci, 7, &c).unwrap().contains_integer(&24.into()));
        assert!(binet_check(SequenceKind::Tribonacci, 0, &c).unwrap().contains_zero());
        assert!(binet_check(SequenceKind::Lucas, 5, &c).unwrap().contains_integer(&11.into()));
    }

    #[test]
    fn growth_boundary_and_lucas() {
        let c = AlgebraicConstants::new(128).unwrap();
        assert!(growth_bounds_check(SequenceKind::Fibonacci, 1, &c).unwrap().is_empty());
        assert!(growth_bounds_check(SequenceKind::Tribonacci, 30, &c).unwrap().is_empty());
        assert!(matches!(growth_bounds_check(SequenceKind::Lucas, 5, &c), Err(SequenceError::Unsupported(_))));
    }

    #[test]
    fn kind_parsing() {
        assert_eq!("trib".parse::<SequenceKind>().unwrap(), SequenceKind::Tribonacci);
        assert!("pell".parse::<SequenceKind>().is_err());
    }
}
