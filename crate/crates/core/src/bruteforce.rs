//! Exhaustive search for integers with several representations
//! `c = F_n - T_m`, `n, m >= 2`, and the golden table it must reproduce.

use std::collections::{BTreeMap, HashMap};
use std::fmt;

use num_bigint::BigInt;
use num_traits::Signed;
use serde::Serialize;

use crate::mpreal::{AlgebraicConstants, CReal, MpError};
use crate::report::bigint_str;
use crate::sequences::{SequenceKind, SequenceTable};

/// Embedded copy of `data/golden_table.txt`.
pub const GOLDEN_TABLE: &str = include_str!("../data/golden_table.txt");

#[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize)]
pub struct Representation {
    pub n: usize,
    pub m: usize,
    #[serde(rename = "F", serialize_with = "bigint_str")]
    pub f_value: BigInt,
    #[serde(rename = "T", serialize_with = "bigint_str")]
    pub t_value: BigInt,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct SolutionRecord {
    #[serde(serialize_with = "bigint_str")]
    pub c: BigInt,
    pub reps: Vec<Representation>,
}

impl fmt::Display for SolutionRecord {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{:>5} =", self.c)?;
        for (i, r) in self.reps.iter().enumerate() {
            let sep = if i == 0 { " " } else { " = " };
            write!(f, "{sep}{} - {}", r.f_value, r.t_value)?;
        }
        f.write_str("  (")?;
        for (i, r) in self.reps.iter().enumerate() {
            let sep = if i == 0 { "" } else { " = " };
            write!(f, "{sep}F_{} - T_{}", r.n, r.m)?;
        }
        f.write_str(")")
    }
}

fn canonical_order(records: &mut [SolutionRecord]) {
    for r in records.iter_mut() {
        r.reps.sort_by_key(|x| (x.n, x.m));
    }
    records.sort_by(|a, b| (a.c.abs(), &a.c).cmp(&(b.c.abs(), &b.c)));
}

/// Every `c` with at least two representations over `2 <= n < n_max`,
/// `2 <= m < m_max`, each with all of its in-range representations.
pub fn search(n_max: usize, m_max: usize) -> Vec<SolutionRecord> {
    if n_max < 3 || m_max < 3 {
        return Vec::new();
    }
    let f = SequenceTable::new(SequenceKind::Fibonacci, n_max);
    let t = SequenceTable::new(SequenceKind::Tribonacci, m_max);
    let mut by_c: HashMap<BigInt, Vec<(usize, usize)>> = HashMap::new();
    for n in 2..n_max {
        for m in 2..m_max {
            by_c.entry(&f.values()[n] - &t.values()[m]).or_default().push((n, m));
        }
    }
    let mut records: Vec<SolutionRecord> = by_c
        .into_iter()
        .filter(|(_, v)| v.len() >= 2)
        .map(|(c, v)| SolutionRecord {
            c,
            reps: v
                .into_iter()
                .map(|(n, m)| Representation { n, m, f_value: f.values()[n].clone(), t_value: t.values()[m].clone() })
                .collect(),
        })
        .collect();
    canonical_order(&mut records);
    records
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct GoldenParseError {
    pub line: usize,
    pub reason: String,
}

impl fmt::Display for GoldenParseError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "golden table line {}: {}", self.line, self.reason)
    }
}

impl std::error::Error for GoldenParseError {}

/// Parses the golden table format: `c n:m:F:T n:m:F:T ...` per line,
/// `#` comments and blank lines ignored.
pub fn parse_golden(text: &str) -> Result<Vec<SolutionRecord>, GoldenParseError> {
    let mut out = Vec::new();
    for (i, raw) in text.lines().enumerate() {
        let line = raw.split('#').next().unwrap_or("").trim();
        if line.is_empty() {
            continue;
        }
        let err = |reason: String| GoldenParseError { line: i + 1, reason };
        let mut fields = line.split_whitespace();
        let c: BigInt = fields.next().unwrap_or_default().parse().map_err(|e| err(format!("bad c: {e}")))?;
        let mut reps = Vec::new();
        for field in fields {
            let parts: Vec<&str> = field.split(':').collect();
            if parts.len() != 4 {
                return Err(err(format!("expected n:m:F:T, got {field:?}")));
            }
            let n = parts[0].parse().map_err(|e| err(format!("bad n in {field:?}: {e}")))?;
            let m = parts[1].parse().map_err(|e| err(format!("bad m in {field:?}: {e}")))?;
            let f_value = parts[2].parse().map_err(|e| err(format!("bad F in {field:?}: {e}")))?;
            let t_value = parts[3].parse().map_err(|e| err(format!("bad T in {field:?}: {e}")))?;
            reps.push(Representation { n, m, f_value, t_value });
        }
        out.push(SolutionRecord { c, reps });
    }
    canonical_order(&mut out);
    Ok(out)
}

/// One representation present on one side of the comparison only.
#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct RepDiff {
    #[serde(serialize_with = "bigint_str")]
    pub c: BigInt,
    pub n: usize,
    pub m: usize,
}

impl fmt::Display for RepDiff {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "(c={}, ({},{}))", self.c, self.n, self.m)
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct GoldenVerdict {
    pub pass: bool,
    pub records: usize,
    pub representations: usize,
    /// In the golden table but not produced by the search.
    pub missing: Vec<RepDiff>,
    /// Produced by the search but absent from the golden table.
    pub extra: Vec<RepDiff>,
    /// Golden entries whose F/T values disagree with the sequences.
    pub inconsistent: Vec<RepDiff>,
}

impl fmt::Display for GoldenVerdict {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.pass {
            return write!(f, "PASS ({} records, {} representations)", self.records, self.representations);
        }
        f.write_str("FAIL")?;
        for (label, v) in [("missing", &self.missing), ("extra", &self.extra), ("inconsistent", &self.inconsistent)] {
            if !v.is_empty() {
                let items: Vec<String> = v.iter().map(ToString::to_string).collect();
                write!(f, "; {label} {}", items.join(", "))?;
            }
        }
        Ok(())
    }
}

fn rep_set(records: &[SolutionRecord]) -> BTreeMap<(BigInt, usize, usize), &Representation> {
    records.iter().flat_map(|r| r.reps.iter().map(move |x| ((r.c.clone(), x.n, x.m), x))).collect()
}

/// Compares search output with a golden table (representation by
/// representation, in both directions).
pub fn compare_with_golden(records: &[SolutionRecord], golden: &[SolutionRecord]) -> GoldenVerdict {
    let found = rep_set(records);
    let want = rep_set(golden);
    let diff = |(c, n, m): &(BigInt, usize, usize)| RepDiff { c: c.clone(), n: *n, m: *m };
    let missing: Vec<RepDiff> = want.keys().filter(|k| !found.contains_key(*k)).map(diff).collect();
    let extra: Vec<RepDiff> = found.keys().filter(|k| !want.contains_key(*k)).map(diff).collect();
    let inconsistent: Vec<RepDiff> = golden
        .iter()
        .flat_map(|r| r.reps.iter().map(move |x| (r, x)))
        .filter(|(r, x)| &x.f_value - &x.t_value != r.c)
        .map(|(r, x)| RepDiff { c: r.c.clone(), n: x.n, m: x.m })
        .chain(want.iter().filter_map(|(k, g)| {
            found.get(k).filter(|f| f.f_value != g.f_value || f.t_value != g.t_value).map(|_| diff(k))
        }))
        .collect();
    GoldenVerdict {
        pass: missing.is_empty() && extra.is_empty() && inconsistent.is_empty(),
        records: records.len(),
        representations: found.len(),
        missing,
        extra,
        inconsistent,
    }
}

/// Compares against the embedded table.
pub fn verify_golden_table(records: &[SolutionRecord]) -> GoldenVerdict {
    let golden = parse_golden(GOLDEN_TABLE).expect("embedded golden table parses");
    compare_with_golden(records, &golden)
}

/// What the growth inequalities say about `m` for a given `n`.
#[derive(Debug, Clone, Serialize)]
pub struct RangeJustification {
    pub n: u64,
    /// Largest `m` compatible with `n - 3 > (log alpha_T / log alpha)(m - 5)`.
    pub m_max: i64,
    /// Smallest `m` compatible with `n - 4 < (log alpha_T / log alpha)(m - 1)`.
    pub m_min: i64,
    /// The lower bound carries no information beyond `m >= 2`.
    pub vacuous: bool,
    /// Both constants used to derive the second inequality were certified:
    /// `alpha_T + 1 > 2.83` and `log 2.83 > 2 log alpha`.
    pub derivation_certified: bool,
}

impl RangeJustification {
    pub fn m_below(&self, bound: i64) -> bool {
        self.m_max < bound
    }
}

/// Certified range of `m` admitted by the growth inequalities at `n`.
pub fn range_justification(n: u64, c: &AlgebraicConstants) -> Result<RangeJustification, MpError> {
    let p = c.working_prec();
    let n_r = CReal::from_integer(n, p);
    // m < 5 + (n - 3) tau
    let upper = n_r.add_int(-3).mul(&c.tau).add_int(5);
    let m_max = upper.hi().ceil() - 1;
    // m > 1 + (n - 4) tau
    let lower = n_r.add_int(-4).mul(&c.tau).add_int(1);
    let m_min = lower.lo().floor() + 1;
    let k283 = CReal::from_decimal("2.83", p)?;
    let derivation_certified = c.alpha_t.add_int(1).gt(&k283) && k283.ln()?.gt(&c.log_alpha.mul_int(&2.into()));
    let to_i64 = |z: BigInt| i64::try_from(z).unwrap_or(i64::MAX);
    let m_min = to_i64(m_min);
    Ok(RangeJustification { n, m_max: to_i64(m_max), m_min, vacuous: m_min <= 2, derivation_certified })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn tiny_grid() {
        assert!(search(3, 3).is_empty());
        let r = search(6, 5);
        let cs: Vec<i64> = r.iter().map(|x| i64::try_from(x.c.clone()).unwrap()).collect();
        assert_eq!(cs, vec![0, -1, 1]);
        assert_eq!(r[2].reps.iter().map(|x| (x.n, x.m)).collect::<Vec<_>>(), vec![(3, 2), (4, 3), (5, 4)]);
    }

    #[test]
    fn golden_parses_with_38_representations() {
        let g = parse_golden(GOLDEN_TABLE).unwrap();
        assert_eq!(g.len(), 17);
        assert_eq!(g.iter().map(|r| r.reps.len()).sum::<usize>(), 38);
    }

    #[test]
    fn injected_defects_are_named() {
        let found = search(300, 240);
        let mut dropped = found.clone();
        dropped[0].reps.retain(|r| (r.n, r.m) != (7, 6));
        let v = verify_golden_table(&dropped);
        assert!(!v.pass);
        assert_eq!(v.missing, vec![RepDiff { c: 0.into(), n: 7, m: 6 }]);
        assert!(v.extra.is_empty());

        let mut found2 = found.clone();
        found2[0].reps.push(Representation { n: 9, m: 9, f_value: 34.into(), t_value: 81.into() });
        let v = verify_golden_table(&found2);
        assert!(v.to_string().contains("extra (c=0, (9,9))"), "{v}");
    }

    #[test]
    fn parse_errors_carry_line_numbers() {
        let e = parse_golden("# x\n0 2:2:1\n").unwrap_err();
        assert_eq!(e.line, 2);
    }

    #[test]
    fn record_display() {
        let r = search(13, 11);
        assert!(r.iter().any(|x| x.to_string().contains("F_3 - T_5")));
    }
}
