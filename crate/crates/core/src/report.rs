//! Serialization helpers shared by the JSON reports.
//!
//! Integers that may exceed 64 bits are written as decimal strings, and
//! enclosures as `{"lo", "hi", "bits"}` with outward-rounded decimals.

use num_bigint::BigInt;
use serde::Serializer;

use crate::mpreal::{CReal, Dyadic, Enclosure, Round};

/// Significant digits used for enclosure endpoints in reports.
pub const REPORT_DIGITS: usize = 20;

pub fn bigint_str<S: Serializer>(v: &BigInt, s: S) -> Result<S::Ok, S::Error> {
    s.serialize_str(&v.to_string())
}

pub fn enclosure(x: &CReal) -> Enclosure {
    x.to_json(REPORT_DIGITS)
}

/// A certified lower bound written with few digits, rounded down.
pub fn lower_decimal(d: &Dyadic) -> String {
    d.to_decimal(6, Round::Floor)
}

pub fn upper_decimal(d: &Dyadic) -> String {
    d.to_decimal(6, Round::Ceil)
}

pub fn opt_bigint_str<S: Serializer>(v: &Option<BigInt>, s: S) -> Result<S::Ok, S::Error> {
    match v {
        Some(v) => s.serialize_str(&v.to_string()),
        None => s.serialize_none(),
    }
}
