//! The four-stage reduction campaign.
//!
//! Stage 0 works on the main linear form and bounds `n - n1` or `m - m1`.
//! Stages 1 and 2 fix one gap and bound the other; stage 3 fixes both and
//! bounds `n`. Every stage is run for both signs of the linear form: the
//! positive sign uses `tau = log alpha / log alpha_T`, the negative sign its
//! reciprocal, each with its own convergent ladder.

use std::fmt;
use std::str::FromStr;

use num_bigint::BigInt;
use num_rational::BigRational;
use num_traits::{Signed, ToPrimitive};
use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use super::lemma::{
    bound_for_epsilon_log, check_hypotheses, classify, epsilon_with, scaled_tau_distance, EpsilonStatus, ReductionError,
};
use crate::contfrac::{ContinuedFraction, Convergent, DEFAULT_TERMS};
use crate::mpreal::{parse_decimal, AlgebraicConstants, CReal, Dyadic, Enclosure, MpError, PrecisionPolicy};
use crate::report::{bigint_str, enclosure, lower_decimal, opt_bigint_str, upper_decimal};

pub const DEFAULT_CONFIG: &str = include_str!("../../data/campaign.toml");

/// Below this the exhaustive search already settles every case.
pub const N_CEILING: i64 = 300;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Base {
    Alpha,
    AlphaT,
}

impl Base {
    pub fn value(self, c: &AlgebraicConstants) -> &CReal {
        match self {
            Base::Alpha => &c.alpha,
            Base::AlphaT => &c.alpha_t,
        }
    }

    pub fn log(self, c: &AlgebraicConstants) -> &CReal {
        match self {
            Base::Alpha => &c.log_alpha,
            Base::AlphaT => &c.log_alpha_t,
        }
    }
}

impl fmt::Display for Base {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Base::Alpha => "alpha",
            Base::AlphaT => "alpha_T",
        })
    }
}

impl FromStr for Base {
    type Err = ReductionError;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s.to_ascii_lowercase().as_str() {
            "alpha" => Ok(Base::Alpha),
            "alpha_t" | "alpha-t" | "alphat" => Ok(Base::AlphaT),
            _ => Err(ReductionError::Config(format!("unknown base {s:?}"))),
        }
    }
}

/// Quantity bounded by a reduction: `fib_gap = n - n1`, `trib_gap = m - m1`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Gap {
    FibGap,
    TribGap,
    N,
}

impl fmt::Display for Gap {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Gap::FibGap => "n-n1",
            Gap::TribGap => "m-m1",
            Gap::N => "n",
        })
    }
}

/// `coef * base^exp / log(over)`: what the constant `A` has to dominate.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct SourceExpr {
    pub coef: String,
    pub base: Base,
    pub exp: i64,
    pub over: Base,
}

impl SourceExpr {
    pub fn eval(&self, c: &AlgebraicConstants) -> Result<CReal, ReductionError> {
        let p = c.working_prec();
        let coef = CReal::from_decimal(&self.coef, p)?;
        Ok(coef.mul(&self.base.value(c).pow_int(self.exp)?).div(self.over.log(c))?)
    }
}

impl fmt::Display for SourceExpr {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.coef != "1" {
            write!(f, "{}*", self.coef)?;
        }
        write!(f, "{}^{}/log {}", self.base, self.exp, self.over)
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct ParamConfig {
    pub gap: Gap,
    pub a: u32,
    pub b: Base,
    pub source: SourceExpr,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub expected_bound: Option<i64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub expected_rescued_bound: Option<i64>,
}

#[derive(Debug, Clone, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct SweepConfig {
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub epsilon_floor: Option<String>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub rescued_epsilon_floor: Option<String>,
    #[serde(default, rename = "param")]
    pub params: Vec<ParamConfig>,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct StageConfig {
    pub id: u8,
    pub positive: SweepConfig,
    pub negative: SweepConfig,
}

impl StageConfig {
    pub fn sweep(&self, sign: Sign) -> &SweepConfig {
        match sign {
            Sign::Positive => &self.positive,
            Sign::Negative => &self.negative,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct CampaignConfig {
    pub modulus: String,
    pub max_escalations: usize,
    pub min_gap: u32,
    #[serde(rename = "stage")]
    pub stages: Vec<StageConfig>,
}

impl CampaignConfig {
    pub fn shipped() -> Self {
        Self::from_toml(DEFAULT_CONFIG).expect("shipped campaign config is valid")
    }

    pub fn from_toml(s: &str) -> Result<Self, ReductionError> {
        let cfg: CampaignConfig = toml::from_str(s).map_err(|e| ReductionError::Config(e.to_string()))?;
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn validate(&self) -> Result<(), ReductionError> {
        let bad = |msg: String| Err(ReductionError::Config(msg));
        parse_modulus(&self.modulus)?;
        for (id, gaps) in
            [(0u8, &[Gap::FibGap, Gap::TribGap][..]), (1, &[Gap::TribGap]), (2, &[Gap::FibGap]), (3, &[Gap::N])]
        {
            let found: Vec<_> = self.stages.iter().filter(|s| s.id == id).collect();
            if found.len() != 1 {
                return bad(format!("stage {id} must appear exactly once, found {}", found.len()));
            }
            for sign in [Sign::Positive, Sign::Negative] {
                let sw = found[0].sweep(sign);
                let mut have: Vec<Gap> = sw.params.iter().map(|p| p.gap).collect();
                have.sort();
                if have != gaps {
                    return bad(format!("stage {id} {sign}: expected parameters for {gaps:?}, found {have:?}"));
                }
                for p in &sw.params {
                    if p.a == 0 {
                        return bad(format!("stage {id} {sign}: A must be positive"));
                    }
                    parse_decimal(&p.source.coef)?;
                }
                for f in sw.epsilon_floor.iter().chain(&sw.rescued_epsilon_floor) {
                    parse_decimal(f)?;
                }
            }
        }
        if self.stages.len() != 4 {
            return bad(format!("expected 4 stages, found {}", self.stages.len()));
        }
        Ok(())
    }

    pub fn stage(&self, id: u8) -> &StageConfig {
        self.stages.iter().find(|s| s.id == id).expect("validated")
    }
}

/// Parses a positive integer written as a decimal literal such as `8e51`.
pub fn parse_modulus(s: &str) -> Result<BigInt, ReductionError> {
    let r = parse_decimal(s)?;
    if !r.is_integer() || !r.is_positive() {
        return Err(ReductionError::Config(format!("M = {s} is not a positive integer")));
    }
    Ok(r.to_integer())
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum Sign {
    Positive,
    Negative,
}

impl Sign {
    pub fn tau_name(self) -> &'static str {
        match self {
            Sign::Positive => "tau",
            Sign::Negative => "tau_inv",
        }
    }
}

impl fmt::Display for Sign {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Sign::Positive => "positive",
            Sign::Negative => "negative",
        })
    }
}

/// Which `mu` a reduction instance uses.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum MuExpr {
    Stage0,
    Stage1 { k: u32 },
    Stage2 { k: u32 },
    Stage3 { k: u32, l: u32 },
}

impl MuExpr {
    pub fn key(&self) -> InstanceKey {
        match *self {
            MuExpr::Stage0 => InstanceKey { k: None, l: None },
            MuExpr::Stage1 { k } | MuExpr::Stage2 { k } => InstanceKey { k: Some(k), l: None },
            MuExpr::Stage3 { k, l } => InstanceKey { k: Some(k), l: Some(l) },
        }
    }

    fn max_indices(&self) -> (u32, u32) {
        match *self {
            MuExpr::Stage0 => (0, 0),
            MuExpr::Stage1 { k } => (k, 0),
            MuExpr::Stage2 { k } => (0, k),
            MuExpr::Stage3 { k, l } => (k, l),
        }
    }
}

impl fmt::Display for MuExpr {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match *self {
            MuExpr::Stage0 => f.write_str("stage0"),
            MuExpr::Stage1 { k } => write!(f, "stage1:{k}"),
            MuExpr::Stage2 { k } => write!(f, "stage2:{k}"),
            MuExpr::Stage3 { k, l } => write!(f, "stage3:{k},{l}"),
        }
    }
}

impl FromStr for MuExpr {
    type Err = ReductionError;

    /// `stage0`, `stage1:K`, `stage2:K` or `stage3:K,L`.
    fn from_str(s: &str) -> Result<Self, Self::Err> {
        let bad =
            || ReductionError::Config(format!("bad mu expression {s:?}; use stage0, stage1:K, stage2:K or stage3:K,L"));
        let (head, tail) = s.split_once(':').unwrap_or((s, ""));
        let idx = |t: &str| -> Result<u32, ReductionError> {
            let v: u32 = t.trim().parse().map_err(|_| bad())?;
            if v == 0 {
                return Err(bad());
            }
            Ok(v)
        };
        match head.trim() {
            "stage0" if tail.is_empty() => Ok(MuExpr::Stage0),
            "stage1" => Ok(MuExpr::Stage1 { k: idx(tail)? }),
            "stage2" => Ok(MuExpr::Stage2 { k: idx(tail)? }),
            "stage3" => {
                let (k, l) = tail.split_once(',').ok_or_else(bad)?;
                Ok(MuExpr::Stage3 { k: idx(k)?, l: idx(l)? })
            }
            _ => Err(bad()),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize)]
pub struct InstanceKey {
    #[serde(skip_serializing_if = "Option::is_none")]
    pub k: Option<u32>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub l: Option<u32>,
}

impl fmt::Display for InstanceKey {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match (self.k, self.l) {
            (Some(k), Some(l)) => write!(f, "(k,l)=({k},{l})"),
            (Some(k), None) => write!(f, "k={k}"),
            _ => f.write_str("single"),
        }
    }
}

/// Cached logarithms for the `mu` families.
struct MuTable {
    ls5c: CReal,
    inv_log_alpha: CReal,
    inv_log_alpha_t: CReal,
    /// `log(alpha^k - 1)` at index `k`; index 0 unused.
    la: Vec<CReal>,
    /// `log(alpha_T^l - 1)` at index `l`; index 0 unused.
    lt: Vec<CReal>,
}

impl MuTable {
    fn new(c: &AlgebraicConstants) -> Result<Self, MpError> {
        Ok(MuTable {
            ls5c: c.sqrt5_c_alpha().ln()?,
            inv_log_alpha: c.log_alpha.recip()?,
            inv_log_alpha_t: c.log_alpha_t.recip()?,
            la: vec![CReal::zero(c.working_prec())],
            lt: vec![CReal::zero(c.working_prec())],
        })
    }

    /// Extends the tables; each `x^k - 1` must be certified positive.
    fn ensure(&mut self, c: &AlgebraicConstants, k_max: u32, l_max: u32) -> Result<(), MpError> {
        fn fill(tab: &mut Vec<CReal>, root: &CReal, upto: u32) -> Result<(), MpError> {
            let start = tab.len() as u32;
            let fresh: Result<Vec<CReal>, MpError> = (start..=upto)
                .into_par_iter()
                .map(|k| {
                    let arg = root.pow_int(k as i64)?.add_int(-1);
                    if !arg.is_positive() {
                        return Err(MpError::Domain { op: "mu", detail: format!("x^{k} - 1 not certified positive") });
                    }
                    arg.ln()
                })
                .collect();
            tab.extend(fresh?);
            Ok(())
        }
        fill(&mut self.la, &c.alpha, k_max)?;
        fill(&mut self.lt, &c.alpha_t, l_max)
    }

    /// Numerator `X` with `mu = X / log alpha_T` for the positive sign and
    /// `mu = -X / log alpha` for the negative one.
    fn numerator(&self, e: &MuExpr) -> CReal {
        match *e {
            MuExpr::Stage0 => self.ls5c.neg(),
            MuExpr::Stage1 { k } => self.la[k as usize].sub(&self.ls5c),
            MuExpr::Stage2 { k } => self.ls5c.neg().sub(&self.lt[k as usize]),
            MuExpr::Stage3 { k, l } => self.la[k as usize].sub(&self.ls5c).sub(&self.lt[l as usize]),
        }
    }

    fn mu(&self, sign: Sign, e: &MuExpr) -> CReal {
        let x = self.numerator(e);
        match sign {
            Sign::Positive => x.mul(&self.inv_log_alpha_t),
            Sign::Negative => x.neg().mul(&self.inv_log_alpha),
        }
    }
}

/// `mu` for one instance, without caching.
pub fn mu_value(c: &AlgebraicConstants, sign: Sign, e: &MuExpr) -> Result<CReal, MpError> {
    let mut t = MuTable::new(c)?;
    let (k, l) = e.max_indices();
    t.ensure(c, k, l)?;
    Ok(t.mu(sign, e))
}

/// `tau` for the positive sign, `1/tau` for the negative one.
pub fn tau_value(c: &AlgebraicConstants, sign: Sign) -> &CReal {
    match sign {
        Sign::Positive => &c.tau,
        Sign::Negative => &c.tau_inv,
    }
}

struct Rung {
    conv: Convergent,
    scaled: CReal,
}

struct Ladder {
    rungs: Vec<Rung>,
}

impl Ladder {
    fn build(cf: &mut ContinuedFraction, tau: &CReal, m: &BigInt, depth: usize) -> Result<Self, MpError> {
        let base = cf.first_denominator_exceeding(&(m * BigInt::from(6)))?;
        let mut rungs = Vec::with_capacity(depth + 1);
        for i in 0..=depth {
            let conv = if i == 0 { base.clone() } else { cf.convergent(base.k + i)? };
            let scaled = scaled_tau_distance(tau, &conv.q, m);
            rungs.push(Rung { conv, scaled });
        }
        Ok(Ladder { rungs })
    }

    fn base(&self) -> &Convergent {
        &self.rungs[0].conv
    }
}

struct Outcome {
    key: InstanceKey,
    /// `(rung, epsilon, status)` in the order tried; stops at the first positive.
    attempts: Vec<(usize, CReal, EpsilonStatus)>,
}

impl Outcome {
    fn last(&self) -> &(usize, CReal, EpsilonStatus) {
        self.attempts.last().expect("at least one attempt")
    }

    fn resolved(&self) -> bool {
        self.last().2 == EpsilonStatus::Positive
    }
}

fn evaluate(mu: &CReal, key: InstanceKey, ladder: &Ladder) -> Outcome {
    let mut attempts = Vec::new();
    for (i, rung) in ladder.rungs.iter().enumerate() {
        let eps = epsilon_with(mu, &rung.conv.q, &rung.scaled);
        let status = classify(&eps);
        attempts.push((i, eps, status));
        if status == EpsilonStatus::Positive {
            break;
        }
    }
    Outcome { key, attempts }
}

#[derive(Debug, Clone, Serialize)]
pub struct Attempt {
    pub convergent: usize,
    pub status: EpsilonStatus,
    pub epsilon_lo: String,
    pub epsilon_hi: String,
}

#[derive(Debug, Clone, Serialize)]
pub struct Escalation {
    pub key: InstanceKey,
    pub attempts: Vec<Attempt>,
    pub resolved_at: Option<usize>,
}

#[derive(Debug, Clone, Serialize)]
pub struct ParamBound {
    pub gap: Gap,
    pub a: u32,
    pub b: Base,
    pub base_bound: Option<i64>,
    pub rescued_bound: Option<i64>,
    pub bound: Option<i64>,
    pub expected_bound: Option<i64>,
    pub expected_rescued_bound: Option<i64>,
    pub matches_expected: bool,
}

#[derive(Debug, Clone, Serialize)]
pub struct FloorCheck {
    pub kind: &'static str,
    pub quoted: String,
    pub certified_min: Option<String>,
    pub holds: bool,
}

#[derive(Debug, Clone, Serialize)]
pub struct SweepReport {
    pub sign: Sign,
    pub tau: &'static str,
    pub base_convergent: usize,
    pub instances: usize,
    pub positive_at_base: usize,
    /// Certified lower bound for the smallest epsilon at the base convergent.
    pub min_epsilon: Option<String>,
    pub min_epsilon_at: Option<InstanceKey>,
    pub escalations: Vec<Escalation>,
    pub rescued: Vec<InstanceKey>,
    pub rescued_min_epsilon: Option<String>,
    pub failures: Vec<InstanceKey>,
    pub undecided: Vec<InstanceKey>,
    pub bounds: Vec<ParamBound>,
    pub floor_checks: Vec<FloorCheck>,
    #[serde(skip)]
    pub min_epsilon_lo: Option<Dyadic>,
    #[serde(skip)]
    pub rescued_min_epsilon_lo: Option<Dyadic>,
}

impl SweepReport {
    pub fn bound_for(&self, gap: Gap) -> Option<i64> {
        self.bounds.iter().find(|b| b.gap == gap).and_then(|b| b.bound)
    }

    pub fn ok(&self) -> bool {
        self.failures.is_empty() && self.undecided.is_empty()
    }
}

#[derive(Debug, Clone, Serialize)]
pub struct GapBound {
    pub gap: Gap,
    pub bound: i64,
}

#[derive(Debug, Clone, Serialize)]
pub struct StageReport {
    pub id: u8,
    pub form: &'static str,
    pub k_max: Option<u32>,
    pub l_max: Option<u32>,
    pub sweeps: Vec<SweepReport>,
    pub gap_bounds: Vec<GapBound>,
}

impl StageReport {
    pub fn bound(&self, gap: Gap) -> Option<i64> {
        self.gap_bounds.iter().find(|g| g.gap == gap).map(|g| g.bound)
    }

    pub fn sweep(&self, sign: Sign) -> &SweepReport {
        self.sweeps.iter().find(|s| s.sign == sign).expect("both signs are swept")
    }
}

#[derive(Debug, Clone, Serialize)]
pub struct LadderSummary {
    pub tau: &'static str,
    pub base_index: usize,
    pub convergents: Vec<Convergent>,
}

#[derive(Debug, Clone, Serialize)]
pub struct ParamCheck {
    pub stage: u8,
    pub sign: Sign,
    pub gap: Gap,
    pub a: u32,
    pub source: String,
    pub source_value: Enclosure,
    pub holds: bool,
}

#[derive(Debug, Clone, Copy, Serialize)]
pub struct FinalBounds {
    pub fib_gap: i64,
    pub trib_gap: i64,
    pub n: i64,
}

#[derive(Debug, Clone, Serialize)]
pub struct CampaignReport {
    pub modulus_label: String,
    #[serde(serialize_with = "bigint_str")]
    pub modulus: BigInt,
    #[serde(serialize_with = "opt_bigint_str")]
    pub required_modulus: Option<BigInt>,
    pub hypothesis_satisfied: bool,
    pub precision_bits: u32,
    pub max_escalations: usize,
    pub ladders: Vec<LadderSummary>,
    pub parameter_checks: Vec<ParamCheck>,
    pub mu_well_defined: bool,
    pub assumptions: Vec<String>,
    pub stages: Vec<StageReport>,
    pub final_bounds: Option<FinalBounds>,
    pub n_ceiling: i64,
    pub contradiction: bool,
    pub failures: Vec<String>,
    pub proof_complete: bool,
}

impl CampaignReport {
    pub fn stage(&self, id: u8) -> Option<&StageReport> {
        self.stages.iter().find(|s| s.id == id)
    }

    fn undecided_count(&self) -> usize {
        self.stages.iter().flat_map(|s| &s.sweeps).map(|s| s.undecided.len()).sum()
    }
}

impl fmt::Display for CampaignReport {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let yn = |b: bool| if b { "yes" } else { "no" };
        writeln!(f, "campaign M = {} at {} bits", self.modulus_label, self.precision_bits)?;
        match &self.required_modulus {
            Some(r) => writeln!(
                f,
                "  M covers the required bound ({} digits): {}",
                r.to_string().len(),
                yn(self.hypothesis_satisfied)
            )?,
            None => writeln!(f, "  no required bound supplied; hypothesis unchecked")?,
        }
        for l in &self.ladders {
            let q = &l.convergents[0].q;
            writeln!(
                f,
                "  {}: first convergent past 6M is k={} (q has {} digits)",
                l.tau,
                l.base_index,
                q.to_string().len()
            )?;
        }
        for c in self.parameter_checks.iter().filter(|c| !c.holds) {
            writeln!(f, "  parameter check failed: stage {} {} {} < {}", c.stage, c.sign, c.source, c.a)?;
        }
        for s in &self.stages {
            write!(f, "stage {} ({})", s.id, s.form)?;
            if let Some(k) = s.k_max {
                write!(f, " k<={k}")?;
            }
            if let Some(l) = s.l_max {
                write!(f, " l<={l}")?;
            }
            writeln!(f)?;
            for sw in &s.sweeps {
                write!(
                    f,
                    "  {:<8} {:>6} instances, min eps >= {}",
                    sw.sign,
                    sw.instances,
                    sw.min_epsilon.as_deref().unwrap_or("-")
                )?;
                for b in &sw.bounds {
                    match b.bound {
                        Some(v) => write!(f, ", {} <= {v}", b.gap)?,
                        None => write!(f, ", {} unbounded", b.gap)?,
                    }
                }
                writeln!(f)?;
                if !sw.rescued.is_empty() {
                    writeln!(
                        f,
                        "           {} rescued by a later convergent, min eps >= {}",
                        sw.rescued.len(),
                        sw.rescued_min_epsilon.as_deref().unwrap_or("-")
                    )?;
                }
                for fc in &sw.floor_checks {
                    writeln!(
                        f,
                        "           {} eps > {}: {}",
                        fc.kind,
                        fc.quoted,
                        if fc.holds { "certified" } else { "NOT certified" }
                    )?;
                }
            }
        }
        if let Some(fb) = self.final_bounds {
            writeln!(f, "final: n-n1 <= {}, m-m1 <= {}, n <= {}", fb.fib_gap, fb.trib_gap, fb.n)?;
            writeln!(f, "n <= {} < {}: {}", fb.n, self.n_ceiling, yn(self.contradiction))?;
        }
        for x in &self.failures {
            writeln!(f, "failure: {x}")?;
        }
        write!(f, "proof complete: {}", yn(self.proof_complete))
    }
}

#[derive(Debug, Error)]
pub enum CampaignError {
    #[error(transparent)]
    Reduction(#[from] ReductionError),
    #[error("precision exhausted at {bits} bits: {detail}")]
    PrecisionExhausted { bits: u32, detail: String, partial: Option<Box<CampaignReport>> },
}

impl From<MpError> for CampaignError {
    fn from(e: MpError) -> Self {
        CampaignError::Reduction(ReductionError::Arithmetic(e))
    }
}

#[derive(Debug, Clone, Default)]
pub struct CampaignOptions {
    /// Overrides the configured `M` (decimal literal).
    pub modulus: Option<String>,
    /// The certified bound the campaign's `M` has to cover.
    pub required_modulus: Option<BigInt>,
    pub policy: PrecisionPolicy,
    pub workers: Option<usize>,
}

/// Side conditions the sweeps rely on without checking them here.
pub fn assumptions(cfg: &CampaignConfig) -> Vec<String> {
    vec![
        format!(
            "stage 0 assumes min(n-n1, m-m1) >= {}; smaller gaps are routed to stages 1-3, which sweep every gap from 1",
            cfg.min_gap
        ),
        "under that assumption |Phi| < 1/4, hence |Lambda| < 1/2 and |Lambda| < 2|Phi| (certified in the bounds chain)".into(),
        "|Lambda_1| > 1/2 forces m-m1 = 1, |Lambda_2| > 1/2 forces n-n1 <= 6 and |Lambda_3| > 1/2 forces n <= 5; all are absorbed by the linear-form bounds".into(),
        "the linear forms are nonzero because Q(sqrt5) and Q(alpha_T) intersect in Q (not machine-checked)".into(),
        "the multiplier of tau is n < M for the positive sign and m < n < M for the negative sign".into(),
        format!("n >= {N_CEILING}; smaller n are covered by the exhaustive search"),
    ]
}

pub fn run_campaign(cfg: &CampaignConfig, opts: &CampaignOptions) -> Result<CampaignReport, CampaignError> {
    cfg.validate()?;
    let label = opts.modulus.clone().unwrap_or_else(|| cfg.modulus.clone());
    let m = parse_modulus(&label)?;
    let run = || campaign_loop(cfg, &label, &m, opts);
    match opts.workers {
        Some(n) => rayon::ThreadPoolBuilder::new()
            .num_threads(n.max(1))
            .build()
            .map_err(|e| ReductionError::Config(e.to_string()))?
            .install(run),
        None => run(),
    }
}

fn precision_like(e: &MpError) -> bool {
    matches!(e, MpError::PrecisionExhausted { .. } | MpError::TooWide | MpError::DivisorStraddlesZero)
}

fn campaign_loop(
    cfg: &CampaignConfig,
    label: &str,
    m: &BigInt,
    opts: &CampaignOptions,
) -> Result<CampaignReport, CampaignError> {
    let mut last = (opts.policy.initial, String::from("no precision tried"), None);
    for bits in opts.policy.schedule() {
        let consts = match AlgebraicConstants::new(bits) {
            Ok(c) => c,
            Err(e) if precision_like(&e) => {
                last = (bits, e.to_string(), None);
                continue;
            }
            Err(e) => return Err(e.into()),
        };
        let policy = PrecisionPolicy { initial: bits, ..opts.policy };
        match campaign_at(cfg, label, m, opts, &consts, policy) {
            Ok(r) if r.undecided_count() == 0 => return Ok(r),
            Ok(r) => last = (bits, format!("{} instances undecided", r.undecided_count()), Some(Box::new(r))),
            Err(CampaignError::Reduction(ReductionError::Arithmetic(e))) if precision_like(&e) => {
                last = (bits, e.to_string(), None)
            }
            Err(e) => return Err(e),
        }
    }
    Err(CampaignError::PrecisionExhausted { bits: last.0, detail: last.1, partial: last.2 })
}

struct Engine<'a> {
    consts: &'a AlgebraicConstants,
    m: &'a BigInt,
    mu: MuTable,
    ladders: [Ladder; 2],
}

impl<'a> Engine<'a> {
    fn new(
        consts: &'a AlgebraicConstants,
        m: &'a BigInt,
        depth: usize,
        policy: PrecisionPolicy,
    ) -> Result<Self, MpError> {
        let mut tau_cf = ContinuedFraction::tau(DEFAULT_TERMS, policy)?;
        let mut inv_cf = ContinuedFraction::tau_inv(DEFAULT_TERMS, policy)?;
        let ladders = [
            Ladder::build(&mut tau_cf, &consts.tau, m, depth)?,
            Ladder::build(&mut inv_cf, &consts.tau_inv, m, depth)?,
        ];
        Ok(Engine { consts, m, mu: MuTable::new(consts)?, ladders })
    }

    fn ladder(&self, sign: Sign) -> &Ladder {
        &self.ladders[sign as usize]
    }

    fn sweep(&self, sign: Sign, exprs: &[MuExpr], cfg: &SweepConfig) -> Result<SweepReport, CampaignError> {
        let ladder = self.ladder(sign);
        let c = self.consts;
        let p = c.working_prec();
        for param in &cfg.params {
            let a = CReal::from_integer(param.a, p);
            check_hypotheses(&a, param.b.value(c), self.m, &ladder.base().q)?;
        }
        let outcomes: Vec<Outcome> =
            exprs.par_iter().map(|e| evaluate(&self.mu.mu(sign, e), e.key(), ladder)).collect();

        let mut min_base: Option<(Dyadic, InstanceKey)> = None;
        let mut positive_at_base = 0;
        let mut escalations = Vec::new();
        let mut rescued = Vec::new();
        let mut failures = Vec::new();
        let mut undecided = Vec::new();
        // Smallest certified epsilon among rescued instances, per rung.
        let mut rescued_min: Vec<Option<Dyadic>> = vec![None; ladder.rungs.len()];
        for o in &outcomes {
            let (rung, eps, status) = o.last();
            if o.attempts.len() == 1 && *status == EpsilonStatus::Positive {
                positive_at_base += 1;
                if min_base.as_ref().map_or(true, |(d, _)| eps.lo() < d) {
                    min_base = Some((eps.lo().clone(), o.key));
                }
                continue;
            }
            escalations.push(Escalation {
                key: o.key,
                attempts: o
                    .attempts
                    .iter()
                    .map(|(r, e, s)| Attempt {
                        convergent: ladder.rungs[*r].conv.k,
                        status: *s,
                        epsilon_lo: lower_decimal(e.lo()),
                        epsilon_hi: upper_decimal(e.hi()),
                    })
                    .collect(),
                resolved_at: o.resolved().then(|| ladder.rungs[*rung].conv.k),
            });
            if o.resolved() {
                rescued.push(o.key);
                let slot = &mut rescued_min[*rung];
                if slot.as_ref().map_or(true, |d| eps.lo() < d) {
                    *slot = Some(eps.lo().clone());
                }
            } else if o.attempts.iter().any(|a| a.2 == EpsilonStatus::Undecided) {
                undecided.push(o.key);
            } else {
                failures.push(o.key);
            }
        }
        let rescued_min_lo = rescued_min.iter().flatten().min().cloned();

        let mut bounds = Vec::new();
        for param in &cfg.params {
            let a = CReal::from_integer(param.a, p);
            let log_b = param.b.log(c);
            let base_bound = match &min_base {
                Some((d, _)) => Some(to_i64(bound_for_epsilon_log(&a, log_b, &ladder.base().q, d)?)),
                None => None,
            };
            let mut rescued_bound: Option<i64> = None;
            for (r, d) in rescued_min.iter().enumerate() {
                if let Some(d) = d {
                    let b = to_i64(bound_for_epsilon_log(&a, log_b, &ladder.rungs[r].conv.q, d)?);
                    rescued_bound = Some(rescued_bound.map_or(b, |x| x.max(b)));
                }
            }
            let bound = if failures.is_empty() && undecided.is_empty() {
                Some(base_bound.into_iter().chain(rescued_bound).max().unwrap_or(0))
            } else {
                None
            };
            let matches_expected = param.expected_bound.map_or(true, |e| bound == Some(e))
                && param.expected_rescued_bound.map_or(true, |e| rescued_bound == Some(e));
            bounds.push(ParamBound {
                gap: param.gap,
                a: param.a,
                b: param.b,
                base_bound,
                rescued_bound,
                bound,
                expected_bound: param.expected_bound,
                expected_rescued_bound: param.expected_rescued_bound,
                matches_expected,
            });
        }

        let mut floor_checks = Vec::new();
        let floor = |kind: &'static str, quoted: &String, got: Option<&Dyadic>| -> Result<FloorCheck, MpError> {
            let q: BigRational = parse_decimal(quoted)?;
            Ok(FloorCheck {
                kind,
                quoted: quoted.clone(),
                certified_min: got.map(lower_decimal),
                holds: got.is_some_and(|d| d.to_rational() > q),
            })
        };
        if let Some(qf) = &cfg.epsilon_floor {
            floor_checks.push(floor("base", qf, min_base.as_ref().map(|x| &x.0))?);
        }
        if let Some(qf) = &cfg.rescued_epsilon_floor {
            floor_checks.push(floor("rescued", qf, rescued_min_lo.as_ref())?);
        }

        Ok(SweepReport {
            sign,
            tau: sign.tau_name(),
            base_convergent: ladder.base().k,
            instances: outcomes.len(),
            positive_at_base,
            min_epsilon: min_base.as_ref().map(|x| lower_decimal(&x.0)),
            min_epsilon_at: min_base.as_ref().map(|x| x.1),
            escalations,
            rescued,
            rescued_min_epsilon: rescued_min_lo.as_ref().map(lower_decimal),
            failures,
            undecided,
            bounds,
            floor_checks,
            min_epsilon_lo: min_base.map(|x| x.0),
            rescued_min_epsilon_lo: rescued_min_lo,
        })
    }

    fn stage(
        &mut self,
        cfg: &CampaignConfig,
        id: u8,
        k_max: Option<u32>,
        l_max: Option<u32>,
    ) -> Result<StageReport, CampaignError> {
        let (k, l) = (k_max.unwrap_or(0), l_max.unwrap_or(0));
        let exprs: Vec<MuExpr> = match id {
            0 => vec![MuExpr::Stage0],
            1 => (1..=k).map(|k| MuExpr::Stage1 { k }).collect(),
            2 => (1..=k).map(|k| MuExpr::Stage2 { k }).collect(),
            _ => (1..=k).flat_map(|k| (1..=l).map(move |l| MuExpr::Stage3 { k, l })).collect(),
        };
        match id {
            1 => self.mu.ensure(self.consts, k, 0)?,
            2 => self.mu.ensure(self.consts, 0, k)?,
            3 => self.mu.ensure(self.consts, k, l)?,
            _ => {}
        }
        let sc = cfg.stage(id);
        let sweeps =
            vec![self.sweep(Sign::Positive, &exprs, &sc.positive)?, self.sweep(Sign::Negative, &exprs, &sc.negative)?];
        let mut gap_bounds = Vec::new();
        if sweeps.iter().all(SweepReport::ok) {
            let mut gaps: Vec<Gap> = sc.positive.params.iter().map(|p| p.gap).collect();
            gaps.sort();
            for gap in gaps {
                let bound = sweeps.iter().filter_map(|s| s.bound_for(gap)).max().unwrap_or(0);
                gap_bounds.push(GapBound { gap, bound });
            }
        }
        let form = ["Lambda", "Lambda_1", "Lambda_2", "Lambda_3"][id as usize];
        Ok(StageReport { id, form, k_max, l_max, sweeps, gap_bounds })
    }
}

fn to_i64(b: BigInt) -> i64 {
    b.to_i64().unwrap_or(i64::MAX)
}

fn campaign_at(
    cfg: &CampaignConfig,
    label: &str,
    m: &BigInt,
    opts: &CampaignOptions,
    consts: &AlgebraicConstants,
    policy: PrecisionPolicy,
) -> Result<CampaignReport, CampaignError> {
    let depth = cfg.max_escalations;
    let mut engine = Engine::new(consts, m, depth, policy)?;

    let p = consts.working_prec();
    let mut parameter_checks = Vec::new();
    for s in &cfg.stages {
        for sign in [Sign::Positive, Sign::Negative] {
            for param in &s.sweep(sign).params {
                let v = param.source.eval(consts)?;
                parameter_checks.push(ParamCheck {
                    stage: s.id,
                    sign,
                    gap: param.gap,
                    a: param.a,
                    source: param.source.to_string(),
                    source_value: enclosure(&v),
                    holds: v.lt(&CReal::from_integer(param.a, p)),
                });
            }
        }
    }

    let hypothesis_satisfied = opts.required_modulus.as_ref().is_some_and(|r| m >= r);
    let mut report = CampaignReport {
        modulus_label: label.to_string(),
        modulus: m.clone(),
        required_modulus: opts.required_modulus.clone(),
        hypothesis_satisfied,
        precision_bits: consts.prec,
        max_escalations: depth,
        ladders: [Sign::Positive, Sign::Negative]
            .iter()
            .zip(&engine.ladders)
            .map(|(s, l)| LadderSummary {
                tau: s.tau_name(),
                base_index: l.base().k,
                convergents: l.rungs.iter().map(|r| r.conv.clone()).collect(),
            })
            .collect(),
        parameter_checks,
        mu_well_defined: false,
        assumptions: assumptions(cfg),
        stages: Vec::new(),
        final_bounds: None,
        n_ceiling: N_CEILING,
        contradiction: false,
        failures: Vec::new(),
        proof_complete: false,
    };
    for c in report.parameter_checks.iter().filter(|c| !c.holds) {
        report.failures.push(format!("stage {} {}: {} < {} not certified", c.stage, c.sign, c.source, c.a));
    }
    if opts.required_modulus.is_some() && !hypothesis_satisfied {
        report.failures.push("M is below the certified bound on n; the campaign does not cover every solution".into());
    }

    let s0 = engine.stage(cfg, 0, None, None)?;
    let (Some(fib0), Some(trib0)) = (s0.bound(Gap::FibGap), s0.bound(Gap::TribGap)) else {
        return Ok(abort(report, s0));
    };
    report.stages.push(s0);

    let s1 = engine.stage(cfg, 1, Some(fib0.max(0) as u32), None)?;
    let Some(trib1) = s1.bound(Gap::TribGap) else {
        return Ok(abort(report, s1));
    };
    report.stages.push(s1);

    let s2 = engine.stage(cfg, 2, Some(trib0.max(0) as u32), None)?;
    let Some(fib2) = s2.bound(Gap::FibGap) else {
        return Ok(abort(report, s2));
    };
    report.stages.push(s2);

    let (fib, trib) = (fib0.max(fib2), trib0.max(trib1));
    let s3 = engine.stage(cfg, 3, Some(fib.max(0) as u32), Some(trib.max(0) as u32))?;
    let Some(n) = s3.bound(Gap::N) else {
        return Ok(abort(report, s3));
    };
    report.stages.push(s3);
    // Every table entry went through the positivity check in `ensure`.
    report.mu_well_defined = true;

    report.final_bounds = Some(FinalBounds { fib_gap: fib, trib_gap: trib, n });
    report.contradiction = n < N_CEILING;
    if !report.contradiction {
        report.failures.push(format!("final bound n <= {n} does not reach below {N_CEILING}"));
    }
    report.proof_complete = report.failures.is_empty() && report.hypothesis_satisfied;
    Ok(report)
}

/// One stage on its own, for `M = m` at the precision of `consts`.
/// `k_max` and `l_max` are ignored where the stage has no such index.
pub fn run_stage(
    cfg: &CampaignConfig,
    consts: &AlgebraicConstants,
    m: &BigInt,
    id: u8,
    k_max: u32,
    l_max: u32,
) -> Result<StageReport, CampaignError> {
    cfg.validate()?;
    let (k, l) = match id {
        0 => (None, None),
        1 | 2 => (Some(k_max), None),
        3 => (Some(k_max), Some(l_max)),
        _ => return Err(ReductionError::Config(format!("no stage {id}")).into()),
    };
    let policy = PrecisionPolicy { initial: consts.prec, ..PrecisionPolicy::default() };
    let mut engine = Engine::new(consts, m, cfg.max_escalations, policy)?;
    engine.stage(cfg, id, k, l)
}

pub fn run_stage0(cfg: &CampaignConfig, consts: &AlgebraicConstants, m: &BigInt) -> Result<StageReport, CampaignError> {
    run_stage(cfg, consts, m, 0, 0, 0)
}

pub fn run_stage1(
    cfg: &CampaignConfig,
    consts: &AlgebraicConstants,
    m: &BigInt,
    k_max: u32,
) -> Result<StageReport, CampaignError> {
    run_stage(cfg, consts, m, 1, k_max, 0)
}

pub fn run_stage2(
    cfg: &CampaignConfig,
    consts: &AlgebraicConstants,
    m: &BigInt,
    k_max: u32,
) -> Result<StageReport, CampaignError> {
    run_stage(cfg, consts, m, 2, k_max, 0)
}

pub fn run_stage3(
    cfg: &CampaignConfig,
    consts: &AlgebraicConstants,
    m: &BigInt,
    k_max: u32,
    l_max: u32,
) -> Result<StageReport, CampaignError> {
    run_stage(cfg, consts, m, 3, k_max, l_max)
}

fn abort(mut report: CampaignReport, stage: StageReport) -> CampaignReport {
    for sw in &stage.sweeps {
        for k in &sw.failures {
            report.failures.push(format!(
                "stage {} {}: {k} has no positive epsilon within {} escalations",
                stage.id, sw.sign, report.max_escalations
            ));
        }
        for k in &sw.undecided {
            report.failures.push(format!("stage {} {}: {k} undecided", stage.id, sw.sign));
        }
    }
    report.stages.push(stage);
    report.proof_complete = false;
    report
}
