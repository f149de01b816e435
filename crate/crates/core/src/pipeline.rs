//! End-to-end replay: constants, sequences, exhaustive search, bounds chain
//! and reduction campaign, glued into one report.

use std::fmt;
use std::path::{Path, PathBuf};

use num_bigint::BigInt;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::bounds::{run_bounds, BoundsReport, N_MIN};
use crate::bruteforce::{
    compare_with_golden, parse_golden, range_justification, search, GoldenVerdict, RangeJustification, SolutionRecord,
    GOLDEN_TABLE,
};
use crate::mpreal::{AlgebraicConstants, Enclosure, MpError, PrecisionPolicy, RadicalCrossCheck, MIN_PREC};
use crate::reduction::{run_campaign, CampaignConfig, CampaignError, CampaignOptions, CampaignReport};
use crate::report::REPORT_DIGITS;
use crate::sequences::{binet_check, growth_bounds_check, SequenceKind, SequenceTable};

pub const VERSION: &str = env!("CARGO_PKG_VERSION");

#[derive(Debug, Error)]
pub enum ConfigError {
    #[error("cannot read {path}: {source}")]
    Io { path: PathBuf, source: std::io::Error },
    #[error("config: {0}")]
    Invalid(String),
}

/// Pipeline configuration. Every default reproduces the published run.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct Config {
    pub precision_initial: u32,
    pub precision_max: u32,
    pub precision_factor: u32,
    /// The search covers `2 <= n < n_max`, `2 <= m < m_max`.
    pub n_max: usize,
    pub m_max: usize,
    /// Campaign `M`; defaults to the certified bound on `n`.
    pub campaign_modulus: Option<String>,
    /// Overrides `max_escalations` of the campaign file.
    pub max_escalations: Option<usize>,
    pub workers: Option<usize>,
    /// Golden table to compare the search with; the embedded one if unset.
    pub golden_table: Option<PathBuf>,
    /// Campaign parameter file; the embedded one if unset.
    pub campaign_config: Option<PathBuf>,
}

impl Default for Config {
    fn default() -> Self {
        let p = PrecisionPolicy::default();
        Config {
            precision_initial: p.initial,
            precision_max: p.max,
            precision_factor: p.factor,
            n_max: 300,
            m_max: 240,
            campaign_modulus: None,
            max_escalations: None,
            workers: None,
            golden_table: None,
            campaign_config: None,
        }
    }
}

impl Config {
    /// Parses TOML; relative paths are taken relative to `base`.
    pub fn from_toml(text: &str, base: Option<&Path>) -> Result<Self, ConfigError> {
        let mut cfg: Config = toml::from_str(text).map_err(|e| ConfigError::Invalid(e.to_string()))?;
        if let Some(base) = base {
            for p in [&mut cfg.golden_table, &mut cfg.campaign_config].into_iter().flatten() {
                if p.is_relative() {
                    *p = base.join(&*p);
                }
            }
        }
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn load(path: &Path) -> Result<Self, ConfigError> {
        let text = read(path)?;
        Self::from_toml(&text, path.parent())
    }

    pub fn validate(&self) -> Result<(), ConfigError> {
        let bad = |m: String| Err(ConfigError::Invalid(m));
        if self.precision_max < MIN_PREC {
            return bad(format!("precision_max must be at least {MIN_PREC}"));
        }
        if self.precision_initial > self.precision_max {
            return bad("precision_initial exceeds precision_max".into());
        }
        if self.precision_factor < 2 {
            return bad("precision_factor must be at least 2".into());
        }
        if self.n_max < 3 || self.m_max < 3 {
            return bad("n_max and m_max must be at least 3".into());
        }
        if self.workers == Some(0) {
            return bad("workers must be positive".into());
        }
        if let Some(m) = &self.campaign_modulus {
            crate::reduction::campaign::parse_modulus(m).map_err(|e| ConfigError::Invalid(e.to_string()))?;
        }
        Ok(())
    }

    pub fn policy(&self) -> PrecisionPolicy {
        PrecisionPolicy { initial: self.precision_initial, max: self.precision_max, factor: self.precision_factor }
    }

    pub fn golden(&self) -> Result<Vec<SolutionRecord>, ConfigError> {
        let text = match &self.golden_table {
            Some(p) => read(p)?,
            None => GOLDEN_TABLE.to_string(),
        };
        parse_golden(&text).map_err(|e| ConfigError::Invalid(e.to_string()))
    }

    pub fn campaign(&self) -> Result<CampaignConfig, ConfigError> {
        let mut c = match &self.campaign_config {
            Some(p) => CampaignConfig::from_toml(&read(p)?).map_err(|e| ConfigError::Invalid(e.to_string()))?,
            None => CampaignConfig::shipped(),
        };
        if let Some(e) = self.max_escalations {
            c.max_escalations = e;
        }
        Ok(c)
    }
}

fn read(path: &Path) -> Result<String, ConfigError> {
    std::fs::read_to_string(path).map_err(|source| ConfigError::Io { path: path.to_path_buf(), source })
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum Step {
    Constants,
    Sequences,
    Search,
    Bounds,
    Campaign,
}

impl Step {
    pub fn exit_code(self) -> i32 {
        match self {
            Step::Search => 1,
            Step::Constants | Step::Sequences | Step::Bounds => 2,
            Step::Campaign => 3,
        }
    }
}

impl fmt::Display for Step {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Step::Constants => "constants",
            Step::Sequences => "sequences",
            Step::Search => "search",
            Step::Bounds => "bounds",
            Step::Campaign => "campaign",
        })
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum StepState {
    Passed,
    Failed,
    PrecisionExhausted,
    Skipped,
}

#[derive(Debug, Clone, Serialize)]
pub struct StepStatus {
    pub step: Step,
    pub state: StepState,
    pub detail: Vec<String>,
}

#[derive(Debug, Clone, Serialize)]
pub struct NamedEnclosure {
    pub name: String,
    #[serde(flatten)]
    pub value: Enclosure,
}

#[derive(Debug, Clone, Serialize)]
pub struct ConstantsResult {
    pub bits: u32,
    pub values: Vec<NamedEnclosure>,
    pub bracket_failures: Vec<String>,
    pub radical_cross_check: RadicalCrossCheck,
}

#[derive(Debug, Clone, Serialize)]
pub struct SequenceResult {
    pub fibonacci_growth_max_index: usize,
    pub fibonacci_growth_failures: Vec<usize>,
    pub tribonacci_growth_max_index: usize,
    pub tribonacci_growth_failures: Vec<usize>,
    /// Indices whose Binet enclosure misses the exact term.
    pub binet_failures: Vec<String>,
}

#[derive(Debug, Clone, Serialize)]
pub struct SearchResult {
    pub n_max: usize,
    pub m_max: usize,
    pub c_values: Vec<String>,
    pub representations: usize,
    pub records: Vec<SolutionRecord>,
    pub golden: GoldenVerdict,
    /// `m` range admitted at `n = n_max - 1`.
    pub range: Option<RangeJustification>,
    /// Every `n < 300` and every `m` compatible with it was searched.
    pub covers_small_n: bool,
}

#[derive(Debug, Clone, Serialize)]
pub struct VerifyReport {
    pub version: String,
    pub timestamp: String,
    pub precision_policy: PrecisionPolicy,
    pub constants: Option<ConstantsResult>,
    pub sequences: Option<SequenceResult>,
    pub search_result: Option<SearchResult>,
    pub bounds_result: Option<BoundsReport>,
    pub campaign_result: Option<CampaignReport>,
    pub steps: Vec<StepStatus>,
    pub overall: String,
    pub exit_code: i32,
}

impl VerifyReport {
    pub fn passed(&self) -> bool {
        self.exit_code == 0
    }

    pub fn step(&self, s: Step) -> Option<&StepStatus> {
        self.steps.iter().find(|x| x.step == s)
    }
}

fn precision_like(e: &MpError) -> bool {
    matches!(e, MpError::PrecisionExhausted { .. } | MpError::TooWide | MpError::DivisorStraddlesZero)
}

/// Runs `f` along the schedule until it passes. The last attempt is kept.
fn escalate<T>(
    policy: &PrecisionPolicy,
    mut f: impl FnMut(u32) -> Result<(T, Vec<String>), MpError>,
) -> (Option<T>, StepState, Vec<String>) {
    let mut last = (None, StepState::PrecisionExhausted, vec!["no precision tried".to_string()]);
    for bits in policy.schedule() {
        match f(bits) {
            Ok((v, problems)) if problems.is_empty() => return (Some(v), StepState::Passed, problems),
            Ok((v, problems)) => last = (Some(v), StepState::Failed, problems),
            Err(e) if precision_like(&e) => {
                last = (None, StepState::PrecisionExhausted, vec![format!("{bits} bits: {e}")])
            }
            Err(e) => return (None, StepState::Failed, vec![e.to_string()]),
        }
    }
    last
}

fn check_constants(bits: u32) -> Result<((ConstantsResult, AlgebraicConstants), Vec<String>), MpError> {
    let c = AlgebraicConstants::new(bits)?;
    let radical = RadicalCrossCheck::run(&c)?;
    let mut problems = c.bracket_failures();
    if !radical.all() {
        problems.push(format!("radical expressions disagree with the polynomial roots: {radical:?}"));
    }
    let values = c.to_json(REPORT_DIGITS).into_iter().map(|(name, value)| NamedEnclosure { name, value }).collect();
    let r = ConstantsResult { bits, values, bracket_failures: c.bracket_failures(), radical_cross_check: radical };
    Ok(((r, c), problems))
}

fn check_sequences(
    c: &AlgebraicConstants,
    n_max: usize,
    m_max: usize,
) -> Result<(SequenceResult, Vec<String>), MpError> {
    let growth = |kind, k| {
        growth_bounds_check(kind, k, c).map_err(|e| match e {
            crate::sequences::SequenceError::Arithmetic(e) => e,
            other => MpError::Domain { op: "growth_bounds_check", detail: other.to_string() },
        })
    };
    let fib = growth(SequenceKind::Fibonacci, n_max)?;
    let trib = growth(SequenceKind::Tribonacci, m_max)?;
    let mut binet_failures = Vec::new();
    for (kind, upto) in
        [(SequenceKind::Fibonacci, n_max), (SequenceKind::Lucas, n_max), (SequenceKind::Tribonacci, m_max)]
    {
        let table = SequenceTable::new(kind, upto);
        for (k, v) in table.values().iter().enumerate() {
            // The Tribonacci error term only dominates from k = 1 on.
            if kind == SequenceKind::Tribonacci && k == 0 {
                continue;
            }
            let e = binet_check(kind, k, c)?;
            if !e.contains_integer(v) {
                binet_failures.push(format!("{kind}({k})"));
            }
        }
    }
    let mut problems = Vec::new();
    if !fib.is_empty() {
        problems.push(format!("Fibonacci growth fails at {fib:?}"));
    }
    if !trib.is_empty() {
        problems.push(format!("Tribonacci growth fails at {trib:?}"));
    }
    if !binet_failures.is_empty() {
        problems.push(format!("Binet enclosures miss {}", binet_failures.join(", ")));
    }
    let r = SequenceResult {
        fibonacci_growth_max_index: n_max,
        fibonacci_growth_failures: fib,
        tribonacci_growth_max_index: m_max,
        tribonacci_growth_failures: trib,
        binet_failures,
    };
    Ok((r, problems))
}

fn run_search(cfg: &Config, golden: &[SolutionRecord], c: Option<&AlgebraicConstants>) -> (SearchResult, Vec<String>) {
    let records = search(cfg.n_max, cfg.m_max);
    let verdict = compare_with_golden(&records, golden);
    let range = c.and_then(|c| range_justification(cfg.n_max as u64 - 1, c).ok());
    let m_ok = range.as_ref().is_some_and(|r| r.derivation_certified && r.m_below(cfg.m_max as i64));
    let covers_small_n = cfg.n_max as i64 >= N_MIN && m_ok;
    let mut problems = Vec::new();
    if !verdict.pass {
        problems.push(format!("golden table: {verdict}"));
    }
    if !covers_small_n {
        problems.push(format!(
            "search range n < {}, m < {} does not cover every n < {N_MIN} with its admissible m",
            cfg.n_max, cfg.m_max
        ));
    }
    let result = SearchResult {
        n_max: cfg.n_max,
        m_max: cfg.m_max,
        c_values: records.iter().map(|r| r.c.to_string()).collect(),
        representations: records.iter().map(|r| r.reps.len()).sum(),
        records,
        golden: verdict,
        range,
        covers_small_n,
    };
    (result, problems)
}

/// Runs the full replay. Configuration problems surface before any
/// computation starts; everything after that is recorded in the report.
pub fn verify(cfg: &Config) -> Result<VerifyReport, ConfigError> {
    cfg.validate()?;
    let golden = cfg.golden()?;
    let campaign_cfg = cfg.campaign()?;
    let policy = cfg.policy();
    let mut steps = Vec::new();
    let mut status = |step, state, detail| steps.push(StepStatus { step, state, detail });

    let (consts, state, detail) = escalate(&policy, check_constants);
    let (constants, c) = match consts {
        Some((r, c)) => (Some(r), Some(c)),
        None => (None, None),
    };
    status(Step::Constants, state, detail);

    let sequences = match &c {
        Some(c) => {
            let mut pol = policy;
            pol.initial = c.prec;
            let (r, state, detail) = escalate(&pol, |bits| {
                if bits == c.prec {
                    check_sequences(c, cfg.n_max, cfg.m_max)
                } else {
                    check_sequences(&AlgebraicConstants::new(bits)?, cfg.n_max, cfg.m_max)
                }
            });
            status(Step::Sequences, state, detail);
            r
        }
        None => {
            status(Step::Sequences, StepState::Skipped, vec!["constants unavailable".into()]);
            None
        }
    };

    let (search_result, problems) = run_search(cfg, &golden, c.as_ref());
    let state = if problems.is_empty() { StepState::Passed } else { StepState::Failed };
    status(Step::Search, state, problems);

    let (bounds_result, state, detail) = escalate(&policy, |bits| {
        let c = AlgebraicConstants::new(bits)?;
        let r = run_bounds(&c)?;
        let problems = if r.all_pass {
            Vec::new()
        } else if r.errors.is_empty() {
            vec!["a side condition of the bounds chain failed".to_string()]
        } else {
            r.errors.clone()
        };
        Ok((r, problems))
    });
    status(Step::Bounds, state, detail);

    let required: Option<BigInt> = bounds_result.as_ref().and_then(|b| b.n_bound().cloned());
    let modulus = cfg.campaign_modulus.clone().or_else(|| {
        bounds_result
            .as_ref()
            .and_then(|b| b.proposition1.as_ref())
            .filter(|_| required.is_some())
            .map(|p| p.bound_label.clone())
    });
    let opts = CampaignOptions { modulus, required_modulus: required.clone(), policy, workers: cfg.workers };
    let campaign_result = match run_campaign(&campaign_cfg, &opts) {
        Ok(r) => {
            let mut problems = r.failures.clone();
            if required.is_none() {
                problems.push("no certified bound on n to check M against".into());
            }
            match r.final_bounds {
                Some(fb) if (fb.n as i128) < cfg.n_max as i128 => {}
                Some(fb) => {
                    problems.push(format!("final bound n <= {} is not below the search ceiling {}", fb.n, cfg.n_max))
                }
                None => problems.push("campaign produced no final bound".into()),
            }
            if !r.proof_complete && problems.is_empty() {
                problems.push("campaign is not proof-complete".into());
            }
            let state = if problems.is_empty() { StepState::Passed } else { StepState::Failed };
            status(Step::Campaign, state, problems);
            Some(r)
        }
        Err(CampaignError::PrecisionExhausted { bits, detail, partial }) => {
            status(Step::Campaign, StepState::PrecisionExhausted, vec![format!("{bits} bits: {detail}")]);
            partial.map(|b| *b)
        }
        Err(e) => {
            status(Step::Campaign, StepState::Failed, vec![e.to_string()]);
            None
        }
    };

    let first_bad = steps.iter().find(|s| s.state != StepState::Passed);
    let (overall, exit_code) = match first_bad {
        None => ("PROOF-REPLAYED".to_string(), 0),
        Some(s) => {
            let code = if s.state == StepState::PrecisionExhausted { 4 } else { s.step.exit_code() };
            (format!("FAILED({})", s.step), code)
        }
    };
    Ok(VerifyReport {
        version: VERSION.to_string(),
        timestamp: chrono::Utc::now().to_rfc3339_opts(chrono::SecondsFormat::Secs, true),
        precision_policy: policy,
        constants,
        sequences,
        search_result: Some(search_result),
        bounds_result,
        campaign_result,
        steps,
        overall,
        exit_code,
    })
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Format {
    Json,
    Text,
}

impl std::str::FromStr for Format {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s {
            "json" => Ok(Format::Json),
            "text" => Ok(Format::Text),
            _ => Err(format!("unknown format {s:?}")),
        }
    }
}

pub fn emit_report(report: &VerifyReport, format: Format) -> Vec<u8> {
    match format {
        Format::Json => {
            let mut v = serde_json::to_vec_pretty(report).expect("report serializes");
            v.push(b'\n');
            v
        }
        Format::Text => report.to_string().into_bytes(),
    }
}

impl fmt::Display for VerifyReport {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        writeln!(f, "fibtrib {} verify", self.version)?;
        let p = &self.precision_policy;
        writeln!(f, "precision {} .. {} bits (x{})", p.initial, p.max, p.factor)?;
        if let Some(c) = &self.constants {
            writeln!(f)?;
            writeln!(f, "constants at {} bits", c.bits)?;
            for v in &c.values {
                writeln!(f, "  {:<12} [{}, {}]", v.name, v.value.lo, v.value.hi)?;
            }
        }
        if let Some(s) = &self.sequences {
            writeln!(f)?;
            writeln!(
                f,
                "growth inequalities: F up to {} ({} failures), T up to {} ({} failures); Binet misses: {}",
                s.fibonacci_growth_max_index,
                s.fibonacci_growth_failures.len(),
                s.tribonacci_growth_max_index,
                s.tribonacci_growth_failures.len(),
                s.binet_failures.len()
            )?;
        }
        if let Some(s) = &self.search_result {
            writeln!(f)?;
            writeln!(
                f,
                "search 2 <= n < {}, 2 <= m < {}: {} values of c, {} representations",
                s.n_max,
                s.m_max,
                s.records.len(),
                s.representations
            )?;
            for r in &s.records {
                writeln!(f, "  {r}")?;
            }
            writeln!(f, "golden table: {}", s.golden)?;
            if let Some(r) = &s.range {
                writeln!(f, "n <= {} admits m <= {}", r.n, r.m_max)?;
            }
        }
        if let Some(b) = &self.bounds_result {
            writeln!(f)?;
            writeln!(f, "bounds at {} bits", b.precision_bits)?;
            writeln!(f, "  C(3,6) in [{}, {}]", b.c36.lo, b.c36.hi)?;
            for (label, l) in [("lemma 4", &b.lemma4), ("lemma 5", &b.lemma5)] {
                if let Some(l) = l {
                    writeln!(f, "  {label}: coefficient <= {} ({} steps)", l.result, l.steps.len())?;
                }
            }
            if let Some(p) = &b.proposition1 {
                writeln!(f, "  n < {} (f changes sign in ({}, {}])", p.bound_label, p.crossover_lo, p.crossover_hi)?;
            }
            for e in &b.errors {
                writeln!(f, "  error: {e}")?;
            }
        }
        if let Some(c) = &self.campaign_result {
            writeln!(f)?;
            writeln!(f, "{c}")?;
        }
        writeln!(f)?;
        for s in &self.steps {
            let state = match s.state {
                StepState::Passed => "passed",
                StepState::Failed => "FAILED",
                StepState::PrecisionExhausted => "PRECISION EXHAUSTED",
                StepState::Skipped => "skipped",
            };
            writeln!(f, "{:<10} {state}", s.step)?;
            for d in &s.detail {
                writeln!(f, "           {d}")?;
            }
        }
        writeln!(f, "overall: {}", self.overall)
    }
}
