use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Parser, Subcommand, ValueEnum};
use num_bigint::BigInt;
use serde::Serialize;

use fibtrib::bounds::run_bounds;
use fibtrib::bruteforce::{compare_with_golden, search, GoldenVerdict, SolutionRecord};
use fibtrib::contfrac::{ContinuedFraction, Convergent};
use fibtrib::mpreal::{AlgebraicConstants, CReal, Enclosure, MpError};
use fibtrib::pipeline::{emit_report, verify, Config, ConfigError, Format, NamedEnclosure};
use fibtrib::reduction::campaign::parse_modulus;
use fibtrib::reduction::{
    dujella_epsilon, mu_value, run_campaign, tau_value, Base, CampaignError, CampaignOptions, EpsilonStatus, MuExpr,
    ReductionInstance, Sign,
};
use fibtrib::report::{enclosure, REPORT_DIGITS};
use fibtrib::sequences::{SequenceKind, SequenceTable};

const EXIT_SEARCH: u8 = 1;
const EXIT_BOUNDS: u8 = 2;
const EXIT_CAMPAIGN: u8 = 3;
const EXIT_PRECISION: u8 = 4;
const EXIT_CONFIG: u8 = 5;

#[derive(Parser)]
#[command(name = "fibtrib", version, about = "Certified replay of the F_n - T_m representation proof")]
struct Cli {
    /// Also write the result as JSON to this path (`-` for stdout).
    #[arg(long, global = true, value_name = "PATH")]
    json: Option<PathBuf>,
    /// Upper end of the precision schedule, in bits.
    #[arg(long, global = true, value_name = "BITS")]
    precision_max: Option<u32>,
    /// Worker threads for the parallel sweeps.
    #[arg(long, global = true, value_name = "N")]
    workers: Option<usize>,
    /// Pipeline configuration file (TOML).
    #[arg(long, global = true, value_name = "PATH")]
    config: Option<PathBuf>,
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Run the whole replay and report PROOF-REPLAYED or the failing step.
    Verify,
    /// Exhaustive search for c with two or more representations.
    Search {
        #[arg(long)]
        n_max: Option<usize>,
        #[arg(long)]
        m_max: Option<usize>,
    },
    /// Exact terms of a sequence.
    Seq {
        kind: SequenceKind,
        /// First index.
        k: usize,
        /// Last index (inclusive); defaults to `k`.
        #[arg(long)]
        to: Option<usize>,
    },
    /// Certified enclosures of the algebraic constants.
    Constants {
        #[arg(long)]
        bits: Option<u32>,
    },
    /// Continued fraction expansion and convergents.
    Cf {
        /// `tau`, `tau-inv` or `sqrtN`.
        value: String,
        #[arg(long, default_value_t = 12)]
        terms: usize,
    },
    /// One application of the reduction lemma.
    Reduce {
        #[arg(long, value_enum)]
        tau: TauArg,
        /// `stage0`, `stage1:K`, `stage2:K` or `stage3:K,L`.
        #[arg(long)]
        mu_expr: MuExpr,
        #[arg(long = "A")]
        a: String,
        /// `alpha`, `alpha_t` or a decimal literal.
        #[arg(long = "B")]
        b: String,
        #[arg(long = "M", default_value = "8e51")]
        m: String,
        /// Defaults to the first convergent with q > 6M.
        #[arg(long)]
        convergent_index: Option<usize>,
    },
    /// The four-stage reduction campaign.
    Campaign {
        /// Overrides M (defaults to the certified bound on n).
        #[arg(long = "M")]
        m: Option<String>,
    },
    /// Linear-form bounds chain.
    Bounds,
}

#[derive(Clone, Copy, ValueEnum)]
enum TauArg {
    Tau,
    TauInv,
}

struct Failure {
    code: u8,
    message: String,
}

impl Failure {
    fn new(code: u8, message: impl Into<String>) -> Self {
        Failure { code, message: message.into() }
    }
}

impl From<ConfigError> for Failure {
    fn from(e: ConfigError) -> Self {
        Failure::new(EXIT_CONFIG, e.to_string())
    }
}

impl From<MpError> for Failure {
    fn from(e: MpError) -> Self {
        let code = if matches!(e, MpError::PrecisionExhausted { .. }) { EXIT_PRECISION } else { EXIT_CONFIG };
        Failure::new(code, e.to_string())
    }
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(c) => c,
        Err(e) => {
            let code = if e.use_stderr() { EXIT_CONFIG } else { 0 };
            let _ = e.print();
            return ExitCode::from(code);
        }
    };
    match run(cli) {
        Ok(code) => ExitCode::from(code),
        Err(f) => {
            eprintln!("error: {}", f.message);
            ExitCode::from(f.code)
        }
    }
}

fn load_config(cli: &Cli) -> Result<Config, Failure> {
    let mut cfg = match &cli.config {
        Some(p) => Config::load(p)?,
        None => Config::default(),
    };
    if let Some(max) = cli.precision_max {
        cfg.precision_max = max;
        cfg.precision_initial = cfg.precision_initial.min(max);
    }
    if cli.workers.is_some() {
        cfg.workers = cli.workers;
    }
    cfg.validate()?;
    Ok(cfg)
}

fn write_json<T: Serialize>(path: &Option<PathBuf>, value: &T) -> Result<(), Failure> {
    let Some(path) = path else { return Ok(()) };
    let mut bytes = serde_json::to_vec_pretty(value).expect("serializable");
    bytes.push(b'\n');
    write_bytes(path, &bytes)
}

fn write_bytes(path: &PathBuf, bytes: &[u8]) -> Result<(), Failure> {
    if path.as_os_str() == "-" {
        use std::io::Write;
        std::io::stdout().write_all(bytes).map_err(|e| Failure::new(EXIT_CONFIG, e.to_string()))
    } else {
        std::fs::write(path, bytes)
            .map_err(|e| Failure::new(EXIT_CONFIG, format!("cannot write {}: {e}", path.display())))
    }
}

/// Text goes to stdout unless the JSON itself is going there.
fn say(cli: &Cli, text: impl std::fmt::Display) {
    if cli.json.as_ref().map_or(true, |p| p.as_os_str() != "-") {
        use std::io::Write;
        // A closed pipe (e.g. `| head`) is not an error worth reporting.
        let _ = writeln!(std::io::stdout().lock(), "{text}");
    }
}

/// Constants at the first precision of the schedule that certifies them.
fn constants(cfg: &Config, bits: Option<u32>) -> Result<AlgebraicConstants, Failure> {
    let schedule = match bits {
        Some(b) => vec![b],
        None => cfg.policy().schedule(),
    };
    let mut last = None;
    for b in schedule {
        match AlgebraicConstants::new(b) {
            Ok(c) if c.bracket_failures().is_empty() => return Ok(c),
            Ok(c) => {
                last = Some(Failure::new(EXIT_BOUNDS, format!("constant checks failed: {:?}", c.bracket_failures())))
            }
            Err(e) => last = Some(e.into()),
        }
    }
    Err(last.unwrap_or_else(|| Failure::new(EXIT_CONFIG, "empty precision schedule")))
}

fn run(cli: Cli) -> Result<u8, Failure> {
    let cfg = load_config(&cli)?;
    if let Some(n) = cfg.workers {
        // Only fails if a pool already exists, which cannot happen here.
        let _ = rayon::ThreadPoolBuilder::new().num_threads(n).build_global();
    }
    match &cli.command {
        Command::Verify => {
            let report = verify(&cfg)?;
            if let Some(p) = &cli.json {
                write_bytes(p, &emit_report(&report, Format::Json))?;
            }
            say(&cli, String::from_utf8_lossy(&emit_report(&report, Format::Text)).trim_end());
            Ok(report.exit_code as u8)
        }
        Command::Search { n_max, m_max } => {
            cmd_search(&cli, &cfg, n_max.unwrap_or(cfg.n_max), m_max.unwrap_or(cfg.m_max))
        }
        Command::Seq { kind, k, to } => cmd_seq(&cli, *kind, *k, to.unwrap_or(*k)),
        Command::Constants { bits } => {
            let c = constants(&cfg, *bits)?;
            let values: Vec<NamedEnclosure> =
                c.to_json(REPORT_DIGITS).into_iter().map(|(name, value)| NamedEnclosure { name, value }).collect();
            for v in &values {
                say(&cli, format!("{:<12} [{}, {}]", v.name, v.value.lo, v.value.hi));
            }
            write_json(&cli.json, &values)?;
            Ok(0)
        }
        Command::Cf { value, terms } => cmd_cf(&cli, &cfg, value, *terms),
        Command::Reduce { tau, mu_expr, a, b, m, convergent_index } => {
            let sign = match tau {
                TauArg::Tau => Sign::Positive,
                TauArg::TauInv => Sign::Negative,
            };
            cmd_reduce(&cli, &cfg, sign, mu_expr, a, b, m, *convergent_index)
        }
        Command::Campaign { m } => cmd_campaign(&cli, &cfg, m.clone()),
        Command::Bounds => {
            let c = constants(&cfg, None)?;
            let r = run_bounds(&c)?;
            say(&cli, format!("C(3,6) in [{}, {}]", r.c36.lo, r.c36.hi));
            for (label, l) in [("lemma 4", &r.lemma4), ("lemma 5", &r.lemma5)] {
                if let Some(l) = l {
                    for s in &l.steps {
                        say(&cli, format!("  {} {} < {}", if s.holds { "ok  " } else { "FAIL" }, s.name, s.target));
                    }
                    say(&cli, format!("{label}: coefficient <= {}", l.result));
                }
            }
            if let Some(p) = &r.proposition1 {
                for s in &p.steps {
                    say(&cli, format!("  {} {} < {}", if s.holds { "ok  " } else { "FAIL" }, s.name, s.target));
                }
                say(&cli, format!("n < {} (crossover in ({}, {}])", p.bound_label, p.crossover_lo, p.crossover_hi));
            }
            for g in &r.small_cases.small_gaps {
                say(
                    &cli,
                    format!("{} {}: |.| > 1/2 needs gap <= {} (quoted {})", g.form, g.gap, g.limit_rigorous, g.claimed),
                );
            }
            for e in &r.errors {
                say(&cli, format!("error: {e}"));
            }
            say(&cli, format!("all certified: {}", if r.all_pass { "yes" } else { "no" }));
            write_json(&cli.json, &r)?;
            Ok(if r.all_pass { 0 } else { EXIT_BOUNDS })
        }
    }
}

#[derive(Serialize)]
struct SearchOutput<'a> {
    n_max: usize,
    m_max: usize,
    records: &'a [SolutionRecord],
    golden: GoldenVerdict,
}

fn cmd_search(cli: &Cli, cfg: &Config, n_max: usize, m_max: usize) -> Result<u8, Failure> {
    let golden = cfg.golden()?;
    let records = search(n_max, m_max);
    let verdict = compare_with_golden(&records, &golden);
    for r in &records {
        say(cli, r);
    }
    say(cli, format!("golden table: {verdict}"));
    let code = if verdict.pass { 0 } else { EXIT_SEARCH };
    write_json(&cli.json, &SearchOutput { n_max, m_max, records: &records, golden: verdict })?;
    Ok(code)
}

#[derive(Serialize)]
struct Term {
    k: usize,
    value: String,
}

fn cmd_seq(cli: &Cli, kind: SequenceKind, from: usize, to: usize) -> Result<u8, Failure> {
    if to < from {
        return Err(Failure::new(EXIT_CONFIG, format!("empty range {from}..={to}")));
    }
    let table = SequenceTable::new(kind, to);
    let terms: Vec<Term> = (from..=to).map(|k| Term { k, value: table.values()[k].to_string() }).collect();
    for t in &terms {
        say(cli, format!("{kind}({}) = {}", t.k, t.value));
    }
    write_json(&cli.json, &terms)?;
    Ok(0)
}

#[derive(Serialize)]
struct CfOutput {
    value: String,
    bits: u32,
    quotients: Vec<String>,
    convergents: Vec<Convergent>,
}

fn cmd_cf(cli: &Cli, cfg: &Config, value: &str, terms: usize) -> Result<u8, Failure> {
    let policy = cfg.policy();
    let cf = match value {
        "tau" => ContinuedFraction::tau(terms, policy)?,
        "tau-inv" | "tau_inv" => ContinuedFraction::tau_inv(terms, policy)?,
        s => match s.strip_prefix("sqrt").and_then(|n| n.parse::<u32>().ok()) {
            Some(n) => ContinuedFraction::sqrt(n, terms, policy)?,
            None => return Err(Failure::new(EXIT_CONFIG, format!("unknown value {s:?}; use tau, tau-inv or sqrtN"))),
        },
    };
    let quotients: Vec<String> = cf.quotients().iter().take(terms).map(ToString::to_string).collect();
    say(cli, format!("{} = [{}]", cf.name(), quotients.join(", ")));
    let convergents: Vec<Convergent> = cf.convergents().iter().take(terms).cloned().collect();
    for c in &convergents {
        say(cli, format!("  {c}"));
    }
    write_json(&cli.json, &CfOutput { value: cf.name().to_string(), bits: cf.bits(), quotients, convergents })?;
    Ok(0)
}

#[derive(Serialize)]
struct ReduceOutput {
    tau: &'static str,
    mu_expr: String,
    mu: Enclosure,
    a: String,
    b: String,
    #[serde(serialize_with = "fibtrib::report::bigint_str")]
    m: BigInt,
    convergent: Convergent,
    epsilon: Enclosure,
    status: EpsilonStatus,
    #[serde(serialize_with = "fibtrib::report::opt_bigint_str")]
    k_bound: Option<BigInt>,
}

#[allow(clippy::too_many_arguments)]
fn cmd_reduce(
    cli: &Cli,
    cfg: &Config,
    sign: Sign,
    expr: &MuExpr,
    a: &str,
    b: &str,
    m: &str,
    index: Option<usize>,
) -> Result<u8, Failure> {
    let cfg_err = |e: fibtrib::reduction::ReductionError| Failure::new(EXIT_CONFIG, e.to_string());
    let m_int = parse_modulus(m).map_err(cfg_err)?;
    let policy = cfg.policy();
    let mut cf = match sign {
        Sign::Positive => ContinuedFraction::tau(fibtrib::contfrac::DEFAULT_TERMS, policy)?,
        Sign::Negative => ContinuedFraction::tau_inv(fibtrib::contfrac::DEFAULT_TERMS, policy)?,
    };
    let conv = match index {
        Some(k) => cf.convergent(k)?,
        None => cf.first_denominator_exceeding(&(&m_int * BigInt::from(6)))?,
    };
    let mut last = None;
    for bits in policy.schedule() {
        let c = AlgebraicConstants::new(bits)?;
        let p = c.working_prec();
        let a_val = CReal::from_decimal(a, p).map_err(|e| Failure::new(EXIT_CONFIG, format!("--A: {e}")))?;
        let b_val = match b.parse::<Base>() {
            Ok(base) => base.value(&c).clone(),
            Err(_) => CReal::from_decimal(b, p).map_err(|e| Failure::new(EXIT_CONFIG, format!("--B: {e}")))?,
        };
        let mu = mu_value(&c, sign, expr)?;
        let inst = ReductionInstance::new(
            tau_value(&c, sign).clone(),
            mu.clone(),
            a_val,
            b_val,
            m_int.clone(),
            conv.q.clone(),
        )
        .map_err(cfg_err)?;
        let out = dujella_epsilon(&inst).map_err(cfg_err)?;
        let decided = out.status != EpsilonStatus::Undecided;
        last = Some(ReduceOutput {
            tau: sign.tau_name(),
            mu_expr: expr.to_string(),
            mu: enclosure(&mu),
            a: a.to_string(),
            b: b.to_string(),
            m: m_int.clone(),
            convergent: conv.clone(),
            epsilon: enclosure(&out.epsilon),
            status: out.status,
            k_bound: out.k_bound,
        });
        if decided {
            break;
        }
    }
    let out = last.ok_or_else(|| Failure::new(EXIT_CONFIG, "empty precision schedule"))?;
    say(cli, format!("{} {}, q = q_{} = {}", out.tau, out.mu_expr, out.convergent.k, out.convergent.q));
    say(
        cli,
        format!("epsilon in [{}, {}] at {} bits: {:?}", out.epsilon.lo, out.epsilon.hi, out.epsilon.bits, out.status),
    );
    match &out.k_bound {
        Some(k) => say(cli, format!("largest k not excluded: {k}")),
        None => say(cli, "no bound: epsilon is not certified positive"),
    }
    let code = if out.status == EpsilonStatus::Undecided { EXIT_PRECISION } else { 0 };
    write_json(&cli.json, &out)?;
    Ok(code)
}

fn cmd_campaign(cli: &Cli, cfg: &Config, m: Option<String>) -> Result<u8, Failure> {
    let campaign_cfg = cfg.campaign()?;
    let c = constants(cfg, None)?;
    let bounds = run_bounds(&c)?;
    let required = bounds.n_bound().cloned();
    let modulus = m
        .or_else(|| cfg.campaign_modulus.clone())
        .or_else(|| bounds.proposition1.as_ref().filter(|_| required.is_some()).map(|p| p.bound_label.clone()));
    let opts = CampaignOptions { modulus, required_modulus: required, policy: cfg.policy(), workers: cfg.workers };
    match run_campaign(&campaign_cfg, &opts) {
        Ok(r) => {
            say(cli, &r);
            write_json(&cli.json, &r)?;
            Ok(if r.proof_complete { 0 } else { EXIT_CAMPAIGN })
        }
        Err(CampaignError::PrecisionExhausted { bits, detail, partial }) => {
            if let Some(p) = &partial {
                write_json(&cli.json, p)?;
            }
            Err(Failure::new(EXIT_PRECISION, format!("precision exhausted at {bits} bits: {detail}")))
        }
        Err(CampaignError::Reduction(e)) => Err(Failure::new(EXIT_CONFIG, e.to_string())),
    }
}
