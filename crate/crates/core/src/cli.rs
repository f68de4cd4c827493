//! The `maskcheck` command line.
//!
//! Exit codes: `0` on success (any verdict), `2` for invalid parameters or
//! malformed input, `3` when a check that must always hold has failed. Every
//! JSON document carries `"schema": "maskcheck/1"`, and JSON output depends
//! only on the subcommand, its flags, and the seed.

use std::ffi::OsString;
use std::io::Write;
use std::path::PathBuf;

use clap::{Parser, Subcommand, ValueEnum};
use rand::Rng;
use serde::Serialize;

use crate::bias;
use crate::bitvec::{self, WidthConfig};
use crate::butterfly::{self, SweepConfig};
use crate::census;
use crate::wire::{self, Verdict, WireFile, WireFunction};
use crate::zq::Modulus;
use crate::SCHEMA;

pub const EXIT_OK: i32 = 0;
pub const EXIT_INVALID: i32 = 2;
pub const EXIT_VIOLATION: i32 = 3;

/// Environment variable for the default census worker count.
pub const WORKERS_ENV: &str = "MASKCHECK_WORKERS";

#[derive(Debug, Parser)]
#[command(name = "maskcheck", version, about = "Distributional checks for arithmetic masking over Z/qZ")]
pub struct Cli {
    /// Output format.
    #[arg(long, value_enum, global = true, default_value_t = Format::Human)]
    pub format: Format,
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, ValueEnum)]
pub enum Format {
    Json,
    Csv,
    Human,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Classify a wire function read from a JSON file.
    Classify { path: PathBuf },
    /// Classify every Boolean wire at a small modulus.
    Census {
        #[arg(long)]
        q: u64,
        #[arg(long, env = WORKERS_ENV)]
        workers: Option<usize>,
        /// Also write per-verdict counts as CSV to this file.
        #[arg(long)]
        csv: Option<PathBuf>,
        /// Include wall-clock time (makes output run-dependent).
        #[arg(long)]
        timing: bool,
    },
    /// Residue counts of {0..N-1} reduced mod q.
    Bias {
        #[arg(long, required_unless_present = "bits", conflicts_with = "bits")]
        n: Option<u64>,
        /// Generator width k, N = 2^k.
        #[arg(long)]
        bits: Option<u32>,
        #[arg(long)]
        q: u64,
        /// Omit the per-residue counts.
        #[arg(long)]
        summary: bool,
    },
    /// Width admissibility and the range of x + q - s1.
    Bounds {
        #[arg(long)]
        q: u64,
        #[arg(long)]
        w: u32,
    },
    /// Compare the URem word encoding with ring reparametrization.
    UremCheck {
        #[arg(long)]
        q: u64,
        #[arg(long)]
        w: u32,
        #[arg(long, default_value_t = 0)]
        seed: u64,
        /// Sampled pairs when q is too large for exhaustive checking.
        #[arg(long, default_value_t = 100_000)]
        samples: u64,
    },
    /// Emit and check the indicator-of-zero wire for modulus q.
    Witness {
        #[arg(long)]
        q: u64,
        /// Write the wire table here.
        #[arg(long)]
        out: Option<PathBuf>,
        /// Seeded (x, x') pairs for the translation check.
        #[arg(long, default_value_t = 100)]
        pairs: u64,
        #[arg(long, default_value_t = 0)]
        seed: u64,
    },
    /// Sweep masked butterfly networks and classify every tap.
    Butterfly {
        #[arg(long)]
        q: u64,
        #[arg(long, default_value_t = 1)]
        stages: usize,
        /// Twiddle candidates (default: units of Z_q).
        #[arg(long, value_delimiter = ',')]
        twiddles: Vec<u64>,
        #[arg(long, default_value_t = 2)]
        contexts: usize,
        #[arg(long, default_value_t = 0)]
        seed: u64,
        /// Omit the per-tap list.
        #[arg(long)]
        summary: bool,
    },
}

#[derive(Serialize)]
struct Envelope<'a, T: Serialize> {
    schema: &'static str,
    command: &'a str,
    #[serde(flatten)]
    body: T,
}

/// What a subcommand produced: a report and an exit code.
struct Outcome {
    json: serde_json::Value,
    human: String,
    csv: Option<String>,
    code: i32,
}

struct Failure(String);

impl<E: std::fmt::Display> From<E> for Failure {
    fn from(e: E) -> Self {
        Failure(e.to_string())
    }
}

/// Parses `args` and runs the subcommand. Returns the process exit code.
pub fn run<I, T>(args: I, out: &mut dyn Write, err: &mut dyn Write) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(cli) => cli,
        Err(e) => {
            let code = if e.use_stderr() { EXIT_INVALID } else { EXIT_OK };
            let text = e.render().to_string();
            let _ = if code == EXIT_OK {
                write!(out, "{text}")
            } else {
                write!(err, "{text}")
            };
            return code;
        }
    };
    execute(&cli, out, err)
}

pub fn execute(cli: &Cli, out: &mut dyn Write, err: &mut dyn Write) -> i32 {
    let name = command_name(&cli.command);
    let result = std::panic::catch_unwind(|| dispatch(&cli.command, cli.format));
    let outcome = match result {
        Ok(Ok(o)) => o,
        Ok(Err(Failure(msg))) => {
            let _ = writeln!(err, "error: {msg}");
            return EXIT_INVALID;
        }
        Err(_) => {
            let _ = writeln!(err, "error: internal invariant violated");
            return EXIT_VIOLATION;
        }
    };
    let written = match cli.format {
        Format::Json => {
            let doc = Envelope {
                schema: SCHEMA,
                command: name,
                body: &outcome.json,
            };
            serde_json::to_string_pretty(&doc)
                .map_err(std::io::Error::other)
                .and_then(|s| writeln!(out, "{s}"))
        }
        Format::Human => write!(out, "{}", outcome.human),
        Format::Csv => match &outcome.csv {
            Some(csv) => write!(out, "{csv}"),
            None => {
                let _ = writeln!(err, "error: --format csv is not supported by `{name}`");
                return EXIT_INVALID;
            }
        },
    };
    if let Err(e) = written {
        let _ = writeln!(err, "error: {e}");
        return EXIT_INVALID;
    }
    if outcome.code == EXIT_VIOLATION {
        let _ = writeln!(err, "error: a check that must always hold has failed");
    }
    outcome.code
}

fn command_name(c: &Command) -> &'static str {
    match c {
        Command::Classify { .. } => "classify",
        Command::Census { .. } => "census",
        Command::Bias { .. } => "bias",
        Command::Bounds { .. } => "bounds",
        Command::UremCheck { .. } => "urem-check",
        Command::Witness { .. } => "witness",
        Command::Butterfly { .. } => "butterfly",
    }
}

fn dispatch(cmd: &Command, format: Format) -> Result<Outcome, Failure> {
    match cmd {
        Command::Classify { path } => cmd_classify(path),
        Command::Census {
            q,
            workers,
            csv,
            timing,
        } => cmd_census(*q, *workers, csv.as_deref(), *timing),
        Command::Bias { n, bits, q, summary } => cmd_bias(*n, *bits, *q, *summary),
        Command::Bounds { q, w } => cmd_bounds(*q, *w),
        Command::UremCheck { q, w, seed, samples } => cmd_urem_check(*q, *w, *seed, *samples),
        Command::Witness {
            q,
            out,
            pairs,
            seed,
        } => cmd_witness(*q, out.as_deref(), *pairs, *seed),
        Command::Butterfly {
            q,
            stages,
            twiddles,
            contexts,
            seed,
            summary,
        } => cmd_butterfly(*q, *stages, twiddles, *contexts, *seed, *summary || format != Format::Json),
    }
}

fn to_json<T: Serialize>(v: &T) -> serde_json::Value {
    serde_json::to_value(v).expect("reports serialize")
}

fn cmd_classify(path: &std::path::Path) -> Result<Outcome, Failure> {
    let text = std::fs::read_to_string(path)
        .map_err(|e| Failure(format!("{}: {e}", path.display())))?;
    let file: WireFile = serde_json::from_str(&text)
        .map_err(|e| Failure(format!("{}: malformed wire file: {e}", path.display())))?;
    let w = WireFunction::from_file(file)?;
    let report = wire::analyze(&w);

    let mut human = format!(
        "q = {}, alphabet = {}\nverdict: {}\nmutual information: {} bits{}\nhistogram h(x, v):\n",
        report.q,
        report.alphabet,
        report.verdict,
        report.mutual_information.bits,
        if report.mutual_information.is_zero { " (exactly zero)" } else { "" },
    );
    for (x, row) in report.histogram.iter().enumerate() {
        human.push_str(&format!("  x = {x}: {row:?}\n"));
    }
    Ok(Outcome {
        json: to_json(&report),
        human,
        csv: None,
        code: EXIT_OK,
    })
}

#[derive(Serialize)]
struct CensusOut<'a> {
    #[serde(flatten)]
    report: &'a census::CensusReport,
    constant_marginal_formula: u128,
    formula_agrees: bool,
    #[serde(skip_serializing_if = "Option::is_none")]
    wall_time_secs: Option<f64>,
}

fn default_workers() -> usize {
    std::thread::available_parallelism().map_or(1, |n| n.get())
}

fn cmd_census(
    q: u64,
    workers: Option<usize>,
    csv_path: Option<&std::path::Path>,
    timing: bool,
) -> Result<Outcome, Failure> {
    let report = census::run_census(q, workers.unwrap_or_else(default_workers))?;
    let formula = census::constant_marginal_count_formula(q)?;
    let agrees = formula == report.count_constant_marginal as u128;

    let mut csv = Vec::new();
    census::write_csv(&report, &mut csv)?;
    if let Some(path) = csv_path {
        std::fs::write(path, &csv).map_err(|e| Failure(format!("{}: {e}", path.display())))?;
    }

    let ok = report.check_invariants() && agrees;
    let human = format!(
        "q = {q}: {} wires\n  value-independent:      {}\n  constant marginal only: {}\n  non-constant marginal:  {}\n  soundness violations:   {}\n  constant-marginal formula: {formula} ({})\n",
        report.total_wires,
        report.count_value_independent,
        report.count_conservative,
        report.count_non_constant,
        report.soundness_violations,
        if agrees { "agrees" } else { "DISAGREES" },
    );
    Ok(Outcome {
        json: to_json(&CensusOut {
            report: &report,
            constant_marginal_formula: formula,
            formula_agrees: agrees,
            wall_time_secs: timing.then_some(report.wall_time.as_secs_f64()),
        }),
        human,
        csv: Some(String::from_utf8(csv).expect("csv is utf-8")),
        code: if ok { EXIT_OK } else { EXIT_VIOLATION },
    })
}

fn cmd_bias(n: Option<u64>, bits: Option<u32>, q: u64, summary: bool) -> Result<Outcome, Failure> {
    let q = Modulus::new(q)?;
    let profile = match (n, bits) {
        (Some(n), _) => bias::bias_profile(n, q)?,
        (None, Some(k)) => bias::rng_profile(k, q)?,
        (None, None) => return Err(Failure("one of --n or --bits is required".into())),
    };
    let s = profile.summary(!summary);

    let mut csv = String::from("residue,count\n");
    if q.get() <= bias::FULL_COUNTS_LIMIT {
        for (r, c) in profile.counts.iter().enumerate() {
            csv.push_str(&format!("{r},{c}\n"));
        }
    }
    let mut human = format!(
        "N = {}, q = {}\n  counts in [{}, {}] (floor/ceil N/q = {}, {})\n  ratio max/min: {}\n  q divides N: {}\n  bounds verified: {}\n",
        s.n, s.q, s.min_count, s.max_count, s.floor_bound, s.ceil_bound, s.ratio, s.divides_exactly, s.bounds_verified
    );
    if s.max_count != s.min_count {
        let split = (0..q.get()).find(|&r| profile.counts.get(r) != s.max_count);
        if let Some(r) = split {
            human.push_str(&format!(
                "  residues 0..{r} occur {} times, the rest {}\n",
                s.max_count, s.min_count
            ));
        }
    }
    Ok(Outcome {
        code: if s.bounds_verified { EXIT_OK } else { EXIT_VIOLATION },
        json: to_json(&s),
        human,
        csv: Some(csv),
    })
}

#[derive(Serialize)]
struct BoundsOut {
    #[serde(flatten)]
    report: bitvec::BoundsReport,
    #[serde(skip_serializing_if = "Option::is_none")]
    exhaustive_pairs: Option<u64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    violations: Option<u64>,
}

/// Above this `q` the bound is reported but not re-checked pair by pair.
const BOUNDS_EXHAUSTIVE_LIMIT: u64 = 1024;

fn cmd_bounds(q: u64, w: u32) -> Result<Outcome, Failure> {
    let cfg = WidthConfig::new(Modulus::new(q)?, w);
    let report = bitvec::bounds_report(cfg);
    let (pairs, violations) = if q <= BOUNDS_EXHAUSTIVE_LIMIT {
        let mut bad = 0;
        for x in 0..q {
            for s1 in 0..q {
                if bitvec::no_overflow_bounds(q, x, s1)? != (true, true) {
                    bad += 1;
                }
            }
        }
        (Some(q * q), Some(bad))
    } else {
        (None, None)
    };
    let human = format!(
        "q = {q}, w = {w}: {}\n  x + q - s1 ranges over [{}, {}], 2q = {}, 2^w = {}\n",
        if report.admissible { "admissible" } else { "NOT admissible" },
        report.intermediate_min,
        report.intermediate_max,
        report.two_q,
        report.word_limit,
    );
    Ok(Outcome {
        code: if violations.unwrap_or(0) == 0 { EXIT_OK } else { EXIT_VIOLATION },
        json: to_json(&BoundsOut {
            report,
            exhaustive_pairs: pairs,
            violations,
        }),
        human,
        csv: None,
    })
}

#[derive(Serialize)]
struct UremOut {
    q: u64,
    width: u32,
    mode: &'static str,
    seed: Option<u64>,
    pairs: u64,
    mismatches: u64,
}

/// Up to this `q` every `(x, s1)` pair is checked.
const UREM_EXHAUSTIVE_LIMIT: u64 = 64;

fn cmd_urem_check(q: u64, w: u32, seed: u64, samples: u64) -> Result<Outcome, Failure> {
    let cfg = WidthConfig::new(Modulus::new(q)?, w);
    if !bitvec::width_admissible(cfg) {
        return Err(Failure(format!("width {w} is not admissible for q = {q}: need 2q < 2^{w}")));
    }
    let mut mismatches = 0;
    let (mode, pairs, seed) = if q <= UREM_EXHAUSTIVE_LIMIT {
        for x in 0..q {
            for s1 in 0..q {
                mismatches += !bitvec::urem_matches_ring(cfg, x, s1)? as u64;
            }
        }
        ("exhaustive", q * q, None)
    } else {
        let mut rng = crate::seeded_rng(seed, "urem-check");
        for _ in 0..samples {
            let (x, s1) = (rng.gen_range(0..q), rng.gen_range(0..q));
            mismatches += !bitvec::urem_matches_ring(cfg, x, s1)? as u64;
        }
        ("sampled", samples, Some(seed))
    };
    let human = format!("q = {q}, w = {w}: {mode} check of {pairs} pairs, {mismatches} mismatches\n");
    Ok(Outcome {
        code: if mismatches == 0 { EXIT_OK } else { EXIT_VIOLATION },
        json: to_json(&UremOut {
            q,
            width: w,
            mode,
            seed,
            pairs,
            mismatches,
        }),
        human,
        csv: None,
    })
}

#[derive(Serialize)]
struct WitnessOut {
    q: u64,
    wire: &'static str,
    verdict: Verdict,
    /// `h(x, .)`, identical for every `x` when the marginal is constant.
    marginal: Vec<u64>,
    mutual_information: wire::MutualInformation,
    translation_pairs: u64,
    translation_failures: u64,
}

fn cmd_witness(
    q: u64,
    out: Option<&std::path::Path>,
    pairs: u64,
    seed: u64,
) -> Result<Outcome, Failure> {
    let m = Modulus::new(q)?;
    let w = wire::zero_share_witness(m)?;
    if let Some(path) = out {
        let text = serde_json::to_string(&w.to_file())?;
        std::fs::write(path, text).map_err(|e| Failure(format!("{}: {e}", path.display())))?;
    }
    let verdict = wire::classify(&w);
    let mi = wire::mutual_information(&w);

    let mut rng = crate::seeded_rng(seed, "witness");
    let mut failures = 0;
    for _ in 0..pairs {
        let x = m.element(rng.gen_range(0..q))?;
        let x2 = m.element(rng.gen_range(0..q))?;
        failures += !wire::translation_bijection_check(&w, x, x2)? as u64;
    }
    let marginal = wire::marginal_histogram(&w, m.zero())?;
    let ok = verdict == Verdict::ConstantMarginalOnly && mi.is_zero && failures == 0;
    let human = format!(
        "w(s0, s1) = [s0 = 0] at q = {q}\n  verdict: {verdict}\n  marginal h(x, .) = {marginal:?} for every x\n  mutual information: {} bits\n  translation bijection: {}/{pairs} pairs ok\n",
        mi.bits,
        pairs - failures,
    );
    Ok(Outcome {
        code: if ok { EXIT_OK } else { EXIT_VIOLATION },
        json: to_json(&WitnessOut {
            q,
            wire: "[s0 = 0]",
            verdict,
            marginal,
            mutual_information: mi,
            translation_pairs: pairs,
            translation_failures: failures,
        }),
        human,
        csv: None,
    })
}

fn cmd_butterfly(
    q: u64,
    stages: usize,
    twiddles: &[u64],
    contexts: usize,
    seed: u64,
    summary: bool,
) -> Result<Outcome, Failure> {
    let cfg = SweepConfig {
        q,
        stages,
        twiddles: twiddles.to_vec(),
        contexts,
        seed,
    };
    let report = butterfly::conjecture_sweep(&cfg, !summary)?;
    let human = format!(
        "q = {q}, {stages} stage(s), twiddles {:?}: {} configurations\n  per-share taps:   {} value-independent, {} constant marginal only, {} non-constant\n  recombined taps:  {} value-independent, {} constant marginal only, {} non-constant\n  flagged per-share taps: {}\n  missed recombination taps: {}\n  share isolation: {}\n  {}\n",
        report.twiddle_set,
        report.configurations,
        report.sharewise.value_independent,
        report.sharewise.constant_marginal_only,
        report.sharewise.non_constant_marginal,
        report.adversarial.value_independent,
        report.adversarial.constant_marginal_only,
        report.adversarial.non_constant_marginal,
        report.flagged_sharewise.len(),
        report.missed_adversarial.len(),
        if report.sharewise_isolation { "holds" } else { "BROKEN" },
        report.note,
    );
    Ok(Outcome {
        code: if report.clean() { EXIT_OK } else { EXIT_VIOLATION },
        json: to_json(&report),
        human,
        csv: None,
    })
}
