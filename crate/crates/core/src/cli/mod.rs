//! The `tv` command line: argument parsing, run configuration, report output
//! and exit codes.
//!
//! Exit codes: 0 success or all passed, 1 budget exhausted or unresolved,
//! 2 invalid input, 3 counterexample found.

mod cache;

pub use cache::{Cache, CacheRecord, CacheWriter};

use std::ffi::OsString;
use std::fmt::Write as _;
use std::path::PathBuf;

use clap::{Args, Parser, Subcommand, ValueEnum};
use serde::Serialize;

use crate::error::TvError;
use crate::evaluator::{eval, EvalRequest};
use crate::indices::{parse_index, parse_spec, ValueSpec};
use crate::numerics::PrecisionBudget;
use crate::order::{Certifier, Verdict};
use crate::verify::{self, Finding, FindingVerdict, ScanReport, ScanStatus};

pub const EXIT_OK: i32 = 0;
pub const EXIT_UNRESOLVED: i32 = 1;
pub const EXIT_INVALID: i32 = 2;
pub const EXIT_COUNTEREXAMPLE: i32 = 3;

const DEFAULT_CACHE: &str = "tv-cache.jsonl";

#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, ValueEnum, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum ReportFormat {
    Json,
    #[default]
    Table,
}

#[derive(Clone, Debug, Serialize)]
pub struct RunConfig {
    pub default_target_width: f64,
    pub budget: PrecisionBudget,
    pub cache_path: PathBuf,
    pub report_format: ReportFormat,
}

impl RunConfig {
    fn from_globals(g: &Globals) -> Result<Self, TvError> {
        let mut budget = PrecisionBudget::default();
        if let Some(b) = g.budget_bits {
            budget.max_bits = b;
            budget.start_bits = budget.start_bits.min(b);
        }
        budget.validate()?;
        Ok(Self {
            default_target_width: 10f64.powi(-30),
            budget,
            cache_path: g.cache.clone().unwrap_or_else(|| PathBuf::from(DEFAULT_CACHE)),
            report_format: g.format,
        })
    }
}

#[derive(Debug, Parser)]
#[command(name = "tv", version, about = "Certified enclosures and order checks for multiple t-values")]
struct Cli {
    #[command(flatten)]
    globals: Globals,
    #[command(subcommand)]
    command: Command,
}

#[derive(Debug, Args)]
struct Globals {
    /// Largest working precision in bits.
    #[arg(long, global = true)]
    budget_bits: Option<u32>,
    /// Enclosure cache file (JSON lines).
    #[arg(long, global = true, env = "TV_CACHE")]
    cache: Option<PathBuf>,
    /// Write the JSON report here.
    #[arg(long, global = true)]
    report: Option<PathBuf>,
    #[arg(long, global = true, value_enum, default_value_t = ReportFormat::Table)]
    format: ReportFormat,
}

#[derive(Debug, Subcommand)]
enum Command {
    /// Enclose t(k)_n.
    Eval {
        #[arg(long)]
        index: String,
        #[arg(long, default_value_t = 0)]
        tail: u64,
        #[arg(long, default_value_t = 30)]
        digits: usize,
        /// Skip the cache entirely.
        #[arg(long)]
        no_cache: bool,
    },
    /// Certify the order of two values, `<index>` or `tail:<n>:<index>`.
    Compare {
        #[arg(long)]
        a: String,
        #[arg(long)]
        b: String,
    },
    /// The largest tail values and their generating indices.
    Beta {
        #[arg(long, default_value_t = 8)]
        count: usize,
    },
    /// Band and position of t(k).
    Phi {
        #[arg(long)]
        index: String,
    },
    /// Certify the descending chain prefix.
    Chain {
        #[arg(long, default_value_t = 4)]
        count: usize,
        #[arg(long, default_value_t = 8)]
        per_block: usize,
    },
    /// Run an identity or limit suite.
    Verify {
        #[arg(long, value_enum)]
        suite: Suite,
        #[arg(long, default_value_t = 3)]
        nmax: usize,
        #[arg(long, default_value_t = 8)]
        weight_max: u32,
        #[arg(long, default_value_t = 1e-12)]
        tol: f64,
        /// Prefix for the limits suite.
        #[arg(long, default_value = "empty")]
        index: String,
    },
    /// Run a conjecture scan.
    Scan {
        #[arg(long, value_enum)]
        kind: ScanKind,
        #[arg(long, default_value_t = 3)]
        rmax: usize,
        #[arg(long, default_value_t = 10)]
        nmax: u32,
        #[arg(long, default_value_t = 8)]
        weight_max: u32,
        #[arg(long, default_value_t = 1e-25)]
        resolution: f64,
    },
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, ValueEnum)]
enum Suite {
    /// Repeated-argument closed forms, the sum formula and the tail recurrence.
    Identities,
    Catalan,
    Recurrence,
    Limits,
    Chain,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, ValueEnum)]
enum ScanKind {
    PSets,
    Collisions,
    Phi,
}

/// Exit code for a library error.
pub fn exit_code_for(e: &TvError) -> i32 {
    match e {
        TvError::InvalidArgument(_) | TvError::Parse { .. } | TvError::Divergent(_) | TvError::Io { .. } => {
            EXIT_INVALID
        }
        TvError::BudgetExceeded { .. } | TvError::Frontier { .. } | TvError::Band { .. } | TvError::Collision { .. } => {
            EXIT_UNRESOLVED
        }
    }
}

pub fn exit_code_for_status(s: ScanStatus) -> i32 {
    match s {
        ScanStatus::AllPassed => EXIT_OK,
        ScanStatus::Unresolved => EXIT_UNRESOLVED,
        ScanStatus::Counterexample => EXIT_COUNTEREXAMPLE,
    }
}

/// Captured output of one invocation.
#[derive(Debug, Default)]
pub struct Outcome {
    pub code: i32,
    pub stdout: String,
    pub stderr: String,
}

/// Parses `args` (program name first) and runs the command.
pub fn run<I, T>(args: I) -> Outcome
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(c) => c,
        Err(e) => {
            let code = if e.use_stderr() { EXIT_INVALID } else { EXIT_OK };
            let text = e.render().to_string();
            return if e.use_stderr() {
                Outcome { code, stderr: text, ..Default::default() }
            } else {
                Outcome { code, stdout: text, ..Default::default() }
            };
        }
    };
    let mut out = Outcome::default();
    let result = RunConfig::from_globals(&cli.globals).and_then(|cfg| dispatch(&cli, &cfg, &mut out));
    match result {
        Ok(code) => out.code = code,
        Err(e) => {
            if let TvError::BudgetExceeded { partial, .. } = &e {
                let _ = writeln!(out.stdout, "partial {partial:.30}");
            }
            let _ = writeln!(out.stderr, "error: {e}");
            out.code = exit_code_for(&e);
        }
    }
    out
}

fn dispatch(cli: &Cli, cfg: &RunConfig, out: &mut Outcome) -> Result<i32, TvError> {
    let cert = Certifier::new(cfg.budget);
    match &cli.command {
        Command::Eval { index, tail, digits, no_cache } => {
            let spec = ValueSpec::new(parse_index(index)?, *tail)?;
            let cache = (!no_cache).then(|| Cache::new(&cfg.cache_path));
            cmd_eval(&spec, *digits, cfg, cache, out)
        }
        Command::Compare { a, b } => {
            let (a, b) = (parse_spec(a)?, parse_spec(b)?);
            let o = cert.compare(&a, &b)?;
            let word = match o.verdict {
                Verdict::Less => "Less",
                Verdict::Greater => "Greater",
                Verdict::Unresolved => "Unresolved",
            };
            match cfg.report_format {
                ReportFormat::Json => {
                    let v = serde_json::json!({"a": a.to_string(), "b": b.to_string(), "outcome": o});
                    let _ = writeln!(out.stdout, "{}", serde_json::to_string_pretty(&v).unwrap_or_default());
                }
                ReportFormat::Table => {
                    let _ = writeln!(
                        out.stdout,
                        "{word}\nseparation {:e}\nbits {}",
                        o.separation, o.bits_used
                    );
                }
            }
            Ok(if o.verdict == Verdict::Unresolved { EXIT_UNRESOLVED } else { EXIT_OK })
        }
        Command::Beta { count } => {
            let table = cert.beta_table(*count)?;
            let mut report = ScanReport::new("beta").param("count", *count);
            for e in &table {
                report.push(
                    Finding::new(vec![e.source.to_string()], FindingVerdict::Note)
                        .with("value", &e.value)
                        .detail(format!("rank {}", e.rank)),
                );
            }
            emit(&report.finish(), cli, cfg, out)
        }
        Command::Phi { index } => {
            let k = parse_index(index)?;
            let c = cert.phi(&k)?;
            let mut report = ScanReport::new("phi").param("index", k.to_string());
            report.push(Finding::new(vec![k.to_string()], FindingVerdict::Note).detail(c.to_string()));
            let report = report.finish();
            if cfg.report_format == ReportFormat::Table {
                let _ = writeln!(out.stdout, "{c}");
                write_report(&report, cli)?;
                return Ok(EXIT_OK);
            }
            emit(&report, cli, cfg, out)
        }
        Command::Chain { count, per_block } => {
            let report = verify::verify_chain(&cert, *count, *per_block)?;
            if cfg.report_format == ReportFormat::Table {
                // t(1) = ∞ heads the chain for display only
                let _ = writeln!(out.stdout, "t(1) = ∞");
            }
            emit(&report, cli, cfg, out)
        }
        Command::Verify { suite, nmax, weight_max, tol, index } => {
            let report = match suite {
                Suite::Identities => ScanReport::combine(
                    "identities",
                    vec![
                        verify::verify_repeated(&cert, *nmax, *tol)?,
                        verify::verify_sum_formula(&cert, *nmax, *tol)?,
                        verify::verify_tail_recurrence(&cert, *weight_max, tol.max(1e-10))?,
                    ],
                ),
                Suite::Catalan => verify::verify_catalan(&cert, 12.max(*nmax), Some((12, verify::CATALAN_GAP_12_BOUND)))?,
                Suite::Recurrence => verify::verify_tail_recurrence(&cert, *weight_max, tol.max(1e-10))?,
                Suite::Limits => verify::verify_limits(&cert, &parse_index(index)?, *nmax as u32)?,
                Suite::Chain => verify::verify_chain(&cert, 4, *nmax)?,
            };
            emit(&report, cli, cfg, out)
        }
        Command::Scan { kind, rmax, nmax, weight_max, resolution } => {
            let report = match kind {
                ScanKind::PSets => verify::scan_p_sets(&cert, *rmax, *nmax)?,
                ScanKind::Collisions => verify::scan_tail_collisions(&cert, *weight_max, *resolution)?,
                ScanKind::Phi => verify::check_phi_conjecture(&cert, weight_max.saturating_sub(1), *nmax, *weight_max)?,
            };
            emit(&report, cli, cfg, out)
        }
    }
}

fn cmd_eval(
    spec: &ValueSpec,
    digits: usize,
    cfg: &RunConfig,
    cache: Option<Cache>,
    out: &mut Outcome,
) -> Result<i32, TvError> {
    if digits == 0 || digits > 1000 {
        return Err(TvError::invalid(format!("digits must be in 1..=1000, got {digits}")));
    }
    let width = 10f64.powi(-(digits as i32));
    let min_bits = (digits as f64 * std::f64::consts::LOG2_10).ceil() as u32;
    let mut hit = None;
    if let Some(c) = &cache {
        if let Some(r) = c.lookup(spec, min_bits)? {
            let e = r.enclosure()?;
            if e.width_at_most(width) {
                hit = Some(e);
            }
        }
    }
    let (enc, source) = match hit {
        Some(e) => (e, "cache"),
        None => {
            let enc = eval(&EvalRequest::new(spec.clone(), width, cfg.budget)?)?;
            if let Some(c) = cache {
                let writer = CacheWriter::spawn(c);
                writer.queue(CacheRecord::new(spec, &enc, "accelerated"));
                writer.finish()?;
            }
            (enc, "computed")
        }
    };
    let (lo, hi) = enc.to_decimal_bounds(digits);
    match cfg.report_format {
        ReportFormat::Json => {
            let v = serde_json::json!({
                "spec": spec.to_string(),
                "lo": lo,
                "hi": hi,
                "precision_bits": enc.prec(),
                "source": source,
            });
            let _ = writeln!(out.stdout, "{}", serde_json::to_string_pretty(&v).unwrap_or_default());
        }
        ReportFormat::Table => {
            let _ = writeln!(out.stdout, "[{lo}, {hi}]");
        }
    }
    log::info!("{spec}: {source} at {} bits", enc.prec());
    Ok(EXIT_OK)
}

fn write_report(report: &ScanReport, cli: &Cli) -> Result<(), TvError> {
    if let Some(path) = &cli.globals.report {
        std::fs::write(path, report.to_json() + "\n").map_err(|e| TvError::Io {
            path: path.display().to_string(),
            message: e.to_string(),
        })?;
    }
    Ok(())
}

fn emit(report: &ScanReport, cli: &Cli, cfg: &RunConfig, out: &mut Outcome) -> Result<i32, TvError> {
    write_report(report, cli)?;
    match cfg.report_format {
        ReportFormat::Json => {
            let _ = writeln!(out.stdout, "{}", report.to_json());
        }
        ReportFormat::Table => out.stdout.push_str(&report.to_table()),
    }
    Ok(exit_code_for_status(report.status))
}

/// Entry point of the `tv` binary.
pub fn main_with_args() -> i32 {
    let o = run(std::env::args_os());
    print!("{}", o.stdout);
    eprint!("{}", o.stderr);
    o.code
}

#[cfg(test)]
mod tests {
    use super::*;

    fn tv(args: &[&str]) -> Outcome {
        let mut v = vec!["tv", "--cache", "/nonexistent-dir/never-written.jsonl"];
        v.extend_from_slice(args);
        run(v)
    }

    #[test]
    fn eval_t2() {
        let o = tv(&["eval", "--index", "2", "--digits", "30", "--tail", "0", "--no-cache"]);
        assert_eq!(o.code, 0, "{}", o.stderr);
        assert!(o.stdout.starts_with("[1.233700550136169827354311374984"));
    }

    #[test]
    fn eval_empty_tail_is_exactly_one() {
        let o = tv(&["eval", "--index", "empty", "--tail", "1", "--digits", "10", "--no-cache"]);
        assert_eq!(o.stdout.trim(), "[1.0000000000, 1.0000000000]");
    }

    #[test]
    fn invalid_inputs_exit_2() {
        assert_eq!(tv(&["eval", "--index", "1,2", "--no-cache"]).code, 2);
        assert_eq!(tv(&["eval", "--index", "2,x", "--no-cache"]).code, 2);
        assert_eq!(tv(&["frobnicate"]).code, 2);
        assert_eq!(tv(&["compare", "--a", "2", "--b", "tail:q:2"]).code, 2);
    }

    #[test]
    fn compare_verdicts() {
        let o = tv(&["compare", "--a", "2", "--b", "3"]);
        assert_eq!((o.code, o.stdout.lines().next()), (0, Some("Greater")));
        let o = tv(&["compare", "--a", "2,1", "--b", "tail:1:empty"]);
        assert_eq!((o.code, o.stdout.lines().next()), (0, Some("Less")));
        let o = tv(&["compare", "--a", "2", "--b", "2"]);
        assert_eq!((o.code, o.stdout.lines().next()), (1, Some("Unresolved")));
    }

    #[test]
    fn budget_exhaustion_exit_1_with_partial() {
        let o = tv(&["--budget-bits", "64", "eval", "--index", "3,1", "--digits", "40", "--no-cache"]);
        assert_eq!(o.code, 1);
        assert!(o.stdout.starts_with("partial ["));
    }

    #[test]
    fn phi_and_beta() {
        let o = tv(&["phi", "--index", "2,3"]);
        assert_eq!(o.stdout.trim(), "(2, 3)");
        let o = tv(&["beta", "--count", "4", "--format", "json"]);
        assert_eq!(o.code, 0);
        let v: serde_json::Value = serde_json::from_str(&o.stdout).unwrap();
        assert_eq!(v["findings"][0]["indices"][0], "empty");
        assert_eq!(v["findings"][1]["indices"][0], "2");
    }
}
