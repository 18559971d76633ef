//! Command-line front end.
//!
//! Exit codes: 0 when every verdict is Holds or Equality, 1 for usage,
//! parse, precondition or configuration errors, 2 when any verdict is
//! Violated, 3 when any verdict is Inconclusive or the function fails
//! certification.

use std::ffi::OsString;
use std::io::Write;
use std::path::PathBuf;

use clap::error::ErrorKind;
use clap::{Args, Parser, Subcommand};
use serde_json::{json, Value};

use crate::expr::parse_expr;
use crate::funcs::{ConvexFunction, Family, Interval, Witness};
use crate::ineq::{
    audit_thm23_steps, audit_thm24_steps, evaluate, IneqError, InequalityReport, Theorem, Tolerances, Verdict,
};
use crate::means::{eval_prop31, eval_prop32, Prop32Variant};
use crate::output::{render_report, to_csv, to_json, to_json_value, Document};
use crate::quad::QuadError;
use crate::sweep::{run_sweep, sharpness_probe, SweepConfig, SweepSummary};

pub const EXIT_OK: i32 = 0;
pub const EXIT_USAGE: i32 = 1;
pub const EXIT_VIOLATED: i32 = 2;
pub const EXIT_INCONCLUSIVE: i32 = 3;

#[derive(Debug, Parser)]
#[command(name = "hadamard-audit", version, about = "Verify and audit Hadamard-type integral inequalities")]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Args)]
pub struct OutputArgs {
    /// Emit the JSON report document.
    #[arg(long, conflicts_with = "csv")]
    pub json: bool,
    /// Emit one CSV row per chain member.
    #[arg(long)]
    pub csv: bool,
    /// Write output to this file instead of standard output.
    #[arg(long, value_name = "PATH")]
    pub out: Option<PathBuf>,
}

#[derive(Debug, Args)]
pub struct FunctionArgs {
    /// Function body in the expression language, in the variable x.
    #[arg(long = "f", value_name = "EXPR", allow_hyphen_values = true)]
    pub f: String,
    #[arg(long, allow_hyphen_values = true)]
    pub a: f64,
    #[arg(long, allow_hyphen_values = true)]
    pub b: f64,
    /// Quadrature tolerance.
    #[arg(long, allow_hyphen_values = true)]
    pub tol: Option<f64>,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Evaluate one inequality for one function.
    Verify {
        /// 1.1, 2.1, 2.2, 2.3 or 2.4.
        #[arg(long)]
        thm: String,
        #[command(flatten)]
        func: FunctionArgs,
        #[command(flatten)]
        output: OutputArgs,
    },
    /// Run a seeded randomized campaign.
    Sweep {
        /// Comma-separated theorem list, e.g. 1.1,2.1.
        #[arg(long)]
        thms: Option<String>,
        #[arg(long)]
        trials: Option<u64>,
        #[arg(long)]
        seed: Option<u64>,
        /// Comma-separated family list.
        #[arg(long)]
        families: Option<String>,
        #[arg(long, allow_hyphen_values = true)]
        lo: Option<f64>,
        #[arg(long, allow_hyphen_values = true)]
        hi: Option<f64>,
        #[arg(long, allow_hyphen_values = true)]
        tol: Option<f64>,
        /// JSON configuration file; explicit flags override its fields.
        #[arg(long, value_name = "PATH")]
        config: Option<PathBuf>,
        /// Worker threads (default: all cores). Results do not depend on it.
        #[arg(long)]
        threads: Option<usize>,
        #[command(flatten)]
        output: OutputArgs,
    },
    /// Evaluate a mean inequality in closed form.
    Means {
        /// 3.1 or 3.2.
        #[arg(long)]
        prop: String,
        #[arg(long, allow_hyphen_values = true)]
        a: f64,
        #[arg(long, allow_hyphen_values = true)]
        b: f64,
        /// Use the printed 24G² denominator in 3.2 instead of 24G⁴.
        #[arg(long)]
        paper_literal: bool,
        #[command(flatten)]
        output: OutputArgs,
    },
    /// Check the intermediate proof steps of 2.3 or 2.4.
    Audit {
        /// 2.3 or 2.4.
        #[arg(long)]
        thm: String,
        #[command(flatten)]
        func: FunctionArgs,
        /// First point for the pointwise 2.3 step (default a).
        #[arg(long, allow_hyphen_values = true)]
        x: Option<f64>,
        /// Second point for the pointwise 2.3 step (default b).
        #[arg(long, allow_hyphen_values = true)]
        y: Option<f64>,
        #[command(flatten)]
        output: OutputArgs,
    },
    /// Search a family's parameters for minimal slack.
    Sharpen {
        #[arg(long)]
        thm: String,
        #[arg(long)]
        family: String,
        #[arg(long, allow_hyphen_values = true)]
        a: f64,
        #[arg(long, allow_hyphen_values = true)]
        b: f64,
        #[arg(long, default_value_t = 0)]
        seed: u64,
        #[arg(long, default_value_t = 200)]
        iters: usize,
        #[arg(long, allow_hyphen_values = true)]
        tol: Option<f64>,
        #[command(flatten)]
        output: OutputArgs,
    },
}

#[derive(Debug)]
struct Failure {
    code: i32,
    message: String,
}

fn usage(message: impl Into<String>) -> Failure {
    Failure { code: EXIT_USAGE, message: message.into() }
}

impl From<crate::Error> for Failure {
    fn from(e: crate::Error) -> Self {
        usage(e.to_string())
    }
}

impl From<IneqError> for Failure {
    fn from(e: IneqError) -> Self {
        let code = match e {
            IneqError::NotCertified(_) | IneqError::Quadrature(QuadError::NonFinite { .. }) => EXIT_INCONCLUSIVE,
            _ => EXIT_USAGE,
        };
        Failure { code, message: e.to_string() }
    }
}

/// What a subcommand produced, before rendering.
struct Produced {
    doc: Document,
    human: String,
    code: i32,
}

fn verdict_code(reports: &[InequalityReport]) -> i32 {
    if reports.iter().any(|r| r.verdict == Verdict::Violated) {
        EXIT_VIOLATED
    } else if reports.iter().any(|r| r.verdict == Verdict::Inconclusive) {
        EXIT_INCONCLUSIVE
    } else {
        EXIT_OK
    }
}

fn tolerances(tol: Option<f64>) -> Result<Tolerances, Failure> {
    match tol {
        None => Ok(Tolerances::default()),
        Some(t) if t > 0.0 && t.is_finite() => Ok(Tolerances::with_quad(t)),
        Some(t) => Err(usage(format!("--tol must be positive and finite, got {t}"))),
    }
}

fn interval(a: f64, b: f64) -> Result<Interval, Failure> {
    Interval::new(a, b).map_err(|e| usage(e.to_string()))
}

fn theorem(s: &str, allowed: &[Theorem]) -> Result<Theorem, Failure> {
    let t: Theorem = s.parse().map_err(|e: IneqError| usage(e.to_string()))?;
    if allowed.contains(&t) {
        Ok(t)
    } else {
        let names: Vec<&str> = allowed.iter().map(|t| t.number()).collect();
        Err(usage(format!("theorem {} is not supported here (expected one of {})", t.number(), names.join(", "))))
    }
}

/// Parses and certifies a user function. A failed certificate is an
/// `EXIT_INCONCLUSIVE` failure carrying the witness.
fn certified(func: &FunctionArgs) -> Result<ConvexFunction, Failure> {
    let domain = interval(func.a, func.b)?;
    let body = parse_expr(&func.f).map_err(|e| usage(format!("parse error: {e}")))?;
    let f = ConvexFunction::certify(body, domain, Family::User).map_err(|e| usage(e.to_string()))?;
    for cert in [f.convexity(), f.nonnegativity()] {
        if !cert.passed() {
            let at = match cert.witness {
                Some(Witness::Point(x)) => format!(" at x = {x}"),
                Some(Witness::Pair(u, v)) => format!(" between x = {u} and x = {v}"),
                None => String::new(),
            };
            return Err(Failure {
                code: EXIT_INCONCLUSIVE,
                message: format!("{} fails {:?} certification{at}", f.spec(), cert.property).to_lowercase(),
            });
        }
    }
    Ok(f)
}

fn human(reports: &[InequalityReport]) -> String {
    reports.iter().map(render_report).collect::<Vec<_>>().join("\n")
}

fn func_config(func: &FunctionArgs, tol: &Tolerances) -> Value {
    json!({"f": func.f, "a": func.a, "b": func.b, "tolerances": tol})
}

fn cmd_verify(thm: &str, func: &FunctionArgs) -> Result<Produced, Failure> {
    let t = theorem(thm, &Theorem::EVALUATORS)?;
    let tol = tolerances(func.tol)?;
    let f = certified(func)?;
    let report = evaluate(t, &f, &tol)?;
    let mut doc = Document::new("verify", func_config(func, &tol));
    doc.config["theorem"] = json!(t);
    doc.reports.push(report);
    Ok(Produced { human: human(&doc.reports), code: verdict_code(&doc.reports), doc })
}

fn cmd_audit(thm: &str, func: &FunctionArgs, x: Option<f64>, y: Option<f64>) -> Result<Produced, Failure> {
    let t = theorem(thm, &[Theorem::Thm23, Theorem::Thm24])?;
    let tol = tolerances(func.tol)?;
    let f = certified(func)?;
    let mut doc = Document::new("audit", func_config(func, &tol));
    doc.config["theorem"] = json!(t);
    if t == Theorem::Thm23 {
        let (x, y) = (x.unwrap_or(func.a), y.unwrap_or(func.b));
        doc.config["x"] = json!(x);
        doc.config["y"] = json!(y);
        let (pointwise, integrated) = audit_thm23_steps(&f, x, y, &tol)?;
        doc.reports = vec![pointwise, integrated];
    } else {
        if x.is_some() || y.is_some() {
            return Err(usage("--x and --y only apply to the 2.3 audit"));
        }
        doc.reports = audit_thm24_steps(&f, &tol)?;
    }
    Ok(Produced { human: human(&doc.reports), code: verdict_code(&doc.reports), doc })
}

fn cmd_means(prop: &str, a: f64, b: f64, paper_literal: bool) -> Result<Produced, Failure> {
    let t = theorem(prop, &[Theorem::Prop31, Theorem::Prop32])?;
    let tol = Tolerances::default();
    let variant = if paper_literal { Prop32Variant::AsPrinted } else { Prop32Variant::Corrected };
    if paper_literal && t != Theorem::Prop32 {
        return Err(usage("--paper-literal only applies to 3.2"));
    }
    let report = match t {
        Theorem::Prop31 => eval_prop31(a, b, &tol),
        _ => eval_prop32(a, b, variant, &tol),
    }
    .map_err(|e| usage(e.to_string()))?;
    let mut config = json!({"proposition": t, "a": a, "b": b, "tolerances": tol});
    if t == Theorem::Prop32 {
        config["variant"] = json!(variant);
    }
    let mut doc = Document::new("means", config);
    doc.reports.push(report);
    Ok(Produced { human: human(&doc.reports), code: verdict_code(&doc.reports), doc })
}

fn parse_list<T: std::str::FromStr>(s: &str) -> Result<Vec<T>, Failure>
where
    T::Err: std::fmt::Display,
{
    s.split(',')
        .map(str::trim)
        .filter(|p| !p.is_empty())
        .map(|p| p.parse::<T>().map_err(|e| usage(e.to_string())))
        .collect()
}

struct SweepFlags<'a> {
    thms: &'a Option<String>,
    trials: Option<u64>,
    seed: Option<u64>,
    families: &'a Option<String>,
    lo: Option<f64>,
    hi: Option<f64>,
    tol: Option<f64>,
    config: &'a Option<PathBuf>,
    threads: Option<usize>,
}

fn sweep_config(flags: &SweepFlags<'_>) -> Result<SweepConfig, Failure> {
    let mut cfg = match flags.config {
        Some(path) => {
            let text =
                std::fs::read_to_string(path).map_err(|e| usage(format!("cannot read {}: {e}", path.display())))?;
            serde_json::from_str(&text).map_err(|e| usage(format!("invalid config {}: {e}", path.display())))?
        }
        None => SweepConfig::default(),
    };
    if let Some(s) = flags.thms {
        cfg.theorems = parse_list(s)?;
    }
    if let Some(s) = flags.families {
        cfg.families = parse_list(s)?;
    }
    cfg.trials = flags.trials.unwrap_or(cfg.trials);
    cfg.seed = flags.seed.unwrap_or(cfg.seed);
    cfg.lo = flags.lo.unwrap_or(cfg.lo);
    cfg.hi = flags.hi.unwrap_or(cfg.hi);
    cfg.tol = flags.tol.unwrap_or(cfg.tol);
    cfg.validate().map_err(|e| usage(e.to_string()))?;
    Ok(cfg)
}

fn render_sweep(s: &SweepSummary) -> String {
    let mut out = format!(
        "sweep: {} trials, seed {}, intervals in [{}, {}], {:.2} s\n",
        s.config.trials, s.config.seed, s.config.lo, s.config.hi, s.wall_time_s
    );
    for t in &s.theorems {
        out += &format!(
            "{:<13} holds {:>5}  equality {:>5}  violated {:>5}  inconclusive {:>5}  skipped {:>5}\n",
            t.theorem.tag(),
            t.holds,
            t.equality,
            t.violated,
            t.inconclusive,
            t.skipped_precondition
        );
        if let Some(m) = &t.min_slack {
            out += &format!(
                "  min slack {:.6e} at trial {} ({}, seed {}): f(x) = {} on {}\n",
                m.slack, m.trial, m.family, m.function_seed, m.function, m.interval
            );
        }
        for v in &t.violations {
            out += &format!(
                "  VIOLATED trial {}: f(x) = {} on {}, slack {:.6e}\n",
                v.trial, v.function, v.interval, v.slack
            );
        }
    }
    out
}

fn cmd_sweep(flags: SweepFlags<'_>) -> Result<Produced, Failure> {
    let cfg = sweep_config(&flags)?;
    let summary = match flags.threads {
        Some(0) => return Err(usage("--threads must be at least 1")),
        Some(n) => rayon::ThreadPoolBuilder::new()
            .num_threads(n)
            .build()
            .map_err(|e| usage(e.to_string()))?
            .install(|| run_sweep(&cfg)),
        None => run_sweep(&cfg),
    }
    .map_err(|e| usage(e.to_string()))?;
    let tol = cfg.tolerances();
    let mut doc = Document::new("sweep", to_json_value(&cfg));
    for t in &summary.theorems {
        if let Some(m) = &t.min_slack {
            if let Ok(r) = m.replay(t.theorem, &tol) {
                doc.reports.push(r);
            }
        }
    }
    let code = if summary.total_violated() > 0 {
        EXIT_VIOLATED
    } else if summary.total_inconclusive() > 0 {
        EXIT_INCONCLUSIVE
    } else {
        EXIT_OK
    };
    let human = render_sweep(&summary);
    doc.summary = Some(to_json_value(&summary));
    Ok(Produced { doc, human, code })
}

#[allow(clippy::too_many_arguments)]
fn cmd_sharpen(
    thm: &str,
    family: &str,
    a: f64,
    b: f64,
    seed: u64,
    iters: usize,
    tol: Option<f64>,
) -> Result<Produced, Failure> {
    let t = theorem(thm, &Theorem::EVALUATORS)?;
    let family: Family = family.parse().map_err(|e: crate::funcs::FuncError| usage(e.to_string()))?;
    let domain = interval(a, b)?;
    let tol = tolerances(tol)?;
    let record = sharpness_probe(t, family, domain, seed, iters, &tol).map_err(|e| usage(e.to_string()))?;
    let mut doc = Document::new(
        "sharpen",
        json!({"theorem": t, "family": family, "a": a, "b": b, "seed": seed, "iters": iters, "tolerances": tol}),
    );
    if let Ok(f) = ConvexFunction::from_params(&record.best_params, domain) {
        if let Ok(r) = evaluate(t, &f, &tol) {
            doc.reports.push(r);
        }
    }
    let human = format!(
        "{}  family {} on {}: best slack {:.6e} (relative {:.6e}) after {} iterations\n  f(x) = {}\n",
        t, family, domain, record.best_slack, record.best_objective, record.iterations, record.best_function
    );
    doc.summary = Some(to_json_value(&record));
    Ok(Produced { doc, human, code: EXIT_OK })
}

fn dispatch(cli: &Cli) -> (Result<Produced, Failure>, &OutputArgs) {
    match &cli.command {
        Command::Verify { thm, func, output } => (cmd_verify(thm, func), output),
        Command::Audit { thm, func, x, y, output } => (cmd_audit(thm, func, *x, *y), output),
        Command::Means { prop, a, b, paper_literal, output } => (cmd_means(prop, *a, *b, *paper_literal), output),
        Command::Sweep { thms, trials, seed, families, lo, hi, tol, config, threads, output } => (
            cmd_sweep(SweepFlags {
                thms,
                trials: *trials,
                seed: *seed,
                families,
                lo: *lo,
                hi: *hi,
                tol: *tol,
                config,
                threads: *threads,
            }),
            output,
        ),
        Command::Sharpen { thm, family, a, b, seed, iters, tol, output } => {
            (cmd_sharpen(thm, family, *a, *b, *seed, *iters, *tol), output)
        }
    }
}

/// Runs the CLI on `args` (including the program name) and returns the
/// exit code.
pub fn run<I, T>(args: I, stdout: &mut dyn Write, stderr: &mut dyn Write) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(cli) => cli,
        Err(e) => {
            return match e.kind() {
                ErrorKind::DisplayHelp | ErrorKind::DisplayVersion => {
                    let _ = write!(stdout, "{e}");
                    EXIT_OK
                }
                _ => {
                    let _ = write!(stderr, "{e}");
                    EXIT_USAGE
                }
            }
        }
    };
    let (result, output) = dispatch(&cli);
    let produced = match result {
        Ok(p) => p,
        Err(f) => {
            let _ = writeln!(stderr, "error: {}", f.message);
            return f.code;
        }
    };
    let text = if output.json {
        to_json(&produced.doc)
    } else if output.csv {
        to_csv(&produced.doc.reports)
    } else {
        produced.human
    };
    match &output.out {
        Some(path) => {
            if let Err(e) = std::fs::write(path, text) {
                let _ = writeln!(stderr, "error: cannot write {}: {e}", path.display());
                return EXIT_USAGE;
            }
        }
        None => {
            let _ = stdout.write_all(text.as_bytes());
        }
    }
    produced.code
}
