//! The `ptmc` command-line surface.
//!
//! One subcommand per library operation: `validate`, `info`, `compile`
//! (with `--pass`, comma-chained), `enumerate`, `semimeasure`, `sample`,
//! and `check-equiv`. Reports are structured text blocks — one
//! `field value` pair per line, stable field names — readable by both
//! people and scripts.
//!
//! Exit codes are a function of the outcome only:
//!
//! * `0` — success; for `check-equiv`, the verdict `equal`.
//! * `1` — a provable mismatch, a validation violation, or a refused
//!   pass precondition.
//! * `2` — usage errors: bad flags, unreadable or unparseable files, a
//!   machine of the wrong kind for the requested operation, exhausted
//!   node budgets, and the `inconclusive` verdict (no answer is not an
//!   answer).
//!
//! The enumeration node budget is taken from the environment variable
//! named by [`crate::simulate::NODE_BUDGET_ENV`]; machines travel in
//! `.machine` / `.rnn` files in the text format of [`crate::format`].

use std::fmt::Write as _;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Parser, Subcommand, ValueEnum};

use crate::equivalence::{
    check_ptm_path_law, check_statistical, check_strong_multiset, check_weak, rnn_lockstep,
    RowStatus, StatReport, StrongReport, Verdict, WeakReport, WeightMultiset,
};
use crate::error::{ParseError, SimulateError, TransformError};
use crate::format::{parse_machine, serialize_machine};
use crate::machines::Machine;
use crate::numerics::{rat_parse, rat_to_string, Rational};
use crate::simulate::{
    emitted_to_string, enumerate_paths, node_budget_from_env, sample_many, semimeasure,
};
use crate::transforms::{
    binarize, compile_rnn, dyadicize, kind_size, ptm_to_qptm, qptm_to_2pda,
    reduce_both_stack_dependence, twopda_to_qptm, PassReport,
};

/// Success.
pub const EXIT_OK: u8 = 0;
/// A mismatch, violation, or refused precondition.
pub const EXIT_VIOLATION: u8 = 1;
/// A usage error, unusable input, exhausted budget, or inconclusive
/// verdict.
pub const EXIT_USAGE: u8 = 2;

#[derive(Parser)]
#[command(
    name = "ptmc",
    version,
    about = "Exact-rational toolkit for probabilistic machines, two-stack automata, and the networks they compile into"
)]
struct Cli {
    #[command(subcommand)]
    cmd: Cmd,
}

#[derive(Subcommand)]
enum Cmd {
    /// Parse a machine file and report violations and advisories.
    Validate { file: PathBuf },
    /// Summarize a machine: kind, size, and structural predicates.
    Info { file: PathBuf },
    /// Apply one or more compilation passes and write the result.
    Compile {
        /// Pass name, or a comma-chained pipeline of pass names.
        #[arg(long, value_delimiter = ',', required = true)]
        pass: Vec<String>,
        file: PathBuf,
        /// Destination file; without it the machine text goes to
        /// standard output and the pass reports to standard error.
        #[arg(short, long)]
        output: Option<PathBuf>,
    },
    /// Walk the computation tree and list halting paths with weights.
    Enumerate {
        file: PathBuf,
        #[arg(long, default_value_t = 8)]
        max_len: usize,
        #[arg(long, default_value_t = 32)]
        max_steps: u64,
    },
    /// Tabulate the output distribution up to a length and step bound.
    Semimeasure {
        file: PathBuf,
        #[arg(long, default_value_t = 4)]
        max_len: usize,
        #[arg(long, default_value_t = 32)]
        max_steps: u64,
    },
    /// Draw seeded runs and tabulate the emitted strings.
    Sample {
        file: PathBuf,
        #[arg(long, default_value_t = 0)]
        seed: u64,
        #[arg(long, default_value_t = 1000)]
        n: u64,
        #[arg(long, default_value_t = 64)]
        max_steps: u64,
    },
    /// Compare two machines and exit by the verdict.
    CheckEquiv {
        left: PathBuf,
        right: PathBuf,
        #[arg(long, value_enum)]
        mode: Mode,
        #[arg(long, default_value_t = 4)]
        max_len: usize,
        /// Raw step bound; in strong mode this is the left side's.
        #[arg(long, default_value_t = 32)]
        max_steps: u64,
        /// Strong mode: the right side's step bound (defaults to
        /// --max-steps). A pass that spends several steps simulating
        /// one source step needs more room on its side.
        #[arg(long)]
        right_steps: Option<u64>,
        /// Stat mode: base seed for both sides' runs.
        #[arg(long, default_value_t = 0)]
        seed: u64,
        /// Stat mode: runs per side.
        #[arg(long, default_value_t = 1000)]
        n: u64,
        /// Stat mode: total-variation tolerance, as a fraction.
        #[arg(long, default_value = "1/20")]
        tolerance: String,
        /// Lockstep mode: emitted tokens to walk (pairs the network's
        /// configuration columns against the machine's configurations).
        #[arg(long, default_value_t = 8)]
        max_blocks: u64,
    },
}

#[derive(Clone, Copy, PartialEq, Eq, ValueEnum)]
enum Mode {
    /// Compare output distributions string by string.
    Weak,
    /// Compare halting-path weight multisets string by string.
    Strong,
    /// Compare seeded empirical distributions.
    Stat,
    /// Check the coin-flip path weight law (left machine only).
    PathLaw,
    /// Walk a network beside the machine it was compiled from.
    Lockstep,
}

impl Mode {
    fn as_str(self) -> &'static str {
        match self {
            Mode::Weak => "weak",
            Mode::Strong => "strong",
            Mode::Stat => "stat",
            Mode::PathLaw => "path-law",
            Mode::Lockstep => "lockstep",
        }
    }
}

/// What a command run wants written and how it wants to exit.
pub struct RunResult {
    pub out: String,
    pub err: String,
    pub code: u8,
}

impl RunResult {
    fn ok(out: String) -> Self {
        RunResult {
            out,
            err: String::new(),
            code: EXIT_OK,
        }
    }
    fn fail(code: u8, message: impl Into<String>) -> Self {
        RunResult {
            out: String::new(),
            err: format!("error: {}\n", message.into()),
            code,
        }
    }
}

/// Parses the process arguments, runs the command, prints, and exits.
pub fn run() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(c) => c,
        Err(e) => {
            // Help and version land here too; clap knows the code.
            let code = u8::try_from(e.exit_code()).unwrap_or(EXIT_USAGE);
            let _ = e.print();
            return ExitCode::from(code);
        }
    };
    let r = dispatch(&cli.cmd);
    print!("{}", r.out);
    eprint!("{}", r.err);
    ExitCode::from(r.code)
}

/// Runs one command against the filesystem and renders its report.
fn dispatch(cmd: &Cmd) -> RunResult {
    match cmd {
        Cmd::Validate { file } => cmd_validate(file),
        Cmd::Info { file } => cmd_info(file),
        Cmd::Compile { pass, file, output } => cmd_compile(pass, file, output.as_deref()),
        Cmd::Enumerate {
            file,
            max_len,
            max_steps,
        } => cmd_enumerate(file, *max_len, *max_steps),
        Cmd::Semimeasure {
            file,
            max_len,
            max_steps,
        } => cmd_semimeasure(file, *max_len, *max_steps),
        Cmd::Sample {
            file,
            seed,
            n,
            max_steps,
        } => cmd_sample(file, *seed, *n, *max_steps),
        Cmd::CheckEquiv {
            left,
            right,
            mode,
            max_len,
            max_steps,
            right_steps,
            seed,
            n,
            tolerance,
            max_blocks,
        } => cmd_check_equiv(
            left,
            right,
            *mode,
            *max_len,
            *max_steps,
            *right_steps,
            *seed,
            *n,
            tolerance,
            *max_blocks,
        ),
    }
}

fn read_text(path: &Path) -> Result<String, RunResult> {
    std::fs::read_to_string(path)
        .map_err(|e| RunResult::fail(EXIT_USAGE, format!("{}: {e}", path.display())))
}

fn parse_file(path: &Path) -> Result<Machine, RunResult> {
    let text = read_text(path)?;
    parse_machine(&text).map_err(|e: ParseError| {
        RunResult::fail(EXIT_USAGE, format!("{}: {e}", path.display()))
    })
}

/// Loads a machine for an operation that needs a well-formed one: a
/// file that parses but breaks its class rules is reported as a
/// violation, not a usage error.
fn load_valid(path: &Path) -> Result<Machine, RunResult> {
    let m = parse_file(path)?;
    let rep = m.validate();
    if !rep.is_ok() {
        let mut msg = format!("{} is not a well-formed machine:", path.display());
        for v in &rep.violations {
            let _ = write!(msg, "\n  violation {v}");
        }
        return Err(RunResult::fail(EXIT_VIOLATION, msg));
    }
    Ok(m)
}

fn transform_code(e: &TransformError) -> u8 {
    match e {
        // Handing a pass the wrong machine kind is a usage error; a
        // machine of the right kind that breaks the pass's
        // precondition is a violation.
        TransformError::WrongKind { .. } => EXIT_USAGE,
        _ => EXIT_VIOLATION,
    }
}

fn simulate_code(e: &SimulateError) -> u8 {
    match e {
        SimulateError::BudgetExceeded { .. } => EXIT_USAGE,
        SimulateError::UnsupportedKind { .. } => EXIT_USAGE,
        _ => EXIT_VIOLATION,
    }
}

fn cmd_validate(file: &Path) -> RunResult {
    let m = match parse_file(file) {
        Ok(m) => m,
        Err(r) => return r,
    };
    let rep = m.validate();
    let mut out = String::new();
    let _ = writeln!(out, "report validate");
    let _ = writeln!(out, "machine {}", file.display());
    let _ = writeln!(out, "kind {}", m.kind());
    for v in &rep.violations {
        let _ = writeln!(out, "violation {v}");
    }
    for a in &rep.advisories {
        let _ = writeln!(out, "advisory {a}");
    }
    let _ = writeln!(out, "ok {}", rep.is_ok());
    RunResult {
        out,
        err: String::new(),
        code: if rep.is_ok() { EXIT_OK } else { EXIT_VIOLATION },
    }
}

fn cmd_info(file: &Path) -> RunResult {
    let m = match load_valid(file) {
        Ok(m) => m,
        Err(r) => return r,
    };
    let size = kind_size(&m);
    let mut out = String::new();
    let _ = writeln!(out, "report info");
    let _ = writeln!(out, "machine {}", file.display());
    let _ = writeln!(out, "kind {}", m.kind());
    let _ = writeln!(out, "states {}", size.states);
    let _ = writeln!(out, "rules {}", size.rules);
    match &m {
        Machine::Ptm(p) => {
            let _ = writeln!(out, "symbol-deterministic {}", p.is_symbol_deterministic());
            let _ = writeln!(out, "real-time {}", p.is_real_time());
        }
        Machine::Qptm(q) => {
            let _ = writeln!(out, "deterministic {}", q.is_deterministic());
            let _ = writeln!(out, "symbol-deterministic {}", q.is_symbol_deterministic());
            let _ = writeln!(out, "real-time {}", q.is_real_time());
        }
        Machine::TwoPda(p) => {
            let _ = writeln!(out, "deterministic {}", p.is_deterministic());
            let _ = writeln!(out, "symbol-deterministic {}", p.is_symbol_deterministic());
            let _ = writeln!(out, "real-time {}", p.is_real_time());
            let _ = writeln!(out, "rd {}", p.is_rd());
        }
        Machine::TwoPdaFull(_) => {}
        Machine::Rnn(r) => {
            let _ = writeln!(out, "hidden-width {}", r.d);
            let _ = writeln!(out, "micro-steps {}", r.k);
            let _ = writeln!(out, "output-symbols {}", r.sigma.len());
        }
    }
    RunResult::ok(out)
}

/// Applies one named pass to a machine of whatever kind it expects.
fn apply_pass(pass: &str, m: Machine) -> Result<(Machine, PassReport), RunResult> {
    let got = m.kind().as_str();
    let wrong = |pass: &'static str, expected: &'static str| {
        let e = TransformError::WrongKind {
            pass,
            expected,
            got,
        };
        Err(RunResult::fail(transform_code(&e), e.to_string()))
    };
    match pass {
        "ptm-to-qptm" => match m {
            Machine::Ptm(p) => {
                let (q, r) = ptm_to_qptm(&p);
                Ok((Machine::Qptm(q), r))
            }
            _ => wrong("ptm-to-qptm", "ptm"),
        },
        "binarize" => match m {
            Machine::Qptm(q) => {
                let (q2, r) = binarize(&q);
                Ok((Machine::Qptm(q2), r))
            }
            _ => wrong("binarize", "qptm"),
        },
        "dyadicize" => match m {
            Machine::Qptm(q) => match dyadicize(&q) {
                Ok((p, r)) => Ok((Machine::Ptm(p), r)),
                Err(e) => Err(RunResult::fail(transform_code(&e), e.to_string())),
            },
            _ => wrong("dyadicize", "qptm"),
        },
        "qptm-to-2pda" => match m {
            Machine::Qptm(q) => {
                let (p, r) = qptm_to_2pda(&q);
                Ok((Machine::TwoPda(p), r))
            }
            _ => wrong("qptm-to-2pda", "qptm"),
        },
        "2pda-to-qptm" => match m {
            Machine::TwoPda(p) => match twopda_to_qptm(&p) {
                Ok((q, r)) => Ok((Machine::Qptm(q), r)),
                Err(e) => Err(RunResult::fail(transform_code(&e), e.to_string())),
            },
            _ => wrong("2pda-to-qptm", "2pda"),
        },
        "reduce-full" => match m {
            Machine::TwoPdaFull(p) => match reduce_both_stack_dependence(&p) {
                Ok((g, r)) => Ok((Machine::TwoPda(g), r)),
                Err(e) => Err(RunResult::fail(transform_code(&e), e.to_string())),
            },
            _ => wrong("reduce-full", "2pda-full"),
        },
        "2pda-to-rnn" => match m {
            Machine::TwoPda(p) => match compile_rnn(&p) {
                Ok((net, r)) => Ok((Machine::Rnn(net), r)),
                Err(e) => Err(RunResult::fail(transform_code(&e), e.to_string())),
            },
            _ => wrong("2pda-to-rnn", "2pda"),
        },
        other => Err(RunResult::fail(
            EXIT_USAGE,
            format!(
                "unknown pass {other:?}; expected one of ptm-to-qptm, binarize, dyadicize, \
                 qptm-to-2pda, 2pda-to-qptm, reduce-full, 2pda-to-rnn"
            ),
        )),
    }
}

fn render_pass_report(r: &PassReport) -> String {
    let mut out = String::new();
    let _ = writeln!(out, "pass {}", r.pass);
    let _ = writeln!(out, "grade {}", r.grade.as_str());
    let _ = writeln!(
        out,
        "input {} states={} rules={}",
        r.input.kind, r.input.states, r.input.rules
    );
    let _ = writeln!(
        out,
        "output {} states={} rules={}",
        r.output.kind, r.output.states, r.output.rules
    );
    for n in &r.notes {
        let _ = writeln!(out, "note {n}");
    }
    out
}

fn cmd_compile(passes: &[String], file: &Path, output: Option<&Path>) -> RunResult {
    let mut m = match load_valid(file) {
        Ok(m) => m,
        Err(r) => return r,
    };
    let mut reports = String::new();
    for pass in passes {
        let (next, rep) = match apply_pass(pass, m) {
            Ok(x) => x,
            Err(r) => return r,
        };
        m = next;
        reports.push_str(&render_pass_report(&rep));
    }
    let text = serialize_machine(&m);
    match output {
        Some(path) => {
            if let Err(e) = std::fs::write(path, &text) {
                return RunResult::fail(EXIT_USAGE, format!("{}: {e}", path.display()));
            }
            let mut out = reports;
            let _ = writeln!(out, "wrote {}", path.display());
            RunResult::ok(out)
        }
        None => RunResult {
            out: text,
            err: reports,
            code: EXIT_OK,
        },
    }
}

fn cmd_enumerate(file: &Path, max_len: usize, max_steps: u64) -> RunResult {
    let m = match load_valid(file) {
        Ok(m) => m,
        Err(r) => return r,
    };
    let budget = node_budget_from_env();
    let e = match enumerate_paths(&m, max_len, max_steps, budget) {
        Ok(e) => e,
        Err(err) => return RunResult::fail(simulate_code(&err), err.to_string()),
    };
    let mut out = String::new();
    let _ = writeln!(out, "report enumerate");
    let _ = writeln!(out, "machine {}", file.display());
    let _ = writeln!(out, "max-len {max_len}");
    let _ = writeln!(out, "max-steps {max_steps}");
    for p in &e.halted {
        let _ = writeln!(
            out,
            "path {}:{} steps={}",
            emitted_to_string(&p.emitted),
            rat_to_string(&p.weight),
            p.steps
        );
    }
    let _ = writeln!(out, "live-paths {}", e.live.len());
    RunResult::ok(out)
}

fn cmd_semimeasure(file: &Path, max_len: usize, max_steps: u64) -> RunResult {
    let m = match load_valid(file) {
        Ok(m) => m,
        Err(r) => return r,
    };
    let budget = node_budget_from_env();
    let t = match semimeasure(&m, max_len, max_steps, budget) {
        Ok(t) => t,
        Err(err) => return RunResult::fail(simulate_code(&err), err.to_string()),
    };
    let mut out = String::new();
    let _ = writeln!(out, "report semimeasure");
    let _ = writeln!(out, "machine {}", file.display());
    let _ = writeln!(out, "max-len {max_len}");
    let _ = writeln!(out, "max-steps {max_steps}");
    for row in &t.rows {
        let _ = writeln!(
            out,
            "mass {}:{} {}",
            emitted_to_string(&row.emitted),
            rat_to_string(&row.mass),
            if row.exact { "exact" } else { "lower-bound" }
        );
    }
    for l in &t.live {
        let _ = writeln!(out, "live {}", emitted_to_string(l));
    }
    let _ = writeln!(out, "total {}", rat_to_string(&t.total_mass()));
    RunResult::ok(out)
}

fn cmd_sample(file: &Path, seed: u64, n: u64, max_steps: u64) -> RunResult {
    let m = match load_valid(file) {
        Ok(m) => m,
        Err(r) => return r,
    };
    let s = match sample_many(&m, seed, n, max_steps) {
        Ok(s) => s,
        Err(err) => return RunResult::fail(simulate_code(&err), err.to_string()),
    };
    let mut out = String::new();
    let _ = writeln!(out, "report sample");
    let _ = writeln!(out, "machine {}", file.display());
    let _ = writeln!(out, "seed {seed}");
    let _ = writeln!(out, "n {n}");
    let _ = writeln!(out, "max-steps {max_steps}");
    for (emitted, count) in &s.counts {
        let _ = writeln!(out, "count {} {}", emitted_to_string(emitted), count);
    }
    let _ = writeln!(out, "cutoffs {}", s.cutoffs);
    RunResult::ok(out)
}

fn verdict_str(v: Verdict) -> &'static str {
    match v {
        Verdict::Equal => "equal",
        Verdict::Mismatch => "mismatch",
        Verdict::Inconclusive => "inconclusive",
    }
}

fn verdict_code(v: Verdict) -> u8 {
    match v {
        Verdict::Equal => EXIT_OK,
        Verdict::Mismatch => EXIT_VIOLATION,
        Verdict::Inconclusive => EXIT_USAGE,
    }
}

fn status_str(s: RowStatus) -> &'static str {
    match s {
        RowStatus::Agree => "agree",
        RowStatus::Mismatch => "mismatch",
        RowStatus::Inconclusive => "inconclusive",
    }
}

fn render_multiset(ws: &WeightMultiset) -> String {
    let parts: Vec<String> = ws
        .iter()
        .map(|(w, c)| format!("{}x{}", rat_to_string(w), c))
        .collect();
    format!("{{{}}}", parts.join(","))
}

fn render_weak(out: &mut String, r: &WeakReport) {
    for row in &r.rows {
        let _ = writeln!(
            out,
            "row {} left={} right={} left-exact={} right-exact={} status={}",
            emitted_to_string(&row.emitted),
            rat_to_string(&row.left),
            rat_to_string(&row.right),
            row.left_exact,
            row.right_exact,
            status_str(row.status)
        );
    }
    let _ = writeln!(out, "budget-hit {}", r.budget_hit);
}

fn render_strong(out: &mut String, r: &StrongReport) {
    for row in &r.rows {
        let _ = writeln!(
            out,
            "row {} left={} right={} complete={} status={}",
            emitted_to_string(&row.emitted),
            render_multiset(&row.left),
            render_multiset(&row.right),
            row.complete,
            status_str(row.status)
        );
    }
    let _ = writeln!(out, "budget-hit {}", r.budget_hit);
}

fn render_stat(out: &mut String, r: &StatReport) {
    let mut cutoff_left = 0u64;
    let mut cutoff_right = 0u64;
    for row in &r.rows {
        match &row.outcome {
            Some(emitted) => {
                let _ = writeln!(
                    out,
                    "row {} left={} right={}",
                    emitted_to_string(emitted),
                    row.left_count,
                    row.right_count
                );
            }
            None => {
                cutoff_left = row.left_count;
                cutoff_right = row.right_count;
            }
        }
    }
    let _ = writeln!(out, "cutoffs left={cutoff_left} right={cutoff_right}");
    let _ = writeln!(out, "n {}", r.n);
    let _ = writeln!(out, "distance {}", rat_to_string(&r.distance));
    let _ = writeln!(out, "tolerance {}", rat_to_string(&r.tolerance));
}

#[allow(clippy::too_many_arguments)]
fn cmd_check_equiv(
    left: &Path,
    right: &Path,
    mode: Mode,
    max_len: usize,
    max_steps: u64,
    right_steps: Option<u64>,
    seed: u64,
    n: u64,
    tolerance: &str,
    max_blocks: u64,
) -> RunResult {
    let lm = match load_valid(left) {
        Ok(m) => m,
        Err(r) => return r,
    };
    let rm = match load_valid(right) {
        Ok(m) => m,
        Err(r) => return r,
    };
    let budget = node_budget_from_env();
    let mut out = String::new();
    let _ = writeln!(out, "report check-equiv");
    let _ = writeln!(out, "mode {}", mode.as_str());
    let _ = writeln!(out, "left {}", left.display());
    let _ = writeln!(out, "right {}", right.display());
    let verdict = match mode {
        Mode::Weak => {
            let _ = writeln!(out, "max-len {max_len}");
            let _ = writeln!(out, "max-steps {max_steps}");
            match check_weak(&lm, &rm, max_len, max_steps, budget) {
                Ok(r) => {
                    render_weak(&mut out, &r);
                    r.verdict
                }
                Err(e) => return RunResult::fail(simulate_code(&e), e.to_string()),
            }
        }
        Mode::Strong => {
            let rs = right_steps.unwrap_or(max_steps);
            let _ = writeln!(out, "max-len {max_len}");
            let _ = writeln!(out, "left-steps {max_steps}");
            let _ = writeln!(out, "right-steps {rs}");
            match check_strong_multiset(&lm, &rm, max_len, max_steps, rs, budget) {
                Ok(r) => {
                    render_strong(&mut out, &r);
                    r.verdict
                }
                Err(e) => return RunResult::fail(simulate_code(&e), e.to_string()),
            }
        }
        Mode::Stat => {
            let tol: Rational = match rat_parse(tolerance) {
                Ok(t) => t,
                Err(e) => return RunResult::fail(EXIT_USAGE, e.to_string()),
            };
            let _ = writeln!(out, "seed {seed}");
            let _ = writeln!(out, "max-steps {max_steps}");
            match check_statistical(&lm, &rm, seed, n, max_steps, &tol) {
                Ok(r) => {
                    render_stat(&mut out, &r);
                    r.verdict
                }
                Err(e) => return RunResult::fail(simulate_code(&e), e.to_string()),
            }
        }
        Mode::PathLaw => {
            let _ = writeln!(out, "max-len {max_len}");
            let _ = writeln!(out, "max-steps {max_steps}");
            match check_ptm_path_law(&lm, max_len, max_steps, budget) {
                Ok(r) => {
                    let _ = writeln!(out, "checked {}", r.checked);
                    for v in &r.violations {
                        let _ = writeln!(
                            out,
                            "violation {} weight={} steps={}",
                            emitted_to_string(&v.emitted),
                            rat_to_string(&v.weight),
                            v.steps
                        );
                    }
                    let _ = writeln!(out, "all-dyadic {}", r.all_dyadic);
                    if r.ok {
                        Verdict::Equal
                    } else {
                        Verdict::Mismatch
                    }
                }
                Err(e) => return RunResult::fail(simulate_code(&e), e.to_string()),
            }
        }
        Mode::Lockstep => {
            let _ = writeln!(out, "max-blocks {max_blocks}");
            match rnn_lockstep(&lm, &rm, max_blocks, budget) {
                Ok(r) => {
                    let _ = writeln!(out, "pairs {}", r.pairs);
                    for note in &r.notes {
                        let _ = writeln!(out, "note {note}");
                    }
                    if r.ok {
                        Verdict::Equal
                    } else {
                        Verdict::Mismatch
                    }
                }
                Err(e) => return RunResult::fail(simulate_code(&e), e.to_string()),
            }
        }
    };
    let _ = writeln!(out, "verdict {}", verdict_str(verdict));
    RunResult {
        out,
        err: String::new(),
        code: verdict_code(verdict),
    }
}
