//! C ABI for the machine toolkit: opaque handles, integer status codes,
//! and caller-freed strings.
//!
//! Conventions, enforced by every function here:
//!
//! * Machines travel as opaque `PtmcMachine*` handles. A handle returned
//!   through an out-parameter is owned by the caller and must be released
//!   with [`ptmc_machine_free`]. Handles are never mutated after creation,
//!   so sharing one between threads for reads is sound.
//! * Every `char*` handed out is a fresh NUL-terminated allocation owned
//!   by the caller; release it with [`ptmc_string_free`]. The only
//!   exception is [`ptmc_version`], which returns a static string.
//! * Every function accepts null pointers and reports them as
//!   [`PtmcStatus::NullArgument`] instead of crashing. No panic crosses
//!   the boundary; a bug that would panic comes back as
//!   [`PtmcStatus::InternalPanic`].
//! * On any status other than [`PtmcStatus::Ok`] (and on
//!   [`PtmcStatus::ValidationFailed`], which still writes its report), a
//!   human-readable description is available from
//!   [`ptmc_last_error_message`] until the same thread's next call.
//!
//! Out-parameters are written only when the function returns a status
//! that documents them as valid; they are left untouched otherwise.

use std::cell::RefCell;
use std::ffi::{c_char, CStr, CString};
use std::fmt::Write as _;
use std::panic::{catch_unwind, AssertUnwindSafe};

use ptmc::equivalence::{check_weak, Verdict};
use ptmc::error::{SimulateError, TransformError};
use ptmc::format::{parse_machine, serialize_machine};
use ptmc::machines::Machine;
use ptmc::simulate::{emitted_to_string, semimeasure, DEFAULT_NODE_BUDGET};
use ptmc::numerics::rat_to_string;
use ptmc::transforms::{
    binarize, compile_rnn, dyadicize, ptm_to_qptm, qptm_to_2pda, reduce_both_stack_dependence,
    twopda_to_qptm,
};

/// Opaque machine handle: one parsed or compiled machine of any kind.
pub struct PtmcMachine {
    inner: Machine,
}

/// Status code returned by every fallible function.
#[repr(C)]
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum PtmcStatus {
    /// The call succeeded; documented out-parameters are valid.
    Ok = 0,
    /// A required pointer argument was null.
    NullArgument = 1,
    /// A string argument was not valid UTF-8.
    InvalidUtf8 = 2,
    /// The text is not a machine description.
    ParseFailed = 3,
    /// The machine parsed but breaks its kind's structural rules; the
    /// report out-parameter lists every violation.
    ValidationFailed = 4,
    /// The pass exists but expects a different machine kind.
    WrongKind = 5,
    /// The pass name is not one of the documented passes.
    UnknownPass = 6,
    /// The machine is the right kind but fails a precondition of the
    /// pass (for example, output-determinism for network compilation).
    PreconditionFailed = 7,
    /// The node budget was exhausted before the requested bound.
    BudgetExceeded = 8,
    /// The operation does not support this machine kind.
    Unsupported = 9,
    /// An internal invariant broke; the library caught the panic at the
    /// boundary.
    InternalPanic = 10,
}

/// Outcome of an equivalence check.
#[repr(C)]
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum PtmcVerdict {
    /// No refuting evidence within the bounds.
    Equal = 0,
    /// A provable difference was found.
    Mismatch = 1,
    /// A walk ran out of budget before producing evidence either way.
    Inconclusive = 2,
}

thread_local! {
    static LAST_ERROR: RefCell<String> = const { RefCell::new(String::new()) };
}

fn set_error(msg: impl Into<String>) {
    LAST_ERROR.with(|e| *e.borrow_mut() = msg.into());
}

fn clear_error() {
    LAST_ERROR.with(|e| e.borrow_mut().clear());
}

/// Allocates a C string the caller frees with `ptmc_string_free`.
/// Machine text never contains NUL bytes; strip them defensively so the
/// conversion cannot fail.
fn leak_string(s: String) -> *mut c_char {
    let cleaned: String = s.chars().filter(|c| *c != '\0').collect();
    CString::new(cleaned).expect("NUL bytes were just removed").into_raw()
}

/// Runs a closure with panics converted to `InternalPanic`.
fn guarded(f: impl FnOnce() -> PtmcStatus) -> PtmcStatus {
    match catch_unwind(AssertUnwindSafe(f)) {
        Ok(status) => status,
        Err(_) => {
            set_error("an internal invariant broke; the panic was caught at the C boundary");
            PtmcStatus::InternalPanic
        }
    }
}

unsafe fn machine_ref<'a>(m: *const PtmcMachine) -> Option<&'a Machine> {
    m.as_ref().map(|h| &h.inner)
}

unsafe fn str_arg<'a>(p: *const c_char) -> Result<&'a str, PtmcStatus> {
    if p.is_null() {
        set_error("a required string argument was null");
        return Err(PtmcStatus::NullArgument);
    }
    CStr::from_ptr(p).to_str().map_err(|_| {
        set_error("a string argument was not valid UTF-8");
        PtmcStatus::InvalidUtf8
    })
}

fn transform_status(e: &TransformError) -> PtmcStatus {
    match e {
        TransformError::WrongKind { .. } => PtmcStatus::WrongKind,
        _ => PtmcStatus::PreconditionFailed,
    }
}

fn simulate_status(e: &SimulateError) -> PtmcStatus {
    match e {
        SimulateError::BudgetExceeded { .. } => PtmcStatus::BudgetExceeded,
        _ => PtmcStatus::Unsupported,
    }
}

/// Library version as a static NUL-terminated string. Do not free.
#[no_mangle]
pub extern "C" fn ptmc_version() -> *const c_char {
    concat!(env!("CARGO_PKG_VERSION"), "\0").as_ptr() as *const c_char
}

/// The node budget the library uses when told to use the default.
#[no_mangle]
pub extern "C" fn ptmc_default_node_budget() -> u64 {
    DEFAULT_NODE_BUDGET
}

/// Description of the calling thread's most recent failure, as a fresh
/// string (empty if the last call succeeded). Free with
/// `ptmc_string_free`.
#[no_mangle]
pub extern "C" fn ptmc_last_error_message() -> *mut c_char {
    LAST_ERROR.with(|e| leak_string(e.borrow().clone()))
}

/// Frees a string returned by this library. Null is a no-op.
#[no_mangle]
pub unsafe extern "C" fn ptmc_string_free(s: *mut c_char) {
    if !s.is_null() {
        drop(CString::from_raw(s));
    }
}

/// Parses a machine description. On `Ok`, writes a caller-owned handle
/// to `out`.
#[no_mangle]
pub unsafe extern "C" fn ptmc_machine_parse(
    text: *const c_char,
    out: *mut *mut PtmcMachine,
) -> PtmcStatus {
    guarded(|| {
        clear_error();
        if out.is_null() {
            set_error("the out-parameter was null");
            return PtmcStatus::NullArgument;
        }
        let text = match str_arg(text) {
            Ok(t) => t,
            Err(s) => return s,
        };
        match parse_machine(text) {
            Ok(m) => {
                *out = Box::into_raw(Box::new(PtmcMachine { inner: m }));
                PtmcStatus::Ok
            }
            Err(e) => {
                set_error(e.to_string());
                PtmcStatus::ParseFailed
            }
        }
    })
}

/// Releases a machine handle. Null is a no-op; freeing twice is not.
#[no_mangle]
pub unsafe extern "C" fn ptmc_machine_free(m: *mut PtmcMachine) {
    if !m.is_null() {
        drop(Box::from_raw(m));
    }
}

/// Writes the machine's kind tag (`ptm`, `qptm`, `2pda`, `2pda-full`,
/// or `rnn`) as a fresh string.
#[no_mangle]
pub unsafe extern "C" fn ptmc_machine_kind(
    m: *const PtmcMachine,
    out: *mut *mut c_char,
) -> PtmcStatus {
    guarded(|| {
        clear_error();
        let Some(machine) = machine_ref(m) else {
            set_error("the machine handle was null");
            return PtmcStatus::NullArgument;
        };
        if out.is_null() {
            set_error("the out-parameter was null");
            return PtmcStatus::NullArgument;
        }
        *out = leak_string(machine.kind().as_str().to_string());
        PtmcStatus::Ok
    })
}

/// Checks the machine against its kind's structural rules. Returns `Ok`
/// for a clean machine and `ValidationFailed` otherwise; in both cases
/// (when `out_report` is non-null) writes a report with one
/// `violation ...` or `advisory ...` line per finding, empty for a
/// machine with nothing to say.
#[no_mangle]
pub unsafe extern "C" fn ptmc_machine_validate(
    m: *const PtmcMachine,
    out_report: *mut *mut c_char,
) -> PtmcStatus {
    guarded(|| {
        clear_error();
        let Some(machine) = machine_ref(m) else {
            set_error("the machine handle was null");
            return PtmcStatus::NullArgument;
        };
        let rep = machine.validate();
        let mut text = String::new();
        for v in &rep.violations {
            let _ = writeln!(text, "violation {v}");
        }
        for a in &rep.advisories {
            let _ = writeln!(text, "advisory {a}");
        }
        if !out_report.is_null() {
            *out_report = leak_string(text);
        }
        if rep.is_ok() {
            PtmcStatus::Ok
        } else {
            set_error(format!(
                "validation found {} violation(s)",
                rep.violations.len()
            ));
            PtmcStatus::ValidationFailed
        }
    })
}

/// Writes the machine back out in its textual format.
#[no_mangle]
pub unsafe extern "C" fn ptmc_machine_serialize(
    m: *const PtmcMachine,
    out: *mut *mut c_char,
) -> PtmcStatus {
    guarded(|| {
        clear_error();
        let Some(machine) = machine_ref(m) else {
            set_error("the machine handle was null");
            return PtmcStatus::NullArgument;
        };
        if out.is_null() {
            set_error("the out-parameter was null");
            return PtmcStatus::NullArgument;
        }
        *out = leak_string(serialize_machine(machine));
        PtmcStatus::Ok
    })
}

/// Applies one named compilation pass, producing a new machine and
/// leaving the input untouched. Pass names are the same as on the
/// command line: `ptm-to-qptm`, `binarize`, `dyadicize`, `qptm-to-2pda`,
/// `2pda-to-qptm`, `reduce-full`, `2pda-to-rnn`.
#[no_mangle]
pub unsafe extern "C" fn ptmc_machine_apply_pass(
    m: *const PtmcMachine,
    pass: *const c_char,
    out: *mut *mut PtmcMachine,
) -> PtmcStatus {
    guarded(|| {
        clear_error();
        let Some(machine) = machine_ref(m) else {
            set_error("the machine handle was null");
            return PtmcStatus::NullArgument;
        };
        if out.is_null() {
            set_error("the out-parameter was null");
            return PtmcStatus::NullArgument;
        }
        let pass = match str_arg(pass) {
            Ok(p) => p,
            Err(s) => return s,
        };
        let wrong = |pass: &'static str, expected: &'static str| TransformError::WrongKind {
            pass,
            expected,
            got: machine.kind().as_str(),
        };
        let result: Result<Machine, TransformError> = match pass {
            "ptm-to-qptm" => match machine {
                Machine::Ptm(p) => Ok(Machine::Qptm(ptm_to_qptm(p).0)),
                _ => Err(wrong("ptm-to-qptm", "ptm")),
            },
            "binarize" => match machine {
                Machine::Qptm(q) => Ok(Machine::Qptm(binarize(q).0)),
                _ => Err(wrong("binarize", "qptm")),
            },
            "dyadicize" => match machine {
                Machine::Qptm(q) => dyadicize(q).map(|(p, _)| Machine::Ptm(p)),
                _ => Err(wrong("dyadicize", "qptm")),
            },
            "qptm-to-2pda" => match machine {
                Machine::Qptm(q) => Ok(Machine::TwoPda(qptm_to_2pda(q).0)),
                _ => Err(wrong("qptm-to-2pda", "qptm")),
            },
            "2pda-to-qptm" => match machine {
                Machine::TwoPda(p) => twopda_to_qptm(p).map(|(q, _)| Machine::Qptm(q)),
                _ => Err(wrong("2pda-to-qptm", "2pda")),
            },
            "reduce-full" => match machine {
                Machine::TwoPdaFull(p) => {
                    reduce_both_stack_dependence(p).map(|(g, _)| Machine::TwoPda(g))
                }
                _ => Err(wrong("reduce-full", "2pda-full")),
            },
            "2pda-to-rnn" => match machine {
                Machine::TwoPda(p) => compile_rnn(p).map(|(n, _)| Machine::Rnn(n)),
                _ => Err(wrong("2pda-to-rnn", "2pda")),
            },
            other => {
                set_error(format!(
                    "unknown pass {other:?}; expected one of ptm-to-qptm, binarize, dyadicize, \
                     qptm-to-2pda, 2pda-to-qptm, reduce-full, 2pda-to-rnn"
                ));
                return PtmcStatus::UnknownPass;
            }
        };
        match result {
            Ok(produced) => {
                *out = Box::into_raw(Box::new(PtmcMachine { inner: produced }));
                PtmcStatus::Ok
            }
            Err(e) => {
                let status = transform_status(&e);
                set_error(e.to_string());
                status
            }
        }
    })
}

/// Evaluates the machine's output distribution over strings of up to
/// `max_len` symbols, giving runs `max_steps` raw steps and the
/// enumeration `budget` merged nodes (pass
/// `ptmc_default_node_budget()` when in doubt). Writes a report with
/// one `mass <string>:<fraction> exact|lower-bound` line per string
/// and a final `total <fraction>` line.
#[no_mangle]
pub unsafe extern "C" fn ptmc_semimeasure(
    m: *const PtmcMachine,
    max_len: u64,
    max_steps: u64,
    budget: u64,
    out_report: *mut *mut c_char,
) -> PtmcStatus {
    guarded(|| {
        clear_error();
        let Some(machine) = machine_ref(m) else {
            set_error("the machine handle was null");
            return PtmcStatus::NullArgument;
        };
        if out_report.is_null() {
            set_error("the out-parameter was null");
            return PtmcStatus::NullArgument;
        }
        let table = match semimeasure(machine, max_len as usize, max_steps, budget) {
            Ok(t) => t,
            Err(e) => {
                let status = simulate_status(&e);
                set_error(e.to_string());
                return status;
            }
        };
        let mut text = String::new();
        for row in &table.rows {
            let _ = writeln!(
                text,
                "mass {}:{} {}",
                emitted_to_string(&row.emitted),
                rat_to_string(&row.mass),
                if row.exact { "exact" } else { "lower-bound" }
            );
        }
        let _ = writeln!(text, "total {}", rat_to_string(&table.total_mass()));
        *out_report = leak_string(text);
        PtmcStatus::Ok
    })
}

/// Compares two machines' output distributions over strings of up to
/// `max_len` symbols within `max_steps` raw steps per side, writing the
/// verdict to `out_verdict`. `Equal` means no refuting evidence within
/// the bounds; `Inconclusive` means a side exhausted the `budget`.
#[no_mangle]
pub unsafe extern "C" fn ptmc_check_weak(
    left: *const PtmcMachine,
    right: *const PtmcMachine,
    max_len: u64,
    max_steps: u64,
    budget: u64,
    out_verdict: *mut PtmcVerdict,
) -> PtmcStatus {
    guarded(|| {
        clear_error();
        let (Some(l), Some(r)) = (machine_ref(left), machine_ref(right)) else {
            set_error("a machine handle was null");
            return PtmcStatus::NullArgument;
        };
        if out_verdict.is_null() {
            set_error("the out-parameter was null");
            return PtmcStatus::NullArgument;
        }
        match check_weak(l, r, max_len as usize, max_steps, budget) {
            Ok(report) => {
                *out_verdict = match report.verdict {
                    Verdict::Equal => PtmcVerdict::Equal,
                    Verdict::Mismatch => PtmcVerdict::Mismatch,
                    Verdict::Inconclusive => PtmcVerdict::Inconclusive,
                };
                PtmcStatus::Ok
            }
            Err(e) => {
                let status = simulate_status(&e);
                set_error(e.to_string());
                status
            }
        }
    })
}
