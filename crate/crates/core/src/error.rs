//! Error types shared across the toolkit.
//!
//! Every fallible public operation returns a dedicated error enum rather than
//! a stringly-typed failure, so callers (CLI, FFI, tests) can branch on the
//! variant. Display messages are written to be printable as-is by the CLI.

use thiserror::Error;

/// Errors from exact-rational parsing and arithmetic helpers.
#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum NumericError {
    /// The literal is not of the form `digits` or `digits/digits`
    /// (an optional leading `-` is allowed on the numerator only).
    #[error("invalid rational literal {literal:?}: expected `n` or `n/d` with decimal digits")]
    InvalidLiteral { literal: String },
    /// The literal has denominator zero.
    #[error("invalid rational literal {literal:?}: denominator is zero")]
    ZeroDenominator { literal: String },
}

/// Errors raised while reading a machine description from text.
#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum ParseError {
    #[error("line {line}: {message}")]
    Syntax { line: usize, message: String },
    #[error("{0}")]
    Structure(String),
    #[error(transparent)]
    Numeric(#[from] NumericError),
}

/// Hard failures when assembling a machine from parts (as opposed to the
/// soft findings a validation report carries).
#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum MachineError {
    #[error("unknown state {0:?}")]
    UnknownState(String),
    #[error("unknown symbol {0:?}")]
    UnknownSymbol(String),
    #[error("reserved token {0:?} may not be declared as an alphabet symbol or state")]
    ReservedToken(String),
    #[error("duplicate declaration of {0:?}")]
    Duplicate(String),
}

/// Errors from the compilation passes.
#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum TransformError {
    /// The pass was handed a machine of the wrong kind.
    #[error("pass {pass} expects a {expected} input, got {got}")]
    WrongKind {
        pass: &'static str,
        expected: &'static str,
        got: &'static str,
    },
    /// The network compiler requires at most one transition per
    /// (state, stack1-top, output symbol) triple.
    #[error(
        "network compilation requires output-determinism: \
         key ({state}, {top}) has {count} transitions emitting {symbol}"
    )]
    NotOutputDeterministic {
        state: String,
        top: String,
        symbol: String,
        count: usize,
    },
    /// The network compiler codes stack symbols in at most two bits.
    #[error(
        "network compilation supports at most 4 stack symbols including the \
         bottom marker; this machine has {count}"
    )]
    StackAlphabetTooWide { count: usize },
    /// The input fails a structural precondition of the pass.
    #[error("pass {pass}: {message}")]
    Precondition { pass: &'static str, message: String },
}

/// Errors from enumeration, semimeasure evaluation, and sampling.
#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum SimulateError {
    /// The configured node budget was exhausted before the requested bound.
    #[error("node budget of {budget} exhausted during enumeration")]
    BudgetExceeded { budget: u64 },
    /// The operation does not support this machine kind.
    #[error("{operation} does not support {kind} machines")]
    UnsupportedKind {
        operation: &'static str,
        kind: &'static str,
    },
    /// A network's emission scores failed to form a probability
    /// distribution where one was required.
    #[error("network emission scores do not form a probability distribution: {0}")]
    BadEmissionScores(String),
}
