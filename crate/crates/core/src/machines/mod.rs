//! Machine classes and their validation rules.
//!
//! Five classes share one vocabulary of symbols and states:
//!
//! * [`Ptm`] — a probabilistic Turing machine driven by a fair coin: two
//!   total transition functions over (state, scanned symbol), one of which is
//!   sampled uniformly at every step.
//! * [`Qptm`] — its rationally weighted generalization: finitely many
//!   transitions per (state, scanned symbol), with weights summing to one.
//! * [`TwoPda`] — a weighted two-stack pushdown automaton whose transitions
//!   are keyed on (state, stack-1 top); stack 2 participates through optional
//!   pop guards.
//! * [`TwoPdaFull`] — the variant keyed on (state, stack-1 top, stack-2 top).
//! * [`RnnLm`] — a simple recurrent language model with saturated-sigmoid
//!   activations and exact rational parameters.
//!
//! Validation never panics and never stops at the first problem: it returns a
//! [`ValidationReport`] listing hard `violations` (the machine is not a
//! member of its class) and soft `advisories` (legal but suspicious, e.g.
//! unreachable states or configurations that may strand probability mass).

pub mod ptm;
pub mod qptm;
pub mod rnn;
pub mod twopda;

pub use ptm::{Ptm, PtmStep};
pub use qptm::{Qptm, QptmTrans};
pub use rnn::{InTok, Layout, OutTok, RnnLm};
pub use twopda::{PdaTrans, TwoPda, TwoPdaFull};

use std::collections::{BTreeMap, BTreeSet, VecDeque};
use std::fmt;

/// Surface spelling of the tape blank.
pub const BLANK_TOKEN: &str = "_";
/// Surface spelling of the stack bottom marker.
pub const BOTTOM_TOKEN: &str = "$";
/// Surface spelling of the empty emission / empty stack operation.
pub const EPSILON_TOKEN: &str = "eps";
/// Reserved begin-of-sequence token (network feedback alphabet).
pub const BOS_TOKEN: &str = "BOS";
/// Reserved end-of-sequence token (network emission alphabet).
pub const EOS_TOKEN: &str = "EOS";

/// Tokens that may never be declared as user symbols or states.
pub const RESERVED_TOKENS: [&str; 5] = [
    BLANK_TOKEN,
    BOTTOM_TOKEN,
    EPSILON_TOKEN,
    BOS_TOKEN,
    EOS_TOKEN,
];

pub fn is_reserved_token(s: &str) -> bool {
    RESERVED_TOKENS.contains(&s)
}

/// A tape, stack, or output symbol. The blank (`_`) and the stack bottom
/// marker (`$`) are ordinary values of this type with reserved spellings:
/// they may appear in transitions wherever their stack or tape discipline
/// allows, but never in a declared alphabet.
#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct Sym(String);

impl Sym {
    pub fn new(s: impl Into<String>) -> Self {
        Sym(s.into())
    }
    /// The tape blank `_`.
    pub fn blank() -> Self {
        Sym(BLANK_TOKEN.to_string())
    }
    /// The stack bottom marker `$`.
    pub fn bottom() -> Self {
        Sym(BOTTOM_TOKEN.to_string())
    }
    pub fn is_blank(&self) -> bool {
        self.0 == BLANK_TOKEN
    }
    pub fn is_bottom(&self) -> bool {
        self.0 == BOTTOM_TOKEN
    }
    pub fn as_str(&self) -> &str {
        &self.0
    }
}

impl fmt::Display for Sym {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.0)
    }
}

/// A control state.
#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct State(String);

impl State {
    pub fn new(s: impl Into<String>) -> Self {
        State(s.into())
    }
    pub fn as_str(&self) -> &str {
        &self.0
    }
}

impl fmt::Display for State {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.0)
    }
}

/// Head movement on a tape: left, stay, right.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum Move {
    L,
    N,
    R,
}

impl Move {
    pub fn as_str(&self) -> &'static str {
        match self {
            Move::L => "L",
            Move::N => "N",
            Move::R => "R",
        }
    }
    pub fn parse(s: &str) -> Option<Move> {
        match s {
            "L" => Some(Move::L),
            "N" => Some(Move::N),
            "R" => Some(Move::R),
            _ => None,
        }
    }
}

impl fmt::Display for Move {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

/// The five machine classes this crate manipulates.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum MachineKind {
    Ptm,
    Qptm,
    TwoPda,
    TwoPdaFull,
    Rnn,
}

impl MachineKind {
    pub fn as_str(&self) -> &'static str {
        match self {
            MachineKind::Ptm => "ptm",
            MachineKind::Qptm => "qptm",
            MachineKind::TwoPda => "2pda",
            MachineKind::TwoPdaFull => "2pda-full",
            MachineKind::Rnn => "rnn",
        }
    }
    pub fn parse(s: &str) -> Option<MachineKind> {
        match s {
            "ptm" => Some(MachineKind::Ptm),
            "qptm" => Some(MachineKind::Qptm),
            "2pda" => Some(MachineKind::TwoPda),
            "2pda-full" => Some(MachineKind::TwoPdaFull),
            "rnn" => Some(MachineKind::Rnn),
            _ => None,
        }
    }
}

impl fmt::Display for MachineKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

/// Any machine, tagged by class.
#[derive(Debug, Clone, PartialEq, Eq)]
pub enum Machine {
    Ptm(Ptm),
    Qptm(Qptm),
    TwoPda(TwoPda),
    TwoPdaFull(TwoPdaFull),
    Rnn(RnnLm),
}

impl Machine {
    pub fn kind(&self) -> MachineKind {
        match self {
            Machine::Ptm(_) => MachineKind::Ptm,
            Machine::Qptm(_) => MachineKind::Qptm,
            Machine::TwoPda(_) => MachineKind::TwoPda,
            Machine::TwoPdaFull(_) => MachineKind::TwoPdaFull,
            Machine::Rnn(_) => MachineKind::Rnn,
        }
    }

    pub fn validate(&self) -> ValidationReport {
        match self {
            Machine::Ptm(m) => m.validate(),
            Machine::Qptm(m) => m.validate(),
            Machine::TwoPda(m) => m.validate(),
            Machine::TwoPdaFull(m) => m.validate(),
            Machine::Rnn(m) => m.validate(),
        }
    }
}

/// Findings from validating one machine. `violations` are failures of the
/// class definition; `advisories` flag legal constructions that usually
/// indicate a mistake (unreachable states, configurations that may strand
/// mass). A machine is well-formed iff `violations` is empty.
#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct ValidationReport {
    pub violations: Vec<String>,
    pub advisories: Vec<String>,
}

impl ValidationReport {
    pub fn new() -> Self {
        Self::default()
    }
    pub fn violation(&mut self, msg: impl Into<String>) {
        self.violations.push(msg.into());
    }
    pub fn advisory(&mut self, msg: impl Into<String>) {
        self.advisories.push(msg.into());
    }
    pub fn is_ok(&self) -> bool {
        self.violations.is_empty()
    }
}

/// Shared declaration checks: reserved spellings and membership of the
/// distinguished states.
pub(crate) fn check_declarations(
    rep: &mut ValidationReport,
    states: &BTreeSet<State>,
    sigma: &BTreeSet<Sym>,
    gamma: &BTreeSet<Sym>,
    initial: &State,
    halt: &State,
) {
    for q in states {
        if is_reserved_token(q.as_str()) {
            rep.violation(format!("reserved token {:?} declared as a state", q.as_str()));
        }
    }
    for (set, what) in [(sigma, "output symbol"), (gamma, "working symbol")] {
        for s in set {
            if is_reserved_token(s.as_str()) {
                rep.violation(format!("reserved token {:?} declared as a {what}", s.as_str()));
            }
        }
    }
    if !states.contains(initial) {
        rep.violation(format!("initial state {initial} is not declared"));
    }
    if !states.contains(halt) {
        rep.violation(format!("final state {halt} is not declared"));
    }
}

/// Coarse state-graph reachability: a state is considered reachable if some
/// chain of transitions leads to it from the initial state, ignoring tape and
/// stack contents. Unreachable states are reported as advisories only — an
/// overapproximation of configuration reachability is the right strength for
/// a lint.
pub(crate) fn unreachable_state_advisories(
    rep: &mut ValidationReport,
    states: &BTreeSet<State>,
    initial: &State,
    edges: impl IntoIterator<Item = (State, State)>,
) {
    let mut adj: BTreeMap<State, BTreeSet<State>> = BTreeMap::new();
    for (from, to) in edges {
        adj.entry(from).or_default().insert(to);
    }
    let mut seen: BTreeSet<State> = BTreeSet::new();
    let mut queue: VecDeque<State> = VecDeque::new();
    seen.insert(initial.clone());
    queue.push_back(initial.clone());
    while let Some(q) = queue.pop_front() {
        if let Some(next) = adj.get(&q) {
            for n in next {
                if seen.insert(n.clone()) {
                    queue.push_back(n.clone());
                }
            }
        }
    }
    for q in states {
        if !seen.contains(q) {
            rep.advisory(format!("state {q} is unreachable from the initial state"));
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn reserved_tokens_are_recognized() {
        for t in ["_", "$", "eps", "BOS", "EOS"] {
            assert!(is_reserved_token(t));
        }
        assert!(!is_reserved_token("a"));
        assert!(!is_reserved_token("q0"));
    }

    #[test]
    fn blank_and_bottom_have_reserved_spellings() {
        assert_eq!(Sym::blank().as_str(), "_");
        assert_eq!(Sym::bottom().as_str(), "$");
        assert!(Sym::blank().is_blank());
        assert!(Sym::bottom().is_bottom());
        assert!(!Sym::new("a").is_blank());
    }

    #[test]
    fn moves_round_trip_through_text() {
        for m in [Move::L, Move::N, Move::R] {
            assert_eq!(Move::parse(m.as_str()), Some(m));
        }
        assert_eq!(Move::parse("S"), None);
    }

    #[test]
    fn kinds_round_trip_through_text() {
        for k in [
            MachineKind::Ptm,
            MachineKind::Qptm,
            MachineKind::TwoPda,
            MachineKind::TwoPdaFull,
            MachineKind::Rnn,
        ] {
            assert_eq!(MachineKind::parse(k.as_str()), Some(k));
        }
        assert_eq!(MachineKind::parse("pda"), None);
    }
}
