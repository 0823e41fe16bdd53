//! Machine-to-machine compilation passes.
//!
//! Every pass returns the compiled machine together with a
//! [`PassReport`] stating what ran, how the machine grew, and how much
//! of the branching structure survived:
//!
//! * [`Grade::Strong`] — each source computation path maps to exactly
//!   one target path of equal weight and emitted string, so even
//!   path-multiset comparisons agree.
//! * [`Grade::Weak`] — the output distribution is preserved, but paths
//!   may have been merged, split, or reweighted along the way.

mod rnn;
mod stacks;
mod weights;

pub use rnn::compile_rnn;
pub use stacks::{expand_to_full, qptm_to_2pda, reduce_both_stack_dependence, twopda_to_qptm};
pub use weights::{binarize, dyadicize, ptm_to_qptm};

use std::collections::BTreeSet;

use crate::machines::{is_reserved_token, Machine, State, Sym};

/// How much structure a pass preserves.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Grade {
    /// Path-for-path: weight multisets per emitted string survive.
    Strong,
    /// Distribution only.
    Weak,
}

impl Grade {
    pub fn as_str(&self) -> &'static str {
        match self {
            Grade::Strong => "strong",
            Grade::Weak => "weak",
        }
    }
}

/// A machine's headline size: control states and transition rules.
/// For networks the two numbers are the hidden width and the count of
/// nonzero weights.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct KindSize {
    pub kind: &'static str,
    pub states: usize,
    pub rules: usize,
}

/// What a compilation pass did.
#[derive(Debug, Clone)]
pub struct PassReport {
    /// The pass identifier, as used on the command line.
    pub pass: &'static str,
    pub grade: Grade,
    pub input: KindSize,
    pub output: KindSize,
    /// Human-readable remarks: what was split, merged, or added.
    pub notes: Vec<String>,
}

/// Measures a machine for a [`PassReport`].
pub fn kind_size(m: &Machine) -> KindSize {
    match m {
        Machine::Ptm(p) => KindSize {
            kind: m.kind().as_str(),
            states: p.states.len(),
            rules: p.delta1.len() + p.delta2.len(),
        },
        Machine::Qptm(q) => KindSize {
            kind: m.kind().as_str(),
            states: q.states.len(),
            rules: q.delta.values().map(Vec::len).sum(),
        },
        Machine::TwoPda(p) => KindSize {
            kind: m.kind().as_str(),
            states: p.states.len(),
            rules: p.delta.values().map(Vec::len).sum(),
        },
        Machine::TwoPdaFull(p) => KindSize {
            kind: m.kind().as_str(),
            states: p.states.len(),
            rules: p.delta.values().map(Vec::len).sum(),
        },
        Machine::Rnn(r) => KindSize {
            kind: m.kind().as_str(),
            states: r.d,
            rules: r.u.iter().map(Vec::len).sum::<usize>()
                + r.v.iter().map(Vec::len).sum::<usize>()
                + r.e.values().map(Vec::len).sum::<usize>(),
        },
    }
}

/// Returns a state named `base` if that is free, otherwise `base.2`,
/// `base.3`, … — and records the chosen name as taken.
pub(crate) fn fresh_state(taken: &mut BTreeSet<State>, base: &str) -> State {
    let mut candidate = State::new(base.to_string());
    let mut i = 1usize;
    while taken.contains(&candidate) {
        i += 1;
        candidate = State::new(format!("{base}.{i}"));
    }
    taken.insert(candidate.clone());
    candidate
}

/// Cancels a pop/push pair that moves the same symbol: popping `a` and
/// pushing `a` back is the identity on that stack (the pair acts as a
/// top-of-stack inspection), so passes that realize stack effects treat
/// it as no effect at all.
pub(crate) fn strip(pop: &Option<Sym>, push: &Option<Sym>) -> (Option<Sym>, Option<Sym>) {
    match (pop, push) {
        (Some(a), Some(b)) if a == b => (None, None),
        _ => (pop.clone(), push.clone()),
    }
}

/// Like [`fresh_state`], for symbols. Also steps over reserved
/// spellings so the result always survives a serialize/parse round
/// trip.
pub(crate) fn fresh_sym(taken: &mut BTreeSet<Sym>, base: &str) -> Sym {
    let mut candidate = Sym::new(base.to_string());
    let mut i = 1usize;
    while taken.contains(&candidate) || is_reserved_token(candidate.as_str()) {
        i += 1;
        candidate = Sym::new(format!("{base}.{i}"));
    }
    taken.insert(candidate.clone());
    candidate
}
