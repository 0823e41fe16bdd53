//! Weighted two-stack pushdown automata.
//!
//! Two variants share one transition shape:
//!
//! * [`TwoPda`] keys transitions on (state, stack-1 top). Stack 2
//!   participates only through the optional `pop2` field, which acts as a
//!   *runtime guard*: a transition naming `pop2 = s` can fire only when `s`
//!   is the actual stack-2 top, and pops it. A guard that never matches
//!   blocks its transition and the run loses that mass.
//! * [`TwoPdaFull`] keys transitions on (state, stack-1 top, stack-2 top),
//!   so both pops are statically checked against the key and nothing blocks
//!   at runtime.
//!
//! Stack discipline: each stack holds the bottom marker `$` below a word of
//! stack symbols. The bottom marker is never created or destroyed — a
//! transition may *inspect* it with the paired idiom `pop = $, push = $`, and
//! every other use of `$` in a pop/push field is a violation. The stack
//! alphabet is the declared working set plus the bottom marker plus the tape
//! blank `_` (machines compiled from tape machines store blanks on stacks).
//!
//! Local normalization for the keyed-on-one-top variant is checked per
//! *stack-2 group*: for each key and each candidate stack-2 top `s`, the
//! transitions enabled when stack 2 shows `s` (those with `pop2` absent or
//! equal to `s`) must have weights summing to exactly one. Keys that use no
//! `pop2` guards reduce to the familiar per-key sum. A group with no enabled
//! transitions is reported as an advisory (the configuration would be stuck),
//! not a violation.

use std::collections::{BTreeMap, BTreeSet};

use num::{One, Signed, Zero};

use super::{
    check_declarations, unreachable_state_advisories, State, Sym, ValidationReport,
};
use crate::numerics::{rat_to_string, Rational};

/// One weighted stack transition. `None` in a pop/push field means the stack
/// is left untouched by that half of the operation; pops happen before
/// pushes on each stack.
#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord)]
pub struct PdaTrans {
    /// `None` emits nothing (the silent step).
    pub emit: Option<Sym>,
    pub next: State,
    /// Stack-1 pop; must equal the key's stack-1 top when present.
    pub pop1: Option<Sym>,
    pub push1: Option<Sym>,
    /// Stack-2 pop. For [`TwoPda`] this is a runtime guard on the stack-2
    /// top; for [`TwoPdaFull`] it must equal the key's stack-2 top.
    pub pop2: Option<Sym>,
    pub push2: Option<Sym>,
    pub weight: Rational,
}

impl PdaTrans {
    /// The pops and pushes as (stack number, pop, push) rows, for checks
    /// that treat both stacks alike.
    fn stack_ops(&self) -> [(u8, &Option<Sym>, &Option<Sym>); 2] {
        [(1, &self.pop1, &self.push1), (2, &self.pop2, &self.push2)]
    }
}

/// A weighted two-stack PDA keyed on (state, stack-1 top).
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct TwoPda {
    /// Output alphabet (user symbols only).
    pub sigma: BTreeSet<Sym>,
    /// Declared stack symbols; the bottom marker `$` and the blank `_` are
    /// implicit and always available.
    pub gamma: BTreeSet<Sym>,
    pub states: BTreeSet<State>,
    pub initial: State,
    /// The final state: entering it halts the run; it has no outgoing steps.
    pub halt: State,
    /// Per-key transition lists. Absent keys are stuck configurations.
    pub delta: BTreeMap<(State, Sym), Vec<PdaTrans>>,
}

/// A weighted two-stack PDA keyed on (state, stack-1 top, stack-2 top).
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct TwoPdaFull {
    pub sigma: BTreeSet<Sym>,
    pub gamma: BTreeSet<Sym>,
    pub states: BTreeSet<State>,
    pub initial: State,
    pub halt: State,
    pub delta: BTreeMap<(State, Sym, Sym), Vec<PdaTrans>>,
}

/// Shared per-transition checks: declared fields, bottom-marker discipline,
/// positive weight. `key_top2` is the key's stack-2 top for the fully keyed
/// variant, `None` for the guard variant.
fn check_trans(
    rep: &mut ValidationReport,
    here: &str,
    t: &PdaTrans,
    key_top1: &Sym,
    key_top2: Option<&Sym>,
    states: &BTreeSet<State>,
    sigma: &BTreeSet<Sym>,
    stack_syms: &BTreeSet<Sym>,
) {
    if !states.contains(&t.next) {
        rep.violation(format!("transition at {here}: unknown target state {}", t.next));
    }
    if let Some(y) = &t.emit {
        if !sigma.contains(y) {
            rep.violation(format!("transition at {here}: unknown output symbol {y}"));
        }
    }
    for (stack, pop, push) in t.stack_ops() {
        for (role, field) in [("pops", pop), ("pushes", push)] {
            if let Some(s) = field {
                if !stack_syms.contains(s) {
                    rep.violation(format!(
                        "transition at {here}: {role} unknown stack symbol {s} on stack {stack}"
                    ));
                }
            }
        }
        let pops_bottom = pop.as_ref().is_some_and(Sym::is_bottom);
        let pushes_bottom = push.as_ref().is_some_and(Sym::is_bottom);
        if pops_bottom && !pushes_bottom {
            rep.violation(format!(
                "transition at {here}: pops the bottom marker from stack {stack} without pushing it back"
            ));
        }
        if pushes_bottom && !pops_bottom {
            rep.violation(format!(
                "transition at {here}: pushes the bottom marker onto stack {stack} without having popped it"
            ));
        }
    }
    if let Some(p1) = &t.pop1 {
        if p1 != key_top1 {
            rep.violation(format!(
                "transition at {here}: pops {p1} from stack 1, which is not the key's top symbol"
            ));
        }
    }
    if let Some(expected) = key_top2 {
        if let Some(p2) = &t.pop2 {
            if p2 != expected {
                rep.violation(format!(
                    "transition at {here}: pops {p2} from stack 2, which is not the key's top symbol"
                ));
            }
        }
    }
    if !t.weight.is_positive() {
        rep.violation(format!(
            "transition at {here}: weight {} is not positive",
            rat_to_string(&t.weight)
        ));
    }
}

impl TwoPda {
    /// The full stack alphabet: declared symbols, the bottom marker, and the
    /// blank (present on stacks of machines compiled from tape machines).
    pub fn stack_symbols(&self) -> BTreeSet<Sym> {
        let mut s = self.gamma.clone();
        s.insert(Sym::bottom());
        s.insert(Sym::blank());
        s
    }

    /// At most one transition per key.
    pub fn is_deterministic(&self) -> bool {
        self.delta.values().all(|ts| ts.len() <= 1)
    }

    /// At most one transition per (key, emitted symbol): the emitted symbol
    /// resolves all randomness at a key.
    pub fn is_symbol_deterministic(&self) -> bool {
        self.delta.values().all(|ts| {
            let mut seen: BTreeSet<&Option<Sym>> = BTreeSet::new();
            ts.iter().all(|t| seen.insert(&t.emit))
        })
    }

    /// Every transition emits a symbol: no silent steps anywhere.
    pub fn is_real_time(&self) -> bool {
        self.delta.values().flatten().all(|t| t.emit.is_some())
    }

    /// Real-time and symbol-deterministic: one symbol out per step, and the
    /// emitted string determines the whole computation.
    pub fn is_rd(&self) -> bool {
        self.is_real_time() && self.is_symbol_deterministic()
    }

    fn edges(&self) -> Vec<(State, State)> {
        self.delta
            .iter()
            .flat_map(|((q, _), ts)| ts.iter().map(move |t| (q.clone(), t.next.clone())))
            .collect()
    }

    pub fn validate(&self) -> ValidationReport {
        let mut rep = ValidationReport::new();
        check_declarations(
            &mut rep,
            &self.states,
            &self.sigma,
            &self.gamma,
            &self.initial,
            &self.halt,
        );
        let stack_syms = self.stack_symbols();
        for ((q, top1), transitions) in &self.delta {
            let here = format!("({q}, {top1})");
            if q == &self.halt {
                rep.violation(format!("final state {q} has an outgoing transition"));
            }
            if !self.states.contains(q) {
                rep.violation(format!("transition key {here}: unknown state {q}"));
            }
            if !stack_syms.contains(top1) {
                rep.violation(format!("transition key {here}: unknown stack symbol {top1}"));
            }
            for t in transitions {
                check_trans(
                    &mut rep, &here, t, top1, None, &self.states, &self.sigma, &stack_syms,
                );
            }
            // Local normalization per stack-2 group.
            let uses_guards = transitions.iter().any(|t| t.pop2.is_some());
            if !uses_guards {
                let sum: Rational = transitions
                    .iter()
                    .map(|t| t.weight.clone())
                    .fold(Rational::zero(), |a, b| a + b);
                if !sum.is_one() {
                    rep.violation(format!(
                        "local normalization violated at {here}: sum {}",
                        rat_to_string(&sum)
                    ));
                }
            } else {
                for top2 in &stack_syms {
                    let group: Vec<&PdaTrans> = transitions
                        .iter()
                        .filter(|t| t.pop2.is_none() || t.pop2.as_ref() == Some(top2))
                        .collect();
                    if group.is_empty() {
                        rep.advisory(format!(
                            "possibly stuck at {here} when stack 2 shows {top2}: no transition applies"
                        ));
                        continue;
                    }
                    let sum: Rational = group
                        .iter()
                        .map(|t| t.weight.clone())
                        .fold(Rational::zero(), |a, b| a + b);
                    if !sum.is_one() {
                        rep.violation(format!(
                            "local normalization violated at {here} when stack 2 shows {top2}: sum {}",
                            rat_to_string(&sum)
                        ));
                    }
                }
            }
        }
        unreachable_state_advisories(&mut rep, &self.states, &self.initial, self.edges());
        rep
    }
}

impl TwoPdaFull {
    /// The full stack alphabet: declared symbols, the bottom marker, and the
    /// blank.
    pub fn stack_symbols(&self) -> BTreeSet<Sym> {
        let mut s = self.gamma.clone();
        s.insert(Sym::bottom());
        s.insert(Sym::blank());
        s
    }

    fn edges(&self) -> Vec<(State, State)> {
        self.delta
            .iter()
            .flat_map(|((q, _, _), ts)| ts.iter().map(move |t| (q.clone(), t.next.clone())))
            .collect()
    }

    pub fn validate(&self) -> ValidationReport {
        let mut rep = ValidationReport::new();
        check_declarations(
            &mut rep,
            &self.states,
            &self.sigma,
            &self.gamma,
            &self.initial,
            &self.halt,
        );
        let stack_syms = self.stack_symbols();
        for ((q, top1, top2), transitions) in &self.delta {
            let here = format!("({q}, {top1}, {top2})");
            if q == &self.halt {
                rep.violation(format!("final state {q} has an outgoing transition"));
            }
            if !self.states.contains(q) {
                rep.violation(format!("transition key {here}: unknown state {q}"));
            }
            for (which, top) in [("stack-1", top1), ("stack-2", top2)] {
                if !stack_syms.contains(top) {
                    rep.violation(format!(
                        "transition key {here}: unknown {which} symbol {top}"
                    ));
                }
            }
            let mut sum = Rational::zero();
            for t in transitions {
                check_trans(
                    &mut rep,
                    &here,
                    t,
                    top1,
                    Some(top2),
                    &self.states,
                    &self.sigma,
                    &stack_syms,
                );
                sum += &t.weight;
            }
            if !sum.is_one() {
                rep.violation(format!(
                    "local normalization violated at {here}: sum {}",
                    rat_to_string(&sum)
                ));
            }
        }
        unreachable_state_advisories(&mut rep, &self.states, &self.initial, self.edges());
        rep
    }
}
