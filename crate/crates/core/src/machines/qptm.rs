//! Rationally weighted probabilistic Turing machines.
//!
//! The generalization of the fair-coin machine: each (state, scanned symbol)
//! key owns a finite list of transitions with positive rational weights that
//! must sum to exactly one (*local normalization*). A key with no transitions
//! is *stuck* — runs reaching it never halt and contribute no semimeasure
//! mass, which is legal but usually unintended.
//!
//! Weight-zero transitions are not representable: they are removed when a
//! machine is read from text, and direct construction of one is a violation.

use std::collections::{BTreeMap, BTreeSet};

use num::{One, Signed, Zero};

use super::{
    check_declarations, unreachable_state_advisories, Move, State, Sym, ValidationReport,
};
use crate::numerics::{rat_to_string, Rational};

/// One weighted transition: emit (or stay silent), rewrite, move, jump.
#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord)]
pub struct QptmTrans {
    /// `None` emits nothing (the silent step).
    pub emit: Option<Sym>,
    pub next: State,
    pub write: Sym,
    pub mv: Move,
    pub weight: Rational,
}

/// A rationally weighted probabilistic Turing machine.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Qptm {
    /// Output alphabet (user symbols only).
    pub sigma: BTreeSet<Sym>,
    /// Working tape symbols; the blank `_` is implicit and always available.
    pub gamma: BTreeSet<Sym>,
    pub states: BTreeSet<State>,
    pub initial: State,
    /// The final state: entering it halts the run; it has no outgoing steps.
    pub halt: State,
    /// Per-key transition lists. Absent keys are stuck configurations.
    pub delta: BTreeMap<(State, Sym), Vec<QptmTrans>>,
}

impl Qptm {
    /// The full tape alphabet: declared working symbols plus the blank.
    pub fn tape_symbols(&self) -> BTreeSet<Sym> {
        let mut t = self.gamma.clone();
        t.insert(Sym::blank());
        t
    }

    /// At most one transition per key (its weight is then forced to one).
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
        self.delta
            .values()
            .flatten()
            .all(|t| t.emit.is_some())
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
        let tape = self.tape_symbols();
        for ((q, g), transitions) in &self.delta {
            let here = format!("({q}, {g})");
            if q == &self.halt {
                rep.violation(format!("final state {q} has an outgoing transition"));
            }
            if !self.states.contains(q) {
                rep.violation(format!("transition key {here}: unknown state {q}"));
            }
            if !tape.contains(g) {
                rep.violation(format!("transition key {here}: unknown tape symbol {g}"));
            }
            let mut sum = Rational::zero();
            for t in transitions {
                if !self.states.contains(&t.next) {
                    rep.violation(format!("transition at {here}: unknown target state {}", t.next));
                }
                if !tape.contains(&t.write) {
                    rep.violation(format!(
                        "transition at {here}: unknown written symbol {}",
                        t.write
                    ));
                }
                if let Some(y) = &t.emit {
                    if !self.sigma.contains(y) {
                        rep.violation(format!("transition at {here}: unknown output symbol {y}"));
                    }
                }
                if !t.weight.is_positive() {
                    rep.violation(format!(
                        "transition at {here}: weight {} is not positive",
                        rat_to_string(&t.weight)
                    ));
                }
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

#[cfg(test)]
mod tests {
    use super::*;
    use crate::numerics::rat;

    fn st(s: &str) -> State {
        State::new(s)
    }
    fn sy(s: &str) -> Sym {
        Sym::new(s)
    }

    /// Emits `a` with weight 1/3 and loops, or `b` with weight 2/3 and halts.
    fn third_machine() -> Qptm {
        let key = (st("q0"), Sym::blank());
        let transitions = vec![
            QptmTrans {
                emit: Some(sy("a")),
                next: st("q0"),
                write: Sym::blank(),
                mv: Move::N,
                weight: rat(1, 3),
            },
            QptmTrans {
                emit: Some(sy("b")),
                next: st("qf"),
                write: Sym::blank(),
                mv: Move::N,
                weight: rat(2, 3),
            },
        ];
        Qptm {
            sigma: [sy("a"), sy("b")].into(),
            gamma: BTreeSet::new(),
            states: [st("q0"), st("qf")].into(),
            initial: st("q0"),
            halt: st("qf"),
            delta: BTreeMap::from([(key, transitions)]),
        }
    }

    // ---------------------------------------------------------------
    // Validation
    // ---------------------------------------------------------------

    #[test]
    fn third_machine_is_well_formed() {
        let rep = third_machine().validate();
        assert!(rep.is_ok(), "violations: {:?}", rep.violations);
        assert!(rep.advisories.is_empty());
    }

    #[test]
    fn tampered_weight_breaks_local_normalization() {
        let mut m = third_machine();
        m.delta.values_mut().next().unwrap()[1].weight = rat(1, 2);
        let rep = m.validate();
        assert!(
            rep.violations
                .iter()
                .any(|v| v == "local normalization violated at (q0, _): sum 5/6"),
            "violations: {:?}",
            rep.violations
        );
    }

    #[test]
    fn zero_and_negative_weights_are_violations() {
        let mut m = third_machine();
        m.delta.values_mut().next().unwrap()[0].weight = rat(0, 1);
        let rep = m.validate();
        assert!(rep
            .violations
            .iter()
            .any(|v| v.contains("weight 0 is not positive")));
    }

    #[test]
    fn stuck_keys_are_silent_but_absent_states_are_not() {
        let mut m = third_machine();
        // A transition into an undeclared state.
        m.delta.values_mut().next().unwrap()[0].next = st("q9");
        let rep = m.validate();
        assert!(rep.violations.iter().any(|v| v.contains("unknown target state q9")));
    }

    #[test]
    fn final_state_outgoing_is_a_violation() {
        let mut m = third_machine();
        m.delta.insert(
            (st("qf"), Sym::blank()),
            vec![QptmTrans {
                emit: None,
                next: st("qf"),
                write: Sym::blank(),
                mv: Move::N,
                weight: rat(1, 1),
            }],
        );
        let rep = m.validate();
        assert!(rep
            .violations
            .iter()
            .any(|v| v.contains("final state qf has an outgoing transition")));
    }

    // ---------------------------------------------------------------
    // Predicates
    // ---------------------------------------------------------------

    #[test]
    fn third_machine_predicates() {
        let m = third_machine();
        assert!(!m.is_deterministic());
        assert!(m.is_symbol_deterministic());
        assert!(m.is_real_time());
    }

    #[test]
    fn repeated_emission_at_a_key_is_not_symbol_deterministic() {
        let mut m = third_machine();
        m.delta.values_mut().next().unwrap()[1].emit = Some(sy("a"));
        assert!(!m.is_symbol_deterministic());
    }

    #[test]
    fn silent_transition_breaks_real_time() {
        let mut m = third_machine();
        m.delta.values_mut().next().unwrap()[0].emit = None;
        assert!(!m.is_real_time());
    }
}
