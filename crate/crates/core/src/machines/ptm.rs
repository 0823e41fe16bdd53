//! Probabilistic Turing machines driven by a fair coin.
//!
//! A machine of this class owns one bi-infinite work tape and two *total*
//! transition functions `delta1` and `delta2` over (state, scanned symbol),
//! defined everywhere except at the final state. At every step a fair coin
//! picks which function fires; the chosen step rewrites the scanned cell,
//! optionally emits one output symbol, moves the head, and changes state.
//! Because each step is a literal coin flip, every halting computation path
//! has weight exactly 2^-(its length) — even where the two functions happen
//! to coincide, the two flips remain distinct paths.
//!
//! The machine defines a semimeasure over output strings: the probability
//! that a run halts with exactly that yield. Mass may be lost to divergence.

use std::collections::{BTreeMap, BTreeSet};

use super::{
    check_declarations, unreachable_state_advisories, Move, State, Sym, ValidationReport,
};

/// One outcome of a coin flip: rewrite, emit (or stay silent), move, jump.
#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord)]
pub struct PtmStep {
    pub next: State,
    pub write: Sym,
    /// `None` emits nothing (the silent step).
    pub emit: Option<Sym>,
    pub mv: Move,
}

/// A fair-coin probabilistic Turing machine.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Ptm {
    /// Output alphabet (user symbols only).
    pub sigma: BTreeSet<Sym>,
    /// Working tape symbols; the blank `_` is implicit and always available.
    pub gamma: BTreeSet<Sym>,
    pub states: BTreeSet<State>,
    pub initial: State,
    /// The final state: entering it halts the run; it has no outgoing steps.
    pub halt: State,
    /// Outcome when the coin shows its first face.
    pub delta1: BTreeMap<(State, Sym), PtmStep>,
    /// Outcome when the coin shows its second face.
    pub delta2: BTreeMap<(State, Sym), PtmStep>,
}

impl Ptm {
    /// The full tape alphabet: declared working symbols plus the blank.
    pub fn tape_symbols(&self) -> BTreeSet<Sym> {
        let mut t = self.gamma.clone();
        t.insert(Sym::blank());
        t
    }

    /// Both transition tables, labeled for diagnostics.
    pub fn tables(&self) -> [(&'static str, &BTreeMap<(State, Sym), PtmStep>); 2] {
        [("delta1", &self.delta1), ("delta2", &self.delta2)]
    }

    /// Every transition emits a symbol: no silent steps anywhere. Machines
    /// with this property emit exactly one symbol per step, so every yield of
    /// length n is produced by paths of length exactly n.
    pub fn is_real_time(&self) -> bool {
        self.delta1
            .values()
            .chain(self.delta2.values())
            .all(|s| s.emit.is_some())
    }

    /// At every key the two coin outcomes either coincide entirely or emit
    /// different symbols. Under this discipline the emitted string determines
    /// the configuration trajectory (coinciding outcomes still contribute two
    /// coin paths each, but identical ones).
    pub fn is_symbol_deterministic(&self) -> bool {
        self.delta1.iter().all(|(key, s1)| match self.delta2.get(key) {
            Some(s2) => s1 == s2 || s1.emit != s2.emit,
            None => true, // totality failures are validate's concern
        })
    }

    fn edges(&self) -> Vec<(State, State)> {
        self.delta1
            .iter()
            .chain(self.delta2.iter())
            .map(|((q, _), step)| (q.clone(), step.next.clone()))
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
        for (name, table) in self.tables() {
            for ((q, g), step) in table {
                let here = format!("{name} at ({q}, {g})");
                if q == &self.halt {
                    rep.violation(format!(
                        "final state {q} has an outgoing transition in {name}"
                    ));
                }
                if !self.states.contains(q) {
                    rep.violation(format!("{here}: unknown state {q}"));
                }
                if !tape.contains(g) {
                    rep.violation(format!("{here}: unknown tape symbol {g}"));
                }
                if !self.states.contains(&step.next) {
                    rep.violation(format!("{here}: unknown target state {}", step.next));
                }
                if !tape.contains(&step.write) {
                    rep.violation(format!("{here}: unknown written symbol {}", step.write));
                }
                if let Some(y) = &step.emit {
                    if !self.sigma.contains(y) {
                        rep.violation(format!("{here}: unknown output symbol {y}"));
                    }
                }
            }
            for q in &self.states {
                if q == &self.halt {
                    continue;
                }
                for g in &tape {
                    if !table.contains_key(&(q.clone(), g.clone())) {
                        rep.violation(format!(
                            "{name} is not total: missing transition at ({q}, {g})"
                        ));
                    }
                }
            }
        }
        unreachable_state_advisories(&mut rep, &self.states, &self.initial, self.edges());
        rep
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::machines::Machine;

    fn st(s: &str) -> State {
        State::new(s)
    }
    fn sy(s: &str) -> Sym {
        Sym::new(s)
    }
    fn step(next: &str, write: &str, emit: Option<&str>, mv: Move) -> PtmStep {
        PtmStep {
            next: st(next),
            write: if write == "_" { Sym::blank() } else { sy(write) },
            emit: emit.map(sy),
            mv,
        }
    }

    /// One flip: emit `a` or `b`, then halt.
    fn coin_machine() -> Ptm {
        let mut delta1 = BTreeMap::new();
        let mut delta2 = BTreeMap::new();
        delta1.insert((st("q0"), Sym::blank()), step("qf", "_", Some("a"), Move::N));
        delta2.insert((st("q0"), Sym::blank()), step("qf", "_", Some("b"), Move::N));
        Ptm {
            sigma: [sy("a"), sy("b")].into(),
            gamma: BTreeSet::new(),
            states: [st("q0"), st("qf")].into(),
            initial: st("q0"),
            halt: st("qf"),
            delta1,
            delta2,
        }
    }

    // ---------------------------------------------------------------
    // Validation
    // ---------------------------------------------------------------

    #[test]
    fn coin_machine_is_well_formed() {
        let rep = coin_machine().validate();
        assert!(rep.is_ok(), "violations: {:?}", rep.violations);
        assert!(rep.advisories.is_empty(), "advisories: {:?}", rep.advisories);
    }

    #[test]
    fn missing_key_breaks_totality() {
        let mut m = coin_machine();
        m.delta2.clear();
        let rep = m.validate();
        assert!(rep
            .violations
            .iter()
            .any(|v| v.contains("delta2 is not total") && v.contains("(q0, _)")));
    }

    #[test]
    fn final_state_may_not_have_outgoing_transitions() {
        let mut m = coin_machine();
        m.delta1
            .insert((st("qf"), Sym::blank()), step("qf", "_", None, Move::N));
        let rep = m.validate();
        assert!(rep
            .violations
            .iter()
            .any(|v| v.contains("final state qf has an outgoing transition")));
    }

    #[test]
    fn undeclared_symbols_are_violations() {
        let mut m = coin_machine();
        m.delta1
            .insert((st("q0"), Sym::blank()), step("qf", "X", Some("a"), Move::N));
        let rep = m.validate();
        assert!(rep.violations.iter().any(|v| v.contains("unknown written symbol X")));
    }

    #[test]
    fn reserved_tokens_may_not_be_declared() {
        let mut m = coin_machine();
        m.sigma.insert(sy("eps"));
        let rep = m.validate();
        assert!(rep.violations.iter().any(|v| v.contains("reserved token")));
    }

    #[test]
    fn unreachable_state_is_an_advisory_not_a_violation() {
        let mut m = coin_machine();
        m.states.insert(st("q_lost"));
        // keep totality for the new state
        m.delta1
            .insert((st("q_lost"), Sym::blank()), step("qf", "_", None, Move::N));
        m.delta2
            .insert((st("q_lost"), Sym::blank()), step("qf", "_", None, Move::N));
        let rep = m.validate();
        assert!(rep.is_ok(), "violations: {:?}", rep.violations);
        assert!(rep
            .advisories
            .iter()
            .any(|a| a.contains("q_lost") && a.contains("unreachable")));
    }

    // ---------------------------------------------------------------
    // Predicates
    // ---------------------------------------------------------------

    #[test]
    fn coin_machine_is_real_time_and_symbol_deterministic() {
        let m = coin_machine();
        assert!(m.is_real_time());
        assert!(m.is_symbol_deterministic());
    }

    #[test]
    fn silent_step_breaks_real_time() {
        let mut m = coin_machine();
        m.delta1
            .insert((st("q0"), Sym::blank()), step("qf", "_", None, Move::N));
        assert!(!m.is_real_time());
    }

    #[test]
    fn coinciding_outcomes_stay_symbol_deterministic() {
        let mut m = coin_machine();
        let same = step("qf", "_", Some("a"), Move::N);
        m.delta1.insert((st("q0"), Sym::blank()), same.clone());
        m.delta2.insert((st("q0"), Sym::blank()), same);
        assert!(m.is_symbol_deterministic());
    }

    #[test]
    fn same_emission_different_targets_is_not_symbol_deterministic() {
        let mut m = coin_machine();
        m.states.insert(st("q1"));
        m.delta1
            .insert((st("q1"), Sym::blank()), step("qf", "_", Some("a"), Move::N));
        m.delta2
            .insert((st("q1"), Sym::blank()), step("qf", "_", Some("a"), Move::N));
        m.delta2
            .insert((st("q0"), Sym::blank()), step("q1", "_", Some("a"), Move::N));
        assert!(!m.is_symbol_deterministic());
    }

    #[test]
    fn machine_enum_dispatches_validation() {
        let m = Machine::Ptm(coin_machine());
        assert!(m.validate().is_ok());
        assert_eq!(m.kind().as_str(), "ptm");
    }
}
