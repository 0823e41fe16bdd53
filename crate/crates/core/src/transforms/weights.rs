//! Passes that reshape transition weights without touching the
//! storage model: coin machines to weighted machines, wide choices to
//! binary ones, and arbitrary rational choices to fair coin flips.

use std::collections::{BTreeMap, BTreeSet};

use num::{BigInt, One, Zero};

use crate::error::TransformError;
use crate::machines::ptm::{Ptm, PtmStep};
use crate::machines::qptm::{Qptm, QptmTrans};
use crate::machines::{Machine, Move, State, Sym};
use crate::numerics::Rational;

use super::{fresh_state, kind_size, Grade, KindSize, PassReport};

fn step_to_trans(s: &PtmStep, weight: Rational) -> QptmTrans {
    QptmTrans {
        emit: s.emit.clone(),
        next: s.next.clone(),
        write: s.write.clone(),
        mv: s.mv,
        weight,
    }
}

fn trans_to_step(t: &QptmTrans) -> PtmStep {
    PtmStep {
        next: t.next.clone(),
        write: t.write.clone(),
        emit: t.emit.clone(),
        mv: t.mv,
    }
}

/// Re-expresses a fair-coin machine as a weighted machine.  Each key's
/// two coin branches become two transitions of weight one half — or a
/// single transition of weight one when both branches do the same
/// thing.
///
/// Merging is what costs the strong grade: a merged key turns two
/// half-weight paths into one unit path, which preserves the output
/// distribution but not the path multiset.
pub fn ptm_to_qptm(m: &Ptm) -> (Qptm, PassReport) {
    let mut delta: BTreeMap<(State, Sym), Vec<QptmTrans>> = BTreeMap::new();
    let mut merged = 0usize;
    let half = Rational::new(1.into(), 2.into());
    for (key, s1) in &m.delta1 {
        let s2 = &m.delta2[key];
        let mut ts = if s1 == s2 {
            merged += 1;
            vec![step_to_trans(s1, Rational::one())]
        } else {
            vec![
                step_to_trans(s1, half.clone()),
                step_to_trans(s2, half.clone()),
            ]
        };
        ts.sort();
        delta.insert(key.clone(), ts);
    }
    let out = Qptm {
        sigma: m.sigma.clone(),
        gamma: m.gamma.clone(),
        states: m.states.clone(),
        initial: m.initial.clone(),
        halt: m.halt.clone(),
        delta,
    };
    let grade = if merged == 0 { Grade::Strong } else { Grade::Weak };
    let mut notes = Vec::new();
    if merged > 0 {
        notes.push(format!(
            "{merged} key(s) had identical coin branches and were merged to weight one"
        ));
    }
    let report = PassReport {
        pass: "ptm-to-qptm",
        grade,
        input: kind_size(&Machine::Ptm(m.clone())),
        output: kind_size(&Machine::Qptm(out.clone())),
        notes,
    };
    (out, report)
}

/// Narrows every key to at most two transitions.  A key with fan
/// `k > 2` becomes a cascade: the first transition keeps its weight,
/// the rest move behind a silent re-reading step of the remaining
/// mass, with their weights rescaled so each new key sums to one.
///
/// The pass is strong: each source transition is reachable by exactly
/// one cascade route whose weight product equals the original weight.
pub fn binarize(m: &Qptm) -> (Qptm, PassReport) {
    let mut taken: BTreeSet<State> = m.states.clone();
    let mut delta: BTreeMap<(State, Sym), Vec<QptmTrans>> = BTreeMap::new();
    let mut split_keys = 0usize;
    let mut max_fan_before = 0usize;
    for ((q, g), ts) in &m.delta {
        max_fan_before = max_fan_before.max(ts.len());
        if ts.len() <= 2 {
            delta.insert((q.clone(), g.clone()), ts.clone());
            continue;
        }
        split_keys += 1;
        let mut current = q.clone();
        let mut rest = Rational::one();
        for (i, t) in ts.iter().enumerate() {
            if i == ts.len() - 2 {
                // The last two transitions share the final cascade key.
                let mut pair = vec![
                    QptmTrans {
                        weight: t.weight.clone() / rest.clone(),
                        ..t.clone()
                    },
                    QptmTrans {
                        weight: ts[i + 1].weight.clone() / rest.clone(),
                        ..ts[i + 1].clone()
                    },
                ];
                pair.sort();
                delta.insert((current.clone(), g.clone()), pair);
                break;
            }
            let next_state = fresh_state(&mut taken, &format!("{q}.{g}.b{}", i + 1));
            let keep = t.weight.clone() / rest.clone();
            let mut pair = vec![
                QptmTrans {
                    weight: keep.clone(),
                    ..t.clone()
                },
                QptmTrans {
                    emit: None,
                    next: next_state.clone(),
                    write: g.clone(),
                    mv: Move::N,
                    weight: Rational::one() - keep,
                },
            ];
            pair.sort();
            delta.insert((current.clone(), g.clone()), pair);
            rest -= t.weight.clone();
            current = next_state;
        }
    }
    let out = Qptm {
        sigma: m.sigma.clone(),
        gamma: m.gamma.clone(),
        states: taken,
        initial: m.initial.clone(),
        halt: m.halt.clone(),
        delta,
    };
    let mut notes = Vec::new();
    if split_keys > 0 {
        notes.push(format!(
            "split {split_keys} key(s); widest fan was {max_fan_before}, output fan is at most 2"
        ));
    } else {
        notes.push("every key already had fan at most 2".to_string());
    }
    let report = PassReport {
        pass: "binarize",
        grade: Grade::Strong,
        input: kind_size(&Machine::Qptm(m.clone())),
        output: kind_size(&Machine::Qptm(out.clone())),
        notes,
    };
    (out, report)
}

/// The binary expansion of a proper fraction, with its eventual cycle.
struct Expansion {
    /// Bits of the expansion, most significant first.
    bits: Vec<bool>,
    /// After consuming the last bit: `None` means the tail is zero;
    /// `Some(j)` means the expansion continues at 1-based bit `j`.
    continue_at: Option<usize>,
}

fn binary_expansion(p: &Rational) -> Expansion {
    let den = p.denom().clone();
    let mut remainders: Vec<BigInt> = vec![p.numer().clone()];
    let mut bits = Vec::new();
    loop {
        let doubled: BigInt = remainders.last().unwrap() * 2;
        let (bit, rem) = if doubled >= den {
            (true, doubled - &den)
        } else {
            (false, doubled)
        };
        bits.push(bit);
        if rem.is_zero() {
            return Expansion {
                bits,
                continue_at: None,
            };
        }
        if let Some(j) = remainders.iter().position(|r| *r == rem) {
            return Expansion {
                bits,
                continue_at: Some(j + 1),
            };
        }
        remainders.push(rem);
    }
}

/// Compiles a weighted machine with fan at most two into a fair-coin
/// machine.  Each weighted choice becomes a chain of coin flips that
/// walks the binary expansion of the first transition's weight: at bit
/// `b`, a coin below `b` commits to the first transition, a coin above
/// `b` to the second, and an equal coin moves to the next bit.
/// Periodic expansions loop their chain back, so non-dyadic weights
/// cost unbounded flips but only finitely many states.  Chain states
/// re-read the same cell silently, and keys the machine lacks are
/// totalized with silent self-loops to meet the coin machine's
/// totality obligation.
pub fn dyadicize(m: &Qptm) -> Result<(Ptm, PassReport), TransformError> {
    for ((q, g), ts) in &m.delta {
        if ts.len() > 2 {
            return Err(TransformError::Precondition {
                pass: "dyadicize",
                message: format!(
                    "key ({q}, {g}) has {} transitions; binarize first",
                    ts.len()
                ),
            });
        }
    }
    let mut taken: BTreeSet<State> = m.states.clone();
    let mut delta1: BTreeMap<(State, Sym), PtmStep> = BTreeMap::new();
    let mut delta2: BTreeMap<(State, Sym), PtmStep> = BTreeMap::new();
    let tape_syms = m.tape_symbols();
    let mut chain_states = 0usize;
    let mut totalized = 0usize;
    // Keys at fresh chain states, filled in after the main loop so the
    // fresh states are all known before totalization.
    let mut gadgets: Vec<(Vec<State>, Sym, Expansion, PtmStep, PtmStep)> = Vec::new();
    for q in &m.states {
        if *q == m.halt {
            continue;
        }
        for g in &tape_syms {
            let stay = PtmStep {
                next: q.clone(),
                write: g.clone(),
                emit: None,
                mv: Move::N,
            };
            match m.delta.get(&(q.clone(), g.clone())) {
                None => {
                    // Stuck key: totalize with a silent self-loop,
                    // which like being stuck never reaches halting.
                    totalized += 1;
                    delta1.insert((q.clone(), g.clone()), stay.clone());
                    delta2.insert((q.clone(), g.clone()), stay);
                }
                Some(ts) if ts.len() == 1 => {
                    let step = trans_to_step(&ts[0]);
                    delta1.insert((q.clone(), g.clone()), step.clone());
                    delta2.insert((q.clone(), g.clone()), step);
                }
                Some(ts) => {
                    let exp = binary_expansion(&ts[0].weight);
                    let mut chain = vec![q.clone()];
                    for i in 2..=exp.bits.len() {
                        chain.push(fresh_state(&mut taken, &format!("{q}.{g}.c{i}")));
                    }
                    chain_states += chain.len() - 1;
                    gadgets.push((
                        chain,
                        g.clone(),
                        exp,
                        trans_to_step(&ts[0]),
                        trans_to_step(&ts[1]),
                    ));
                }
            }
        }
    }
    for (chain, g, exp, first, second) in &gadgets {
        let n = chain.len();
        for (k, state) in chain.iter().enumerate() {
            let bit = exp.bits[k];
            let continue_step = if k + 1 < n {
                PtmStep {
                    next: chain[k + 1].clone(),
                    write: g.clone(),
                    emit: None,
                    mv: Move::N,
                }
            } else {
                match exp.continue_at {
                    // Zero tail: every later coin leaves through the
                    // second transition, so leave now.
                    None => second.clone(),
                    Some(j) => PtmStep {
                        next: chain[j - 1].clone(),
                        write: g.clone(),
                        emit: None,
                        mv: Move::N,
                    },
                }
            };
            let (b1, b2) = if bit {
                // Coin 0 < bit: commit to the first transition.
                (first.clone(), continue_step)
            } else {
                // Coin 1 > bit: commit to the second transition.
                (continue_step, second.clone())
            };
            delta1.insert((state.clone(), g.clone()), b1);
            delta2.insert((state.clone(), g.clone()), b2);
        }
    }
    // Chain states only ever read their own cell symbol; totalize
    // their other keys with silent self-loops.
    for (chain, g, ..) in &gadgets {
        for state in chain.iter().skip(1) {
            for other in &tape_syms {
                if other == g {
                    continue;
                }
                let stay = PtmStep {
                    next: state.clone(),
                    write: other.clone(),
                    emit: None,
                    mv: Move::N,
                };
                delta1.insert((state.clone(), other.clone()), stay.clone());
                delta2.insert((state.clone(), other.clone()), stay);
            }
        }
    }
    let out = Ptm {
        sigma: m.sigma.clone(),
        gamma: m.gamma.clone(),
        states: taken,
        initial: m.initial.clone(),
        halt: m.halt.clone(),
        delta1,
        delta2,
    };
    let mut notes = Vec::new();
    if chain_states > 0 {
        notes.push(format!("added {chain_states} coin-chain state(s)"));
    }
    if totalized > 0 {
        notes.push(format!(
            "totalized {totalized} stuck key(s) with silent self-loops"
        ));
    }
    let report = PassReport {
        pass: "dyadicize",
        grade: Grade::Weak,
        input: kind_size(&Machine::Qptm(m.clone())),
        output: KindSize {
            kind: "ptm",
            states: out.states.len(),
            rules: out.delta1.len() + out.delta2.len(),
        },
        notes,
    };
    Ok((out, report))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::equivalence::{
        check_ptm_path_law, check_statistical, check_strong_multiset, check_weak, Verdict,
    };
    use crate::format::parse_machine;
    use crate::numerics::{is_dyadic, rat};
    use crate::simulate::{semimeasure, DEFAULT_NODE_BUDGET};

    fn fixture(name: &str) -> Machine {
        let path = format!(
            "{}/../../fixtures/{name}.machine",
            env!("CARGO_MANIFEST_DIR")
        );
        let text = std::fs::read_to_string(&path).unwrap();
        parse_machine(&text).unwrap()
    }

    fn as_ptm(m: &Machine) -> &Ptm {
        match m {
            Machine::Ptm(p) => p,
            _ => panic!("expected a coin machine"),
        }
    }

    fn as_qptm(m: &Machine) -> &Qptm {
        match m {
            Machine::Qptm(q) => q,
            _ => panic!("expected a weighted machine"),
        }
    }

    fn syms(s: &str) -> Vec<Sym> {
        s.chars().map(|c| Sym::new(c.to_string())).collect()
    }

    #[test]
    fn coin_machine_with_distinct_branches_lifts_strongly() {
        let m = fixture("m_coin");
        let (q, report) = ptm_to_qptm(as_ptm(&m));
        assert!(q.validate().is_ok());
        assert_eq!(report.grade, Grade::Strong);
        let out = Machine::Qptm(q);
        let weak = check_weak(&m, &out, 2, 4, DEFAULT_NODE_BUDGET).unwrap();
        assert_eq!(weak.verdict, Verdict::Equal);
        let strong = check_strong_multiset(&m, &out, 2, 4, 4, DEFAULT_NODE_BUDGET).unwrap();
        assert_eq!(strong.verdict, Verdict::Equal);
    }

    #[test]
    fn merged_coin_branches_cost_the_strong_grade_but_not_the_distribution() {
        let m = fixture("m_ptm2");
        let (q, report) = ptm_to_qptm(as_ptm(&m));
        assert!(q.validate().is_ok());
        // The unreachable filler keys have identical branches, so the
        // pass records a merge even though no reachable path changes.
        assert_eq!(report.grade, Grade::Weak);
        let out = Machine::Qptm(q);
        let weak = check_weak(&m, &out, 3, 6, DEFAULT_NODE_BUDGET).unwrap();
        assert_eq!(weak.verdict, Verdict::Equal);
        // Since only unreachable keys merged, path multisets survive.
        let strong = check_strong_multiset(&m, &out, 3, 6, 6, DEFAULT_NODE_BUDGET).unwrap();
        assert_eq!(strong.verdict, Verdict::Equal);
    }

    #[test]
    fn binarize_narrows_a_fan_of_five_to_two() {
        let m = fixture("m_fan");
        let before = as_qptm(&m);
        assert_eq!(before.delta.values().map(Vec::len).max(), Some(5));
        let (out, report) = binarize(before);
        assert!(out.validate().is_ok());
        assert_eq!(report.grade, Grade::Strong);
        assert!(out.delta.values().all(|ts| ts.len() <= 2));
        let out = Machine::Qptm(out);
        let weak = check_weak(&m, &out, 4, 20, DEFAULT_NODE_BUDGET).unwrap();
        assert_eq!(weak.verdict, Verdict::Equal);
        // Every emitted string of length up to three is fully
        // resolved on both sides and the path weights agree one for
        // one: the cascade multiplies back to the original weight.
        let strong =
            check_strong_multiset(&m, &out, 3, 8, 32, DEFAULT_NODE_BUDGET).unwrap();
        assert_eq!(strong.verdict, Verdict::Equal);
        assert!(strong
            .rows
            .iter()
            .any(|r| r.complete && r.emitted == syms("a")));
    }

    #[test]
    fn binarize_leaves_narrow_machines_alone() {
        let m = fixture("m_third");
        let q = as_qptm(&m);
        let (out, _) = binarize(q);
        assert_eq!(&out, q);
    }

    #[test]
    fn binarize_renames_around_a_colliding_state_name() {
        // The state name the cascade would pick is already taken.
        let m = parse_machine(
            "\
version 1
kind qptm
sigma a b c
gamma G
states q0 q0._.b1 qf
initial q0
final qf
t q0 _ a qf _ N 1/2
t q0 _ b qf _ N 1/4
t q0 _ c qf _ N 1/4
t q0._.b1 _ a qf _ N 1
",
        )
        .unwrap();
        let (out, _) = binarize(as_qptm(&m));
        assert!(out.validate().is_ok());
        // Three original states plus one fresh cascade state.
        assert_eq!(out.states.len(), 4);
        let weak =
            check_weak(&m, &Machine::Qptm(out), 2, 8, DEFAULT_NODE_BUDGET).unwrap();
        assert_eq!(weak.verdict, Verdict::Equal);
    }

    #[test]
    fn dyadicize_walks_the_binary_expansion_of_one_third() {
        // One shot: a with weight 1/3, b with 2/3, halt either way.
        let m = parse_machine(
            "\
version 1
kind qptm
sigma a b
gamma G
states q0 qf
initial q0
final qf
t q0 _ a qf _ N 1/3
t q0 _ b qf _ N 2/3
",
        )
        .unwrap();
        let (out, report) = dyadicize(as_qptm(&m)).unwrap();
        assert!(out.validate().is_ok());
        assert_eq!(report.grade, Grade::Weak);
        let out = Machine::Ptm(out);
        // The first-branch mass climbs along the expansion of 1/3.
        for (steps, expected) in [(2, rat(1, 4)), (4, rat(5, 16)), (8, rat(85, 256))] {
            let t = semimeasure(&out, 1, steps, DEFAULT_NODE_BUDGET).unwrap();
            assert_eq!(t.mass_of(&syms("a")), expected, "at {steps} steps");
        }
        // Monotone, and within 2^-20 of 1/3 by depth forty.
        let mut last = rat(0, 1);
        for steps in [2, 4, 8, 16, 40] {
            let t = semimeasure(&out, 1, steps, DEFAULT_NODE_BUDGET).unwrap();
            let mass = t.mass_of(&syms("a"));
            assert!(mass >= last);
            last = mass;
        }
        let gap = rat(1, 3) - last;
        assert!(gap > rat(0, 1));
        assert!(gap <= Rational::new(1.into(), BigInt::one() << 20));
        // The result is a lawful coin machine: every halting path
        // weighs two to the minus its length.
        let law = check_ptm_path_law(&out, 2, 12, DEFAULT_NODE_BUDGET).unwrap();
        assert!(law.ok);
        assert!(law.all_dyadic);
    }

    #[test]
    fn dyadicize_handles_dyadic_weights_with_finite_chains() {
        let m = parse_machine(
            "\
version 1
kind qptm
sigma a b
gamma G
states q0 qf
initial q0
final qf
t q0 _ a qf _ N 3/8
t q0 _ b qf _ N 5/8
",
        )
        .unwrap();
        let (out, _) = dyadicize(as_qptm(&m)).unwrap();
        assert!(out.validate().is_ok());
        let out = Machine::Ptm(out);
        // 3/8 = 0.011: three flips resolve everything exactly.
        let t = semimeasure(&out, 1, 3, DEFAULT_NODE_BUDGET).unwrap();
        assert_eq!(t.mass_of(&syms("a")), rat(3, 8));
        assert_eq!(t.mass_of(&syms("b")), rat(5, 8));
        assert!(t.is_exact(&syms("a")));
    }

    #[test]
    fn dyadicize_preserves_the_whole_machine_distribution() {
        let m = fixture("m_third");
        let (out, _) = dyadicize(as_qptm(&m)).unwrap();
        assert!(out.validate().is_ok());
        let out = Machine::Ptm(out);
        let weak = check_weak(&m, &out, 2, 40, DEFAULT_NODE_BUDGET).unwrap();
        assert_eq!(weak.verdict, Verdict::Equal);
        // Bounded masses of a coin machine are always dyadic, even
        // though the source machine's masses are thirds.
        let t = semimeasure(&out, 2, 30, DEFAULT_NODE_BUDGET).unwrap();
        for row in &t.rows {
            assert!(is_dyadic(&row.mass));
        }
        assert!(t.mass_of(&syms("b")) > rat(3, 5));
    }

    #[test]
    fn dyadicize_rejects_wide_keys_and_accepts_them_after_binarize() {
        let m = fixture("m_fan");
        let q = as_qptm(&m);
        let err = dyadicize(q).unwrap_err();
        match err {
            TransformError::Precondition { pass, message } => {
                assert_eq!(pass, "dyadicize");
                assert!(message.contains("binarize"), "{message}");
            }
            other => panic!("unexpected error: {other}"),
        }
        let (narrow, _) = binarize(q);
        let (coins, _) = dyadicize(&narrow).unwrap();
        assert!(coins.validate().is_ok());
        // The chained result matches the source statistically: exact
        // bounded comparison is vacuous here because the coin chains
        // for non-dyadic weights keep silent live paths at any bound.
        let coins = Machine::Ptm(coins);
        let stat =
            check_statistical(&m, &coins, 11, 2000, 400, &rat(5, 100)).unwrap();
        assert_eq!(stat.verdict, Verdict::Equal);
    }

    #[test]
    fn dyadicize_totalizes_stuck_keys_without_creating_mass() {
        // A key the machine lacks: (q1, _) is reachable but silent.
        let m = parse_machine(
            "\
version 1
kind qptm
sigma a
gamma G
states q0 q1 qf
initial q0
final qf
t q0 _ a qf _ N 1/2
t q0 _ eps q1 _ N 1/2
",
        )
        .unwrap();
        let (out, report) = dyadicize(as_qptm(&m)).unwrap();
        assert!(out.validate().is_ok());
        assert!(report.notes.iter().any(|n| n.contains("totalized")));
        let out = Machine::Ptm(out);
        let t = semimeasure(&out, 1, 20, DEFAULT_NODE_BUDGET).unwrap();
        assert_eq!(t.mass_of(&syms("a")), rat(1, 2));
        assert_eq!(t.total_mass(), rat(1, 2));
    }
}
