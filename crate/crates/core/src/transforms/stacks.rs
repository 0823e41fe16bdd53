//! Passes between tape machines and two-stack machines.
//!
//! The encoding both directions share: a tape configuration with the
//! head at position `p` corresponds to a pair of stacks, where stack 1
//! holds the head cell and everything to its right (top = head cell)
//! and stack 2 holds everything to the left of the head (top = the
//! cell at `p - 1`). Moving right pushes the head cell onto stack 2
//! and uncovers the next stack-1 cell; moving left does the reverse.
//!
//! Going from stacks back to a tape, the two stacks are laid out as
//! one tape segment bracketed by marker symbols, and each stack
//! operation becomes a short, deterministic edit script on that
//! segment. Every script is a straight-line sequence of silent steps,
//! so each source computation path maps to exactly one target path of
//! the same weight and emitted string: both directions earn
//! [`Grade::Strong`].

use std::collections::{BTreeMap, BTreeSet};

use num::One;

use crate::error::TransformError;
use crate::machines::qptm::{Qptm, QptmTrans};
use crate::machines::twopda::{PdaTrans, TwoPda, TwoPdaFull};
use crate::machines::{Machine, Move, State, Sym};
use crate::numerics::Rational;

use super::{fresh_state, fresh_sym, kind_size, strip, Grade, PassReport};

/// A short display form for symbols used inside generated state names.
fn pretty(s: &Sym) -> &str {
    if s.is_bottom() {
        "bot"
    } else if s.is_blank() {
        "blk"
    } else {
        s.as_str()
    }
}

// ---------------------------------------------------------------------
// Tape machine -> two-stack machine
// ---------------------------------------------------------------------

/// Compiles a rationally weighted tape machine into a two-stack
/// machine under the head-and-right / left split described in the
/// module docs.
///
/// Stay-put and right-moving steps become single transitions. A
/// left-moving step needs a helper state: the first transition writes
/// the new symbol onto stack 1, and the helper then pops the uncovered
/// cell off stack 2 (or manufactures a blank when stack 2 is empty,
/// which is exactly the tape growing to the left). Each source step
/// therefore maps to one or two target steps on a single path, and the
/// pass is [`Grade::Strong`].
pub fn qptm_to_2pda(m: &Qptm) -> (TwoPda, PassReport) {
    let one = Rational::one();
    let blank = Sym::blank();
    let bottom = Sym::bottom();
    let mut taken: BTreeSet<State> = m.states.clone();
    let mut delta: BTreeMap<(State, Sym), Vec<PdaTrans>> = BTreeMap::new();

    // Symbols a left move can uncover on stack 2.
    let mut uncover: Vec<Sym> = m.gamma.iter().cloned().collect();
    if !uncover.contains(&blank) {
        uncover.push(blank.clone());
    }

    let mut left_helpers = 0usize;
    for ((q, g), ts) in &m.delta {
        if ts.is_empty() {
            continue;
        }
        // A blank read happens in two stack shapes: an explicit blank
        // on top of stack 1, or an empty stack 1 (the head is past the
        // written region, so the cell exists only implicitly).
        let rows: Vec<(Sym, Option<Sym>)> = if g.is_blank() {
            vec![
                (blank.clone(), Some(blank.clone())),
                (bottom.clone(), None),
            ]
        } else {
            vec![(g.clone(), Some(g.clone()))]
        };

        // One helper per left-moving transition, shared by all rows.
        let mut helper: Vec<Option<State>> = vec![None; ts.len()];
        for (i, t) in ts.iter().enumerate() {
            if t.mv != Move::L {
                continue;
            }
            let h = fresh_state(
                &mut taken,
                &format!("{}.{}.l{}", q.as_str(), pretty(g), i + 1),
            );
            let mut legs: Vec<PdaTrans> = uncover
                .iter()
                .map(|s| PdaTrans {
                    emit: None,
                    next: t.next.clone(),
                    pop1: None,
                    push1: Some(s.clone()),
                    pop2: Some(s.clone()),
                    push2: None,
                    weight: one.clone(),
                })
                .collect();
            legs.push(PdaTrans {
                emit: None,
                next: t.next.clone(),
                pop1: None,
                push1: Some(blank.clone()),
                pop2: Some(bottom.clone()),
                push2: Some(bottom.clone()),
                weight: one.clone(),
            });
            legs.sort();
            delta.insert((h.clone(), t.write.clone()), legs);
            helper[i] = Some(h);
            left_helpers += 1;
        }

        for (top1, pop1) in rows {
            let mut legs: Vec<PdaTrans> = Vec::with_capacity(ts.len());
            for (i, t) in ts.iter().enumerate() {
                let leg = match t.mv {
                    Move::N => PdaTrans {
                        emit: t.emit.clone(),
                        next: t.next.clone(),
                        pop1: pop1.clone(),
                        push1: Some(t.write.clone()),
                        pop2: None,
                        push2: None,
                        weight: t.weight.clone(),
                    },
                    Move::R => PdaTrans {
                        emit: t.emit.clone(),
                        next: t.next.clone(),
                        pop1: pop1.clone(),
                        push1: None,
                        pop2: None,
                        push2: Some(t.write.clone()),
                        weight: t.weight.clone(),
                    },
                    Move::L => PdaTrans {
                        emit: t.emit.clone(),
                        next: helper[i].clone().expect("helper built above"),
                        pop1: pop1.clone(),
                        push1: Some(t.write.clone()),
                        pop2: None,
                        push2: None,
                        weight: t.weight.clone(),
                    },
                };
                legs.push(leg);
            }
            legs.sort();
            delta.insert((q.clone(), top1), legs);
        }
    }

    let out = TwoPda {
        sigma: m.sigma.clone(),
        gamma: m.gamma.clone(),
        states: taken,
        initial: m.initial.clone(),
        halt: m.halt.clone(),
        delta,
    };
    let mut notes = Vec::new();
    if left_helpers > 0 {
        notes.push(format!(
            "{left_helpers} left-moving step(s) got a stack-2 helper state"
        ));
    } else {
        notes.push("no left-moving steps; every step maps to one transition".to_string());
    }
    let report = PassReport {
        pass: "qptm-to-2pda",
        grade: Grade::Strong,
        input: kind_size(&Machine::Qptm(m.clone())),
        output: kind_size(&Machine::TwoPda(out.clone())),
        notes,
    };
    (out, report)
}

// ---------------------------------------------------------------------
// Two-stack machine -> tape machine
// ---------------------------------------------------------------------

/// Shared scratch for the stacks-to-tape compilation.
///
/// Tape layout: `... blank, WALL, <stack 2 bottom..top>, HEAD, <stack 1
/// top..bottom>, END, blank ...` — stack 1's top is the head cell and
/// its deeper cells run rightward; stack 2 runs leftward from the cell
/// just left of the head. `END` stands where stack 1 runs out, so an
/// empty stack 1 means the head is on `END`; `WALL` plays the same
/// role on the left. A working `MARK` pins the head cell while a shift
/// script runs. Scripts always walk until they see a marker, so blanks
/// stored *inside* a stack are carried like any other symbol.
struct Back {
    /// Cell contents a stack may hold: declared symbols plus the blank.
    content: Vec<Sym>,
    /// Right end marker (an empty stack 1 reads as this).
    e: Sym,
    /// Left wall marker (an empty stack 2 shows this one cell left of
    /// the head).
    w: Sym,
    /// Working mark pinned on the head cell during a shift script.
    mk: Sym,
    taken: BTreeSet<State>,
    delta: BTreeMap<(State, Sym), Vec<QptmTrans>>,
    scripts: usize,
}

/// The emission and weight of the source transition, carried by the
/// first target step of its script; every later step is silent with
/// weight one.
type Carry = Option<(Option<Sym>, Rational)>;

impl Back {
    fn fresh(&mut self, base: &str) -> State {
        fresh_state(&mut self.taken, base)
    }

    /// What the head cell shows for a stack-1 top.
    fn m1(&self, top: &Sym) -> Sym {
        if top.is_bottom() {
            self.e.clone()
        } else {
            top.clone()
        }
    }

    /// What the cell left of the head shows for a stack-2 top.
    fn m2(&self, top: &Sym) -> Sym {
        if top.is_bottom() {
            self.w.clone()
        } else {
            top.clone()
        }
    }

    fn add(&mut self, state: &State, read: &Sym, t: QptmTrans) {
        self.delta
            .entry((state.clone(), read.clone()))
            .or_default()
            .push(t);
    }

    fn silent(&self, next: &State, write: &Sym, mv: Move) -> QptmTrans {
        QptmTrans {
            emit: None,
            next: next.clone(),
            write: write.clone(),
            mv,
            weight: Rational::one(),
        }
    }

    fn carried(&self, first: &mut Carry, next: &State, write: &Sym, mv: Move) -> QptmTrans {
        let (emit, weight) = first.take().unwrap_or((None, Rational::one()));
        QptmTrans {
            emit,
            next: next.clone(),
            write: write.clone(),
            mv,
            weight,
        }
    }

    /// Emits the script for a stack-1 edit at the head cell, ending in
    /// `next`. `entry` is the (state, read) key whose first leg starts
    /// the script — the read is either the head symbol itself or the
    /// working mark left behind by an earlier stack-2 script; both
    /// cases write the same things, so no distinction is needed.
    /// `head` is the symbol logically at the head and `op` the
    /// canonical (pop, push) pair.
    fn stack1_edit(
        &mut self,
        entry_state: &State,
        entry_read: &Sym,
        first: &mut Carry,
        head: &Sym,
        op: &(Option<Sym>, Option<Sym>),
        next: &State,
        tag: &str,
    ) {
        let blank = Sym::blank();
        let content = self.content.clone();
        let e = self.e.clone();
        let mk = self.mk.clone();
        match op {
            // Keep the head cell as it is (restoring it over a mark).
            (None, None) => {
                let t = self.carried(first, next, head, Move::N);
                self.add(entry_state, entry_read, t);
            }
            // Replace the head cell.
            (Some(_), Some(g)) => {
                let g = g.clone();
                let t = self.carried(first, next, &g, Move::N);
                self.add(entry_state, entry_read, t);
            }
            // Push `g`: shift the head cell and everything right of it
            // one cell rightward, then write `g` into the gap.
            (None, Some(g)) => {
                self.scripts += 1;
                let g = g.clone();
                let mut shift: BTreeMap<Sym, State> = BTreeMap::new();
                for s in content.iter().chain([&e]) {
                    let st = self.fresh(&format!("{tag}.ic.{}", pretty(s)));
                    shift.insert(s.clone(), st);
                }
                let entry_leg = self.carried(first, &shift[head], &mk, Move::R);
                self.add(entry_state, entry_read, entry_leg);
                for (s, st) in shift.clone() {
                    if s == e {
                        continue;
                    }
                    for t in content.iter().chain([&e]) {
                        let leg = self.silent(&shift[t], &s, Move::R);
                        self.add(&st, t, leg);
                    }
                }
                // The end marker lands on the first blank past it.
                let ret = self.fresh(&format!("{tag}.ir"));
                let leg = self.silent(&ret, &e, Move::L);
                self.add(&shift[&e], &blank, leg);
                for t in content.clone() {
                    let leg = self.silent(&ret, &t, Move::L);
                    self.add(&ret, &t, leg);
                }
                let done = self.silent(next, &g, Move::N);
                self.add(&ret, &mk, done);
            }
            // Pop: erase the end marker's old cell and shift everything
            // that was right of the head one cell leftward over it.
            (Some(_), None) => {
                self.scripts += 1;
                let seek = self.fresh(&format!("{tag}.ds"));
                let entry_leg = self.carried(first, &seek, &mk, Move::R);
                self.add(entry_state, entry_read, entry_leg);
                for t in content.clone() {
                    let leg = self.silent(&seek, &t, Move::R);
                    self.add(&seek, &t, leg);
                }
                let mut shift: BTreeMap<Sym, State> = BTreeMap::new();
                for s in content.iter().chain([&e]) {
                    let st = self.fresh(&format!("{tag}.dc.{}", pretty(s)));
                    shift.insert(s.clone(), st);
                }
                let leg = self.silent(&shift[&e], &blank, Move::L);
                self.add(&seek, &e, leg);
                for (s, st) in shift.clone() {
                    for t in content.clone() {
                        let leg = self.silent(&shift[&t], &s, Move::L);
                        self.add(&st, &t, leg);
                    }
                    let done = self.silent(next, &s, Move::N);
                    self.add(&st, &mk, done);
                }
            }
        }
    }

    /// Emits the script that pushes `g2` onto stack 2: mark the head,
    /// shift the wall and everything between it and the head one cell
    /// leftward, write `g2` into the gap, walk back to the mark, and
    /// finish with the stack-1 edit `op`.
    #[allow(clippy::too_many_arguments)]
    fn push_left(
        &mut self,
        entry_state: &State,
        entry_read: &Sym,
        first: &mut Carry,
        g2: &Sym,
        head: &Sym,
        op: &(Option<Sym>, Option<Sym>),
        next: &State,
        tag: &str,
    ) {
        self.scripts += 1;
        let blank = Sym::blank();
        let content = self.content.clone();
        let w = self.w.clone();
        let mk = self.mk.clone();
        let mut shift: BTreeMap<Sym, State> = BTreeMap::new();
        for s in content.iter().chain([&w]) {
            let st = self.fresh(&format!("{tag}.jc.{}", pretty(s)));
            shift.insert(s.clone(), st);
        }
        let entry_leg = self.carried(first, &shift[g2], &mk, Move::L);
        self.add(entry_state, entry_read, entry_leg);
        for (s, st) in shift.clone() {
            if s == w {
                continue;
            }
            for t in content.iter().chain([&w]) {
                let leg = self.silent(&shift[t], &s, Move::L);
                self.add(&st, t, leg);
            }
        }
        // The wall lands on the first blank past it, then we walk back.
        let ret = self.fresh(&format!("{tag}.jr"));
        let leg = self.silent(&ret, &w, Move::R);
        self.add(&shift[&w], &blank, leg);
        for t in content.clone() {
            let leg = self.silent(&ret, &t, Move::R);
            self.add(&ret, &t, leg);
        }
        self.stack1_edit(&ret, &mk, &mut None, head, op, next, tag);
    }

    /// Builds the script that pops the top of stack 2 (the cell left
    /// of the head, already marked by the caller): shift the wall and
    /// everything between it and the mark one cell rightward, closing
    /// the gap, and land on `landing` at the head. Returns the entry
    /// state; the caller adds the marking leg that jumps to it.
    fn pop_left_script(&mut self, landing: &State, tag: &str) -> State {
        self.scripts += 1;
        let blank = Sym::blank();
        let content = self.content.clone();
        let w = self.w.clone();
        let mk = self.mk.clone();
        let seek = self.fresh(&format!("{tag}.es"));
        for t in content.clone() {
            let leg = self.silent(&seek, &t, Move::L);
            self.add(&seek, &t, leg);
        }
        let mut shift: BTreeMap<Sym, State> = BTreeMap::new();
        for s in content.iter().chain([&w]) {
            let st = self.fresh(&format!("{tag}.ec.{}", pretty(s)));
            shift.insert(s.clone(), st);
        }
        let leg = self.silent(&shift[&w], &blank, Move::R);
        self.add(&seek, &w, leg);
        for (s, st) in shift.clone() {
            for t in content.clone() {
                let leg = self.silent(&shift[&t], &s, Move::R);
                self.add(&st, &t, leg);
            }
            let done = self.silent(landing, &s, Move::R);
            self.add(&st, &mk, done);
        }
        seek
    }
}

/// Compiles a two-stack machine into a rationally weighted tape
/// machine under the layout described on [`Back`].
///
/// Transitions that never touch stack 2 run straight from the head
/// cell. When any transition at a key pops or inspects stack 2, the
/// key first takes a single silent "peek" step onto the cell left of
/// the head; the symbol found there selects exactly the transitions
/// enabled on it, and their weights ride the dispatch steps, so
/// branching structure is preserved and the pass is
/// [`Grade::Strong`]. Two stack shapes collapse to one tape step each:
/// popping the head cell while pushing left is just writing and moving
/// right, and popping left while pushing the head cell is just writing
/// and moving left — these are the images of ordinary tape moves, so
/// round trips stay short.
///
/// The input must validate cleanly; otherwise the weight bookkeeping
/// below has no meaning and the pass refuses to run.
pub fn twopda_to_qptm(m: &TwoPda) -> Result<(Qptm, PassReport), TransformError> {
    let rep = m.validate();
    if !rep.is_ok() {
        return Err(TransformError::Precondition {
            pass: "2pda-to-qptm",
            message: rep
                .violations
                .first()
                .cloned()
                .unwrap_or_else(|| "input does not validate".to_string()),
        });
    }

    let blank = Sym::blank();
    let mut taken_syms: BTreeSet<Sym> = m.gamma.union(&m.sigma).cloned().collect();
    let mut content: Vec<Sym> = m.gamma.iter().cloned().collect();
    content.push(blank.clone());
    let e = fresh_sym(&mut taken_syms, "end");
    let w = fresh_sym(&mut taken_syms, "wal");
    let mk = fresh_sym(&mut taken_syms, "mrk");
    let mut back = Back {
        content,
        e: e.clone(),
        w: w.clone(),
        mk: mk.clone(),
        taken: m.states.clone(),
        delta: BTreeMap::new(),
        scripts: 0,
    };

    // Bootstrap: write the two markers around the start cell, so the
    // machine begins on END with the WALL one cell to the left — the
    // picture of two empty stacks.
    let boot1 = back.fresh(&format!("{}.boot", m.initial.as_str()));
    let boot2 = back.fresh(&format!("{}.boot2", m.initial.as_str()));
    let leg = back.silent(&boot2, &e, Move::L);
    back.add(&boot1, &blank, leg);
    let leg = back.silent(&m.initial, &w, Move::R);
    back.add(&boot2, &blank, leg);

    // Stack-2 tops in dispatch order: every declared symbol, the
    // blank, and the empty stack.
    let mut rows: Vec<Sym> = m.gamma.iter().cloned().collect();
    rows.push(blank.clone());
    rows.push(Sym::bottom());

    for ((q, g1), ts) in &m.delta {
        if ts.is_empty() {
            continue;
        }
        let head = back.m1(g1);
        let needs_peek = ts.iter().any(|t| t.pop2.is_some());

        if !needs_peek {
            for (i, t) in ts.iter().enumerate() {
                let tag = format!("{}.{}.t{}", q.as_str(), pretty(g1), i + 1);
                let op1 = strip(&t.pop1, &t.push1);
                let mut first = Some((t.emit.clone(), t.weight.clone()));
                match &t.push2 {
                    None => back.stack1_edit(q, &head, &mut first, &head, &op1, &t.next, &tag),
                    Some(g2) => {
                        if matches!(&op1, (Some(_), None)) {
                            // Pop the head cell and push it left: the
                            // head cell just changes and the head
                            // steps right off it.
                            let leg = back.carried(&mut first, &t.next, g2, Move::R);
                            back.add(q, &head, leg);
                        } else {
                            back.push_left(q, &head, &mut first, g2, &head, &op1, &t.next, &tag);
                        }
                    }
                }
            }
            continue;
        }

        // Peek: one silent step left, then dispatch on what is there.
        let pk = back.fresh(&format!("{}.{}.pk", q.as_str(), pretty(g1)));
        let leg = back.silent(&pk, &head, Move::L);
        back.add(q, &head, leg);

        // Per-transition pieces shared across dispatch rows.
        let mut stage_memo: BTreeMap<usize, State> = BTreeMap::new();
        let mut push_ret_memo: BTreeMap<usize, State> = BTreeMap::new();
        let mut pop_entry_memo: BTreeMap<usize, State> = BTreeMap::new();

        for t_row in &rows {
            let cell = back.m2(t_row);
            for (i, t) in ts.iter().enumerate() {
                let enabled = t.pop2.is_none() || t.pop2.as_ref() == Some(t_row);
                if !enabled {
                    continue;
                }
                let tag = format!("{}.{}.t{}", q.as_str(), pretty(g1), i + 1);
                let op1 = strip(&t.pop1, &t.push1);
                let op2 = strip(&t.pop2, &t.push2);
                let mut first = Some((t.emit.clone(), t.weight.clone()));

                // Where to land at the head cell once stack 2 is done.
                let mut landing = |back: &mut Back| -> State {
                    if op1 == (None, None) {
                        t.next.clone()
                    } else {
                        stage_memo
                            .entry(i)
                            .or_insert_with(|| {
                                let s1 = fresh_state(&mut back.taken, &format!("{tag}.s1"));
                                back.stack1_edit(
                                    &s1, &head, &mut None, &head, &op1, &t.next, &tag,
                                );
                                s1
                            })
                            .clone()
                    }
                };

                match &op2 {
                    // Inspect only: put the cell back and return.
                    (None, None) => {
                        let to = landing(&mut back);
                        let leg = back.carried(&mut first, &to, &cell, Move::R);
                        back.add(&pk, &cell, leg);
                    }
                    // Replace the top of stack 2 in place.
                    (Some(_), Some(t2)) => {
                        let to = landing(&mut back);
                        let leg = back.carried(&mut first, &to, t2, Move::R);
                        back.add(&pk, &cell, leg);
                    }
                    // Pop the top of stack 2.
                    (Some(_), None) => {
                        if let (None, Some(g)) = &op1 {
                            // Pop left while pushing the head cell:
                            // the popped cell just becomes the new
                            // head cell.
                            let leg = back.carried(&mut first, &t.next, g, Move::N);
                            back.add(&pk, &cell, leg);
                        } else {
                            let entry = pop_entry_memo
                                .entry(i)
                                .or_insert_with(|| {
                                    let to = landing(&mut back);
                                    back.pop_left_script(&to, &tag)
                                })
                                .clone();
                            let leg = back.carried(&mut first, &entry, &mk, Move::L);
                            back.add(&pk, &cell, leg);
                        }
                    }
                    // Push onto stack 2: put the peeked cell back,
                    // return to the head, and run the push script.
                    (None, Some(g2)) => {
                        let ret = push_ret_memo
                            .entry(i)
                            .or_insert_with(|| {
                                let ret = fresh_state(&mut back.taken, &format!("{tag}.rt"));
                                if matches!(&op1, (Some(_), None)) {
                                    let leg = back.silent(&t.next, g2, Move::R);
                                    back.add(&ret, &head, leg);
                                } else {
                                    back.push_left(
                                        &ret, &head, &mut None, g2, &head, &op1, &t.next, &tag,
                                    );
                                }
                                ret
                            })
                            .clone();
                        let leg = back.carried(&mut first, &ret, &cell, Move::R);
                        back.add(&pk, &cell, leg);
                    }
                }
            }
        }
    }

    let mut delta = back.delta;
    for legs in delta.values_mut() {
        legs.sort();
    }
    let mut gamma = m.gamma.clone();
    gamma.insert(e);
    gamma.insert(w);
    gamma.insert(mk);
    let out = Qptm {
        sigma: m.sigma.clone(),
        gamma,
        states: back.taken,
        initial: boot1,
        halt: m.halt.clone(),
        delta,
    };
    let report = PassReport {
        pass: "2pda-to-qptm",
        grade: Grade::Strong,
        input: kind_size(&Machine::TwoPda(m.clone())),
        output: kind_size(&Machine::Qptm(out.clone())),
        notes: vec![format!(
            "laid stacks out on the tape between markers; {} shift script(s) generated",
            back.scripts
        )],
    };
    Ok((out, report))
}

// ---------------------------------------------------------------------
// Full two-stack machine <-> guarded two-stack machine
// ---------------------------------------------------------------------

/// Compiles a machine whose transitions are keyed on both stack tops
/// into one keyed on the stack-1 top alone, with stack-2 guards.
///
/// Each source transition becomes two: the first inspects the stack-2
/// top it was keyed on (a guarded pop-and-push-back) and parks a tag
/// symbol on stack 1 recording which transition fired; the second,
/// from a fresh state keyed on the tag, performs the real edits. One
/// source step maps to exactly two target steps on a single path, so
/// the pass is [`Grade::Strong`].
pub fn reduce_both_stack_dependence(
    m: &TwoPdaFull,
) -> Result<(TwoPda, PassReport), TransformError> {
    let rep = m.validate();
    if !rep.is_ok() {
        return Err(TransformError::Precondition {
            pass: "reduce-full",
            message: rep
                .violations
                .first()
                .cloned()
                .unwrap_or_else(|| "input does not validate".to_string()),
        });
    }

    let one = Rational::one();
    let mut taken_states = m.states.clone();
    let mut taken_syms: BTreeSet<Sym> = m.gamma.union(&m.sigma).cloned().collect();
    let mut gamma = m.gamma.clone();
    let mut tags: BTreeMap<Sym, Sym> = BTreeMap::new();
    let mut delta: BTreeMap<(State, Sym), Vec<PdaTrans>> = BTreeMap::new();

    for ((q, g1, g2), ts) in &m.delta {
        let tag = tags
            .entry(g2.clone())
            .or_insert_with(|| fresh_sym(&mut taken_syms, &format!("see.{}", pretty(g2))))
            .clone();
        gamma.insert(tag.clone());
        for (i, t) in ts.iter().enumerate() {
            let (p1, s1) = strip(&t.pop1, &t.push1);
            let (p2, s2) = strip(&t.pop2, &t.push2);
            let hop = fresh_state(
                &mut taken_states,
                &format!("{}.{}.{}.t{}", q.as_str(), pretty(g1), pretty(g2), i + 1),
            );
            // Inspect stack 2, remember the choice on stack 1.
            delta.entry((q.clone(), g1.clone())).or_default().push(PdaTrans {
                emit: None,
                next: hop.clone(),
                pop1: p1,
                push1: Some(tag.clone()),
                pop2: Some(g2.clone()),
                push2: Some(g2.clone()),
                weight: t.weight.clone(),
            });
            // Do the real edits.
            delta.entry((hop, tag.clone())).or_default().push(PdaTrans {
                emit: t.emit.clone(),
                next: t.next.clone(),
                pop1: Some(tag.clone()),
                push1: s1,
                pop2: p2,
                push2: s2,
                weight: one.clone(),
            });
        }
    }
    for legs in delta.values_mut() {
        legs.sort();
    }

    let out = TwoPda {
        sigma: m.sigma.clone(),
        gamma,
        states: taken_states,
        initial: m.initial.clone(),
        halt: m.halt.clone(),
        delta,
    };
    let report = PassReport {
        pass: "reduce-full",
        grade: Grade::Strong,
        input: kind_size(&Machine::TwoPdaFull(m.clone())),
        output: kind_size(&Machine::TwoPda(out.clone())),
        notes: vec![format!(
            "{} stack-2 symbol(s) got a tag; each source step runs as inspect-then-edit",
            tags.len()
        )],
    };
    Ok((out, report))
}

/// Compiles a guarded two-stack machine into one keyed on both stack
/// tops, by enumerating for every key which transitions its guards
/// enable on each possible stack-2 top. Transitions are copied
/// verbatim, so paths, weights, and step counts are untouched:
/// [`Grade::Strong`].
pub fn expand_to_full(m: &TwoPda) -> Result<(TwoPdaFull, PassReport), TransformError> {
    let rep = m.validate();
    if !rep.is_ok() {
        return Err(TransformError::Precondition {
            pass: "expand-full",
            message: rep
                .violations
                .first()
                .cloned()
                .unwrap_or_else(|| "input does not validate".to_string()),
        });
    }

    let tops: Vec<Sym> = m.stack_symbols().into_iter().collect();
    let mut delta: BTreeMap<(State, Sym, Sym), Vec<PdaTrans>> = BTreeMap::new();
    let mut stuck_groups = 0usize;
    for ((q, g1), ts) in &m.delta {
        for g2 in &tops {
            let legs: Vec<PdaTrans> = ts
                .iter()
                .filter(|t| t.pop2.is_none() || t.pop2.as_ref() == Some(g2))
                .cloned()
                .collect();
            if legs.is_empty() {
                stuck_groups += 1;
                continue;
            }
            delta.insert((q.clone(), g1.clone(), g2.clone()), legs);
        }
    }

    let out = TwoPdaFull {
        sigma: m.sigma.clone(),
        gamma: m.gamma.clone(),
        states: m.states.clone(),
        initial: m.initial.clone(),
        halt: m.halt.clone(),
        delta,
    };
    let mut notes = vec!["transitions copied per enabled stack-2 top".to_string()];
    if stuck_groups > 0 {
        notes.push(format!(
            "{stuck_groups} key/top combination(s) enable nothing and stay stuck"
        ));
    }
    let report = PassReport {
        pass: "expand-full",
        grade: Grade::Strong,
        input: kind_size(&Machine::TwoPda(m.clone())),
        output: kind_size(&Machine::TwoPdaFull(out.clone())),
        notes,
    };
    Ok((out, report))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::equivalence::{check_strong_multiset, check_weak, Verdict};
    use crate::format::parse_machine;
    use crate::numerics::rat;
    use crate::simulate::{enumerate_paths, halting_mass, semimeasure, DEFAULT_NODE_BUDGET};

    fn fixture(name: &str) -> Machine {
        let path = format!(
            "{}/../../fixtures/{name}.machine",
            env!("CARGO_MANIFEST_DIR")
        );
        let text = std::fs::read_to_string(&path).unwrap();
        parse_machine(&text).unwrap()
    }

    fn as_qptm(m: Machine) -> Qptm {
        match m {
            Machine::Qptm(q) => q,
            other => panic!("expected a weighted tape machine, got {:?}", other.kind()),
        }
    }

    fn as_2pda(m: Machine) -> TwoPda {
        match m {
            Machine::TwoPda(p) => p,
            other => panic!("expected a two-stack machine, got {:?}", other.kind()),
        }
    }

    fn as_full(m: Machine) -> TwoPdaFull {
        match m {
            Machine::TwoPdaFull(p) => p,
            other => panic!("expected a full two-stack machine, got {:?}", other.kind()),
        }
    }

    fn syms(s: &str) -> Vec<Sym> {
        s.chars().map(|c| Sym::new(c.to_string())).collect()
    }

    #[test]
    fn forward_of_a_stay_put_coin_matches_it_path_for_path() {
        let src = fixture("m_third");
        let (pda, report) = qptm_to_2pda(&as_qptm(src.clone()));
        assert!(pda.validate().is_ok());
        assert_eq!(report.grade, Grade::Strong);
        let tgt = Machine::TwoPda(pda);
        let strong =
            check_strong_multiset(&src, &tgt, 3, 8, 8, DEFAULT_NODE_BUDGET).unwrap();
        assert_eq!(strong.verdict, Verdict::Equal);
        assert!(!strong.budget_hit);
        let weak = check_weak(&src, &tgt, 3, 8, DEFAULT_NODE_BUDGET).unwrap();
        assert_eq!(weak.verdict, Verdict::Equal);
    }

    #[test]
    fn forward_keeps_left_moves_and_tape_reads_honest() {
        let src = fixture("m_tape");
        let (pda, report) = qptm_to_2pda(&as_qptm(src.clone()));
        assert!(pda.validate().is_ok());
        assert!(report.notes.iter().any(|n| n.contains("helper")));
        let tgt = Machine::TwoPda(pda);
        let strong =
            check_strong_multiset(&src, &tgt, 2, 12, 30, DEFAULT_NODE_BUDGET).unwrap();
        assert_eq!(strong.verdict, Verdict::Equal);
    }

    #[test]
    fn forward_grows_the_tape_leftward_on_demand() {
        let text = "version 1\nkind qptm\nsigma a b c\ngamma A B\nstates q0 q1 q2 qf\n\
                    initial q0\nfinal qf\n\
                    t q0 _ a q1 A L 1\n\
                    t q1 _ b q2 B R 1\n\
                    t q2 A c qf A N 1\n";
        let src = parse_machine(text).unwrap();
        let (pda, _) = qptm_to_2pda(&as_qptm(src.clone()));
        assert!(pda.validate().is_ok());
        let tgt = Machine::TwoPda(pda);
        let table = semimeasure(&tgt, 3, 8, DEFAULT_NODE_BUDGET).unwrap();
        assert_eq!(table.mass_of(&syms("abc")), rat(1, 1));
        assert!(table.is_exact(&syms("abc")));
        let strong = check_strong_multiset(&src, &tgt, 3, 6, 8, DEFAULT_NODE_BUDGET).unwrap();
        assert_eq!(strong.verdict, Verdict::Equal);
    }

    #[test]
    fn stacks_lay_back_out_on_a_tape_marked_at_both_ends() {
        let pda = as_2pda(fixture("m_six_b"));
        let (back, report) = twopda_to_qptm(&pda).unwrap();
        assert!(back.validate().is_ok());
        assert_eq!(report.grade, Grade::Strong);
        let tgt = Machine::Qptm(back);
        // One straight-line path: two bootstrap steps, a three-step
        // push script, a three-step pop script, and the final hop.
        let paths = enumerate_paths(&tgt, 4, 12, DEFAULT_NODE_BUDGET).unwrap();
        assert_eq!(paths.halted.len(), 1);
        let p = &paths.halted[0];
        assert_eq!(p.emitted, syms("ab"));
        assert_eq!(p.weight, rat(1, 1));
        assert_eq!(p.steps, 9);
        assert_eq!(halting_mass(&tgt, 9, DEFAULT_NODE_BUDGET).unwrap(), rat(1, 1));
        assert_eq!(halting_mass(&tgt, 8, DEFAULT_NODE_BUDGET).unwrap(), rat(0, 1));
    }

    #[test]
    fn head_side_edit_scripts_preserve_the_yield() {
        let pda = as_2pda(fixture("m_six_a"));
        let (back, _) = twopda_to_qptm(&pda).unwrap();
        assert!(back.validate().is_ok());
        let tgt = Machine::Qptm(back);
        let table = semimeasure(&tgt, 5, 20, DEFAULT_NODE_BUDGET).unwrap();
        assert_eq!(table.mass_of(&syms("abcde")), rat(1, 1));
        assert!(table.is_exact(&syms("abcde")));
        let src = Machine::TwoPda(pda);
        let strong =
            check_strong_multiset(&src, &tgt, 5, 10, 20, DEFAULT_NODE_BUDGET).unwrap();
        assert_eq!(strong.verdict, Verdict::Equal);
        let paths = enumerate_paths(&tgt, 5, 20, DEFAULT_NODE_BUDGET).unwrap();
        assert_eq!(paths.halted.len(), 1);
        assert_eq!(paths.halted[0].steps, 14);
    }

    #[test]
    fn left_side_edit_scripts_preserve_the_yield() {
        let pda = as_2pda(fixture("m_six_c"));
        let (back, _) = twopda_to_qptm(&pda).unwrap();
        assert!(back.validate().is_ok());
        let tgt = Machine::Qptm(back);
        let table = semimeasure(&tgt, 6, 40, DEFAULT_NODE_BUDGET).unwrap();
        assert_eq!(table.mass_of(&syms("abcabc")), rat(1, 1));
        assert!(table.is_exact(&syms("abcabc")));
        let src = Machine::TwoPda(pda);
        let strong =
            check_strong_multiset(&src, &tgt, 6, 12, 40, DEFAULT_NODE_BUDGET).unwrap();
        assert_eq!(strong.verdict, Verdict::Equal);
        let paths = enumerate_paths(&tgt, 6, 40, DEFAULT_NODE_BUDGET).unwrap();
        assert_eq!(paths.halted.len(), 1);
        assert_eq!(paths.halted[0].steps, 29);
    }

    #[test]
    fn peeks_split_weight_by_what_stack_two_shows() {
        let pda = as_2pda(fixture("m_twostack"));
        let (back, _) = twopda_to_qptm(&pda).unwrap();
        assert!(back.validate().is_ok());
        let src = Machine::TwoPda(pda);
        let tgt = Machine::Qptm(back);
        let strong =
            check_strong_multiset(&src, &tgt, 5, 12, 100, DEFAULT_NODE_BUDGET).unwrap();
        assert_eq!(strong.verdict, Verdict::Equal);
        let weak = check_weak(&src, &tgt, 3, 100, DEFAULT_NODE_BUDGET).unwrap();
        assert_eq!(weak.verdict, Verdict::Equal);
    }

    #[test]
    fn round_trip_through_stacks_is_path_exact() {
        for (name, max_len, left, right) in
            [("m_third", 3, 8, 40), ("m_tape", 2, 12, 60)]
        {
            let src = fixture(name);
            let (pda, _) = qptm_to_2pda(&as_qptm(src.clone()));
            let (back, _) = twopda_to_qptm(&pda).unwrap();
            assert!(back.validate().is_ok(), "{name} round trip validates");
            let tgt = Machine::Qptm(back);
            let strong =
                check_strong_multiset(&src, &tgt, max_len, left, right, DEFAULT_NODE_BUDGET)
                    .unwrap();
            assert_eq!(strong.verdict, Verdict::Equal, "{name} round trip");
        }
    }

    #[test]
    fn rejects_a_machine_that_does_not_validate() {
        let mut pda = as_2pda(fixture("m_twostack"));
        for legs in pda.delta.values_mut() {
            for leg in legs.iter_mut() {
                leg.weight = rat(1, 3);
            }
        }
        let err = twopda_to_qptm(&pda).unwrap_err();
        assert!(matches!(err, TransformError::Precondition { pass: "2pda-to-qptm", .. }));
        let err = expand_to_full(&pda).unwrap_err();
        assert!(matches!(err, TransformError::Precondition { pass: "expand-full", .. }));
        let mut full = as_full(fixture("m_full"));
        for legs in full.delta.values_mut() {
            for leg in legs.iter_mut() {
                leg.weight = rat(1, 3);
            }
        }
        let err = reduce_both_stack_dependence(&full).unwrap_err();
        assert!(matches!(err, TransformError::Precondition { pass: "reduce-full", .. }));
    }

    #[test]
    fn full_keyed_machine_reduces_to_guarded_form() {
        let full = as_full(fixture("m_full"));
        let (pda, report) = reduce_both_stack_dependence(&full).unwrap();
        assert!(pda.validate().is_ok());
        assert_eq!(report.grade, Grade::Strong);
        let src = Machine::TwoPdaFull(full);
        let tgt = Machine::TwoPda(pda);
        let strong = check_strong_multiset(&src, &tgt, 2, 6, 12, DEFAULT_NODE_BUDGET).unwrap();
        assert_eq!(strong.verdict, Verdict::Equal);
        let weak = check_weak(&src, &tgt, 2, 12, DEFAULT_NODE_BUDGET).unwrap();
        assert_eq!(weak.verdict, Verdict::Equal);
    }

    #[test]
    fn guarded_machine_expands_to_full_keys() {
        let pda = as_2pda(fixture("m_twostack"));
        let (full, report) = expand_to_full(&pda).unwrap();
        assert!(full.validate().is_ok());
        assert_eq!(report.grade, Grade::Strong);
        let src = Machine::TwoPda(pda);
        let tgt = Machine::TwoPdaFull(full.clone());
        let strong =
            check_strong_multiset(&src, &tgt, 5, 12, 12, DEFAULT_NODE_BUDGET).unwrap();
        assert_eq!(strong.verdict, Verdict::Equal);
        // And back down: reduce the expansion and compare to the
        // original.
        let (reduced, _) = reduce_both_stack_dependence(&full).unwrap();
        let strong = check_strong_multiset(
            &src,
            &Machine::TwoPda(reduced),
            5,
            12,
            24,
            DEFAULT_NODE_BUDGET,
        )
        .unwrap();
        assert_eq!(strong.verdict, Verdict::Equal);
    }

    #[test]
    fn pass_reports_name_the_passes() {
        let qp = as_qptm(fixture("m_third"));
        let (pda, r1) = qptm_to_2pda(&qp);
        assert_eq!(r1.pass, "qptm-to-2pda");
        let (_, r2) = twopda_to_qptm(&pda).unwrap();
        assert_eq!(r2.pass, "2pda-to-qptm");
        let (full, r3) = expand_to_full(&pda).unwrap();
        assert_eq!(r3.pass, "expand-full");
        let (_, r4) = reduce_both_stack_dependence(&full).unwrap();
        assert_eq!(r4.pass, "reduce-full");
        for r in [r1, r2, r3, r4] {
            assert_eq!(r.grade, Grade::Strong);
        }
    }
}
