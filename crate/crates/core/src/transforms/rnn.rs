//! Compiling a symbol-deterministic two-stack machine into a simple
//! recurrent language model with exact rational weights.
//!
//! The compiled model runs a four-phase microcode, one phase per
//! micro-step, `k = 4` micro-steps per emitted token:
//!
//! 1. **select** — AND the token just emitted (fed back as a one-hot
//!    input) with the exposed (stack-1 top, state) flag and, for
//!    guarded transitions, the stack-2 top flag, lighting the single
//!    action neuron of the transition that token resolves.
//! 2. **candidates** — apply every action's stack updates, one affine
//!    map per stack, in parallel scratch neurons. Each candidate is
//!    offset by a large negative gate unless its action neuron is hot,
//!    so non-selected candidates clamp to exactly zero. The successor
//!    state one-hot forms here too.
//! 3. **accumulate** — sum the candidates into the stack accumulators
//!    (at most one candidate per stack is nonzero) and run the
//!    top-symbol threshold tests against the new codes.
//! 4. **expose** — materialize the (stack-1 top, state) one-hot block
//!    the output matrix reads, the stack-2 top one-hot the next select
//!    phase guards on, and the refreshed stack registers.
//!
//! Stacks are coded as base-10 fractions (the bit-level forms live in
//! [`crate::numerics`]): every storable symbol gets a fixed-width
//! string of digits 1 and 3, so pushing or popping one symbol is a
//! single affine map, every code sits in `[0, 1/3]`, and the scaled
//! code separates cleanly from the threshold constants — which is what
//! keeps every activation an exact 0, an exact 1, or an exact stack
//! code.
//!
//! The output matrix reads only the config block and the dark column:
//! the score of token `y` at config `(γ, q)` is the weight of the
//! unique `(q, γ, y)` transition, the end token scores 1 at halt-state
//! configs, and the silent token scores 1 at configs with no outgoing
//! transitions and on the dark column. Scores at an exposed config sum
//! to the key's outgoing weight, which is why the pass insists those
//! weights sum to exactly one key by key.
//!
//! When a sampled token matches no enabled transition — its stack-2
//! guard tests a symbol that is not on top, or the key has no
//! transitions at all — no action fires and the dark column latches:
//! from then on the model emits the silent token forever. Such runs
//! never finish a string, so they carry mass zero, exactly like the
//! source machine sticking without emitting at the same point.

use std::collections::{BTreeMap, BTreeSet};

use num::{One, Zero};

use super::{kind_size, strip, Grade, PassReport};
use crate::error::TransformError;
use crate::machines::{
    InTok, Layout, Machine, OutTok, RnnLm, State, Sym, TwoPda, EPSILON_TOKEN,
};
use crate::numerics::{rat, rat_to_string, Rational};

const PASS: &str = "2pda-to-rnn";

/// Micro-steps per emitted token: one per phase.
const BLOCK: usize = 4;

/// Gate offset for candidate neurons: strictly larger than any
/// candidate pre-activation (those stay below 34 = 10² · 1/3 + 1/3),
/// so candidate minus gate is negative whenever its action is cold.
const GATE: i64 = 100;

/// Fixed-width digit codes for the storable stack symbols.
///
/// A symbol's code is one digit per bit of its index (high bit first,
/// bit 0 ↦ digit 1, bit 1 ↦ digit 3). A stack's code is the base-10
/// fraction reading digit strings top-down, so the integer part of the
/// code scaled by `10^width` identifies the top symbol, and the
/// fractional part — the rest of the stack — never exceeds 1/3.
struct CodeBook {
    width: u32,
    value: BTreeMap<Sym, i64>,
}

impl CodeBook {
    fn new(storable: &BTreeSet<Sym>) -> CodeBook {
        let n = storable.len();
        let width = if n <= 2 {
            1
        } else {
            usize::BITS - (n - 1).leading_zeros()
        };
        let mut value = BTreeMap::new();
        for (idx, sym) in storable.iter().enumerate() {
            let mut v: i64 = 0;
            for bit_pos in (0..width).rev() {
                let bit = (idx >> bit_pos) & 1 == 1;
                v = v * 10 + if bit { 3 } else { 1 };
            }
            value.insert(sym.clone(), v);
        }
        CodeBook { width, value }
    }

    /// `10^width`, the per-symbol place value.
    fn scale(&self) -> Rational {
        rat(10i64.pow(self.width), 1)
    }

    /// Distinct code values, ascending.
    fn sorted_values(&self) -> Vec<i64> {
        let set: BTreeSet<i64> = self.value.values().copied().collect();
        set.into_iter().collect()
    }

    /// The affine stack update `enc ↦ a·enc + c` for a canonical
    /// (pop, push) pair; pops apply before pushes.
    fn op_affine(&self, pop: &Option<Sym>, push: &Option<Sym>) -> (Rational, Rational) {
        let value = |s: &Sym| {
            rat(
                *self
                    .value
                    .get(s)
                    .expect("stack operands are always storable symbols"),
                1,
            )
        };
        let scale = self.scale();
        match (pop, push) {
            (None, None) => (Rational::one(), Rational::zero()),
            (Some(p), None) => (scale.clone(), -value(p)),
            (None, Some(q)) => (scale.recip(), value(q) / &scale),
            (Some(p), Some(q)) => (Rational::one(), (value(q) - value(p)) / &scale),
        }
    }
}

/// One compiled transition: which config and guard flags its select
/// conjunction reads, which feedback token completes it, what it does
/// to the stacks, and where it goes.
struct Action {
    top: Sym,
    state: State,
    feedback: InTok,
    guard: Option<Sym>,
    op1: (Rational, Rational),
    op2: (Rational, Rational),
    next: State,
}

/// Sequential hidden-coordinate allocator that records named ranges.
struct Alloc {
    next: usize,
    ranges: BTreeMap<String, (usize, usize)>,
}

impl Alloc {
    fn block(&mut self, name: &str, len: usize) -> usize {
        let start = self.next;
        self.next += len;
        self.ranges.insert(name.to_string(), (start, self.next));
        start
    }
}

/// Compiles a symbol-deterministic two-stack machine into a recurrent
/// model whose emission process matches it path for path: each source
/// transition becomes one four-step block emitting the same token with
/// the same weight, followed by a weight-1 end-of-sequence block once
/// the halt state's config is exposed.
///
/// Requirements beyond validation: the emitted token must resolve all
/// randomness at a key ([`TwoPda::is_symbol_deterministic`]), at most
/// three distinct symbols may ever be pushed (the digit coding spends
/// two bits per symbol), and every key's outgoing weights must total
/// exactly one, because the exposed config column routes the whole
/// key's score mass through the output matrix in one step.
pub fn compile_rnn(m: &TwoPda) -> Result<(RnnLm, PassReport), TransformError> {
    let rep = m.validate();
    if !rep.is_ok() {
        return Err(TransformError::Precondition {
            pass: PASS,
            message: rep
                .violations
                .first()
                .cloned()
                .unwrap_or_else(|| "input does not validate".to_string()),
        });
    }
    for ((q, g), legs) in &m.delta {
        let mut counts: BTreeMap<&Option<Sym>, usize> = BTreeMap::new();
        for leg in legs {
            *counts.entry(&leg.emit).or_insert(0) += 1;
        }
        if let Some((emit, count)) = counts.into_iter().find(|(_, c)| *c > 1) {
            return Err(TransformError::NotOutputDeterministic {
                state: q.to_string(),
                top: g.to_string(),
                symbol: emit
                    .as_ref()
                    .map_or_else(|| EPSILON_TOKEN.to_string(), |s| s.to_string()),
                count,
            });
        }
    }

    // Storable symbols: everything some transition actually pushes,
    // after cancelling pop/push pairs that only inspect a top.
    let mut storable: BTreeSet<Sym> = BTreeSet::new();
    for legs in m.delta.values() {
        for leg in legs {
            for (pop, push) in [(&leg.pop1, &leg.push1), (&leg.pop2, &leg.push2)] {
                if let (_, Some(s)) = strip(pop, push) {
                    storable.insert(s);
                }
            }
        }
    }
    if storable.len() > 3 {
        return Err(TransformError::StackAlphabetTooWide {
            count: storable.len() + 1,
        });
    }
    let book = CodeBook::new(&storable);

    // Stack tops a run can expose: the storable symbols plus bottom.
    let mut tops_set: BTreeSet<Sym> = storable.clone();
    tops_set.insert(Sym::bottom());
    let tops: Vec<Sym> = tops_set.iter().cloned().collect();
    let top_ix: BTreeMap<&Sym, usize> = tops.iter().enumerate().map(|(i, s)| (s, i)).collect();

    let states: Vec<State> = m.states.iter().cloned().collect();
    let state_ix: BTreeMap<&State, usize> =
        states.iter().enumerate().map(|(i, q)| (q, i)).collect();

    // Walk the keys a run can reach, check their outgoing totals, and
    // flatten their transitions into actions.
    let mut actions: Vec<Action> = Vec::new();
    let mut dead_keys = 0usize;
    let mut dead_guards = 0usize;
    for ((q, g), legs) in &m.delta {
        if !tops_set.contains(g) {
            dead_keys += 1;
            continue;
        }
        let total = legs
            .iter()
            .fold(Rational::zero(), |acc, t| acc + &t.weight);
        if !total.is_one() {
            return Err(TransformError::Precondition {
                pass: PASS,
                message: format!(
                    "key ({q}, {g}): outgoing weights sum to {}, but the output \
                     matrix routes a key's whole score mass through one config \
                     column, so they must sum to exactly 1",
                    rat_to_string(&total)
                ),
            });
        }
        for leg in legs {
            let guard = match &leg.pop2 {
                Some(t) if !tops_set.contains(t) => {
                    dead_guards += 1;
                    continue;
                }
                other => other.clone(),
            };
            let (p1, s1) = strip(&leg.pop1, &leg.push1);
            let (p2, s2) = strip(&leg.pop2, &leg.push2);
            actions.push(Action {
                top: g.clone(),
                state: q.clone(),
                feedback: leg
                    .emit
                    .as_ref()
                    .map_or(InTok::Eps, |s| InTok::Sym(s.clone())),
                guard,
                op1: book.op_affine(&p1, &s1),
                op2: book.op_affine(&p2, &s2),
                next: leg.next.clone(),
            });
        }
    }

    let n_actions = actions.len();
    let n_states = states.len();
    let values = book.sorted_values();
    let n_values = values.len();
    let value_pos: BTreeMap<i64, usize> =
        values.iter().enumerate().map(|(i, v)| (*v, i)).collect();

    // Hidden-coordinate map. Every neuron has one producing phase; its
    // row reads only neurons of the previous phase (plus the latched
    // dark column), so values from other phases are exactly zero.
    let mut alloc = Alloc {
        next: 0,
        ranges: BTreeMap::new(),
    };
    let phase = alloc.block("phase-counter", BLOCK);
    let act0 = alloc.block("action-select", n_actions);
    let carry = alloc.block("stack-carry", 2);
    let st2 = alloc.block("next-state", n_states);
    let cand = alloc.block("push-pop-candidates", 2 * n_actions);
    let acc = alloc.block("stack-accumulate", 2);
    let st3 = alloc.block("next-state-carry", n_states);
    let g1 = alloc.block("stack1-top-tests", n_values);
    let g2 = alloc.block("stack2-top-tests", n_values);
    let cfg = alloc.block("config", tops.len() * n_states);
    let t2o = alloc.block("stack2-top", tops.len());
    let reg = alloc.block("stack-registers", 2);
    let off = alloc.block("dark", 1);
    let d = alloc.next;

    let cfg_col = |ti: usize, qi: usize| cfg + ti * n_states + qi;

    let mut rows: Vec<Vec<(usize, Rational)>> = vec![Vec::new(); d];
    let mut v_rows: Vec<Vec<(usize, Rational)>> = vec![Vec::new(); d];
    let mut bias = vec![Rational::zero(); d];

    let embed: BTreeMap<InTok, usize> = {
        let mut toks: BTreeSet<InTok> = [InTok::Eps, InTok::Bos].into();
        toks.extend(m.sigma.iter().cloned().map(InTok::Sym));
        toks.into_iter().enumerate().map(|(i, t)| (t, i)).collect()
    };

    // Phase ring: each phase flag follows the previous one.
    for i in 0..BLOCK {
        rows[phase + i].push((phase + (i + BLOCK - 1) % BLOCK, Rational::one()));
    }

    for (i, a) in actions.iter().enumerate() {
        // Select: conjunction of exposed config, fed-back token, and
        // (when guarded) the stack-2 top flag. Each term is 0 or 1, so
        // a threshold of (terms − 1) realizes AND exactly.
        let col = act0 + i;
        rows[col].push((cfg_col(top_ix[&a.top], state_ix[&a.state]), Rational::one()));
        let mut terms = 2i64;
        if let Some(t) = &a.guard {
            rows[col].push((t2o + top_ix[t], Rational::one()));
            terms += 1;
        }
        v_rows[col].push((embed[&a.feedback], Rational::one()));
        bias[col] = rat(1 - terms, 1);

        // Next-state one-hot accumulates over selected actions.
        rows[st2 + state_ix[&a.next]].push((col, Rational::one()));

        // Candidates: the affine update, gated by the action flag.
        for (stack, (ca, cc)) in [(0usize, &a.op1), (1usize, &a.op2)] {
            let ccol = cand + stack * n_actions + i;
            rows[ccol].push((col, rat(GATE, 1)));
            rows[ccol].push((carry + stack, ca.clone()));
            bias[ccol] = cc - rat(GATE, 1);
        }
    }

    // Stack carries: registers feed the select-phase copies.
    rows[carry].push((reg, Rational::one()));
    rows[carry + 1].push((reg + 1, Rational::one()));

    // Accumulators: sum the candidates (at most one is nonzero).
    for i in 0..n_actions {
        rows[acc].push((cand + i, Rational::one()));
        rows[acc + 1].push((cand + n_actions + i, Rational::one()));
    }

    // State carry into the expose phase.
    for qi in 0..n_states {
        rows[st3 + qi].push((st2 + qi, Rational::one()));
    }

    // Top tests: test `i` fires exactly when the scaled new code is at
    // least the i-th code value. Codes are ≥ 2 apart and tails stay
    // within 1/3 of a place, so a threshold at (previous value + 2/5),
    // rescaled to saturate at the next value, is exactly 0 or 1.
    for (i, v) in values.iter().enumerate() {
        let prev = if i == 0 { 0 } else { values[i - 1] };
        let den = rat(v - prev, 1) - rat(2, 5);
        let coeff = book.scale() / &den;
        let b = -(rat(prev, 1) + rat(2, 5)) / &den;
        for a in 0..n_actions {
            rows[g1 + i].push((cand + a, coeff.clone()));
            rows[g2 + i].push((cand + n_actions + a, coeff.clone()));
        }
        bias[g1 + i] = b.clone();
        bias[g2 + i] = b;
    }

    // Config block and stack-2 top flags: differences of adjacent top
    // tests turn the test cascade into a one-hot, and adding the state
    // carry minus one ANDs the state in.
    for (ti, top) in tops.iter().enumerate() {
        let onehot: Vec<(usize, Rational)> = if top.is_bottom() {
            // Empty stack: no test fired.
            if n_values == 0 {
                Vec::new()
            } else {
                vec![(0, rat(-1, 1))]
            }
        } else {
            let j = value_pos[&book.value[top]];
            let mut terms = vec![(j, Rational::one())];
            if j + 1 < n_values {
                terms.push((j + 1, rat(-1, 1)));
            }
            terms
        };
        let base_bias = if top.is_bottom() {
            Rational::one()
        } else {
            Rational::zero()
        };
        for qi in 0..n_states {
            let col = cfg_col(ti, qi);
            rows[col].push((st3 + qi, Rational::one()));
            for (jj, coeff) in &onehot {
                rows[col].push((g1 + jj, coeff.clone()));
            }
            bias[col] = base_bias.clone() - Rational::one();
        }
        let tcol = t2o + ti;
        for (jj, coeff) in &onehot {
            rows[tcol].push((g2 + jj, coeff.clone()));
        }
        bias[tcol] = base_bias;
    }

    // Stack registers for the next emission step.
    rows[reg].push((acc, Rational::one()));
    rows[reg + 1].push((acc + 1, Rational::one()));

    // Dark column: latches itself, and turns on when the select phase
    // just ran (its flag is hot) but no action fired.
    rows[off].push((phase, Rational::one()));
    for i in 0..n_actions {
        rows[off].push((act0 + i, rat(-1, 1)));
    }
    rows[off].push((off, Rational::one()));

    for row in rows.iter_mut().chain(v_rows.iter_mut()) {
        row.sort_by_key(|(j, _)| *j);
    }

    // Output matrix over config columns and the dark column.
    let mut e_entries: BTreeMap<OutTok, BTreeMap<usize, Rational>> = BTreeMap::new();
    e_entries.insert(OutTok::Eps, BTreeMap::new());
    e_entries.insert(OutTok::Eos, BTreeMap::new());
    for s in &m.sigma {
        e_entries.insert(OutTok::Sym(s.clone()), BTreeMap::new());
    }
    for (ti, top) in tops.iter().enumerate() {
        for (qi, q) in states.iter().enumerate() {
            let col = cfg_col(ti, qi);
            if *q == m.halt {
                e_entries
                    .get_mut(&OutTok::Eos)
                    .expect("end row exists")
                    .insert(col, Rational::one());
                continue;
            }
            match m.delta.get(&(q.clone(), top.clone())) {
                Some(legs) if !legs.is_empty() => {
                    for leg in legs {
                        let tok = leg
                            .emit
                            .as_ref()
                            .map_or(OutTok::Eps, |s| OutTok::Sym(s.clone()));
                        *e_entries
                            .get_mut(&tok)
                            .expect("all emission rows exist")
                            .entry(col)
                            .or_insert_with(Rational::zero) += &leg.weight;
                    }
                }
                _ => {
                    // Stuck key: score the silent token, after which no
                    // action fires and the run goes dark.
                    e_entries
                        .get_mut(&OutTok::Eps)
                        .expect("silent row exists")
                        .insert(col, Rational::one());
                }
            }
        }
    }
    e_entries
        .get_mut(&OutTok::Eps)
        .expect("silent row exists")
        .insert(off, Rational::one());
    let e: BTreeMap<OutTok, Vec<(usize, Rational)>> = e_entries
        .into_iter()
        .map(|(tok, cols)| (tok, cols.into_iter().collect()))
        .collect();

    // Initial state: pretend the expose phase is about to run with the
    // initial control state carried and both stacks empty, so the
    // begin-of-sequence micro-step lands on the first emission step
    // with (bottom, initial) exposed.
    let mut h0 = vec![Rational::zero(); d];
    h0[phase + BLOCK - 2] = Rational::one();
    h0[st3 + state_ix[&m.initial]] = Rational::one();

    let mut config_cols = BTreeMap::new();
    for (ti, top) in tops.iter().enumerate() {
        for (qi, q) in states.iter().enumerate() {
            config_cols.insert((top.clone(), q.clone()), cfg_col(ti, qi));
        }
    }

    let net = RnnLm {
        sigma: m.sigma.clone(),
        d,
        k: BLOCK,
        embed,
        u: rows,
        v: v_rows,
        b: bias,
        h0,
        e,
        layout: Layout {
            ranges: alloc.ranges,
            config_cols,
            off_col: Some(off),
        },
    };

    let mut notes = vec![
        format!(
            "hidden width {d}: {n_actions} action neurons, {} coded stack \
             symbols at digit width {}, {BLOCK} micro-steps per token",
            storable.len(),
            book.width
        ),
        "a sampled token matching no enabled transition latches the dark \
         column; the run then stays silent forever and puts no mass on any \
         finished string"
            .to_string(),
    ];
    if dead_keys > 0 {
        notes.push(format!(
            "dropped {dead_keys} transition keys whose stack-1 top no \
             transition ever pushes (unreachable)"
        ));
    }
    if dead_guards > 0 {
        notes.push(format!(
            "{dead_guards} transitions keep their emission scores but can \
             never fire: their stack-2 guards test symbols no transition \
             ever pushes"
        ));
    }
    let report = PassReport {
        pass: PASS,
        grade: Grade::Strong,
        input: kind_size(&Machine::TwoPda(m.clone())),
        output: kind_size(&Machine::Rnn(net.clone())),
        notes,
    };
    Ok((net, report))
}
