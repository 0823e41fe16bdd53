//! Exact execution engines: configuration stepping, path enumeration,
//! output-distribution tables, halting mass, and seeded sampling.
//!
//! All weights are exact rationals.  Three engines share one stepping
//! interface:
//!
//! * [`enumerate_paths`] walks the literal computation tree depth-first
//!   and reports each halted or still-live path individually.
//! * [`semimeasure`] merges paths that share a configuration and an
//!   emitted string, propagating summed mass breadth-first one step at
//!   a time; this keeps the explored set polynomial for machines whose
//!   path tree is exponential.
//! * [`sample_one`] / [`sample_many`] draw runs with a seeded generator,
//!   choosing each branch by exact dyadic bisection so that no
//!   floating-point arithmetic is involved anywhere.
//!
//! A node budget bounds every exhaustive walk; exceeding it yields
//! [`SimulateError::BudgetExceeded`] rather than an unbounded search.

use std::cell::RefCell;
use std::collections::{BTreeMap, BTreeSet};

use num::{One, Signed, Zero};
use rand::RngCore;
use rand_chacha::rand_core::SeedableRng;
use rand_chacha::ChaCha8Rng;

use crate::error::SimulateError;
use crate::machines::rnn::{InTok, OutTok, RnnLm};
use crate::machines::{Machine, State, Sym};
use crate::numerics::Rational;

/// Default cap on the number of configuration expansions per call.
pub const DEFAULT_NODE_BUDGET: u64 = 1_000_000;

/// Environment variable that overrides [`DEFAULT_NODE_BUDGET`].
pub const NODE_BUDGET_ENV: &str = "PTMC_NODE_BUDGET";

/// The node budget currently in effect: the value of
/// [`NODE_BUDGET_ENV`] when it parses as a positive integer, otherwise
/// [`DEFAULT_NODE_BUDGET`].
pub fn node_budget_from_env() -> u64 {
    std::env::var(NODE_BUDGET_ENV)
        .ok()
        .and_then(|s| s.parse::<u64>().ok())
        .filter(|&n| n > 0)
        .unwrap_or(DEFAULT_NODE_BUDGET)
}

/// A machine configuration: everything the next step depends on,
/// excluding the string emitted so far.
///
/// Configurations are kept in canonical form so that value equality
/// coincides with behavioural equality: tapes store only non-blank
/// cells, stacks store only the symbols above the bottom marker, and
/// all halted network configurations collapse to one value.
#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord)]
pub enum Config {
    /// A tape machine: control state, non-blank cells, head position.
    Tape {
        state: State,
        tape: BTreeMap<i64, Sym>,
        head: i64,
    },
    /// A two-stack machine: control state plus both stacks, bottom
    /// excluded, topmost symbol last.
    Stacks {
        state: State,
        stack1: Vec<Sym>,
        stack2: Vec<Sym>,
    },
    /// A network: the hidden activation at an emission step, or the
    /// single absorbing configuration entered by emitting the
    /// end-of-sequence token.
    Net { h: Vec<Rational>, halted: bool },
}

/// One outgoing branch from a configuration: its probability, the
/// symbol it emits (if any), and the configuration it leads to.
#[derive(Debug, Clone)]
pub struct Branch {
    pub weight: Rational,
    pub emit: Option<Sym>,
    pub to: Config,
}

type NetMemo = BTreeMap<Vec<Rational>, Vec<Branch>>;

/// Uniform stepping interface over every machine kind.
///
/// For tape and stack machines a step is one transition.  For networks
/// a step is one *emission* step: the `k` micro-steps from one
/// emission to the next are folded into a single branch per emitted
/// token, and [`Stepper::step_cost`] reports `k` so that callers can
/// convert raw step bounds.  Expanded network steps are memoised by
/// hidden state, which keeps repeated traversal of loopy networks
/// cheap.
pub struct Stepper<'a> {
    machine: &'a Machine,
    net_memo: RefCell<NetMemo>,
}

impl<'a> Stepper<'a> {
    pub fn new(machine: &'a Machine) -> Self {
        Stepper {
            machine,
            net_memo: RefCell::new(BTreeMap::new()),
        }
    }

    /// Raw steps consumed by one call to [`Stepper::successors`]:
    /// `k` for networks, `1` for everything else.
    pub fn step_cost(&self) -> u64 {
        match self.machine {
            Machine::Rnn(r) => (r.k as u64).max(1),
            _ => 1,
        }
    }

    /// The configuration a run starts in.  For networks this performs
    /// the single bootstrap micro-step that feeds the start-of-sequence
    /// token, landing on the first emission step.
    pub fn initial(&self) -> Config {
        match self.machine {
            Machine::Ptm(m) => Config::Tape {
                state: m.initial.clone(),
                tape: BTreeMap::new(),
                head: 0,
            },
            Machine::Qptm(m) => Config::Tape {
                state: m.initial.clone(),
                tape: BTreeMap::new(),
                head: 0,
            },
            Machine::TwoPda(m) => Config::Stacks {
                state: m.initial.clone(),
                stack1: Vec::new(),
                stack2: Vec::new(),
            },
            Machine::TwoPdaFull(m) => Config::Stacks {
                state: m.initial.clone(),
                stack1: Vec::new(),
                stack2: Vec::new(),
            },
            Machine::Rnn(r) => Config::Net {
                h: r.step_micro(&r.h0, &InTok::Bos),
                halted: false,
            },
        }
    }

    /// Whether a configuration is absorbing: a halt state, or the
    /// network configuration entered by emitting end-of-sequence.
    pub fn is_halted(&self, c: &Config) -> bool {
        match (self.machine, c) {
            (Machine::Ptm(m), Config::Tape { state, .. }) => *state == m.halt,
            (Machine::Qptm(m), Config::Tape { state, .. }) => *state == m.halt,
            (Machine::TwoPda(m), Config::Stacks { state, .. }) => *state == m.halt,
            (Machine::TwoPdaFull(m), Config::Stacks { state, .. }) => *state == m.halt,
            (Machine::Rnn(_), Config::Net { halted, .. }) => *halted,
            _ => false,
        }
    }

    /// All enabled branches out of `c`, in canonical order.  A halted
    /// configuration has none, and neither does a stuck one; the two
    /// are told apart with [`Stepper::is_halted`].
    pub fn successors(&self, c: &Config) -> Result<Vec<Branch>, SimulateError> {
        if self.is_halted(c) {
            return Ok(Vec::new());
        }
        match (self.machine, c) {
            (Machine::Ptm(m), Config::Tape { state, tape, head }) => {
                let read = tape
                    .get(head)
                    .cloned()
                    .unwrap_or_else(Sym::blank);
                let key = (state.clone(), read);
                let mut out = Vec::new();
                let half = Rational::new(1.into(), 2.into());
                for table in [&m.delta1, &m.delta2] {
                    if let Some(step) = table.get(&key) {
                        out.push(Branch {
                            weight: half.clone(),
                            emit: step.emit.clone(),
                            to: apply_tape_step(
                                tape,
                                *head,
                                &step.next,
                                &step.write,
                                step.mv,
                            ),
                        });
                    }
                }
                Ok(out)
            }
            (Machine::Qptm(m), Config::Tape { state, tape, head }) => {
                let read = tape
                    .get(head)
                    .cloned()
                    .unwrap_or_else(Sym::blank);
                let mut out = Vec::new();
                if let Some(ts) = m.delta.get(&(state.clone(), read)) {
                    for t in ts {
                        out.push(Branch {
                            weight: t.weight.clone(),
                            emit: t.emit.clone(),
                            to: apply_tape_step(tape, *head, &t.next, &t.write, t.mv),
                        });
                    }
                }
                Ok(out)
            }
            (
                Machine::TwoPda(m),
                Config::Stacks {
                    state,
                    stack1,
                    stack2,
                },
            ) => {
                let top1 = stack_top(stack1);
                let top2 = stack_top(stack2);
                let mut out = Vec::new();
                if let Some(ts) = m.delta.get(&(state.clone(), top1)) {
                    for t in ts {
                        if let Some(guard) = &t.pop2 {
                            if *guard != top2 {
                                continue;
                            }
                        }
                        out.push(Branch {
                            weight: t.weight.clone(),
                            emit: t.emit.clone(),
                            to: Config::Stacks {
                                state: t.next.clone(),
                                stack1: apply_stack_op(stack1, &t.pop1, &t.push1),
                                stack2: apply_stack_op(stack2, &t.pop2, &t.push2),
                            },
                        });
                    }
                }
                Ok(out)
            }
            (
                Machine::TwoPdaFull(m),
                Config::Stacks {
                    state,
                    stack1,
                    stack2,
                },
            ) => {
                let top1 = stack_top(stack1);
                let top2 = stack_top(stack2);
                let mut out = Vec::new();
                if let Some(ts) = m.delta.get(&(state.clone(), top1, top2)) {
                    for t in ts {
                        out.push(Branch {
                            weight: t.weight.clone(),
                            emit: t.emit.clone(),
                            to: Config::Stacks {
                                state: t.next.clone(),
                                stack1: apply_stack_op(stack1, &t.pop1, &t.push1),
                                stack2: apply_stack_op(stack2, &t.pop2, &t.push2),
                            },
                        });
                    }
                }
                Ok(out)
            }
            (Machine::Rnn(r), Config::Net { h, .. }) => {
                if let Some(cached) = self.net_memo.borrow().get(h) {
                    return Ok(cached.clone());
                }
                let expanded = expand_net_step(r, h)?;
                self.net_memo
                    .borrow_mut()
                    .insert(h.clone(), expanded.clone());
                Ok(expanded)
            }
            _ => unreachable!("configuration kind always matches machine kind"),
        }
    }
}

fn apply_tape_step(
    tape: &BTreeMap<i64, Sym>,
    head: i64,
    next: &State,
    write: &Sym,
    mv: crate::machines::Move,
) -> Config {
    let mut tape = tape.clone();
    if write.is_blank() {
        tape.remove(&head);
    } else {
        tape.insert(head, write.clone());
    }
    let head = match mv {
        crate::machines::Move::L => head - 1,
        crate::machines::Move::N => head,
        crate::machines::Move::R => head + 1,
    };
    Config::Tape {
        state: next.clone(),
        tape,
        head,
    }
}

fn stack_top(stack: &[Sym]) -> Sym {
    stack.last().cloned().unwrap_or_else(Sym::bottom)
}

/// Applies a pop/push pair to one stack.  Popping the bottom marker is
/// only ever paired with pushing it back (validation enforces this), so
/// the pair acts as a pure inspection and leaves the stack unchanged.
fn apply_stack_op(stack: &[Sym], pop: &Option<Sym>, push: &Option<Sym>) -> Vec<Sym> {
    let mut stack = stack.to_vec();
    if let Some(p) = pop {
        if !p.is_bottom() {
            let popped = stack.pop();
            debug_assert_eq!(popped.as_ref(), Some(p), "pop must match the top symbol");
        }
    }
    if let Some(p) = push {
        if !p.is_bottom() {
            stack.push(p.clone());
        }
    }
    stack
}

/// Expands one emission step of a network: reads the output
/// distribution at `h`, then for every token of positive probability
/// runs the `k` micro-steps (token feedback first, then padding) that
/// land on the next emission step.  Emitting the end-of-sequence token
/// leads to the absorbing halted configuration instead.
fn expand_net_step(r: &RnnLm, h: &[Rational]) -> Result<Vec<Branch>, SimulateError> {
    let scores = r.output_scores(h);
    let mut total = Rational::zero();
    for (tok, w) in &scores {
        if w.is_negative() {
            return Err(SimulateError::BadEmissionScores(format!(
                "score of {tok} is negative"
            )));
        }
        total += w.clone();
    }
    if !total.is_one() {
        return Err(SimulateError::BadEmissionScores(format!(
            "scores sum to {}",
            crate::numerics::rat_to_string(&total)
        )));
    }
    let mut out = Vec::new();
    for (tok, w) in scores {
        if w.is_zero() {
            continue;
        }
        match tok {
            OutTok::Eos => out.push(Branch {
                weight: w,
                emit: None,
                to: Config::Net {
                    h: Vec::new(),
                    halted: true,
                },
            }),
            OutTok::Eps | OutTok::Sym(_) => {
                let (feedback, emit) = match &tok {
                    OutTok::Eps => (InTok::Eps, None),
                    OutTok::Sym(s) => (InTok::Sym(s.clone()), Some(s.clone())),
                    OutTok::Eos => unreachable!(),
                };
                let mut next = r.step_micro(h, &feedback);
                for _ in 1..r.k {
                    next = r.step_micro(&next, &InTok::Eps);
                }
                out.push(Branch {
                    weight: w,
                    emit,
                    to: Config::Net {
                        h: next,
                        halted: false,
                    },
                });
            }
        }
    }
    Ok(out)
}

/// One complete or still-running computation path.
#[derive(Debug, Clone)]
pub struct PathRecord {
    /// The string emitted along the path.
    pub emitted: Vec<Sym>,
    /// The product of the branch probabilities along the path.
    pub weight: Rational,
    /// Raw steps consumed.
    pub steps: u64,
}

/// The result of a bounded depth-first walk of the computation tree.
#[derive(Debug, Clone, Default)]
pub struct PathEnumeration {
    /// Paths that reached a halting configuration, in depth-first
    /// order with branches taken in canonical transition order.
    pub halted: Vec<PathRecord>,
    /// Paths cut off by the step bound while branches remained.
    /// Paths that died in a stuck configuration are dropped: they
    /// carry mass that can never reach a halting configuration.
    pub live: Vec<PathRecord>,
}

/// Walks the literal computation tree depth-first, bounded by emitted
/// length and raw steps.  Every path is reported individually — two
/// branches with identical effect still yield two paths — which is what
/// path-counting laws and weight-multiset comparisons need.
///
/// Paths whose emitted string exceeds `max_len` are discarded: such a
/// string can never return to a length within bounds, so it affects
/// neither the reported paths nor any prefix-based completeness
/// reasoning over strings within bounds.
pub fn enumerate_paths(
    machine: &Machine,
    max_len: usize,
    max_steps: u64,
    budget: u64,
) -> Result<PathEnumeration, SimulateError> {
    let stepper = Stepper::new(machine);
    let cost = stepper.step_cost();
    let mut result = PathEnumeration::default();
    let mut nodes: u64 = 0;
    // Depth-first stack; children are pushed in reverse so that the
    // canonically first branch is expanded first.
    let mut stack: Vec<(Config, Vec<Sym>, Rational, u64)> =
        vec![(stepper.initial(), Vec::new(), Rational::one(), 0)];
    while let Some((config, emitted, weight, steps)) = stack.pop() {
        if stepper.is_halted(&config) {
            result.halted.push(PathRecord {
                emitted,
                weight,
                steps,
            });
            continue;
        }
        nodes += 1;
        if nodes > budget {
            return Err(SimulateError::BudgetExceeded { budget });
        }
        let branches = stepper.successors(&config)?;
        if branches.is_empty() {
            // Stuck: no branch applies and the machine is not halted.
            continue;
        }
        if steps + cost > max_steps {
            result.live.push(PathRecord {
                emitted,
                weight,
                steps,
            });
            continue;
        }
        for branch in branches.into_iter().rev() {
            let mut emitted2 = emitted.clone();
            if let Some(s) = &branch.emit {
                emitted2.push(s.clone());
            }
            if emitted2.len() > max_len {
                continue;
            }
            stack.push((
                branch.to,
                emitted2,
                weight.clone() * branch.weight,
                steps + cost,
            ));
        }
    }
    Ok(result)
}

/// One row of a [`SemimeasureTable`].
#[derive(Debug, Clone)]
pub struct SemimeasureRow {
    /// The emitted string.
    pub emitted: Vec<Sym>,
    /// Total probability of halting with exactly this string, within
    /// the step bound.
    pub mass: Rational,
    /// Whether the mass is exact rather than a lower bound — true when
    /// no still-live path could add to it.
    pub exact: bool,
}

/// The machine's output distribution up to a length and step bound:
/// for each string, the probability of halting with exactly that
/// string.  Masses are exact lower bounds that become exact values
/// when no live path can still contribute.
#[derive(Debug, Clone)]
pub struct SemimeasureTable {
    pub max_len: usize,
    pub max_steps: u64,
    /// Rows with positive mass, sorted by length then lexicographically.
    pub rows: Vec<SemimeasureRow>,
    /// Emitted strings of paths still running when the bound was hit.
    /// A string's mass is exact iff none of these is a prefix of it.
    pub live: BTreeSet<Vec<Sym>>,
}

impl SemimeasureTable {
    /// The accumulated mass for `emitted` (zero if absent).
    pub fn mass_of(&self, emitted: &[Sym]) -> Rational {
        self.rows
            .iter()
            .find(|r| r.emitted == emitted)
            .map(|r| r.mass.clone())
            .unwrap_or_else(Rational::zero)
    }

    /// Whether the mass for `emitted` is exact.  Strings longer than
    /// the table's length bound are never exact: the walk discarded
    /// them without tracking their continuations.
    pub fn is_exact(&self, emitted: &[Sym]) -> bool {
        if emitted.len() > self.max_len {
            return false;
        }
        !self.live.iter().any(|l| emitted.starts_with(l))
    }

    /// Sum of all row masses: the probability of halting within the
    /// step bound with a string no longer than the length bound.
    pub fn total_mass(&self) -> Rational {
        self.rows
            .iter()
            .map(|r| r.mass.clone())
            .fold(Rational::zero(), |a, b| a + b)
    }
}

fn sort_length_then_lex(rows: &mut [SemimeasureRow]) {
    rows.sort_by(|a, b| {
        a.emitted
            .len()
            .cmp(&b.emitted.len())
            .then_with(|| a.emitted.cmp(&b.emitted))
    });
}

/// Computes the machine's output distribution up to `max_len` emitted
/// symbols and `max_steps` raw steps.
///
/// The walk is breadth-first and merges all paths sharing both a
/// configuration and an emitted string, so machines whose path tree is
/// exponential but whose configuration graph is small stay cheap.
/// Layers are synchronised on step count, which keeps the merge sound:
/// everything merged has consumed the same number of steps.
pub fn semimeasure(
    machine: &Machine,
    max_len: usize,
    max_steps: u64,
    budget: u64,
) -> Result<SemimeasureTable, SimulateError> {
    let stepper = Stepper::new(machine);
    let cost = stepper.step_cost();
    let layers = max_steps / cost;
    let mut frontier: BTreeMap<(Config, Vec<Sym>), Rational> = BTreeMap::new();
    frontier.insert((stepper.initial(), Vec::new()), Rational::one());
    let mut halted: BTreeMap<Vec<Sym>, Rational> = BTreeMap::new();
    let mut nodes: u64 = 0;
    for _ in 0..layers {
        if frontier.is_empty() {
            break;
        }
        let mut next: BTreeMap<(Config, Vec<Sym>), Rational> = BTreeMap::new();
        for ((config, emitted), mass) in frontier {
            if stepper.is_halted(&config) {
                *halted.entry(emitted).or_insert_with(Rational::zero) += mass;
                continue;
            }
            nodes += 1;
            if nodes > budget {
                return Err(SimulateError::BudgetExceeded { budget });
            }
            for branch in stepper.successors(&config)? {
                let mut emitted2 = emitted.clone();
                if let Some(s) = &branch.emit {
                    emitted2.push(s.clone());
                }
                if emitted2.len() > max_len {
                    continue;
                }
                *next
                    .entry((branch.to, emitted2))
                    .or_insert_with(Rational::zero) += mass.clone() * branch.weight;
            }
        }
        frontier = next;
    }
    let mut live = BTreeSet::new();
    for ((config, emitted), mass) in frontier {
        if stepper.is_halted(&config) {
            *halted.entry(emitted).or_insert_with(Rational::zero) += mass;
        } else if !stepper.successors(&config)?.is_empty() {
            live.insert(emitted);
        }
    }
    let mut rows: Vec<SemimeasureRow> = halted
        .into_iter()
        .filter(|(_, mass)| !mass.is_zero())
        .map(|(emitted, mass)| SemimeasureRow {
            exact: !live.iter().any(|l| emitted.starts_with(&l[..])),
            emitted,
            mass,
        })
        .collect();
    sort_length_then_lex(&mut rows);
    Ok(SemimeasureTable {
        max_len,
        max_steps,
        rows,
        live,
    })
}

/// The probability of halting within `max_steps` raw steps, over all
/// emitted strings of any length.  Monotone in `max_steps` and never
/// greater than one.
pub fn halting_mass(
    machine: &Machine,
    max_steps: u64,
    budget: u64,
) -> Result<Rational, SimulateError> {
    let stepper = Stepper::new(machine);
    let cost = stepper.step_cost();
    let layers = max_steps / cost;
    let mut frontier: BTreeMap<Config, Rational> = BTreeMap::new();
    frontier.insert(stepper.initial(), Rational::one());
    let mut mass = Rational::zero();
    let mut nodes: u64 = 0;
    for _ in 0..layers {
        if frontier.is_empty() {
            break;
        }
        let mut next: BTreeMap<Config, Rational> = BTreeMap::new();
        for (config, w) in frontier {
            if stepper.is_halted(&config) {
                mass += w;
                continue;
            }
            nodes += 1;
            if nodes > budget {
                return Err(SimulateError::BudgetExceeded { budget });
            }
            for branch in stepper.successors(&config)? {
                *next.entry(branch.to).or_insert_with(Rational::zero) +=
                    w.clone() * branch.weight;
            }
        }
        frontier = next;
    }
    for (config, w) in frontier {
        if stepper.is_halted(&config) {
            mass += w;
        }
    }
    Ok(mass)
}

/// The result of one sampled run.
#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord)]
pub enum SampleOutcome {
    /// The run halted; this is the emitted string.
    Halted(Vec<Sym>),
    /// The run was cut off: it hit the step bound, got stuck, or fell
    /// into the dead zone left by branches whose guards did not apply.
    Cutoff,
}

/// Aggregated counts over a batch of sampled runs.
#[derive(Debug, Clone, Default)]
pub struct SampleSummary {
    /// For each emitted string, how many runs halted with it.
    pub counts: BTreeMap<Vec<Sym>, u64>,
    /// Runs that were cut off rather than halting.
    pub cutoffs: u64,
    /// Total number of runs.
    pub n: u64,
}

/// A buffered bit source over a seeded generator.  Only raw bits are
/// consumed; all probability arithmetic stays rational.
struct BitSource {
    rng: ChaCha8Rng,
    word: u32,
    left: u8,
}

impl BitSource {
    fn new(seed: u64) -> Self {
        BitSource {
            rng: ChaCha8Rng::seed_from_u64(seed),
            word: 0,
            left: 0,
        }
    }

    fn next_bit(&mut self) -> bool {
        if self.left == 0 {
            self.word = self.rng.next_u32();
            self.left = 32;
        }
        let bit = self.word & 1 == 1;
        self.word >>= 1;
        self.left -= 1;
        bit
    }
}

/// Picks an index with probability exactly `weights[i]` by bisecting
/// the unit interval with random bits: the interval is halved until it
/// fits inside one cumulative-weight cell.  Returns `None` when the
/// draw lands beyond the total weight (the dead zone of a
/// configuration whose enabled branches sum below one).
fn pick_weighted(bits: &mut BitSource, weights: &[Rational]) -> Option<usize> {
    let mut cums = Vec::with_capacity(weights.len());
    let mut running = Rational::zero();
    for w in weights {
        running += w.clone();
        cums.push(running.clone());
    }
    let total = cums.last().cloned().unwrap_or_else(Rational::zero);
    let mut lo = Rational::zero();
    let mut hi = Rational::one();
    let half = Rational::new(1.into(), 2.into());
    loop {
        let mut prev = Rational::zero();
        for (i, cum) in cums.iter().enumerate() {
            if lo >= prev && hi <= *cum {
                return Some(i);
            }
            prev = cum.clone();
        }
        if lo >= total {
            return None;
        }
        let mid = (lo.clone() + hi.clone()) * half.clone();
        if bits.next_bit() {
            lo = mid;
        } else {
            hi = mid;
        }
    }
}

/// Draws one run with the given seed, following branches chosen by
/// exact dyadic bisection.  The same seed always reproduces the same
/// run.
pub fn sample_one(
    machine: &Machine,
    seed: u64,
    max_steps: u64,
) -> Result<SampleOutcome, SimulateError> {
    let stepper = Stepper::new(machine);
    sample_with(&stepper, seed, max_steps)
}

fn sample_with(
    stepper: &Stepper<'_>,
    seed: u64,
    max_steps: u64,
) -> Result<SampleOutcome, SimulateError> {
    let cost = stepper.step_cost();
    let mut bits = BitSource::new(seed);
    let mut config = stepper.initial();
    let mut emitted = Vec::new();
    let mut steps: u64 = 0;
    loop {
        if stepper.is_halted(&config) {
            return Ok(SampleOutcome::Halted(emitted));
        }
        if steps + cost > max_steps {
            return Ok(SampleOutcome::Cutoff);
        }
        let branches = stepper.successors(&config)?;
        if branches.is_empty() {
            return Ok(SampleOutcome::Cutoff);
        }
        let weights: Vec<Rational> = branches.iter().map(|b| b.weight.clone()).collect();
        let Some(i) = pick_weighted(&mut bits, &weights) else {
            return Ok(SampleOutcome::Cutoff);
        };
        let branch = &branches[i];
        if let Some(s) = &branch.emit {
            emitted.push(s.clone());
        }
        config = branch.to.clone();
        steps += cost;
    }
}

/// Draws `n` runs with seeds `base_seed`, `base_seed + 1`, … and
/// aggregates the outcomes.  Seeding per run keeps the batch
/// reproducible and each run independent of how many precede it.
pub fn sample_many(
    machine: &Machine,
    base_seed: u64,
    n: u64,
    max_steps: u64,
) -> Result<SampleSummary, SimulateError> {
    let stepper = Stepper::new(machine);
    let mut summary = SampleSummary {
        n,
        ..SampleSummary::default()
    };
    for i in 0..n {
        match sample_with(&stepper, base_seed.wrapping_add(i), max_steps)? {
            SampleOutcome::Halted(emitted) => {
                *summary.counts.entry(emitted).or_insert(0) += 1;
            }
            SampleOutcome::Cutoff => summary.cutoffs += 1,
        }
    }
    Ok(summary)
}

/// Renders an emitted string for display: symbols concatenated, with
/// the empty string shown as the empty-output token.
pub fn emitted_to_string(emitted: &[Sym]) -> String {
    if emitted.is_empty() {
        crate::machines::EPSILON_TOKEN.to_string()
    } else {
        emitted
            .iter()
            .map(|s| s.as_str())
            .collect::<Vec<_>>()
            .join("")
    }
}
