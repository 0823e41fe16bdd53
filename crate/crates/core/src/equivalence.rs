//! Checks that two machines define the same output distribution, at
//! three strengths:
//!
//! * [`check_weak`] compares bounded output-distribution tables row by
//!   row.  A row can only refute equality when the compared masses are
//!   known exactly (or a lower bound alone already exceeds an exact
//!   value on the other side), so the verdict is evidence-based: it
//!   never reports a mismatch that longer bounds could retract.
//! * [`check_strong_multiset`] compares the multiset of path weights
//!   behind every completely-resolved string.  This detects
//!   transformations that preserve the distribution but merge or split
//!   computation paths.
//! * [`check_statistical`] compares seeded sample batches by exact
//!   total-variation distance over outcome counts, cutoffs binned
//!   separately.  It scales to machines too large to enumerate but
//!   only ever gives statistical evidence.
//!
//! [`check_ptm_path_law`] is a single-machine law: every halting path
//! of a coin-flip machine must weigh exactly two to the minus its
//! length.

use std::collections::{BTreeMap, BTreeSet, VecDeque};

use num::{One, Zero};

use crate::error::SimulateError;
use crate::machines::{Machine, Sym, EOS_TOKEN, EPSILON_TOKEN};
use crate::numerics::{is_dyadic, rat_to_string, Rational};
use crate::simulate::{
    enumerate_paths, sample_many, semimeasure, Branch, Config, PathEnumeration, SemimeasureTable,
    Stepper,
};

/// Overall outcome of an equivalence check.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Verdict {
    /// No refuting evidence within the bounds.
    Equal,
    /// A provable difference was found.
    Mismatch,
    /// The walk hit its node budget before producing evidence either
    /// way.
    Inconclusive,
}

/// How one compared row came out.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum RowStatus {
    /// Both sides pin this row down and they agree.
    Agree,
    /// The sides provably differ on this row.
    Mismatch,
    /// At least one side only has a lower bound here, and the bounds
    /// do not contradict each other.
    Inconclusive,
}

/// One compared string in a weak check.
#[derive(Debug, Clone)]
pub struct WeakRow {
    pub emitted: Vec<Sym>,
    pub left: Rational,
    pub right: Rational,
    pub left_exact: bool,
    pub right_exact: bool,
    pub status: RowStatus,
}

/// The result of a weak (distribution-level) comparison.
#[derive(Debug, Clone)]
pub struct WeakReport {
    pub verdict: Verdict,
    pub rows: Vec<WeakRow>,
    /// True when a side's walk was cut short by the node budget.
    pub budget_hit: bool,
}

fn weak_row_status(row: &WeakRow) -> RowStatus {
    if row.left_exact && row.right_exact {
        if row.left == row.right {
            RowStatus::Agree
        } else {
            RowStatus::Mismatch
        }
    } else if row.left_exact && row.right > row.left {
        // The right mass can only grow; it already exceeds an exact
        // left value.
        RowStatus::Mismatch
    } else if row.right_exact && row.left > row.right {
        RowStatus::Mismatch
    } else {
        RowStatus::Inconclusive
    }
}

fn union_of_row_strings(a: &SemimeasureTable, b: &SemimeasureTable) -> BTreeSet<Vec<Sym>> {
    let mut set = BTreeSet::new();
    for r in &a.rows {
        set.insert(r.emitted.clone());
    }
    for r in &b.rows {
        set.insert(r.emitted.clone());
    }
    set
}

/// Compares the two machines' output distributions up to `max_len`
/// emitted symbols, giving each side `max_steps` raw steps.
///
/// The verdict is `Mismatch` when some string's mass provably differs,
/// `Inconclusive` when a walk ran out of budget, and `Equal`
/// otherwise.  `Equal` asserts exactly this: no refuting evidence
/// within the bounds; the rows carry the per-string exactness flags
/// that say how much was pinned down.
pub fn check_weak(
    left: &Machine,
    right: &Machine,
    max_len: usize,
    max_steps: u64,
    budget: u64,
) -> Result<WeakReport, SimulateError> {
    let lt = match semimeasure(left, max_len, max_steps, budget) {
        Ok(t) => t,
        Err(SimulateError::BudgetExceeded { .. }) => {
            return Ok(WeakReport {
                verdict: Verdict::Inconclusive,
                rows: Vec::new(),
                budget_hit: true,
            })
        }
        Err(e) => return Err(e),
    };
    let rt = match semimeasure(right, max_len, max_steps, budget) {
        Ok(t) => t,
        Err(SimulateError::BudgetExceeded { .. }) => {
            return Ok(WeakReport {
                verdict: Verdict::Inconclusive,
                rows: Vec::new(),
                budget_hit: true,
            })
        }
        Err(e) => return Err(e),
    };
    let mut rows = Vec::new();
    for emitted in union_of_row_strings(&lt, &rt) {
        let mut row = WeakRow {
            left: lt.mass_of(&emitted),
            right: rt.mass_of(&emitted),
            left_exact: lt.is_exact(&emitted),
            right_exact: rt.is_exact(&emitted),
            emitted,
            status: RowStatus::Agree,
        };
        row.status = weak_row_status(&row);
        rows.push(row);
    }
    let verdict = if rows.iter().any(|r| r.status == RowStatus::Mismatch) {
        Verdict::Mismatch
    } else {
        Verdict::Equal
    };
    Ok(WeakReport {
        verdict,
        rows,
        budget_hit: false,
    })
}

/// A multiset of path weights: weight value to number of paths.
pub type WeightMultiset = BTreeMap<Rational, u64>;

/// One compared string in a strong check.
#[derive(Debug, Clone)]
pub struct StrongRow {
    pub emitted: Vec<Sym>,
    pub left: WeightMultiset,
    pub right: WeightMultiset,
    /// Whether both sides have fully resolved this string: no live
    /// path on either side could still halt with it.
    pub complete: bool,
    pub status: RowStatus,
}

/// The result of a strong (path-multiset) comparison.
#[derive(Debug, Clone)]
pub struct StrongReport {
    pub verdict: Verdict,
    pub rows: Vec<StrongRow>,
    pub budget_hit: bool,
}

fn multisets_by_string(paths: &PathEnumeration) -> BTreeMap<Vec<Sym>, WeightMultiset> {
    let mut out: BTreeMap<Vec<Sym>, WeightMultiset> = BTreeMap::new();
    for p in &paths.halted {
        *out.entry(p.emitted.clone())
            .or_default()
            .entry(p.weight.clone())
            .or_insert(0) += 1;
    }
    out
}

fn is_resolved(emitted: &[Sym], paths: &PathEnumeration) -> bool {
    !paths.live.iter().any(|p| emitted.starts_with(&p.emitted[..]))
}

/// Compares the two machines path by path: for every string that both
/// sides have completely resolved, the multiset of halting-path
/// weights must agree.  This is preserved by transformations that map
/// each source path to exactly one equal-weight target path, and
/// refuted by ones that merge, split, or reweight paths even when the
/// summed distribution stays the same.
///
/// The step bound is per side, because a transformation may spend
/// several target steps simulating one source step.
pub fn check_strong_multiset(
    left: &Machine,
    right: &Machine,
    max_len: usize,
    left_steps: u64,
    right_steps: u64,
    budget: u64,
) -> Result<StrongReport, SimulateError> {
    let le = match enumerate_paths(left, max_len, left_steps, budget) {
        Ok(e) => e,
        Err(SimulateError::BudgetExceeded { .. }) => {
            return Ok(StrongReport {
                verdict: Verdict::Inconclusive,
                rows: Vec::new(),
                budget_hit: true,
            })
        }
        Err(e) => return Err(e),
    };
    let re = match enumerate_paths(right, max_len, right_steps, budget) {
        Ok(e) => e,
        Err(SimulateError::BudgetExceeded { .. }) => {
            return Ok(StrongReport {
                verdict: Verdict::Inconclusive,
                rows: Vec::new(),
                budget_hit: true,
            })
        }
        Err(e) => return Err(e),
    };
    let lm = multisets_by_string(&le);
    let rm = multisets_by_string(&re);
    let mut strings: BTreeSet<Vec<Sym>> = BTreeSet::new();
    strings.extend(lm.keys().cloned());
    strings.extend(rm.keys().cloned());
    let mut rows = Vec::new();
    for emitted in strings {
        let l = lm.get(&emitted).cloned().unwrap_or_default();
        let r = rm.get(&emitted).cloned().unwrap_or_default();
        let complete = is_resolved(&emitted, &le) && is_resolved(&emitted, &re);
        let status = if !complete {
            RowStatus::Inconclusive
        } else if l == r {
            RowStatus::Agree
        } else {
            RowStatus::Mismatch
        };
        rows.push(StrongRow {
            emitted,
            left: l,
            right: r,
            complete,
            status,
        });
    }
    let verdict = if rows.iter().any(|r| r.status == RowStatus::Mismatch) {
        Verdict::Mismatch
    } else {
        Verdict::Equal
    };
    Ok(StrongReport {
        verdict,
        rows,
        budget_hit: false,
    })
}

/// One outcome bin in a statistical comparison.
#[derive(Debug, Clone)]
pub struct StatRow {
    /// The emitted string, or `None` for the cutoff bin.
    pub outcome: Option<Vec<Sym>>,
    pub left_count: u64,
    pub right_count: u64,
}

/// The result of a sampled comparison.
#[derive(Debug, Clone)]
pub struct StatReport {
    pub verdict: Verdict,
    /// Exact total-variation distance between the two empirical
    /// distributions, cutoff bin included.
    pub distance: Rational,
    pub tolerance: Rational,
    pub n: u64,
    pub rows: Vec<StatRow>,
}

/// Draws `n` seeded runs from each machine — the same seed sequence on
/// both sides — and compares the empirical outcome distributions by
/// exact total-variation distance.  Runs that were cut off (step
/// bound, stuck, or dead mass) land in their own bin rather than being
/// conflated with any emitted string.
///
/// The verdict is statistical evidence only: `Equal` means the
/// distance stayed within `tolerance`.
pub fn check_statistical(
    left: &Machine,
    right: &Machine,
    base_seed: u64,
    n: u64,
    max_steps: u64,
    tolerance: &Rational,
) -> Result<StatReport, SimulateError> {
    let ls = sample_many(left, base_seed, n, max_steps)?;
    let rs = sample_many(right, base_seed, n, max_steps)?;
    let mut outcomes: BTreeSet<Vec<Sym>> = BTreeSet::new();
    outcomes.extend(ls.counts.keys().cloned());
    outcomes.extend(rs.counts.keys().cloned());
    let mut rows = Vec::new();
    let mut abs_diff_sum = Rational::zero();
    let nn = Rational::from_integer(n.into());
    let mut add = |l: u64, r: u64, outcome: Option<Vec<Sym>>, rows: &mut Vec<StatRow>| {
        let diff = Rational::from_integer(l.into()) - Rational::from_integer(r.into());
        abs_diff_sum += if diff < Rational::zero() { -diff } else { diff };
        rows.push(StatRow {
            outcome,
            left_count: l,
            right_count: r,
        });
    };
    for outcome in outcomes {
        let l = *ls.counts.get(&outcome).unwrap_or(&0);
        let r = *rs.counts.get(&outcome).unwrap_or(&0);
        add(l, r, Some(outcome), &mut rows);
    }
    add(ls.cutoffs, rs.cutoffs, None, &mut rows);
    let distance = if n == 0 {
        Rational::zero()
    } else {
        abs_diff_sum / (Rational::from_integer(2.into()) * nn)
    };
    let verdict = if distance <= *tolerance {
        Verdict::Equal
    } else {
        Verdict::Mismatch
    };
    Ok(StatReport {
        verdict,
        distance,
        tolerance: tolerance.clone(),
        n,
        rows,
    })
}

/// One path that broke the coin-flip weight law.
#[derive(Debug, Clone)]
pub struct PathLawViolation {
    pub emitted: Vec<Sym>,
    pub weight: Rational,
    pub steps: u64,
}

/// The result of checking the coin-flip path law.
#[derive(Debug, Clone)]
pub struct PathLawReport {
    pub ok: bool,
    /// Halting paths examined.
    pub checked: usize,
    pub violations: Vec<PathLawViolation>,
    /// Whether every examined halting path had a dyadic weight (a
    /// consequence of the law, recorded separately for visibility).
    pub all_dyadic: bool,
}

/// Checks that every halting path of a coin-flip machine weighs
/// exactly two to the minus its step count — the law that makes such
/// machines a normal form: all randomness is spent one fair bit per
/// step, with no shortcut through weighted transitions.
pub fn check_ptm_path_law(
    machine: &Machine,
    max_len: usize,
    max_steps: u64,
    budget: u64,
) -> Result<PathLawReport, SimulateError> {
    if !matches!(machine, Machine::Ptm(_)) {
        return Err(SimulateError::UnsupportedKind {
            operation: "the coin-flip path law",
            kind: machine.kind().as_str(),
        });
    }
    let e = enumerate_paths(machine, max_len, max_steps, budget)?;
    let mut violations = Vec::new();
    let mut all_dyadic = true;
    for p in &e.halted {
        let expected = Rational::new(1.into(), num::BigInt::one() << (p.steps as usize));
        if p.weight != expected {
            violations.push(PathLawViolation {
                emitted: p.emitted.clone(),
                weight: p.weight.clone(),
                steps: p.steps,
            });
        }
        if !is_dyadic(&p.weight) {
            all_dyadic = false;
        }
    }
    Ok(PathLawReport {
        ok: violations.is_empty(),
        checked: e.halted.len(),
        violations,
        all_dyadic,
    })
}

/// Result of walking a compiled network beside the two-stack machine
/// it was built from, pairing configurations step for step.
#[derive(Debug, Clone)]
pub struct LockstepReport {
    /// True when every visited pair decoded to the right configuration
    /// and scored the same per-token distribution.
    pub ok: bool,
    /// Number of (machine configuration, hidden state) pairs checked.
    pub pairs: u64,
    /// The first divergence, plus remarks about early stops.
    pub notes: Vec<String>,
}

/// What a single emission step produces, with silence and the end of
/// the sequence as explicit outcomes so distributions can be compared
/// across the two machine kinds.
#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord)]
enum StepTok {
    Silent,
    End,
    Sym(Sym),
}

impl StepTok {
    fn label(&self) -> String {
        match self {
            StepTok::Silent => EPSILON_TOKEN.to_string(),
            StepTok::End => EOS_TOKEN.to_string(),
            StepTok::Sym(s) => s.to_string(),
        }
    }
}

fn step_dist_desc(d: &BTreeMap<StepTok, Rational>) -> String {
    let parts: Vec<String> = d
        .iter()
        .map(|(t, w)| format!("{}:{}", t.label(), rat_to_string(w)))
        .collect();
    format!("{{{}}}", parts.join(", "))
}

/// The outcome a branch resolves on. Only a network emits the end of
/// the sequence as a step — the branch into the absorbing halted
/// network configuration. A source machine that reaches its halt
/// state silently has taken an ordinary silent step; its halt shows
/// up one pair later, where the network must score the end alone.
fn step_token(b: &Branch) -> StepTok {
    match &b.emit {
        Some(s) => StepTok::Sym(s.clone()),
        None if matches!(&b.to, Config::Net { halted: true, .. }) => StepTok::End,
        None => StepTok::Silent,
    }
}

/// Per-token weight of a branch list.
fn step_marginal(branches: &[Branch]) -> BTreeMap<StepTok, Rational> {
    let mut out: BTreeMap<StepTok, Rational> = BTreeMap::new();
    for b in branches {
        let slot = out.entry(step_token(b)).or_insert_with(Rational::zero);
        *slot += &b.weight;
    }
    out
}

/// Walks a compiled network beside its source machine, one emission
/// block per source transition, and checks two things at every visited
/// pair: the network's configuration columns read back exactly the
/// machine's (stack top, state) pair as a one-hot, and the network's
/// emission scores equal the machine's per-token transition weights.
/// Because both machines resolve a step from its emitted token, the
/// walk pairs successors token by token and explores the whole tree to
/// `max_blocks` emitted tokens deep, visiting at most `budget` pairs.
///
/// Where the machine halts, the network must score the end of the
/// sequence alone. Where the machine is stuck live (no rule, or a
/// second-stack guard that can never fire), the network must score the
/// key's raw outgoing weights — silence alone for a missing rule — and
/// the walk notes the stop rather than descending into the dark run.
///
/// The first divergence sets `ok` to false and stops the walk. Scores
/// that do not sum to one surface as a simulation error instead.
pub fn rnn_lockstep(
    source: &Machine,
    net: &Machine,
    max_blocks: u64,
    budget: u64,
) -> Result<LockstepReport, SimulateError> {
    let Machine::TwoPda(pda) = source else {
        return Err(SimulateError::UnsupportedKind {
            operation: "lockstep decoding",
            kind: source.kind().as_str(),
        });
    };
    let Machine::Rnn(rnn) = net else {
        return Err(SimulateError::UnsupportedKind {
            operation: "lockstep decoding",
            kind: net.kind().as_str(),
        });
    };
    let mut report = LockstepReport {
        ok: true,
        pairs: 0,
        notes: Vec::new(),
    };
    if !pda.is_symbol_deterministic() {
        report.ok = false;
        report.notes.push(
            "the machine is not symbol-deterministic, so steps cannot be paired by token"
                .to_string(),
        );
        return Ok(report);
    }
    let ms = Stepper::new(source);
    let ns = Stepper::new(net);
    let mut queue: VecDeque<(Config, Config, u64)> = VecDeque::new();
    queue.push_back((ms.initial(), ns.initial(), 0));
    'walk: while let Some((mc, nc, depth)) = queue.pop_front() {
        if report.pairs >= budget {
            report
                .notes
                .push(format!("stopped after {} pairs: budget reached", report.pairs));
            break;
        }
        report.pairs += 1;
        let Config::Stacks { state, stack1, .. } = &mc else {
            report.ok = false;
            report.notes.push("machine side left stack form".to_string());
            break;
        };
        let Config::Net { h, .. } = &nc else {
            report.ok = false;
            report.notes.push("network side left hidden form".to_string());
            break;
        };
        let top = stack1.last().cloned().unwrap_or_else(Sym::bottom);

        // The exposed configuration must read back as a one-hot.
        match rnn.layout.config_cols.get(&(top.clone(), state.clone())) {
            None => {
                report.ok = false;
                report.notes.push(format!(
                    "no configuration column decodes ({top}, {state})"
                ));
                break;
            }
            Some(want) => {
                for ((t, q), col) in &rnn.layout.config_cols {
                    let expect = if col == want {
                        Rational::one()
                    } else {
                        Rational::zero()
                    };
                    if h[*col] != expect {
                        report.ok = false;
                        report.notes.push(format!(
                            "configuration column for ({t}, {q}) reads {} while the machine sits at ({top}, {state})",
                            rat_to_string(&h[*col]),
                        ));
                        break 'walk;
                    }
                }
            }
        }
        if let Some(oc) = rnn.layout.off_col {
            if !h[oc].is_zero() {
                report.ok = false;
                report.notes.push(format!(
                    "the dark column is {} at a live configuration ({top}, {state})",
                    rat_to_string(&h[oc]),
                ));
                break;
            }
        }

        let ndist = step_marginal(&ns.successors(&nc)?);
        if ms.is_halted(&mc) {
            let want: BTreeMap<StepTok, Rational> =
                [(StepTok::End, Rational::one())].into_iter().collect();
            if ndist != want {
                report.ok = false;
                report.notes.push(format!(
                    "at the halted configuration ({top}, {state}) the network scores {}, expected the end of the sequence alone",
                    step_dist_desc(&ndist),
                ));
                break;
            }
            continue;
        }
        let mb = ms.successors(&mc)?;
        if mb.is_empty() {
            // Stuck live: the network still scores the key's raw
            // weights (it cannot see that a guard never fires), and
            // every branch from here runs dark. Check the scores
            // against the raw rules and stop descending.
            let mut want: BTreeMap<StepTok, Rational> = BTreeMap::new();
            if let Some(legs) = pda.delta.get(&(state.clone(), top.clone())) {
                for leg in legs {
                    let tok = match &leg.emit {
                        Some(s) => StepTok::Sym(s.clone()),
                        None => StepTok::Silent,
                    };
                    let slot = want.entry(tok).or_insert_with(Rational::zero);
                    *slot += &leg.weight;
                }
            }
            if want.is_empty() {
                want.insert(StepTok::Silent, Rational::one());
            }
            if ndist != want {
                report.ok = false;
                report.notes.push(format!(
                    "at the stuck configuration ({top}, {state}) the network scores {}, expected {}",
                    step_dist_desc(&ndist),
                    step_dist_desc(&want),
                ));
                break;
            }
            report.notes.push(format!(
                "stopped at the stuck configuration ({top}, {state}): the machine has no enabled rule there, and the network runs dark"
            ));
            continue;
        }
        let mdist = step_marginal(&mb);
        if mdist != ndist {
            report.ok = false;
            report.notes.push(format!(
                "distribution mismatch at ({top}, {state}): machine {} vs network {}",
                step_dist_desc(&mdist),
                step_dist_desc(&ndist),
            ));
            break;
        }
        if depth + 1 > max_blocks {
            continue;
        }
        // Pair successors by the token they resolve on. Branch lists
        // are token-unique on both sides here: the machine is
        // symbol-deterministic and the network folds scores per token.
        let nb = ns.successors(&nc)?;
        for b in &mb {
            let tok = step_token(b);
            if let Some(x) = nb.iter().find(|x| step_token(x) == tok) {
                queue.push_back((b.to.clone(), x.to.clone(), depth + 1));
            }
        }
    }
    Ok(report)
}
