//! Acceptance suite: one test per shipped claim, each printing a
//! single `criterion N PASS` line (run with `--nocapture` to see them;
//! the test harness lines themselves double as the pass/fail record).
//!
//! Everything here goes through the public API only, with fixed seeds
//! wherever machines or stacks are drawn at random.

use std::collections::BTreeMap;
use std::time::Instant;

use num::{One, Zero};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use ptmc::equivalence::{
    check_ptm_path_law, check_strong_multiset, check_weak, rnn_lockstep, RowStatus, Verdict,
};
use ptmc::error::TransformError;
use ptmc::format::parse_machine;
use ptmc::machines::{
    Machine, Move, OutTok, PdaTrans, Qptm, QptmTrans, State, Sym, TwoPda,
};
use ptmc::numerics::{
    is_dyadic, rat, stack_encode, stack_pop_bit, stack_push_bit, stack_top_bit, Rational,
};
use ptmc::simulate::{
    enumerate_paths, sample_many, semimeasure, Config, Stepper, DEFAULT_NODE_BUDGET,
};
use ptmc::transforms::{binarize, compile_rnn, dyadicize, qptm_to_2pda, twopda_to_qptm};

fn fixture(name: &str) -> Machine {
    let path = format!(
        "{}/../../fixtures/{name}.machine",
        env!("CARGO_MANIFEST_DIR")
    );
    let text = std::fs::read_to_string(&path).unwrap();
    parse_machine(&text).unwrap()
}

/// Every shipped two-stack fixture that the network compiler accepts,
/// with its name.
fn compiled_fixtures() -> Vec<(String, TwoPda, ptmc::machines::RnnLm)> {
    let names = [
        "m_abn",
        "m_coin",
        "m_fan",
        "m_full",
        "m_geo",
        "m_loop",
        "m_nondet",
        "m_ptm2",
        "m_rt",
        "m_six_a",
        "m_six_b",
        "m_six_c",
        "m_tape",
        "m_third",
        "m_twostack",
    ];
    let mut out = Vec::new();
    for name in names {
        let m = fixture(name);
        let Machine::TwoPda(p) = m else { continue };
        if !p.is_symbol_deterministic() {
            continue;
        }
        if let Ok((net, _)) = compile_rnn(&p) {
            out.push((name.to_string(), p, net));
        }
    }
    out
}

// ---------------------------------------------------------------- random
// machine generators (all seeded; no floating point anywhere)

/// A random symbol-deterministic two-stack machine: at most 4 states
/// (halt included), at most 3 stack symbols, at most 3 output symbols.
/// Stack 2 is left untouched; the shipped fixtures cover guards.
fn random_sigma_det_2pda(seed: u64) -> TwoPda {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let n_states = rng.gen_range(1..=3usize);
    let n_gamma = rng.gen_range(0..=3usize);
    let n_sigma = rng.gen_range(1..=3usize);
    let gamma_pool = ["A", "B", "C"];
    let sigma_pool = ["a", "b", "c"];
    let states: Vec<State> = (0..n_states).map(|i| State::new(format!("q{i}"))).collect();
    let halt = State::new("qf");
    let gamma: Vec<Sym> = gamma_pool[..n_gamma].iter().copied().map(Sym::new).collect();
    let sigma: Vec<Sym> = sigma_pool[..n_sigma].iter().copied().map(Sym::new).collect();

    // Emission pool: silence plus each output symbol, at most one leg
    // per entry, which makes the machine symbol-deterministic by
    // construction.
    let mut delta: BTreeMap<(State, Sym), Vec<PdaTrans>> = BTreeMap::new();
    let mut tops: Vec<Sym> = vec![Sym::bottom()];
    tops.extend(gamma.iter().cloned());
    for q in &states {
        for top in &tops {
            let n_legs = rng.gen_range(1..=2usize);
            let mut emit_ids: Vec<usize> = (0..=n_sigma).collect();
            // Partial shuffle: pick distinct emission slots.
            for i in 0..n_legs {
                let j = rng.gen_range(i..emit_ids.len());
                emit_ids.swap(i, j);
            }
            let weights: Vec<Rational> = match n_legs {
                1 => vec![rat(1, 1)],
                _ => match rng.gen_range(0..3u8) {
                    0 => vec![rat(1, 2), rat(1, 2)],
                    1 => vec![rat(1, 3), rat(2, 3)],
                    _ => vec![rat(3, 4), rat(1, 4)],
                },
            };
            let mut legs = Vec::new();
            for (i, w) in weights.iter().enumerate() {
                let emit = if emit_ids[i] == 0 {
                    None
                } else {
                    Some(sigma[emit_ids[i] - 1].clone())
                };
                let pop1 = if !top.is_bottom() && rng.gen_range(0..2u8) == 0 {
                    Some(top.clone())
                } else {
                    None
                };
                let push1 = if !gamma.is_empty() && rng.gen_range(0..2u8) == 0 {
                    Some(gamma[rng.gen_range(0..gamma.len())].clone())
                } else {
                    None
                };
                let next = if rng.gen_range(0..3u8) == 0 {
                    halt.clone()
                } else {
                    states[rng.gen_range(0..states.len())].clone()
                };
                legs.push(PdaTrans {
                    emit,
                    next,
                    pop1,
                    push1,
                    pop2: None,
                    push2: None,
                    weight: w.clone(),
                });
            }
            delta.insert((q.clone(), top.clone()), legs);
        }
    }
    // Make sure halting is reachable at all: if no leg targets the
    // halt state, retarget the last one.
    if !delta.values().flatten().any(|t| t.next == halt) {
        let key = delta.keys().next_back().unwrap().clone();
        delta.get_mut(&key).unwrap().last_mut().unwrap().next = halt.clone();
    }
    let mut state_set: std::collections::BTreeSet<State> = states.into_iter().collect();
    state_set.insert(halt.clone());
    TwoPda {
        sigma: sigma.into_iter().collect(),
        gamma: gamma.into_iter().collect(),
        states: state_set,
        initial: State::new("q0"),
        halt,
        delta,
    }
}

/// A random surely-halting weighted tape machine: at most 3 states
/// (halt included), strictly forward next-state order, head always
/// moving right — so every run halts within two transitions and only
/// the blank is ever scanned.
fn random_forward_qptm(seed: u64, max_fan: usize) -> Qptm {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let n_states = rng.gen_range(1..=2usize);
    let n_sigma = rng.gen_range(1..=2usize);
    let n_gamma = rng.gen_range(0..=2usize);
    let sigma_pool = ["a", "b"];
    let gamma_pool = ["x", "y"];
    let states: Vec<State> = (0..n_states).map(|i| State::new(format!("q{i}"))).collect();
    let halt = State::new("qf");
    let sigma: Vec<Sym> = sigma_pool[..n_sigma].iter().copied().map(Sym::new).collect();
    let gamma: Vec<Sym> = gamma_pool[..n_gamma].iter().copied().map(Sym::new).collect();

    let splits: &[&[(i64, i64)]] = &[
        &[(1, 1)],
        &[(1, 2), (1, 2)],
        &[(1, 3), (2, 3)],
        &[(1, 2), (1, 4), (1, 4)],
        &[(1, 6), (1, 3), (1, 2)],
        &[(1, 4), (1, 4), (1, 4), (1, 4)],
        &[(1, 2), (1, 6), (1, 6), (1, 6)],
        &[(1, 5), (1, 5), (1, 5), (1, 5), (1, 5)],
        &[(1, 6), (1, 6), (1, 6), (1, 4), (1, 4)],
    ];
    let mut delta: BTreeMap<(State, Sym), Vec<QptmTrans>> = BTreeMap::new();
    for (i, q) in states.iter().enumerate() {
        let usable: Vec<&[(i64, i64)]> = splits
            .iter()
            .copied()
            .filter(|s| s.len() <= max_fan)
            .collect();
        let split = usable[rng.gen_range(0..usable.len())];
        let mut legs = Vec::new();
        for (n, d) in split {
            let emit = match rng.gen_range(0..=n_sigma) {
                0 => None,
                k => Some(sigma[k - 1].clone()),
            };
            let write = if !gamma.is_empty() && rng.gen_range(0..2u8) == 0 {
                gamma[rng.gen_range(0..gamma.len())].clone()
            } else {
                Sym::blank()
            };
            let next = if i + 1 < states.len() && rng.gen_range(0..2u8) == 0 {
                states[i + 1].clone()
            } else {
                halt.clone()
            };
            legs.push(QptmTrans {
                emit,
                next,
                write,
                mv: Move::R,
                weight: rat(*n, *d),
            });
        }
        delta.insert((q.clone(), Sym::blank()), legs);
    }
    let mut state_set: std::collections::BTreeSet<State> = states.into_iter().collect();
    state_set.insert(halt.clone());
    Qptm {
        sigma: sigma.into_iter().collect(),
        gamma: gamma.into_iter().collect(),
        states: state_set,
        initial: State::new("q0"),
        halt,
        delta,
    }
}

// ---------------------------------------------------------------- oracles

/// Exact mass by the first emitted symbol after `depth` raw steps:
/// breadth-first over merged configurations, with halted and stuck
/// runs carrying their mass forward unchanged. `None` is the mass
/// that has not emitted anything yet.
fn first_symbol_mass(machine: &Machine, depth: u64) -> BTreeMap<Option<Sym>, Rational> {
    let stepper = Stepper::new(machine);
    let mut frontier: BTreeMap<(Config, Option<Sym>), Rational> = BTreeMap::new();
    frontier.insert((stepper.initial(), None), Rational::one());
    for _ in 0..depth {
        let mut next: BTreeMap<(Config, Option<Sym>), Rational> = BTreeMap::new();
        for ((config, first), mass) in frontier {
            if stepper.is_halted(&config) {
                *next
                    .entry((config, first))
                    .or_insert_with(Rational::zero) += mass;
                continue;
            }
            let branches = stepper.successors(&config).unwrap();
            if branches.is_empty() {
                *next
                    .entry((config, first))
                    .or_insert_with(Rational::zero) += mass;
                continue;
            }
            for b in branches {
                let first2 = first.clone().or_else(|| b.emit.clone());
                *next
                    .entry((b.to, first2))
                    .or_insert_with(Rational::zero) += mass.clone() * &b.weight;
            }
        }
        frontier = next;
    }
    let mut out: BTreeMap<Option<Sym>, Rational> = BTreeMap::new();
    for ((_, first), mass) in frontier {
        *out.entry(first).or_insert_with(Rational::zero) += mass;
    }
    out
}

// ---------------------------------------------------------------- criteria

#[test]
fn criterion_1_network_compilation_preserves_the_distribution() {
    let start = Instant::now();
    let compiled = compiled_fixtures();
    assert!(
        compiled.len() >= 4,
        "want at least 4 shipped two-stack fixtures that compile, have {}",
        compiled.len()
    );
    for (name, pda, net) in &compiled {
        let src = Machine::TwoPda(pda.clone());
        let tgt = Machine::Rnn(net.clone());
        let r = check_weak(&src, &tgt, 4, 48, DEFAULT_NODE_BUDGET).unwrap();
        assert_eq!(r.verdict, Verdict::Equal, "{name} distributions differ");
        assert!(
            r.rows.iter().all(|row| row.status != RowStatus::Mismatch),
            "{name} has a mismatched row"
        );
    }
    let mut random_checked = 0usize;
    for seed in 0..20u64 {
        let pda = random_sigma_det_2pda(1000 + seed);
        assert!(pda.validate().is_ok(), "generator produced an invalid machine");
        assert!(pda.is_symbol_deterministic());
        let (net, report) = compile_rnn(&pda).expect("generated machine must compile");
        assert_eq!(report.pass, "2pda-to-rnn");
        let src = Machine::TwoPda(pda);
        let tgt = Machine::Rnn(net);
        let r = check_weak(&src, &tgt, 4, 48, DEFAULT_NODE_BUDGET).unwrap();
        assert_eq!(r.verdict, Verdict::Equal, "seed {seed} distributions differ");
        random_checked += 1;
    }
    let elapsed = start.elapsed();
    assert!(elapsed.as_secs() < 120, "took {elapsed:?}, budget 2 minutes");
    println!(
        "criterion 1 PASS: {} shipped + {random_checked} random machines compile and stay \
         weakly equal at max-len 4 / 48 raw steps ({elapsed:?})",
        compiled.len()
    );
}

#[test]
fn criterion_2_tape_and_stack_machines_translate_path_for_path() {
    let start = Instant::now();
    // Forward direction: weighted tape machines onto two stacks.
    for name in ["m_third", "m_tape"] {
        let src = fixture(name);
        let Machine::Qptm(q) = &src else { panic!("{name} is not a tape machine") };
        let (pda, _) = qptm_to_2pda(q);
        let tgt = Machine::TwoPda(pda);
        let r = check_strong_multiset(&src, &tgt, 4, 12, 80, DEFAULT_NODE_BUDGET).unwrap();
        assert_eq!(r.verdict, Verdict::Equal, "{name} forward path multisets differ");
        assert!(
            r.rows.iter().any(|row| row.status == RowStatus::Agree),
            "{name}: no string was pinned down on both sides"
        );
    }
    for seed in 0..20u64 {
        let q = random_forward_qptm(2000 + seed, 3);
        assert!(q.validate().is_ok());
        let src = Machine::Qptm(q.clone());
        let (pda, _) = qptm_to_2pda(&q);
        assert!(pda.validate().is_ok());
        let tgt = Machine::TwoPda(pda);
        let r = check_strong_multiset(&src, &tgt, 4, 12, 80, DEFAULT_NODE_BUDGET).unwrap();
        assert_eq!(r.verdict, Verdict::Equal, "seed {seed} forward multisets differ");
        assert!(r.rows.iter().any(|row| row.status == RowStatus::Agree));
    }
    // Backward direction: two-stack machines onto a tape, covering all
    // six transition shapes (push/pop on either side of the head and
    // the end-marker hops exercised by the m_six fixtures).
    for (name, max_len, left, right) in [
        ("m_six_a", 5, 12, 30),
        ("m_six_b", 4, 12, 12),
        ("m_six_c", 6, 12, 40),
        ("m_twostack", 5, 12, 100),
        ("m_geo", 4, 12, 60),
        ("m_rt", 4, 12, 60),
    ] {
        let src = fixture(name);
        let Machine::TwoPda(p) = &src else { panic!("{name} is not a two-stack machine") };
        let (back, _) = twopda_to_qptm(p).unwrap();
        let tgt = Machine::Qptm(back);
        let r =
            check_strong_multiset(&src, &tgt, max_len, left, right, DEFAULT_NODE_BUDGET).unwrap();
        assert_eq!(r.verdict, Verdict::Equal, "{name} backward path multisets differ");
        assert!(
            r.rows.iter().any(|row| row.status == RowStatus::Agree),
            "{name}: no string was pinned down on both sides"
        );
    }
    let elapsed = start.elapsed();
    assert!(elapsed.as_secs() < 120, "took {elapsed:?}, budget 2 minutes");
    println!(
        "criterion 2 PASS: tape machines onto stacks (2 fixtures + 20 random) and stacks back \
         onto a tape (6 fixtures) agree path for path ({elapsed:?})"
    );
}

#[test]
fn criterion_3_binarize_narrows_fans_and_preserves_masses() {
    let mut checked = 0usize;
    let mut widest_input = 0usize;
    let mut check = |q: &Qptm, label: &str| {
        let (b, _) = binarize(q);
        assert!(
            b.delta.values().all(|legs| legs.len() <= 2),
            "{label}: binarize left a key with more than two branches"
        );
        widest_input = widest_input.max(q.delta.values().map(Vec::len).max().unwrap_or(0));
        let src = Machine::Qptm(q.clone());
        let tgt = Machine::Qptm(b);
        let r = check_weak(&src, &tgt, 4, 60, DEFAULT_NODE_BUDGET).unwrap();
        assert_eq!(r.verdict, Verdict::Equal, "{label}: masses changed");
        assert!(
            r.rows.iter().all(|row| row.status == RowStatus::Agree),
            "{label}: a string's mass is not pinned down equal on both sides"
        );
        checked += 1;
    };
    let Machine::Qptm(fan) = fixture("m_fan") else { panic!() };
    assert_eq!(fan.delta.values().map(Vec::len).max(), Some(5));
    check(&fan, "m_fan");
    for seed in 0..10u64 {
        let q = random_forward_qptm(3000 + seed, 5);
        assert!(q.validate().is_ok());
        check(&q, &format!("seed {seed}"));
    }
    assert!(widest_input == 5, "suite never exercised fan-out 5");
    println!(
        "criterion 3 PASS: binarize narrowed {checked} machines (fan-out up to {widest_input}) \
         to two branches per key with identical string masses at length <= 4"
    );
}

#[test]
fn criterion_4_the_coin_cascade_walks_toward_one_third() {
    let Machine::Qptm(third) = fixture("m_third") else { panic!() };
    let (coin, _) = dyadicize(&third).unwrap();
    // Every branching is a fair coin by construction of the class; the
    // halting-path law states exactly that, so run its checker too.
    assert_eq!(
        coin.delta1.keys().collect::<Vec<_>>(),
        coin.delta2.keys().collect::<Vec<_>>(),
        "both coin faces must be defined at the same keys"
    );
    let m = Machine::Ptm(coin);
    let law = check_ptm_path_law(&m, 6, 16, DEFAULT_NODE_BUDGET).unwrap();
    assert!(law.ok && law.checked > 0, "halting weights are not all 2^-n");

    // The 1/3-branch of the source becomes a two-flip gadget: decided
    // left with mass 1/4 per round, undecided with mass 1/4. Left-
    // branch mass by flip depth follows (1 - 4^-k)/3.
    let left = Sym::new("a");
    let mass_at = |depth: u64| {
        first_symbol_mass(&m, depth)
            .get(&Some(left.clone()))
            .cloned()
            .unwrap_or_else(Rational::zero)
    };
    assert_eq!(mass_at(2), rat(1, 4));
    assert_eq!(mass_at(4), rat(5, 16));
    assert_eq!(mass_at(8), rat(85, 256));
    // Cross-check the small depths against the literal path tree.
    for depth in [2u64, 4, 8] {
        let e = enumerate_paths(&m, 8, depth, DEFAULT_NODE_BUDGET).unwrap();
        let mut total = Rational::zero();
        for p in e.halted.iter().chain(e.live.iter()) {
            if p.emitted.first() == Some(&left) {
                total += &p.weight;
            }
        }
        assert_eq!(total, mass_at(depth), "depth {depth}: oracles disagree");
    }
    // Monotone in depth, and within 2^-20 of 1/3 by depth 40.
    let mut prev = Rational::zero();
    for d in (2..=40u64).step_by(2) {
        let cur = mass_at(d);
        assert!(cur >= prev, "left mass shrank between depths");
        prev = cur;
    }
    let gap = rat(1, 3) - mass_at(40);
    assert!(gap > Rational::zero());
    assert!(
        gap < Rational::new(1.into(), num::BigInt::one() << 20),
        "gap to 1/3 at depth 40 is {gap}, not within 2^-20"
    );
    println!(
        "criterion 4 PASS: fair-coin reduction of the 1/3 branch shows left mass 1/4, 5/16, \
         85/256 at depths 2/4/8, grows monotonically, and sits within 2^-20 of 1/3 by depth 40"
    );
}

#[test]
fn criterion_5_coin_machines_obey_the_path_and_dyadicity_laws() {
    let mut law_checked = 0usize;
    let mut dyadic_checked = 0usize;
    for name in ["m_coin", "m_ptm2"] {
        let m = fixture(name);
        let Machine::Ptm(p) = &m else { panic!("{name} is not a coin machine") };
        let law = check_ptm_path_law(&m, 6, 12, DEFAULT_NODE_BUDGET).unwrap();
        assert!(law.ok, "{name} breaks the halting-weight law");
        assert!(law.all_dyadic && law.checked > 0);
        law_checked += 1;
        if p.is_real_time() {
            let table = semimeasure(&m, 5, 10, DEFAULT_NODE_BUDGET).unwrap();
            assert!(!table.rows.is_empty());
            for row in &table.rows {
                assert!(
                    is_dyadic(&row.mass),
                    "{name}: real-time machine has non-dyadic mass for a string"
                );
            }
            dyadic_checked += 1;
        }
    }
    assert!(dyadic_checked > 0, "no real-time coin machine in the corpus");
    println!(
        "criterion 5 PASS: {law_checked} coin machines weigh every halting path 2^-n, and all \
         {dyadic_checked} real-time ones have dyadic string masses"
    );
}

#[test]
fn criterion_6_stack_codes_push_pop_and_read_exactly() {
    let mut rng = ChaCha8Rng::seed_from_u64(6);
    for trial in 0..1000u32 {
        let depth = rng.gen_range(0..=20usize);
        let bits: Vec<bool> = (0..depth).map(|_| rng.gen_range(0..2u8) == 1).collect();
        let enc = stack_encode(&bits);
        // Reading the top never touches the code.
        assert_eq!(
            stack_top_bit(&enc),
            bits.last().copied(),
            "trial {trial}: top readout wrong"
        );
        // Pushing then popping any bit is the identity.
        let b = rng.gen_range(0..2u8) == 1;
        let pushed = stack_push_bit(&enc, b);
        assert_eq!(
            stack_top_bit(&pushed),
            Some(b),
            "trial {trial}: pushed bit does not read back"
        );
        assert_eq!(
            stack_pop_bit(&pushed, b),
            enc,
            "trial {trial}: pop after push is not the identity"
        );
    }
    println!(
        "criterion 6 PASS: 1000 random stacks of depth <= 20 push, pop, and read back exactly \
         in rational arithmetic"
    );
}

#[test]
fn criterion_7_compiled_networks_stay_in_lockstep_and_corruption_is_caught() {
    let compiled = compiled_fixtures();
    assert!(compiled.len() >= 4);
    for (name, pda, net) in &compiled {
        let src = Machine::TwoPda(pda.clone());
        let tgt = Machine::Rnn(net.clone());
        // 8 emitted tokens at 4 micro-steps each: 32 raw steps.
        let r = rnn_lockstep(&src, &tgt, 8, 100_000).unwrap();
        assert!(r.ok, "{name}: {:?}", r.notes);
        assert!(r.pairs > 0);
    }
    // A sum-preserving corruption of one output row must be caught.
    let Machine::TwoPda(geo) = fixture("m_geo") else { panic!() };
    let (mut net, _) = compile_rnn(&geo).unwrap();
    let col = net.layout.config_cols[&(Sym::bottom(), State::new("q0"))];
    let quarter = rat(1, 4);
    for (j, c) in net.e.get_mut(&OutTok::Sym(Sym::new("a"))).unwrap() {
        if *j == col {
            *c -= quarter.clone();
        }
    }
    for (j, c) in net.e.get_mut(&OutTok::Eps).unwrap() {
        if *j == col {
            *c += quarter.clone();
        }
    }
    let r = rnn_lockstep(&Machine::TwoPda(geo), &Machine::Rnn(net), 8, 100_000).unwrap();
    assert!(!r.ok, "corrupted output scores went unnoticed");
    println!(
        "criterion 7 PASS: {} compiled fixtures decode and score in lockstep over 32 raw steps; \
         a single shifted output entry is detected",
        compiled.len()
    );
}

#[test]
fn criterion_8_sampling_the_compiled_geometric_machine_is_sane() {
    let start = Instant::now();
    let Machine::TwoPda(geo) = fixture("m_geo") else { panic!() };
    let (net, _) = compile_rnn(&geo).unwrap();
    let m = Machine::Rnn(net);
    let n = 10_000u64;
    let s = sample_many(&m, 2026, n, 160).unwrap();
    let eps_count = s.counts.get(&Vec::new()).copied().unwrap_or(0);
    let p = Rational::new(eps_count.into(), n.into());
    let gap = {
        let d = p - rat(1, 2);
        if d < Rational::zero() {
            -d
        } else {
            d
        }
    };
    assert!(
        gap <= rat(1, 20),
        "empirical mass of the empty string is off by {gap}, more than 0.05"
    );
    let elapsed = start.elapsed();
    assert!(elapsed.as_secs() < 30, "took {elapsed:?}, budget 30 seconds");
    println!(
        "criterion 8 PASS: {n} seeded samples of the compiled geometric machine put the empty \
         string at {eps_count}/{n} (within 0.05 of 1/2); cutoff fraction {}/{n}; {elapsed:?}",
        s.cutoffs
    );
}

#[test]
fn criterion_9_the_gating_predicates_admit_and_refuse_the_right_machines() {
    let Machine::TwoPda(rt) = fixture("m_rt") else { panic!() };
    assert!(rt.is_rd(), "the real-time deterministic fixture lost its predicate");
    assert!(compile_rnn(&rt).is_ok());

    let Machine::TwoPda(geo) = fixture("m_geo") else { panic!() };
    assert!(!geo.is_real_time());
    assert!(geo.is_symbol_deterministic());
    assert!(compile_rnn(&geo).is_ok(), "symbol-determinism alone must suffice");

    let Machine::TwoPda(nd) = fixture("m_nondet") else { panic!() };
    assert!(!nd.is_symbol_deterministic());
    let err = compile_rnn(&nd).unwrap_err();
    match &err {
        TransformError::NotOutputDeterministic { symbol, count, .. } => {
            assert_eq!(symbol, "a");
            assert_eq!(*count, 2);
        }
        other => panic!("wrong refusal: {other}"),
    }
    assert!(err.to_string().contains("output-determinism"));
    println!(
        "criterion 9 PASS: the real-time fixture and the non-real-time symbol-deterministic \
         fixture both compile; the ambiguous one is refused with the documented error"
    );
}
