//! The line-oriented text format for machines and models.
//!
//! Files are UTF-8 text. Blank lines and full-line `#` comments are skipped
//! on input and never produced on output. Every other line is a
//! whitespace-separated token list whose first token names the field. The
//! first two meaningful lines are always `version 1` and `kind <kind>`.
//!
//! Machine kinds share a header — `sigma`, `gamma`, `states`, `initial`,
//! `final` — followed by transition lines:
//!
//! * `qptm`: `t q g y q' g' m w` (key state, scanned symbol, emission, next
//!   state, written symbol, move, weight)
//! * `ptm`: `d1 q g q' g' y m` and `d2 ...` (no weights: the two lines per
//!   key are the two coin outcomes)
//! * `2pda`: `t q g1 y q' pop1 push1 pop2 push2 w`
//! * `2pda-full`: `t q g1 g2 y q' pop1 push1 pop2 push2 w`
//!
//! Network files (`kind rnn`) carry `sigma`, dimensions `d` and `k`, then
//! sparse parameter lines: `embed tok i`, `range name a b`, `col top state i`,
//! `off i`, `h0 i x`, `b i x`, `u i j x`, `v i j x`, `e tok j x`.
//!
//! The token `eps` denotes the empty emission or an untouched stack; `_` is
//! the tape blank and `$` the stack bottom marker. Reserved tokens may not be
//! declared in `sigma`, `gamma`, or `states`.
//!
//! Parsing is strict: unknown fields, duplicate fields, and wrong token
//! counts are errors, not warnings. Weight-zero transitions are removed while
//! reading (they denote the absent transition). Serialization is canonical —
//! sorted declarations, sorted keys, sorted transitions — so
//! parse-then-serialize is byte-stable and machine round-trips are exact.

use std::collections::{BTreeMap, BTreeSet};

use num::Zero;

use crate::error::ParseError;
use crate::machines::{
    InTok, Layout, Machine, MachineKind, Move, OutTok, PdaTrans, Ptm, PtmStep, Qptm, QptmTrans,
    RnnLm, State, Sym, TwoPda, TwoPdaFull, is_reserved_token, BOS_TOKEN, EOS_TOKEN, EPSILON_TOKEN,
};
use crate::numerics::{rat_parse, rat_to_string, Rational};

// ===========================================================================
// Parsing
// ===========================================================================

fn err(line: usize, message: impl Into<String>) -> ParseError {
    ParseError::Syntax {
        line,
        message: message.into(),
    }
}

/// Parse any machine or model file.
pub fn parse_machine(text: &str) -> Result<Machine, ParseError> {
    let lines: Vec<(usize, Vec<&str>)> = text
        .lines()
        .enumerate()
        .filter_map(|(i, raw)| {
            let t = raw.trim();
            if t.is_empty() || t.starts_with('#') {
                None
            } else {
                Some((i + 1, t.split_whitespace().collect()))
            }
        })
        .collect();

    let (vline, vtoks) = lines
        .first()
        .ok_or_else(|| ParseError::Structure("empty file".to_string()))?;
    if vtoks.len() != 2 || vtoks[0] != "version" {
        return Err(err(*vline, "expected `version 1` as the first line"));
    }
    if vtoks[1] != "1" {
        return Err(err(*vline, format!("unsupported version {:?}", vtoks[1])));
    }
    let (kline, ktoks) = lines
        .get(1)
        .ok_or_else(|| ParseError::Structure("missing kind line".to_string()))?;
    if ktoks.len() != 2 || ktoks[0] != "kind" {
        return Err(err(*kline, "expected `kind <kind>` as the second line"));
    }
    let kind = MachineKind::parse(ktoks[1])
        .ok_or_else(|| err(*kline, format!("unknown machine kind {:?}", ktoks[1])))?;

    let body = &lines[2..];
    match kind {
        MachineKind::Ptm => parse_ptm(body).map(Machine::Ptm),
        MachineKind::Qptm => parse_qptm(body).map(Machine::Qptm),
        MachineKind::TwoPda => parse_twopda(body).map(Machine::TwoPda),
        MachineKind::TwoPdaFull => parse_twopda_full(body).map(Machine::TwoPdaFull),
        MachineKind::Rnn => parse_rnn(body).map(Machine::Rnn),
    }
}

/// `eps` is the absent symbol; anything else is itself.
fn opt_sym(tok: &str) -> Option<Sym> {
    if tok == EPSILON_TOKEN {
        None
    } else {
        Some(Sym::new(tok))
    }
}

fn parse_move(line: usize, tok: &str) -> Result<Move, ParseError> {
    Move::parse(tok).ok_or_else(|| err(line, format!("bad move {tok:?}, expected L, N, or R")))
}

fn parse_weight(line: usize, tok: &str) -> Result<Rational, ParseError> {
    rat_parse(tok).map_err(|e| err(line, e.to_string()))
}

fn parse_index(line: usize, tok: &str) -> Result<usize, ParseError> {
    tok.parse::<usize>()
        .map_err(|_| err(line, format!("bad index {tok:?}, expected a nonnegative integer")))
}

/// Shared machine header: declared alphabets, states, distinguished states.
#[derive(Default)]
struct Header {
    sigma: Option<BTreeSet<Sym>>,
    gamma: Option<BTreeSet<Sym>>,
    states: Option<BTreeSet<State>>,
    initial: Option<State>,
    halt: Option<State>,
}

impl Header {
    /// Consume a header line if this is one; reports which lines it accepts.
    fn take(&mut self, line: usize, toks: &[&str]) -> Result<bool, ParseError> {
        match toks[0] {
            "sigma" | "gamma" => {
                let mut set = BTreeSet::new();
                for t in &toks[1..] {
                    if is_reserved_token(t) {
                        return Err(err(
                            line,
                            format!("reserved token {t:?} may not be declared in {}", toks[0]),
                        ));
                    }
                    if !set.insert(Sym::new(*t)) {
                        return Err(err(line, format!("duplicate symbol {t:?}")));
                    }
                }
                let slot = if toks[0] == "sigma" {
                    &mut self.sigma
                } else {
                    &mut self.gamma
                };
                if slot.replace(set).is_some() {
                    return Err(err(line, format!("duplicate {} line", toks[0])));
                }
                Ok(true)
            }
            "states" => {
                let mut set = BTreeSet::new();
                for t in &toks[1..] {
                    if is_reserved_token(t) {
                        return Err(err(
                            line,
                            format!("reserved token {t:?} may not be declared as a state"),
                        ));
                    }
                    if !set.insert(State::new(*t)) {
                        return Err(err(line, format!("duplicate state {t:?}")));
                    }
                }
                if self.states.replace(set).is_some() {
                    return Err(err(line, "duplicate states line"));
                }
                Ok(true)
            }
            "initial" | "final" => {
                if toks.len() != 2 {
                    return Err(err(line, format!("expected `{} <state>`", toks[0])));
                }
                let slot = if toks[0] == "initial" {
                    &mut self.initial
                } else {
                    &mut self.halt
                };
                if slot.replace(State::new(toks[1])).is_some() {
                    return Err(err(line, format!("duplicate {} line", toks[0])));
                }
                Ok(true)
            }
            _ => Ok(false),
        }
    }

    fn finish(self) -> Result<(BTreeSet<Sym>, BTreeSet<Sym>, BTreeSet<State>, State, State), ParseError> {
        let missing = |what: &str| ParseError::Structure(format!("missing {what} line"));
        Ok((
            self.sigma.ok_or_else(|| missing("sigma"))?,
            self.gamma.ok_or_else(|| missing("gamma"))?,
            self.states.ok_or_else(|| missing("states"))?,
            self.initial.ok_or_else(|| missing("initial"))?,
            self.halt.ok_or_else(|| missing("final"))?,
        ))
    }
}

fn parse_qptm(body: &[(usize, Vec<&str>)]) -> Result<Qptm, ParseError> {
    let mut header = Header::default();
    let mut delta: BTreeMap<(State, Sym), Vec<QptmTrans>> = BTreeMap::new();
    for (line, toks) in body {
        if header.take(*line, toks)? {
            continue;
        }
        match toks[0] {
            "t" => {
                if toks.len() != 8 {
                    return Err(err(
                        *line,
                        "expected `t q g y q' g' m w` (8 tokens) for a qptm transition",
                    ));
                }
                let weight = parse_weight(*line, toks[7])?;
                if weight.is_zero() {
                    continue; // weight zero denotes the absent transition
                }
                let t = QptmTrans {
                    emit: opt_sym(toks[3]),
                    next: State::new(toks[4]),
                    write: Sym::new(toks[5]),
                    mv: parse_move(*line, toks[6])?,
                    weight,
                };
                delta
                    .entry((State::new(toks[1]), Sym::new(toks[2])))
                    .or_default()
                    .push(t);
            }
            other => return Err(err(*line, format!("unknown field {other:?} in a qptm file"))),
        }
    }
    let (sigma, gamma, states, initial, halt) = header.finish()?;
    for ts in delta.values_mut() {
        ts.sort();
    }
    Ok(Qptm {
        sigma,
        gamma,
        states,
        initial,
        halt,
        delta,
    })
}

fn parse_ptm(body: &[(usize, Vec<&str>)]) -> Result<Ptm, ParseError> {
    let mut header = Header::default();
    let mut delta1: BTreeMap<(State, Sym), PtmStep> = BTreeMap::new();
    let mut delta2: BTreeMap<(State, Sym), PtmStep> = BTreeMap::new();
    for (line, toks) in body {
        if header.take(*line, toks)? {
            continue;
        }
        match toks[0] {
            d @ ("d1" | "d2") => {
                if toks.len() != 7 {
                    return Err(err(
                        *line,
                        format!("expected `{d} q g q' g' y m` (7 tokens) for a ptm transition"),
                    ));
                }
                let key = (State::new(toks[1]), Sym::new(toks[2]));
                let step = PtmStep {
                    next: State::new(toks[3]),
                    write: Sym::new(toks[4]),
                    emit: opt_sym(toks[5]),
                    mv: parse_move(*line, toks[6])?,
                };
                let table = if d == "d1" { &mut delta1 } else { &mut delta2 };
                if table.insert(key, step).is_some() {
                    return Err(err(
                        *line,
                        format!("duplicate {d} transition for ({}, {})", toks[1], toks[2]),
                    ));
                }
            }
            other => return Err(err(*line, format!("unknown field {other:?} in a ptm file"))),
        }
    }
    let (sigma, gamma, states, initial, halt) = header.finish()?;
    Ok(Ptm {
        sigma,
        gamma,
        states,
        initial,
        halt,
        delta1,
        delta2,
    })
}

fn parse_pda_trans(line: usize, toks: &[&str]) -> Result<Option<PdaTrans>, ParseError> {
    // toks: y q' pop1 push1 pop2 push2 w
    let weight = parse_weight(line, toks[6])?;
    if weight.is_zero() {
        return Ok(None);
    }
    Ok(Some(PdaTrans {
        emit: opt_sym(toks[0]),
        next: State::new(toks[1]),
        pop1: opt_sym(toks[2]),
        push1: opt_sym(toks[3]),
        pop2: opt_sym(toks[4]),
        push2: opt_sym(toks[5]),
        weight,
    }))
}

fn parse_twopda(body: &[(usize, Vec<&str>)]) -> Result<TwoPda, ParseError> {
    let mut header = Header::default();
    let mut delta: BTreeMap<(State, Sym), Vec<PdaTrans>> = BTreeMap::new();
    for (line, toks) in body {
        if header.take(*line, toks)? {
            continue;
        }
        match toks[0] {
            "t" => {
                if toks.len() != 10 {
                    return Err(err(
                        *line,
                        "expected `t q g1 y q' pop1 push1 pop2 push2 w` (10 tokens) for a 2pda transition",
                    ));
                }
                if let Some(t) = parse_pda_trans(*line, &toks[3..])? {
                    delta
                        .entry((State::new(toks[1]), Sym::new(toks[2])))
                        .or_default()
                        .push(t);
                }
            }
            other => return Err(err(*line, format!("unknown field {other:?} in a 2pda file"))),
        }
    }
    let (sigma, gamma, states, initial, halt) = header.finish()?;
    for ts in delta.values_mut() {
        ts.sort();
    }
    Ok(TwoPda {
        sigma,
        gamma,
        states,
        initial,
        halt,
        delta,
    })
}

fn parse_twopda_full(body: &[(usize, Vec<&str>)]) -> Result<TwoPdaFull, ParseError> {
    let mut header = Header::default();
    let mut delta: BTreeMap<(State, Sym, Sym), Vec<PdaTrans>> = BTreeMap::new();
    for (line, toks) in body {
        if header.take(*line, toks)? {
            continue;
        }
        match toks[0] {
            "t" => {
                if toks.len() != 11 {
                    return Err(err(
                        *line,
                        "expected `t q g1 g2 y q' pop1 push1 pop2 push2 w` (11 tokens) for a 2pda-full transition",
                    ));
                }
                if let Some(t) = parse_pda_trans(*line, &toks[4..])? {
                    delta
                        .entry((
                            State::new(toks[1]),
                            Sym::new(toks[2]),
                            Sym::new(toks[3]),
                        ))
                        .or_default()
                        .push(t);
                }
            }
            other => {
                return Err(err(*line, format!("unknown field {other:?} in a 2pda-full file")))
            }
        }
    }
    let (sigma, gamma, states, initial, halt) = header.finish()?;
    for ts in delta.values_mut() {
        ts.sort();
    }
    Ok(TwoPdaFull {
        sigma,
        gamma,
        states,
        initial,
        halt,
        delta,
    })
}

fn parse_in_tok(tok: &str) -> InTok {
    match tok {
        EPSILON_TOKEN => InTok::Eps,
        BOS_TOKEN => InTok::Bos,
        _ => InTok::Sym(Sym::new(tok)),
    }
}

fn parse_out_tok(tok: &str) -> OutTok {
    match tok {
        EPSILON_TOKEN => OutTok::Eps,
        EOS_TOKEN => OutTok::Eos,
        _ => OutTok::Sym(Sym::new(tok)),
    }
}

fn parse_rnn(body: &[(usize, Vec<&str>)]) -> Result<RnnLm, ParseError> {
    let mut sigma: Option<BTreeSet<Sym>> = None;
    let mut d: Option<usize> = None;
    let mut k: Option<usize> = None;
    let mut embed: BTreeMap<InTok, usize> = BTreeMap::new();
    let mut ranges: BTreeMap<String, (usize, usize)> = BTreeMap::new();
    let mut config_cols: BTreeMap<(Sym, State), usize> = BTreeMap::new();
    let mut off_col: Option<usize> = None;
    let mut h0_entries: BTreeMap<usize, Rational> = BTreeMap::new();
    let mut b_entries: BTreeMap<usize, Rational> = BTreeMap::new();
    let mut u_entries: BTreeMap<(usize, usize), Rational> = BTreeMap::new();
    let mut v_entries: BTreeMap<(usize, usize), Rational> = BTreeMap::new();
    let mut e_entries: BTreeMap<OutTok, BTreeMap<usize, Rational>> = BTreeMap::new();

    for (line, toks) in body {
        match toks[0] {
            "sigma" => {
                let mut set = BTreeSet::new();
                for t in &toks[1..] {
                    if is_reserved_token(t) {
                        return Err(err(
                            *line,
                            format!("reserved token {t:?} may not be declared in sigma"),
                        ));
                    }
                    if !set.insert(Sym::new(*t)) {
                        return Err(err(*line, format!("duplicate symbol {t:?}")));
                    }
                }
                if sigma.replace(set).is_some() {
                    return Err(err(*line, "duplicate sigma line"));
                }
            }
            dim @ ("d" | "k") => {
                if toks.len() != 2 {
                    return Err(err(*line, format!("expected `{dim} <n>`")));
                }
                let n = parse_index(*line, toks[1])?;
                let slot = if dim == "d" { &mut d } else { &mut k };
                if slot.replace(n).is_some() {
                    return Err(err(*line, format!("duplicate {dim} line")));
                }
            }
            "embed" => {
                if toks.len() != 3 {
                    return Err(err(*line, "expected `embed <token> <coordinate>`"));
                }
                let tok = parse_in_tok(toks[1]);
                let coord = parse_index(*line, toks[2])?;
                if embed.insert(tok, coord).is_some() {
                    return Err(err(*line, format!("duplicate embed line for {}", toks[1])));
                }
            }
            "range" => {
                if toks.len() != 4 {
                    return Err(err(*line, "expected `range <name> <start> <end>`"));
                }
                let start = parse_index(*line, toks[2])?;
                let end = parse_index(*line, toks[3])?;
                if ranges.insert(toks[1].to_string(), (start, end)).is_some() {
                    return Err(err(*line, format!("duplicate range line for {}", toks[1])));
                }
            }
            "col" => {
                if toks.len() != 4 {
                    return Err(err(*line, "expected `col <stack-top> <state> <coordinate>`"));
                }
                let key = (Sym::new(toks[1]), State::new(toks[2]));
                let coord = parse_index(*line, toks[3])?;
                if config_cols.insert(key, coord).is_some() {
                    return Err(err(
                        *line,
                        format!("duplicate col line for ({}, {})", toks[1], toks[2]),
                    ));
                }
            }
            "off" => {
                if toks.len() != 2 {
                    return Err(err(*line, "expected `off <coordinate>`"));
                }
                if off_col.replace(parse_index(*line, toks[1])?).is_some() {
                    return Err(err(*line, "duplicate off line"));
                }
            }
            vecline @ ("h0" | "b") => {
                if toks.len() != 3 {
                    return Err(err(*line, format!("expected `{vecline} <coordinate> <value>`")));
                }
                let i = parse_index(*line, toks[1])?;
                let x = parse_weight(*line, toks[2])?;
                let slot = if vecline == "h0" {
                    &mut h0_entries
                } else {
                    &mut b_entries
                };
                if slot.insert(i, x).is_some() {
                    return Err(err(*line, format!("duplicate {vecline} entry for coordinate {i}")));
                }
            }
            mat @ ("u" | "v") => {
                if toks.len() != 4 {
                    return Err(err(*line, format!("expected `{mat} <row> <column> <value>`")));
                }
                let i = parse_index(*line, toks[1])?;
                let j = parse_index(*line, toks[2])?;
                let x = parse_weight(*line, toks[3])?;
                let slot = if mat == "u" { &mut u_entries } else { &mut v_entries };
                if slot.insert((i, j), x).is_some() {
                    return Err(err(*line, format!("duplicate {mat} entry at ({i}, {j})")));
                }
            }
            "e" => {
                if toks.len() != 4 {
                    return Err(err(*line, "expected `e <token> <column> <value>`"));
                }
                let tok = parse_out_tok(toks[1]);
                let j = parse_index(*line, toks[2])?;
                let x = parse_weight(*line, toks[3])?;
                if e_entries.entry(tok).or_default().insert(j, x).is_some() {
                    return Err(err(
                        *line,
                        format!("duplicate e entry for {} at column {j}", toks[1]),
                    ));
                }
            }
            other => return Err(err(*line, format!("unknown field {other:?} in an rnn file"))),
        }
    }

    let missing = |what: &str| ParseError::Structure(format!("missing {what} line"));
    let sigma = sigma.ok_or_else(|| missing("sigma"))?;
    let d = d.ok_or_else(|| missing("d"))?;
    let k = k.ok_or_else(|| missing("k"))?;

    let materialize_vec = |entries: BTreeMap<usize, Rational>, what: &str| {
        let mut out = vec![Rational::zero(); d];
        for (i, x) in entries {
            if i >= d {
                return Err(ParseError::Structure(format!(
                    "{what} coordinate {i} is out of range 0..{d}"
                )));
            }
            out[i] = x;
        }
        Ok(out)
    };
    let h0 = materialize_vec(h0_entries, "h0")?;
    let b = materialize_vec(b_entries, "b")?;

    let materialize_rows = |entries: BTreeMap<(usize, usize), Rational>, what: &str| {
        let mut rows: Vec<Vec<(usize, Rational)>> = vec![Vec::new(); d];
        for ((i, j), x) in entries {
            if i >= d {
                return Err(ParseError::Structure(format!(
                    "{what} row {i} is out of range 0..{d}"
                )));
            }
            rows[i].push((j, x));
        }
        Ok(rows)
    };
    let u = materialize_rows(u_entries, "u")?;
    let v = materialize_rows(v_entries, "v")?;

    // Every standard emission token owns a row; unlisted rows are zero.
    let mut e: BTreeMap<OutTok, Vec<(usize, Rational)>> = BTreeMap::new();
    e.insert(OutTok::Eps, Vec::new());
    e.insert(OutTok::Eos, Vec::new());
    for s in &sigma {
        e.insert(OutTok::Sym(s.clone()), Vec::new());
    }
    for (tok, cols) in e_entries {
        e.insert(tok, cols.into_iter().collect());
    }

    Ok(RnnLm {
        sigma,
        d,
        k,
        embed,
        u,
        v,
        b,
        h0,
        e,
        layout: Layout {
            ranges,
            config_cols,
            off_col,
        },
    })
}

// ===========================================================================
// Serialization
// ===========================================================================

/// Canonical text for any machine or model.
pub fn serialize_machine(m: &Machine) -> String {
    match m {
        Machine::Ptm(p) => serialize_ptm(p),
        Machine::Qptm(q) => serialize_qptm(q),
        Machine::TwoPda(p) => serialize_twopda(p),
        Machine::TwoPdaFull(p) => serialize_twopda_full(p),
        Machine::Rnn(r) => serialize_rnn(r),
    }
}

fn opt_sym_str(o: &Option<Sym>) -> &str {
    match o {
        None => EPSILON_TOKEN,
        Some(s) => s.as_str(),
    }
}

fn push_set_line<T: std::fmt::Display>(
    out: &mut String,
    name: &str,
    items: impl Iterator<Item = T>,
) {
    out.push_str(name);
    for it in items {
        out.push(' ');
        out.push_str(&it.to_string());
    }
    out.push('\n');
}

fn machine_header(
    out: &mut String,
    kind: MachineKind,
    sigma: &BTreeSet<Sym>,
    gamma: &BTreeSet<Sym>,
    states: &BTreeSet<State>,
    initial: &State,
    halt: &State,
) {
    out.push_str("version 1\n");
    out.push_str(&format!("kind {kind}\n"));
    push_set_line(out, "sigma", sigma.iter());
    push_set_line(out, "gamma", gamma.iter());
    push_set_line(out, "states", states.iter());
    out.push_str(&format!("initial {initial}\n"));
    out.push_str(&format!("final {halt}\n"));
}

fn serialize_qptm(m: &Qptm) -> String {
    let mut out = String::new();
    machine_header(
        &mut out,
        MachineKind::Qptm,
        &m.sigma,
        &m.gamma,
        &m.states,
        &m.initial,
        &m.halt,
    );
    for ((q, g), ts) in &m.delta {
        let mut sorted: Vec<&QptmTrans> = ts.iter().collect();
        sorted.sort();
        for t in sorted {
            out.push_str(&format!(
                "t {q} {g} {} {} {} {} {}\n",
                opt_sym_str(&t.emit),
                t.next,
                t.write,
                t.mv,
                rat_to_string(&t.weight)
            ));
        }
    }
    out
}

fn serialize_ptm(m: &Ptm) -> String {
    let mut out = String::new();
    machine_header(
        &mut out,
        MachineKind::Ptm,
        &m.sigma,
        &m.gamma,
        &m.states,
        &m.initial,
        &m.halt,
    );
    for (name, table) in [("d1", &m.delta1), ("d2", &m.delta2)] {
        for ((q, g), s) in table {
            out.push_str(&format!(
                "{name} {q} {g} {} {} {} {}\n",
                s.next,
                s.write,
                opt_sym_str(&s.emit),
                s.mv
            ));
        }
    }
    out
}

fn pda_trans_text(t: &PdaTrans) -> String {
    format!(
        "{} {} {} {} {} {} {}",
        opt_sym_str(&t.emit),
        t.next,
        opt_sym_str(&t.pop1),
        opt_sym_str(&t.push1),
        opt_sym_str(&t.pop2),
        opt_sym_str(&t.push2),
        rat_to_string(&t.weight)
    )
}

fn serialize_twopda(m: &TwoPda) -> String {
    let mut out = String::new();
    machine_header(
        &mut out,
        MachineKind::TwoPda,
        &m.sigma,
        &m.gamma,
        &m.states,
        &m.initial,
        &m.halt,
    );
    for ((q, g), ts) in &m.delta {
        let mut sorted: Vec<&PdaTrans> = ts.iter().collect();
        sorted.sort();
        for t in sorted {
            out.push_str(&format!("t {q} {g} {}\n", pda_trans_text(t)));
        }
    }
    out
}

fn serialize_twopda_full(m: &TwoPdaFull) -> String {
    let mut out = String::new();
    machine_header(
        &mut out,
        MachineKind::TwoPdaFull,
        &m.sigma,
        &m.gamma,
        &m.states,
        &m.initial,
        &m.halt,
    );
    for ((q, g1, g2), ts) in &m.delta {
        let mut sorted: Vec<&PdaTrans> = ts.iter().collect();
        sorted.sort();
        for t in sorted {
            out.push_str(&format!("t {q} {g1} {g2} {}\n", pda_trans_text(t)));
        }
    }
    out
}

fn serialize_rnn(m: &RnnLm) -> String {
    let mut out = String::new();
    out.push_str("version 1\n");
    out.push_str("kind rnn\n");
    push_set_line(&mut out, "sigma", m.sigma.iter());
    out.push_str(&format!("d {}\n", m.d));
    out.push_str(&format!("k {}\n", m.k));
    let mut by_coord: Vec<(&usize, &InTok)> = m.embed.iter().map(|(t, c)| (c, t)).collect();
    by_coord.sort();
    for (c, t) in by_coord {
        out.push_str(&format!("embed {t} {c}\n"));
    }
    for (name, (start, end)) in &m.layout.ranges {
        out.push_str(&format!("range {name} {start} {end}\n"));
    }
    for ((top, state), c) in &m.layout.config_cols {
        out.push_str(&format!("col {top} {state} {c}\n"));
    }
    if let Some(c) = m.layout.off_col {
        out.push_str(&format!("off {c}\n"));
    }
    for (name, vec) in [("h0", &m.h0), ("b", &m.b)] {
        for (i, x) in vec.iter().enumerate() {
            if !x.is_zero() {
                out.push_str(&format!("{name} {i} {}\n", rat_to_string(x)));
            }
        }
    }
    for (name, rows) in [("u", &m.u), ("v", &m.v)] {
        for (i, row) in rows.iter().enumerate() {
            let mut sorted = row.clone();
            sorted.sort_by_key(|(j, _)| *j);
            for (j, x) in sorted {
                out.push_str(&format!("{name} {i} {j} {}\n", rat_to_string(&x)));
            }
        }
    }
    for (tok, row) in &m.e {
        let mut sorted = row.clone();
        sorted.sort_by_key(|(j, _)| *j);
        for (j, x) in sorted {
            out.push_str(&format!("e {tok} {j} {}\n", rat_to_string(&x)));
        }
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::numerics::rat;

    const GEO: &str = "\
version 1
kind 2pda
sigma a
gamma
states q0 qf
initial q0
final qf
t q0 $ eps qf eps eps eps eps 1/2
t q0 $ a q0 eps eps eps eps 1/2
";

    #[test]
    fn parses_a_canonical_2pda_file() {
        let m = parse_machine(GEO).unwrap();
        let Machine::TwoPda(p) = &m else {
            panic!("expected a 2pda")
        };
        assert_eq!(p.sigma.len(), 1);
        assert!(p.gamma.is_empty());
        let ts = &p.delta[&(State::new("q0"), Sym::bottom())];
        assert_eq!(ts.len(), 2);
        assert_eq!(ts[0].emit, None);
        assert_eq!(ts[0].next, State::new("qf"));
        assert_eq!(ts[1].emit, Some(Sym::new("a")));
        assert_eq!(ts[1].weight, rat(1, 2));
        assert!(m.validate().is_ok());
    }

    #[test]
    fn serialization_is_byte_stable() {
        let m = parse_machine(GEO).unwrap();
        assert_eq!(serialize_machine(&m), GEO);
    }

    #[test]
    fn comments_and_blank_lines_are_skipped() {
        let text = format!("# a comment\n\n{GEO}\n# trailing\n");
        let m = parse_machine(&text).unwrap();
        assert_eq!(serialize_machine(&m), GEO);
    }

    #[test]
    fn unsorted_input_parses_to_the_same_canonical_form() {
        let swapped = "\
version 1
kind 2pda
states q0 qf
final qf
initial q0
gamma
sigma a
t q0 $ a q0 eps eps eps eps 1/2
t q0 $ eps qf eps eps eps eps 1/2
";
        let m = parse_machine(swapped).unwrap();
        assert_eq!(serialize_machine(&m), GEO);
    }

    #[test]
    fn weight_zero_transitions_are_removed_while_reading() {
        let text = "\
version 1
kind 2pda
sigma a
gamma
states q0 qf
initial q0
final qf
t q0 $ eps qf eps eps eps eps 1/2
t q0 $ a q0 eps eps eps eps 0
";
        let Machine::TwoPda(p) = parse_machine(text).unwrap() else {
            panic!()
        };
        let ts = &p.delta[&(State::new("q0"), Sym::bottom())];
        assert_eq!(ts.len(), 1, "the zero-weight transition is gone");
        // What remains no longer sums to one; validation reports it.
        let rep = p.validate();
        assert!(rep
            .violations
            .iter()
            .any(|v| v.contains("local normalization violated")));
    }

    #[test]
    fn unknown_fields_are_rejected() {
        let text = format!("{GEO}note this is fine\n");
        let e = parse_machine(&text).unwrap_err();
        assert!(e.to_string().contains("unknown field \"note\""), "{e}");
    }

    #[test]
    fn version_and_kind_must_lead() {
        assert!(parse_machine("kind 2pda\nversion 1\n")
            .unwrap_err()
            .to_string()
            .contains("version"));
        assert!(parse_machine("version 2\nkind 2pda\n")
            .unwrap_err()
            .to_string()
            .contains("unsupported version"));
        assert!(parse_machine("version 1\nkind pda\n")
            .unwrap_err()
            .to_string()
            .contains("unknown machine kind"));
    }

    #[test]
    fn duplicate_and_missing_headers_are_rejected() {
        let dup = format!("{GEO}sigma a\n");
        assert!(parse_machine(&dup)
            .unwrap_err()
            .to_string()
            .contains("duplicate sigma line"));
        let missing = "version 1\nkind 2pda\nsigma a\n";
        assert!(parse_machine(missing)
            .unwrap_err()
            .to_string()
            .contains("missing gamma line"));
    }

    #[test]
    fn reserved_tokens_may_not_be_declared() {
        let text = "version 1\nkind 2pda\nsigma a\ngamma _\n";
        let e = parse_machine(text).unwrap_err();
        assert!(e.to_string().contains("reserved token"), "{e}");
    }

    #[test]
    fn wrong_token_counts_are_rejected_with_the_expected_shape() {
        let text = "\
version 1
kind 2pda
sigma a
gamma
states q0 qf
initial q0
final qf
t q0 $ eps qf eps eps 1/2
";
        let e = parse_machine(text).unwrap_err();
        assert!(e.to_string().contains("10 tokens"), "{e}");
    }

    #[test]
    fn bad_weights_are_reported_with_line_numbers() {
        let text = "\
version 1
kind 2pda
sigma a
gamma
states q0 qf
initial q0
final qf
t q0 $ a q0 eps eps eps eps 1/0
";
        let e = parse_machine(text).unwrap_err();
        let msg = e.to_string();
        assert!(msg.contains("line 8") && msg.contains("denominator is zero"), "{msg}");
    }

    #[test]
    fn ptm_files_round_trip() {
        let text = "\
version 1
kind ptm
sigma a b
gamma
states q0 qf
initial q0
final qf
d1 q0 _ qf _ a N
d2 q0 _ qf _ b N
";
        let m = parse_machine(text).unwrap();
        assert!(m.validate().is_ok());
        assert_eq!(serialize_machine(&m), text);
        let again = parse_machine(&serialize_machine(&m)).unwrap();
        assert_eq!(again, m);
    }

    #[test]
    fn duplicate_ptm_transitions_are_rejected() {
        let text = "\
version 1
kind ptm
sigma a
gamma
states q0 qf
initial q0
final qf
d1 q0 _ qf _ a N
d1 q0 _ q0 _ a N
d2 q0 _ qf _ a N
";
        let e = parse_machine(text).unwrap_err();
        assert!(e.to_string().contains("duplicate d1 transition"), "{e}");
    }

    #[test]
    fn qptm_files_round_trip() {
        let text = "\
version 1
kind qptm
sigma a b
gamma
states q0 qf
initial q0
final qf
t q0 _ a q0 _ N 1/3
t q0 _ b qf _ N 2/3
";
        let m = parse_machine(text).unwrap();
        assert!(m.validate().is_ok());
        assert_eq!(serialize_machine(&m), text);
    }

    #[test]
    fn fully_keyed_files_round_trip() {
        let text = "\
version 1
kind 2pda-full
sigma a b
gamma A B
states q0 q1 q2 qf
initial q0
final qf
t q0 $ $ a q1 eps A eps B 1
t q1 A B b q2 A eps B eps 1
t q2 $ $ eps qf eps eps eps eps 1
";
        let m = parse_machine(text).unwrap();
        assert!(m.validate().is_ok(), "{:?}", m.validate().violations);
        assert_eq!(serialize_machine(&m), text);
    }

    #[test]
    fn rnn_files_round_trip() {
        let text = "\
version 1
kind rnn
sigma a
d 3
k 4
embed eps 0
embed BOS 1
embed a 2
range state 0 2
col $ q0 0
off 2
h0 0 1
b 1 -1/2
u 1 0 1
v 1 2 1
e eps 2 1
e a 1 1
";
        let Machine::Rnn(r) = parse_machine(text).unwrap() else {
            panic!()
        };
        assert_eq!(r.d, 3);
        assert_eq!(r.k, 4);
        assert_eq!(r.embed.len(), 3);
        assert_eq!(r.layout.off_col, Some(2));
        assert_eq!(r.e.len(), 3, "silent and end rows exist even when zero");
        assert_eq!(serialize_machine(&Machine::Rnn(r.clone())), text);
        let again = parse_machine(&serialize_machine(&Machine::Rnn(r.clone()))).unwrap();
        assert_eq!(again, Machine::Rnn(r));
    }

    #[test]
    fn rnn_duplicate_entries_are_rejected() {
        let text = "\
version 1
kind rnn
sigma a
d 2
k 4
u 0 1 1
u 0 1 2
";
        let e = parse_machine(text).unwrap_err();
        assert!(e.to_string().contains("duplicate u entry at (0, 1)"), "{e}");
    }

    #[test]
    fn rnn_out_of_range_rows_are_rejected() {
        let text = "\
version 1
kind rnn
sigma a
d 2
k 4
u 5 0 1
";
        let e = parse_machine(text).unwrap_err();
        assert!(e.to_string().contains("u row 5 is out of range"), "{e}");
    }
}
