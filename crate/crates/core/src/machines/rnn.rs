//! Simple recurrent language models with exact rational parameters.
//!
//! The hidden state evolves as `h' = sigma(U h + V x + b)` where `sigma` is
//! the saturated sigmoid applied coordinatewise and `x` is a one-hot
//! embedding of the previous emission (or the begin-of-sequence token on the
//! first step). Output scores are linear readouts `E h`, one row per
//! emission token; when a machine has been compiled correctly the score
//! vector at every step is a point on the probability simplex and *is* the
//! emission distribution — there is no softmax, no normalization, and no
//! floating point.
//!
//! Emissions are spread over `k`-step blocks (`k` micro-steps per emitted
//! symbol); between the designated steps a well-formed model puts all its
//! mass on the silent token. The [`Layout`] metadata names hidden
//! coordinates — which coordinate exposes which (stack-top, state) pair and
//! which coordinate lights up after the run goes dark — so that an external
//! simulator can decode the hidden state and walk the model in lockstep with
//! the machine it was compiled from.
//!
//! `U` and `V` rows and `E` rows are sparse: lists of (column, coefficient)
//! pairs with strictly increasing columns.

use std::collections::{BTreeMap, BTreeSet};
use std::fmt;

use num::Zero;

use super::{is_reserved_token, State, Sym, ValidationReport, BOS_TOKEN, EOS_TOKEN, EPSILON_TOKEN};
use crate::numerics::{saturated_sigmoid, Rational};

/// Feedback tokens: what the model reads back as its previous emission.
#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord)]
pub enum InTok {
    /// The silent token (no emission last step).
    Eps,
    /// Begin of sequence: the input on the very first step.
    Bos,
    Sym(Sym),
}

impl fmt::Display for InTok {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            InTok::Eps => f.write_str(EPSILON_TOKEN),
            InTok::Bos => f.write_str(BOS_TOKEN),
            InTok::Sym(s) => write!(f, "{s}"),
        }
    }
}

/// Emission tokens: what an output score row is for.
#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord)]
pub enum OutTok {
    /// The silent token.
    Eps,
    /// End of sequence: emitting it halts the run.
    Eos,
    Sym(Sym),
}

impl fmt::Display for OutTok {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            OutTok::Eps => f.write_str(EPSILON_TOKEN),
            OutTok::Eos => f.write_str(EOS_TOKEN),
            OutTok::Sym(s) => write!(f, "{s}"),
        }
    }
}

/// Names for hidden coordinates. `ranges` are purely descriptive;
/// `config_cols` and `off_col` are load-bearing for lockstep decoding.
#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct Layout {
    /// Named half-open coordinate ranges `[start, end)`, descriptive only.
    pub ranges: BTreeMap<String, (usize, usize)>,
    /// Coordinate that is hot exactly when the machine's configuration shows
    /// this (stack-1 top, state) pair at an emission step.
    pub config_cols: BTreeMap<(Sym, State), usize>,
    /// Coordinate that is hot once no configuration is exposed any more
    /// (after halting or sticking).
    pub off_col: Option<usize>,
}

/// A simple recurrent language model. All parameters are exact rationals.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct RnnLm {
    /// Output alphabet (user symbols only; the silent and end tokens are
    /// implicit).
    pub sigma: BTreeSet<Sym>,
    /// Hidden dimension.
    pub d: usize,
    /// Micro-steps per emitted symbol.
    pub k: usize,
    /// One-hot embedding coordinates for the feedback alphabet. Must cover
    /// exactly `sigma`, the silent token, and the begin token, with distinct
    /// coordinates `0..embed.len()`.
    pub embed: BTreeMap<InTok, usize>,
    /// Recurrent weights: `d` sparse rows over hidden coordinates.
    pub u: Vec<Vec<(usize, Rational)>>,
    /// Input weights: `d` sparse rows over embedding coordinates.
    pub v: Vec<Vec<(usize, Rational)>>,
    /// Bias, length `d`.
    pub b: Vec<Rational>,
    /// Initial hidden state, length `d`.
    pub h0: Vec<Rational>,
    /// Output score rows, one per emission token over `sigma`, the silent
    /// token, and the end token; sparse over hidden coordinates.
    pub e: BTreeMap<OutTok, Vec<(usize, Rational)>>,
    pub layout: Layout,
}

impl RnnLm {
    /// One micro-step: `sigma(U h + V embed(input) + b)`.
    ///
    /// An input absent from the embedding contributes nothing (validation
    /// reports incomplete embeddings; execution stays total).
    pub fn step_micro(&self, h: &[Rational], input: &InTok) -> Vec<Rational> {
        debug_assert_eq!(h.len(), self.d);
        let in_coord = self.embed.get(input).copied();
        (0..self.d)
            .map(|i| {
                let mut acc = self.b[i].clone();
                for (j, c) in &self.u[i] {
                    if !h[*j].is_zero() {
                        acc += c * &h[*j];
                    }
                }
                if let Some(x) = in_coord {
                    for (j, c) in &self.v[i] {
                        if *j == x {
                            acc += c;
                        }
                    }
                }
                saturated_sigmoid(&acc)
            })
            .collect()
    }

    /// Raw output scores `E h` for every emission token. When the model is a
    /// faithful compilation this vector is a probability distribution; the
    /// caller decides what to do when it is not.
    pub fn output_scores(&self, h: &[Rational]) -> Vec<(OutTok, Rational)> {
        self.e
            .iter()
            .map(|(tok, row)| {
                let mut acc = Rational::zero();
                for (j, c) in row {
                    if !h[*j].is_zero() {
                        acc += c * &h[*j];
                    }
                }
                (tok.clone(), acc)
            })
            .collect()
    }

    /// The emission tokens this model must have score rows for.
    pub fn emission_tokens(&self) -> BTreeSet<OutTok> {
        let mut toks: BTreeSet<OutTok> = [OutTok::Eps, OutTok::Eos].into();
        toks.extend(self.sigma.iter().cloned().map(OutTok::Sym));
        toks
    }

    /// The feedback tokens the embedding must cover.
    pub fn feedback_tokens(&self) -> BTreeSet<InTok> {
        let mut toks: BTreeSet<InTok> = [InTok::Eps, InTok::Bos].into();
        toks.extend(self.sigma.iter().cloned().map(InTok::Sym));
        toks
    }

    pub fn validate(&self) -> ValidationReport {
        let mut rep = ValidationReport::new();
        for s in &self.sigma {
            if is_reserved_token(s.as_str()) {
                rep.violation(format!(
                    "reserved token {:?} declared as an output symbol",
                    s.as_str()
                ));
            }
        }
        if self.d == 0 {
            rep.violation("hidden dimension is zero");
        }
        if self.k == 0 {
            rep.violation("block length k is zero");
        }
        for (name, len) in [
            ("u", self.u.len()),
            ("v", self.v.len()),
            ("b", self.b.len()),
            ("h0", self.h0.len()),
        ] {
            if len != self.d {
                rep.violation(format!(
                    "{name} has {len} rows, expected the hidden dimension {}",
                    self.d
                ));
            }
        }
        // Embedding: exactly the feedback tokens, coordinates a permutation.
        let expected_in = self.feedback_tokens();
        let have_in: BTreeSet<InTok> = self.embed.keys().cloned().collect();
        for missing in expected_in.difference(&have_in) {
            rep.violation(format!("embedding is missing the feedback token {missing}"));
        }
        for extra in have_in.difference(&expected_in) {
            rep.violation(format!("embedding covers undeclared feedback token {extra}"));
        }
        let mut coords_seen: BTreeSet<usize> = BTreeSet::new();
        for (tok, coord) in &self.embed {
            if *coord >= self.embed.len() {
                rep.violation(format!(
                    "embedding coordinate {coord} for {tok} is out of range 0..{}",
                    self.embed.len()
                ));
            }
            if !coords_seen.insert(*coord) {
                rep.violation(format!("embedding coordinate {coord} is used twice"));
            }
        }
        // Output rows: exactly the emission tokens.
        let expected_out = self.emission_tokens();
        let have_out: BTreeSet<OutTok> = self.e.keys().cloned().collect();
        for missing in expected_out.difference(&have_out) {
            rep.violation(format!("output scores are missing the emission token {missing}"));
        }
        for extra in have_out.difference(&expected_out) {
            rep.violation(format!("output scores cover undeclared emission token {extra}"));
        }
        // Sparse rows: strictly increasing in-range columns.
        let check_row = |rep: &mut ValidationReport, what: String, row: &[(usize, Rational)], dim: usize| {
            let mut last: Option<usize> = None;
            for (j, _) in row {
                if *j >= dim {
                    rep.violation(format!("{what}: column {j} is out of range 0..{dim}"));
                }
                if let Some(prev) = last {
                    if *j <= prev {
                        rep.violation(format!(
                            "{what}: columns must be strictly increasing (saw {j} after {prev})"
                        ));
                    }
                }
                last = Some(*j);
            }
        };
        for (i, row) in self.u.iter().enumerate() {
            check_row(&mut rep, format!("recurrent row {i}"), row, self.d);
        }
        let embed_dim = self.embed.len();
        for (i, row) in self.v.iter().enumerate() {
            check_row(&mut rep, format!("input row {i}"), row, embed_dim);
        }
        for (tok, row) in &self.e {
            check_row(&mut rep, format!("output row for {tok}"), row, self.d);
        }
        // Layout bounds.
        for (name, (start, end)) in &self.layout.ranges {
            if start > end || *end > self.d {
                rep.violation(format!(
                    "layout range {name} [{start}, {end}) does not fit the hidden dimension {}",
                    self.d
                ));
            }
        }
        for ((top, state), col) in &self.layout.config_cols {
            if *col >= self.d {
                rep.violation(format!(
                    "layout column {col} for ({top}, {state}) is out of range 0..{}",
                    self.d
                ));
            }
        }
        if let Some(col) = self.layout.off_col {
            if col >= self.d {
                rep.violation(format!(
                    "layout off column {col} is out of range 0..{}",
                    self.d
                ));
            }
        }
        rep
    }
}
