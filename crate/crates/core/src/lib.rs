//! ptmc — an exact-rational toolkit for probabilistic Turing machines,
//! two-stack pushdown automata, and the simple recurrent networks they
//! compile into.
//!
//! The crate is organized as a pipeline:
//!
//! * [`numerics`] — arbitrary-precision rationals, the saturated sigmoid,
//!   dyadicity, finite distributions. No floating point anywhere.
//! * [`machines`] — the machine classes and their validation rules.
//! * [`format`] — a strict line-oriented text format with canonical
//!   serialization (round-trips are byte-exact).
//! * [`simulate`] — path enumeration, semimeasure tables, halting mass,
//!   exact seeded sampling, and network execution.
//! * [`equivalence`] — bounded-exhaustive and statistical comparisons
//!   between machines, plus structural laws (path weights, dyadic masses).
//! * [`transforms`] — the compilation passes between machine classes, each
//!   returning the compiled machine plus a report of what was checked.
//! * [`cli`] — the `ptmc` command-line surface over all of the above.

pub mod cli;
pub mod equivalence;
pub mod error;
pub mod format;
pub mod machines;
pub mod numerics;
pub mod simulate;
pub mod transforms;
