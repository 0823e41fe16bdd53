//! Exact rational arithmetic: the numeric substrate for every machine,
//! simulator, and compilation pass in this crate.
//!
//! All quantities — transition weights, semimeasure values, network
//! parameters, sampled thresholds — are arbitrary-precision rationals in
//! canonical form (reduced, positive denominator). Nothing in this crate
//! touches floating point: equality of weights is decidable and every
//! reported number is exactly the number the machine defines.
//!
//! The type is an alias for [`num::BigRational`], which already maintains the
//! canonical-form invariant on every operation; this module adds the strict
//! literal grammar, the saturated (hard) sigmoid used by the simple network
//! semantics, the dyadicity predicate, and a small finite-distribution
//! container used wherever per-key weights must sum to one.

use std::collections::BTreeMap;
use std::fmt::Write as _;
use std::str::FromStr;

use num::bigint::BigInt;
use num::rational::BigRational;
use num::{One, Signed, Zero};

use crate::error::NumericError;

/// Exact rational number in canonical form (reduced, denominator > 0).
pub type Rational = BigRational;

/// Convenience constructor from machine integers.
///
/// Panics if `d == 0`; intended for literals in code and tests, where a zero
/// denominator is a programming error. Runtime input goes through
/// [`rat_parse`], which reports the failure instead.
pub fn rat(n: i64, d: i64) -> Rational {
    assert!(d != 0, "rat(n, 0) is not a number");
    Rational::new(BigInt::from(n), BigInt::from(d))
}

/// Parse a rational literal: `n` or `n/d`, decimal digits, with an optional
/// leading `-` on the numerator only. The denominator must be positive, so
/// `1/0` and `1/-2` are rejected. Whitespace is not trimmed — the grammar is
/// strict so that serialized machines round-trip byte-for-byte.
pub fn rat_parse(s: &str) -> Result<Rational, NumericError> {
    let invalid = || NumericError::InvalidLiteral {
        literal: s.to_string(),
    };
    let (num_part, den_part) = match s.split_once('/') {
        Some((n, d)) => (n, Some(d)),
        None => (s, None),
    };
    let digits = |t: &str| !t.is_empty() && t.bytes().all(|b| b.is_ascii_digit());
    let num_ok = match num_part.strip_prefix('-') {
        Some(rest) => digits(rest),
        None => digits(num_part),
    };
    if !num_ok {
        return Err(invalid());
    }
    let numer = BigInt::from_str(num_part).map_err(|_| invalid())?;
    let denom = match den_part {
        None => BigInt::one(),
        Some(d) => {
            if !digits(d) {
                return Err(invalid());
            }
            let denom = BigInt::from_str(d).map_err(|_| invalid())?;
            if denom.is_zero() {
                return Err(NumericError::ZeroDenominator {
                    literal: s.to_string(),
                });
            }
            denom
        }
    };
    Ok(Rational::new(numer, denom))
}

/// Render a rational in the same grammar [`rat_parse`] accepts: `n` when the
/// denominator is one, `n/d` otherwise. Canonical form makes this a bijection
/// on values.
pub fn rat_to_string(r: &Rational) -> String {
    let mut out = String::new();
    if r.denom().is_one() {
        let _ = write!(out, "{}", r.numer());
    } else {
        let _ = write!(out, "{}/{}", r.numer(), r.denom());
    }
    out
}

/// The saturated sigmoid: clamp to the unit interval. This is the activation
/// of the simple network semantics — exactly 0 below zero, exactly 1 above
/// one, and the identity in between, so network states stay rational.
pub fn saturated_sigmoid(x: &Rational) -> Rational {
    if x.is_negative() {
        Rational::zero()
    } else if x > &Rational::one() {
        Rational::one()
    } else {
        x.clone()
    }
}

// ---------------------------------------------------------------------
// Binary stacks as rationals
// ---------------------------------------------------------------------
//
// A stack of bits is coded as a base-10 fraction in [0, 1/3]: one digit
// per bit (bit 0 ↦ digit 1, bit 1 ↦ digit 3), topmost bit in the tenths
// place, empty stack = 0. Because every digit is 1 or 3, the tail
// beyond the top digit is at most 1/3 of a place, so pushes, pops, and
// top-bit readouts are all single affine-plus-clamp forms — exactly
// what one saturated-sigmoid neuron computes in one step. These
// functions are both ordinary utilities and the reference semantics for
// compiled stack neurons.

/// The digit coding a bit: 1 for `false`, 3 for `true`.
fn stack_digit(bit: bool) -> Rational {
    Rational::from_integer(if bit { 3 } else { 1 }.into())
}

/// The code of the empty stack.
pub fn stack_empty() -> Rational {
    Rational::zero()
}

/// Push a bit: `σ(enc/10 + d/10)` where `d` is the bit's digit.
pub fn stack_push_bit(enc: &Rational, bit: bool) -> Rational {
    saturated_sigmoid(&((enc + stack_digit(bit)) / Rational::from_integer(10.into())))
}

/// Pop a bit known to be on top: `σ(10·enc − d)`. Only meaningful when
/// the stack is non-empty and its top bit is `bit`; the caller learns
/// the top bit first via [`stack_top_readout`].
pub fn stack_pop_bit(enc: &Rational, bit: bool) -> Rational {
    saturated_sigmoid(&(Rational::from_integer(10.into()) * enc - stack_digit(bit)))
}

/// Read the top bit as a neuron does: `σ(10·enc − 2)` is exactly 1 when
/// the top bit is 1, and exactly 0 when the top bit is 0 or the stack
/// is empty.
pub fn stack_top_readout(enc: &Rational) -> Rational {
    saturated_sigmoid(&(Rational::from_integer(10.into()) * enc - Rational::from_integer(2.into())))
}

/// Decode the top bit; `None` on the empty stack.
pub fn stack_top_bit(enc: &Rational) -> Option<bool> {
    if enc.is_zero() {
        None
    } else {
        Some(stack_top_readout(enc).is_one())
    }
}

/// Code a whole stack, given bottom-to-top.
pub fn stack_encode(bits: &[bool]) -> Rational {
    bits.iter().fold(stack_empty(), |enc, b| stack_push_bit(&enc, *b))
}

/// True when the denominator (in canonical form) is a power of two. Zero and
/// integers are dyadic. Dyadic weights are exactly the ones a finite fair-coin
/// protocol can realize, which is what the coin-lowering pass guarantees.
pub fn is_dyadic(r: &Rational) -> bool {
    let d = r.denom();
    // d >= 1 in canonical form; d & (d - 1) == 0 iff d is a power of two.
    (d & &(d - BigInt::one())).is_zero()
}

/// A finite map from keys to rational mass. Used for per-key transition
/// weights, emission distributions, and yield tables, wherever "these numbers
/// must sum to one" (or "at most one") is the contract being checked.
///
/// Zero-mass entries are never stored, so the support is canonical and two
/// distributions are equal iff they assign the same mass everywhere.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct FiniteDist<K: Ord> {
    mass: BTreeMap<K, Rational>,
}

impl<K: Ord> Default for FiniteDist<K> {
    fn default() -> Self {
        Self::new()
    }
}

impl<K: Ord> FiniteDist<K> {
    pub fn new() -> Self {
        FiniteDist {
            mass: BTreeMap::new(),
        }
    }

    pub fn from_pairs(pairs: impl IntoIterator<Item = (K, Rational)>) -> Self {
        let mut d = Self::new();
        for (k, w) in pairs {
            d.add_mass(k, w);
        }
        d
    }

    /// Add mass to a key (creating it if absent). Adding zero is a no-op and
    /// an entry whose mass becomes zero is removed.
    pub fn add_mass(&mut self, key: K, w: Rational) {
        if w.is_zero() {
            return;
        }
        let entry = self.mass.entry(key).or_insert_with(Rational::zero);
        *entry += w;
        if entry.is_zero() {
            // Reachable only when signed mass cancels; keep support canonical.
            self.mass.retain(|_, v| !v.is_zero());
        }
    }

    /// Mass assigned to `key` (zero if absent).
    pub fn mass_of(&self, key: &K) -> Rational {
        self.mass.get(key).cloned().unwrap_or_else(Rational::zero)
    }

    pub fn total_mass(&self) -> Rational {
        self.mass.values().fold(Rational::zero(), |a, b| a + b)
    }

    /// Exactly one unit of total mass.
    pub fn is_normalized(&self) -> bool {
        self.total_mass().is_one()
    }

    /// At most one unit of total mass.
    pub fn is_subnormalized(&self) -> bool {
        self.total_mass() <= Rational::one()
    }

    pub fn iter(&self) -> impl Iterator<Item = (&K, &Rational)> {
        self.mass.iter()
    }

    pub fn len(&self) -> usize {
        self.mass.len()
    }

    pub fn is_empty(&self) -> bool {
        self.mass.is_empty()
    }
}

impl<K: Ord> IntoIterator for FiniteDist<K> {
    type Item = (K, Rational);
    type IntoIter = std::collections::btree_map::IntoIter<K, Rational>;
    fn into_iter(self) -> Self::IntoIter {
        self.mass.into_iter()
    }
}
