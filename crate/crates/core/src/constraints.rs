//! Weakly-hard constraints, execution traces, and the brute-force semantic
//! oracle every automaton is checked against.
//!
//! A trace symbol `1` is a deadline hit and `0` a miss. Words are stored
//! oldest-first: `bits[0]` is the first job activation. In the descending
//! notation `a_{ℓ:1}` commonly used for traces this means `bits[i]`
//! corresponds to `a_{i+1}`, and the rendered string reads from the oldest
//! symbol on the left to the newest on the right.

use std::fmt;
use std::hash::{Hash, Hasher};
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Longest word length [`enumerate_language`] will expand exhaustively.
pub const MAX_ENUMERATION_LENGTH: usize = 24;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum ConstraintKind {
    AnyMiss,
    AnyHit,
}

/// An `AnyMiss(m, k)` or `AnyHit(h, k)` constraint.
///
/// Equality is semantic: `AnyHit(h, k) == AnyMiss(k - h, k)`.
#[derive(Debug, Clone, Copy, Serialize, Deserialize)]
pub struct WeaklyHardConstraint {
    kind: ConstraintKind,
    value: u32,
    k: u32,
}

impl WeaklyHardConstraint {
    pub fn new(kind: ConstraintKind, value: u32, k: u32) -> Result<Self> {
        if value == 0 || value >= k {
            return Err(Error::InvalidParameters(format!(
                "weakly-hard constraint requires 1 <= {value} < k = {k}"
            )));
        }
        Ok(Self { kind, value, k })
    }

    /// At most `m` misses in every window of `k` activations.
    pub fn any_miss(m: u32, k: u32) -> Result<Self> {
        Self::new(ConstraintKind::AnyMiss, m, k)
    }

    /// At least `h` hits in every window of `k` activations.
    pub fn any_hit(h: u32, k: u32) -> Result<Self> {
        Self::new(ConstraintKind::AnyHit, h, k)
    }

    pub fn kind(&self) -> ConstraintKind {
        self.kind
    }

    /// The raw parameter: `m` for AnyMiss, `h` for AnyHit.
    pub fn value(&self) -> u32 {
        self.value
    }

    pub fn k(&self) -> u32 {
        self.k
    }

    /// Misses tolerated per window.
    pub fn misses(&self) -> u32 {
        match self.kind {
            ConstraintKind::AnyMiss => self.value,
            ConstraintKind::AnyHit => self.k - self.value,
        }
    }

    /// Hits required per window.
    pub fn hits(&self) -> u32 {
        self.k - self.misses()
    }

    pub fn dual(&self) -> Self {
        let kind = match self.kind {
            ConstraintKind::AnyMiss => ConstraintKind::AnyHit,
            ConstraintKind::AnyHit => ConstraintKind::AnyMiss,
        };
        Self {
            kind,
            value: self.k - self.value,
            k: self.k,
        }
    }

    /// Same constraint expressed as AnyMiss.
    pub fn to_any_miss(&self) -> Self {
        Self {
            kind: ConstraintKind::AnyMiss,
            value: self.misses(),
            k: self.k,
        }
    }
}

impl PartialEq for WeaklyHardConstraint {
    fn eq(&self, other: &Self) -> bool {
        self.k == other.k && self.misses() == other.misses()
    }
}

impl Eq for WeaklyHardConstraint {}

impl Hash for WeaklyHardConstraint {
    fn hash<H: Hasher>(&self, state: &mut H) {
        self.k.hash(state);
        self.misses().hash(state);
    }
}

impl fmt::Display for WeaklyHardConstraint {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self.kind {
            ConstraintKind::AnyMiss => write!(f, "anymiss:{}:{}", self.value, self.k),
            ConstraintKind::AnyHit => write!(f, "anyhit:{}:{}", self.value, self.k),
        }
    }
}

/// A finite execution trace over `{0, 1}`, oldest symbol first.
#[derive(Debug, Clone, Default, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct Word {
    bits: Vec<bool>,
}

impl Word {
    pub fn new(bits: Vec<bool>) -> Self {
        Self { bits }
    }

    pub fn empty() -> Self {
        Self::default()
    }

    /// The `len` lowest bits of `value`, most significant first.
    pub fn from_index(value: u64, len: usize) -> Self {
        let bits = (0..len).rev().map(|i| (value >> i) & 1 == 1).collect();
        Self { bits }
    }

    pub fn bits(&self) -> &[bool] {
        &self.bits
    }

    pub fn len(&self) -> usize {
        self.bits.len()
    }

    pub fn is_empty(&self) -> bool {
        self.bits.is_empty()
    }

    pub fn push(&mut self, hit: bool) {
        self.bits.push(hit);
    }

    pub fn prefix(&self, len: usize) -> Word {
        Word::new(self.bits[..len].to_vec())
    }

    pub fn misses(&self) -> usize {
        self.bits.iter().filter(|b| !**b).count()
    }
}

impl fmt::Display for Word {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        for &b in &self.bits {
            f.write_str(if b { "1" } else { "0" })?;
        }
        Ok(())
    }
}

impl FromStr for Word {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        s.chars()
            .map(|ch| match ch {
                '0' => Ok(false),
                '1' => Ok(true),
                other => Err(Error::InvalidParameters(format!(
                    "word symbol must be 0 or 1, got {other:?}"
                ))),
            })
            .collect::<Result<Vec<_>>>()
            .map(Word::new)
    }
}

/// Whether `word` is an admissible prefix of a trace satisfying `constraint`.
///
/// The trace is taken to be preceded by an unbounded history of hits, which
/// is the behaviour encoded by the automaton's initial state. Every window of
/// `k` activations ending inside the word is therefore checked, with the
/// part before the first symbol counting as hits. Windows reaching past the
/// last symbol are not constrained further: any continuation of hits keeps
/// them within budget.
pub fn satisfies(word: &Word, constraint: &WeaklyHardConstraint) -> bool {
    let k = constraint.k() as usize;
    let budget = constraint.misses() as usize;
    let bits = word.bits();
    let mut misses = 0usize;
    for (end, &hit) in bits.iter().enumerate() {
        if !hit {
            misses += 1;
        }
        if end >= k && !bits[end - k] {
            misses -= 1;
        }
        if misses > budget {
            return false;
        }
    }
    true
}

/// All words of length `len` satisfying `constraint`, in lexicographic order.
pub fn enumerate_language(constraint: &WeaklyHardConstraint, len: usize) -> Result<Vec<Word>> {
    if len > MAX_ENUMERATION_LENGTH {
        return Err(Error::LimitExceeded {
            value: len,
            limit: MAX_ENUMERATION_LENGTH,
        });
    }
    Ok((0..1u64 << len)
        .map(|v| Word::from_index(v, len))
        .filter(|w| satisfies(w, constraint))
        .collect())
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    fn w(s: &str) -> Word {
        s.parse().unwrap()
    }

    #[test]
    fn rejects_invalid_parameters() {
        assert!(WeaklyHardConstraint::any_miss(0, 5).is_err());
        assert!(WeaklyHardConstraint::any_miss(5, 5).is_err());
        assert!(WeaklyHardConstraint::any_hit(6, 5).is_err());
        assert!(WeaklyHardConstraint::any_hit(4, 5).is_ok());
    }

    #[test]
    fn satisfies_examples() {
        let c = WeaklyHardConstraint::any_miss(2, 5).unwrap();
        assert!(satisfies(&w("1111111"), &c));
        assert!(!satisfies(&w("0110100"), &c));
        assert!(satisfies(&w("00"), &c));
        assert!(!satisfies(&w("000"), &c));
        assert!(satisfies(&w(""), &c));
        assert!(satisfies(&w("0011100111001"), &c));
        assert!(!satisfies(&w("00111000"), &c));
    }

    #[test]
    fn enumerate_small_counts() {
        let c = WeaklyHardConstraint::any_miss(2, 5).unwrap();
        let one = enumerate_language(&c, 1).unwrap();
        assert_eq!(one, vec![w("0"), w("1")]);
        assert_eq!(enumerate_language(&c, 2).unwrap().len(), 4);
        assert_eq!(enumerate_language(&c, 3).unwrap().len(), 7);
        assert_eq!(enumerate_language(&c, 0).unwrap(), vec![Word::empty()]);
        assert!(matches!(
            enumerate_language(&c, 25),
            Err(Error::LimitExceeded { value: 25, limit: 24 })
        ));
    }

    #[test]
    fn dual_examples() {
        let c = WeaklyHardConstraint::any_miss(2, 5).unwrap();
        let d = c.dual();
        assert_eq!(d.kind(), ConstraintKind::AnyHit);
        assert_eq!(d.value(), 3);
        assert_eq!(d, c);
        assert_eq!(d.dual().kind(), ConstraintKind::AnyMiss);
        assert_eq!(d.dual().value(), 2);

        let h = WeaklyHardConstraint::any_hit(8, 10).unwrap().dual();
        assert_eq!((h.kind(), h.value(), h.k()), (ConstraintKind::AnyMiss, 2, 10));
    }

    #[test]
    fn display_and_parse() {
        assert_eq!(w("0110100").to_string(), "0110100");
        assert!("012".parse::<Word>().is_err());
        let c = WeaklyHardConstraint::any_hit(3, 5).unwrap();
        assert_eq!(c.to_string(), "anyhit:3:5");
        assert_eq!(c.to_any_miss().to_string(), "anymiss:2:5");
    }

    fn constraint_strategy() -> impl Strategy<Value = WeaklyHardConstraint> {
        (2u32..10)
            .prop_flat_map(|k| (1..k, Just(k), any::<bool>()))
            .prop_map(|(v, k, miss)| {
                if miss {
                    WeaklyHardConstraint::any_miss(v, k).unwrap()
                } else {
                    WeaklyHardConstraint::any_hit(v, k).unwrap()
                }
            })
    }

    fn word_strategy() -> impl Strategy<Value = Word> {
        proptest::collection::vec(any::<bool>(), 0..40).prop_map(Word::new)
    }

    proptest! {
        #[test]
        fn duality_preserves_satisfaction(c in constraint_strategy(), word in word_strategy()) {
            prop_assert_eq!(satisfies(&word, &c), satisfies(&word, &c.dual()));
        }

        #[test]
        fn prefix_closed(c in constraint_strategy(), word in word_strategy()) {
            if satisfies(&word, &c) {
                for len in 0..word.len() {
                    prop_assert!(satisfies(&word.prefix(len), &c));
                }
            }
        }

        #[test]
        fn matches_naive_window_count(c in constraint_strategy(), word in word_strategy()) {
            let k = c.k() as usize;
            let bits = word.bits();
            let naive = (0..bits.len()).all(|end| {
                let start = (end + 1).saturating_sub(k);
                bits[start..=end].iter().filter(|b| !**b).count() <= c.misses() as usize
            });
            prop_assert_eq!(satisfies(&word, &c), naive);
        }
    }

    #[test]
    fn language_counts_at_most_double() {
        let c = WeaklyHardConstraint::any_miss(2, 6).unwrap();
        let mut prev = 1usize;
        for len in 1..=14 {
            let count = enumerate_language(&c, len).unwrap().len();
            assert!(count <= 2 * prev);
            assert!(count >= prev);
            prev = count;
        }
    }
}
