//! Reduced words in a free group of fixed rank.
//!
//! A letter is a nonzero `i32`: `k > 0` is the `k`-th basis generator and
//! `-k` its inverse. Words are always stored freely reduced.
//!
//! Text form uses `a, b, c, ...` for generators and `A, B, C, ...` for their
//! inverses; the identity is written `1`.

use std::cmp::Ordering;
use std::fmt;

use serde::{Deserialize, Deserializer, Serialize, Serializer};

use crate::error::{Error, Result};

/// Largest rank expressible with single ASCII letters.
pub const MAX_RANK: usize = 26;

/// A freely reduced word.
#[derive(Clone, PartialEq, Eq, Hash, Default)]
pub struct Word(Vec<i32>);

/// Position of a letter in the global order `a < A < b < B < ...`.
#[inline]
pub fn letter_key(x: i32) -> u32 {
    2 * (x.unsigned_abs() - 1) + u32::from(x < 0)
}

/// Inverse of [`letter_key`].
#[inline]
pub fn letter_from_key(k: u32) -> i32 {
    let g = (k / 2 + 1) as i32;
    if k.is_multiple_of(2) {
        g
    } else {
        -g
    }
}

/// All `2 * rank` letters in canonical order.
pub fn letters(rank: usize) -> impl Iterator<Item = i32> {
    (0..2 * rank as u32).map(letter_from_key)
}

impl Word {
    pub fn identity() -> Self {
        Word(Vec::new())
    }

    pub fn letter(x: i32) -> Self {
        assert!(x != 0, "zero is not a letter");
        Word(vec![x])
    }

    /// Freely reduces a raw letter sequence, checking every letter against `rank`.
    pub fn reduce(raw: &[i32], rank: usize) -> Result<Self> {
        for &x in raw {
            if x == 0 || x.unsigned_abs() as usize > rank {
                return Err(Error::InvalidGenerator { letter: x, rank });
            }
        }
        Ok(Self::from_letters(raw.iter().copied()))
    }

    /// Freely reduces letters without a rank check.
    pub fn from_letters<I: IntoIterator<Item = i32>>(raw: I) -> Self {
        let mut out: Vec<i32> = Vec::new();
        for x in raw {
            debug_assert!(x != 0);
            if out.last() == Some(&-x) {
                out.pop();
            } else {
                out.push(x);
            }
        }
        Word(out)
    }

    pub fn parse(s: &str, rank: usize) -> Result<Self> {
        let s = s.trim();
        if s == "1" || s.is_empty() {
            return Ok(Word::identity());
        }
        let mut raw = Vec::with_capacity(s.len());
        for ch in s.chars() {
            let x = match ch {
                'a'..='z' => (ch as i32) - ('a' as i32) + 1,
                'A'..='Z' => -((ch as i32) - ('A' as i32) + 1),
                _ => return Err(Error::Parse(format!("bad letter {ch:?} in word {s:?}"))),
            };
            raw.push(x);
        }
        Self::reduce(&raw, rank)
    }

    pub fn letters(&self) -> &[i32] {
        &self.0
    }

    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_identity(&self) -> bool {
        self.0.is_empty()
    }

    pub fn is_empty(&self) -> bool {
        self.is_identity()
    }

    /// Largest generator index used, 0 for the identity.
    pub fn max_generator(&self) -> usize {
        self.0.iter().map(|x| x.unsigned_abs() as usize).max().unwrap_or(0)
    }

    pub fn multiply(&self, other: &Word) -> Word {
        let a = &self.0;
        let b = &other.0;
        let mut k = 0;
        while k < a.len() && k < b.len() && a[a.len() - 1 - k] == -b[k] {
            k += 1;
        }
        let mut out = Vec::with_capacity(a.len() + b.len() - 2 * k);
        out.extend_from_slice(&a[..a.len() - k]);
        out.extend_from_slice(&b[k..]);
        Word(out)
    }

    pub fn inverse(&self) -> Word {
        Word(self.0.iter().rev().map(|x| -x).collect())
    }

    pub fn pow(&self, k: i64) -> Word {
        let base = if k < 0 { self.inverse() } else { self.clone() };
        let mut out = Word::identity();
        for _ in 0..k.unsigned_abs() {
            out = out.multiply(&base);
        }
        out
    }

    /// `self * g * self^-1`.
    pub fn conjugate(&self, g: &Word) -> Word {
        self.multiply(g).multiply(&self.inverse())
    }

    /// Returns `(core, conjugator)` with `self = conjugator * core * conjugator^-1`
    /// and `core` cyclically reduced.
    pub fn cyclic_reduce(&self) -> (Word, Word) {
        let w = &self.0;
        let mut k = 0;
        while 2 * k + 1 < w.len() && w[k] == -w[w.len() - 1 - k] {
            k += 1;
        }
        (Word(w[k..w.len() - k].to_vec()), Word(w[..k].to_vec()))
    }

    pub fn is_cyclically_reduced(&self) -> bool {
        self.0.len() < 2 || self.0[0] != -self.0[self.0.len() - 1]
    }

    pub fn prefix(&self, n: usize) -> Word {
        Word(self.0[..n].to_vec())
    }

    pub fn suffix_from(&self, n: usize) -> Word {
        Word(self.0[n..].to_vec())
    }

    /// Replaces each letter `k` by `images[k-1]` (and inverses by inverses).
    pub fn substitute(&self, images: &[Word]) -> Word {
        let mut out = Vec::new();
        for &x in &self.0 {
            let img = &images[x.unsigned_abs() as usize - 1];
            if x > 0 {
                push_reduced(&mut out, img.0.iter().copied());
            } else {
                push_reduced(&mut out, img.0.iter().rev().map(|y| -y));
            }
        }
        Word(out)
    }
}

fn push_reduced<I: Iterator<Item = i32>>(out: &mut Vec<i32>, it: I) {
    for x in it {
        if out.last() == Some(&-x) {
            out.pop();
        } else {
            out.push(x);
        }
    }
}

/// Shortlex order: length first, then letters compared by [`letter_key`].
impl Ord for Word {
    fn cmp(&self, other: &Self) -> Ordering {
        self.0.len().cmp(&other.0.len()).then_with(|| {
            for (x, y) in self.0.iter().zip(&other.0) {
                match letter_key(*x).cmp(&letter_key(*y)) {
                    Ordering::Equal => continue,
                    o => return o,
                }
            }
            Ordering::Equal
        })
    }
}

impl PartialOrd for Word {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}

impl fmt::Display for Word {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.0.is_empty() {
            return f.write_str("1");
        }
        for &x in &self.0 {
            let base = if x > 0 { b'a' } else { b'A' };
            let c = (base + (x.unsigned_abs() - 1) as u8) as char;
            write!(f, "{c}")?;
        }
        Ok(())
    }
}

impl fmt::Debug for Word {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "Word({self})")
    }
}

impl Serialize for Word {
    fn serialize<S: Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        s.collect_str(self)
    }
}

impl<'de> Deserialize<'de> for Word {
    fn deserialize<D: Deserializer<'de>>(d: D) -> std::result::Result<Self, D::Error> {
        let s = String::deserialize(d)?;
        Word::parse(&s, MAX_RANK).map_err(serde::de::Error::custom)
    }
}

/// A uniformly random reduced word of length exactly `len`.
pub fn random_word<R: rand::Rng + ?Sized>(rng: &mut R, rank: usize, len: usize) -> Word {
    let mut out: Vec<i32> = Vec::with_capacity(len);
    while out.len() < len {
        let g = rng.gen_range(1..=rank as i32);
        let x = if rng.gen_bool(0.5) { g } else { -g };
        if out.last() != Some(&-x) {
            out.push(x);
        }
    }
    Word(out)
}

/// Convenience for tests and examples: parses with the maximal rank, panicking on bad input.
pub fn w(s: &str) -> Word {
    Word::parse(s, MAX_RANK).expect("valid word literal")
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    #[test]
    fn reduce_examples() {
        assert_eq!(Word::reduce(&[1, -1], 2).unwrap(), Word::identity());
        assert_eq!(Word::reduce(&[1, 2, -2, 1], 2).unwrap(), w("aa"));
        assert_eq!(Word::reduce(&[1, 2], 2).unwrap(), w("ab"));
        assert!(matches!(
            Word::reduce(&[3], 2),
            Err(Error::InvalidGenerator { letter: 3, .. })
        ));
        assert!(Word::reduce(&[0], 2).is_err());
    }

    #[test]
    fn multiply_examples() {
        assert_eq!(w("a").multiply(&w("A")), Word::identity());
        assert_eq!(w("ab").multiply(&w("Bc")), w("ac"));
        assert_eq!(w("abc").multiply(&Word::identity()), w("abc"));
    }

    #[test]
    fn inverse_examples() {
        assert_eq!(w("ab").inverse(), w("BA"));
        assert_eq!(Word::identity().inverse(), Word::identity());
    }

    #[test]
    fn cyclic_reduce_examples() {
        assert_eq!(w("abA").cyclic_reduce(), (w("b"), w("a")));
        assert_eq!(w("ab").cyclic_reduce(), (w("ab"), Word::identity()));
        assert_eq!(Word::identity().cyclic_reduce(), (Word::identity(), Word::identity()));
        assert_eq!(w("aA").cyclic_reduce().0, Word::identity());
    }

    #[test]
    fn text_form() {
        assert_eq!(w("aBc").to_string(), "aBc");
        assert_eq!(Word::identity().to_string(), "1");
        assert!(Word::parse("ac", 2).is_err());
        assert!(Word::parse("a-b", 2).is_err());
    }

    #[test]
    fn shortlex_order() {
        let mut v = vec![w("b"), w("A"), w("a"), w("B"), w("aa"), Word::identity()];
        v.sort();
        assert_eq!(v, vec![Word::identity(), w("a"), w("A"), w("b"), w("B"), w("aa")]);
    }

    fn word_strategy(rank: i32, max_len: usize) -> impl Strategy<Value = Word> {
        prop::collection::vec((1..=rank, any::<bool>()), 0..max_len)
            .prop_map(|v| Word::from_letters(v.into_iter().map(|(g, s)| if s { -g } else { g })))
    }

    proptest! {
        #[test]
        fn reduce_is_idempotent(u in word_strategy(3, 12)) {
            prop_assert_eq!(Word::reduce(u.letters(), 3).unwrap(), u);
        }

        #[test]
        fn multiply_associative_and_parity(u in word_strategy(3, 10), v in word_strategy(3, 10), x in word_strategy(3, 10)) {
            prop_assert_eq!(u.multiply(&v).multiply(&x), u.multiply(&v.multiply(&x)));
            let uv = u.multiply(&v);
            prop_assert!(uv.len() <= u.len() + v.len());
            prop_assert_eq!(uv.len() % 2, (u.len() + v.len()) % 2);
        }

        #[test]
        fn inverse_laws(u in word_strategy(3, 12)) {
            prop_assert!(u.multiply(&u.inverse()).is_identity());
            prop_assert_eq!(u.inverse().inverse(), u);
        }

        #[test]
        fn cyclic_reduce_conjugates_back(u in word_strategy(3, 12)) {
            let (core, conj) = u.cyclic_reduce();
            prop_assert!(core.is_cyclically_reduced());
            prop_assert_eq!(conj.conjugate(&core), u);
        }

        #[test]
        fn text_round_trip(u in word_strategy(4, 12)) {
            prop_assert_eq!(Word::parse(&u.to_string(), 4).unwrap(), u);
        }
    }
}
