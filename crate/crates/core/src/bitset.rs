//! Fixed-length bitsets backing group subsets and digraph rows.
//!
//! Bit `i` lives in word `i / 64` at position `i % 64`. Bits at positions
//! `>= len` are always zero; every mutating operation re-masks the top word.

use std::cmp::Ordering;
use std::fmt;

use smallvec::SmallVec;

pub(crate) type Words = SmallVec<[u64; 1]>;

const WORD: usize = 64;

#[derive(Clone, PartialEq, Eq, Hash)]
pub struct BitSet {
    len: usize,
    words: Words,
}

#[inline]
fn word_count(len: usize) -> usize {
    len.div_ceil(WORD)
}

#[inline]
fn top_mask(len: usize) -> u64 {
    match len % WORD {
        0 => u64::MAX,
        r => (1u64 << r) - 1,
    }
}

impl BitSet {
    pub fn new(len: usize) -> Self {
        let mut words = Words::new();
        words.resize(word_count(len), 0);
        BitSet { len, words }
    }

    pub fn full(len: usize) -> Self {
        let mut words = Words::new();
        words.resize(word_count(len), u64::MAX);
        let mut set = BitSet { len, words };
        set.trim();
        set
    }

    /// Builds a set of length `len <= 64` from the low bits of `mask`.
    pub fn from_mask(len: usize, mask: u64) -> Self {
        assert!(len <= WORD, "from_mask needs len <= 64");
        let mut set = BitSet::new(len);
        if len > 0 {
            set.words[0] = mask & top_mask(len);
        }
        set
    }

    pub fn from_indices<I: IntoIterator<Item = usize>>(len: usize, indices: I) -> Self {
        let mut set = BitSet::new(len);
        for i in indices {
            set.insert(i);
        }
        set
    }

    #[inline]
    fn trim(&mut self) {
        if let Some(last) = self.words.last_mut() {
            *last &= top_mask(self.len);
        }
    }

    #[inline]
    pub fn len(&self) -> usize {
        self.len
    }

    #[inline]
    pub fn words(&self) -> &[u64] {
        &self.words
    }

    /// The single backing word, for sets of length at most 64.
    #[inline]
    pub fn as_mask(&self) -> Option<u64> {
        match self.words.len() {
            0 => Some(0),
            1 => Some(self.words[0]),
            _ => None,
        }
    }

    #[inline]
    pub fn count(&self) -> usize {
        self.words.iter().map(|w| w.count_ones() as usize).sum()
    }

    #[inline]
    pub fn is_empty(&self) -> bool {
        self.words.iter().all(|&w| w == 0)
    }

    #[inline]
    pub fn contains(&self, i: usize) -> bool {
        i < self.len && self.words[i / WORD] >> (i % WORD) & 1 == 1
    }

    /// Inserts `i`, returning whether it was newly added.
    #[inline]
    pub fn insert(&mut self, i: usize) -> bool {
        assert!(i < self.len, "bit {i} out of range for length {}", self.len);
        let w = &mut self.words[i / WORD];
        let bit = 1u64 << (i % WORD);
        let fresh = *w & bit == 0;
        *w |= bit;
        fresh
    }

    #[inline]
    pub fn remove(&mut self, i: usize) -> bool {
        if i >= self.len {
            return false;
        }
        let w = &mut self.words[i / WORD];
        let bit = 1u64 << (i % WORD);
        let present = *w & bit != 0;
        *w &= !bit;
        present
    }

    pub fn first(&self) -> Option<usize> {
        self.words
            .iter()
            .enumerate()
            .find(|(_, &w)| w != 0)
            .map(|(i, w)| i * WORD + w.trailing_zeros() as usize)
    }

    pub fn iter(&self) -> Ones<'_> {
        Ones {
            words: &self.words,
            idx: 0,
            cur: self.words.first().copied().unwrap_or(0),
        }
    }

    pub fn union_with(&mut self, other: &BitSet) {
        debug_assert_eq!(self.len, other.len);
        for (a, b) in self.words.iter_mut().zip(&other.words) {
            *a |= b;
        }
    }

    pub fn intersect_with(&mut self, other: &BitSet) {
        debug_assert_eq!(self.len, other.len);
        for (a, b) in self.words.iter_mut().zip(&other.words) {
            *a &= b;
        }
    }

    pub fn difference_with(&mut self, other: &BitSet) {
        debug_assert_eq!(self.len, other.len);
        for (a, b) in self.words.iter_mut().zip(&other.words) {
            *a &= !b;
        }
    }

    pub fn complement(&self) -> BitSet {
        let mut out = self.clone();
        for w in out.words.iter_mut() {
            *w = !*w;
        }
        out.trim();
        out
    }

    pub fn is_subset(&self, other: &BitSet) -> bool {
        self.words
            .iter()
            .zip(&other.words)
            .all(|(a, b)| a & !b == 0)
    }

    pub fn intersects(&self, other: &BitSet) -> bool {
        self.words.iter().zip(&other.words).any(|(a, b)| a & b != 0)
    }

    /// Moves every bit `i` to `i + shift`, dropping bits that leave the range.
    pub(crate) fn shifted_up(&self, shift: usize) -> BitSet {
        let mut out = BitSet::new(self.len);
        let (ws, bs) = (shift / WORD, shift % WORD);
        let n = self.words.len();
        for i in (ws..n).rev() {
            let src = i - ws;
            let mut v = self.words[src] << bs;
            if bs > 0 && src > 0 {
                v |= self.words[src - 1] >> (WORD - bs);
            }
            out.words[i] = v;
        }
        out.trim();
        out
    }

    /// Moves every bit `i` to `i - shift`, dropping bits that fall below zero.
    pub(crate) fn shifted_down(&self, shift: usize) -> BitSet {
        let mut out = BitSet::new(self.len);
        let (ws, bs) = (shift / WORD, shift % WORD);
        let n = self.words.len();
        for i in 0..n.saturating_sub(ws) {
            let src = i + ws;
            let mut v = self.words[src] >> bs;
            if bs > 0 && src + 1 < n {
                v |= self.words[src + 1] << (WORD - bs);
            }
            out.words[i] = v;
        }
        out
    }

    pub(crate) fn and(&self, other: &BitSet) -> BitSet {
        let mut out = self.clone();
        out.intersect_with(other);
        out
    }

    pub(crate) fn and_not(&self, other: &BitSet) -> BitSet {
        let mut out = self.clone();
        out.difference_with(other);
        out
    }
}

impl Ord for BitSet {
    /// Lexicographic order on the sorted member lists.
    fn cmp(&self, other: &Self) -> Ordering {
        self.iter().cmp(other.iter())
    }
}

impl PartialOrd for BitSet {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}

impl fmt::Debug for BitSet {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_set().entries(self.iter()).finish()
    }
}

pub struct Ones<'a> {
    words: &'a [u64],
    idx: usize,
    cur: u64,
}

impl Iterator for Ones<'_> {
    type Item = usize;

    #[inline]
    fn next(&mut self) -> Option<usize> {
        loop {
            if self.cur != 0 {
                let tz = self.cur.trailing_zeros() as usize;
                self.cur &= self.cur - 1;
                return Some(self.idx * WORD + tz);
            }
            self.idx += 1;
            if self.idx >= self.words.len() {
                return None;
            }
            self.cur = self.words[self.idx];
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn shifts_cross_word_boundaries() {
        let s = BitSet::from_indices(130, [0, 63, 64, 129]);
        let up = s.shifted_up(1);
        assert_eq!(up.iter().collect::<Vec<_>>(), vec![1, 64, 65]);
        let down = s.shifted_down(64);
        assert_eq!(down.iter().collect::<Vec<_>>(), vec![0, 65]);
        assert_eq!(s.shifted_up(70).iter().collect::<Vec<_>>(), vec![70]);
    }

    #[test]
    fn complement_respects_length() {
        let s = BitSet::from_indices(5, [1, 3]);
        assert_eq!(s.complement().iter().collect::<Vec<_>>(), vec![0, 2, 4]);
        assert_eq!(BitSet::full(64).count(), 64);
        assert_eq!(BitSet::full(65).count(), 65);
    }

    #[test]
    fn lexicographic_order() {
        let a = BitSet::from_indices(8, [0, 2]);
        let b = BitSet::from_indices(8, [0, 3]);
        let c = BitSet::from_indices(8, [0, 2, 7]);
        assert!(a < b);
        assert!(a < c);
        assert!(c < b);
    }
}
