//! Fixed-width document bit sets.

use serde::{Deserialize, Serialize};

/// A set of document ordinals over a universe of `len` documents.
#[derive(Debug, Clone, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct DocSet {
    words: Vec<u64>,
    len: usize,
}

impl DocSet {
    pub fn empty(len: usize) -> Self {
        DocSet {
            words: vec![0; len.div_ceil(64)],
            len,
        }
    }

    pub fn full(len: usize) -> Self {
        let mut set = DocSet {
            words: vec![u64::MAX; len.div_ceil(64)],
            len,
        };
        set.clear_tail();
        set
    }

    pub fn from_ordinals<I: IntoIterator<Item = usize>>(len: usize, ordinals: I) -> Self {
        let mut set = DocSet::empty(len);
        for d in ordinals {
            set.insert(d);
        }
        set
    }

    fn clear_tail(&mut self) {
        let rem = self.len % 64;
        if rem != 0 {
            if let Some(last) = self.words.last_mut() {
                *last &= (1u64 << rem) - 1;
            }
        }
    }

    /// Size of the universe, not the number of members.
    pub fn universe(&self) -> usize {
        self.len
    }

    pub fn insert(&mut self, doc: usize) {
        assert!(doc < self.len, "document {doc} outside universe {}", self.len);
        self.words[doc / 64] |= 1 << (doc % 64);
    }

    pub fn contains(&self, doc: usize) -> bool {
        doc < self.len && self.words[doc / 64] & (1 << (doc % 64)) != 0
    }

    pub fn count(&self) -> usize {
        self.words.iter().map(|w| w.count_ones() as usize).sum()
    }

    pub fn is_empty(&self) -> bool {
        self.words.iter().all(|&w| w == 0)
    }

    pub fn union_with(&mut self, other: &DocSet) {
        debug_assert_eq!(self.len, other.len);
        for (a, b) in self.words.iter_mut().zip(&other.words) {
            *a |= b;
        }
    }

    pub fn intersect_with(&mut self, other: &DocSet) {
        debug_assert_eq!(self.len, other.len);
        for (a, b) in self.words.iter_mut().zip(&other.words) {
            *a &= b;
        }
    }

    pub fn difference_with(&mut self, other: &DocSet) {
        debug_assert_eq!(self.len, other.len);
        for (a, b) in self.words.iter_mut().zip(&other.words) {
            *a &= !b;
        }
    }

    pub fn intersection_count(&self, other: &DocSet) -> usize {
        self.words
            .iter()
            .zip(&other.words)
            .map(|(a, b)| (a & b).count_ones() as usize)
            .sum()
    }

    pub fn is_subset(&self, other: &DocSet) -> bool {
        self.words.iter().zip(&other.words).all(|(a, b)| a & !b == 0)
    }

    pub fn iter(&self) -> impl Iterator<Item = usize> + '_ {
        self.words.iter().enumerate().flat_map(|(i, &word)| {
            let mut w = word;
            std::iter::from_fn(move || {
                if w == 0 {
                    return None;
                }
                let bit = w.trailing_zeros() as usize;
                w &= w - 1;
                Some(i * 64 + bit)
            })
        })
    }
}

/// Tracks which documents were hit exactly once and which more than once
/// while match sets are folded in one after another.
#[derive(Debug, Clone)]
pub struct HitCounter {
    once: DocSet,
    many: DocSet,
}

impl HitCounter {
    pub fn new(len: usize) -> Self {
        HitCounter {
            once: DocSet::empty(len),
            many: DocSet::empty(len),
        }
    }

    pub fn add(&mut self, matched: &DocSet) {
        for ((once, many), m) in self
            .once
            .words
            .iter_mut()
            .zip(self.many.words.iter_mut())
            .zip(&matched.words)
        {
            *many |= *once & m;
            *once = (*once ^ m) & !*many;
        }
    }

    pub fn exactly_once(&self) -> &DocSet {
        &self.once
    }

    pub fn more_than_once(&self) -> &DocSet {
        &self.many
    }
}
