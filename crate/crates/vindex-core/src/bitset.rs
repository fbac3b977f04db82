//! Fixed-width bit vectors used as characteristic vectors of species sets.
//!
//! All the inner loops of the search engines reduce to subset tests, unions
//! and popcounts over these vectors, so everything here is per-word constant
//! time. The logical width is fixed at construction and never changes; that
//! width doubles as the owner check (a set of width `M` belongs to a network
//! with `M` species).

use alloc::vec;
use alloc::vec::Vec;
use core::cmp::Ordering;
use core::fmt;

const WORD_BITS: usize = 64;

/// A fixed-width vector of bits.
#[derive(Clone, PartialEq, Eq, Hash)]
pub struct BitSet {
    len: usize,
    words: Vec<u64>,
}

impl BitSet {
    /// All-zeros vector of logical width `len`.
    pub fn new(len: usize) -> Self {
        BitSet {
            len,
            words: vec![0; len.div_ceil(WORD_BITS).max(1)],
        }
    }

    /// All-ones vector of logical width `len`.
    pub fn all_ones(len: usize) -> Self {
        let mut s = BitSet::new(len);
        for i in 0..len {
            s.insert(i);
        }
        s
    }

    pub fn from_indices(len: usize, indices: &[usize]) -> Self {
        let mut s = BitSet::new(len);
        for &i in indices {
            s.insert(i);
        }
        s
    }

    /// Logical width in bits (not the number of set bits).
    pub fn len(&self) -> usize {
        self.len
    }

    pub fn is_empty(&self) -> bool {
        self.words.iter().all(|&w| w == 0)
    }

    pub fn contains(&self, i: usize) -> bool {
        debug_assert!(i < self.len);
        self.words[i / WORD_BITS] >> (i % WORD_BITS) & 1 == 1
    }

    pub fn insert(&mut self, i: usize) {
        debug_assert!(i < self.len);
        self.words[i / WORD_BITS] |= 1 << (i % WORD_BITS);
    }

    pub fn remove(&mut self, i: usize) {
        debug_assert!(i < self.len);
        self.words[i / WORD_BITS] &= !(1 << (i % WORD_BITS));
    }

    pub fn clear(&mut self) {
        self.words.iter_mut().for_each(|w| *w = 0);
    }

    pub fn count_ones(&self) -> usize {
        self.words.iter().map(|w| w.count_ones() as usize).sum()
    }

    /// `self ⊆ other`.
    pub fn is_subset_of(&self, other: &BitSet) -> bool {
        debug_assert_eq!(self.len, other.len);
        self.words
            .iter()
            .zip(&other.words)
            .all(|(a, b)| a & !b == 0)
    }

    /// `self ⊊ other`.
    pub fn is_strict_subset_of(&self, other: &BitSet) -> bool {
        self.is_subset_of(other) && self != other
    }

    pub fn union_with(&mut self, other: &BitSet) {
        debug_assert_eq!(self.len, other.len);
        for (a, b) in self.words.iter_mut().zip(&other.words) {
            *a |= b;
        }
    }

    pub fn difference_with(&mut self, other: &BitSet) {
        debug_assert_eq!(self.len, other.len);
        for (a, b) in self.words.iter_mut().zip(&other.words) {
            *a &= !b;
        }
    }

    pub fn intersects(&self, other: &BitSet) -> bool {
        self.words.iter().zip(&other.words).any(|(a, b)| a & b != 0)
    }

    /// Indices of set bits, ascending.
    pub fn iter_ones(&self) -> impl Iterator<Item = usize> + '_ {
        self.words.iter().enumerate().flat_map(|(wi, &w)| {
            let mut w = w;
            core::iter::from_fn(move || {
                if w == 0 {
                    None
                } else {
                    let b = w.trailing_zeros() as usize;
                    w &= w - 1;
                    Some(wi * WORD_BITS + b)
                }
            })
        })
    }

    pub fn min_set_bit(&self) -> Option<usize> {
        self.iter_ones().next()
    }

    pub fn max_set_bit(&self) -> Option<usize> {
        for (wi, &w) in self.words.iter().enumerate().rev() {
            if w != 0 {
                return Some(wi * WORD_BITS + (63 - w.leading_zeros() as usize));
            }
        }
        None
    }

    /// Treats the vector as an unsigned integer with bit 0 least significant
    /// and adds one. Returns `false` on overflow past the logical width
    /// (the vector is then left cleared).
    pub fn increment(&mut self) -> bool {
        for i in 0..self.len {
            if self.contains(i) {
                self.remove(i);
            } else {
                self.insert(i);
                return true;
            }
        }
        false
    }

    /// Adds `1 << bit` with carry, again with bit 0 least significant.
    /// Returns `false` on overflow past the logical width.
    pub fn add_power(&mut self, bit: usize) -> bool {
        for i in bit..self.len {
            if self.contains(i) {
                self.remove(i);
            } else {
                self.insert(i);
                return true;
            }
        }
        false
    }

    /// Zeroes bits `0..bit`.
    pub fn clear_below(&mut self, bit: usize) {
        for i in 0..bit.min(self.len) {
            self.remove(i);
        }
    }

    /// Numeric comparison, bit 0 least significant.
    pub fn cmp_value(&self, other: &BitSet) -> Ordering {
        debug_assert_eq!(self.len, other.len);
        for (a, b) in self.words.iter().zip(&other.words).rev() {
            match a.cmp(b) {
                Ordering::Equal => {}
                ord => return ord,
            }
        }
        Ordering::Equal
    }
}

impl fmt::Debug for BitSet {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{{")?;
        for (k, i) in self.iter_ones().enumerate() {
            if k > 0 {
                write!(f, ",")?;
            }
            write!(f, "{i}")?;
        }
        write!(f, "}}")
    }
}
