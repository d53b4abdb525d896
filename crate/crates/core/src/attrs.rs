//! Attribute subsets as 64-bit masks over an attribute list.

use std::fmt;
use std::ops::{BitAnd, BitOr, Not, Sub};

/// Largest attribute list that [`AttrSet`] can index.
pub const MAX_ATTRIBUTES: usize = 64;

/// A subset of an attribute list, stored as a bitmask over attribute indices.
///
/// The set itself does not know which list it indexes; the owning context or
/// theory does. Iteration is in ascending index order, which is the canonical
/// order for printing and serialization.
#[derive(Clone, Copy, Default, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct AttrSet(u64);

impl AttrSet {
    pub const EMPTY: AttrSet = AttrSet(0);

    pub const fn from_bits(bits: u64) -> Self {
        AttrSet(bits)
    }

    pub const fn bits(self) -> u64 {
        self.0
    }

    /// All indices `0..n`.
    pub fn full(n: usize) -> Self {
        debug_assert!(n <= MAX_ATTRIBUTES);
        if n >= 64 {
            AttrSet(u64::MAX)
        } else {
            AttrSet((1u64 << n) - 1)
        }
    }

    pub fn singleton(i: usize) -> Self {
        debug_assert!(i < MAX_ATTRIBUTES);
        AttrSet(1u64 << i)
    }

    pub fn from_indices<I: IntoIterator<Item = usize>>(it: I) -> Self {
        it.into_iter().fold(AttrSet::EMPTY, |s, i| s.with(i))
    }

    pub fn contains(self, i: usize) -> bool {
        i < 64 && self.0 & (1u64 << i) != 0
    }

    pub fn with(self, i: usize) -> Self {
        AttrSet(self.0 | (1u64 << i))
    }

    pub fn without(self, i: usize) -> Self {
        AttrSet(self.0 & !(1u64 << i))
    }

    pub fn insert(&mut self, i: usize) {
        self.0 |= 1u64 << i;
    }

    pub fn remove(&mut self, i: usize) {
        self.0 &= !(1u64 << i);
    }

    pub fn union(self, other: Self) -> Self {
        AttrSet(self.0 | other.0)
    }

    pub fn intersection(self, other: Self) -> Self {
        AttrSet(self.0 & other.0)
    }

    pub fn difference(self, other: Self) -> Self {
        AttrSet(self.0 & !other.0)
    }

    pub fn is_subset(self, other: Self) -> bool {
        self.0 & !other.0 == 0
    }

    pub fn is_empty(self) -> bool {
        self.0 == 0
    }

    pub fn len(self) -> usize {
        self.0.count_ones() as usize
    }

    /// True when every index is below `n`.
    pub fn fits(self, n: usize) -> bool {
        self.is_subset(AttrSet::full(n))
    }

    pub fn iter(self) -> Iter {
        Iter(self.0)
    }
}

impl BitOr for AttrSet {
    type Output = AttrSet;
    fn bitor(self, rhs: Self) -> Self {
        self.union(rhs)
    }
}

impl BitAnd for AttrSet {
    type Output = AttrSet;
    fn bitand(self, rhs: Self) -> Self {
        self.intersection(rhs)
    }
}

impl Sub for AttrSet {
    type Output = AttrSet;
    fn sub(self, rhs: Self) -> Self {
        self.difference(rhs)
    }
}

impl Not for AttrSet {
    type Output = AttrSet;
    fn not(self) -> Self {
        AttrSet(!self.0)
    }
}

impl fmt::Debug for AttrSet {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_set().entries(self.iter()).finish()
    }
}

impl FromIterator<usize> for AttrSet {
    fn from_iter<T: IntoIterator<Item = usize>>(iter: T) -> Self {
        AttrSet::from_indices(iter)
    }
}

impl IntoIterator for AttrSet {
    type Item = usize;
    type IntoIter = Iter;
    fn into_iter(self) -> Iter {
        self.iter()
    }
}

pub struct Iter(u64);

impl Iterator for Iter {
    type Item = usize;

    fn next(&mut self) -> Option<usize> {
        if self.0 == 0 {
            return None;
        }
        let i = self.0.trailing_zeros() as usize;
        self.0 &= self.0 - 1;
        Some(i)
    }

    fn size_hint(&self) -> (usize, Option<usize>) {
        let n = self.0.count_ones() as usize;
        (n, Some(n))
    }
}

impl ExactSizeIterator for Iter {}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn set_algebra() {
        let a = AttrSet::from_indices([0, 2, 4]);
        let b = AttrSet::from_indices([2, 3]);
        assert_eq!(a | b, AttrSet::from_indices([0, 2, 3, 4]));
        assert_eq!(a & b, AttrSet::singleton(2));
        assert_eq!(a - b, AttrSet::from_indices([0, 4]));
        assert!(AttrSet::singleton(2).is_subset(a));
        assert!(!b.is_subset(a));
        assert_eq!(a.iter().collect::<Vec<_>>(), vec![0, 2, 4]);
        assert_eq!(a.len(), 3);
    }

    #[test]
    fn full_sets() {
        assert_eq!(AttrSet::full(0), AttrSet::EMPTY);
        assert_eq!(AttrSet::full(3).bits(), 0b111);
        assert_eq!(AttrSet::full(64).len(), 64);
        assert!(AttrSet::from_indices([1, 2]).fits(3));
        assert!(!AttrSet::from_indices([1, 3]).fits(3));
    }
}
