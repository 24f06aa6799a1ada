use std::cmp::Ordering;
use std::fmt;

use crate::bitset::{BitSet, Ones};
use crate::error::{Error, Result};
use crate::group::Group;

/// A subset of a finite group, stored as a membership bitset over the
/// group's element indices. Carries the owning group's tag so operands from
/// different groups are rejected.
#[derive(Clone, PartialEq, Eq, Hash)]
pub struct GroupSubset {
    tag: u64,
    bits: BitSet,
    card: usize,
}

impl GroupSubset {
    pub(crate) fn from_bits(group: &Group, bits: BitSet) -> Self {
        debug_assert_eq!(bits.len(), group.order());
        let card = bits.count();
        GroupSubset {
            tag: group.tag(),
            bits,
            card,
        }
    }

    pub(crate) fn from_mask_unchecked(group: &Group, mask: u64) -> Self {
        GroupSubset {
            tag: group.tag(),
            bits: BitSet::from_mask(group.order(), mask),
            card: mask.count_ones() as usize,
        }
    }

    pub fn empty(group: &Group) -> Self {
        GroupSubset::from_bits(group, BitSet::new(group.order()))
    }

    pub fn full(group: &Group) -> Self {
        GroupSubset::from_bits(group, BitSet::full(group.order()))
    }

    pub fn singleton(group: &Group, x: usize) -> Result<Self> {
        GroupSubset::from_indices(group, [x])
    }

    /// The zero subgroup `{0}`.
    pub fn zero(group: &Group) -> Self {
        GroupSubset::from_bits(group, BitSet::from_indices(group.order(), [0]))
    }

    pub fn from_indices<I: IntoIterator<Item = usize>>(group: &Group, indices: I) -> Result<Self> {
        let mut bits = BitSet::new(group.order());
        for i in indices {
            if i >= group.order() {
                return Err(Error::IndexOutOfRange {
                    index: i,
                    order: group.order(),
                });
            }
            bits.insert(i);
        }
        Ok(GroupSubset::from_bits(group, bits))
    }

    /// Builds a subset of a group of order at most 64 from a bitmask.
    pub fn from_mask(group: &Group, mask: u64) -> Result<Self> {
        if group.order() > 64 {
            return Err(Error::PreconditionUnmet(format!(
                "bitmask construction needs order <= 64, got {}",
                group.order()
            )));
        }
        if group.order() < 64 && mask >> group.order() != 0 {
            return Err(Error::IndexOutOfRange {
                index: 63 - mask.leading_zeros() as usize,
                order: group.order(),
            });
        }
        Ok(GroupSubset::from_mask_unchecked(group, mask))
    }

    #[inline]
    pub fn tag(&self) -> u64 {
        self.tag
    }

    #[inline]
    pub fn belongs_to(&self, group: &Group) -> bool {
        self.tag == group.tag() && self.bits.len() == group.order()
    }

    pub(crate) fn check(&self, group: &Group) -> Result<()> {
        if self.belongs_to(group) {
            Ok(())
        } else {
            Err(Error::GroupMismatch)
        }
    }

    #[inline]
    pub fn card(&self) -> usize {
        self.card
    }

    #[inline]
    pub fn is_empty(&self) -> bool {
        self.card == 0
    }

    /// Order of the ambient group.
    #[inline]
    pub fn universe(&self) -> usize {
        self.bits.len()
    }

    #[inline]
    pub fn bits(&self) -> &BitSet {
        &self.bits
    }

    #[inline]
    pub fn as_mask(&self) -> Option<u64> {
        self.bits.as_mask()
    }

    #[inline]
    pub fn contains(&self, x: usize) -> bool {
        self.bits.contains(x)
    }

    pub fn insert(&mut self, x: usize) -> Result<bool> {
        if x >= self.universe() {
            return Err(Error::IndexOutOfRange {
                index: x,
                order: self.universe(),
            });
        }
        let fresh = self.bits.insert(x);
        self.card += fresh as usize;
        Ok(fresh)
    }

    pub fn remove(&mut self, x: usize) -> bool {
        let present = self.bits.remove(x);
        self.card -= present as usize;
        present
    }

    pub fn iter(&self) -> Ones<'_> {
        self.bits.iter()
    }

    pub fn to_vec(&self) -> Vec<usize> {
        self.iter().collect()
    }

    pub fn first(&self) -> Option<usize> {
        self.bits.first()
    }

    pub fn union(&self, other: &Self) -> Self {
        debug_assert_eq!(self.tag, other.tag);
        let mut bits = self.bits.clone();
        bits.union_with(&other.bits);
        self.with_bits(bits)
    }

    pub fn intersection(&self, other: &Self) -> Self {
        debug_assert_eq!(self.tag, other.tag);
        let mut bits = self.bits.clone();
        bits.intersect_with(&other.bits);
        self.with_bits(bits)
    }

    pub fn difference(&self, other: &Self) -> Self {
        debug_assert_eq!(self.tag, other.tag);
        let mut bits = self.bits.clone();
        bits.difference_with(&other.bits);
        self.with_bits(bits)
    }

    pub fn complement(&self) -> Self {
        self.with_bits(self.bits.complement())
    }

    pub fn is_subset(&self, other: &Self) -> bool {
        self.bits.is_subset(&other.bits)
    }

    pub fn intersects(&self, other: &Self) -> bool {
        self.bits.intersects(&other.bits)
    }

    pub(crate) fn with_bits(&self, bits: BitSet) -> Self {
        let card = bits.count();
        GroupSubset {
            tag: self.tag,
            bits,
            card,
        }
    }
}

impl Ord for GroupSubset {
    /// Lexicographic on sorted element indices.
    fn cmp(&self, other: &Self) -> Ordering {
        self.bits.cmp(&other.bits)
    }
}

impl PartialOrd for GroupSubset {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}

impl fmt::Debug for GroupSubset {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{:?}", self.bits)
    }
}

impl fmt::Display for GroupSubset {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str("{")?;
        for (i, x) in self.iter().enumerate() {
            if i > 0 {
                f.write_str(",")?;
            }
            write!(f, "{x}")?;
        }
        f.write_str("}")
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn cardinality_tracks_mutation() {
        let g = Group::cyclic(10).unwrap();
        let mut s = GroupSubset::from_indices(&g, [1, 3, 3, 7]).unwrap();
        assert_eq!(s.card(), 3);
        assert!(!s.insert(3).unwrap());
        assert!(s.insert(4).unwrap());
        assert!(s.remove(1));
        assert!(!s.remove(1));
        assert_eq!(s.card(), s.bits().count());
        assert_eq!(s.to_vec(), vec![3, 4, 7]);
        assert!(s.insert(10).is_err());
    }

    #[test]
    fn mask_construction_is_range_checked() {
        let g = Group::cyclic(6).unwrap();
        assert!(GroupSubset::from_mask(&g, 0b111111).is_ok());
        assert!(matches!(
            GroupSubset::from_mask(&g, 0b1000000),
            Err(Error::IndexOutOfRange { index: 6, .. })
        ));
    }

    #[test]
    fn group_tags_distinguish_groups() {
        let a = Group::cyclic(4).unwrap();
        let b = Group::new(&crate::group::GroupSpec::new(vec![2, 2]).unwrap()).unwrap();
        let s = GroupSubset::full(&a);
        assert!(s.belongs_to(&a));
        assert!(!s.belongs_to(&b));
    }
}
