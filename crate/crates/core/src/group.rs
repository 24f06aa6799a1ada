//! Finite abelian groups presented as products of cyclic groups, plus
//! table-backed groups for subgroups and quotients.
//!
//! Elements are addressed by their mixed-radix index
//! `index(e) = Σ e_i · ∏_{j<i} n_j`, so the first factor varies fastest.
//! Subsets are bitsets over that enumeration, and translating a subset by an
//! element is done with word-level shifts, one cyclic factor at a time.

use std::collections::hash_map::DefaultHasher;
use std::fmt;
use std::hash::{Hash, Hasher};

use serde::{Deserialize, Serialize};

use crate::bitset::BitSet;
use crate::error::{Error, Result};

pub const DEFAULT_MAX_ORDER: usize = 4096;

/// Orders of the cyclic factors `Z_{n1} × … × Z_{nk}`.
#[derive(Clone, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct GroupSpec {
    orders: Vec<usize>,
}

impl GroupSpec {
    pub fn new(orders: Vec<usize>) -> Result<Self> {
        if orders.is_empty() {
            return Err(Error::BadOrder {
                position: 0,
                order: 0,
            });
        }
        if let Some((position, &order)) = orders.iter().enumerate().find(|(_, &n)| n < 2) {
            return Err(Error::BadOrder { position, order });
        }
        Ok(GroupSpec { orders })
    }

    pub fn cyclic(n: usize) -> Result<Self> {
        GroupSpec::new(vec![n])
    }

    pub fn orders(&self) -> &[usize] {
        &self.orders
    }

    pub fn rank(&self) -> usize {
        self.orders.len()
    }

    /// `∏ n_i`, saturating at `usize::MAX`.
    pub fn order(&self) -> usize {
        self.orders
            .iter()
            .try_fold(1usize, |acc, &n| acc.checked_mul(n))
            .unwrap_or(usize::MAX)
    }
}

impl fmt::Display for GroupSpec {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        for (i, n) in self.orders.iter().enumerate() {
            if i > 0 {
                f.write_str("x")?;
            }
            write!(f, "Z{n}")?;
        }
        Ok(())
    }
}

/// An element as a vector of residues, one per cyclic factor.
#[derive(Clone, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub struct GroupElement {
    pub coords: Vec<usize>,
}

impl GroupElement {
    pub fn new(coords: Vec<usize>) -> Self {
        GroupElement { coords }
    }
}

#[derive(Clone, Debug)]
enum Kind {
    Product {
        spec: GroupSpec,
        strides: Vec<usize>,
        /// `low[i][c]`: elements whose i-th digit is below `n_i - c`, i.e. the
        /// ones that do not wrap when the digit is increased by `c`.
        low: Vec<Vec<BitSet>>,
    },
    Table {
        add: Vec<u32>,
        neg: Vec<u32>,
    },
}

/// A finite abelian group. Immutable once built; share it freely.
#[derive(Clone, Debug)]
pub struct Group {
    order: usize,
    tag: u64,
    label: String,
    kind: Kind,
}

impl Group {
    pub fn new(spec: &GroupSpec) -> Result<Self> {
        Group::with_max_order(spec, DEFAULT_MAX_ORDER)
    }

    pub fn with_max_order(spec: &GroupSpec, max_order: usize) -> Result<Self> {
        let order = spec.order();
        if order > max_order {
            return Err(Error::SpecTooLarge {
                order,
                max: max_order,
            });
        }
        let mut strides = Vec::with_capacity(spec.rank());
        let mut acc = 1;
        for &n in spec.orders() {
            strides.push(acc);
            acc *= n;
        }
        let low = spec
            .orders()
            .iter()
            .zip(&strides)
            .map(|(&n, &stride)| {
                (0..n)
                    .map(|c| {
                        BitSet::from_indices(order, (0..order).filter(|&x| (x / stride) % n < n - c))
                    })
                    .collect()
            })
            .collect();
        let mut hasher = DefaultHasher::new();
        spec.orders().hash(&mut hasher);
        Ok(Group {
            order,
            tag: hasher.finish(),
            label: spec.to_string(),
            kind: Kind::Product {
                spec: spec.clone(),
                strides,
                low,
            },
        })
    }

    pub fn cyclic(n: usize) -> Result<Self> {
        Group::new(&GroupSpec::cyclic(n)?)
    }

    /// Builds a group from a row-major addition table on `0..order` with
    /// identity 0. The caller guarantees the table is an abelian group.
    pub(crate) fn from_table(label: String, order: usize, add: Vec<u32>) -> Self {
        debug_assert_eq!(add.len(), order * order);
        let neg = (0..order)
            .map(|a| {
                (0..order)
                    .find(|&b| add[a * order + b] == 0)
                    .expect("every element has an inverse") as u32
            })
            .collect();
        let mut hasher = DefaultHasher::new();
        order.hash(&mut hasher);
        add.hash(&mut hasher);
        Group {
            order,
            tag: hasher.finish(),
            label,
            kind: Kind::Table { add, neg },
        }
    }

    #[inline]
    pub fn order(&self) -> usize {
        self.order
    }

    /// Identity used to detect subsets from different groups.
    #[inline]
    pub fn tag(&self) -> u64 {
        self.tag
    }

    pub fn label(&self) -> &str {
        &self.label
    }

    /// The cyclic presentation, if this group was built from one.
    pub fn spec(&self) -> Option<&GroupSpec> {
        match &self.kind {
            Kind::Product { spec, .. } => Some(spec),
            Kind::Table { .. } => None,
        }
    }

    /// Number of coordinates used when rendering elements.
    pub fn rank(&self) -> usize {
        self.spec().map_or(1, GroupSpec::rank)
    }

    #[inline]
    pub fn zero(&self) -> usize {
        0
    }

    pub fn elements(&self) -> std::ops::Range<usize> {
        0..self.order
    }

    #[inline]
    pub fn add(&self, a: usize, b: usize) -> usize {
        match &self.kind {
            Kind::Product { spec, strides, .. } => {
                let mut out = 0;
                for (&n, &s) in spec.orders().iter().zip(strides) {
                    out += ((a / s) % n + (b / s) % n) % n * s;
                }
                out
            }
            Kind::Table { add, .. } => add[a * self.order + b] as usize,
        }
    }

    #[inline]
    pub fn neg(&self, a: usize) -> usize {
        match &self.kind {
            Kind::Product { spec, strides, .. } => {
                let mut out = 0;
                for (&n, &s) in spec.orders().iter().zip(strides) {
                    out += (n - (a / s) % n) % n * s;
                }
                out
            }
            Kind::Table { neg, .. } => neg[a] as usize,
        }
    }

    #[inline]
    pub fn sub(&self, a: usize, b: usize) -> usize {
        self.add(a, self.neg(b))
    }

    /// Additive order of `a`.
    pub fn element_order(&self, a: usize) -> usize {
        let mut k = 1;
        let mut x = a;
        while x != 0 {
            x = self.add(x, a);
            k += 1;
        }
        k
    }

    pub fn index(&self, e: &GroupElement) -> Result<usize> {
        match &self.kind {
            Kind::Product { spec, strides, .. } => {
                if e.coords.len() != spec.rank() {
                    return Err(Error::RankMismatch {
                        got: e.coords.len(),
                        rank: spec.rank(),
                    });
                }
                Ok(e
                    .coords
                    .iter()
                    .zip(spec.orders())
                    .zip(strides)
                    .map(|((&c, &n), &s)| (c % n) * s)
                    .sum())
            }
            Kind::Table { .. } => match e.coords.as_slice() {
                [i] if *i < self.order => Ok(*i),
                [i] => Err(Error::IndexOutOfRange {
                    index: *i,
                    order: self.order,
                }),
                other => Err(Error::RankMismatch {
                    got: other.len(),
                    rank: 1,
                }),
            },
        }
    }

    pub fn unindex(&self, index: usize) -> GroupElement {
        assert!(index < self.order, "index {index} out of range");
        match &self.kind {
            Kind::Product { spec, strides, .. } => GroupElement::new(
                spec.orders()
                    .iter()
                    .zip(strides)
                    .map(|(&n, &s)| (index / s) % n)
                    .collect(),
            ),
            Kind::Table { .. } => GroupElement::new(vec![index]),
        }
    }

    /// `set + g` on raw bitsets.
    pub(crate) fn translate_bits(&self, set: &BitSet, g: usize) -> BitSet {
        if g == 0 {
            return set.clone();
        }
        if let Some(mask) = set.as_mask() {
            return BitSet::from_mask(self.order, self.translate_mask(mask, g));
        }
        match &self.kind {
            Kind::Product { spec, strides, low } => {
                let mut cur = set.clone();
                for (i, (&n, &s)) in spec.orders().iter().zip(strides).enumerate() {
                    let c = (g / s) % n;
                    if c == 0 {
                        continue;
                    }
                    let m = &low[i][c];
                    let mut up = cur.and(m).shifted_up(c * s);
                    let down = cur.and_not(m).shifted_down((n - c) * s);
                    up.union_with(&down);
                    cur = up;
                }
                cur
            }
            Kind::Table { .. } => {
                BitSet::from_indices(self.order, set.iter().map(|x| self.add(x, g)))
            }
        }
    }

    /// Single-word translation for groups of order at most 64.
    #[inline]
    pub(crate) fn translate_mask(&self, mask: u64, g: usize) -> u64 {
        match &self.kind {
            Kind::Product { spec, strides, low } => {
                let mut cur = mask;
                for (i, (&n, &s)) in spec.orders().iter().zip(strides).enumerate() {
                    let c = (g / s) % n;
                    if c == 0 {
                        continue;
                    }
                    let m = low[i][c].as_mask().unwrap_or(0);
                    cur = ((cur & m) << (c * s)) | ((cur & !m) >> ((n - c) * s));
                }
                cur
            }
            Kind::Table { .. } => {
                let mut out = 0u64;
                let mut rest = mask;
                while rest != 0 {
                    let x = rest.trailing_zeros() as usize;
                    rest &= rest - 1;
                    out |= 1 << self.add(x, g);
                }
                out
            }
        }
    }
}

impl PartialEq for Group {
    fn eq(&self, other: &Self) -> bool {
        self.tag == other.tag && self.order == other.order
    }
}

impl Eq for Group {}

impl fmt::Display for Group {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.label)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn all_orders() -> Vec<Vec<usize>> {
        vec![
            vec![4],
            vec![2, 2],
            vec![2, 3],
            vec![3, 4],
            vec![2, 2, 2],
            vec![5, 7],
            vec![70],
            vec![3, 5, 7],
        ]
    }

    #[test]
    fn make_group_examples() {
        let z4 = Group::cyclic(4).unwrap();
        assert_eq!(z4.order(), 4);
        assert_eq!(z4.add(3, 2), 1);
        assert_eq!(z4.neg(1), 3);

        let klein = Group::new(&GroupSpec::new(vec![2, 2]).unwrap()).unwrap();
        assert_eq!(klein.order(), 4);
        for a in 1..4 {
            assert_eq!(klein.element_order(a), 2);
        }

        let z2z3 = Group::new(&GroupSpec::new(vec![2, 3]).unwrap()).unwrap();
        let e = z2z3.index(&GroupElement::new(vec![1, 1])).unwrap();
        assert_eq!(z2z3.element_order(e), 6);
    }

    #[test]
    fn rejects_bad_specs() {
        assert_eq!(
            GroupSpec::new(vec![3, 1]),
            Err(Error::BadOrder {
                position: 1,
                order: 1
            })
        );
        let big = GroupSpec::new(vec![64, 65]).unwrap();
        assert!(matches!(
            Group::new(&big),
            Err(Error::SpecTooLarge { order: 4160, .. })
        ));
        assert!(Group::with_max_order(&big, 5000).is_ok());
    }

    #[test]
    fn axioms_by_full_scan() {
        for orders in all_orders() {
            let g = Group::new(&GroupSpec::new(orders).unwrap()).unwrap();
            if g.order() > 256 {
                continue;
            }
            for a in g.elements() {
                assert_eq!(g.add(a, 0), a);
                assert_eq!(g.add(a, g.neg(a)), 0);
                assert_eq!(g.index(&g.unindex(a)).unwrap(), a);
                for b in g.elements() {
                    assert_eq!(g.add(a, b), g.add(b, a));
                    for c in g.elements().step_by(3) {
                        assert_eq!(g.add(g.add(a, b), c), g.add(a, g.add(b, c)));
                    }
                }
            }
        }
    }

    #[test]
    fn translation_matches_pointwise_addition() {
        for orders in all_orders() {
            let g = Group::new(&GroupSpec::new(orders).unwrap()).unwrap();
            let set = BitSet::from_indices(g.order(), (0..g.order()).filter(|x| x % 3 != 1));
            for t in g.elements() {
                let expect = BitSet::from_indices(g.order(), set.iter().map(|x| g.add(x, t)));
                assert_eq!(g.translate_bits(&set, t), expect, "{} by {t}", g);
            }
        }
    }
}
