//! Sumsets, representation counts, periods and coset decompositions.

use crate::bitset::BitSet;
use crate::error::{Error, Result};
use crate::group::Group;
use crate::subgroup::Subgroup;
use crate::subset::GroupSubset;

/// `A + x`.
pub fn translate(group: &Group, a: &GroupSubset, x: usize) -> GroupSubset {
    a.with_bits(group.translate_bits(a.bits(), x))
}

/// `−A = {−a : a ∈ A}`.
pub fn negate(group: &Group, a: &GroupSubset) -> GroupSubset {
    a.with_bits(BitSet::from_indices(
        group.order(),
        a.iter().map(|x| group.neg(x)),
    ))
}

/// Minkowski sum `A + B = {x + y : x ∈ A, y ∈ B}`.
pub fn sumset(group: &Group, a: &GroupSubset, b: &GroupSubset) -> Result<GroupSubset> {
    a.check(group)?;
    b.check(group)?;
    Ok(sumset_unchecked(group, a, b))
}

/// `A − B`.
pub fn difference_set(group: &Group, a: &GroupSubset, b: &GroupSubset) -> Result<GroupSubset> {
    a.check(group)?;
    b.check(group)?;
    Ok(sumset_unchecked(group, a, &negate(group, b)))
}

/// One translated copy of the larger operand per element of the smaller one,
/// OR-ed together.
pub(crate) fn sumset_unchecked(group: &Group, a: &GroupSubset, b: &GroupSubset) -> GroupSubset {
    if a.is_empty() || b.is_empty() {
        return a.with_bits(BitSet::new(group.order()));
    }
    let (big, small) = if a.card() >= b.card() { (a, b) } else { (b, a) };
    if let Some(mask) = big.as_mask() {
        let n = group.order();
        let full = if n == 64 { u64::MAX } else { (1u64 << n) - 1 };
        let mut acc = 0u64;
        for t in small.iter() {
            acc |= group.translate_mask(mask, t);
            if acc == full {
                break;
            }
        }
        return GroupSubset::from_mask_unchecked(group, acc);
    }
    let mut acc = BitSet::new(group.order());
    for t in small.iter() {
        acc.union_with(&group.translate_bits(big.bits(), t));
    }
    a.with_bits(acc)
}

/// `r_{A,B}(x) = |(x − B) ∩ A|`, the number of ways to write `x = a + b`.
pub fn rep_count(group: &Group, a: &GroupSubset, b: &GroupSubset, x: usize) -> Result<usize> {
    a.check(group)?;
    b.check(group)?;
    if x >= group.order() {
        return Err(Error::IndexOutOfRange {
            index: x,
            order: group.order(),
        });
    }
    Ok(b.iter().filter(|&y| a.contains(group.sub(x, y))).count())
}

/// Checks that every element has at least `t` representations in `A + B`
/// whenever `|A| + |B| ≥ |G| + t`. Returns the first element with fewer, if
/// any.
pub fn check_pigeonhole(
    group: &Group,
    a: &GroupSubset,
    b: &GroupSubset,
    t: usize,
) -> Result<Option<usize>> {
    a.check(group)?;
    b.check(group)?;
    if a.card() + b.card() < group.order() + t {
        return Err(Error::PreconditionUnmet(format!(
            "|A| + |B| = {} < |G| + t = {}",
            a.card() + b.card(),
            group.order() + t
        )));
    }
    for x in group.elements() {
        if rep_count(group, a, b, x)? < t {
            return Ok(Some(x));
        }
    }
    Ok(None)
}

/// The stabilizer `{g : A + g = A}`.
pub fn period(group: &Group, a: &GroupSubset) -> Result<Subgroup> {
    a.check(group)?;
    if a.is_empty() {
        return Err(Error::EmptySet);
    }
    Ok(Subgroup::from_carrier_unchecked(group, stabilizer_unchecked(group, a)))
}

/// Any stabilizing `g` maps `min A` into `A`, so only `A − min A` is scanned.
pub(crate) fn stabilizer_unchecked(group: &Group, a: &GroupSubset) -> GroupSubset {
    let base = a.first().expect("nonempty");
    if let Some(mask) = a.as_mask() {
        let mut out = 0u64;
        for x in a.iter() {
            let g = group.sub(x, base);
            if group.translate_mask(mask, g) == mask {
                out |= 1 << g;
            }
        }
        return GroupSubset::from_mask_unchecked(group, out);
    }
    let mut out = BitSet::new(group.order());
    for x in a.iter() {
        let g = group.sub(x, base);
        if &group.translate_bits(a.bits(), g) == a.bits() {
            out.insert(g);
        }
    }
    a.with_bits(out)
}

/// Whether `A` has a nonzero period.
pub fn is_periodic(group: &Group, a: &GroupSubset) -> Result<bool> {
    Ok(!period(group, a)?.is_trivial())
}

/// One coset trace of an H-decomposition.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct CosetPart {
    /// Minimum-index element of the coset.
    pub coset_rep: usize,
    pub trace: GroupSubset,
}

/// The partition of a set into its nonempty intersections with cosets of `H`.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct HDecomposition {
    pub subgroup: Subgroup,
    pub parts: Vec<CosetPart>,
}

impl HDecomposition {
    /// Union of all traces.
    pub fn reassemble(&self, group: &Group) -> GroupSubset {
        let mut acc = GroupSubset::empty(group);
        for p in &self.parts {
            acc = acc.union(&p.trace);
        }
        acc
    }
}

/// Splits `A` along the cosets of `H`, parts ordered by coset representative.
pub fn h_decompose(group: &Group, a: &GroupSubset, h: &Subgroup) -> Result<HDecomposition> {
    a.check(group)?;
    h.carrier().check(group)?;
    if a.is_empty() {
        return Err(Error::EmptySet);
    }
    if !crate::subgroup::is_subgroup(group, h.carrier()) {
        return Err(Error::NotASubgroup(format!("{}", h.carrier())));
    }
    let mut remaining = a.clone();
    let mut parts = Vec::new();
    let mut seen = GroupSubset::empty(group);
    for x in group.elements() {
        if seen.contains(x) {
            continue;
        }
        let coset = translate(group, h.carrier(), x);
        seen = seen.union(&coset);
        let trace = remaining.intersection(&coset);
        if !trace.is_empty() {
            remaining = remaining.difference(&trace);
            parts.push(CosetPart { coset_rep: x, trace });
        }
        if remaining.is_empty() {
            break;
        }
    }
    Ok(HDecomposition {
        subgroup: h.clone(),
        parts,
    })
}
