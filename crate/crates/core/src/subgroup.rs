//! Subgroups, quotients, and subgroups re-presented as groups of their own.

use crate::error::{Error, Result};
use crate::group::Group;
use crate::set_algebra::{negate, sumset_unchecked, translate};
use crate::subset::GroupSubset;

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Subgroup {
    carrier: GroupSubset,
    generators: Vec<usize>,
}

/// Full closure test: contains 0, closed under addition and negation.
pub fn is_subgroup(group: &Group, set: &GroupSubset) -> bool {
    set.belongs_to(group)
        && set.contains(0)
        && sumset_unchecked(group, set, set) == *set
        && set.iter().all(|x| set.contains(group.neg(x)))
}

impl Subgroup {
    /// Smallest subgroup containing `gens`, by closure iteration.
    pub fn generated(group: &Group, gens: &GroupSubset) -> Result<Self> {
        gens.check(group)?;
        let mut step = gens.union(&negate(group, gens));
        step.insert(0)?;
        let mut carrier = GroupSubset::zero(group);
        loop {
            let next = sumset_unchecked(group, &carrier, &step);
            if next == carrier {
                break;
            }
            carrier = next;
        }
        Ok(Subgroup {
            carrier,
            generators: gens.to_vec(),
        })
    }

    pub fn from_carrier(group: &Group, carrier: GroupSubset) -> Result<Self> {
        carrier.check(group)?;
        if !is_subgroup(group, &carrier) {
            return Err(Error::NotASubgroup(format!("{carrier}")));
        }
        Ok(Subgroup::from_carrier_unchecked(group, carrier))
    }

    /// Picks generators greedily: the smallest element not yet covered.
    pub(crate) fn from_carrier_unchecked(group: &Group, carrier: GroupSubset) -> Self {
        let mut generators = Vec::new();
        let mut covered = GroupSubset::zero(group);
        while covered.card() < carrier.card() {
            let x = carrier
                .iter()
                .find(|&x| !covered.contains(x))
                .expect("carrier larger than covered part");
            generators.push(x);
            covered = Subgroup::generated(
                group,
                &GroupSubset::from_indices(group, generators.iter().copied()).expect("in range"),
            )
            .expect("same group")
            .carrier;
        }
        Subgroup {
            carrier,
            generators,
        }
    }

    pub fn trivial(group: &Group) -> Self {
        Subgroup {
            carrier: GroupSubset::zero(group),
            generators: Vec::new(),
        }
    }

    pub fn whole(group: &Group) -> Self {
        Subgroup::from_carrier_unchecked(group, GroupSubset::full(group))
    }

    pub fn carrier(&self) -> &GroupSubset {
        &self.carrier
    }

    pub fn generators(&self) -> &[usize] {
        &self.generators
    }

    pub fn order(&self) -> usize {
        self.carrier.card()
    }

    pub fn is_trivial(&self) -> bool {
        self.carrier.card() == 1
    }

    pub fn contains(&self, x: usize) -> bool {
        self.carrier.contains(x)
    }

    pub fn intersection(&self, group: &Group, other: &Subgroup) -> Subgroup {
        Subgroup::from_carrier_unchecked(group, self.carrier.intersection(&other.carrier))
    }

    pub fn quotient(&self, group: &Group) -> Result<QuotientMap> {
        quotient(group, self)
    }

    pub fn embedding(&self, group: &Group) -> Result<SubgroupEmbedding> {
        SubgroupEmbedding::new(group, self)
    }
}

/// `⟨S⟩`.
pub fn subgroup_generated(group: &Group, gens: &GroupSubset) -> Result<Subgroup> {
    Subgroup::generated(group, gens)
}

/// The canonical map `G → G/H`. Cosets are numbered by increasing
/// minimum element, and that minimum is the coset representative.
#[derive(Clone, Debug)]
pub struct QuotientMap {
    subgroup: Subgroup,
    coset_index: Vec<usize>,
    coset_reps: Vec<usize>,
    quotient: Group,
}

pub fn quotient(group: &Group, h: &Subgroup) -> Result<QuotientMap> {
    h.carrier.check(group)?;
    if !is_subgroup(group, &h.carrier) {
        return Err(Error::NotASubgroup(format!("{}", h.carrier)));
    }
    let n = group.order();
    let mut coset_index = vec![usize::MAX; n];
    let mut coset_reps = Vec::with_capacity(n / h.order());
    for x in group.elements() {
        if coset_index[x] != usize::MAX {
            continue;
        }
        let id = coset_reps.len();
        coset_reps.push(x);
        for y in translate(group, &h.carrier, x).iter() {
            coset_index[y] = id;
        }
    }
    let q = coset_reps.len();
    let mut table = Vec::with_capacity(q * q);
    for &a in &coset_reps {
        for &b in &coset_reps {
            table.push(coset_index[group.add(a, b)] as u32);
        }
    }
    let label = format!("{}/{}", group.label(), h.carrier);
    Ok(QuotientMap {
        subgroup: h.clone(),
        coset_index,
        coset_reps,
        quotient: Group::from_table(label, q, table),
    })
}

impl QuotientMap {
    pub fn subgroup(&self) -> &Subgroup {
        &self.subgroup
    }

    /// The quotient as a group on coset indices `0..|G|/|H|`.
    pub fn group(&self) -> &Group {
        &self.quotient
    }

    pub fn order(&self) -> usize {
        self.coset_reps.len()
    }

    #[inline]
    pub fn coset_index(&self, x: usize) -> usize {
        self.coset_index[x]
    }

    pub fn coset_reps(&self) -> &[usize] {
        &self.coset_reps
    }

    /// `φ(X)` as a subset of the quotient group.
    pub fn pushforward(&self, set: &GroupSubset) -> GroupSubset {
        GroupSubset::from_indices(&self.quotient, set.iter().map(|x| self.coset_index[x]))
            .expect("coset indices in range")
    }

    /// `φ⁻¹(Y)` as a subset of the ambient group.
    pub fn preimage(&self, group: &Group, set: &GroupSubset) -> GroupSubset {
        GroupSubset::from_indices(
            group,
            group.elements().filter(|&x| set.contains(self.coset_index[x])),
        )
        .expect("in range")
    }
}

/// A subgroup `K ≤ G` re-presented as a group on `0..|K|`, local index `i`
/// standing for the `i`-th smallest ambient element of `K`.
#[derive(Clone, Debug)]
pub struct SubgroupEmbedding {
    group: Group,
    members: Vec<usize>,
    local_of: Vec<Option<usize>>,
}

impl SubgroupEmbedding {
    pub fn new(ambient: &Group, k: &Subgroup) -> Result<Self> {
        k.carrier.check(ambient)?;
        if !is_subgroup(ambient, &k.carrier) {
            return Err(Error::NotASubgroup(format!("{}", k.carrier)));
        }
        let members = k.carrier.to_vec();
        let mut local_of = vec![None; ambient.order()];
        for (i, &x) in members.iter().enumerate() {
            local_of[x] = Some(i);
        }
        let m = members.len();
        let mut table = Vec::with_capacity(m * m);
        for &a in &members {
            for &b in &members {
                table.push(local_of[ambient.add(a, b)].expect("closed") as u32);
            }
        }
        let label = format!("<{}> in {}", k.carrier, ambient.label());
        Ok(SubgroupEmbedding {
            group: Group::from_table(label, m, table),
            members,
            local_of,
        })
    }

    pub fn group(&self) -> &Group {
        &self.group
    }

    pub fn to_ambient(&self, local: usize) -> usize {
        self.members[local]
    }

    /// Restricts an ambient subset contained in `K` to local indices.
    pub fn restrict(&self, set: &GroupSubset) -> Result<GroupSubset> {
        let locals = set
            .iter()
            .map(|x| {
                self.local_of[x].ok_or_else(|| {
                    Error::PreconditionUnmet(format!("element {x} lies outside the subgroup"))
                })
            })
            .collect::<Result<Vec<_>>>()?;
        GroupSubset::from_indices(&self.group, locals)
    }

    pub fn lift(&self, ambient: &Group, local: &GroupSubset) -> GroupSubset {
        GroupSubset::from_indices(ambient, local.iter().map(|i| self.members[i])).expect("in range")
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::group::GroupSpec;

    fn set(g: &Group, xs: &[usize]) -> GroupSubset {
        GroupSubset::from_indices(g, xs.iter().copied()).unwrap()
    }

    #[test]
    fn generated_examples() {
        let z6 = Group::cyclic(6).unwrap();
        assert_eq!(
            Subgroup::generated(&z6, &set(&z6, &[2])).unwrap().carrier(),
            &set(&z6, &[0, 2, 4])
        );
        assert_eq!(
            Subgroup::generated(&z6, &GroupSubset::empty(&z6)).unwrap().carrier(),
            &set(&z6, &[0])
        );
        let klein = Group::new(&GroupSpec::new(vec![2, 2]).unwrap()).unwrap();
        assert_eq!(Subgroup::generated(&klein, &set(&klein, &[1, 2])).unwrap().order(), 4);
    }

    #[test]
    fn generated_is_idempotent_and_lagrange() {
        let g = Group::new(&GroupSpec::new(vec![2, 6]).unwrap()).unwrap();
        for mask in 0u64..(1 << 12) {
            if mask.count_ones() > 2 {
                continue;
            }
            let gens = GroupSubset::from_mask(&g, mask).unwrap();
            let h = Subgroup::generated(&g, &gens).unwrap();
            assert!(is_subgroup(&g, h.carrier()));
            assert_eq!(g.order() % h.order(), 0);
            assert_eq!(Subgroup::generated(&g, h.carrier()).unwrap().carrier(), h.carrier());
            let regen = Subgroup::generated(
                &g,
                &GroupSubset::from_indices(&g, h.generators().iter().copied()).unwrap(),
            )
            .unwrap();
            assert_eq!(regen.carrier(), h.carrier());
        }
    }

    #[test]
    fn quotient_examples() {
        let z4 = Group::cyclic(4).unwrap();
        let h = Subgroup::from_carrier(&z4, set(&z4, &[0, 2])).unwrap();
        let q = quotient(&z4, &h).unwrap();
        assert_eq!(q.order(), 2);
        assert_eq!(q.pushforward(&set(&z4, &[1, 3])).card(), 1);

        let z6 = Group::cyclic(6).unwrap();
        let q = quotient(&z6, &Subgroup::trivial(&z6)).unwrap();
        assert_eq!(q.order(), 6);
        assert!((0..6).all(|x| q.coset_index(x) == x));
        for a in 0..6 {
            for b in 0..6 {
                assert_eq!(q.group().add(a, b), z6.add(a, b));
            }
        }

        let klein = Group::new(&GroupSpec::new(vec![2, 2]).unwrap()).unwrap();
        let h = Subgroup::from_carrier(&klein, set(&klein, &[0, 1])).unwrap();
        assert_eq!(quotient(&klein, &h).unwrap().order(), 2);
    }

    #[test]
    fn quotient_rejects_non_subgroups() {
        let z6 = Group::cyclic(6).unwrap();
        assert!(matches!(
            Subgroup::from_carrier(&z6, set(&z6, &[0, 1])),
            Err(Error::NotASubgroup(_))
        ));
    }

    #[test]
    fn quotient_tables_are_groups() {
        let g = Group::new(&GroupSpec::new(vec![2, 4, 3]).unwrap()).unwrap();
        for gen in g.elements() {
            let h = Subgroup::generated(&g, &set(&g, &[gen])).unwrap();
            let q = quotient(&g, &h).unwrap();
            let qg = q.group();
            assert_eq!(q.order() * h.order(), g.order());
            assert_eq!(q.coset_index(0), 0);
            for a in g.elements() {
                for b in g.elements() {
                    let same = q.coset_index(a) == q.coset_index(b);
                    assert_eq!(same, h.contains(g.sub(a, b)));
                }
            }
            for a in qg.elements() {
                assert_eq!(qg.add(a, 0), a);
                assert_eq!(qg.add(a, qg.neg(a)), 0);
                for b in qg.elements() {
                    assert_eq!(qg.add(a, b), qg.add(b, a));
                    for c in qg.elements() {
                        assert_eq!(qg.add(qg.add(a, b), c), qg.add(a, qg.add(b, c)));
                    }
                }
            }
        }
    }

    #[test]
    fn embedding_round_trips() {
        let g = Group::cyclic(12).unwrap();
        let k = Subgroup::generated(&g, &set(&g, &[3])).unwrap();
        let emb = k.embedding(&g).unwrap();
        assert_eq!(emb.group().order(), 4);
        let s = set(&g, &[0, 9]);
        let local = emb.restrict(&s).unwrap();
        assert_eq!(emb.lift(&g, &local), s);
        assert!(emb.restrict(&set(&g, &[1])).is_err());
        for a in 0..4 {
            for b in 0..4 {
                assert_eq!(
                    emb.to_ambient(emb.group().add(a, b)),
                    g.add(emb.to_ambient(a), emb.to_ambient(b))
                );
            }
        }
    }
}
