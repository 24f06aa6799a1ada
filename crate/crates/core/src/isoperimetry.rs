//! Boundaries, duals, 1-connectivity, fragments and atoms of Cayley graphs
//! `Cay(G, S)` with `0 ∈ S`.
//!
//! `κ₁(S)` is the least `|∂_S(X)| = |(X+S) \ X|` over nonempty `X` with
//! `X + S ≠ G`, or `|G| − 1` when no such `X` exists. Two engines compute
//! it: a scan over every subset containing 0 (translation invariance makes
//! that enough), and a min vertex cut search from 0 to every `y ∉ S`
//! (vertex transitivity makes one source enough). They are meant to be
//! cross-checked against each other.

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::bitset::BitSet;
use crate::error::{Error, Result};
use crate::flow::vertex_disjoint_paths;
use crate::group::Group;
use crate::set_algebra::{h_decompose, negate, sumset_unchecked, translate};
use crate::subgroup::{is_subgroup, quotient, Subgroup};
use crate::subset::GroupSubset;

/// Largest order the subset-scanning engine accepts.
pub const EXHAUSTIVE_MAX_ORDER: usize = 20;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Kappa1Engine {
    Exhaustive,
    Flow,
}

impl Kappa1Engine {
    /// Exhaustive when the order allows it, flow otherwise.
    pub fn auto(order: usize) -> Self {
        if order <= EXHAUSTIVE_MAX_ORDER {
            Kappa1Engine::Exhaustive
        } else {
            Kappa1Engine::Flow
        }
    }
}

/// `Cay(G, S)`: arcs `x → x + s` for `s ∈ S`.
#[derive(Clone, Debug)]
pub struct CayleyGraph<'g> {
    group: &'g Group,
    connection: GroupSubset,
}

impl<'g> CayleyGraph<'g> {
    pub fn new(group: &'g Group, connection: GroupSubset) -> Result<Self> {
        connection.check(group)?;
        if !connection.contains(0) {
            return Err(Error::ZeroMissing);
        }
        Ok(CayleyGraph { group, connection })
    }

    pub fn group(&self) -> &'g Group {
        self.group
    }

    pub fn connection(&self) -> &GroupSubset {
        &self.connection
    }

    pub fn is_generating(&self) -> bool {
        generates(self.group, &self.connection)
    }

    /// `Γ(F) = F + S`.
    pub fn neighborhood(&self, f: &GroupSubset) -> Result<GroupSubset> {
        f.check(self.group)?;
        Ok(sumset_unchecked(self.group, f, &self.connection))
    }

    /// Out-neighbours of each vertex, loops dropped.
    pub fn adjacency(&self) -> Vec<Vec<usize>> {
        cayley_adjacency(self.group, &self.connection)
    }
}

pub fn generates(group: &Group, s: &GroupSubset) -> bool {
    Subgroup::generated(group, s).is_ok_and(|h| h.order() == group.order())
}

fn require_generating(group: &Group, s: &GroupSubset) -> Result<()> {
    s.check(group)?;
    if !s.contains(0) {
        return Err(Error::ZeroMissing);
    }
    if !generates(group, s) {
        return Err(Error::NotGenerating);
    }
    Ok(())
}

pub(crate) fn cayley_adjacency(group: &Group, s: &GroupSubset) -> Vec<Vec<usize>> {
    group
        .elements()
        .map(|x| {
            s.iter()
                .filter(|&t| t != 0)
                .map(|t| group.add(x, t))
                .collect()
        })
        .collect()
}

/// `∂_S(X) = (X + S) \ X`.
pub fn boundary(group: &Group, s: &GroupSubset, x: &GroupSubset) -> Result<GroupSubset> {
    s.check(group)?;
    x.check(group)?;
    Ok(sumset_unchecked(group, x, s).difference(x))
}

/// `X^S = G \ (X + S)`.
pub fn dual(group: &Group, s: &GroupSubset, x: &GroupSubset) -> Result<GroupSubset> {
    s.check(group)?;
    x.check(group)?;
    Ok(sumset_unchecked(group, x, s).complement())
}

/// Evaluates both sides of `(X^S)^{−S} + S = X + S`; returns their
/// symmetric difference when it is nonempty.
pub fn check_duality(group: &Group, s: &GroupSubset, x: &GroupSubset) -> Result<Option<GroupSubset>> {
    let xs = dual(group, s, x)?;
    let minus_s = negate(group, s);
    let double = sumset_unchecked(group, &xs, &minus_s).complement();
    let lhs = sumset_unchecked(group, &double, s);
    let rhs = sumset_unchecked(group, x, s);
    let diff = lhs.difference(&rhs).union(&rhs.difference(&lhs));
    Ok((!diff.is_empty()).then_some(diff))
}

#[inline]
fn sum_masks(group: &Group, x: u64, s: u64) -> u64 {
    let (big, small) = if x.count_ones() >= s.count_ones() { (x, s) } else { (s, x) };
    let mut acc = 0u64;
    let mut rest = small;
    while rest != 0 {
        let t = rest.trailing_zeros() as usize;
        rest &= rest - 1;
        acc |= group.translate_mask(big, t);
    }
    acc
}

struct ZeroScan {
    kappa1: usize,
    /// Masks of every 1-fragment containing 0, ascending.
    fragments: Vec<u64>,
}

fn scan_zero_subsets(group: &Group, s: &GroupSubset) -> Result<ZeroScan> {
    let n = group.order();
    if n > EXHAUSTIVE_MAX_ORDER {
        return Err(Error::TooLargeForExhaustive {
            order: n,
            max: EXHAUSTIVE_MAX_ORDER,
        });
    }
    let s_mask = s.as_mask().expect("single word");
    let full = (1u64 << n) - 1;
    let free_bits = n - 1;
    let chunk_bits = free_bits.min(8);
    let per_chunk = 1u64 << (free_bits - chunk_bits);
    let chunks: Vec<(usize, Vec<u64>)> = (0..1u64 << chunk_bits)
        .into_par_iter()
        .map(|c| {
            let mut best = usize::MAX;
            let mut found = Vec::new();
            for m in c * per_chunk..(c + 1) * per_chunk {
                let x = 1 | (m << 1);
                let xs = sum_masks(group, x, s_mask);
                if xs == full {
                    continue;
                }
                let b = (xs.count_ones() - x.count_ones()) as usize;
                if b < best {
                    best = b;
                    found.clear();
                }
                if b == best {
                    found.push(x);
                }
            }
            (best, found)
        })
        .collect();
    let kappa1 = chunks.iter().map(|(b, _)| *b).min().unwrap_or(usize::MAX);
    if kappa1 == usize::MAX {
        return Ok(ZeroScan {
            kappa1: n - 1,
            fragments: Vec::new(),
        });
    }
    let fragments = chunks
        .into_iter()
        .filter(|(b, _)| *b == kappa1)
        .flat_map(|(_, f)| f)
        .collect();
    Ok(ZeroScan { kappa1, fragments })
}

struct FlowScan {
    kappa1: usize,
    /// Minimal source side of the first `y` attaining the minimum.
    witness: Option<BitSet>,
}

fn flow_scan(group: &Group, s: &GroupSubset) -> FlowScan {
    let n = group.order();
    let adj = cayley_adjacency(group, s);
    let mut best = usize::MAX;
    let mut witness = None;
    for y in group.elements().filter(|&y| !s.contains(y)) {
        let out = vertex_disjoint_paths(&adj, 0, y, best);
        if out.value < best {
            best = out.value;
            witness = out.source_side;
        }
    }
    if best == usize::MAX {
        best = n - 1;
    }
    FlowScan {
        kappa1: best,
        witness,
    }
}

/// `κ₁(S)` for a generating `S ∋ 0`.
pub fn kappa1(group: &Group, s: &GroupSubset, engine: Kappa1Engine) -> Result<usize> {
    require_generating(group, s)?;
    match engine {
        Kappa1Engine::Exhaustive => Ok(scan_zero_subsets(group, s)?.kappa1),
        Kappa1Engine::Flow => Ok(flow_scan(group, s).kappa1),
    }
}

/// Every 1-fragment of `S` that contains 0, in lexicographic order. Uses
/// the subset scan, so `|G| ≤ 20`.
pub fn fragments_containing_zero(group: &Group, s: &GroupSubset) -> Result<Vec<GroupSubset>> {
    require_generating(group, s)?;
    let scan = scan_zero_subsets(group, s)?;
    let mut out: Vec<_> = scan
        .fragments
        .into_iter()
        .map(|m| GroupSubset::from_mask_unchecked(group, m))
        .collect();
    out.sort();
    Ok(out)
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct FragmentReport {
    pub kappa1: usize,
    pub alpha1: usize,
    pub atoms_containing_zero: Vec<GroupSubset>,
    pub witness: GroupSubset,
    pub engine: Kappa1Engine,
}

#[derive(Serialize)]
struct FragmentReportJson {
    kappa1: usize,
    alpha1: usize,
    atoms: Vec<Vec<usize>>,
    witness: Vec<usize>,
}

impl Serialize for FragmentReport {
    fn serialize<S: serde::Serializer>(&self, serializer: S) -> std::result::Result<S::Ok, S::Error> {
        FragmentReportJson {
            kappa1: self.kappa1,
            alpha1: self.alpha1,
            atoms: self.atoms_containing_zero.iter().map(GroupSubset::to_vec).collect(),
            witness: self.witness.to_vec(),
        }
        .serialize(serializer)
    }
}

impl FragmentReport {
    /// The atom used downstream: first in lexicographic order.
    pub fn atom(&self) -> &GroupSubset {
        &self.atoms_containing_zero[0]
    }
}

/// κ₁, α₁ and the 1-atoms through 0. Fails with `InvariantViolated` if the
/// atom through 0 is not a subgroup or two atoms through 0 differ.
pub fn atoms(group: &Group, s: &GroupSubset, engine: Kappa1Engine) -> Result<FragmentReport> {
    require_generating(group, s)?;
    let n = group.order();
    if s.card() == n {
        // Fragments are exactly the singletons.
        let zero = GroupSubset::zero(group);
        return Ok(FragmentReport {
            kappa1: n - 1,
            alpha1: 1,
            atoms_containing_zero: vec![zero.clone()],
            witness: zero,
            engine,
        });
    }
    let report = match engine {
        Kappa1Engine::Exhaustive => {
            let scan = scan_zero_subsets(group, s)?;
            let mut frags: Vec<_> = scan
                .fragments
                .iter()
                .map(|&m| GroupSubset::from_mask_unchecked(group, m))
                .collect();
            frags.sort();
            let alpha1 = frags.iter().map(GroupSubset::card).min().expect("S ≠ G has fragments");
            let atoms: Vec<_> = frags.iter().filter(|f| f.card() == alpha1).cloned().collect();
            FragmentReport {
                kappa1: scan.kappa1,
                alpha1,
                atoms_containing_zero: atoms,
                witness: frags[0].clone(),
                engine,
            }
        }
        Kappa1Engine::Flow => {
            let scan = flow_scan(group, s);
            let k = scan.kappa1;
            let adj = cayley_adjacency(group, s);
            // The minimal source side for any y whose cut equals κ₁ is a
            // fragment inside every fragment through 0 that misses y, so the
            // smallest of them is the atom through 0.
            let atom = group
                .elements()
                .filter(|&y| !s.contains(y))
                .filter_map(|y| {
                    let out = vertex_disjoint_paths(&adj, 0, y, k + 1);
                    (out.value == k).then(|| out.source_side.expect("maximum flow"))
                })
                .min_by(|a, b| a.count().cmp(&b.count()).then_with(|| a.cmp(b)))
                .expect("some y attains κ₁");
            let atom = GroupSubset::from_bits(group, atom);
            FragmentReport {
                kappa1: k,
                alpha1: atom.card(),
                witness: scan
                    .witness
                    .map(|w| GroupSubset::from_bits(group, w))
                    .unwrap_or_else(|| atom.clone()),
                atoms_containing_zero: vec![atom],
                engine,
            }
        }
    };
    validate_report(group, s, &report)?;
    Ok(report)
}

fn validate_report(group: &Group, s: &GroupSubset, r: &FragmentReport) -> Result<()> {
    let n = group.order();
    for a in &r.atoms_containing_zero {
        let reach = sumset_unchecked(group, a, s);
        if a.card() != r.alpha1 || reach.card() - a.card() != r.kappa1 || reach.card() >= n {
            return Err(Error::InvariantViolated(format!("{a} is not a 1-atom")));
        }
    }
    if r.kappa1 + 1 > s.card() {
        return Err(Error::InvariantViolated(format!(
            "κ₁ = {} exceeds |S| − 1 = {}",
            r.kappa1,
            s.card() - 1
        )));
    }
    if 2 * r.kappa1 < s.card() {
        return Err(Error::InvariantViolated(format!(
            "κ₁ = {} below |S|/2 with |S| = {}",
            r.kappa1,
            s.card()
        )));
    }
    if !is_subgroup(group, r.atom()) {
        return Err(Error::InvariantViolated(format!(
            "atom {} through 0 is not a subgroup",
            r.atom()
        )));
    }
    if r.atoms_containing_zero.len() > 1 {
        return Err(Error::InvariantViolated(format!(
            "{} distinct atoms share 0",
            r.atoms_containing_zero.len()
        )));
    }
    Ok(())
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct IsoperimetricViolation {
    pub sum_size: usize,
    pub set_size: usize,
    pub kappa1: usize,
}

/// `|X + S| ≥ min(|G|, |X| + κ₁(S))` given a known `κ₁(S)`.
pub fn isoperimetric_holds(group: &Group, s: &GroupSubset, x: &GroupSubset, kappa1: usize) -> bool {
    let sum = sumset_unchecked(group, x, s).card();
    sum >= group.order().min(x.card() + kappa1)
}

pub fn check_isoperimetric_inequality(
    group: &Group,
    s: &GroupSubset,
    x: &GroupSubset,
) -> Result<Option<IsoperimetricViolation>> {
    x.check(group)?;
    if x.is_empty() {
        return Err(Error::EmptySet);
    }
    let k = kappa1(group, s, Kappa1Engine::auto(group.order()))?;
    if isoperimetric_holds(group, s, x, k) {
        Ok(None)
    } else {
        Ok(Some(IsoperimetricViolation {
            sum_size: sumset_unchecked(group, x, s).card(),
            set_size: x.card(),
            kappa1: k,
        }))
    }
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct OlsonViolation {
    pub sum_size: usize,
    pub t_size: usize,
    pub s_size: usize,
}

/// `|T + S| ≥ |T| + |S|/2` whenever `T + ⟨S − S⟩ ≠ T`.
pub fn check_olsong(group: &Group, s: &GroupSubset, t: &GroupSubset) -> Result<Option<OlsonViolation>> {
    s.check(group)?;
    t.check(group)?;
    if s.is_empty() || t.is_empty() {
        return Err(Error::EmptySet);
    }
    let diffs = sumset_unchecked(group, s, &negate(group, s));
    let q = Subgroup::generated(group, &diffs)?;
    if sumset_unchecked(group, t, q.carrier()) == *t {
        return Err(Error::PreconditionUnmet(
            "T is a union of cosets of <S - S>".into(),
        ));
    }
    let sum = sumset_unchecked(group, t, s).card();
    if 2 * sum >= 2 * t.card() + s.card() {
        Ok(None)
    } else {
        Ok(Some(OlsonViolation {
            sum_size: sum,
            t_size: t.card(),
            s_size: s.card(),
        }))
    }
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub enum Reduction {
    /// `T' = T ∩ (a + ⟨S⟩)` is the only coset part whose sum with `S` is not
    /// the full coset, so `(T \\ T') + S` is `⟨S⟩`-periodic. The rest of `T`
    /// itself need not be.
    Part { shift: usize, part: GroupSubset },
    /// Every coset part fills its coset, so `T + S` is `⟨S⟩`-periodic.
    AlreadyPeriodicPart,
}

/// Confines a small-doubling pair to one coset of `⟨S⟩`.
///
/// With `|T + S| ≤ |T| + |S| − m`, at most `2 − 2m/|S|` coset parts of `T`
/// can have a non-full sum with `S`; for `m ≥ 1` that means at most one.
pub fn reduce_to_generated(group: &Group, s: &GroupSubset, t: &GroupSubset, m: usize) -> Result<Reduction> {
    s.check(group)?;
    t.check(group)?;
    if !s.contains(0) {
        return Err(Error::PreconditionUnmet("0 ∉ S".into()));
    }
    if t.is_empty() {
        return Err(Error::EmptySet);
    }
    let sum = sumset_unchecked(group, t, s).card();
    if sum + m > t.card() + s.card() {
        return Err(Error::PreconditionUnmet(format!(
            "|T + S| = {sum} > |T| + |S| − m = {}",
            (t.card() + s.card()).saturating_sub(m)
        )));
    }
    let k = Subgroup::generated(group, s)?;
    let parts = h_decompose(group, t, &k)?.parts;
    let partial: Vec<_> = parts
        .iter()
        .filter(|p| sumset_unchecked(group, &p.trace, s).card() < k.order())
        .collect();
    match partial.as_slice() {
        [] => Ok(Reduction::AlreadyPeriodicPart),
        [p] => {
            let part = p.trace.clone();
            let part_sum = sumset_unchecked(group, &part, s).card();
            if part_sum + m > part.card() + s.card() {
                return Err(Error::InvariantViolated(format!(
                    "reduced part has |T' + S| = {part_sum} > |T'| + |S| − {m}"
                )));
            }
            Ok(Reduction::Part {
                shift: p.coset_rep,
                part,
            })
        }
        more => Err(Error::PreconditionUnmet(format!(
            "{} coset parts have non-full sums; confinement needs m ≥ 1",
            more.len()
        ))),
    }
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct QuotientKappa {
    pub quotient_order: usize,
    pub image_size: usize,
    pub kappa1_quotient: usize,
}

impl QuotientKappa {
    /// `κ₁(φ(S)) = |φ(S)| − 1`.
    pub fn holds(&self) -> bool {
        self.kappa1_quotient + 1 == self.image_size
    }
}

/// Computes `κ₁(φ(S))` in `G/H` for a subgroup `H` that is a 1-fragment of `S`.
pub fn check_quotient_kappa(group: &Group, s: &GroupSubset, h: &Subgroup) -> Result<QuotientKappa> {
    require_generating(group, s)?;
    h.carrier().check(group)?;
    if !is_subgroup(group, h.carrier()) {
        return Err(Error::NotASubgroup(format!("{}", h.carrier())));
    }
    let k = kappa1(group, s, Kappa1Engine::auto(group.order()))?;
    let hs = sumset_unchecked(group, h.carrier(), s);
    if hs.card() >= group.order() || hs.card() - h.order() != k {
        return Err(Error::NotAFragment(format!(
            "|H + S| = {}, |H| = {}, κ₁(S) = {k}",
            hs.card(),
            h.order()
        )));
    }
    let phi = quotient(group, h)?;
    let image = phi.pushforward(s);
    let qk = kappa1(phi.group(), &image, Kappa1Engine::auto(phi.order()))?;
    Ok(QuotientKappa {
        quotient_order: phi.order(),
        image_size: image.card(),
        kappa1_quotient: qk,
    })
}

/// All translates of `atom`, deduplicated and sorted.
pub fn atom_translates(group: &Group, atom: &GroupSubset) -> Vec<GroupSubset> {
    let mut out: Vec<_> = group.elements().map(|g| translate(group, atom, g)).collect();
    out.sort();
    out.dedup();
    out
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::group::GroupSpec;
    use crate::set_algebra::{difference_set, sumset};
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    fn set(g: &Group, xs: &[usize]) -> GroupSubset {
        GroupSubset::from_indices(g, xs.iter().copied()).unwrap()
    }

    /// Definition-level κ₁ over every nonempty subset, no translation trick.
    fn kappa1_by_definition(g: &Group, s: &GroupSubset) -> usize {
        let n = g.order();
        let mut best = n - 1;
        for mask in 1u64..(1 << n) {
            let x = GroupSubset::from_mask(g, mask).unwrap();
            let mut reach = GroupSubset::empty(g);
            for a in x.iter() {
                for b in s.iter() {
                    reach.insert(g.add(a, b)).unwrap();
                }
            }
            if reach.card() < n {
                best = best.min(reach.card() - x.card());
            }
        }
        best
    }

    #[test]
    fn boundary_and_dual_examples() {
        let z5 = Group::cyclic(5).unwrap();
        let s = set(&z5, &[0, 1]);
        assert_eq!(boundary(&z5, &s, &set(&z5, &[0])).unwrap(), set(&z5, &[1]));
        assert!(boundary(&z5, &s, &GroupSubset::full(&z5)).unwrap().is_empty());
        assert_eq!(dual(&z5, &s, &set(&z5, &[0])).unwrap(), set(&z5, &[2, 3, 4]));
        assert_eq!(dual(&z5, &s, &GroupSubset::empty(&z5)).unwrap(), GroupSubset::full(&z5));

        let z6 = Group::cyclic(6).unwrap();
        let s = set(&z6, &[0, 2, 3]);
        let x = set(&z6, &[0, 1]);
        assert_eq!(boundary(&z6, &s, &x).unwrap(), set(&z6, &[2, 3, 4]));
        assert_eq!(dual(&z6, &s, &x).unwrap(), set(&z6, &[5]));
    }

    #[test]
    fn duality_examples_and_random() {
        let z5 = Group::cyclic(5).unwrap();
        assert_eq!(check_duality(&z5, &set(&z5, &[0, 1]), &set(&z5, &[0])).unwrap(), None);
        assert_eq!(
            check_duality(&z5, &set(&z5, &[0, 1]), &GroupSubset::full(&z5)).unwrap(),
            None
        );
        let mut rng = ChaCha8Rng::seed_from_u64(7);
        let shapes = [vec![64], vec![8, 8], vec![2, 4, 8], vec![5, 12], vec![3, 3, 7]];
        for _ in 0..1000 {
            let spec = GroupSpec::new(shapes[rng.gen_range(0..shapes.len())].clone()).unwrap();
            let g = Group::new(&spec).unwrap();
            let mut s = GroupSubset::from_mask(&g, rng.gen::<u64>() & ((1u128 << g.order()) - 1) as u64).unwrap();
            s.insert(0).unwrap();
            let x = GroupSubset::from_mask(&g, rng.gen::<u64>() & ((1u128 << g.order()) - 1) as u64).unwrap();
            assert_eq!(check_duality(&g, &s, &x).unwrap(), None);
        }
    }

    #[test]
    fn kappa1_examples() {
        let z5 = Group::cyclic(5).unwrap();
        for engine in [Kappa1Engine::Exhaustive, Kappa1Engine::Flow] {
            assert_eq!(kappa1(&z5, &set(&z5, &[0, 1]), engine).unwrap(), 1);
            assert_eq!(kappa1(&z5, &set(&z5, &[0, 1, 2]), engine).unwrap(), 2);
            assert_eq!(kappa1(&z5, &GroupSubset::full(&z5), engine).unwrap(), 4);
        }
        assert_eq!(kappa1_by_definition(&z5, &set(&z5, &[0, 1, 2])), 2);
    }

    #[test]
    fn kappa1_errors() {
        let z6 = Group::cyclic(6).unwrap();
        assert_eq!(
            kappa1(&z6, &set(&z6, &[1]), Kappa1Engine::Flow),
            Err(Error::ZeroMissing)
        );
        assert_eq!(
            kappa1(&z6, &set(&z6, &[0, 2]), Kappa1Engine::Exhaustive),
            Err(Error::NotGenerating)
        );
        let big = Group::cyclic(21).unwrap();
        assert!(matches!(
            kappa1(&big, &set(&big, &[0, 1]), Kappa1Engine::Exhaustive),
            Err(Error::TooLargeForExhaustive { .. })
        ));
    }

    #[test]
    fn engines_match_definition_on_small_groups() {
        for orders in [vec![6], vec![8], vec![2, 4], vec![3, 3]] {
            let g = Group::new(&GroupSpec::new(orders).unwrap()).unwrap();
            for mask in 0u64..(1 << g.order()) {
                let s = GroupSubset::from_mask(&g, mask | 1).unwrap();
                if !generates(&g, &s) {
                    continue;
                }
                let expect = kappa1_by_definition(&g, &s);
                assert_eq!(kappa1(&g, &s, Kappa1Engine::Exhaustive).unwrap(), expect);
                assert_eq!(kappa1(&g, &s, Kappa1Engine::Flow).unwrap(), expect);
            }
        }
    }

    #[test]
    fn atoms_examples() {
        let z5 = Group::cyclic(5).unwrap();
        let r = atoms(&z5, &set(&z5, &[0, 1]), Kappa1Engine::Exhaustive).unwrap();
        assert_eq!((r.kappa1, r.alpha1), (1, 1));
        assert_eq!(r.atoms_containing_zero, vec![set(&z5, &[0])]);

        let z4 = Group::cyclic(4).unwrap();
        let s = set(&z4, &[0, 1, 2]);
        let ex = atoms(&z4, &s, Kappa1Engine::Exhaustive).unwrap();
        let fl = atoms(&z4, &s, Kappa1Engine::Flow).unwrap();
        assert!(is_subgroup(&z4, ex.atom()));
        assert_eq!(ex.atom(), fl.atom());
        // X = {0,2}: X + S = G. X = {0}: ∂ = {1,2}; X = {0,1}: X + S = G.
        assert_eq!(ex.kappa1, 2);
        assert_eq!(ex.atom(), &set(&z4, &[0]));

        let full = atoms(&z5, &GroupSubset::full(&z5), Kappa1Engine::Flow).unwrap();
        assert_eq!((full.kappa1, full.alpha1), (4, 1));
        assert_eq!(full.atoms_containing_zero, vec![set(&z5, &[0])]);
    }

    #[test]
    fn atom_can_be_a_proper_subgroup() {
        let g = Group::cyclic(12).unwrap();
        let s = set(&g, &[0, 1, 6, 7]);
        let r = atoms(&g, &s, Kappa1Engine::Exhaustive).unwrap();
        assert_eq!(r.atom(), &set(&g, &[0, 6]));
        assert_eq!((r.kappa1, r.alpha1), (2, 2));
        let fl = atoms(&g, &s, Kappa1Engine::Flow).unwrap();
        assert_eq!(fl.atom(), r.atom());
        assert_eq!(fl.kappa1, r.kappa1);
        let json: serde_json::Value = serde_json::to_value(&r).unwrap();
        assert_eq!(json["kappa1"], 2);
        assert_eq!(json["atoms"], serde_json::json!([[0, 6]]));
        let w = GroupSubset::from_indices(&g, json["witness"].as_array().unwrap().iter().map(|v| v.as_u64().unwrap() as usize)).unwrap();
        assert_eq!(boundary(&g, &s, &w).unwrap().card(), 2);
    }

    #[test]
    fn isoperimetric_examples() {
        let z5 = Group::cyclic(5).unwrap();
        let s = set(&z5, &[0, 1]);
        assert_eq!(check_isoperimetric_inequality(&z5, &s, &set(&z5, &[2, 4])).unwrap(), None);
        assert_eq!(check_isoperimetric_inequality(&z5, &s, &GroupSubset::full(&z5)).unwrap(), None);
        let z8 = Group::cyclic(8).unwrap();
        let s = set(&z8, &[0, 1, 3]);
        let k = kappa1(&z8, &s, Kappa1Engine::Exhaustive).unwrap();
        for mask in 1u64..256 {
            assert!(isoperimetric_holds(&z8, &s, &GroupSubset::from_mask(&z8, mask).unwrap(), k));
        }
    }

    #[test]
    fn olsong_examples() {
        let z6 = Group::cyclic(6).unwrap();
        assert_eq!(check_olsong(&z6, &set(&z6, &[0, 1]), &set(&z6, &[0])).unwrap(), None);
        let z8 = Group::cyclic(8).unwrap();
        let (s, t) = (set(&z8, &[1, 3]), set(&z8, &[0, 4]));
        assert_eq!(check_olsong(&z8, &s, &t).unwrap(), None);
        assert_eq!(sumset_unchecked(&z8, &s, &t).card(), 4);
        assert!(matches!(
            check_olsong(&z8, &s, &set(&z8, &[0, 2, 4, 6])),
            Err(Error::PreconditionUnmet(_))
        ));
    }

    #[test]
    fn olsong_fails_when_a_part_saturates_its_coset() {
        let z5 = Group::cyclic(5).unwrap();
        let v = check_olsong(&z5, &set(&z5, &[0, 1, 2]), &set(&z5, &[0, 1, 2, 3])).unwrap();
        assert_eq!(
            v,
            Some(OlsonViolation {
                sum_size: 5,
                t_size: 4,
                s_size: 3
            })
        );
    }

    /// Every violation of the half-|S| bound comes from coset parts whose sum
    /// with `S` fills the whole coset; the capped form always holds.
    #[test]
    fn olsong_random() {
        let mut rng = ChaCha8Rng::seed_from_u64(11);
        let mut violations = 0;
        for _ in 0..2000 {
            let n = rng.gen_range(2..=32usize);
            let g = Group::cyclic(n).unwrap();
            let mask = |rng: &mut ChaCha8Rng| rng.gen::<u64>() & ((1u64 << n) - 1);
            let s = GroupSubset::from_mask(&g, mask(&mut rng)).unwrap();
            let t = GroupSubset::from_mask(&g, mask(&mut rng)).unwrap();
            let v = match check_olsong(&g, &s, &t) {
                Ok(v) => v,
                Err(Error::PreconditionUnmet(_)) | Err(Error::EmptySet) => continue,
                Err(e) => panic!("{e}"),
            };
            let q = Subgroup::generated(&g, &difference_set(&g, &s, &s).unwrap()).unwrap();
            let sum = sumset_unchecked(&g, &t, &s).card();
            let parts = h_decompose(&g, &t, &q).unwrap().parts;
            let capped = parts
                .iter()
                .filter(|p| p.trace.card() < q.order())
                .map(|p| (q.order() - p.trace.card()).min(s.card().div_ceil(2)))
                .max()
                .unwrap();
            assert!(sum >= t.card() + capped);
            if v.is_some() {
                violations += 1;
                assert!(parts
                    .iter()
                    .any(|p| p.trace.card() < q.order()
                        && sumset_unchecked(&g, &p.trace, &s).card() == q.order()));
            }
        }
        assert!(violations > 0);
    }

    #[test]
    fn reduced_rest_is_not_always_periodic() {
        let z18 = Group::cyclic(18).unwrap();
        let s = set(&z18, &[0, 4, 6, 10, 12, 16]);
        let t = set(&z18, &[1, 3, 4, 5, 7, 9, 10, 11, 15, 16, 17]);
        let k = Subgroup::generated(&z18, &s).unwrap();
        let Reduction::Part { part, .. } = reduce_to_generated(&z18, &s, &t, 2).unwrap() else {
            panic!("expected a part");
        };
        assert_eq!(part, set(&z18, &[4, 10, 16]));
        let rest = t.difference(&part);
        assert_ne!(sumset(&z18, &rest, k.carrier()).unwrap(), rest);
        let rest_sum = sumset(&z18, &rest, &s).unwrap();
        assert_eq!(sumset(&z18, &rest_sum, k.carrier()).unwrap(), rest_sum);
        // No coset part of T is a union of full cosets, so no choice of T' works.
        for p in h_decompose(&z18, &t, &k).unwrap().parts {
            assert_ne!(p.trace.card(), k.order());
        }
    }

    #[test]
    fn reduce_examples() {
        let z12 = Group::cyclic(12).unwrap();
        let s = set(&z12, &[0, 3]);
        let t = set(&z12, &[0, 3]);
        assert_eq!(
            reduce_to_generated(&z12, &s, &t, 1).unwrap(),
            Reduction::Part { shift: 0, part: t.clone() }
        );

        let g = Group::new(&GroupSpec::new(vec![4, 2]).unwrap()).unwrap();
        let s = set(&g, &[0, 1]);
        let t = set(&g, &[0, 1, 2, 3, 4]);
        assert_eq!(
            reduce_to_generated(&g, &s, &t, 1).unwrap(),
            Reduction::Part { shift: 4, part: set(&g, &[4]) }
        );

        // Both coset parts of T fill their coset after adding S.
        let t = set(&g, &[0, 1, 2, 4, 5, 6]);
        assert_eq!(sumset_unchecked(&g, &t, &s), GroupSubset::full(&g));
        assert_eq!(reduce_to_generated(&g, &s, &t, 0).unwrap(), Reduction::AlreadyPeriodicPart);

        assert!(matches!(
            reduce_to_generated(&g, &s, &t, 3),
            Err(Error::PreconditionUnmet(_))
        ));
    }

    #[test]
    fn quotient_kappa_examples() {
        let z12 = Group::cyclic(12).unwrap();
        let s = set(&z12, &[0, 1, 6, 7]);
        let r = atoms(&z12, &s, Kappa1Engine::Exhaustive).unwrap();
        let h = Subgroup::from_carrier(&z12, r.atom().clone()).unwrap();
        let q = check_quotient_kappa(&z12, &s, &h).unwrap();
        assert!(q.holds());
        assert_eq!((q.quotient_order, q.image_size, q.kappa1_quotient), (6, 2, 1));

        let z4 = Group::cyclic(4).unwrap();
        let s = set(&z4, &[0, 1, 2]);
        let atom = atoms(&z4, &s, Kappa1Engine::Exhaustive).unwrap();
        let h = Subgroup::from_carrier(&z4, atom.atom().clone()).unwrap();
        let q = check_quotient_kappa(&z4, &s, &h).unwrap();
        assert!(q.holds());
        assert_eq!(q.kappa1_quotient, s.card() - 1);

        let not_fragment = Subgroup::from_carrier(&z4, set(&z4, &[0, 2])).unwrap();
        assert!(matches!(
            check_quotient_kappa(&z4, &s, &not_fragment),
            Err(Error::NotAFragment(_))
        ));
    }
}
