//! Replays the isoperimetric argument for the periodicity theorem on one
//! concrete pair `(S, T)` and records every intermediate inequality as a
//! ledger line evaluated on that pair.
//!
//! A node first normalises its pair (swap so that `|S| ≤ |T|`, translate so
//! that `0 ∈ S`), then takes exactly one branch:
//!
//! * `subgroup_restriction`: `T ⊆ ⟨S⟩ ≠ G`, retrace inside `⟨S⟩`;
//! * `coset_reduction`: `T ⊄ ⟨S⟩`, retrace the single coset part whose sum
//!   with `S` is not a full coset;
//! * `coset_periodic`: as above but no such part exists;
//! * `saturated`: `T + S = G`;
//! * `duality`: `|T^S| < |T|`, retrace `(−S, T^S)`;
//! * `main`: the atom argument, possibly retracing one defective part.

use std::collections::{BTreeMap, HashMap};
use std::fmt::Write as _;
use std::sync::Mutex;

use rand::seq::index::sample;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::Serialize;

use crate::bitset::BitSet;
use crate::error::{Error, Result};
use crate::group::Group;
use crate::isoperimetry::{atoms, kappa1, reduce_to_generated, FragmentReport, Kappa1Engine, Reduction};
use crate::menger::{is_strong_matching, Digraph};
use crate::set_algebra::{difference_set, h_decompose, negate, stabilizer_unchecked, sumset_unchecked, translate};
use crate::subgroup::{quotient, Subgroup, SubgroupEmbedding};
use crate::subset::GroupSubset;

const MAX_DEPTH: usize = 64;

/// Largest order accepted by [`trace_sweep`].
pub const SWEEP_MAX_ORDER: usize = 14;

/// Ledger lines evaluated by every node that reaches the main branch.
pub const MAIN_LEDGER_LINES: &[&str] = &[
    "dual_not_smaller",
    "two_thirds",
    "atom_boundary",
    "tail_parts",
    "largest_part_generates",
    "quotient_connectivity",
    "quotient_room",
    "matching_size",
    "complement_nonempty",
    "residue_empty",
    "quotient_sum_size",
    "matched_full_part",
    "parts_saturate",
    "coset_absorption",
    "defects_use_last_part",
    "sum_decomposition",
    "last_part_size",
    "defect_count",
    "final_periodicity",
];

#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct LedgerLine {
    pub name: &'static str,
    pub holds: bool,
    pub detail: String,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum Branch {
    /// The hypothesis failed on entry; nothing further is traced.
    Stopped,
    SubgroupRestriction,
    CosetReduction,
    CosetPeriodic,
    Saturated,
    Duality,
    Main,
}

impl Branch {
    pub fn name(self) -> &'static str {
        match self {
            Branch::Stopped => "stopped",
            Branch::SubgroupRestriction => "subgroup_restriction",
            Branch::CosetReduction => "coset_reduction",
            Branch::CosetPeriodic => "coset_periodic",
            Branch::Saturated => "saturated",
            Branch::Duality => "duality",
            Branch::Main => "main",
        }
    }
}

/// The quantities of the atom argument. Part indices refer to `s_parts`
/// (sorted by decreasing size, the largest inside the atom) and `t_parts`
/// (sorted by coset).
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct MainTrace {
    /// `S` was replaced by `S − s_shift` so that its largest part lies in `H`.
    pub s_shift: usize,
    pub atom: Vec<usize>,
    pub kappa1: usize,
    pub u: usize,
    pub t: usize,
    pub q: usize,
    pub ell: usize,
    pub s_parts: Vec<Vec<usize>>,
    pub t_parts: Vec<Vec<usize>>,
    /// `|E_i|` with `E_i = (S + T) ∩ (T_i + H)`.
    pub e_sizes: Vec<usize>,
    pub j: Vec<usize>,
    /// `m_i` for each `i` in `j`, same order.
    pub m: Vec<usize>,
    /// Quotient coset matched to each `i` in `j`.
    pub targets: Vec<usize>,
    pub i: Vec<usize>,
    pub w: Vec<usize>,
    pub p: Vec<usize>,
    pub f: Vec<usize>,
    pub residue: Vec<usize>,
    /// Smallest index of `J ∩ P`.
    pub full_matched: Option<usize>,
    pub d: Vec<usize>,
    pub d_prime: Vec<usize>,
    pub q_subgroup: Vec<usize>,
    pub defect: Option<usize>,
    #[serde(skip)]
    quotient: Group,
    #[serde(skip)]
    phi_s: GroupSubset,
    #[serde(skip)]
    phi_t: Vec<usize>,
}

impl MainTrace {
    pub fn u_branch(&self) -> &'static str {
        if self.u == 1 {
            "u1"
        } else {
            "u_ge2"
        }
    }

    pub fn defect_branch(&self) -> &'static str {
        if self.defect.is_some() {
            "one_defect"
        } else {
            "no_defect"
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct ProofTrace {
    pub group: String,
    /// The pair after normalisation.
    pub s: Vec<usize>,
    pub t: Vec<usize>,
    pub swapped: bool,
    /// The normalised pair is `(S − shift, T + shift)` after any swap.
    pub shift: usize,
    pub branch: Branch,
    pub ledger: Vec<LedgerLine>,
    /// The nonzero subgroup `N` with `T + S + N = T + S`.
    pub period: Vec<usize>,
    pub main: Option<MainTrace>,
    pub child: Option<Box<ProofTrace>>,
}

impl ProofTrace {
    /// This node followed by its descendants.
    pub fn nodes(&self) -> Vec<&ProofTrace> {
        let mut out = vec![self];
        let mut cur = self;
        while let Some(c) = &cur.child {
            out.push(c);
            cur = c;
        }
        out
    }

    /// Failed lines as `(depth, line)`.
    pub fn violations(&self) -> Vec<(usize, &LedgerLine)> {
        self.nodes()
            .into_iter()
            .enumerate()
            .flat_map(|(d, n)| n.ledger.iter().filter(|l| !l.holds).map(move |l| (d, l)))
            .collect()
    }

    pub fn is_clean(&self) -> bool {
        self.nodes().iter().all(|n| n.ledger.iter().all(|l| l.holds))
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("trace serializes")
    }
}

/// Memoises atom computations across traces.
#[derive(Default)]
pub struct Tracer {
    atoms: Mutex<HashMap<(u64, BitSet), FragmentReport>>,
}

fn line(ledger: &mut Vec<LedgerLine>, name: &'static str, holds: bool, detail: String) -> bool {
    ledger.push(LedgerLine { name, holds, detail });
    holds
}

/// Coset parts sorted by decreasing size, ties by coset representative.
fn h_decompose_sorted(g: &Group, a: &GroupSubset, h: &Subgroup) -> Result<Vec<GroupSubset>> {
    let mut parts = h_decompose(g, a, h)?.parts;
    parts.sort_by_key(|p| (std::cmp::Reverse(p.trace.card()), p.coset_rep));
    Ok(parts.into_iter().map(|p| p.trace).collect())
}

fn coset(g: &Group, h: &GroupSubset, x: usize) -> GroupSubset {
    translate(g, h, x)
}

impl Tracer {
    pub fn new() -> Self {
        Tracer::default()
    }

    fn atoms(&self, g: &Group, s: &GroupSubset) -> Result<FragmentReport> {
        let key = (g.tag(), s.bits().clone());
        if let Some(r) = self.atoms.lock().expect("cache lock").get(&key) {
            return Ok(r.clone());
        }
        let r = atoms(g, s, Kappa1Engine::auto(g.order()))?;
        self.atoms.lock().expect("cache lock").insert(key, r.clone());
        Ok(r)
    }

    /// Traces without checking entry preconditions or ledger outcomes.
    pub fn trace_unchecked(&self, g: &Group, s: &GroupSubset, t: &GroupSubset) -> Result<ProofTrace> {
        s.check(g)?;
        t.check(g)?;
        if s.is_empty() || t.is_empty() {
            return Err(Error::EmptySet);
        }
        self.node(g, s, t, 0)
    }

    fn node(&self, g: &Group, s: &GroupSubset, t: &GroupSubset, depth: usize) -> Result<ProofTrace> {
        if depth > MAX_DEPTH {
            return Err(Error::Recursion(format!("trace deeper than {MAX_DEPTH}")));
        }
        let (mut s, mut t, swapped) = if s.card() > t.card() {
            let t0 = t.first().expect("nonempty");
            (translate(g, t, g.neg(t0)), translate(g, s, t0), true)
        } else {
            (s.clone(), t.clone(), false)
        };
        let shift = if s.contains(0) { 0 } else { s.first().expect("nonempty") };
        if shift != 0 {
            s = translate(g, &s, g.neg(shift));
            t = translate(g, &t, shift);
        }
        let n = g.order();
        let sum = sumset_unchecked(g, &t, &s);
        let mut ledger = Vec::new();
        let mut main = None;
        let mut child = None;

        let hyp = line(
            &mut ledger,
            "hypothesis",
            sum.card() + 2 <= t.card() + s.card(),
            format!("|T+S| = {}, |T| + |S| − 2 = {}", sum.card(), (t.card() + s.card()) as i64 - 2),
        );
        let k = Subgroup::generated(g, &s)?;
        let (branch, n_set) = if !hyp {
            (Branch::Stopped, GroupSubset::zero(g))
        } else if k.order() < n {
            if t.is_subset(k.carrier()) {
                let emb = SubgroupEmbedding::new(g, &k)?;
                let c = self.node(emb.group(), &emb.restrict(&s)?, &emb.restrict(&t)?, depth + 1)?;
                let local = GroupSubset::from_indices(emb.group(), c.period.iter().copied())?;
                let lifted = emb.lift(g, &local);
                child = Some(Box::new(c));
                (Branch::SubgroupRestriction, lifted)
            } else {
                match reduce_to_generated(g, &s, &t, 2)? {
                    Reduction::AlreadyPeriodicPart => (Branch::CosetPeriodic, k.carrier().clone()),
                    Reduction::Part { shift: a, part } => {
                        let rest = t.difference(&part);
                        let rest_sum = sumset_unchecked(g, &rest, &s);
                        line(
                            &mut ledger,
                            "rest_sum_periodic",
                            rest.is_empty() || sumset_unchecked(g, &rest_sum, k.carrier()) == rest_sum,
                            format!("(T \\ T') + S = {rest_sum}"),
                        );
                        let ps = sumset_unchecked(g, &part, &s).card();
                        line(
                            &mut ledger,
                            "part_small_doubling",
                            ps + 2 <= part.card() + s.card(),
                            format!("|T'+S| = {ps}, |T'| = {}, |S| = {}", part.card(), s.card()),
                        );
                        let c = self.node(g, &s, &translate(g, &part, g.neg(a)), depth + 1)?;
                        let nn = GroupSubset::from_indices(g, c.period.iter().copied())?;
                        child = Some(Box::new(c));
                        (Branch::CosetReduction, nn)
                    }
                }
            }
        } else if sum.card() == n {
            (Branch::Saturated, GroupSubset::full(g))
        } else {
            let y = sum.complement();
            if y.card() < t.card() {
                let neg_s = negate(g, &s);
                let ys = sumset_unchecked(g, &y, &neg_s);
                line(
                    &mut ledger,
                    "dual_small_doubling",
                    ys.card() + 2 <= y.card() + s.card(),
                    format!("|T^S − S| = {}, |T^S| = {}, |S| = {}", ys.card(), y.card(), s.card()),
                );
                line(
                    &mut ledger,
                    "dual_identity",
                    sumset_unchecked(g, &ys.complement(), &s) == sum,
                    "(T^S)^(−S) + S = T + S".into(),
                );
                let c = self.node(g, &neg_s, &y, depth + 1)?;
                let nn = GroupSubset::from_indices(g, c.period.iter().copied())?;
                child = Some(Box::new(c));
                (Branch::Duality, nn)
            } else {
                let (m, nn, c) = self.main_branch(g, &s, &t, &sum, &mut ledger, depth)?;
                main = Some(m);
                child = c.map(Box::new);
                (Branch::Main, nn)
            }
        };

        let periodic = n_set.card() > 1 && sumset_unchecked(g, &sum, &n_set) == sum;
        line(
            &mut ledger,
            "final_periodicity",
            periodic,
            format!("N = {n_set}"),
        );
        Ok(ProofTrace {
            group: g.label().to_string(),
            s: s.to_vec(),
            t: t.to_vec(),
            swapped,
            shift,
            branch,
            ledger,
            period: n_set.to_vec(),
            main,
            child,
        })
    }

    fn main_branch(
        &self,
        g: &Group,
        s_in: &GroupSubset,
        t: &GroupSubset,
        sum_in: &GroupSubset,
        ledger: &mut Vec<LedgerLine>,
        depth: usize,
    ) -> Result<(MainTrace, GroupSubset, Option<ProofTrace>)> {
        let n = g.order();
        let dual_size = n - sum_in.card();
        line(
            ledger,
            "dual_not_smaller",
            t.card() <= dual_size,
            format!("|T| = {}, |T^S| = {dual_size}", t.card()),
        );
        line(
            ledger,
            "two_thirds",
            3 * sum_in.card() + 2 <= 2 * n,
            format!("3|S+T| = {}, 2|G| − 2 = {}", 3 * sum_in.card(), 2 * n - 2),
        );

        let report = self.atoms(g, s_in)?;
        let h = Subgroup::from_carrier(g, report.atom().clone())?;
        let hh = h.carrier();
        let hn = h.order();

        let first = h_decompose_sorted(g, s_in, &h)?;
        let s_shift = first[0].first().expect("nonempty part");
        let s = translate(g, s_in, g.neg(s_shift));
        let sum = translate(g, sum_in, g.neg(s_shift));
        let s_parts = h_decompose_sorted(g, &s, &h)?;
        debug_assert!(s_parts[0].is_subset(hh));
        let u = s_parts.len() - 1;

        let qm = quotient(g, &h)?;
        let qg = qm.group().clone();
        let q = qm.order();
        let phi_s = qm.pushforward(&s);
        let s_coset: Vec<usize> = s_parts.iter().map(|p| qm.coset_index(p.first().unwrap())).collect();

        let t_parts: Vec<GroupSubset> = h_decompose(g, t, &h)?
            .parts
            .into_iter()
            .map(|p| p.trace)
            .collect();
        let tt = t_parts.len() - 1;
        let phi_t: Vec<usize> = t_parts.iter().map(|p| qm.coset_index(p.first().unwrap())).collect();
        let t_cosets: Vec<GroupSubset> = t_parts.iter().map(|p| coset(g, hh, p.first().unwrap())).collect();
        let sz = |i: usize| s_parts[i].card();

        line(
            ledger,
            "atom_boundary",
            report.kappa1 == u * hn && report.kappa1 + 2 <= s.card(),
            format!("κ₁ = {}, u|H| = {}, |S| = {}", report.kappa1, u * hn, s.card()),
        );
        for j in 0..=u {
            let tail: usize = (u - j..=u).map(sz).sum();
            line(ledger, "tail_parts", tail >= j * hn + 2, format!("j = {j}: {tail} vs {}", j * hn + 2));
        }
        let gen0 = Subgroup::generated(g, &s_parts[0])?;
        line(
            ledger,
            "largest_part_generates",
            gen0.carrier() == hh,
            format!("⟨S_0⟩ has order {}, |H| = {hn}", gen0.order()),
        );
        let kq = kappa1(&qg, &phi_s, Kappa1Engine::auto(q))?;
        line(ledger, "quotient_connectivity", kq == u, format!("κ₁(φ(S)) = {kq}, u = {u}"));
        line(ledger, "quotient_room", q > u + tt, format!("q = {q}, u = {u}, t = {tt}"));
        let ell = (q - tt - 1).min(u);

        let e_sizes: Vec<usize> = t_cosets.iter().map(|c| sum.intersection(c).card()).collect();
        let w: Vec<usize> = (0..=tt).filter(|&i| e_sizes[i] < hn).collect();
        let p: Vec<usize> = (0..=tt).filter(|&i| e_sizes[i] == hn).collect();

        // Greedy over the transversal matroid: parts in P first.
        let in_x: Vec<bool> = {
            let mut v = vec![false; q];
            for &c in &phi_t {
                v[c] = true;
            }
            v
        };
        let mut owner: Vec<Option<usize>> = vec![None; q];
        let mut j_set = Vec::new();
        for &i in p.iter().chain(&w) {
            if j_set.len() == ell {
                break;
            }
            let mut seen = vec![false; q];
            if augment(&qg, &phi_t, &s_coset[1..], &in_x, i, &mut seen, &mut owner) {
                j_set.push(i);
            }
        }
        j_set.sort_unstable();
        let mut target_of = vec![usize::MAX; tt + 1];
        for (y, o) in owner.iter().enumerate() {
            if let Some(i) = o {
                target_of[*i] = y;
            }
        }
        let targets: Vec<usize> = j_set.iter().map(|&i| target_of[i]).collect();
        let m: Vec<usize> = j_set
            .iter()
            .map(|&i| {
                let diff = qg.sub(target_of[i], phi_t[i]);
                s_coset.iter().position(|&c| c == diff).expect("matched through a part of S")
            })
            .collect();
        line(ledger, "matching_size", j_set.len() == ell, format!("|J| = {}, ℓ = {ell}", j_set.len()));
        let i_set: Vec<usize> = (0..=tt).filter(|i| !j_set.contains(i)).collect();
        line(ledger, "complement_nonempty", !i_set.is_empty(), format!("I = {i_set:?}"));

        let th = qm.preimage(g, &GroupSubset::from_indices(&qg, phi_t.iter().copied())?);
        let matched = qm.preimage(g, &GroupSubset::from_indices(&qg, targets.iter().copied())?);
        let residue = sum.difference(&th.union(&matched));
        line(ledger, "residue_empty", residue.is_empty(), format!("R = {residue}"));
        let phi_sum = qm.pushforward(&sum).card();
        line(
            ledger,
            "quotient_sum_size",
            phi_sum == u + tt + 1,
            format!("|φ(S+T)| = {phi_sum}, |φ(S)| + |φ(T)| − 1 = {}", u + tt + 1),
        );
        let full_matched = j_set.iter().copied().find(|i| p.contains(i));
        line(
            ledger,
            "matched_full_part",
            j_set.is_empty() || full_matched.is_some(),
            format!("J = {j_set:?}, P = {p:?}"),
        );

        let w_cosets = w.iter().fold(GroupSubset::empty(g), |acc, &i| acc.union(&t_cosets[i]));
        let f: Vec<usize> = i_set
            .iter()
            .copied()
            .filter(|i| p.contains(i) && sumset_unchecked(g, &t_parts[*i], &s).intersects(&w_cosets))
            .collect();

        let mut short = Vec::new();
        for (k, tk) in t_parts.iter().enumerate() {
            if tk.card() + sz(u - 1) <= hn {
                short.push(k);
            }
        }
        line(
            ledger,
            "parts_saturate",
            short.is_empty(),
            format!("|S_(u−1)| = {}, |H| = {hn}, failing k = {short:?}", sz(u - 1)),
        );
        let mut unabsorbed = Vec::new();
        for (i, ti) in t_parts.iter().enumerate() {
            for (jj, sj) in s_parts.iter().enumerate().take(u) {
                let ts = sumset_unchecked(g, ti, sj);
                if sumset_unchecked(g, &ts, hh) != ts {
                    unabsorbed.push((i, jj));
                }
            }
        }
        line(ledger, "coset_absorption", unabsorbed.is_empty(), format!("failing (i, j) = {unabsorbed:?}"));

        let target_coset = |idx: usize| coset(g, hh, qm.coset_reps()[targets[idx]]);
        let d: Vec<usize> = (0..j_set.len()).filter(|&x| !target_coset(x).is_subset(&sum)).map(|x| j_set[x]).collect();
        let d_pos: Vec<usize> = (0..j_set.len()).filter(|&x| d.contains(&j_set[x])).collect();
        line(
            ledger,
            "defects_use_last_part",
            d_pos.iter().all(|&x| m[x] == u),
            format!("D = {d:?}, m = {m:?}"),
        );
        let mut c_set = th.clone();
        for x in 0..j_set.len() {
            if d_pos.contains(&x) {
                c_set = c_set.union(&sumset_unchecked(g, &t_parts[j_set[x]], &s_parts[u]));
            } else {
                c_set = c_set.union(&target_coset(x));
            }
        }
        line(ledger, "sum_decomposition", c_set == sum, format!("C = {c_set}"));

        let su = &s_parts[u];
        let qsub = Subgroup::generated(g, &difference_set(g, su, su)?)?;
        line(
            ledger,
            "last_part_size",
            qsub.order() >= su.card() && su.card() >= 2,
            format!("|Q| = {}, |S_u| = {}", qsub.order(), su.card()),
        );
        let d_prime: Vec<usize> = d_pos
            .iter()
            .filter(|&&x| {
                let ts = sumset_unchecked(g, &t_parts[j_set[x]], &s_parts[m[x]]);
                sumset_unchecked(g, &ts, qsub.carrier()) != ts
            })
            .map(|&x| j_set[x])
            .collect();
        line(ledger, "defect_count", d_prime.len() <= 1, format!("D' = {d_prime:?}"));

        let (n_set, defect, child) = match d_prime.first() {
            None => (qsub.carrier().clone(), None, None),
            Some(&o) => {
                let to = &t_parts[o];
                let tsu = sumset_unchecked(g, to, su);
                line(
                    ledger,
                    "defect_small_doubling",
                    tsu.card() + 2 <= to.card() + su.card(),
                    format!("|T_o+S_u| = {}, |T_o| = {}, |S_u| = {}", tsu.card(), to.card(), su.card()),
                );
                let x_o = to.first().expect("nonempty");
                let a_u = su.first().expect("nonempty");
                let c = self.node(g, &translate(g, su, g.neg(a_u)), &translate(g, to, g.neg(x_o)), depth + 1)?;
                let inside = stabilizer_unchecked(g, &tsu).intersection(qsub.carrier());
                line(
                    ledger,
                    "defect_period_in_last_group",
                    inside.card() > 1,
                    format!("period(T_o+S_u) ∩ Q = {inside}"),
                );
                (inside, Some(o), Some(c))
            }
        };

        let trace = MainTrace {
            s_shift,
            atom: hh.to_vec(),
            kappa1: report.kappa1,
            u,
            t: tt,
            q,
            ell,
            s_parts: s_parts.iter().map(GroupSubset::to_vec).collect(),
            t_parts: t_parts.iter().map(GroupSubset::to_vec).collect(),
            e_sizes,
            j: j_set,
            m,
            targets,
            i: i_set,
            w,
            p,
            f,
            residue: residue.to_vec(),
            full_matched,
            d,
            d_prime,
            q_subgroup: qsub.carrier().to_vec(),
            defect,
            quotient: qg,
            phi_s,
            phi_t,
        };
        Ok((trace, n_set, child))
    }
}

/// Kuhn step: match part `i` to a coset `φ(T_i) + φ(S_j)` outside `φ(T)`.
fn augment(
    qg: &Group,
    phi_t: &[usize],
    steps: &[usize],
    in_x: &[bool],
    i: usize,
    seen: &mut [bool],
    owner: &mut [Option<usize>],
) -> bool {
    for &st in steps {
        let y = qg.add(phi_t[i], st);
        if in_x[y] || seen[y] {
            continue;
        }
        seen[y] = true;
        let free = match owner[y] {
            None => true,
            Some(o) => augment(qg, phi_t, steps, in_x, o, seen, owner),
        };
        if free {
            owner[y] = Some(i);
            return true;
        }
    }
    false
}

/// The entry conditions of [`proof_trace`]: nonempty sets, `0 ∈ S`, `|S| ≤ |T|`
/// and `|T + S| ≤ |T| + |S| − 2`.
pub fn check_trace_preconditions(g: &Group, s: &GroupSubset, t: &GroupSubset) -> Result<()> {
    s.check(g)?;
    t.check(g)?;
    if s.is_empty() || t.is_empty() {
        return Err(Error::EmptySet);
    }
    if !s.contains(0) {
        return Err(Error::PreconditionUnmet("0 ∉ S".into()));
    }
    if s.card() > t.card() {
        return Err(Error::PreconditionUnmet(format!("|S| = {} > |T| = {}", s.card(), t.card())));
    }
    let sum = sumset_unchecked(g, t, s).card();
    if sum + 2 > s.card() + t.card() {
        return Err(Error::PreconditionUnmet(format!(
            "|T+S| = {sum} > |T| + |S| − 2 = {}",
            (s.card() + t.card()) as i64 - 2
        )));
    }
    Ok(())
}

/// Traces `(S, T)` and fails with `LedgerViolation` on the first false line.
pub fn proof_trace(g: &Group, s: &GroupSubset, t: &GroupSubset) -> Result<ProofTrace> {
    check_trace_preconditions(g, s, t)?;
    let trace = Tracer::new().trace_unchecked(g, s, t)?;
    if let Some((depth, l)) = trace.violations().first() {
        return Err(Error::LedgerViolation(format!(
            "{} at depth {depth}: {}\n{}",
            l.name,
            l.detail,
            trace.to_json()
        )));
    }
    Ok(trace)
}

/// Traces any pair of nonempty sets, keeping failed lines in the ledger.
pub fn proof_trace_unchecked(g: &Group, s: &GroupSubset, t: &GroupSubset) -> Result<ProofTrace> {
    Tracer::new().trace_unchecked(g, s, t)
}

fn matchable(qg: &Group, trace: &MainTrace, subset: &[usize]) -> bool {
    let q = qg.order();
    let mut in_x = vec![false; q];
    for &c in &trace.phi_t {
        in_x[c] = true;
    }
    let steps: Vec<usize> = trace.phi_s.iter().filter(|&c| c != 0).collect();
    let mut owner = vec![None; q];
    subset.iter().all(|&i| {
        let mut seen = vec![false; q];
        augment(qg, &trace.phi_t, &steps, &in_x, i, &mut seen, &mut owner)
    })
}

fn combinations(n: usize, k: usize, f: &mut impl FnMut(&[usize]) -> bool) -> bool {
    fn go(start: usize, n: usize, k: usize, cur: &mut Vec<usize>, f: &mut impl FnMut(&[usize]) -> bool) -> bool {
        if cur.len() == k {
            return f(cur);
        }
        for x in start..n {
            if n - x < k - cur.len() {
                break;
            }
            cur.push(x);
            let go_on = go(x + 1, n, k, cur, f);
            cur.pop();
            if !go_on {
                return false;
            }
        }
        true
    }
    go(0, n, k, &mut Vec::with_capacity(k), f)
}

/// Checks every main node: `J` comes from a strong matching of `φ(T)` in
/// the Cayley digraph of `φ(S)`, has `ℓ` elements, and no other matchable
/// set of that size meets `P` in more elements.
pub fn check_j_selection(trace: &ProofTrace) -> Result<()> {
    for node in trace.nodes() {
        let Some(mt) = &node.main else { continue };
        if mt.ell != mt.u {
            return Err(Error::PreconditionUnmet(format!("ℓ = {} ≠ u = {}", mt.ell, mt.u)));
        }
        let qg = &mt.quotient;
        let dg = Digraph::cayley(qg, &mt.phi_s)?;
        let x = BitSet::from_indices(qg.order(), mt.phi_t.iter().copied());
        let pairs: Vec<(usize, usize)> = mt.j.iter().zip(&mt.targets).map(|(&i, &y)| (mt.phi_t[i], y)).collect();
        if !is_strong_matching(&dg, &x, &pairs) || mt.j.len() != mt.ell {
            return Err(Error::InvariantViolated(format!(
                "J = {:?} with targets {:?} is not a strong matching of size {}",
                mt.j, mt.targets, mt.ell
            )));
        }
        let score = |set: &[usize]| set.iter().filter(|i| mt.p.contains(i)).count();
        let ours = score(&mt.j);
        let mut better = None;
        combinations(mt.t + 1, mt.ell, &mut |cand| {
            if score(cand) > ours && matchable(qg, mt, cand) {
                better = Some(cand.to_vec());
                return false;
            }
            true
        });
        if let Some(b) = better {
            return Err(Error::NotMaximal(format!(
                "J = {:?} meets P in {ours}, but {b:?} meets it in {}",
                mt.j,
                score(&b)
            )));
        }
    }
    Ok(())
}

#[derive(Clone, Debug, Default, PartialEq, Eq, Serialize)]
pub struct LineTally {
    pub evaluated: u64,
    pub failed: u64,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct SweepViolation {
    pub s: Vec<usize>,
    pub t: Vec<usize>,
    pub message: String,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct SweepReport {
    pub group: String,
    pub instances: u64,
    pub ledger_violation_count: u64,
    pub error_count: u64,
    pub j_selection_failures: u64,
    /// First few failing instances of any kind.
    pub failures: Vec<SweepViolation>,
    pub branch_coverage: BTreeMap<String, u64>,
    pub ledger_coverage: BTreeMap<String, LineTally>,
}

impl SweepReport {
    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("report serializes")
    }

    pub fn is_clean(&self) -> bool {
        self.ledger_violation_count == 0 && self.error_count == 0 && self.j_selection_failures == 0
    }
}

const MAX_SWEEP_FAILURES: usize = 32;

#[derive(Default)]
struct SweepTally {
    instances: u64,
    violations: u64,
    errors: u64,
    j_failures: u64,
    failures: Vec<SweepViolation>,
    branches: BTreeMap<String, u64>,
    lines: BTreeMap<String, LineTally>,
}

impl SweepTally {
    fn fail(&mut self, s: &GroupSubset, t: &GroupSubset, message: String) {
        if self.failures.len() < MAX_SWEEP_FAILURES {
            self.failures.push(SweepViolation {
                s: s.to_vec(),
                t: t.to_vec(),
                message,
            });
        }
    }

    fn absorb(&mut self, trace: &ProofTrace) {
        for node in trace.nodes() {
            *self.branches.entry(node.branch.name().to_string()).or_default() += 1;
            if let Some(mt) = &node.main {
                *self.branches.entry(format!("main_{}", mt.u_branch())).or_default() += 1;
                *self.branches.entry(mt.defect_branch().to_string()).or_default() += 1;
                if !mt.d.is_empty() {
                    *self.branches.entry("unfilled_matched_coset".to_string()).or_default() += 1;
                }
            }
            for l in &node.ledger {
                let e = self.lines.entry(l.name.to_string()).or_default();
                e.evaluated += 1;
                e.failed += !l.holds as u64;
            }
        }
    }

    fn into_report(self, g: &Group) -> SweepReport {
        SweepReport {
            group: g.label().to_string(),
            instances: self.instances,
            ledger_violation_count: self.violations,
            error_count: self.errors,
            j_selection_failures: self.j_failures,
            failures: self.failures,
            branch_coverage: self.branches,
            ledger_coverage: self.lines,
        }
    }

    fn merge(mut self, o: SweepTally) -> SweepTally {
        self.instances += o.instances;
        self.violations += o.violations;
        self.errors += o.errors;
        self.j_failures += o.j_failures;
        for f in o.failures {
            if self.failures.len() < MAX_SWEEP_FAILURES {
                self.failures.push(f);
            }
        }
        for (k, v) in o.branches {
            *self.branches.entry(k).or_default() += v;
        }
        for (k, v) in o.lines {
            let e = self.lines.entry(k).or_default();
            e.evaluated += v.evaluated;
            e.failed += v.failed;
        }
        self
    }
}

/// Traces every pair with `0 ∈ S`, `0 ∈ T`, `|S| ≤ |T|` and
/// `|T + S| ≤ |T| + |S| − 2`, including non-generating `S`.
pub fn trace_sweep(g: &Group) -> Result<SweepReport> {
    let n = g.order();
    if n > SWEEP_MAX_ORDER {
        return Err(Error::TooLargeForExhaustive {
            order: n,
            max: SWEEP_MAX_ORDER,
        });
    }
    let full = (1u64 << n) - 1;
    let tracer = Tracer::new();
    let zero_masks: Vec<u64> = (0..1u64 << (n - 1)).map(|m| m << 1 | 1).collect();
    let tallies: Vec<SweepTally> = zero_masks
        .par_iter()
        .map(|&sm| {
            let mut tally = SweepTally::default();
            let sc = sm.count_ones();
            for &tm in &zero_masks {
                if tm.count_ones() < sc {
                    continue;
                }
                let mut acc = 0u64;
                let mut rest = sm;
                while rest != 0 {
                    acc |= g.translate_mask(tm, rest.trailing_zeros() as usize);
                    rest &= rest - 1;
                }
                if acc.count_ones() + 2 > sc + tm.count_ones() {
                    continue;
                }
                debug_assert!(acc & !full == 0);
                tally.instances += 1;
                let s = GroupSubset::from_mask_unchecked(g, sm);
                let t = GroupSubset::from_mask_unchecked(g, tm);
                match tracer.trace_unchecked(g, &s, &t) {
                    Ok(trace) => {
                        tally.absorb(&trace);
                        if let Some((depth, l)) = trace.violations().first() {
                            tally.violations += 1;
                            tally.fail(&s, &t, format!("{} at depth {depth}: {}", l.name, l.detail));
                        }
                        if let Err(e) = check_j_selection(&trace) {
                            tally.j_failures += 1;
                            tally.fail(&s, &t, format!("J selection: {e}"));
                        }
                    }
                    Err(e) => {
                        tally.errors += 1;
                        tally.fail(&s, &t, e.to_string());
                    }
                }
            }
            tally
        })
        .collect();
    let total = tallies.into_iter().fold(SweepTally::default(), SweepTally::merge);
    Ok(total.into_report(g))
}

fn sweep_subgroups(g: &Group) -> Result<Vec<Subgroup>> {
    let n = g.order();
    let mut seen = std::collections::BTreeSet::new();
    let mut out = Vec::new();
    for a in g.elements() {
        for b in a..n {
            let k = Subgroup::generated(g, &GroupSubset::from_indices(g, [a, b])?)?;
            if k.order() > 1 && k.order() < n && seen.insert(k.carrier().clone()) {
                out.push(k);
            }
        }
    }
    out.sort_by(|x, y| x.carrier().cmp(y.carrier()));
    Ok(out)
}

fn dense_part(g: &Group, h: &[usize], rep: usize, with_zero: bool, rng: &mut ChaCha8Rng) -> Vec<usize> {
    let lo = h.len().div_ceil(2).max(1);
    let size = if rng.gen_bool(0.5) { h.len() } else { rng.gen_range(lo..=h.len()) };
    let mut picked: Vec<usize> = sample(rng, h.len(), size).into_iter().map(|i| g.add(rep, h[i])).collect();
    if with_zero && !picked.contains(&0) {
        picked[0] = 0;
    }
    picked
}

fn quotient_pattern(qg: &Group, start: usize, len: usize, rng: &mut ChaCha8Rng) -> Vec<usize> {
    let q = qg.order();
    if rng.gen_bool(0.7) {
        let d = rng.gen_range(1..q);
        let mut out = Vec::new();
        let mut x = start;
        while out.len() < len && !out.contains(&x) {
            out.push(x);
            x = qg.add(x, d);
        }
        out
    } else {
        let mut out: Vec<usize> = sample(rng, q, len).into_iter().map(|y| qg.add(start, y)).collect();
        if !out.contains(&start) {
            out[0] = start;
        }
        out
    }
}

/// Traces `samples` random coset-structured pairs: a random subgroup `H`,
/// quotient images drawn as progressions or random sets, and dense coset
/// parts. Pairs failing `0 ∈ S`, `|S| ≤ |T|` or the small-doubling
/// hypothesis are drawn but not traced. Sample `i` depends only on `seed`
/// and `i`.
pub fn structured_sample(g: &Group, samples: u64, seed: u64) -> Result<SweepReport> {
    const CHUNK: u64 = 256;
    let subgroups = sweep_subgroups(g)?;
    if subgroups.is_empty() {
        return Err(Error::PreconditionUnmet(format!("{} has no proper nontrivial subgroup", g.label())));
    }
    let quotients = subgroups.iter().map(|h| quotient(g, h)).collect::<Result<Vec<_>>>()?;
    let tracer = Tracer::new();
    let chunks = samples.div_ceil(CHUNK);
    let tallies: Vec<SweepTally> = (0..chunks)
        .into_par_iter()
        .map(|c| {
            let mut rng = ChaCha8Rng::seed_from_u64(seed);
            rng.set_stream(c);
            let mut tally = SweepTally::default();
            for _ in 0..CHUNK.min(samples - c * CHUNK) {
                let which = rng.gen_range(0..subgroups.len());
                let (h, qm) = (&subgroups[which], &quotients[which]);
                let hv = h.carrier().to_vec();
                let qg = qm.group();
                let q = qm.order();
                let ks = rng.gen_range(2..=q.min(4));
                let kt = rng.gen_range(ks..=q);
                let start = rng.gen_range(0..q);
                let ps = quotient_pattern(qg, 0, ks, &mut rng);
                let pt = quotient_pattern(qg, start, kt, &mut rng);
                let mut sv = Vec::new();
                for &cs in &ps {
                    sv.extend(dense_part(g, &hv, qm.coset_reps()[cs], cs == 0, &mut rng));
                }
                let mut tv = Vec::new();
                for &ct in &pt {
                    tv.extend(dense_part(g, &hv, qm.coset_reps()[ct], false, &mut rng));
                }
                let s = GroupSubset::from_indices(g, sv).expect("in range");
                let t = GroupSubset::from_indices(g, tv).expect("in range");
                if check_trace_preconditions(g, &s, &t).is_err() {
                    continue;
                }
                tally.instances += 1;
                match tracer.trace_unchecked(g, &s, &t) {
                    Ok(trace) => {
                        tally.absorb(&trace);
                        if let Some((depth, l)) = trace.violations().first() {
                            tally.violations += 1;
                            tally.fail(&s, &t, format!("{} at depth {depth}: {}", l.name, l.detail));
                        }
                        if let Err(e) = check_j_selection(&trace) {
                            tally.j_failures += 1;
                            tally.fail(&s, &t, format!("J selection: {e}"));
                        }
                    }
                    Err(e) => {
                        tally.errors += 1;
                        tally.fail(&s, &t, e.to_string());
                    }
                }
            }
            tally
        })
        .collect();
    let total = tallies.into_iter().fold(SweepTally::default(), SweepTally::merge);
    Ok(total.into_report(g))
}

/// Merges per-group sweeps into one coverage summary.
pub fn merge_coverage(reports: &[SweepReport]) -> (BTreeMap<String, u64>, BTreeMap<String, LineTally>) {
    let mut branches = BTreeMap::new();
    let mut lines: BTreeMap<String, LineTally> = BTreeMap::new();
    for r in reports {
        for (k, v) in &r.branch_coverage {
            *branches.entry(k.clone()).or_default() += v;
        }
        for (k, v) in &r.ledger_coverage {
            let e = lines.entry(k.clone()).or_default();
            e.evaluated += v.evaluated;
            e.failed += v.failed;
        }
    }
    (branches, lines)
}

/// One line per failed ledger entry, for human inspection.
pub fn render_violations(trace: &ProofTrace) -> String {
    let mut out = String::new();
    for (d, l) in trace.violations() {
        let _ = writeln!(out, "depth {d}: {} ({})", l.name, l.detail);
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::group::GroupSpec;

    fn set(g: &Group, xs: &[usize]) -> GroupSubset {
        GroupSubset::from_indices(g, xs.iter().copied()).unwrap()
    }

    #[test]
    fn entry_preconditions() {
        let z6 = Group::cyclic(6).unwrap();
        assert!(matches!(
            proof_trace(&z6, &set(&z6, &[1, 3]), &set(&z6, &[0, 3])),
            Err(Error::PreconditionUnmet(_))
        ));
        assert!(matches!(
            proof_trace(&z6, &set(&z6, &[0, 1, 3]), &set(&z6, &[0, 3])),
            Err(Error::PreconditionUnmet(_))
        ));
        assert!(matches!(
            proof_trace(&z6, &set(&z6, &[0, 1]), &set(&z6, &[0, 1])),
            Err(Error::PreconditionUnmet(_))
        ));
    }

    #[test]
    fn non_generating_set_restricts() {
        let z6 = Group::cyclic(6).unwrap();
        let tr = proof_trace(&z6, &set(&z6, &[0, 3]), &set(&z6, &[0, 3])).unwrap();
        assert_eq!(tr.branch, Branch::SubgroupRestriction);
        assert_eq!(tr.period, vec![0, 3]);
        let tr = proof_trace(&z6, &set(&z6, &[0, 3]), &set(&z6, &[0, 1, 3, 4])).unwrap();
        assert_eq!(tr.branch, Branch::CosetPeriodic);
        assert_eq!(tr.period, vec![0, 3]);
    }

    #[test]
    fn main_branch_example() {
        let z12 = Group::cyclic(12).unwrap();
        let s = set(&z12, &[0, 1, 6, 7]);
        let t = set(&z12, &[0, 1, 6, 7]);
        let tr = proof_trace(&z12, &s, &t).unwrap();
        assert_eq!(tr.branch, Branch::Main);
        let mt = tr.main.as_ref().unwrap();
        assert_eq!(mt.atom, vec![0, 6]);
        assert_eq!(mt.u, 1);
        check_j_selection(&tr).unwrap();
        assert!(tr.period.contains(&6));
    }

    #[test]
    fn determinism() {
        let g = Group::new(&GroupSpec::new(vec![2, 4]).unwrap()).unwrap();
        let a = trace_sweep(&g).unwrap();
        let b = crate::kneser::with_workers(1, || trace_sweep(&g)).unwrap().unwrap();
        assert_eq!(a.to_json(), b.to_json());
        assert!(a.is_clean(), "{}", a.to_json());
    }

    #[test]
    fn small_sweeps_are_clean() {
        for n in 2..=9 {
            let g = Group::cyclic(n).unwrap();
            let r = trace_sweep(&g).unwrap();
            assert!(r.is_clean(), "{}", r.to_json());
        }
    }
}
