//! Reflexive digraphs, vertex connectivity between two points, fans of
//! openly disjoint paths and the strong matching property.
//!
//! Two fan constructors are provided. The contraction engine criticalizes the
//! graph, splits it along a k-part and recurses on the two contractions; the
//! flow engine decomposes a maximum flow on the split graph.

use std::collections::VecDeque;
use std::fmt;

use serde::Serialize;

use crate::bitset::BitSet;
use crate::error::{Error, Result};
use crate::flow::vertex_disjoint_paths;
use crate::group::Group;
use crate::subset::GroupSubset;

/// Largest vertex count accepted by the subset-scanning oracles.
pub const EXHAUSTIVE_MAX_VERTICES: usize = 16;

/// A finite reflexive digraph. Row `x` is `Γ(x)` and always contains `x`.
#[derive(Clone)]
pub struct Digraph {
    rows: Vec<BitSet>,
    loops_added: bool,
}

impl PartialEq for Digraph {
    fn eq(&self, other: &Self) -> bool {
        self.rows == other.rows
    }
}

impl Eq for Digraph {}

impl fmt::Debug for Digraph {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_map().entries(self.rows.iter().enumerate()).finish()
    }
}

impl Digraph {
    /// `n` vertices carrying only their loops.
    pub fn new(n: usize) -> Self {
        let rows = (0..n)
            .map(|x| {
                let mut r = BitSet::new(n);
                r.insert(x);
                r
            })
            .collect();
        Digraph {
            rows,
            loops_added: false,
        }
    }

    /// Builds a digraph from out-neighbour lists. Missing loops are added and
    /// recorded in [`Digraph::loops_added`].
    pub fn from_adjacency(adj: &[Vec<usize>]) -> Result<Self> {
        let n = adj.len();
        let mut g = Digraph::new(n);
        let mut loops_given = vec![false; n];
        for (u, outs) in adj.iter().enumerate() {
            for &v in outs {
                if v >= n {
                    return Err(Error::VertexOutOfRange(v, n));
                }
                if u == v {
                    loops_given[u] = true;
                }
                g.rows[u].insert(v);
            }
        }
        g.loops_added = loops_given.iter().any(|&l| !l);
        Ok(g)
    }

    pub fn from_arcs(n: usize, arcs: &[(usize, usize)]) -> Result<Self> {
        let mut g = Digraph::new(n);
        for &(u, v) in arcs {
            g.add_arc(u, v)?;
        }
        Ok(g)
    }

    /// `Cay(G, S)`; loops are added when `0 ∉ S`.
    pub fn cayley(group: &Group, s: &GroupSubset) -> Result<Self> {
        s.check(group)?;
        let n = group.order();
        let mut g = Digraph::new(n);
        for x in 0..n {
            for t in s.iter() {
                g.rows[x].insert(group.add(x, t));
            }
        }
        g.loops_added = !s.contains(0);
        Ok(g)
    }

    /// Parses the text format: the vertex count on the first line, then one
    /// line of out-neighbours per vertex separated by spaces or commas.
    /// Blank lines and lines starting with `#` are skipped.
    pub fn parse(text: &str) -> Result<Self> {
        let mut lines = text
            .lines()
            .enumerate()
            .map(|(i, l)| (i + 1, l.trim()))
            .filter(|(_, l)| !l.is_empty() && !l.starts_with('#'));
        let (first, header) = lines.next().ok_or(Error::Parse {
            position: 1,
            message: "missing vertex count".into(),
        })?;
        let n: usize = header.parse().map_err(|_| Error::Parse {
            position: first,
            message: format!("bad vertex count {header:?}"),
        })?;
        let mut adj = Vec::with_capacity(n);
        for (line, body) in lines {
            if adj.len() == n {
                return Err(Error::Parse {
                    position: line,
                    message: format!("more than {n} adjacency lines"),
                });
            }
            let outs = body
                .split(|c: char| c.is_whitespace() || c == ',')
                .filter(|t| !t.is_empty())
                .map(|t| {
                    let v: usize = t.parse().map_err(|_| Error::Parse {
                        position: line,
                        message: format!("bad vertex {t:?}"),
                    })?;
                    if v >= n {
                        return Err(Error::Parse {
                            position: line,
                            message: format!("vertex {v} out of range for {n} vertices"),
                        });
                    }
                    Ok(v)
                })
                .collect::<Result<Vec<_>>>()?;
            adj.push(outs);
        }
        // Vertices with no listed neighbours may be left off the end.
        adj.resize(n, Vec::new());
        Digraph::from_adjacency(&adj)
    }

    pub fn to_text(&self) -> String {
        let mut out = format!("{}\n", self.order());
        for row in &self.rows {
            let items: Vec<String> = row.iter().map(|v| v.to_string()).collect();
            out.push_str(&items.join(" "));
            out.push('\n');
        }
        out
    }

    /// Whether construction had to add loops that the input did not list.
    pub fn loops_added(&self) -> bool {
        self.loops_added
    }

    pub fn order(&self) -> usize {
        self.rows.len()
    }

    fn check_vertex(&self, v: usize) -> Result<()> {
        if v < self.order() {
            Ok(())
        } else {
            Err(Error::VertexOutOfRange(v, self.order()))
        }
    }

    pub fn has_arc(&self, u: usize, v: usize) -> bool {
        u < self.order() && self.rows[u].contains(v)
    }

    pub fn add_arc(&mut self, u: usize, v: usize) -> Result<()> {
        self.check_vertex(u)?;
        self.check_vertex(v)?;
        self.rows[u].insert(v);
        Ok(())
    }

    /// Removes `(u, v)`; loops are kept.
    pub fn remove_arc(&mut self, u: usize, v: usize) -> bool {
        u != v && u < self.order() && self.rows[u].remove(v)
    }

    pub fn out_neighbors(&self, u: usize) -> &BitSet {
        &self.rows[u]
    }

    pub fn in_neighbors(&self, v: usize) -> BitSet {
        let mut out = BitSet::new(self.order());
        for (u, row) in self.rows.iter().enumerate() {
            if row.contains(v) {
                out.insert(u);
            }
        }
        out
    }

    /// Number of arcs `(u, v)` with `u ≠ v`.
    pub fn arc_count(&self) -> usize {
        self.rows.iter().map(|r| r.count() - 1).sum()
    }

    pub fn arcs(&self) -> impl Iterator<Item = (usize, usize)> + '_ {
        self.rows
            .iter()
            .enumerate()
            .flat_map(|(u, r)| r.iter().filter(move |&v| v != u).map(move |v| (u, v)))
    }

    pub fn vertex_set(&self, members: &[usize]) -> Result<BitSet> {
        let mut out = BitSet::new(self.order());
        for &v in members {
            self.check_vertex(v)?;
            out.insert(v);
        }
        Ok(out)
    }

    /// `Γ(A)`.
    pub fn gamma(&self, a: &BitSet) -> BitSet {
        let mut out = BitSet::new(self.order());
        for u in a.iter() {
            out.union_with(&self.rows[u]);
        }
        out
    }

    /// `Γ⁻(A)`.
    pub fn gamma_in(&self, a: &BitSet) -> BitSet {
        let mut out = BitSet::new(self.order());
        for (u, row) in self.rows.iter().enumerate() {
            if row.intersects(a) {
                out.insert(u);
            }
        }
        out
    }

    /// `∂(A) = Γ(A) \ A`.
    pub fn boundary(&self, a: &BitSet) -> BitSet {
        self.gamma(a).and_not(a)
    }

    /// `∂⁻(A) = Γ⁻(A) \ A`.
    pub fn in_boundary(&self, a: &BitSet) -> BitSet {
        self.gamma_in(a).and_not(a)
    }

    /// `A^∧ = V \ Γ(A)`.
    pub fn hat(&self, a: &BitSet) -> BitSet {
        self.gamma(a).complement()
    }

    pub fn reversed(&self) -> Digraph {
        let n = self.order();
        let mut rows = vec![BitSet::new(n); n];
        for (u, row) in self.rows.iter().enumerate() {
            for v in row.iter() {
                rows[v].insert(u);
            }
        }
        Digraph {
            rows,
            loops_added: self.loops_added,
        }
    }

    /// Subgraph induced on `keep`; also returns the new-to-old vertex map.
    pub fn induced(&self, keep: &BitSet) -> (Digraph, Vec<usize>) {
        let map: Vec<usize> = keep.iter().collect();
        let mut local = vec![usize::MAX; self.order()];
        for (i, &v) in map.iter().enumerate() {
            local[v] = i;
        }
        let rows = map
            .iter()
            .map(|&u| {
                BitSet::from_indices(
                    map.len(),
                    self.rows[u].iter().filter(|&v| keep.contains(v)).map(|v| local[v]),
                )
            })
            .collect();
        (
            Digraph {
                rows,
                loops_added: false,
            },
            map,
        )
    }

    /// Contracts `w` to one vertex placed last. Returns the graph and the
    /// new-to-old map for the surviving vertices.
    pub fn contract(&self, w: &BitSet) -> (Digraph, Vec<usize>) {
        let map: Vec<usize> = w.complement().iter().collect();
        let m = map.len() + 1;
        let hub = m - 1;
        let mut local = vec![hub; self.order()];
        for (i, &v) in map.iter().enumerate() {
            local[v] = i;
        }
        let mut rows = vec![BitSet::new(m); m];
        for (u, row) in self.rows.iter().enumerate() {
            for v in row.iter() {
                rows[local[u]].insert(local[v]);
            }
        }
        rows[hub].insert(hub);
        (
            Digraph {
                rows,
                loops_added: false,
            },
            map,
        )
    }

    fn adjacency_lists(&self) -> Vec<Vec<usize>> {
        self.rows
            .iter()
            .enumerate()
            .map(|(u, r)| r.iter().filter(|&v| v != u).collect())
            .collect()
    }

    /// `κ₁` of the digraph: the least `|∂(X)|` over nonempty `X` with
    /// `Γ(X) ≠ V`, or `|V| − 1` when there is none.
    pub fn kappa1(&self) -> usize {
        let n = self.order();
        let adj = self.adjacency_lists();
        let mut best = n.saturating_sub(1);
        for x in 0..n {
            for y in 0..n {
                if !self.rows[x].contains(y) {
                    best = best.min(vertex_disjoint_paths(&adj, x, y, best).value);
                }
            }
        }
        best
    }
}

fn check_pair(g: &Digraph, x: usize, y: usize) -> Result<()> {
    g.check_vertex(x)?;
    g.check_vertex(y)?;
    if x == y {
        return Err(Error::SameVertex(x));
    }
    Ok(())
}

/// Least `|∂(A)|` over `A ∋ x` with `y ∉ Γ(A)`, with a smallest such `A`.
/// `None` when `(x, y)` is an arc, since then no such `A` exists.
pub fn min_cut(g: &Digraph, x: usize, y: usize) -> Result<Option<(usize, BitSet)>> {
    check_pair(g, x, y)?;
    if g.has_arc(x, y) {
        return Ok(None);
    }
    let out = vertex_disjoint_paths(&g.adjacency_lists(), x, y, usize::MAX);
    Ok(Some((out.value, out.source_side.expect("unbounded flow is maximum"))))
}

/// Same as [`min_cut`] by scanning every `A ∋ x` not containing `y`.
/// Among minimizers it returns the first in lexicographic order.
pub fn min_cut_exhaustive(g: &Digraph, x: usize, y: usize) -> Result<Option<(usize, BitSet)>> {
    check_pair(g, x, y)?;
    let n = g.order();
    if n > EXHAUSTIVE_MAX_VERTICES {
        return Err(Error::TooLargeForExhaustive {
            order: n,
            max: EXHAUSTIVE_MAX_VERTICES,
        });
    }
    if g.has_arc(x, y) {
        return Ok(None);
    }
    let rows: Vec<u64> = g.rows.iter().map(|r| r.as_mask().unwrap()).collect();
    let others: Vec<usize> = (0..n).filter(|&v| v != x && v != y).collect();
    let mut best: Option<(usize, u64)> = None;
    for m in 0u64..1 << others.len() {
        let mut a = 1u64 << x;
        let mut rest = m;
        while rest != 0 {
            a |= 1 << others[rest.trailing_zeros() as usize];
            rest &= rest - 1;
        }
        let mut reach = 0u64;
        let mut bits = a;
        while bits != 0 {
            reach |= rows[bits.trailing_zeros() as usize];
            bits &= bits - 1;
        }
        if reach >> y & 1 == 1 {
            continue;
        }
        let cut = (reach & !a).count_ones() as usize;
        let better = match best {
            None => true,
            Some((b, bm)) => {
                cut < b || (cut == b && BitSet::from_mask(n, a) < BitSet::from_mask(n, bm))
            }
        };
        if better {
            best = Some((cut, a));
        }
    }
    let (cut, a) = best.expect("A = {x} qualifies");
    Ok(Some((cut, BitSet::from_mask(n, a))))
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Separability {
    pub holds: bool,
    /// A set `A ∋ x` with `y ∉ Γ(A)` and `|∂(A)| < k`, when one exists.
    pub witness: Option<BitSet>,
}

/// Whether `y` is `(k−1)`-nonseparable from `x`: every `A ∋ x` with
/// `y ∉ Γ(A)` has `|∂(A)| ≥ k`.
pub fn is_k_nonseparable(g: &Digraph, x: usize, y: usize, k: usize) -> Result<Separability> {
    Ok(verdict(min_cut(g, x, y)?, k))
}

pub fn is_k_nonseparable_exhaustive(g: &Digraph, x: usize, y: usize, k: usize) -> Result<Separability> {
    Ok(verdict(min_cut_exhaustive(g, x, y)?, k))
}

fn verdict(cut: Option<(usize, BitSet)>, k: usize) -> Separability {
    match cut {
        Some((c, a)) if c < k => Separability {
            holds: false,
            witness: Some(a),
        },
        _ => Separability {
            holds: true,
            witness: None,
        },
    }
}

/// A family of paths from `source`; path `i` ends at `targets[i]`.
#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct Fan {
    pub source: usize,
    pub targets: Vec<usize>,
    pub paths: Vec<Vec<usize>>,
}

impl Fan {
    pub fn len(&self) -> usize {
        self.paths.len()
    }

    pub fn is_empty(&self) -> bool {
        self.paths.is_empty()
    }

    /// Checks that each path is a path of `g` from the source to its target
    /// and that two paths share only the source and a common target.
    pub fn validate(&self, g: &Digraph) -> Result<()> {
        let bad = |msg: String| Err(Error::InvariantViolated(msg));
        if self.targets.len() != self.paths.len() {
            return bad("target count differs from path count".into());
        }
        let n = g.order();
        let mut sets = Vec::with_capacity(self.paths.len());
        for (p, &t) in self.paths.iter().zip(&self.targets) {
            if p.first() != Some(&self.source) || p.last() != Some(&t) {
                return bad(format!("path {p:?} does not run from {} to {t}", self.source));
            }
            let mut seen = BitSet::new(n);
            for &v in p {
                if v >= n || !seen.insert(v) {
                    return bad(format!("path {p:?} repeats or leaves the vertex set"));
                }
            }
            if let Some(w) = p.windows(2).find(|w| !g.has_arc(w[0], w[1])) {
                return bad(format!("path {p:?} uses missing arc ({},{})", w[0], w[1]));
            }
            sets.push(seen);
        }
        for i in 0..sets.len() {
            for j in i + 1..sets.len() {
                let mut shared = sets[i].and(&sets[j]);
                shared.remove(self.source);
                if self.targets[i] == self.targets[j] {
                    shared.remove(self.targets[i]);
                }
                if !shared.is_empty() {
                    return bad(format!(
                        "paths {:?} and {:?} share {:?}",
                        self.paths[i], self.paths[j], shared
                    ));
                }
            }
        }
        Ok(())
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum MengerEngine {
    Contraction,
    Flow,
}

/// `k` openly disjoint paths from `x` to `y`. Requires `(x, y) ∉ E` and `y`
/// `(k−1)`-nonseparable from `x`.
pub fn menger_fan(g: &Digraph, x: usize, y: usize, k: usize, engine: MengerEngine) -> Result<Fan> {
    check_pair(g, x, y)?;
    if g.has_arc(x, y) {
        return Err(Error::EdgePresent(x, y));
    }
    let adj = g.adjacency_lists();
    let probe = vertex_disjoint_paths(&adj, x, y, k);
    if probe.value < k {
        return Err(Error::NotNonseparable { k, cut: probe.value });
    }
    let paths = match engine {
        MengerEngine::Flow => probe.paths,
        MengerEngine::Contraction => contraction_fan(g, x, y, k, g.order())?,
    };
    let fan = Fan {
        source: x,
        targets: vec![y; paths.len()],
        paths,
    };
    fan.validate(g)?;
    Ok(fan)
}

fn recursion_error(msg: String) -> Error {
    Error::Recursion(msg)
}

/// Deletes arcs in (source, target) order whenever the cut stays at least `k`.
/// Arcs unused by the current fan are deleted without a flow computation.
fn criticalize(g: &Digraph, x: usize, y: usize, k: usize) -> Digraph {
    let mut h = g.clone();
    let mut paths = vertex_disjoint_paths(&h.adjacency_lists(), x, y, k).paths;
    let used = |paths: &[Vec<usize>], u: usize, v: usize| {
        paths.iter().any(|p| p.windows(2).any(|w| w[0] == u && w[1] == v))
    };
    let arcs: Vec<_> = g.arcs().collect();
    for (u, v) in arcs {
        h.remove_arc(u, v);
        if !used(&paths, u, v) {
            continue;
        }
        let out = vertex_disjoint_paths(&h.adjacency_lists(), x, y, k);
        if out.value >= k {
            paths = out.paths;
        } else {
            h.add_arc(u, v).expect("vertex in range");
        }
    }
    h
}

fn bfs_path(g: &Digraph, x: usize, y: usize) -> Option<Vec<usize>> {
    let n = g.order();
    let mut prev = vec![usize::MAX; n];
    prev[x] = x;
    let mut queue = VecDeque::from([x]);
    while let Some(u) = queue.pop_front() {
        if u == y {
            let mut path = vec![y];
            let mut v = y;
            while v != x {
                v = prev[v];
                path.push(v);
            }
            path.reverse();
            return Some(path);
        }
        for v in g.rows[u].iter() {
            if prev[v] == usize::MAX {
                prev[v] = u;
                queue.push_back(v);
            }
        }
    }
    None
}

fn contraction_fan(g: &Digraph, x: usize, y: usize, k: usize, budget: usize) -> Result<Vec<Vec<usize>>> {
    if k == 0 {
        return Ok(Vec::new());
    }
    if budget == 0 {
        return Err(recursion_error("depth exceeds the vertex count".into()));
    }
    let n = g.order();

    let common = g.rows[x].and(&g.in_neighbors(y));
    if let Some(z) = common.iter().find(|&z| z != x && z != y) {
        let mut keep = BitSet::full(n);
        keep.remove(z);
        let (sub, map) = g.induced(&keep);
        let local = |v: usize| map.iter().position(|&m| m == v).expect("kept");
        let inner = contraction_fan(&sub, local(x), local(y), k - 1, budget - 1)?;
        let mut paths: Vec<Vec<usize>> = inner
            .into_iter()
            .map(|p| p.into_iter().map(|v| map[v]).collect())
            .collect();
        paths.insert(0, vec![x, z, y]);
        return Ok(paths);
    }

    let crit = criticalize(g, x, y, k);
    let path = bfs_path(&crit, x, y).ok_or_else(|| recursion_error("no x→y path".into()))?;
    if path.len() < 4 {
        return Err(recursion_error(format!("shortest path {path:?} too short")));
    }
    let Some(f) = splitting_part(&crit, x, y, k, (path[1], path[2]))? else {
        return layered_fan(&crit, x, y, k);
    };
    let f_hat = crit.hat(&f);
    let boundary = crit.boundary(&f);

    // (x, ∂F)-fan: contract F^ to a sink.
    let (left, lmap) = crit.contract(&f_hat);
    let lx = lmap.iter().position(|&v| v == x).expect("x ∈ F");
    let head = contraction_fan(&left, lx, left.order() - 1, k, budget - 1)?;
    // (∂F, y)-fan: contract F to a source.
    let (right, rmap) = crit.contract(&f);
    let ry = rmap.iter().position(|&v| v == y).expect("y ∉ F");
    let tail = contraction_fan(&right, right.order() - 1, ry, k, budget - 1)?;

    let mut by_entry = vec![None; n];
    for p in tail {
        let entry = rmap[p[1]];
        by_entry[entry] = Some(p[1..].iter().map(|&v| rmap[v]).collect::<Vec<_>>());
    }
    let mut paths = Vec::with_capacity(k);
    for p in head {
        let mut full: Vec<usize> = p[..p.len() - 1].iter().map(|&v| lmap[v]).collect();
        let exit = *full.last().expect("nonempty");
        if !boundary.contains(exit) {
            return Err(recursion_error(format!("head path ends at {exit} outside ∂F")));
        }
        let rest = by_entry[exit]
            .take()
            .ok_or_else(|| recursion_error(format!("no tail path enters at {exit}")))?;
        full.extend_from_slice(&rest[1..]);
        paths.push(full);
    }
    Ok(paths)
}

/// A set `A ∋ x` with `y ∉ Γ(A)` and `|∂(A)| = k`.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct KPart {
    pub vertices: BitSet,
    pub source: usize,
    pub sink: usize,
    pub k: usize,
}

#[derive(Serialize)]
struct KPartJson {
    vertices: Vec<usize>,
    source: usize,
    sink: usize,
    k: usize,
}

impl Serialize for KPart {
    fn serialize<S: serde::Serializer>(&self, serializer: S) -> std::result::Result<S::Ok, S::Error> {
        KPartJson {
            vertices: self.vertices.iter().collect(),
            source: self.source,
            sink: self.sink,
            k: self.k,
        }
        .serialize(serializer)
    }
}

impl KPart {
    pub fn is_valid(&self, g: &Digraph) -> bool {
        self.vertices.len() == g.order()
            && self.vertices.contains(self.source)
            && !g.gamma(&self.vertices).contains(self.sink)
            && g.boundary(&self.vertices).count() == self.k
    }
}

/// A k-part `F` with `min(|F|, |F^∧|) ≥ 2`, trying the arc `first` and then
/// every arc not ending at `y` in order. The minimal cut side through an arc
/// has the largest `F^∧` among parts through that arc, so `None` means no
/// such part exists.
fn splitting_part(g: &Digraph, x: usize, y: usize, k: usize, first: (usize, usize)) -> Result<Option<BitSet>> {
    let candidates = std::iter::once(first).chain(g.arcs().filter(|&(u, v)| v != y && (u, v) != first));
    for (u, v) in candidates {
        let f = find_part_through(g, x, y, k, u, v)?;
        if f.count() >= 2 && g.hat(&f).count() >= 2 {
            return Ok(Some(f));
        }
    }
    Ok(None)
}

/// Critical graphs without a splitting part are `k` disjoint paths
/// `x → a → b → y`; anything else is reported as a recursion failure.
fn layered_fan(g: &Digraph, x: usize, y: usize, k: usize) -> Result<Vec<Vec<usize>>> {
    let mut firsts = g.rows[x].clone();
    firsts.remove(x);
    if firsts.count() != k {
        return Err(recursion_error(format!(
            "no splitting part and |Γ(x) \\ {{x}}| = {} ≠ {k}",
            firsts.count()
        )));
    }
    let mut seconds = BitSet::new(g.order());
    let mut paths = Vec::with_capacity(k);
    for a in firsts.iter() {
        let outs: Vec<usize> = g.rows[a].iter().filter(|&v| v != a).collect();
        match outs.as_slice() {
            &[b] if b != y && g.has_arc(b, y) && seconds.insert(b) => paths.push(vec![x, a, b, y]),
            _ => {
                return Err(recursion_error(format!(
                    "no splitting part and vertex {a} has out-neighbours {outs:?}"
                )))
            }
        }
    }
    Ok(paths)
}

fn find_part_through(g: &Digraph, x: usize, y: usize, k: usize, u: usize, v: usize) -> Result<BitSet> {
    let mut psi = g.clone();
    psi.remove_arc(u, v);
    let out = vertex_disjoint_paths(&psi.adjacency_lists(), x, y, k);
    if out.value >= k {
        return Err(Error::NotCritical(u, v));
    }
    let f = out.source_side.expect("flow below the limit is maximum");
    let boundary = g.boundary(&f);
    if !f.contains(u) || !boundary.contains(v) || boundary.count() != k || g.gamma(&f).contains(y) {
        return Err(Error::InvariantViolated(format!(
            "set {f:?} from the reduced graph is not a {k}-part through ({u},{v})"
        )));
    }
    Ok(f)
}

/// A k-part `F` with `u ∈ F` and `v ∈ ∂(F)`, read off a minimum cut of the
/// graph with `(u, v)` deleted. Requires `y` to be `(k−1)`-nonseparable from
/// `x` and the deletion to destroy that.
pub fn find_k_part_through_arc(g: &Digraph, x: usize, y: usize, k: usize, arc: (usize, usize)) -> Result<KPart> {
    check_pair(g, x, y)?;
    let (u, v) = arc;
    g.check_vertex(u)?;
    g.check_vertex(v)?;
    if u == v || !g.has_arc(u, v) {
        return Err(Error::PreconditionUnmet(format!("({u},{v}) is not a non-loop arc")));
    }
    if g.has_arc(x, y) {
        return Err(Error::EdgePresent(x, y));
    }
    let cut = vertex_disjoint_paths(&g.adjacency_lists(), x, y, k).value;
    if cut < k {
        return Err(Error::NotNonseparable { k, cut });
    }
    if v == y {
        return Err(Error::ArcIntoSink(u, v));
    }
    let vertices = find_part_through(g, x, y, k, u, v)?;
    Ok(KPart {
        vertices,
        source: x,
        sink: y,
        k,
    })
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct PartDualityFailure {
    pub dual: BitSet,
    pub in_boundary: BitSet,
    pub boundary: BitSet,
}

/// For a k-part `A` of `(x, y)` with `k` the minimum cut, checks that `A^∧`
/// is a k-part of `(y, x)` in the reversed graph and `∂⁻(A^∧) = ∂(A)`.
pub fn check_part_duality(g: &Digraph, part: &KPart) -> Result<Option<PartDualityFailure>> {
    let (x, y, k) = (part.source, part.sink, part.k);
    check_pair(g, x, y)?;
    if !part.is_valid(g) {
        return Err(Error::NotAPart(format!("{:?} is not a {k}-part", part.vertices)));
    }
    let cut = min_cut(g, x, y)?.expect("a part exists, so (x,y) is not an arc").0;
    if cut != k {
        return Err(Error::NotAPart(format!(
            "minimum cut is {cut}, so y is not {}-nonseparable with equality",
            k.saturating_sub(1)
        )));
    }
    let dual = g.hat(&part.vertices);
    let boundary = g.boundary(&part.vertices);
    let in_boundary = g.in_boundary(&dual);
    let rev = g.reversed();
    let dual_part = KPart {
        vertices: dual.clone(),
        source: y,
        sink: x,
        k,
    };
    if in_boundary == boundary && dual_part.is_valid(&rev) {
        Ok(None)
    } else {
        Ok(Some(PartDualityFailure {
            dual,
            in_boundary,
            boundary,
        }))
    }
}

fn check_matching_input(g: &Digraph, x: &BitSet, k: usize) -> Result<()> {
    if x.len() != g.order() {
        return Err(Error::VertexOutOfRange(x.len(), g.order()));
    }
    let n = g.order();
    let size = x.count();
    if size.min(n - size) < k {
        return Err(Error::PreconditionUnmet(format!(
            "min(|V| − |X|, |X|) = {} < k = {k}",
            size.min(n - size)
        )));
    }
    let kappa = g.kappa1();
    if k > kappa {
        return Err(Error::PreconditionUnmet(format!("k = {k} exceeds κ₁ = {kappa}")));
    }
    Ok(())
}

/// `k` arcs `(x_i, y_i)` with distinct `x_i ∈ X` and distinct `y_i ∉ X`.
/// Found by augmenting-path bipartite matching from `X` to `∂(X)`; pairs
/// are returned in increasing order of `x_i`.
pub fn strong_matching(g: &Digraph, x: &BitSet, k: usize) -> Result<Vec<(usize, usize)>> {
    check_matching_input(g, x, k)?;
    let left: Vec<usize> = x.iter().collect();
    let n = g.order();
    let mut owner = vec![usize::MAX; n];

    fn augment(g: &Digraph, x: &BitSet, u: usize, seen: &mut [bool], owner: &mut [usize]) -> bool {
        for v in g.rows[u].iter().filter(|&v| !x.contains(v)) {
            if seen[v] {
                continue;
            }
            seen[v] = true;
            if owner[v] == usize::MAX || augment(g, x, owner[v], seen, owner) {
                owner[v] = u;
                return true;
            }
        }
        false
    }

    let mut size = 0;
    for &u in &left {
        if size == k {
            break;
        }
        let mut seen = vec![false; n];
        if augment(g, x, u, &mut seen, &mut owner) {
            size += 1;
        }
    }
    if size < k {
        return Err(Error::NoMatching);
    }
    let mut pairs: Vec<_> = owner
        .iter()
        .enumerate()
        .filter(|(_, &u)| u != usize::MAX)
        .map(|(v, &u)| (u, v))
        .collect();
    pairs.sort_unstable();
    Ok(pairs)
}

/// The same property obtained from a fan: restrict to `Γ(X)`, add a source
/// joined to `X` and a sink fed by `∂(X)`, take `k` openly disjoint paths,
/// and pair the last vertex of each path in `X` with its successor.
pub fn strong_matching_via_fan(
    g: &Digraph,
    x: &BitSet,
    k: usize,
    engine: MengerEngine,
) -> Result<Vec<(usize, usize)>> {
    check_matching_input(g, x, k)?;
    let reach = g.gamma(x);
    let (phi, map) = g.induced(&reach);
    let m = phi.order();
    let (a, b) = (m, m + 1);
    let mut adj: Vec<Vec<usize>> = (0..m).map(|u| phi.rows[u].iter().collect()).collect();
    adj.push((0..m).filter(|&i| x.contains(map[i])).chain([a]).collect());
    adj.push(vec![b]);
    for (i, row) in adj.iter_mut().enumerate().take(m) {
        if !x.contains(map[i]) {
            row.push(b);
        }
    }
    let psi = Digraph::from_adjacency(&adj)?;
    let fan = menger_fan(&psi, a, b, k, engine).map_err(|e| match e {
        Error::NotNonseparable { .. } => Error::NoMatching,
        other => other,
    })?;
    let mut pairs: Vec<_> = fan
        .paths
        .iter()
        .map(|p| {
            let i = p
                .iter()
                .rposition(|&v| v < m && x.contains(map[v]))
                .expect("paths enter X");
            (map[p[i]], map[p[i + 1]])
        })
        .collect();
    pairs.sort_unstable();
    Ok(pairs)
}

/// Checks the conclusion of the strong matching property for `pairs`.
pub fn is_strong_matching(g: &Digraph, x: &BitSet, pairs: &[(usize, usize)]) -> bool {
    let n = g.order();
    let mut xs = BitSet::new(n);
    let mut ys = BitSet::new(n);
    pairs.iter().all(|&(a, b)| {
        a < n && b < n && x.contains(a) && !x.contains(b) && g.has_arc(a, b) && xs.insert(a) && ys.insert(b)
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    // x=0, a=1, b=2, y=3
    fn diamond() -> Digraph {
        Digraph::from_arcs(4, &[(0, 1), (0, 2), (1, 3), (2, 3)]).unwrap()
    }

    fn set(n: usize, xs: &[usize]) -> BitSet {
        BitSet::from_indices(n, xs.iter().copied())
    }

    fn random_digraph(rng: &mut ChaCha8Rng, n: usize, p: f64) -> Digraph {
        let mut g = Digraph::new(n);
        for u in 0..n {
            for v in 0..n {
                if u != v && rng.gen_bool(p) {
                    g.add_arc(u, v).unwrap();
                }
            }
        }
        g
    }

    #[test]
    fn parse_and_render() {
        let g = Digraph::parse("4\n1 2\n3\n3\n").unwrap();
        assert!(g.loops_added());
        assert_eq!(g, diamond());
        let back = Digraph::parse(&g.to_text()).unwrap();
        assert!(!back.loops_added());
        assert_eq!(back, g);
        assert!(matches!(Digraph::parse("3\n0 7\n"), Err(Error::Parse { position: 2, .. })));
        assert!(matches!(Digraph::parse("x"), Err(Error::Parse { position: 1, .. })));
        assert!(matches!(Digraph::parse("1\n0\n0\n"), Err(Error::Parse { position: 3, .. })));
    }

    #[test]
    fn nonseparability_examples() {
        let g = diamond();
        assert!(is_k_nonseparable(&g, 0, 3, 2).unwrap().holds);
        let r = is_k_nonseparable(&g, 0, 3, 3).unwrap();
        assert!(!r.holds);
        assert_eq!(r.witness, Some(set(4, &[0])));
        assert_eq!(is_k_nonseparable_exhaustive(&g, 0, 3, 3).unwrap().witness, Some(set(4, &[0])));
        assert_eq!(is_k_nonseparable(&g, 1, 1, 1), Err(Error::SameVertex(1)));
    }

    #[test]
    fn flow_cut_matches_exhaustive() {
        let mut rng = ChaCha8Rng::seed_from_u64(3);
        for _ in 0..400 {
            let n = rng.gen_range(2..=12);
            let p = rng.gen_range(0.1..0.6);
            let g = random_digraph(&mut rng, n, p);
            let (x, y) = (0, n - 1);
            let flow = min_cut(&g, x, y).unwrap();
            let ex = min_cut_exhaustive(&g, x, y).unwrap();
            assert_eq!(flow.as_ref().map(|f| f.0), ex.as_ref().map(|e| e.0));
            if let Some((c, a)) = flow {
                assert!(a.contains(x) && !g.gamma(&a).contains(y));
                assert_eq!(g.boundary(&a).count(), c);
            }
        }
    }

    #[test]
    fn fan_examples() {
        let g = diamond();
        for engine in [MengerEngine::Contraction, MengerEngine::Flow] {
            let mut fan = menger_fan(&g, 0, 3, 2, engine).unwrap();
            fan.paths.sort();
            assert_eq!(fan.paths, vec![vec![0, 1, 3], vec![0, 2, 3]]);
        }
        assert_eq!(
            menger_fan(&g, 0, 3, 3, MengerEngine::Contraction),
            Err(Error::NotNonseparable { k: 3, cut: 2 })
        );
        assert_eq!(menger_fan(&g, 0, 1, 1, MengerEngine::Flow), Err(Error::EdgePresent(0, 1)));

        // x=0, z=1, y=2, and a longer route 0 → 3 → 4 → 2.
        let g = Digraph::from_arcs(5, &[(0, 1), (1, 2), (0, 3), (3, 4), (4, 2)]).unwrap();
        let fan = menger_fan(&g, 0, 2, 2, MengerEngine::Contraction).unwrap();
        assert!(fan.paths.contains(&vec![0, 1, 2]));
        assert!(fan.paths.contains(&vec![0, 3, 4, 2]));
    }

    #[test]
    fn contraction_handles_long_routes() {
        // Two parallel chains of length 4 with a crossing rung.
        let arcs = [(0, 1), (1, 2), (2, 3), (3, 9), (0, 4), (4, 5), (5, 6), (6, 9), (1, 5), (5, 7), (7, 8), (8, 9), (0, 7)];
        let g = Digraph::from_arcs(10, &arcs).unwrap();
        let cut = min_cut(&g, 0, 9).unwrap().unwrap().0;
        let fan = menger_fan(&g, 0, 9, cut, MengerEngine::Contraction).unwrap();
        assert_eq!(fan.len(), cut);
    }

    #[test]
    fn engines_agree_on_random_graphs() {
        let mut rng = ChaCha8Rng::seed_from_u64(5);
        for _ in 0..500 {
            let n = rng.gen_range(2..=12);
            let p = rng.gen_range(0.1..0.5);
            let g = random_digraph(&mut rng, n, p);
            for (x, y) in [(0, n - 1), (n - 1, 0), (n / 2, 0)] {
                if x == y {
                    continue;
                }
                let Some((cut, _)) = min_cut_exhaustive(&g, x, y).unwrap() else { continue };
                for engine in [MengerEngine::Contraction, MengerEngine::Flow] {
                    let fan = menger_fan(&g, x, y, cut, engine).unwrap();
                    assert_eq!(fan.len(), cut);
                    assert!(matches!(menger_fan(&g, x, y, cut + 1, engine), Err(Error::NotNonseparable { .. })));
                }
            }
        }
    }

    #[test]
    fn fan_validation_catches_shared_vertices() {
        let g = diamond();
        let fan = Fan {
            source: 0,
            targets: vec![3, 3],
            paths: vec![vec![0, 1, 3], vec![0, 1, 3]],
        };
        assert!(matches!(fan.validate(&g), Err(Error::InvariantViolated(_))));
        let fan = Fan {
            source: 0,
            targets: vec![3],
            paths: vec![vec![0, 3]],
        };
        assert!(fan.validate(&g).is_err());
    }

    #[test]
    fn part_through_arc_examples() {
        let g = diamond();
        let part = find_k_part_through_arc(&g, 0, 3, 2, (0, 1)).unwrap();
        assert_eq!(part.vertices, set(4, &[0]));
        assert_eq!(g.boundary(&part.vertices), set(4, &[1, 2]));
        assert_eq!(find_k_part_through_arc(&g, 0, 3, 2, (1, 3)), Err(Error::ArcIntoSink(1, 3)));

        // x=0 → u=1 → v=2 → y=3
        let path = Digraph::from_arcs(4, &[(0, 1), (1, 2), (2, 3)]).unwrap();
        let part = find_k_part_through_arc(&path, 0, 3, 1, (1, 2)).unwrap();
        assert_eq!(part.vertices, set(4, &[0, 1]));
        assert_eq!(path.boundary(&part.vertices), set(4, &[2]));

        let mut extra = diamond();
        extra.add_arc(1, 2).unwrap();
        assert_eq!(find_k_part_through_arc(&extra, 0, 3, 2, (1, 2)), Err(Error::NotCritical(1, 2)));
    }

    #[test]
    fn part_through_arc_on_random_critical_graphs() {
        let mut rng = ChaCha8Rng::seed_from_u64(9);
        let mut checked = 0;
        for _ in 0..200 {
            let n = rng.gen_range(4..=10);
            let g = random_digraph(&mut rng, n, 0.35);
            let (x, y) = (0, n - 1);
            let Some((k, _)) = min_cut(&g, x, y).unwrap() else { continue };
            if k == 0 {
                continue;
            }
            let crit = criticalize(&g, x, y, k);
            for (u, v) in crit.arcs().filter(|&(_, v)| v != y).collect::<Vec<_>>() {
                let part = find_k_part_through_arc(&crit, x, y, k, (u, v)).unwrap();
                assert!(part.is_valid(&crit));
                assert!(part.vertices.contains(u) && crit.boundary(&part.vertices).contains(v));
                checked += 1;
            }
        }
        assert!(checked > 100);
    }

    #[test]
    fn part_duality_examples() {
        let g = diamond();
        let part = KPart {
            vertices: set(4, &[0]),
            source: 0,
            sink: 3,
            k: 2,
        };
        assert_eq!(check_part_duality(&g, &part).unwrap(), None);
        assert_eq!(g.hat(&part.vertices), set(4, &[3]));

        let path = Digraph::from_arcs(4, &[(0, 1), (1, 2), (2, 3)]).unwrap();
        let part = KPart {
            vertices: set(4, &[0, 1]),
            source: 0,
            sink: 3,
            k: 1,
        };
        assert_eq!(check_part_duality(&path, &part).unwrap(), None);

        let bad = KPart {
            vertices: set(4, &[0, 1]),
            source: 0,
            sink: 3,
            k: 2,
        };
        assert!(matches!(check_part_duality(&g, &bad), Err(Error::NotAPart(_))));
    }

    #[test]
    fn part_duality_on_all_minimum_parts() {
        let mut rng = ChaCha8Rng::seed_from_u64(13);
        for _ in 0..150 {
            let n = rng.gen_range(3..=10);
            let g = random_digraph(&mut rng, n, 0.3);
            let (x, y) = (0, n - 1);
            let Some((k, _)) = min_cut(&g, x, y).unwrap() else { continue };
            for mask in 0u64..1 << n {
                let a = BitSet::from_mask(n, mask);
                let part = KPart { vertices: a, source: x, sink: y, k };
                if part.is_valid(&g) {
                    assert_eq!(check_part_duality(&g, &part).unwrap(), None);
                }
            }
        }
    }

    #[test]
    fn strong_matching_examples() {
        let z5 = Group::cyclic(5).unwrap();
        let g = Digraph::cayley(&z5, &GroupSubset::from_indices(&z5, [0, 1]).unwrap()).unwrap();
        let x = set(5, &[0, 2]);
        let pairs = strong_matching(&g, &x, 1).unwrap();
        assert_eq!(pairs, vec![(0, 1)]);

        let z7 = Group::cyclic(7).unwrap();
        let g = Digraph::cayley(&z7, &GroupSubset::from_indices(&z7, [0, 1, 3]).unwrap()).unwrap();
        let x = set(7, &[0, 1]);
        let pairs = strong_matching(&g, &x, 2).unwrap();
        assert_eq!(pairs.len(), 2);
        assert!(is_strong_matching(&g, &x, &pairs));
        let via = strong_matching_via_fan(&g, &x, 2, MengerEngine::Contraction).unwrap();
        assert!(is_strong_matching(&g, &x, &via));

        assert!(matches!(strong_matching(&g, &x, 3), Err(Error::PreconditionUnmet(_))));
    }

    #[test]
    fn strong_matching_on_cayley_graphs() {
        let mut rng = ChaCha8Rng::seed_from_u64(17);
        for _ in 0..300 {
            let n = rng.gen_range(3..=12);
            let z = Group::cyclic(n).unwrap();
            let mask = rng.gen::<u64>() & ((1 << n) - 1) | 1;
            let s = GroupSubset::from_mask(&z, mask).unwrap();
            let g = Digraph::cayley(&z, &s).unwrap();
            let k = g.kappa1();
            let xm = rng.gen::<u64>() & ((1 << n) - 1);
            let x = BitSet::from_mask(n, xm);
            if x.count().min(n - x.count()) < k {
                continue;
            }
            let pairs = strong_matching(&g, &x, k).unwrap();
            assert!(is_strong_matching(&g, &x, &pairs[..k]));
            let via = strong_matching_via_fan(&g, &x, k, MengerEngine::Flow).unwrap();
            assert_eq!(via.len(), k);
            assert!(is_strong_matching(&g, &x, &via));
        }
    }

    #[test]
    fn kappa1_matches_cayley_engine() {
        use crate::isoperimetry::{kappa1, Kappa1Engine};
        let z8 = Group::cyclic(8).unwrap();
        for mask in 0u64..256 {
            let s = GroupSubset::from_mask(&z8, mask | 1).unwrap();
            let Ok(k) = kappa1(&z8, &s, Kappa1Engine::Exhaustive) else { continue };
            assert_eq!(Digraph::cayley(&z8, &s).unwrap().kappa1(), k);
        }
    }
}
