//! Unit vertex-capacity max flow (Dinic) on a split digraph.
//!
//! Every vertex `v` other than the terminals becomes `in(v) → out(v)` with
//! capacity 1; an arc `u → w` becomes `out(u) → in(w)` with unbounded
//! capacity. A maximum flow from `out(s)` to `in(t)` is then a maximum family
//! of openly disjoint `s → t` paths, and a minimum cut is a minimum vertex
//! separator.

use std::collections::VecDeque;

use crate::bitset::BitSet;

pub(crate) struct FlowOutcome {
    pub value: usize,
    /// One vertex sequence `s, …, t` per unit of flow.
    pub paths: Vec<Vec<usize>>,
    /// Smallest source side `X ∋ s` with `|∂X| = value`; only present when
    /// the flow is maximum (the limit was not hit).
    pub source_side: Option<BitSet>,
}

struct Network {
    head: Vec<Vec<usize>>,
    to: Vec<usize>,
    cap: Vec<usize>,
    orig: Vec<usize>,
}

impl Network {
    fn with_nodes(n: usize) -> Self {
        Network {
            head: vec![Vec::new(); n],
            to: Vec::new(),
            cap: Vec::new(),
            orig: Vec::new(),
        }
    }

    fn add_edge(&mut self, u: usize, v: usize, c: usize) {
        self.head[u].push(self.to.len());
        self.to.push(v);
        self.cap.push(c);
        self.orig.push(c);
        self.head[v].push(self.to.len());
        self.to.push(u);
        self.cap.push(0);
        self.orig.push(0);
    }

    fn levels(&self, src: usize, sink: usize) -> Option<Vec<u32>> {
        let mut level = vec![u32::MAX; self.head.len()];
        level[src] = 0;
        let mut queue = VecDeque::from([src]);
        while let Some(u) = queue.pop_front() {
            for &e in &self.head[u] {
                let v = self.to[e];
                if self.cap[e] > 0 && level[v] == u32::MAX {
                    level[v] = level[u] + 1;
                    queue.push_back(v);
                }
            }
        }
        (level[sink] != u32::MAX).then_some(level)
    }

    fn augment(&mut self, u: usize, sink: usize, pushed: usize, level: &[u32], it: &mut [usize]) -> usize {
        if u == sink {
            return pushed;
        }
        while it[u] < self.head[u].len() {
            let e = self.head[u][it[u]];
            let v = self.to[e];
            if self.cap[e] > 0 && level[v] == level[u] + 1 {
                let d = self.augment(v, sink, pushed.min(self.cap[e]), level, it);
                if d > 0 {
                    self.cap[e] -= d;
                    self.cap[e ^ 1] += d;
                    return d;
                }
            }
            it[u] += 1;
        }
        0
    }

    fn residual_reach(&self, src: usize) -> Vec<bool> {
        let mut seen = vec![false; self.head.len()];
        seen[src] = true;
        let mut stack = vec![src];
        while let Some(u) = stack.pop() {
            for &e in &self.head[u] {
                let v = self.to[e];
                if self.cap[e] > 0 && !seen[v] {
                    seen[v] = true;
                    stack.push(v);
                }
            }
        }
        seen
    }
}

/// Maximum number of openly disjoint `s → t` paths, stopping early once
/// `limit` paths are found. `adj[u]` lists out-neighbours of `u`; loops are
/// ignored. The caller guarantees `s ≠ t` and that `t ∉ adj[s]`.
pub(crate) fn vertex_disjoint_paths(adj: &[Vec<usize>], s: usize, t: usize, limit: usize) -> FlowOutcome {
    let n = adj.len();
    debug_assert!(s != t && !adj[s].contains(&t));
    let inf = n + 1;
    let node_in = |v: usize| 2 * v;
    let node_out = |v: usize| 2 * v + 1;
    let mut net = Network::with_nodes(2 * n);
    for v in 0..n {
        let c = if v == s || v == t { inf } else { 1 };
        net.add_edge(node_in(v), node_out(v), c);
    }
    for (u, outs) in adj.iter().enumerate() {
        if u == t {
            continue;
        }
        for &w in outs {
            if w != u && w != s {
                net.add_edge(node_out(u), node_in(w), inf);
            }
        }
    }
    let (src, sink) = (node_out(s), node_in(t));
    let mut value = 0;
    'outer: while value < limit {
        let Some(level) = net.levels(src, sink) else {
            break;
        };
        let mut it = vec![0; 2 * n];
        loop {
            let d = net.augment(src, sink, limit - value, &level, &mut it);
            if d == 0 {
                break;
            }
            value += d;
            if value >= limit {
                break 'outer;
            }
        }
    }

    let source_side = (value < limit).then(|| {
        let reach = net.residual_reach(src);
        let mut side = BitSet::new(n);
        side.insert(s);
        for v in 0..n {
            if reach[node_out(v)] {
                side.insert(v);
            }
        }
        side
    });

    // Peel paths off the flow; unit vertex capacities keep them disjoint.
    let mut left: Vec<usize> = (0..net.to.len())
        .map(|e| net.orig[e].saturating_sub(net.cap[e]))
        .collect();
    let mut paths = Vec::with_capacity(value);
    for _ in 0..value {
        let mut path = vec![s];
        let mut u = s;
        loop {
            let e = net.head[node_out(u)]
                .iter()
                .copied()
                .find(|&e| e % 2 == 0 && left[e] > 0)
                .expect("flow conservation");
            left[e] -= 1;
            let w = net.to[e] / 2;
            path.push(w);
            if w == t {
                break;
            }
            let inner = net.head[node_in(w)]
                .iter()
                .copied()
                .find(|&e| e % 2 == 0 && net.to[e] == node_out(w))
                .expect("split edge");
            left[inner] -= 1;
            u = w;
        }
        paths.push(path);
    }
    FlowOutcome {
        value,
        paths,
        source_side,
    }
}
