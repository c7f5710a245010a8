//! Candidate sets as `K`-uniform hypergraphs.
//!
//! Before any feedback every `K`-subset of users could be the active set, so
//! the candidates form the complete `K`-uniform hypergraph. Each slot then
//! deletes edges:
//!
//! * `y_t = 0`: every writer is inactive, so each edge touching a writer goes.
//! * `y_t = 1`: some writer is active, so each edge made only of non-writers
//!   goes.
//!
//! The surviving edges are exactly the status vectors consistent with `y`. A
//! partition separating every candidate is a strong `K`-coloring, and the
//! MAP decoder corresponds to deleting as few edges as possible until such a
//! coloring exists.
//!
//! The vertex set never shrinks; a "deleted" vertex is just left isolated.

use std::collections::{BTreeSet, VecDeque};
use std::fmt::Write as _;

use itertools::Itertools;

use crate::error::{check_dim, invalid, Error, Result};
use crate::model::{or_channel, AccessMatrix, Feedback, PartitionVector, StatusVector};

/// Edge-count ceiling for [`min_deletion_colorable`].
pub const MIN_DELETION_MAX_EDGES: usize = 24;

/// A `K`-uniform hypergraph on vertices `1..=N`; edges are sorted tuples.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct Hypergraph {
    n_vertices: usize,
    k_uniform: usize,
    edges: BTreeSet<Vec<usize>>,
}

impl Hypergraph {
    pub fn new(
        n_vertices: usize,
        k_uniform: usize,
        edges: impl IntoIterator<Item = Vec<usize>>,
    ) -> Result<Self> {
        if k_uniform == 0 || k_uniform > n_vertices {
            return invalid(format!(
                "need 1 <= K <= N, got K={k_uniform}, N={n_vertices}"
            ));
        }
        let mut set = BTreeSet::new();
        for mut e in edges {
            e.sort_unstable();
            check_dim("edge size", k_uniform, e.len())?;
            if e.windows(2).any(|w| w[0] == w[1]) {
                return invalid(format!("edge {e:?} repeats a vertex"));
            }
            if e[0] == 0 || e[k_uniform - 1] > n_vertices {
                return invalid(format!("edge {e:?} leaves 1..={n_vertices}"));
            }
            if !set.insert(e.clone()) {
                return invalid(format!("duplicate edge {e:?}"));
            }
        }
        Ok(Self {
            n_vertices,
            k_uniform,
            edges: set,
        })
    }

    /// Graph (`K = 2`) from a list of vertex pairs.
    pub fn from_pairs(n_vertices: usize, pairs: &[(usize, usize)]) -> Result<Self> {
        Self::new(n_vertices, 2, pairs.iter().map(|&(a, b)| vec![a, b]))
    }

    pub fn n_vertices(&self) -> usize {
        self.n_vertices
    }

    pub fn k_uniform(&self) -> usize {
        self.k_uniform
    }

    pub fn edges(&self) -> impl Iterator<Item = &[usize]> + '_ {
        self.edges.iter().map(Vec::as_slice)
    }

    pub fn edge_count(&self) -> usize {
        self.edges.len()
    }

    pub fn contains_edge(&self, edge: &[usize]) -> bool {
        let mut e = edge.to_vec();
        e.sort_unstable();
        self.edges.contains(&e)
    }

    /// Edges as status vectors.
    pub fn status_vectors(&self) -> Vec<StatusVector> {
        self.edges
            .iter()
            .map(|e| StatusVector::new(self.n_vertices, e.iter().copied()).expect("valid edge"))
            .collect()
    }

    fn without_edges(&self, drop: &[usize]) -> Self {
        let edges = self
            .edges
            .iter()
            .enumerate()
            .filter(|(i, _)| !drop.contains(i))
            .map(|(_, e)| e.clone())
            .collect();
        Self { edges, ..*self }
    }

    fn require_graph(&self) -> Result<()> {
        if self.k_uniform == 2 {
            Ok(())
        } else {
            invalid(format!(
                "operation needs K = 2, hypergraph has K = {}",
                self.k_uniform
            ))
        }
    }

    /// Graphviz rendering of a graph (`K = 2`), isolated vertices included.
    pub fn to_dot(&self) -> Result<String> {
        self.require_graph()?;
        let mut out = String::from("graph H {\n");
        for v in 1..=self.n_vertices {
            writeln!(out, "  {v};").unwrap();
        }
        for e in &self.edges {
            writeln!(out, "  {} -- {};", e[0], e[1]).unwrap();
        }
        out.push_str("}\n");
        Ok(out)
    }
}

/// All `C(N, K)` edges.
pub fn complete(n: usize, k: usize) -> Result<Hypergraph> {
    if k == 0 || k > n {
        return invalid(format!("need 1 <= K <= N, got K={k}, N={n}"));
    }
    Ok(Hypergraph {
        n_vertices: n,
        k_uniform: k,
        edges: (1..=n).combinations(k).collect(),
    })
}

/// Edge deletions caused by one slot with the given writers and feedback bit.
pub fn apply_slot(h: &Hypergraph, writers: &[usize], y: bool) -> Result<Hypergraph> {
    let mut is_writer = vec![false; h.n_vertices + 1];
    for &w in writers {
        if w == 0 || w > h.n_vertices {
            return invalid(format!("writer {w} outside 1..={}", h.n_vertices));
        }
        is_writer[w] = true;
    }
    let edges = h
        .edges
        .iter()
        .filter(|e| {
            if y {
                e.iter().any(|&v| is_writer[v])
            } else {
                !e.iter().any(|&v| is_writer[v])
            }
        })
        .cloned()
        .collect();
    Ok(Hypergraph { edges, ..*h })
}

/// Slot-by-slot reduction of the complete hypergraph.
pub fn reduce_by_slots(n: usize, k: usize, x: &AccessMatrix, y: &Feedback) -> Result<Hypergraph> {
    check_dim("access matrix users", n, x.n_users())?;
    check_dim("feedback length", x.n_slots(), y.len())?;
    (0..y.len()).try_fold(complete(n, k)?, |h, t| {
        apply_slot(&h, &x.writers(t), y.get(t))
    })
}

/// Reduced hypergraph `H'` after observing `y`.
///
/// Equivalent to folding [`apply_slot`] over the slots but computed directly:
/// a vertex survives the zero-slots iff its codeword is zero there, and a
/// `K`-set of survivors survives the one-slots iff the OR of its codewords
/// covers them. Only survivors are enumerated.
pub fn reduce(n: usize, k: usize, x: &AccessMatrix, y: &Feedback) -> Result<Hypergraph> {
    check_dim("access matrix users", n, x.n_users())?;
    check_dim("feedback length", x.n_slots(), y.len())?;
    if k == 0 || k > n {
        return invalid(format!("need 1 <= K <= N, got K={k}, N={n}"));
    }
    let ones = y.words();
    let survivors: Vec<usize> = (1..=n)
        .filter(|&i| x.row(i).iter().zip(ones).all(|(r, o)| r & !o == 0))
        .collect();
    let mut edges = BTreeSet::new();
    let mut chosen = Vec::with_capacity(k);
    let mut cover = vec![0u64; ones.len()];
    collect_covering(
        x,
        ones,
        &survivors,
        k,
        0,
        &mut chosen,
        &mut cover,
        &mut edges,
    );
    Ok(Hypergraph {
        n_vertices: n,
        k_uniform: k,
        edges,
    })
}

#[allow(clippy::too_many_arguments)]
fn collect_covering(
    x: &AccessMatrix,
    ones: &[u64],
    survivors: &[usize],
    k: usize,
    start: usize,
    chosen: &mut Vec<usize>,
    cover: &mut Vec<u64>,
    out: &mut BTreeSet<Vec<usize>>,
) {
    if chosen.len() == k {
        if cover.iter().zip(ones).all(|(c, o)| c & o == *o) {
            out.insert(chosen.clone());
        }
        return;
    }
    let need = k - chosen.len();
    for idx in start..=survivors.len().saturating_sub(need) {
        if survivors.len() < need {
            break;
        }
        let v = survivors[idx];
        let saved = cover.clone();
        for (c, r) in cover.iter_mut().zip(x.row(v)) {
            *c |= r;
        }
        chosen.push(v);
        collect_covering(x, ones, survivors, k, idx + 1, chosen, cover, out);
        chosen.pop();
        *cover = saved;
    }
}

/// Status vectors reproducing `y`, by brute force over all `C(N, K)` sets.
pub fn candidate_set(
    n: usize,
    k: usize,
    x: &AccessMatrix,
    y: &Feedback,
) -> Result<Vec<StatusVector>> {
    check_dim("access matrix users", n, x.n_users())?;
    check_dim("feedback length", x.n_slots(), y.len())?;
    if k == 0 || k > n {
        return invalid(format!("need 1 <= K <= N, got K={k}, N={n}"));
    }
    let mut out = Vec::new();
    for s in StatusVector::all(n, k) {
        if or_channel(x, &s)? == *y {
            out.push(s);
        }
    }
    Ok(out)
}

/// Vertex colors forming a strong coloring, stored as a partition.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct Coloring(pub PartitionVector);

impl Coloring {
    pub fn partition(&self) -> &PartitionVector {
        &self.0
    }

    pub fn into_partition(self) -> PartitionVector {
        self.0
    }

    pub fn is_strong_for(&self, h: &Hypergraph) -> bool {
        h.edges()
            .all(|e| e.iter().map(|&v| self.0.label(v)).all_unique())
    }
}

/// The hypergraph needs more than `K` colors.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct NotColorable;

/// Strong `K`-coloring whose labels form a valid partition, or
/// [`NotColorable`].
///
/// Vertices covered by edges are colored by BFS parity (`K = 2`) or by
/// backtracking (`K > 2`). Isolated vertices get colors round-robin from 1,
/// and if a color is still unused a vertex from a shared color class is moved
/// into it, which keeps the coloring strong.
pub fn strong_color(h: &Hypergraph) -> std::result::Result<Coloring, NotColorable> {
    let n = h.n_vertices;
    let k = h.k_uniform;
    let adj = primal_adjacency(h);
    let mut colors = vec![0usize; n + 1];

    let colored = if k == 2 {
        two_color(&adj, &mut colors)
    } else {
        backtrack_color(&adj, k, &mut colors)
    };
    if !colored {
        return Err(NotColorable);
    }

    let mut next = 0;
    for v in 1..=n {
        if adj[v].is_empty() {
            colors[v] = next % k + 1;
            next += 1;
        }
    }
    fill_missing_colors(&adj, k, &mut colors);
    Ok(Coloring(
        PartitionVector::new(colors[1..].to_vec(), k).expect("every color used"),
    ))
}

/// Neighbors in the 2-section: vertices sharing an edge. Index 0 unused.
fn primal_adjacency(h: &Hypergraph) -> Vec<Vec<usize>> {
    let mut adj = vec![Vec::new(); h.n_vertices + 1];
    for e in &h.edges {
        for (&a, &b) in e.iter().tuple_combinations() {
            adj[a].push(b);
            adj[b].push(a);
        }
    }
    for list in &mut adj {
        list.sort_unstable();
        list.dedup();
    }
    adj
}

fn two_color(adj: &[Vec<usize>], colors: &mut [usize]) -> bool {
    let mut queue = VecDeque::new();
    for root in 1..adj.len() {
        if colors[root] != 0 || adj[root].is_empty() {
            continue;
        }
        colors[root] = 1;
        queue.push_back(root);
        while let Some(u) = queue.pop_front() {
            for &w in &adj[u] {
                if colors[w] == 0 {
                    colors[w] = 3 - colors[u];
                    queue.push_back(w);
                } else if colors[w] == colors[u] {
                    return false;
                }
            }
        }
    }
    true
}

fn backtrack_color(adj: &[Vec<usize>], k: usize, colors: &mut [usize]) -> bool {
    // BFS order keeps each vertex adjacent to earlier ones, so conflicts
    // surface early.
    let mut order = Vec::new();
    let mut seen = vec![false; adj.len()];
    for root in 1..adj.len() {
        if seen[root] || adj[root].is_empty() {
            continue;
        }
        seen[root] = true;
        let mut queue = VecDeque::from([root]);
        while let Some(u) = queue.pop_front() {
            order.push(u);
            for &w in &adj[u] {
                if !seen[w] {
                    seen[w] = true;
                    queue.push_back(w);
                }
            }
        }
    }

    fn go(
        pos: usize,
        order: &[usize],
        adj: &[Vec<usize>],
        k: usize,
        colors: &mut [usize],
        max_used: usize,
    ) -> bool {
        let Some(&v) = order.get(pos) else {
            return true;
        };
        // a fresh color is interchangeable with any other fresh color
        let limit = (max_used + 1).min(k);
        for c in 1..=limit {
            if adj[v].iter().all(|&w| colors[w] != c) {
                colors[v] = c;
                if go(pos + 1, order, adj, k, colors, max_used.max(c)) {
                    return true;
                }
            }
        }
        colors[v] = 0;
        false
    }
    go(0, &order, adj, k, colors, 0)
}

fn fill_missing_colors(adj: &[Vec<usize>], k: usize, colors: &mut [usize]) {
    loop {
        let mut class_size = vec![0usize; k + 1];
        for &c in &colors[1..] {
            class_size[c] += 1;
        }
        let Some(missing) = (1..=k).find(|&c| class_size[c] == 0) else {
            return;
        };
        // prefer isolated vertices, then the highest id, from a shared class
        let candidate = (1..colors.len())
            .rev()
            .filter(|&v| class_size[colors[v]] >= 2)
            .min_by_key(|&v| !adj[v].is_empty())
            .expect("N >= K leaves a shared color class");
        colors[candidate] = missing;
    }
}

/// Sub-hypergraph with the fewest deleted edges that is strongly
/// `K`-colorable, with one such coloring. Exhaustive; refuses hypergraphs
/// with more than [`MIN_DELETION_MAX_EDGES`] edges.
pub fn min_deletion_colorable(h: &Hypergraph) -> Result<(Hypergraph, Coloring)> {
    min_deletion_colorable_with_limit(h, MIN_DELETION_MAX_EDGES)
}

pub fn min_deletion_colorable_with_limit(
    h: &Hypergraph,
    max_edges: usize,
) -> Result<(Hypergraph, Coloring)> {
    let m = h.edge_count();
    if m > max_edges {
        return Err(Error::TooLarge(format!(
            "{m} edges exceeds the exhaustive-search limit of {max_edges}"
        )));
    }
    for deletions in 0..=m {
        for drop in (0..m).combinations(deletions) {
            let candidate = h.without_edges(&drop);
            if let Ok(coloring) = strong_color(&candidate) {
                return Ok((candidate, coloring));
            }
        }
    }
    unreachable!("the empty hypergraph is always colorable")
}

/// True iff some component of the graph is not bipartite.
pub fn has_odd_cycle(g: &Hypergraph) -> Result<bool> {
    g.require_graph()?;
    let adj = primal_adjacency(g);
    let mut colors = vec![0; adj.len()];
    Ok(!two_color(&adj, &mut colors))
}

/// True iff an odd cycle runs through edge `(u, v)`.
///
/// Inside a 2-connected graph every edge lies on an odd cycle as soon as the
/// block has one, so this checks whether the block holding `(u, v)` is
/// bipartite.
pub fn has_one_odd_cycle(g: &Hypergraph, u: usize, v: usize) -> Result<bool> {
    g.require_graph()?;
    if !g.contains_edge(&[u, v]) {
        return invalid(format!("edge ({u}, {v}) is not in the graph"));
    }
    let adj = primal_adjacency(g);
    let key = (u.min(v), u.max(v));
    let block = blocks(&adj)
        .into_iter()
        .find(|b| b.contains(&key))
        .expect("every edge lies in exactly one block");
    Ok(!edges_bipartite(adj.len(), &block))
}

/// Which kinds of odd cycles exist relative to the true active pair.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, serde::Serialize)]
pub struct OddCycleCensus {
    /// An odd cycle through the edge of the active pair.
    pub through_active_edge: bool,
    /// An odd cycle through exactly one of the two active users.
    pub through_one_active: bool,
    /// An odd cycle avoiding both active users.
    pub avoiding_actives: bool,
}

impl OddCycleCensus {
    pub fn any(&self) -> bool {
        self.through_active_edge || self.through_one_active || self.avoiding_actives
    }
}

/// Classifies odd cycles with respect to the active edge `(a, b)`, which
/// must be present. An odd cycle containing both `a` and `b` always yields
/// one through the edge itself, so three classes cover every odd cycle.
pub fn odd_cycle_census(g: &Hypergraph, a: usize, b: usize) -> Result<OddCycleCensus> {
    let through_active_edge = has_one_odd_cycle(g, a, b)?;
    let adj = primal_adjacency(g);
    let minus = |removed: &[usize]| -> Vec<Vec<usize>> {
        adj.iter()
            .enumerate()
            .map(|(v, list)| {
                if removed.contains(&v) {
                    Vec::new()
                } else {
                    list.iter()
                        .copied()
                        .filter(|w| !removed.contains(w))
                        .collect()
                }
            })
            .collect()
    };
    let odd_block_at = |adj: &[Vec<usize>], vertex: usize| {
        blocks(adj)
            .iter()
            .filter(|b| b.iter().any(|&(x, y)| x == vertex || y == vertex))
            .any(|b| !edges_bipartite(adj.len(), b))
    };
    let through_one_active = odd_block_at(&minus(&[b]), a) || odd_block_at(&minus(&[a]), b);
    let mut colors = vec![0; adj.len()];
    let avoiding_actives = !two_color(&minus(&[a, b]), &mut colors);
    Ok(OddCycleCensus {
        through_active_edge,
        through_one_active,
        avoiding_actives,
    })
}

fn edges_bipartite(n_plus_one: usize, edges: &[(usize, usize)]) -> bool {
    let mut adj = vec![Vec::new(); n_plus_one];
    for &(a, b) in edges {
        adj[a].push(b);
        adj[b].push(a);
    }
    let mut colors = vec![0; n_plus_one];
    two_color(&adj, &mut colors)
}

/// Biconnected components as edge lists (Tarjan's edge-stack method, run
/// iteratively).
fn blocks(adj: &[Vec<usize>]) -> Vec<Vec<(usize, usize)>> {
    let n = adj.len();
    let mut disc = vec![0usize; n];
    let mut low = vec![0usize; n];
    let mut time = 0;
    let mut edge_stack: Vec<(usize, usize)> = Vec::new();
    let mut out = Vec::new();

    for root in 1..n {
        if disc[root] != 0 || adj[root].is_empty() {
            continue;
        }
        time += 1;
        disc[root] = time;
        low[root] = time;
        // (vertex, parent, next neighbor index)
        let mut stack = vec![(root, 0usize, 0usize)];
        while let Some(&mut (u, parent, ref mut next)) = stack.last_mut() {
            if let Some(&w) = adj[u].get(*next) {
                *next += 1;
                if disc[w] == 0 {
                    edge_stack.push((u, w));
                    time += 1;
                    disc[w] = time;
                    low[w] = time;
                    stack.push((w, u, 0));
                } else if w != parent && disc[w] < disc[u] {
                    edge_stack.push((u, w));
                    low[u] = low[u].min(disc[w]);
                }
            } else {
                stack.pop();
                if let Some(&(p, _, _)) = stack.last() {
                    low[p] = low[p].min(low[u]);
                    if low[u] >= disc[p] {
                        let mut block = Vec::new();
                        while let Some(e) = edge_stack.pop() {
                            block.push((e.0.min(e.1), e.0.max(e.1)));
                            if e == (p, u) {
                                break;
                            }
                        }
                        out.push(block);
                    }
                }
            }
        }
    }
    out
}
