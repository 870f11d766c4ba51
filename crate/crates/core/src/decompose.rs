//! Edge partitions of cubic graphs into two linear forests with bounded path
//! lengths.
//!
//! [`thomassen_decompose`] is an exact backtracking search: edges are assigned
//! in BFS order, each forest keeps path endpoints and lengths so that the degree,
//! acyclicity and length constraints are checked in O(1) per assignment.
//! [`heuristic_decompose`] handles large graphs: a near-perfect matching seeds
//! `F2`, the remaining 2-regular-ish part is cut by a set `X` of edges moved into
//! `F2`, and `X` is repaired by min-conflicts local search.

use std::collections::{HashMap, VecDeque};
use std::fmt;

use rand::seq::SliceRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Deserializer, Serialize, Serializer};
use thiserror::Error;

use crate::graph::Graph;

const NONE: usize = usize::MAX;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub enum Forest {
    F1,
    F2,
}

impl fmt::Display for Forest {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Forest::F1 => "F1",
            Forest::F2 => "F2",
        })
    }
}

/// Two edge sets on vertices `0..n`; normalised so every edge is `(u, v)` with
/// `u < v` and each list is sorted.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct LinearForestPair {
    n: usize,
    f1: Vec<(usize, usize)>,
    f2: Vec<(usize, usize)>,
}

fn normalise(mut edges: Vec<(usize, usize)>) -> Vec<(usize, usize)> {
    for e in edges.iter_mut() {
        if e.0 > e.1 {
            *e = (e.1, e.0);
        }
    }
    edges.sort_unstable();
    edges
}

impl LinearForestPair {
    pub fn new(n: usize, f1: Vec<(usize, usize)>, f2: Vec<(usize, usize)>) -> Self {
        LinearForestPair { n, f1: normalise(f1), f2: normalise(f2) }
    }

    pub fn order(&self) -> usize {
        self.n
    }

    pub fn edges(&self, forest: Forest) -> &[(usize, usize)] {
        match forest {
            Forest::F1 => &self.f1,
            Forest::F2 => &self.f2,
        }
    }

    /// Which forest holds the edge `uv`, if any (the first one if listed twice).
    pub fn forest_of(&self, u: usize, v: usize) -> Option<Forest> {
        let e = (u.min(v), u.max(v));
        if self.f1.binary_search(&e).is_ok() {
            Some(Forest::F1)
        } else if self.f2.binary_search(&e).is_ok() {
            Some(Forest::F2)
        } else {
            None
        }
    }

    fn adjacency(&self, forest: Forest) -> Vec<Vec<usize>> {
        let mut adj = vec![Vec::new(); self.n];
        for &(u, v) in self.edges(forest) {
            adj[u].push(v);
            adj[v].push(u);
        }
        adj
    }

    /// Maximal paths of a forest, isolated vertices included as length-0 paths.
    /// Paths are listed by their smaller endpoint and oriented from it. Cycles,
    /// which a valid pair never has, are appended starting at their smallest vertex.
    pub fn paths_of(&self, forest: Forest) -> Vec<Vec<usize>> {
        let adj = self.adjacency(forest);
        let mut seen = vec![false; self.n];
        let mut paths = Vec::new();
        let walk = |start: usize, seen: &mut Vec<bool>| {
            let mut path = vec![start];
            seen[start] = true;
            let mut prev = NONE;
            let mut cur = start;
            loop {
                let next = adj[cur].iter().copied().find(|&w| w != prev && !seen[w]);
                match next {
                    Some(w) => {
                        seen[w] = true;
                        path.push(w);
                        prev = cur;
                        cur = w;
                    }
                    None => return path,
                }
            }
        };
        for v in 0..self.n {
            if !seen[v] && adj[v].len() <= 1 {
                let p = walk(v, &mut seen);
                paths.push(p);
            }
        }
        for v in 0..self.n {
            if !seen[v] {
                let p = walk(v, &mut seen);
                paths.push(p);
            }
        }
        paths
    }

    /// Longest path length (in edges) of a forest.
    pub fn max_len(&self, forest: Forest) -> usize {
        self.paths_of(forest).iter().map(|p| p.len() - 1).max().unwrap_or(0)
    }

    pub fn to_report(&self) -> LinearForestReport {
        LinearForestReport {
            n: self.n,
            f1: self.f1.clone(),
            f2: self.f2.clone(),
            paths_f1: self.paths_of(Forest::F1),
            paths_f2: self.paths_of(Forest::F2),
            max_len_f1: self.max_len(Forest::F1),
            max_len_f2: self.max_len(Forest::F2),
        }
    }
}

/// JSON shape of a [`LinearForestPair`]; derived fields are ignored when read back.
#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct LinearForestReport {
    pub n: usize,
    pub f1: Vec<(usize, usize)>,
    pub f2: Vec<(usize, usize)>,
    #[serde(default)]
    pub paths_f1: Vec<Vec<usize>>,
    #[serde(default)]
    pub paths_f2: Vec<Vec<usize>>,
    #[serde(default)]
    pub max_len_f1: usize,
    #[serde(default)]
    pub max_len_f2: usize,
}

impl Serialize for LinearForestPair {
    fn serialize<S: Serializer>(&self, s: S) -> Result<S::Ok, S::Error> {
        self.to_report().serialize(s)
    }
}

impl<'de> Deserialize<'de> for LinearForestPair {
    fn deserialize<D: Deserializer<'de>>(d: D) -> Result<Self, D::Error> {
        let r = LinearForestReport::deserialize(d)?;
        Ok(LinearForestPair::new(r.n, r.f1, r.f2))
    }
}

#[derive(Clone, Debug, PartialEq, Eq, Error)]
pub enum Violation {
    #[error("pair is on {found} vertices, graph has {expected}")]
    WrongOrder { expected: usize, found: usize },
    #[error("{forest} contains {u}-{v}, which is not an edge of the graph")]
    UnknownEdge { forest: Forest, u: usize, v: usize },
    #[error("edge {u}-{v} is assigned more than once")]
    DuplicateEdge { u: usize, v: usize },
    #[error("edge {u}-{v} is not assigned to either forest")]
    MissingEdge { u: usize, v: usize },
    #[error("vertex {vertex} has degree {degree} in {forest}")]
    DegreeTooHigh { forest: Forest, vertex: usize, degree: usize },
    #[error("{forest} contains a cycle through {vertices:?}")]
    Cycle { forest: Forest, vertices: Vec<usize> },
    #[error("{forest} path {path:?} has length {length} > {bound}")]
    PathTooLong { forest: Forest, path: Vec<usize>, length: usize, bound: usize },
}

/// Checks partition, linear-forest structure and length bounds, in that order,
/// and reports the first violation found.
pub fn validate(g: &Graph, pair: &LinearForestPair, l1: usize, l2: usize) -> Result<(), Violation> {
    if pair.n != g.order() {
        return Err(Violation::WrongOrder { expected: g.order(), found: pair.n });
    }
    let mut owner: HashMap<(usize, usize), Forest> = HashMap::with_capacity(g.size());
    for forest in [Forest::F1, Forest::F2] {
        for &(u, v) in pair.edges(forest) {
            if u >= g.order() || v >= g.order() || !g.has_edge(u, v) {
                return Err(Violation::UnknownEdge { forest, u, v });
            }
            if owner.insert((u, v), forest).is_some() {
                return Err(Violation::DuplicateEdge { u, v });
            }
        }
    }
    if let Some((u, v)) = g.edges().find(|e| !owner.contains_key(e)) {
        return Err(Violation::MissingEdge { u, v });
    }
    for (forest, bound) in [(Forest::F1, l1), (Forest::F2, l2)] {
        let adj = pair.adjacency(forest);
        if let Some(v) = (0..pair.n).find(|&v| adj[v].len() > 2) {
            return Err(Violation::DegreeTooHigh { forest, vertex: v, degree: adj[v].len() });
        }
        for path in pair.paths_of(forest) {
            let closed = path.len() >= 3 && adj[path[0]].len() == 2;
            if closed {
                return Err(Violation::Cycle { forest, vertices: path });
            }
            if path.len() - 1 > bound {
                let length = path.len() - 1;
                return Err(Violation::PathTooLong { forest, path, length, bound });
            }
        }
    }
    Ok(())
}

// ----------------------------------------------------------------------------
// Exact search
// ----------------------------------------------------------------------------

#[derive(Clone, Debug, PartialEq, Eq)]
pub enum SearchOutcome {
    Found(LinearForestPair),
    /// The whole search space was exhausted: no decomposition exists.
    Infeasible,
    BudgetExhausted { nodes: u64 },
}

impl SearchOutcome {
    pub fn found(self) -> Option<LinearForestPair> {
        match self {
            SearchOutcome::Found(p) => Some(p),
            _ => None,
        }
    }
}

/// Edges in BFS discovery order (each component in turn, smallest vertex first).
fn bfs_edge_order(g: &Graph) -> Vec<(usize, usize)> {
    let n = g.order();
    let mut seen = vec![false; n];
    let mut emitted: std::collections::HashSet<(usize, usize)> = Default::default();
    let mut order = Vec::with_capacity(g.size());
    for s in 0..n {
        if seen[s] {
            continue;
        }
        seen[s] = true;
        let mut queue = VecDeque::from([s]);
        while let Some(u) = queue.pop_front() {
            for &w in g.neighbors(u) {
                let e = (u.min(w), u.max(w));
                if emitted.insert(e) {
                    order.push(e);
                }
                if !seen[w] {
                    seen[w] = true;
                    queue.push_back(w);
                }
            }
        }
    }
    order
}

struct ForestState {
    deg: Vec<u8>,
    /// For a path endpoint: the other endpoint (itself when isolated).
    end: Vec<usize>,
    /// For a path endpoint: the path length in edges.
    len: Vec<usize>,
}

impl ForestState {
    fn new(n: usize) -> Self {
        ForestState { deg: vec![0; n], end: (0..n).collect(), len: vec![0; n] }
    }
}

enum Undo {
    Deg(usize, usize),
    End(usize, usize, usize, usize),
}

struct Exact<'a> {
    edges: &'a [(usize, usize)],
    bound: [usize; 2],
    forests: [ForestState; 2],
    assignment: Vec<u8>,
    trail: Vec<Undo>,
    nodes: u64,
    budget: u64,
}

impl Exact<'_> {
    fn try_assign(&mut self, f: usize, u: usize, v: usize) -> bool {
        let st = &self.forests[f];
        if st.deg[u] >= 2 || st.deg[v] >= 2 {
            return false;
        }
        let (a, b) = (st.end[u], st.end[v]);
        if a == v {
            return false; // closes a cycle
        }
        let new_len = st.len[u] + st.len[v] + 1;
        if new_len > self.bound[f] {
            return false;
        }
        let st = &mut self.forests[f];
        for x in [u, v] {
            self.trail.push(Undo::Deg(f, x));
            st.deg[x] += 1;
        }
        for x in [a, b] {
            self.trail.push(Undo::End(f, x, st.end[x], st.len[x]));
        }
        st.end[a] = b;
        st.end[b] = a;
        st.len[a] = new_len;
        st.len[b] = new_len;
        true
    }

    fn undo_to(&mut self, mark: usize) {
        while self.trail.len() > mark {
            match self.trail.pop().unwrap() {
                Undo::Deg(f, x) => self.forests[f].deg[x] -= 1,
                Undo::End(f, x, e, l) => {
                    self.forests[f].end[x] = e;
                    self.forests[f].len[x] = l;
                }
            }
        }
    }

    /// `Some(true)` found, `Some(false)` exhausted subtree, `None` out of budget.
    fn search(&mut self, k: usize, symmetric: bool) -> Option<bool> {
        if k == self.edges.len() {
            return Some(true);
        }
        self.nodes += 1;
        if self.nodes > self.budget {
            return None;
        }
        let (u, v) = self.edges[k];
        let choices: &[usize] = if symmetric && k == 0 { &[0] } else { &[0, 1] };
        for &f in choices {
            let mark = self.trail.len();
            if self.try_assign(f, u, v) {
                self.assignment[k] = f as u8;
                match self.search(k + 1, symmetric) {
                    Some(false) => {}
                    other => return other,
                }
                self.undo_to(mark);
            }
        }
        Some(false)
    }
}

/// Exhaustive search for an edge partition into linear forests with path
/// lengths at most `l1` (F1) and `l2` (F2). `budget` caps the number of search
/// nodes; running out is reported separately from proven infeasibility.
pub fn thomassen_decompose(g: &Graph, l1: usize, l2: usize, budget: u64) -> SearchOutcome {
    let n = g.order();
    let edges = bfs_edge_order(g);
    let mut ex = Exact {
        edges: &edges,
        bound: [l1, l2],
        forests: [ForestState::new(n), ForestState::new(n)],
        assignment: vec![0; edges.len()],
        trail: Vec::new(),
        nodes: 0,
        budget,
    };
    match ex.search(0, l1 == l2) {
        Some(true) => {
            let (mut f1, mut f2) = (Vec::new(), Vec::new());
            for (k, &e) in edges.iter().enumerate() {
                if ex.assignment[k] == 0 { f1.push(e) } else { f2.push(e) }
            }
            SearchOutcome::Found(LinearForestPair::new(n, f1, f2))
        }
        Some(false) => SearchOutcome::Infeasible,
        None => SearchOutcome::BudgetExhausted { nodes: ex.nodes },
    }
}

// ----------------------------------------------------------------------------
// Heuristic
// ----------------------------------------------------------------------------

#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct HeuristicConfig {
    pub restarts: usize,
    /// Local-search moves per restart, as a multiple of the vertex count (at least 1000).
    pub moves_per_vertex: usize,
    /// Largest F1 bound tried when the requested one keeps failing.
    pub relax_l1_up_to: usize,
}

impl Default for HeuristicConfig {
    fn default() -> Self {
        HeuristicConfig { restarts: 4, moves_per_vertex: 4, relax_l1_up_to: 64 }
    }
}

#[derive(Clone, Debug, PartialEq, Eq, Error)]
pub enum DecomposeError {
    #[error("graph is not cubic (vertex {0} has degree {1})")]
    NotCubic(usize, usize),
    #[error("no decomposition with F2 paths of length <= {l2} found (F1 bound relaxed up to {l1})")]
    GaveUp { l1: usize, l2: usize },
}

/// Randomised decomposition for large cubic graphs. Tries `l1` first; after
/// `config.restarts` failures the F1 bound is doubled (F2's bound is never
/// relaxed). The returned pair always satisfies `validate` for the bounds it
/// reports through [`LinearForestPair::max_len`].
pub fn heuristic_decompose(
    g: &Graph,
    l1: usize,
    l2: usize,
    seed: u64,
    config: &HeuristicConfig,
) -> Result<LinearForestPair, DecomposeError> {
    if let Some(v) = (0..g.order()).find(|&v| g.degree(v) != 3) {
        return Err(DecomposeError::NotCubic(v, g.degree(v)));
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut bound1 = l1.max(1);
    loop {
        for _ in 0..config.restarts.max(1) {
            if let Some(pair) = attempt(g, bound1, l2, &mut rng, config) {
                debug_assert!(validate(g, &pair, bound1, l2).is_ok());
                return Ok(pair);
            }
        }
        if bound1 >= config.relax_l1_up_to {
            return Err(DecomposeError::GaveUp { l1: bound1, l2 });
        }
        bound1 = (bound1 * 2).min(config.relax_l1_up_to);
    }
}

/// Karp–Sipser style maximal matching followed by short augmenting paths.
fn near_perfect_matching(g: &Graph, rng: &mut ChaCha8Rng) -> Vec<usize> {
    let n = g.order();
    let mut mate = vec![NONE; n];
    let mut free_deg: Vec<usize> = (0..n).map(|v| g.degree(v)).collect();
    let mut ones: Vec<usize> = Vec::new();
    let mut order: Vec<usize> = (0..n).collect();
    order.shuffle(rng);
    let mut cursor = 0;
    let match_pair = |a: usize, b: usize, mate: &mut Vec<usize>, free_deg: &mut Vec<usize>, ones: &mut Vec<usize>| {
        mate[a] = b;
        mate[b] = a;
        for x in [a, b] {
            for &y in g.neighbors(x) {
                if mate[y] == NONE {
                    free_deg[y] -= 1;
                    if free_deg[y] == 1 {
                        ones.push(y);
                    }
                }
            }
        }
    };
    loop {
        let v = if let Some(v) = ones.pop() {
            v
        } else {
            while cursor < n && (mate[order[cursor]] != NONE || free_deg[order[cursor]] == 0) {
                cursor += 1;
            }
            if cursor == n {
                break;
            }
            order[cursor]
        };
        if mate[v] != NONE || free_deg[v] == 0 {
            continue;
        }
        let free: Vec<usize> = g.neighbors(v).iter().copied().filter(|&w| mate[w] == NONE).collect();
        let w = *free.choose(rng).expect("free_deg counts free neighbours");
        match_pair(v, w, &mut mate, &mut free_deg, &mut ones);
    }
    // augmenting paths by alternating BFS (blossoms ignored; paths are rechecked)
    for s in 0..n {
        if mate[s] != NONE {
            continue;
        }
        let mut parent: HashMap<usize, usize> = HashMap::from([(s, NONE)]);
        let mut queue = VecDeque::from([s]);
        let mut found = NONE;
        'bfs: while let Some(x) = queue.pop_front() {
            if parent.len() > 4096 {
                break;
            }
            for &y in g.neighbors(x) {
                if parent.contains_key(&y) || y == mate[x] {
                    continue;
                }
                if mate[y] == NONE {
                    parent.insert(y, x);
                    found = y;
                    break 'bfs;
                }
                let z = mate[y];
                if parent.contains_key(&z) {
                    continue;
                }
                parent.insert(y, x);
                parent.insert(z, y);
                queue.push_back(z);
            }
        }
        if found == NONE {
            continue;
        }
        let mut path = vec![found];
        let mut cur = found;
        while parent[&cur] != NONE {
            cur = parent[&cur];
            path.push(cur);
        }
        let distinct: std::collections::HashSet<_> = path.iter().collect();
        if distinct.len() != path.len() || path.len() % 2 != 0 {
            continue;
        }
        for pair in path.chunks(2) {
            mate[pair[0]] = pair[1];
            mate[pair[1]] = pair[0];
        }
    }
    mate
}

struct Repair<'a> {
    g: &'a Graph,
    l1: usize,
    l2: usize,
    /// Base F2 neighbours (matching edges and attachment edges).
    base: Vec<[usize; 2]>,
    base_deg: Vec<u8>,
    /// C = G - base, a disjoint union of paths and cycles.
    c_nb: Vec<[usize; 2]>,
    c_deg: Vec<u8>,
    /// X partner of a vertex (edges moved from C into F2).
    x: Vec<usize>,
}

const CYCLE_PENALTY: usize = 64;
/// Candidate toggles scored per move.
const CANDIDATE_SAMPLE: usize = 16;

impl Repair<'_> {
    fn eligible(&self, u: usize, v: usize) -> bool {
        self.base_deg[u] == 1 && self.base_deg[v] == 1 && self.x[u] == NONE && self.x[v] == NONE
    }

    fn f2_neighbors(&self, v: usize) -> impl Iterator<Item = usize> + '_ {
        let b = self.base[v];
        let k = self.base_deg[v] as usize;
        b.into_iter().take(k).chain((self.x[v] != NONE).then_some(self.x[v]))
    }

    fn c_other(&self, v: usize, from: usize) -> usize {
        let nb = self.c_nb[v];
        match self.c_deg[v] {
            2 if nb[0] == from => nb[1],
            2 => nb[0],
            1 if nb[0] != from => nb[0],
            _ => NONE,
        }
    }

    fn in_f1(&self, u: usize, v: usize) -> bool {
        self.x[u] != v
    }

    /// F1 run (maximal run of C edges not in X) through the C edge `uv`:
    /// returns (smallest vertex, cost). An uncut cycle costs extra.
    fn f1_run(&self, u: usize, v: usize) -> (usize, usize) {
        let mut len = 1;
        let mut id = u.min(v);
        let (mut prev, mut cur) = (u, v);
        loop {
            let next = self.c_other(cur, prev);
            if next == NONE || !self.in_f1(cur, next) {
                break;
            }
            if next == u {
                return (id, CYCLE_PENALTY + len + 1);
            }
            len += 1;
            id = id.min(next);
            prev = cur;
            cur = next;
        }
        let (mut prev, mut cur) = (v, u);
        loop {
            let next = self.c_other(cur, prev);
            if next == NONE || !self.in_f1(cur, next) {
                break;
            }
            len += 1;
            id = id.min(next);
            prev = cur;
            cur = next;
        }
        (id, len.saturating_sub(self.l1))
    }

    /// F2 component through `v`: (canonical id, cost).
    fn f2_comp(&self, v: usize) -> (usize, usize) {
        let nbs: Vec<usize> = self.f2_neighbors(v).collect();
        let mut id = v;
        let mut len = 0;
        for &first in &nbs {
            let (mut prev, mut cur) = (v, first);
            len += 1;
            loop {
                id = id.min(cur);
                if cur == v {
                    return (id, CYCLE_PENALTY + len);
                }
                let next = self.f2_neighbors(cur).find(|&w| w != prev);
                match next {
                    Some(w) => {
                        len += 1;
                        prev = cur;
                        cur = w;
                    }
                    None => break,
                }
                if len > self.l2 + 8 {
                    return (id, len - self.l2);
                }
            }
        }
        (id, len.saturating_sub(self.l2))
    }

    /// Total cost of every structure touching the given vertices.
    fn local_cost(&self, vertices: &[usize]) -> usize {
        let mut seen: HashMap<(u8, usize), usize> = HashMap::new();
        for &v in vertices {
            let (id, c) = self.f2_comp(v);
            seen.insert((0, id), c);
            for k in 0..self.c_deg[v] as usize {
                let w = self.c_nb[v][k];
                if self.in_f1(v, w) {
                    let (id, c) = self.f1_run(v, w);
                    seen.insert((1, id), c);
                }
            }
        }
        seen.values().sum()
    }

    fn toggle(&mut self, u: usize, v: usize) {
        if self.x[u] == v {
            self.x[u] = NONE;
            self.x[v] = NONE;
        } else {
            self.x[u] = v;
            self.x[v] = u;
        }
    }

    fn touched(&self, u: usize, v: usize) -> Vec<usize> {
        let mut t = vec![u, v];
        for x in [u, v] {
            t.extend(self.c_nb[x].iter().take(self.c_deg[x] as usize));
            t.extend(self.f2_neighbors(x));
        }
        t
    }

    /// Whether `v` lies on an over-long F1 run or F2 component.
    fn violated_at(&self, v: usize) -> bool {
        if self.f2_comp(v).1 > 0 {
            return true;
        }
        (0..self.c_deg[v] as usize).any(|k| {
            let w = self.c_nb[v][k];
            self.in_f1(v, w) && self.f1_run(v, w).1 > 0
        })
    }

    fn violated_vertices(&self) -> Vec<usize> {
        let n = self.g.order();
        let mut out = Vec::new();
        for v in 0..n {
            let (id, c) = self.f2_comp(v);
            if c > 0 && id == v {
                out.push(v);
            }
            for k in 0..self.c_deg[v] as usize {
                let w = self.c_nb[v][k];
                if v < w && self.in_f1(v, w) {
                    let (id, c) = self.f1_run(v, w);
                    if c > 0 && id == v.min(w) {
                        out.push(v);
                    }
                }
            }
        }
        out
    }

    /// Candidate toggles around a violated structure containing `v`.
    fn candidates(&self, v: usize) -> Vec<(usize, usize)> {
        let mut around = vec![v];
        // collect vertices of the F1 run(s) and F2 component through v
        let mut frontier = vec![v];
        let mut seen = std::collections::HashSet::from([v]);
        let cap = 4 * (self.l1 + self.l2 + 4);
        while let Some(x) = frontier.pop() {
            if seen.len() > cap {
                break;
            }
            let mut nb: Vec<usize> = self.f2_neighbors(x).collect();
            for k in 0..self.c_deg[x] as usize {
                let w = self.c_nb[x][k];
                if self.in_f1(x, w) {
                    nb.push(w);
                }
            }
            for w in nb {
                if seen.insert(w) {
                    around.push(w);
                    frontier.push(w);
                }
            }
        }
        let mut cands = Vec::new();
        for &x in &around {
            for k in 0..self.c_deg[x] as usize {
                let w = self.c_nb[x][k];
                if x < w && (self.x[x] == w || self.eligible(x, w)) {
                    cands.push((x, w));
                }
            }
        }
        cands
    }
}

/// Vertex sequences of the components of C (paths first from an end, then
/// cycles from a random vertex); the flag marks cycles.
fn c_components(st: &Repair<'_>, rng: &mut ChaCha8Rng) -> Vec<(Vec<usize>, bool)> {
    let n = st.g.order();
    let mut seen = vec![false; n];
    let mut out = Vec::new();
    let mut starts: Vec<usize> = (0..n).filter(|&v| st.c_deg[v] == 1).collect();
    let mut rest: Vec<usize> = (0..n).collect();
    rest.shuffle(rng);
    starts.extend(rest);
    for s in starts {
        if seen[s] || st.c_deg[s] == 0 {
            continue;
        }
        let closed = st.c_deg[s] == 2;
        let mut seq = vec![s];
        seen[s] = true;
        let (mut prev, mut cur) = (NONE, s);
        loop {
            let next = if prev == NONE { st.c_nb[cur][0] } else { st.c_other(cur, prev) };
            if next == NONE || seen[next] {
                break;
            }
            seen[next] = true;
            seq.push(next);
            prev = cur;
            cur = next;
        }
        out.push((seq, closed));
    }
    out
}

fn attempt(g: &Graph, l1: usize, l2: usize, rng: &mut ChaCha8Rng, config: &HeuristicConfig) -> Option<LinearForestPair> {
    let n = g.order();
    let mate = near_perfect_matching(g, rng);
    let mut base = vec![[NONE; 2]; n];
    let mut base_deg = vec![0u8; n];
    let add_base = |u: usize, v: usize, base: &mut Vec<[usize; 2]>, deg: &mut Vec<u8>| {
        base[u][deg[u] as usize] = v;
        deg[u] += 1;
        base[v][deg[v] as usize] = u;
        deg[v] += 1;
    };
    for v in 0..n {
        if mate[v] != NONE && v < mate[v] {
            add_base(v, mate[v], &mut base, &mut base_deg);
        }
    }
    for w in 0..n {
        if mate[w] != NONE {
            continue;
        }
        let cands: Vec<usize> = g.neighbors(w).iter().copied().filter(|&a| base_deg[a] == 1).collect();
        let a = *cands.choose(rng)?;
        add_base(w, a, &mut base, &mut base_deg);
    }
    let mut c_nb = vec![[NONE; 2]; n];
    let mut c_deg = vec![0u8; n];
    for (u, v) in g.edges() {
        if base[u][..base_deg[u] as usize].contains(&v) {
            continue;
        }
        for (a, b) in [(u, v), (v, u)] {
            if c_deg[a] >= 2 {
                return None;
            }
            c_nb[a][c_deg[a] as usize] = b;
            c_deg[a] += 1;
        }
    }
    let mut st = Repair { g, l1, l2, base, base_deg, c_nb, c_deg, x: vec![NONE; n] };

    // greedy initial cut: walk every C component and cut when the run gets long
    for (seq, closed) in c_components(&st, rng) {
        let m = seq.len();
        let edge_count = if closed { m } else { m - 1 };
        let mut run = 0usize;
        let mut target = rng.gen_range(l1.div_ceil(2).max(1)..=l1);
        for k in 0..edge_count {
            let (a, b) = (seq[k], seq[(k + 1) % m]);
            if run + 1 >= target && st.eligible(a, b) {
                st.toggle(a, b);
                if st.f2_comp(a).1 > 0 {
                    st.toggle(a, b);
                    run += 1;
                } else {
                    run = 0;
                    target = rng.gen_range(l1.div_ceil(2).max(1)..=l1);
                }
            } else {
                run += 1;
            }
        }
    }

    // min-conflicts repair over a worklist; only structures through the
    // vertices a move touched are rechecked
    let max_moves = (config.moves_per_vertex * n).max(1000);
    let mut moves = 0;
    let mut queued = vec![false; n];
    loop {
        let mut bad = st.violated_vertices();
        if bad.is_empty() {
            break;
        }
        bad.shuffle(rng);
        let mut work: VecDeque<usize> = bad.into_iter().collect();
        for &v in &work {
            queued[v] = true;
        }
        while let Some(v) = work.pop_front() {
            queued[v] = false;
            if !st.violated_at(v) {
                continue;
            }
            if moves >= max_moves {
                return None;
            }
            let mut cands = st.candidates(v);
            if cands.is_empty() {
                continue;
            }
            if cands.len() > CANDIDATE_SAMPLE {
                cands = cands.partial_shuffle(rng, CANDIDATE_SAMPLE).0.to_vec();
            }
            moves += 1;
            let pick = if rng.gen_bool(0.1) {
                *cands.choose(rng).unwrap()
            } else {
                let mut best = (i64::MAX, 0u64, cands[0]);
                for &(a, b) in &cands {
                    let mut all = st.touched(a, b);
                    st.toggle(a, b);
                    all.extend(st.touched(a, b));
                    let after = st.local_cost(&all) as i64;
                    st.toggle(a, b);
                    let delta = after - st.local_cost(&all) as i64;
                    let tie: u64 = rng.gen();
                    if (delta, tie) < (best.0, best.1) {
                        best = (delta, tie, (a, b));
                    }
                }
                best.2
            };
            let mut all = st.touched(pick.0, pick.1);
            st.toggle(pick.0, pick.1);
            all.extend(st.touched(pick.0, pick.1));
            all.push(v);
            for x in all {
                if !queued[x] && st.violated_at(x) {
                    queued[x] = true;
                    work.push_back(x);
                }
            }
        }
    }

    let mut f1 = Vec::new();
    let mut f2 = Vec::new();
    for (u, v) in g.edges() {
        let in_base = st.base[u][..st.base_deg[u] as usize].contains(&v);
        if in_base || st.x[u] == v {
            f2.push((u, v));
        } else {
            f1.push((u, v));
        }
    }
    let pair = LinearForestPair::new(n, f1, f2);
    validate(g, &pair, l1, l2).ok().map(|_| pair)
}
