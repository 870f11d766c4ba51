//! Simple undirected graphs, the validated cubic wrapper, bounded small graphs,
//! and the metric queries (balls, spheres, geodesics, girth) used throughout.

use std::collections::{HashMap, HashSet, VecDeque};
use std::fmt;
use std::ops::Deref;

use thiserror::Error;

/// Maximum order of a [`SmallGraph`]; components and balls beyond this are
/// never canonicalised.
pub const SMALL_GRAPH_LIMIT: usize = 64;

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum GraphError {
    #[error("vertex {vertex} out of range for graph of order {order}")]
    VertexOutOfRange { vertex: usize, order: usize },
    #[error("self-loop at vertex {0}")]
    SelfLoop(usize),
    #[error("repeated edge {0}-{1}")]
    MultiEdge(usize, usize),
    #[error("vertex {vertex} has degree {degree}, expected 3")]
    NotCubic { vertex: usize, degree: usize },
    #[error("cubic graphs need an even order of at least 4, got {0}")]
    BadCubicOrder(usize),
    #[error("small graph limited to {limit} vertices, got {order}")]
    TooLarge { order: usize, limit: usize },
    #[error("vertex {vertex} has degree {degree}; small graphs are subcubic")]
    NotSubcubic { vertex: usize, degree: usize },
}

/// A simple undirected graph on vertices `0..n` with sorted adjacency lists.
#[derive(Clone, PartialEq, Eq, Hash)]
pub struct Graph {
    adj: Vec<Vec<usize>>,
    edge_count: usize,
}

impl fmt::Debug for Graph {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "Graph(n={}, edges={:?})", self.order(), self.edges().collect::<Vec<_>>())
    }
}

impl Graph {
    pub fn empty(n: usize) -> Self {
        Graph { adj: vec![Vec::new(); n], edge_count: 0 }
    }

    /// Builds a graph from an edge list, rejecting loops and repeated edges.
    pub fn from_edges(n: usize, edges: &[(usize, usize)]) -> Result<Self, GraphError> {
        let mut g = Graph::empty(n);
        for &(u, v) in edges {
            g.add_edge(u, v)?;
        }
        Ok(g)
    }

    pub(crate) fn add_edge(&mut self, u: usize, v: usize) -> Result<(), GraphError> {
        let n = self.order();
        for w in [u, v] {
            if w >= n {
                return Err(GraphError::VertexOutOfRange { vertex: w, order: n });
            }
        }
        if u == v {
            return Err(GraphError::SelfLoop(u));
        }
        match self.adj[u].binary_search(&v) {
            Ok(_) => return Err(GraphError::MultiEdge(u.min(v), u.max(v))),
            Err(pos) => self.adj[u].insert(pos, v),
        }
        let pos = self.adj[v].binary_search(&u).unwrap_err();
        self.adj[v].insert(pos, u);
        self.edge_count += 1;
        Ok(())
    }

    #[inline]
    pub fn order(&self) -> usize {
        self.adj.len()
    }

    #[inline]
    pub fn size(&self) -> usize {
        self.edge_count
    }

    #[inline]
    pub fn neighbors(&self, v: usize) -> &[usize] {
        &self.adj[v]
    }

    #[inline]
    pub fn degree(&self, v: usize) -> usize {
        self.adj[v].len()
    }

    pub fn max_degree(&self) -> usize {
        self.adj.iter().map(Vec::len).max().unwrap_or(0)
    }

    #[inline]
    pub fn has_edge(&self, u: usize, v: usize) -> bool {
        self.adj[u].binary_search(&v).is_ok()
    }

    /// Edges as `(u, v)` with `u < v`, in lexicographic order.
    pub fn edges(&self) -> impl Iterator<Item = (usize, usize)> + '_ {
        self.adj
            .iter()
            .enumerate()
            .flat_map(|(u, ns)| ns.iter().filter(move |&&v| v > u).map(move |&v| (u, v)))
    }

    /// Induced subgraph on `vertices`; vertex `i` of the result is `vertices[i]`.
    pub fn induced(&self, vertices: &[usize]) -> Graph {
        let index: HashMap<usize, usize> =
            vertices.iter().enumerate().map(|(i, &v)| (v, i)).collect();
        let mut h = Graph::empty(vertices.len());
        for (i, &v) in vertices.iter().enumerate() {
            for &w in self.neighbors(v) {
                if let Some(&j) = index.get(&w) {
                    if i < j {
                        h.add_edge(i, j).expect("induced subgraph of a simple graph is simple");
                    }
                }
            }
        }
        h
    }

    /// Disjoint union, relabelling `other` after `self`.
    pub fn disjoint_union(&self, other: &Graph) -> Graph {
        let shift = self.order();
        let mut g = Graph::empty(shift + other.order());
        for (u, v) in self.edges() {
            g.add_edge(u, v).unwrap();
        }
        for (u, v) in other.edges() {
            g.add_edge(u + shift, v + shift).unwrap();
        }
        g
    }

    // ------------------------------------------------------------------
    // BFS and metric queries
    // ------------------------------------------------------------------

    /// BFS layers from a source set: `layers[k]` holds the vertices at distance
    /// exactly `k`, in deterministic discovery order.
    pub fn layers(&self, sources: &[usize], radius: usize) -> Vec<Vec<usize>> {
        let mut seen: HashSet<usize> = HashSet::with_capacity(sources.len() * 4);
        let mut first = Vec::new();
        for &s in sources {
            if seen.insert(s) {
                first.push(s);
            }
        }
        let mut layers = vec![first];
        while layers.len() <= radius {
            let mut next = Vec::new();
            for &u in layers.last().unwrap() {
                for &w in self.neighbors(u) {
                    if seen.insert(w) {
                        next.push(w);
                    }
                }
            }
            if next.is_empty() {
                break;
            }
            layers.push(next);
        }
        layers
    }

    /// `B_d(v)`, sorted.
    pub fn ball(&self, v: usize, d: usize) -> Vec<usize> {
        self.ball_of_set(&[v], d)
    }

    /// `B_d(X)`: vertices within distance `d` of the set, sorted.
    pub fn ball_of_set(&self, set: &[usize], d: usize) -> Vec<usize> {
        let mut out: Vec<usize> = self.layers(set, d).into_iter().flatten().collect();
        out.sort_unstable();
        out
    }

    /// `N^d(X)`: vertices at distance exactly `d` from the set, sorted.
    pub fn sphere(&self, set: &[usize], d: usize) -> Vec<usize> {
        let mut layers = self.layers(set, d);
        let mut out = if layers.len() > d { layers.swap_remove(d) } else { Vec::new() };
        out.sort_unstable();
        out
    }

    /// Distances from `source` up to `radius` (inclusive).
    pub fn distances_within(&self, source: usize, radius: usize) -> HashMap<usize, usize> {
        let mut dist = HashMap::new();
        for (k, layer) in self.layers(&[source], radius).into_iter().enumerate() {
            for v in layer {
                dist.insert(v, k);
            }
        }
        dist
    }

    /// Full single-source distance vector (`usize::MAX` for unreachable).
    pub fn distances_from(&self, sources: &[usize]) -> Vec<usize> {
        let mut dist = vec![usize::MAX; self.order()];
        let mut queue = VecDeque::new();
        for &s in sources {
            if dist[s] == usize::MAX {
                dist[s] = 0;
                queue.push_back(s);
            }
        }
        while let Some(u) = queue.pop_front() {
            for &w in self.neighbors(u) {
                if dist[w] == usize::MAX {
                    dist[w] = dist[u] + 1;
                    queue.push_back(w);
                }
            }
        }
        dist
    }

    pub fn distance(&self, u: usize, w: usize) -> Option<usize> {
        if u == w {
            return Some(0);
        }
        let mut seen = HashSet::from([u]);
        let mut frontier = vec![u];
        let mut k = 0;
        while !frontier.is_empty() {
            k += 1;
            let mut next = Vec::new();
            for &x in &frontier {
                for &y in self.neighbors(x) {
                    if y == w {
                        return Some(k);
                    }
                    if seen.insert(y) {
                        next.push(y);
                    }
                }
            }
            frontier = next;
        }
        None
    }

    /// Lexicographically smallest shortest `u`–`w` path, or `None` when the two
    /// vertices lie in different components.
    pub fn geodesic(&self, u: usize, w: usize) -> Option<Vec<usize>> {
        let len = self.distance(u, w)?;
        let to_w = self.distances_within(w, len);
        let mut path = Vec::with_capacity(len + 1);
        path.push(u);
        let mut cur = u;
        for k in (0..len).rev() {
            // neighbours are sorted, so the first hit is the smallest
            cur = *self
                .neighbors(cur)
                .iter()
                .find(|x| to_w.get(x) == Some(&k))
                .expect("BFS layers guarantee a predecessor");
            path.push(cur);
        }
        Some(path)
    }

    /// A geodesic of exactly `length` edges starting at `v` and lying inside
    /// `B_within(v)`; the endpoint is the smallest vertex at that distance.
    pub fn find_geodesic_of_length(&self, v: usize, length: usize, within: usize) -> Option<Vec<usize>> {
        if length > within {
            return None;
        }
        let layers = self.layers(&[v], length);
        let far = layers.get(length)?.iter().copied().min()?;
        self.geodesic(v, far)
    }

    /// True when `path` is a shortest path between its endpoints.
    pub fn is_geodesic(&self, path: &[usize]) -> bool {
        if path.is_empty() || !self.is_path(path) {
            return false;
        }
        self.distance(path[0], *path.last().unwrap()) == Some(path.len() - 1)
    }

    /// Consecutive vertices adjacent and all vertices distinct.
    pub fn is_path(&self, path: &[usize]) -> bool {
        let distinct: HashSet<_> = path.iter().collect();
        distinct.len() == path.len() && path.windows(2).all(|w| self.has_edge(w[0], w[1]))
    }

    /// A path whose only edges among its vertices are the consecutive ones.
    pub fn is_induced_path(&self, path: &[usize]) -> bool {
        if !self.is_path(path) {
            return false;
        }
        for i in 0..path.len() {
            for j in i + 2..path.len() {
                if self.has_edge(path[i], path[j]) {
                    return false;
                }
            }
        }
        true
    }

    /// Length of a shortest cycle, `None` for forests.
    pub fn girth(&self) -> Option<usize> {
        let n = self.order();
        let mut best = usize::MAX;
        let mut dist = vec![usize::MAX; n];
        let mut parent = vec![usize::MAX; n];
        let mut touched = Vec::new();
        for s in 0..n {
            let mut queue = VecDeque::from([s]);
            dist[s] = 0;
            touched.push(s);
            'bfs: while let Some(u) = queue.pop_front() {
                // no shorter cycle can be closed beyond this depth
                if 2 * dist[u] + 1 >= best {
                    break;
                }
                for &w in self.neighbors(u) {
                    if dist[w] == usize::MAX {
                        dist[w] = dist[u] + 1;
                        parent[w] = u;
                        touched.push(w);
                        queue.push_back(w);
                    } else if parent[u] != w {
                        best = best.min(dist[u] + dist[w] + 1);
                        if best == 3 {
                            break 'bfs;
                        }
                    }
                }
            }
            for &t in &touched {
                dist[t] = usize::MAX;
                parent[t] = usize::MAX;
            }
            touched.clear();
            if best == 3 {
                break;
            }
        }
        (best != usize::MAX).then_some(best)
    }

    /// Connected components, each sorted, ordered by smallest vertex.
    pub fn components(&self) -> Vec<Vec<usize>> {
        let n = self.order();
        let mut seen = vec![false; n];
        let mut out = Vec::new();
        for s in 0..n {
            if seen[s] {
                continue;
            }
            seen[s] = true;
            let mut comp = vec![s];
            let mut i = 0;
            while i < comp.len() {
                let u = comp[i];
                i += 1;
                for &w in self.neighbors(u) {
                    if !seen[w] {
                        seen[w] = true;
                        comp.push(w);
                    }
                }
            }
            comp.sort_unstable();
            out.push(comp);
        }
        out
    }

    pub fn is_connected(&self) -> bool {
        self.order() == 0 || self.components().len() == 1
    }

    pub fn diameter(&self) -> Option<usize> {
        let mut best = 0;
        for v in 0..self.order() {
            let d = self.distances_from(&[v]);
            let m = *d.iter().max()?;
            if m == usize::MAX {
                return None;
            }
            best = best.max(m);
        }
        Some(best)
    }

    /// Graphviz rendering; `labels` optionally attaches a fill colour per vertex.
    pub fn to_dot(&self, fill: Option<&dyn Fn(usize) -> &'static str>) -> String {
        let mut s = String::from("graph G {\n");
        if let Some(fill) = fill {
            for v in 0..self.order() {
                s.push_str(&format!("  {v} [style=filled, fillcolor={}];\n", fill(v)));
            }
        }
        for (u, v) in self.edges() {
            s.push_str(&format!("  {u} -- {v};\n"));
        }
        s.push_str("}\n");
        s
    }
}

/// An immutable simple 3-regular graph.
#[derive(Clone, PartialEq, Eq, Hash, Debug)]
pub struct CubicGraph(Graph);

impl CubicGraph {
    pub fn new(g: Graph) -> Result<Self, GraphError> {
        let n = g.order();
        if n < 4 || n % 2 == 1 {
            return Err(GraphError::BadCubicOrder(n));
        }
        if let Some(v) = (0..n).find(|&v| g.degree(v) != 3) {
            return Err(GraphError::NotCubic { vertex: v, degree: g.degree(v) });
        }
        Ok(CubicGraph(g))
    }

    pub fn from_edges(n: usize, edges: &[(usize, usize)]) -> Result<Self, GraphError> {
        CubicGraph::new(Graph::from_edges(n, edges)?)
    }

    pub fn as_graph(&self) -> &Graph {
        &self.0
    }

    pub fn into_graph(self) -> Graph {
        self.0
    }

    /// Each connected component as its own cubic graph, with the original
    /// vertex ids of every component.
    pub fn split_components(&self) -> Vec<(CubicGraph, Vec<usize>)> {
        self.0
            .components()
            .into_iter()
            .map(|comp| {
                let h = self.0.induced(&comp);
                (CubicGraph(h), comp)
            })
            .collect()
    }
}

impl Deref for CubicGraph {
    type Target = Graph;
    fn deref(&self) -> &Graph {
        &self.0
    }
}

impl TryFrom<Graph> for CubicGraph {
    type Error = GraphError;
    fn try_from(g: Graph) -> Result<Self, GraphError> {
        CubicGraph::new(g)
    }
}

/// A subcubic graph on at most [`SMALL_GRAPH_LIMIT`] vertices, stored as
/// neighbourhood bitsets. Houses balls, components and reducer regions.
#[derive(Clone, PartialEq, Eq, Hash, Debug)]
pub struct SmallGraph {
    adj: Vec<u64>,
}

impl SmallGraph {
    pub fn from_graph(g: &Graph) -> Result<Self, GraphError> {
        let n = g.order();
        if n > SMALL_GRAPH_LIMIT {
            return Err(GraphError::TooLarge { order: n, limit: SMALL_GRAPH_LIMIT });
        }
        let mut adj = vec![0u64; n];
        for v in 0..n {
            if g.degree(v) > 3 {
                return Err(GraphError::NotSubcubic { vertex: v, degree: g.degree(v) });
            }
            for &w in g.neighbors(v) {
                adj[v] |= 1 << w;
            }
        }
        Ok(SmallGraph { adj })
    }

    pub fn from_edges(n: usize, edges: &[(usize, usize)]) -> Result<Self, GraphError> {
        SmallGraph::from_graph(&Graph::from_edges(n, edges)?)
    }

    /// Induced subgraph of `g` on `vertices` (vertex `i` is `vertices[i]`).
    pub fn induced(g: &Graph, vertices: &[usize]) -> Result<Self, GraphError> {
        if vertices.len() > SMALL_GRAPH_LIMIT {
            return Err(GraphError::TooLarge { order: vertices.len(), limit: SMALL_GRAPH_LIMIT });
        }
        SmallGraph::from_graph(&g.induced(vertices))
    }

    #[inline]
    pub fn order(&self) -> usize {
        self.adj.len()
    }

    #[inline]
    pub fn bits(&self) -> &[u64] {
        &self.adj
    }

    #[inline]
    pub fn has_edge(&self, u: usize, v: usize) -> bool {
        self.adj[u] >> v & 1 == 1
    }

    pub fn degree(&self, v: usize) -> usize {
        self.adj[v].count_ones() as usize
    }

    pub fn size(&self) -> usize {
        self.adj.iter().map(|a| a.count_ones() as usize).sum::<usize>() / 2
    }

    pub fn to_graph(&self) -> Graph {
        let mut g = Graph::empty(self.order());
        for u in 0..self.order() {
            let mut rest = self.adj[u] >> u >> 1;
            let mut v = u + 1;
            while rest != 0 {
                if rest & 1 == 1 {
                    g.add_edge(u, v).unwrap();
                }
                rest >>= 1;
                v += 1;
            }
        }
        g
    }
}
