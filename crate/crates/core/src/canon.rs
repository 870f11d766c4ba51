//! Canonical forms for small graphs, optionally vertex-coloured.
//!
//! Paths and cycles get a two-byte form. Trees are encoded with the AHU code
//! rooted at their centre. Everything else goes through
//! individualisation-refinement: colour refinement to an equitable partition,
//! branching on the first smallest non-singleton cell, and pruning siblings that
//! lie in one orbit of the automorphisms found so far that fix the current
//! prefix. The canonical leaf is the lexicographically smallest certificate.

use std::cmp::Ordering;
use std::fmt;

use serde::{Deserialize, Deserializer, Serialize, Serializer};
use thiserror::Error;

use crate::graph::{SmallGraph, SMALL_GRAPH_LIMIT};

const TAG_PATH: u8 = 1;
const TAG_CYCLE: u8 = 2;
const TAG_TREE: u8 = 3;
const TAG_GRAPH: u8 = 4;

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum CanonError {
    #[error("graph of order {0} exceeds the canonical form limit of {SMALL_GRAPH_LIMIT}")]
    TooLarge(usize),
    #[error("colour vector has length {found}, graph has order {order}")]
    ColourLength { found: usize, order: usize },
}

/// Byte string identifying a small (optionally coloured) graph up to isomorphism.
#[derive(Clone, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct CanonicalForm(Vec<u8>);

impl CanonicalForm {
    pub fn as_bytes(&self) -> &[u8] {
        &self.0
    }

    /// The form of the uncoloured path on `t` vertices.
    pub fn path(t: usize) -> Self {
        assert!((1..=SMALL_GRAPH_LIMIT).contains(&t));
        CanonicalForm(vec![TAG_PATH, t as u8])
    }

    pub fn cycle(n: usize) -> Self {
        assert!((3..=SMALL_GRAPH_LIMIT).contains(&n));
        CanonicalForm(vec![TAG_CYCLE, n as u8])
    }

    /// `Some(t)` when this is the form of `P_t`.
    pub fn path_order(&self) -> Option<usize> {
        match self.0.as_slice() {
            [TAG_PATH, t] => Some(*t as usize),
            _ => None,
        }
    }

    pub fn order(&self) -> usize {
        self.0[1] as usize
    }

    fn to_text(&self) -> String {
        match self.0.as_slice() {
            [TAG_PATH, t] => format!("P{t}"),
            [TAG_CYCLE, n] => format!("C{n}"),
            [tag, rest @ ..] => {
                let kind = if *tag == TAG_TREE { 'T' } else { 'G' };
                let hex: String = rest.iter().map(|b| format!("{b:02x}")).collect();
                format!("{kind}:{hex}")
            }
            [] => String::new(),
        }
    }

    fn from_text(s: &str) -> Option<Self> {
        if let Some(t) = s.strip_prefix('P') {
            return Some(CanonicalForm(vec![TAG_PATH, t.parse().ok()?]));
        }
        if let Some(n) = s.strip_prefix('C') {
            return Some(CanonicalForm(vec![TAG_CYCLE, n.parse().ok()?]));
        }
        let (tag, hex) = match s.split_once(':')? {
            ("T", h) => (TAG_TREE, h),
            ("G", h) => (TAG_GRAPH, h),
            _ => return None,
        };
        if hex.len() % 2 != 0 {
            return None;
        }
        let mut bytes = vec![tag];
        for i in (0..hex.len()).step_by(2) {
            bytes.push(u8::from_str_radix(&hex[i..i + 2], 16).ok()?);
        }
        Some(CanonicalForm(bytes))
    }
}

impl fmt::Display for CanonicalForm {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.to_text())
    }
}

impl fmt::Debug for CanonicalForm {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "CanonicalForm({})", self.to_text())
    }
}

impl Serialize for CanonicalForm {
    fn serialize<S: Serializer>(&self, s: S) -> Result<S::Ok, S::Error> {
        s.serialize_str(&self.to_text())
    }
}

impl<'de> Deserialize<'de> for CanonicalForm {
    fn deserialize<D: Deserializer<'de>>(d: D) -> Result<Self, D::Error> {
        let s = String::deserialize(d)?;
        CanonicalForm::from_text(&s).ok_or_else(|| serde::de::Error::custom(format!("bad canonical form {s:?}")))
    }
}

/// A canonical form together with a canonical labelling: `position[v]` is the
/// index of vertex `v` in the canonical graph. Two graphs with equal forms are
/// mapped onto each other by composing one labelling with the other's inverse.
#[derive(Clone, Debug)]
pub struct Labeling {
    pub form: CanonicalForm,
    pub position: Vec<usize>,
}

impl Labeling {
    pub fn inverse(&self) -> Vec<usize> {
        let mut inv = vec![0; self.position.len()];
        for (v, &p) in self.position.iter().enumerate() {
            inv[p] = v;
        }
        inv
    }
}

pub fn canonical_form(h: &SmallGraph) -> CanonicalForm {
    canonical_labeling(h, None).expect("SmallGraph respects the size limit").form
}

/// Canonical labelling of `h`, with optional vertex colours (small integers).
pub fn canonical_labeling(h: &SmallGraph, colours: Option<&[u8]>) -> Result<Labeling, CanonError> {
    labeling_from_bits(h.bits(), colours)
}

/// Same as [`canonical_labeling`] on raw neighbourhood bitsets; works for any
/// simple graph up to the size limit, not only subcubic ones.
pub fn labeling_from_bits(adj: &[u64], colours: Option<&[u8]>) -> Result<Labeling, CanonError> {
    let n = adj.len();
    if n > SMALL_GRAPH_LIMIT {
        return Err(CanonError::TooLarge(n));
    }
    if let Some(c) = colours {
        if c.len() != n {
            return Err(CanonError::ColourLength { found: c.len(), order: n });
        }
    }
    let colours = colours.filter(|c| c.iter().any(|&x| x != c[0]));
    let edges: usize = adj.iter().map(|a| a.count_ones() as usize).sum::<usize>() / 2;
    let max_deg = adj.iter().map(|a| a.count_ones()).max().unwrap_or(0);
    let connected = is_connected(adj);

    if colours.is_none() && connected && max_deg <= 2 && n >= 1 {
        if edges + 1 == n {
            return Ok(Labeling { form: CanonicalForm::path(n), position: walk_order(adj, n) });
        }
        if edges == n && n >= 3 {
            return Ok(Labeling { form: CanonicalForm::cycle(n), position: walk_order(adj, n) });
        }
    }
    let zero = vec![0u8; n];
    let colours = colours.unwrap_or(&zero);
    if connected && n >= 1 && edges + 1 == n {
        return Ok(tree_labeling(adj, colours));
    }
    Ok(ir_labeling(adj, colours))
}

fn is_connected(adj: &[u64]) -> bool {
    let n = adj.len();
    if n == 0 {
        return false;
    }
    let all = if n == 64 { u64::MAX } else { (1u64 << n) - 1 };
    let mut seen = 1u64;
    let mut frontier = 1u64;
    while frontier != 0 {
        let mut next = 0u64;
        let mut f = frontier;
        while f != 0 {
            let v = f.trailing_zeros() as usize;
            f &= f - 1;
            next |= adj[v];
        }
        frontier = next & !seen;
        seen |= next;
    }
    seen == all
}

/// Positions along a path (from an endpoint) or around a cycle.
fn walk_order(adj: &[u64], n: usize) -> Vec<usize> {
    let start = (0..n).find(|&v| adj[v].count_ones() <= 1).unwrap_or(0);
    let mut position = vec![usize::MAX; n];
    let mut prev = usize::MAX;
    let mut cur = start;
    for k in 0..n {
        position[cur] = k;
        let mut nb = adj[cur];
        let mut next = usize::MAX;
        while nb != 0 {
            let w = nb.trailing_zeros() as usize;
            nb &= nb - 1;
            if w != prev && position[w] == usize::MAX {
                next = w;
                break;
            }
        }
        prev = cur;
        cur = next;
        if cur == usize::MAX {
            break;
        }
    }
    position
}

// ----------------------------------------------------------------------------
// Trees: AHU encoding rooted at the centre
// ----------------------------------------------------------------------------

fn tree_labeling(adj: &[u64], colours: &[u8]) -> Labeling {
    let n = adj.len();
    let centres = tree_centres(adj);
    let code = |root: usize, avoid: usize| ahu_code(adj, colours, root, avoid);
    let (roots, mut form) = match centres.as_slice() {
        [c] => (vec![*c], code(*c, usize::MAX)),
        [a, b] => {
            let (ca, cb) = (code(*a, *b), code(*b, *a));
            if ca <= cb {
                let mut f = ca;
                f.extend(cb);
                (vec![*a, *b], f)
            } else {
                let mut f = cb;
                f.extend(ca);
                (vec![*b, *a], f)
            }
        }
        _ => unreachable!("a tree has one or two centres"),
    };
    let mut position = vec![usize::MAX; n];
    let mut next = 0;
    let avoid = if roots.len() == 2 { [roots[1], roots[0]] } else { [usize::MAX, usize::MAX] };
    for (k, &r) in roots.iter().enumerate() {
        preorder(adj, colours, r, avoid[k], &mut position, &mut next);
    }
    form.insert(0, n as u8);
    form.insert(0, TAG_TREE);
    Labeling { form: CanonicalForm(form), position }
}

fn tree_centres(adj: &[u64]) -> Vec<usize> {
    let n = adj.len();
    if n <= 2 {
        return (0..n).collect();
    }
    let mut deg: Vec<u32> = adj.iter().map(|a| a.count_ones()).collect();
    let mut alive = n;
    let mut leaves: Vec<usize> = (0..n).filter(|&v| deg[v] <= 1).collect();
    let mut removed = vec![false; n];
    while alive > 2 {
        let mut next = Vec::new();
        for &l in &leaves {
            removed[l] = true;
            alive -= 1;
        }
        for &l in &leaves {
            let mut nb = adj[l];
            while nb != 0 {
                let w = nb.trailing_zeros() as usize;
                nb &= nb - 1;
                if !removed[w] {
                    deg[w] -= 1;
                    if deg[w] == 1 {
                        next.push(w);
                    }
                }
            }
        }
        leaves = next;
    }
    (0..n).filter(|&v| !removed[v]).collect()
}

fn children(adj: &[u64], v: usize, parent: usize) -> Vec<usize> {
    let mut out = Vec::new();
    let mut nb = adj[v];
    while nb != 0 {
        let w = nb.trailing_zeros() as usize;
        nb &= nb - 1;
        if w != parent {
            out.push(w);
        }
    }
    out
}

fn ahu_code(adj: &[u64], colours: &[u8], v: usize, parent: usize) -> Vec<u8> {
    let mut kids: Vec<Vec<u8>> =
        children(adj, v, parent).into_iter().map(|w| ahu_code(adj, colours, w, v)).collect();
    kids.sort();
    let mut code = Vec::with_capacity(2 + kids.iter().map(Vec::len).sum::<usize>() + 1);
    code.push(b'(');
    code.push(colours[v]);
    for k in kids {
        code.extend(k);
    }
    code.push(b')');
    code
}

fn preorder(adj: &[u64], colours: &[u8], v: usize, parent: usize, position: &mut [usize], next: &mut usize) {
    position[v] = *next;
    *next += 1;
    let mut kids: Vec<(Vec<u8>, usize)> = children(adj, v, parent)
        .into_iter()
        .map(|w| (ahu_code(adj, colours, w, v), w))
        .collect();
    kids.sort();
    for (_, w) in kids {
        preorder(adj, colours, w, v, position, next);
    }
}

// ----------------------------------------------------------------------------
// General graphs: individualisation-refinement
// ----------------------------------------------------------------------------

type Cells = Vec<Vec<usize>>;

fn initial_partition(adj: &[u64], colours: &[u8]) -> Cells {
    let mut keyed: Vec<((u8, u32), usize)> =
        (0..adj.len()).map(|v| ((colours[v], adj[v].count_ones()), v)).collect();
    keyed.sort();
    let mut cells: Cells = Vec::new();
    let mut last = None;
    for (k, v) in keyed {
        if last != Some(k) {
            cells.push(Vec::new());
            last = Some(k);
        }
        cells.last_mut().unwrap().push(v);
    }
    cells
}

fn refine(adj: &[u64], mut cells: Cells) -> Cells {
    loop {
        let masks: Vec<u64> = cells.iter().map(|c| c.iter().fold(0u64, |m, &v| m | 1 << v)).collect();
        let mut out: Cells = Vec::with_capacity(cells.len());
        for cell in &cells {
            if cell.len() == 1 {
                out.push(cell.clone());
                continue;
            }
            let mut keyed: Vec<(Vec<u32>, usize)> = cell
                .iter()
                .map(|&v| (masks.iter().map(|m| (adj[v] & m).count_ones()).collect(), v))
                .collect();
            keyed.sort();
            let mut start = 0;
            for i in 1..=keyed.len() {
                if i == keyed.len() || keyed[i].0 != keyed[start].0 {
                    out.push(keyed[start..i].iter().map(|(_, v)| *v).collect());
                    start = i;
                }
            }
        }
        if out.len() == cells.len() {
            return out;
        }
        cells = out;
    }
}

fn certificate(adj: &[u64], colours: &[u8], position: &[usize]) -> Vec<u8> {
    let n = adj.len();
    let mut inv = vec![0; n];
    for (v, &p) in position.iter().enumerate() {
        inv[p] = v;
    }
    let mut cert = Vec::with_capacity(2 + n + n * n / 16);
    cert.push(TAG_GRAPH);
    cert.push(n as u8);
    cert.extend(inv.iter().map(|&v| colours[v]));
    let mut acc = 0u8;
    let mut filled = 0;
    for j in 1..n {
        for i in 0..j {
            acc = (acc << 1) | (adj[inv[i]] >> inv[j] & 1) as u8;
            filled += 1;
            if filled == 8 {
                cert.push(acc);
                acc = 0;
                filled = 0;
            }
        }
    }
    if filled > 0 {
        cert.push(acc << (8 - filled));
    }
    cert
}

struct Search<'a> {
    adj: &'a [u64],
    colours: &'a [u8],
    first: Option<(Vec<u8>, Vec<usize>)>,
    best: Option<(Vec<u8>, Vec<usize>)>,
    automorphisms: Vec<Vec<usize>>,
}

impl Search<'_> {
    fn leaf(&mut self, cells: &Cells) {
        let mut position = vec![0; self.adj.len()];
        for (i, c) in cells.iter().enumerate() {
            position[c[0]] = i;
        }
        let cert = certificate(self.adj, self.colours, &position);
        for reference in [&self.first, &self.best].into_iter().flatten() {
            if reference.0 == cert {
                // same labelled graph: position composed with the reference inverse is an automorphism
                let mut inv = vec![0; position.len()];
                for (v, &p) in reference.1.iter().enumerate() {
                    inv[p] = v;
                }
                let gamma: Vec<usize> = position.iter().map(|&p| inv[p]).collect();
                if gamma.iter().enumerate().any(|(v, &w)| v != w) && !self.automorphisms.contains(&gamma) {
                    self.automorphisms.push(gamma);
                }
                break;
            }
        }
        if self.first.is_none() {
            self.first = Some((cert.clone(), position.clone()));
        }
        match &self.best {
            Some((b, _)) if b.cmp(&cert) != Ordering::Greater => {}
            _ => self.best = Some((cert, position)),
        }
    }

    fn same_orbit(&self, prefix: &[usize], a: usize, b: usize) -> bool {
        let n = self.adj.len();
        let mut parent: Vec<usize> = (0..n).collect();
        fn find(p: &mut [usize], mut x: usize) -> usize {
            while p[x] != x {
                p[x] = p[p[x]];
                x = p[x];
            }
            x
        }
        for gamma in &self.automorphisms {
            if prefix.iter().any(|&v| gamma[v] != v) {
                continue;
            }
            for (v, &w) in gamma.iter().enumerate() {
                let (rv, rw) = (find(&mut parent, v), find(&mut parent, w));
                if rv != rw {
                    parent[rv] = rw;
                }
            }
        }
        find(&mut parent, a) == find(&mut parent, b)
    }

    fn descend(&mut self, cells: Cells, prefix: &mut Vec<usize>) {
        let cells = refine(self.adj, cells);
        let target = cells
            .iter()
            .enumerate()
            .filter(|(_, c)| c.len() > 1)
            .min_by_key(|(i, c)| (c.len(), *i))
            .map(|(i, _)| i);
        let Some(target) = target else {
            self.leaf(&cells);
            return;
        };
        let mut tried: Vec<usize> = Vec::new();
        for &v in &cells[target] {
            if tried.iter().any(|&u| self.same_orbit(prefix, u, v)) {
                continue;
            }
            tried.push(v);
            let mut next = Vec::with_capacity(cells.len() + 1);
            next.extend_from_slice(&cells[..target]);
            next.push(vec![v]);
            next.push(cells[target].iter().copied().filter(|&w| w != v).collect());
            next.extend_from_slice(&cells[target + 1..]);
            prefix.push(v);
            self.descend(next, prefix);
            prefix.pop();
        }
    }
}

fn ir_labeling(adj: &[u64], colours: &[u8]) -> Labeling {
    let n = adj.len();
    if n == 0 {
        return Labeling { form: CanonicalForm(vec![TAG_GRAPH, 0]), position: Vec::new() };
    }
    let mut search = Search { adj, colours, first: None, best: None, automorphisms: Vec::new() };
    search.descend(initial_partition(adj, colours), &mut Vec::new());
    let (cert, position) = search.best.expect("search reaches at least one leaf");
    Labeling { form: CanonicalForm(cert), position }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::graph::Graph;

    fn small(n: usize, edges: &[(usize, usize)]) -> SmallGraph {
        SmallGraph::from_edges(n, edges).unwrap()
    }

    fn relabel(g: &SmallGraph, perm: &[usize]) -> SmallGraph {
        let edges: Vec<_> = g.to_graph().edges().map(|(u, v)| (perm[u], perm[v])).collect();
        small(g.order(), &edges)
    }

    #[test]
    fn path_forms_are_relabelling_invariant() {
        let a = small(3, &[(0, 1), (1, 2)]);
        let b = small(3, &[(2, 0), (0, 1)]);
        assert_eq!(canonical_form(&a), canonical_form(&b));
        assert_eq!(canonical_form(&a).path_order(), Some(3));
    }

    #[test]
    fn distinguishes_small_graphs() {
        let p3 = small(3, &[(0, 1), (1, 2)]);
        let p1p2 = small(3, &[(1, 2)]);
        let k3 = small(3, &[(0, 1), (1, 2), (0, 2)]);
        assert_ne!(canonical_form(&p3), canonical_form(&p1p2));
        assert_ne!(canonical_form(&k3), canonical_form(&p3));
        assert_eq!(canonical_form(&k3), CanonicalForm::cycle(3));
    }

    #[test]
    fn text_round_trip() {
        let claw = small(4, &[(0, 1), (0, 2), (0, 3)]);
        let k4 = small(4, &[(0, 1), (0, 2), (0, 3), (1, 2), (1, 3), (2, 3)]);
        for f in [canonical_form(&claw), canonical_form(&k4), CanonicalForm::path(6), CanonicalForm::cycle(5)] {
            let json = serde_json::to_string(&f).unwrap();
            let back: CanonicalForm = serde_json::from_str(&json).unwrap();
            assert_eq!(back, f);
        }
    }

    #[test]
    fn labeling_gives_explicit_isomorphism() {
        let g = crate::fixtures::petersen();
        let sg = SmallGraph::from_graph(g.as_graph()).unwrap();
        let perm = [3, 7, 1, 9, 0, 2, 8, 4, 6, 5];
        let h = relabel(&sg, &perm);
        let la = canonical_labeling(&sg, None).unwrap();
        let lb = canonical_labeling(&h, None).unwrap();
        assert_eq!(la.form, lb.form);
        let inv_b = lb.inverse();
        let map: Vec<usize> = (0..10).map(|v| inv_b[la.position[v]]).collect();
        for (u, v) in sg.to_graph().edges() {
            assert!(h.has_edge(map[u], map[v]));
        }
    }

    #[test]
    fn coloured_forms_respect_colours() {
        let p3 = small(3, &[(0, 1), (1, 2)]);
        let end_red = canonical_labeling(&p3, Some(&[1, 0, 0])).unwrap().form;
        let other_end_red = canonical_labeling(&p3, Some(&[0, 0, 1])).unwrap().form;
        let mid_red = canonical_labeling(&p3, Some(&[0, 1, 0])).unwrap().form;
        assert_eq!(end_red, other_end_red);
        assert_ne!(end_red, mid_red);
    }

    #[test]
    fn symmetric_graphs_terminate_quickly() {
        // radius-4 tree ball of a cubic graph (46 vertices, huge automorphism group)
        let mut edges = Vec::new();
        let mut next = 1;
        let mut frontier = vec![0usize];
        for depth in 0..4 {
            let mut nf = Vec::new();
            for &v in &frontier {
                for _ in 0..if depth == 0 { 3 } else { 2 } {
                    edges.push((v, next));
                    nf.push(next);
                    next += 1;
                }
            }
            frontier = nf;
        }
        let tree = small(next, &edges);
        assert!(canonical_form(&tree).as_bytes()[0] == TAG_TREE);
        // the same ball with one extra edge between two leaves is no longer a tree
        let mut with_cycle = edges.clone();
        with_cycle.push((next - 1, next - 2));
        let g = small(next, &with_cycle);
        let f = canonical_form(&g);
        let perm: Vec<usize> = (0..next).rev().collect();
        assert_eq!(canonical_form(&relabel(&g, &perm)), f);
        // and the Foster graph's 2-ball plus prism products stay fast
        let cl = crate::fixtures::circular_ladder(16);
        let sg = SmallGraph::from_graph(cl.as_graph()).unwrap();
        let shifted: Vec<usize> = (0..32).map(|v| if v < 16 { (v + 5) % 16 } else { 16 + (v - 16 + 5) % 16 }).collect();
        assert_eq!(canonical_form(&sg), canonical_form(&relabel(&sg, &shifted)));
        let _ = Graph::empty(0);
    }
}
