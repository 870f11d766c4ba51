//! Monochromatic component censuses: components of the subgraph induced by one
//! colour class, counted by isomorphism type.

use std::collections::BTreeMap;
use std::fmt;

use serde::ser::SerializeMap;
use serde::{Serialize, Serializer};

use crate::canon::{labeling_from_bits, CanonicalForm};
use crate::coloring::{Color, VertexColoring};
use crate::graph::{Graph, SMALL_GRAPH_LIMIT};

/// Isomorphism class of a component. Components beyond the canonical-form
/// limit are kept under an explicit sentinel carrying their order and size.
#[derive(Clone, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum CensusKey {
    Form(CanonicalForm),
    Oversized { order: usize, size: usize },
}

impl CensusKey {
    pub fn path(t: usize) -> Self {
        CensusKey::Form(CanonicalForm::path(t))
    }

    pub fn path_order(&self) -> Option<usize> {
        match self {
            CensusKey::Form(f) => f.path_order(),
            CensusKey::Oversized { .. } => None,
        }
    }

    pub fn is_oversized(&self) -> bool {
        matches!(self, CensusKey::Oversized { .. })
    }

    pub fn order(&self) -> usize {
        match self {
            CensusKey::Form(f) => f.order(),
            CensusKey::Oversized { order, .. } => *order,
        }
    }
}

impl fmt::Display for CensusKey {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            CensusKey::Form(form) => write!(f, "{form}"),
            CensusKey::Oversized { order, size } => write!(f, "oversized(n={order},m={size})"),
        }
    }
}

/// Multiset of component classes.
#[derive(Clone, Debug, Default, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct ComponentCensus {
    counts: BTreeMap<CensusKey, usize>,
}

impl ComponentCensus {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn add(&mut self, key: CensusKey) {
        *self.counts.entry(key).or_insert(0) += 1;
    }

    pub fn add_many(&mut self, key: CensusKey, k: usize) {
        if k > 0 {
            *self.counts.entry(key).or_insert(0) += k;
        }
    }

    /// Removes one copy; returns false when the key is absent.
    pub fn remove(&mut self, key: &CensusKey) -> bool {
        match self.counts.get_mut(key) {
            Some(c) if *c > 1 => {
                *c -= 1;
                true
            }
            Some(_) => {
                self.counts.remove(key);
                true
            }
            None => false,
        }
    }

    pub fn count(&self, key: &CensusKey) -> usize {
        self.counts.get(key).copied().unwrap_or(0)
    }

    /// Number of components isomorphic to `P_t`.
    pub fn path_count(&self, t: usize) -> usize {
        self.count(&CensusKey::path(t))
    }

    pub fn iter(&self) -> impl Iterator<Item = (&CensusKey, usize)> {
        self.counts.iter().map(|(k, &c)| (k, c))
    }

    pub fn keys(&self) -> impl Iterator<Item = &CensusKey> {
        self.counts.keys()
    }

    pub fn distinct(&self) -> usize {
        self.counts.len()
    }

    pub fn components(&self) -> usize {
        self.counts.values().sum()
    }

    /// Sum of component orders (the size of the colour class).
    pub fn vertex_total(&self) -> usize {
        self.counts.iter().map(|(k, &c)| k.order() * c).sum()
    }

    pub fn has_oversized(&self) -> bool {
        self.counts.keys().any(CensusKey::is_oversized)
    }

    /// Copy with the listed paths removed.
    pub fn without_paths(&self, orders: impl IntoIterator<Item = usize>) -> Self {
        let mut out = self.clone();
        for t in orders {
            out.counts.remove(&CensusKey::path(t));
        }
        out
    }
}

impl Serialize for ComponentCensus {
    fn serialize<S: Serializer>(&self, s: S) -> Result<S::Ok, S::Error> {
        let mut m = s.serialize_map(Some(self.counts.len()))?;
        for (k, c) in &self.counts {
            m.serialize_entry(&k.to_string(), c)?;
        }
        m.end()
    }
}

/// Red and blue censuses of one colouring.
#[derive(Clone, Debug, Default, PartialEq, Eq, Serialize)]
pub struct CensusPair {
    pub red: ComponentCensus,
    pub blue: ComponentCensus,
}

impl CensusPair {
    pub fn get(&self, colour: Color) -> &ComponentCensus {
        match colour {
            Color::Red => &self.red,
            Color::Blue => &self.blue,
        }
    }

    pub fn get_mut(&mut self, colour: Color) -> &mut ComponentCensus {
        match colour {
            Color::Red => &mut self.red,
            Color::Blue => &mut self.blue,
        }
    }

    /// `r_{P_t} - b_{P_t}` for `t = 1..=6`.
    pub fn path_discrepancies(&self) -> [i64; 6] {
        let mut out = [0i64; 6];
        for (i, slot) in out.iter_mut().enumerate() {
            *slot = self.red.path_count(i + 1) as i64 - self.blue.path_count(i + 1) as i64;
        }
        out
    }
}

/// Class of the subgraph of `g` induced by `comp` (sorted or not).
pub fn component_key(g: &Graph, comp: &[usize]) -> CensusKey {
    let k = comp.len();
    let lookup: Option<std::collections::HashMap<usize, usize>> =
        (k > 16).then(|| comp.iter().enumerate().map(|(i, &v)| (v, i)).collect());
    let index = |w: usize| -> Option<usize> {
        match &lookup {
            Some(m) => m.get(&w).copied(),
            None => comp.iter().position(|&x| x == w),
        }
    };
    let mut degrees = Vec::with_capacity(k);
    let mut twice_edges = 0;
    for &v in comp {
        let d = g.neighbors(v).iter().filter(|&&w| index(w).is_some()).count();
        degrees.push(d);
        twice_edges += d;
    }
    let edges = twice_edges / 2;
    if k > SMALL_GRAPH_LIMIT {
        return CensusKey::Oversized { order: k, size: edges };
    }
    // connected components only: paths and cycles are recognised from degrees
    if degrees.iter().all(|&d| d <= 2) {
        if edges + 1 == k {
            return CensusKey::path(k);
        }
        if edges == k && k >= 3 {
            return CensusKey::Form(CanonicalForm::cycle(k));
        }
    }
    let mut bits = vec![0u64; k];
    for (i, &v) in comp.iter().enumerate() {
        for &w in g.neighbors(v) {
            if let Some(j) = index(w) {
                bits[i] |= 1 << j;
            }
        }
    }
    let form = labeling_from_bits(&bits, None).expect("within the size limit").form;
    CensusKey::Form(form)
}

/// Class of a connected graph given as bitset adjacency (at most 64 vertices).
pub fn key_from_bits(adj: &[u64]) -> CensusKey {
    let k = adj.len();
    let mut edges = 0;
    let mut low_degree = true;
    for row in adj {
        let d = row.count_ones() as usize;
        edges += d;
        low_degree &= d <= 2;
    }
    edges /= 2;
    if low_degree {
        if edges + 1 == k {
            return CensusKey::path(k);
        }
        if edges == k && k >= 3 {
            return CensusKey::Form(CanonicalForm::cycle(k));
        }
    }
    CensusKey::Form(labeling_from_bits(adj, None).expect("within the size limit").form)
}

/// Components of the subgraph induced by colour `colour`, restricted to
/// `domain` when given. Each component is returned sorted; the list is ordered
/// by smallest vertex.
pub fn monochromatic_components(
    g: &Graph,
    colour_of: &dyn Fn(usize) -> Option<Color>,
    colour: Color,
    domain: &[usize],
) -> Vec<Vec<usize>> {
    let mut seen = std::collections::HashSet::new();
    let mut out = Vec::new();
    let mut sorted_domain = domain.to_vec();
    sorted_domain.sort_unstable();
    for &s in &sorted_domain {
        if colour_of(s) != Some(colour) || !seen.insert(s) {
            continue;
        }
        let mut comp = vec![s];
        let mut stack = vec![s];
        while let Some(u) = stack.pop() {
            for &w in g.neighbors(u) {
                if colour_of(w) == Some(colour) && seen.insert(w) {
                    comp.push(w);
                    stack.push(w);
                }
            }
        }
        comp.sort_unstable();
        out.push(comp);
    }
    out
}

/// Census of the colour class `colour` over the whole graph.
pub fn census(g: &Graph, coloring: &VertexColoring, colour: Color) -> ComponentCensus {
    let n = g.order();
    let mut seen = vec![false; n];
    let mut out = ComponentCensus::new();
    let mut comp = Vec::new();
    let mut stack = Vec::new();
    for s in 0..n {
        if seen[s] || coloring.get(s) != colour {
            continue;
        }
        seen[s] = true;
        comp.clear();
        comp.push(s);
        stack.push(s);
        while let Some(u) = stack.pop() {
            for &w in g.neighbors(u) {
                if !seen[w] && coloring.get(w) == colour {
                    seen[w] = true;
                    comp.push(w);
                    stack.push(w);
                }
            }
        }
        out.add(component_key(g, &comp));
    }
    out
}

/// Components (under the full colouring) that contain at least one of the
/// seed vertices, each sorted, without duplicates.
pub fn components_touching(g: &Graph, coloring: &VertexColoring, seeds: &[usize]) -> Vec<(Color, Vec<usize>)> {
    let mut seen = std::collections::HashSet::new();
    let mut out = Vec::new();
    for &s in seeds {
        if !seen.insert(s) {
            continue;
        }
        let colour = coloring.get(s);
        let mut comp = vec![s];
        let mut stack = vec![s];
        while let Some(u) = stack.pop() {
            for &w in g.neighbors(u) {
                if coloring.get(w) == colour && seen.insert(w) {
                    comp.push(w);
                    stack.push(w);
                }
            }
        }
        comp.sort_unstable();
        out.push((colour, comp));
    }
    out
}

pub fn census_pair(g: &Graph, coloring: &VertexColoring) -> CensusPair {
    CensusPair { red: census(g, coloring, Color::Red), blue: census(g, coloring, Color::Blue) }
}

/// Censuses of the subgraph induced by `domain`, coloured by `colours`
/// (aligned with `domain`).
pub fn census_within(g: &Graph, domain: &[usize], colours: &[Color]) -> CensusPair {
    assert_eq!(domain.len(), colours.len());
    let map: std::collections::HashMap<usize, Color> = domain.iter().copied().zip(colours.iter().copied()).collect();
    let colour_of = |v: usize| map.get(&v).copied();
    let mut out = CensusPair::default();
    for colour in [Color::Red, Color::Blue] {
        for comp in monochromatic_components(g, &colour_of, colour, domain) {
            out.get_mut(colour).add(component_key(g, &comp));
        }
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::fixtures;

    fn census_of(g: &Graph, red: &[usize]) -> CensusPair {
        census_pair(g, &VertexColoring::from_red_set(g.order(), red))
    }

    #[test]
    fn k4_examples() {
        let g = fixtures::k4();
        let c = census_of(&g, &[0, 1]);
        assert_eq!(c.red.path_count(2), 1);
        assert_eq!(c.red.components(), 1);
        assert_eq!(c.blue.path_count(2), 1);
        assert_eq!(c.path_discrepancies(), [0; 6]);
        let all = census_of(&g, &[0, 1, 2, 3]);
        assert_eq!(all.red.components(), 1);
        assert_eq!(all.red.path_count(4), 0);
        assert!(all.blue.components() == 0);
        assert_eq!(all.path_discrepancies(), [0; 6]);
    }

    #[test]
    fn petersen_five_cycle() {
        let g = fixtures::petersen();
        // find a 5-cycle whose complement is also a 5-cycle
        let outer: Vec<usize> = (0..10)
            .filter(|&v| {
                let c = census_of(&g, &[v]);
                c.red.path_count(1) == 1
            })
            .collect();
        assert_eq!(outer.len(), 10);
        let mut found = false;
        for mask in 0u32..1 << 10 {
            if mask.count_ones() != 5 {
                continue;
            }
            let red: Vec<usize> = (0..10).filter(|&v| mask >> v & 1 == 1).collect();
            let c = census_of(&g, &red);
            if c.red.count(&CensusKey::Form(CanonicalForm::cycle(5))) == 1 {
                assert_eq!(c.blue.count(&CensusKey::Form(CanonicalForm::cycle(5))), 1);
                found = true;
                break;
            }
        }
        assert!(found);
    }

    #[test]
    fn oversized_components_are_kept() {
        let g = fixtures::circular_ladder(40);
        let c = census_of(&g, &(0..80).collect::<Vec<_>>());
        assert!(c.red.has_oversized());
        assert_eq!(c.red.vertex_total(), 80);
    }

    #[test]
    fn census_within_restricts_to_domain() {
        let g = fixtures::circular_ladder(10);
        let domain = vec![0, 1, 2, 3];
        let c = census_within(&g, &domain, &[Color::Red; 4]);
        assert_eq!(c.red.path_count(4), 1);
    }
}
