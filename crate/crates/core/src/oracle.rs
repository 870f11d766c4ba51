//! Brute-force ground truth on small inputs: exhaustive bisection search,
//! verification over graph6 streams and exhaustive reducer enumeration.

use std::collections::{BTreeMap, HashMap};
use std::io::BufRead;
use std::time::Instant;

use serde::Serialize;
use thiserror::Error;

use crate::census::{census_within, key_from_bits, CensusKey, CensusPair, ComponentCensus};
use crate::coloring::{Color, VertexColoring};
use crate::graph::Graph;
use crate::graph6::parse_cubic;
use crate::reducers::{verify_reducer, Provenance, Reducer, ReducerKind};

pub const DEFAULT_BISECTION_LIMIT: usize = 16;
pub const REDUCER_REGION_LIMIT: usize = 12;

#[derive(Clone, Debug, PartialEq, Eq, Error)]
pub enum OracleError {
    #[error("{what} has {size} vertices, above the limit {limit}")]
    TooLarge { what: &'static str, size: usize, limit: usize },
    #[error("t = {0} is outside 3..=6")]
    BadOrder(usize),
}

fn components_of(adj: &[u64], mut set: u64) -> Vec<u64> {
    let mut out = Vec::new();
    while set != 0 {
        let mut comp = set & set.wrapping_neg();
        let mut frontier = comp;
        while frontier != 0 {
            let v = frontier.trailing_zeros() as usize;
            frontier &= frontier - 1;
            let new = adj[v] & set & !comp;
            comp |= new;
            frontier |= new;
        }
        set &= !comp;
        out.push(comp);
    }
    out
}

fn restrict(adj: &[u64], comp: u64) -> Vec<u64> {
    let members: Vec<usize> = (0..adj.len()).filter(|&i| comp >> i & 1 == 1).collect();
    members
        .iter()
        .map(|&v| members.iter().enumerate().filter(|&(_, &w)| adj[v] >> w & 1 == 1).fold(0u64, |r, (j, _)| r | 1 << j))
        .collect()
}

/// `(order, size)` of each component, sorted: a cheap necessary condition
/// for census equality.
fn shape(adj: &[u64], comps: &[u64]) -> Vec<(u32, u32)> {
    let mut s: Vec<(u32, u32)> = comps
        .iter()
        .map(|&c| {
            let edges: u32 = (0..adj.len()).filter(|&v| c >> v & 1 == 1).map(|v| (adj[v] & c).count_ones()).sum();
            (c.count_ones(), edges / 2)
        })
        .collect();
    s.sort_unstable();
    s
}

fn bit_census(adj: &[u64], comps: &[u64]) -> ComponentCensus {
    let mut c = ComponentCensus::new();
    for &comp in comps {
        c.add(key_from_bits(&restrict(adj, comp)));
    }
    c
}

fn search_bisection(g: &Graph, limit: usize, fix_first: bool) -> Result<Option<VertexColoring>, OracleError> {
    let n = g.order();
    if n > limit.min(63) {
        return Err(OracleError::TooLarge { what: "graph", size: n, limit: limit.min(63) });
    }
    if n % 2 == 1 {
        return Ok(None);
    }
    if n == 0 {
        return Ok(Some(VertexColoring::new(Vec::new())));
    }
    let adj: Vec<u64> = (0..n).map(|v| g.neighbors(v).iter().fold(0u64, |a, &w| a | 1 << w)).collect();
    let all = (1u64 << n) - 1;
    let half = (n / 2) as u32;
    // Gosper's hack over half-size subsets in colex order
    let mut red: u64 = (1u64 << half) - 1;
    while red <= all {
        if !fix_first || red & 1 == 1 {
            let (rc, bc) = (components_of(&adj, red), components_of(&adj, all & !red));
            if shape(&adj, &rc) == shape(&adj, &bc) && bit_census(&adj, &rc) == bit_census(&adj, &bc) {
                let members: Vec<usize> = (0..n).filter(|&v| red >> v & 1 == 1).collect();
                return Ok(Some(VertexColoring::from_red_set(n, &members)));
            }
        }
        let c = red & red.wrapping_neg();
        let r = red + c;
        if r == 0 || r > all {
            break;
        }
        red = (((r ^ red) >> 2) / c) | r;
    }
    Ok(None)
}

/// First isomorphic bisection in colex order among those with vertex 0 red
/// (exchanging colours maps solutions to solutions). `None` proves that no
/// isomorphic bisection exists.
pub fn brute_force_bisection(g: &Graph, limit: usize) -> Result<Option<VertexColoring>, OracleError> {
    search_bisection(g, limit, true)
}

/// [`brute_force_bisection`] without the symmetry pruning.
pub fn brute_force_bisection_unpruned(g: &Graph, limit: usize) -> Result<Option<VertexColoring>, OracleError> {
    search_bisection(g, limit, false)
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
#[serde(tag = "outcome", rename_all = "snake_case")]
pub enum StreamOutcome {
    Found { coloring: VertexColoring },
    /// proven nonexistence
    None,
    Error { message: String },
}

#[derive(Clone, Debug, Serialize)]
pub struct StreamEntry {
    pub line: usize,
    pub order: Option<usize>,
    #[serde(flatten)]
    pub outcome: StreamOutcome,
    pub micros: u128,
}

#[derive(Clone, Debug, Default, PartialEq, Eq, Serialize)]
pub struct StreamTotals {
    pub graphs: usize,
    pub found: usize,
    pub none: usize,
    pub errors: usize,
    /// `n -> graphs checked`
    pub by_order: BTreeMap<usize, usize>,
}

#[derive(Clone, Debug, Default, Serialize)]
pub struct VerificationReport {
    pub entries: Vec<StreamEntry>,
    pub totals: StreamTotals,
}

/// Runs [`brute_force_bisection`] on every non-blank line. Lines that do not
/// parse as connected cubic graphs are recorded as errors and skipped.
pub fn verify_conjecture_stream(source: impl BufRead, limit: usize) -> VerificationReport {
    let mut report = VerificationReport::default();
    for (i, line) in source.lines().enumerate() {
        let started = Instant::now();
        let line_no = i + 1;
        let (order, outcome) = match line {
            Err(e) => (None, StreamOutcome::Error { message: e.to_string() }),
            Ok(text) if text.trim().is_empty() => continue,
            Ok(text) => match parse_cubic(text.trim()) {
                Err(e) => (None, StreamOutcome::Error { message: e.to_string() }),
                Ok(g) if !g.is_connected() => (Some(g.order()), StreamOutcome::Error { message: "graph is disconnected".into() }),
                Ok(g) => match brute_force_bisection(&g, limit) {
                    Ok(Some(coloring)) => (Some(g.order()), StreamOutcome::Found { coloring }),
                    Ok(None) => (Some(g.order()), StreamOutcome::None),
                    Err(e) => (Some(g.order()), StreamOutcome::Error { message: e.to_string() }),
                },
            },
        };
        let t = &mut report.totals;
        match &outcome {
            StreamOutcome::Found { .. } => t.found += 1,
            StreamOutcome::None => t.none += 1,
            StreamOutcome::Error { .. } => t.errors += 1,
        }
        if !matches!(outcome, StreamOutcome::Error { .. }) {
            t.graphs += 1;
            *t.by_order.entry(order.unwrap()).or_insert(0) += 1;
        }
        report.entries.push(StreamEntry { line: line_no, order, outcome, micros: started.elapsed().as_micros() });
    }
    report
}

// ----------------------------------------------------------------------------
// Reducers
// ----------------------------------------------------------------------------

/// Connected vertex subsets of `region` in `g`, each sorted.
fn connected_subsets(g: &Graph, region: &[usize]) -> Vec<Vec<usize>> {
    let k = region.len();
    let adj: Vec<u64> = region
        .iter()
        .map(|&v| region.iter().enumerate().filter(|&(_, &w)| g.has_edge(v, w)).fold(0u64, |a, (j, _)| a | 1 << j))
        .collect();
    (1u64..1 << k)
        .filter(|&m| components_of(&adj, m).len() == 1)
        .map(|m| (0..k).filter(|&i| m >> i & 1 == 1).map(|i| region[i]).collect())
        .collect()
}

type Changes = (BTreeMap<CensusKey, i64>, BTreeMap<CensusKey, i64>);

fn difference(before: &CensusPair, after: &CensusPair) -> Changes {
    let diff = |b: &ComponentCensus, a: &ComponentCensus| {
        let mut out = BTreeMap::new();
        for key in b.keys().chain(a.keys()) {
            let d = a.count(key) as i64 - b.count(key) as i64;
            if d != 0 {
                out.insert(key.clone(), d);
            }
        }
        out
    };
    (diff(&before.red, &after.red), diff(&before.blue, &after.blue))
}

/// Every reducer whose region is a connected subset of `region`, found by
/// comparing the full censuses of `B_2(R)` under all interior colourings
/// with `N(R)` blue and `N^2(R)` red. Pairs with the same region, kind and
/// census change are reported once (the first in mask order). Each result is
/// re-checked with [`verify_reducer`].
pub fn exhaustive_reducer_search(g: &Graph, region: &[usize], t: usize) -> Result<Vec<Reducer>, OracleError> {
    let mut region = region.to_vec();
    region.sort_unstable();
    region.dedup();
    if region.len() > REDUCER_REGION_LIMIT {
        return Err(OracleError::TooLarge { what: "region", size: region.len(), limit: REDUCER_REGION_LIMIT });
    }
    if !(3..=6).contains(&t) {
        return Err(OracleError::BadOrder(t));
    }
    let mut out = Vec::new();
    for r in connected_subsets(g, &region) {
        let domain = g.ball_of_set(&r, 2);
        let boundary = g.sphere(&r, 1);
        let colourings: Vec<Vec<Color>> = (0u32..1 << r.len())
            .map(|mask| {
                domain
                    .iter()
                    .map(|&v| match r.binary_search(&v) {
                        Ok(i) if mask >> i & 1 == 1 => Color::Red,
                        Ok(_) => Color::Blue,
                        Err(_) if boundary.binary_search(&v).is_ok() => Color::Blue,
                        Err(_) => Color::Red,
                    })
                    .collect()
            })
            .collect();
        let censuses: Vec<CensusPair> = colourings.iter().map(|c| census_within(g, &domain, c)).collect();
        let reds: Vec<usize> = colourings.iter().map(|c| c.iter().filter(|&&x| x == Color::Red).count()).collect();
        let mut seen: HashMap<(ReducerKind, Changes), ()> = HashMap::new();
        for a in 0..colourings.len() {
            for b in 0..colourings.len() {
                let kind = match reds[a] as i64 - reds[b] as i64 {
                    0 => ReducerKind::Full,
                    1 => ReducerKind::Half,
                    _ => continue,
                };
                let (ca, cb) = (&censuses[a], &censuses[b]);
                if cb.red.path_count(t) + 1 != ca.red.path_count(t) || cb.blue.path_count(t) != ca.blue.path_count(t) {
                    continue;
                }
                let changes = difference(ca, cb);
                let short = |k: &CensusKey| k.path_order().is_some_and(|p| p <= t);
                if changes.0.keys().chain(changes.1.keys()).any(|k| !short(k)) {
                    continue;
                }
                if seen.insert((kind, changes), ()).is_some() {
                    continue;
                }
                let reducer = Reducer {
                    kind,
                    t,
                    region: r.clone(),
                    domain: domain.clone(),
                    psi1: colourings[a].clone(),
                    psi2: colourings[b].clone(),
                    provenance: Provenance::Search,
                };
                assert!(verify_reducer(g, &reducer).is_ok(), "oracle produced an uncertified reducer");
                out.push(reducer);
            }
        }
    }
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::balance::verify_isomorphic_bisection;
    use crate::fixtures;

    #[test]
    fn small_named_graphs_have_bisections() {
        for g in [fixtures::k4(), fixtures::k33(), fixtures::prism(), fixtures::petersen()] {
            let c = brute_force_bisection(&g, 16).unwrap().expect("bisection exists");
            assert!(verify_isomorphic_bisection(&g, &c).is_ok());
            assert_eq!(c.get(0), Color::Red);
        }
        let k4 = brute_force_bisection(&fixtures::k4(), 16).unwrap().unwrap();
        assert_eq!(k4.red_vertices(), vec![0, 1]);
    }

    #[test]
    fn limit_is_enforced() {
        let g = fixtures::heawood();
        assert!(matches!(brute_force_bisection(&g, 12), Err(OracleError::TooLarge { size: 14, .. })));
    }

    #[test]
    fn non_cubic_control_without_bisection() {
        // K_{1,3}: the side holding the centre induces P_2, the other 2 P_1
        let star = Graph::from_edges(4, &[(0, 1), (0, 2), (0, 3)]).unwrap();
        assert_eq!(brute_force_bisection(&star, 16), Ok(None));
        assert_eq!(brute_force_bisection_unpruned(&star, 16), Ok(None));
    }

    #[test]
    fn stream_records_errors_and_continues() {
        let text = "C~\nnot-a-graph\n\nE{Sw\n";
        let report = verify_conjecture_stream(text.as_bytes(), 16);
        assert_eq!(report.totals.found, 2);
        assert_eq!(report.totals.errors, 1);
        assert_eq!(report.entries[1].line, 2);
        let empty = verify_conjecture_stream("".as_bytes(), 16);
        assert!(empty.entries.is_empty());
        assert_eq!(empty.totals, StreamTotals::default());
    }

    #[test]
    fn single_vertex_region_has_no_reducer() {
        let g = fixtures::foster();
        assert!(exhaustive_reducer_search(&g, &[0], 3).unwrap().is_empty());
    }
}
