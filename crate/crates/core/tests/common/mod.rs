#![allow(dead_code)]

use std::collections::BTreeMap;

use isobisect::census::{census_within, CensusKey, ComponentCensus};
use isobisect::fixtures;
use isobisect::graph::CubicGraph;
use isobisect::reducers::Reducer;

/// Ladder on 40 rungs whose inner cycle is rewired near the start so that the
/// outside neighbours of the rail `0..=20` match the case (c) chord pattern at
/// index 5.
pub fn case_c_ladder() -> CubicGraph {
    let m = 40;
    let mut inner: Vec<(usize, usize)> = (9..m - 1).map(|k| (k, k + 1)).collect();
    inner.extend([(m - 1, 0), (0, 1), (1, 2), (2, 3), (3, 4), (5, 6), (5, 8), (6, 9), (7, 4), (7, 8)]);
    fixtures::ladder(m, &inner).expect("rewired ladder is cubic")
}

/// `CL_40` with the rungs at 5 and 6 replaced by a shared vertex `x = 80`
/// (adjacent to outer 5 and 6) and `y = 81` (adjacent to `x` and inner 5, 6):
/// consecutive rail vertices with a common outside neighbour.
pub fn collision_ladder() -> CubicGraph {
    let m = 40;
    let mut edges = Vec::new();
    for i in 0..m {
        edges.push((i, (i + 1) % m));
        edges.push((m + i, m + (i + 1) % m));
        if i != 5 && i != 6 {
            edges.push((i, m + i));
        }
    }
    let (x, y) = (2 * m, 2 * m + 1);
    edges.extend([(5, x), (6, x), (x, y), (y, m + 5), (y, m + 6)]);
    CubicGraph::from_edges(2 * m + 2, &edges).expect("collision ladder is cubic")
}

pub type Changes = (BTreeMap<CensusKey, i64>, BTreeMap<CensusKey, i64>);

fn diff(before: &ComponentCensus, after: &ComponentCensus) -> BTreeMap<CensusKey, i64> {
    let mut out = BTreeMap::new();
    for key in before.keys().chain(after.keys()) {
        let d = after.count(key) as i64 - before.count(key) as i64;
        if d != 0 {
            out.insert(key.clone(), d);
        }
    }
    out
}

/// `(red, blue)` census changes of `psi1 -> psi2`.
pub fn reducer_changes(g: &CubicGraph, r: &Reducer) -> Changes {
    let a = census_within(g, &r.domain, &r.psi1);
    let b = census_within(g, &r.domain, &r.psi2);
    (diff(&a.red, &b.red), diff(&a.blue, &b.blue))
}
