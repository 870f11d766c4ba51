use std::collections::HashMap;

use crate::census::{key_from_bits, CensusKey, ComponentCensus};
use crate::coloring::Color;
use crate::graph::{Graph, SMALL_GRAPH_LIMIT};

use super::{verify_reducer, Provenance, Reducer, ReducerError, ReducerKind};

/// Largest region whose interior colourings are enumerated.
pub(crate) const SEARCH_REGION_LIMIT: usize = 16;

struct Entry {
    mask: u32,
    red: u32,
    red_paths: [i64; 7],
    blue_paths: [i64; 7],
}

/// Components of `set` inside the bitset graph `adj`.
fn split(adj: &[u64], mut set: u64, out: &mut Vec<u64>) {
    out.clear();
    while set != 0 {
        let start = set & set.wrapping_neg();
        let mut comp = start;
        let mut frontier = start;
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
}

fn sub_bits(adj: &[u64], comp: u64) -> Vec<u64> {
    let members: Vec<usize> = (0..64).filter(|&i| comp >> i & 1 == 1).collect();
    members
        .iter()
        .map(|&v| {
            let mut row = 0u64;
            for (j, &w) in members.iter().enumerate() {
                if adj[v] >> w & 1 == 1 {
                    row |= 1 << j;
                }
            }
            row
        })
        .collect()
}

/// Path-count change `psi1 -> psi2` the constructions aim for, indexed by order 1..=6.
fn construction_shape(kind: ReducerKind, t: usize) -> ([i64; 7], [i64; 7]) {
    let mut red = [0i64; 7];
    let mut blue = [0i64; 7];
    match kind {
        ReducerKind::Full => {
            red[t] -= 1;
            red[1] -= 1;
            red[t - 1] += 1;
            red[2] += 1;
        }
        ReducerKind::Half => {
            red[t] -= 1;
            red[1] += 1;
            red[t - 2] += 1;
            blue[1] -= 1;
            blue[2] += 1;
        }
    }
    (red, blue)
}

/// Enumerates every colouring of the region's interior with `N(R)` blue and
/// `N^2(R)` red, and returns a certified pair `(psi1, psi2)`.
///
/// Candidates are grouped by (red census and blue census without paths of
/// order at most `t`, blue `P_t` count); within a group a pair qualifies when
/// the red counts differ as `kind` requires and the red `P_t` count drops by
/// one. Preference: the path changes the constructions describe, then the
/// fewest recoloured vertices, then the smallest masks.
///
/// Returns `Ok(None)` when no certificate exists.
pub fn certified_search(
    g: &Graph,
    region: &[usize],
    t: usize,
    kind: ReducerKind,
) -> Result<Option<Reducer>, ReducerError> {
    let mut region = region.to_vec();
    region.sort_unstable();
    region.dedup();
    if region.is_empty() || region.len() > SEARCH_REGION_LIMIT {
        return Err(ReducerError::Precondition(format!("search region has {} vertices", region.len())));
    }
    if !(3..=6).contains(&t) {
        return Err(ReducerError::Precondition(format!("t = {t} outside 3..=6")));
    }
    let boundary = g.sphere(&region, 1);
    let mut inner: Vec<usize> = region.iter().chain(&boundary).copied().collect();
    inner.sort_unstable();
    if inner.len() > SMALL_GRAPH_LIMIT {
        return Err(ReducerError::Precondition(format!("R u N(R) has {} vertices", inner.len())));
    }
    let pos = |v: usize| inner.binary_search(&v).ok();
    let adj: Vec<u64> = inner
        .iter()
        .map(|&v| g.neighbors(v).iter().filter_map(|&w| pos(w)).fold(0u64, |acc, j| acc | 1 << j))
        .collect();
    let region_bits: Vec<u64> = region.iter().map(|&v| 1u64 << pos(v).unwrap()).collect();
    let all = if inner.len() == 64 { u64::MAX } else { (1u64 << inner.len()) - 1 };

    let mut keys: HashMap<u64, CensusKey> = HashMap::new();
    let mut groups: HashMap<(ComponentCensus, ComponentCensus, i64), Vec<Entry>> = HashMap::new();
    let mut comps = Vec::new();
    for mask in 0u32..1 << region.len() {
        let mut red_set = 0u64;
        for (i, &b) in region_bits.iter().enumerate() {
            if mask >> i & 1 == 1 {
                red_set |= b;
            }
        }
        let mut censuses = [ComponentCensus::new(), ComponentCensus::new()];
        let mut paths = [[0i64; 7], [0i64; 7]];
        for (c, set) in [red_set, all & !red_set].into_iter().enumerate() {
            split(&adj, set, &mut comps);
            for &comp in &comps {
                let key = keys.entry(comp).or_insert_with(|| key_from_bits(&sub_bits(&adj, comp))).clone();
                if let Some(p) = key.path_order().filter(|&p| p <= 6) {
                    paths[c][p] += 1;
                }
                censuses[c].add(key);
            }
        }
        let [red, blue] = censuses;
        let sig = (red.without_paths(1..=t), blue.without_paths(1..=t), paths[1][t]);
        groups.entry(sig).or_default().push(Entry {
            mask,
            red: mask.count_ones(),
            red_paths: paths[0],
            blue_paths: paths[1],
        });
    }

    let (shape_red, shape_blue) = construction_shape(kind, t);
    let surplus = kind.red_surplus() as u32;
    let mut best: Option<(u32, u32, u32, u32)> = None;
    for entries in groups.values() {
        for a in entries {
            for b in entries {
                if a.red != b.red + surplus || b.red_paths[t] + 1 != a.red_paths[t] {
                    continue;
                }
                let matches = (1..=6).all(|p| {
                    b.red_paths[p] - a.red_paths[p] == shape_red[p] && b.blue_paths[p] - a.blue_paths[p] == shape_blue[p]
                });
                let score = (u32::from(!matches), (a.mask ^ b.mask).count_ones(), a.mask, b.mask);
                if best.is_none_or(|s| score < s) {
                    best = Some(score);
                }
            }
        }
    }
    let Some((_, _, m1, m2)) = best else {
        return Ok(None);
    };

    let domain = g.ball_of_set(&region, 2);
    let colour = |mask: u32, v: usize| -> Color {
        if let Ok(i) = region.binary_search(&v) {
            if mask >> i & 1 == 1 {
                Color::Red
            } else {
                Color::Blue
            }
        } else if boundary.binary_search(&v).is_ok() {
            Color::Blue
        } else {
            Color::Red
        }
    };
    let reducer = Reducer {
        kind,
        t,
        psi1: domain.iter().map(|&v| colour(m1, v)).collect(),
        psi2: domain.iter().map(|&v| colour(m2, v)).collect(),
        region,
        domain,
        provenance: Provenance::Search,
    };
    verify_reducer(g, &reducer).map_err(ReducerError::Uncertified)?;
    Ok(Some(reducer))
}
