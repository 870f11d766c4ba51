//! Bundled graphs: the complete lists of connected cubic graphs up to 14
//! vertices, a few named cubic graphs, circular ladders and random "tubes".

use rand::seq::SliceRandom;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use crate::graph::{CubicGraph, Graph};
use crate::graph6::parse_cubic;

/// `(n, graph6 lines)` for every connected cubic graph on `n` vertices.
pub const CONNECTED_CUBIC: &[(usize, &str)] = &[
    (4, include_str!("../fixtures/cubic_connected_n04.g6")),
    (6, include_str!("../fixtures/cubic_connected_n06.g6")),
    (8, include_str!("../fixtures/cubic_connected_n08.g6")),
    (10, include_str!("../fixtures/cubic_connected_n10.g6")),
    (12, include_str!("../fixtures/cubic_connected_n12.g6")),
    (14, include_str!("../fixtures/cubic_connected_n14.g6")),
];

/// All connected cubic graphs of order `n` (empty unless `n` is bundled).
pub fn connected_cubic(n: usize) -> Vec<CubicGraph> {
    CONNECTED_CUBIC
        .iter()
        .filter(|(m, _)| *m == n)
        .flat_map(|(_, text)| text.lines())
        .map(|line| parse_cubic(line).expect("bundled fixture is a valid cubic graph6 line"))
        .collect()
}

fn named(text: &str) -> CubicGraph {
    parse_cubic(text.trim()).expect("bundled fixture is a valid cubic graph6 line")
}

pub fn k4() -> CubicGraph {
    named(include_str!("../fixtures/k4.g6"))
}

pub fn k33() -> CubicGraph {
    named(include_str!("../fixtures/k33.g6"))
}

/// The triangular prism `K3 x K2`.
pub fn prism() -> CubicGraph {
    named(include_str!("../fixtures/prism.g6"))
}

pub fn petersen() -> CubicGraph {
    named(include_str!("../fixtures/petersen.g6"))
}

pub fn heawood() -> CubicGraph {
    named(include_str!("../fixtures/heawood.g6"))
}

/// The (3,7)-cage on 24 vertices.
pub fn mcgee() -> CubicGraph {
    named(include_str!("../fixtures/mcgee.g6"))
}

/// The Foster graph: 90 vertices, girth 10, diameter 8.
pub fn foster() -> CubicGraph {
    named(include_str!("../fixtures/foster.g6"))
}

/// Bundled circular ladder file for `m` in {40, 80, 120, 200}.
pub fn bundled_circular_ladder(m: usize) -> Option<CubicGraph> {
    let text = match m {
        40 => include_str!("../fixtures/cl40.g6"),
        80 => include_str!("../fixtures/cl80.g6"),
        120 => include_str!("../fixtures/cl120.g6"),
        200 => include_str!("../fixtures/cl200.g6"),
        _ => return None,
    };
    Some(named(text))
}

/// Circular ladder `CL_m` (`m >= 3`): outer cycle `0..m`, inner cycle `m..2m`,
/// rungs `i ~ i + m`.
pub fn circular_ladder(m: usize) -> CubicGraph {
    assert!(m >= 3, "circular ladder needs m >= 3");
    let mut edges = Vec::with_capacity(3 * m);
    for i in 0..m {
        edges.push((i, (i + 1) % m));
        edges.push((m + i, m + (i + 1) % m));
        edges.push((i, m + i));
    }
    CubicGraph::from_edges(2 * m, &edges).expect("circular ladder is cubic")
}

/// Outer cycle `0..m` with rungs `i ~ m + i`; the inner vertices `m..2m` are
/// joined by `inner` (pairs of inner indices), which must make them 2-regular.
pub fn ladder(m: usize, inner: &[(usize, usize)]) -> Option<CubicGraph> {
    let mut edges = Vec::with_capacity(3 * m);
    for i in 0..m {
        edges.push((i, (i + 1) % m));
        edges.push((i, m + i));
    }
    edges.extend(inner.iter().map(|&(a, b)| (m + a, m + b)));
    CubicGraph::from_edges(2 * m, &edges).ok()
}

/// Hamiltonian cycle `0..n` plus chords given in LCF notation.
pub fn lcf(n: usize, shifts: &[isize], repeats: usize) -> Option<CubicGraph> {
    let mut g = Graph::empty(n);
    for i in 0..n {
        g.add_edge(i, (i + 1) % n).ok()?;
    }
    for k in 0..shifts.len() * repeats {
        let i = k % n;
        let j = (i as isize + shifts[k % shifts.len()]).rem_euclid(n as isize) as usize;
        if !g.has_edge(i, j) {
            g.add_edge(i, j).ok()?;
        }
    }
    CubicGraph::new(g).ok()
}

/// A long random tube: `columns` cyclically ordered columns of `width`
/// vertices (width even). Consecutive columns are joined by a random perfect
/// matching and each column carries a random perfect matching of its own.
/// Diameter grows linearly in `columns` while the local structure is irregular.
pub fn tube(columns: usize, width: usize, seed: u64) -> CubicGraph {
    assert!(columns >= 3 && width >= 2 && width % 2 == 0);
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let id = |c: usize, k: usize| c * width + k;
    let mut edges = Vec::with_capacity(3 * columns * width / 2);
    for c in 0..columns {
        let mut perm: Vec<usize> = (0..width).collect();
        perm.shuffle(&mut rng);
        for (k, &p) in perm.iter().enumerate() {
            edges.push((id(c, k), id((c + 1) % columns, p)));
        }
        let mut inside: Vec<usize> = (0..width).collect();
        inside.shuffle(&mut rng);
        for pair in inside.chunks(2) {
            edges.push((id(c, pair[0]), id(c, pair[1])));
        }
    }
    CubicGraph::from_edges(columns * width, &edges).expect("tube construction is cubic")
}
