use std::collections::{BTreeMap, HashMap, HashSet};

use serde::Serialize;
use thiserror::Error;

use crate::census::{component_key, monochromatic_components, CensusKey, CensusPair};
use crate::coloring::Color;
use crate::graph::Graph;

use super::{Reducer, ReducerKind};

#[derive(Clone, Debug, PartialEq, Eq, Error)]
pub enum ReducerViolation {
    #[error("region is empty")]
    EmptyRegion,
    #[error("t = {0} is outside 3..=6")]
    BadOrder(usize),
    #[error("domain is not B_2(R)")]
    DomainMismatch,
    #[error("colouring lengths {psi1}/{psi2} do not match the domain size {domain}")]
    ColouringLength { psi1: usize, psi2: usize, domain: usize },
    #[error("(i) red counts {psi1} and {psi2}, required difference {required}")]
    RedCount { psi1: usize, psi2: usize, required: usize },
    #[error("(ii) vertex {vertex} of N(R) is red in {colouring}")]
    BoundaryNotBlue { vertex: usize, colouring: &'static str },
    #[error("(ii) vertex {vertex} of N^2(R) is blue in {colouring}")]
    OuterNotRed { vertex: usize, colouring: &'static str },
    #[error("(iii) {colour:?} count of {key} changes from {psi1} to {psi2}")]
    CensusChanged { colour: Color, key: String, psi1: usize, psi2: usize },
    #[error("(iv) red P_t count goes from {psi1} to {psi2}, expected a drop of one")]
    RedPathCount { psi1: usize, psi2: usize },
    #[error("(iv) blue P_t count goes from {psi1} to {psi2}")]
    BluePathCount { psi1: usize, psi2: usize },
}

/// What a successful verification established: the net census change
/// `psi1 -> psi2` inside `B_2(R)`.
#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct ReducerCertificate {
    pub kind: ReducerKind,
    pub t: usize,
    pub red_counts: (usize, usize),
    pub red_changes: BTreeMap<String, i64>,
    pub blue_changes: BTreeMap<String, i64>,
}

type Component = (Color, Vec<usize>);

fn components(g: &Graph, domain: &[usize], psi: &[Color]) -> Vec<Component> {
    let map: HashMap<usize, Color> = domain.iter().copied().zip(psi.iter().copied()).collect();
    let colour_of = |v: usize| map.get(&v).copied();
    let mut out = Vec::new();
    for colour in [Color::Red, Color::Blue] {
        for comp in monochromatic_components(g, &colour_of, colour, domain) {
            out.push((colour, comp));
        }
    }
    out
}

/// Checks the reducer conditions. Components that are identical (same colour
/// and vertex set) under both colourings are cancelled before classification,
/// so large unchanged components never need a canonical form.
///
/// Clause (iii) exempts paths on at most `t` vertices, `P_1` included: the
/// geodesic construction itself turns a red `P_t + P_1` into `P_{t-1} + P_2`.
pub fn verify_reducer(g: &Graph, r: &Reducer) -> Result<ReducerCertificate, ReducerViolation> {
    if r.region.is_empty() {
        return Err(ReducerViolation::EmptyRegion);
    }
    if !(3..=6).contains(&r.t) {
        return Err(ReducerViolation::BadOrder(r.t));
    }
    if g.ball_of_set(&r.region, 2) != r.domain {
        return Err(ReducerViolation::DomainMismatch);
    }
    if r.psi1.len() != r.domain.len() || r.psi2.len() != r.domain.len() {
        return Err(ReducerViolation::ColouringLength {
            psi1: r.psi1.len(),
            psi2: r.psi2.len(),
            domain: r.domain.len(),
        });
    }

    let (red1, red2) = r.red_counts();
    let required = r.kind.red_surplus();
    if red1 != red2 + required {
        return Err(ReducerViolation::RedCount { psi1: red1, psi2: red2, required });
    }

    for (psi, name) in [(&r.psi1, "psi1"), (&r.psi2, "psi2")] {
        for v in g.sphere(&r.region, 1) {
            if psi[r.index(v).unwrap()] != Color::Blue {
                return Err(ReducerViolation::BoundaryNotBlue { vertex: v, colouring: name });
            }
        }
        for v in g.sphere(&r.region, 2) {
            if psi[r.index(v).unwrap()] != Color::Red {
                return Err(ReducerViolation::OuterNotRed { vertex: v, colouring: name });
            }
        }
    }

    let c1 = components(g, &r.domain, &r.psi1);
    let c2 = components(g, &r.domain, &r.psi2);
    let set1: HashSet<&Component> = c1.iter().collect();
    let set2: HashSet<&Component> = c2.iter().collect();
    let residual = |cs: &[Component], other: &HashSet<&Component>| {
        let mut out = CensusPair::default();
        for c in cs.iter().filter(|c| !other.contains(c)) {
            out.get_mut(c.0).add(component_key(g, &c.1));
        }
        out
    };
    let before = residual(&c1, &set2);
    let after = residual(&c2, &set1);

    let exempt = |k: &CensusKey| k.path_order().is_some_and(|p| p <= r.t);
    for colour in [Color::Red, Color::Blue] {
        let (b, a) = (before.get(colour), after.get(colour));
        let keys: std::collections::BTreeSet<&CensusKey> = b.keys().chain(a.keys()).collect();
        for key in keys {
            if !exempt(key) && b.count(key) != a.count(key) {
                return Err(ReducerViolation::CensusChanged {
                    colour,
                    key: key.to_string(),
                    psi1: b.count(key),
                    psi2: a.count(key),
                });
            }
        }
    }

    let (r1, r2) = (before.red.path_count(r.t), after.red.path_count(r.t));
    if r2 + 1 != r1 {
        return Err(ReducerViolation::RedPathCount { psi1: r1, psi2: r2 });
    }
    let (b1, b2) = (before.blue.path_count(r.t), after.blue.path_count(r.t));
    if b1 != b2 {
        return Err(ReducerViolation::BluePathCount { psi1: b1, psi2: b2 });
    }

    let changes = |colour: Color| {
        let (b, a) = (before.get(colour), after.get(colour));
        let mut out = BTreeMap::new();
        for key in b.keys().chain(a.keys()) {
            let d = a.count(key) as i64 - b.count(key) as i64;
            if d != 0 {
                out.insert(key.to_string(), d);
            }
        }
        out
    };
    Ok(ReducerCertificate {
        kind: r.kind,
        t: r.t,
        red_counts: (red1, red2),
        red_changes: changes(Color::Red),
        blue_changes: changes(Color::Blue),
    })
}
