//! Second stage: correct the path discrepancies of a bisection with mirrored
//! reducer recolourings inside matched ball pairs, close `P_2` (and `P_1`) by
//! counting, and certify the result. [`greedy_repair`] is the desk-scale
//! fallback.

mod repair;

pub use repair::{greedy_repair, Objective, RepairConfig, RepairFailure, RepairOutcome};

use std::collections::BTreeMap;

use serde::Serialize;
use thiserror::Error;

use crate::census::{census_pair, component_key, components_touching, CensusKey, CensusPair, ComponentCensus};
use crate::coloring::{BallMatch, BallPairing, Color, VertexColoring};
use crate::graph::Graph;
use crate::reducers::{find_reducer, Provenance, Reducer, ReducerKind};

// ----------------------------------------------------------------------------
// Certification
// ----------------------------------------------------------------------------

/// Evidence that the colour classes induce isomorphic subgraphs: equal sizes
/// and the common multiset of component classes.
#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct IsomorphismCertificate {
    pub class_size: usize,
    pub components: ComponentCensus,
}

#[derive(Clone, Debug, PartialEq, Eq, Error)]
pub enum Refutation {
    #[error("not a bisection: imbalance {0}")]
    NotBisection(i64),
    #[error("{key}: {red} red vs {blue} blue components")]
    CensusMismatch { key: String, red: usize, blue: usize },
    /// Censuses agree but contain components beyond the canonical-form limit,
    /// whose equality of order and size does not prove isomorphism.
    #[error("undecided: {0} oversized components")]
    Undecided(usize),
}

/// Certifies an isomorphic bisection: `Δ = 0` and equal red and blue
/// censuses. Never certifies when an oversized component is involved.
pub fn verify_isomorphic_bisection(g: &Graph, coloring: &VertexColoring) -> Result<IsomorphismCertificate, Refutation> {
    let delta = coloring.imbalance();
    if delta != 0 {
        return Err(Refutation::NotBisection(delta));
    }
    let c = census_pair(g, coloring);
    if let Some(key) = c.red.keys().chain(c.blue.keys()).find(|k| c.red.count(k) != c.blue.count(k)) {
        return Err(Refutation::CensusMismatch { key: key.to_string(), red: c.red.count(key), blue: c.blue.count(key) });
    }
    let oversized: usize = c.red.iter().filter(|(k, _)| k.is_oversized()).map(|(_, n)| n).sum();
    if oversized > 0 {
        return Err(Refutation::Undecided(oversized));
    }
    Ok(IsomorphismCertificate { class_size: coloring.red_count(), components: c.red })
}

#[derive(Clone, Debug, PartialEq, Eq, Error)]
pub enum ClosureViolation {
    #[error("not a bisection: {red} red vs {blue} blue")]
    NotBisection { red: usize, blue: usize },
    #[error("precondition: {key} is unbalanced")]
    Unbalanced { key: String },
    #[error("edge identity broken: {red_edges} red vs {blue_edges} blue edges predicted equal")]
    EdgeIdentity { red_edges: usize, blue_edges: usize },
    #[error("P_{order} counts {red} vs {blue} contradict the counting identities")]
    PathMismatch { order: usize, red: usize, blue: usize },
}

/// Colour class sizes and monochromatic edge counts of a colouring.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct ClassCounts {
    pub red: usize,
    pub blue: usize,
    pub red_edges: usize,
    pub blue_edges: usize,
    pub red_degree_sum: usize,
    pub blue_degree_sum: usize,
    pub cut: usize,
}

pub fn class_counts(g: &Graph, coloring: &VertexColoring) -> ClassCounts {
    let mut c = ClassCounts { red: 0, blue: 0, red_edges: 0, blue_edges: 0, red_degree_sum: 0, blue_degree_sum: 0, cut: 0 };
    for v in 0..g.order() {
        match coloring.get(v) {
            Color::Red => {
                c.red += 1;
                c.red_degree_sum += g.degree(v);
            }
            Color::Blue => {
                c.blue += 1;
                c.blue_degree_sum += g.degree(v);
            }
        }
    }
    for (u, v) in g.edges() {
        match (coloring.get(u), coloring.get(v)) {
            (Color::Red, Color::Red) => c.red_edges += 1,
            (Color::Blue, Color::Blue) => c.blue_edges += 1,
            _ => c.cut += 1,
        }
    }
    c
}

/// With every class other than `P_1`, `P_2` balanced, the monochromatic edge
/// counts force `r_{P_2} - b_{P_2} = e_red - e_blue` and the class sizes then
/// force `r_{P_1} - b_{P_1}`. Checks the census against both identities.
pub fn p2_closure_from_census(census: &CensusPair, counts: ClassCounts) -> Result<(), ClosureViolation> {
    if counts.red != counts.blue {
        return Err(ClosureViolation::NotBisection { red: counts.red, blue: counts.blue });
    }
    let small = |k: &CensusKey| matches!(k.path_order(), Some(1) | Some(2));
    if let Some(key) =
        census.red.keys().chain(census.blue.keys()).find(|k| !small(k) && census.red.count(k) != census.blue.count(k))
    {
        return Err(ClosureViolation::Unbalanced { key: key.to_string() });
    }
    // 2 e = degree sum - cut for each class
    if 2 * counts.red_edges + counts.cut != counts.red_degree_sum || 2 * counts.blue_edges + counts.cut != counts.blue_degree_sum {
        return Err(ClosureViolation::EdgeIdentity { red_edges: counts.red_edges, blue_edges: counts.blue_edges });
    }
    let p2 = counts.red_edges as i64 - counts.blue_edges as i64;
    let (r2, b2) = (census.red.path_count(2), census.blue.path_count(2));
    if r2 as i64 - b2 as i64 != p2 {
        return Err(ClosureViolation::PathMismatch { order: 2, red: r2, blue: b2 });
    }
    let p1 = counts.red as i64 - counts.blue as i64 - 2 * p2;
    let (r1, b1) = (census.red.path_count(1), census.blue.path_count(1));
    if r1 as i64 - b1 as i64 != p1 {
        return Err(ClosureViolation::PathMismatch { order: 1, red: r1, blue: b1 });
    }
    Ok(())
}

/// [`p2_closure_from_census`] on a colouring of a cubic graph: the edge
/// counts are then equal and `r_{P_2} = b_{P_2}`, `r_{P_1} = b_{P_1}` follow.
pub fn p2_closure_check(g: &Graph, coloring: &VertexColoring) -> Result<(), ClosureViolation> {
    p2_closure_from_census(&census_pair(g, coloring), class_counts(g, coloring))
}

// ----------------------------------------------------------------------------
// Paper route
// ----------------------------------------------------------------------------

#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct BalanceStep {
    pub t: usize,
    pub pair_index: usize,
    pub u: usize,
    pub w: usize,
    pub surplus: Color,
    pub recoloured: usize,
    pub provenance: Provenance,
    /// `r_{P_t} - b_{P_t}` for `t = 1..=6` after the step.
    pub discrepancies: [i64; 6],
}

#[derive(Clone, Debug, PartialEq, Eq, Error)]
pub enum BalanceError {
    #[error("reducer is not a full reducer")]
    NotFull,
    #[error("reducer vertex {0} lies outside the ball around the pair's first centre")]
    RegionEscapesBall(usize),
    #[error("vertex {0} and its image are not oppositely coloured")]
    MirrorMismatch(usize),
    #[error("step changed {key} by {change}, outside the permitted paths")]
    UnexpectedChange { key: String, change: i64 },
    #[error("step moved the P_{t} discrepancy from {before} to {after}")]
    NoProgress { t: usize, before: i64, after: i64 },
}

/// A colouring with its census kept current under local recolouring.
#[derive(Clone, Debug)]
pub struct BalanceState<'g> {
    g: &'g Graph,
    coloring: VertexColoring,
    census: CensusPair,
    pub log: Vec<BalanceStep>,
}

impl<'g> BalanceState<'g> {
    pub fn new(g: &'g Graph, coloring: VertexColoring) -> Self {
        let census = census_pair(g, &coloring);
        BalanceState { g, coloring, census, log: Vec::new() }
    }

    pub fn coloring(&self) -> &VertexColoring {
        &self.coloring
    }

    pub fn census(&self) -> &CensusPair {
        &self.census
    }

    pub fn into_coloring(self) -> VertexColoring {
        self.coloring
    }

    pub fn discrepancies(&self) -> [i64; 6] {
        self.census.path_discrepancies()
    }

    /// `r_H - b_H` for every class with a nonzero value.
    pub fn nonzero_discrepancies(&self) -> BTreeMap<CensusKey, i64> {
        let mut out = BTreeMap::new();
        for key in self.census.red.keys().chain(self.census.blue.keys()) {
            let d = self.census.red.count(key) as i64 - self.census.blue.count(key) as i64;
            if d != 0 {
                out.insert(key.clone(), d);
            }
        }
        out
    }

    /// Recolours and returns the change of `r_H - b_H` per class.
    pub fn recolour(&mut self, changes: &[(usize, Color)]) -> BTreeMap<CensusKey, i64> {
        let mut seeds: Vec<usize> = Vec::new();
        for &(v, _) in changes {
            seeds.push(v);
            seeds.extend_from_slice(self.g.neighbors(v));
        }
        let mut delta: BTreeMap<CensusKey, i64> = BTreeMap::new();
        let sign = |c: Color| if c == Color::Red { 1 } else { -1 };
        for (colour, comp) in components_touching(self.g, &self.coloring, &seeds) {
            let key = component_key(self.g, &comp);
            *delta.entry(key.clone()).or_insert(0) -= sign(colour);
            assert!(self.census.get_mut(colour).remove(&key));
        }
        for &(v, c) in changes {
            self.coloring.set(v, c);
        }
        for (colour, comp) in components_touching(self.g, &self.coloring, &seeds) {
            let key = component_key(self.g, &comp);
            *delta.entry(key.clone()).or_insert(0) += sign(colour);
            self.census.get_mut(colour).add(key);
        }
        delta.retain(|_, d| *d != 0);
        delta
    }
}

/// One balancing step: recolour `B_2(R)` with `psi2` and its mirror image with
/// the opposite of `psi1` (colours exchanged throughout when the surplus is
/// blue). Checks containment and mirroring first and the census change after;
/// a failed check leaves the state untouched.
pub fn apply_reducer_pair(
    state: &mut BalanceState<'_>,
    pair_index: usize,
    m: &BallMatch,
    reducer: &Reducer,
    surplus: Color,
) -> Result<BalanceStep, BalanceError> {
    if reducer.kind != ReducerKind::Full {
        return Err(BalanceError::NotFull);
    }
    let mut changes = Vec::with_capacity(2 * reducer.domain.len());
    for (i, &x) in reducer.domain.iter().enumerate() {
        let y = m.image(x).ok_or(BalanceError::RegionEscapesBall(x))?;
        if state.coloring.get(y) != state.coloring.get(x).opposite() {
            return Err(BalanceError::MirrorMismatch(x));
        }
        let (here, there) = match surplus {
            Color::Red => (reducer.psi2[i], reducer.psi1[i].opposite()),
            Color::Blue => (reducer.psi2[i].opposite(), reducer.psi1[i]),
        };
        changes.push((x, here));
        changes.push((y, there));
    }
    let previous: Vec<(usize, Color)> = changes.iter().map(|&(v, _)| (v, state.coloring.get(v))).collect();
    let t = reducer.t;
    let before = state.discrepancies()[t - 1];
    let delta = state.recolour(&changes);
    let expected = if surplus == Color::Red { -1 } else { 1 };
    let check = || -> Result<(), BalanceError> {
        for (key, &change) in &delta {
            let order = key.path_order();
            if order == Some(t) {
                if change != expected {
                    return Err(BalanceError::NoProgress { t, before, after: before + change });
                }
            } else if !order.is_some_and(|p| p < t) {
                return Err(BalanceError::UnexpectedChange { key: key.to_string(), change });
            }
        }
        if !delta.contains_key(&CensusKey::path(t)) {
            return Err(BalanceError::NoProgress { t, before, after: before });
        }
        Ok(())
    };
    if let Err(e) = check() {
        state.recolour(&previous);
        return Err(e);
    }
    let recoloured = previous.iter().zip(&changes).filter(|(a, b)| a.1 != b.1).count();
    let step = BalanceStep {
        t,
        pair_index,
        u: m.u,
        w: m.w,
        surplus,
        recoloured,
        provenance: reducer.provenance.clone(),
        discrepancies: state.discrepancies(),
    };
    state.log.push(step.clone());
    Ok(step)
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
pub struct BalanceConfig {
    /// Radius around the pair's first centre searched for reducers.
    pub radius_budget: usize,
}

impl Default for BalanceConfig {
    fn default() -> Self {
        BalanceConfig { radius_budget: 50 }
    }
}

#[derive(Clone, Debug, Serialize)]
pub struct BalanceOutcome {
    pub coloring: VertexColoring,
    pub steps: Vec<BalanceStep>,
    pub certificate: IsomorphismCertificate,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum BalanceFailureKind {
    NotBisection { delta: i64 },
    /// a class other than a short path is unbalanced; reducers cannot fix it
    NonPathImbalance { key: String, discrepancy: i64 },
    PairsExhausted { t: usize, remaining: i64 },
    ReducerNotFound { t: usize, centre: usize, diagnostics: String },
    StepRejected { t: usize, centre: usize, reason: String },
    Closure { reason: String },
    Uncertified { reason: String },
}

#[derive(Clone, Debug, Serialize)]
pub struct BalanceFailure {
    pub failure: BalanceFailureKind,
    pub steps: Vec<BalanceStep>,
    pub pairs_used: usize,
}

impl std::fmt::Display for BalanceFailure {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        write!(f, "balancing failed after {} steps: {:?}", self.steps.len(), self.failure)
    }
}

impl std::error::Error for BalanceFailure {}

/// Balances `P_6`, `P_5`, `P_4`, `P_3` in that order, one fresh ball pair per
/// step, then closes `P_2`/`P_1` by counting and certifies.
pub fn balance_all(
    g: &Graph,
    coloring: &VertexColoring,
    pairing: &BallPairing,
    config: &BalanceConfig,
) -> Result<BalanceOutcome, BalanceFailure> {
    let mut state = BalanceState::new(g, coloring.clone());
    let mut next = 0;
    let fail = |state: &BalanceState, next: usize, failure| BalanceFailure { failure, steps: state.log.clone(), pairs_used: next };
    let delta = coloring.imbalance();
    if delta != 0 {
        return Err(fail(&state, next, BalanceFailureKind::NotBisection { delta }));
    }
    let non_path = |state: &BalanceState| {
        state.nonzero_discrepancies().into_iter().find(|(k, _)| !k.path_order().is_some_and(|p| p <= 6))
    };
    if let Some((key, d)) = non_path(&state) {
        return Err(fail(&state, next, BalanceFailureKind::NonPathImbalance { key: key.to_string(), discrepancy: d }));
    }
    for t in (3..=6).rev() {
        loop {
            let d = state.discrepancies()[t - 1];
            if d == 0 {
                break;
            }
            let Some(m) = pairing.pairs.get(next) else {
                return Err(fail(&state, next, BalanceFailureKind::PairsExhausted { t, remaining: d }));
            };
            let reducer = match find_reducer(g, m.u, t, config.radius_budget) {
                Ok(r) => r,
                Err(e) => {
                    let failure = BalanceFailureKind::ReducerNotFound { t, centre: m.u, diagnostics: e.to_string() };
                    return Err(fail(&state, next, failure));
                }
            };
            let surplus = if d > 0 { Color::Red } else { Color::Blue };
            if let Err(e) = apply_reducer_pair(&mut state, next, m, &reducer, surplus) {
                let failure = BalanceFailureKind::StepRejected { t, centre: m.u, reason: e.to_string() };
                return Err(fail(&state, next, failure));
            }
            next += 1;
        }
    }
    if let Some((key, d)) = non_path(&state) {
        return Err(fail(&state, next, BalanceFailureKind::NonPathImbalance { key: key.to_string(), discrepancy: d }));
    }
    if let Err(e) = p2_closure_check(g, state.coloring()) {
        return Err(fail(&state, next, BalanceFailureKind::Closure { reason: e.to_string() }));
    }
    match verify_isomorphic_bisection(g, state.coloring()) {
        Ok(certificate) => Ok(BalanceOutcome { steps: state.log.clone(), coloring: state.into_coloring(), certificate }),
        Err(e) => Err(fail(&state, next, BalanceFailureKind::Uncertified { reason: e.to_string() })),
    }
}
