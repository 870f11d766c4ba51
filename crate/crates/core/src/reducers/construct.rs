use std::fmt;

use thiserror::Error;

use crate::coloring::Color;
use crate::graph::Graph;

use super::search::certified_search;
use super::{verify_reducer, ChordRoute, Provenance, Reducer, ReducerKind, ReducerViolation};

#[derive(Clone, Debug, PartialEq, Eq, Error)]
pub enum ReducerError {
    #[error("precondition failed: {0}")]
    Precondition(String),
    #[error("not found: {0}")]
    NotFound(String),
    /// The construction guarantees a certificate; not finding one is a bug or
    /// a counterexample and is never silently skipped.
    #[error("no certificate exists on the {size}-vertex region {region:?}")]
    SearchExhausted { region: Vec<usize>, size: usize },
    #[error("construction output failed verification: {0}")]
    Uncertified(ReducerViolation),
}

fn certify(g: &Graph, r: Reducer) -> Result<Reducer, ReducerError> {
    verify_reducer(g, &r).map_err(ReducerError::Uncertified)?;
    Ok(r)
}

fn search(g: &Graph, region: &[usize], t: usize, kind: ReducerKind, provenance: Provenance) -> Result<Reducer, ReducerError> {
    match certified_search(g, region, t, kind)? {
        Some(mut r) => {
            r.provenance = provenance;
            Ok(r)
        }
        None => Err(ReducerError::SearchExhausted { region: region.to_vec(), size: region.len() }),
    }
}

/// True when no two external neighbours of the path are adjacent.
pub fn neighbourhood_independent(g: &Graph, path: &[usize]) -> bool {
    let outside = g.sphere(path, 1);
    outside.iter().all(|&u| g.neighbors(u).iter().all(|w| outside.binary_search(w).is_err()))
}

/// The large-girth colouring on a geodesic `v_0 .. v_{t+1}`: the path is red
/// except `v_t` (in `psi1`) or `v_{t-1}` (in `psi2`), `N(P)` blue, `N^2(P)` red.
/// No girth check; the result is verified.
pub fn reducer_on_geodesic(g: &Graph, path: &[usize], t: usize) -> Result<Reducer, ReducerError> {
    if path.len() != t + 2 || !g.is_geodesic(path) {
        return Err(ReducerError::Precondition(format!("need a geodesic on {} vertices", t + 2)));
    }
    let mut region = path.to_vec();
    region.sort_unstable();
    let domain = g.ball_of_set(&region, 2);
    let boundary = g.sphere(&region, 1);
    let colour = |v: usize, blue_on_path: usize| {
        if v == blue_on_path {
            Color::Blue
        } else if region.binary_search(&v).is_ok() {
            Color::Red
        } else if boundary.binary_search(&v).is_ok() {
            Color::Blue
        } else {
            Color::Red
        }
    };
    let r = Reducer {
        kind: ReducerKind::Full,
        t,
        psi1: domain.iter().map(|&v| colour(v, path[t])).collect(),
        psi2: domain.iter().map(|&v| colour(v, path[t - 1])).collect(),
        region,
        domain,
        provenance: Provenance::Geodesic { path: path.to_vec() },
    };
    certify(g, r)
}

/// Geodesic construction for graphs of girth at least 7: a geodesic from `v`
/// to the smallest vertex at distance `t + 1`.
pub fn geodesic_reducer(g: &Graph, v: usize, t: usize) -> Result<Reducer, ReducerError> {
    match g.girth() {
        Some(girth) if girth < 7 => return Err(ReducerError::Precondition(format!("girth {girth} < 7"))),
        _ => {}
    }
    let path = g
        .find_geodesic_of_length(v, t + 1, t + 1)
        .ok_or_else(|| ReducerError::NotFound(format!("no vertex at distance {} from {v}", t + 1)))?;
    reducer_on_geodesic(g, &path, t)
}

/// Chord reducer on `R = Q u {v}`. `Q` is an induced path labelled
/// `(u, x, z, q_1, .., q_{t-1})` (t + 2 vertices) or
/// `(u, x, y, z, q_1, .., q_{t-1})` (t + 3 vertices) and `v` is adjacent to
/// both `x` and `z`.
pub fn chord_reducer(g: &Graph, q: &[usize], v: usize, t: usize) -> Result<Reducer, ReducerError> {
    chord_with_route(g, q, v, t, ChordRoute::Direct)
}

fn chord_with_route(g: &Graph, q: &[usize], v: usize, t: usize, route: ChordRoute) -> Result<Reducer, ReducerError> {
    if !(3..=6).contains(&t) {
        return Err(ReducerError::Precondition(format!("t = {t} outside 3..=6")));
    }
    let z_at = match q.len() {
        n if n == t + 2 => 2,
        n if n == t + 3 => 3,
        n => return Err(ReducerError::Precondition(format!("path has {n} vertices, need {} or {}", t + 2, t + 3))),
    };
    if !g.is_induced_path(q) {
        return Err(ReducerError::Precondition("path is not induced".into()));
    }
    if q.contains(&v) || !g.has_edge(v, q[1]) || !g.has_edge(v, q[z_at]) {
        return Err(ReducerError::Precondition(format!("{v} is not a chord vertex for x = {}, z = {}", q[1], q[z_at])));
    }
    let mut region = q.to_vec();
    region.push(v);
    search(g, &region, t, ReducerKind::Full, Provenance::Chord { path: q.to_vec(), apex: v, route })
}

/// The outside neighbour of each internal vertex of an induced path
/// (`None` at the two ends).
fn outside_neighbours(g: &Graph, q: &[usize]) -> Vec<Option<usize>> {
    (0..q.len())
        .map(|i| {
            if i == 0 || i + 1 == q.len() {
                return None;
            }
            g.neighbors(q[i]).iter().copied().find(|&w| w != q[i - 1] && w != q[i + 1])
        })
        .collect()
}

/// Two path vertices `q_i`, `q_j` (`j = i + 1` or `i + 2`) share an outside
/// neighbour: a chord reducer on the subpath around them, read forwards or
/// backwards, whichever fits.
fn collision_chord(g: &Graph, q: &[usize], i: usize, j: usize, apex: usize, t: usize) -> Result<Reducer, ReducerError> {
    let gap = j - i;
    let last = q.len() - 1;
    let forward = i >= 1 && j + t - 1 <= last;
    let path: Vec<usize> = if forward {
        (i - 1..=j + t - 1).map(|k| q[k]).collect()
    } else if j < last && i + 1 >= t {
        (i + 1 - t..=j + 1).rev().map(|k| q[k]).collect()
    } else {
        return Err(ReducerError::NotFound(format!("collision at {i},{j} too close to both ends")));
    };
    debug_assert_eq!(path.len(), t + 1 + gap);
    chord_with_route(g, &path, apex, t, ChordRoute::Collision)
}

fn first_collision(r: &[Option<usize>], from: usize, to: usize) -> Option<(usize, usize, usize)> {
    for i in from..=to {
        for j in i + 1..=to {
            if r[i].is_some() && r[i] == r[j] {
                return Some((i, j, r[i].unwrap()));
            }
        }
    }
    None
}

/// Reducer or half reducer near a length-14 geodesic `Q = (q_1, .., q_15)`.
///
/// * two `q_i` sharing an outside neighbour: chord reducer;
/// * every `r_i r_{i+1}` present for `3 <= i <= 10`: chord reducer on
///   `(q_2, q_3, q_4, r_4, .., r_{t+3})` with apex `r_3`;
/// * otherwise, for the first missing `r_i r_{i+1}`: half reducer on
///   `{q_{i-1}, .., q_{i+t-1}, r_i, r_{i+1}}`.
pub fn unbalanced_reducer(g: &Graph, q: &[usize], t: usize) -> Result<Reducer, ReducerError> {
    if q.len() != 15 || !g.is_geodesic(q) {
        return Err(ReducerError::Precondition("need a geodesic of length 14".into()));
    }
    if !(3..=6).contains(&t) {
        return Err(ReducerError::Precondition(format!("t = {t} outside 3..=6")));
    }
    // 1-based labels: q(i) = q[i - 1], r(i) = outside neighbour of q(i)
    let r0 = outside_neighbours(g, q);
    let r = |i: usize| r0[i - 1].expect("internal vertex");
    let qq = |i: usize| q[i - 1];

    if let Some((i, j, apex)) = first_collision(&r0, 1, 13) {
        if j - i > 2 {
            return Err(ReducerError::Precondition(format!("q_{} and q_{} share a neighbour", i + 1, j + 1)));
        }
        return collision_chord(g, q, i, j, apex, t);
    }

    if (3..=10).all(|i| g.has_edge(r(i), r(i + 1))) {
        let mut path = vec![qq(2), qq(3), qq(4)];
        path.extend((4..=t + 3).map(r));
        return chord_with_route(g, &path, r(3), t, ChordRoute::Chain);
    }

    let i = (3..=10).find(|&i| !g.has_edge(r(i), r(i + 1))).unwrap();
    let mut region: Vec<usize> = (i - 1..=i + t - 1).map(qq).collect();
    region.extend([r(i), r(i + 1)]);
    search(g, &region, t, ReducerKind::Half, Provenance::UnbalancedHalf { path: q.to_vec(), index: i })
}

/// Glues a half reducer for `t` (on `S1`) and the colour-reversed half reducer
/// for `t - 1` (on `S2`) into a full reducer on `B_rho(v)`, where `rho` is the
/// largest distance from `v` to either domain. The rest of `B_{rho+1}(v)` is
/// blue and `N^{rho+2}(v)` red.
pub fn assemble_composite(g: &Graph, v: usize, s1: &Reducer, s2: &Reducer) -> Result<Reducer, ReducerError> {
    if s1.kind != ReducerKind::Half || s2.kind != ReducerKind::Half || s2.t + 1 != s1.t {
        return Err(ReducerError::Precondition("need half reducers for t and t - 1".into()));
    }
    if s1.domain.iter().any(|x| s2.domain.binary_search(x).is_ok()) {
        return Err(ReducerError::Precondition("the two half reducer domains overlap".into()));
    }
    let dist = g.distances_from(&[v]);
    let rho = s1.domain.iter().chain(&s2.domain).map(|&x| dist[x]).max().unwrap();
    if rho == usize::MAX {
        return Err(ReducerError::Precondition("half reducer outside the component of v".into()));
    }
    let region = g.ball(v, rho);
    let domain = g.ball(v, rho + 2);
    let colour = |x: usize, first: bool| -> Color {
        let pick = |r: &Reducer| if first { r.psi1_of(x) } else { r.psi2_of(x) };
        if let Some(c) = pick(s1) {
            c
        } else if let Some(c) = pick(s2) {
            c.opposite()
        } else if dist[x] <= rho + 1 {
            Color::Blue
        } else {
            Color::Red
        }
    };
    let r = Reducer {
        kind: ReducerKind::Full,
        t: s1.t,
        psi1: domain.iter().map(|&x| colour(x, true)).collect(),
        psi2: domain.iter().map(|&x| colour(x, false)).collect(),
        region,
        domain,
        provenance: Provenance::Composite {
            centre: v,
            radius: rho,
            first: Box::new(s1.provenance.clone()),
            second: Box::new(s2.provenance.clone()),
        },
    };
    certify(g, r)
}

/// Cap on geodesics tried while looking for the second path.
const SECOND_PATH_TRIES: usize = 4096;

/// Two length-14 geodesics inside `B_budget(v)` at distance at least 10.
fn separated_geodesics(g: &Graph, v: usize, budget: usize) -> Result<(Vec<usize>, Vec<usize>), ReducerError> {
    let first = g
        .find_geodesic_of_length(v, 14, budget)
        .ok_or_else(|| ReducerError::NotFound(format!("no length-14 geodesic from {v}")))?;
    let from_first = g.distances_from(&first);
    let from_v = g.distances_from(&[v]);
    let mut starts: Vec<usize> =
        (0..g.order()).filter(|&a| from_v[a] <= budget && from_first[a] != usize::MAX && from_first[a] >= 10).collect();
    starts.sort_by_key(|&a| (from_v[a], a));
    let mut tries = 0;
    for a in starts {
        let mut ends = g.sphere(&[a], 14);
        ends.retain(|&w| from_v[w] <= budget && from_first[w] >= 10);
        for w in ends {
            tries += 1;
            if tries > SECOND_PATH_TRIES {
                return Err(ReducerError::NotFound("gave up looking for a second geodesic".into()));
            }
            let path = g.geodesic(a, w).unwrap();
            if path.iter().all(|&x| from_first[x] >= 10 && from_v[x] <= budget) {
                return Ok((first, path));
            }
        }
    }
    Err(ReducerError::NotFound(format!("no second length-14 geodesic at distance >= 10 within {budget} of {v}")))
}

/// Reducer for `4 <= t <= 6` around `v`: a full reducer near either of two
/// separated length-14 geodesics if one exists, otherwise the composite of
/// their half reducers.
pub fn composite_reducer(g: &Graph, v: usize, t: usize, radius_budget: usize) -> Result<Reducer, ReducerError> {
    if !(4..=6).contains(&t) {
        return Err(ReducerError::Precondition(format!("t = {t} outside 4..=6")));
    }
    let (q, r) = separated_geodesics(g, v, radius_budget)?;
    let s1 = unbalanced_reducer(g, &q, t)?;
    if s1.kind == ReducerKind::Full {
        return Ok(s1);
    }
    let full = unbalanced_reducer(g, &r, t)?;
    if full.kind == ReducerKind::Full {
        return Ok(full);
    }
    let s2 = unbalanced_reducer(g, &r, t - 1)?;
    if s2.kind == ReducerKind::Full {
        return Ok(s2);
    }
    assemble_composite(g, v, &s1, &s2)
}

fn check_p3_path(g: &Graph, q: &[usize]) -> Result<Vec<Option<usize>>, ReducerError> {
    if q.len() != 21 || !g.is_geodesic(q) {
        return Err(ReducerError::Precondition("need a geodesic of length 20".into()));
    }
    Ok(outside_neighbours(g, q))
}

/// Case (a) of the `t = 3` routine at index `i`: none of `r_i r_{i+1}`,
/// `r_i r_{i+2}`, `r_{i+1} r_{i+2}` present; region
/// `{q_{i-1}, .., q_{i+3}, r_i, r_{i+1}, r_{i+2}}`.
pub fn p3_case_a(g: &Graph, q: &[usize], i: usize) -> Result<Reducer, ReducerError> {
    let r = check_p3_path(g, q)?;
    if !(3..=9).contains(&i) {
        return Err(ReducerError::Precondition(format!("index {i} outside 3..=9")));
    }
    let (a, b, c) = (r[i].unwrap(), r[i + 1].unwrap(), r[i + 2].unwrap());
    if g.has_edge(a, b) || g.has_edge(a, c) || g.has_edge(b, c) {
        return Err(ReducerError::Precondition(format!("case (a) fails at {i}")));
    }
    let mut region: Vec<usize> = q[i - 1..=i + 3].to_vec();
    region.extend([a, b, c]);
    search(g, &region, 3, ReducerKind::Full, Provenance::P3Case { case: 'a', index: i, mirrored: false })
}

/// Case (c) of the `t = 3` routine at index `i`. Unmirrored:
/// `r_i r_{i+3}` present, region `{q_{i-1}, .., q_{i+3}, r_i, .., r_{i+3}}`;
/// mirrored: `r_{i-2} r_{i+1}` present, region
/// `{q_{i-2}, .., q_{i+2}, r_{i-2}, .., r_{i+1}}`.
pub fn p3_case_c(g: &Graph, q: &[usize], i: usize, mirrored: bool) -> Result<Reducer, ReducerError> {
    let r = check_p3_path(g, q)?;
    if !(3..=8).contains(&i) {
        return Err(ReducerError::Precondition(format!("index {i} outside 3..=8")));
    }
    let rr = |k: usize| r[k].unwrap();
    let e = |a: usize, b: usize| g.has_edge(rr(a), rr(b));
    let common = e(i, i + 1) && !e(i + 1, i + 2) && !e(i + 1, i + 3) && !e(i - 1, i) && !e(i - 2, i);
    let (ok, lo, hi) = if mirrored { (e(i - 2, i + 1), i - 2, i + 1) } else { (e(i, i + 3), i, i + 3) };
    if !common || !ok {
        return Err(ReducerError::Precondition(format!("case (c) fails at {i}")));
    }
    let mut region: Vec<usize> = if mirrored { q[i - 2..=i + 2].to_vec() } else { q[i - 1..=i + 3].to_vec() };
    region.extend((lo..=hi).map(rr));
    search(g, &region, 3, ReducerKind::Full, Provenance::P3Case { case: 'c', index: i, mirrored })
}

/// `P_3`-reducer near a length-20 geodesic from `v`: shared outside
/// neighbours, then cases (a), (b), (c) of the chord pattern in that order.
pub fn find_p3_reducer(g: &Graph, v: usize, radius_budget: usize) -> Result<Reducer, ReducerError> {
    let q = g
        .find_geodesic_of_length(v, 20, radius_budget)
        .ok_or_else(|| ReducerError::NotFound(format!("no length-20 geodesic from {v}")))?;
    let r = check_p3_path(g, &q)?;
    if let Some((i, j, apex)) = first_collision(&r, 1, 19) {
        if j - i > 2 {
            return Err(ReducerError::Precondition(format!("q_{i} and q_{j} share a neighbour")));
        }
        return collision_chord(g, &q, i, j, apex, 3);
    }
    let rr = |k: usize| r[k].unwrap();
    let e = |a: usize, b: usize| g.has_edge(rr(a), rr(b));

    if let Some(i) = (3..=9).find(|&i| !e(i, i + 1) && !e(i, i + 2) && !e(i + 1, i + 2)) {
        return p3_case_a(g, &q, i);
    }
    for i in 3..=10 {
        if !e(i, i + 1) {
            continue;
        }
        let (a, b) = (rr(i), rr(i + 1));
        let third = |x: usize, not: [usize; 2]| g.neighbors(x).iter().copied().find(|w| !not.contains(w)).unwrap();
        if !e(i, i + 2) && !e(i, i + 3) {
            let path = vec![third(a, [q[i], b]), a, q[i], q[i + 1], q[i + 2], q[i + 3]];
            return chord_with_route(g, &path, b, 3, ChordRoute::P3CaseB);
        }
        if !e(i - 1, i + 1) && !e(i - 2, i + 1) {
            let path = vec![third(b, [q[i + 1], a]), b, q[i + 1], q[i], q[i - 1], q[i - 2]];
            return chord_with_route(g, &path, a, 3, ChordRoute::P3CaseB);
        }
    }
    for i in 3..=8 {
        for mirrored in [false, true] {
            match p3_case_c(g, &q, i, mirrored) {
                Err(ReducerError::Precondition(_)) => continue,
                other => return other,
            }
        }
    }
    Err(ReducerError::NotFound("no case of the chord pattern applies".into()))
}

/// Why the dispatcher found nothing: one line per branch tried.
#[derive(Clone, Debug, Default, PartialEq, Eq)]
pub struct FindFailure {
    pub attempts: Vec<(String, String)>,
}

impl fmt::Display for FindFailure {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let parts: Vec<String> = self.attempts.iter().map(|(b, why)| format!("{b}: {why}")).collect();
        write!(f, "no reducer found ({})", parts.join("; "))
    }
}

impl std::error::Error for FindFailure {}

/// Dispatcher: the geodesic construction when the neighbourhood of `v` has no
/// cycle shorter than 7, then the `t = 3` routine, then the length-14
/// geodesic route and (for `t >= 4`) the composite fallback. Construction errors other than "not
/// found" are returned as diagnostics too, never as reducers.
pub fn find_reducer(g: &Graph, v: usize, t: usize, radius_budget: usize) -> Result<Reducer, FindFailure> {
    let mut fail = FindFailure::default();
    if !(3..=6).contains(&t) {
        fail.attempts.push(("dispatch".into(), format!("t = {t} outside 3..=6")));
        return Err(fail);
    }
    let local = g.induced(&g.ball(v, (t + 4).min(radius_budget)));
    if local.girth().is_none_or(|girth| girth >= 7) {
        let attempt = g
            .find_geodesic_of_length(v, t + 1, radius_budget)
            .ok_or_else(|| ReducerError::NotFound(format!("no vertex at distance {}", t + 1)))
            .and_then(|p| reducer_on_geodesic(g, &p, t));
        match attempt {
            Ok(r) => return Ok(r),
            Err(e) => fail.attempts.push(("geodesic".into(), e.to_string())),
        }
    }
    if t == 3 {
        match find_p3_reducer(g, v, radius_budget) {
            Ok(r) => return Ok(r),
            Err(e) => fail.attempts.push(("p3".into(), e.to_string())),
        }
    }
    match g.find_geodesic_of_length(v, 14, radius_budget) {
        None => fail.attempts.push(("unbalanced".into(), "no length-14 geodesic".into())),
        Some(q) => match unbalanced_reducer(g, &q, t) {
            Ok(r) if r.kind == ReducerKind::Full => return Ok(r),
            Ok(_) => fail.attempts.push(("unbalanced".into(), "only a half reducer".into())),
            Err(e) => fail.attempts.push(("unbalanced".into(), e.to_string())),
        },
    }
    if t == 3 {
        return Err(fail);
    }
    match composite_reducer(g, v, t, radius_budget) {
        Ok(r) => Ok(r),
        Err(e) => {
            fail.attempts.push(("composite".into(), e.to_string()));
            Err(fail)
        }
    }
}
