//! Vertex colourings and the randomised first stage: a uniformly random proper
//! colouring of `F1`, repair to an exact bisection, separated ball centres,
//! ball classification and matching of oppositely coloured isomorphic balls.

use std::collections::BTreeMap;
use std::fmt;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Deserializer, Serialize, Serializer};
use thiserror::Error;

use crate::canon::{labeling_from_bits, CanonicalForm, Labeling};
use crate::census::census_pair;
use crate::decompose::{Forest, LinearForestPair};
use crate::graph::{Graph, SMALL_GRAPH_LIMIT};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Color {
    Red,
    Blue,
}

impl Color {
    pub fn opposite(self) -> Color {
        match self {
            Color::Red => Color::Blue,
            Color::Blue => Color::Red,
        }
    }

    pub fn letter(self) -> char {
        match self {
            Color::Red => 'R',
            Color::Blue => 'B',
        }
    }
}

/// A total red/blue assignment.
#[derive(Clone, PartialEq, Eq, Hash)]
pub struct VertexColoring {
    colors: Vec<Color>,
}

impl VertexColoring {
    pub fn new(colors: Vec<Color>) -> Self {
        VertexColoring { colors }
    }

    pub fn uniform(n: usize, c: Color) -> Self {
        VertexColoring { colors: vec![c; n] }
    }

    pub fn from_red_set(n: usize, red: &[usize]) -> Self {
        let mut colors = vec![Color::Blue; n];
        for &v in red {
            colors[v] = Color::Red;
        }
        VertexColoring { colors }
    }

    pub fn len(&self) -> usize {
        self.colors.len()
    }

    pub fn is_empty(&self) -> bool {
        self.colors.is_empty()
    }

    pub fn get(&self, v: usize) -> Color {
        self.colors[v]
    }

    pub fn set(&mut self, v: usize, c: Color) {
        self.colors[v] = c;
    }

    pub fn flip(&mut self, v: usize) {
        self.colors[v] = self.colors[v].opposite();
    }

    pub fn as_slice(&self) -> &[Color] {
        &self.colors
    }

    pub fn red_count(&self) -> usize {
        self.colors.iter().filter(|&&c| c == Color::Red).count()
    }

    /// `#red - #blue`.
    pub fn imbalance(&self) -> i64 {
        2 * self.red_count() as i64 - self.colors.len() as i64
    }

    pub fn red_vertices(&self) -> Vec<usize> {
        (0..self.colors.len()).filter(|&v| self.colors[v] == Color::Red).collect()
    }

    pub fn opposite(&self) -> VertexColoring {
        VertexColoring { colors: self.colors.iter().map(|c| c.opposite()).collect() }
    }

    /// True when no edge of the list is monochromatic.
    pub fn is_proper_on(&self, edges: &[(usize, usize)]) -> bool {
        edges.iter().all(|&(u, v)| self.colors[u] != self.colors[v])
    }

    pub fn to_letters(&self) -> String {
        self.colors.iter().map(|c| c.letter()).collect()
    }

    pub fn from_letters(s: &str) -> Option<Self> {
        s.chars()
            .map(|ch| match ch {
                'R' | 'r' => Some(Color::Red),
                'B' | 'b' => Some(Color::Blue),
                _ => None,
            })
            .collect::<Option<Vec<_>>>()
            .map(VertexColoring::new)
    }
}

impl fmt::Debug for VertexColoring {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "VertexColoring({})", self.to_letters())
    }
}

impl Serialize for VertexColoring {
    fn serialize<S: Serializer>(&self, s: S) -> Result<S::Ok, S::Error> {
        s.serialize_str(&self.to_letters())
    }
}

impl<'de> Deserialize<'de> for VertexColoring {
    fn deserialize<D: Deserializer<'de>>(d: D) -> Result<Self, D::Error> {
        let s = String::deserialize(d)?;
        VertexColoring::from_letters(&s).ok_or_else(|| serde::de::Error::custom("colouring must consist of R/B"))
    }
}

// ----------------------------------------------------------------------------
// Random proper colouring of F1
// ----------------------------------------------------------------------------

/// One fair bit per `F1` path (in `paths_of` order), drawn from the seed.
pub fn path_choices(pair: &LinearForestPair, seed: u64) -> Vec<bool> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    (0..pair.paths_of(Forest::F1).len()).map(|_| rng.gen()).collect()
}

/// The colouring in which path `i` of `F1` starts red iff `choices[i]`, and
/// alternates along the path.
pub fn coloring_from_choices(pair: &LinearForestPair, choices: &[bool]) -> VertexColoring {
    let paths = pair.paths_of(Forest::F1);
    assert_eq!(paths.len(), choices.len());
    let mut colors = vec![Color::Blue; pair.order()];
    for (path, &start_red) in paths.iter().zip(choices) {
        for (k, &v) in path.iter().enumerate() {
            colors[v] = if (k % 2 == 0) == start_red { Color::Red } else { Color::Blue };
        }
    }
    VertexColoring::new(colors)
}

/// Uniformly random proper colouring of `F1`: each path independently takes
/// one of its two alternating colourings.
pub fn random_proper_coloring(pair: &LinearForestPair, seed: u64) -> VertexColoring {
    coloring_from_choices(pair, &path_choices(pair, seed))
}

/// `r_{P_t} - b_{P_t}` for `t = 1..=6`.
pub fn path_discrepancies(g: &Graph, coloring: &VertexColoring) -> [i64; 6] {
    census_pair(g, coloring).path_discrepancies()
}

// ----------------------------------------------------------------------------
// Bisection repair
// ----------------------------------------------------------------------------

#[derive(Clone, Debug, PartialEq, Eq, Error)]
pub enum BisectionError {
    #[error("imbalance {0} is odd")]
    OddImbalance(i64),
    #[error("need {needed} even-length F1 paths with the surplus colour, only {available} exist")]
    NotEnoughPaths { needed: usize, available: usize },
}

#[derive(Clone, Debug)]
pub struct Bisection {
    pub coloring: VertexColoring,
    /// Indices (in `paths_of(F1)` order) of the paths whose colouring was swapped.
    pub flipped_paths: Vec<usize>,
    pub recoloured_vertices: usize,
}

/// Swaps the colouring of `|Δ|/2` even-length `F1` paths whose surplus colour
/// matches the global surplus, in path order. Each swap moves `Δ` by exactly 2
/// towards zero and keeps the colouring proper on `F1`.
pub fn make_bisection(coloring: &VertexColoring, pair: &LinearForestPair) -> Result<Bisection, BisectionError> {
    let delta = coloring.imbalance();
    if delta % 2 != 0 {
        return Err(BisectionError::OddImbalance(delta));
    }
    let surplus = if delta > 0 { Color::Red } else { Color::Blue };
    let needed = (delta.unsigned_abs() / 2) as usize;
    let mut out = coloring.clone();
    let mut flipped = Vec::with_capacity(needed);
    let mut recoloured = 0;
    let paths = pair.paths_of(Forest::F1);
    let candidates: Vec<usize> = (0..paths.len())
        .filter(|&i| paths[i].len() % 2 == 1 && coloring.get(paths[i][0]) == surplus)
        .collect();
    if candidates.len() < needed {
        return Err(BisectionError::NotEnoughPaths { needed, available: candidates.len() });
    }
    for &i in candidates.iter().take(needed) {
        for &v in &paths[i] {
            out.flip(v);
        }
        recoloured += paths[i].len();
        flipped.push(i);
    }
    debug_assert_eq!(out.imbalance(), 0);
    Ok(Bisection { coloring: out, flipped_paths: flipped, recoloured_vertices: recoloured })
}

// ----------------------------------------------------------------------------
// Separated centres and ball classes
// ----------------------------------------------------------------------------

/// Greedy by vertex id: take the smallest remaining vertex and discard its
/// `2d`-ball. Chosen centres are pairwise at distance at least `2d + 1`.
pub fn select_separated_centres(g: &Graph, d: usize) -> Vec<usize> {
    let n = g.order();
    let mut removed = vec![false; n];
    let mut centres = Vec::new();
    for v in 0..n {
        if removed[v] {
            continue;
        }
        centres.push(v);
        for layer in g.layers(&[v], 2 * d) {
            for w in layer {
                removed[w] = true;
            }
        }
    }
    centres
}

/// Lower bound `n / (3 * 2^(2d+1))` on the number of greedy centres.
pub fn centre_count_bound(n: usize, d: usize) -> f64 {
    n as f64 / (3.0 * 2f64.powi(2 * d as i32 + 1))
}

#[derive(Clone, Debug, PartialEq, Eq, Error)]
pub enum BallError {
    #[error("ball of radius {d} around {centre} has {size} vertices, above the limit {SMALL_GRAPH_LIMIT}")]
    TooLarge { centre: usize, d: usize, size: usize },
}

/// One classified ball.
#[derive(Clone, Debug)]
pub struct Ball {
    pub centre: usize,
    /// Sorted vertex set of `B_d(centre)`.
    pub vertices: Vec<usize>,
    /// Class key: coloured, rooted canonical form.
    pub key: CanonicalForm,
    /// Key of the colour-reversed ball.
    pub opposite_key: CanonicalForm,
    labeling: Labeling,
    opposite_labeling: Labeling,
}

/// Balls grouped by class.
#[derive(Clone, Debug)]
pub struct BallClassCensus {
    pub d: usize,
    pub balls: Vec<Ball>,
    /// class key -> indices into `balls`, in centre order
    pub classes: BTreeMap<CanonicalForm, Vec<usize>>,
}

impl BallClassCensus {
    /// Number of distinct classes (κ).
    pub fn kappa(&self) -> usize {
        self.classes.len()
    }

    /// Class sizes `Y_j`, largest first.
    pub fn histogram(&self) -> Vec<usize> {
        let mut h: Vec<usize> = self.classes.values().map(Vec::len).collect();
        h.sort_unstable_by(|a, b| b.cmp(a));
        h
    }
}

fn ball_codes(vertices: &[usize], centre: usize, coloring: &VertexColoring, reversed: bool) -> Vec<u8> {
    vertices
        .iter()
        .map(|&v| {
            let c = if reversed { coloring.get(v).opposite() } else { coloring.get(v) };
            let base = if c == Color::Red { 1 } else { 0 };
            if v == centre { base + 2 } else { base }
        })
        .collect()
}

fn ball_bits(g: &Graph, vertices: &[usize]) -> Vec<u64> {
    let mut bits = vec![0u64; vertices.len()];
    for (i, &v) in vertices.iter().enumerate() {
        for &w in g.neighbors(v) {
            if let Ok(j) = vertices.binary_search(&w) {
                bits[i] |= 1 << j;
            }
        }
    }
    bits
}

/// Classifies each `B_d(c)` by its coloured canonical form with the centre
/// individualised, so isomorphisms between balls of a class fix centres.
pub fn classify_balls(
    g: &Graph,
    coloring: &VertexColoring,
    centres: &[usize],
    d: usize,
) -> Result<BallClassCensus, BallError> {
    let mut balls = Vec::with_capacity(centres.len());
    let mut classes: BTreeMap<CanonicalForm, Vec<usize>> = BTreeMap::new();
    for &c in centres {
        let vertices = g.ball(c, d);
        if vertices.len() > SMALL_GRAPH_LIMIT {
            return Err(BallError::TooLarge { centre: c, d, size: vertices.len() });
        }
        let bits = ball_bits(g, &vertices);
        let labeling = labeling_from_bits(&bits, Some(&ball_codes(&vertices, c, coloring, false))).expect("size checked");
        let opposite_labeling =
            labeling_from_bits(&bits, Some(&ball_codes(&vertices, c, coloring, true))).expect("size checked");
        classes.entry(labeling.form.clone()).or_default().push(balls.len());
        balls.push(Ball {
            centre: c,
            vertices,
            key: labeling.form.clone(),
            opposite_key: opposite_labeling.form.clone(),
            labeling,
            opposite_labeling,
        });
    }
    Ok(BallClassCensus { d, balls, classes })
}

/// A matched pair of balls with a colour-reversing isomorphism
/// `B_d(u) -> B_d(w)` fixing centres.
#[derive(Clone, Debug, Serialize)]
pub struct BallMatch {
    pub u: usize,
    pub w: usize,
    /// `(x, image of x)` for every `x` in `B_d(u)`, sorted by `x`.
    pub map: Vec<(usize, usize)>,
}

impl BallMatch {
    pub fn image(&self, x: usize) -> Option<usize> {
        self.map.binary_search_by_key(&x, |&(a, _)| a).ok().map(|i| self.map[i].1)
    }

    pub fn domain(&self) -> impl Iterator<Item = usize> + '_ {
        self.map.iter().map(|&(a, _)| a)
    }
}

#[derive(Clone, Debug, Serialize)]
pub struct BallPairing {
    pub d: usize,
    pub pairs: Vec<BallMatch>,
    pub unmatched: Vec<usize>,
}

impl BallPairing {
    pub fn len(&self) -> usize {
        self.pairs.len()
    }

    pub fn is_empty(&self) -> bool {
        self.pairs.is_empty()
    }
}

fn match_balls(a: &Ball, b: &Ball) -> BallMatch {
    // a with colours reversed has the same form as b
    let inv_b = b.labeling.inverse();
    let map = a
        .vertices
        .iter()
        .enumerate()
        .map(|(i, &x)| (x, b.vertices[inv_b[a.opposite_labeling.position[i]]]))
        .collect();
    BallMatch { u: a.centre, w: b.centre, map }
}

/// Matches every class with its opposite class (lowest centres first); a
/// self-opposite class is matched within itself. Every produced map is checked
/// to be a colour-reversing isomorphism.
pub fn pair_opposite_balls(g: &Graph, census: &BallClassCensus, coloring: &VertexColoring) -> BallPairing {
    let mut used = vec![false; census.balls.len()];
    let mut pairs = Vec::new();
    let mut order: Vec<(&CanonicalForm, &Vec<usize>)> = census.classes.iter().collect();
    order.sort_by_key(|(_, members)| members[0]);
    for (key, members) in order {
        let opposite = &census.balls[members[0]].opposite_key;
        let partners: Vec<usize> = if opposite == key {
            members.clone()
        } else {
            census.classes.get(opposite).cloned().unwrap_or_default()
        };
        let mine: Vec<usize> = members.iter().copied().filter(|&i| !used[i]).collect();
        let theirs: Vec<usize> = partners.iter().copied().filter(|&i| !used[i]).collect();
        if opposite == key {
            for chunk in mine.chunks(2) {
                if let [a, b] = *chunk {
                    used[a] = true;
                    used[b] = true;
                    pairs.push(match_balls(&census.balls[a], &census.balls[b]));
                }
            }
        } else {
            for (&a, &b) in mine.iter().zip(&theirs) {
                used[a] = true;
                used[b] = true;
                pairs.push(match_balls(&census.balls[a], &census.balls[b]));
            }
        }
    }
    for m in &pairs {
        assert!(check_ball_match(g, coloring, m), "ball match {}-{} is not colour reversing", m.u, m.w);
    }
    pairs.sort_by_key(|m| m.u.min(m.w));
    let unmatched = (0..census.balls.len()).filter(|&i| !used[i]).map(|i| census.balls[i].centre).collect();
    BallPairing { d: census.d, pairs, unmatched }
}

/// Pointwise check: the map is a bijection onto the partner ball, preserves
/// adjacency in both directions and reverses every colour.
pub fn check_ball_match(g: &Graph, coloring: &VertexColoring, m: &BallMatch) -> bool {
    let images: std::collections::HashSet<usize> = m.map.iter().map(|&(_, y)| y).collect();
    if images.len() != m.map.len() {
        return false;
    }
    if m.image(m.u) != Some(m.w) {
        return false;
    }
    for &(x, y) in &m.map {
        if coloring.get(x) == coloring.get(y) {
            return false;
        }
        for &(x2, y2) in &m.map {
            if g.has_edge(x, x2) != g.has_edge(y, y2) {
                return false;
            }
        }
    }
    true
}

/// McDiarmid tail bound `2 exp(-2 m^2 / (c^2 n))`.
pub fn mcdiarmid_bound(c: f64, n: f64, m: f64) -> f64 {
    assert!(c > 0.0 && n > 0.0 && m >= 0.0);
    2.0 * (-2.0 * m * m / (c * c * n)).exp()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::decompose::thomassen_decompose;
    use crate::fixtures;

    #[test]
    fn single_path_has_two_colourings() {
        let pair = LinearForestPair::new(4, vec![(0, 1), (1, 2), (2, 3)], vec![]);
        let a = coloring_from_choices(&pair, &[true]);
        let b = coloring_from_choices(&pair, &[false]);
        assert_eq!(a.to_letters(), "RBRB");
        assert_eq!(b.to_letters(), "BRBR");
    }

    #[test]
    fn proper_on_f1_and_exchangeable() {
        let g = fixtures::petersen();
        let pair = thomassen_decompose(&g, 5, 5, 1 << 20).found().unwrap();
        for seed in 0..20 {
            let choices = path_choices(&pair, seed);
            let c = coloring_from_choices(&pair, &choices);
            assert!(c.is_proper_on(pair.edges(Forest::F1)));
            let flipped: Vec<bool> = choices.iter().map(|b| !b).collect();
            assert_eq!(coloring_from_choices(&pair, &flipped), c.opposite());
        }
    }

    #[test]
    fn bisection_counting() {
        // two even paths (3 vertices each) both with red surplus, Δ = 2
        let pair = LinearForestPair::new(6, vec![(0, 1), (1, 2), (3, 4), (4, 5)], vec![]);
        let c = coloring_from_choices(&pair, &[true, true]);
        assert_eq!(c.imbalance(), 2);
        let b = make_bisection(&c, &pair).unwrap();
        assert_eq!(b.flipped_paths, vec![0]);
        assert_eq!(b.coloring.imbalance(), 0);
        let balanced = coloring_from_choices(&pair, &[true, false]);
        assert_eq!(make_bisection(&balanced, &pair).unwrap().coloring, balanced);
        let odd = LinearForestPair::new(4, vec![(0, 1), (2, 3)], vec![]);
        let c = VertexColoring::uniform(4, Color::Red);
        assert!(matches!(make_bisection(&c, &odd), Err(BisectionError::NotEnoughPaths { .. })));
    }

    #[test]
    fn centres() {
        let k4 = fixtures::k4();
        assert_eq!(select_separated_centres(&k4, 0), vec![0, 1, 2, 3]);
        assert_eq!(select_separated_centres(&fixtures::petersen(), 1).len(), 1);
        let cl = fixtures::circular_ladder(40);
        let cs = select_separated_centres(&cl, 2);
        assert!(cs.len() as f64 >= centre_count_bound(80, 2));
        for (i, &a) in cs.iter().enumerate() {
            for &b in &cs[i + 1..] {
                assert!(cl.distance(a, b).unwrap() >= 5);
            }
        }
    }

    #[test]
    fn opposite_balls_pair_up() {
        // circular ladder with an anti-periodic colouring: column i red on the outer rail iff i is even
        let cl = fixtures::circular_ladder(40);
        let red: Vec<usize> = (0..40).flat_map(|i| if i % 2 == 0 { vec![i] } else { vec![40 + i] }).collect();
        let col = VertexColoring::from_red_set(80, &red);
        let cs = select_separated_centres(&cl, 3);
        let census = classify_balls(&cl, &col, &cs, 3).unwrap();
        let pairing = pair_opposite_balls(&cl, &census, &col);
        assert!(!pairing.is_empty());
        for m in &pairing.pairs {
            assert!(check_ball_match(&cl, &col, m));
        }
        let mono_red = VertexColoring::uniform(80, Color::Red);
        let census = classify_balls(&cl, &mono_red, &cs, 3).unwrap();
        assert_eq!(census.kappa(), 1);
        let b = &census.balls[0];
        assert_ne!(b.key, b.opposite_key);
        assert!(pair_opposite_balls(&cl, &census, &mono_red).is_empty());
    }

    #[test]
    fn mcdiarmid_closed_form() {
        let n: f64 = 1e4;
        let m = (n * n.ln()).sqrt();
        let b = mcdiarmid_bound(12.0, n, m);
        assert!((b - 2.0 * n.powf(-1.0 / 72.0)).abs() < 1e-12);
        assert_eq!(mcdiarmid_bound(3.0, 10.0, 0.0), 2.0);
    }
}
