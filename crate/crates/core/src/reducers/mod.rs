//! P_t-reducers: small regions with two insulated colourings whose censuses
//! differ only by trading one red `P_t` for shorter paths.
//!
//! Every constructor returns a value that has passed [`verify_reducer`].
//! Colourings the constructions only describe pictorially are recovered by
//! [`certified_search`] over the interior of the region.

mod construct;
mod search;
mod verify;

pub use construct::{
    assemble_composite, chord_reducer, composite_reducer, find_p3_reducer, find_reducer, geodesic_reducer,
    neighbourhood_independent, p3_case_a, p3_case_c, reducer_on_geodesic, unbalanced_reducer, FindFailure,
    ReducerError,
};
pub use search::certified_search;
pub use verify::{verify_reducer, ReducerCertificate, ReducerViolation};

use serde::{Deserialize, Deserializer, Serialize, Serializer};

use crate::coloring::Color;

/// Full reducers satisfy (i) equal red counts; half reducers satisfy (i'):
/// `psi1` has exactly one more red vertex than `psi2`.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum ReducerKind {
    Full,
    Half,
}

impl ReducerKind {
    /// Required `red(psi1) - red(psi2)`.
    pub fn red_surplus(self) -> usize {
        match self {
            ReducerKind::Full => 0,
            ReducerKind::Half => 1,
        }
    }
}

/// How a chord reducer's path was obtained.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ChordRoute {
    Direct,
    /// two path vertices share their outside neighbour
    Collision,
    /// every `r_i r_{i+1}` edge is present along the geodesic
    Chain,
    /// the `t = 3` routine, case (b)
    P3CaseB,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(tag = "construction", rename_all = "snake_case")]
pub enum Provenance {
    Geodesic { path: Vec<usize> },
    Chord { path: Vec<usize>, apex: usize, route: ChordRoute },
    UnbalancedHalf { path: Vec<usize>, index: usize },
    Composite { centre: usize, radius: usize, first: Box<Provenance>, second: Box<Provenance> },
    P3Case { case: char, index: usize, mirrored: bool },
    Search,
}

/// A region `R` with colourings `psi1`, `psi2` of `B_2(R)`.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct Reducer {
    pub kind: ReducerKind,
    pub t: usize,
    /// `R`, sorted.
    pub region: Vec<usize>,
    /// `B_2(R)`, sorted; `psi1` and `psi2` are aligned with it.
    pub domain: Vec<usize>,
    #[serde(serialize_with = "letters", deserialize_with = "from_letters")]
    pub psi1: Vec<Color>,
    #[serde(serialize_with = "letters", deserialize_with = "from_letters")]
    pub psi2: Vec<Color>,
    pub provenance: Provenance,
}

fn letters<S: Serializer>(c: &[Color], s: S) -> Result<S::Ok, S::Error> {
    s.serialize_str(&c.iter().map(|c| c.letter()).collect::<String>())
}

fn from_letters<'de, D: Deserializer<'de>>(d: D) -> Result<Vec<Color>, D::Error> {
    let s = String::deserialize(d)?;
    s.chars()
        .map(|c| match c {
            'R' => Ok(Color::Red),
            'B' => Ok(Color::Blue),
            other => Err(serde::de::Error::custom(format!("unexpected colour letter {other:?}"))),
        })
        .collect()
}

impl Reducer {
    fn index(&self, v: usize) -> Option<usize> {
        self.domain.binary_search(&v).ok()
    }

    pub fn psi1_of(&self, v: usize) -> Option<Color> {
        self.index(v).map(|i| self.psi1[i])
    }

    pub fn psi2_of(&self, v: usize) -> Option<Color> {
        self.index(v).map(|i| self.psi2[i])
    }

    pub fn red_counts(&self) -> (usize, usize) {
        let count = |c: &[Color]| c.iter().filter(|&&x| x == Color::Red).count();
        (count(&self.psi1), count(&self.psi2))
    }

    /// Vertices whose colour differs between `psi1` and `psi2`.
    pub fn changed_vertices(&self) -> Vec<usize> {
        (0..self.domain.len()).filter(|&i| self.psi1[i] != self.psi2[i]).map(|i| self.domain[i]).collect()
    }
}
