//! Points and vertex identifiers shared by all model spaces.

use num_bigint::BigUint;

use crate::rat::{rat_to_string, Rat};
use crate::scalar::Scalar;

/// Vertex identifier in a tree backend. `Idx` indexes a finite config tree,
/// `Word` is a freely reduced word labelling a Cayley-tree vertex, `Lat` is
/// the canonical primitive Hermite triple of a lattice class: the class of
/// the column span of [[p^a, c], [0, p^b]] with 0 <= c < p^a and not all
/// entries divisible by p.
#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum VertexId {
    Idx(usize),
    Word(Vec<i8>),
    Lat { a: u32, b: u32, c: BigUint },
}

impl VertexId {
    pub fn display(&self) -> String {
        match self {
            VertexId::Idx(i) => format!("v{i}"),
            VertexId::Word(w) => word_to_string(w),
            VertexId::Lat { a, b, c } => format!("L({a},{b},{c})"),
        }
    }
}

/// Letters are signed generator indices: 1 = first generator, -1 its
/// inverse, 2 the second, and so on.
pub fn word_to_string(w: &[i8]) -> String {
    if w.is_empty() {
        return "e".into();
    }
    let mut out = String::new();
    for &l in w {
        let c = (b'a' + (l.unsigned_abs() - 1)) as char;
        if l > 0 {
            out.push(c);
        } else {
            out.push(c.to_ascii_uppercase());
        }
    }
    out
}

#[derive(Debug, Clone, PartialEq)]
pub enum Point {
    /// Coordinates; exact rationals unless derived through a square root.
    Euclidean(Vec<Scalar>),
    Vertex(VertexId),
    /// Interior point of the edge {u, v}, `offset` from `u`, with the
    /// canonical orientation key(u) < key(v) and 0 < offset < edge length.
    EdgePoint {
        u: VertexId,
        v: VertexId,
        offset: Rat,
    },
    /// Position on a circle of fixed circumference, canonical in [0, C).
    Circle(Rat),
}

impl Point {
    pub fn euclidean_exact(coords: Vec<Rat>) -> Point {
        Point::Euclidean(coords.into_iter().map(Scalar::Exact).collect())
    }

    pub fn display(&self) -> String {
        match self {
            Point::Euclidean(cs) => format!(
                "({})",
                cs.iter().map(|c| c.display()).collect::<Vec<_>>().join(", ")
            ),
            Point::Vertex(v) => v.display(),
            Point::EdgePoint { u, v, offset } => {
                format!("{}--{}@{}", u.display(), v.display(), rat_to_string(offset))
            }
            Point::Circle(r) => format!("circ({})", rat_to_string(r)),
        }
    }

    /// Vertices adjacent to this tree point (one for a vertex, two for an
    /// edge interior point). Panics on non-tree points.
    pub fn tree_anchors(&self) -> Vec<VertexId> {
        match self {
            Point::Vertex(v) => vec![v.clone()],
            Point::EdgePoint { u, v, .. } => vec![u.clone(), v.clone()],
            _ => panic!("tree_anchors on a non-tree point"),
        }
    }
}
