//! Geometric path descriptions underlying generalized geodesics.
//!
//! A path is parametrized by arc length starting at 0. Finite paths have an
//! exact length for tree models and a certified one for Euclidean models;
//! bi-infinite paths (lattice axes, Euclidean lines) are parametrized over
//! all of R.

use crate::error::{Error, Result};
use crate::group::element::GroupElement;
use crate::model::point::{Point, VertexId};
use crate::rat::Rat;
use crate::scalar::Scalar;

#[derive(Debug, Clone, PartialEq)]
pub enum Path {
    Constant(Point),
    /// Euclidean straight segment from `x` to `y`; `len` = |y - x|.
    Segment {
        x: Vec<Scalar>,
        y: Vec<Scalar>,
        len: Scalar,
    },
    /// Bi-infinite Euclidean line through `base` with direction `dir`
    /// (not necessarily unit; `norm` = |dir| certifies unit-speed eval).
    Line {
        base: Vec<Rat>,
        dir: Vec<Rat>,
        norm: Scalar,
    },
    /// Tree path from `start` to `end` through the listed vertices, which
    /// are consecutive-adjacent; `cum[i]` is the arc length from `start` to
    /// `stops[i]`, and `len` the total length. All exact.
    TreeSeg {
        start: Point,
        stops: Vec<VertexId>,
        end: Point,
        cum: Vec<Rat>,
        len: Rat,
    },
    /// Bi-infinite axis of a hyperbolic tree isometry: the vertex `anchor`
    /// lies on the axis, parameter 0 sits at arc length `phase` past the
    /// anchor, and `gen` translates the axis by `period`.
    TreeAxis {
        gen: GroupElement,
        anchor: VertexId,
        period: Rat,
        phase: Rat,
    },
    /// Arc on the circle from `start`, signed sweep `sweep` (|sweep| at
    /// most half the circumference, so the arc is the unique geodesic).
    CircArc { start: Rat, sweep: Rat },
}

impl Path {
    /// Arc-length extent: None for bi-infinite paths.
    pub fn length(&self) -> Option<Scalar> {
        match self {
            Path::Constant(_) => Some(Scalar::zero()),
            Path::Segment { len, .. } => Some(len.clone()),
            Path::TreeSeg { len, .. } => Some(Scalar::Exact(len.clone())),
            Path::CircArc { sweep, .. } => Some(Scalar::Exact(num_traits::Signed::abs(sweep))),
            Path::Line { .. } | Path::TreeAxis { .. } => None,
        }
    }

    pub fn is_bi_infinite(&self) -> bool {
        matches!(self, Path::Line { .. } | Path::TreeAxis { .. })
    }

    /// Endpoint at parameter 0 (finite paths only).
    pub fn start_point(&self) -> Result<Point> {
        match self {
            Path::Constant(p) => Ok(p.clone()),
            Path::Segment { x, .. } => Ok(Point::Euclidean(x.clone())),
            Path::TreeSeg { start, .. } => Ok(start.clone()),
            Path::CircArc { start, .. } => Ok(Point::Circle(start.clone())),
            _ => Err(Error::domain("bi-infinite path has no start point")),
        }
    }

    pub fn end_point(&self) -> Result<Point> {
        match self {
            Path::Constant(p) => Ok(p.clone()),
            Path::Segment { y, .. } => Ok(Point::Euclidean(y.clone())),
            Path::TreeSeg { end, .. } => Ok(end.clone()),
            Path::CircArc { start, sweep } => Ok(Point::Circle(start + sweep)),
            _ => Err(Error::domain("bi-infinite path has no end point")),
        }
    }
}
