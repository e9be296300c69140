//! Point-level geometry shared by all tree backends: distances between
//! points (vertices or edge-interior points) and geodesic paths, built on
//! the backend's exact vertex metric.

use num_traits::Zero;

use crate::error::{Error, Result};
use crate::model::path::Path;
use crate::model::point::{Point, VertexId};
use crate::model::Model;
use crate::rat::Rat;

struct Side {
    /// Exit vertex and the distance from the point to it.
    vertex: VertexId,
    toll: Rat,
}

fn sides(model: &dyn Model, x: &Point) -> Result<Vec<Side>> {
    match x {
        Point::Vertex(v) => Ok(vec![Side {
            vertex: v.clone(),
            toll: Rat::zero(),
        }]),
        Point::EdgePoint { u, v, offset } => {
            let len = model.edge_len(u, v)?;
            Ok(vec![
                Side {
                    vertex: u.clone(),
                    toll: offset.clone(),
                },
                Side {
                    vertex: v.clone(),
                    toll: &len - offset,
                },
            ])
        }
        _ => Err(Error::domain("tree geometry on a non-tree point")),
    }
}

fn same_edge(x: &Point, y: &Point) -> Option<(Rat, Rat)> {
    match (x, y) {
        (
            Point::EdgePoint { u: u1, v: v1, offset: o1 },
            Point::EdgePoint { u: u2, v: v2, offset: o2 },
        ) if u1 == u2 && v1 == v2 => Some((o1.clone(), o2.clone())),
        _ => None,
    }
}

/// Vertex on the edge of `x`, if `y` is one of its endpoints.
fn endpoint_of(x: &Point, y: &Point) -> bool {
    match (x, y) {
        (Point::EdgePoint { u, v, .. }, Point::Vertex(w)) => u == w || v == w,
        _ => false,
    }
}

pub fn tree_distance(model: &dyn Model, x: &Point, y: &Point) -> Result<Rat> {
    if x == y {
        return Ok(Rat::zero());
    }
    if let Some((o1, o2)) = same_edge(x, y) {
        return Ok(num_traits::Signed::abs(&(o1 - o2)));
    }
    let sx = sides(model, x)?;
    let sy = sides(model, y)?;
    let mut best: Option<Rat> = None;
    for a in &sx {
        for b in &sy {
            let d = &a.toll + model.vertex_dist(&a.vertex, &b.vertex)? + &b.toll;
            if best.as_ref().map_or(true, |c| d < *c) {
                best = Some(d);
            }
        }
    }
    best.ok_or_else(|| Error::domain("no connecting path"))
}

/// Geodesic path between tree points. The stop list runs from the exit
/// vertex on the x side to the entry vertex on the y side (inclusive); the
/// degenerate same-edge case carries no stops.
pub fn tree_path(model: &dyn Model, x: &Point, y: &Point) -> Result<Path> {
    if x == y {
        return Ok(Path::Constant(x.clone()));
    }
    if let Some((o1, o2)) = same_edge(x, y) {
        return Ok(Path::TreeSeg {
            start: x.clone(),
            stops: vec![],
            end: y.clone(),
            cum: vec![],
            len: num_traits::Signed::abs(&(o1 - o2)),
        });
    }
    // A vertex endpoint of x's own edge: still a single-edge walk.
    if endpoint_of(x, y) || endpoint_of(y, x) {
        let d = tree_distance(model, x, y)?;
        return Ok(Path::TreeSeg {
            start: x.clone(),
            stops: vec![],
            end: y.clone(),
            cum: vec![],
            len: d,
        });
    }
    let sx = sides(model, x)?;
    let sy = sides(model, y)?;
    let mut best: Option<(Rat, &Side, &Side)> = None;
    for a in &sx {
        for b in &sy {
            let d = &a.toll + model.vertex_dist(&a.vertex, &b.vertex)? + &b.toll;
            if best.as_ref().map_or(true, |(c, _, _)| d < *c) {
                best = Some((d, a, b));
            }
        }
    }
    let (len, a, b) = best.ok_or_else(|| Error::domain("no connecting path"))?;
    let stops = model.vertex_path(&a.vertex, &b.vertex)?;
    let mut cum = Vec::with_capacity(stops.len());
    let mut acc = a.toll.clone();
    cum.push(acc.clone());
    for w in stops.windows(2) {
        acc = &acc + model.edge_len(&w[0], &w[1])?;
        cum.push(acc.clone());
    }
    Ok(Path::TreeSeg {
        start: x.clone(),
        stops,
        end: y.clone(),
        cum,
        len,
    })
}

/// Translation length and an on-axis vertex for a tree isometry: walks the
/// displacement function downhill from the base vertex. Errors when the
/// element is elliptic (fixes a point), since it then has no axis.
pub fn axis_of(
    model: &dyn Model,
    g: &crate::group::element::GroupElement,
) -> Result<(VertexId, Rat)> {
    let base = match model.base_point() {
        Point::Vertex(v) => v,
        _ => return Err(Error::domain("axis search needs a vertex base point")),
    };
    let mut v = base;
    let mut d = {
        let gv = model.act_point(g, &Point::Vertex(v.clone()))?;
        match gv {
            Point::Vertex(w) => model.vertex_dist(&v, &w)?,
            _ => return Err(Error::domain("group element must map vertices to vertices")),
        }
    };
    if d.is_zero() {
        return Err(Error::degenerate("element fixes a vertex: no axis"));
    }
    loop {
        // Step toward g.v; on the axis the displacement stops dropping.
        let gv = match model.act_point(g, &Point::Vertex(v.clone()))? {
            Point::Vertex(w) => w,
            _ => unreachable!(),
        };
        let path = model.vertex_path(&v, &gv)?;
        if path.len() < 2 {
            break;
        }
        let next = path[1].clone();
        let gnext = match model.act_point(g, &Point::Vertex(next.clone()))? {
            Point::Vertex(w) => w,
            _ => unreachable!(),
        };
        let dn = model.vertex_dist(&next, &gnext)?;
        if dn < d {
            v = next;
            d = dn;
        } else {
            break;
        }
    }
    if d.is_zero() {
        return Err(Error::degenerate("element fixes a vertex: no axis"));
    }
    Ok((v, d))
}
