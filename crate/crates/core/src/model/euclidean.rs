//! Euclidean space R^n with the integer translation lattice Z^n acting.
//! Distances are exact when the squared distance is a rational square and
//! certified enclosures otherwise.

use std::sync::Arc;

use num_traits::{One, Signed, Zero};

use crate::error::{Error, Result};
use crate::group::element::GroupElement;
use crate::model::path::Path;
use crate::model::point::{Point, VertexId};
use crate::model::{Model, ModelConfig, ModelHandle};
use crate::rat::{parse_rat, rat_floor, rat_int, Rat};
use crate::scalar::Scalar;

pub struct Euclidean {
    dim: usize,
    enum_cap: usize,
}

pub fn build(cfg: &ModelConfig) -> Result<ModelHandle> {
    match cfg {
        ModelConfig::Euclidean { dimension } => {
            if *dimension == 0 || *dimension > 16 {
                return Err(Error::config("euclidean dimension must be in 1..=16"));
            }
            Ok(Arc::new(Euclidean {
                dim: *dimension,
                enum_cap: 200_000,
            }))
        }
        _ => Err(Error::config("euclidean builder got a wrong config")),
    }
}

/// Exact square root of a rational if it is a perfect square.
pub fn exact_sqrt(r: &Rat) -> Option<Rat> {
    if r.is_negative() {
        return None;
    }
    let sn = r.numer().sqrt();
    let sd = r.denom().sqrt();
    if &(&sn * &sn) == r.numer() && &(&sd * &sd) == r.denom() {
        Some(Rat::new(sn, sd))
    } else {
        None
    }
}

/// |v| for a scalar coordinate vector: exact when possible.
pub fn norm(coords: &[Scalar]) -> Scalar {
    let mut sq_exact: Option<Rat> = Some(Rat::zero());
    for c in coords {
        match (&mut sq_exact, c.as_exact()) {
            (Some(acc), Some(r)) => *acc = acc.clone() + r * r,
            _ => {
                sq_exact = None;
                break;
            }
        }
    }
    if let Some(sq) = sq_exact {
        if let Some(root) = exact_sqrt(&sq) {
            return Scalar::Exact(root);
        }
        return Scalar::Enclosed(crate::interval::Interval::from_rat(&sq).sqrt());
    }
    let mut sq = crate::interval::Interval::zero();
    for c in coords {
        let iv = c.interval();
        sq = sq.add(&iv.mul(&iv));
    }
    Scalar::Enclosed(sq.sqrt())
}

impl Euclidean {
    pub fn new(dim: usize) -> Euclidean {
        Euclidean {
            dim,
            enum_cap: 200_000,
        }
    }

    fn coords<'a>(&self, x: &'a Point) -> Result<&'a [Scalar]> {
        match x {
            Point::Euclidean(cs) if cs.len() == self.dim => Ok(cs),
            Point::Euclidean(_) => Err(Error::domain("wrong dimension")),
            _ => Err(Error::domain("point not in this Euclidean space")),
        }
    }

    fn translation<'a>(&self, g: &'a GroupElement) -> Result<&'a [Rat]> {
        match g {
            GroupElement::Translation(v) if v.len() == self.dim => Ok(v),
            GroupElement::Translation(_) => Err(Error::domain("wrong translation dimension")),
            _ => Err(Error::domain("euclidean group expects translations")),
        }
    }
}

impl Model for Euclidean {
    fn kind_name(&self) -> &'static str {
        "euclidean"
    }

    fn describe(&self) -> String {
        format!("Euclidean R^{} with the Z^{} translation lattice", self.dim, self.dim)
    }

    fn base_point(&self) -> Point {
        Point::Euclidean(vec![Scalar::zero(); self.dim])
    }

    fn check_point(&self, x: &Point) -> Result<()> {
        self.coords(x).map(|_| ())
    }

    fn distance(&self, x: &Point, y: &Point) -> Result<Scalar> {
        let a = self.coords(x)?;
        let b = self.coords(y)?;
        let diffs: Vec<Scalar> = a.iter().zip(b.iter()).map(|(p, q)| p.sub(q)).collect();
        Ok(norm(&diffs))
    }

    fn path(&self, x: &Point, y: &Point) -> Result<Path> {
        let a = self.coords(x)?.to_vec();
        let b = self.coords(y)?.to_vec();
        if a == b {
            return Ok(Path::Constant(x.clone()));
        }
        let len = self.distance(x, y)?;
        Ok(Path::Segment { x: a, y: b, len })
    }

    fn vertex_dist(&self, _u: &VertexId, _v: &VertexId) -> Result<Rat> {
        Err(Error::domain("no tree structure on Euclidean space"))
    }

    fn vertex_path(&self, _u: &VertexId, _v: &VertexId) -> Result<Vec<VertexId>> {
        Err(Error::domain("no tree structure on Euclidean space"))
    }

    fn neighbors(&self, _v: &VertexId) -> Result<Vec<VertexId>> {
        Err(Error::domain("no tree structure on Euclidean space"))
    }

    fn edge_len(&self, _u: &VertexId, _v: &VertexId) -> Result<Rat> {
        Err(Error::domain("no tree structure on Euclidean space"))
    }

    fn identity(&self) -> GroupElement {
        GroupElement::Translation(vec![Rat::zero(); self.dim])
    }

    fn mul(&self, g: &GroupElement, h: &GroupElement) -> Result<GroupElement> {
        let a = self.translation(g)?;
        let b = self.translation(h)?;
        Ok(GroupElement::Translation(
            a.iter().zip(b.iter()).map(|(p, q)| p + q).collect(),
        ))
    }

    fn inv(&self, g: &GroupElement) -> Result<GroupElement> {
        let a = self.translation(g)?;
        Ok(GroupElement::Translation(a.iter().map(|p| -p).collect()))
    }

    fn elem_eq(&self, g: &GroupElement, h: &GroupElement) -> bool {
        g == h
    }

    fn elem_key(&self, g: &GroupElement) -> String {
        g.display()
    }

    fn act_point(&self, g: &GroupElement, x: &Point) -> Result<Point> {
        let v = self.translation(g)?;
        let cs = self.coords(x)?;
        Ok(Point::Euclidean(
            cs.iter()
                .zip(v.iter())
                .map(|(c, t)| c.add(&Scalar::Exact(t.clone())))
                .collect(),
        ))
    }

    fn dg_origin(&self, g: &GroupElement) -> Result<Scalar> {
        let v = self.translation(g)?;
        if v.iter().all(|c| c.is_zero()) {
            return Ok(Scalar::zero());
        }
        // Displacement plus the unit fix term: nonzero translations fix
        // nothing.
        let coords: Vec<Scalar> = v.iter().cloned().map(Scalar::Exact).collect();
        Ok(norm(&coords).add(&Scalar::from_int(1)))
    }

    fn ball(&self, beta: &Rat, _precision: u32) -> Result<Vec<GroupElement>> {
        let mut out = vec![self.identity()];
        let reach = beta - rat_int(1);
        if reach <= Rat::zero() {
            return Ok(out);
        }
        // |v| < beta - 1 within the integer lattice: box scan.
        let m = rat_floor(&reach);
        use num_traits::ToPrimitive;
        let m = m.to_i64().unwrap_or(0);
        let mut idx = vec![-m; self.dim];
        let reach_sq = &reach * &reach;
        loop {
            let v: Vec<Rat> = idx.iter().map(|k| rat_int(*k)).collect();
            let nsq: Rat = v.iter().map(|c| c * c).sum();
            if !nsq.is_zero() && nsq < reach_sq {
                out.push(GroupElement::Translation(v));
            }
            if out.len() > self.enum_cap {
                return Err(Error::budget("lattice ball exceeds the enumeration cap"));
            }
            // Odometer increment.
            let mut i = 0;
            loop {
                if i == self.dim {
                    out.sort_by_key(|g| g.display());
                    return Ok(out);
                }
                idx[i] += 1;
                if idx[i] <= m {
                    break;
                }
                idx[i] = -m;
                i += 1;
            }
        }
    }

    fn point_translators(
        &self,
        x: &Point,
        y: &Point,
        _precision: u32,
    ) -> Result<Vec<GroupElement>> {
        let a = self.coords(x)?;
        let b = self.coords(y)?;
        let mut v = Vec::with_capacity(self.dim);
        for (p, q) in a.iter().zip(b.iter()) {
            match (p.as_exact(), q.as_exact()) {
                (Some(pp), Some(qq)) => {
                    let d = qq - pp;
                    if !d.denom().is_one() {
                        return Ok(vec![]);
                    }
                    v.push(d);
                }
                _ => return Ok(vec![]),
            }
        }
        Ok(vec![GroupElement::Translation(v)])
    }

    fn stabilizer_reps(&self, _x: &Point, _precision: u32) -> Result<Vec<GroupElement>> {
        Ok(vec![self.identity()])
    }

    fn orbit_normalizer(&self, x: &Point) -> Result<GroupElement> {
        let cs = self.coords(x)?;
        let v: Vec<Rat> = cs
            .iter()
            .map(|c| match c.as_exact() {
                Some(r) => -Rat::from_integer(rat_floor(r)),
                None => -Rat::from_integer(rat_floor(&c.interval().mid_rat())),
            })
            .collect();
        Ok(GroupElement::Translation(v))
    }

    fn parse_elem(&self, s: &str) -> Result<GroupElement> {
        let parts: Vec<&str> = s.split(',').collect();
        if parts.len() != self.dim {
            return Err(Error::config(format!(
                "translation needs {} comma-separated rationals",
                self.dim
            )));
        }
        let v = parts
            .iter()
            .map(|p| parse_rat(p))
            .collect::<Result<Vec<_>>>()?;
        Ok(GroupElement::Translation(v))
    }
}

pub fn point_from_rats(coords: &[&str]) -> Result<Point> {
    let cs = coords
        .iter()
        .map(|s| Ok(Scalar::Exact(parse_rat(s)?)))
        .collect::<Result<Vec<_>>>()?;
    Ok(Point::Euclidean(cs))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::rat::rat;

    #[test]
    fn exact_sqrt_detection() {
        assert_eq!(exact_sqrt(&rat(9, 4)), Some(rat(3, 2)));
        assert_eq!(exact_sqrt(&rat(2, 1)), None);
        assert_eq!(exact_sqrt(&rat(0, 1)), Some(rat(0, 1)));
    }

    #[test]
    fn one_dimensional_distances_are_exact() {
        let m = Euclidean::new(1);
        let x = point_from_rats(&["0"]).unwrap();
        let y = point_from_rats(&["3"]).unwrap();
        assert_eq!(m.distance(&x, &y).unwrap(), Scalar::Exact(rat(3, 1)));
        assert_eq!(m.distance(&x, &x).unwrap(), Scalar::zero());
    }

    #[test]
    fn irrational_distance_is_enclosed() {
        let m = Euclidean::new(2);
        let x = point_from_rats(&["0", "0"]).unwrap();
        let y = point_from_rats(&["1", "1"]).unwrap();
        let d = m.distance(&x, &y).unwrap();
        assert!(!d.is_exact());
        let iv = d.interval();
        assert!(iv.contains(std::f64::consts::SQRT_2));
        assert!(iv.width() < 1e-12);
    }

    #[test]
    fn lattice_ball() {
        let m = Euclidean::new(2);
        // beta = 5/2: norm < 3/2 admits the 4 units and 4 diagonals.
        let ball = m.ball(&rat(5, 2), 0).unwrap();
        assert_eq!(ball.len(), 9);
        // beta = 2: no nonzero vector has norm < 1.
        let ball = m.ball(&rat(2, 1), 0).unwrap();
        assert_eq!(ball.len(), 1);
    }

    fn dummy_display(g: &GroupElement) -> String {
        g.display()
    }

    #[test]
    fn ball_closed_under_inversion() {
        let m = Euclidean::new(2);
        let ball = m.ball(&rat(7, 2), 0).unwrap();
        for g in &ball {
            let gi = m.inv(g).unwrap();
            assert!(
                ball.iter().any(|h| m.elem_eq(h, &gi)),
                "missing inverse of {}",
                dummy_display(g)
            );
        }
    }
}
