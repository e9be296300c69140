//! Circle with a fixed-angle rotation action of Z. Negative control: with a
//! high-denominator rotation the action is free and smooth but not proper
//! at any budget the probes can afford.

use std::sync::Arc;

use num_traits::{One, Signed, Zero};

use crate::error::{Error, Result};
use crate::group::element::GroupElement;
use crate::model::path::Path;
use crate::model::point::{Point, VertexId};
use crate::model::{Model, ModelConfig, ModelHandle};
use crate::rat::{parse_rat, rat, rat_floor, Rat};
use crate::scalar::Scalar;

pub struct Circle {
    circumference: Rat,
    rotation: Rat,
}

pub fn build(cfg: &ModelConfig) -> Result<ModelHandle> {
    match cfg {
        ModelConfig::Circle {
            circumference,
            rotation,
        } => {
            let c = parse_rat(circumference)?;
            if c <= Rat::zero() {
                return Err(Error::config("circumference must be positive"));
            }
            let r = parse_rat(rotation)?;
            Ok(Arc::new(Circle {
                circumference: c,
                rotation: r,
            }))
        }
        _ => Err(Error::config("circle builder got a wrong config")),
    }
}

impl Circle {
    pub fn new(circumference: Rat, rotation: Rat) -> Circle {
        Circle {
            circumference,
            rotation,
        }
    }

    pub fn reduce(&self, r: &Rat) -> Rat {
        let q = r / &self.circumference;
        let f = Rat::from_integer(rat_floor(&q));
        r - f * &self.circumference
    }

    fn pos<'a>(&self, x: &'a Point) -> Result<&'a Rat> {
        match x {
            Point::Circle(r) => Ok(r),
            _ => Err(Error::domain("point not on this circle")),
        }
    }

    fn steps<'a>(&self, g: &'a GroupElement) -> Result<&'a Rat> {
        match g {
            GroupElement::Translation(v) if v.len() == 1 && v[0].denom().is_one() => Ok(&v[0]),
            _ => Err(Error::domain("circle group expects integer rotation counts")),
        }
    }
}

impl Model for Circle {
    fn kind_name(&self) -> &'static str {
        "circle"
    }

    fn describe(&self) -> String {
        format!(
            "circle of circumference {} with rotation step {}",
            self.circumference, self.rotation
        )
    }

    fn base_point(&self) -> Point {
        Point::Circle(Rat::zero())
    }

    fn check_point(&self, x: &Point) -> Result<()> {
        let r = self.pos(x)?;
        if r.is_negative() || *r >= self.circumference {
            Err(Error::domain("circle point must be reduced to [0, C)"))
        } else {
            Ok(())
        }
    }

    fn distance(&self, x: &Point, y: &Point) -> Result<Scalar> {
        let a = self.pos(x)?;
        let b = self.pos(y)?;
        let d = self.reduce(&(a - b));
        let other = &self.circumference - &d;
        Ok(Scalar::Exact(d.min(other)))
    }

    fn path(&self, x: &Point, y: &Point) -> Result<Path> {
        let a = self.pos(x)?;
        let b = self.pos(y)?;
        if a == b {
            return Ok(Path::Constant(x.clone()));
        }
        let fwd = self.reduce(&(b - a));
        let half = &self.circumference / rat(2, 1);
        let sweep = if fwd <= half {
            fwd
        } else {
            &fwd - &self.circumference
        };
        Ok(Path::CircArc {
            start: a.clone(),
            sweep,
        })
    }

    fn vertex_dist(&self, _u: &VertexId, _v: &VertexId) -> Result<Rat> {
        Err(Error::domain("no tree structure on the circle"))
    }

    fn vertex_path(&self, _u: &VertexId, _v: &VertexId) -> Result<Vec<VertexId>> {
        Err(Error::domain("no tree structure on the circle"))
    }

    fn neighbors(&self, _v: &VertexId) -> Result<Vec<VertexId>> {
        Err(Error::domain("no tree structure on the circle"))
    }

    fn edge_len(&self, _u: &VertexId, _v: &VertexId) -> Result<Rat> {
        Err(Error::domain("no tree structure on the circle"))
    }

    fn identity(&self) -> GroupElement {
        GroupElement::Translation(vec![Rat::zero()])
    }

    fn mul(&self, g: &GroupElement, h: &GroupElement) -> Result<GroupElement> {
        let a = self.steps(g)?;
        let b = self.steps(h)?;
        Ok(GroupElement::Translation(vec![a + b]))
    }

    fn inv(&self, g: &GroupElement) -> Result<GroupElement> {
        let a = self.steps(g)?;
        Ok(GroupElement::Translation(vec![-a]))
    }

    fn elem_eq(&self, g: &GroupElement, h: &GroupElement) -> bool {
        g == h
    }

    fn elem_key(&self, g: &GroupElement) -> String {
        g.display()
    }

    fn act_point(&self, g: &GroupElement, x: &Point) -> Result<Point> {
        let k = self.steps(g)?;
        let r = self.pos(x)?;
        Ok(Point::Circle(self.reduce(&(r + k * &self.rotation))))
    }

    fn dg_origin(&self, g: &GroupElement) -> Result<Scalar> {
        let k = self.steps(g)?;
        Ok(Scalar::Exact(k.abs()))
    }

    fn ball(&self, beta: &Rat, _precision: u32) -> Result<Vec<GroupElement>> {
        let mut out = Vec::new();
        let mut k = Rat::zero();
        while &k < beta {
            out.push(GroupElement::Translation(vec![k.clone()]));
            if !k.is_zero() {
                out.push(GroupElement::Translation(vec![-k.clone()]));
            }
            k = k + Rat::from_integer(1.into());
            if out.len() > 100_000 {
                return Err(Error::budget("circle ball exceeds the enumeration cap"));
            }
        }
        out.sort_by_key(|g| g.display());
        Ok(out)
    }

    fn point_translators(&self, x: &Point, y: &Point, precision: u32) -> Result<Vec<GroupElement>> {
        // Solved by bounded scan; the rotation may be a high-denominator
        // approximant, so this is honest but budgeted.
        let cap = 1000i64.max(precision as i64);
        let mut out = Vec::new();
        for k in -cap..=cap {
            let g = GroupElement::Translation(vec![Rat::from_integer(k.into())]);
            if self.act_point(&g, x)? == *y {
                out.push(g);
            }
        }
        Ok(out)
    }

    fn stabilizer_reps(&self, _x: &Point, _precision: u32) -> Result<Vec<GroupElement>> {
        Ok(vec![self.identity()])
    }

    fn orbit_normalizer(&self, _x: &Point) -> Result<GroupElement> {
        Ok(self.identity())
    }

    fn parse_elem(&self, s: &str) -> Result<GroupElement> {
        let k = parse_rat(s)?;
        if !k.denom().is_one() {
            return Err(Error::config("circle rotations are integer powers"));
        }
        Ok(GroupElement::Translation(vec![k]))
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn unit_circle() -> Circle {
        Circle::new(rat(1, 1), rat(6765, 10946))
    }

    #[test]
    fn arc_distance() {
        let m = unit_circle();
        let x = Point::Circle(rat(1, 10));
        let y = Point::Circle(rat(9, 10));
        assert_eq!(m.distance(&x, &y).unwrap(), Scalar::Exact(rat(1, 5)));
    }

    #[test]
    fn rotation_orbit_wanders() {
        let m = unit_circle();
        let g = m.parse_elem("1").unwrap();
        let mut x = m.base_point();
        let mut seen = std::collections::BTreeSet::new();
        for _ in 0..50 {
            x = m.act_point(&g, &x).unwrap();
            seen.insert(format!("{:?}", x));
        }
        assert_eq!(seen.len(), 50, "orbit points must stay distinct");
    }
}
