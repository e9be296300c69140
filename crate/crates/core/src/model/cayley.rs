//! Cayley tree of a free group of finite rank, depth-bounded but never
//! materialized: vertices are freely reduced words, and all geometry is
//! word algebra. The group acts by left multiplication; d_G is the word
//! metric.

use std::sync::Arc;

use num_traits::Zero;

use crate::error::{Error, Result};
use crate::group::element::{parse_word, reduce_word, GroupElement};
use crate::model::path::Path;
use crate::model::point::{Point, VertexId};
use crate::model::tree_common;
use crate::model::{Model, ModelConfig, ModelHandle};
use crate::rat::{rat_floor, rat_int, Rat};
use crate::scalar::Scalar;

pub struct CayleyTree {
    rank: u8,
    depth: u32,
    /// Hard cap on ball enumeration size.
    enum_cap: usize,
}

pub fn build(cfg: &ModelConfig) -> Result<ModelHandle> {
    match cfg {
        ModelConfig::Cayley { rank, depth } => {
            if *rank == 0 || *rank > 8 {
                return Err(Error::config("cayley rank must be in 1..=8"));
            }
            Ok(Arc::new(CayleyTree {
                rank: *rank,
                depth: *depth,
                enum_cap: 400_000,
            }))
        }
        _ => Err(Error::config("cayley builder got a non-cayley config")),
    }
}

impl CayleyTree {
    pub fn new(rank: u8, depth: u32) -> CayleyTree {
        CayleyTree {
            rank,
            depth,
            enum_cap: 400_000,
        }
    }

    fn word(&self, v: &VertexId) -> Result<Vec<i8>> {
        match v {
            VertexId::Word(w) => Ok(w.clone()),
            _ => Err(Error::domain("vertex not in this Cayley tree")),
        }
    }

    fn check_depth(&self, w: &[i8]) -> Result<()> {
        if w.len() as u32 > self.depth {
            Err(Error::budget(format!(
                "word of length {} exceeds the depth bound {}",
                w.len(),
                self.depth
            )))
        } else {
            Ok(())
        }
    }

    fn letters(&self) -> Vec<i8> {
        let mut out = Vec::with_capacity(2 * self.rank as usize);
        for i in 1..=self.rank as i8 {
            out.push(i);
            out.push(-i);
        }
        out
    }
}

fn common_prefix(a: &[i8], b: &[i8]) -> usize {
    a.iter().zip(b.iter()).take_while(|(x, y)| x == y).count()
}

impl Model for CayleyTree {
    fn kind_name(&self) -> &'static str {
        "cayley"
    }

    fn describe(&self) -> String {
        format!(
            "Cayley tree of the free group of rank {}, depth {}",
            self.rank, self.depth
        )
    }

    fn base_point(&self) -> Point {
        Point::Vertex(VertexId::Word(vec![]))
    }

    fn check_point(&self, x: &Point) -> Result<()> {
        match x {
            Point::Vertex(v) => {
                let w = self.word(v)?;
                self.check_depth(&w)
            }
            Point::EdgePoint { u, v, offset } => {
                self.edge_len(u, v)?;
                if offset > &Rat::zero() && offset < &Rat::from_integer(1.into()) {
                    Ok(())
                } else {
                    Err(Error::domain("edge point offset not interior"))
                }
            }
            _ => Err(Error::domain("point not in this Cayley tree")),
        }
    }

    fn distance(&self, x: &Point, y: &Point) -> Result<Scalar> {
        Ok(Scalar::Exact(tree_common::tree_distance(self, x, y)?))
    }

    fn path(&self, x: &Point, y: &Point) -> Result<Path> {
        tree_common::tree_path(self, x, y)
    }

    fn vertex_dist(&self, u: &VertexId, v: &VertexId) -> Result<Rat> {
        let a = self.word(u)?;
        let b = self.word(v)?;
        let cp = common_prefix(&a, &b);
        Ok(rat_int((a.len() + b.len() - 2 * cp) as i64))
    }

    fn vertex_path(&self, u: &VertexId, v: &VertexId) -> Result<Vec<VertexId>> {
        let a = self.word(u)?;
        let b = self.word(v)?;
        let cp = common_prefix(&a, &b);
        let mut out = Vec::with_capacity(a.len() + b.len() - 2 * cp + 1);
        let mut cur = a.clone();
        out.push(VertexId::Word(cur.clone()));
        while cur.len() > cp {
            cur.pop();
            out.push(VertexId::Word(cur.clone()));
        }
        for &l in &b[cp..] {
            cur.push(l);
            out.push(VertexId::Word(cur.clone()));
        }
        Ok(out)
    }

    fn neighbors(&self, v: &VertexId) -> Result<Vec<VertexId>> {
        let w = self.word(v)?;
        let mut out = Vec::new();
        for l in self.letters() {
            let mut n = w.clone();
            if n.last() == Some(&-l) {
                n.pop();
            } else {
                n.push(l);
            }
            if n.len() as u32 <= self.depth {
                out.push(VertexId::Word(n));
            }
        }
        out.sort();
        out.dedup();
        Ok(out)
    }

    fn edge_len(&self, u: &VertexId, v: &VertexId) -> Result<Rat> {
        let a = self.word(u)?;
        let b = self.word(v)?;
        let d = a.len().abs_diff(b.len());
        let cp = common_prefix(&a, &b);
        if d == 1 && cp == a.len().min(b.len()) {
            Ok(rat_int(1))
        } else {
            Err(Error::domain("vertices are not adjacent"))
        }
    }

    fn identity(&self) -> GroupElement {
        GroupElement::identity_word()
    }

    fn mul(&self, g: &GroupElement, h: &GroupElement) -> Result<GroupElement> {
        match (g, h) {
            (GroupElement::Word(a), GroupElement::Word(b)) => {
                let mut cat = a.clone();
                cat.extend_from_slice(b);
                Ok(GroupElement::Word(reduce_word(&cat)))
            }
            _ => Err(Error::domain("free group expects word elements")),
        }
    }

    fn inv(&self, g: &GroupElement) -> Result<GroupElement> {
        match g {
            GroupElement::Word(a) => {
                Ok(GroupElement::Word(a.iter().rev().map(|l| -l).collect()))
            }
            _ => Err(Error::domain("free group expects word elements")),
        }
    }

    fn elem_eq(&self, g: &GroupElement, h: &GroupElement) -> bool {
        g == h
    }

    fn elem_key(&self, g: &GroupElement) -> String {
        g.display()
    }

    fn act_point(&self, g: &GroupElement, x: &Point) -> Result<Point> {
        let gw = match g {
            GroupElement::Word(w) => w,
            _ => return Err(Error::domain("free group expects word elements")),
        };
        match x {
            Point::Vertex(v) => {
                let w = self.word(v)?;
                let mut cat = gw.clone();
                cat.extend_from_slice(&w);
                let r = reduce_word(&cat);
                self.check_depth(&r)?;
                Ok(Point::Vertex(VertexId::Word(r)))
            }
            Point::EdgePoint { u, v, offset } => {
                let gu = self.act_point(g, &Point::Vertex(u.clone()))?;
                let gv = self.act_point(g, &Point::Vertex(v.clone()))?;
                match (gu, gv) {
                    (Point::Vertex(a), Point::Vertex(b)) => {
                        crate::model::edge_point(self, &a, &b, offset)
                    }
                    _ => unreachable!(),
                }
            }
            _ => Err(Error::domain("point not in this Cayley tree")),
        }
    }

    fn dg_origin(&self, g: &GroupElement) -> Result<Scalar> {
        match g {
            GroupElement::Word(w) => Ok(Scalar::Exact(rat_int(w.len() as i64))),
            _ => Err(Error::domain("free group expects word elements")),
        }
    }

    fn ball(&self, beta: &Rat, _precision: u32) -> Result<Vec<GroupElement>> {
        if beta <= &Rat::zero() {
            return Ok(vec![]);
        }
        // Word lengths strictly below beta.
        let max_len = {
            let f = rat_floor(beta);
            let fr = Rat::from_integer(f.clone());
            let l = if &fr == beta { f - 1 } else { f };
            use num_traits::ToPrimitive;
            l.to_i64().unwrap_or(i64::MAX).max(0) as u64
        };
        if max_len > self.depth as u64 {
            return Err(Error::budget(format!(
                "ball radius {beta} exceeds the depth budget {}",
                self.depth
            )));
        }
        let mut out: Vec<Vec<i8>> = vec![vec![]];
        let mut frontier: Vec<Vec<i8>> = vec![vec![]];
        for _ in 0..max_len {
            let mut next = Vec::new();
            for w in &frontier {
                for l in self.letters() {
                    if w.last() == Some(&-l) {
                        continue;
                    }
                    let mut n = w.clone();
                    n.push(l);
                    next.push(n);
                }
            }
            out.extend(next.iter().cloned());
            if out.len() > self.enum_cap {
                return Err(Error::budget(format!(
                    "ball of radius {beta} exceeds the enumeration cap {}",
                    self.enum_cap
                )));
            }
            frontier = next;
        }
        out.sort();
        Ok(out.into_iter().map(GroupElement::Word).collect())
    }

    fn point_translators(
        &self,
        x: &Point,
        y: &Point,
        _precision: u32,
    ) -> Result<Vec<GroupElement>> {
        // The action on vertices is simply transitive, so there is at most
        // one candidate per endpoint pairing.
        let quot = |a: &[i8], b: &[i8]| {
            let mut cat = b.to_vec();
            cat.extend(a.iter().rev().map(|l| -l));
            GroupElement::Word(reduce_word(&cat))
        };
        let cands = match (x, y) {
            (Point::Vertex(u), Point::Vertex(v)) => {
                vec![quot(&self.word(u)?, &self.word(v)?)]
            }
            (
                Point::EdgePoint { u: u1, .. },
                Point::EdgePoint { u: u2, v: v2, .. },
            ) => {
                let a = self.word(u1)?;
                vec![quot(&a, &self.word(u2)?), quot(&a, &self.word(v2)?)]
            }
            _ => vec![],
        };
        let mut out = Vec::new();
        for g in cands {
            if self.act_point(&g, x)? == *y && !out.contains(&g) {
                out.push(g);
            }
        }
        Ok(out)
    }

    fn stabilizer_reps(&self, _x: &Point, _precision: u32) -> Result<Vec<GroupElement>> {
        // Free actions have trivial stabilizers.
        Ok(vec![self.identity()])
    }

    fn orbit_normalizer(&self, x: &Point) -> Result<GroupElement> {
        let anchor = match x {
            Point::Vertex(v) => self.word(v)?,
            Point::EdgePoint { u, .. } => self.word(u)?,
            _ => return Err(Error::domain("point not in this Cayley tree")),
        };
        Ok(GroupElement::Word(anchor.iter().rev().map(|l| -l).collect()))
    }

    fn parse_elem(&self, s: &str) -> Result<GroupElement> {
        Ok(GroupElement::Word(parse_word(s, self.rank)?))
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::model::metric_dg;

    fn f2() -> CayleyTree {
        CayleyTree::new(2, 32)
    }

    #[test]
    fn word_metric_matches_reduced_length() {
        let m = f2();
        let g = m.parse_elem("aaab").unwrap();
        let d = metric_dg(&m, &m.identity(), &g).unwrap();
        assert_eq!(d, Scalar::Exact(rat_int(4)));
        let d0 = metric_dg(&m, &g, &g).unwrap();
        assert_eq!(d0, Scalar::zero());
    }

    #[test]
    fn generator_ball_at_radius_three_halves() {
        let m = f2();
        let ball = m.ball(&crate::rat::rat(3, 2), 0).unwrap();
        let shown: Vec<String> = ball.iter().map(|g| g.display()).collect();
        assert_eq!(ball.len(), 5);
        assert!(shown.contains(&"e".to_string()));
        assert!(shown.contains(&"a".to_string()));
        assert!(shown.contains(&"A".to_string()));
        assert!(shown.contains(&"b".to_string()));
        assert!(shown.contains(&"B".to_string()));
        // beta small enough that only e qualifies
        let tiny = m.ball(&crate::rat::rat(1, 2), 0).unwrap();
        assert_eq!(tiny.len(), 1);
    }

    #[test]
    fn cayley_action_moves_base_vertex() {
        let m = f2();
        let a = m.parse_elem("a").unwrap();
        let e = m.base_point();
        let moved = m.act_point(&a, &e).unwrap();
        assert_eq!(moved, Point::Vertex(VertexId::Word(vec![1])));
    }

    #[test]
    fn depth_bound_errors_instead_of_growing() {
        let m = CayleyTree::new(2, 3);
        let g = m.parse_elem("aaa").unwrap();
        let x = Point::Vertex(VertexId::Word(vec![1]));
        let r = m.act_point(&g, &x);
        assert!(matches!(r, Err(Error::Budget(_))));
    }
}
