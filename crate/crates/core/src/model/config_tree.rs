//! Finite weighted metric tree described explicitly in config. Carries the
//! trivial group; its job is exact geometry (distances, geodesics, radial
//! projections) and oracle fixtures.

use std::collections::BTreeMap;
use std::sync::Arc;

use num_traits::Zero;

use crate::error::{Error, Result};
use crate::group::element::GroupElement;
use crate::model::path::Path;
use crate::model::point::{Point, VertexId};
use crate::model::tree_common;
use crate::model::{Model, ModelConfig, ModelHandle};
use crate::rat::{rat_to_string, Rat};
use crate::scalar::Scalar;

pub struct ConfigTree {
    names: Vec<String>,
    adj: Vec<Vec<(usize, Rat)>>,
    /// parent link and hop depth from vertex 0, for LCA walks
    parent: Vec<Option<(usize, Rat)>>,
    hops: Vec<usize>,
}

impl ConfigTree {
    pub fn from_edges(edges: &[(String, String, Rat)]) -> Result<ConfigTree> {
        let mut names: Vec<String> = Vec::new();
        let mut index: BTreeMap<String, usize> = BTreeMap::new();
        let idx = |n: &str, names: &mut Vec<String>, index: &mut BTreeMap<String, usize>| {
            *index.entry(n.to_string()).or_insert_with(|| {
                names.push(n.to_string());
                names.len() - 1
            })
        };
        let mut pairs = Vec::new();
        for (a, b, w) in edges {
            if w <= &Rat::zero() {
                return Err(Error::config(format!(
                    "edge {a}-{b} weight {} must be positive",
                    rat_to_string(w)
                )));
            }
            let ia = idx(a, &mut names, &mut index);
            let ib = idx(b, &mut names, &mut index);
            if ia == ib {
                return Err(Error::config(format!("self-loop at {a}")));
            }
            pairs.push((ia, ib, w.clone()));
        }
        let n = names.len();
        if n == 0 {
            return Err(Error::config("tree needs at least one edge"));
        }
        if pairs.len() != n - 1 {
            return Err(Error::config(format!(
                "tree must have exactly {} edges for {} vertices, got {}",
                n - 1,
                n,
                pairs.len()
            )));
        }
        let mut adj = vec![Vec::new(); n];
        for (a, b, w) in &pairs {
            adj[*a].push((*b, w.clone()));
            adj[*b].push((*a, w.clone()));
        }
        // Rooted BFS from vertex 0 checks connectivity (n-1 edges + connected
        // = acyclic).
        let mut parent: Vec<Option<(usize, Rat)>> = vec![None; n];
        let mut hops = vec![usize::MAX; n];
        let mut queue = std::collections::VecDeque::new();
        hops[0] = 0;
        queue.push_back(0usize);
        while let Some(u) = queue.pop_front() {
            for (v, w) in &adj[u] {
                if hops[*v] == usize::MAX {
                    hops[*v] = hops[u] + 1;
                    parent[*v] = Some((u, w.clone()));
                    queue.push_back(*v);
                }
            }
        }
        if hops.iter().any(|h| *h == usize::MAX) {
            return Err(Error::config("tree is not connected"));
        }
        Ok(ConfigTree {
            names,
            adj,
            parent,
            hops,
        })
    }

    pub fn vertex_by_name(&self, name: &str) -> Result<VertexId> {
        self.names
            .iter()
            .position(|n| n == name)
            .map(VertexId::Idx)
            .ok_or_else(|| Error::config(format!("unknown vertex {name:?}")))
    }

    fn id(&self, v: &VertexId) -> Result<usize> {
        match v {
            VertexId::Idx(i) if *i < self.names.len() => Ok(*i),
            _ => Err(Error::domain("vertex not in this tree")),
        }
    }

    fn path_ids(&self, u: usize, v: usize) -> Vec<usize> {
        let mut a = u;
        let mut b = v;
        let mut left = vec![a];
        let mut right = vec![b];
        while self.hops[a] > self.hops[b] {
            a = self.parent[a].as_ref().unwrap().0;
            left.push(a);
        }
        while self.hops[b] > self.hops[a] {
            b = self.parent[b].as_ref().unwrap().0;
            right.push(b);
        }
        while a != b {
            a = self.parent[a].as_ref().unwrap().0;
            left.push(a);
            b = self.parent[b].as_ref().unwrap().0;
            right.push(b);
        }
        right.pop();
        right.reverse();
        left.extend(right);
        left
    }
}

pub fn build(cfg: &ModelConfig) -> Result<ModelHandle> {
    match cfg {
        ModelConfig::Tree { edges } => {
            let parsed = edges
                .iter()
                .map(|(a, b, w)| Ok((a.clone(), b.clone(), crate::model::parse_weight(w)?)))
                .collect::<Result<Vec<_>>>()?;
            Ok(Arc::new(ConfigTree::from_edges(&parsed)?))
        }
        _ => Err(Error::config("tree builder got a non-tree config")),
    }
}

impl Model for ConfigTree {
    fn kind_name(&self) -> &'static str {
        "tree"
    }

    fn describe(&self) -> String {
        format!("finite weighted tree on {} vertices", self.names.len())
    }

    fn base_point(&self) -> Point {
        Point::Vertex(VertexId::Idx(0))
    }

    fn check_point(&self, x: &Point) -> Result<()> {
        match x {
            Point::Vertex(v) => self.id(v).map(|_| ()),
            Point::EdgePoint { u, v, offset } => {
                let l = self.edge_len(u, v)?;
                if offset > &Rat::zero() && offset < &l {
                    Ok(())
                } else {
                    Err(Error::domain("edge point offset not interior"))
                }
            }
            _ => Err(Error::domain("point not in this tree")),
        }
    }

    fn distance(&self, x: &Point, y: &Point) -> Result<Scalar> {
        Ok(Scalar::Exact(tree_common::tree_distance(self, x, y)?))
    }

    fn path(&self, x: &Point, y: &Point) -> Result<Path> {
        tree_common::tree_path(self, x, y)
    }

    fn vertex_dist(&self, u: &VertexId, v: &VertexId) -> Result<Rat> {
        let path = self.vertex_path(u, v)?;
        let mut d = Rat::zero();
        for w in path.windows(2) {
            d = &d + self.edge_len(&w[0], &w[1])?;
        }
        Ok(d)
    }

    fn vertex_path(&self, u: &VertexId, v: &VertexId) -> Result<Vec<VertexId>> {
        let a = self.id(u)?;
        let b = self.id(v)?;
        Ok(self.path_ids(a, b).into_iter().map(VertexId::Idx).collect())
    }

    fn neighbors(&self, v: &VertexId) -> Result<Vec<VertexId>> {
        let i = self.id(v)?;
        Ok(self.adj[i].iter().map(|(j, _)| VertexId::Idx(*j)).collect())
    }

    fn edge_len(&self, u: &VertexId, v: &VertexId) -> Result<Rat> {
        let a = self.id(u)?;
        let b = self.id(v)?;
        self.adj[a]
            .iter()
            .find(|(j, _)| *j == b)
            .map(|(_, w)| w.clone())
            .ok_or_else(|| Error::domain("vertices are not adjacent"))
    }

    fn identity(&self) -> GroupElement {
        GroupElement::identity_word()
    }

    fn mul(&self, g: &GroupElement, h: &GroupElement) -> Result<GroupElement> {
        match (g, h) {
            (GroupElement::Word(a), GroupElement::Word(b)) if a.is_empty() && b.is_empty() => {
                Ok(GroupElement::identity_word())
            }
            _ => Err(Error::domain("config tree carries only the trivial group")),
        }
    }

    fn inv(&self, g: &GroupElement) -> Result<GroupElement> {
        self.mul(g, &self.identity())
    }

    fn elem_eq(&self, g: &GroupElement, h: &GroupElement) -> bool {
        g == h
    }

    fn elem_key(&self, g: &GroupElement) -> String {
        g.display()
    }

    fn act_point(&self, g: &GroupElement, x: &Point) -> Result<Point> {
        match g {
            GroupElement::Word(w) if w.is_empty() => Ok(x.clone()),
            _ => Err(Error::domain("config tree carries only the trivial group")),
        }
    }

    fn dg_origin(&self, g: &GroupElement) -> Result<Scalar> {
        match g {
            GroupElement::Word(w) if w.is_empty() => Ok(Scalar::zero()),
            _ => Err(Error::domain("config tree carries only the trivial group")),
        }
    }

    fn ball(&self, _beta: &Rat, _precision: u32) -> Result<Vec<GroupElement>> {
        Ok(vec![self.identity()])
    }

    fn point_translators(
        &self,
        x: &Point,
        y: &Point,
        _precision: u32,
    ) -> Result<Vec<GroupElement>> {
        if x == y {
            Ok(vec![self.identity()])
        } else {
            Ok(vec![])
        }
    }

    fn stabilizer_reps(&self, _x: &Point, _precision: u32) -> Result<Vec<GroupElement>> {
        Ok(vec![self.identity()])
    }

    fn orbit_normalizer(&self, _x: &Point) -> Result<GroupElement> {
        Ok(self.identity())
    }

    fn parse_elem(&self, s: &str) -> Result<GroupElement> {
        if s.trim() == "e" {
            Ok(self.identity())
        } else {
            Err(Error::config("config tree only has the identity element"))
        }
    }
}
