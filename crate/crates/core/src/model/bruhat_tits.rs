//! The (p+1)-regular tree of lattice classes in Q_p^2 with SL2(Q_p) acting.
//!
//! Vertices are homothety classes of Z_p-lattices, stored as the canonical
//! primitive Hermite triple (a, b, c): the class of the column span of
//! [[p^a, c], [0, p^b]] with 0 <= c < p^a and content zero. All vertex
//! geometry is exact integer arithmetic; group elements act through exact
//! rationals when available and digit-tracked p-adics otherwise, reporting
//! precision exhaustion instead of truncating.

use std::sync::{Arc, Mutex};

use num_bigint::{BigInt, BigUint};
use num_integer::Integer;
use num_traits::{One, Signed, ToPrimitive, Zero};

use crate::error::{Error, Result};
use crate::group::element::{GroupElement, Mat2};
use crate::model::path::Path;
use crate::model::point::{Point, VertexId};
use crate::model::tree_common;
use crate::model::{Model, ModelConfig, ModelHandle};
use crate::padic::{mod_inverse, rat_valuation, Padic};
use crate::rat::{parse_rat, rat_int, Rat};
use crate::scalar::Scalar;

pub struct BruhatTits {
    p: u32,
    depth: u32,
    /// p-adic digit length carried by group arithmetic.
    precision: u32,
    /// Radius cap for the fix-term scan of d_G.
    fix_cap: u32,
    enum_cap: usize,
    lift_cache: Mutex<std::collections::BTreeMap<u32, Arc<Vec<Mat2>>>>,
    sphere_cache: Mutex<Vec<Vec<VertexId>>>,
}

pub fn build(cfg: &ModelConfig) -> Result<ModelHandle> {
    match cfg {
        ModelConfig::BruhatTits {
            prime,
            depth,
            precision,
        } => {
            let p = *prime;
            if p < 2 || p > 97 || !is_prime(p) {
                return Err(Error::config("prime must be a prime in 2..=97"));
            }
            let precision = precision.unwrap_or(depth + 4);
            Ok(Arc::new(BruhatTits::new(p, *depth, precision)))
        }
        _ => Err(Error::config("bruhat-tits builder got a wrong config")),
    }
}

fn is_prime(n: u32) -> bool {
    if n < 2 {
        return false;
    }
    let mut d = 2;
    while d * d <= n {
        if n % d == 0 {
            return false;
        }
        d += 1;
    }
    true
}

fn pow_big(p: u32, k: u32) -> BigInt {
    BigInt::from(p).pow(k)
}

impl BruhatTits {
    pub fn new(p: u32, depth: u32, precision: u32) -> BruhatTits {
        BruhatTits {
            p,
            depth,
            precision,
            fix_cap: precision.min(depth).min(8),
            enum_cap: 100_000,
            lift_cache: Mutex::new(Default::default()),
            sphere_cache: Mutex::new(vec![vec![VertexId::Lat {
                a: 0,
                b: 0,
                c: BigUint::zero(),
            }]]),
        }
    }

    pub fn prime(&self) -> u32 {
        self.p
    }

    pub fn precision(&self) -> u32 {
        self.precision
    }

    fn lat<'a>(&self, v: &'a VertexId) -> Result<(u32, u32, &'a BigUint)> {
        match v {
            VertexId::Lat { a, b, c } => Ok((*a, *b, c)),
            _ => Err(Error::domain("vertex not in this lattice tree")),
        }
    }

    /// Row-major integer basis [[p^a, c], [0, p^b]].
    fn basis(&self, v: &VertexId) -> Result<[BigInt; 4]> {
        let (a, b, c) = self.lat(v)?;
        Ok([
            pow_big(self.p, a),
            BigInt::from(c.clone()),
            BigInt::zero(),
            pow_big(self.p, b),
        ])
    }

    /// Canonicalizes the lattice spanned by the columns of a rational
    /// matrix; only the p-structure matters, so prime-to-p scalars are
    /// ignored.
    fn canon_rational(&self, m: &[Rat; 4]) -> Result<VertexId> {
        let det = &m[0] * &m[3] - &m[1] * &m[2];
        if det.is_zero() {
            return Err(Error::domain("singular lattice basis"));
        }
        let vmin = m
            .iter()
            .filter(|e| !e.is_zero())
            .map(|e| rat_valuation(e, self.p))
            .min()
            .unwrap();
        let scale = |e: &Rat| -> Rat {
            if vmin >= 0 {
                e / Rat::from_integer(pow_big(self.p, vmin as u32))
            } else {
                e * Rat::from_integer(pow_big(self.p, (-vmin) as u32))
            }
        };
        let mut w = [scale(&m[0]), scale(&m[1]), scale(&m[2]), scale(&m[3])];
        // Kill the bottom-left entry with Z_p-unimodular column operations.
        let v2 = if w[2].is_zero() {
            i64::MAX
        } else {
            rat_valuation(&w[2], self.p)
        };
        let v3 = if w[3].is_zero() {
            i64::MAX
        } else {
            rat_valuation(&w[3], self.p)
        };
        if v2 < v3 {
            w.swap(0, 1);
            w.swap(2, 3);
        }
        if w[3].is_zero() {
            return Err(Error::domain("singular lattice basis"));
        }
        let lambda = &w[2] / &w[3];
        let alpha = &w[0] - &lambda * &w[1];
        let beta = w[1].clone();
        let gamma = w[3].clone();
        if alpha.is_zero() {
            return Err(Error::domain("singular lattice basis"));
        }
        let a = rat_valuation(&alpha, self.p);
        let b = rat_valuation(&gamma, self.p);
        debug_assert!(a >= 0 && b >= 0);
        let (a, b) = (a as u32, b as u32);
        // c = beta * (gamma / p^b)^{-1} reduced mod p^a.
        let c = if a == 0 {
            BigUint::zero()
        } else {
            let unit = &gamma / Rat::from_integer(pow_big(self.p, b));
            let u = &beta / unit;
            let modulus = pow_big(self.p, a);
            let num = u.numer().mod_floor(&modulus);
            let den = u.denom().mod_floor(&modulus);
            let inv = mod_inverse(&den, &modulus)
                .ok_or_else(|| Error::domain("non-integral reduced entry"))?;
            (num * inv)
                .mod_floor(&modulus)
                .to_biguint()
                .unwrap()
        };
        self.finish_vertex(a, b, c)
    }

    fn finish_vertex(&self, a: u32, b: u32, c: BigUint) -> Result<VertexId> {
        // Content must be zero after the global scaling.
        let cv = if c.is_zero() {
            u32::MAX
        } else {
            let mut n = BigInt::from(c.clone());
            let pb = BigInt::from(self.p);
            let mut v = 0u32;
            while (&n % &pb).is_zero() {
                n /= &pb;
                v += 1;
            }
            v
        };
        debug_assert!(a.min(b).min(cv) == 0, "non-primitive canonical triple");
        if a + b > self.depth {
            return Err(Error::budget(format!(
                "lattice class at distance {} exceeds the depth bound {}",
                a + b,
                self.depth
            )));
        }
        Ok(VertexId::Lat { a, b, c })
    }

    /// Digit-tracked variant for matrices without exact backing.
    fn canon_padic(&self, m: &[Padic; 4]) -> Result<VertexId> {
        let len = self.precision as usize;
        let vals: Vec<Option<i64>> = m
            .iter()
            .map(|e| {
                if e.is_zero_at_precision() {
                    if e.exactly_zero() {
                        None
                    } else {
                        // Unknown tail: can only be used if some other entry
                        // pins the scale below its precision window.
                        None
                    }
                } else {
                    Some(e.val)
                }
            })
            .collect();
        let vmin = vals
            .iter()
            .flatten()
            .min()
            .copied()
            .ok_or_else(|| Error::precision("all lattice entries vanish at precision"))?;
        let mut w: Vec<Padic> = m.iter().map(|e| e.shift_val(-vmin)).collect();
        let v2 = w[2].valuation().unwrap_or(i64::MAX / 4);
        let v3 = w[3].valuation().unwrap_or(i64::MAX / 4);
        if v2 < v3 {
            w.swap(0, 1);
            w.swap(2, 3);
        }
        if w[3].is_zero_at_precision() {
            return Err(Error::precision("pivot entry vanishes at precision"));
        }
        let lambda = w[2].mul(&w[3].inv(len)?, len)?;
        let alpha = w[0].sub(&lambda.mul(&w[1], len)?, len)?;
        let beta = w[1].clone();
        let gamma = w[3].clone();
        let a = alpha.valuation().map_err(|_| {
            Error::precision("p-adic digits insufficient to canonicalize the image lattice")
        })?;
        let b = gamma.valuation()?;
        if a < 0 || b < 0 {
            return Err(Error::precision("negative valuation after scaling"));
        }
        let (a, b) = (a as u32, b as u32);
        let c = if a == 0 {
            BigUint::zero()
        } else {
            let unit_inv = gamma.shift_val(-(b as i64)).inv(len)?;
            let u = beta.mul(&unit_inv, len)?;
            u.residue_mod(a)
                .map_err(|_| {
                    Error::precision(
                        "p-adic digits insufficient to canonicalize the image lattice",
                    )
                })?
                .to_biguint()
                .unwrap()
        };
        self.finish_vertex(a, b, c)
    }

    fn act_vertex(&self, g: &Mat2, v: &VertexId) -> Result<VertexId> {
        let h = self.basis(v)?;
        if let Some(ge) = g.exact_entries() {
            let hr: [Rat; 4] = [
                Rat::from_integer(h[0].clone()),
                Rat::from_integer(h[1].clone()),
                Rat::from_integer(h[2].clone()),
                Rat::from_integer(h[3].clone()),
            ];
            let prod = [
                &ge[0] * &hr[0] + &ge[1] * &hr[2],
                &ge[0] * &hr[1] + &ge[1] * &hr[3],
                &ge[2] * &hr[0] + &ge[3] * &hr[2],
                &ge[2] * &hr[1] + &ge[3] * &hr[3],
            ];
            return self.canon_rational(&prod);
        }
        let len = self.precision as usize;
        let hp: Vec<Padic> = h
            .iter()
            .map(|e| Padic::from_rat(&Rat::from_integer(e.clone()), self.p, len))
            .collect();
        let m = |i: usize, j: usize| -> Result<Padic> {
            let t1 = g.e[2 * i].mul(&hp[j], len)?;
            let t2 = g.e[2 * i + 1].mul(&hp[2 + j], len)?;
            t1.add(&t2, len)
        };
        let prod = [m(0, 0)?, m(0, 1)?, m(1, 0)?, m(1, 1)?];
        self.canon_padic(&prod)
    }

    /// Exact element with carrier(v) * v = type representative (the base
    /// vertex for even type, its (1,0,0) neighbor for odd type).
    fn carrier_to_origin(&self, v: &VertexId) -> Result<Mat2> {
        let (a, b, c) = self.lat(v)?;
        let k = a + b;
        let c = Rat::from_integer(BigInt::from(c.clone()));
        let half = |e: u32| -> Rat { Rat::from_integer(pow_big(self.p, e)) };
        let entries: [Rat; 4] = if k % 2 == 0 {
            // p^{k/2} H^{-1}: [[p^{b-k/2}, -c p^{-k/2}], [0, p^{a-k/2}]]
            let s = k / 2;
            let pb_s = if b >= s {
                half(b - s)
            } else {
                Rat::new(BigInt::one(), pow_big(self.p, s - b))
            };
            let pa_s = if a >= s {
                half(a - s)
            } else {
                Rat::new(BigInt::one(), pow_big(self.p, s - a))
            };
            let mid = -&c / half(s);
            [pb_s, mid, Rat::zero(), pa_s]
        } else {
            // p^s H1 H^{-1} with s = (k-1)/2, H1 = [[p,0],[0,1]]:
            // [[p^{b+1+s-k}, -c p^{1+s-k}], [0, p^{a+s-k}]].
            let s = (k - 1) / 2;
            let pb_s = pow_exp(self.p, b as i64 + 1 + s as i64 - k as i64);
            let mid = -&c * pow_exp(self.p, 1 + s as i64 - k as i64);
            let pa_s = pow_exp(self.p, a as i64 + s as i64 - k as i64);
            [pb_s, mid, Rat::zero(), pa_s]
        };
        let m = Mat2::from_rats(entries, self.p, self.precision as usize);
        Ok(m)
    }

    fn type_rep(&self, v: &VertexId) -> Result<VertexId> {
        let (a, b, _) = self.lat(v)?;
        if (a + b) % 2 == 0 {
            Ok(VertexId::Lat {
                a: 0,
                b: 0,
                c: BigUint::zero(),
            })
        } else {
            Ok(VertexId::Lat {
                a: 1,
                b: 0,
                c: BigUint::zero(),
            })
        }
    }

    /// Exact integer-matrix lifts of SL2(Z/p^m), one per class.
    fn lifts(&self, level: u32) -> Result<Arc<Vec<Mat2>>> {
        let level = level.max(1).min(self.precision);
        if let Some(v) = self.lift_cache.lock().unwrap().get(&level) {
            return Ok(v.clone());
        }
        let modulus = pow_big(self.p, level);
        let key = |m: &[BigInt; 4]| -> String {
            m.iter()
                .map(|e| e.mod_floor(&modulus).to_string())
                .collect::<Vec<_>>()
                .join(",")
        };
        let gens: Vec<[BigInt; 4]> = vec![
            [1.into(), 1.into(), 0.into(), 1.into()],
            [1.into(), (-1).into(), 0.into(), 1.into()],
            [1.into(), 0.into(), 1.into(), 1.into()],
            [1.into(), 0.into(), (-1).into(), 1.into()],
        ];
        let id: [BigInt; 4] = [1.into(), 0.into(), 0.into(), 1.into()];
        let mut seen = std::collections::BTreeMap::new();
        seen.insert(key(&id), id.clone());
        let mut frontier = vec![id];
        while !frontier.is_empty() {
            let mut next = Vec::new();
            for m in &frontier {
                for g in &gens {
                    let prod = [
                        &m[0] * &g[0] + &m[1] * &g[2],
                        &m[0] * &g[1] + &m[1] * &g[3],
                        &m[2] * &g[0] + &m[3] * &g[2],
                        &m[2] * &g[1] + &m[3] * &g[3],
                    ];
                    let k = key(&prod);
                    if !seen.contains_key(&k) {
                        seen.insert(k, prod.clone());
                        next.push(prod);
                    }
                }
            }
            if seen.len() > self.enum_cap {
                return Err(Error::budget("congruence lift enumeration exceeds cap"));
            }
            frontier = next;
        }
        let out: Vec<Mat2> = seen
            .into_values()
            .map(|m| {
                Mat2::from_rats(
                    [
                        Rat::from_integer(m[0].clone()),
                        Rat::from_integer(m[1].clone()),
                        Rat::from_integer(m[2].clone()),
                        Rat::from_integer(m[3].clone()),
                    ],
                    self.p,
                    self.precision as usize,
                )
            })
            .collect();
        let arc = Arc::new(out);
        self.lift_cache.lock().unwrap().insert(level, arc.clone());
        Ok(arc)
    }

    fn sphere(&self, r: u32) -> Result<Vec<VertexId>> {
        if r > self.depth {
            return Err(Error::budget("sphere radius beyond the depth bound"));
        }
        let mut cache = self.sphere_cache.lock().unwrap();
        while cache.len() <= r as usize {
            let k = cache.len();
            let prev = cache[k - 1].clone();
            let before: std::collections::BTreeSet<VertexId> = if k >= 2 {
                cache[k - 2].iter().cloned().collect()
            } else {
                Default::default()
            };
            let mut next = std::collections::BTreeSet::new();
            for v in &prev {
                for n in self.neighbors_raw(v)? {
                    if !before.contains(&n) && !prev.contains(&n) {
                        next.insert(n);
                    }
                }
            }
            if next.len() > self.enum_cap {
                return Err(Error::budget("sphere enumeration exceeds cap"));
            }
            cache.push(next.into_iter().collect());
        }
        Ok(cache[r as usize].clone())
    }

    fn neighbors_raw(&self, v: &VertexId) -> Result<Vec<VertexId>> {
        let h = self.basis(v)?;
        let hr = |i: usize| Rat::from_integer(h[i].clone());
        let mut out = Vec::with_capacity(self.p as usize + 1);
        // Column moves: (p h1, h2) and (h1 + j h2, p h2) for j in 0..p.
        let m_inf = [
            &hr(0) * rat_int(self.p as i64),
            hr(1),
            &hr(2) * rat_int(self.p as i64),
            hr(3),
        ];
        match self.canon_rational(&m_inf) {
            Ok(w) => out.push(w),
            Err(Error::Budget(_)) => {}
            Err(e) => return Err(e),
        }
        for j in 0..self.p {
            let jr = rat_int(j as i64);
            let m_j = [
                &hr(0) + &jr * &hr(1),
                &hr(1) * rat_int(self.p as i64),
                &hr(2) + &jr * &hr(3),
                &hr(3) * rat_int(self.p as i64),
            ];
            match self.canon_rational(&m_j) {
                Ok(w) => out.push(w),
                Err(Error::Budget(_)) => {}
                Err(e) => return Err(e),
            }
        }
        out.sort();
        out.dedup();
        Ok(out)
    }

    fn mat<'a>(&self, g: &'a GroupElement) -> Result<&'a Mat2> {
        match g {
            GroupElement::Matrix(m) => Ok(m),
            _ => Err(Error::domain("lattice tree expects matrix elements")),
        }
    }

    /// Largest scanned radius R <= fix_cap with every vertex of B_R fixed,
    /// assuming g fixes the base vertex; None if the cap is reached.
    fn fix_radius(&self, g: &Mat2) -> Result<Option<u32>> {
        for r in 1..=self.fix_cap {
            for v in self.sphere(r.min(self.depth))? {
                if self.act_vertex(g, &v)? != v {
                    return Ok(Some(r - 1));
                }
            }
        }
        Ok(None)
    }
}

fn pow_exp(p: u32, e: i64) -> Rat {
    if e >= 0 {
        Rat::from_integer(BigInt::from(p).pow(e as u32))
    } else {
        Rat::new(BigInt::one(), BigInt::from(p).pow((-e) as u32))
    }
}

impl Model for BruhatTits {
    fn kind_name(&self) -> &'static str {
        "bruhat-tits"
    }

    fn describe(&self) -> String {
        format!(
            "lattice-class tree for SL2(Q_{}) to depth {}, precision {}",
            self.p, self.depth, self.precision
        )
    }

    fn base_point(&self) -> Point {
        Point::Vertex(VertexId::Lat {
            a: 0,
            b: 0,
            c: BigUint::zero(),
        })
    }

    fn check_point(&self, x: &Point) -> Result<()> {
        match x {
            Point::Vertex(v) => {
                let (a, b, c) = self.lat(v)?;
                if a + b > self.depth {
                    return Err(Error::domain("vertex beyond depth bound"));
                }
                if !c.is_zero() && BigUint::from(self.p).pow(a) <= *c {
                    return Err(Error::domain("vertex offset out of range"));
                }
                Ok(())
            }
            Point::EdgePoint { u, v, offset } => {
                self.edge_len(u, v)?;
                if offset > &Rat::zero() && offset < &rat_int(1) {
                    Ok(())
                } else {
                    Err(Error::domain("edge point offset not interior"))
                }
            }
            _ => Err(Error::domain("point not in this lattice tree")),
        }
    }

    fn distance(&self, x: &Point, y: &Point) -> Result<Scalar> {
        Ok(Scalar::Exact(tree_common::tree_distance(self, x, y)?))
    }

    fn path(&self, x: &Point, y: &Point) -> Result<Path> {
        tree_common::tree_path(self, x, y)
    }

    fn vertex_dist(&self, u: &VertexId, v: &VertexId) -> Result<Rat> {
        let hu = self.basis(u)?;
        let hv = self.basis(v)?;
        // adj(Hu) * Hv; distance = v_p(det) - 2 min v_p(entries).
        let n = [
            &hu[3] * &hv[0] - &hu[1] * &hv[2],
            &hu[3] * &hv[1] - &hu[1] * &hv[3],
            -&hu[2] * &hv[0] + &hu[0] * &hv[2],
            -&hu[2] * &hv[1] + &hu[0] * &hv[3],
        ];
        let (au, bu, _) = self.lat(u)?;
        let (av, bv, _) = self.lat(v)?;
        let vdet = (au + bu + av + bv) as i64;
        let pb = BigInt::from(self.p);
        let minv = n
            .iter()
            .filter(|e| !e.is_zero())
            .map(|e| {
                let mut x = e.abs();
                let mut v = 0i64;
                while (&x % &pb).is_zero() {
                    x /= &pb;
                    v += 1;
                }
                v
            })
            .min()
            .ok_or_else(|| Error::domain("degenerate lattice pair"))?;
        Ok(rat_int(vdet - 2 * minv))
    }

    fn vertex_path(&self, u: &VertexId, v: &VertexId) -> Result<Vec<VertexId>> {
        let mut cur = u.clone();
        let mut out = vec![cur.clone()];
        loop {
            let d = self.vertex_dist(&cur, v)?;
            if d.is_zero() {
                return Ok(out);
            }
            let target = &d - rat_int(1);
            let mut stepped = false;
            for w in self.neighbors_raw(&cur)? {
                if self.vertex_dist(&w, v)? == target {
                    out.push(w.clone());
                    cur = w;
                    stepped = true;
                    break;
                }
            }
            if !stepped {
                return Err(Error::budget(
                    "geodesic leaves the depth-bounded tree portion",
                ));
            }
        }
    }

    fn neighbors(&self, v: &VertexId) -> Result<Vec<VertexId>> {
        self.neighbors_raw(v)
    }

    fn edge_len(&self, u: &VertexId, v: &VertexId) -> Result<Rat> {
        if self.vertex_dist(u, v)? == rat_int(1) {
            Ok(rat_int(1))
        } else {
            Err(Error::domain("vertices are not adjacent"))
        }
    }

    fn identity(&self) -> GroupElement {
        GroupElement::Matrix(Mat2::from_rats(
            [rat_int(1), Rat::zero(), Rat::zero(), rat_int(1)],
            self.p,
            self.precision as usize,
        ))
    }

    fn mul(&self, g: &GroupElement, h: &GroupElement) -> Result<GroupElement> {
        let a = self.mat(g)?;
        let b = self.mat(h)?;
        Ok(GroupElement::Matrix(a.mul(b, self.precision as usize)?))
    }

    fn inv(&self, g: &GroupElement) -> Result<GroupElement> {
        let a = self.mat(g)?;
        Ok(GroupElement::Matrix(a.inv_det_one(self.precision as usize)))
    }

    fn elem_eq(&self, g: &GroupElement, h: &GroupElement) -> bool {
        match (self.mat(g), self.mat(h)) {
            (Ok(a), Ok(b)) => a.eq_at_precision(b),
            _ => false,
        }
    }

    fn elem_key(&self, g: &GroupElement) -> String {
        g.display()
    }

    fn act_point(&self, g: &GroupElement, x: &Point) -> Result<Point> {
        let m = self.mat(g)?;
        match x {
            Point::Vertex(v) => Ok(Point::Vertex(self.act_vertex(m, v)?)),
            Point::EdgePoint { u, v, offset } => {
                let gu = self.act_vertex(m, u)?;
                let gv = self.act_vertex(m, v)?;
                crate::model::edge_point(self, &gu, &gv, offset)
            }
            _ => Err(Error::domain("point not in this lattice tree")),
        }
    }

    fn dg_origin(&self, g: &GroupElement) -> Result<Scalar> {
        let m = self.mat(g)?;
        let base = match self.base_point() {
            Point::Vertex(v) => v,
            _ => unreachable!(),
        };
        let gv = self.act_vertex(m, &base)?;
        let disp = self.vertex_dist(&base, &gv)?;
        if !disp.is_zero() {
            return Ok(Scalar::Exact(disp + rat_int(1)));
        }
        match self.fix_radius(m)? {
            // Fixing every scanned ball: identity at the carried scan cap.
            None => Ok(Scalar::zero()),
            Some(r) => Ok(Scalar::Exact(Rat::new(
                BigInt::one(),
                BigInt::from(2).pow(r),
            ))),
        }
    }

    fn ball(&self, beta: &Rat, precision: u32) -> Result<Vec<GroupElement>> {
        let level = if precision == 0 { 2 } else { precision };
        let mut out: Vec<GroupElement> = Vec::new();
        let one = rat_int(1);
        let lifts = self.lifts(level)?;
        if beta > &one {
            for l in lifts.iter() {
                out.push(GroupElement::Matrix(l.clone()));
            }
        } else if beta > &Rat::zero() {
            // Only elements whose fix term beats beta qualify.
            for l in lifts.iter() {
                let d = self.dg_origin(&GroupElement::Matrix(l.clone()))?;
                if matches!(d.lt(beta), crate::scalar::Trilean::True) {
                    out.push(GroupElement::Matrix(l.clone()));
                }
            }
        }
        // Shells of positive even displacement: D = disp + 1 < beta.
        let mut disp = 2u32;
        while Rat::from_integer((disp + 1).into()) < *beta {
            if disp > self.depth {
                return Err(Error::budget(format!(
                    "ball radius {beta} needs displacement {disp} beyond depth {}",
                    self.depth
                )));
            }
            for u in self.sphere(disp)? {
                let (a, b, _) = self.lat(&u)?;
                if (a + b) % 2 != 0 {
                    continue;
                }
                let t = self.carrier_to_origin(&u)?;
                let kappa = t.inv_det_one(self.precision as usize);
                for l in lifts.iter() {
                    let e = kappa.mul(l, self.precision as usize)?;
                    out.push(GroupElement::Matrix(e));
                    if out.len() > self.enum_cap {
                        return Err(Error::budget("ball exceeds the enumeration cap"));
                    }
                }
            }
            disp += 2;
        }
        // Close under inversion and dedup deterministically.
        let mut keyed: std::collections::BTreeMap<String, GroupElement> = Default::default();
        for g in out {
            let gi = self.inv(&g)?;
            keyed.insert(self.elem_key(&g), g);
            keyed.insert(self.elem_key(&gi), gi);
        }
        Ok(keyed.into_values().collect())
    }

    fn point_translators(
        &self,
        x: &Point,
        y: &Point,
        precision: u32,
    ) -> Result<Vec<GroupElement>> {
        let level = if precision == 0 { 2 } else { precision };
        match (x, y) {
            (Point::Vertex(u), Point::Vertex(v)) => {
                let (au, bu, _) = self.lat(u)?;
                let (av, bv, _) = self.lat(v)?;
                if (au + bu) % 2 != (av + bv) % 2 {
                    return Ok(vec![]);
                }
                let tu = self.carrier_to_origin(u)?;
                let tv = self.carrier_to_origin(v)?;
                let tv_inv = tv.inv_det_one(self.precision as usize);
                let rep = self.type_rep(u)?;
                let mut out = Vec::new();
                for s in self.rep_stab_lifts(&rep, level)?.iter() {
                    let g = tv_inv
                        .mul(s, self.precision as usize)?
                        .mul(&tu, self.precision as usize)?;
                    out.push(GroupElement::Matrix(g));
                }
                Ok(out)
            }
            (
                Point::EdgePoint { u: u1, v: v1, offset: o1 },
                Point::EdgePoint { .. },
            ) => {
                let _ = (v1, o1);
                let mut out = Vec::new();
                for cand_anchor in y.tree_anchors() {
                    let cands = self.point_translators(
                        &Point::Vertex(u1.clone()),
                        &Point::Vertex(cand_anchor),
                        level,
                    )?;
                    for g in cands {
                        if self.act_point(&g, x)? == *y {
                            let k = self.elem_key(&g);
                            if !out.iter().any(|h| self.elem_key(h) == k) {
                                out.push(g);
                            }
                        }
                    }
                }
                Ok(out)
            }
            _ => Ok(vec![]),
        }
    }

    fn stabilizer_reps(&self, x: &Point, precision: u32) -> Result<Vec<GroupElement>> {
        let level = if precision == 0 { 2 } else { precision };
        match x {
            Point::Vertex(v) => {
                let t = self.carrier_to_origin(v)?;
                let t_inv = t.inv_det_one(self.precision as usize);
                let rep = self.type_rep(v)?;
                let mut out = Vec::new();
                for s in self.rep_stab_lifts(&rep, level)?.iter() {
                    let g = t_inv
                        .mul(s, self.precision as usize)?
                        .mul(&t, self.precision as usize)?;
                    out.push(GroupElement::Matrix(g));
                }
                Ok(out)
            }
            Point::EdgePoint { u, v, .. } => {
                // Elements fixing both endpoints fix the edge pointwise.
                let mut out = Vec::new();
                for g in self.stabilizer_reps(&Point::Vertex(u.clone()), level)? {
                    if self.act_point(&g, &Point::Vertex(v.clone()))? == Point::Vertex(v.clone()) {
                        out.push(g);
                    }
                }
                Ok(out)
            }
            _ => Err(Error::domain("point not in this lattice tree")),
        }
    }

    fn orbit_normalizer(&self, x: &Point) -> Result<GroupElement> {
        let anchor = match x {
            Point::Vertex(v) => v.clone(),
            Point::EdgePoint { u, .. } => u.clone(),
            _ => return Err(Error::domain("point not in this lattice tree")),
        };
        Ok(GroupElement::Matrix(self.carrier_to_origin(&anchor)?))
    }

    fn conjugation_delta(&self, eps: &Rat, alpha: &Rat) -> Result<Rat> {
        // Elements below 2^{-m} fix the ball of radius m+1; conjugating by
        // v with tree displacement <= alpha shifts the fixed ball by at
        // most ceil(alpha), so m = ceil(alpha) + ceil(log2(2/eps)) gives
        // d_G(v^{-1} x v) <= 2^{-(m+1-alpha)} < eps.
        if eps <= &Rat::zero() {
            return Err(Error::domain("eps must be positive"));
        }
        let alpha_ceil = {
            let f = crate::rat::rat_floor(alpha);
            let fr = Rat::from_integer(f.clone());
            if &fr == alpha {
                f
            } else {
                f + 1
            }
        }
        .to_i64()
        .unwrap_or(i64::MAX)
        .max(0) as u32;
        let mut log_term = 0u32;
        let mut pow = rat_int(2);
        // Smallest k with 2^{-k} <= eps / 2, i.e. 2^{k} >= 2 / eps.
        while &(Rat::from_integer(1.into()) / &pow) > &(eps / rat_int(2)) {
            log_term += 1;
            pow = pow * rat_int(2);
            if log_term > 60 {
                break;
            }
        }
        let m = alpha_ceil + log_term + 1;
        if m + 1 > self.fix_cap {
            return Err(Error::budget(format!(
                "conjugation modulus needs fix scan radius {} beyond cap {}",
                m + 1,
                self.fix_cap
            )));
        }
        Ok(Rat::new(BigInt::one(), BigInt::from(2).pow(m)))
    }

    fn parse_elem(&self, s: &str) -> Result<GroupElement> {
        // "a,b;c,d" with rational entries and determinant one.
        let rows: Vec<&str> = s.split(';').collect();
        if rows.len() != 2 {
            return Err(Error::config("matrix literal needs two ';'-separated rows"));
        }
        let mut es = Vec::with_capacity(4);
        for row in rows {
            let cols: Vec<&str> = row.split(',').collect();
            if cols.len() != 2 {
                return Err(Error::config("matrix row needs two ','-separated entries"));
            }
            for c in cols {
                es.push(parse_rat(c)?);
            }
        }
        let det = &es[0] * &es[3] - &es[1] * &es[2];
        if det != rat_int(1) {
            return Err(Error::config(format!(
                "matrix determinant must be 1, got {det}"
            )));
        }
        Ok(GroupElement::Matrix(Mat2::from_rats(
            [es[0].clone(), es[1].clone(), es[2].clone(), es[3].clone()],
            self.p,
            self.precision as usize,
        )))
    }
}

impl BruhatTits {
    /// Stabilizer lifts for a type representative: the unit-lattice
    /// stabilizer for even type, its conjugate by diag(p, 1) for odd type.
    fn rep_stab_lifts(&self, rep: &VertexId, level: u32) -> Result<Arc<Vec<Mat2>>> {
        let (a, b, _) = self.lat(rep)?;
        let lifts = self.lifts(level)?;
        if a + b == 0 {
            return Ok(lifts);
        }
        // Conjugate by H1 = diag(p, 1): entries [[a, p b], [c/p, d]].
        let mut out = Vec::with_capacity(lifts.len());
        for l in lifts.iter() {
            let e = l.exact_entries().expect("lifts are exact");
            let conj = [
                e[0].clone(),
                &e[1] * rat_int(self.p as i64),
                &e[2] / rat_int(self.p as i64),
                e[3].clone(),
            ];
            out.push(Mat2::from_rats(conj, self.p, self.precision as usize));
        }
        Ok(Arc::new(out))
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn q2() -> BruhatTits {
        BruhatTits::new(2, 8, 12)
    }

    fn vertex(a: u32, b: u32, c: u64) -> VertexId {
        VertexId::Lat {
            a,
            b,
            c: BigUint::from(c),
        }
    }

    #[test]
    fn base_vertex_has_three_neighbors() {
        let m = q2();
        let base = vertex(0, 0, 0);
        let n = m.neighbors_raw(&base).unwrap();
        assert_eq!(n.len(), 3);
        for w in &n {
            assert_eq!(m.vertex_dist(&base, w).unwrap(), rat_int(1));
        }
    }

    #[test]
    fn interior_regularity_p_plus_one() {
        let m = q2();
        for r in 0..4u32 {
            for v in m.sphere(r).unwrap() {
                let n = m.neighbors_raw(&v).unwrap();
                assert_eq!(n.len(), 3, "vertex {} at radius {}", v.display(), r);
            }
        }
    }

    #[test]
    fn sphere_counts_match_regular_tree() {
        let m = q2();
        assert_eq!(m.sphere(0).unwrap().len(), 1);
        assert_eq!(m.sphere(1).unwrap().len(), 3);
        assert_eq!(m.sphere(2).unwrap().len(), 6);
        assert_eq!(m.sphere(3).unwrap().len(), 12);
    }

    #[test]
    fn diagonal_translation_moves_base_by_two() {
        let m = q2();
        let g = m.parse_elem("2,0;0,1/2").unwrap();
        let base = m.base_point();
        let moved = m.act_point(&g, &base).unwrap();
        let d = m.distance(&base, &moved).unwrap();
        assert_eq!(d, Scalar::Exact(rat_int(2)));
        // d_G(e, diag(2, 1/2)) = displacement 2 + fix term 1.
        let dg = m.dg_origin(&g).unwrap();
        assert_eq!(dg, Scalar::Exact(rat_int(3)));
    }

    #[test]
    fn unit_stabilizer_fixes_base() {
        let m = q2();
        let lifts = m.lifts(1).unwrap();
        assert_eq!(lifts.len(), 6, "|SL2(Z/2)| = 6");
        let base = m.base_point();
        for l in lifts.iter() {
            let g = GroupElement::Matrix(l.clone());
            assert_eq!(m.act_point(&g, &base).unwrap(), base);
        }
        assert_eq!(m.lifts(2).unwrap().len(), 48, "|SL2(Z/4)| = 48");
        assert_eq!(m.lifts(3).unwrap().len(), 384, "|SL2(Z/8)| = 384");
    }

    #[test]
    fn carrier_sends_vertex_home() {
        let m = q2();
        for r in 0..5u32 {
            for v in m.sphere(r).unwrap() {
                let t = m.carrier_to_origin(&v).unwrap();
                let rep = m.type_rep(&v).unwrap();
                let moved = m.act_vertex(&t, &v).unwrap();
                assert_eq!(moved, rep, "carrier failed for {}", v.display());
            }
        }
    }

    #[test]
    fn greedy_paths_realize_distance() {
        let m = q2();
        let u = vertex(3, 0, 5);
        let v = vertex(0, 2, 0);
        let d = m.vertex_dist(&u, &v).unwrap();
        let path = m.vertex_path(&u, &v).unwrap();
        assert_eq!(rat_int(path.len() as i64 - 1), d);
        for w in path.windows(2) {
            assert_eq!(m.vertex_dist(&w[0], &w[1]).unwrap(), rat_int(1));
        }
    }

    #[test]
    fn truncated_matrix_action_reports_precision_exhaustion() {
        let m = BruhatTits::new(2, 8, 3);
        // A digit-specified entry with only 3 digits cannot canonicalize a
        // deep image.
        let g = Mat2 {
            e: [
                Padic::from_digits(2, 0, vec![1, 0, 0]).unwrap(),
                Padic::from_digits(2, -6, vec![1, 0, 0]).unwrap(),
                Padic::from_digits(2, 6, vec![1, 0, 0]).unwrap(),
                Padic::from_digits(2, 0, vec![1, 0, 0]).unwrap(),
            ],
        };
        let r = m.act_vertex(&g, &vertex(4, 0, 3));
        match r {
            Err(Error::Precision(_)) | Err(Error::Budget(_)) => {}
            other => panic!("expected precision/budget error, got {other:?}"),
        }
    }
}
