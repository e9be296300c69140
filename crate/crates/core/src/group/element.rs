//! Group elements acting on the model spaces.

use crate::error::{Error, Result};
use crate::model::point::word_to_string;
use crate::padic::Padic;
use crate::rat::{rat_to_string, Rat};

/// 2x2 matrix with p-adic entries, row major: [a, b; c, d].
#[derive(Debug, Clone, PartialEq)]
pub struct Mat2 {
    pub e: [Padic; 4],
}

impl Mat2 {
    pub fn from_rats(rs: [Rat; 4], prime: u32, len: usize) -> Mat2 {
        Mat2 {
            e: rs.map(|r| Padic::from_rat(&r, prime, len)),
        }
    }

    /// Exact rational entries when every entry is exact-backed.
    pub fn exact_entries(&self) -> Option<[Rat; 4]> {
        let mut out: [Rat; 4] = core::array::from_fn(|_| Rat::default());
        for (i, p) in self.e.iter().enumerate() {
            out[i] = p.exact.clone()?;
        }
        Some(out)
    }

    pub fn mul(&self, o: &Mat2, len: usize) -> Result<Mat2> {
        fn m(i: usize, j: usize, x: &Mat2) -> &Padic {
            &x.e[2 * i + j]
        }
        let mut e: Vec<Padic> = Vec::with_capacity(4);
        for i in 0..2 {
            for j in 0..2 {
                let t1 = m(i, 0, self).mul(m(0, j, o), len)?;
                let t2 = m(i, 1, self).mul(m(1, j, o), len)?;
                e.push(t1.add(&t2, len)?);
            }
        }
        Ok(Mat2 {
            e: [e[0].clone(), e[1].clone(), e[2].clone(), e[3].clone()],
        })
    }

    /// Inverse of a determinant-one matrix: the adjugate.
    pub fn inv_det_one(&self, len: usize) -> Mat2 {
        Mat2 {
            e: [
                self.e[3].clone(),
                self.e[1].neg(len),
                self.e[2].neg(len),
                self.e[0].clone(),
            ],
        }
    }

    pub fn det(&self, len: usize) -> Result<Padic> {
        let ad = self.e[0].mul(&self.e[3], len)?;
        let bc = self.e[1].mul(&self.e[2], len)?;
        ad.sub(&bc, len)
    }

    pub fn eq_at_precision(&self, o: &Mat2) -> bool {
        self.e
            .iter()
            .zip(o.e.iter())
            .all(|(a, b)| a.eq_at_precision(b))
    }

    pub fn display(&self) -> String {
        format!(
            "[{}, {}; {}, {}]",
            self.e[0].display(),
            self.e[1].display(),
            self.e[2].display(),
            self.e[3].display()
        )
    }
}

#[derive(Debug, Clone, PartialEq)]
pub enum GroupElement {
    /// Freely reduced word over a symmetric generating set.
    Word(Vec<i8>),
    /// Lattice translation (Euclidean models) or rotation count (circle).
    Translation(Vec<Rat>),
    /// Truncated p-adic 2x2 matrix with determinant one at precision.
    Matrix(Mat2),
}

/// Free reduction of a concatenation.
pub fn reduce_word(letters: &[i8]) -> Vec<i8> {
    let mut out: Vec<i8> = Vec::with_capacity(letters.len());
    for &l in letters {
        if l == 0 {
            continue;
        }
        if out.last() == Some(&-l) {
            out.pop();
        } else {
            out.push(l);
        }
    }
    out
}

/// Parses words like "aab", "aBA", "e". Lowercase = generator, uppercase =
/// inverse.
pub fn parse_word(s: &str, rank: u8) -> Result<Vec<i8>> {
    let s = s.trim();
    if s == "e" || s.is_empty() {
        return Ok(vec![]);
    }
    let mut letters = Vec::new();
    for ch in s.chars() {
        if ch.is_ascii_lowercase() {
            let idx = ch as u8 - b'a' + 1;
            if idx > rank {
                return Err(Error::config(format!("letter {ch:?} beyond rank {rank}")));
            }
            letters.push(idx as i8);
        } else if ch.is_ascii_uppercase() {
            let idx = ch as u8 - b'A' + 1;
            if idx > rank {
                return Err(Error::config(format!("letter {ch:?} beyond rank {rank}")));
            }
            letters.push(-(idx as i8));
        } else {
            return Err(Error::config(format!("bad word character {ch:?}")));
        }
    }
    Ok(reduce_word(&letters))
}

impl GroupElement {
    pub fn identity_word() -> GroupElement {
        GroupElement::Word(vec![])
    }

    pub fn display(&self) -> String {
        match self {
            GroupElement::Word(w) => word_to_string(w),
            GroupElement::Translation(v) => format!(
                "t({})",
                v.iter().map(rat_to_string).collect::<Vec<_>>().join(", ")
            ),
            GroupElement::Matrix(m) => m.display(),
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn word_reduction() {
        assert_eq!(reduce_word(&[1, -1, 2]), vec![2]);
        assert_eq!(reduce_word(&[1, 2, -2, -1]), Vec::<i8>::new());
        assert_eq!(reduce_word(&[1, 1, -2, 2, 1]), vec![1, 1, 1]);
    }

    #[test]
    fn word_parsing() {
        assert_eq!(parse_word("aaB", 2).unwrap(), vec![1, 1, -2]);
        assert_eq!(parse_word("e", 2).unwrap(), Vec::<i8>::new());
        assert_eq!(parse_word("aA", 2).unwrap(), Vec::<i8>::new());
        assert!(parse_word("c", 2).is_err());
    }
}
