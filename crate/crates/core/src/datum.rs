//! Combinatorial multiplication-type data.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// One Frobenius orbit of embeddings: length `e`, rank `n` per embedding,
/// and the multiplication type `f` listed in cyclic order.
#[derive(Clone, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct OrbitDatum {
    pub e: usize,
    pub n: usize,
    pub f: Vec<usize>,
}

impl OrbitDatum {
    pub fn new(e: usize, n: usize, f: Vec<usize>) -> Result<Self> {
        let d = OrbitDatum { e, n, f };
        d.check()?;
        Ok(d)
    }

    pub fn check(&self) -> Result<()> {
        if self.e == 0 || self.n == 0 {
            return Err(Error::InvalidDatum("orbit length and rank must be >= 1".into()));
        }
        if self.f.len() != self.e {
            return Err(Error::InvalidDatum(format!(
                "multiplication type has {} entries, orbit length is {}",
                self.f.len(),
                self.e
            )));
        }
        if let Some(&bad) = self.f.iter().find(|&&x| x > self.n) {
            return Err(Error::InvalidDatum(format!("f value {bad} exceeds n = {}", self.n)));
        }
        Ok(())
    }

    /// Cyclic positions ordered so that `f` is non-increasing; ties keep
    /// cyclic order. Entry `i` is the position of label `τ_{i+1}`.
    pub fn sorted_labels(&self) -> Vec<usize> {
        let mut idx: Vec<usize> = (0..self.e).collect();
        idx.sort_by(|&a, &b| self.f[b].cmp(&self.f[a]));
        idx
    }

    /// Same datum with `f` rotated left by `shift` positions.
    pub fn rotated(&self, shift: usize) -> OrbitDatum {
        let mut f = self.f.clone();
        f.rotate_left(shift % self.e);
        OrbitDatum { e: self.e, n: self.n, f }
    }
}

/// An embedding, addressed as (orbit index, cyclic position).
pub type Embedding = (usize, usize);

/// Multiplication data for a whole module.
#[derive(Clone, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct PelDatum {
    pub p: u64,
    pub orbits: Vec<OrbitDatum>,
    #[serde(default = "default_r")]
    pub r: usize,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub pairing: Option<Vec<(Embedding, Embedding)>>,
}

fn default_r() -> usize {
    1
}

impl PelDatum {
    pub fn new(p: u64, orbits: Vec<OrbitDatum>, r: usize) -> Result<Self> {
        let d = PelDatum {
            p,
            orbits,
            r,
            pairing: None,
        };
        d.check_structure()?;
        Ok(d)
    }

    pub fn with_pairing(mut self, pairing: Vec<(Embedding, Embedding)>) -> Result<Self> {
        self.pairing = Some(pairing);
        self.check_structure()?;
        Ok(self)
    }

    /// Shape checks only; the signature constraint is reported separately by
    /// [`PelDatum::signature_violations`].
    pub fn check_structure(&self) -> Result<()> {
        if self.orbits.is_empty() {
            return Err(Error::InvalidDatum("at least one orbit is required".into()));
        }
        if self.r == 0 {
            return Err(Error::InvalidDatum("multiplicity r must be >= 1".into()));
        }
        for o in &self.orbits {
            o.check()?;
        }
        let n = self.orbits[0].n;
        if self.orbits.iter().any(|o| o.n != n) {
            return Err(Error::InvalidDatum("rank n must agree across orbits".into()));
        }
        if let Some(pairs) = &self.pairing {
            for &(a, b) in pairs {
                for (o, k) in [a, b] {
                    if o >= self.orbits.len() || k >= self.orbits[o].e {
                        return Err(Error::InvalidDatum(format!(
                            "pairing refers to missing embedding ({o}, {k})"
                        )));
                    }
                }
            }
        }
        Ok(())
    }

    pub fn n(&self) -> usize {
        self.orbits[0].n
    }

    /// Least common multiple of the orbit lengths.
    pub fn default_degree(&self) -> usize {
        self.orbits
            .iter()
            .fold(1usize, |acc, o| num_integer::lcm(acc, o.e))
    }

    pub fn embedding_count(&self) -> usize {
        self.orbits.iter().map(|o| o.e).sum()
    }

    /// `2·n·L + 8` with `L` the default ring degree.
    pub fn default_precision(&self) -> u32 {
        (2 * self.n() * self.default_degree() + 8) as u32
    }

    /// Pairs whose multiplication types do not sum to `n`.
    pub fn signature_violations(&self) -> Vec<(Embedding, Embedding)> {
        let Some(pairs) = &self.pairing else {
            return Vec::new();
        };
        let n = self.n();
        pairs
            .iter()
            .copied()
            .filter(|&((o1, k1), (o2, k2))| self.orbits[o1].f[k1] + self.orbits[o2].f[k2] != n)
            .collect()
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn labels_sort_descending_stably() {
        let o = OrbitDatum::new(4, 3, vec![1, 3, 1, 2]).unwrap();
        assert_eq!(o.sorted_labels(), vec![1, 3, 0, 2]);
    }

    #[test]
    fn rejects_bad_data() {
        assert!(OrbitDatum::new(2, 2, vec![1]).is_err());
        assert!(OrbitDatum::new(1, 2, vec![3]).is_err());
        let o = OrbitDatum::new(1, 2, vec![1]).unwrap();
        let o3 = OrbitDatum::new(1, 3, vec![1]).unwrap();
        assert!(PelDatum::new(2, vec![o.clone(), o3], 1).is_err());
        assert!(PelDatum::new(2, vec![o.clone()], 0).is_err());
        assert!(PelDatum::new(2, vec![o], 1).unwrap().with_pairing(vec![((0, 0), (0, 1))]).is_err());
    }

    #[test]
    fn signature_check() {
        let o = OrbitDatum::new(2, 3, vec![2, 2]).unwrap();
        let d = PelDatum::new(5, vec![o], 1).unwrap().with_pairing(vec![((0, 0), (0, 1))]).unwrap();
        assert_eq!(d.signature_violations().len(), 1);
        let o = OrbitDatum::new(2, 3, vec![2, 1]).unwrap();
        let d = PelDatum::new(5, vec![o], 1).unwrap().with_pairing(vec![((0, 0), (0, 1))]).unwrap();
        assert!(d.signature_violations().is_empty());
        assert_eq!(d.default_precision(), 2 * 3 * 2 + 8);
    }
}
