use std::collections::HashSet;

use serde::{Deserialize, Serialize};

use super::vector::{decode, decode_into, encode};
use super::Modulus;
use crate::error::{LabError, Result};
use crate::limits::BITMAP_THRESHOLD;

#[derive(Debug, Clone)]
enum Membership {
    Bitmap(Vec<u64>),
    Hashed(HashSet<u64>),
}

impl Membership {
    fn build(ambient: u128, keys: &[u64]) -> Self {
        if ambient <= BITMAP_THRESHOLD {
            let mut bits = vec![0u64; (ambient as usize).div_ceil(64)];
            for &k in keys {
                bits[(k / 64) as usize] |= 1 << (k % 64);
            }
            Membership::Bitmap(bits)
        } else {
            Membership::Hashed(keys.iter().copied().collect())
        }
    }

    #[inline]
    fn contains(&self, key: u64) -> bool {
        match self {
            Membership::Bitmap(bits) => bits
                .get((key / 64) as usize)
                .is_some_and(|w| w & (1 << (key % 64)) != 0),
            Membership::Hashed(set) => set.contains(&key),
        }
    }
}

/// A finite subset of `(Z/p^rZ)^n`.
///
/// Points are stored by their little-endian base-`q` encoding, sorted and
/// deduplicated, with a bitmap (small ambient spaces) or hash set for
/// constant-time membership.
#[derive(Debug, Clone)]
pub struct PointSet {
    modulus: Modulus,
    arity: usize,
    keys: Vec<u64>,
    membership: Membership,
}

impl PartialEq for PointSet {
    fn eq(&self, other: &Self) -> bool {
        self.modulus == other.modulus && self.arity == other.arity && self.keys == other.keys
    }
}

impl Eq for PointSet {}

impl PointSet {
    pub fn from_keys(modulus: &Modulus, arity: usize, mut keys: Vec<u64>) -> Self {
        keys.sort_unstable();
        keys.dedup();
        let membership = Membership::build(modulus.ambient_size(arity), &keys);
        PointSet {
            modulus: modulus.clone(),
            arity,
            keys,
            membership,
        }
    }

    pub fn from_points<I, P>(modulus: &Modulus, arity: usize, points: I) -> Result<Self>
    where
        I: IntoIterator<Item = P>,
        P: AsRef<[u64]>,
    {
        let q = modulus.q();
        let mut keys = Vec::new();
        for pt in points {
            let pt = pt.as_ref();
            if pt.len() != arity {
                return Err(LabError::ArityMismatch {
                    expected: arity,
                    found: pt.len(),
                });
            }
            let reduced: Vec<u64> = pt.iter().map(|&c| c % q).collect();
            keys.push(encode(q, &reduced));
        }
        Ok(Self::from_keys(modulus, arity, keys))
    }

    /// Builds a set from a flat row-major buffer of canonical coordinates.
    pub fn from_flat(modulus: &Modulus, arity: usize, flat: &[u64]) -> Self {
        let q = modulus.q();
        let keys = flat.chunks(arity.max(1)).map(|pt| encode(q, pt)).collect();
        Self::from_keys(modulus, arity, keys)
    }

    pub fn empty(modulus: &Modulus, arity: usize) -> Self {
        Self::from_keys(modulus, arity, Vec::new())
    }

    /// The whole space `(Z/p^rZ)^n`.
    pub fn full(modulus: &Modulus, arity: usize) -> Self {
        let total = modulus.ambient_size(arity) as u64;
        Self::from_keys(modulus, arity, (0..total).collect())
    }

    pub fn modulus(&self) -> &Modulus {
        &self.modulus
    }

    pub fn arity(&self) -> usize {
        self.arity
    }

    pub fn len(&self) -> usize {
        self.keys.len()
    }

    pub fn is_empty(&self) -> bool {
        self.keys.is_empty()
    }

    pub fn keys(&self) -> &[u64] {
        &self.keys
    }

    #[inline]
    pub fn contains_key(&self, key: u64) -> bool {
        self.membership.contains(key)
    }

    pub fn contains(&self, point: &[u64]) -> bool {
        point.len() == self.arity && self.contains_key(encode(self.modulus.q(), point))
    }

    pub fn points(&self) -> impl Iterator<Item = Vec<u64>> + '_ {
        let q = self.modulus.q();
        self.keys.iter().map(move |&k| decode(q, k, self.arity))
    }

    /// Points in lexicographic coordinate order, the order used for output.
    pub fn sorted_points(&self) -> Vec<Vec<u64>> {
        let mut pts: Vec<Vec<u64>> = self.points().collect();
        pts.sort_unstable();
        pts
    }

    /// All points decoded into one flat row-major buffer.
    pub fn flat_points(&self) -> Vec<u64> {
        let q = self.modulus.q();
        let mut out = vec![0; self.keys.len() * self.arity];
        for (chunk, &k) in out.chunks_mut(self.arity.max(1)).zip(&self.keys) {
            decode_into(q, k, chunk);
        }
        out
    }

    pub fn same_space(&self, other: &PointSet) -> Result<()> {
        if self.modulus != other.modulus || self.arity != other.arity {
            Err(LabError::ModulusMismatch)
        } else {
            Ok(())
        }
    }

    /// `{-x : x in self}`.
    pub fn negated(&self) -> PointSet {
        let m = &self.modulus;
        let keys = self
            .points()
            .map(|pt| {
                let neg: Vec<u64> = pt.iter().map(|&c| m.neg(c)).collect();
                encode(m.q(), &neg)
            })
            .collect();
        PointSet::from_keys(m, self.arity, keys)
    }

    pub fn is_symmetric(&self) -> bool {
        self.negated() == *self
    }

    pub fn to_json(&self) -> serde_json::Value {
        serde_json::to_value(PointSetRecord::from(self)).expect("point sets serialize")
    }

    /// One `x_1,...,x_n` row per point, in lexicographic order.
    pub fn to_csv(&self) -> String {
        let mut out = String::new();
        for pt in self.sorted_points() {
            let row: Vec<String> = pt.iter().map(|c| c.to_string()).collect();
            out.push_str(&row.join(","));
            out.push('\n');
        }
        out
    }

    pub fn from_csv(modulus: &Modulus, arity: usize, text: &str) -> Result<Self> {
        let mut pts = Vec::new();
        for line in text.lines().map(str::trim).filter(|l| !l.is_empty()) {
            let row = line
                .split(',')
                .map(|c| {
                    c.trim()
                        .parse::<u64>()
                        .map_err(|e| LabError::InvalidParameter(format!("bad coordinate `{c}`: {e}")))
                })
                .collect::<Result<Vec<u64>>>()?;
            pts.push(row);
        }
        Self::from_points(modulus, arity, pts)
    }
}

/// Serialized form: sorted list of coordinate tuples.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct PointSetRecord {
    pub p: u64,
    pub r: u32,
    pub n: usize,
    pub points: Vec<Vec<u64>>,
}

impl From<&PointSet> for PointSetRecord {
    fn from(s: &PointSet) -> Self {
        PointSetRecord {
            p: s.modulus.p(),
            r: s.modulus.r(),
            n: s.arity,
            points: s.sorted_points(),
        }
    }
}

impl TryFrom<PointSetRecord> for PointSet {
    type Error = LabError;
    fn try_from(rec: PointSetRecord) -> Result<Self> {
        let m = Modulus::new(rec.p, rec.r)?;
        PointSet::from_points(&m, rec.n, rec.points)
    }
}
