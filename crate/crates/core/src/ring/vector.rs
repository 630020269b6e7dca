use serde::{Deserialize, Serialize};

use super::Modulus;
use crate::error::{LabError, Result};

/// A vector of canonical residues in `(Z/p^rZ)^n`.
#[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(transparent)]
pub struct RingVec(pub Vec<u64>);

impl RingVec {
    pub fn new(coords: Vec<u64>) -> Self {
        RingVec(coords)
    }

    pub fn zero(n: usize) -> Self {
        RingVec(vec![0; n])
    }

    /// Reduces arbitrary integers into the ring.
    pub fn from_ints(m: &Modulus, coords: &[i64]) -> Self {
        RingVec(coords.iter().map(|&c| m.reduce_i64(c)).collect())
    }

    pub fn arity(&self) -> usize {
        self.0.len()
    }

    pub fn coords(&self) -> &[u64] {
        &self.0
    }

    pub fn is_zero(&self) -> bool {
        self.0.iter().all(|&c| c == 0)
    }

    /// `v_z`, the minimum coordinate valuation (equal to `r` iff `z = 0`).
    pub fn valuation(&self, m: &Modulus) -> u32 {
        valuation(m, &self.0)
    }

    /// Writes `z = p^v * z~` with `z~` primitive modulo `p^(r - v)`.
    pub fn split(&self, m: &Modulus) -> Result<(u32, RingVec, Modulus)> {
        let (v, prim) = split(m, &self.0)?;
        Ok((v, RingVec(prim), m.truncate(m.r() - v)))
    }

    pub fn scale(&self, m: &Modulus, c: u64) -> RingVec {
        RingVec(self.0.iter().map(|&x| m.mul(x, c)).collect())
    }

    pub fn add(&self, m: &Modulus, other: &RingVec) -> RingVec {
        RingVec(self.0.iter().zip(&other.0).map(|(&a, &b)| m.add(a, b)).collect())
    }

    pub fn sub(&self, m: &Modulus, other: &RingVec) -> RingVec {
        RingVec(self.0.iter().zip(&other.0).map(|(&a, &b)| m.sub(a, b)).collect())
    }

    pub fn dot(&self, m: &Modulus, other: &RingVec) -> u64 {
        dot(m, &self.0, &other.0)
    }
}

impl From<Vec<u64>> for RingVec {
    fn from(v: Vec<u64>) -> Self {
        RingVec(v)
    }
}

pub fn valuation(m: &Modulus, z: &[u64]) -> u32 {
    z.iter().map(|&c| m.ord_p(c)).min().unwrap_or(m.r())
}

pub fn split(m: &Modulus, z: &[u64]) -> Result<(u32, Vec<u64>)> {
    let v = valuation(m, z);
    if v == m.r() {
        return Err(LabError::ZeroVector);
    }
    let scale = m.pow_p(v);
    let inner = m.pow_p(m.r() - v);
    Ok((v, z.iter().map(|&c| (c / scale) % inner).collect()))
}

#[inline]
pub fn dot(m: &Modulus, a: &[u64], b: &[u64]) -> u64 {
    a.iter()
        .zip(b)
        .fold(0, |acc, (&x, &y)| m.add(acc, m.mul(x, y)))
}

/// Little-endian base-`q` encoding: `index = sum x_i q^i`.
#[inline]
pub fn encode(q: u64, z: &[u64]) -> u64 {
    z.iter().rev().fold(0, |acc, &c| acc * q + c)
}

#[inline]
pub fn decode_into(q: u64, mut index: u64, out: &mut [u64]) {
    for c in out.iter_mut() {
        *c = index % q;
        index /= q;
    }
}

pub fn decode(q: u64, index: u64, n: usize) -> Vec<u64> {
    let mut out = vec![0; n];
    decode_into(q, index, &mut out);
    out
}

/// Iterates every vector of `(Z/qZ)^n` in encoding order.
pub fn all_vectors(q: u64, n: usize) -> impl Iterator<Item = Vec<u64>> {
    let total = (q as u128).pow(n as u32) as u64;
    (0..total).map(move |i| decode(q, i, n))
}
