//! Exact difference histograms through a number-theoretic transform.
//!
//! `D(z) = #{(x, y) in E1 x E2 : x - y = z}` satisfies `D^(k) = A1(k) A2(-k)`
//! where `A_i` is the transform of the indicator of `E_i`. Working over a
//! prime field `F_P` with `P = 1 (mod q)` and `P > q^n` makes the inverse
//! transform recover every count exactly.

use rayon::prelude::*;

use crate::error::Result;
use crate::limits::check_search;
use crate::ring::{is_prime, pow_mod_u128, Modulus, PointSet};

#[inline]
fn mulmod(a: u64, b: u64, p: u64) -> u64 {
    ((a as u128 * b as u128) % p as u128) as u64
}

#[inline]
fn addmod(a: u64, b: u64, p: u64) -> u64 {
    let s = a + b;
    if s >= p {
        s - p
    } else {
        s
    }
}

/// Roots of unity of order `q` in `F_P`.
#[derive(Debug, Clone)]
pub struct NttPlan {
    modulus: Modulus,
    arity: usize,
    prime: u64,
    /// `omega^t` for `t < q`, `omega` of exact order `q`.
    powers: Vec<u64>,
}

impl NttPlan {
    pub fn new(modulus: &Modulus, arity: usize) -> Result<Self> {
        check_search(modulus.ambient_size(arity))?;
        let q = modulus.q();
        let mut k = (1u64 << 60) / q + 1;
        let prime = loop {
            let cand = k * q + 1;
            if is_prime(cand) {
                break cand;
            }
            k += 1;
        };
        let cofactor = (prime - 1) / q;
        let omega = (2..)
            .map(|a| pow_mod_u128(a, cofactor, prime))
            .find(|&w| pow_mod_u128(w, q / modulus.p(), prime) != 1)
            .expect("F_P* is cyclic, so a root of exact order q exists");
        let mut powers = Vec::with_capacity(q as usize);
        let mut acc = 1;
        for _ in 0..q {
            powers.push(acc);
            acc = mulmod(acc, omega, prime);
        }
        Ok(NttPlan {
            modulus: modulus.clone(),
            arity,
            prime,
            powers,
        })
    }

    pub fn prime(&self) -> u64 {
        self.prime
    }

    fn root(&self, t: usize, inverse: bool) -> u64 {
        let q = self.powers.len();
        if inverse {
            self.powers[t % q]
        } else {
            self.powers[(q - t % q) % q]
        }
    }

    fn line(&self, input: &[u64], offset: usize, stride: usize, len: usize, out: &mut [u64], inverse: bool) {
        if len == 1 {
            out[0] = input[offset];
            return;
        }
        let p = self.modulus.p() as usize;
        let q = self.powers.len();
        let sub = len / p;
        let mut parts = vec![0u64; len];
        for s in 0..p {
            self.line(
                input,
                offset + s * stride,
                stride * p,
                sub,
                &mut parts[s * sub..(s + 1) * sub],
                inverse,
            );
        }
        let step = q / len;
        for (k, slot) in out.iter_mut().enumerate().take(len) {
            let mut acc = 0;
            for s in 0..p {
                let w = self.root((s * k) % len * step, inverse);
                acc = addmod(acc, mulmod(parts[s * sub + k % sub], w, self.prime), self.prime);
            }
            *slot = acc;
        }
    }

    fn transform(&self, data: &[u64], inverse: bool) -> Vec<u64> {
        let q = self.modulus.q() as usize;
        let rows = data.len() / q;
        let mut cur = data.to_vec();
        let mut buf = vec![0u64; cur.len()];
        for _ in 0..self.arity {
            buf.par_chunks_mut(q)
                .zip(cur.par_chunks(q))
                .for_each(|(out, line)| self.line(line, 0, 1, q, out, inverse));
            cur.par_iter_mut().enumerate().for_each(|(o, slot)| {
                *slot = buf[(o % rows) * q + o / rows];
            });
        }
        cur
    }

    fn dense(&self, set: &PointSet) -> Vec<u64> {
        let mut v = vec![0u64; self.modulus.ambient_size(self.arity) as usize];
        for &k in set.keys() {
            v[k as usize] = 1;
        }
        v
    }

    /// `D(z)` for every encoded `z`.
    pub fn difference_histogram(&self, e1: &PointSet, e2: &PointSet) -> Result<Vec<u64>> {
        e1.same_space(e2)?;
        let size = self.modulus.ambient_size(self.arity) as usize;
        let a1 = self.transform(&self.dense(e1), false);
        let a2 = self.transform(&self.dense(e2), true);
        let prod: Vec<u64> = a1
            .par_iter()
            .zip(a2.par_iter())
            .map(|(&x, &y)| mulmod(x, y, self.prime))
            .collect();
        let raw = self.transform(&prod, true);
        let inv_size = pow_mod_u128(size as u64 % self.prime, self.prime - 2, self.prime);
        Ok(raw.into_par_iter().map(|v| mulmod(v, inv_size, self.prime)).collect())
    }
}

/// Exact `D(z)` by the transform when that is cheaper than the pair loop.
pub fn difference_histogram(e1: &PointSet, e2: &PointSet) -> Result<Vec<u64>> {
    e1.same_space(e2)?;
    let m = e1.modulus();
    let size = m.ambient_size(e1.arity());
    let pairs = e1.len() as u128 * e2.len() as u128;
    let ntt_cost = size * (m.p() as u128 * m.r() as u128 * e1.arity() as u128 * 3 + 4);
    if pairs <= ntt_cost {
        difference_histogram_pairs(e1, e2)
    } else {
        NttPlan::new(m, e1.arity())?.difference_histogram(e1, e2)
    }
}

/// `D(z)` by looping over all pairs.
pub fn difference_histogram_pairs(e1: &PointSet, e2: &PointSet) -> Result<Vec<u64>> {
    e1.same_space(e2)?;
    let m = e1.modulus();
    let n = e1.arity();
    check_search(m.ambient_size(n))?;
    let size = m.ambient_size(n) as usize;
    let a = e1.flat_points();
    let b = e2.flat_points();
    let q = m.q();
    let chunk = n.max(1);
    Ok(a.par_chunks(chunk)
        .fold(
            || vec![0u64; size],
            |mut hist, x| {
                for y in b.chunks(chunk) {
                    let mut idx = 0u64;
                    for i in (0..n).rev() {
                        idx = idx * q + m.sub(x[i], y[i]);
                    }
                    hist[idx as usize] += 1;
                }
                hist
            },
        )
        .reduce(
            || vec![0u64; size],
            |mut l, r| {
                l.iter_mut().zip(r).for_each(|(a, b)| *a += b);
                l
            },
        ))
}
