use serde::{Deserialize, Serialize};

use crate::error::{LabError, Result};

/// Default cap on `q = p^r`; keeps residue products inside 64 bits.
pub const DEFAULT_CAP: u64 = 1 << 31;

/// The ring `Z/p^rZ` for an odd prime `p`.
///
/// Residues are plain `u64` values kept canonically in `[0, q)`. Every
/// arithmetic helper here reduces eagerly.
#[derive(Debug, Clone, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(try_from = "ModulusParams", into = "ModulusParams")]
pub struct Modulus {
    p: u64,
    r: u32,
    q: u64,
    powers: Vec<u64>,
    wide: bool,
}

#[derive(Serialize, Deserialize)]
struct ModulusParams {
    p: u64,
    r: u32,
}

impl TryFrom<ModulusParams> for Modulus {
    type Error = LabError;
    fn try_from(v: ModulusParams) -> Result<Self> {
        Modulus::new(v.p, v.r)
    }
}

impl From<Modulus> for ModulusParams {
    fn from(m: Modulus) -> Self {
        ModulusParams { p: m.p, r: m.r }
    }
}

pub fn is_prime(n: u64) -> bool {
    if n < 2 {
        return false;
    }
    for small in [2u64, 3, 5, 7, 11, 13, 17, 19, 23, 29, 31, 37] {
        if n.is_multiple_of(small) {
            return n == small;
        }
    }
    // deterministic Miller-Rabin for 64-bit inputs
    let mut d = n - 1;
    let mut s = 0;
    while d.is_multiple_of(2) {
        d /= 2;
        s += 1;
    }
    'witness: for a in [2u64, 3, 5, 7, 11, 13, 17, 19, 23, 29, 31, 37] {
        let mut x = pow_mod_u128(a, d, n);
        if x == 1 || x == n - 1 {
            continue;
        }
        for _ in 1..s {
            x = ((x as u128 * x as u128) % n as u128) as u64;
            if x == n - 1 {
                continue 'witness;
            }
        }
        return false;
    }
    true
}

pub(crate) fn pow_mod_u128(base: u64, mut exp: u64, n: u64) -> u64 {
    let n128 = n as u128;
    let mut acc: u128 = 1 % n128;
    let mut b = base as u128 % n128;
    while exp > 0 {
        if exp & 1 == 1 {
            acc = acc * b % n128;
        }
        b = b * b % n128;
        exp >>= 1;
    }
    acc as u64
}

impl Modulus {
    pub fn new(p: u64, r: u32) -> Result<Self> {
        Self::with_cap(p, r, DEFAULT_CAP)
    }

    /// Builds a modulus whose size may exceed [`DEFAULT_CAP`]; products are
    /// then reduced through 128-bit intermediates.
    pub fn with_cap(p: u64, r: u32, cap: u64) -> Result<Self> {
        if p == 2 {
            return Err(LabError::EvenPrimeRejected);
        }
        if !is_prime(p) {
            return Err(LabError::NotPrime { p });
        }
        if r == 0 {
            return Err(LabError::InvalidParameter("r must be at least 1".into()));
        }
        let cap = cap.min(1 << 63);
        let mut powers = Vec::with_capacity(r as usize + 1);
        let mut acc: u64 = 1;
        powers.push(1);
        for _ in 0..r {
            acc = acc
                .checked_mul(p)
                .filter(|&v| v < cap)
                .ok_or(LabError::Overflow { p, r, cap })?;
            powers.push(acc);
        }
        Ok(Modulus {
            p,
            r,
            q: acc,
            powers,
            wide: acc > u32::MAX as u64,
        })
    }

    #[inline]
    pub fn p(&self) -> u64 {
        self.p
    }

    #[inline]
    pub fn r(&self) -> u32 {
        self.r
    }

    #[inline]
    pub fn q(&self) -> u64 {
        self.q
    }

    /// `p^i` for `0 <= i <= r`.
    #[inline]
    pub fn pow_p(&self, i: u32) -> u64 {
        self.powers[i as usize]
    }

    /// `q^n`, the size of `(Z/p^rZ)^n`.
    pub fn ambient_size(&self, n: usize) -> u128 {
        (self.q as u128).pow(n as u32)
    }

    /// The modulus `p^level` for `1 <= level <= r`.
    pub fn truncate(&self, level: u32) -> Modulus {
        assert!(level >= 1 && level <= self.r, "level out of range");
        Modulus {
            p: self.p,
            r: level,
            q: self.powers[level as usize],
            powers: self.powers[..=level as usize].to_vec(),
            wide: self.powers[level as usize] > u32::MAX as u64,
        }
    }

    #[inline]
    pub fn reduce_i64(&self, x: i64) -> u64 {
        x.rem_euclid(self.q as i64) as u64
    }

    #[inline]
    pub fn reduce_i128(&self, x: i128) -> u64 {
        x.rem_euclid(self.q as i128) as u64
    }

    #[inline]
    pub fn reduce(&self, x: u64) -> u64 {
        x % self.q
    }

    #[inline]
    pub fn add(&self, a: u64, b: u64) -> u64 {
        let s = a + b;
        if s >= self.q {
            s - self.q
        } else {
            s
        }
    }

    #[inline]
    pub fn sub(&self, a: u64, b: u64) -> u64 {
        if a >= b {
            a - b
        } else {
            a + self.q - b
        }
    }

    #[inline]
    pub fn neg(&self, a: u64) -> u64 {
        if a == 0 {
            0
        } else {
            self.q - a
        }
    }

    #[inline]
    pub fn mul(&self, a: u64, b: u64) -> u64 {
        if self.wide {
            ((a as u128 * b as u128) % self.q as u128) as u64
        } else {
            (a * b) % self.q
        }
    }

    pub fn pow(&self, base: u64, mut exp: u64) -> u64 {
        let mut acc = 1 % self.q;
        let mut b = base % self.q;
        while exp > 0 {
            if exp & 1 == 1 {
                acc = self.mul(acc, b);
            }
            b = self.mul(b, b);
            exp >>= 1;
        }
        acc
    }

    /// `ord_p(x)` with the convention `ord_p(0) = r`.
    pub fn ord_p(&self, x: u64) -> u32 {
        let mut x = x % self.q;
        if x == 0 {
            return self.r;
        }
        let mut u = 0;
        while x.is_multiple_of(self.p) {
            x /= self.p;
            u += 1;
        }
        u
    }

    #[inline]
    pub fn is_unit(&self, x: u64) -> bool {
        !x.is_multiple_of(self.p)
    }

    pub fn unit_inverse(&self, x: u64) -> Result<u64> {
        let x = x % self.q;
        if !self.is_unit(x) {
            return Err(LabError::NotAUnit { x, q: self.q });
        }
        let (mut old_r, mut r) = (x as i128, self.q as i128);
        let (mut old_s, mut s) = (1i128, 0i128);
        while r != 0 {
            let quot = old_r / r;
            (old_r, r) = (r, old_r - quot * r);
            (old_s, s) = (s, old_s - quot * s);
        }
        Ok(self.reduce_i128(old_s))
    }

    /// All units of the ring in increasing order.
    pub fn units(&self) -> impl Iterator<Item = u64> + '_ {
        (1..self.q).filter(move |&x| self.is_unit(x))
    }

    /// `p mod 4`, which decides the splitting behaviour of `x^2 + y^2`.
    pub fn p_mod_4(&self) -> u64 {
        self.p % 4
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn constructs_and_rejects() {
        assert_eq!(Modulus::new(3, 2).unwrap().q(), 9);
        assert_eq!(Modulus::new(2, 3), Err(LabError::EvenPrimeRejected));
        assert_eq!(Modulus::new(9, 1), Err(LabError::NotPrime { p: 9 }));
        assert!(matches!(Modulus::new(3, 40), Err(LabError::Overflow { .. })));
        assert!(Modulus::with_cap(3, 35, u64::MAX).is_ok());
    }

    #[test]
    fn ord_p_examples() {
        let m = Modulus::new(3, 2).unwrap();
        assert_eq!(m.ord_p(6), 1);
        assert_eq!(m.ord_p(0), 2);
        assert_eq!(Modulus::new(5, 3).unwrap().ord_p(5), 1);
    }

    #[test]
    fn inverse_examples() {
        let m = Modulus::new(3, 2).unwrap();
        assert_eq!(m.unit_inverse(2), Ok(5));
        assert_eq!(m.unit_inverse(3), Err(LabError::NotAUnit { x: 3, q: 9 }));
        let big = Modulus::new(13, 3).unwrap();
        assert_eq!(big.unit_inverse(1), Ok(1));
        for x in big.units() {
            assert_eq!(big.mul(x, big.unit_inverse(x).unwrap()), 1);
        }
    }

    #[test]
    fn wide_multiplication_matches_u128() {
        let m = Modulus::with_cap(3, 38, u64::MAX).unwrap();
        let (a, b) = (m.q() - 1, m.q() - 2);
        assert_eq!(m.mul(a, b), 2);
    }

    #[test]
    fn ord_p_is_multiplicative_exhaustively() {
        for p in [3u64, 5, 7] {
            for r in 1..=3 {
                let m = Modulus::new(p, r).unwrap();
                for x in 0..m.q() {
                    for y in 0..m.q() {
                        assert_eq!(m.ord_p(m.mul(x, y)), r.min(m.ord_p(x) + m.ord_p(y)));
                    }
                }
            }
        }
    }

    #[test]
    fn primality() {
        let primes: Vec<u64> = (0..60).filter(|&n| is_prime(n)).collect();
        assert_eq!(
            primes,
            vec![2, 3, 5, 7, 11, 13, 17, 19, 23, 29, 31, 37, 41, 43, 47, 53, 59]
        );
        assert!(is_prime(2305843009213693951));
        assert!(!is_prime(2305843009213693953));
    }
}
