//! Large sets with few distances, built from null subspaces and rotation
//! orbits modulo `p` and lifted by all multiples of `p`.

use serde::{Deserialize, Serialize};

use crate::error::{LabError, Result};
use crate::limits::check_search;
use crate::ring::vector::encode;
use crate::ring::{Modulus, PointSet};
use crate::rotations::{rotation_group, Rotation};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Construction {
    /// `x_1 = 1..l` times pairs `(u, xi u)` with `xi^k = -1`.
    OddPowerSum,
    /// `-1` is a square: pairs `(u, i u)`.
    SquareRoot,
    /// `n = 0 mod 4` with `-1` a non-square: blocks `(u, v, au + bv, bu - av)`.
    FourBlocks,
    /// `n = 2 mod 4` with `-1` a non-square: a subgroup orbit times four-blocks.
    SubgroupOrbit,
}

#[derive(Debug, Clone, PartialEq)]
pub struct SharpnessExample {
    pub branch: Construction,
    pub p: u64,
    pub r: u32,
    pub n: usize,
    /// The level-one set `E_1`.
    pub base: PointSet,
    /// `E_r = E_1 + (p Z/p^r)^n`.
    pub set: PointSet,
    /// `|Delta(E_1)|` as predicted by the construction.
    pub base_distances: usize,
    /// `p^{r-1} |Delta(E_1)|`.
    pub distance_bound: u128,
    /// `|E_r| / q^n`.
    pub density: f64,
    /// Exponent `k` of the power-sum form the set is built for.
    pub exponent: u32,
}

fn lift(base: &PointSet, m: &Modulus) -> Result<PointSet> {
    let n = base.arity();
    let p = m.p();
    let fibre = m.pow_p(m.r() - 1);
    check_search(base.len() as u128 * (fibre as u128).pow(n as u32))?;
    let q = m.q();
    let mut keys = Vec::new();
    let mut digits = vec![0u64; n];
    for x in base.points() {
        loop {
            let pt: Vec<u64> = x.iter().zip(&digits).map(|(&c, &d)| c + p * d).collect();
            keys.push(encode(q, &pt));
            let mut i = 0;
            while i < n {
                digits[i] += 1;
                if digits[i] < fibre {
                    break;
                }
                digits[i] = 0;
                i += 1;
            }
            if i == n {
                break;
            }
        }
    }
    Ok(PointSet::from_keys(m, n, keys))
}

fn finish(branch: Construction, m: &Modulus, base: PointSet, base_distances: usize, exponent: u32) -> Result<SharpnessExample> {
    let set = lift(&base, m)?;
    let n = base.arity();
    Ok(SharpnessExample {
        branch,
        p: m.p(),
        r: m.r(),
        n,
        density: set.len() as f64 / m.ambient_size(n) as f64,
        distance_bound: m.pow_p(m.r() - 1) as u128 * base_distances as u128,
        base,
        set,
        base_distances,
        exponent,
    })
}

/// Product of coordinate blocks: every combination of one tuple per block.
fn product(blocks: &[Vec<Vec<u64>>]) -> Vec<Vec<u64>> {
    let mut out = vec![Vec::new()];
    for block in blocks {
        out = out
            .into_iter()
            .flat_map(|prefix| {
                block.iter().map(move |b| {
                    let mut v = prefix.clone();
                    v.extend_from_slice(b);
                    v
                })
            })
            .collect();
    }
    out
}

/// Smallest `xi` with `xi^k = -1 (mod p)`.
fn kth_root_of_minus_one(p: u64, k: u32) -> Option<u64> {
    let m = Modulus::new(p, 1).ok()?;
    (1..p).find(|&x| m.pow(x, k as u64) == p - 1)
}

/// Odd `n >= 3` and the form `x_1^k + ... + x_n^k`.
pub fn sharpness_example_odd(p: u64, n: usize, k: u32, l: u64, r: u32) -> Result<SharpnessExample> {
    if n < 3 || n.is_multiple_of(2) {
        return Err(LabError::InvalidParameter(format!("n = {n} must be odd and at least 3")));
    }
    let m = Modulus::new(p, r)?;
    let xi = kth_root_of_minus_one(p, k).ok_or(LabError::NoKthRootOfMinusOne { k, p })?;
    if l == 0 || 2 * l >= p {
        return Err(LabError::BadL { l, p });
    }
    let modp = m.truncate(1);
    let first: Vec<Vec<u64>> = (1..=l).map(|x| vec![x]).collect();
    let null: Vec<Vec<u64>> = (0..p).map(|u| vec![u, u * xi % p]).collect();
    let mut blocks = vec![first];
    blocks.extend(std::iter::repeat_n(null, (n - 1) / 2));
    let base = PointSet::from_points(&modp, n, product(&blocks))?;
    let mut powers: Vec<u64> = (0..l)
        .flat_map(|t| [modp.pow(t, k as u64), modp.pow(p - t % p, k as u64) % p])
        .collect();
    powers.sort_unstable();
    powers.dedup();
    finish(Construction::OddPowerSum, &m, base, powers.len(), k)
}

fn sqrt_minus_one(p: u64) -> Option<u64> {
    (1..p).find(|&x| x * x % p == p - 1)
}

/// `(a, b)` with `a^2 + b^2 = -1 (mod p)`.
fn sum_of_squares_minus_one(p: u64) -> (u64, u64) {
    for a in 0..p {
        for b in a..p {
            if (a * a + b * b) % p == p - 1 {
                return (a, b);
            }
        }
    }
    unreachable!("every residue is a sum of two squares modulo an odd prime")
}

fn four_block(p: u64) -> Vec<Vec<u64>> {
    let (a, b) = sum_of_squares_minus_one(p);
    let mut out = Vec::with_capacity((p * p) as usize);
    for u in 0..p {
        for v in 0..p {
            out.push(vec![u, v, (a * u + b * v) % p, (b * u + (p - a) * v) % p]);
        }
    }
    out
}

/// Element of order `p + 1` in the rotation group modulo `p`.
fn rotation_generator(modp: &Modulus) -> Result<Rotation> {
    let order = modp.p() + 1;
    for g in rotation_group(modp)? {
        let mut acc = g;
        let mut k = 1;
        while acc != Rotation::IDENTITY {
            acc = acc.compose(modp, &g);
            k += 1;
        }
        if k == order {
            return Ok(g);
        }
    }
    unreachable!("the rotation group is cyclic of order p + 1 when p = 3 mod 4")
}

/// Even `n` and the distance form. For `p = 3 (mod 4)` and `n = 2 (mod 4)`
/// the first two coordinates run over the orbit of `(1, 0)` under the
/// subgroup of index `c`.
pub fn sharpness_example_even(p: u64, n: usize, c: u64, r: u32) -> Result<SharpnessExample> {
    if n == 0 || n % 2 == 1 {
        return Err(LabError::UnsupportedBranch(format!("n = {n} is not a positive even number")));
    }
    let m = Modulus::new(p, r)?;
    let modp = m.truncate(1);
    if let Some(i) = sqrt_minus_one(p) {
        let pair: Vec<Vec<u64>> = (0..p).map(|u| vec![u, u * i % p]).collect();
        let base = PointSet::from_points(&modp, n, product(&vec![pair; n / 2]))?;
        return finish(Construction::SquareRoot, &m, base, 1, 2);
    }
    if n.is_multiple_of(4) {
        let base = PointSet::from_points(&modp, n, product(&vec![four_block(p); n / 4]))?;
        return finish(Construction::FourBlocks, &m, base, 1, 2);
    }
    if c == 0 || !(p + 1).is_multiple_of(c) {
        return Err(LabError::DivisibilityFailed { c, p_plus_one: p + 1 });
    }
    let theta = rotation_generator(&modp)?;
    let mut step = Rotation::IDENTITY;
    for _ in 0..c {
        step = step.compose(&modp, &theta);
    }
    let mut orbit = Vec::new();
    let mut g = Rotation::IDENTITY;
    loop {
        let x = g.apply(&modp, &[1, 0]);
        orbit.push(x.to_vec());
        g = g.compose(&modp, &step);
        if g == Rotation::IDENTITY {
            break;
        }
    }
    let mut blocks = vec![orbit];
    blocks.extend(std::iter::repeat_n(four_block(p), (n - 2) / 4));
    let base = PointSet::from_points(&modp, n, product(&blocks))?;
    let base_distances = ((p + 1) / c) as usize;
    finish(Construction::SubgroupOrbit, &m, base, base_distances, 2)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::distance::{distance_census, CensusPath};
    use crate::ring::DiagonalForm;

    #[test]
    fn odd_example_sizes_and_distances() {
        let ex = sharpness_example_odd(5, 3, 2, 1, 1).unwrap();
        assert_eq!(ex.set.len(), 5);
        let f = DiagonalForm::power_sum(3, 2);
        let c = distance_census(&f, &ex.set, &ex.set, CensusPath::Loop).unwrap();
        assert_eq!(c.distance_set, vec![0]);

        let ex = sharpness_example_odd(5, 3, 2, 2, 2).unwrap();
        assert_eq!(ex.set.len(), 2 * 5usize.pow(6 - 2));
        let c = distance_census(&f, &ex.set, &ex.set, CensusPath::Convolution).unwrap();
        assert!(c.distance_set.len() as u128 <= ex.distance_bound);
        assert!((c.distance_set.len() as u64) < 2 * 2 * 5);
    }

    #[test]
    fn odd_example_errors() {
        assert_eq!(
            sharpness_example_odd(7, 3, 2, 1, 1),
            Err(LabError::NoKthRootOfMinusOne { k: 2, p: 7 })
        );
        assert_eq!(sharpness_example_odd(5, 3, 2, 3, 1), Err(LabError::BadL { l: 3, p: 5 }));
    }

    #[test]
    fn even_orbit_example() {
        let ex = sharpness_example_even(3, 2, 2, 1).unwrap();
        assert_eq!(ex.branch, Construction::SubgroupOrbit);
        assert_eq!(ex.base.len(), 2);
        let c = distance_census(&DiagonalForm::distance(2), &ex.set, &ex.set, CensusPath::Loop).unwrap();
        assert!(c.distance_set.len() <= 2);

        let ex = sharpness_example_even(7, 2, 4, 2).unwrap();
        assert!(ex.density >= 0.25 / 7.0);
        let c = distance_census(&DiagonalForm::distance(2), &ex.set, &ex.set, CensusPath::Loop).unwrap();
        assert!(c.distance_set.len() <= 14);
        assert_eq!(
            sharpness_example_even(7, 2, 3, 1),
            Err(LabError::DivisibilityFailed { c: 3, p_plus_one: 8 })
        );
    }

    #[test]
    fn null_branches_have_only_zero_distance() {
        for (p, n) in [(5, 2), (3, 4), (5, 4)] {
            let ex = sharpness_example_even(p, n, 1, 1).unwrap();
            assert_eq!(ex.base.len() as u64, p.pow(n as u32 / 2));
            let c = distance_census(&DiagonalForm::distance(n), &ex.set, &ex.set, CensusPath::Loop).unwrap();
            assert_eq!(c.distance_set, vec![0]);
        }
    }
}
